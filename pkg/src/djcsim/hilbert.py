"""Composite atom x atom x cavity x cavity Hilbert space.

Sites are numbered 1..4: atom 1, atom 2, cavity 1, cavity 2.  Basis states
are ordered lexicographically in ``(s1, s2, n1, n2)`` with atom 1 slowest.
Spin index 0 is the ground state (down) and 1 the excited state (up).
"""
from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .numkit import check_hermitian, kron

log = logging.getLogger(__name__)

DOWN, UP = 0, 1
ATOM_SITES = (1, 2)
CAVITY_SITES = (3, 4)

NORM_TOL = 1e-10
PSD_TOL = 1e-10
PSD_CLIP_TOL = 1e-8

_SPIN_KINDS = {
    "sigma_z": np.diag([-1.0, 1.0]),
    # |down><up| in the (down, up) ordering
    "sigma_minus": np.array([[0.0, 1.0], [0.0, 0.0]]),
    "sigma_plus": np.array([[0.0, 0.0], [1.0, 0.0]]),
    "sigma_x": np.array([[0.0, 1.0], [1.0, 0.0]]),
    "sigma_y": np.array([[0.0, 1j], [-1j, 0.0]]),
}
_BOSON_KINDS = ("annihilate", "create", "number")


def spin_label(s):
    return "↑" if s == UP else "↓"


@dataclass(frozen=True)
class CompositeSpace:
    """Two two-level atoms and two cavity modes truncated at ``fock_cutoff`` photons."""

    fock_cutoff: int

    def __post_init__(self):
        if int(self.fock_cutoff) != self.fock_cutoff or self.fock_cutoff < 2:
            raise ValueError(f"fock_cutoff must be an integer >= 2, got {self.fock_cutoff!r}")

    @property
    def fock_dim(self) -> int:
        return self.fock_cutoff + 1

    @property
    def site_dims(self) -> tuple:
        d = self.fock_dim
        return (2, 2, d, d)

    @property
    def total_dim(self) -> int:
        return 4 * self.fock_dim ** 2

    def index(self, s1, s2, n1, n2) -> int:
        d = self.fock_dim
        if s1 not in (0, 1) or s2 not in (0, 1) or not (0 <= n1 < d and 0 <= n2 < d):
            raise ValueError(f"label {(s1, s2, n1, n2)} outside the space")
        return ((s1 * 2 + s2) * d + n1) * d + n2

    def label(self, index) -> tuple:
        if not 0 <= index < self.total_dim:
            raise ValueError(f"index {index} outside 0..{self.total_dim - 1}")
        s1, s2, n1, n2 = np.unravel_index(index, self.site_dims)
        return int(s1), int(s2), int(n1), int(n2)

    def label_str(self, index) -> str:
        s1, s2, n1, n2 = self.label(index)
        return f"|{spin_label(s1)}{spin_label(s2)}{n1}{n2}⟩"

    @cached_property
    def labels(self) -> list:
        return [self.label(i) for i in range(self.total_dim)]

    def basis_vector(self, s1, s2, n1, n2) -> np.ndarray:
        v = np.zeros(self.total_dim, dtype=complex)
        v[self.index(s1, s2, n1, n2)] = 1.0
        return v


def build_space(fock_cutoff=4) -> CompositeSpace:
    return CompositeSpace(fock_cutoff)


@dataclass(frozen=True)
class PureState:
    amplitudes: np.ndarray
    space: CompositeSpace

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (self.space.total_dim,):
            raise ValueError(f"amplitude vector has shape {amps.shape}, space has dim {self.space.total_dim}")
        object.__setattr__(self, "amplitudes", amps)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def check_normalized(self, tol=NORM_TOL):
        if abs(self.norm - 1.0) > tol:
            raise ValueError(f"state norm {self.norm!r} deviates from 1 by more than {tol:g}")
        return self

    def density_matrix(self) -> "DensityMatrix":
        a = self.amplitudes
        return DensityMatrix(np.outer(a, a.conj()), self.space.site_dims)


@dataclass(frozen=True)
class DensityMatrix:
    """Density matrix over a product of sites with dimensions ``dims``."""

    matrix: np.ndarray
    dims: tuple

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        n = int(np.prod(self.dims))
        if m.shape != (n, n):
            raise ValueError(f"matrix shape {m.shape} does not match dims {self.dims}")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))

    def validate(self, tol=PSD_TOL):
        """Check Hermiticity, unit trace and positivity to ``tol``."""
        check_hermitian(self.matrix, tol)
        tr = np.trace(self.matrix)
        if abs(tr - 1.0) > tol:
            raise ValueError(f"trace {tr:.12g} deviates from 1")
        lo = np.linalg.eigvalsh(self.matrix).min()
        if lo < -tol:
            raise ValueError(f"negative eigenvalue {lo:.3e}")
        return self


def clip_negative(rho, tol=PSD_CLIP_TOL) -> np.ndarray:
    """Project small negative eigenvalues of a density matrix to zero.

    Eigenvalues below ``-tol`` raise ``ValueError``; between ``-tol`` and
    ``-PSD_TOL`` they are clipped with a warning.
    """
    rho = np.asarray(rho, dtype=complex)
    w, v = np.linalg.eigh(0.5 * (rho + rho.conj().T))
    if w[0] >= -PSD_TOL:
        return rho
    if w[0] < -tol:
        raise ValueError(f"density matrix has eigenvalue {w[0]:.3e} below -{tol:g}")
    log.warning("clipping density-matrix eigenvalue %.3e to zero", w[0])
    w = np.clip(w, 0.0, None)
    return (v * w) @ v.conj().T


def _local_matrix(site, kind, d):
    if site in ATOM_SITES:
        if kind == "identity":
            return np.eye(2)
        if kind not in _SPIN_KINDS:
            raise ValueError(f"operator kind {kind!r} cannot act on atom site {site}")
        return _SPIN_KINDS[kind]
    if site in CAVITY_SITES:
        if kind == "identity":
            return np.eye(d)
        if kind not in _BOSON_KINDS:
            raise ValueError(f"operator kind {kind!r} cannot act on cavity site {site}")
        a = np.diag(np.sqrt(np.arange(1, d, dtype=float)), 1)
        return {"annihilate": a, "create": a.T.copy(), "number": np.diag(np.arange(d, dtype=float))}[kind]
    raise ValueError(f"site must be in 1..4, got {site!r}")


def site_operator(space: CompositeSpace, site, kind) -> np.ndarray:
    """Embed a single-site operator into the full space.

    ``kind`` is one of ``sigma_z``, ``sigma_plus``, ``sigma_minus``,
    ``sigma_x``, ``sigma_y`` (atom sites 1, 2), ``annihilate``, ``create``,
    ``number`` (cavity sites 3, 4) or ``identity``.  The creation operator is
    truncated, so ``a^dagger |cutoff> = 0``.
    """
    local = _local_matrix(site, kind, space.fock_dim)
    mats = [np.eye(d) for d in space.site_dims]
    mats[site - 1] = local
    return kron(*mats).astype(complex)


def site_product(space: CompositeSpace, factors) -> np.ndarray:
    """Product of commuting single-site operators, ``{site: kind}``, built by one Kronecker product."""
    mats = [np.eye(d) for d in space.site_dims]
    for site, kind in factors.items():
        mats[site - 1] = _local_matrix(site, kind, space.fock_dim)
    return kron(*mats).astype(complex)


def excitation_numbers(space: CompositeSpace) -> np.ndarray:
    """Diagonal of the total excitation operator, one entry per basis index."""
    return np.array([s1 + s2 + n1 + n2 for s1, s2, n1, n2 in space.labels], dtype=float)


def excitation_number(space: CompositeSpace) -> np.ndarray:
    """Total excitation operator: atoms in the up state plus photons."""
    return np.diag(excitation_numbers(space)).astype(complex)


def partial_trace(rho, dims, keep) -> np.ndarray:
    """Reduce ``rho`` over a product space with site dimensions ``dims``.

    ``keep`` holds 1-based site numbers; the kept sites stay in their
    original order.  ``rho`` may also be a :class:`DensityMatrix`, in which
    case its own dims are used and ``dims`` may be ``None``.
    """
    if isinstance(rho, DensityMatrix):
        dims = rho.dims
        rho = rho.matrix
    dims = tuple(dims)
    keep = sorted(set(keep))
    if not keep:
        raise ValueError("keep must name at least one site")
    if any(k < 1 or k > len(dims) for k in keep):
        raise ValueError(f"keep sites {keep} outside 1..{len(dims)}")
    rho = np.asarray(rho, dtype=complex)
    n = int(np.prod(dims))
    if rho.shape != (n, n):
        raise ValueError(f"rho shape {rho.shape} does not match dims {dims}")
    nsites = len(dims)
    kidx = [k - 1 for k in keep]
    tidx = [i for i in range(nsites) if i not in kidx]
    t = rho.reshape(dims + dims)
    perm = kidx + tidx + [nsites + i for i in kidx] + [nsites + i for i in tidx]
    dk = int(np.prod([dims[i] for i in kidx]))
    dt = int(np.prod([dims[i] for i in tidx])) if tidx else 1
    t = t.transpose(perm).reshape(dk, dt, dk, dt)
    return np.einsum("ajbj->ab", t)


def reduced_from_pure(psi, dims, keep) -> np.ndarray:
    """Reduced density matrix of pure state(s) without forming ``|psi><psi|``.

    ``psi`` may be a single vector or a stack of shape ``(m, dim)``; the
    result then has shape ``(m, dk, dk)``.
    """
    psi = np.asarray(psi, dtype=complex)
    single = psi.ndim == 1
    psi = np.atleast_2d(psi)
    dims = tuple(dims)
    keep = sorted(set(keep))
    if not keep:
        raise ValueError("keep must name at least one site")
    nsites = len(dims)
    kidx = [k - 1 for k in keep]
    tidx = [i for i in range(nsites) if i not in kidx]
    dk = int(np.prod([dims[i] for i in kidx]))
    t = psi.reshape((psi.shape[0],) + dims).transpose([0] + [i + 1 for i in kidx + tidx]).reshape(psi.shape[0], dk, -1)
    out = t @ t.conj().transpose(0, 2, 1)
    return out[0] if single else out


def excitation_sector_basis(h, seed, threshold=1e-12) -> list:
    """Basis indices connected to the support of ``seed`` through ``h``.

    Breadth-first search over the graph whose edges are matrix elements
    ``|h[i, j]| > threshold``.  The returned (sorted) index set spans the
    smallest coordinate subspace invariant under ``h`` that contains the
    seed.
    """
    h = np.asarray(h)
    amps = seed.amplitudes if isinstance(seed, PureState) else np.asarray(seed)
    adj = np.abs(h) > threshold
    start = np.flatnonzero(np.abs(amps) > threshold)
    seen = set(int(i) for i in start)
    queue = deque(seen)
    while queue:
        i = queue.popleft()
        for j in np.flatnonzero(adj[i]):
            j = int(j)
            if j not in seen:
                seen.add(j)
                queue.append(j)
    return sorted(seen)
