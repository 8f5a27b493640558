"""Concurrence, negativity and detection of entanglement dark periods."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .hilbert import PSD_CLIP_TOL, PSD_TOL

log = logging.getLogger(__name__)

X_TOL = 1e-9
ESD_THRESHOLD = 1e-9

_YY = np.array([[0, 0, 0, -1], [0, 0, 1, 0], [0, 1, 0, 0], [-1, 0, 0, 0]], dtype=complex)


def _clip_batch(rho):
    w, v = np.linalg.eigh(0.5 * (rho + np.conj(np.swapaxes(rho, -1, -2))))
    lo = w[..., 0].min()
    if lo < -PSD_CLIP_TOL:
        raise ValueError(f"density matrix has eigenvalue {lo:.3e} below -{PSD_CLIP_TOL:g}")
    if lo < -PSD_TOL:
        log.warning("clipping density-matrix eigenvalue %.3e to zero", lo)
    return np.clip(w, 0.0, None), v


def concurrence(rho):
    """Wootters concurrence of a two-qubit density matrix (or a stack of them).

    Computed as ``max(0, s1 - s2 - s3 - s4)`` where ``s_i`` are the
    descending singular values of ``W^T (sy x sy) W`` with ``rho = W W^+``.
    These equal the square roots of the eigenvalues of
    ``rho (sy x sy) rho* (sy x sy)``, but come out accurate to machine
    precision even for pure states, where the square-root route loses half
    the digits.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.shape[-2:] != (4, 4):
        raise ValueError(f"concurrence needs 4x4 density matrices, got shape {rho.shape}")
    w, v = _clip_batch(rho)
    wm = v * np.sqrt(w)[..., None, :]
    tau = np.swapaxes(wm, -1, -2) @ _YY @ wm
    s = np.linalg.svd(tau, compute_uv=False)
    c = s[..., 0] - s[..., 1] - s[..., 2] - s[..., 3]
    return np.clip(c, 0.0, 1.0) if c.ndim else float(min(max(c, 0.0), 1.0))


def check_x_form(rho, tol=X_TOL):
    rho = np.asarray(rho)
    mask = np.ones((4, 4), dtype=bool)
    mask[np.arange(4), np.arange(4)] = False
    mask[np.arange(4), 3 - np.arange(4)] = False
    off = np.abs(rho) * mask
    if off.max() > tol:
        i, j = np.unravel_index(np.argmax(off), off.shape)
        raise ValueError(f"not an X-state: |rho[{i},{j}]| = {off[i, j]:.3e} > {tol:g}")


def concurrence_x(rho, tol=X_TOL) -> float:
    """Closed-form concurrence of an X-state.

    ``2 max(0, |r14| - sqrt(r22 r33), |r23| - sqrt(r11 r44))``; for the
    atomic states of the hopping model ``r23 = 0`` and only the first
    branch contributes.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise ValueError(f"concurrence_x needs a 4x4 matrix, got {rho.shape}")
    check_x_form(rho, tol)
    d = np.clip(np.diag(rho).real, 0.0, None)
    c = 2 * max(0.0, abs(rho[0, 3]) - np.sqrt(d[1] * d[2]), abs(rho[1, 2]) - np.sqrt(d[0] * d[3]))
    return float(min(c, 1.0))


def partial_transpose(rho, dims, site=2) -> np.ndarray:
    """Partial transpose of a bipartite matrix on subsystem ``site`` (1 or 2)."""
    da, db = dims
    t = np.asarray(rho).reshape(rho.shape[:-2] + (da, db, da, db))
    axes = list(range(t.ndim))
    n = t.ndim
    if site == 2:
        axes[n - 3], axes[n - 1] = axes[n - 1], axes[n - 3]
    else:
        axes[n - 4], axes[n - 2] = axes[n - 2], axes[n - 4]
    return t.transpose(axes).reshape(rho.shape)


def _abs_eigsum(m):
    """Sum of |eigenvalues| of a stack of Hermitian matrices, block by block.

    Blocks are the connected components of the structural nonzero pattern
    shared by the whole stack (photon-number or parity sectors), which cuts
    the cost of large cavity matrices considerably.
    """
    pattern = np.any(m != 0, axis=tuple(range(m.ndim - 2)))
    ncomp, comp = connected_components(csr_matrix(pattern), directed=False)
    total = np.zeros(m.shape[:-2])
    for c in range(ncomp):
        idx = np.flatnonzero(comp == c)
        if idx.size == 1:
            total += np.abs(m[..., idx[0], idx[0]].real)
            continue
        total += np.abs(np.linalg.eigvalsh(m[..., idx[:, None], idx[None, :]])).sum(axis=-1)
    return total


def negativity(rho, dims):
    """Negativity ``(||rho^T_B||_1 - 1) / 2`` of a bipartite state (or a stack)."""
    rho = np.asarray(rho, dtype=complex)
    da, db = dims
    if rho.shape[-2:] != (da * db, da * db):
        raise ValueError(f"dims {tuple(dims)} do not match matrix shape {rho.shape}")
    tr = np.trace(rho, axis1=-2, axis2=-1).real
    neg = np.clip((_abs_eigsum(partial_transpose(rho, dims)) - tr) / 2, 0.0, None)
    return neg if neg.ndim else float(neg)


@dataclass(frozen=True)
class DarkPeriod:
    start_tau: float
    end_tau: float
    censored_start: bool = False
    censored_end: bool = False

    @property
    def duration(self) -> float:
        return self.end_tau - self.start_tau

    @property
    def censored(self) -> bool:
        return self.censored_start or self.censored_end


@dataclass(frozen=True)
class EntanglementTrace:
    tau: np.ndarray
    concurrence_atoms: np.ndarray
    negativity_cavities: np.ndarray
    norm: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        n = len(self.tau)
        for name in ("concurrence_atoms", "negativity_cavities", "norm"):
            if len(getattr(self, name)) != n:
                raise ValueError(f"{name} has length {len(getattr(self, name))}, tau has {n}")
        if n > 1 and np.any(np.diff(self.tau) <= 0):
            raise ValueError("tau grid must be strictly ascending")


def _crossing(t0, c0, t1, c1, threshold):
    if c1 == c0:
        return t0
    return t0 + (threshold - c0) * (t1 - t0) / (c1 - c0)


def dark_periods(trace, threshold=ESD_THRESHOLD, min_duration=None) -> list:
    """Maximal intervals on which the atomic concurrence stays below ``threshold``.

    Endpoints are placed where the linear interpolant between neighbouring
    grid points crosses ``threshold``.  Runs reaching the first or last grid
    point keep that grid point as endpoint and are marked censored.  Runs
    shorter than ``min_duration`` (default: two grid steps) are dropped.
    """
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    tau = np.asarray(trace.tau, dtype=float)
    c = np.asarray(trace.concurrence_atoms, dtype=float)
    if min_duration is None:
        min_duration = 2 * (tau[-1] - tau[0]) / max(len(tau) - 1, 1)
    below = c < threshold
    out = []
    i, n = 0, len(tau)
    while i < n:
        if not below[i]:
            i += 1
            continue
        j = i
        while j + 1 < n and below[j + 1]:
            j += 1
        start = tau[0] if i == 0 else _crossing(tau[i - 1], c[i - 1], tau[i], c[i], threshold)
        end = tau[-1] if j == n - 1 else _crossing(tau[j], c[j], tau[j + 1], c[j + 1], threshold)
        if end - start >= min_duration - 1e-12 and end > start:
            out.append(DarkPeriod(float(start), float(end), i == 0, j == n - 1))
        i = j + 1
    return out


def total_dark_duration(periods) -> float:
    return float(sum(p.duration for p in periods))
