"""Double Jaynes-Cummings Hamiltonians with cavity-cavity photon hopping.

Three models are provided as operators on :class:`CompositeSpace`:

``JC_HOP``
    two atom-cavity pairs plus photon hopping ``kappa (a1^+ a2 + a2^+ a1)``;
``ISING``
    ``JC_HOP`` plus ``J sz1 sz2``;
``XY``
    ``JC_HOP`` plus ``Jx sx1 sx2 + Jy sy1 sy2``.

The nine-state reduced matrix of the hopping model is also available
exactly as published (:func:`paper_reduced_hamiltonian`), together with the
row-to-basis-state assignment that makes it usable (:func:`reduced_basis_map`).
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace

import numpy as np

from .hilbert import DOWN, UP, CompositeSpace, PureState, site_product

SQRT2 = np.sqrt(2.0)


class Model(enum.Enum):
    JC_HOP = "jc_hop"
    ISING = "ising"
    XY = "xy"


class Mode(enum.Enum):
    OPERATOR = "operator"
    PAPER_MATRIX = "paper-matrix"


@dataclass(frozen=True)
class HamiltonianVariant:
    tag: Model = Model.JC_HOP
    mode: Mode = Mode.OPERATOR

    def __post_init__(self):
        if self.mode is Mode.PAPER_MATRIX and self.tag is not Model.JC_HOP:
            raise ValueError("the published reduced matrix exists only for the JC_HOP model")


@dataclass(frozen=True)
class ModelParams:
    """Couplings in units with hbar = 1.

    ``atom_energy`` selects the atomic term: ``"half"`` gives
    ``(omega/2) sz`` per atom (matches the published reduced matrix at
    ``omega == nu``), ``"full"`` gives ``omega sz`` per atom.
    """

    omega: float = 1.0
    nu: float = 1.0
    g: float = 0.1
    kappa: float = 0.0
    j_ising: float = 0.0
    j_x: float = 0.0
    j_y: float = 0.0
    atom_energy: str = "half"

    def __post_init__(self):
        if self.g < 0 or self.kappa < 0:
            raise ValueError(f"g and kappa must be nonnegative (g={self.g}, kappa={self.kappa})")
        if self.atom_energy not in ("half", "full"):
            raise ValueError(f"atom_energy must be 'half' or 'full', got {self.atom_energy!r}")

    def with_(self, **changes) -> "ModelParams":
        return replace(self, **changes)


def build_hamiltonian(params: ModelParams, space: CompositeSpace, variant=HamiltonianVariant()) -> np.ndarray:
    """Dense Hamiltonian of ``variant`` on the full truncated space."""
    if variant.mode is not Mode.OPERATOR:
        raise ValueError("PAPER_MATRIX mode has no full-space operator; use paper_reduced_hamiltonian")
    op = lambda **f: site_product(space, {int(k[1:]): v for k, v in f.items()})  # noqa: E731
    prefactor = params.omega / 2 if params.atom_energy == "half" else params.omega
    h = prefactor * (op(s1="sigma_z") + op(s2="sigma_z"))
    h = h + params.g * (op(s1="sigma_minus", s3="create") + op(s1="sigma_plus", s3="annihilate"))
    h = h + params.g * (op(s2="sigma_minus", s4="create") + op(s2="sigma_plus", s4="annihilate"))
    h = h + params.nu * (op(s3="number") + op(s4="number"))
    h = h + params.kappa * (op(s3="create", s4="annihilate") + op(s3="annihilate", s4="create"))
    if variant.tag is Model.ISING:
        h = h + params.j_ising * op(s1="sigma_z", s2="sigma_z")
    elif variant.tag is Model.XY:
        h = h + params.j_x * op(s1="sigma_x", s2="sigma_x")
        h = h + params.j_y * op(s1="sigma_y", s2="sigma_y")
    return h


# Basis listing as printed alongside the reduced matrix, (s1, s2, n1, n2).
PAPER_BASIS_LISTING = (
    (UP, UP, 0, 0),
    (UP, DOWN, 1, 0),
    (UP, DOWN, 0, 1),
    (DOWN, UP, 1, 0),
    (DOWN, UP, 0, 1),
    (DOWN, DOWN, 2, 0),
    (DOWN, DOWN, 1, 1),
    (DOWN, DOWN, 0, 2),
    (DOWN, DOWN, 0, 0),
)


def paper_reduced_hamiltonian(params: ModelParams) -> np.ndarray:
    """The published 9x9 reduced matrix, entry for entry.

    Off-diagonal entries are keyed by their printed 1-based (row, column).
    """
    w, g, k = params.omega, params.g, params.kappa
    h = np.diag([-w] + [w] * 8).astype(complex)
    printed = {
        (2, 3): k, (2, 5): SQRT2 * g,
        (3, 4): k, (3, 6): g, (3, 7): g,
        (4, 8): SQRT2 * g,
        (5, 6): k,
        (6, 9): g,
        (7, 8): k, (7, 9): g,
    }
    for (i, j), v in printed.items():
        h[i - 1, j - 1] = h[j - 1, i - 1] = v
    return h


@dataclass
class BasisMap:
    """Assignment of reduced-matrix rows to basis labels.

    ``rows[i]`` is the ``(s1, s2, n1, n2)`` label of 0-based matrix row ``i``.
    ``alternatives`` holds every other assignment that explains the printed
    coupling pattern equally well.  ``inconsistent`` lists
    ``(row, col, printed, expected_kind)`` for entries the chosen assignment
    cannot explain; ``magnitude_notes`` lists ``(row, col, printed,
    canonical)`` where the kind is right but the printed value differs from
    the bosonic matrix element.
    """

    rows: tuple
    alternatives: list = field(default_factory=list)
    inconsistent: list = field(default_factory=list)
    magnitude_notes: list = field(default_factory=list)

    def indices(self, space: CompositeSpace) -> list:
        return [space.index(*lab) for lab in self.rows]

    def lift(self, reduced, space: CompositeSpace) -> np.ndarray:
        """Embed reduced amplitude vector(s) into the full space."""
        reduced = np.asarray(reduced, dtype=complex)
        out = np.zeros(reduced.shape[:-1] + (space.total_dim,), dtype=complex)
        out[..., self.indices(space)] = reduced
        return out


def _coupling(a, b, params):
    """Kind and canonical value of the hopping-model matrix element between two labels."""
    ds = (b[0] - a[0], b[1] - a[1])
    dn = (b[2] - a[2], b[3] - a[3])
    for atom in (0, 1):
        other = 1 - atom
        if ds[other] == 0 and ds[atom] in (1, -1) and dn[other] == 0 and dn[atom] == -ds[atom]:
            n = max(a[2 + atom], b[2 + atom])
            return "g", params.g * np.sqrt(n)
    if ds == (0, 0) and dn in ((1, -1), (-1, 1)):
        # a_i^+ a_j |n_i n_j> = sqrt((n_i + 1) n_j)
        return "k", params.kappa * np.sqrt(max(a[2], b[2]) * max(a[3], b[3]))
    return None, 0.0


def _printed_kind(value, params):
    if abs(value) < 1e-15:
        return None
    g, k = params.g, params.kappa
    if any(abs(abs(value) - m * g) < 1e-12 for m in (1, SQRT2)):
        return "g"
    if any(abs(abs(value) - m * k) < 1e-12 for m in (1, SQRT2)):
        return "k"
    return "?"


_PATTERN_PARAMS = ModelParams(g=0.3, kappa=0.7)


def reduced_basis_map(params: ModelParams = _PATTERN_PARAMS) -> BasisMap:
    """Find the row assignments of the published matrix consistent with the selection rules.

    A row assignment is consistent when each printed off-diagonal entry is
    a ``g``-type coupling (one atom flips while its own cavity loses or
    gains a photon) or a ``kappa``-type coupling (a photon hops) between the
    assigned labels, and every allowed coupling is printed.  The search is
    exhaustive over permutations of the nine listed labels (backtracking,
    pruned on the first contradiction) and tolerates a growing number of
    mismatches until some assignment is found.  Ties are broken by the
    lexicographically smallest sequence of listing positions.

    The pattern is matched with generic couplings so that coincidences
    such as ``g == kappa`` cannot blur it; ``params`` only sets the values
    reported in ``magnitude_notes``.
    """
    ref = paper_reduced_hamiltonian(_PATTERN_PARAMS)
    h = paper_reduced_hamiltonian(params)
    n = h.shape[0]
    labels = PAPER_BASIS_LISTING
    printed = [[_printed_kind(ref[i, j], _PATTERN_PARAMS) for j in range(n)] for i in range(n)]
    kinds = [[_coupling(a, b, _PATTERN_PARAMS)[0] for b in labels] for a in labels]

    def search(budget):
        found = []
        assign = []

        def extend(row, used, bad):
            if row == n:
                found.append((tuple(assign), list(bad)))
                return
            for lab in range(n):
                if used & (1 << lab):
                    continue
                new_bad = [
                    (prev, row) for prev in range(row)
                    if kinds[assign[prev]][lab] != printed[prev][row]
                ]
                if len(bad) + len(new_bad) > budget:
                    continue
                assign.append(lab)
                extend(row + 1, used | (1 << lab), bad + new_bad)
                assign.pop()

        extend(0, 0, [])
        return found

    for budget in range(n * n):
        found = search(budget)
        if found:
            break
    found.sort(key=lambda item: item[0])
    perms = [tuple(labels[i] for i in p) for p, _ in found]
    rows = perms[0]
    inconsistent = [
        (i, j, complex(h[i, j]), kinds[found[0][0][i]][found[0][0][j]]) for i, j in found[0][1]
    ]
    notes = []
    for i in range(n):
        for j in range(i + 1, n):
            kind, canonical = _coupling(rows[i], rows[j], params)
            if kind is not None and abs(ref[i, j]) > 0 and abs(abs(h[i, j]) - canonical) > 1e-12:
                notes.append((i, j, float(abs(h[i, j])), float(canonical)))
    return BasisMap(rows, perms[1:], inconsistent, notes)


def initial_state(space: CompositeSpace, alpha) -> PureState:
    """``cos(alpha)|up up 0 0> + sin(alpha)|down down 0 0>``."""
    amps = np.zeros(space.total_dim, dtype=complex)
    amps[space.index(UP, UP, 0, 0)] = np.cos(alpha)
    amps[space.index(DOWN, DOWN, 0, 0)] = np.sin(alpha)
    return PureState(amps, space)


def reduced_initial_state(basis_map: BasisMap, alpha) -> np.ndarray:
    """Initial state as a 9-vector in reduced-matrix row order."""
    psi = np.zeros(len(basis_map.rows), dtype=complex)
    psi[basis_map.rows.index((UP, UP, 0, 0))] = np.cos(alpha)
    psi[basis_map.rows.index((DOWN, DOWN, 0, 0))] = np.sin(alpha)
    return psi
