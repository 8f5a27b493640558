"""Time evolution, entanglement traces, validation and parameter sweeps."""
from __future__ import annotations

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import __version__
from .analytic import (
    SingularParameterError,
    analytic_atom_rho,
    analytic_coefficients,
    analytic_spectrum,
)
from .entanglement import (
    ESD_THRESHOLD,
    EntanglementTrace,
    concurrence,
    dark_periods,
    negativity,
    total_dark_duration,
)
from .hilbert import (
    CompositeSpace,
    PureState,
    excitation_numbers,
    excitation_sector_basis,
    reduced_from_pure,
)
from .models import (
    HamiltonianVariant,
    Mode,
    Model,
    ModelParams,
    build_hamiltonian,
    initial_state,
    paper_reduced_hamiltonian,
    reduced_basis_map,
    reduced_initial_state,
)
from .numkit import Propagator, check_hermitian, herm_eig

log = logging.getLogger(__name__)

NORM_TOL = 1e-10
CONVERGENCE_TOL = 1e-6
WORKERS_ENV = "DJCSIM_WORKERS"
NEGATIVITY_CHUNK = 256
GUARD_NEGATIVITY_POINTS = 200


class NormDriftError(RuntimeError):
    """Evolution lost unitarity beyond ``NORM_TOL``."""


@dataclass(frozen=True)
class RunConfig:
    params: ModelParams = ModelParams()
    alpha: float = np.pi / 4
    variant: HamiltonianVariant = HamiltonianVariant()
    tau_max: float = 25.0
    n_points: int = 2001
    fock_cutoff: int = 4
    check_convergence: bool = True

    def __post_init__(self):
        if not self.tau_max > 0:
            raise ValueError(f"tau_max must be positive, got {self.tau_max}")
        if self.n_points < 2:
            raise ValueError(f"n_points must be >= 2, got {self.n_points}")
        if self.fock_cutoff < 2:
            raise ValueError(f"fock_cutoff must be >= 2, got {self.fock_cutoff}")

    def tau_grid(self) -> np.ndarray:
        return np.linspace(0.0, self.tau_max, self.n_points)


def tau_to_time(tau, g):
    """Scaled time ``tau = 2 g t / pi`` back to ``t``."""
    if g <= 0:
        raise ValueError("scaled time needs g > 0")
    return np.pi * np.asarray(tau, dtype=float) / (2 * g)


# --------------------------------------------------------------------------- #
# evolution
# --------------------------------------------------------------------------- #


def evolve_amplitudes(h, psi0, times, project=True) -> np.ndarray:
    """Amplitudes ``U(t) psi0`` for every ``t``; shape ``(len(times), dim)``.

    With ``project`` the Hamiltonian is diagonalised only on the basis
    states reachable from ``psi0`` (an invariant coordinate subspace), and
    the result is scattered back into the full vector.
    """
    h = check_hermitian(h)
    psi0 = np.asarray(psi0, dtype=complex)
    if h.shape[0] != psi0.shape[0]:
        raise ValueError(f"state dim {psi0.shape[0]} does not match Hamiltonian dim {h.shape[0]}")
    times = np.asarray(times, dtype=float)
    if not project:
        return Propagator(h).apply(psi0, times)
    sector = excitation_sector_basis(h, psi0)
    block = h[np.ix_(sector, sector)]
    out = np.zeros((times.size, psi0.size), dtype=complex)
    out[:, sector] = Propagator(block).apply(psi0[sector], times)
    return out


def evolve(h, psi0: PureState, times, project=True) -> list:
    """Evolve ``psi0`` under ``h`` to each time; one eigendecomposition is reused."""
    amps = evolve_amplitudes(h, psi0.amplitudes, times, project=project)
    states = [PureState(a, psi0.space) for a in amps]
    drift = max(abs(s.norm - 1.0) for s in states) if states else 0.0
    if drift > NORM_TOL:
        raise NormDriftError(f"norm drift {drift:.3e} exceeds {NORM_TOL:g}")
    return states


# --------------------------------------------------------------------------- #
# entanglement traces
# --------------------------------------------------------------------------- #


def cavity_negativity(amps, space) -> np.ndarray:
    d = space.fock_dim
    neg = np.empty(len(amps))
    for lo in range(0, len(amps), NEGATIVITY_CHUNK):
        chunk = reduced_from_pure(amps[lo:lo + NEGATIVITY_CHUNK], space.site_dims, keep=(3, 4))
        neg[lo:lo + NEGATIVITY_CHUNK] = negativity(chunk, (d, d))
    return neg


def atom_concurrence(amps, space) -> np.ndarray:
    return concurrence(reduced_from_pure(amps, space.site_dims, keep=(1, 2)))


def _observables(amps, space):
    return atom_concurrence(amps, space), cavity_negativity(amps, space), np.linalg.norm(amps, axis=1)


def _run_states(config: RunConfig, times):
    """Full-space amplitudes for ``config`` at ``times`` plus the space used."""
    p = config.params
    if config.variant.mode is Mode.PAPER_MATRIX:
        # the published matrix lives in the two-excitation sector: cutoff 2 suffices
        space = CompositeSpace(2)
        bmap = reduced_basis_map(p)
        h = paper_reduced_hamiltonian(p)
        psi = reduced_initial_state(bmap, config.alpha)
        reduced = Propagator(h).apply(psi, times)
        return bmap.lift(reduced, space), space, None
    space = CompositeSpace(config.fock_cutoff)
    h = build_hamiltonian(p, space, config.variant)
    psi0 = initial_state(space, config.alpha).amplitudes
    amps = evolve_amplitudes(h, psi0, times)
    return amps, space, truncation_is_exact(h, psi0, space)


def truncation_is_exact(h, psi0, space: CompositeSpace) -> bool:
    """True when the Fock cutoff cannot influence the dynamics of ``psi0``.

    That holds when ``h`` conserves the total excitation number and no
    state reachable from ``psi0`` carries more excitations than the cutoff.
    """
    n = excitation_numbers(space)
    # [H, N]_ij = H_ij (n_j - n_i) for diagonal N
    if np.abs(h * (n[None, :] - n[:, None])).max() > 1e-10:
        return False
    sector = excitation_sector_basis(h, psi0)
    return float(n[sector].max()) <= space.fock_cutoff


def entanglement_trace(config: RunConfig) -> EntanglementTrace:
    """Atomic concurrence, cavity negativity and norm on a uniform ``tau`` grid.

    In operator mode the run is repeated at ``fock_cutoff + 2`` unless the
    truncation is provably exact (see :func:`truncation_is_exact`); the
    largest pointwise shift of any observable is stored in
    ``meta["cutoff_shift"]`` and ``meta["converged"]`` is False if it
    exceeds ``CONVERGENCE_TOL``.  Concurrence and norm are compared on the
    full grid, the costlier negativity on about ``GUARD_NEGATIVITY_POINTS``
    evenly strided points.
    """
    tau = config.tau_grid()
    times = tau_to_time(tau, config.params.g)
    amps, space, exact = _run_states(config, times)
    conc, neg, norm = _observables(amps, space)
    shift = 0.0
    if exact is False and config.check_convergence:
        bigger = replace(config, fock_cutoff=config.fock_cutoff + 2, check_convergence=False)
        amps2, space2, _ = _run_states(bigger, times)
        stride = max(1, len(tau) // GUARD_NEGATIVITY_POINTS)
        shift = float(max(
            np.abs(conc - atom_concurrence(amps2, space2)).max(),
            np.abs(norm - np.linalg.norm(amps2, axis=1)).max(),
            np.abs(neg[::stride] - cavity_negativity(amps2[::stride], space2)).max(),
        ))
    meta = dict(
        params=asdict(config.params),
        alpha=float(config.alpha),
        model=config.variant.tag.value,
        mode=config.variant.mode.value,
        fock_cutoff=space.fock_cutoff,
        tau_max=float(config.tau_max),
        n_points=int(config.n_points),
        cutoff_shift=shift,
        converged=bool(shift <= CONVERGENCE_TOL),
        version=__version__,
    )
    if not meta["converged"]:
        log.warning("Fock cutoff %d not converged: observables shift by %.3e at cutoff %d",
                    space.fock_cutoff, shift, space.fock_cutoff + 2)
    return EntanglementTrace(tau, conc, neg, norm, meta)


def norm_drift(trace: EntanglementTrace) -> float:
    return float(np.abs(np.asarray(trace.norm) - 1.0).max())


# --------------------------------------------------------------------------- #
# sweeps
# --------------------------------------------------------------------------- #

SWEEP_AXES = ("kappa", "j_ising", "jx_jy", "alpha")


@dataclass
class SweepPoint:
    value: object
    trace: EntanglementTrace = None
    periods: list = field(default_factory=list)
    error: str = None

    @property
    def ok(self) -> bool:
        return self.error is None


def _apply_axis(base: RunConfig, axis, value) -> RunConfig:
    p = base.params
    if axis == "kappa":
        return replace(base, params=p.with_(kappa=float(value)))
    if axis == "j_ising":
        return replace(base, params=p.with_(j_ising=float(value)))
    if axis == "jx_jy":
        jx, jy = value
        return replace(base, params=p.with_(j_x=float(jx), j_y=float(jy)))
    if axis == "alpha":
        return replace(base, alpha=float(value))
    raise ValueError(f"unknown sweep axis {axis!r}; expected one of {SWEEP_AXES}")


def _sweep_point(args):
    base, axis, value, threshold = args
    try:
        trace = entanglement_trace(_apply_axis(base, axis, value))
        return SweepPoint(value, trace, dark_periods(trace, threshold))
    except Exception as exc:  # per-point failures are reported, not raised
        return SweepPoint(value, error=f"{type(exc).__name__}: {exc}")


def worker_count(default=1) -> int:
    raw = os.environ.get(WORKERS_ENV)
    if not raw:
        return default
    try:
        return max(1, int(raw))
    except ValueError:
        raise ValueError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None


def sweep(base: RunConfig, axis, values, workers=None, threshold=ESD_THRESHOLD) -> list:
    """Run one trace per value of ``axis``; results follow the order of ``values``."""
    values = list(values)
    if not values:
        raise ValueError("sweep needs at least one value")
    if axis not in SWEEP_AXES:
        raise ValueError(f"unknown sweep axis {axis!r}; expected one of {SWEEP_AXES}")
    jobs = [(base, axis, v, threshold) for v in values]
    workers = worker_count() if workers is None else workers
    if workers <= 1 or len(jobs) == 1:
        return [_sweep_point(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
        return list(pool.map(_sweep_point, jobs))


def summarize(point: SweepPoint) -> dict:
    if not point.ok:
        return dict(value=point.value, error=point.error)
    t = point.trace
    return dict(
        value=point.value,
        total_dark=total_dark_duration(point.periods),
        min_concurrence=float(np.min(t.concurrence_atoms)),
        max_negativity=float(np.max(t.negativity_cavities)),
    )


# --------------------------------------------------------------------------- #
# validation of the published closed forms
# --------------------------------------------------------------------------- #


@dataclass
class ValidationReport:
    """Numbers comparing the published reduced matrix and closed forms with numerics.

    ``appendix_b_deviation`` and ``appendix_c_deviation`` map each
    coefficient / matrix element name to its largest absolute deviation
    from the numerically propagated state over the sampled times.
    """

    params: dict
    alpha: float
    sample_times: list
    spectrum_match: float
    mode_divergence: float
    paper_spectrum: list
    analytic_energies: list
    operator_sector_spectrum: list
    appendix_b_deviation: dict
    appendix_c_deviation: dict
    norm_deviation: float
    trace_deviation: float
    basis_map: list
    notes: list = field(default_factory=list)

    def items(self):
        """Flat ``(key, value)`` pairs in a fixed order."""
        yield "omega", self.params["omega"]
        yield "nu", self.params["nu"]
        yield "g", self.params["g"]
        yield "kappa", self.params["kappa"]
        yield "alpha", self.alpha
        yield "sample_times", " ".join(repr(float(t)) for t in self.sample_times)
        yield "spectrum_match", self.spectrum_match
        yield "mode_divergence", self.mode_divergence
        for name, v in self.appendix_b_deviation.items():
            yield f"appendix_b.{name}", v
        for name, v in self.appendix_c_deviation.items():
            yield f"appendix_c.{name}", v
        yield "appendix_b.max_norm_deviation", self.norm_deviation
        yield "appendix_c.max_trace_deviation", self.trace_deviation
        for i, lab in enumerate(self.basis_map):
            yield f"basis_map.row{i + 1}", lab

    def to_keyvalue(self) -> str:
        lines = []
        for k, v in self.items():
            lines.append(f"{k} = {v:.12e}" if isinstance(v, float) else f"{k} = {v}")
        return "\n".join(lines) + "\n"

    def to_text(self) -> str:
        fmt = lambda x: f"{x:.6e}"  # noqa: E731
        out = [
            "Validation of the published reduced Hamiltonian and closed forms",
            f"parameters: omega={self.params['omega']} nu={self.params['nu']} g={self.params['g']} "
            f"kappa={self.params['kappa']} alpha={self.alpha:.12g}",
            f"sample times: {', '.join(f'{t:g}' for t in self.sample_times)}",
            "",
            "Spectrum",
            f"  max |eig(reduced matrix) - closed form|      {fmt(self.spectrum_match)}",
            f"  max |eig(reduced matrix) - eig(operator)|    {fmt(self.mode_divergence)}",
            "  closed form  reduced matrix  operator sector",
        ]
        for a, b, c in zip(self.analytic_energies, self.paper_spectrum, self.operator_sector_spectrum):
            out.append(f"  {a: .12f}  {b: .12f}  {c: .12f}")
        out += ["", "Row assignment of the reduced matrix"]
        out += [f"  row {i + 1}: {lab}" for i, lab in enumerate(self.basis_map)]
        out += ["", "Coefficients: max |closed form - numerical| over sample times"]
        out += [f"  {k:<14} {fmt(v)}" for k, v in self.appendix_b_deviation.items()]
        out.append(f"  max |sum |c_i|^2 - 1|   {fmt(self.norm_deviation)}")
        out += ["", "Reduced atomic state: max |closed form - numerical|"]
        out += [f"  {k:<14} {fmt(v)}" for k, v in self.appendix_c_deviation.items()]
        out.append(f"  max |trace - 1|        {fmt(self.trace_deviation)}")
        if self.notes:
            out += ["", "Notes"] + [f"  - {n}" for n in self.notes]
        return "\n".join(out) + "\n"


def _label_str(lab):
    s = "".join("↑" if x else "↓" for x in lab[:2])
    return f"|{s}{lab[2]}{lab[3]}⟩"


def validate(params: ModelParams, alpha, sample_times) -> ValidationReport:
    """Compare the published reduced matrix and closed forms against numerics.

    Failures of the closed forms are recorded in the report, never raised.
    """
    if params.g <= 0 or params.kappa <= 0:
        raise ValueError("validate needs g > 0 and kappa > 0")
    sample_times = [float(t) for t in sample_times]
    notes = []

    h_paper = paper_reduced_hamiltonian(params)
    paper_eigs = herm_eig(h_paper).eigenvalues
    spec = analytic_spectrum(params)
    analytic_sorted = spec.sorted()
    # sorted order is the optimal matching of two real multisets
    spectrum_match = float(np.abs(paper_eigs - analytic_sorted).max())

    bmap = reduced_basis_map(params)
    if bmap.alternatives:
        notes.append(f"{len(bmap.alternatives)} alternative row assignment(s) related by atom/cavity exchange")
    for i, j, printed, expected in bmap.inconsistent:
        notes.append(f"entry ({i + 1},{j + 1}) = {printed} not explained by the selection rules (expected {expected})")
    for i, j, printed, canonical in bmap.magnitude_notes:
        notes.append(
            f"entry ({i + 1},{j + 1}) printed {printed:.12g}, canonical bosonic element {canonical:.12g}"
        )

    space2 = CompositeSpace(2)
    h_op = build_hamiltonian(params, space2, HamiltonianVariant(Model.JC_HOP, Mode.OPERATOR))
    idx = bmap.indices(space2)
    op_eigs = herm_eig(h_op[np.ix_(idx, idx)]).eigenvalues
    mode_divergence = float(np.abs(paper_eigs - op_eigs).max())

    psi0 = reduced_initial_state(bmap, alpha)
    numeric = Propagator(h_paper).apply(psi0, sample_times)
    lifted = bmap.lift(numeric, space2)
    rho_num = reduced_from_pure(lifted, space2.site_dims, keep=(1, 2))

    b_dev = {f"c{i + 1}": 0.0 for i in range(9)}
    b_dev["c9_flipped_phase"] = 0.0
    c_dev = dict(r11=0.0, r14=0.0, r22=0.0, r33=0.0, r44=0.0)
    norm_dev = trace_dev = 0.0
    try:
        for n, t in enumerate(sample_times):
            coeffs = analytic_coefficients(params, alpha, t)
            for i in range(9):
                b_dev[f"c{i + 1}"] = max(b_dev[f"c{i + 1}"], float(abs(coeffs.c[i] - numeric[n, i])))
            flipped = analytic_coefficients(params, alpha, t, c9_phase_sign=-1).c[8]
            b_dev["c9_flipped_phase"] = max(b_dev["c9_flipped_phase"], float(abs(flipped - numeric[n, 8])))
            norm_dev = max(norm_dev, abs(coeffs.norm_sq - 1.0))
            rho = analytic_atom_rho(params, alpha, t)
            for name, (i, j) in dict(r11=(0, 0), r14=(0, 3), r22=(1, 1), r33=(2, 2), r44=(3, 3)).items():
                c_dev[name] = max(c_dev[name], float(abs(getattr(rho, name) - rho_num[n, i, j])))
            trace_dev = max(trace_dev, abs(rho.trace - 1.0))
    except SingularParameterError as exc:
        notes.append(f"closed forms undefined: {exc}")
        b_dev = {k: float("nan") for k in b_dev}
        c_dev = {k: float("nan") for k in c_dev}
        norm_dev = trace_dev = float("nan")

    if spectrum_match > 1e-9:
        notes.append(f"reduced-matrix spectrum departs from the closed form by {spectrum_match:.3e}")
    if norm_dev > 1e-6:
        notes.append(f"closed-form coefficients are not normalised: max |sum |c_i|^2 - 1| = {norm_dev:.3e}")
    if trace_dev > 1e-9:
        notes.append(f"closed-form reduced state does not have unit trace: max |tr - 1| = {trace_dev:.3e}")
    bad = [k for k, v in b_dev.items() if v > 1e-6 and k != "c9_flipped_phase"]
    if bad:
        notes.append(f"coefficients off the numerical state by > 1e-6: {', '.join(bad)}")
    better = "flipped" if b_dev["c9_flipped_phase"] < b_dev["c9"] else "printed"
    notes.append(f"c9 time-phase sign closer to numerics: {better}")

    return ValidationReport(
        params=asdict(params),
        alpha=float(alpha),
        sample_times=sample_times,
        spectrum_match=spectrum_match,
        mode_divergence=mode_divergence,
        paper_spectrum=[float(x) for x in paper_eigs],
        analytic_energies=[float(x) for x in analytic_sorted],
        operator_sector_spectrum=[float(x) for x in op_eigs],
        appendix_b_deviation=b_dev,
        appendix_c_deviation=c_dev,
        norm_deviation=float(norm_dev),
        trace_deviation=float(trace_dev),
        basis_map=[_label_str(lab) for lab in bmap.rows],
        notes=notes,
    )
