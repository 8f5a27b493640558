"""Command-line interface: ``djcsim {evolve,figure,spectrum,validate,sweep}``."""
from __future__ import annotations

import argparse
import logging
import re
import sys
from contextlib import contextmanager
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__
from .analytic import analytic_spectrum
from .engine import (
    NORM_TOL,
    RunConfig,
    entanglement_trace,
    norm_drift,
    summarize,
    sweep,
    validate,
)
from .models import HamiltonianVariant, Mode, Model, ModelParams, paper_reduced_hamiltonian
from .numkit import herm_eig
from .presets import FIGURES, alpha_name, figure_configs

log = logging.getLogger("djcsim")

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL = 0, 1, 2
CSV_COLUMNS = ("tau", "concurrence_atoms", "negativity_cavities", "norm")

_PI_RE = re.compile(r"^\s*(?:([0-9.eE+-]+)\s*\*?\s*)?pi\s*(?:/\s*([0-9.eE+-]+))?\s*$")


class UsageError(Exception):
    pass


class NumericalFailure(Exception):
    pass


def parse_angle(text) -> float:
    """Float, or a multiple/fraction of pi such as ``pi/12`` or ``2*pi/3``."""
    text = str(text).strip()
    m = _PI_RE.match(text)
    try:
        if m:
            num = float(m.group(1)) if m.group(1) else 1.0
            den = float(m.group(2)) if m.group(2) else 1.0
            return num * np.pi / den
        return float(text)
    except ValueError:
        raise UsageError(f"invalid angle {text!r}") from None


def parse_float(text, key="value") -> float:
    try:
        value = float(text)
    except (TypeError, ValueError):
        raise UsageError(f"invalid number for {key}: {text!r}") from None
    if not np.isfinite(value):
        raise UsageError(f"{key} must be finite, got {text!r}")
    return value


def read_config(path) -> dict:
    """Flat ``key = value`` file; ``#`` starts a comment."""
    out = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}") from None
    for n, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{n}: expected 'key = value'")
        key, value = (x.strip() for x in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


_FLOAT_KEYS = ("omega", "nu", "g", "kappa", "j_ising", "j_x", "j_y", "tau_max")
_KNOWN_KEYS = set(_FLOAT_KEYS) | {"alpha", "model", "mode", "n_points", "fock_cutoff", "atom_energy"}


def settings_from_args(args) -> dict:
    settings = read_config(args.config) if getattr(args, "config", None) else {}
    unknown = set(settings) - _KNOWN_KEYS
    if unknown:
        raise UsageError(f"unknown config key(s): {', '.join(sorted(unknown))}")
    for key in _KNOWN_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            settings[key] = value
    return settings


def config_from_settings(s) -> RunConfig:
    floats = {k: parse_float(s[k], k) for k in _FLOAT_KEYS if k in s}
    try:
        model = Model(s.get("model", "jc_hop"))
        mode = Mode(s.get("mode", "operator"))
        params = ModelParams(
            **{k: floats[k] for k in ("omega", "nu", "g", "kappa", "j_ising", "j_x", "j_y") if k in floats},
            atom_energy=s.get("atom_energy", "half"),
        )
        return RunConfig(
            params=params,
            alpha=parse_angle(s.get("alpha", "pi/4")),
            variant=HamiltonianVariant(model, mode),
            tau_max=floats.get("tau_max", 25.0),
            n_points=int(s.get("n_points", 2001)),
            fock_cutoff=int(s.get("fock_cutoff", 4)),
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


@contextmanager
def output_files():
    """Collect paths written inside the block; remove them all if it fails."""
    written = []
    try:
        yield written
    except BaseException:
        for p in written:
            Path(p).unlink(missing_ok=True)
        raise


def _open_for_write(path, written):
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fh = path.open("w", encoding="utf-8", newline="\n")
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc.strerror}") from None
    written.append(path)
    return fh


def _fmt(x, precision):
    return f"{x:.{precision}e}"


def trace_header(trace, precision) -> list:
    m = trace.meta
    p = m["params"]
    return [
        f"# djcsim {m.get('version', __version__)}",
        f"# model = {m['model']}, mode = {m['mode']}, fock_cutoff = {m['fock_cutoff']}",
        "# " + ", ".join(f"{k} = {p[k]!r}" for k in ("omega", "nu", "g", "kappa", "j_ising", "j_x", "j_y", "atom_energy")),
        f"# alpha = {m['alpha']!r}",
        f"# tau grid: 0 .. {m['tau_max']!r}, {m['n_points']} points; t = pi tau / (2 g)",
        f"# cutoff_shift = {_fmt(m['cutoff_shift'], 3)}, converged = {m['converged']}",
        f"# precision = {precision}",
    ]


def write_trace_csv(path, trace, precision, written):
    with _open_for_write(path, written) as fh:
        for line in trace_header(trace, precision):
            fh.write(line + "\n")
        fh.write(",".join(CSV_COLUMNS) + "\n")
        for row in zip(trace.tau, trace.concurrence_atoms, trace.negativity_cavities, trace.norm):
            fh.write(",".join(_fmt(float(x), precision) for x in row) + "\n")


def _checked_trace(config):
    trace = entanglement_trace(config)
    drift = norm_drift(trace)
    if drift > NORM_TOL:
        raise NumericalFailure(f"norm drift {drift:.3e} exceeds {NORM_TOL:g}")
    return trace


# --------------------------------------------------------------------------- #
# subcommands
# --------------------------------------------------------------------------- #


def cmd_evolve(args, written):
    config = config_from_settings(settings_from_args(args))
    write_trace_csv(args.output, _checked_trace(config), args.precision, written)


def cmd_figure(args, written):
    mode = Mode(args.mode) if args.mode else None
    try:
        configs = figure_configs(args.name, mode)
    except (KeyError, ValueError) as exc:
        raise UsageError(str(exc.args[0])) from None
    outdir = Path(args.output)
    for config in configs:
        name = alpha_name(config.alpha).replace("/", "_")
        write_trace_csv(outdir / f"fig{args.name}_alpha_{name}.csv", _checked_trace(config), args.precision, written)


def cmd_spectrum(args, written):
    config = config_from_settings(settings_from_args(args))
    p = config.params
    try:
        closed = analytic_spectrum(p).sorted()
    except ZeroDivisionError as exc:
        raise UsageError(str(exc)) from None
    numeric = herm_eig(paper_reduced_hamiltonian(p)).eigenvalues
    with _open_for_write(args.output, written) as fh:
        fh.write(f"# djcsim {__version__}\n")
        fh.write(f"# omega = {p.omega!r}, g = {p.g!r}, kappa = {p.kappa!r}\n")
        fh.write("# closed-form energies and eigenvalues of the published reduced matrix, both ascending\n")
        fh.write("index,closed_form,reduced_matrix\n")
        for i, (a, b) in enumerate(zip(closed, numeric), 1):
            fh.write(f"{i},{_fmt(a, args.precision)},{_fmt(b, args.precision)}\n")


def cmd_validate(args, written):
    config = config_from_settings(settings_from_args(args))
    times = [parse_float(t, "times") for t in args.times.split(",") if t.strip()]
    if not times:
        raise UsageError("--times needs at least one value")
    try:
        report = validate(config.params, config.alpha, times)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    prefix = Path(args.output)
    with _open_for_write(prefix.with_suffix(".txt"), written) as fh:
        fh.write(report.to_text())
    with _open_for_write(prefix.with_suffix(".kv"), written) as fh:
        fh.write(report.to_keyvalue())


def _sweep_values(axis, text):
    items = [x for x in text.split(",") if x.strip()]
    if not items:
        raise UsageError("--values needs at least one entry")
    if axis == "jx_jy":
        out = []
        for item in items:
            parts = item.split(":")
            if len(parts) != 2:
                raise UsageError(f"jx_jy values are 'jx:jy' pairs, got {item!r}")
            out.append(tuple(parse_float(x, "jx_jy") for x in parts))
        return out
    if axis == "alpha":
        return [parse_angle(x) for x in items]
    return [parse_float(x, axis) for x in items]


def cmd_sweep(args, written):
    base = config_from_settings(settings_from_args(args))
    values = _sweep_values(args.axis, args.values)
    points = sweep(base, args.axis, values)
    outdir = Path(args.output)
    failed = []
    with _open_for_write(outdir / "summary.csv", written) as fh:
        fh.write(f"# djcsim {__version__}\n")
        fh.write(f"# axis = {args.axis}; base: " + ", ".join(f"{k} = {v!r}" for k, v in asdict(base.params).items()) + "\n")
        fh.write("value,total_dark_duration,min_concurrence,max_cavity_negativity\n")
        for n, point in enumerate(points):
            label = ":".join(map(repr, point.value)) if isinstance(point.value, tuple) else repr(point.value)
            if not point.ok:
                failed.append(f"{label}: {point.error}")
                fh.write(f"{label},nan,nan,nan\n")
                continue
            s = summarize(point)
            fh.write(",".join([label] + [_fmt(s[k], args.precision) for k in ("total_dark", "min_concurrence", "max_negativity")]) + "\n")
            write_trace_csv(outdir / f"trace_{n:03d}.csv", point.trace, args.precision, written)
    for msg in failed:
        log.error("sweep point failed: %s", msg)
    if failed and len(failed) == len(points):
        raise NumericalFailure("every sweep point failed")


def _add_model_flags(p):
    p.add_argument("--config", help="flat 'key = value' configuration file")
    g = p.add_argument_group("model")
    g.add_argument("--model", choices=[m.value for m in Model])
    g.add_argument("--mode", choices=[m.value for m in Mode])
    g.add_argument("--omega")
    g.add_argument("--nu")
    g.add_argument("--g")
    g.add_argument("--kappa")
    g.add_argument("--j-ising", dest="j_ising")
    g.add_argument("--jx", dest="j_x")
    g.add_argument("--jy", dest="j_y")
    g.add_argument("--alpha", help="initial-state angle, e.g. 0.3 or pi/12")
    g.add_argument("--atom-energy", dest="atom_energy", choices=["half", "full"])
    g.add_argument("--tau-max", dest="tau_max")
    g.add_argument("--n-points", dest="n_points", type=int)
    g.add_argument("--fock-cutoff", dest="fock_cutoff", type=int)


def build_parser():
    parser = argparse.ArgumentParser(prog="djcsim", description=__doc__)
    parser.add_argument("--version", action="version", version=f"djcsim {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("evolve", help="write one entanglement trace as CSV")
    _add_model_flags(p)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("figure", help="reproduce a published figure preset")
    p.add_argument("name", help=", ".join(FIGURES))
    p.add_argument("--mode", choices=[m.value for m in Mode], help="override the preset's mode")
    p.add_argument("-o", "--output", required=True, help="output directory")
    p.set_defaults(func=cmd_figure)

    p = sub.add_parser("spectrum", help="closed-form vs diagonalised reduced-matrix spectrum")
    _add_model_flags(p)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("validate", help="compare the published closed forms with numerics")
    _add_model_flags(p)
    p.add_argument("--times", default="0,0.5,1,2,3,5,10", help="comma-separated sample times")
    p.add_argument("-o", "--output", required=True, help="output prefix (.txt and .kv are written)")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("sweep", help="scan one parameter and summarise dark periods")
    _add_model_flags(p)
    p.add_argument("--axis", required=True, choices=["kappa", "j_ising", "jx_jy", "alpha"])
    p.add_argument("--values", required=True, help="comma-separated; jx_jy takes jx:jy pairs")
    p.add_argument("-o", "--output", required=True, help="output directory")
    p.set_defaults(func=cmd_sweep)

    for action in sub.choices.values():
        action.add_argument("--precision", type=int, default=12, help="digits after the decimal point")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="djcsim: %(message)s")
    try:
        with output_files() as written:
            args.func(args, written)
    except UsageError as exc:
        print(f"djcsim: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalFailure as exc:
        print(f"djcsim: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def main_exit():
    sys.exit(main())


if __name__ == "__main__":
    main_exit()
