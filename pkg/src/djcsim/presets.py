"""Parameter sets of the published figures."""
from __future__ import annotations

from dataclasses import replace

import numpy as np

from .engine import RunConfig
from .models import HamiltonianVariant, Mode, Model, ModelParams

PAPER_ALPHAS = (np.pi / 12, np.pi / 6, np.pi / 4)
ALPHA_NAMES = {np.pi / 12: "pi/12", np.pi / 6: "pi/6", np.pi / 4: "pi/4"}

# fock cutoff at which the XY counterexample is converged to 1e-6 (see README)
XY_FOCK_CUTOFF = 14

_HOP_PAPER = HamiltonianVariant(Model.JC_HOP, Mode.PAPER_MATRIX)
_ISING = HamiltonianVariant(Model.ISING, Mode.OPERATOR)
_XY = HamiltonianVariant(Model.XY, Mode.OPERATOR)


def _hop(kappa):
    return RunConfig(ModelParams(omega=1.0, nu=1.0, g=0.1, kappa=kappa), variant=_HOP_PAPER)


def _ising(j):
    return RunConfig(ModelParams(omega=1.0, nu=1.0, g=0.5, kappa=0.1, j_ising=j), variant=_ISING)


FIGURES = {
    "2a": (_hop(0.001), PAPER_ALPHAS),
    "2b": (_hop(0.01), PAPER_ALPHAS),
    "2c": (_hop(0.1), PAPER_ALPHAS),
    "2d": (_hop(0.2), PAPER_ALPHAS),
    "3a": (_hop(0.5), PAPER_ALPHAS),
    "3b": (_hop(1.0), PAPER_ALPHAS),
    "5a": (_ising(0.5), PAPER_ALPHAS),
    "5b": (_ising(1.0), PAPER_ALPHAS),
    "5c": (_ising(1.5), PAPER_ALPHAS),
    "5d": (_ising(2.0), PAPER_ALPHAS),
    "xy": (
        RunConfig(
            ModelParams(omega=1.0, nu=1.0, g=0.5, kappa=0.001, j_x=1.95, j_y=0.05),
            variant=_XY,
            fock_cutoff=XY_FOCK_CUTOFF,
        ),
        (np.pi / 6,),
    ),
}


def figure_configs(name, mode=None) -> list:
    """One :class:`RunConfig` per initial-state angle of figure ``name``."""
    if name not in FIGURES:
        raise KeyError(f"unknown figure preset {name!r}; choose from {', '.join(FIGURES)}")
    base, alphas = FIGURES[name]
    if mode is not None and mode is not base.variant.mode:
        base = replace(base, variant=HamiltonianVariant(base.variant.tag, mode))
    return [replace(base, alpha=a) for a in alphas]


def alpha_name(alpha) -> str:
    for value, name in ALPHA_NAMES.items():
        if abs(alpha - value) < 1e-15:
            return name
    return f"{alpha:.6g}"
