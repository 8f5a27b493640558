"""Closed-form spectrum, state coefficients and atomic reduced state.

These are transcriptions of published closed forms for the hopping model
(``omega == nu``, two excitations).  They are evaluated exactly as printed,
including sign and phase choices; :func:`djcsim.engine.validate` measures
how far they sit from the numerically propagated state instead of
patching them here.

Coefficient ``c[i]`` belongs to row ``i`` of the published reduced matrix
(see :func:`djcsim.models.reduced_basis_map`): ``c1`` is the
``|down down 0 0>`` amplitude and ``c9`` the ``|up up 0 0>`` amplitude.
The reduced atomic matrix uses the ordering ``down-down, down-up, up-down,
up-up``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

SQRT2 = np.sqrt(2.0)
TINY = 1e-300


class SingularParameterError(ZeroDivisionError):
    """A closed-form denominator vanished at the requested parameters."""


def _nonzero(name, value):
    if not np.isfinite(value) or abs(value) < TINY:
        raise SingularParameterError(f"{name} = {value!r} vanishes; closed form undefined at these parameters")
    return value


def _delta(g, k):
    return np.sqrt(4 * g**4 + 4 * (5 + 4 * SQRT2) * g**2 * k**2 + k**4)


def _lambdas(g, k):
    d = _delta(g, k)
    lp = np.sqrt(6 * g**2 + 3 * k**2 + d) / SQRT2
    # radicand is >= 0 analytically; guard the last-bit rounding
    lm = np.sqrt(max(6 * g**2 + 3 * k**2 - d, 0.0)) / SQRT2
    return lp, lm, d


@dataclass(frozen=True)
class AnalyticSpectrum:
    e: tuple  # e[0] .. e[8] are E1 .. E9
    lambda_plus: float
    lambda_minus: float
    delta: float

    def __getattr__(self, name):
        if len(name) == 2 and name[0] == "e" and name[1].isdigit() and name[1] != "0":
            return self.e[int(name[1]) - 1]
        raise AttributeError(name)

    def sorted(self) -> np.ndarray:
        return np.sort(np.asarray(self.e))


def analytic_spectrum(params) -> AnalyticSpectrum:
    """Eigenvalues of the reduced hopping Hamiltonian from their closed forms."""
    w, g, k = params.omega, params.g, params.kappa
    lp, lm, d = _lambdas(g, k)
    r = np.sqrt(2 * g**2 + k**2)
    e = (-w, w, w, w - r, w + r, w + lp, w - lp, w + lm, w - lm)
    return AnalyticSpectrum(tuple(float(x) for x in e), float(lp), float(lm), float(d))


@dataclass(frozen=True)
class AnalyticCoefficients:
    t: float
    c: np.ndarray  # c[0] .. c[8] are c1 .. c9
    aux: dict = field(default_factory=dict)

    @property
    def norm_sq(self) -> float:
        return float(np.sum(np.abs(self.c) ** 2))


def _coefficient_aux(g, k):
    lp, lm, d = _lambdas(g, k)
    # gamma_+- = +-(4 - 3 sqrt2)(4 g^6 + k^4 (k^2 +- delta))
    #            + g^2 k^2 ((+-(-12 + sqrt2)) k^2 + (-4 + sqrt2) delta)
    #            + g^4 (-+8 sqrt2 k^2 + 2 (-4 + 3 sqrt2) delta)
    gamma = {}
    for name, sgn in (("gamma_plus", 1.0), ("gamma_minus", -1.0)):
        gamma[name] = (
            sgn * (4 - 3 * SQRT2) * (4 * g**6 + k**4 * (k**2 + sgn * d))
            + g**2 * k**2 * (sgn * (-12 + SQRT2) * k**2 + (-4 + SQRT2) * d)
            + g**4 * (-sgn * 8 * SQRT2 * k**2 + 2 * (-4 + 3 * SQRT2) * d)
        )
    gp = _nonzero("gamma_plus", gamma["gamma_plus"])
    gm = _nonzero("gamma_minus", gamma["gamma_minus"])
    # shared denominator of N2 and M2
    den2 = _nonzero("N2/M2 denominator", 2 * (
        (-3 * SQRT2 + 4) * (16 * g**8 + k**8)
        + 2 * g**2 * k**2 * ((-5 * SQRT2 + 2) * (4 * g**4 + k**4) - 8 * (1 - SQRT2) * g**2 * k**2)
    ))
    base = 4 * g**4 + k**4 + 4 * g**2 * k**2 * (5 + 4 * SQRT2)
    n2 = (base + 3 * d * (2 * g**2 + k**2)) * lm / den2
    m2 = (base - 3 * d * (2 * g**2 + k**2)) * lp / den2
    n3 = SQRT2 * gp / _nonzero("N3 denominator", g**2 * k**2 * (-2 * SQRT2 * g**2 + (-2 + SQRT2) * (k**2 + d)))
    m3 = SQRT2 * gm / _nonzero("M3 denominator", g**2 * k**2 * (-2 * SQRT2 * g**2 - (-2 + SQRT2) * (-k**2 + d)))
    n4 = SQRT2 * gp / _nonzero("N4 denominator", g**3 * k * ((-1 + SQRT2) * (2 * g**2 - d) - (1 + SQRT2) * k**2))
    m4 = SQRT2 * gm / _nonzero("M4 denominator", g**3 * k * ((-1 + SQRT2) * (2 * g**2 + d) - (1 + SQRT2) * k**2))
    n5 = 2**1.5 * (g**2 * k) ** 2
    return dict(
        delta=d, lambda_plus=lp, lambda_minus=lm, gamma_plus=gp, gamma_minus=gm,
        N2=n2, N3=_nonzero("N3", n3), N4=_nonzero("N4", n4), N5=n5,
        M2=m2, M3=_nonzero("M3", m3), M4=_nonzero("M4", m4),
    )


def analytic_coefficients(params, alpha, t, c9_phase_sign=+1) -> AnalyticCoefficients:
    """Printed closed forms of the nine reduced-basis amplitudes at time ``t``.

    ``c9_phase_sign`` multiplies the exponent of the time-independent
    ``exp(+i t omega)`` term of ``c9``; the default ``+1`` is the printed
    form, ``-1`` the sign carried by the sibling terms.
    """
    w, g, k = params.omega, params.g, params.kappa
    if g <= 0 or k <= 0:
        raise SingularParameterError("closed-form coefficients need g > 0 and kappa > 0")
    a = _coefficient_aux(g, k)
    lp, lm = a["lambda_plus"], a["lambda_minus"]
    e6, e7, e8, e9 = w + lp, w - lp, w + lm, w - lm
    ph = lambda energy: np.exp(-1j * energy * t)  # noqa: E731
    ca, sa = np.cos(alpha), np.sin(alpha)
    # (2 (1 - sqrt2) g^2 k^2 + 4 g^4 + k^4), shared by c3 and c5
    den35 = _nonzero("c3/c5 denominator", 2 * (1 - SQRT2) * g**2 * k**2 + 4 * g**4 + k**4)
    den9 = _nonzero("c9 denominator", (2 - 2**1.5) * g**2 * k**2 + 4 * g**4 + k**4)

    c = np.zeros(9, dtype=complex)
    # c1 = e^{i t w} sin(alpha)
    c[0] = np.exp(1j * t * w) * sa
    # c2 = c4 = i (1 - sqrt2) e^{-i t w} g^2 k cos(alpha) (N2 sin(lm t) + M2 sin(lp t))
    c[1] = 1j * (1 - SQRT2) * np.exp(-1j * t * w) * g**2 * k * ca * (
        a["N2"] * np.sin(lm * t) + a["M2"] * np.sin(lp * t)
    )
    c[3] = c[1]
    # c3 = ((e^{-iE9t} + e^{-iE8t})/N3 - (e^{-iE6t} + e^{-iE7t})/M3
    #       + e^{-itw}(sqrt2 g^2 k^2 - 2 g^4)/den35) cos(alpha)
    c[2] = (
        (ph(e9) + ph(e8)) / a["N3"]
        - (ph(e6) + ph(e7)) / a["M3"]
        + np.exp(-1j * t * w) * (SQRT2 * g**2 * k**2 - 2 * g**4) / den35
    ) * ca
    # c5 = c8 = (((e^{-iE8t} + e^{-iE9t})/N4 - (e^{-iE6t} + e^{-iE7t})/M4)
    #            + e^{-itw} g k (sqrt2 g^2 - k^2)/den35) cos(alpha)
    c[4] = (
        ((ph(e8) + ph(e9)) / a["N4"] - (ph(e6) + ph(e7)) / a["M4"])
        + np.exp(-1j * t * w) * g * k * (SQRT2 * g**2 - k**2) / den35
    ) * ca
    c[7] = c[4]
    # c6 = c7 = ((e^{-itE9} - e^{-itE8}) lp/gamma+ + (e^{-itE6} - e^{-itE7}) lm/gamma-) sqrt2 g^3 k^2 cos(alpha)
    c[5] = (
        (ph(e9) - ph(e8)) * lp / a["gamma_plus"] + (ph(e6) - ph(e7)) * lm / a["gamma_minus"]
    ) * SQRT2 * g**3 * k**2 * ca
    c[6] = c[5]
    # c9 = ((-(e^{-iE8t} + e^{-iE9t})/gamma+ + (e^{-iE6t} + e^{-iE7t})/gamma-) N5
    #       + e^{+itw}(-sqrt2 g^2 + k^2)^2/den9) cos(alpha)
    c[8] = (
        (-(ph(e8) + ph(e9)) / a["gamma_plus"] + (ph(e6) + ph(e7)) / a["gamma_minus"]) * a["N5"]
        + np.exp(c9_phase_sign * 1j * t * w) * (-SQRT2 * g**2 + k**2) ** 2 / den9
    ) * ca
    return AnalyticCoefficients(float(t), c, a)


@dataclass(frozen=True)
class AnalyticRho:
    t: float
    r11: float
    r14: complex
    r22: float
    r33: float
    r44: float
    aux: dict = field(default_factory=dict)

    @property
    def r41(self) -> complex:
        return np.conj(self.r14)

    @property
    def trace(self) -> float:
        return float(self.r11 + self.r22 + self.r33 + self.r44)

    def matrix(self) -> np.ndarray:
        rho = np.zeros((4, 4), dtype=complex)
        rho[0, 0], rho[1, 1], rho[2, 2], rho[3, 3] = self.r11, self.r22, self.r33, self.r44
        rho[0, 3], rho[3, 0] = self.r14, self.r41
        return rho


def _rho_aux(g, k):
    lp, lm, d = _lambdas(g, k)
    a5, a6 = -SQRT2 + 1, 1 + SQRT2
    eta_p, eta_m = 2 * g**2 + d, 2 * g**2 - d
    a1 = 0.5 * g**2 * k * (
        16
        + 2 * (-a5 * eta_p - a6 * k**2) ** 2 / (g**2 * k**2)
        + (2 * SQRT2 * g**2 + SQRT2 * a5 * (-k**2 + d)) ** 2 / g**4
        + 8 * lm**2 / g**2
        + (3 - 2 * SQRT2) * (eta_p - k**2) ** 2 * lm**2 / (g**4 * k**2)
    )
    a2 = 0.5 * g**2 * k * (
        16
        + 2 * (a5 * eta_m + a6 * k**2) ** 2 / (g**2 * k**2)
        + (-2 * SQRT2 * g**2 + SQRT2 * a5 * (k**2 + d)) ** 2 / g**4
        + 8 * lp**2 / g**2
        + (3 - 2 * SQRT2) * (k**2 - eta_m) ** 2 * lp**2 / (g**4 * k**2)
    )
    a1 = _nonzero("A1", a1)
    a2 = _nonzero("A2", a2)
    return dict(
        delta=d, lambda_plus=lp, lambda_minus=lm, eta_plus=eta_p, eta_minus=eta_m,
        A1=a1, A2=a2, A3=a1 / (2 * k), A4=a2 / (2 * k), A5=a5, A6=a6,
        # the r11/r14/r44 denominator prints +2 A5 g^2 k^2, the A7 one -2 A5 g^2 k^2
        D_plus=_nonzero("4g^4 + 2A5 g^2k^2 + k^4", 4 * g**4 + 2 * a5 * g**2 * k**2 + k**4),
        D_minus=_nonzero("4g^4 - 2A5 g^2k^2 + k^4", 4 * g**4 - 2 * a5 * g**2 * k**2 + k**4),
    )


def analytic_atom_rho(params, alpha, t) -> AnalyticRho:
    """Printed closed forms of the atomic reduced density matrix elements."""
    w, g, k = params.omega, params.g, params.kappa
    if g <= 0 or k <= 0:
        raise SingularParameterError("closed-form reduced state needs g > 0 and kappa > 0")
    x = _rho_aux(g, k)
    lp, lm, d = x["lambda_plus"], x["lambda_minus"], x["delta"]
    a1, a2, a3, a4, a5, a6 = (x[n] for n in ("A1", "A2", "A3", "A4", "A5", "A6"))
    eta_p, eta_m = x["eta_plus"], x["eta_minus"]
    dp = x["D_plus"]
    ca2, sa2 = np.cos(alpha) ** 2, np.sin(alpha) ** 2
    cm, cp = np.cos(lm * t), np.cos(lp * t)
    sm, sp = np.sin(lm * t), np.sin(lp * t)

    # A7 = (2/k) A5 (eta- cos(lp t)/A4 + eta+ cos(lm t)/A3) + (sqrt2 g^2 k - k^3)/(4g^4 - 2A5 g^2k^2 + k^4)
    a7 = (2 / k) * a5 * (eta_m * cp / a4 + eta_p * cm / a3) + (SQRT2 * g**2 * k - k**3) / x["D_minus"]

    # r11 = sin^2 + 8 (3 - 2 sqrt2) cos^2 ((k^2 - eta+) sin(lm t) lm/A1 + (k^2 - eta-) sin(lp t) lp/A2)^2
    #       + cos^2 ((2g^4 - sqrt2 g^2k^2)/D+ + 2 sqrt2 (-2g^2 + A5 (k^2 - delta)) cos(lm t)/A3
    #                + 2 sqrt2 (-2g^2 + A5 (k^2 + delta)) cos(lp t)/A4)^2
    r11 = (
        sa2
        + 8 * (3 - 2 * SQRT2) * ca2 * ((k**2 - eta_p) * sm * lm / a1 + (k**2 - eta_m) * sp * lp / a2) ** 2
        + ca2 * (
            (2 * g**4 - SQRT2 * g**2 * k**2) / dp
            + 2 * SQRT2 * (-2 * g**2 + a5 * (k**2 - d)) * cm / a3
            + 2 * SQRT2 * (-2 * g**2 + a5 * (k**2 + d)) * cp / a4
        ) ** 2
    )
    # r14 = ((-sqrt2 g^2 + k^2)^2/D+ + 2 cos(lm t)/A3 + 2 cos(lp t)/A4) cos sin e^{2 i t w}
    r14 = (
        ((-SQRT2 * g**2 + k**2) ** 2 / dp + 2 * cm / a3 + 2 * cp / a4)
        * np.cos(alpha) * np.sin(alpha) * np.exp(2j * t * w)
    )
    # r22 = g^2 cos^2 (64 k^2 (sin(lm t) lm/A1 + sin(lp t) lp/A2)^2
    #                 + (2 A6 k (cos(lm t)/A3 + cos(lp t)/A4) + A7)^2)
    r22 = g**2 * ca2 * (
        64 * k**2 * (sm * lm / a1 + sp * lp / a2) ** 2
        + (2 * a6 * k * (cm / a3 + cp / a4) + a7) ** 2
    )
    # r44 = cos^2 (1 - 2 g^2 (g^2 + k^2)/D+ + 2 cos(lm t)/A3 + 2 cos(lp t)/A4)^2
    r44 = ca2 * (1 - 2 * g**2 * (g**2 + k**2) / dp + 2 * cm / a3 + 2 * cp / a4) ** 2
    aux = dict(x, A7=a7)
    return AnalyticRho(float(t), float(r11), complex(r14), float(r22), float(r22), float(r44), aux)
