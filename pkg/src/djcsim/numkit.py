"""Dense Hermitian linear algebra for small closed quantum systems.

Matrices are plain complex ``numpy.ndarray`` objects.  Two eigensolvers are
provided: a cyclic complex Jacobi solver (self-contained, used for small
matrices and as a cross-check) and LAPACK ``eigh`` (used for the larger
truncated Fock spaces).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

HERMITIAN_TOL = 1e-10
JACOBI_TOL = 1e-13


class NotHermitianError(ValueError):
    """Raised when a matrix expected to be Hermitian is not."""


@dataclass(frozen=True)
class HermEig:
    """Eigendecomposition ``m = V diag(w) V^dagger`` with ascending ``w``."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def check_hermitian(m, tol=HERMITIAN_TOL) -> np.ndarray:
    """Return ``m`` as a complex array, raising if it is not square Hermitian.

    The error message names the entry with the largest ``|m - m^dagger|``.
    """
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NotHermitianError(f"expected a square matrix, got shape {m.shape}")
    diff = np.abs(m - m.conj().T)
    if m.size and diff.max() > tol:
        i, j = np.unravel_index(np.argmax(diff), diff.shape)
        raise NotHermitianError(
            f"matrix not Hermitian: |m[{i},{j}] - conj(m[{j},{i}])| = {diff[i, j]:.3e} > {tol:g}"
        )
    return m


def kron(*ops) -> np.ndarray:
    """Kronecker product of one or more matrices, left to right."""
    out = np.asarray(ops[0])
    for op in ops[1:]:
        out = np.kron(out, np.asarray(op))
    return out


def _off_norm(a):
    return float(np.linalg.norm(a - np.diag(np.diag(a))))


def jacobi_eig(m, tol=JACOBI_TOL, max_sweeps=100) -> HermEig:
    """Cyclic Jacobi diagonalisation of a complex Hermitian matrix.

    Each rotation first removes the phase of ``a[p, q]`` and then applies a
    real Givens rotation that zeroes it.  Sweeps continue until the
    off-diagonal Frobenius norm drops below ``tol`` (scaled by ``max(1, |m|)``).
    """
    a = check_hermitian(m).copy()
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    scale = max(1.0, float(np.linalg.norm(a)))
    for _ in range(max_sweeps):
        if _off_norm(a) < tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                b = abs(apq)
                if b < 1e-300:
                    continue
                phase = apq / b
                diff = (a[q, q] - a[p, p]).real
                # smallest rotation angle, |theta| <= pi/4
                theta = 0.5 * np.arctan(2.0 * b / diff) if diff != 0.0 else 0.25 * np.pi
                c, s = np.cos(theta), np.sin(theta)
                g = np.array([[c, s], [-s * phase.conjugate(), c * phase.conjugate()]])
                idx = [p, q]
                a[:, idx] = a[:, idx] @ g
                a[idx, :] = g.conj().T @ a[idx, :]
                a[q, p] = a[p, q] = 0.0
                v[:, idx] = v[:, idx] @ g
    else:
        raise RuntimeError(f"Jacobi did not converge in {max_sweeps} sweeps")
    w = np.diag(a).real.copy()
    order = np.argsort(w, kind="stable")
    return HermEig(w[order], v[:, order])


def herm_eig(m, method="lapack") -> HermEig:
    """Eigendecomposition of a Hermitian matrix.

    Parameters
    ----------
    m : array_like
        Square Hermitian matrix (checked to ``HERMITIAN_TOL``).
    method : {"lapack", "jacobi"}
        ``"jacobi"`` uses :func:`jacobi_eig`; ``"lapack"`` calls
        ``numpy.linalg.eigh``.

    Returns
    -------
    HermEig
        Ascending eigenvalues and unitary eigenvector columns.
    """
    m = check_hermitian(m)
    if method == "jacobi":
        return jacobi_eig(m)
    if method != "lapack":
        raise ValueError(f"unknown eigensolver {method!r}")
    # symmetrise so eigh sees the exact Hermitian part
    w, v = np.linalg.eigh(0.5 * (m + m.conj().T))
    return HermEig(w, v)


class Propagator:
    """Time-evolution operator ``U(t) = exp(-i h t)`` from one cached eigendecomposition."""

    def __init__(self, h, method="lapack"):
        self.eig = herm_eig(h, method=method)

    @property
    def dim(self):
        return self.eig.eigenvalues.size

    def __call__(self, t) -> np.ndarray:
        if t == 0:
            return np.eye(self.dim, dtype=complex)
        v = self.eig.eigenvectors
        return (v * np.exp(-1j * self.eig.eigenvalues * t)) @ v.conj().T

    def apply(self, psi, times) -> np.ndarray:
        """Evolve ``psi`` to every time in ``times``; returns shape ``(len(times), dim)``."""
        v = self.eig.eigenvectors
        c0 = v.conj().T @ np.asarray(psi, dtype=complex)
        times = np.asarray(times, dtype=float)
        phases = np.exp(-1j * np.outer(times, self.eig.eigenvalues))
        out = (phases * c0) @ v.T
        # exp(0) is exact, but V V^dagger psi is not; keep t=0 bit-exact
        out[times == 0.0] = psi
        return out


def propagator(h, t, method="lapack") -> np.ndarray:
    return Propagator(h, method=method)(t)
