"""Cyclic Jacobi diagonalization of small dense Hermitian matrices."""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

__all__ = [
    "EigenError",
    "NonHermitianError",
    "NonConvergenceError",
    "JacobiResult",
    "MinEig",
    "jacobi_eigenvalues",
    "hermitian_min_eig",
    "hermitian_max_eig",
    "OFFDIAG_RTOL",
    "MAX_SWEEPS",
]

OFFDIAG_RTOL = 1e-13
MAX_SWEEPS = 100
HERMITIAN_RTOL = 1e-12


class EigenError(ArithmeticError):
    pass


class NonHermitianError(EigenError):
    def __init__(self, defect: float):
        super().__init__(f"matrix is not Hermitian (max |G - G^H| = {defect:.3e})")
        self.defect = defect


class NonConvergenceError(EigenError):
    def __init__(self, offdiag: float, sweeps: int):
        super().__init__(
            f"Jacobi iteration did not converge in {sweeps} sweeps "
            f"(off-diagonal mass {offdiag:.3e})"
        )
        self.offdiag = offdiag
        self.sweeps = sweeps


class JacobiResult(NamedTuple):
    eigenvalues: np.ndarray  # ascending
    sweeps: int
    offdiag: float
    tolerance: float  # absolute off-diagonal stopping threshold


class MinEig(NamedTuple):
    value: float
    negative: bool  # round-off produced a value below zero; reported unclamped
    norm2: float  # largest |eigenvalue|, the spectral norm
    tolerance: float
    sweeps: int


def _offdiag_mass(a: np.ndarray) -> float:
    off = a - np.diag(np.diag(a))
    return float(np.linalg.norm(off))


def jacobi_eigenvalues(
    G,
    rtol: float = OFFDIAG_RTOL,
    max_sweeps: int = MAX_SWEEPS,
    hermitian_rtol: float = HERMITIAN_RTOL,
) -> JacobiResult:
    """All eigenvalues of a Hermitian matrix by cyclic complex Jacobi rotations.

    Each rotation first removes the phase of ``a[p, q]`` with a diagonal
    unitary and then applies the classical real rotation, so the working
    matrix stays exactly Hermitian. Iterates until the off-diagonal
    Frobenius mass drops below ``rtol * ||G||_F``.
    """
    a = np.array(G, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    n = a.shape[0]
    fro = float(np.linalg.norm(a))
    defect = float(np.max(np.abs(a - a.conj().T))) if n else 0.0
    if defect > hermitian_rtol * max(fro, 1.0):
        raise NonHermitianError(defect)
    # symmetrize the round-off away so rotations preserve exact Hermitian structure
    a = 0.5 * (a + a.conj().T)
    tol = rtol * fro
    off = _offdiag_mass(a)
    sweeps = 0
    while off > tol:
        if sweeps >= max_sweeps:
            raise NonConvergenceError(off, sweeps)
        sweeps += 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                r = abs(apq)
                if r == 0.0:
                    continue
                ph = apq / r
                app = a[p, p].real
                aqq = a[q, q].real
                tau = (aqq - app) / (2.0 * r)
                if abs(tau) > 1e150:
                    t = 0.5 / tau
                else:
                    t = math.copysign(1.0, tau) / (abs(tau) + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                u = np.array([[c, s], [-s * ph.conjugate(), c * ph.conjugate()]])
                idx = [p, q]
                a[:, idx] = a[:, idx] @ u
                a[idx, :] = u.conj().T @ a[idx, :]
                a[p, q] = a[q, p] = 0.0
                a[p, p] = app - t * r
                a[q, q] = aqq + t * r
        off = _offdiag_mass(a)
    return JacobiResult(np.sort(np.diag(a).real), sweeps, off, tol)


def hermitian_min_eig(G, rtol: float = OFFDIAG_RTOL, max_sweeps: int = MAX_SWEEPS) -> MinEig:
    res = jacobi_eigenvalues(G, rtol, max_sweeps)
    ev = res.eigenvalues
    if ev.size == 0:
        raise ValueError("empty matrix")
    lo = float(ev[0])
    return MinEig(lo, lo < 0.0, float(np.max(np.abs(ev))), res.tolerance, res.sweeps)


def hermitian_max_eig(G, rtol: float = OFFDIAG_RTOL, max_sweeps: int = MAX_SWEEPS) -> float:
    return float(jacobi_eigenvalues(G, rtol, max_sweeps).eigenvalues[-1])
