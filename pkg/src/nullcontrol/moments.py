"""Minimum-norm solutions of truncated exponential moment problems.

A control ``u(t) = sum_k alpha_k conj(f_k(t))`` on ``[0, L]`` (zero afterwards)
has moments ``integral f_j u = (G alpha)_j``, so prescribing the first ``n``
moments is the Hermitian system ``G_n alpha = c``. Its solution is the
minimum-L2-norm control meeting the constraints.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .eigen import hermitian_min_eig
from .gram import EXT, PRECISION_FLOOR, cross_gram, gram_matrix
from .spectral import ExponentialFamily

__all__ = [
    "IllConditionedError",
    "MomentTargets",
    "ControlSignal",
    "SolvabilityProfile",
    "GramSolver",
    "solve_truncated_moment",
    "verify_moments",
    "solvability_diagnostic",
    "build_biorthogonal",
    "GROWTH_RATIO",
]

GROWTH_RATIO = 10.0


class IllConditionedError(ArithmeticError):
    """The truncated Gram matrix is numerically singular."""

    def __init__(self, gamma: float, norm2: float, order: int):
        super().__init__(
            f"Gram matrix of order {order} is numerically singular: "
            f"gamma_n = {gamma:.3e}, gamma_n/||G||_2 = {gamma / norm2 if norm2 else 0.0:.3e} "
            f"(floor {PRECISION_FLOOR:g})"
        )
        self.gamma = gamma
        self.norm2 = norm2
        self.order = order


@dataclass(frozen=True)
class MomentTargets:
    values: tuple[complex, ...]

    def __post_init__(self) -> None:
        vals = tuple(complex(v) for v in self.values)
        if not all(math.isfinite(v.real) and math.isfinite(v.imag) for v in vals):
            raise ValueError("moment targets must be finite")
        object.__setattr__(self, "values", vals)

    @property
    def order(self) -> int:
        return len(self.values)

    def array(self, dtype=np.complex128) -> np.ndarray:
        return np.array(self.values, dtype=dtype)

    def norm(self) -> float:
        return float(np.linalg.norm(self.array()))


@dataclass(frozen=True, eq=False)
class ControlSignal:
    """``u(t) = sum_k alpha_k conj(exp(-lambda_k t) b_k)`` on ``[0, L]``, 0 for ``t > L``.

    ``coefficients`` are kept in extended precision; ``gamma`` and
    ``solve_residual`` are filled in by the solver.
    """

    coefficients: np.ndarray
    family: ExponentialFamily
    gamma: float | None = None
    solve_residual: float | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "coefficients", np.asarray(self.coefficients, dtype=EXT))

    @property
    def horizon(self) -> float:
        return self.family.horizon

    @property
    def order(self) -> int:
        return len(self.coefficients)

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        tt = np.atleast_1d(t)
        F = self.family.evaluate(tt, self.order)
        u = self.coefficients.astype(np.complex128) @ F.conj()
        u = np.where((tt >= 0) & (tt <= self.horizon), u, 0.0)
        return u[0] if t.ndim == 0 else u

    def gram(self) -> np.ndarray:
        return gram_matrix(self.family, self.order).extended

    def norm(self) -> float:
        """``||u||_{L2} = sqrt(alpha^* G alpha)``."""
        a = self.coefficients
        return math.sqrt(max(float(np.real(np.conj(a) @ self.gram() @ a)), 0.0))

    def scaled(self, kappa: complex) -> "ControlSignal":
        return ControlSignal(self.coefficients * EXT(kappa), self.family)

    def with_coefficients(self, coeffs) -> "ControlSignal":
        return ControlSignal(coeffs, self.family)

    def terms(self):
        """``(lambda_k, b_k, alpha_k)`` triples."""
        lam = self.family.rates(self.order)
        b = self.family.weights(self.order)
        return list(zip(lam, b, self.coefficients.astype(np.complex128)))


class GramSolver:
    """Cholesky factorization of ``G_n`` with extended-precision refinement.

    The factorization runs in double precision; residuals ``c - G alpha``
    are formed against the extended-precision Gram entries and the
    correction is accumulated in extended precision.
    """

    def __init__(self, fam: ExponentialFamily, n: int, check_floor: bool = True):
        if n > len(fam):
            raise ValueError(f"order {n} exceeds family size {len(fam)}")
        self.family = fam
        self.n = n
        self.G = gram_matrix(fam, n).extended
        G64 = self.G.astype(np.complex128)
        eig = hermitian_min_eig(G64)
        self.gamma = eig.value
        self.norm2 = eig.norm2
        if check_floor and (eig.value <= 0 or eig.value / eig.norm2 < PRECISION_FLOOR):
            raise IllConditionedError(eig.value, eig.norm2, n)
        try:
            self._chol = scipy.linalg.cho_factor(G64, lower=True)
        except np.linalg.LinAlgError as exc:
            raise IllConditionedError(eig.value, eig.norm2, n) from exc
        self._chol_ext = None

    def solve(self, c, refine: int = 1) -> tuple[np.ndarray, float]:
        c = np.asarray(c, dtype=EXT)
        alpha = scipy.linalg.cho_solve(self._chol, c.astype(np.complex128)).astype(EXT)
        for _ in range(refine):
            r = c - self.G @ alpha
            alpha = alpha + scipy.linalg.cho_solve(self._chol, r.astype(np.complex128))
        res = float(np.linalg.norm((c - self.G @ alpha).astype(np.complex128)))
        return alpha, res

    def dual_norm_sq(self, c) -> float:
        """``c^* G^{-1} c = ||L^{-1} c||^2`` with ``L`` the extended-precision Cholesky factor."""
        if self._chol_ext is None:
            self._chol_ext = _cholesky_ext(self.G)
        y = _forward_ext(self._chol_ext, np.asarray(c, dtype=EXT))
        return float(np.sum(np.abs(y) ** 2))


# LAPACK has no 80-bit path; the orders in scope are small enough for plain loops
def _cholesky_ext(G: np.ndarray) -> np.ndarray:
    n = G.shape[0]
    L = np.zeros_like(G)
    for j in range(n):
        d = np.real(G[j, j] - np.sum(np.abs(L[j, :j]) ** 2))
        if not d > 0:
            raise IllConditionedError(float(d), float(np.max(np.abs(G))), n)
        L[j, j] = np.sqrt(d)
        for i in range(j + 1, n):
            L[i, j] = (G[i, j] - np.sum(L[i, :j] * np.conj(L[j, :j]))) / L[j, j]
    return L


def _forward_ext(L: np.ndarray, c: np.ndarray) -> np.ndarray:
    y = np.zeros_like(c)
    for i in range(len(c)):
        y[i] = (c[i] - np.sum(L[i, :i] * y[:i])) / L[i, i]
    return y


def _targets_array(c, n: int) -> np.ndarray:
    vals = c.values if isinstance(c, MomentTargets) else tuple(c)
    if len(vals) < n:
        raise ValueError(f"{len(vals)} moment targets supplied, order {n} requested")
    return np.array(vals[:n], dtype=EXT)


def solve_truncated_moment(
    fam: ExponentialFamily, c: MomentTargets, n: int | None = None, refine: int = 1
) -> ControlSignal:
    """Minimum-norm control with ``integral_0^L f_j u = c_j`` for j = 1..n."""
    n = c.order if n is None else n
    target = _targets_array(c, n)
    solver = GramSolver(fam, n)
    alpha, res = solver.solve(target, refine)
    return ControlSignal(alpha, fam, gamma=solver.gamma, solve_residual=res)


def verify_moments(fam: ExponentialFamily, u: ControlSignal, c: MomentTargets) -> np.ndarray:
    """``|integral f_j u - c_j|`` in closed form, j = 1..len(c)."""
    n = c.order
    C = cross_gram(fam, u.family, n, u.order)
    moments = C @ u.coefficients
    return np.abs((moments - c.array(EXT)).astype(np.complex128))


@dataclass(frozen=True)
class SolvabilityProfile:
    norms: tuple[float, ...]
    dual_norms_sq: tuple[float, ...]
    gammas: tuple[float, ...]
    resolved_order: int
    truncated: bool
    growth_ratio: float
    verdict: str  # bounded | blow-up
    threshold: float = GROWTH_RATIO
    note: str = ""

    def as_dict(self) -> dict:
        return {
            "norms": list(self.norms),
            "dual_norms_sq": list(self.dual_norms_sq),
            "gammas": list(self.gammas),
            "resolved_order": self.resolved_order,
            "truncated": self.truncated,
            "growth_ratio": self.growth_ratio,
            "verdict": self.verdict,
            "growth_threshold": self.threshold,
            "note": self.note,
        }


def solvability_diagnostic(
    fam: ExponentialFamily, c: MomentTargets, N: int | None = None, refine: int = 1
) -> SolvabilityProfile:
    """Norms of the minimum-norm sections ``u_1, ..., u_N``.

    Bounded growth is evidence of solvability of the infinite problem, a
    blow-up (``||u_N|| / ||u_ceil(N/2)|| > GROWTH_RATIO``) evidence against.
    The profile stops at the last order whose Gram matrix is resolvable.
    """
    N = min(c.order, len(fam)) if N is None else N
    if N > len(fam):
        raise ValueError(f"order {N} exceeds family size {len(fam)}")
    target = _targets_array(c, N)
    norms, duals, gammas = [], [], []
    note = ""
    for n in range(1, N + 1):
        try:
            solver = GramSolver(fam, n)
        except IllConditionedError as exc:
            note = str(exc)
            break
        alpha, _ = solver.solve(target[:n], refine)
        u = ControlSignal(alpha, fam)
        norms.append(u.norm())
        duals.append(solver.dual_norm_sq(target[:n]))
        gammas.append(solver.gamma)
    m = len(norms)
    if m == 0:
        return SolvabilityProfile((), (), (), 0, True, float("nan"), "unresolved", note=note)
    mid = norms[math.ceil(m / 2) - 1]
    if mid > 0:
        ratio = norms[-1] / mid
    else:
        ratio = 1.0 if norms[-1] == 0 else float("inf")
    verdict = "blow-up" if ratio > GROWTH_RATIO else "bounded"
    return SolvabilityProfile(
        tuple(norms), tuple(duals), tuple(gammas), m, m < N, ratio, verdict, note=note
    )


def build_biorthogonal(fam: ExponentialFamily, n: int | None = None, refine: int = 1) -> list[ControlSignal]:
    """Controls ``u_k`` with ``integral f_j u_k = delta_jk``; columns of ``G_n^{-1}``."""
    n = len(fam) if n is None else n
    solver = GramSolver(fam, n)
    out = []
    for k in range(n):
        e = np.zeros(n, dtype=EXT)
        e[k] = 1
        alpha, res = solver.solve(e, refine)
        out.append(ControlSignal(alpha, fam, gamma=solver.gamma, solve_residual=res))
    return out
