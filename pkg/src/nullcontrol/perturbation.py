"""Transfer of strong minimality to perturbed exponential families.

If ``||sum c_j (y_j - x_j)|| <= q ||sum c_j x_j||`` with ``q < 1`` and the
``x_j`` satisfy a Boas bound with constant ``alpha^2``, then the ``y_j``
satisfy one with ``alpha^2 (1 - q)^2``. At truncation ``n`` the tightest
``q`` is the square root of the largest generalized eigenvalue of the
pair (Gram of differences, Gram of ``x``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .eigen import hermitian_max_eig
from .gram import composite_gauss_legendre, cross_gram, gamma_sequence, gram_matrix
from .minimality import MinimalityReport, classify_minimality
from .moments import IllConditionedError
from .simulator import VerificationReport, verify_null_controllability
from .spectral import ControlProblem, DeviationRule, ExponentialFamily
from .synthesis import synthesize_null_control

__all__ = [
    "InadmissiblePerturbation",
    "DeviationReport",
    "StripMass",
    "PerturbationReport",
    "difference_gram",
    "deviation_ratio",
    "deviation_profile",
    "sampled_deviation_ratio",
    "transfer_bound",
    "strip_deviation_mass",
    "perturbed_controllability_check",
]


# q this close to 1 transfers a bound of order (1 - q)^2 ~ 1e-18, i.e. nothing;
# the margin also keeps round-off from flipping the exact q = 1 case
Q_MARGIN = 1e-9


class InadmissiblePerturbation(ValueError):
    def __init__(self, q: float):
        super().__init__(f"deviation ratio q = {q:.6g} is not below 1")
        self.q = q


def difference_gram(reference: ExponentialFamily, perturbed: ExponentialFamily, n: int) -> np.ndarray:
    """Gram matrix of ``y_j - x_j``, extended precision."""
    Gyy = gram_matrix(perturbed, n).extended
    Gxx = gram_matrix(reference, n).extended
    Cyx = cross_gram(perturbed, reference, n)
    D = Gyy - Cyx - np.conj(Cyx).T + Gxx
    return 0.5 * (D + np.conj(D).T)


def deviation_ratio(reference: ExponentialFamily, perturbed: ExponentialFamily, n: int) -> float:
    """Tight constant ``q_n`` in ``||sum c (y - x)|| <= q ||sum c x||`` over ``c`` in C^n.

    Congruence-transforms the generalized problem with the Cholesky factor
    ``G = L L^*`` and takes the largest eigenvalue of ``L^{-1} D L^{-*}``.
    """
    if reference.horizon != perturbed.horizon:
        raise ValueError(
            f"horizons differ: {reference.horizon} vs {perturbed.horizon}"
        )
    if n > min(len(reference), len(perturbed)):
        raise ValueError(f"order {n} exceeds a family size")
    G = gram_matrix(reference, n).entries
    D = difference_gram(reference, perturbed, n).astype(np.complex128)
    try:
        L = np.linalg.cholesky(G)
    except np.linalg.LinAlgError as exc:
        raise IllConditionedError(float("nan"), float(np.linalg.norm(G, 2)), n) from exc
    X = scipy.linalg.solve_triangular(L, D, lower=True)
    M = scipy.linalg.solve_triangular(L, X.conj().T, lower=True).conj().T
    M = 0.5 * (M + M.conj().T)
    return math.sqrt(max(hermitian_max_eig(M), 0.0))


def deviation_profile(reference: ExponentialFamily, perturbed: ExponentialFamily, N: int) -> list[float]:
    return [deviation_ratio(reference, perturbed, n) for n in range(1, N + 1)]


def sampled_deviation_ratio(
    reference: ExponentialFamily,
    perturbed: ExponentialFamily,
    n: int,
    trials: int = 500,
    seed: int = 0,
) -> float:
    """Largest ``||sum c (y - x)|| / ||sum c x||`` over random complex ``c``."""
    G = gram_matrix(reference, n).entries
    D = difference_gram(reference, perturbed, n).astype(np.complex128)
    rng = np.random.default_rng(seed)
    C = rng.standard_normal((trials, n)) + 1j * rng.standard_normal((trials, n))
    num = np.real(np.einsum("ij,jk,ik->i", C, D, C.conj()))
    den = np.real(np.einsum("ij,jk,ik->i", C, G, C.conj()))
    return float(np.sqrt(np.max(np.maximum(num, 0.0) / den)))


def transfer_bound(alpha_sq: float, q: float) -> float:
    """``alpha^2 (1 - q)^2``, a Boas constant for the perturbed family."""
    if not alpha_sq > 0:
        raise ValueError("alpha_sq must be positive")
    if q < 0:
        raise ValueError("q must be nonnegative")
    if q >= 1:
        raise InadmissiblePerturbation(q)
    return alpha_sq * (1.0 - q) ** 2


@dataclass(frozen=True)
class StripMass:
    partial: float
    remainder: float
    t2: float
    K: int

    @property
    def total(self) -> float:
        return self.partial + self.remainder

    def as_dict(self) -> dict:
        return {
            "t2": self.t2,
            "K": self.K,
            "partial_sum": self.partial,
            "remainder_bound": self.remainder,
            "total": self.total,
        }


def strip_deviation_mass(
    t2: float,
    gamma_strip: float,
    deviation: DeviationRule = DeviationRule(),
    K: int = 100,
    panels: int = 64,
) -> StripMass:
    """``M(t2) = integral_0^t2 exp(2 gamma t) sum_k |exp(d(k) t) - 1|^2 dt``.

    The sum over ``k <= K`` is integrated by composite Gauss-Legendre; the
    remainder ``k > K`` is bounded with ``|exp(d t) - 1| <= |d| t exp(|d| t)``
    and ``sum_{k>K} |d(k)|^2 <= C^2 / K`` where ``|d(k)| <= C / k``.
    """
    if not t2 > 0:
        raise ValueError("t2 must be positive")
    if K < 1:
        raise ValueError("K must be >= 1")
    t, w = composite_gauss_legendre(0.0, t2, panels)
    k = np.arange(1, K + 1)
    d = np.asarray(deviation(k), dtype=complex)
    terms = np.abs(np.expm1(d[:, None] * t[None, :])) ** 2
    weight = np.exp(2.0 * gamma_strip * t)
    partial = float(np.sum(w * weight * terms.sum(axis=0)))
    C = deviation.bound_constant
    rem_integrand = weight * t**2 * np.exp(2.0 * C * t / (K + 1))
    remainder = float(C**2 / K * np.sum(w * rem_integrand))
    return StripMass(partial, remainder, float(t2), int(K))


@dataclass(frozen=True)
class DeviationReport:
    q_values: tuple[float, ...]
    q_final: float
    admissible: bool
    transferred_gamma: float | None
    alpha_sq: float
    sampled_max: float | None = None
    seed: int | None = None

    def as_dict(self) -> dict:
        return {
            "q_values": list(self.q_values),
            "q_final": self.q_final,
            "admissible": self.admissible,
            "alpha_sq": self.alpha_sq,
            "transferred_gamma": self.transferred_gamma,
            "sampled_max_ratio": self.sampled_max,
            "seed": self.seed,
        }


@dataclass(frozen=True, eq=False)
class PerturbationReport:
    reference_minimality: MinimalityReport
    deviation: DeviationReport
    perturbed_gamma: float
    verdict: str  # pass | fail | inadmissible
    moment_residual: float | None = None
    verification: VerificationReport | None = None
    forced: bool = False

    def as_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "forced": self.forced,
            "reference_minimality": self.reference_minimality.as_dict(),
            "deviation": self.deviation.as_dict(),
            "perturbed_gamma": self.perturbed_gamma,
            "transfer_bound_holds": (
                None
                if self.deviation.transferred_gamma is None
                else self.perturbed_gamma >= self.deviation.transferred_gamma
            ),
            "moment_residual": self.moment_residual,
            "verification": None if self.verification is None else self.verification.as_dict(),
        }


def perturbed_controllability_check(
    reference: ControlProblem,
    perturbed: ControlProblem,
    n: int,
    J: int | None = None,
    tol: float = 1e-7,
    force: bool = False,
    trials: int = 500,
    seed: int = 0,
) -> PerturbationReport:
    """Deviation test, transferred bound, then synthesis and verification on ``perturbed``.

    With ``q_n >= 1`` the transfer hypothesis fails and synthesis is skipped
    unless ``force`` is set.
    """
    ref_fam = reference.family()
    pert_fam = perturbed.family()
    ref_gamma = gamma_sequence(ref_fam, n)
    minimality = classify_minimality(ref_gamma)
    if minimality.verdict != "strong-evidence" and not force:
        raise ValueError(
            f"reference family is not classified strong-evidence at order {n} "
            f"({minimality.verdict}: {minimality.reason})"
        )
    qs = deviation_profile(ref_fam, pert_fam, n)
    q = qs[-1]
    alpha_sq = ref_gamma.values[-1]
    admissible = q < 1.0 - Q_MARGIN
    sampled = sampled_deviation_ratio(ref_fam, pert_fam, n, trials, seed)
    dev = DeviationReport(
        tuple(qs),
        q,
        admissible,
        transfer_bound(alpha_sq, q) if admissible else None,
        alpha_sq,
        sampled,
        seed,
    )
    pert_gamma = gamma_sequence(pert_fam, n).values[-1]
    if not admissible and not force:
        return PerturbationReport(minimality, dev, pert_gamma, "inadmissible")
    synth = synthesize_null_control(perturbed, n)
    report = verify_null_controllability(perturbed, synth.control, J, tol)
    verdict = "pass" if report.passed and admissible else "fail"
    return PerturbationReport(
        minimality, dev, pert_gamma, verdict, synth.moment_residual, report, forced=not admissible
    )
