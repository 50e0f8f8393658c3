"""Finite-order evidence for (strong) minimality of exponential families."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .gram import GammaSequence, gram_matrix
from .spectral import ExponentialFamily, InputVector

__all__ = [
    "DECAY_RATIO",
    "STRONG_RATIO",
    "MinimalityReport",
    "BoasCertificate",
    "classify_minimality",
    "boas_certificate",
    "scaled_gamma_bound",
    "probe_vectors",
]

DECAY_RATIO = 0.1
STRONG_RATIO = 0.5
BOAS_RTOL = 1e-9


@dataclass(frozen=True)
class MinimalityReport:
    gamma: GammaSequence
    verdict: str  # strong-evidence | geometric-decay | degenerate | unresolved
    gamma_estimate: float
    decay_ratio: float
    thresholds: dict = field(
        default_factory=lambda: {"geometric_decay_below": DECAY_RATIO, "strong_at_least": STRONG_RATIO}
    )
    reason: str = ""

    def as_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "reason": self.reason,
            "gamma": list(self.gamma.values),
            "gamma_tolerance": list(self.gamma.tolerances) if self.gamma.tolerances else None,
            "gamma_below_precision_floor": list(self.gamma.below_floor),
            "gamma_estimate": self.gamma_estimate,
            "decay_ratio": self.decay_ratio,
            "thresholds": dict(self.thresholds),
        }


def classify_minimality(g: GammaSequence) -> MinimalityReport:
    """Heuristic verdict from the tail ratio ``gamma_N / gamma_ceil(N/2)``.

    Entries flagged below the precision floor are never read as zeros: a
    sequence ending below the floor is ``unresolved``.
    """
    vals = g.values
    N = len(vals)
    floor = g.below_floor
    last = vals[-1]
    mid = vals[math.ceil(N / 2) - 1]
    ratio = last / mid if mid > 0 else float("nan")

    def report(verdict: str, reason: str) -> MinimalityReport:
        return MinimalityReport(g, verdict, last, ratio, reason=reason)

    for i, v in enumerate(vals):
        if v <= g.tolerance(i) and not floor[i]:
            return report("degenerate", f"gamma_{i + 1} = {v:.3e} is not positive")
    if floor[-1]:
        return report("unresolved", "gamma_N is below the precision floor")
    if ratio < DECAY_RATIO:
        return report("geometric-decay", f"tail ratio {ratio:.3e} < {DECAY_RATIO}")
    if ratio >= STRONG_RATIO:
        return report("strong-evidence", f"tail ratio {ratio:.3e} >= {STRONG_RATIO}")
    return report("unresolved", f"tail ratio {ratio:.3e} between thresholds")


@dataclass(frozen=True)
class BoasCertificate:
    passed: bool
    worst_ratio: float
    gamma_candidate: float
    trials: int
    seed: int
    order: int

    def as_dict(self) -> dict:
        return {
            "passed": self.passed,
            "worst_ratio": self.worst_ratio,
            "gamma_candidate": self.gamma_candidate,
            "trials": self.trials,
            "seed": self.seed,
            "order": self.order,
        }


def probe_vectors(n: int) -> np.ndarray:
    """Deterministic coefficient probes: unit vectors and pairwise ``e_i +- e_j``, ``e_i +- i e_j``."""
    rows = [np.eye(n, dtype=complex)]
    for i in range(n):
        for j in range(i + 1, n):
            for w in (1, -1, 1j, -1j):
                v = np.zeros(n, dtype=complex)
                v[i], v[j] = 1.0, w
                rows.append(v[None, :])
    return np.concatenate(rows)


def boas_certificate(
    fam: ExponentialFamily,
    gamma_candidate: float,
    trials: int = 200,
    n: int | None = None,
    seed: int = 0,
    rtol: float = BOAS_RTOL,
) -> BoasCertificate:
    """Check ``gamma * sum |c_k|^2 <= ||sum c_j f_j||^2`` on sampled coefficient vectors.

    Samples complex Gaussian vectors plus the deterministic probes of
    :func:`probe_vectors`; passes iff the smallest observed ratio is at least
    ``gamma_candidate * (1 - rtol)``.
    """
    if not gamma_candidate > 0:
        raise ValueError("gamma_candidate must be positive")
    n = len(fam) if n is None else n
    G = gram_matrix(fam, n).entries
    rng = np.random.default_rng(seed)
    C = rng.standard_normal((trials, n)) + 1j * rng.standard_normal((trials, n))
    C = np.concatenate([C, probe_vectors(n)])
    # ||sum c_j f_j||^2 = c^T G conj(c) since G_jk = (f_j, f_k)
    num = np.real(np.einsum("ij,jk,ik->i", C, G, C.conj()))
    den = np.sum(np.abs(C) ** 2, axis=1)
    worst = float(np.min(num / den))
    return BoasCertificate(
        worst >= gamma_candidate * (1 - rtol), worst, float(gamma_candidate), trials, seed, n
    )


def scaled_gamma_bound(gamma_plain: GammaSequence, b: InputVector) -> GammaSequence:
    """Lower bound ``min_{j<=n} |b_j|^2 * gamma_n`` for the family scaled by ``b``.

    The square on ``|b_j|`` comes from the quadratic form: the scaled family's
    combination with coefficients ``c_j`` is the plain combination with
    coefficients ``c_j b_j``.
    """
    bb = np.abs(b.array())
    if len(bb) < len(gamma_plain):
        raise ValueError("input vector shorter than the gamma sequence")
    if np.any(bb[: len(gamma_plain)] == 0):
        j = int(np.flatnonzero(bb == 0)[0]) + 1
        raise ValueError(f"b_{j} = 0: inf |b_n| > 0 is required and b_j != 0 is necessary")
    run_min = np.minimum.accumulate(bb[: len(gamma_plain)] ** 2)
    return GammaSequence(tuple(run_min * np.asarray(gamma_plain.values)))
