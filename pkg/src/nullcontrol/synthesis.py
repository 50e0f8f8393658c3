"""Null-control synthesis through the moment reduction.

The state is steered to zero at ``t1`` by a control supported on
``[0, t1 - T]`` whose moments against ``exp(-lambda_j t) b_j`` equal
``-x0_j``. The sign lives here; the moment solver takes targets as given.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .moments import (
    ControlSignal,
    MomentTargets,
    solve_truncated_moment,
    verify_moments,
)
from .spectral import ControlProblem

__all__ = [
    "NecessaryConditionError",
    "NonRealControlError",
    "SynthesisResult",
    "moment_targets_from_state",
    "synthesize_null_control",
    "realify",
    "realness_defect",
]

REALNESS_GRID = 513


class NecessaryConditionError(ValueError):
    """Some controlled mode has ``b_j = 0`` and cannot be reached."""


class NonRealControlError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class SynthesisResult:
    control: ControlSignal
    targets: MomentTargets
    realness_defect: float
    gamma_used: float
    moment_residual: float
    problem: ControlProblem | None = None
    real: bool = False

    @property
    def order(self) -> int:
        return self.targets.order


def moment_targets_from_state(p: ControlProblem, n: int) -> MomentTargets:
    if n > len(p.x0):
        raise ValueError(f"order {n} exceeds the {len(p.x0)} stored initial coefficients")
    return MomentTargets(tuple(-x for x in p.x0[:n]))


def realness_defect(u: ControlSignal, points: int = REALNESS_GRID) -> float:
    t = np.linspace(0.0, u.horizon, points)
    return float(np.max(np.abs(np.imag(u(t)))))


def synthesize_null_control(p: ControlProblem, n: int | None = None, refine: int = 1) -> SynthesisResult:
    """Minimum-norm control annihilating the first ``n`` modes at ``t1``."""
    n = p.order if n is None else n
    if n < 1 or n > p.order:
        raise ValueError(f"order {n} outside 1..{p.order}")
    b = p.input.coefficients[:n]
    zero = [j + 1 for j, bj in enumerate(b) if bj == 0]
    if zero:
        raise NecessaryConditionError(
            f"b_{zero[0]} = 0: mode {zero[0]} is not influenced by the input, "
            "so b_j != 0 is necessary for null-controllability"
        )
    fam = p.family()
    c = moment_targets_from_state(p, n)
    u = solve_truncated_moment(fam, c, n, refine)
    res = float(np.max(verify_moments(fam, u, c)))
    return SynthesisResult(u, c, realness_defect(u), float(u.gamma), res, p)


def _conjugate_partners(p: ControlProblem, n: int, rtol: float = 1e-12) -> list[int]:
    lam = p.spectrum.array()[:n]
    b = p.input.array()[:n]
    x0 = p.x0_array()[:n]
    partners = []
    for k in range(n):
        scale = max(abs(lam[k]), 1.0)
        hits = np.flatnonzero(np.abs(lam - np.conj(lam[k])) <= rtol * scale)
        if hits.size == 0:
            raise NonRealControlError(
                f"eigenvalue {lam[k]} has no conjugate partner among the controlled modes"
            )
        m = int(hits[0])
        if abs(b[m] - np.conj(b[k])) > rtol * max(abs(b[k]), 1.0) or abs(
            x0[m] - np.conj(x0[k])
        ) > rtol * max(abs(x0[k]), 1.0):
            raise NonRealControlError(f"data for modes {k + 1} and {m + 1} are not conjugate")
        partners.append(m)
    return partners


def realify(r: SynthesisResult, tol: float = 1e-10) -> SynthesisResult:
    """Replace ``u`` by ``Re u`` when the problem data are conjugate-symmetric.

    ``Re u`` stays in the span because ``conj(f_k) = f_m`` for the partner
    index ``m``; its coefficients are ``(alpha + conj(alpha[partner])) / 2``.
    The moments of the projected control are re-verified. ``tol`` is
    relative to ``max(1, max |alpha_k|)``.
    """
    problem = r.problem
    if problem is None:
        raise ValueError("synthesis result does not carry its problem")
    n = r.order
    if not problem.spectrum.truncate(n).conjugate_closed:
        raise NonRealControlError("spectrum is not closed under conjugation; control cannot be real")
    partners = _conjugate_partners(problem, n)
    scale = max(1.0, float(np.max(np.abs(r.control.coefficients.astype(complex)))))
    if r.realness_defect > tol * scale:
        raise NonRealControlError(
            f"realness defect {r.realness_defect:.3e} exceeds tolerance {tol * scale:.3e}"
        )
    a = r.control.coefficients
    real_coeffs = 0.5 * (a + np.conj(a[partners]))
    u = ControlSignal(real_coeffs, r.control.family, r.control.gamma, r.control.solve_residual)
    fam = problem.family()
    res = float(np.max(verify_moments(fam, u, r.targets)))
    return SynthesisResult(u, r.targets, realness_defect(u), r.gamma_used, res, problem, real=True)
