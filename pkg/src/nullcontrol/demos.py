"""Built-in problems for the worked examples."""

from __future__ import annotations

import math

from .spectral import ControlProblem, InputVector, heat, imaginary_ladder, strip_perturbed

HEAT_ORDER = 5
HEAT_STORED = 20
HEAT_T1 = 0.1
HEAT_LAG = 0.08
HEAT_CHECK = 15

STRIP_ORDER = 8
STRIP_HORIZON = 2 * math.pi
STRIP_TOL = 1e-7

PROFILE_ORDER = 10
PROFILE_HORIZON = 0.02


def heat_problem(stored: int = HEAT_STORED) -> ControlProblem:
    """Heat modes ``-j^2 pi^2``, ``b = 1``, ``x0_j = 1/j``, ``t1 = 0.1``, ``T = 0.08``.

    More modes are stored than controlled so the verification sees the
    first uncontrolled ones.
    """
    return ControlProblem(
        heat(stored),
        InputVector.constant(1.0, stored),
        tuple(1.0 / j for j in range(1, stored + 1)),
        HEAT_T1,
        HEAT_LAG,
    )


def strip_problems(n: int = STRIP_ORDER) -> tuple[ControlProblem, ControlProblem]:
    """Reference ``lambda_k = i k`` and perturbed ``mu_k = i k + 1/k`` on ``[0, 2 pi]``."""
    x0 = tuple(1.0 / k**2 for k in range(1, n + 1))
    b = InputVector.constant(1.0, n)
    ref = ControlProblem(imaginary_ladder(n), b, x0, STRIP_HORIZON, 0.0)
    return ref, ref.with_spectrum(strip_perturbed(n))


def heat_profile_problem(n: int = PROFILE_ORDER, horizon: float = PROFILE_HORIZON) -> ControlProblem:
    """Family ``exp(j^2 pi^2 t)`` on ``[0, horizon]`` wrapped as a problem with zero state."""
    return ControlProblem(heat(n), InputVector.constant(1.0, n), (0.0,) * n, horizon, 0.0)


DEMOS = ("heat-null-control", "strip-perturbation", "strong-minimality-heat")
