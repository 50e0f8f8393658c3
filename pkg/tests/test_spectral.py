import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nullcontrol import (
    ControlProblem,
    DeviationRule,
    InputVector,
    Spectrum,
    build_spectrum,
    exponential_family,
    explicit,
    heat,
    imaginary_ladder,
    strip_perturbed,
    validate_spectrum,
)
from nullcontrol.spectral import SpectrumError

PI2 = math.pi**2


def test_heat_three_modes():
    assert heat(3).eigenvalues == (-PI2, -4 * PI2, -9 * PI2)


def test_explicit_singleton_zero():
    s = explicit([0])
    assert s.eigenvalues == (0j,)
    assert validate_spectrum(s).ok


def test_strip_perturbed_ladder_four():
    s = strip_perturbed(4, DeviationRule(1.0), imaginary_ladder)
    expected = [1j + 1, 2j + 0.5, 3j + 1 / 3, 4j + 0.25]
    assert np.allclose(s.array(), expected, rtol=0, atol=1e-15)


def test_validate_heat_five():
    s = heat(5)
    v = validate_spectrum(s)
    assert v.ordered and v.distinct and v.beta_ok
    assert v.min_real_part == -25 * PI2
    assert s.re_lower_bound == -25 * PI2


def test_duplicate_rejected_by_builder_and_flagged_by_scan():
    with pytest.raises(SpectrumError, match="0 and 1"):
        explicit([1, 1])
    v = validate_spectrum(Spectrum((1, 1)))
    assert not v.distinct and v.duplicate_pair == (0, 1)


def test_conjugate_pair_closed():
    assert validate_spectrum(explicit([1j, -1j])).conjugate_closed
    assert not validate_spectrum(explicit([1j, 2j])).conjugate_closed


def test_unordered_rejected():
    with pytest.raises(SpectrumError, match="nondecreasing modulus"):
        explicit([2, 1])
    assert validate_spectrum(Spectrum((2, 1))).unordered_index == 1


def test_family_constant():
    fam = exponential_family(explicit([0]), InputVector((1,)), 1.0)
    t = np.linspace(0, 1, 7)
    assert np.allclose(fam.evaluate(t), 1.0)


def test_family_heat_two():
    fam = exponential_family(heat(2), InputVector((1, 1)), 0.1)
    t = np.linspace(0, 0.1, 11)
    F = fam.evaluate(t)
    assert np.allclose(F[0], np.exp(PI2 * t), rtol=1e-14)
    assert np.allclose(F[1], np.exp(4 * PI2 * t), rtol=1e-14)


def test_family_scaled_growth():
    fam = exponential_family(explicit([-1]), InputVector((2,)), 1.0)
    t = np.linspace(0, 1, 5)
    assert np.allclose(fam.evaluate(t)[0], 2 * np.exp(t), rtol=1e-15)


def test_family_rejects_bad_horizon():
    with pytest.raises(SpectrumError):
        exponential_family(heat(2), InputVector((1, 1)), 0.0)


def test_problem_requires_positive_horizon():
    with pytest.raises(SpectrumError, match="t1 - T"):
        ControlProblem(heat(1), InputVector((1,)), (1,), 0.1, 0.1)


def test_problem_rejects_nonfinite_state():
    with pytest.raises(SpectrumError):
        ControlProblem(heat(1), InputVector((1,)), (math.inf,), 1.0)


def test_unknown_preset():
    with pytest.raises(SpectrumError):
        build_spectrum({"name": "wave", "n": 3})


@settings(max_examples=60, deadline=None)
@given(
    name=st.sampled_from(["heat", "imaginary_ladder", "strip_perturbed"]),
    n=st.integers(1, 40),
    scale=st.complex_numbers(min_magnitude=0.0, max_magnitude=0.4, allow_nan=False, allow_infinity=False),
)
def test_presets_always_validate(name, n, scale):
    params = {"name": name, "n": n}
    if name == "strip_perturbed":
        params["deviation"] = scale
    s = build_spectrum(params)
    v = validate_spectrum(s)
    assert v.ok and v.beta_ok
    assert len(s) == n


@settings(max_examples=30, deadline=None)
@given(n=st.integers(1, 60))
def test_strip_deviation_is_exactly_one_over_k(n):
    ref = imaginary_ladder(n).array()
    pert = strip_perturbed(n).array()
    k = np.arange(1, n + 1)
    # the shift is the double nearest 1/k, bit for bit; the product is 1 up to one rounding
    assert np.array_equal(pert.real, 1.0 / k)
    assert np.array_equal(pert.imag, ref.imag)
    assert np.all(np.abs(np.abs(pert - ref) * k - 1.0) <= np.finfo(float).eps)


@settings(max_examples=60, deadline=None)
@given(
    st.lists(
        st.complex_numbers(max_magnitude=1e3, allow_nan=False, allow_infinity=False),
        min_size=1,
        max_size=12,
        unique=True,
    )
)
def test_reported_bound_is_min_real_part(values):
    values = sorted(values, key=abs)
    mods = [abs(v) for v in values]
    if len(set(mods)) != len(mods):
        return  # ties in modulus are fine, but keep the check simple
    s = explicit(values)
    assert validate_spectrum(s).min_real_part == min(complex(v).real for v in values)
    assert s.re_lower_bound == min(complex(v).real for v in values)


def test_conjugate_closed_multiset_invariant():
    s = explicit([1 + 1j, 1 - 1j, 3, 2 + 3j, 2 - 3j])
    assert s.conjugate_closed
    assert sorted(np.conj(s.array()), key=lambda z: (z.real, z.imag)) == sorted(
        s.array(), key=lambda z: (z.real, z.imag)
    )
