import math

import numpy as np
import pytest
import scipy.integrate
from hypothesis import given, settings
from hypothesis import strategies as st

from nullcontrol import (
    ExponentialFamily,
    InputVector,
    Spectrum,
    exponential_family,
    explicit,
    gamma_sequence,
    gram_matrix,
    gram_quadrature_oracle,
    heat,
    imaginary_ladder,
    phi,
)
from nullcontrol.gram import EXT, SERIES_THRESHOLD

from conftest import random_family


def quad_complex(f, a, b):
    re = scipy.integrate.quad(lambda t: f(t).real, a, b, epsabs=0, epsrel=1e-13, limit=200)[0]
    im = scipy.integrate.quad(lambda t: f(t).imag, a, b, epsabs=0, epsrel=1e-13, limit=200)[0]
    return re + 1j * im


def test_phi_zero_rate():
    assert phi(0, 3) == 3


def test_phi_against_adaptive_quadrature():
    ref = quad_complex(lambda t: np.exp(-2 * t) + 0j, 0, 1)
    assert abs(phi(2, 1) - ref) <= 1e-12
    assert abs(phi(2, 1) - 0.43233235838169365) <= 1e-15


def test_phi_full_period():
    assert abs(phi(1j * math.pi, 2)) <= 1e-15


@settings(max_examples=100, deadline=None)
@given(
    x=st.floats(-1.0, 1.0).filter(lambda v: v == 0 or abs(v) > 1e-6),
    y=st.floats(-1.0, 1.0).filter(lambda v: v == 0 or abs(v) > 1e-6),
    L=st.floats(0.1, 10.0),
)
def test_phi_series_branch_continuous(x, y, L):
    # cancellation-free closed form: 1 - exp(-x - iy) = -expm1(-x) + exp(-x) 2 sin^2(y/2) + i exp(-x) sin y
    s = complex(x, y) * SERIES_THRESHOLD / L * 0.999
    if s == 0:
        return
    a, b = s.real * L, s.imag * L
    num = -math.expm1(-a) + math.exp(-a) * 2 * math.sin(b / 2) ** 2 + 1j * math.exp(-a) * math.sin(b)
    assert abs(phi(s, L) - num / s) <= 1e-15 * L


def test_ladder_gram_is_scaled_identity():
    fam = exponential_family(imaginary_ladder(6), InputVector.constant(1, 6), 2 * math.pi)
    G = gram_matrix(fam).entries
    assert np.allclose(G, 2 * math.pi * np.eye(6), rtol=0, atol=1e-13)


def test_heat_two_entries_against_quadrature():
    fam = exponential_family(heat(2), InputVector.constant(1, 2), 0.1)
    G = gram_matrix(fam).entries
    lam = fam.rates()
    for j in range(2):
        for k in range(2):
            ref = quad_complex(lambda t: np.exp(-(lam[j] + np.conj(lam[k])) * t), 0, 0.1)
            assert abs(G[j, k] - ref) <= 1e-10 * abs(ref)
            assert G[j, k] == pytest.approx(phi(lam[j] + np.conj(lam[k]), 0.1), rel=1e-15)


def test_zero_weight_zeroes_row_and_column():
    fam = exponential_family(heat(3), InputVector((1, 0, 2)), 0.1)
    G = gram_matrix(fam).entries
    assert np.all(G[1] == 0) and np.all(G[:, 1] == 0)


def test_oracle_constant_family():
    fam = exponential_family(explicit([0]), InputVector((1,)), 1.0)
    for panels in (1, 7, 64):
        assert gram_quadrature_oracle(fam, panels=panels).entries[0, 0] == pytest.approx(1.0, abs=1e-14)


def test_oracle_decaying_exponential():
    fam = exponential_family(explicit([1]), InputVector((1,)), 1.0)
    got = gram_quadrature_oracle(fam, panels=64).entries[0, 0]
    assert abs(got - (1 - math.exp(-2)) / 2) <= 1e-10


def test_oracle_hermitian(rng):
    fam = random_family(rng, 3)
    Q = gram_quadrature_oracle(fam, panels=32).entries
    assert np.allclose(Q, Q.conj().T, rtol=1e-14, atol=0)


def test_gram_exactly_hermitian(rng):
    for _ in range(20):
        G = gram_matrix(random_family(rng, rng.integers(1, 9))).extended
        assert np.array_equal(G, np.conj(G).T)


def test_heat_profile_regression():
    fam = exponential_family(heat(5), InputVector.constant(1, 5), 0.02)
    g = gamma_sequence(fam)
    expected = [0.024522961617760047, 4.4992622427209375e-4, 1.1231347437008562e-05,
                4.6309331789151326e-07, 2.8630616281349594e-08]
    assert all(v > 0 for v in g.values)
    assert all(a > b for a, b in zip(g.values, g.values[1:]))
    assert np.allclose(g.values, expected, rtol=1e-6, atol=0)


def test_orthonormal_and_ladder_gamma():
    fam = exponential_family(imaginary_ladder(5), InputVector.constant(1 / math.sqrt(2 * math.pi), 5), 2 * math.pi)
    assert np.allclose(gamma_sequence(fam).values, 1.0, atol=1e-13)
    fam = exponential_family(imaginary_ladder(7), InputVector.constant(1, 7), 2 * math.pi)
    assert np.allclose(gamma_sequence(fam).values, 2 * math.pi, atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 8))
def test_closed_form_matches_oracle(seed, n):
    fam = random_family(np.random.default_rng(seed), n)
    G = gram_matrix(fam).entries
    Q = gram_quadrature_oracle(fam, panels=256).entries
    assert np.linalg.norm(G - Q) <= 1e-8 * np.linalg.norm(G)


def test_oracle_converges_under_refinement(rng):
    fam = random_family(rng, 4)
    G = gram_matrix(fam).entries
    errs = [np.linalg.norm(G - gram_quadrature_oracle(fam, panels=p, order=4).entries) for p in (2, 8, 32)]
    assert errs[2] < errs[1] < errs[0]


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 8))
def test_gamma_monotone_and_rayleigh(seed, n):
    r = np.random.default_rng(seed)
    fam = random_family(r, n, re_scale=4.0)
    g = gamma_sequence(fam)
    assert g.is_monotone()
    G = gram_matrix(fam)
    for _ in range(20):
        c = r.standard_normal(n) + 1j * r.standard_normal(n)
        assert G.quadratic_form(c) >= g.values[-1] * np.sum(np.abs(c) ** 2) - g.tolerance(n - 1) * np.sum(np.abs(c) ** 2)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 6))
def test_quadratic_form_is_squared_norm(seed, n):
    r = np.random.default_rng(seed)
    fam = random_family(r, n, re_scale=3.0)
    c = r.standard_normal(n) + 1j * r.standard_normal(n)
    combo = lambda t: np.abs(c @ fam.evaluate(t, n)) ** 2
    ref = scipy.integrate.quad(lambda t: float(combo(t)[0]), 0, fam.horizon, epsabs=0, epsrel=1e-12, limit=400)[0]
    assert gram_matrix(fam).quadratic_form(c) == pytest.approx(ref, rel=1e-9)
