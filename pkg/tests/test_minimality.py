import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nullcontrol import (
    ExponentialFamily,
    InputVector,
    Spectrum,
    boas_certificate,
    classify_minimality,
    exponential_family,
    gamma_sequence,
    gram_matrix,
    imaginary_ladder,
    scaled_gamma_bound,
)
from nullcontrol.eigen import jacobi_eigenvalues
from nullcontrol.gram import GammaSequence

from conftest import random_family


def orthonormal(n=4):
    return exponential_family(imaginary_ladder(n), InputVector.constant(1 / math.sqrt(2 * math.pi), n), 2 * math.pi)


def test_flat_sequence_is_strong():
    r = classify_minimality(GammaSequence((1, 1, 1, 1)))
    assert r.verdict == "strong-evidence" and r.gamma_estimate == 1


def test_geometric_decay():
    r = classify_minimality(GammaSequence((1, 0.1, 0.01, 0.001)))
    assert r.verdict == "geometric-decay"
    assert r.decay_ratio == pytest.approx(0.01)


def test_zero_is_degenerate():
    assert classify_minimality(GammaSequence((1, 0.5, 0))).verdict == "degenerate"


def test_middle_band_unresolved():
    assert classify_minimality(GammaSequence((1, 0.8, 0.5, 0.2))).verdict == "unresolved"


def test_report_carries_thresholds():
    d = classify_minimality(GammaSequence((1, 1))).as_dict()
    assert d["thresholds"] == {"geometric_decay_below": 0.1, "strong_at_least": 0.5}


def test_floor_entries_are_unresolved_not_zero():
    fam = exponential_family(__import__("nullcontrol").heat(10), InputVector.constant(1, 10), 0.02)
    g = gamma_sequence(fam)
    assert g.below_floor[-1]
    r = classify_minimality(g)
    assert r.verdict == "unresolved"


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(0.0, 10.0), min_size=1, max_size=10), st.integers(0, 9))
def test_any_zero_gives_degenerate(vals, pos):
    vals = list(vals)
    vals.insert(pos % (len(vals) + 1), 0.0)
    assert classify_minimality(GammaSequence(tuple(vals))).verdict == "degenerate"


def test_boas_orthonormal():
    cert = boas_certificate(orthonormal(), 1.0)
    assert cert.passed
    assert cert.worst_ratio == pytest.approx(1.0, abs=1e-12)


def test_boas_dependent_pair_fails():
    fam = ExponentialFamily(Spectrum((1, 1)), InputVector((1, 1)), 1.0)
    cert = boas_certificate(fam, 1e-6)
    assert not cert.passed
    assert cert.worst_ratio <= 1e-15


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 8))
def test_boas_never_fails_at_gamma(seed, n):
    fam = random_family(np.random.default_rng(seed), n, re_scale=5.0)
    g = gamma_sequence(fam).values[-1]
    cert = boas_certificate(fam, g, seed=seed)
    assert cert.passed
    assert cert.worst_ratio >= g * (1 - 1e-9)


def test_scaled_bound_identity_and_square():
    g = GammaSequence((1.0, 0.5))
    assert scaled_gamma_bound(g, InputVector.constant(1, 2)).values == (1.0, 0.5)
    assert scaled_gamma_bound(g, InputVector.constant(2, 2)).values == (4.0, 2.0)


def test_scaled_bound_rejects_zero():
    with pytest.raises(ValueError, match="b_2 = 0"):
        scaled_gamma_bound(GammaSequence((1.0, 0.5)), InputVector((1, 0)))


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 8), beta=st.floats(0.1, 1.0))
def test_direct_gamma_dominates_scaled_bound(seed, n, beta):
    r = np.random.default_rng(seed)
    plain = random_family(r, n, L=1.0, re_scale=4.0, weights=False)
    mags = r.uniform(beta, 2.0, n)
    mags[r.integers(n)] = beta
    b = InputVector(tuple(mags * np.exp(2j * np.pi * r.uniform(size=n))))
    direct = gamma_sequence(plain.scaled(b)).values
    bound = scaled_gamma_bound(gamma_sequence(plain), b).values
    assert all(d >= lb - 1e-10 for d, lb in zip(direct, bound))


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 6), dependent=st.booleans())
def test_positive_gamma_iff_positive_determinant(seed, n, dependent):
    r = np.random.default_rng(seed)
    fam = random_family(r, n, L=1.0, re_scale=2.0, im_scale=3.0)
    if dependent and n > 1:
        lam = list(fam.spectrum.eigenvalues)
        lam[-1] = lam[0]
        fam = ExponentialFamily(Spectrum(tuple(lam)), fam.input, fam.horizon)
    G = gram_matrix(fam).entries
    res = jacobi_eigenvalues(G)
    det_prod = float(np.prod(res.eigenvalues))
    det_lapack = float(np.real(np.linalg.det(G)))
    g = gamma_sequence(fam)
    positive = g.values[-1] > g.tolerance(n - 1)
    scale = np.linalg.norm(G) ** n
    assert det_prod == pytest.approx(det_lapack, abs=1e-10 * scale)
    if dependent and n > 1:
        assert not positive
        assert abs(det_prod) <= 1e-10 * scale
    else:
        assert positive and det_prod > 0
