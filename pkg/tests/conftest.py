import numpy as np
import pytest

from nullcontrol import ExponentialFamily, InputVector, Spectrum


def random_family(rng, n, L=None, re_scale=40.0, im_scale=20.0, weights=True):
    """Unvalidated random family with |Re lambda| L <= re_scale."""
    L = rng.uniform(0.05, 3.0) if L is None else L
    lam = rng.uniform(-re_scale, re_scale, n) / L + 1j * rng.uniform(-im_scale, im_scale, n) / L
    if weights:
        b = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    else:
        b = np.ones(n)
    return ExponentialFamily(Spectrum(tuple(lam)), InputVector(tuple(b)), float(L))


def random_hermitian(rng, n, low=-10.0, high=10.0):
    """``Q diag(w) Q^*`` with a Haar-ish unitary; returns the matrix and its planted eigenvalues."""
    w = rng.uniform(low, high, n)
    Z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    Q, R = np.linalg.qr(Z)
    Q = Q * (np.diag(R) / np.abs(np.diag(R)))
    A = (Q * w) @ Q.conj().T
    return 0.5 * (A + A.conj().T), np.sort(w)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
