"""Gram matrices of exponential families on [0, L] and their minimal eigenvalues.

Closed-form entries are assembled in extended precision (``np.clongdouble``)
because heat-type families produce Gram matrices with condition numbers far
beyond 1e8; downstream solves refine against these extended entries. On
platforms where ``longdouble`` is plain double the code still runs, with a
correspondingly lower accuracy ceiling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .eigen import OFFDIAG_RTOL, hermitian_min_eig
from .spectral import ExponentialFamily

__all__ = [
    "EXT",
    "PRECISION_FLOOR",
    "SERIES_THRESHOLD",
    "GramMatrix",
    "GammaSequence",
    "phi",
    "gram_matrix",
    "cross_gram",
    "gram_quadrature_oracle",
    "composite_gauss_legendre",
    "gamma_sequence",
]

EXT = np.clongdouble
SERIES_THRESHOLD = 1e-4
SERIES_TERMS = 6
PRECISION_FLOOR = 1e-14
QUADRATURE_ORDER = 10


def phi(s, L, dtype=np.complex128):
    """``integral_0^L exp(-s t) dt = (1 - exp(-s L)) / s``, with ``phi(0, L) = L``.

    Vectorized over ``s``. For ``|s| L`` below ``SERIES_THRESHOLD`` the
    six-term Taylor series is used.
    """
    s = np.asarray(s, dtype=dtype)
    real = np.finfo(s.real.dtype).dtype.type
    L = real(L)
    z = s * L
    small = np.abs(z) < SERIES_THRESHOLD
    out = np.empty_like(s)
    if np.any(~small):
        zs, ss = z[~small], s[~small]
        out[~small] = -np.expm1(-zs) / ss
    if np.any(small):
        zs = z[small]
        acc = np.zeros_like(zs)
        term = np.ones_like(zs)
        for m in range(SERIES_TERMS):
            acc = acc + term / real(math.factorial(m + 1))
            term = term * (-zs)
        out[small] = L * acc
    return out[()] if out.ndim == 0 else out


@dataclass(frozen=True, eq=False)
class GramMatrix:
    """Hermitian matrix of L2[0, L] inner products, kept in extended precision."""

    extended: np.ndarray
    horizon: float

    @property
    def order(self) -> int:
        return self.extended.shape[0]

    @property
    def entries(self) -> np.ndarray:
        return self.extended.astype(np.complex128)

    def leading(self, n: int) -> "GramMatrix":
        return GramMatrix(self.extended[:n, :n], self.horizon)

    def quadratic_form(self, c) -> float:
        """``sum_jk c_j G_jk conj(c_k) = ||sum_j c_j f_j||^2``."""
        c = np.asarray(c, dtype=EXT)
        return float(np.real(c @ self.extended @ np.conj(c)))


def _rates_weights(fam: ExponentialFamily, n: int):
    return fam.rates(n, EXT), fam.weights(n, EXT)


def _check_order(fam: ExponentialFamily, n: int | None) -> int:
    n = len(fam) if n is None else int(n)
    if n < 1:
        raise ValueError("Gram order must be at least 1")
    if n > len(fam):
        raise ValueError(f"order {n} exceeds family size {len(fam)}")
    return n


def cross_gram(
    y: ExponentialFamily, x: ExponentialFamily, n: int, m: int | None = None
) -> np.ndarray:
    """``C_jk = integral y_j conj(x_k)``, j < n, k < m, over the common horizon."""
    if y.horizon != x.horizon:
        raise ValueError(f"horizons differ: {y.horizon} vs {x.horizon}")
    m = n if m is None else m
    ly, by = _rates_weights(y, n)
    lx, bx = _rates_weights(x, m)
    s = ly[:, None] + np.conj(lx)[None, :]
    return by[:, None] * np.conj(bx)[None, :] * phi(s, y.horizon, EXT)


def gram_matrix(fam: ExponentialFamily, n: int | None = None) -> GramMatrix:
    """Closed-form Gram matrix of the first ``n`` family elements.

    The upper triangle is computed and mirrored by conjugation, so the
    result is exactly Hermitian.
    """
    n = _check_order(fam, n)
    lam, b = _rates_weights(fam, n)
    iu = np.triu_indices(n)
    s = lam[iu[0]] + np.conj(lam[iu[1]])
    vals = b[iu[0]] * np.conj(b[iu[1]]) * phi(s, fam.horizon, EXT)
    g = np.zeros((n, n), dtype=EXT)
    g[iu] = vals
    g[(iu[1], iu[0])] = np.conj(vals)
    g[np.diag_indices(n)] = np.real(np.diag(g))
    return GramMatrix(g, fam.horizon)


@lru_cache(maxsize=32)
def _gauss_legendre(order: int):
    return np.polynomial.legendre.leggauss(order)


def composite_gauss_legendre(a: float, b: float, panels: int, order: int = QUADRATURE_ORDER):
    """Nodes and weights of a composite Gauss-Legendre rule on ``[a, b]``."""
    if panels < 1:
        raise ValueError("panels must be >= 1")
    x, w = _gauss_legendre(order)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def gram_quadrature_oracle(
    fam: ExponentialFamily, n: int | None = None, panels: int = 256, order: int = QUADRATURE_ORDER
) -> GramMatrix:
    """Gram matrix by direct composite quadrature of ``f_j conj(f_k)``."""
    n = _check_order(fam, n)
    t, w = composite_gauss_legendre(0.0, fam.horizon, panels, order)
    F = fam.evaluate(t, n)
    g = (F * w[None, :]) @ F.conj().T
    return GramMatrix(g.astype(EXT), fam.horizon)


@dataclass(frozen=True)
class GammaSequence:
    """Minimal eigenvalues of the nested leading Gram blocks.

    ``tolerances`` are the absolute eigensolver tolerances and ``norms`` the
    spectral norms of each block; both are ``None`` for hand-supplied
    sequences.
    """

    values: tuple[float, ...]
    tolerances: tuple[float, ...] | None = None
    norms: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if not self.values:
            raise ValueError("empty gamma sequence")

    def __len__(self) -> int:
        return len(self.values)

    @property
    def below_floor(self) -> tuple[bool, ...]:
        if self.norms is None:
            return (False,) * len(self.values)
        return tuple(
            nrm > 0 and g / nrm < PRECISION_FLOOR for g, nrm in zip(self.values, self.norms)
        )

    def tolerance(self, i: int) -> float:
        return 0.0 if self.tolerances is None else self.tolerances[i]

    def is_monotone(self) -> bool:
        v = self.values
        return all(v[i + 1] <= v[i] + self.tolerance(i + 1) for i in range(len(v) - 1))


def gamma_sequence(fam: ExponentialFamily, N: int | None = None) -> GammaSequence:
    """``gamma_n = min eig G_n`` for n = 1..N, from one order-N Gram matrix."""
    N = _check_order(fam, N)
    G = gram_matrix(fam, N).entries
    vals, tols, norms = [], [], []
    for n in range(1, N + 1):
        block = G[:n, :n]
        res = hermitian_min_eig(block)
        vals.append(res.value)
        tols.append(OFFDIAG_RTOL * float(np.linalg.norm(block)))
        norms.append(res.norm2)
    return GammaSequence(tuple(vals), tuple(tols), tuple(norms))
