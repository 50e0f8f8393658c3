"""Spectra, input coefficients, exponential families and control problems.

Everything here is immutable. Eigenvalues are stored as tuples of Python
complex numbers so that values compare and hash by content; numeric code
asks for arrays through the ``array`` helpers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

__all__ = [
    "SpectrumError",
    "Spectrum",
    "SpectrumValidation",
    "InputVector",
    "ExponentialFamily",
    "ControlProblem",
    "DeviationRule",
    "build_spectrum",
    "heat",
    "imaginary_ladder",
    "strip_perturbed",
    "explicit",
    "validate_spectrum",
    "exponential_family",
]


class SpectrumError(ValueError):
    """Invalid spectrum, input vector or problem data."""


def _as_complex_tuple(values: Iterable) -> tuple[complex, ...]:
    return tuple(complex(v) for v in values)


@dataclass(frozen=True)
class Spectrum:
    """Ordered eigenvalues with the metadata the analysis relies on.

    Construction does not validate; use :func:`build_spectrum` for checked
    spectra and :func:`validate_spectrum` for a diagnostic scan.
    """

    eigenvalues: tuple[complex, ...]
    re_lower_bound: float | None = None
    conjugate_closed: bool = False
    # eigenvectors of the generator form a Riesz basis, so the settle lag may be 0
    riesz_like: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "eigenvalues", _as_complex_tuple(self.eigenvalues))

    def __len__(self) -> int:
        return len(self.eigenvalues)

    def array(self, dtype=np.complex128) -> np.ndarray:
        return np.array(self.eigenvalues, dtype=dtype)

    def truncate(self, n: int) -> "Spectrum":
        vals = self.eigenvalues[:n]
        closed = _is_conjugate_closed(vals)
        bound = self.re_lower_bound
        return Spectrum(vals, bound, closed, self.riesz_like)


@dataclass(frozen=True)
class SpectrumValidation:
    distinct: bool
    ordered: bool
    beta_ok: bool | None
    conjugate_closed: bool
    min_real_part: float
    duplicate_pair: tuple[int, int] | None = None
    unordered_index: int | None = None

    @property
    def ok(self) -> bool:
        return self.distinct and self.ordered and self.beta_ok is not False

    def as_dict(self) -> dict:
        return {
            "distinct": self.distinct,
            "ordered": self.ordered,
            "beta_ok": self.beta_ok,
            "conjugate_closed": self.conjugate_closed,
            "min_real_part": self.min_real_part,
            "duplicate_pair": list(self.duplicate_pair) if self.duplicate_pair else None,
            "unordered_index": self.unordered_index,
        }


@dataclass(frozen=True)
class InputVector:
    """Modal input weights ``b_j``."""

    coefficients: tuple[complex, ...]

    def __post_init__(self) -> None:
        coeffs = _as_complex_tuple(self.coefficients)
        if not all(math.isfinite(c.real) and math.isfinite(c.imag) for c in coeffs):
            raise SpectrumError("input coefficients must be finite")
        object.__setattr__(self, "coefficients", coeffs)

    @classmethod
    def constant(cls, value: complex, n: int) -> "InputVector":
        return cls((complex(value),) * n)

    def __len__(self) -> int:
        return len(self.coefficients)

    def array(self, dtype=np.complex128) -> np.ndarray:
        return np.array(self.coefficients, dtype=dtype)


@dataclass(frozen=True)
class ExponentialFamily:
    """The functions ``t -> exp(-lambda_j t) b_j`` on ``[0, horizon]``."""

    spectrum: Spectrum
    input: InputVector
    horizon: float

    def __len__(self) -> int:
        return min(len(self.spectrum), len(self.input))

    def rates(self, n: int | None = None, dtype=np.complex128) -> np.ndarray:
        n = len(self) if n is None else n
        return self.spectrum.array(dtype)[:n]

    def weights(self, n: int | None = None, dtype=np.complex128) -> np.ndarray:
        n = len(self) if n is None else n
        return self.input.array(dtype)[:n]

    def evaluate(self, t, n: int | None = None) -> np.ndarray:
        """Element values, shape ``(n, len(t))``."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        lam = self.rates(n)
        b = self.weights(n)
        return b[:, None] * np.exp(-lam[:, None] * t[None, :])

    def norms(self, n: int | None = None) -> np.ndarray:
        """L2 norms of the elements on ``[0, horizon]``."""
        from .gram import phi

        lam = self.rates(n)
        b = self.weights(n)
        return np.abs(b) * np.sqrt(np.real(phi(2.0 * lam.real, self.horizon)))

    def scaled(self, b: InputVector) -> "ExponentialFamily":
        return ExponentialFamily(self.spectrum, b, self.horizon)


@dataclass(frozen=True)
class ControlProblem:
    """Initial modal state plus the final time and settle lag."""

    spectrum: Spectrum
    input: InputVector
    x0: tuple[complex, ...]
    t1: float
    settle_lag: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "x0", _as_complex_tuple(self.x0))
        object.__setattr__(self, "t1", float(self.t1))
        object.__setattr__(self, "settle_lag", float(self.settle_lag))
        if self.settle_lag < 0:
            raise SpectrumError(f"settle lag must be nonnegative, got {self.settle_lag}")
        if not self.t1 - self.settle_lag > 0:
            raise SpectrumError(
                f"t1 - T must be positive (t1={self.t1}, T={self.settle_lag})"
            )
        if not all(math.isfinite(c.real) and math.isfinite(c.imag) for c in self.x0):
            raise SpectrumError("x0 must be finite")

    @property
    def horizon(self) -> float:
        return self.t1 - self.settle_lag

    @property
    def order(self) -> int:
        """Stored truncation: number of modes with spectrum, input and state."""
        return min(len(self.spectrum), len(self.input), len(self.x0))

    def x0_array(self, dtype=np.complex128) -> np.ndarray:
        return np.array(self.x0[: self.order], dtype=dtype)

    def family(self) -> ExponentialFamily:
        return ExponentialFamily(self.spectrum, self.input, self.horizon)

    def with_spectrum(self, spectrum: Spectrum) -> "ControlProblem":
        return ControlProblem(spectrum, self.input, self.x0, self.t1, self.settle_lag)

    def scaled_state(self, kappa: complex) -> "ControlProblem":
        return ControlProblem(
            self.spectrum,
            self.input,
            tuple(kappa * x for x in self.x0),
            self.t1,
            self.settle_lag,
        )


@dataclass(frozen=True)
class DeviationRule:
    """Eigenvalue shift ``k -> scale / k``; ``|shift(k)| <= |scale| / k``."""

    scale: complex = 1.0

    def __call__(self, k) -> complex | np.ndarray:
        return complex(self.scale) / k if np.isscalar(k) else complex(self.scale) / np.asarray(k)

    @property
    def bound_constant(self) -> float:
        return abs(complex(self.scale))


def _is_conjugate_closed(vals: Sequence[complex], rtol: float = 0.0) -> bool:
    remaining = list(vals)
    while remaining:
        v = remaining.pop()
        if v.imag == 0.0:
            continue
        target = v.conjugate()
        hit = next(
            (i for i, w in enumerate(remaining) if abs(w - target) <= rtol * abs(v)),
            None,
        )
        if hit is None:
            return False
        remaining.pop(hit)
    return True


def _find_duplicate(vals: Sequence[complex]) -> tuple[int, int] | None:
    seen: dict[complex, int] = {}
    for i, v in enumerate(vals):
        if v in seen:
            return seen[v], i
        seen[v] = i
    return None


def validate_spectrum(s: Spectrum) -> SpectrumValidation:
    """Scan ``s`` for distinctness, |lambda| ordering, the Re-bound and conjugate closure."""
    vals = s.eigenvalues
    dup = _find_duplicate(vals)
    mods = [abs(v) for v in vals]
    bad_order = next((i for i in range(1, len(mods)) if mods[i] < mods[i - 1]), None)
    min_re = min((v.real for v in vals), default=math.inf)
    beta_ok = None if s.re_lower_bound is None else min_re >= s.re_lower_bound
    return SpectrumValidation(
        distinct=dup is None,
        ordered=bad_order is None,
        beta_ok=beta_ok,
        conjugate_closed=_is_conjugate_closed(vals),
        min_real_part=min_re,
        duplicate_pair=dup,
        unordered_index=bad_order,
    )


def _check_n(n: int) -> int:
    if int(n) != n or n < 1:
        raise SpectrumError(f"truncation order must be a positive integer, got {n!r}")
    return int(n)


def _finish(vals: Sequence[complex], riesz_like: bool) -> Spectrum:
    vals = _as_complex_tuple(vals)
    if not vals:
        raise SpectrumError("empty spectrum")
    dup = _find_duplicate(vals)
    if dup is not None:
        i, j = dup
        raise SpectrumError(
            f"eigenvalues {i} and {j} coincide ({vals[i]!r}); multiplicity must be 1"
        )
    s = Spectrum(
        vals,
        re_lower_bound=min(v.real for v in vals),
        conjugate_closed=_is_conjugate_closed(vals),
        riesz_like=riesz_like,
    )
    report = validate_spectrum(s)
    if not report.ordered:
        k = report.unordered_index
        raise SpectrumError(
            f"eigenvalues must be ordered by nondecreasing modulus; "
            f"|lambda[{k}]| = {abs(vals[k])} < |lambda[{k - 1}]| = {abs(vals[k - 1])}"
        )
    return s


def heat(n: int) -> Spectrum:
    """Dirichlet heat modes ``lambda_j = -j^2 pi^2``."""
    n = _check_n(n)
    return _finish([-(j * j) * math.pi**2 for j in range(1, n + 1)], riesz_like=True)


def imaginary_ladder(n: int) -> Spectrum:
    """``lambda_k = i k``."""
    n = _check_n(n)
    return _finish([1j * k for k in range(1, n + 1)], riesz_like=True)


def strip_perturbed(
    n: int,
    deviation: DeviationRule | Callable[[int], complex] = DeviationRule(),
    base: Callable[[int], Spectrum] = imaginary_ladder,
) -> Spectrum:
    """Shift each eigenvalue of ``base(n)`` by ``deviation(k)``, k = 1..n."""
    n = _check_n(n)
    ref = base(n).eigenvalues
    return _finish([lam + deviation(k) for k, lam in enumerate(ref, start=1)], riesz_like=True)


def explicit(values: Iterable[complex], riesz_like: bool = False) -> Spectrum:
    return _finish(list(values), riesz_like=riesz_like)


_BASES = {"heat": heat, "imaginary_ladder": imaginary_ladder}


def build_spectrum(preset: dict | str, **kwargs) -> Spectrum:
    """Build a checked spectrum from a preset descriptor.

    ``preset`` is either a name (``"heat"``, ``"imaginary_ladder"``,
    ``"strip_perturbed"``, ``"explicit"``) with keyword parameters, or a
    mapping ``{"name": ..., **params}``.

    >>> build_spectrum("heat", n=2).eigenvalues[1] == -4 * math.pi**2
    True
    """
    if isinstance(preset, dict):
        params = dict(preset)
        name = params.pop("name", None)
        params.update(kwargs)
    else:
        name, params = preset, dict(kwargs)
    if name == "heat":
        return heat(params["n"])
    if name == "imaginary_ladder":
        return imaginary_ladder(params["n"])
    if name == "strip_perturbed":
        base = params.get("base", "imaginary_ladder")
        if base not in _BASES:
            raise SpectrumError(f"unknown base preset {base!r}")
        dev = params.get("deviation", DeviationRule())
        if not callable(dev):
            dev = DeviationRule(complex(dev))
        return strip_perturbed(params["n"], dev, _BASES[base])
    if name == "explicit":
        return explicit(params["values"], riesz_like=params.get("riesz_like", False))
    raise SpectrumError(f"unknown spectrum preset {name!r}")


def exponential_family(s: Spectrum, b: InputVector, L: float) -> ExponentialFamily:
    if not len(s):
        raise SpectrumError("empty spectrum")
    if not L > 0:
        raise SpectrumError(f"horizon must be positive, got {L}")
    if len(b) == 0:
        raise SpectrumError("empty input vector")
    return ExponentialFamily(s, b, float(L))
