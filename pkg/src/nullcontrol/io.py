"""JSON problem documents, JSON reports and CSV traces.

Complex numbers are written as ``{"re": x, "im": y}``. Reports are written
atomically (temporary file in the target directory, then rename) with sorted
keys so identical runs give identical bytes.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from pathlib import Path
from typing import Any

import numpy as np

from .moments import ControlSignal
from .spectral import (
    ControlProblem,
    DeviationRule,
    InputVector,
    Spectrum,
    SpectrumError,
    build_spectrum,
    validate_spectrum,
)

__all__ = [
    "ProblemFormatError",
    "encode_complex",
    "decode_complex",
    "problem_from_dict",
    "problem_to_dict",
    "load_problem",
    "load_json",
    "write_problem",
    "control_to_dict",
    "to_jsonable",
    "dumps_report",
    "write_json",
    "write_csv",
    "gram_csv_rows",
]


class ProblemFormatError(ValueError):
    """Schema violation in a problem document; ``field`` is a dotted path."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}" if field else message)
        self.field = field


def encode_complex(z) -> dict:
    z = complex(z)
    return {"re": _clean_float(z.real), "im": _clean_float(z.imag)}


def decode_complex(v, field: str = "") -> complex:
    if isinstance(v, bool):
        raise ProblemFormatError(field, "expected a number or {re, im} object, got a boolean")
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, dict):
        extra = set(v) - {"re", "im"}
        if extra:
            raise ProblemFormatError(field, f"unexpected keys {sorted(extra)}")
        try:
            re = v.get("re", 0.0)
            im = v.get("im", 0.0)
            if isinstance(re, bool) or isinstance(im, bool):
                raise TypeError
            return complex(float(re), float(im))
        except (TypeError, ValueError):
            raise ProblemFormatError(field, "re/im must be numbers") from None
    raise ProblemFormatError(field, f"expected a number or {{re, im}} object, got {type(v).__name__}")


def _complex_list(v, field: str) -> list[complex]:
    if not isinstance(v, list):
        raise ProblemFormatError(field, "expected a list")
    return [decode_complex(x, f"{field}[{i}]") for i, x in enumerate(v)]


def _number(doc: dict, key: str, field: str) -> float:
    v = doc[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ProblemFormatError(field, "expected a finite number")
    return float(v)


def _spectrum_from_dict(doc, field: str = "spectrum") -> Spectrum:
    if not isinstance(doc, dict):
        raise ProblemFormatError(field, "expected an object")
    if ("preset" in doc) == ("explicit" in doc):
        raise ProblemFormatError(field, "give exactly one of 'preset' or 'explicit'")
    try:
        if "preset" in doc:
            preset = doc["preset"]
            if not isinstance(preset, dict) or "name" not in preset:
                raise ProblemFormatError(f"{field}.preset", "expected an object with a 'name'")
            params = dict(preset)
            if "deviation" in params:
                params["deviation"] = DeviationRule(
                    decode_complex(params["deviation"], f"{field}.preset.deviation")
                )
            if "n" in params and (isinstance(params["n"], bool) or not isinstance(params["n"], int)):
                raise ProblemFormatError(f"{field}.preset.n", "expected an integer")
            try:
                return build_spectrum(params)
            except KeyError as exc:
                raise ProblemFormatError(f"{field}.preset", f"missing parameter {exc}") from None
        values = _complex_list(doc["explicit"], f"{field}.explicit")
        s = build_spectrum("explicit", values=values, riesz_like=bool(doc.get("riesz_like", False)))
    except SpectrumError as exc:
        raise ProblemFormatError(field, str(exc)) from None
    if doc.get("re_lower_bound") is not None:
        beta = float(doc["re_lower_bound"])
        s = Spectrum(s.eigenvalues, beta, s.conjugate_closed, s.riesz_like)
        if validate_spectrum(s).beta_ok is False:
            raise ProblemFormatError(f"{field}.re_lower_bound", f"some Re(lambda) < {beta}")
    return s


def problem_from_dict(doc: Any, prefix: str = "") -> ControlProblem:
    """Parse and validate a problem document."""

    def f(name: str) -> str:
        return f"{prefix}{name}"

    if not isinstance(doc, dict):
        raise ProblemFormatError(prefix.rstrip("."), "expected a JSON object")
    for key in ("spectrum", "b", "x0", "t1"):
        if key not in doc:
            raise ProblemFormatError(f(key), "missing required field")
    unknown = set(doc) - {"spectrum", "b", "x0", "t1", "T"}
    if unknown:
        raise ProblemFormatError(prefix.rstrip("."), f"unknown fields {sorted(unknown)}")
    spectrum = _spectrum_from_dict(doc["spectrum"], f("spectrum"))
    b = _complex_list(doc["b"], f("b"))
    x0 = _complex_list(doc["x0"], f("x0"))
    if len(b) != len(spectrum):
        raise ProblemFormatError(
            f("b"), f"length {len(b)} does not match the spectrum length {len(spectrum)}"
        )
    if len(x0) != len(spectrum):
        raise ProblemFormatError(
            f("x0"), f"length {len(x0)} does not match the spectrum length {len(spectrum)}"
        )
    t1 = _number(doc, "t1", f("t1"))
    if "T" in doc:
        T = _number(doc, "T", f("T"))
    elif spectrum.riesz_like:
        T = 0.0
    else:
        raise ProblemFormatError(f("T"), "required unless the spectrum is flagged riesz_like")
    try:
        return ControlProblem(spectrum, InputVector(tuple(b)), tuple(x0), t1, T)
    except SpectrumError as exc:
        raise ProblemFormatError(prefix.rstrip("."), str(exc)) from None


def problem_to_dict(p: ControlProblem) -> dict:
    s = p.spectrum
    return {
        "spectrum": {
            "explicit": [encode_complex(z) for z in s.eigenvalues],
            "riesz_like": s.riesz_like,
            "re_lower_bound": s.re_lower_bound,
        },
        "b": [encode_complex(z) for z in p.input.coefficients],
        "x0": [encode_complex(z) for z in p.x0],
        "t1": p.t1,
        "T": p.settle_lag,
    }


def load_json(path) -> Any:
    """Read a JSON document; decode errors carry line and column."""
    text = Path(path).read_text(encoding="utf-8")
    return json.loads(text)


def load_problem(path) -> ControlProblem:
    return problem_from_dict(load_json(path))


def write_problem(p: ControlProblem, path) -> None:
    write_json(problem_to_dict(p), path)


def control_to_dict(u: ControlSignal) -> dict:
    return {
        "horizon": u.horizon,
        "terms": [
            {"lambda": encode_complex(lam), "b": encode_complex(b), "alpha": encode_complex(a)}
            for lam, b, a in u.terms()
        ],
    }


def _clean_float(x: float):
    x = float(x)
    if not math.isfinite(x):
        return None if math.isnan(x) else ("inf" if x > 0 else "-inf")
    # 17 significant digits round-trip every double
    return float(f"{x:.17g}")


def to_jsonable(obj: Any) -> Any:
    if hasattr(obj, "as_dict"):
        return to_jsonable(obj.as_dict())
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return encode_complex(obj)
    if isinstance(obj, (float, np.floating)):
        return _clean_float(obj)
    return obj


def dumps_report(obj: Any) -> str:
    return json.dumps(to_jsonable(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def _atomic_write(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(obj: Any, path) -> None:
    _atomic_write(path, dumps_report(obj))


def write_csv(path, header: list[str] | None, rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if header:
        w.writerow(header)
    for row in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    _atomic_write(path, buf.getvalue())


def gram_csv_rows(G: np.ndarray):
    """Row-major rows of ``re,im`` cell pairs."""
    G = np.asarray(G, dtype=np.complex128)
    for row in G:
        cells = []
        for z in row:
            cells.extend([float(z.real), float(z.imag)])
        yield cells
