"""File formats: spectra as JSON, potentials as CSV plus a JSON sidecar,
inversion reports as JSON with embedded CSV blocks.

Floats are written with 17 significant digits so doubles survive a round trip.
"""
from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from . import funcspace as fs
from .errors import ValidationError
from .forward import PI, DelayParams, Potential, SpectralPoint, Spectrum
from .inverse import InversionReport


def dump_json(obj, depth: int = 0) -> str:
    """Indented JSON with every float at 17 significant digits."""
    pad, inner = "  " * depth, "  " * (depth + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {dump_json(v, depth + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [inner + dump_json(v, depth + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if not math.isfinite(v):
            raise ValidationError("refusing to serialise a non-finite float")
        return f"{v:.17g}"
    return json.dumps(obj)


# -- spectra -------------------------------------------------------------------

def spectrum_to_json(s: Spectrum) -> str:
    rows = [{"j": p.j, "n": p.n, "lambda_re": float(np.real(p.lam)),
             "lambda_im": float(np.imag(p.lam))} for p in s.points]
    return dump_json(rows, 0) + "\n"


def spectrum_from_json(text: str) -> Spectrum:
    try:
        rows = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"spectrum file is not valid JSON: {exc}") from None
    if not isinstance(rows, list) or not rows:
        raise ValidationError("spectrum JSON must be a non-empty array")
    points = []
    for r in rows:
        if not isinstance(r, dict) or set(r) != {"j", "n", "lambda_re", "lambda_im"}:
            raise ValidationError("spectrum rows need exactly the keys j, n, lambda_re, lambda_im")
        try:
            lam = complex(float(r["lambda_re"]), float(r["lambda_im"]))
            j, n = int(r["j"]), int(r["n"])
        except (TypeError, ValueError):
            raise ValidationError(f"malformed spectrum row {r}") from None
        if not (math.isfinite(lam.real) and math.isfinite(lam.imag)):
            raise ValidationError(f"non-finite eigenvalue in row {r}")
        points.append(SpectralPoint(j, n, lam))
    js = {p.j for p in points}
    if len(js) != 1:
        raise ValidationError("a spectrum file must hold a single j")
    return Spectrum(js.pop(), tuple(points))


def write_spectrum(path, s: Spectrum) -> None:
    Path(path).write_text(spectrum_to_json(s))


def read_spectrum(path) -> Spectrum:
    return spectrum_from_json(Path(path).read_text())


# -- potentials ----------------------------------------------------------------

def sidecar_path(csv_path) -> Path:
    return Path(csv_path).with_suffix(".json")


def write_potential(path, p: Potential) -> None:
    path = Path(path)
    path.write_text(fs.to_csv(p.q))
    sidecar_path(path).write_text(dump_json({"a": p.a, "M": p.q.M}, 0) + "\n")


def read_potential(path) -> Potential:
    path = Path(path)
    side = sidecar_path(path)
    if not path.exists():
        raise ValidationError(f"potential file {path} not found")
    if not side.exists():
        raise ValidationError(f"sidecar {side} not found")
    try:
        meta = json.loads(side.read_text())
        a, M = float(meta["a"]), int(meta["M"])
    except (json.JSONDecodeError, KeyError, TypeError, ValueError):
        raise ValidationError(f"sidecar {side} must hold {{a, M}}") from None
    a = DelayParams(a).a
    q = fs.from_csv(path.read_text())
    if q.M != M:
        raise ValidationError(f"sidecar says M={M} but the CSV has {q.M} panels")
    if abs(q.interval.lo - a) > 1e-9 or abs(q.interval.hi - PI) > 1e-9:
        raise ValidationError(f"potential grid must span [a, pi] = [{a}, {PI}]")
    return Potential(DelayParams(a), fs.GridFunction(fs.Interval(a, PI), q.samples))


# -- reports -------------------------------------------------------------------

def _cplx(z) -> dict:
    return {"re": float(np.real(z)), "im": float(np.imag(z))}


def report_to_dict(rep: InversionReport) -> dict:
    return {
        "a": rep.q_rec.a,
        "K": rep.K,
        "A0": _cplx(rep.A0),
        "A0_asymptotic": _cplx(rep.A0_asymptotic),
        "A": _cplx(rep.A),
        "B1": _cplx(rep.B1),
        "B2": _cplx(rep.B2),
        "q_at_a": _cplx(rep.q_at_a),
        "q_at_pi": _cplx(rep.q_at_pi),
        "seam_residual": rep.seam_residual,
        "fit_residuals": {k: float(v) for k, v in rep.fit_residuals.items()},
        "q_rec_csv": fs.to_csv(rep.q_rec.q),
        "R_csv": fs.to_csv(rep.R),
    }


def report_to_json(rep: InversionReport, extra: dict | None = None) -> str:
    d = report_to_dict(rep)
    if extra:
        d.update(extra)
    return dump_json(d, 0) + "\n"


def report_from_json(text: str) -> dict:
    """Parsed report with ``q_rec`` and ``R`` decoded back to grid functions."""
    d = json.loads(text)
    try:
        d["q_rec"] = fs.from_csv(d.pop("q_rec_csv"))
        d["R"] = fs.from_csv(d.pop("R_csv"))
    except KeyError as exc:
        raise ValidationError(f"report is missing {exc}") from None
    return d
