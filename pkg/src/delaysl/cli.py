"""Batch entry points.

    delaysl forward   --potential q.csv --n-eigs 200 --out DIR
    delaysl inverse   --spectrum0 s0.json --spectrum1 s1.json --a 1.4137 --out DIR
    delaysl roundtrip --potential q.csv --n-eigs 100,200,400 --out DIR
    delaysl charfn    --potential q.csv --lambdas 1,2.25 --out DIR

Every subcommand also accepts ``--config job.json`` whose keys mirror the
long flag names (with underscores); flags given on the command line win.
Exit codes: 0 success, 2 invalid input, 3 solver failure.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from . import funcspace as fs
from . import io
from .errors import DelaySLError, GridError, StageError, ValidationError
from .forward import A_MAX, A_MIN, DelayParams, charfn_closed_both, eigenvalues
from .inverse import FitWindow, SolverConfig, reconstruction_errors, solve_inverse

EXIT_OK, EXIT_INVALID, EXIT_SOLVER = 0, 2, 3


@dataclass(frozen=True)
class JobConfig:
    mode: str
    a: float | None = None
    n_eigs: tuple = ()
    potential: str | None = None
    spectrum0: str | None = None
    spectrum1: str | None = None
    out: str = "."
    M: int = 2048
    K: int | None = None
    tail_count: int | None = None
    fit_window: tuple | None = None
    lambdas: tuple = ()
    grid: str | None = None

    def __post_init__(self):
        if self.mode not in ("forward", "inverse", "roundtrip", "charfn"):
            raise ValidationError(f"unknown mode {self.mode!r}")
        if self.a is not None:
            DelayParams(self.a)
        if any(n < 1 for n in self.n_eigs):
            raise ValidationError("--n-eigs must be positive")
        if self.M < 16 or self.M % 2:
            raise ValidationError("M must be even and >= 16")
        if self.tail_count is not None and self.tail_count < 0:
            raise ValidationError("tail_count must be >= 0")

    def solver(self) -> SolverConfig:
        window = FitWindow(*self.fit_window) if self.fit_window else None
        return SolverConfig(M=self.M, K=self.K, window=window, tail_count=self.tail_count)


# -- parsing -------------------------------------------------------------------

def _int_list(text) -> tuple:
    if isinstance(text, int):
        return (text,)
    if isinstance(text, (list, tuple)):
        return tuple(int(v) for v in text)
    try:
        return tuple(int(v) for v in str(text).split(",") if v.strip())
    except ValueError:
        raise ValidationError(f"expected comma-separated integers, got {text!r}") from None


def _complex_list(text) -> tuple:
    if isinstance(text, (list, tuple)):
        items = [str(v) for v in text]
    else:
        items = [v for v in str(text).split(",") if v.strip()]
    try:
        return tuple(complex(v.strip().replace(" ", "")) for v in items)
    except ValueError:
        raise ValidationError(f"bad lambda list {text!r}") from None


def _window(text):
    if text is None:
        return None
    vals = text if isinstance(text, (list, tuple)) else str(text).split(",")
    try:
        lo, hi, count = float(vals[0]), float(vals[1]), int(vals[2])
    except (ValueError, IndexError):
        raise ValidationError("fit window must be 'rho_min,rho_max,count'") from None
    return (lo, hi, count)


def parse_grid(spec: str) -> np.ndarray:
    """``re_lo:re_hi:n_re[,im_lo:im_hi:n_im]`` -> flat complex lambda array."""
    parts = spec.split(",")
    if not 1 <= len(parts) <= 2:
        raise ValidationError(f"bad grid spec {spec!r}")
    axes = []
    for part in parts:
        bits = part.split(":")
        try:
            lo, hi, n = float(bits[0]), float(bits[1]), int(bits[2])
        except (ValueError, IndexError):
            raise ValidationError(f"bad grid axis {part!r}; expected lo:hi:count") from None
        if len(bits) != 3 or n < 1 or not np.isfinite([lo, hi]).all() or (n > 1 and hi <= lo):
            raise ValidationError(f"bad grid axis {part!r}")
        axes.append(np.linspace(lo, hi, n))
    if len(axes) == 1:
        axes.append(np.zeros(1))
    re, im = np.meshgrid(axes[0], axes[1], indexing="ij")
    return (re + 1j * im).ravel()


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="delaysl", description=__doc__.split("\n")[0])
    sub = ap.add_subparsers(dest="mode", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON job file; command-line flags override it")
    common.add_argument("--a", type=float, help=f"delay in [{A_MIN:.6f}, {A_MAX:.6f})")
    common.add_argument("--out", help="output directory (default: current directory)")
    common.add_argument("--M", type=int, help="panels on [a, pi] (default 2048)")

    p = sub.add_parser("forward", parents=[common], help="potential -> two spectra")
    p.add_argument("--potential")
    p.add_argument("--n-eigs", dest="n_eigs")

    p = sub.add_parser("inverse", parents=[common], help="two spectra -> potential")
    p.add_argument("--spectrum0")
    p.add_argument("--spectrum1")
    p.add_argument("--K", type=int, help="Fourier harmonics (default: from N)")
    p.add_argument("--tail-count", dest="tail_count", type=int)
    p.add_argument("--fit-window", dest="fit_window", help="rho_min,rho_max,count")

    p = sub.add_parser("roundtrip", parents=[common], help="forward then inverse, with errors")
    p.add_argument("--potential")
    p.add_argument("--n-eigs", dest="n_eigs", help="one N or a comma list")
    p.add_argument("--K", type=int)
    p.add_argument("--tail-count", dest="tail_count", type=int)
    p.add_argument("--fit-window", dest="fit_window")

    p = sub.add_parser("charfn", parents=[common], help="tabulate Delta_0, Delta_1")
    p.add_argument("--potential")
    p.add_argument("--lambdas", help="comma list of (complex) lambda values")
    p.add_argument("--grid", help="re_lo:re_hi:n_re[,im_lo:im_hi:n_im]; write --grid=-5:... "
                   "when the first number is negative")
    return ap


def config_from_args(args: argparse.Namespace) -> JobConfig:
    merged = {}
    if args.config:
        try:
            merged = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ValidationError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(merged, dict):
            raise ValidationError("config must be a JSON object")
        known = {f.name for f in fields(JobConfig)}
        unknown = set(merged) - known
        if unknown:
            raise ValidationError(f"unknown config keys: {sorted(unknown)}")
        if merged.get("mode", args.mode) != args.mode:
            raise ValidationError(f"config mode {merged['mode']!r} does not match {args.mode!r}")
    for key, val in vars(args).items():
        if key != "config" and val is not None:
            merged[key] = val
    merged["mode"] = args.mode
    if "n_eigs" in merged:
        merged["n_eigs"] = _int_list(merged["n_eigs"])
    if "lambdas" in merged:
        merged["lambdas"] = _complex_list(merged["lambdas"])
    if "fit_window" in merged:
        merged["fit_window"] = _window(merged["fit_window"])
    try:
        return JobConfig(**merged)
    except TypeError as exc:
        raise ValidationError(str(exc)) from None


# -- jobs ----------------------------------------------------------------------
# Each job returns {filename: text}; main() writes them only after success.

def _need(cfg: JobConfig, *names):
    for name in names:
        if not getattr(cfg, name):
            raise ValidationError(f"--{name.replace('_', '-')} is required for {cfg.mode}")


def _load_potential(cfg: JobConfig):
    p = io.read_potential(cfg.potential)
    if cfg.a is not None and abs(cfg.a - p.a) > 1e-12:
        raise ValidationError(f"--a={cfg.a} disagrees with the sidecar a={p.a}")
    if p.q.M != cfg.M:
        p = type(p)(p.delay, fs.resample(p.q, p.a, np.pi, cfg.M))
    return p


def run_forward(cfg: JobConfig) -> dict:
    _need(cfg, "potential", "n_eigs")
    p = _load_potential(cfg)
    N = cfg.n_eigs[0]
    s0, s1 = eigenvalues(0, p, N), eigenvalues(1, p, N)
    return {"spectrum_j0.json": io.spectrum_to_json(s0),
            "spectrum_j1.json": io.spectrum_to_json(s1)}


def run_inverse(cfg: JobConfig) -> dict:
    _need(cfg, "spectrum0", "spectrum1", "a")
    s0, s1 = io.read_spectrum(cfg.spectrum0), io.read_spectrum(cfg.spectrum1)
    if s0.N != s1.N:
        raise ValidationError(f"spectra have different sizes ({s0.N} vs {s1.N})")
    if s0.j != 0 or s1.j != 1:
        raise ValidationError("--spectrum0 must hold j=0 and --spectrum1 j=1")
    rep = solve_inverse(s0, s1, cfg.a, cfg.solver())
    return {"report.json": io.report_to_json(rep)}


def run_roundtrip(cfg: JobConfig) -> dict:
    _need(cfg, "potential", "n_eigs")
    p = _load_potential(cfg)
    Nmax = max(cfg.n_eigs)
    try:
        s0, s1 = eigenvalues(0, p, Nmax), eigenvalues(1, p, Nmax)
    except DelaySLError as exc:
        raise StageError("forward", exc) from exc
    rows = []
    files = {}
    for N in cfg.n_eigs:
        t0 = type(s0)(0, s0.points[:N])
        t1 = type(s1)(1, s1.points[:N])
        rep = solve_inverse(t0, t1, p.a, cfg.solver())
        sup, l2 = reconstruction_errors(rep.q_rec, p)
        rows.append({"N": N, "sup_error": sup, "l2_error": l2,
                     "seam_residual": rep.seam_residual,
                     "fit_residuals": {k: float(v) for k, v in rep.fit_residuals.items()},
                     "A0": rep.A0.real, "A": rep.A.real, "B1": rep.B1.real, "B2": rep.B2.real})
        files[f"report_N{N}.json"] = io.report_to_json(rep)
    files["roundtrip.json"] = io.dump_json({"a": p.a, "runs": rows}, 0) + "\n"
    return files


def run_charfn(cfg: JobConfig) -> dict:
    _need(cfg, "potential")
    if bool(cfg.lambdas) == bool(cfg.grid):
        raise ValidationError("give exactly one of --lambdas and --grid")
    lam = np.array(cfg.lambdas, complex) if cfg.lambdas else parse_grid(cfg.grid)
    p = _load_potential(cfg)
    d0, d1 = charfn_closed_both(lam, p)
    lines = ["lambda_re,lambda_im,d0_re,d0_im,d1_re,d1_im"]
    for z, u, v in zip(lam, d0, d1):
        lines.append(",".join(f"{t:.17g}" for t in (z.real, z.imag, u.real, u.imag, v.real, v.imag)))
    return {"charfn.csv": "\n".join(lines) + "\n"}


JOBS = {"forward": run_forward, "inverse": run_inverse,
        "roundtrip": run_roundtrip, "charfn": run_charfn}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        files = JOBS[cfg.mode](cfg)
    except (ValidationError, GridError) as exc:
        print(f"delaysl {args.mode}: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except DelaySLError as exc:
        print(f"delaysl {args.mode}: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, text in files.items():
        (out / name).write_text(text)
        print(out / name)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
