"""Reconstruction of ``q`` from the two spectra.

Stages, in order: product characteristic functions, the mean ``A0`` from the
eigenvalue asymptotics, the normalised functions ``Delta*_j``, the constants
``A, B1, B2`` from an oscillatory least-squares fit, the Fourier data
``d_j``, the function ``R`` by Fourier series, the edge pieces of ``q`` on
``(a, 3a/2)`` and ``(pi - a/2, pi)``, and finally the middle piece from the
explicit nonlinear identity that only involves the edges.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from . import funcspace as fs
from .encode import ProductCharFn, delta_star
from .errors import (AllRowsDiscarded, DelaySLError, DomainViolation, IllConditioned,
                     StageError, ValidationError)
from .forward import PI, DelayParams, Potential, Spectrum
from .funcspace import GridFunction, Interval

Evaluator = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class FitWindow:
    rho_min: float = 40.0
    rho_max: float = 160.0
    count: int = 400

    def __post_init__(self):
        if self.rho_min < 20 or self.count < 200 or not self.rho_max > self.rho_min:
            raise ValidationError(f"invalid fit window {self}")

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(self.rho_min, self.rho_max, self.count)

    @classmethod
    def for_spectrum_size(cls, N: int) -> "FitWindow":
        """``[0.2 N, 0.8 N]`` (``[40, 160]`` at N = 200), floored at ``rho = 20``."""
        hi = 0.8 * N
        lo = max(20.0, 0.2 * N)
        if hi <= lo:
            raise ValidationError(f"N={N} is too small for an oscillatory fit window")
        return cls(lo, hi, max(400, 2 * N))


@dataclass(frozen=True)
class SolverConfig:
    M: int = 2048
    K: int | None = None
    window: FitWindow | None = None
    tail_count: int | None = None
    second_order_tail: bool = True
    decay_terms: bool = True
    edge_panels: int = 512
    rho_fraction: float = 0.95
    jump_correction: bool = True

    def __post_init__(self):
        if self.M < 16 or self.M % 2:
            raise ValidationError("M must be even and >= 16")
        if self.K is not None and self.K < 16:
            raise ValidationError("K must be >= 16")
        if self.edge_panels < 16 or self.edge_panels % 2:
            raise ValidationError("edge_panels must be even and >= 16")
        if not 0 < self.rho_fraction <= 1.5:
            raise ValidationError("rho_fraction must lie in (0, 1.5]")


class ABFit(NamedTuple):
    A: complex
    B1: complex
    B2: complex
    A0_shift: complex
    residual: float


@dataclass(frozen=True, eq=False)
class InversionReport:
    q_rec: Potential
    A0: complex
    A: complex
    B1: complex
    B2: complex
    q_at_a: complex
    q_at_pi: complex
    R: GridFunction
    seam_residual: float
    fit_residuals: dict = field(default_factory=dict)
    A0_asymptotic: complex = 0j
    K: int = 0


# -- mean value A0 ------------------------------------------------------------

def extract_A0(s0: Spectrum, s1: Spectrum, a: float, threshold: float = 0.2) -> complex:
    """Weighted least squares on ``2 pi n (sqrt(lam_n) - nu_n) = A0 cos(nu_n a)``."""
    if s0.N < 30 or s1.N < 30:
        raise ValidationError("extract_A0 needs at least 30 eigenvalues per spectrum")
    rows, rhs, wts = [], [], []
    for s, shift in ((s0, 0.0), (s1, 0.5)):
        n = np.arange(s.N // 2, s.N + 1)
        nu = n - shift
        rho = s.rhos[n - 1]
        rows.append(np.cos(nu * a))
        rhs.append(2 * PI * n * (rho - nu))
    x = np.concatenate(rows)
    y = np.concatenate(rhs)
    w = np.abs(x)
    keep = w >= threshold
    if not keep.any():
        raise AllRowsDiscarded(f"all |cos(nu a)| < {threshold} for a={a}")
    x, y, w = x[keep], y[keep], w[keep]
    return complex(np.sum(w * w * x * y) / np.sum(w * w * x * x))


# -- constants A, B1, B2 -------------------------------------------------------

def extract_ABs(ds0: Evaluator, ds1: Evaluator, a: float, w: FitWindow,
                decay_terms: bool = True, fit_A0_shift: bool = True) -> ABFit:
    """Joint linear fit of ``4 rho Delta*_0`` and ``4 rho Delta*_1``.

    Model: ``B1 sin(rho L) - 2A sin(rho c)`` and ``B2 cos(rho L) - 2A cos(rho c)``
    with ``L = pi - a``, ``c = pi - 2a`` and ``A`` shared.  ``fit_A0_shift``
    adds the columns ``4 rho cos(rho L)`` / ``-4 rho sin(rho L)``, which absorb
    an error in the ``A0`` used to build ``Delta*``.  ``decay_terms`` adds
    ``sin, cos`` at both frequencies divided by ``rho`` for each equation,
    which model the leading Riemann-Lebesgue tail of the Fourier remainders.
    """
    rho = w.nodes
    L, c = PI - a, PI - 2 * a
    y = np.concatenate([4 * rho * ds0(rho), 4 * rho * ds1(rho)])
    z = np.zeros_like(rho)
    cols = [
        np.concatenate([np.sin(rho * L), z]),                       # B1
        np.concatenate([z, np.cos(rho * L)]),                       # B2
        np.concatenate([-2 * np.sin(rho * c), -2 * np.cos(rho * c)]),  # A
    ]
    if fit_A0_shift:
        cols.append(np.concatenate([4 * rho * np.cos(rho * L), -4 * rho * np.sin(rho * L)]))
    if decay_terms:
        for f in (np.sin, np.cos):
            for freq in (L, c):
                col = f(rho * freq) / rho
                cols.append(np.concatenate([col, z]))
                cols.append(np.concatenate([z, col]))
    X = np.stack(cols, axis=1)
    scale = np.linalg.norm(X, axis=0)
    Xs = X / scale
    cond = np.linalg.cond(Xs)
    if not np.isfinite(cond) or cond > 1e8:
        raise IllConditioned(f"fit matrix condition number {cond:.3g}")
    coef, *_ = np.linalg.lstsq(Xs.astype(complex), y, rcond=None)
    coef = coef / scale
    resid = float(np.linalg.norm(y - X @ coef) / math.sqrt(y.size))
    shift = -coef[3] if fit_A0_shift else 0j
    return ABFit(complex(coef[2]), complex(coef[0]), complex(coef[1]), complex(shift), resid)


# -- Fourier inversion ---------------------------------------------------------

def _sawtooth_transform(rho, xi0: float, L: float):
    """Transform ``int_{-L}^{L} s(xi) exp(i rho xi) d xi`` of the periodic sawtooth
    ``s(xi) = H(xi - xi0) - (xi + L) / (2L)``, whose only jump is ``+1`` at ``xi0``."""
    rho = np.asarray(rho, dtype=float)
    out = np.full(rho.shape, (L - xi0) - L, complex)
    nz = rho != 0
    r = rho[nz]
    ep, em = np.exp(1j * r * L), np.exp(-1j * r * L)
    step = (ep - np.exp(1j * r * xi0)) / (1j * r)
    i0 = (ep - em) / (1j * r)
    i1 = L * (ep + em) / (1j * r) + (ep - em) / r ** 2
    out[nz] = step - (i1 + L * i0) / (2 * L)
    return out


def _sawtooth(xi, xi0: float, L: float):
    step = np.where(xi > xi0, 1.0, np.where(xi == xi0, 0.5, 0.0))
    return step - (xi + L) / (2 * L)


def estimate_jumps(F, rho, a: float, k_lo: int) -> np.ndarray:
    """Jumps of ``R`` at ``-(pi-2a)`` and ``pi-2a`` from the ``1/rho`` decay of ``F``.

    ``F`` holds transform samples at ``rho_k = k pi / L`` for ``k = -K..K``.  A
    piecewise smooth ``R`` has ``F(rho) = sum_m -J_m exp(i rho xi_m) / (i rho)
    + O(rho^-2)``, where the ``xi_m`` are the two inner break points and the
    wrap point ``L``.  The fit uses ``k_lo <= |k| <= K`` and also carries the
    ``rho^-2`` terms so that the slope discontinuities do not leak in.
    """
    L, c = PI - a, PI - 2 * a
    sel = np.abs(np.rint(rho * L / PI)) >= k_lo
    r, y = rho[sel], F[sel]
    waves = [np.exp(-1j * r * c), np.exp(1j * r * c), np.exp(1j * r * L)]
    cols = [w / (1j * r) for w in waves] + [w / r ** 2 for w in waves]
    X = np.stack(cols, axis=1)
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    return -coef[:2]


def fourier_series(d0: Evaluator, d1: Evaluator, a: float, K: int, M: int = 2048,
                   jump_correction: bool = True) -> GridFunction:
    """Lanczos-smoothed Fourier series of ``R`` on ``[-(pi-a), pi-a]`` (complex samples).

    ``R`` jumps at ``+-(pi - 2a)``; a smoothed series can only reach the midpoint
    there, so with ``jump_correction`` the two jumps are estimated and removed
    from the coefficients as periodic sawtooth functions (step minus a linear
    ramp, so the end points are untouched), summed, and added back exactly.
    """
    if K < 16:
        raise ValidationError("K must be >= 16")
    L, c = PI - a, PI - 2 * a
    k = np.arange(-K, K + 1)
    rho = k * PI / L
    r = np.abs(rho)
    D0 = np.asarray(d0(r), dtype=complex)
    D1 = np.asarray(d1(r), dtype=complex)
    F = D1 - 1j * np.sign(k) * D0
    xi = -L + 2 * L * np.arange(M + 1) / M
    steps = np.zeros(M + 1, complex)
    if jump_correction:
        jumps = estimate_jumps(F, rho, a, max(8, K // 4))
        for J, x0 in zip(jumps, (-c, c)):
            F = F - J * _sawtooth_transform(rho, x0, L)
            steps += J * _sawtooth(xi, x0, L)
    sigma = np.sinc(k / (K + 1))
    vals = np.exp(-1j * np.outer(xi, rho)) @ (sigma * F)
    return GridFunction(Interval(-L, L), vals / (2 * L) + steps)


def recover_R(d0: Evaluator, d1: Evaluator, a: float, K: int, M: int = 2048,
              jump_correction: bool = True) -> GridFunction:
    """Real part of :func:`fourier_series` (real-potential mode)."""
    R = fourier_series(d0, d1, a, K, M, jump_correction)
    return R.with_samples(R.samples.real)


# -- piecewise reconstruction of q ----------------------------------------------

def _outer_ranges(R: GridFunction, a: float):
    c = PI - 2 * a
    xi = R.x
    left = int(np.nonzero(xi <= -c + 1e-12)[0][-1])
    right = int(np.nonzero(xi >= c - 1e-12)[0][0])
    if left < 3 or R.M - right < 3:
        raise ValidationError("R grid too coarse to resolve the outer intervals")
    return (0, left), (right, R.M)


def edge_reconstruct(R: GridFunction, q_at_a: complex, q_at_pi: complex, a: float,
                     panels: int = 512):
    """``q`` on ``[a, 3a/2]`` and ``[pi - a/2, pi]`` from the outer part of ``R``.

    Only samples of ``R`` with ``|xi| >= pi - 2a`` enter (the interpolation
    stencil is confined to those nodes), so the edges do not depend on ``R``
    over the inner interval.
    """
    left_rng, right_rng = _outer_ranges(R, a)
    xl = a + (a / 2) * np.arange(panels + 1) / panels
    xr = (PI - a / 2) + (a / 2) * np.arange(panels + 1) / panels
    q1l = fs.interp(R, 2 * xl - PI - a, node_range=left_rng)
    q1r = fs.interp(R, 2 * xr - PI - a, node_range=right_rng)
    left = fs.antiderivative(GridFunction(Interval(a, 1.5 * a), q1l), a, q_at_a)
    right = fs.antiderivative(GridFunction(Interval(PI - a / 2, PI), q1r), PI, q_at_pi)
    return left, right


def middle_reconstruct(R: GridFunction, edges, a: float, panels: int = 512,
                       corr_panels: int = 256):
    """``q`` on ``[3a/2, pi - a/2]``; returns ``(q_mid, seam_residual)``."""
    left, right = edges
    x = 1.5 * a + (PI - 2 * a) * np.arange(panels + 1) / panels
    tol = 1e-12
    if (np.any(x + a / 2 < PI - a / 2 - tol) or np.any(x + a / 2 > PI + tol)
            or np.any(x - a / 2 < a - tol) or np.any(x - a / 2 > 1.5 * a + tol)):
        raise DomainViolation(f"middle interval does not nest in the edges for a={a}")
    xp = np.clip(x + a / 2, PI - a / 2, PI)
    xm = np.clip(x - a / 2, a, 1.5 * a)
    Pl = fs.antiderivative(left, a, 0.0)
    Pr = fs.antiderivative(right, PI, 0.0)
    q_plus = fs.interp(right, xp)
    q_minus = fs.interp(left, xm)
    int_left = fs.interp(Pl, xm)                 # int_a^{x-a/2} q
    int_right = -fs.interp(Pr, xp)               # int_{x+a/2}^pi q
    span = PI - xp
    u = np.arange(corr_panels + 1) / corr_panels
    s = np.minimum(xp[:, None] + span[:, None] * u, PI)
    shifted = np.clip(s - x[:, None] + a / 2, a, 1.5 * a)
    corr = fs.simpson(fs.interp(right, s) * fs.interp(left, shifted), 1.0 / corr_panels) * span
    xi = np.clip(2 * x - PI - a, -(PI - 2 * a), PI - 2 * a)
    q1 = fs.interp(R, xi) + q_plus * int_left - q_minus * int_right - corr
    q1g = GridFunction(Interval(1.5 * a, PI - a / 2), q1)
    mid = fs.antiderivative(q1g, 1.5 * a, left.samples[-1])
    seam = float(abs(mid.samples[-1] - right.samples[0]))
    return mid, seam


def assemble(a: float, left: GridFunction, mid: GridFunction, right: GridFunction,
             M: int = 2048) -> Potential:
    x = a + (PI - a) * np.arange(M + 1) / M
    s1, s2 = 1.5 * a, PI - a / 2
    out = np.empty(M + 1, complex)
    tol = 1e-12
    for region, g in ((x < s1 - tol, left), ((x > s1 + tol) & (x < s2 - tol), mid),
                      (x > s2 + tol, right)):
        if region.any():
            out[region] = fs.interp(g, np.clip(x[region], g.interval.lo, g.interval.hi))
    at1 = np.abs(x - s1) <= tol
    at2 = np.abs(x - s2) <= tol
    out[at1] = 0.5 * (left.samples[-1] + mid.samples[0])
    out[at2] = 0.5 * (mid.samples[-1] + right.samples[0])
    return Potential(DelayParams(a), GridFunction(Interval(a, PI), out))


# -- orchestration ------------------------------------------------------------

def d_evaluators(ds0: Evaluator, ds1: Evaluator, a: float, A: complex, B1: complex, B2: complex):
    """``d_0, d_1`` built from ``Delta*`` evaluators, with the ``rho = 0`` limits."""
    L, c = PI - a, PI - 2 * a

    def d0(rho):
        rho = np.asarray(rho, dtype=float)
        out = np.zeros(rho.shape, complex)
        nz = rho != 0
        r = rho[nz]
        out[nz] = 4 * r * ds0(r) - B1 * np.sin(r * L) + 2 * A * np.sin(r * c)
        return out

    def d1(rho):
        rho = np.asarray(rho, dtype=float)
        out = np.full(rho.shape, 2 * A - B2, complex)
        nz = rho != 0
        r = rho[nz]
        out[nz] = 4 * r * ds1(r) - B2 * np.cos(r * L) + 2 * A * np.cos(r * c)
        return out

    return d0, d1


def reconstruction_errors(q_rec: Potential, q_true: Potential):
    """``(sup, L2)`` distance on ``[a, pi]``; ``q_true`` is resampled onto ``q_rec``'s grid."""
    if abs(q_rec.a - q_true.a) > 1e-12:
        raise ValidationError("potentials have different delays")
    truth = q_true.q
    if truth.M != q_rec.q.M:
        truth = fs.resample(truth, q_rec.a, PI, q_rec.q.M)
    err = np.abs(q_rec.q.samples - truth.samples)
    l2 = math.sqrt(fs.simpson(err ** 2, q_rec.q.h))
    return float(err.max()), l2


def _stage(label, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except StageError:
        raise
    except DelaySLError as exc:
        raise StageError(label, exc) from exc


def default_K(a: float, N: int, fraction: float = 0.95) -> int:
    """Largest harmonic whose frequency ``k pi / (pi - a)`` stays below ``fraction * N``."""
    return max(16, int(math.floor(fraction * N * (PI - a) / PI)))


def solve_inverse(s0: Spectrum, s1: Spectrum, a: float, cfg: SolverConfig | None = None) -> InversionReport:
    cfg = cfg or SolverConfig()
    a = DelayParams(a).a
    if s0.j != 0 or s1.j != 1:
        raise ValidationError("expected the j=0 spectrum first and the j=1 spectrum second")
    if s0.N != s1.N:
        raise ValidationError(f"spectra have different sizes ({s0.N} vs {s1.N})")
    N = s0.N
    if N < 50:
        raise ValidationError("solve_inverse needs N >= 50 eigenvalues per spectrum")
    window = cfg.window or _stage("window", FitWindow.for_spectrum_size, N)
    K = cfg.K or default_K(a, N, cfg.rho_fraction)

    A0_asym = _stage("A0", extract_A0, s0, s1, a)
    A0 = A0_asym
    products = _stage("encode", lambda: (ProductCharFn(s0, a, A0, cfg.tail_count),
                                         ProductCharFn(s1, a, A0, cfg.tail_count)))
    fits = []
    passes = 2 if cfg.second_order_tail else 1
    for p in range(passes):
        f0, f1 = products
        ds0 = lambda r, f0=f0, A0=A0: delta_star(f0, r, A0)
        ds1 = lambda r, f1=f1, A0=A0: delta_star(f1, r, A0)
        fit = _stage("ABs", extract_ABs, ds0, ds1, a, window, cfg.decay_terms)
        fits.append(fit)
        A0 = A0 + fit.A0_shift
        if p + 1 < passes:
            products = _stage("encode", lambda: (
                ProductCharFn(s0, a, A0, cfg.tail_count, (fit.A, fit.B1)),
                ProductCharFn(s1, a, A0, cfg.tail_count, (fit.A, fit.B2))))
    f0, f1 = products
    ds0 = lambda r: delta_star(f0, r, A0)
    ds1 = lambda r: delta_star(f1, r, A0)
    fit = fits[-1]
    A, B1, B2 = fit.A, fit.B1, fit.B2
    q_a = (B1 + B2) / 4
    q_pi = (B1 - B2) / 4

    d0, d1 = d_evaluators(ds0, ds1, a, A, B1, B2)
    Rc = _stage("R", fourier_series, d0, d1, a, K, cfg.M, cfg.jump_correction)
    R = Rc.with_samples(Rc.samples.real)
    edges = _stage("edges", edge_reconstruct, R, q_a, q_pi, a, cfg.edge_panels)
    mid, seam = _stage("middle", middle_reconstruct, R, edges, a, cfg.edge_panels)
    q_rec = _stage("assemble", assemble, a, edges[0], mid, edges[1], cfg.M)
    residuals = {
        "fit_rms": fits[-1].residual,
        "fit_rms_first_pass": fits[0].residual,
        "A0_shift": abs(A0 - A0_asym),
        "R_imag_max": float(np.max(np.abs(Rc.samples.imag))),
    }
    return InversionReport(q_rec=q_rec, A0=A0, A=A, B1=B1, B2=B2, q_at_a=q_a, q_at_pi=q_pi,
                           R=R, seam_residual=seam, fit_residuals=residuals,
                           A0_asymptotic=A0_asym, K=K)
