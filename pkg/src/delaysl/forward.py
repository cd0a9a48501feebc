"""Forward problem: from a delay ``a`` and potential ``q`` to the two spectra.

The boundary value problems are ``-y'' + q(x) y(x - a) = lam y`` on
``(0, pi)`` with ``y(0) = 0`` and either ``y(pi) = 0`` (j = 0) or
``y'(pi) = 0`` (j = 1).  ``q`` vanishes on ``[0, a]``.  Because
``3a > pi`` the Picard series of the Volterra equation terminates after two
corrections, so ``Y = Y0 + Y1 + Y2`` holds exactly on ``[0, pi]``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import funcspace as fs
from .errors import (BoundaryTooClose, NonConvergence, RootCollision, ValidationError)
from .funcspace import GridFunction, Interval

PI = math.pi
A_MIN = 2.0 * PI / 5.0
A_MAX = PI / 2.0
_SERIES_CUTOFF = 1e-4
_BATCH = 64
_MAX_RHO_H = 0.1


@dataclass(frozen=True)
class DelayParams:
    a: float

    def __post_init__(self):
        a = float(self.a)
        if not (A_MIN - 1e-14 <= a < A_MAX):
            raise ValidationError(f"delay a={a} outside [2pi/5, pi/2)")
        object.__setattr__(self, "a", a)


@dataclass(frozen=True, eq=False)
class Potential:
    """``q`` on ``[a, pi]``; implicitly zero on ``[0, a]``."""

    delay: DelayParams
    q: GridFunction

    def __post_init__(self):
        iv = self.q.interval
        if abs(iv.lo - self.delay.a) > 1e-12 or abs(iv.hi - PI) > 1e-12:
            raise ValidationError(f"potential grid must span [a, pi]=[{self.delay.a}, {PI}], "
                                  f"got [{iv.lo}, {iv.hi}]")

    @classmethod
    def from_function(cls, a: float, fn, M: int = 2048) -> "Potential":
        d = DelayParams(a)
        return cls(d, GridFunction.from_function(fn, d.a, PI, M))

    @classmethod
    def zero(cls, a: float, M: int = 2048) -> "Potential":
        return cls.from_function(a, lambda x: np.zeros_like(x), M)

    @property
    def a(self) -> float:
        return self.delay.a


@dataclass(frozen=True)
class SpectralPoint:
    j: int
    n: int
    lam: complex

    @property
    def rho(self) -> complex:
        r = complex(np.sqrt(complex(self.lam)))
        return -r if r.real < 0 else r


@dataclass(frozen=True)
class Spectrum:
    j: int
    points: tuple

    def __post_init__(self):
        if self.j not in (0, 1):
            raise ValidationError(f"boundary index must be 0 or 1, got {self.j}")
        pts = tuple(self.points)
        for k, pt in enumerate(pts, start=1):
            if pt.n != k or pt.j != self.j:
                raise ValidationError("spectrum indices must run consecutively from 1")
            if not np.isfinite(pt.lam):
                raise ValidationError(f"non-finite eigenvalue at n={pt.n}")
        object.__setattr__(self, "points", pts)

    @classmethod
    def from_lambdas(cls, j: int, lams) -> "Spectrum":
        return cls(j, tuple(SpectralPoint(j, n, complex(v)) for n, v in enumerate(lams, start=1)))

    @property
    def N(self) -> int:
        return len(self.points)

    @property
    def lambdas(self) -> np.ndarray:
        return np.array([p.lam for p in self.points], dtype=complex)

    @property
    def rhos(self) -> np.ndarray:
        r = np.sqrt(self.lambdas)
        return np.where(r.real < 0, -r, r)


@dataclass(frozen=True, eq=False)
class DirectConstants:
    A0: complex
    A: complex
    B1: complex
    B2: complex
    q0: GridFunction
    Q: GridFunction
    R: GridFunction


# -- elementary kernels --------------------------------------------------------

def sinc_kernel(lam, u):
    """``sin(rho u) / rho`` with ``rho^2 = lam``; entire in ``lam``."""
    lam = np.asarray(lam, dtype=complex)
    u = np.asarray(u, dtype=float)
    z = lam * u * u
    rho = np.sqrt(lam)
    small = np.abs(z) < _SERIES_CUTOFF ** 2
    safe = np.where(small, 1.0, rho)
    direct = np.sin(rho * u) / safe
    series = u * (1 - z / 6 * (1 - z / 20 * (1 - z / 42 * (1 - z / 72))))
    return np.where(small, series, direct)


def cos_kernel(lam, u):
    return np.cos(np.sqrt(np.asarray(lam, dtype=complex)) * np.asarray(u, dtype=float))


def _as_batch(lam):
    arr = np.asarray(lam, dtype=complex)
    return arr, arr.reshape(-1)


# -- characteristic functions ---------------------------------------------------

def _quadrature_grid(q: GridFunction, lam) -> GridFunction:
    """``q`` itself, or its cubic resampling once ``|rho| h`` exceeds ``_MAX_RHO_H``."""
    rho_max = float(np.max(np.abs(np.sqrt(lam)), initial=0.0))
    ratio = rho_max * q.h / _MAX_RHO_H
    if ratio <= 1:
        return q
    factor = 2 ** int(math.ceil(math.log2(ratio)))
    return fs.resample(q, q.interval.lo, q.interval.hi, q.M * factor)


def _closed_batch(lam, p: Potential):
    a = p.a
    q = _quadrature_grid(p.q, lam)
    x = q.x
    qs = q.samples
    L = lam[:, None]
    Sa = sinc_kernel(L, x - a)
    Sx = sinc_kernel(L, x)
    Cx = cos_kernel(L, x)
    C1 = fs.cumulative_simpson(Cx * qs * Sa, q.h)
    C2 = fs.cumulative_simpson(Sx * qs * Sa, q.h)

    Spi = sinc_kernel(lam, PI)
    Cpi = cos_kernel(lam, PI)
    y1 = Spi * C1[:, -1] - Cpi * C2[:, -1]
    dy1 = Cpi * C1[:, -1] + lam * Spi * C2[:, -1]

    # Y2 on [2a, pi]: integrand vanishes to third order at t = 2a
    m = max(64, 2 * int(math.ceil((PI - 2 * a) / q.h)))
    m += m % 2
    t = 2 * a + (PI - 2 * a) * np.arange(m + 1) / m
    xd = t - a
    idx, w = fs.stencil(q.interval.lo, q.h, q.M, xd)
    C1d = fs.apply_stencil(C1, idx, w)
    C2d = fs.apply_stencil(C2, idx, w)
    qt = fs.interp(q, t)
    Y1d = sinc_kernel(L, xd) * C1d - cos_kernel(L, xd) * C2d
    core = qt * Y1d
    ht = (PI - 2 * a) / m
    y2 = fs.simpson(sinc_kernel(L, PI - t) * core, ht)
    dy2 = fs.simpson(cos_kernel(L, PI - t) * core, ht)
    delta0 = Spi + y1 + y2
    delta1 = Cpi + dy1 + dy2
    return delta0, delta1


def charfn_closed_both(lam, p: Potential):
    """``(Delta_0(lam), Delta_1(lam))`` from the terminating Picard series."""
    arr, flat = _as_batch(lam)
    d0 = np.empty(flat.shape, complex)
    d1 = np.empty(flat.shape, complex)
    for s in range(0, flat.size, _BATCH):
        d0[s:s + _BATCH], d1[s:s + _BATCH] = _closed_batch(flat[s:s + _BATCH], p)
    if arr.ndim == 0:
        return complex(d0[0]), complex(d1[0])
    return d0.reshape(arr.shape), d1.reshape(arr.shape)


def charfn_closed(j: int, lam, p: Potential):
    """``Delta_j(lam) = Y^(j)(pi, lam)``; vectorised over ``lam``."""
    _check_j(j)
    return charfn_closed_both(lam, p)[j]


def charfn_oracle_both(lam, p: Potential, steps: int = 8192):
    """Method of steps with fixed-step RK4 on ``[a, pi]``.

    On ``[0, a]`` the solution is ``sin(rho x)/rho``; beyond, the delayed
    value ``y(x - a)`` comes from that closed form while ``x - a <= a`` and
    from cubic interpolation of the already computed history afterwards.
    """
    arr, lam = _as_batch(lam)
    a = p.a
    h = (PI - a) / steps
    xs = a + h * np.arange(steps + 1)
    x_half = xs[:-1] + 0.5 * h
    q_node = fs.interp(p.q, xs)
    q_half = fs.interp(p.q, x_half)

    hist = np.empty((steps + 1, lam.size), complex)
    y = sinc_kernel(lam, a)
    v = cos_kernel(lam, a)
    hist[0] = y

    def delayed(xq):
        d = xq - a
        if d <= a + 1e-14:
            return sinc_kernel(lam, max(d, 0.0))
        idx, w = fs.stencil(a, h, steps, d)
        return w @ hist[idx]

    yd_next = delayed(xs[0])
    for k in range(steps):
        yd0 = yd_next
        ydh = delayed(x_half[k])
        yd_next = delayed(xs[k + 1])
        q0, qh, q1 = q_node[k], q_half[k], q_node[k + 1]
        k1y = v
        k1v = q0 * yd0 - lam * y
        k2y = v + 0.5 * h * k1v
        k2v = qh * ydh - lam * (y + 0.5 * h * k1y)
        k3y = v + 0.5 * h * k2v
        k3v = qh * ydh - lam * (y + 0.5 * h * k2y)
        k4y = v + h * k3v
        k4v = q1 * yd_next - lam * (y + h * k3y)
        y = y + h / 6.0 * (k1y + 2 * k2y + 2 * k3y + k4y)
        v = v + h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v)
        hist[k + 1] = y
    if arr.ndim == 0:
        return complex(y[0]), complex(v[0])
    return y.reshape(arr.shape), v.reshape(arr.shape)


def charfn_oracle(j: int, lam, p: Potential, steps: int = 8192):
    _check_j(j)
    return charfn_oracle_both(lam, p, steps)[j]


def _check_j(j):
    if j not in (0, 1):
        raise ValidationError(f"boundary index must be 0 or 1, got {j}")


# -- spectra ------------------------------------------------------------------

def asymptotic_rho(j: int, n, a: float, A0: complex, second_order=None):
    """Large-n expansion of ``sqrt(lam_n)``.

    Without ``second_order`` this is the two-term form
    ``nu + A0 cos(nu a) / (2 pi n)`` with ``nu = n`` (j = 0) or ``n - 1/2``
    (j = 1).  ``second_order=(A, B)`` (``B = B1`` for j = 0, ``B2`` for j = 1)
    switches to the expansion in powers of ``1/nu`` carried to ``nu^-2``,
    whose remainder is ``O(nu^-3)``.
    """
    n = np.asarray(n, dtype=float)
    nu = n if j == 0 else n - 0.5
    if second_order is None:
        return nu + A0 * np.cos(nu * a) / (2 * PI * n)
    A, B = second_order
    s, c = np.sin(nu * a), np.cos(nu * a)
    e1 = A0 * c / (2 * PI)
    e2 = (A0 * (PI - a) * e1 * s / 2 + (B * s - 2 * A * np.sin(2 * nu * a)) / 8) / PI
    return nu + e1 / nu + e2 / nu ** 2


def eigenvalues(j: int, p: Potential, N: int, tol: float = 1e-12, maxiter: int = 50,
                step: float = 1e-6) -> Spectrum:
    """First ``N`` eigenvalues by Newton in ``rho`` seeded from the asymptotics."""
    _check_j(j)
    if N < 1:
        raise ValidationError("N must be >= 1")
    A0 = fs.integrate(p.q)
    n = np.arange(1, N + 1)
    rho = asymptotic_rho(j, n, p.a, A0).astype(complex)
    active = np.ones(N, bool)
    f = lambda r: charfn_closed(j, r * r, p)
    for _ in range(maxiter):
        idx = np.nonzero(active)[0]
        if idx.size == 0:
            break
        r = rho[idx]
        fp = (f(r + step) - f(r - step)) / (2 * step)
        dr = f(r) / fp
        rho[idx] = r - dr
        active[idx[np.abs(dr) < tol]] = False
    if active.any():
        raise NonConvergence(int(n[np.argmax(active)]), j, maxiter)
    rho = np.where(rho.real < 0, -rho, rho)
    order = np.argsort(rho.real, kind="stable")
    gaps = np.abs(np.diff(rho[order]))
    if gaps.size and gaps.min() < 1e-8:
        k = int(np.argmin(gaps))
        raise RootCollision(int(n[order[k]]), int(n[order[k + 1]]), j)
    return Spectrum.from_lambdas(j, rho * rho)


def count_roots_rect(j: int, p: Potential, rect: Sequence[float], base_points: int = 64,
                     max_rounds: int = 30, floor: float = 1e-10) -> int:
    """Winding number of ``Delta_j`` along the boundary of a lam-rectangle.

    ``rect = (re_lo, re_hi, im_lo, im_hi)``.  The contour is refined until no
    two consecutive samples differ in argument by more than ``pi/8``.
    """
    _check_j(j)
    re_lo, re_hi, im_lo, im_hi = map(float, rect)
    corners = [complex(re_lo, im_lo), complex(re_hi, im_lo),
               complex(re_hi, im_hi), complex(re_lo, im_hi)]
    pts = []
    for c0, c1 in zip(corners, corners[1:] + corners[:1]):
        s = np.linspace(0.0, 1.0, base_points, endpoint=False)
        pts.append(c0 + (c1 - c0) * s)
    z = np.concatenate(pts + [np.array([corners[0]])])
    vals = charfn_closed(j, z, p)
    for _ in range(max_rounds):
        if np.min(np.abs(vals)) < floor:
            raise BoundaryTooClose(f"|Delta_{j}| < {floor} on the contour; move the rectangle")
        jumps = np.abs(np.angle(vals[1:] / vals[:-1]))
        bad = np.nonzero(jumps > PI / 8)[0]
        if bad.size == 0:
            break
        mids = 0.5 * (z[bad] + z[bad + 1])
        mvals = charfn_closed(j, mids, p)
        z = np.insert(z, bad + 1, mids)
        vals = np.insert(vals, bad + 1, mvals)
    else:
        raise BoundaryTooClose("contour refinement did not resolve the argument")
    total = np.sum(np.angle(vals[1:] / vals[:-1]))
    return int(round(total / (2 * PI)))


# -- constants of the nonlinear expansion ------------------------------------------

def _correlation(q: GridFunction, x, a: float, panels: int = 256):
    """``int_{x+a}^{pi} q(s) q(s - x) ds`` for each ``x`` (Simpson per point)."""
    x = np.asarray(x, dtype=float)
    lo = x + a
    ln = np.maximum(PI - lo, 0.0)
    u = np.arange(panels + 1) / panels
    s = np.minimum(lo[:, None] + ln[:, None] * u, PI)
    vals = fs.interp(q, s) * fs.interp(q, s - x[:, None])
    return fs.simpson(vals, 1.0 / panels) * ln


def direct_constants(p: Potential, M: int = 2048) -> DirectConstants:
    """Everything the inverse algorithm recovers, computed straight from ``q``."""
    q, a = p.q, p.a
    L = PI - a
    inner = PI - 2 * a
    A0 = fs.integrate(q)
    P = fs.antiderivative(q, a, 0.0)
    m = max(64, 2 * int(math.ceil(inner / q.h)))
    m += m % 2
    t = 2 * a + inner * np.arange(m + 1) / m
    A = complex(fs.simpson(fs.interp(q, t) * fs.interp(P, t - a), inner / m))
    qa, qpi = q.samples[0], q.samples[-1]
    B1 = 2 * (qa + qpi)
    B2 = 2 * (qa - qpi)

    q1 = fs.differentiate(q)
    q0 = GridFunction.from_function(lambda xi: fs.interp(q1, np.clip(xi / 2 + (PI + a) / 2, a, PI)),
                                    -L, L, M)

    def Qfun(xi):
        xa = np.clip(xi / 2 + PI / 2 + a, 2 * a, PI)
        xb = np.clip(xi / 2 + PI / 2, a, PI - a)
        Q1 = fs.interp(q, xa) * fs.interp(P, xa - a)
        Q2 = fs.interp(q, xb) * (P.samples[-1] - fs.interp(P, xb + a))
        Q3 = _correlation(q, xb, a)
        return Q1 - Q2 - Q3

    Q = GridFunction.from_function(Qfun, -inner, inner, M)
    xi = q0.x
    in_inner = np.abs(xi) <= inner
    Rs = q0.samples.copy()
    if in_inner.any():
        Rs[in_inner] -= Qfun(xi[in_inner])
    R = GridFunction(Interval(-L, L), Rs)
    return DirectConstants(A0, A, B1, B2, q0, Q, R)


def d_from_constants(dc: DirectConstants, rho):
    """``(d0(rho), d1(rho))`` as Fourier integrals of ``R = q0 - Q``.

    The jump of ``R`` at the inner interval ends is handled by integrating
    ``q0`` and ``Q`` separately on their own smooth grids.
    """
    rho = np.asarray(rho, dtype=complex)
    r = rho.reshape(-1)[:, None]
    xo, xq = dc.q0.x, dc.Q.x
    c = fs.simpson(dc.q0.samples * np.cos(r * xo), dc.q0.h) - fs.simpson(dc.Q.samples * np.cos(r * xq), dc.Q.h)
    s = fs.simpson(dc.q0.samples * np.sin(r * xo), dc.q0.h) - fs.simpson(dc.Q.samples * np.sin(r * xq), dc.Q.h)
    return (-s).reshape(rho.shape), c.reshape(rho.shape)


def d_from_charfn(p: Potential, rho, dc: DirectConstants | None = None):
    """``(d0, d1)`` obtained by normalising the closed-form characteristic functions."""
    dc = dc or direct_constants(p)
    rho = np.asarray(rho, dtype=complex)
    a = p.a
    L = PI - a
    D0, D1 = charfn_closed_both(rho * rho, p)
    ds0 = 2 * rho ** 2 * (D0 - sinc_kernel(rho * rho, PI)) + dc.A0 * np.cos(rho * L)
    ds1 = 2 * rho * (D1 - np.cos(rho * PI)) - dc.A0 * np.sin(rho * L)
    d0 = 4 * rho * ds0 - dc.B1 * np.sin(rho * L) + 2 * dc.A * np.sin(rho * (PI - 2 * a))
    d1 = 4 * rho * ds1 - dc.B2 * np.cos(rho * L) + 2 * dc.A * np.cos(rho * (PI - 2 * a))
    return d0, d1
