"""Functions sampled on uniform grids.

Every quantity the solver manipulates (the potential, its derivative, the
Fourier-side function ``R`` ...) is stored as a :class:`GridFunction`: an
interval, a panel count ``M`` (even, so composite Simpson applies) and
``M + 1`` complex samples.  The module-level helpers ``simpson``,
``cumulative_simpson`` and ``stencil`` work on raw arrays with arbitrary
leading batch dimensions and are used directly by the vectorised
characteristic-function code.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np

from .errors import GridError

INTERP_SLACK = 1e-12


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)) or not self.lo < self.hi:
            raise GridError(f"invalid interval [{self.lo}, {self.hi}]")

    @property
    def length(self) -> float:
        return self.hi - self.lo

    def contains(self, x, slack: float = INTERP_SLACK) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all((x >= self.lo - slack) & (x <= self.hi + slack)))


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Samples ``f(lo + k*h)``, ``k = 0..M`` with ``h = (hi - lo) / M``."""

    interval: Interval
    samples: np.ndarray

    def __post_init__(self):
        s = np.array(self.samples, dtype=complex)
        if s.ndim != 1:
            raise GridError("samples must be one-dimensional")
        M = s.size - 1
        if M < 2 or M % 2:
            raise GridError(f"panel count must be even and >= 2, got {M}")
        if not np.all(np.isfinite(s)):
            raise GridError("samples contain NaN or Inf")
        s.flags.writeable = False
        object.__setattr__(self, "samples", s)

    @classmethod
    def from_function(cls, fn, lo: float, hi: float, M: int = 2048) -> "GridFunction":
        iv = Interval(float(lo), float(hi))
        x = iv.lo + iv.length * np.arange(M + 1) / M
        vals = np.broadcast_to(np.asarray(fn(x), dtype=complex), x.shape)
        return cls(iv, vals)

    @classmethod
    def zeros(cls, lo: float, hi: float, M: int = 2048) -> "GridFunction":
        return cls(Interval(float(lo), float(hi)), np.zeros(M + 1, dtype=complex))

    @property
    def M(self) -> int:
        return self.samples.size - 1

    @property
    def h(self) -> float:
        return self.interval.length / self.M

    @property
    def x(self) -> np.ndarray:
        return self.interval.lo + self.interval.length * np.arange(self.M + 1) / self.M

    @property
    def real(self) -> np.ndarray:
        return self.samples.real

    def with_samples(self, samples) -> "GridFunction":
        return GridFunction(self.interval, samples)

    def __call__(self, x):
        return interp(self, x)


# -- raw-array kernels -------------------------------------------------------

def simpson(y, h: float):
    """Composite Simpson along the last axis (odd number of samples)."""
    y = np.asarray(y)
    n = y.shape[-1] - 1
    if n < 2 or n % 2:
        raise GridError(f"Simpson needs an even panel count >= 2, got {n}")
    return h / 3.0 * (y[..., 0] + y[..., -1]
                      + 4.0 * y[..., 1:-1:2].sum(axis=-1)
                      + 2.0 * y[..., 2:-1:2].sum(axis=-1))


def cumulative_simpson(y, h: float):
    """Running integral from the first sample, O(h^4) at every node.

    Even nodes get exact composite-Simpson partial sums; odd nodes add the
    three-point half-panel rule ``h (5 f0 + 8 f1 - f2) / 12``.
    """
    y = np.asarray(y)
    n = y.shape[-1] - 1
    if n < 2 or n % 2:
        raise GridError(f"cumulative Simpson needs an even panel count >= 2, got {n}")
    f0, f1, f2 = y[..., 0:-1:2], y[..., 1::2], y[..., 2::2]
    pairs = h / 3.0 * (f0 + 4.0 * f1 + f2)
    out = np.zeros(y.shape, dtype=np.result_type(y, float))
    out[..., 2::2] = np.cumsum(pairs, axis=-1)
    out[..., 1::2] = out[..., 0:-1:2] + h * (5.0 * f0 + 8.0 * f1 - f2) / 12.0
    return out


def stencil(lo: float, h: float, M: int, x, node_range=None, order: int = 4):
    """Indices and Lagrange weights for interpolation at ``x``.

    Returns ``(idx, w)`` with shape ``x.shape + (p,)``.  ``node_range``
    (inclusive index pair) confines the stencil to a sub-range of nodes;
    points up to one spacing outside that range are then extrapolated.
    """
    x = np.asarray(x, dtype=float)
    i0, i1 = (0, M) if node_range is None else node_range
    p = min(order, i1 - i0 + 1)
    u = (x - lo) / h
    r = np.rint(u)
    u = np.where(np.abs(u - r) < 1e-9, r, u)
    start = np.floor(u).astype(int) - (p // 2 - 1)
    start = np.clip(start, i0, i1 - p + 1)
    t = u - start
    w = np.ones(x.shape + (p,))
    for m in range(p):
        for k in range(p):
            if k != m:
                w[..., m] *= (t - k) / (m - k)
    idx = start[..., None] + np.arange(p)
    return idx, w


def apply_stencil(samples, idx, w):
    """Contract the last axis of ``samples`` against a precomputed stencil."""
    samples = np.asarray(samples)
    return np.sum(samples[..., idx] * w, axis=-1)


# -- GridFunction operations ---------------------------------------------------

def integrate(f: GridFunction) -> complex:
    return complex(simpson(f.samples, f.h))


def interp(f: GridFunction, x, node_range=None):
    """Cubic (4-point Lagrange) interpolation; no extrapolation.

    With ``node_range`` the stencil stays inside that block of nodes, which
    keeps evaluations on one side of a known discontinuity independent of
    samples on the other side.
    """
    xa = np.asarray(x, dtype=float)
    if node_range is None:
        if not f.interval.contains(xa):
            raise GridError(f"interpolation point outside [{f.interval.lo}, {f.interval.hi}]")
        xa = np.clip(xa, f.interval.lo, f.interval.hi)
    else:
        i0, i1 = node_range
        lo_x = f.interval.lo + i0 * f.h - f.h
        hi_x = f.interval.lo + i1 * f.h + f.h
        if np.any(xa < lo_x - INTERP_SLACK) or np.any(xa > hi_x + INTERP_SLACK):
            raise GridError("interpolation point more than one spacing outside the node range")
    idx, w = stencil(f.interval.lo, f.h, f.M, xa, node_range)
    out = apply_stencil(f.samples, idx, w)
    return complex(out) if np.ndim(x) == 0 else out


def differentiate(f: GridFunction) -> GridFunction:
    return f.with_samples(np.gradient(f.samples, f.h, edge_order=2))


def node_index(f: GridFunction, x: float) -> int:
    u = (x - f.interval.lo) / f.h
    k = int(round(u))
    if abs(u - k) > 1e-9 or not 0 <= k <= f.M:
        raise GridError(f"anchor {x} is not a grid node")
    return k


def antiderivative(f: GridFunction, anchor_x: float, anchor_val: complex) -> GridFunction:
    """``g`` with ``g' = f`` and ``g(anchor_x) = anchor_val``."""
    k = node_index(f, anchor_x)
    c = cumulative_simpson(f.samples, f.h)
    return f.with_samples(c - c[k] + anchor_val)


def resample(f: GridFunction, lo: float, hi: float, M: int, node_range=None) -> GridFunction:
    iv = Interval(lo, hi)
    x = iv.lo + iv.length * np.arange(M + 1) / M
    return GridFunction(iv, interp(f, x, node_range=node_range))


# -- CSV ---------------------------------------------------------------------

def to_csv(f: GridFunction) -> str:
    buf = io.StringIO()
    buf.write("x,re,im\n")
    for xv, v in zip(f.x, f.samples):
        buf.write(f"{xv:.17g},{v.real:.17g},{v.imag:.17g}\n")
    return buf.getvalue()


def from_csv(text: str, rtol: float = 1e-9) -> GridFunction:
    lines = [ln.strip() for ln in text.strip().splitlines() if ln.strip()]
    if not lines or lines[0].replace(" ", "") != "x,re,im":
        raise GridError("CSV header must be 'x,re,im'")
    try:
        rows = np.array([[float(c) for c in ln.split(",")] for ln in lines[1:]])
    except ValueError as exc:
        raise GridError(f"non-numeric CSV field: {exc}") from None
    if rows.ndim != 2 or rows.shape[1] != 3:
        raise GridError("every CSV row needs exactly three fields")
    x = rows[:, 0]
    if x.size < 3:
        raise GridError("too few grid rows")
    iv = Interval(float(x[0]), float(x[-1]))
    M = x.size - 1
    expected = iv.lo + iv.length * np.arange(M + 1) / M
    if np.max(np.abs(x - expected)) > rtol * max(1.0, iv.length):
        raise GridError("CSV abscissae are not uniformly spaced")
    return GridFunction(iv, rows[:, 1] + 1j * rows[:, 2])
