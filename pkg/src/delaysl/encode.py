"""Characteristic functions rebuilt from eigenvalues alone.

``Delta_0(lam) = pi * prod (lam_n - lam) / n^2`` and
``Delta_1(lam) = prod (lam_n - lam) / (n - 1/2)^2``.  Only ``N`` eigenvalues
are known, so the product is closed with ``tail_count`` eigenvalues taken
from the two-term asymptotics and then with the free (``q = 0``) remainder
``prod_{n > K} (1 - lam / nu_n)``, summed in closed form through Hurwitz
zeta values.  The leading asymptotic shift ``lam_n - nu_n ~ (A0/pi) cos(nu a)``
of the eigenvalues beyond ``K`` is added back analytically; dropping it
leaves a relative error of order ``1/K^2``, which the normalisation
``8 rho^3 (Delta_0 - ...)`` would amplify by ``rho^2``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import zeta

from .errors import ValidationError
from .forward import PI, Spectrum, asymptotic_rho, sinc_kernel

_SERIES_RATIO = 0.25


@dataclass(frozen=True, eq=False)
class ProductCharFn:
    points: Spectrum
    a: float
    A0: complex
    tail_count: int | None = None
    second_order: tuple | None = None

    def __post_init__(self):
        if self.tail_count is None:
            object.__setattr__(self, "tail_count", 4 * self.points.N)
        if self.tail_count < 0:
            raise ValidationError("tail_count must be >= 0")
        j, N, T = self.j, self.points.N, self.tail_count
        n = np.arange(1, N + T + 1, dtype=float)
        nu = n ** 2 if j == 0 else (n - 0.5) ** 2
        tail = asymptotic_rho(j, n[N:], self.a, self.A0, self.second_order) ** 2
        object.__setattr__(self, "_roots", np.concatenate([self.points.lambdas, tail]))
        object.__setattr__(self, "_nu", nu)

    @property
    def j(self) -> int:
        return self.points.j

    def __call__(self, lam):
        return delta_from_spectrum(self, lam)


def _free_remainder_log(j: int, K: int, lam):
    """``log prod_{n > K} (1 - lam / nu_n)`` for ``nu_n = n^2`` or ``(n - 1/2)^2``."""
    shift = K + 1.0 if j == 0 else K + 0.5
    r = lam / shift ** 2
    out = np.zeros(lam.shape, complex)
    use_series = np.abs(r) <= _SERIES_RATIO
    if use_series.any():
        rs = r[use_series]
        acc = np.zeros(rs.shape, complex)
        power = np.ones(rs.shape, complex)
        for m in range(1, 200):
            power = power * rs
            scaled = zeta(2 * m, shift) * shift ** (2 * m)
            term = power * scaled / m
            acc -= term
            if np.max(np.abs(term)) < 1e-18:
                break
        out[use_series] = acc
    if (~use_series).any():
        lr = lam[~use_series]
        rho = np.sqrt(lr)
        n = np.arange(1, K + 1, dtype=float)
        nu = n ** 2 if j == 0 else (n - 0.5) ** 2
        free = sinc_kernel(lr, PI) / PI if j == 0 else np.cos(rho * PI)
        head = np.sum(np.log(1 - lr[:, None] / nu), axis=-1)
        out[~use_series] = np.log(free.astype(complex)) - head
    return out


def _cos_series(theta, power):
    """``sum_{n>=1} cos(n theta) / n^power`` for power 2 or 4, ``0 <= theta <= 2 pi``."""
    t = np.mod(theta, 2 * PI)
    if power == 2:
        return PI ** 2 / 6 - PI * t / 2 + t ** 2 / 4
    return PI ** 4 / 90 - PI ** 2 * t ** 2 / 12 + PI * t ** 3 / 12 - t ** 4 / 48


def _half_cos_series(theta, power):
    """``sum_{n>=1} cos((n - 1/2) theta) / (n - 1/2)^power``."""
    return 2.0 ** power * (_cos_series(theta / 2, power) - _cos_series(theta, power) / 2.0 ** power)


def _tail_shift_log(j: int, K: int, a: float, A0: complex, lam):
    """``sum_{n>K} (A0/pi) cos(nu_n a) / (nu_n^2 - lam)`` to ``O(lam^2 / K^6)``."""
    if A0 == 0:
        return np.zeros(lam.shape, complex)
    n = np.arange(1, K + 1, dtype=float)
    nu = n if j == 0 else n - 0.5
    full = _cos_series if j == 0 else _half_cos_series
    c = np.cos(nu * a)
    s2 = full(a, 2) - np.sum(c / nu ** 2)
    s4 = full(a, 4) - np.sum(c / nu ** 4)
    return A0 / PI * (s2 + lam * s4)


def delta_from_spectrum(f: ProductCharFn, lam):
    """Evaluate the closed product; accurate for ``|lam|`` well below ``(N/2)^2``."""
    arr = np.asarray(lam, dtype=complex)
    flat = arr.reshape(-1)
    roots, nu = f._roots, f._nu
    out = np.empty(flat.shape, complex)
    for s in range(0, flat.size, 256):
        L = flat[s:s + 256, None]
        diff = roots - L
        hit = np.any(np.abs(diff) <= 1e-13 * np.maximum(1.0, np.abs(roots)), axis=-1)
        with np.errstate(divide="ignore"):
            logs = np.sum(np.log(diff / nu), axis=-1)
        logs += _free_remainder_log(f.j, roots.size, L[:, 0])
        logs += _tail_shift_log(f.j, roots.size, f.a, f.A0, L[:, 0])
        val = np.exp(logs) * (PI if f.j == 0 else 1.0)
        out[s:s + 256] = np.where(hit, 0.0, val)
    if arr.ndim == 0:
        return complex(out[0])
    return out.reshape(arr.shape)


def normalize(j: int, delta, rho, A0: complex, a: float):
    """Strip the two leading asymptotic terms from ``Delta_j`` (scaled ``Delta*_j``)."""
    rho = np.asarray(rho, dtype=complex)
    L = PI - a
    if j == 0:
        return 2 * rho ** 2 * (delta - sinc_kernel(rho * rho, PI)) + A0 * np.cos(rho * L)
    return 2 * rho * (delta - np.cos(rho * PI)) - A0 * np.sin(rho * L)


def delta_star(f: ProductCharFn, rho, A0: complex):
    rho_arr = np.asarray(rho, dtype=complex)
    if np.any(rho_arr == 0):
        raise ValidationError("delta_star is undefined at rho = 0")
    out = normalize(f.j, delta_from_spectrum(f, rho_arr * rho_arr), rho_arr, A0, f.a)
    return complex(out) if rho_arr.ndim == 0 else out
