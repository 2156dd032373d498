"""Closed-form linear symbols of the capillary-gravity water-wave problem.

The dispersion relation on the branch used throughout is

    omega(k, b) = sgn(k) * sqrt((k + b k^3) * tanh k),

with Bond number b >= 0.  The companion multiplier

    sigma(k, b) = sqrt((k + b k^3) / tanh k),   sigma(0, b) = 1,

is even and positive, and K0 has the purely imaginary odd symbol
``-i tanh(k)``.

Near k = 0 every formula above is a 0/0-flavoured quotient, so this module
switches to Taylor expansions for |k| < 0.05; in particular
d_k omega(0, b) = 1 exactly.  All functions accept scalars or arrays.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

__all__ = ["omega", "omega_deriv", "sigma", "sigma_inv", "k0_symbol", "ModelParams"]

_SMALL_K = 0.05


def _as_array(k) -> tuple[np.ndarray, bool]:
    arr = np.asarray(k, dtype=np.float64)
    return arr, arr.ndim == 0


def _ret(arr: np.ndarray, scalar: bool):
    return float(arr) if scalar else arr


def _G_and_derivs(a: np.ndarray, b: float, upto: int) -> list[np.ndarray]:
    """G = (k + b k^3) tanh k and d/dk-derivatives, for a = |k| >= _SMALL_K."""
    T = np.tanh(a)
    # sech^2 underflows to 0 for large |k|; the overflow inside cosh is benign
    with np.errstate(over="ignore"):
        S = 1.0 / np.cosh(a) ** 2
    poly = a + b * a**3
    dpoly = 1.0 + 3.0 * b * a**2
    out = [poly * T]
    if upto >= 1:
        out.append(dpoly * T + poly * S)
    if upto >= 2:
        out.append(6.0 * b * a * T + 2.0 * dpoly * S - 2.0 * poly * S * T)
    if upto >= 3:
        out.append(
            6.0 * b * T
            + 18.0 * b * a * S
            - 6.0 * dpoly * S * T
            + poly * (4.0 * S * T**2 - 2.0 * S**2)
        )
    return out


def _series_coeffs(b: float) -> tuple[float, float]:
    """Taylor coefficients of omega = k + c3 k^3 + c5 k^5 + O(k^7) near 0."""
    c3 = 0.5 * (b - 1.0 / 3.0)
    c5 = 0.5 * (2.0 / 15.0 - b / 3.0) - 0.125 * (b - 1.0 / 3.0) ** 2
    return c3, c5


def omega(k, b: float):
    """Dispersion relation sgn(k)*sqrt((k + b k^3) tanh k); odd in k."""
    arr, scalar = _as_array(k)
    a = np.abs(arr)
    sign = np.sign(arr)
    out = np.empty_like(a)
    small = a < _SMALL_K
    if np.any(small):
        c3, c5 = _series_coeffs(b)
        x = a[small]
        out[small] = x + c3 * x**3 + c5 * x**5
    if np.any(~small):
        x = a[~small]
        out[~small] = np.sqrt(_G_and_derivs(x, b, 0)[0])
    return _ret(sign * out, scalar)


def omega_deriv(k, b: float, order: int):
    """Analytic k-derivative of ``omega`` of the given order (1, 2, or 3).

    At k = 0 the Taylor limit is returned: omega'(0,b) = 1, omega''(0,b) = 0,
    omega'''(0,b) = 3(b - 1/3).
    """
    if order not in (1, 2, 3):
        raise ValueError(f"order must be 1, 2 or 3, got {order}")
    arr, scalar = _as_array(k)
    a = np.abs(arr)
    # parity: omega odd => omega' even, omega'' odd, omega''' even
    sign = np.where(order % 2 == 1, np.ones_like(arr), np.sign(arr))
    out = np.empty_like(a)
    small = a < _SMALL_K
    if np.any(small):
        c3, c5 = _series_coeffs(b)
        x = a[small]
        if order == 1:
            out[small] = 1.0 + 3.0 * c3 * x**2 + 5.0 * c5 * x**4
        elif order == 2:
            out[small] = 6.0 * c3 * x + 20.0 * c5 * x**3
        else:
            out[small] = 6.0 * c3 + 60.0 * c5 * x**2
    if np.any(~small):
        x = a[~small]
        G = _G_and_derivs(x, b, order)
        w = np.sqrt(G[0])
        if order == 1:
            out[~small] = G[1] / (2.0 * w)
        elif order == 2:
            out[~small] = G[2] / (2.0 * w) - G[1] ** 2 / (4.0 * G[0] * w)
        else:
            out[~small] = (
                G[3] / (2.0 * w)
                - 3.0 * G[1] * G[2] / (4.0 * G[0] * w)
                + 3.0 * G[1] ** 3 / (8.0 * G[0] ** 2 * w)
            )
    return _ret(sign * out, scalar)


def sigma(k, b: float):
    """Even positive multiplier sqrt((k + b k^3)/tanh k), with sigma(0,b)=1."""
    arr, scalar = _as_array(k)
    a = np.abs(arr)
    out = np.empty_like(a)
    small = a < _SMALL_K
    if np.any(small):
        # sigma = 1 + s2 k^2 + s4 k^4 + O(k^6)
        s2 = 0.5 * (b + 1.0 / 3.0)
        s4 = 0.5 * (b / 3.0 - 1.0 / 45.0) - 0.125 * (b + 1.0 / 3.0) ** 2
        x = a[small]
        out[small] = 1.0 + s2 * x**2 + s4 * x**4
    if np.any(~small):
        x = a[~small]
        out[~small] = np.sqrt((x + b * x**3) / np.tanh(x))
    return _ret(out, scalar)


def sigma_inv(k, b: float):
    """1 / sigma(k, b); bounded by 1 since sigma >= 1 for b >= 0."""
    arr, scalar = _as_array(k)
    return _ret(1.0 / np.asarray(sigma(arr, b)), scalar)


def k0_symbol(k):
    """Symbol of the operator K0: the odd, purely imaginary ``-i tanh(k)``."""
    arr, scalar = _as_array(k)
    out = -1j * np.tanh(arr)
    return complex(out) if scalar else out


@dataclass(frozen=True)
class ModelParams:
    """Carrier wavenumber, Bond number, and the derived linear constants.

    omega0 is the carrier frequency, cg the group velocity d_k omega(k0, b),
    and omega2 the second derivative at the carrier (the dispersion
    coefficient of the modulation equation is omega2/2).
    """

    k0: float
    b: float

    def __post_init__(self) -> None:
        if not (self.k0 > 0.0):
            raise ValueError(f"k0 must be positive, got {self.k0}")
        if self.b < 0.0:
            raise ValueError(f"b must be nonnegative, got {self.b}")

    @cached_property
    def omega0(self) -> float:
        w = omega(self.k0, self.b)
        assert w > 0.0
        return w

    @cached_property
    def cg(self) -> float:
        return omega_deriv(self.k0, self.b, 1)

    @cached_property
    def omega2(self) -> float:
        return omega_deriv(self.k0, self.b, 2)
