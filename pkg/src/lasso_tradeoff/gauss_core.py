"""Standard normal primitives and the soft-thresholding risk formulas.

All functions accept Python floats or numpy arrays and broadcast.  The normal
cdf is evaluated through ``erfc`` so that deep tails keep full relative
precision, which matters because the boundary solvers routinely evaluate
``Phi(-t)`` for ``t`` in the tens.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc

from .errors import DomainError

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)
_SQRT2 = math.sqrt(2.0)


def _as_float(x):
    arr = np.asarray(x, dtype=float)
    return arr


def _unwrap(arr):
    return float(arr) if arr.ndim == 0 else arr


@dataclass(frozen=True)
class ScalarGrid:
    """A strictly increasing, finite, non-empty set of abscissae."""

    points: tuple

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 1 or pts.size == 0:
            raise DomainError("grid must be a non-empty 1-d sequence")
        if not np.all(np.isfinite(pts)):
            raise DomainError("grid points must be finite")
        if pts.size > 1 and not np.all(np.diff(pts) > 0):
            raise DomainError("grid points must be strictly increasing")
        object.__setattr__(self, "points", tuple(float(v) for v in pts))

    @classmethod
    def linspace(cls, lo, hi, num):
        return cls(tuple(np.linspace(lo, hi, num)))

    @classmethod
    def geomspace(cls, lo, hi, num):
        return cls(tuple(np.geomspace(lo, hi, num)))

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def as_array(self):
        return np.asarray(self.points)


def std_normal_pdf(x):
    """Standard normal density."""
    arr = _as_float(x)
    if not np.all(np.isfinite(arr)):
        raise DomainError("std_normal_pdf requires finite input")
    return _unwrap(_INV_SQRT_2PI * np.exp(-0.5 * arr * arr))


def std_normal_cdf(x):
    """Standard normal cdf ``Phi(x) = erfc(-x/sqrt(2))/2``; accepts +-inf."""
    arr = _as_float(x)
    if np.any(np.isnan(arr)):
        raise DomainError("std_normal_cdf is undefined at NaN")
    return _unwrap(0.5 * erfc(-arr / _SQRT2))


def soft_threshold(x, t):
    """``sgn(x) * max(|x| - t, 0)``."""
    t_arr = _as_float(t)
    if np.any(t_arr < 0):
        raise DomainError("threshold must be non-negative")
    x_arr = _as_float(x)
    return _unwrap(np.sign(x_arr) * np.maximum(np.abs(x_arr) - t_arr, 0.0))


def _check_finite(*arrays):
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise DomainError("arguments must be finite")


def excess_tail(mu, alpha):
    """``P(|mu + W| > alpha)`` for standard normal ``W``."""
    mu = _as_float(mu)
    alpha = _as_float(alpha)
    _check_finite(mu, alpha)
    if np.any(alpha < 0):
        raise DomainError("alpha must be non-negative")
    out = 0.5 * erfc((alpha - mu) / _SQRT2) + 0.5 * erfc((alpha + mu) / _SQRT2)
    return _unwrap(np.minimum(out, 1.0))


def soft_mse(mu, alpha):
    """Risk ``E(eta_alpha(mu + W) - mu)^2`` of soft thresholding at level alpha.

    Splitting on the three regions of ``mu + W``::

        (1 + a^2) Phi(mu - a) - (a + mu) phi(a - mu)
      + (1 + a^2) Phi(-mu - a) - (a - mu) phi(a + mu)
      + mu^2 [Phi(a - mu) - Phi(-a - mu)]
    """
    mu = _as_float(mu)
    alpha = _as_float(alpha)
    _check_finite(mu, alpha)
    if np.any(alpha < 0):
        raise DomainError("alpha must be non-negative")
    # even in mu; the positive branch keeps the middle term free of cancellation
    mu = np.abs(mu)
    a2 = 1.0 + alpha * alpha
    upper = a2 * 0.5 * erfc((alpha - mu) / _SQRT2) - (alpha + mu) * _INV_SQRT_2PI * np.exp(
        -0.5 * (alpha - mu) ** 2
    )
    lower = a2 * 0.5 * erfc((alpha + mu) / _SQRT2) - (alpha - mu) * _INV_SQRT_2PI * np.exp(
        -0.5 * (alpha + mu) ** 2
    )
    # Phi(a - mu) - Phi(-a - mu), written so that neither term cancels for large |mu|
    inside = 0.5 * erfc((mu - alpha) / _SQRT2) - 0.5 * erfc((mu + alpha) / _SQRT2)
    with np.errstate(invalid="ignore"):
        middle = np.where(inside > 0, mu * mu * inside, 0.0)
    return _unwrap(np.maximum(upper + lower + middle, 0.0))


def tail_risk_curve(alpha, t):
    """Parametric pair ``(P(|t+W| > alpha), E(eta_alpha(t+W) - t)^2)``.

    The second coordinate is a strictly concave function of the first when
    ``t`` runs over ``[0, inf)``; this exposes both for checking that.
    """
    alpha_arr = _as_float(alpha)
    t_arr = _as_float(t)
    if np.any(alpha_arr <= 0):
        raise DomainError("alpha must be positive")
    if np.any(t_arr < 0):
        raise DomainError("t must be non-negative")
    return excess_tail(t_arr, alpha_arr), soft_mse(t_arr, alpha_arr)


# Scalar fast paths for the root finders, which evaluate these thousands of
# times per call and do not need broadcasting.


def phi_(x):
    return _INV_SQRT_2PI * math.exp(-0.5 * x * x)


def Phi_(x):
    return 0.5 * math.erfc(-x / _SQRT2)


def null_risk(alpha):
    """``E eta_alpha(W)^2 = 2(1 + a^2) Phi(-a) - 2 a phi(a)`` as a scalar."""
    return 2.0 * ((1.0 + alpha * alpha) * Phi_(-alpha) - alpha * phi_(alpha))


def soft_mse_(mu, alpha):
    """Scalar ``soft_mse`` without argument checks."""
    mu = abs(mu)
    a2 = 1.0 + alpha * alpha
    d, s = alpha - mu, alpha + mu
    upper = a2 * 0.5 * math.erfc(d / _SQRT2) - s * _INV_SQRT_2PI * math.exp(-0.5 * d * d)
    lower = a2 * 0.5 * math.erfc(s / _SQRT2) + d * -_INV_SQRT_2PI * math.exp(-0.5 * s * s)
    inside = 0.5 * math.erfc(-d / _SQRT2) - 0.5 * math.erfc(s / _SQRT2)
    middle = mu * mu * inside if inside > 0 else 0.0
    return max(upper + lower + middle, 0.0)


def excess_tail_(mu, alpha):
    """Scalar ``excess_tail`` without argument checks."""
    return min(0.5 * math.erfc((alpha - mu) / _SQRT2) + 0.5 * math.erfc((alpha + mu) / _SQRT2), 1.0)
