"""Analytical quantities of the Lasso TPP/FDP trade-off diagram.

Everything here is a scalar computation driven by bisection.  The equations
are monotone on the branches that matter, so bisection with a geometrically
grown bracket is used throughout and run to (near) machine precision.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, OutOfRangeError
from .gauss_core import Phi_, phi_

_MAX_BISECT = 2100


@dataclass(frozen=True)
class ProblemShape:
    """Limiting aspect ratio ``delta = n/p`` and sparsity ``epsilon = k/p``."""

    delta: float
    epsilon: float

    def __post_init__(self):
        if not (math.isfinite(self.delta) and self.delta > 0):
            raise DomainError(f"delta must be positive, got {self.delta}")
        if not (0.0 < self.epsilon < 1.0):
            raise DomainError(f"epsilon must lie in (0, 1), got {self.epsilon}")


@dataclass(frozen=True)
class BoundarySample:
    u: float
    t_star: float
    q_star: float


@dataclass(frozen=True)
class PhasePoint:
    """A point ``(delta, eps_star)`` on the phase-transition curve and its parameter."""

    delta: float
    eps_star: float
    t_param: float


def bisect(f, lo, hi, flo=None, fhi=None, xtol=0.0, max_iter=_MAX_BISECT):
    """Root of ``f`` in ``[lo, hi]`` given a sign change; returns ``(x, f(x))``.

    Runs until the bracket width drops to ``xtol`` or stops shrinking in
    floating point.
    """
    flo = f(lo) if flo is None else flo
    fhi = f(hi) if fhi is None else fhi
    if flo == 0.0:
        return lo, flo
    if fhi == 0.0:
        return hi, fhi
    if (flo > 0) == (fhi > 0):
        raise DomainError(f"no sign change on [{lo}, {hi}]")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi or hi - lo <= xtol:
            break
        fmid = f(mid)
        if fmid == 0.0:
            return mid, fmid
        if (fmid > 0) == (flo > 0):
            lo, flo = mid, fmid
        else:
            hi, fhi = mid, fmid
    if abs(flo) <= abs(fhi):
        return lo, flo
    return hi, fhi


def _grow_upper(f, start, want_positive=True, factor=2.0, limit=1e300):
    """Smallest ``start * factor**k`` at which ``f`` has the requested sign."""
    x = start
    while x < limit:
        v = f(x)
        if (v > 0) == want_positive:
            return x, v
        x *= factor
    raise DomainError("bracket growth failed")


def _null_half_risk(t):
    # (1 + t^2) Phi(-t) - t phi(t), i.e. half the risk of soft thresholding pure noise
    if t > 40.0:
        return 0.0
    return (1.0 + t * t) * Phi_(-t) - t * phi_(t)


def alpha0(shape_or_delta):
    """Root of ``(1 + t^2) Phi(-t) - t phi(t) = delta/2``, clamped at 0.

    The left side equals 1/2 at ``t = 0`` and decreases in ``t``, so the root
    is non-negative exactly when ``delta <= 1``.
    """
    delta = getattr(shape_or_delta, "delta", shape_or_delta)
    if not (math.isfinite(delta) and delta > 0):
        raise DomainError("delta must be positive")
    if delta >= 1.0:
        return 0.0
    target = 0.5 * delta

    def f(t):
        return _null_half_risk(t) - target

    hi, fhi = _grow_upper(f, 1.0, want_positive=False)
    root, _ = bisect(f, 0.0, hi, flo=f(0.0), fhi=fhi)
    return root


def _phase_delta(t):
    erf_half = 1.0 - 2.0 * Phi_(-t)
    return 2.0 * phi_(t) / (2.0 * phi_(t) + t * erf_half)


def _phase_eps(t):
    erf_half = 1.0 - 2.0 * Phi_(-t)
    return (2.0 * phi_(t) - 2.0 * t * Phi_(-t)) / (2.0 * phi_(t) + t * erf_half)


def phase_point(delta):
    """Solve the parametric phase-transition map for the given ``delta < 1``."""
    if not (0.0 < delta < 1.0):
        raise DomainError(f"phase transition defined for delta in (0, 1), got {delta}")

    def f(t):
        return _phase_delta(t) - delta

    hi, fhi = _grow_upper(f, 1.0, want_positive=False)
    t, _ = bisect(f, 0.0, hi, flo=1.0 - delta, fhi=fhi)
    return PhasePoint(delta=delta, eps_star=_phase_eps(t), t_param=t)


def epsilon_star(delta):
    """Donoho-Tanner sparsity level for undersampling ratio ``delta`` in (0, 1)."""
    return phase_point(delta).eps_star


def u_star(shape):
    """Supremum of the attainable asymptotic TPP."""
    if shape.delta >= 1.0:
        return 1.0
    eps_s = epsilon_star(shape.delta)
    eps = shape.epsilon
    if eps <= eps_s:
        return 1.0
    return 1.0 - (1.0 - shape.delta) * (eps - eps_s) / (eps * (1.0 - eps_s))


def _zeta_max(shape):
    if shape.delta >= 1.0:
        return 1.0
    return min(1.0, epsilon_star(shape.delta) / shape.epsilon)


def mixture_equation(t, e, delta):
    """``2(1-e)[(1+t^2)Phi(-t) - t phi(t)] + e(1+t^2) - delta``."""
    return 2.0 * (1.0 - e) * _null_half_risk(t) + e * (1.0 + t * t) - delta


def _mixture_slope(t, e):
    if t > 40.0:
        return 2.0 * e * t
    return 4.0 * (1.0 - e) * (t * Phi_(-t) - phi_(t)) + 2.0 * e * t


def larger_root(e, delta):
    """Larger positive root of ``mixture_equation(., e, delta) = 0``.

    The function decreases up to a unique critical point and increases
    afterwards, so the larger root is bisected on the increasing branch.
    Returns ``None`` when there is no positive root.
    """
    if e <= 0:
        return math.inf

    def slope(t):
        return _mixture_slope(t, e)

    hi, shi = _grow_upper(slope, 1.0)
    t_min, _ = bisect(slope, 0.0, hi, flo=slope(0.0), fhi=shi)

    def g(t):
        return mixture_equation(t, e, delta)

    g_min = g(t_min)
    if g_min > 0:
        # tangency is only reachable in the limit; tolerate rounding there
        if g_min <= 1e-12 * max(1.0, delta):
            return t_min
        return None
    hi, ghi = _grow_upper(g, max(2.0 * t_min, 1.0))
    root, _ = bisect(g, t_min, hi, flo=g_min, fhi=ghi)
    return root


def _tpp_of_zeta(zeta, shape):
    t = larger_root(shape.epsilon * zeta, shape.delta)
    if t is None:
        raise DomainError(f"no root at zeta={zeta} for {shape}")
    return 2.0 * (1.0 - zeta) * Phi_(-t) + zeta, t


def root_equation_residual(t, u, shape):
    """Difference of the two sides of the equation defining ``t*(u)``."""
    eps, delta = shape.epsilon, shape.delta
    tail = 1.0 - 2.0 * Phi_(-t)
    lhs = (2.0 * (1.0 - eps) * _null_half_risk(t) + eps * (1.0 + t * t) - delta) / (
        eps * ((1.0 + t * t) * tail + 2.0 * t * phi_(t))
    )
    return lhs - (1.0 - u) / tail


def _check_u(u, shape):
    if not math.isfinite(u) or u < 0:
        raise DomainError(f"u must be a finite non-negative number, got {u}")
    cap = u_star(shape)
    if u >= cap:
        raise OutOfRangeError(f"u={u} is not below u*={cap}", interval=(0.0, cap))


def t_star(u, shape):
    """Largest positive root ``t*(u)`` of the boundary equation; ``inf`` at ``u = 0``.

    Parametrized by the effective strong-signal fraction ``zeta``: the larger
    root ``t(zeta)`` of the mixture equation is decreasing in ``zeta`` and
    ``2(1-zeta) Phi(-t(zeta)) + zeta`` increases from 0 to ``u*``, so ``zeta``
    is bisected until that map hits ``u``.
    """
    _check_u(u, shape)
    if u == 0.0:
        return math.inf
    return _solve_zeta(u, shape)[1]


def _solve_zeta(u, shape):
    zmax = _zeta_max(shape)
    lo, hi = 0.0, zmax
    t_hi = None
    for _ in range(_MAX_BISECT):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        h, t = _tpp_of_zeta(mid, shape)
        if h < u:
            lo = mid
        else:
            hi, t_hi = mid, t
    if t_hi is None:
        t_hi = larger_root(shape.epsilon * hi, shape.delta)
    return hi, t_hi


def q_star(u, shape):
    """Boundary FDP ``q*(u; delta, epsilon)``; zero at ``u = 0`` by convention."""
    t = t_star(u, shape)
    if u == 0.0:
        return 0.0
    null = 2.0 * (1.0 - shape.epsilon) * Phi_(-t)
    return null / (null + shape.epsilon * u)


def boundary_endpoint(shape):
    """Limit ``(u*, t*(u*), q*(u*))`` at the open right end of the domain."""
    zmax = _zeta_max(shape)
    t = larger_root(shape.epsilon * zmax, shape.delta)
    cap = u_star(shape)
    null = 2.0 * (1.0 - shape.epsilon) * Phi_(-t)
    return BoundarySample(u=cap, t_star=t, q_star=null / (null + shape.epsilon * cap))


def sample_boundary(shape, n_points):
    """``n_points`` boundary samples on a uniform grid of ``[0, u*)``.

    The grid runs from 0 to just below ``u*`` (relative gap 1e-9), so with
    two points the samples sit at 0 and next to ``u*``.
    """
    if n_points < 2:
        raise DomainError("n_points must be at least 2")
    cap = u_star(shape)
    us = np.linspace(0.0, cap, n_points)
    us[-1] = cap * (1.0 - 1e-9)
    out = []
    for u in us:
        u = float(u)
        t = t_star(u, shape)
        out.append(BoundarySample(u=u, t_star=t, q_star=_q_from_t(u, t, shape)))
    return out


def _q_from_t(u, t, shape):
    if u == 0.0:
        return 0.0
    null = 2.0 * (1.0 - shape.epsilon) * Phi_(-t)
    return null / (null + shape.epsilon * u)


def q_star_many(us, shape):
    """Vector of ``q*`` values; convenience for dominance scans."""
    return np.array([q_star(float(u), shape) for u in us])


def touch_point(strong_fraction, shape):
    """Boundary point approached by priors with this fraction of strong effects.

    With a fraction ``strong_fraction`` of infinitely strong and the rest
    infinitesimal effects, the instance curve meets ``q*`` at
    ``u = 2(1 - e') Phi(-t) + e'`` where ``t`` is the larger root of the
    mixture equation at ``epsilon * e'``.
    """
    zmax = _zeta_max(shape)
    if not 0.0 < strong_fraction < zmax:
        raise DomainError(f"strong fraction must lie in (0, {zmax})")
    u, t = _tpp_of_zeta(strong_fraction, shape)
    return BoundarySample(u=u, t_star=t, q_star=_q_from_t(u, t, shape))
