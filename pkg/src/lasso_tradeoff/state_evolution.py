"""State evolution of the Lasso under an iid Gaussian design.

For a discrete prior ``Pi`` the Lasso at penalty ``lam`` behaves like soft
thresholding of ``Pi + tau W`` at level ``alpha tau``, where ``(alpha, tau)``
solve::

    tau^2 = sigma^2 + E(eta_{alpha tau}(Pi + tau W) - Pi)^2 / delta
    lam   = (1 - P(|Pi + tau W| > alpha tau) / delta) * alpha * tau

Predicted false/true discovery rates follow from ``(alpha, tau)``.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .boundary import alpha0, bisect
from .errors import ConvergenceError, DomainError, NonUniqueRootError, OutOfRangeError
from .gauss_core import Phi_, excess_tail, excess_tail_, null_risk, soft_mse, soft_mse_

ALPHA_CAP = 40.0


@dataclass(frozen=True)
class Prior:
    """Finite discrete distribution of a regression coefficient.

    ``atoms`` is a tuple of ``(value, mass)`` pairs.
    """

    atoms: tuple

    def __post_init__(self):
        atoms = tuple((float(v), float(m)) for v, m in self.atoms)
        if not atoms:
            raise DomainError("prior needs at least one atom")
        for v, m in atoms:
            if not math.isfinite(v):
                raise DomainError("atom values must be finite")
            if not m > 0:
                raise DomainError("atom masses must be positive")
        if abs(sum(m for _, m in atoms) - 1.0) > 1e-12:
            raise DomainError("atom masses must sum to one")
        if sum(1 for v, _ in atoms if v == 0.0) > 1:
            raise DomainError("at most one atom may sit at zero")
        object.__setattr__(self, "atoms", atoms)

    @classmethod
    def from_nonzero(cls, pairs):
        """Build from nonzero ``(value, mass)`` pairs; a zero atom takes the rest."""
        pairs = [(float(v), float(m)) for v, m in pairs]
        if any(v == 0.0 for v, _ in pairs):
            raise DomainError("list only nonzero atoms; the zero atom is implicit")
        total = sum(m for _, m in pairs)
        if total > 1.0 + 1e-12:
            raise DomainError(f"nonzero masses sum to {total} > 1")
        rest = 1.0 - total
        atoms = list(pairs)
        if rest > 1e-15:
            atoms.append((0.0, rest))
        return cls(tuple(atoms))

    @classmethod
    def parse(cls, spec):
        """Parse ``"value:mass,value:mass"``; leftover mass goes to an atom at 0."""
        pairs = []
        for chunk in spec.split(","):
            chunk = chunk.strip()
            if not chunk:
                continue
            try:
                v, m = chunk.split(":")
                pairs.append((float(v), float(m)))
            except ValueError as exc:
                raise DomainError(f"bad prior atom {chunk!r}; expected value:mass") from exc
        return cls.from_nonzero(pairs)

    def to_spec(self):
        return ",".join(f"{v:.12g}:{m:.12g}" for v, m in self.atoms if v != 0.0)

    @property
    def values(self):
        return np.array([v for v, _ in self.atoms])

    @property
    def masses(self):
        return np.array([m for _, m in self.atoms])

    @property
    def epsilon(self):
        return float(sum(m for v, m in self.atoms if v != 0.0))

    @property
    def second_moment(self):
        return float(sum(m * v * v for v, m in self.atoms))

    def nonzero(self):
        """Atoms of the conditional law given nonzero, masses renormalized."""
        eps = self.epsilon
        if eps == 0.0:
            raise DomainError("prior has no nonzero atoms")
        return [(v, m / eps) for v, m in self.atoms if v != 0.0]

    def sample(self, rng, size):
        return rng.choice(self.values, size=size, p=self.masses)


@dataclass(frozen=True)
class SEOperatingPoint:
    alpha: float
    tau: float
    lam: float
    fd_inf: float
    td_inf: float
    fdp_inf: float
    tpp_inf: float


def _risk_sum(values, masses, tau, alpha):
    # sum_i m_i soft_mse(v_i / tau, alpha); zero atoms contribute the null risk
    return math.fsum(m * soft_mse_(v / tau, alpha) for v, m in zip(values, masses))


def _check_alpha(alpha, delta):
    floor = max(alpha0(delta), 0.0)
    if not (math.isfinite(alpha) and alpha > floor):
        raise DomainError(f"alpha={alpha} must exceed max(alpha0, 0)={floor}")


def fixed_point_map(prior, delta, sigma, alpha, tau_sq):
    """``F(tau^2) = sigma^2 + E(eta_{alpha tau}(Pi + tau W) - Pi)^2 / delta``."""
    if tau_sq <= 0:
        return sigma * sigma
    tau = math.sqrt(tau_sq)
    values, masses = zip(*prior.atoms)
    return sigma * sigma + tau_sq * _risk_sum(values, masses, tau, alpha) / delta


def solve_tau(prior, delta, sigma, alpha, max_iter=100_000, rtol=1e-12, accelerate=True):
    """Effective noise level ``tau`` at threshold ratio ``alpha``.

    Runs the fixed-point iteration from ``tau0^2 = sigma^2 + E Pi^2 / delta``.
    When ``accelerate`` is set and the iteration contracts slowly (as it does
    near ``alpha0``), the remaining work is handed to bisection on
    ``sigma^2/s + R(sqrt(s))/delta - 1``, which is strictly decreasing in
    ``s = tau^2`` because the risk ``R`` decreases in ``tau``.  With
    ``sigma = 0`` the zero solution is reported only when no positive fixed
    point exists.
    """
    if sigma < 0:
        raise DomainError("sigma must be non-negative")
    if not delta > 0:
        raise DomainError("delta must be positive")
    _check_alpha(alpha, delta)
    values, masses = prior.values.tolist(), prior.masses.tolist()
    scale_sq = prior.second_moment / delta
    s = sigma * sigma + scale_sq
    if s == 0.0:
        return 0.0
    floor_sq = (1e-9) ** 2 * scale_sq
    sig2 = sigma * sigma
    prev_step = None
    for it in range(max_iter):
        s_new = sig2 + s * _risk_sum(values, masses, math.sqrt(s), alpha) / delta
        step = abs(s_new - s)
        if step <= rtol * s_new:
            return math.sqrt(s_new)
        if sigma == 0.0 and s_new < floor_sq:
            return _noiseless_tau(values, masses, delta, alpha, probe=math.sqrt(s_new))
        if accelerate and it >= 200 and prev_step and step > 0.98 * prev_step:
            return _bisect_tau(values, masses, delta, sigma, alpha, s_new)
        prev_step = step
        s = s_new
    raise ConvergenceError(
        f"tau iteration did not converge in {max_iter} steps", last=math.sqrt(s), violation=step
    )


def _noiseless_tau(values, masses, delta, alpha, probe):
    # positive root of R(tau) = delta, if any; R decreases from its tau -> 0 limit
    eps = math.fsum(m for v, m in zip(values, masses) if v != 0.0)
    small_tau_limit = (1.0 - eps) * null_risk(alpha) + eps * (1.0 + alpha * alpha)
    if small_tau_limit <= delta:
        return 0.0

    def f(tau):
        return _risk_sum(values, masses, tau, alpha) / delta - 1.0

    lo = probe if probe > 0 else 1.0
    while f(lo) <= 0:
        lo *= 0.5
        if lo < 1e-300:
            return 0.0
    hi = lo
    while f(hi) > 0:
        hi *= 2.0
    tau, _ = bisect(f, lo, hi)
    return tau


def _bisect_tau(values, masses, delta, sigma, alpha, s_guess):
    sig2 = sigma * sigma
    if sig2 == 0.0:
        return _noiseless_tau(values, masses, delta, alpha, probe=math.sqrt(s_guess))

    def f(s):
        return sig2 / s + _risk_sum(values, masses, math.sqrt(s), alpha) / delta - 1.0

    lo = hi = s_guess
    while f(lo) <= 0:
        lo *= 0.5
    while f(hi) > 0:
        hi *= 2.0
    s, _ = bisect(f, lo, hi)
    return math.sqrt(s)


def _point(prior, delta, sigma, alpha, tau):
    eps = prior.epsilon
    fd = 2.0 * (1.0 - eps) * Phi_(-alpha)
    if tau > 0:
        frac = math.fsum(m * excess_tail_(v / tau, alpha) for v, m in prior.atoms)
        td = math.fsum(m * excess_tail_(v / tau, alpha) for v, m in prior.atoms if v != 0.0)
        lam = (1.0 - frac / delta) * alpha * tau
    else:
        td = eps
        lam = 0.0
    tpp = td / eps if eps > 0 else 0.0
    fdp = fd / (fd + td) if fd + td > 0 else 0.0
    return SEOperatingPoint(alpha=alpha, tau=tau, lam=lam, fd_inf=fd, td_inf=td, fdp_inf=fdp, tpp_inf=tpp)


def operating_point(prior, delta, sigma, alpha):
    """Solve for ``tau`` at ``alpha`` and fill in the predicted rates."""
    tau = solve_tau(prior, delta, sigma, alpha)
    return _point(prior, delta, sigma, alpha, tau)


def lambda_of_alpha(prior, delta, sigma, alpha):
    return operating_point(prior, delta, sigma, alpha).lam


def _alpha_scan_grid(lo, num=48):
    # dense next to the lower end where lambda(alpha) moves fastest
    offsets = np.geomspace(1e-6, ALPHA_CAP - lo, num)
    return np.concatenate(([lo], lo + offsets[offsets < ALPHA_CAP - lo], [ALPHA_CAP]))


def solve_lambda_roots(prior, delta, sigma, lam, scan=48):
    """All operating points with penalty ``lam`` found by scan plus bisection."""
    if not lam > 0:
        raise DomainError("lambda must be positive")
    if prior.epsilon == 0.0:
        raise DomainError("prior has no signal")
    lo = max(alpha0(delta), 0.0) + 1e-8
    grid = np.unique(_alpha_scan_grid(lo, scan))
    lams = np.array([lambda_of_alpha(prior, delta, sigma, float(a)) for a in grid])
    resid = lams - lam
    tol = 1e-9 * max(1.0, lam)

    def f(a):
        return lambda_of_alpha(prior, delta, sigma, a) - lam

    roots = []
    for i in range(len(grid) - 1):
        r0, r1 = resid[i], resid[i + 1]
        if r0 == 0.0:
            roots.append(float(grid[i]))
        elif (r0 < 0) != (r1 < 0) and r1 != 0.0:
            a, fa = bisect(f, float(grid[i]), float(grid[i + 1]), flo=r0, fhi=r1)
            if abs(fa) > tol:
                raise ConvergenceError(
                    f"lambda residual {fa:g} above tolerance at alpha={a}", last=a, violation=abs(fa)
                )
            roots.append(a)
    if resid[-1] == 0.0:
        roots.append(float(grid[-1]))
    if not roots:
        finite = lams[np.isfinite(lams)]
        raise OutOfRangeError(
            f"lambda={lam} not attained for alpha in ({lo}, {ALPHA_CAP}]",
            interval=(float(finite.min()), float(finite.max())),
        )
    return [operating_point(prior, delta, sigma, a) for a in roots]


def solve_lambda_point(prior, delta, sigma, lam):
    """Operating point ``(alpha, tau)`` and predicted rates at penalty ``lam``.

    ``sigma = 0`` is solved directly: the noiseless system is homogeneous in
    ``tau`` and its positive solution is the small-noise limit.  Raises
    :class:`NonUniqueRootError` if the scan finds several roots.
    """
    roots = solve_lambda_roots(prior, delta, sigma, lam)
    if len(roots) > 1:
        raise NonUniqueRootError(f"{len(roots)} roots of lambda(alpha) = {lam}", roots)
    return roots[0]


def sweep_alpha(prior, delta, sigma, alpha_grid, skipped=None):
    """Operating points over a grid of ``alpha``; traces the curve ``q^Pi``.

    Points whose solve fails, or whose implied penalty is not positive, are
    left out; ``(alpha, reason)`` is appended to ``skipped`` when given and a
    warning is emitted otherwise.
    """
    if prior.epsilon == 0.0:
        raise DomainError("prior has no signal")
    out = []
    for alpha in alpha_grid:
        alpha = float(alpha)
        try:
            pt = operating_point(prior, delta, sigma, alpha)
        except (DomainError, ConvergenceError) as exc:
            reason = str(exc)
        else:
            if pt.tau > 0 and pt.lam > 0:
                out.append(pt)
                continue
            reason = "no positive tau" if pt.tau <= 0 else f"lambda={pt.lam:.6g} not positive"
        if skipped is not None:
            skipped.append((alpha, reason))
        else:
            warnings.warn(f"alpha={alpha}: {reason}", stacklevel=2)
    return out


def default_alpha_grid(delta, num=200, hi=12.0):
    """Grid of thresholds from just above ``max(alpha0, 0)`` up to ``hi``."""
    from .gauss_core import ScalarGrid

    lo = max(alpha0(delta), 0.0)
    return ScalarGrid(tuple(lo + np.geomspace(1e-3, hi - lo, num)))


def effective_epsilon_prime(prior, alpha, tau):
    """Fraction of effectively infinite signals matching the detection rate.

    Solves ``P(|Pi*/tau + W| > alpha) = (1 - e') P(|W| > alpha) + e'`` for
    ``e'``, clamped to ``[0, 1]``.
    """
    if not tau > 0:
        raise DomainError("tau must be positive")
    if alpha == 0:
        raise DomainError("alpha = 0 leaves e' undefined")
    base = 2.0 * Phi_(-alpha)
    pbar = sum(m * float(excess_tail(abs(v) / tau, alpha)) for v, m in prior.nonzero())
    return min(1.0, max(0.0, (pbar - base) / (1.0 - base)))


def sharpness_prior(epsilon, epsilon_prime, M, weak=None):
    """Three-atom prior mixing strong (``M``) and weak (``weak``, default 1/M) effects."""
    if not 0.0 < epsilon < 1.0:
        raise DomainError("epsilon must lie in (0, 1)")
    if not 0.0 < epsilon_prime <= 1.0:
        raise DomainError("epsilon_prime must lie in (0, 1]")
    if not M > 1.0:
        raise DomainError("M must exceed 1")
    weak = 1.0 / M if weak is None else float(weak)
    if not weak > 0:
        raise DomainError("weak effect must be positive")
    atoms = [(float(M), epsilon * epsilon_prime)]
    if epsilon_prime < 1.0:
        atoms.append((weak, epsilon * (1.0 - epsilon_prime)))
    atoms.append((0.0, 1.0 - epsilon))
    return Prior(tuple(atoms))


def risk_components(prior, alpha, tau):
    """``(E eta_alpha(W)^2, E(eta_alpha(pi*+W) - pi*)^2, P(|pi*+W| > alpha))``.

    ``pi* = Pi*/tau`` is the standardized nonzero part; these feed the
    feasibility and Jensen checks.
    """
    nz = prior.nonzero()
    risk = sum(m * float(soft_mse(v / tau, alpha)) for v, m in nz)
    tail = sum(m * float(excess_tail(v / tau, alpha)) for v, m in nz)
    return null_risk(alpha), risk, tail
