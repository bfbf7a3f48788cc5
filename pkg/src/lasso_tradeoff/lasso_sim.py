"""Synthetic Gaussian-design instances and Lasso paths by coordinate descent.

The solver minimizes ``0.5 * ||y - X b||^2 + lam * ||b||_1`` with cyclic
coordinate descent on an active set, and only returns a solution after a full
KKT check over all ``p`` coordinates.  The inner sweeps run in the compiled
kernel when it is available (see ``kernels``).
"""

import math
import os
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import ConvergenceError, DomainError, ResourceError

RNG_NAME = "numpy Philox"
TOL_KKT = 1e-6
MAX_SWEEPS = 50_000
DEFAULT_MAX_CELLS = 60_000_000
_MAX_OUTER = 200
_MAX_REFINE_DEPTH = 40


def max_cells():
    """Largest ``n * p`` that ``gen_instance`` will allocate."""
    raw = os.environ.get("LASSO_TRADEOFF_MAX_CELLS")
    return int(float(raw)) if raw else DEFAULT_MAX_CELLS


def check_cells(n, p):
    cap = max_cells()
    if n * p > cap:
        raise ResourceError(f"n*p = {n * p} exceeds the cap of {cap} cells")


def make_rng(seed):
    return np.random.Generator(np.random.Philox(int(seed)))


@dataclass(frozen=True, eq=False)
class DesignInstance:
    """``y = X beta + z`` with Gaussian ``X`` stored column-major."""

    n: int
    p: int
    X: np.ndarray
    beta: np.ndarray
    z: np.ndarray
    y: np.ndarray
    seed: int
    sigma: float

    @property
    def true_support(self):
        return np.flatnonzero(self.beta)

    @property
    def k(self):
        return int(np.count_nonzero(self.beta))


def fixed_signal(p, k, magnitude):
    """Coefficient vector whose first ``k`` entries equal ``magnitude``."""
    if not 0 <= k <= p:
        raise DomainError("need 0 <= k <= p")
    beta = np.zeros(p)
    beta[:k] = magnitude
    return beta


def gen_instance(n, p, prior, sigma, seed, unit_variance=False):
    """Draw ``X``, then ``beta`` from ``prior``, then ``z``, from one Philox stream.

    ``prior`` is either a ``Prior`` or a fixed length-``p`` coefficient
    vector.  Entries of ``X`` are N(0, 1/n) so columns have roughly unit
    norm; with ``unit_variance=True`` they are N(0, 1) instead.
    """
    n, p = int(n), int(p)
    if n < 1 or p < 1:
        raise DomainError("n and p must be positive")
    if not (math.isfinite(sigma) and sigma >= 0):
        raise DomainError("sigma must be a non-negative number")
    check_cells(n, p)
    rng = make_rng(seed)
    # drawing the transpose row by row gives a Fortran-ordered X
    X = rng.standard_normal((p, n)).T
    if not unit_variance:
        X *= 1.0 / math.sqrt(n)
    if hasattr(prior, "sample"):
        beta = prior.sample(rng, p)
    else:
        beta = np.array(prior, dtype=float)
        if beta.shape != (p,):
            raise DomainError(f"coefficient vector must have length {p}")
    z = sigma * rng.standard_normal(n)
    y = X @ beta + z
    return DesignInstance(n=n, p=p, X=X, beta=beta, z=z, y=y, seed=int(seed), sigma=float(sigma))


def lasso_objective(X, y, beta, lam):
    r = y - X @ beta
    return 0.5 * float(r @ r) + lam * float(np.abs(beta).sum())


def kkt_violation(X, y, beta, lam):
    """Largest KKT violation relative to ``lam``; zero at an exact solution."""
    c = X.T @ (y - X @ beta)
    on = beta != 0
    off_viol = np.max(np.abs(c[~on]) - lam, initial=0.0)
    on_viol = np.max(np.abs(c[on] - lam * np.sign(beta[on])), initial=0.0)
    return max(off_viol, on_viol) / lam


def _col_sq(X):
    return np.einsum("ij,ij->j", X, X)


def solve_lasso(X, y, lam, warm_start=None, tol=None, max_sweeps=MAX_SWEEPS, col_sq=None, backend=None):
    """Lasso solution at a single ``lam`` certified to ``TOL_KKT``.

    ``tol`` bounds the largest coefficient move in the final sweep and
    defaults to ``1e-9 * max(1, ||y||_inf)``.
    """
    if not (lam > 0 and math.isfinite(lam)):
        raise DomainError("lambda must be positive")
    X = np.asfortranarray(X, dtype=float)
    y = np.ascontiguousarray(y, dtype=float)
    n, p = X.shape
    if tol is None:
        tol = 1e-9 * max(1.0, float(np.max(np.abs(y), initial=0.0)))
    if tol <= 0:
        raise DomainError("tol must be positive")
    sweeps_fn = backend or kernels.cd_sweeps
    if col_sq is None:
        col_sq = _col_sq(X)
    beta = np.zeros(p) if warm_start is None else np.array(warm_start, dtype=float)
    r = y - X @ beta
    used = 0
    step_tol = tol
    violation = math.inf
    for _ in range(_MAX_OUTER):
        c = X.T @ r
        active = np.flatnonzero((beta != 0) | (np.abs(c) > lam))
        if active.size:
            sweeps, _ = sweeps_fn(X, r, beta, col_sq, active.astype(np.int64), lam, step_tol, max_sweeps - used)
            used += sweeps
        # refresh the residual so drift from many axpy updates cannot mask a violation
        r = y - X @ beta
        c = X.T @ r
        on = beta != 0
        off_viol = np.max(np.abs(c[~on]) - lam, initial=0.0)
        on_viol = np.max(np.abs(c[on] - lam * np.sign(beta[on])), initial=0.0)
        violation = max(off_viol, on_viol) / lam
        if violation <= TOL_KKT:
            return beta
        if used >= max_sweeps:
            break
        if off_viol / lam <= TOL_KKT:
            # the active set is right but the sweeps stopped short; tighten
            step_tol *= 0.1
    raise ConvergenceError(
        f"coordinate descent did not certify after {used} sweeps", last=beta, violation=violation
    )


def lasso_at(instance, lam, warm_start=None, tol=None, max_sweeps=MAX_SWEEPS):
    """Lasso coefficients for ``instance`` at penalty ``lam``."""
    return solve_lasso(instance.X, instance.y, lam, warm_start=warm_start, tol=tol, max_sweeps=max_sweeps)


@dataclass(frozen=True)
class PathRecord:
    lam: float
    support: tuple
    V: int
    T: int
    fdp: float
    tpp: float
    coef: np.ndarray = field(default=None, repr=False, compare=False)

    @property
    def size(self):
        return self.V + self.T


@dataclass(frozen=True)
class PathTrace:
    """Records ordered by decreasing ``lam`` and the order of first entry."""

    records: tuple
    entry_order: tuple
    true_support: tuple
    p: int

    @property
    def k(self):
        return len(self.true_support)

    @property
    def lambdas(self):
        return np.array([rec.lam for rec in self.records])


@dataclass(frozen=True)
class PathEvents:
    """Summary events of one path.

    ``fdp_at_full_power`` is ``None`` when TPP never reaches one on the grid,
    and ``rank_first_false`` is ``len(entry_order) + 1`` when no null enters.
    """

    tpp_at_first_false: float
    fdp_at_full_power: float
    rank_first_false: int
    perfect_recovery: bool


def lambda_max(instance):
    return float(np.max(np.abs(instance.X.T @ instance.y), initial=0.0))


def default_grid(instance, num=100, ratio=0.01):
    hi = lambda_max(instance)
    if hi <= 0:
        raise DomainError("X^T y vanishes; the path is identically zero")
    return np.geomspace(hi, hi * ratio, num)


def _make_record(lam, beta, is_true, k):
    support = np.flatnonzero(beta)
    T = int(np.count_nonzero(is_true[support]))
    V = int(support.size - T)
    return PathRecord(
        lam=float(lam),
        support=tuple(int(j) for j in support),
        V=V,
        T=T,
        fdp=V / max(V + T, 1),
        tpp=T / max(k, 1),
        coef=beta,
    )


class _PathSolver:
    def __init__(self, instance, tol, backend):
        self.X = np.asfortranarray(instance.X)
        self.y = instance.y
        self.col_sq = _col_sq(self.X)
        self.tol = tol
        self.backend = backend

    def __call__(self, lam, warm):
        return solve_lasso(
            self.X, self.y, lam, warm_start=warm, tol=self.tol, col_sq=self.col_sq, backend=self.backend
        )


def _jump(a, b):
    return np.count_nonzero((a != 0) != (b != 0))


def _refine(solve, lam_a, beta_a, lam_b, beta_b, max_jump, depth=0):
    """Solutions strictly between ``lam_a > lam_b``, in decreasing order."""
    if _jump(beta_a, beta_b) <= max_jump or depth >= _MAX_REFINE_DEPTH:
        return []
    mid = math.sqrt(lam_a * lam_b)
    if not lam_b < mid < lam_a:
        return []
    beta_m = solve(mid, beta_a)
    left = _refine(solve, lam_a, beta_a, mid, beta_m, max_jump, depth + 1)
    right = _refine(solve, mid, beta_m, lam_b, beta_b, max_jump, depth + 1)
    return left + [(mid, beta_m)] + right


def _entry_order(records):
    seen = set()
    order = []
    for rec in records:
        new = [j for j in rec.support if j not in seen]
        # several entries in one step: larger coefficients are taken to have entered first
        new.sort(key=lambda j: (-abs(rec.coef[j]), j))
        order.extend(new)
        seen.update(new)
    return tuple(order)


def lasso_path(
    instance,
    lambda_grid=None,
    max_jump=5,
    until_full_power=False,
    tol=None,
    keep_coef=False,
    backend=None,
):
    """Warm-started path over a decreasing grid.

    Grid intervals where the support changes by more than ``max_jump``
    variables are bisected in log-lambda (``max_jump=None`` disables this).
    With ``until_full_power`` the path stops at the first solution containing
    every true signal, continuing the grid geometrically past its last point
    if needed (until the support saturates).
    """
    grid = default_grid(instance) if lambda_grid is None else np.asarray(lambda_grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise DomainError("lambda grid must be a non-empty 1-d sequence")
    if np.any(grid <= 0) or (grid.size > 1 and np.any(np.diff(grid) >= 0)):
        raise DomainError("lambda grid must be positive and strictly decreasing")
    solve = _PathSolver(instance, tol, backend)
    is_true = instance.beta != 0
    k = int(is_true.sum())

    sols = []
    warm = None
    for lam in grid:
        warm = solve(float(lam), warm)
        sols.append((float(lam), warm))
        if until_full_power and k > 0 and np.all(warm[is_true] != 0):
            break

    if until_full_power and k > 0:
        step = grid[-1] / grid[-2] if grid.size > 1 else 0.5
        cap = min(instance.n, instance.p)
        lam, beta = sols[-1]
        while not np.all(beta[is_true] != 0) and np.count_nonzero(beta) < cap and lam > grid[0] * 1e-8:
            lam *= step
            beta = solve(lam, beta)
            sols.append((lam, beta))

    if max_jump is not None:
        refined = [sols[0]]
        for (la, ba), (lb, bb) in zip(sols, sols[1:]):
            refined.extend(_refine(solve, la, ba, lb, bb, max_jump))
            refined.append((lb, bb))
        sols = refined

    records = [_make_record(lam, beta, is_true, k) for lam, beta in sols]
    order = _entry_order(records)
    if not keep_coef:
        records = [PathRecord(r.lam, r.support, r.V, r.T, r.fdp, r.tpp) for r in records]
    return PathTrace(
        records=tuple(records),
        entry_order=order,
        true_support=tuple(int(j) for j in np.flatnonzero(is_true)),
        p=instance.p,
    )


def path_events(trace, k=None):
    if not trace.records:
        raise DomainError("trace has no records")
    k = trace.k if k is None else int(k)
    tpp_first_false = None
    fdp_full = None
    for rec in trace.records:
        if tpp_first_false is None and rec.V > 0:
            tpp_first_false = rec.tpp
        if fdp_full is None and k > 0 and rec.T >= k:
            fdp_full = rec.fdp
    if tpp_first_false is None:
        tpp_first_false = trace.records[-1].tpp
    true = set(trace.true_support)
    rank = len(trace.entry_order) + 1
    for pos, j in enumerate(trace.entry_order, start=1):
        if j not in true:
            rank = pos
            break
    return PathEvents(
        tpp_at_first_false=tpp_first_false,
        fdp_at_full_power=fdp_full,
        rank_first_false=rank,
        perfect_recovery=rank > k,
    )


def _rank_desc(values, index):
    order = np.lexsort((index, -np.abs(values)))
    return [int(index[i]) for i in order]


def ls_ordering(instance, restrict_to=None):
    """Variables ranked by the magnitude of their least-squares coefficient."""
    X = instance.X
    if restrict_to is None:
        idx = np.arange(instance.p)
        if instance.n <= instance.p:
            raise DomainError("least squares on the full design needs n > p")
    else:
        idx = np.asarray(sorted(set(int(j) for j in restrict_to)), dtype=np.int64)
        if idx.size > instance.n:
            raise DomainError("restricted model has more variables than observations")
    Xs = X[:, idx]
    coef, _, rank, _ = np.linalg.lstsq(Xs, instance.y, rcond=None)
    if rank < idx.size:
        raise np.linalg.LinAlgError(f"design is rank deficient ({rank} < {idx.size})")
    return _rank_desc(coef, idx)


def marginal_ordering(instance):
    """Variables ranked by ``|X_j^T y|``."""
    return _rank_desc(instance.X.T @ instance.y, np.arange(instance.p))


def empirical_vs_se(trace, se_points):
    """``(sup |V/p - fd|, sup |T/p - td|)`` over trace lambdas inside the curve's range.

    ``se_points`` are state-evolution operating points; their ``fd_inf`` and
    ``td_inf`` are interpolated linearly in lambda.
    """
    pts = sorted(se_points, key=lambda s: s.lam)
    if not pts:
        raise DomainError("empty state-evolution curve")
    lam_se = np.array([s.lam for s in pts])
    fd = np.array([s.fd_inf for s in pts])
    td = np.array([s.td_inf for s in pts])
    lams = trace.lambdas
    inside = (lams >= lam_se[0]) & (lams <= lam_se[-1])
    if not np.any(inside):
        raise DomainError("trace and state-evolution curve share no lambda range")
    recs = [r for r, keep in zip(trace.records, inside) if keep]
    lam_in = lams[inside]
    v = np.array([r.V for r in recs]) / trace.p
    t = np.array([r.T for r in recs]) / trace.p
    dev_fd = float(np.max(np.abs(v - np.interp(lam_in, lam_se, fd))))
    dev_td = float(np.max(np.abs(t - np.interp(lam_in, lam_se, td))))
    return dev_fd, dev_td
