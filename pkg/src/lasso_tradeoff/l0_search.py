"""Exhaustive best-subset selection with a per-variable penalty.

Minimizes ``||y - X_S b_S||^2 + lam * |S|`` over all subsets with
``|S| <= min(n, p)``.  Subsets are visited depth first in lexicographic
order and each child extends its parent's Cholesky factor by one row, so a
visit costs O(|S|^2).
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

DEFAULT_MAX_P = 20
_SINGULAR_RTOL = 1e-10


@dataclass(frozen=True)
class L0Config:
    lam: float
    max_p: int = DEFAULT_MAX_P

    def __post_init__(self):
        if not (self.lam > 0 and math.isfinite(self.lam)):
            raise DomainError("lambda must be positive")
        if self.max_p < 1:
            raise DomainError("max_p must be positive")


@dataclass(frozen=True)
class L0Result:
    support: tuple
    objective: float
    fdp: float
    tpp: float
    m0: int
    m1: int
    visited: int
    skipped: int
    exact_recovery: bool = False


def l0_penalty_level(sigma, delta, epsilon, c=0.5):
    """Twice the larger of ``2 sigma^2`` and ``sigma^2 delta / (c epsilon)``."""
    if not sigma > 0:
        raise DomainError("sigma must be positive")
    if not 0 < c < 1:
        raise DomainError("c must lie in (0, 1)")
    if not 0 < epsilon < delta:
        raise DomainError("need 0 < epsilon < delta")
    s2 = sigma * sigma
    return 2.0 * max(2.0 * s2, s2 * delta / (c * epsilon))


def subset_objective(X, y, support, lam):
    """``||y - X_S b_S||^2 + lam |S|`` with ``b_S`` the least-squares fit."""
    y = np.asarray(y, dtype=float)
    idx = list(support)
    if not idx:
        return float(y @ y)
    Xs = np.asarray(X)[:, idx]
    coef, *_ = np.linalg.lstsq(Xs, y, rcond=None)
    r = y - Xs @ coef
    return float(r @ r) + lam * len(idx)


def _subtree_size(remaining, depth_left):
    # subsets of `remaining` later indices with at most `depth_left` elements
    return sum(math.comb(remaining, t) for t in range(0, max(depth_left, -1) + 1))


def enumerate_best(X, y, lam, max_size=None):
    """Global minimizer over subsets; returns ``(support, objective, visited, skipped)``."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n, p = X.shape
    cap = min(n, p) if max_size is None else min(max_size, n, p)
    G = (X.T @ X).tolist()
    b = (X.T @ y).tolist()
    yy = float(y @ y)
    tie_tol = 1e-12 * max(yy, 1.0)

    best = [yy, ()]
    counts = [1, 0]  # the empty set is visited first

    def consider(obj, support):
        cur, cur_s = best
        if obj < cur - tie_tol or (
            abs(obj - cur) <= tie_tol and (len(support), support) < (len(cur_s), cur_s)
        ):
            best[0], best[1] = obj, support

    # L holds the Cholesky rows of the current Gram block, w = L^{-1} X_S^T y
    def visit(support, L, w, rss, start):
        size = len(support)
        if size == cap:
            return
        for j in range(start, p):
            Gj = G[j]
            row = []
            for i, Li in enumerate(L):
                acc = Gj[support[i]]
                for m in range(i):
                    acc -= Li[m] * row[m]
                row.append(acc / Li[i])
            d2 = Gj[j] - sum(v * v for v in row)
            if d2 <= _SINGULAR_RTOL * Gj[j] or d2 <= 0.0:
                counts[1] += _subtree_size(p - 1 - j, cap - size - 1)
                continue
            d = math.sqrt(d2)
            row.append(d)
            wj = (b[j] - sum(r_ * w_ for r_, w_ in zip(row, w))) / d
            new_rss = rss - wj * wj
            child = support + (j,)
            counts[0] += 1
            consider(max(new_rss, 0.0) + lam * (size + 1), child)
            visit(child, L + [row], w + [wj], new_rss, j + 1)

    visit((), [], [], yy, 0)
    return best[1], best[0], counts[0], counts[1]


def best_subset(instance, config):
    """Best subset for ``instance`` under ``config``, scored against the true support."""
    if instance.p > config.max_p:
        raise DomainError(f"p = {instance.p} exceeds the enumeration cap of {config.max_p}")
    support, objective, visited, skipped = enumerate_best(instance.X, instance.y, config.lam)
    is_true = instance.beta != 0
    k = int(is_true.sum())
    m1 = sum(1 for j in support if is_true[j])
    m0 = len(support) - m1
    return L0Result(
        support=support,
        objective=objective,
        fdp=m0 / max(len(support), 1),
        tpp=m1 / max(k, 1),
        m0=m0,
        m1=m1,
        visited=visited,
        skipped=skipped,
        exact_recovery=set(support) == set(np.flatnonzero(is_true).tolist()),
    )
