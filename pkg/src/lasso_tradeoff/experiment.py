"""Replicate runners and CSV writers shared by the command line and the tests.

Replicate ``r`` of a run with base seed ``s`` draws its instance from seed
``s + r``.  Runs may be spread over worker processes; results are always
assembled in replicate order so the output does not depend on the job count.
"""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .errors import DomainError
from .l0_search import L0Config, best_subset, l0_penalty_level
from .lasso_sim import RNG_NAME, fixed_signal, gen_instance, lambda_max, lasso_path, path_events

TRACE_COLUMNS = ("rep", "lambda", "support_size", "V", "T", "tpp", "fdp")
EVENT_COLUMNS = ("rep", "tpp_at_first_false", "fdp_at_full_power", "rank_first_false", "perfect_recovery")
L0_COLUMNS = ("rep", "support_size", "m0", "m1", "objective", "tpp", "fdp")
NEVER = "never"


def fmt(x):
    """Values as written to CSV: 12 significant digits, ``never`` for missing."""
    if x is None:
        return NEVER
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".12g")


@dataclass(frozen=True)
class GridSpec:
    """``log:hi:lo:count`` or an explicit comma list of lambdas.

    ``hi`` may be ``auto`` (``||X^T y||_inf``) and ``lo`` ``auto/<d>``.
    """

    text: str = "log:auto:auto/100:100"

    def __post_init__(self):
        self.resolve(1.0)

    def resolve(self, lam_max):
        text = self.text.strip()
        if text.startswith("log:"):
            parts = text.split(":")
            if len(parts) != 4:
                raise DomainError(f"bad grid spec {text!r}")
            hi = _grid_end(parts[1], lam_max)
            lo = _grid_end(parts[2], lam_max)
            num = int(parts[3])
            if num < 1 or not (hi > lo > 0) and num > 1:
                raise DomainError(f"bad grid spec {text!r}")
            return np.geomspace(hi, lo, num) if num > 1 else np.array([hi])
        try:
            grid = np.array([float(v) for v in text.split(",")])
        except ValueError as exc:
            raise DomainError(f"bad grid spec {text!r}") from exc
        if np.any(grid <= 0) or np.any(np.diff(grid) >= 0):
            raise DomainError("explicit grid must be positive and strictly decreasing")
        return grid


def _grid_end(token, lam_max):
    if token == "auto":
        return lam_max
    if token.startswith("auto/"):
        return lam_max / float(token[5:])
    return float(token)


@dataclass(frozen=True)
class SignalSpec:
    """Either a prior (``value:mass`` pairs) or ``k`` fixed coefficients of one magnitude."""

    prior: object = None
    k: int = None
    magnitude: float = None

    def __post_init__(self):
        if (self.prior is None) == (self.k is None):
            raise DomainError("give either a prior or k with a magnitude")
        if self.k is not None and self.magnitude is None:
            raise DomainError("fixed signals need a magnitude")

    def coefficients(self, p):
        if self.prior is not None:
            return self.prior
        return fixed_signal(p, self.k, self.magnitude)

    def sparsity(self, p):
        return self.prior.epsilon if self.prior is not None else self.k / p

    def describe(self):
        if self.prior is not None:
            return f"prior={self.prior.to_spec()}"
        return f"k={self.k} magnitude={fmt(self.magnitude)}"


@dataclass(frozen=True)
class ExperimentSpec:
    """Validated parameters of one command; echoed into every output header."""

    command: str
    params: dict = field(default_factory=dict)
    reps: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.reps < 1:
            raise DomainError("reps must be at least 1")
        if not 0 <= self.seed < 2**63:
            raise DomainError("seed must be a non-negative 64-bit integer")

    def header(self):
        lines = [f"# lasso_tradeoff {__version__} {self.command}"]
        for key in sorted(self.params):
            lines.append(f"# {key}={_echo(self.params[key])}")
        lines.append(f"# reps={self.reps} base_seed={self.seed} rng={RNG_NAME}")
        return lines


def _echo(v):
    if isinstance(v, float):
        return fmt(v)
    if hasattr(v, "describe"):
        return v.describe()
    if hasattr(v, "text"):
        return v.text
    return str(v)


@dataclass(frozen=True)
class SimulationConfig:
    n: int
    p: int
    signal: SignalSpec
    sigma: float
    grid: GridSpec = GridSpec()
    max_jump: int = 5
    until_full_power: bool = False
    unit_variance: bool = False


@dataclass
class RepOutcome:
    rep: int
    seed: int
    k: int = None
    trace: object = None
    events: object = None
    error: str = None


def simulate_rep(config, seed, rep=0):
    """One replicate: instance, path and events; solver failures are captured."""
    out = RepOutcome(rep=rep, seed=seed)
    try:
        inst = gen_instance(
            config.n, config.p, config.signal.coefficients(config.p), config.sigma, seed, config.unit_variance
        )
        out.k = inst.k
        grid = config.grid.resolve(lambda_max(inst))
        out.trace = lasso_path(inst, grid, max_jump=config.max_jump, until_full_power=config.until_full_power)
        out.events = path_events(out.trace)
    except (ArithmeticError, ValueError, RuntimeError) as exc:
        out.error = f"{type(exc).__name__}: {exc}"
    return out


def _star(args):
    fn, config, seed, rep = args
    return fn(config, seed, rep)


def run_reps(fn, config, reps, seed, jobs=1):
    """``fn(config, seed + r, r)`` for each replicate, in replicate order."""
    tasks = [(fn, config, seed + r, r) for r in range(reps)]
    if jobs <= 1 or reps == 1:
        return [_star(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_star, tasks))


def rep_comment(outcome):
    line = f"# rep {outcome.rep} seed={outcome.seed}"
    if outcome.k is not None:
        line += f" k={outcome.k}"
    if outcome.error:
        line += f" failed: {outcome.error}"
    return line


def trace_rows(outcome):
    for rec in outcome.trace.records:
        yield (outcome.rep, rec.lam, rec.V + rec.T, rec.V, rec.T, rec.tpp, rec.fdp)


def event_row(rep, events):
    return (
        rep,
        events.tpp_at_first_false,
        events.fdp_at_full_power,
        events.rank_first_false,
        events.perfect_recovery,
    )


def write_csv(path, header, columns, rows):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in header:
            fh.write(line + "\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(fmt(v) for v in row) + "\n")


@dataclass(frozen=True)
class L0RunConfig:
    n: int
    p: int
    signal: SignalSpec
    sigma: float
    lam: float = None
    c: float = 0.5
    max_p: int = 20

    def penalty(self):
        if self.lam is not None:
            return self.lam
        return l0_penalty_level(self.sigma, self.n / self.p, self.signal.sparsity(self.p), self.c)


@dataclass
class L0Outcome:
    rep: int
    seed: int
    k: int = None
    result: object = None
    error: str = None


def l0_rep(config, seed, rep=0):
    out = L0Outcome(rep=rep, seed=seed)
    inst = gen_instance(config.n, config.p, config.signal.coefficients(config.p), config.sigma, seed)
    out.k = inst.k
    out.result = best_subset(inst, L0Config(config.penalty(), config.max_p))
    return out


def read_trace_csv(path):
    """Rows of a trace CSV grouped by replicate, plus the ``k`` of each replicate."""
    ks = {}
    rows = {}
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    columns = None
    for line in lines:
        if line.startswith("#"):
            parts = line[1:].split()
            if len(parts) >= 2 and parts[0] == "rep":
                rep = int(parts[1])
                for token in parts[2:]:
                    if token.startswith("k="):
                        ks[rep] = int(token[2:])
            continue
        if columns is None:
            columns = line.split(",")
            if tuple(columns) != TRACE_COLUMNS:
                raise DomainError(f"not a trace file: columns {columns}")
            continue
        vals = dict(zip(columns, line.split(",")))
        rep = int(vals["rep"])
        rows.setdefault(rep, []).append(
            (float(vals["lambda"]), int(vals["V"]), int(vals["T"]), float(vals["tpp"]), float(vals["fdp"]))
        )
    return rows, ks


def events_from_counts(rows, k):
    """Events from ``(lambda, V, T, tpp, fdp)`` rows ordered by decreasing lambda.

    The first null's rank is taken as one more than the true count at the last
    record before any null entered, which is exact when the support grows by
    one variable per record.
    """
    tpp_first_false = None
    fdp_full = None
    last_clean_T = 0
    for _, V, T, tpp, fdp in rows:
        if tpp_first_false is None and V == 0:
            last_clean_T = T
        if tpp_first_false is None and V > 0:
            tpp_first_false = tpp
        if fdp_full is None and k > 0 and T >= k:
            fdp_full = fdp
    if tpp_first_false is None:
        tpp_first_false = rows[-1][3] if rows else 0.0
        rank = (rows[-1][2] if rows else 0) + 1
    else:
        rank = last_clean_T + 1
    return tpp_first_false, fdp_full, rank, rank > k


def mean_or_nan(values):
    vals = [v for v in values if v is not None and not math.isnan(v)]
    return float(np.mean(vals)) if vals else math.nan
