"""Command-line front end: ``lasso-tradeoff <command> [options]``.

Every command writes a CSV whose ``#`` header echoes the version, all
parameters, the base seed and the generator, so identical arguments give
byte-identical files.
"""

import argparse
import sys
import warnings

import numpy as np

from . import boundary, experiment
from .errors import DomainError, ResourceError
from .lasso_sim import check_cells
from .experiment import (
    EVENT_COLUMNS,
    L0_COLUMNS,
    TRACE_COLUMNS,
    ExperimentSpec,
    GridSpec,
    L0RunConfig,
    SignalSpec,
    SimulationConfig,
    write_csv,
)
from .state_evolution import Prior, default_alpha_grid, sweep_alpha

SE_COLUMNS = ("alpha", "tau", "lambda", "tpp_inf", "fdp_inf", "fd_inf", "td_inf")
BOUNDARY_COLUMNS = ("u", "t_star", "q_star")


def _alpha_grid(text, delta):
    if text is None:
        return default_alpha_grid(delta)
    if text.startswith("lin:"):
        _, lo, hi, num = text.split(":")
        return np.linspace(float(lo), float(hi), int(num))
    return np.array([float(v) for v in text.split(",")])


def _signal(args):
    if args.prior is not None:
        if args.k is not None:
            raise DomainError("--prior and --k are mutually exclusive")
        return SignalSpec(prior=Prior.parse(args.prior))
    if args.k is None:
        raise DomainError("one of --prior or --k is required")
    return SignalSpec(k=args.k, magnitude=args.magnitude)


def cmd_boundary(args):
    shape = boundary.ProblemShape(args.delta, args.epsilon)
    spec = ExperimentSpec(
        "boundary", {"delta": args.delta, "epsilon": args.epsilon, "n_points": args.n_points}
    )
    samples = boundary.sample_boundary(shape, args.n_points)
    rows = [(s.u, s.t_star, s.q_star) for s in samples]
    write_csv(args.out, spec.header(), BOUNDARY_COLUMNS, rows)


def cmd_se_curve(args):
    prior = Prior.parse(args.prior)
    if prior.epsilon == 0:
        raise DomainError("prior must put positive mass on nonzero values")
    grid = _alpha_grid(args.alpha_grid, args.delta)
    spec = ExperimentSpec(
        "se-curve",
        {"prior": prior.to_spec(), "delta": args.delta, "sigma": args.sigma, "alpha_grid": args.alpha_grid or "default"},
    )
    skipped = []
    points = sweep_alpha(prior, args.delta, args.sigma, grid, skipped=skipped)
    header = spec.header() + [f"# warning: alpha={experiment.fmt(a)} skipped: {why}" for a, why in skipped]
    rows = [(s.alpha, s.tau, s.lam, s.tpp_inf, s.fdp_inf, s.fd_inf, s.td_inf) for s in points]
    write_csv(args.out, header, SE_COLUMNS, rows)


def cmd_simulate(args):
    signal = _signal(args)
    check_cells(args.n, args.p)
    config = SimulationConfig(
        n=args.n,
        p=args.p,
        signal=signal,
        sigma=args.sigma,
        grid=GridSpec(args.grid),
        max_jump=None if args.max_jump <= 0 else args.max_jump,
        until_full_power=args.until_full_power,
        unit_variance=args.unit_variance,
    )
    spec = ExperimentSpec(
        "simulate",
        {
            "n": args.n,
            "p": args.p,
            "signal": signal,
            "sigma": args.sigma,
            "grid": config.grid,
            "max_jump": config.max_jump,
            "until_full_power": args.until_full_power,
            "design": "N(0,1)" if args.unit_variance else "N(0,1/n)",
        },
        reps=args.reps,
        seed=args.seed,
    )
    outcomes = experiment.run_reps(experiment.simulate_rep, config, args.reps, args.seed, args.jobs)
    header = spec.header() + [experiment.rep_comment(o) for o in outcomes]
    trace_rows = [row for o in outcomes if o.trace is not None for row in experiment.trace_rows(o)]
    event_rows = [experiment.event_row(o.rep, o.events) for o in outcomes if o.events is not None]
    write_csv(args.out, header, TRACE_COLUMNS, trace_rows)
    write_csv(_events_path(args), header, EVENT_COLUMNS, event_rows)
    failed = sum(o.error is not None for o in outcomes)
    if failed:
        print(f"{failed} of {args.reps} replicates failed; see the file header", file=sys.stderr)


def _events_path(args):
    if args.events_out:
        return args.events_out
    stem = args.out[:-4] if args.out.endswith(".csv") else args.out
    return stem + ".events.csv"


def cmd_l0(args):
    signal = _signal(args)
    lam = None if args.lam == "auto" else float(args.lam)
    config = L0RunConfig(n=args.n, p=args.p, signal=signal, sigma=args.sigma, lam=lam, c=args.c)
    if args.p > config.max_p:
        raise DomainError(f"p = {args.p} exceeds the enumeration cap of {config.max_p}")
    penalty = config.penalty()
    spec = ExperimentSpec(
        "l0",
        {"n": args.n, "p": args.p, "signal": signal, "sigma": args.sigma, "lambda": penalty, "lambda_mode": args.lam, "c": args.c},
        reps=args.reps,
        seed=args.seed,
    )
    outcomes = experiment.run_reps(experiment.l0_rep, config, args.reps, args.seed, args.jobs)
    rows = []
    for o in outcomes:
        r = o.result
        rows.append((o.rep, len(r.support), r.m0, r.m1, r.objective, r.tpp, r.fdp))
    exact = sum(o.result.exact_recovery for o in outcomes)
    header = spec.header() + [experiment.rep_comment(o) for o in outcomes]
    header.append(f"# exact_recovery_rate={experiment.fmt(exact / args.reps)}")
    write_csv(args.out, header, L0_COLUMNS, rows)


def cmd_events(args):
    rows_by_rep, ks = experiment.read_trace_csv(args.trace)
    missing = sorted(set(rows_by_rep) - set(ks))
    if missing:
        raise DomainError(f"trace header lacks k for replicates {missing}")
    spec = ExperimentSpec("events", {"trace": args.trace})
    rows = []
    for rep in sorted(rows_by_rep):
        tff, fdp_full, rank, perfect = experiment.events_from_counts(rows_by_rep[rep], ks[rep])
        rows.append((rep, tff, fdp_full, rank, perfect))
    write_csv(args.out, spec.header(), EVENT_COLUMNS, rows)


def _add_signal_args(sub):
    sub.add_argument("--prior", help="comma-separated value:mass pairs; zero takes the rest")
    sub.add_argument("--k", type=int, help="number of fixed nonzero coefficients")
    sub.add_argument("--magnitude", type=float, help="value of the fixed coefficients")


def build_parser():
    parser = argparse.ArgumentParser(prog="lasso-tradeoff", description=__doc__.splitlines()[0])
    subs = parser.add_subparsers(dest="command", required=True)

    b = subs.add_parser("boundary", help="sample the FDP/TPP boundary curve")
    b.add_argument("--delta", type=float, required=True)
    b.add_argument("--epsilon", type=float, required=True)
    b.add_argument("--n-points", type=int, default=200)
    b.add_argument("--out", required=True)
    b.set_defaults(func=cmd_boundary)

    s = subs.add_parser("se-curve", help="state-evolution FDP/TPP curve of a prior")
    s.add_argument("--prior", required=True)
    s.add_argument("--delta", type=float, required=True)
    s.add_argument("--sigma", type=float, default=0.0)
    s.add_argument("--alpha-grid", help="lin:lo:hi:num or a comma list")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_se_curve)

    m = subs.add_parser("simulate", help="Lasso paths on Gaussian designs")
    m.add_argument("--n", type=int, required=True)
    m.add_argument("--p", type=int, required=True)
    _add_signal_args(m)
    m.add_argument("--sigma", type=float, default=1.0)
    m.add_argument("--grid", default=GridSpec().text, help="log:hi:lo:count or a comma list")
    m.add_argument("--max-jump", type=int, default=5, help="refine steps adding more variables; 0 disables")
    m.add_argument("--until-full-power", action="store_true")
    m.add_argument("--unit-variance", action="store_true", help="N(0,1) design entries instead of N(0,1/n)")
    m.add_argument("--reps", type=int, default=1)
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--jobs", type=int, default=1)
    m.add_argument("--out", required=True, help="trace CSV")
    m.add_argument("--events-out", help="events CSV (default: <out>.events.csv)")
    m.set_defaults(func=cmd_simulate)

    z = subs.add_parser("l0", help="exhaustive best-subset selection")
    z.add_argument("--n", type=int, required=True)
    z.add_argument("--p", type=int, required=True)
    _add_signal_args(z)
    z.add_argument("--sigma", type=float, default=1.0)
    z.add_argument("--lam", default="auto", help="penalty per variable, or auto")
    z.add_argument("--c", type=float, default=0.5)
    z.add_argument("--reps", type=int, default=1)
    z.add_argument("--seed", type=int, default=0)
    z.add_argument("--jobs", type=int, default=1)
    z.add_argument("--out", required=True)
    z.set_defaults(func=cmd_l0)

    e = subs.add_parser("events", help="recompute path events from a trace CSV")
    e.add_argument("--trace", required=True)
    e.add_argument("--out", required=True)
    e.set_defaults(func=cmd_events)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            args.func(args)
    except (DomainError, ResourceError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
