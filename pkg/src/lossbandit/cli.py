"""Command-line entry point.

Every subcommand is a pure function of its flags (and seed): results go to
stdout or ``--output`` as JSON or CSV.  Exit status is 0 on success, 2 on
invalid input and 1 on an internal error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
import warnings

import numpy as np

from . import asymptotic, dp, montecarlo, obm
from .bandit import TwoArmedEnv, env_from_dict, parse_strategy, validate_env
from .errors import CouplingWarning, StateSpaceError, ValidationError
from .lattice import on_boundary
from .rng import resolve_seed
from .utility import UtilityIndex, exponential_utility, phi1_from_label


# ---------------------------------------------------------------------------
# input helpers


def _load_json(arg: str, what: str) -> dict:
    """``arg`` is a path to a JSON file or an inline JSON object."""
    text = arg
    if not arg.lstrip().startswith("{"):
        try:
            with open(arg) as fh:
                text = fh.read()
        except OSError as exc:
            raise ValidationError(f"cannot read {what} file {arg!r}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"malformed {what} JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ValidationError(f"{what} JSON must be an object")
    return data


def _env(args):
    env = env_from_dict(_load_json(args.env, "environment"))
    validate_env(env)
    return env


def _utility(args, env) -> UtilityIndex:
    if getattr(args, "utility", None):
        return UtilityIndex.from_dict(_load_json(args.utility, "utility"))
    return exponential_utility(0.0, env.sigma_low / env.sigma_high)


def _check_env_coupling(u: UtilityIndex, env, allow: bool):
    theta = env.sigma_low / env.sigma_high
    if abs(u.theta - theta) > 1e-12 and not allow:
        raise ValidationError(
            f"utility theta {u.theta!r} differs from sigma_low/sigma_high = {theta!r} "
            "(pass --allow-uncoupled to compute anyway)"
        )


def _n_grid(text: str) -> list:
    """``a..b`` doubles from a up to b; otherwise a comma-separated list."""
    try:
        if ".." in text:
            a, b = (int(x) for x in text.split(".."))
            if a < 1 or b < a:
                raise ValueError
            out = []
            n = a
            while n <= b:
                out.append(n)
                n *= 2
            return out
        vals = [int(x) for x in text.split(",") if x.strip()]
        if not vals or min(vals) < 1:
            raise ValueError
        return vals
    except ValueError:
        raise ValidationError(f"bad --n-grid {text!r}; use a..b or n1,n2,...") from None


def _positive(kind):
    def conv(text):
        v = kind(text)
        if not v > 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {text}")
        return v

    return conv


# ---------------------------------------------------------------------------
# output helpers


def _emit_json(obj, args):
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    _write(text, args.output)


def _emit_csv(header, rows, path):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in row])
    _write(buf.getvalue(), path)


def _write(text, path):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


# ---------------------------------------------------------------------------
# subcommands


def cmd_value(args):
    params = obm.ObmParams(args.sigma_low, args.sigma_high, args.c)
    theta = params.theta if args.theta is None else args.theta
    u = UtilityIndex.from_dict({"phi1": args.phi1, "c": args.c, "theta": theta})
    asymptotic.check_coupling(u, params)
    if args.method == "closed-form":
        if u.phi1.kind != "exponential":
            raise ValidationError("the closed form exists only for the exponential phi1")
        res = asymptotic.value_exponential_closed_form(args.c, args.sigma_low, args.sigma_high)
    else:
        res = asymptotic.value_by_quadrature(u, params)
    _emit_json(res.to_dict(), args)


def cmd_density(args):
    params = obm.ObmParams(args.sigma_low, args.sigma_high, args.c)
    if args.points < 2 or not args.y_max > args.y_min:
        raise ValidationError("need --points >= 2 and --y-max > --y-min")
    ys = np.linspace(args.y_min, args.y_max, args.points)
    q = obm.time1_pdf(params, ys)
    _emit_csv(["y", "q"], zip(ys, q), args.output)


def cmd_obm_sample(args):
    params = obm.ObmParams(args.sigma_low, args.sigma_high, args.c)
    path = obm.sample_path(params, args.start, args.t_end, args.n_steps, resolve_seed(args.seed))
    _emit_csv(["t", "W_t"], zip(path.times, path.values), args.output)


def cmd_dp(args):
    env = _env(args)
    u = _utility(args, env)
    _check_env_coupling(u, env, args.allow_uncoupled)
    s = parse_strategy(args.strategy, args.n) if args.strategy else None
    keep = bool(args.dump_table)
    t0 = time.perf_counter()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", CouplingWarning)
        if args.indicator_c is not None:
            c = args.indicator_c
            if s is None:
                table = dp.optimal_value(env, dp.indicator_terminal(c), args.n, keep, args.max_states)
                value = table.value
            else:
                value = dp.strategy_indicator_prob_n(env, s, c, args.n)
        else:
            c = u.c
            if s is None:
                value, table = dp.value_n(env, u, args.n, keep, args.max_states)
            else:
                value = dp.strategy_value_n(env, s, u, args.n, max_states=args.max_states)
    runtime_ms = (time.perf_counter() - t0) * 1000.0
    if args.dump_table:
        if s is not None:
            raise ValidationError("--dump-table applies to the optimal value only")
        _emit_csv(["stage", "sum", "delta1", "delta2", "value", "argmax"], table.rows(), args.dump_table)
    out = {
        "n": args.n,
        "value": value,
        "atoms_at_boundary": on_boundary(env.scale, args.n, c),
        "runtime_ms": round(runtime_ms, 3),
    }
    if args.no_runtime:
        del out["runtime_ms"]
    _emit_json(out, args)


def cmd_simulate(args):
    env = _env(args)
    u = _utility(args, env)
    s = parse_strategy(args.strategy, args.n)
    rep = montecarlo.simulate_paths(
        env,
        s,
        args.n,
        args.reps,
        seed=resolve_seed(args.seed),
        scaling=args.scaling,
        u=u,
        persistence_N=args.persistence_N,
        keep_reps=bool(args.per_rep_csv),
    )
    if args.per_rep_csv:
        cols = list(rep.per_rep)
        _emit_csv(["rep"] + cols, ((i, *(rep.per_rep[k][i] for k in cols)) for i in range(rep.reps)), args.per_rep_csv)
    _emit_json(rep.to_dict(), args)


def cmd_posterior(args):
    env = _env(args)
    if not isinstance(env, TwoArmedEnv):
        raise ValidationError("posterior needs a two_armed environment")
    s = parse_strategy(args.strategy, args.n)
    rep = montecarlo.posterior_consistency(env, args.truth, s, args.n, args.reps, resolve_seed(args.seed), args.threshold)
    _emit_json(rep.to_dict(), args)


def cmd_converge(args):
    env = _env(args)
    u = _utility(args, env)
    _check_env_coupling(u, env, False)
    params = obm.ObmParams(env.sigma_low, env.sigma_high, u.c)
    if u.phi1.kind == "exponential":
        limit = asymptotic.value_exponential_closed_form(u.c, env.sigma_low, env.sigma_high).v
    else:
        limit = asymptotic.value_by_quadrature(u, params).v
    rows = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", CouplingWarning)
        for n in _n_grid(args.n_grid):
            v, _ = dp.value_n(env, u, n, keep_layers=False, max_states=args.max_states)
            rows.append((n, v, v - limit, limit))
    pts = [(math.log(n), math.log(abs(d))) for n, _, d, _ in rows if d != 0]
    slope = float(np.polyfit(*zip(*pts), 1)[0]) if len(pts) >= 2 else float("nan")
    if args.format == "csv":
        _emit_csv(["n", "V_n", "V_n_minus_V", "V"], rows, args.output)
        sys.stderr.write(f"slope {slope!r}\n")
    else:
        _emit_json(
            {
                "rows": [{"n": n, "V_n": v, "V_n_minus_V": d, "V": lim} for n, v, d, lim in rows],
                "V": limit,
                "slope": slope,
            },
            args,
        )


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lossbandit", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--output", "-o", default=None, help="output file (default: stdout)")
        sp.add_argument("--threads", type=int, default=None, help="accepted for compatibility; computation is single-threaded")

    def obm_flags(sp):
        sp.add_argument("--sigma-low", type=_positive(float), required=True, help="low volatility")
        sp.add_argument("--sigma-high", type=_positive(float), required=True, help="high volatility")
        sp.add_argument("--c", type=float, default=0.0, help="threshold / reference point")

    sp = sub.add_parser("value", help="limiting value E[phi(W_1)]")
    obm_flags(sp)
    sp.add_argument("--phi1", default="exponential", help="gain index: exponential or custom:<name>")
    sp.add_argument("--theta", type=float, default=None, help="utility theta; must equal sigma_low/sigma_high")
    sp.add_argument("--method", choices=("quadrature", "closed-form"), default="quadrature")
    common(sp)
    sp.set_defaults(func=cmd_value)

    sp = sub.add_parser("density", help="time-1 density as CSV (y, q)")
    obm_flags(sp)
    sp.add_argument("--y-min", type=float, default=-4.0)
    sp.add_argument("--y-max", type=float, default=4.0)
    sp.add_argument("--points", type=int, default=801)
    common(sp)
    sp.set_defaults(func=cmd_density)

    sp = sub.add_parser("obm-sample", help="Euler-Maruyama path as CSV (t, W_t)")
    obm_flags(sp)
    sp.add_argument("--start", type=float, default=0.0)
    sp.add_argument("--t-end", type=_positive(float), default=1.0)
    sp.add_argument("--n-steps", type=_positive(int), default=1000)
    sp.add_argument("--seed", type=int, default=0, help="overridden by BANDIT_SEED")
    common(sp)
    sp.set_defaults(func=cmd_obm_sample)

    def env_flags(sp, utility=True):
        sp.add_argument("--env", required=True, help="environment JSON file or inline object")
        if utility:
            sp.add_argument(
                "--utility",
                default=None,
                help="utility JSON file or inline object (default: exponential, c=0, theta=sigma_low/sigma_high)",
            )

    sp = sub.add_parser("dp", help="exact finite-horizon value by backward induction")
    env_flags(sp)
    sp.add_argument("--n", type=_positive(int), required=True, help="horizon")
    sp.add_argument("--indicator-c", type=float, default=None, help="value the indicator of S_n/sqrt(n) >= c instead")
    sp.add_argument("--strategy", default=None, help="evaluate this strategy instead of optimizing")
    sp.add_argument("--dump-table", default=None, help="write the stage table as CSV to this path")
    sp.add_argument("--max-states", type=_positive(int), default=dp.MAX_STATES)
    sp.add_argument("--allow-uncoupled", action="store_true", help="permit theta != sigma_low/sigma_high")
    sp.add_argument("--no-runtime", action="store_true", help="omit runtime_ms for byte-stable output")
    common(sp)
    sp.set_defaults(func=cmd_dp)

    sp = sub.add_parser("simulate", help="Monte Carlo estimate of a strategy's value")
    env_flags(sp)
    sp.add_argument("--strategy", required=True)
    sp.add_argument("--n", type=_positive(int), required=True)
    sp.add_argument("--reps", type=_positive(int), default=montecarlo.DEFAULT_REPS)
    sp.add_argument("--seed", type=int, default=0, help="overridden by BANDIT_SEED")
    sp.add_argument("--scaling", choices=("sqrt", "linear"), default="sqrt")
    sp.add_argument("--persistence-N", dest="persistence_N", type=_positive(int), default=None)
    sp.add_argument("--per-rep-csv", default=None, help="write per-replication results to this CSV")
    common(sp)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("posterior", help="posterior consistency in the two-armed model")
    env_flags(sp, utility=False)
    sp.add_argument("--truth", choices=("a", "b"), default="a", help="arm whose nonzero probability is p_low")
    sp.add_argument("--strategy", default="s_star_learning")
    sp.add_argument("--n", type=_positive(int), default=500)
    sp.add_argument("--reps", type=_positive(int), default=10_000)
    sp.add_argument("--seed", type=int, default=0, help="overridden by BANDIT_SEED")
    sp.add_argument("--threshold", type=float, default=0.99)
    common(sp)
    sp.set_defaults(func=cmd_posterior)

    sp = sub.add_parser("converge", help="V_n over a geometric grid of horizons and the fitted rate")
    env_flags(sp)
    sp.add_argument("--n-grid", default="16..16384", help="a..b (doubling) or n1,n2,...")
    sp.add_argument("--format", choices=("json", "csv"), default="json")
    sp.add_argument("--max-states", type=_positive(int), default=dp.MAX_STATES)
    common(sp)
    sp.set_defaults(func=cmd_converge)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except (ValidationError, StateSpaceError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except Exception as exc:  # noqa: BLE001
        sys.stderr.write(f"internal error: {type(exc).__name__}: {exc}\n")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
