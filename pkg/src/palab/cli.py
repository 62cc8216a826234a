"""Command line interface.

Exit codes: 0 all assertions pass / condition holds, 1 a condition is
violated or a scenario assertion failed, 2 usage or input error.

Space descriptors::

    discrete:N          discrete metric on N points
    finite:PATH         CSV distance matrix
    interval[:LO,HI]    real interval (grid size from --grid)
    harmonic            1..M plus infinity (M from --truncation)

Map descriptors::

    table:1,2,2         finite table map
    table-csv:PATH      single-column CSV table
    square-half         x -> x^2/2
    successor           n -> n+1, inf -> inf
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from palab.conditions import (
    ConditionSpec,
    F_FUNCTIONS,
    Family,
    check_condition,
    pa_ratio_profile,
    sample_pairs,
    tightest_constant,
)
from palab.errors import PALabError
from palab.maps import SquareHalfMap, SuccessorMap, TableMap, load_table_map
from palab.metric import (
    DEFAULT_GRID,
    DEFAULT_TRUNCATION,
    INF,
    HarmonicSpace,
    IntervalSpace,
    MetricSpace,
    discrete_space,
    load_finite_space,
)
from palab.picard import DEFAULT_MAX_ITER, DEFAULT_TOL, check_summability_bound, run_picard
from palab.report import build_report, dumps, profile_csv, write_json
from palab.repro import SCENARIOS, builtin_targets, comparison_table
from palab.search import SeparationQuery, search_separation

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def parse_space(desc: str | None, args) -> MetricSpace | None:
    if desc is None:
        return None
    kind, _, rest = desc.partition(":")
    if kind == "discrete":
        return discrete_space(int(rest))
    if kind == "finite":
        return load_finite_space(rest)
    if kind == "interval":
        lo, hi = (float(v) for v in rest.split(",")) if rest else (0.0, 1.0)
        return IntervalSpace(lo, hi, args.grid)
    if kind == "harmonic":
        return HarmonicSpace(args.truncation)
    raise UsageError(f"unknown space descriptor {desc!r}")


def parse_map(desc: str, space: MetricSpace | None, args):
    kind, _, rest = desc.partition(":")
    if kind == "square-half":
        return SquareHalfMap(space or IntervalSpace(0.0, 1.0, args.grid))
    if kind == "successor":
        return SuccessorMap(space or HarmonicSpace(args.truncation))
    if space is None:
        raise UsageError(f"map {kind!r} needs --space")
    if kind == "table":
        return TableMap(space, tuple(int(v) for v in rest.split(",")))
    if kind == "table-csv":
        return load_table_map(rest, space)
    raise UsageError(f"unknown map descriptor {desc!r}")


def parse_point(text: str, space: MetricSpace):
    text = text.strip()
    if text.lower() in ("inf", "infinity"):
        return INF
    if isinstance(space, IntervalSpace):
        return float(text)
    return int(text)


def resolve(args):
    space = parse_space(args.space, args)
    T = parse_map(args.map, space, args)
    return T.space, T


def pairs_from_args(args, space):
    if args.pairs:
        out = []
        for chunk in args.pairs.split(";"):
            a, b = chunk.split(",")
            out.append((parse_point(a, space), parse_point(b, space)))
        return out
    window = tuple(float(v) for v in args.window.split(",")) if args.window else None
    return sample_pairs(space, seed=args.seed, scheme=args.scheme, window=window, limit=args.limit)


def spec_from_args(args, H) -> ConditionSpec:
    fam = Family(args.family)
    if fam is Family.PA:
        return ConditionSpec.pa(args.alpha, args.N, H)
    if fam is Family.F:
        return ConditionSpec.f(args.tau, args.f_id)
    return ConditionSpec(fam, k=args.k)


def emit(args, report: dict) -> None:
    text = dumps(report)
    if args.json:
        write_json(report, args.json)
    if not args.quiet:
        sys.stdout.write(text)


# ----------------------------------------------------------------------------

def cmd_check(args) -> int:
    space, T = resolve(args)
    spec = spec_from_args(args, args.horizon)
    pairs = pairs_from_args(args, space)
    rep = check_condition(spec, space, T, pairs)
    emit(args, build_report("check", space=space, map=T, spec=spec, verdict=rep.verdict,
                            witness=rep.witness, notes=rep.notes,
                            sample={"pairs": rep.pairs_checked, "instances": rep.instances_checked}))
    return EXIT_OK if rep.holds else EXIT_FAIL


def cmd_tightest(args) -> int:
    space, T = resolve(args)
    pairs = pairs_from_args(args, space)
    r = tightest_constant(args.family, space, T, pairs, N=args.N, H=args.horizon, f_id=args.f_id)
    emit(args, build_report("tightest", space=space, map=T, verdict="measured", witness=r.witness,
                            notes=r.notes, result=r.to_json()))
    return EXIT_OK


def cmd_picard(args) -> int:
    space, T = resolve(args)
    x0 = parse_point(args.x0, space)
    trace = run_picard(space, T, x0, args.tol, args.max_iter)
    extra = {"trace": trace.to_json()}
    ok = trace.status.value == "converged"
    if args.alpha is not None:
        bound = check_summability_bound(trace, args.alpha, args.N)
        extra["summability"] = bound.to_json()
        ok = ok and bound.passed
    emit(args, build_report("picard", space=space, map=T, verdict=trace.status.value,
                            notes=trace.notes, **extra))
    return EXIT_OK if ok else EXIT_FAIL


def cmd_profile(args) -> int:
    space, T = resolve(args)
    x, y = parse_point(args.x, space), parse_point(args.y, space)
    sums = pa_ratio_profile(space, T, x, y, args.horizon)
    if args.csv:
        Path(args.csv).write_text(profile_csv(sums))
    if args.json:
        write_json(build_report("profile", space=space, map=T, verdict="measured", notes=sums.flags.notes(),
                                profile=[dict(zip(("n", "S_n", "S1_n", "rho_n"), r)) for r in sums.rows()]),
                   args.json)
    if not args.quiet:
        sys.stdout.write(profile_csv(sums))
    return EXIT_OK


def _run_scenario(name, args):
    if name == "square-half":
        return SCENARIOS[name](grid=args.grid, seed=args.seed)
    if name == "successor-harmonic":
        return SCENARIOS[name](n_max=args.n_max)
    return SCENARIOS[name]()


def cmd_repro(args) -> int:
    names = list(SCENARIOS) if args.scenario == "all" else [args.scenario]
    results = [_run_scenario(n, args) for n in names]
    reports = [r.to_json() for r in results]
    ok = all(r.passed for r in results)
    if len(reports) == 1:
        report = reports[0]
    else:
        report = {"schema_version": reports[0]["schema_version"], "command": "repro all",
                  "verdict": "pass" if ok else "fail", "reports": reports}
    if args.json:
        write_json(report, args.json)
    if not args.quiet:
        for r in results:
            print(f"{r.scenario}: {r.verdict}")
            for m in r.measurements:
                flag = "PASS" if m.passed else ("NOTE" if m.discrepancy else "FAIL")
                print(f"  [{flag}] {m.name}: {m.value!r} (expected {m.expected!r}, {m.provenance})")
            for note in r.notes:
                print(f"  note: {note}")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_search(args) -> int:
    q = SeparationQuery(
        must_hold=frozenset(args.hold or ()),
        must_fail=frozenset(args.fail or ()),
        trials=args.trials,
        seed=args.seed,
        point_counts=tuple(int(v) for v in args.points.split(",")),
        method=args.method,
        N_range=tuple(range(1, args.n_max_pa + 1)),
    )
    result = search_separation(q)
    emit(args, build_report("search", verdict=result.message, **result.to_json()))
    return EXIT_OK


def cmd_table(args) -> int:
    table = comparison_table(builtin_targets(args.grid, args.truncation, args.seed))
    if args.csv:
        Path(args.csv).write_text(table.to_csv())
    if args.json:
        write_json(build_report("table", verdict="measured", table=table.to_json()), args.json)
    if not args.quiet:
        sys.stdout.write(table.to_markdown())
    return EXIT_OK


# ----------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("global options")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--json", metavar="PATH", help="write the JSON report here")
    g.add_argument("--csv", metavar="PATH", help="write CSV output here (profile, table)")
    g.add_argument("--tol", type=float, default=DEFAULT_TOL)
    g.add_argument("--horizon", type=int, default=16, help="orbit horizon H")
    g.add_argument("--grid", type=int, default=DEFAULT_GRID, help="interval grid size")
    g.add_argument("--truncation", type=int, default=DEFAULT_TRUNCATION, help="harmonic truncation M")
    g.add_argument("--quiet", action="store_true", help="do not print the report")

    target = argparse.ArgumentParser(add_help=False)
    target.add_argument("--space", help="space descriptor (see --help)")
    target.add_argument("--map", required=True, help="map descriptor (see --help)")

    sample = argparse.ArgumentParser(add_help=False)
    sample.add_argument("--pairs", help='explicit pairs, e.g. "0,1;0,2" or "14,15"')
    sample.add_argument("--scheme", choices=("default", "adjacent"), default="default")
    sample.add_argument("--window", help="restrict interval grid pairs to LO,HI")
    sample.add_argument("--limit", type=int, default=1000, help="largest harmonic index sampled")

    cond = argparse.ArgumentParser(add_help=False)
    cond.add_argument("--family", choices=[f.value for f in Family], required=True)
    cond.add_argument("--k", type=float)
    cond.add_argument("--alpha", type=float)
    cond.add_argument("--N", type=int, default=1)
    cond.add_argument("--f-id", dest="f_id", choices=sorted(F_FUNCTIONS), default="log")
    cond.add_argument("--tau", type=float)

    p = argparse.ArgumentParser(prog="palab", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("check", parents=[common, target, sample, cond], help="check a condition on a pair sample")
    s.set_defaults(func=cmd_check)

    s = sub.add_parser("tightest", parents=[common, target, sample, cond], help="least admissible constant")
    s.set_defaults(func=cmd_tightest)

    s = sub.add_parser("picard", parents=[common, target], help="Picard iteration and summability bound")
    s.add_argument("--x0", required=True)
    s.add_argument("--max-iter", type=int, default=DEFAULT_MAX_ITER)
    s.add_argument("--alpha", type=float, help="also check the summability bound for this alpha")
    s.add_argument("--N", type=int, default=1)
    s.set_defaults(func=cmd_picard)

    s = sub.add_parser("profile", parents=[common, target], help="PA ratio profile of one pair")
    s.add_argument("--x", required=True)
    s.add_argument("--y", required=True)
    s.set_defaults(func=cmd_profile)

    s = sub.add_parser("repro", parents=[common], help="reproduce a worked scenario")
    s.add_argument("scenario", choices=list(SCENARIOS) + ["all"])
    s.add_argument("--n-max", type=int, default=10_000, help="largest n for the harmonic closed forms")
    s.set_defaults(func=cmd_repro)

    s = sub.add_parser("search", parents=[common], help="random search for class-separating instances")
    s.add_argument("--hold", action="append", choices=[f.value for f in Family])
    s.add_argument("--fail", action="append", choices=[f.value for f in Family])
    s.add_argument("--trials", type=int, default=1000)
    s.add_argument("--points", default="3,3", help="point count range LO,HI")
    s.add_argument("--method", choices=("euclidean", "repaired", "discrete"), default="euclidean")
    s.add_argument("--n-max-pa", type=int, default=5, help="PA N range is 1..this")
    s.set_defaults(func=cmd_search)

    s = sub.add_parser("table", parents=[common], help="empirical comparison table")
    s.set_defaults(func=cmd_table)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (PALabError, UsageError, ValueError, OSError) as exc:
        print(f"palab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
