"""Batch command-line frontend: analyze, plan, factor, bench.

Matrix arguments are either Matrix Market paths or generator specs of the
form gen:<kind>:k=v[,k=v...], e.g. gen:arrowhead:n=1000,b=100. Exit codes:
0 success, 1 numerical failure (zero pivot), 2 usage or parameter errors,
3 input/output errors.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from statistics import median

from .blocking import PANGULU_SIZES, irregular_plan, pangulu_size_select, regular_plan
from .errors import (
    BadParams,
    EmptyMatrix,
    IndexOutOfRange,
    LuBlockError,
    MalformedEntry,
    NonSquare,
    UnsupportedField,
    ZeroPivot,
)
from .factorize import DEFAULT_PIVOT_TOL, factorize, residual
from .features import (
    DEFAULT_SAMPLE_POINTS,
    classify_curve,
    diag_block_pointer,
    percentage_curve,
)
from .grid import dependency_levels, partition
from .matrix_io import (
    GENERATOR_KINDS,
    generate,
    read_matrix_market,
    write_curve_csv,
    write_plan_json,
    write_report_csv,
)
from .metrics import block_nnz_stats, level_work_stats, makespan_model
from .symbolic import fill_ratio, symbolic_factorize, symmetrize_pattern

EXIT_OK = 0
EXIT_NUMERICAL = 1
EXIT_USAGE = 2
EXIT_IO = 3

_IO_ERRORS = (
    OSError,
    NonSquare,
    UnsupportedField,
    MalformedEntry,
    EmptyMatrix,
    IndexOutOfRange,
)

BENCH_HEADER = [
    "matrix",
    "plan",
    "strategy",
    "block_size",
    "blocks",
    "n",
    "nnz_filled",
    "cv_block_nnz",
    "cv_grid_cells",
    "last_level_share",
    "makespan_w4",
    "tasks",
    "levels",
    "numeric_time_s",
    "residual",
    "status",
]


def _load_matrix(token: str, seed: int):
    """Load a .mtx path or synthesize from a gen:<kind>:k=v,... spec."""
    if not token.startswith("gen:"):
        return read_matrix_market(token)
    parts = token.split(":")
    if len(parts) not in (2, 3) or not parts[1]:
        raise BadParams(f"bad generator spec '{token}'")
    kind = parts[1]
    if kind not in GENERATOR_KINDS:
        raise BadParams(f"unknown generator kind '{kind}'")
    params: dict = {}
    if len(parts) == 3 and parts[2]:
        for kv in parts[2].split(","):
            if "=" not in kv:
                raise BadParams(f"bad generator parameter '{kv}' in '{token}'")
            key, val = kv.split("=", 1)
            params[key.strip()] = val.strip()
    try:
        n = int(params.pop("n"))
    except KeyError:
        raise BadParams(f"generator spec '{token}' needs n=<order>")
    except ValueError:
        raise BadParams(f"generator spec '{token}' has a non-integer n")
    kwargs = {"seed": int(params.pop("seed", seed))}
    if "b" in params:
        kwargs["b"] = int(params.pop("b"))
    if "bandwidth" in params:
        kwargs["bandwidth"] = int(params.pop("bandwidth"))
    if "density" in params:
        kwargs["density"] = float(params.pop("density"))
    if params:
        raise BadParams(f"unknown generator parameters {sorted(params)} in '{token}'")
    return generate(kind, n, **kwargs)


def _parse_threshold(text: str):
    if text == "linear":
        return text
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"threshold must be a number or 'linear', got '{text}'"
        )


def _default_workers() -> int:
    env = os.environ.get("LUBLOCK_WORKERS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1


def _analysis(a, sample_points):
    asym = symmetrize_pattern(a)
    filled = symbolic_factorize(asym)
    curve = percentage_curve(diag_block_pointer(filled), sample_points)
    return filled, curve


def _make_plan(args, n, curve):
    if args.strategy == "regular":
        if args.block_size is None:
            raise BadParams("--strategy regular requires --block-size")
        return regular_plan(n, min(args.block_size, n))
    return irregular_plan(
        curve,
        n,
        step=args.step,
        max_num=args.max_num,
        threshold=args.threshold,
    )


# --- commands -------------------------------------------------------------------


def cmd_analyze(args) -> int:
    a = _load_matrix(args.matrix, args.seed)
    filled, curve = _analysis(a, args.sample_points)
    if args.out:
        write_curve_csv(curve, args.out)
    print(f"n {a.n}")
    print(f"nnz_a {a.nnz}")
    print(f"nnz_filled {filled.nnz_filled}")
    print(f"fill_ratio {fill_ratio(a, filled)!r}")
    print(f"curve_class {classify_curve(curve)}")
    if args.out:
        print(f"curve_csv {args.out}")
    return EXIT_OK


def cmd_plan(args) -> int:
    a = _load_matrix(args.matrix, args.seed)
    curve = None
    if args.strategy == "irregular":
        _, curve = _analysis(a, args.sample_points)
    plan = _make_plan(args, a.n, curve)
    spans = plan.spans
    if args.out:
        write_plan_json(plan, args.out)
    print(f"strategy {plan.strategy}")
    print(f"blocks {plan.p}")
    print(f"min_span {int(spans.min())}")
    print(f"max_span {int(spans.max())}")
    if args.out:
        print(f"plan_json {args.out}")
    return EXIT_OK


def cmd_factor(args) -> int:
    t0 = time.perf_counter()
    a = _load_matrix(args.matrix, args.seed)
    filled, curve = _analysis(a, args.sample_points)
    plan = _make_plan(args, a.n, curve)
    grid = partition(filled, a, plan)
    tree = dependency_levels(grid)
    preprocess_s = time.perf_counter() - t0

    times = []
    factors = None
    for _ in range(args.repeats):
        t1 = time.perf_counter()
        factors = factorize(
            grid,
            tree,
            workers=args.workers,
            pivot_tol=args.pivot_tol,
            static_pivot=args.static_pivot,
        )
        times.append(time.perf_counter() - t1)
    numeric_s = median(times)
    res = residual(a, factors)
    bstats = block_nnz_stats(grid)
    lstats = level_work_stats(tree)

    print(f"n {a.n}")
    print(f"nnz_filled {filled.nnz_filled}")
    print(f"strategy {plan.strategy}")
    print(f"blocks {plan.p}")
    print(f"tasks {tree.task_count}")
    print(f"levels {tree.n_levels}")
    print(f"preprocess_time_s {preprocess_s:.6f}")
    print(f"numeric_time_s {numeric_s:.6f}")
    print(f"residual {res!r}")
    if args.out:
        rows = [
            ("residual", plan.strategy, plan.p, res),
            ("numeric_time_s", plan.strategy, plan.p, numeric_s),
            ("preprocess_time_s", plan.strategy, plan.p, preprocess_s),
            ("cv_block_nnz", plan.strategy, plan.p, bstats.cv),
            ("cv_grid_cells", plan.strategy, plan.p, bstats.cv_all_cells),
            ("last_level_share", plan.strategy, plan.p, lstats.last_level_share),
            ("makespan_w4", plan.strategy, plan.p, makespan_model(tree, 4)),
            ("tasks", plan.strategy, plan.p, tree.task_count),
        ]
        write_report_csv(rows, args.out, header=["metric", "plan", "blocks", "value"])
        print(f"report_csv {args.out}")
    return EXIT_OK


def _bench_one(name, a, filled, plan, args):
    """One (matrix, plan) bench row; numeric time is the median of repeats."""
    grid = partition(filled, a, plan)
    tree = dependency_levels(grid)
    bstats = block_nnz_stats(grid)
    lstats = level_work_stats(tree)
    span4 = makespan_model(tree, 4)
    times = []
    factors = None
    for _ in range(args.repeats):
        t1 = time.perf_counter()
        factors = factorize(
            grid,
            tree,
            workers=args.workers,
            pivot_tol=args.pivot_tol,
            static_pivot=args.static_pivot,
        )
        times.append(time.perf_counter() - t1)
    res = residual(a, factors)
    bs = plan.params.get("block_size", 0)
    return [
        name,
        None,  # plan label filled by caller
        plan.strategy,
        bs,
        plan.p,
        a.n,
        filled.nnz_filled,
        bstats.cv,
        bstats.cv_all_cells,
        lstats.last_level_share,
        span4,
        tree.task_count,
        tree.n_levels,
        median(times),
        res,
        "ok",
    ]


def cmd_bench(args) -> int:
    rows = []
    time_col = BENCH_HEADER.index("numeric_time_s")
    plan_col = BENCH_HEADER.index("plan")
    for token in args.matrices:
        try:
            a = _load_matrix(token, args.seed)
            filled, curve = _analysis(a, args.sample_points)
        except (LuBlockError, OSError) as exc:
            rows.append(
                [token, "-", "-", 0, 0, 0, 0, 0.0, 0.0, 0.0, 0.0, 0, 0, 0.0,
                 0.0, f"error:{type(exc).__name__}"]
            )
            continue
        n = a.n
        regular_rows = {}
        plans = [("irregular", irregular_plan(curve, n, step=args.step,
                                              max_num=args.max_num,
                                              threshold=args.threshold))]
        for bs in PANGULU_SIZES:
            if 1 <= bs <= n:
                plans.append((f"regular_{bs}", regular_plan(n, bs)))
        select_bs = min(pangulu_size_select(n, filled.nnz_filled), n)
        select_label = f"regular_{select_bs}"
        if select_label not in [p[0] for p in plans]:
            plans.append((select_label, regular_plan(n, select_bs)))
        for label, plan in plans:
            try:
                row = _bench_one(token, a, filled, plan, args)
                row[plan_col] = label
            except LuBlockError as exc:
                row = [token, label, plan.strategy,
                       plan.params.get("block_size", 0), plan.p, n,
                       filled.nnz_filled, 0.0, 0.0, 0.0, 0.0, 0, 0, 0.0, 0.0,
                       f"error:{type(exc).__name__}"]
            rows.append(row)
            if label.startswith("regular_") and row[-1] == "ok":
                regular_rows[label] = row
        if select_label in regular_rows:
            sel = list(regular_rows[select_label])
            sel[plan_col] = "pangulu_select"
            rows.append(sel)
        if regular_rows:
            best = min(regular_rows.values(), key=lambda r: r[time_col])
            best = list(best)
            best[plan_col] = "best_regular"
            rows.append(best)

    if args.out:
        write_report_csv(rows, args.out, header=BENCH_HEADER)
        print(f"bench_csv {args.out} rows {len(rows)}")
    else:
        write_report_csv(rows, "/dev/stdout", header=BENCH_HEADER)
    return EXIT_OK


# --- parser ---------------------------------------------------------------------


def _add_common(p, with_plan=True):
    p.add_argument("--sample-points", type=int, default=DEFAULT_SAMPLE_POINTS,
                   help="curve samples (default 1000, clamped to n)")
    p.add_argument("--seed", type=int, default=0,
                   help="default seed for gen: matrix specs")
    if with_plan:
        p.add_argument("--strategy", choices=("irregular", "regular"),
                       default="irregular")
        p.add_argument("--block-size", type=int, default=None,
                       help="block size for --strategy regular")
        p.add_argument("--step", type=int, default=2,
                       help="curve window width in samples (default 2)")
        p.add_argument("--max-num", type=int, default=3,
                       help="max consecutive skipped windows (default 3)")
        p.add_argument("--threshold", type=_parse_threshold, default="linear",
                       help="window rise marking a dense region; number or 'linear'")


def _add_factor_opts(p):
    p.add_argument("--workers", type=int, default=_default_workers(),
                   help="worker threads (default $LUBLOCK_WORKERS or 1)")
    p.add_argument("--pivot-tol", type=float, default=DEFAULT_PIVOT_TOL)
    p.add_argument("--static-pivot", type=float, default=None,
                   help="replace failed pivots with eps*max|A| instead of erroring")
    p.add_argument("--repeats", type=int, default=3,
                   help="timing repeats; the median is reported (default 3)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lublock",
        description="Structure-aware irregular blocking for sparse LU factorization",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="distribution curve, fill stats, curve class")
    p.add_argument("matrix")
    _add_common(p, with_plan=False)
    p.add_argument("--out", default=None, help="curve CSV path")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("plan", help="compute a blocking plan")
    p.add_argument("matrix")
    _add_common(p)
    p.add_argument("--out", default=None, help="plan JSON path")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("factor", help="full pipeline: plan, factorize, validate")
    p.add_argument("matrix")
    _add_common(p)
    _add_factor_opts(p)
    p.add_argument("--out", default=None, help="metrics report CSV path")
    p.set_defaults(func=cmd_factor)

    p = sub.add_parser("bench", help="compare irregular vs regular plans per matrix")
    p.add_argument("matrices", nargs="*")
    _add_common(p)
    _add_factor_opts(p)
    p.add_argument("--out", default=None, help="comparison CSV path")
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except ZeroPivot as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except _IO_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except LuBlockError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
