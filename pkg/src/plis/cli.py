"""Command-line driver.

Subcommands:

``plis test INPUT``
    Run a testing procedure on a file of observations and write a
    per-hypothesis table (index, x, s_x, s_y, q_value, e_value, rejected).

``plis simulate PLAN``
    Run a bundled or JSON experiment plan and write raw/summary CSVs.

``plis accept``
    Run the acceptance reproduction suites and print one verdict line per
    criterion.

Exit codes: 0 success, 1 execution failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .acceptance import run_all
from .core import Gaussian, IngestionError, PlisError, STANDARD_NORMAL
from .harness import plan_from_json, run_plan, write_raw_csv, write_summary_csv
from .mirror import ScorePairVector, mirror_decide
from .plans import BUNDLED_PLANS, DEFAULT_SEED
from .procedures import (
    ProcedureResult,
    WorkingModelSpec,
    derandomized_plis,
    plis,
    semi_supervised_plis,
)

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_CONFIG = 2

_HEADER_NAMES = {"index", "x", "theta", "label"}


def _split_row(line: str) -> list[str]:
    return line.split(",") if "," in line else line.split()


def read_observations(path: str):
    """Parse a delimited input file, one observation per row.

    Accepted layouts (optional header): a single value column; value plus
    a 0/1 label column where label 1 marks members of the labeled null
    pool; or index/value/truth exports from the simulation generators
    (the truth column is ignored).

    Returns (x, pool) where pool is None when no label column is present.
    """
    values, labels = [], []
    columns = None
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            fields = _split_row(line)
            if columns is None:
                head = [f.strip().lower() for f in fields]
                if set(head) <= _HEADER_NAMES:
                    if "x" not in head:
                        raise IngestionError(f"{path}:{lineno}: header lacks an 'x' column")
                    columns = head
                    continue
                if len(fields) == 1:
                    columns = ["x"]
                elif len(fields) == 2:
                    columns = ["x", "label"]
                else:
                    raise IngestionError(
                        f"{path}:{lineno}: cannot infer columns from {len(fields)} "
                        "unnamed fields; add a header"
                    )
            if len(fields) != len(columns):
                raise IngestionError(
                    f"{path}:{lineno}: expected {len(columns)} fields, got {len(fields)}"
                )
            row = dict(zip(columns, fields))
            try:
                value = float(row["x"])
                label = int(row["label"]) if "label" in row else 0
            except ValueError as exc:
                raise IngestionError(f"{path}:{lineno}: {exc}") from exc
            if label not in (0, 1):
                raise IngestionError(f"{path}:{lineno}: label must be 0 or 1, got {label}")
            values.append(value)
            labels.append(label)
    if not values:
        raise IngestionError(f"{path}: no observations found")
    x = np.asarray(values, dtype=np.float64)
    lab = np.asarray(labels, dtype=bool)
    if columns is not None and "label" in columns and lab.any():
        return x[~lab], x[lab]
    return x, None


def read_score_pairs(path: str) -> ScorePairVector:
    s_x, s_y = [], []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            fields = _split_row(line)
            if len(fields) != 2:
                raise IngestionError(f"{path}:{lineno}: expected 's_x,s_y'")
            try:
                s_x.append(float(fields[0]))
                s_y.append(float(fields[1]))
            except ValueError as exc:
                raise IngestionError(f"{path}:{lineno}: {exc}") from exc
    if not s_x:
        raise IngestionError(f"{path}: no score pairs found")
    return ScorePairVector.from_scores(np.asarray(s_x), np.asarray(s_y))


def _parse_null_dist(spec: str) -> Gaussian:
    try:
        kind, _, rest = spec.partition(":")
        if kind.strip().lower() != "normal":
            raise ValueError(f"unknown null distribution kind {kind!r}")
        if rest:
            mean_s, sd_s = rest.split(",")
            return Gaussian(float(mean_s), float(sd_s))
        return STANDARD_NORMAL
    except ValueError as exc:
        raise PlisError(f"bad --null-dist {spec!r}: {exc}") from exc


def _print_config(pairs) -> None:
    for key, value in pairs:
        print(f"{key} = {value}")


def _write_hypothesis_table(result: ProcedureResult, x: np.ndarray, out) -> None:
    out.write("index,x,s_x,s_y,q_value,e_value,rejected\n")
    if result.scores is not None:
        s_x, s_y = result.scores.s_x, result.scores.s_y
    else:
        s_x = s_y = np.full(x.size, np.nan)
    for i in range(x.size):
        out.write(
            f"{i},{x[i]:.10g},{s_x[i]:.10g},{s_y[i]:.10g},"
            f"{result.q_values[i]:.10g},{result.e_values[i]:.10g},"
            f"{int(result.decisions[i])}\n"
        )


def cmd_test(args) -> int:
    null_dist = _parse_null_dist(args.null_dist)
    if args.print_config:
        _print_config([
            ("subcommand", "test"), ("input", args.input), ("method", args.method),
            ("model", args.model), ("combiner", args.combiner), ("alpha", args.alpha),
            ("seed", args.seed), ("nulls", args.nulls or ""),
            ("null_dist", args.null_dist), ("out", args.out or "-"),
            ("debug_scores", args.debug_scores or ""),
        ])
        return EXIT_OK

    model = WorkingModelSpec(kind=args.model, combiner=args.combiner)

    if args.debug_scores:
        scores = read_score_pairs(args.debug_scores)
        decision = mirror_decide(scores, args.alpha)
        result = ProcedureResult(
            decisions=decision.rejected, tau=decision.tau,
            q_values=decision.q_values, e_values=decision.e_values,
            scores=scores, diagnostics={"injected_scores": True},
        )
        x = np.full(scores.m, np.nan)
    else:
        if args.input is None:
            raise PlisError("an input file is required unless --debug-scores is given")
        x, pool = read_observations(args.input)
        if args.nulls is not None:
            if pool is not None:
                raise PlisError("give the null pool either as a label column or "
                                "via --nulls, not both")
            pool, extra = read_observations(args.nulls)
            if extra is not None:
                raise PlisError("--nulls file must not itself carry a label column")
        if pool is not None:
            result = semi_supervised_plis(x, pool, model, args.alpha, args.seed)
        elif args.method == "derandomized":
            result = derandomized_plis(x, null_dist, model, alpha=args.alpha,
                                       seed=args.seed)
        else:
            result = plis(x, null_dist, model, args.alpha, args.seed)

    if args.out:
        with open(args.out, "w") as fh:
            _write_hypothesis_table(result, x, fh)
    else:
        _write_hypothesis_table(result, x, sys.stdout)
    print(f"rejections: {result.n_rejected}")
    print(f"tau: {result.tau:.10g}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    if args.plan in BUNDLED_PLANS:
        plan = BUNDLED_PLANS[args.plan]()
    elif os.path.exists(args.plan):
        plan = plan_from_json(args.plan)
    else:
        raise PlisError(f"unknown plan {args.plan!r}: not a bundled name "
                        f"({', '.join(sorted(BUNDLED_PLANS))}) or a file")
    if args.print_config:
        _print_config([
            ("subcommand", "simulate"), ("plan", plan.name), ("alpha", plan.alpha),
            ("seed", plan.seed), ("n_rep", plan.n_rep),
            ("methods", " ".join(plan.methods)),
            ("cells", " ".join(c.cell_id for c in plan.cells)),
            ("threads", args.threads), ("out", args.out),
        ])
        return EXIT_OK

    rows, summaries = run_plan(plan, threads=args.threads)
    os.makedirs(args.out, exist_ok=True)
    raw_path = os.path.join(args.out, f"{plan.name}_raw.csv")
    summary_path = os.path.join(args.out, f"{plan.name}_summary.csv")
    write_raw_csv(rows, raw_path)
    write_summary_csv(summaries, summary_path)
    print(f"wrote {raw_path} and {summary_path}")

    summarized = {(s.cell_id, s.method) for s in summaries}
    failed_cells = sorted(
        f"{cell.cell_id}/{method}"
        for cell in plan.cells
        for method in plan.methods
        if (cell.cell_id, method) not in summarized
    )
    if failed_cells:
        print(f"wholly failed cells: {', '.join(failed_cells)}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def cmd_accept(args) -> int:
    numbers = None
    if args.criteria:
        try:
            numbers = sorted({int(tok) for tok in args.criteria.split(",")})
        except ValueError as exc:
            raise PlisError(f"bad --criteria {args.criteria!r}: {exc}") from exc
        if any(not 1 <= n <= 12 for n in numbers):
            raise PlisError("--criteria entries must be in 1..12")
    if args.print_config:
        _print_config([
            ("subcommand", "accept"), ("n_rep", args.n_rep), ("seed", args.seed),
            ("criteria", ",".join(map(str, numbers)) if numbers else "all"),
        ])
        return EXIT_OK
    results = run_all(n_rep=args.n_rep, seed=args.seed, numbers=numbers)
    for result in results:
        print(result.line())
    n_failed = sum(not r.passed for r in results)
    print(f"{len(results) - n_failed}/{len(results)} criteria passed")
    return EXIT_OK if n_failed == 0 else EXIT_RUNTIME


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plis",
        description="Conformal FDR control for structured multiple testing.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_test = sub.add_parser("test", help="run a procedure on a file of observations")
    p_test.add_argument("input", nargs="?", help="delimited input, one observation per row")
    p_test.add_argument("--method", default="plis", choices=("plis", "derandomized"))
    p_test.add_argument("--model", default="hmm", choices=("hmm", "twogroup"))
    p_test.add_argument("--combiner", default="max_abs", choices=("max_abs", "additive"))
    p_test.add_argument("--alpha", type=float, default=0.05)
    p_test.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p_test.add_argument("--nulls", help="file of labeled null samples (semi-supervised)")
    p_test.add_argument("--null-dist", default="normal:0,1",
                        help="known null law for the supervised case, e.g. normal:0,1")
    p_test.add_argument("--out", help="output CSV path (default: stdout)")
    p_test.add_argument("--debug-scores",
                        help="inject raw score pairs 's_x,s_y' and skip model fitting")
    p_test.add_argument("--print-config", action="store_true")
    p_test.set_defaults(func=cmd_test)

    p_sim = sub.add_parser("simulate", help="run an experiment plan")
    p_sim.add_argument("plan", help="bundled plan name or JSON plan file")
    p_sim.add_argument("--out", default=".", help="output directory")
    p_sim.add_argument("--threads", type=int, default=1)
    p_sim.add_argument("--print-config", action="store_true")
    p_sim.set_defaults(func=cmd_simulate)

    p_acc = sub.add_parser("accept", help="run the acceptance reproduction suites")
    p_acc.add_argument("--n-rep", type=int, default=200)
    p_acc.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p_acc.add_argument("--criteria", help="comma-separated criterion numbers (default: all)")
    p_acc.add_argument("--print-config", action="store_true")
    p_acc.set_defaults(func=cmd_accept)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (PlisError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
