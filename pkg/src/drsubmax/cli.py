"""``drsub`` command line: generate instances, solve them, tabulate results."""

from __future__ import annotations

import argparse
import csv
import math
import os
import sys
import time
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path

from . import cutplane, sbb, verify
from .model import DomainError, Instance, RefusalError
from .problems import gen_covering, gen_influence, gen_quadratic

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_LIMIT = 2
EXIT_INFEASIBLE = 3
EXIT_USAGE = 64

SOLVERS = ("sbb", "approx-cp", "exact-cp", "grid")
RESULTS_HEADER = [
    "instance", "solver", "n", "budget", "seed", "runtime_s",
    "lb", "ub", "rel_gap", "termination", "nodes_or_iters",
]
LIMIT_TERMINATIONS = {"time_limit", "node_limit", "iter_limit"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class RunRecord:
    instance: str
    solver: str
    n: int
    budget: float
    seed: int
    runtime_s: float
    lb: float
    ub: float
    termination: str
    nodes_or_iters: int

    @property
    def rel_gap(self) -> float:
        return cutplane.relative_gap(self.lb, self.ub)

    def row(self) -> list:
        return [
            self.instance, self.solver, self.n, repr(float(self.budget)), self.seed,
            f"{self.runtime_s:.6f}", repr(float(self.lb)), repr(float(self.ub)),
            repr(float(self.rel_gap)), self.termination, self.nodes_or_iters,
        ]


def default_seed() -> int:
    raw = os.environ.get("DRSUB_SEED", "0")
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"DRSUB_SEED must be an integer, got {raw!r}") from None


def _fmt(v: float) -> str:
    return format(float(v), "g")


# ---------------------------------------------------------------------------
# generate


def _instance_name(args, seed: int) -> str:
    if args.kind == "quadratic":
        return f"quadratic_n{args.n}_m{args.m}_s{seed}.json"
    if args.kind == "covering":
        tag = "cap_covering" if args.capacitated else "uncap_covering"
        return f"{tag}_n{args.n}_j{args.j}_b{_fmt(args.budget)}_s{seed}.json"
    return f"influence_{args.g}_n{args.nodes}_b{_fmt(args.budget)}_s{seed}.json"


def _build(args, seed: int) -> Instance:
    if args.kind == "quadratic":
        return gen_quadratic(args.n, args.m, seed)
    if args.kind == "covering":
        return gen_covering(args.n, args.j, args.budget, args.capacitated, seed,
                            g_kind=args.g, dbar=args.dbar, alpha=args.alpha)
    return gen_influence(args.nodes, args.budget, args.g, seed,
                         p_live=args.p_live, n_scenarios=args.scenarios)


def cmd_generate(args) -> int:
    seed = args.seed if args.seed is not None else default_seed()
    if args.count < 1:
        raise UsageError("--count must be at least 1")
    if args.out and args.count > 1:
        raise UsageError("--out names a single file; use --out-dir with --count")
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for k in range(args.count):
        inst = _build(args, seed + k)
        path = Path(args.out) if args.out else out_dir / _instance_name(args, seed + k)
        inst.save(path)
        print(path)
    return EXIT_OK


# ---------------------------------------------------------------------------
# solve


def _run_solver(args, inst: Instance):
    problem = inst.to_problem()
    t0 = time.perf_counter()
    if args.solver == "sbb":
        opts = sbb.SbbOptions(
            rel_gap=args.rel_gap, time_limit=args.time_limit, stall_iters=args.stall,
            subproblem_gap=args.subgap, max_nodes=args.max_nodes, workers=args.workers,
            progress=args.trace,
        )
        res = sbb.solve(problem, opts)
        return (time.perf_counter() - t0, res.best_lb, res.best_ub, res.termination.value,
                res.nodes_explored, res.incumbent)
    if args.solver == "approx-cp":
        opts = cutplane.CutPlaneOptions(args.stall, args.subgap, trace=args.trace)
        res = cutplane.approximate_cutting_plane(problem, opts=opts)
        return (time.perf_counter() - t0, res.lower_bound, res.upper_bound, res.termination.value,
                res.iterations, res.incumbent)
    if args.solver == "exact-cp":
        opts = cutplane.ExactOptions(binary_budget=args.binary_budget, trace=args.trace)
        res = cutplane.exact_cutting_plane(problem, epsilon=args.epsilon, opts=opts)
        return (time.perf_counter() - t0, res.lower_bound, res.upper_bound, res.termination.value,
                res.iterations, res.incumbent)
    res = verify.grid_maximize(problem, args.grid_step)
    ub = res.best_value + res.slack
    return (time.perf_counter() - t0, res.best_value, ub, "grid", res.points_evaluated, res.best_x)


def _exit_code(solver: str, termination: str) -> int:
    if termination == "infeasible":
        return EXIT_INFEASIBLE
    if termination in LIMIT_TERMINATIONS:
        return EXIT_LIMIT
    return EXIT_OK


def append_record(path, record: RunRecord) -> None:
    path = Path(path)
    fresh = not path.exists() or path.stat().st_size == 0
    with open(path, "a", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        if fresh:
            writer.writerow(RESULTS_HEADER)
        writer.writerow(record.row())


def cmd_solve(args) -> int:
    path = Path(args.instance)
    if not path.is_file():
        raise UsageError(f"no such instance file: {path}")
    try:
        inst = Instance.load(path)
    except (ValueError, KeyError) as exc:
        raise UsageError(f"cannot read instance {path}: {exc}") from exc
    runtime, lb, ub, term, count, x = _run_solver(args, inst)
    record = RunRecord(path.stem, args.solver, inst.n, inst.budget, inst.seed, runtime, lb, ub, term, count)
    if args.results:
        append_record(args.results, record)
    print(f"{record.instance}  solver={record.solver}  lb={lb:.6g}  ub={ub:.6g}  "
          f"gap={record.rel_gap:.4g}  termination={term}  count={count}  time={runtime:.2f}s")
    if x is not None:
        print("x = " + " ".join(f"{v:.6g}" for v in x))
    return _exit_code(args.solver, term)


# ---------------------------------------------------------------------------
# table


def read_records(path) -> list:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or list(reader.fieldnames) != RESULTS_HEADER:
            raise UsageError(f"{path} does not have the results header")
        return list(reader)


def aggregate(rows) -> list:
    """Per (solver, n, budget) cell: mean runtime over solved runs, mean gap over limited runs."""
    cells = defaultdict(lambda: {"solved": [], "limited": []})
    for r in rows:
        key = (r["solver"], int(r["n"]), float(r["budget"]))
        if r["termination"] in LIMIT_TERMINATIONS:
            cells[key]["limited"].append(float(r["rel_gap"]))
        else:
            cells[key]["solved"].append(float(r["runtime_s"]))
    out = []
    for key in sorted(cells):
        c = cells[key]
        out.append({
            "solver": key[0], "n": key[1], "budget": key[2],
            "solved": len(c["solved"]),
            "mean_runtime_s": sum(c["solved"]) / len(c["solved"]) if c["solved"] else None,
            "limited": len(c["limited"]),
            "mean_gap_pct": 100.0 * sum(c["limited"]) / len(c["limited"]) if c["limited"] else None,
        })
    return out


def format_table(cells) -> str:
    lines = [f"{'solver':<10}{'n':>4}{'b':>7}{'solved':>8}{'runtime_s':>12}{'limited':>9}{'gap':>10}"]
    for c in cells:
        rt = f"{c['mean_runtime_s']:.1f}" if c["mean_runtime_s"] is not None else "-"
        gap = f"{c['mean_gap_pct']:.1f}%" if c["mean_gap_pct"] is not None else "-"
        lines.append(f"{c['solver']:<10}{c['n']:>4}{_fmt(c['budget']):>7}{c['solved']:>8}{rt:>12}{c['limited']:>9}{gap:>10}")
    return "\n".join(lines)


def cmd_table(args) -> int:
    if not Path(args.results).is_file():
        raise UsageError(f"no such results file: {args.results}")
    rows = read_records(args.results)
    if not rows:
        raise UsageError("results file has no records")
    print(format_table(aggregate(rows)))
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify


def cmd_verify(args) -> int:
    seed = args.seed if args.seed is not None else default_seed()
    checks = verify.invariant_suite(seed=seed, trials=args.trials, points=args.points)
    for c in checks:
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.name}: {c.detail}")
    return EXIT_OK if all(c.passed for c in checks) else EXIT_FAIL


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="drsub", description="Global maximisation of monotone DR-submodular functions.")
    sub = p.add_subparsers(dest="verb", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", help="write seeded benchmark instances as JSON")
    g.add_argument("kind", choices=["quadratic", "covering", "influence"])
    g.add_argument("--n", type=int, default=5, help="dimension (quadratic, covering)")
    g.add_argument("--m", type=int, default=None, help="constraint rows for quadratic (default n)")
    g.add_argument("--j", type=int, default=150, help="demand points for covering")
    g.add_argument("--nodes", type=int, default=5, help="graph nodes for influence")
    g.add_argument("--budget", type=float, default=2.0)
    g.add_argument("--capacitated", action="store_true")
    g.add_argument("--alpha", type=float, default=0.1)
    g.add_argument("--dbar", type=float, default=0.2)
    g.add_argument("--g", choices=["contest", "identity"], default="contest")
    g.add_argument("--p-live", type=float, default=0.1)
    g.add_argument("--scenarios", type=int, default=5)
    g.add_argument("--seed", type=int, default=None, help="defaults to $DRSUB_SEED or 0")
    g.add_argument("--count", type=int, default=1, help="consecutive seeds to generate")
    g.add_argument("--out", default=None, help="output file (single instance)")
    g.add_argument("--out-dir", default=".")
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("solve", help="solve an instance and append a results row")
    s.add_argument("instance")
    s.add_argument("--solver", choices=SOLVERS, default="sbb")
    s.add_argument("--rel-gap", type=float, default=0.05)
    s.add_argument("--time-limit", type=float, default=3600.0)
    s.add_argument("--stall", type=int, default=5)
    s.add_argument("--subgap", type=float, default=1e-3)
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--max-nodes", type=int, default=None)
    s.add_argument("--epsilon", type=float, default=0.01, help="absolute gap for exact-cp")
    s.add_argument("--binary-budget", type=int, default=60)
    s.add_argument("--grid-step", type=float, default=0.01)
    s.add_argument("--trace", default=None, help="CSV trace (per node for sbb, per iteration otherwise)")
    s.add_argument("--results", default="results.csv")
    s.set_defaults(func=cmd_solve)

    t = sub.add_parser("table", help="aggregate a results CSV per (n, budget)")
    t.add_argument("results")
    t.set_defaults(func=cmd_table)

    v = sub.add_parser("verify", help="run the invariant checks on small seeded instances")
    v.add_argument("--seed", type=int, default=None)
    v.add_argument("--trials", type=int, default=10_000)
    v.add_argument("--points", type=int, default=100)
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "kind", None) == "quadratic" and args.m is None:
        args.m = args.n
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"drsub: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except RefusalError as exc:
        print(f"drsub: refused: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DomainError as exc:
        print(f"drsub: invalid input: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
