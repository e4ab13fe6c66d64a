"""Command line front end: corpus generation, single runs, grids, reports.

Output files are deterministic for a given (instance, configuration, seed),
so replaying a command reproduces them byte for byte.  Progress chatter and
timing go to stderr or to sidecar files, never into the results.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import bench
from .errors import ConfigInvalid, RosterError
from .genetic import GaConfig, run
from .instgen import (
    GenParams,
    full_corpus,
    generate,
    read_instance,
    small_corpus,
    write_instance,
)
from .decoders import ScoreWeights
from .oracle import audit, solve_enumerate, solve_exact


def _json_line(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":")) + "\n"


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------- generate


def _cmd_generate(args) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    if args.corpus is not None:
        single_flags = (args.seed, args.nurses, args.grades, args.tightness,
                        args.universe_cap, args.combined_cap, args.name)
        if any(v is not None for v in single_flags) or args.random:
            raise ConfigInvalid("--corpus cannot be combined with single-instance flags")
        corpus = small_corpus() if args.corpus == "small" else full_corpus()
        for gi in corpus:
            write_instance(gi, out_dir / f"{gi.instance.name}.json")
        print(f"wrote {len(corpus)} instances to {out_dir}")
        return 0
    params = GenParams(
        nurses=args.nurses if args.nurses is not None else 30,
        grades=args.grades if args.grades is not None else 3,
        tightness=args.tightness if args.tightness is not None else 0.9,
        planted=not args.random,
        universe_cap=args.universe_cap,
        combined_cap=args.combined_cap if args.combined_cap is not None else 40,
        zero_cost_fraction=(
            args.zero_cost_fraction if args.zero_cost_fraction is not None else 0.12
        ),
        seed=args.seed if args.seed is not None else 0,
        name=args.name,
    )
    gi = generate(params)
    path = out_dir / f"{gi.instance.name}.json"
    write_instance(gi, path)
    print(f"wrote {path}")
    return 0


# ------------------------------------------------------------------- solve


def _config_from(args) -> GaConfig:
    weights = None
    if args.preference_weight is not None:
        weights = ScoreWeights(preference=args.preference_weight)
    return GaConfig(
        population=args.population,
        crossover=args.crossover,
        pux_p=args.pux_p,
        mutation_rate=args.mutation_rate,
        stagnation_limit=args.stagnation_limit,
        max_generations=args.max_generations,
        decoder=args.decoder,
        ordering=args.ordering,
        weights=weights,
        bound_active=args.bound,
        seed=args.seed,
    )


def _cmd_solve(args) -> int:
    gi = read_instance(args.instance)
    config = _config_from(args)
    result = run(gi.instance, config)
    report = audit(result.best_schedule, gi.instance)
    payload = {
        "instance": gi.instance.name,
        "config": {
            "population": config.population,
            "crossover": config.crossover.value,
            "pux_p": config.pux_p,
            "mutation_rate": config.mutation_rate,
            "elite_fraction": config.elite_fraction,
            "stagnation_limit": config.stagnation_limit,
            "max_generations": config.max_generations,
            "penalty_weight": config.penalty_weight,
            "decoder": config.decoder.value,
            "ordering": config.ordering.value,
            "preference_weight": config.score_weights().preference,
            "bound_active": config.bound_active,
            "seed": config.seed,
        },
        "feasible": result.feasible,
        "best_fitness": result.best_fitness,
        "best_cost": result.best_cost,
        "best_undercover": result.best_undercover,
        "best_feasible_cost": result.best_feasible_cost,
        "best_feasible_schedule": (
            None if result.best_feasible_schedule is None
            else list(result.best_feasible_schedule)
        ),
        "generations": result.generations,
        "evaluations": result.evaluations,
        "bound_fallbacks": result.bound_fallbacks,
        "cover_fallbacks": result.cover_fallbacks,
        "schedule": list(result.best_schedule),
        "audit": {
            "cost": report.cost,
            "total_undercover": report.total_undercover,
            "shortfalls": [list(t) for t in report.shortfalls],
        },
    }
    if args.optimum is not None:
        payload["gap"] = (
            None if result.best_feasible_cost is None
            else result.best_feasible_cost - args.optimum
        )
    _emit(_json_line(payload), args.out)
    return 0


# ------------------------------------------------------------------ oracle


def _cmd_oracle(args) -> int:
    gi = read_instance(args.instance)
    methods = ("branch-and-bound", "enumerate") if args.method == "both" else (args.method,)
    lines = []
    for method in methods:
        if method == "branch-and-bound":
            res = solve_exact(gi.instance, node_limit=args.node_limit)
        else:
            res = solve_enumerate(gi.instance, assignment_limit=args.assignment_limit)
        lines.append(_json_line({
            "instance": gi.instance.name,
            "method": method,
            "status": res.status.value,
            "optimal_cost": res.optimal_cost,
            "schedule": None if res.schedule is None else list(res.schedule),
            "nodes_explored": res.nodes_explored,
        }))
    _emit("".join(lines), args.out)
    return 0


# ------------------------------------------------------------------- bench


def _load_instances(args):
    if args.corpus is not None:
        corpus = small_corpus() if args.corpus == "small" else full_corpus()
        return tuple(gi.instance for gi in corpus)
    paths: list[Path] = []
    for raw in args.instances:
        p = Path(raw)
        if p.is_dir():
            paths.extend(sorted(p.glob("*.json")))
        else:
            paths.append(p)
    if not paths:
        raise ConfigInvalid("no instance files given")
    return tuple(read_instance(p).instance for p in paths)


def _cmd_bench(args) -> int:
    instances = _load_instances(args)
    cells = list(bench.GRIDS[args.grid]())
    if args.baseline:
        for kind in ("cover", "contribution", "combined"):
            cells.append(bench.CellSpec(
                label=f"random-{kind}", decoder=kind, baseline=True,
            ))
    spec = bench.BenchSpec(
        instances=instances,
        cells=tuple(cells),
        runs=args.runs,
        base_seed=args.base_seed,
        censor=args.censor,
    )

    def progress(cell, inst, seed):
        if not args.quiet:
            print(f"run {cell} {inst} seed={seed}", file=sys.stderr)

    records = bench.run_bench(spec, args.out, times_path=args.times, progress=progress)
    print(f"{len(records)} records in {args.out}")
    return 0


# ------------------------------------------------------------------ report


def _cmd_report(args) -> int:
    records = bench.load_results(args.results)
    optima = None
    if args.optima:
        raw = json.loads(Path(args.optima).read_text(encoding="utf-8"))
        optima = {str(k): int(v) for k, v in raw.items()}
    times = bench.load_times(args.times) if args.times else None
    text = bench.report_text(records, censor=args.censor, optima=optima, times=times)
    if args.bands:
        means = bench.band_means(records, censor=args.censor)
        order = []
        for rec in records:
            if rec["cell"] not in order:
                order.append(rec["cell"])
        lines = ["", "band means:", "cell  band  feasibility  cost"]
        for cell in order:
            for band in sorted({b for (c, b) in means if c == cell}):
                feas, cost = means[(cell, band)]
                lines.append(f"{cell}  {band}  {100.0 * feas:.1f}%  {cost:.2f}")
        text += "\n".join(lines) + "\n"
    sys.stdout.write(text)
    if args.csv:
        Path(args.csv).write_text(
            bench.report_csv(records, censor=args.censor, optima=optima, times=times),
            encoding="utf-8",
        )
    return 0


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rosterga",
        description="Roster solver toolkit: generate instances, run the GA, "
                    "benchmark grids, and check small instances exactly.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write instance files")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--corpus", choices=("small", "full"),
                   help="write a canonical corpus instead of a single instance")
    p.add_argument("--seed", type=int)
    p.add_argument("--nurses", type=int)
    p.add_argument("--grades", type=int)
    p.add_argument("--tightness", type=float)
    p.add_argument("--random", action="store_true",
                   help="draw demand freely instead of planting a feasible roster")
    p.add_argument("--universe-cap", type=int)
    p.add_argument("--combined-cap", type=int)
    p.add_argument("--zero-cost-fraction", type=float)
    p.add_argument("--name")
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("solve", help="run the GA once on an instance")
    p.add_argument("instance")
    p.add_argument("--decoder", default="combined",
                   choices=("cover", "contribution", "combined"))
    p.add_argument("--ordering", default="lexico",
                   choices=("lexico", "rand-order", "biased", "rand-cost", "cheapest"))
    p.add_argument("--crossover", default="order",
                   choices=("pmx", "order", "c1", "uniform-order", "pux"))
    p.add_argument("--pux-p", type=float, default=0.66)
    p.add_argument("--preference-weight", type=float)
    p.add_argument("--bound", action="store_true", help="prune with the best feasible cost")
    p.add_argument("--population", type=int, default=100)
    p.add_argument("--mutation-rate", type=float, default=0.015)
    p.add_argument("--stagnation-limit", type=int, default=30)
    p.add_argument("--max-generations", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--optimum", type=int, help="known optimal cost, records the gap")
    p.add_argument("--out", help="write the result record here instead of stdout")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("oracle", help="solve a small instance exactly")
    p.add_argument("instance")
    p.add_argument("--method", default="branch-and-bound",
                   choices=("branch-and-bound", "enumerate", "both"))
    p.add_argument("--node-limit", type=int)
    p.add_argument("--assignment-limit", type=int, default=2_000_000)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_oracle)

    p = sub.add_parser("bench", help="run an experiment grid over a corpus")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--instances", nargs="+", help="instance files or directories")
    src.add_argument("--corpus", choices=("small", "full"), help="canonical corpus")
    p.add_argument("--grid", default="default", choices=sorted(bench.GRIDS))
    p.add_argument("--baseline", action="store_true",
                   help="add random-permutation baseline cells")
    p.add_argument("--runs", type=int, default=20)
    p.add_argument("--base-seed", type=int, default=0)
    p.add_argument("--censor", type=float, default=bench.CENSOR_DEFAULT)
    p.add_argument("--times", help="sidecar file for wall-clock measurements")
    p.add_argument("--quiet", action="store_true")
    p.add_argument("--out", required=True, help="results file (line-delimited JSON)")
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("report", help="summarise a results file")
    p.add_argument("results")
    p.add_argument("--censor", type=float, default=bench.CENSOR_DEFAULT)
    p.add_argument("--optima", help="JSON file mapping instance name to optimal cost")
    p.add_argument("--times", help="sidecar file written by bench --times")
    p.add_argument("--bands", action="store_true", help="append per-band means")
    p.add_argument("--csv", help="also write the summary as CSV")
    p.set_defaults(func=_cmd_report)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except RosterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
