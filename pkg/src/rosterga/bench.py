"""Benchmark harness: seeded experiment grids over instance corpora.

Results are line-delimited JSON, one run per line, written in a fixed
order with a canonical byte layout so a replayed grid produces an
identical file.  Wall-clock measurements go to a separate sidecar file
for the same reason; they change between executions and would otherwise
poison the determinism of the results themselves.

A partially written results file can be resumed: existing (cell,
instance, seed) triples are skipped and the missing ones appended in
canonical order.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .decoders import (
    BatchDecoder,
    DecodeContext,
    DecoderKind,
    DecodeStats,
    OrderingKind,
    ScoreWeights,
    SimpleBound,
    build_orderings,
)
from .errors import ConfigInvalid
from .genetic import CrossoverKind, GaConfig, RunResult, run
from .model import Instance

CENSOR_DEFAULT = 100.0
BASELINE_PERMUTATIONS = 10_000


@dataclass(frozen=True)
class CellSpec:
    """One experiment cell: a solver configuration to run on every instance.

    With ``baseline`` set the cell skips the evolutionary loop and decodes
    a fixed budget of uniformly random permutations instead, which isolates
    what the decoder alone contributes.
    """

    label: str
    decoder: DecoderKind = DecoderKind.COMBINED
    ordering: OrderingKind = OrderingKind.LEXICO
    crossover: CrossoverKind = CrossoverKind.ORDER
    pux_p: float = 0.66
    preference_weight: float | None = None
    bound_active: bool = False
    baseline: bool = False

    def __post_init__(self) -> None:
        if not self.label:
            raise ConfigInvalid("cell label must be nonempty")
        object.__setattr__(self, "decoder", DecoderKind(self.decoder))
        object.__setattr__(self, "ordering", OrderingKind(self.ordering))
        object.__setattr__(self, "crossover", CrossoverKind(self.crossover))

    def weights(self) -> ScoreWeights | None:
        if self.preference_weight is None:
            return None
        return ScoreWeights(preference=self.preference_weight)

    def config(self, seed: int) -> GaConfig:
        return GaConfig(
            decoder=self.decoder,
            ordering=self.ordering,
            crossover=self.crossover,
            pux_p=self.pux_p,
            weights=self.weights(),
            bound_active=self.bound_active,
            seed=seed,
        )


@dataclass(frozen=True)
class BenchSpec:
    """A grid: every cell runs on every instance with a shared seed list."""

    instances: tuple[Instance, ...]
    cells: tuple[CellSpec, ...]
    runs: int = 20
    base_seed: int = 0
    censor: float = CENSOR_DEFAULT

    def __post_init__(self) -> None:
        if self.runs < 1:
            raise ConfigInvalid("runs must be positive")
        labels = [cell.label for cell in self.cells]
        if len(set(labels)) != len(labels):
            raise ConfigInvalid("cell labels must be unique")
        names = [inst.name for inst in self.instances]
        if len(set(names)) != len(names):
            raise ConfigInvalid("instance names must be unique")

    @property
    def seeds(self) -> tuple[int, ...]:
        # one list for the whole grid, so cells differ only in configuration
        return tuple(range(self.base_seed, self.base_seed + self.runs))


def random_search(
    instance: Instance,
    decoder: DecoderKind = DecoderKind.COMBINED,
    ordering: OrderingKind = OrderingKind.LEXICO,
    weights: ScoreWeights | None = None,
    n_perms: int | None = None,
    seed: int = 0,
) -> RunResult:
    """Decode a budget of random permutations and keep the best outcomes."""
    t0 = time.perf_counter()
    if n_perms is None:
        n_perms = BASELINE_PERMUTATIONS
    decoder = DecoderKind(decoder)
    rng = np.random.default_rng(seed)
    ctx = DecodeContext(instance)
    n = instance.n
    perms = np.stack([rng.permutation(n) for _ in range(n_perms)])
    orders = build_orderings(ctx, OrderingKind(ordering), rng)
    if weights is None:
        weights = ScoreWeights.default_for(decoder)
    batch = BatchDecoder(ctx, decoder, weights, orders)
    stats = DecodeStats()
    bound = SimpleBound(active=False)

    t_dec = time.perf_counter()
    assign, cost, under = batch.decode_many(perms, bound, stats)
    decode_time = time.perf_counter() - t_dec

    fitness = cost + 20.0 * under
    best = int(np.argmin(fitness))
    feas = under == 0
    feas_cost: int | None = None
    feas_sched = None
    if feas.any():
        rows = np.flatnonzero(feas)
        pick = rows[int(np.argmin(cost[feas]))]
        feas_cost = int(cost[pick])
        feas_sched = tuple(int(x) for x in assign[pick])
    return RunResult(
        best_genome=tuple(int(x) for x in perms[best]),
        best_schedule=tuple(int(x) for x in assign[best]),
        best_fitness=float(fitness[best]),
        best_cost=int(cost[best]),
        best_undercover=int(under[best]),
        feasible=feas_cost is not None,
        best_feasible_cost=feas_cost,
        best_feasible_schedule=feas_sched,
        generations=0,
        evaluations=n_perms,
        decode_time=decode_time,
        wall_time=time.perf_counter() - t0,
        bound_fallbacks=stats.bound_fallbacks,
        cover_fallbacks=stats.cover_fallbacks,
    )


# ------------------------------------------------------------ results file


def record_of(cell: CellSpec, instance: Instance, seed: int, result: RunResult) -> dict:
    """The deterministic slice of a run outcome; no wall-clock fields."""
    return {
        "cell": cell.label,
        "instance": instance.name,
        "seed": seed,
        "feasible": result.feasible,
        "cost": result.best_feasible_cost,
        "fitness": result.best_fitness,
        "undercover": result.best_undercover,
        "generations": result.generations,
        "evaluations": result.evaluations,
        "bound_fallbacks": result.bound_fallbacks,
        "cover_fallbacks": result.cover_fallbacks,
    }


def _dump_line(record: dict) -> str:
    return json.dumps(record, sort_keys=True, separators=(",", ":")) + "\n"


def load_results(path: str | Path) -> list[dict]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(json.loads(line))
    return records


def run_bench(
    spec: BenchSpec,
    out_path: str | Path,
    times_path: str | Path | None = None,
    progress=None,
) -> list[dict]:
    """Execute the grid, appending any runs the results file is missing.

    Returns every record of the grid in canonical order.  ``progress`` is
    called with (cell_label, instance_name, seed) before each executed run.
    """
    out_path = Path(out_path)
    done: dict[tuple[str, str, int], dict] = {}
    if out_path.exists():
        for rec in load_results(out_path):
            done[(rec["cell"], rec["instance"], rec["seed"])] = rec

    records: list[dict] = []
    with open(out_path, "a", encoding="utf-8") as out_fh:
        times_fh = open(times_path, "a", encoding="utf-8") if times_path else None
        try:
            for cell in spec.cells:
                for instance in spec.instances:
                    for seed in spec.seeds:
                        key = (cell.label, instance.name, seed)
                        if key in done:
                            records.append(done[key])
                            continue
                        if progress is not None:
                            progress(cell.label, instance.name, seed)
                        if cell.baseline:
                            result = random_search(
                                instance,
                                decoder=cell.decoder,
                                ordering=cell.ordering,
                                weights=cell.weights(),
                                seed=seed,
                            )
                        else:
                            result = run(instance, cell.config(seed))
                        rec = record_of(cell, instance, seed, result)
                        out_fh.write(_dump_line(rec))
                        out_fh.flush()
                        if times_fh is not None:
                            times_fh.write(_dump_line({
                                "cell": cell.label,
                                "instance": instance.name,
                                "seed": seed,
                                "decode_time": result.decode_time,
                                "wall_time": result.wall_time,
                            }))
                            times_fh.flush()
                        records.append(rec)
        finally:
            if times_fh is not None:
                times_fh.close()
    return records


# ------------------------------------------------------------- aggregation


def censored_cost(record: dict, censor: float = CENSOR_DEFAULT) -> float:
    return float(record["cost"]) if record["feasible"] else censor


def band_of(instance_name: str) -> str:
    """Corpus band encoded in the instance name, or "all" when absent."""
    parts = instance_name.split("-")
    return parts[1] if len(parts) >= 3 else "all"


def _group(records: list[dict]) -> dict[str, dict[str, list[dict]]]:
    by_cell: dict[str, dict[str, list[dict]]] = {}
    for rec in records:
        by_cell.setdefault(rec["cell"], {}).setdefault(rec["instance"], []).append(rec)
    return by_cell


@dataclass(frozen=True)
class InstanceSummary:
    cell: str
    instance: str
    runs: int
    feasible_runs: int
    best_cost: int | None
    censored: float
    optimum: int | None = None

    @property
    def infeasible_runs(self) -> int:
        return self.runs - self.feasible_runs

    @property
    def optimal_hit(self) -> bool | None:
        if self.optimum is None:
            return None
        return self.best_cost is not None and self.best_cost == self.optimum

    @property
    def within3(self) -> bool | None:
        if self.optimum is None:
            return None
        return self.best_cost is not None and self.best_cost - self.optimum <= 3


@dataclass(frozen=True)
class CellSummary:
    cell: str
    instances: int
    runs: int
    feasibility: float
    cost: float
    optimal_hits: int | None = None
    within3_hits: int | None = None


def summarize_instances(
    records: list[dict],
    censor: float = CENSOR_DEFAULT,
    optima: dict[str, int] | None = None,
) -> list[InstanceSummary]:
    out = []
    for cell, insts in _group(records).items():
        for name, recs in insts.items():
            feas = [r for r in recs if r["feasible"]]
            best = min((int(r["cost"]) for r in feas), default=None)
            out.append(InstanceSummary(
                cell=cell,
                instance=name,
                runs=len(recs),
                feasible_runs=len(feas),
                best_cost=best,
                censored=float(best) if best is not None else censor,
                optimum=None if optima is None else optima.get(name),
            ))
    return out


def summarize_cells(
    records: list[dict],
    censor: float = CENSOR_DEFAULT,
    optima: dict[str, int] | None = None,
) -> list[CellSummary]:
    """Feasibility and censored cost per cell, averaged over instances."""
    per_inst = summarize_instances(records, censor, optima)
    cells: dict[str, list[InstanceSummary]] = {}
    for row in per_inst:
        cells.setdefault(row.cell, []).append(row)
    out = []
    for cell, rows in cells.items():
        feasibility = float(np.mean([r.feasible_runs / r.runs for r in rows]))
        cost = float(np.mean([r.censored for r in rows]))
        hits = within = None
        if optima is not None:
            known = [r for r in rows if r.optimum is not None]
            hits = sum(1 for r in known if r.optimal_hit)
            within = sum(1 for r in known if r.within3)
        out.append(CellSummary(
            cell=cell,
            instances=len(rows),
            runs=sum(r.runs for r in rows),
            feasibility=feasibility,
            cost=cost,
            optimal_hits=hits,
            within3_hits=within,
        ))
    return out


def band_means(
    records: list[dict], censor: float = CENSOR_DEFAULT
) -> dict[tuple[str, str], tuple[float, float]]:
    """(cell, band) -> (feasibility, censored cost), averaged over instances."""
    per_inst = summarize_instances(records, censor)
    groups: dict[tuple[str, str], list[InstanceSummary]] = {}
    for row in per_inst:
        groups.setdefault((row.cell, band_of(row.instance)), []).append(row)
    return {
        key: (
            float(np.mean([r.feasible_runs / r.runs for r in rows])),
            float(np.mean([r.censored for r in rows])),
        )
        for key, rows in groups.items()
    }


def censored_run_means(
    records: list[dict], censor: float = CENSOR_DEFAULT
) -> dict[tuple[str, str], float]:
    """(cell, band) -> mean per-run censored cost; band "all" spans the corpus.

    Every run contributes its own cost (the censor value when infeasible),
    so unlike the censored best in the summaries, a configuration that
    fails often stays expensive even when its best run is cheap. Averaged
    per instance over runs, then over instances.
    """
    per_inst: dict[tuple[str, str], list[float]] = {}
    for cell, insts in _group(records).items():
        for name, recs in insts.items():
            mean = float(np.mean([censored_cost(r, censor) for r in recs]))
            band = band_of(name)
            per_inst.setdefault((cell, band), []).append(mean)
            if band != "all":
                per_inst.setdefault((cell, "all"), []).append(mean)
    return {key: float(np.mean(vals)) for key, vals in per_inst.items()}


# ---------------------------------------------------------------- reports


def _cell_order(records: list[dict]) -> list[str]:
    seen: dict[str, None] = {}
    for rec in records:
        seen.setdefault(rec["cell"], None)
    return list(seen)


def load_times(path: str | Path) -> dict[str, float]:
    """Mean wall time per cell from a sidecar file."""
    sums: dict[str, list[float]] = {}
    for rec in load_results(path):
        sums.setdefault(rec["cell"], []).append(float(rec["wall_time"]))
    return {cell: float(np.mean(vals)) for cell, vals in sums.items()}


def report_text(
    records: list[dict],
    censor: float = CENSOR_DEFAULT,
    optima: dict[str, int] | None = None,
    times: dict[str, float] | None = None,
) -> str:
    """Cell summary table; lower cost and higher feasibility are better."""
    order = _cell_order(records)
    summaries = {s.cell: s for s in summarize_cells(records, censor, optima)}
    header = ["cell", "instances", "runs", "feasibility", "cost"]
    if optima is not None:
        header += ["optimal", "within3"]
    if times is not None:
        header.append("mean_wall_s")
    rows = [header]
    for cell in order:
        s = summaries[cell]
        row = [cell, str(s.instances), str(s.runs),
               f"{100.0 * s.feasibility:.1f}%", f"{s.cost:.2f}"]
        if optima is not None:
            row += [str(s.optimal_hits), str(s.within3_hits)]
        if times is not None:
            row.append(f"{times.get(cell, float('nan')):.3f}")
        rows.append(row)
    widths = [max(len(r[c]) for r in rows) for c in range(len(header))]
    lines = []
    for i, row in enumerate(rows):
        lines.append("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip())
        if i == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def report_csv(
    records: list[dict],
    censor: float = CENSOR_DEFAULT,
    optima: dict[str, int] | None = None,
    times: dict[str, float] | None = None,
) -> str:
    order = _cell_order(records)
    summaries = {s.cell: s for s in summarize_cells(records, censor, optima)}
    header = ["cell", "instances", "runs", "feasibility", "cost"]
    if optima is not None:
        header += ["optimal", "within3"]
    if times is not None:
        header.append("mean_wall_s")
    lines = [",".join(header)]
    for cell in order:
        s = summaries[cell]
        row = [cell, str(s.instances), str(s.runs),
               f"{s.feasibility:.6f}", f"{s.cost:.6f}"]
        if optima is not None:
            row += [str(s.optimal_hits), str(s.within3_hits)]
        if times is not None:
            row.append(f"{times.get(cell, float('nan')):.6f}")
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


# ------------------------------------------------------------- named grids


def default_grid() -> tuple[CellSpec, ...]:
    """Decoder/crossover comparison plus the tuned-cell probability sweep."""
    cells = []
    variants = (
        ("cover", DecoderKind.COVER, OrderingKind.LEXICO),
        ("contribution", DecoderKind.CONTRIBUTION, OrderingKind.LEXICO),
        ("combined", DecoderKind.COMBINED, OrderingKind.LEXICO),
        ("contribution-biased", DecoderKind.CONTRIBUTION, OrderingKind.BIASED),
    )
    for name, decoder, ordering in variants:
        for xo in (CrossoverKind.C1, CrossoverKind.ORDER,
                   CrossoverKind.UNIFORM_ORDER, CrossoverKind.PMX):
            cells.append(CellSpec(
                label=f"{name}-{xo.value}",
                decoder=decoder,
                ordering=ordering,
                crossover=xo,
            ))
    for p in (0.5, 0.66, 0.8, 0.9):
        for bound in (False, True):
            cells.append(CellSpec(
                label=f"combined-biased-pux{p}" + ("-bound" if bound else ""),
                decoder=DecoderKind.COMBINED,
                ordering=OrderingKind.BIASED,
                crossover=CrossoverKind.PUX,
                pux_p=p,
                bound_active=bound,
            ))
    return tuple(cells)


def bound_pair_grid(pux_p: float = 0.66) -> tuple[CellSpec, ...]:
    """The tuned cell with pruning off and on, for paired-seed comparison."""
    common = dict(decoder=DecoderKind.COMBINED, ordering=OrderingKind.BIASED,
                  crossover=CrossoverKind.PUX, pux_p=pux_p)
    return (
        CellSpec(label="bound-off", bound_active=False, **common),
        CellSpec(label="bound-on", bound_active=True, **common),
    )


def wp_sweep_grid(values: tuple[float, ...] = (0.1, 0.25, 0.5, 1.0, 2.0)) -> tuple[CellSpec, ...]:
    """Preference-weight sweep on the tuned cell."""
    return tuple(
        CellSpec(
            label=f"wp{v:g}",
            decoder=DecoderKind.COMBINED,
            ordering=OrderingKind.BIASED,
            crossover=CrossoverKind.PUX,
            pux_p=0.66,
            preference_weight=v,
            bound_active=True,
        )
        for v in values
    )


GRIDS = {
    "default": default_grid,
    "bound-pair": bound_pair_grid,
    "wp-sweep": wp_sweep_grid,
}
