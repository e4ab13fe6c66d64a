"""Exact small-instance solver and schedule auditing.

Two independent routes to the optimum are provided on purpose: a pruned
depth-first search (`solve_exact`) and a brute-force sweep over all pattern
combinations (`solve_enumerate`).  They share nothing but the data model, so
agreement between them on a corpus is strong evidence both are right.

Both treat coverage as a hard constraint and minimise total preference cost;
use them to check the heuristic pipeline on instances small enough to close.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import ScheduleInvalid
from .model import Instance, N_SLOTS, Schedule, coverage, solution_cost


class OracleStatus(str, enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    LIMIT_EXCEEDED = "limit-exceeded"


@dataclass(frozen=True)
class OracleResult:
    status: OracleStatus
    optimal_cost: int | None
    schedule: tuple[int, ...] | None
    nodes_explored: int


@dataclass(frozen=True)
class AuditReport:
    """Feasibility and cost facts for one complete schedule.

    `shortfalls` lists (slot, grade, missing) triples with 1-based grades;
    an empty tuple means the schedule meets all demand.
    """

    shortfalls: tuple[tuple[int, int, int], ...]
    cost: int
    total_undercover: int

    @property
    def feasible(self) -> bool:
        return not self.shortfalls

    def fitness(self, penalty_weight: float = 20.0) -> float:
        return self.cost + penalty_weight * self.total_undercover


def audit(schedule: Schedule | tuple, instance: Instance) -> AuditReport:
    """Validate and summarise a schedule; raises ScheduleInvalid on bad input."""
    sched = schedule if isinstance(schedule, Schedule) else Schedule(tuple(schedule))
    state = coverage(sched, instance)
    under = state.undercover
    shortfalls = tuple(
        (int(k), int(s) + 1, int(under[k, s]))
        for k in range(N_SLOTS)
        for s in range(instance.grades)
        if under[k, s] > 0
    )
    return AuditReport(
        shortfalls=shortfalls,
        cost=solution_cost(sched, instance),
        total_undercover=int(under.sum()),
    )


def _nurse_arrays(instance: Instance):
    """Per-nurse candidate covers and costs, candidates sorted by cost."""
    covers, costs, fsets = [], [], []
    for i in range(instance.n):
        feas = np.array(instance.feasible(i), dtype=np.int64)
        cost = np.array([instance.nurses[i].cost_of(int(j)) for j in feas], dtype=np.int64)
        order = np.argsort(cost, kind="stable")
        fsets.append(feas[order])
        costs.append(cost[order])
        covers.append(
            np.array([instance.patterns[j].cover for j in feas[order]], dtype=np.int64)
        )
    return covers, costs, fsets


def solve_exact(instance: Instance, node_limit: int | None = None) -> OracleResult:
    """Depth-first search over nurses with cost and coverage pruning.

    Nurses are branched in index order, candidate patterns in ascending cost.
    A branch dies when even the cheapest completion cannot beat the incumbent
    or when the remaining nurses cannot close some coverage gap.  `node_limit`
    caps tried assignments; hitting it returns the incumbent so far with
    status `limit-exceeded`.
    """
    n = instance.n
    p = instance.grades
    demand = instance.demand_array()
    covers, costs, fsets = _nurse_arrays(instance)
    grade0 = [nu.grade - 1 for nu in instance.nurses]

    # suffix_min[i]: cheapest possible cost of nurses i..n-1
    suffix_min = np.zeros(n + 1, dtype=np.int64)
    for i in range(n - 1, -1, -1):
        suffix_min[i] = suffix_min[i + 1] + costs[i].min()
    # suffix_best[i][k, s]: most cover nurses i..n-1 could still add
    suffix_best = np.zeros((n + 1, N_SLOTS, p), dtype=np.int64)
    for i in range(n - 1, -1, -1):
        best = np.zeros((N_SLOTS, p), dtype=np.int64)
        best[:, grade0[i]:] = covers[i].max(axis=0)[:, None]
        suffix_best[i] = suffix_best[i + 1] + best

    supplied = np.zeros((N_SLOTS, p), dtype=np.int64)
    assignment = np.full(n, -1, dtype=np.int64)
    best_cost = [None]
    best_assign = [None]
    nodes = [0]
    hit_limit = [False]

    def dfs(i: int, cost_so_far: int) -> None:
        if hit_limit[0]:
            return
        if (supplied + suffix_best[i] < demand).any():
            return
        if best_cost[0] is not None and cost_so_far + suffix_min[i] >= best_cost[0]:
            return
        if i == n:
            # the coverage check above with no nurses left proves feasibility
            best_cost[0] = cost_so_far
            best_assign[0] = assignment.copy()
            return
        g0 = grade0[i]
        for t in range(len(fsets[i])):
            c = int(costs[i][t])
            if best_cost[0] is not None and cost_so_far + c + suffix_min[i + 1] >= best_cost[0]:
                break  # candidates are cost-sorted, the rest are no better
            if node_limit is not None and nodes[0] >= node_limit:
                hit_limit[0] = True
                return
            nodes[0] += 1
            assignment[i] = fsets[i][t]
            supplied[:, g0:] += covers[i][t][:, None]
            dfs(i + 1, cost_so_far + c)
            supplied[:, g0:] -= covers[i][t][:, None]
            assignment[i] = -1
            if hit_limit[0]:
                return

    dfs(0, 0)
    if hit_limit[0]:
        return OracleResult(
            OracleStatus.LIMIT_EXCEEDED,
            best_cost[0],
            tuple(int(x) for x in best_assign[0]) if best_assign[0] is not None else None,
            nodes[0],
        )
    if best_cost[0] is None:
        return OracleResult(OracleStatus.INFEASIBLE, None, None, nodes[0])
    return OracleResult(
        OracleStatus.OPTIMAL,
        int(best_cost[0]),
        tuple(int(x) for x in best_assign[0]),
        nodes[0],
    )


def solve_enumerate(
    instance: Instance,
    assignment_limit: int = 2_000_000,
    chunk: int = 65_536,
) -> OracleResult:
    """Sweep every combination of feasible patterns; no pruning at all.

    Refuses instances with more than `assignment_limit` combinations rather
    than grind through them; the point of this route is to be obviously
    correct, not fast.
    """
    n = instance.n
    p = instance.grades
    demand = instance.demand_array()
    covers, costs, fsets = _nurse_arrays(instance)
    grade0 = [nu.grade - 1 for nu in instance.nurses]
    dims = [len(f) for f in fsets]
    total = 1
    for d in dims:
        total *= d
        if total > assignment_limit:
            return OracleResult(OracleStatus.LIMIT_EXCEEDED, None, None, 0)

    # per-nurse qualified contribution tensors (|F|, 14, p)
    contribs = []
    for i in range(n):
        con = np.zeros((dims[i], N_SLOTS, p), dtype=np.int32)
        con[:, :, grade0[i]:] = covers[i].astype(np.int32)[:, :, None]
        contribs.append(con)

    best_cost: int | None = None
    best_index: int | None = None
    for start in range(0, total, chunk):
        count = min(chunk, total - start)
        flat = np.arange(start, start + count)
        idx = np.unravel_index(flat, dims)
        supplied = np.zeros((count, N_SLOTS, p), dtype=np.int32)
        cost = np.zeros(count, dtype=np.int64)
        for i in range(n):
            supplied += contribs[i][idx[i]]
            cost += costs[i][idx[i]]
        feasible = (supplied >= demand).all(axis=(1, 2))
        if feasible.any():
            rows = np.flatnonzero(feasible)
            r = rows[int(np.argmin(cost[rows]))]
            if best_cost is None or cost[r] < best_cost:
                best_cost = int(cost[r])
                best_index = int(flat[r])
    if best_cost is None:
        return OracleResult(OracleStatus.INFEASIBLE, None, None, total)
    positions = np.unravel_index(best_index, dims)
    schedule = tuple(int(fsets[i][positions[i]]) for i in range(n))
    return OracleResult(OracleStatus.OPTIMAL, best_cost, schedule, total)
