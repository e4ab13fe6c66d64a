"""Compiled batch kernels for population decoding.

`decode_batch` replays the exact selection rules of the scalar decoders in
`decoders` over a whole population at once.  Keeping the two in lockstep is
load-bearing: the test suite asserts bit-identical schedules between this
kernel and the scalar reference on every decoder, ordering and bound setting.

Scores are float64.  With integer grade weights every score term is an
integer or a single float product, so scalar and batch arithmetic agree
exactly and tie-breaking cannot drift between the two paths.
"""

from __future__ import annotations

import numpy as np
from numba import njit

N_SLOTS = 14


@njit(cache=True)
def decode_batch(
    perms,  # (B, n) int64, each row a permutation of 0..n-1
    mode,  # 0 cover, 1 contribution, 2 combined
    demand,  # (14, p) int64
    sizes,  # (n,) int64 feasible-set sizes
    orders,  # (n, maxF) int64 visit order as positions, padded
    cov,  # (n, maxF, 14) int8 pattern covers, padded 0
    cost,  # (n, maxF) int64 preference costs, padded 0
    wp_term,  # (n, maxF) float64 preference score term, padded 0
    wg,  # (n, p) float64 grade weights, zeroed above qualification
    kind_code,  # (n, maxF) int8: 0 day, 1 night, 2 combined, padded -1
    fset,  # (n, maxF) int64 global pattern indices, padded -1
    grade0,  # (n,) int64 zero-based grades
    is_special,  # (n,) bool
    day_shifts,  # (n,) int64
    night_shifts,  # (n,) int64
    pref_day,  # (n,) bool
    has_day,  # (n,) bool
    has_night,  # (n,) bool
    bound_best,  # int64 incumbent feasible cost, -1 when no pruning
    out_assign,  # (B, n) int64 chosen global pattern indices
    out_cost,  # (B,) int64
    out_under,  # (B,) int64
    out_fallbacks,  # (2,) int64: bound fallbacks, cover fallbacks
):
    B, n = perms.shape
    p = demand.shape[1]
    supplied = np.zeros((N_SLOTS, p), dtype=np.int64)
    dv = np.zeros(N_SLOTS, dtype=np.float64)
    eff = np.zeros(N_SLOTS, dtype=np.int64)
    target = np.zeros(N_SLOTS, dtype=np.int8)

    for b in range(B):
        for k in range(N_SLOTS):
            for s in range(p):
                supplied[k, s] = 0
        total_cost = 0
        for t_outer in range(n):
            i = perms[b, t_outer]
            pos_best = -1
            if mode == 0:
                # shortfall tier: the highest grade level the nurse serves
                # that still has any gap anywhere this week
                tier = -1
                for s in range(grade0[i], p):
                    for k in range(N_SLOTS):
                        if demand[k, s] > supplied[k, s]:
                            tier = s
                            break
                    if tier >= 0:
                        break
                for k in range(N_SLOTS):
                    if tier >= 0:
                        u = demand[k, tier] - supplied[k, tier]
                        eff[k] = u if u > 0 else 0
                    else:
                        eff[k] = 0
                for k in range(N_SLOTS):
                    target[k] = 0
                if is_special[i]:
                    want = day_shifts[i] + night_shifts[i]
                    _pick_slots(eff, target, 0, 7, day_shifts[i])
                    _pick_slots(eff, target, 7, N_SLOTS, night_shifts[i])
                    code = 2
                else:
                    if has_day[i] and has_night[i]:
                        pd = 0
                        for k in range(0, 7):
                            if eff[k] > pd:
                                pd = eff[k]
                        pn = 0
                        for k in range(7, N_SLOTS):
                            if eff[k] > pn:
                                pn = eff[k]
                        side_day = pd > pn or (pd == pn and pref_day[i])
                    else:
                        side_day = has_day[i]
                    if side_day:
                        want = day_shifts[i]
                        _pick_slots(eff, target, 0, 7, want)
                        code = 0
                    else:
                        want = night_shifts[i]
                        _pick_slots(eff, target, 7, N_SLOTS, want)
                        code = 1
                best_ov = -1
                for t in range(sizes[i]):
                    if kind_code[i, t] == code:
                        ov = 0
                        for k in range(N_SLOTS):
                            if cov[i, t, k] == 1 and target[k] == 1:
                                ov += 1
                        if ov > best_ov:
                            best_ov = ov
                            pos_best = t
                if best_ov < want:
                    out_fallbacks[1] += 1
            else:
                for k in range(N_SLOTS):
                    acc = 0.0
                    for s in range(p):
                        u = demand[k, s] - supplied[k, s]
                        if u > 0:
                            if mode == 2:
                                acc += wg[i, s] * u
                            else:
                                acc += wg[i, s]
                    dv[k] = acc
                best_sc = -1.0e300
                for t in range(sizes[i]):
                    pos = orders[i, t]
                    if bound_best >= 0 and cost[i, pos] > bound_best:
                        continue
                    sc = wp_term[i, pos]
                    for k in range(N_SLOTS):
                        if cov[i, pos, k] == 1:
                            sc += dv[k]
                    if sc > best_sc:
                        best_sc = sc
                        pos_best = pos
                if pos_best < 0:
                    # every pattern was past the bound; ignore it here
                    out_fallbacks[0] += 1
                    for t in range(sizes[i]):
                        pos = orders[i, t]
                        sc = wp_term[i, pos]
                        for k in range(N_SLOTS):
                            if cov[i, pos, k] == 1:
                                sc += dv[k]
                        if sc > best_sc:
                            best_sc = sc
                            pos_best = pos
            out_assign[b, i] = fset[i, pos_best]
            total_cost += cost[i, pos_best]
            for s in range(grade0[i], p):
                for k in range(N_SLOTS):
                    supplied[k, s] += cov[i, pos_best, k]
        under = 0
        for k in range(N_SLOTS):
            for s in range(p):
                u = demand[k, s] - supplied[k, s]
                if u > 0:
                    under += u
        out_cost[b] = total_cost
        out_under[b] = under


@njit(cache=True, inline="always")
def _pick_slots(eff, target, lo, hi, count):
    """Mark the `count` largest-shortfall slots in [lo, hi); earlier slot wins ties."""
    for _ in range(count):
        bk = -1
        bv = -1
        for k in range(lo, hi):
            if target[k] == 0 and eff[k] > bv:
                bv = eff[k]
                bk = k
        target[bk] = 1


@njit(cache=True)
def pmx_core(a, b, lo, hi):
    """Partially matched crossover: keep a's slice [lo, hi), take b outside,
    chasing conflicts through the slice mapping."""
    n = a.shape[0]
    child = np.empty(n, dtype=np.int64)
    held = np.zeros(n, dtype=np.uint8)
    pos_in_a = np.empty(n, dtype=np.int64)
    for t in range(n):
        pos_in_a[a[t]] = t
    for t in range(lo, hi):
        child[t] = a[t]
        held[a[t]] = 1
    for t in range(n):
        if lo <= t < hi:
            continue
        gene = b[t]
        while held[gene] == 1:
            gene = b[pos_in_a[gene]]
        child[t] = gene
    return child


@njit(cache=True)
def order_core(a, b, lo, hi):
    """Order crossover: keep a's slice, fill the rest in b's circular order."""
    n = a.shape[0]
    child = np.empty(n, dtype=np.int64)
    held = np.zeros(n, dtype=np.uint8)
    for t in range(lo, hi):
        child[t] = a[t]
        held[a[t]] = 1
    write = hi % n
    for t in range(n):
        gene = b[(hi + t) % n]
        if held[gene] == 0:
            child[write] = gene
            write = (write + 1) % n
    return child


@njit(cache=True)
def c1_core(a, b, cut):
    """One-point variant: a's prefix before the cut, b's order for the rest."""
    n = a.shape[0]
    child = np.empty(n, dtype=np.int64)
    held = np.zeros(n, dtype=np.uint8)
    for t in range(cut):
        child[t] = a[t]
        held[a[t]] = 1
    write = cut
    for t in range(n):
        gene = b[t]
        if held[gene] == 0:
            child[write] = gene
            write += 1
    return child


@njit(cache=True)
def uniform_fill_core(a, b, template):
    """Keep a's genes where the template is 1, fill gaps in b's order."""
    n = a.shape[0]
    child = np.empty(n, dtype=np.int64)
    held = np.zeros(n, dtype=np.uint8)
    for t in range(n):
        if template[t] == 1:
            child[t] = a[t]
            held[a[t]] = 1
    write = 0
    for t in range(n):
        gene = b[t]
        if held[gene] == 0:
            while template[write] == 1:
                write += 1
            child[write] = gene
            write += 1
    return child


@njit(cache=True)
def swap_mutation_core(genome, mask, partners):
    """Swap gene t with partners[t] wherever mask is set, in index order."""
    n = genome.shape[0]
    for t in range(n):
        if mask[t] == 1:
            other = partners[t]
            tmp = genome[t]
            genome[t] = genome[other]
            genome[other] = tmp
