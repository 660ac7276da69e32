"""Inner layer: optimal-ish schedule for a fixed ordering.

Three phases. Timing picks one contiguous slot window per truck with a per-port
DP that ignores the station cap. Allocation fills each window with the
cheapest slots; when the aggregate exceeds the station cap anywhere, the exact
allocation is recomputed as a min-cost flow. Repair widens the window of the
worst-served truck by one slot (pushing its same-port successors right) until
the flow meets every demand.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .errors import HorizonExceeded, InfeasibleDemand, SizeGuard
from .model import (
    CostBreakdown,
    Instance,
    InstanceArrays,
    Ordering,
    Schedule,
    TruckSchedule,
    WM_PER_KWH,
    cost_from_arrays,
)

DEFAULT_EXTENSION_SLOTS = 24
BRUTEFORCE_MAX_TRUCKS = 4
BRUTEFORCE_MAX_SLOTS = 16


@dataclass(frozen=True)
class InnerStats:
    dp_states: int = 0
    augmentations: int = 0
    repairs: int = 0


@dataclass(frozen=True)
class InnerSolution:
    schedule: Schedule
    cost: CostBreakdown
    stats: InnerStats


@dataclass(frozen=True)
class _Raw:
    start: np.ndarray
    end: np.ndarray
    alloc: np.ndarray
    finish: np.ndarray
    cap: np.ndarray
    port: np.ndarray
    cost: CostBreakdown
    stats: InnerStats


def _flatten(instance: Instance, ordering: Ordering):
    n = instance.n_trucks
    port_ptr = np.zeros(ordering.n_ports + 1, dtype=np.int64)
    seq = np.empty(n, dtype=np.int64)
    port = np.empty(n, dtype=np.int64)
    k = 0
    for c, ids in enumerate(ordering.per_port):
        for i in ids:
            seq[k] = i - 1
            port[i - 1] = c
            k += 1
        port_ptr[c + 1] = k
    return port_ptr, seq, port


def _finish(instance: Instance, arr: InstanceArrays, ordering: Ordering, start, end, alloc, cap, port,
            stats: InnerStats) -> _Raw:
    finish = np.empty(len(start), dtype=np.float64)
    level_wm = np.zeros(len(arr.level_price), dtype=np.int64)
    K.finish_and_levels(alloc, start, cap, arr.slot_level, len(arr.level_price),
                        arr.origin, arr.delta, finish, level_wm)
    start_time = arr.origin + arr.delta * start.astype(np.float64)
    cost = cost_from_arrays(arr, level_wm, start_time, finish)
    return _Raw(start, end, alloc, finish, cap, port, cost, stats)


def _allocate(arr: InstanceArrays, start, end, cap, alloc) -> tuple[int, int]:
    """Phase 2. Returns (delivered W*min, flow augmentations)."""
    alloc[:] = 0
    K.decoupled_alloc(start, end, cap, arr.demand_wm, arr.slot_key, alloc)
    if K.slot_totals(alloc).max(initial=0) <= arr.station_wm:
        return int(arr.demand_wm.sum()), 0
    alloc[:] = 0
    flow, augs = K.min_cost_flow(start, end, cap, arr.demand_wm, arr.slot_key,
                                 arr.station_wm, arr.H, alloc)
    return int(flow), int(augs)


def _check_capacity(arr: InstanceArrays) -> None:
    need = int(arr.demand_wm.sum())
    if need > arr.station_wm * arr.H:
        raise InfeasibleDemand(
            f"total demand {need / WM_PER_KWH:.1f} kWh exceeds station capacity over the horizon "
            f"({arr.station_wm * arr.H / WM_PER_KWH:.1f} kWh)")


def solve_raw(instance: Instance, ordering: Ordering,
              extension_slots: int = DEFAULT_EXTENSION_SLOTS) -> _Raw:
    arr = instance.arrays
    _check_capacity(arr)
    n, H = instance.n_trucks, arr.H
    port_ptr, seq, port = _flatten(instance, ordering)
    start = np.empty(n, dtype=np.int64)
    end = np.empty(n, dtype=np.int64)
    status, states = K.timing_dp(port_ptr, seq, arr.a_slot, arr.nom, arr.cap_wm, arr.demand_wm,
                                 arr.eps, arr.gamma, arr.arrival, arr.deadline, arr.slot_key,
                                 arr.slot_price, arr.origin, arr.delta, H, extension_slots, start, end)
    if status == K.HORIZON:
        raise HorizonExceeded("a charging window would extend past the last slot")
    idx = np.arange(n)
    cap = arr.cap_wm[idx, port]
    alloc = np.zeros((n, H), dtype=np.int64)
    need = int(arr.demand_wm.sum())
    augs = repairs = 0
    while True:
        delivered, a = _allocate(arr, start, end, cap, alloc)
        augs += a
        if delivered >= need:
            break
        unmet = (arr.demand_wm - alloc.sum(axis=1)) / arr.demand_wm
        worst = int(np.argmax(unmet))
        end[worst] += 1
        c = port[worst]
        ids = ordering.per_port[c]
        pos = ids.index(worst + 1)
        for nxt in ids[pos + 1:]:
            j, prev = nxt - 1, ids[ids.index(nxt) - 1] - 1
            overlap = end[prev] - start[j] + 1
            if overlap <= 0:
                break
            start[j] += overlap
            end[j] += overlap
        if end.max() >= H:
            raise HorizonExceeded("repair pushed a charging window past the last slot")
        repairs += 1
    return _finish(instance, arr, ordering, start, end, alloc, cap, port,
                   InnerStats(int(states), augs, repairs))


def _to_solution(instance: Instance, ordering: Ordering, raw: _Raw) -> InnerSolution:
    arr = instance.arrays
    rows = []
    for i in range(instance.n_trucks):
        nz = np.nonzero(raw.alloc[i])[0]
        rows.append(TruckSchedule(
            truck=i + 1,
            port=int(raw.port[i]),
            start_time=float(arr.origin + arr.delta * float(raw.start[i])),
            finish_time=float(raw.finish[i]),
            energy_wm=tuple((int(t), int(raw.alloc[i, t])) for t in nz),
        ))
    schedule = Schedule(ordering, tuple(rows), arr.delta)
    return InnerSolution(schedule, raw.cost, raw.stats)


def inner_solve(instance: Instance, ordering: Ordering, *,
                extension_slots: int = DEFAULT_EXTENSION_SLOTS) -> InnerSolution:
    """Schedule every truck for the given ordering; deterministic.

    ``extension_slots`` bounds how far past its full-power length a window may
    be stretched to reach cheaper slots.
    """
    ordering.check(instance.n_trucks, instance.n_ports)
    return _to_solution(instance, ordering, solve_raw(instance, ordering, extension_slots))


def inner_bruteforce(instance: Instance, ordering: Ordering) -> InnerSolution:
    """Exact optimum over slot-aligned contiguous windows, by enumeration.

    Every window combination consistent with arrivals and port precedence is
    allocated with the min-cost flow (never the cheapest-slot shortcut); the
    cheapest feasible combination wins, first found on ties.
    """
    ordering.check(instance.n_trucks, instance.n_ports)
    n, H = instance.n_trucks, instance.timeline.num_slots
    if n > BRUTEFORCE_MAX_TRUCKS or H > BRUTEFORCE_MAX_SLOTS:
        raise SizeGuard(f"brute force limited to {BRUTEFORCE_MAX_TRUCKS} trucks and "
                        f"{BRUTEFORCE_MAX_SLOTS} slots (got {n}, {H})")
    arr = instance.arrays
    _check_capacity(arr)
    _, seq, port = _flatten(instance, ordering)
    idx = np.arange(n)
    cap = arr.cap_wm[idx, port]
    nom = arr.nom[idx, port]
    need = int(arr.demand_wm.sum())
    pred = np.full(n, -1, dtype=np.int64)
    for ids in ordering.per_port:
        for a, b in zip(ids, ids[1:]):
            pred[b - 1] = a - 1
    order = [int(i) for i in seq]  # port by port, so predecessors come first

    start = np.empty(n, dtype=np.int64)
    end = np.empty(n, dtype=np.int64)
    alloc = np.zeros((n, H), dtype=np.int64)
    best: _Raw | None = None
    combos = 0

    def windows(i):
        lo = arr.a_slot[i] if pred[i] < 0 else max(arr.a_slot[i], end[pred[i]] + 1)
        for s in range(lo, H - nom[i] + 1):
            for e in range(s + nom[i] - 1, H):
                yield s, e

    def rec(k):
        nonlocal best, combos
        if k == n:
            combos += 1
            alloc[:] = 0
            flow, augs = K.min_cost_flow(start, end, cap, arr.demand_wm, arr.slot_key,
                                         arr.station_wm, H, alloc)
            if flow < need:
                return
            raw = _finish(instance, arr, ordering, start.copy(), end.copy(), alloc.copy(), cap, port,
                          InnerStats(combos, int(augs), 0))
            if best is None or raw.cost.total < best.cost.total:
                best = raw
            return
        i = order[k]
        for s, e in windows(i):
            start[i], end[i] = s, e
            rec(k + 1)

    rec(0)
    if best is None:
        raise HorizonExceeded("no window combination delivers every demand within the horizon")
    best = _Raw(best.start, best.end, best.alloc, best.finish, best.cap, best.port, best.cost,
                InnerStats(combos, best.stats.augmentations, 0))
    return _to_solution(instance, ordering, best)


def cap_binds(instance: Instance, schedule: Schedule) -> bool:
    """True when some slot draws the full station cap (to the W*min)."""
    totals = np.zeros(instance.timeline.num_slots, dtype=np.int64)
    for ts in schedule.trucks:
        for t, w in ts.energy_wm:
            totals[t] += w
    return bool(totals.max(initial=0) >= instance.arrays.station_wm)


__all__ = ["InnerSolution", "InnerStats", "inner_solve", "inner_bruteforce", "cap_binds",
           "DEFAULT_EXTENSION_SLOTS"]
