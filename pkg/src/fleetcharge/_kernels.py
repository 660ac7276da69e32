"""Hot loops of the inner solver.

Every kernel is plain Python over numpy arrays. They are compiled with numba
``@njit`` unless ``FLEETCHARGE_NUMBA=0`` is set (or numba is missing), in
which case the identical source runs interpreted. Both paths must agree bit
for bit; ``benchmarks/bench_kernels.py`` times them against each other.
"""

from __future__ import annotations

import heapq
import os

import numpy as np

USE_NUMBA = os.environ.get("FLEETCHARGE_NUMBA", "1").strip().lower() not in ("0", "false", "no", "off")

if USE_NUMBA:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover
        USE_NUMBA = False

if not USE_NUMBA:

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda f: f


OK = 0
HORIZON = 1

_BIG = np.int64(1) << np.int64(62)


@njit(cache=True)
def timing_dp(port_ptr, seq, a_slot, nom, cap_wm, demand_wm, eps, gamma, arrival, deadline,
              slot_key, slot_price, origin, delta, H, ext, out_start, out_end):
    """Choose one contiguous window per truck, port by port, ignoring the station cap.

    Forward DP over (position in port sequence, window end slot). Each truck
    starts at its earliest slot given its predecessor's end; later starts are
    dominated once the window end is free. The window end ranges over
    ``[start + nominal - 1, start + nominal - 1 + ext]``. Window cost is waiting
    + tardiness + energy of the cheapest-slot allocation (ties to the earlier
    slot), which is the exact single-truck optimum for that window.

    Returns (status, states_expanded).
    """
    n_ports = port_ptr.shape[0] - 1
    states = 0
    wk = np.empty(H, dtype=np.int64)
    sbest = np.empty(H, dtype=np.float64)
    sarg = np.empty(H, dtype=np.int64)
    for c in range(n_ports):
        lo = port_ptr[c]
        m = port_ptr[c + 1] - lo
        if m == 0:
            continue
        best = np.full((m, H), np.inf)
        back = np.full((m, H), -1, dtype=np.int64)
        for j in range(m):
            i = seq[lo + j]
            nm = nom[i, c]
            cp = cap_wm[i, c]
            dem = demand_wm[i]
            sbest[:] = np.inf
            sarg[:] = -1
            if j == 0:
                if a_slot[i] < H:
                    sbest[a_slot[i]] = 0.0
            else:
                run = np.inf
                for ep in range(H):
                    v = best[j - 1, ep]
                    if v < run:
                        run = v
                        s = max(a_slot[i], ep + 1)
                        if s < H and v < sbest[s]:
                            sbest[s] = v
                            sarg[s] = ep
            found = False
            for s in range(H):
                if sbest[s] == np.inf:
                    continue
                e0 = s + nm - 1
                if e0 > H - 1:
                    continue
                elast = min(e0 + ext, H - 1)
                wait = eps[i] * (origin + delta * s - arrival[i])
                n_in = 0
                for e in range(s, elast + 1):
                    key = slot_key[e]
                    pos = n_in
                    while pos > 0 and slot_key[wk[pos - 1]] > key:
                        wk[pos] = wk[pos - 1]
                        pos -= 1
                    wk[pos] = e
                    n_in += 1
                    if e < e0:
                        continue
                    rem = dem
                    energy = 0.0
                    last = -1
                    lastw = 0
                    for q in range(nm):
                        t = wk[q]
                        w = cp if rem >= cp else rem
                        rem -= w
                        energy += slot_price[t] * w / 60000.0
                        if t > last:
                            last = t
                            lastw = w
                    finish = origin + delta * last + delta * lastw / cp
                    late = finish - deadline[i]
                    cost = sbest[s] + wait + energy
                    if late > 0:
                        cost += gamma[i] * late
                    states += 1
                    found = True
                    if cost < best[j, e]:
                        best[j, e] = cost
                        back[j, e] = sarg[s]
            if not found:
                return HORIZON, states
        e_best = 0
        for e in range(1, H):
            if best[m - 1, e] < best[m - 1, e_best]:
                e_best = e
        e = e_best
        for j in range(m - 1, -1, -1):
            i = seq[lo + j]
            ep = back[j, e]
            out_end[i] = e
            if j == 0:
                out_start[i] = a_slot[i]
            else:
                out_start[i] = max(a_slot[i], ep + 1)
            e = ep
    return OK, states


@njit(cache=True)
def decoupled_alloc(start, end, cap, demand_wm, slot_key, alloc):
    """Per-truck cheapest-slot fill of each window, ignoring the station cap."""
    n = start.shape[0]
    for i in range(n):
        s = start[i]
        e = end[i]
        order = np.argsort(slot_key[s:e + 1])
        rem = demand_wm[i]
        for q in range(order.shape[0]):
            if rem <= 0:
                break
            w = cap[i] if rem >= cap[i] else rem
            alloc[i, s + order[q]] = w
            rem -= w


@njit(cache=True)
def slot_totals(alloc):
    return alloc.sum(axis=0)


@njit(cache=True)
def min_cost_flow(start, end, cap, demand_wm, slot_key, station_wm, H, alloc):
    """Min-cost flow source -> trucks -> slots -> sink, integer W*min units.

    Successive shortest augmenting paths with Johnson potentials and a binary
    heap Dijkstra. Arc truck->slot exists for slots inside the truck's window
    with capacity ``cap[i]`` and cost ``slot_key[t]``; slot->sink capacity is
    ``station_wm``. Fills ``alloc`` and returns (total_flow, augmentations).
    """
    n = start.shape[0]
    src = 0
    sink = n + H + 1
    nv = n + H + 2
    n_arcs = n + H
    for i in range(n):
        n_arcs += end[i] - start[i] + 1
    m2 = 2 * n_arcs
    to = np.empty(m2, dtype=np.int64)
    capr = np.empty(m2, dtype=np.int64)
    cost = np.empty(m2, dtype=np.int64)
    nxt = np.empty(m2, dtype=np.int64)
    head = np.full(nv, -1, dtype=np.int64)
    k = 0
    # each arc at even index k, its reverse at k + 1
    for i in range(n):
        u = 1 + i
        to[k] = u; capr[k] = demand_wm[i]; cost[k] = 0; nxt[k] = head[src]; head[src] = k
        to[k + 1] = src; capr[k + 1] = 0; cost[k + 1] = 0; nxt[k + 1] = head[u]; head[u] = k + 1
        k += 2
    for i in range(n):
        u = 1 + i
        for t in range(start[i], end[i] + 1):
            v = n + 1 + t
            to[k] = v; capr[k] = cap[i]; cost[k] = slot_key[t]; nxt[k] = head[u]; head[u] = k
            to[k + 1] = u; capr[k + 1] = 0; cost[k + 1] = -slot_key[t]; nxt[k + 1] = head[v]; head[v] = k + 1
            k += 2
    for t in range(H):
        v = n + 1 + t
        to[k] = sink; capr[k] = station_wm; cost[k] = 0; nxt[k] = head[v]; head[v] = k
        to[k + 1] = v; capr[k + 1] = 0; cost[k + 1] = 0; nxt[k + 1] = head[sink]; head[sink] = k + 1
        k += 2

    need = 0
    for i in range(n):
        need += demand_wm[i]
    pot = np.zeros(nv, dtype=np.int64)
    dist = np.empty(nv, dtype=np.int64)
    prev_arc = np.empty(nv, dtype=np.int64)
    done = np.empty(nv, dtype=np.bool_)
    flow = 0
    augs = 0
    while flow < need:
        dist[:] = _BIG
        prev_arc[:] = -1
        done[:] = False
        dist[src] = 0
        heap = [(np.int64(0), np.int64(src))]
        while len(heap) > 0:
            d, u = heapq.heappop(heap)
            if done[u]:
                continue
            done[u] = True
            if u == sink:
                break
            a = head[u]
            while a != -1:
                if capr[a] > 0:
                    v = to[a]
                    nd = d + cost[a] + pot[u] - pot[v]
                    if nd < dist[v]:
                        dist[v] = nd
                        prev_arc[v] = a
                        heapq.heappush(heap, (nd, v))
                a = nxt[a]
        if not done[sink]:
            break
        dsink = dist[sink]
        for v in range(nv):
            if done[v]:
                pot[v] += dist[v] - dsink
        push = need - flow
        v = sink
        while v != src:
            a = prev_arc[v]
            if capr[a] < push:
                push = capr[a]
            v = to[a ^ 1]
        v = sink
        while v != src:
            a = prev_arc[v]
            capr[a] -= push
            capr[a ^ 1] += push
            v = to[a ^ 1]
        flow += push
        augs += 1

    k = 2 * n
    for i in range(n):
        for t in range(start[i], end[i] + 1):
            alloc[i, t] = capr[k + 1]
            k += 2
    return flow, augs


@njit(cache=True)
def finish_and_levels(alloc, start, cap, slot_level, n_levels, origin, delta, out_finish, out_level_wm):
    """Finish minute per truck (interpolated inside its last charging slot) and W*min per price level."""
    n, H = alloc.shape
    for i in range(n):
        last = -1
        for t in range(H):
            w = alloc[i, t]
            if w > 0:
                last = t
                out_level_wm[slot_level[t]] += w
        if last < 0:
            out_finish[i] = origin + delta * start[i]
        else:
            out_finish[i] = origin + delta * last + delta * alloc[i, last] / cap[i]
