import json
import os
import subprocess
import sys

import numpy as np
import pytest
from scipy.optimize import linprog

from fleetcharge import _kernels as K


def _random_windows(rng, n, H):
    start = rng.integers(0, H - 2, size=n).astype(np.int64)
    end = np.array([rng.integers(s, H) for s in start], dtype=np.int64)
    cap = rng.integers(5, 40, size=n).astype(np.int64)
    width = end - start + 1
    demand = np.array([rng.integers(1, c * w + 1) for c, w in zip(cap, width)], dtype=np.int64)
    key = rng.permutation(H).astype(np.int64) * 7 + rng.integers(0, 3, size=H)
    return start, end, cap, demand, key


def _lp_cost(start, end, cap, demand, key, station):
    """Reference optimum of the transportation LP; None when infeasible."""
    n, H = len(start), len(key)
    var = [(i, t) for i in range(n) for t in range(start[i], end[i] + 1)]
    c = [key[t] for _, t in var]
    a_eq = np.zeros((n, len(var)))
    a_ub = np.zeros((H, len(var)))
    for k, (i, t) in enumerate(var):
        a_eq[i, k] = 1
        a_ub[t, k] = 1
    res = linprog(c, A_ub=a_ub, b_ub=[station] * H, A_eq=a_eq, b_eq=demand,
                  bounds=[(0, cap[i]) for i, _ in var], method="highs")
    return res.fun if res.status == 0 else None


def _residual_has_negative_cycle(start, end, cap, demand, key, station, alloc):
    """Bellman-Ford on the truck/slot residual graph."""
    n, H = alloc.shape
    nodes = n + H
    edges = []
    load = alloc.sum(axis=0)
    for i in range(n):
        for t in range(start[i], end[i] + 1):
            if alloc[i, t] < cap[i]:
                edges.append((i, n + t, key[t]))
            if alloc[i, t] > 0:
                edges.append((n + t, i, -key[t]))
    # slot -> sink -> slot moves go through a virtual node
    sink = nodes
    for t in range(H):
        if load[t] < station:
            edges.append((n + t, sink, 0))
        if load[t] > 0:
            edges.append((sink, n + t, 0))
    dist = np.zeros(nodes + 1)
    for _ in range(nodes + 1):
        changed = False
        for u, v, w in edges:
            if dist[u] + w < dist[v] - 1e-9:
                dist[v] = dist[u] + w
                changed = True
        if not changed:
            return False
    return True


@pytest.mark.parametrize("seed", range(40))
def test_min_cost_flow_matches_lp(seed):
    rng = np.random.default_rng(seed)
    n, H = int(rng.integers(1, 6)), int(rng.integers(3, 14))
    start, end, cap, demand, key = _random_windows(rng, n, H)
    station = int(rng.integers(10, 80))
    alloc = np.zeros((n, H), dtype=np.int64)
    flow, _ = K.min_cost_flow(start, end, cap, demand, key, station, H, alloc)

    assert (alloc >= 0).all()
    assert (alloc <= cap[:, None]).all()
    assert (alloc.sum(axis=0) <= station).all()
    for i in range(n):
        outside = np.r_[alloc[i, :start[i]], alloc[i, end[i] + 1:]]
        assert not outside.any()
    assert flow == alloc.sum()

    ref = _lp_cost(start, end, cap, demand, key, station)
    if ref is None:
        assert flow < demand.sum()
    else:
        assert flow == demand.sum()
        assert float((alloc * key[None, :]).sum()) == pytest.approx(ref, abs=1e-6)
        assert not _residual_has_negative_cycle(start, end, cap, demand, key, station, alloc)


@pytest.mark.parametrize("seed", range(20))
def test_flow_equals_greedy_when_cap_is_slack(seed):
    rng = np.random.default_rng(100 + seed)
    n, H = int(rng.integers(1, 6)), int(rng.integers(3, 14))
    start, end, cap, demand, key = _random_windows(rng, n, H)
    greedy = np.zeros((n, H), dtype=np.int64)
    K.decoupled_alloc(start, end, cap, demand, key, greedy)
    assert (greedy.sum(axis=1) == demand).all()
    flow_alloc = np.zeros_like(greedy)
    K.min_cost_flow(start, end, cap, demand, key, int(cap.sum()), H, flow_alloc)
    assert (flow_alloc * key).sum() == (greedy * key).sum()


_PROBE = """
import json
from fleetcharge import _kernels as K
from fleetcharge.scenario import generate_instance, preset
from fleetcharge.policies import PolicyKind, base_order
from fleetcharge.inner import inner_solve
from fleetcharge.rollout import rollout_solve
out = {"numba": K.USE_NUMBA, "costs": []}
for seed in range(2):
    # tight cap exercises the flow and repair paths
    inst = generate_instance(preset("small", rng_seed=seed, station_cap_kw=700.0))
    for kind in PolicyKind:
        sol = inner_solve(inst, base_order(inst, kind))
        out["costs"].append([sol.cost.total, [list(t.energy_wm) for t in sol.schedule.trucks]])
    inst = generate_instance(preset("small", rng_seed=seed, n_trucks=4))
    out["costs"].append(rollout_solve(inst, PolicyKind.EDF).cost)
print(json.dumps(out))
"""


def _probe(flag):
    env = dict(os.environ, FLEETCHARGE_NUMBA=flag)
    res = subprocess.run([sys.executable, "-c", _PROBE], env=env, capture_output=True, text=True,
                         check=True, timeout=600)
    return json.loads(res.stdout)


def test_numba_and_pure_paths_agree():
    fast, slow = _probe("1"), _probe("0")
    assert not slow["numba"]
    assert fast["costs"] == slow["costs"]
