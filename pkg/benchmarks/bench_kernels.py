"""Time the inner solver with the numba kernels and with the pure-Python fallback.

Each path runs in its own interpreter because the kernel choice is fixed at
import time by FLEETCHARGE_NUMBA. Example:

    python3 benchmarks/bench_kernels.py --sizes 8 25 --repeat 5
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys

_WORKER = r"""
import json, sys, time
from fleetcharge import _kernels as K
from fleetcharge.inner import inner_solve
from fleetcharge.policies import PolicyKind, base_order
from fleetcharge.scenario import generate_instance, preset

sizes, repeat, cap = json.loads(sys.argv[1])
out = {"numba": K.USE_NUMBA, "rows": []}
for n in sizes:
    name = "small" if n <= 8 else "large"
    over = {"n_trucks": n, "rng_seed": 1}
    if cap:
        over["station_cap_kw"] = cap
    inst = generate_instance(preset(name, **over))
    ordering = base_order(inst, PolicyKind.EDF)
    t0 = time.perf_counter()
    sol = inner_solve(inst, ordering)  # includes JIT compile or cache load
    first = time.perf_counter() - t0
    t0 = time.perf_counter()
    for _ in range(repeat):
        inner_solve(inst, ordering)
    per = (time.perf_counter() - t0) / repeat
    out["rows"].append({"n": n, "first_s": first, "per_solve_s": per, "cost": sol.cost.total,
                        "repairs": sol.stats.repairs, "augmentations": sol.stats.augmentations})
print(json.dumps(out))
"""


def run(flag: str, sizes, repeat, cap):
    env = dict(os.environ, FLEETCHARGE_NUMBA=flag)
    res = subprocess.run([sys.executable, "-c", _WORKER, json.dumps([sizes, repeat, cap])],
                         env=env, capture_output=True, text=True, check=True)
    return json.loads(res.stdout)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[8, 25, 50])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--station-cap", type=float, default=None,
                    help="override the preset station cap (kW), e.g. to force the flow path")
    args = ap.parse_args(argv)

    fast = run("1", args.sizes, args.repeat, args.station_cap)
    slow = run("0", args.sizes, args.repeat, args.station_cap)
    print(f"{'N':>4} {'numba s/solve':>14} {'python s/solve':>15} {'speedup':>8} {'first call':>11} "
          f"{'augs':>6} {'repairs':>8} same cost")
    for a, b in zip(fast["rows"], slow["rows"]):
        print(f"{a['n']:>4} {a['per_solve_s']:>14.6f} {b['per_solve_s']:>15.6f} "
              f"{b['per_solve_s'] / a['per_solve_s']:>7.1f}x {a['first_s']:>10.2f}s "
              f"{a['augmentations']:>6} {a['repairs']:>8} {a['cost'] == b['cost']}")


if __name__ == "__main__":
    main()
