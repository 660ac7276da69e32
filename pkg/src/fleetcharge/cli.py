"""Command line: generate instances, solve them, compare policies, export Gantt data.

Exit codes: 0 success, 2 validation failure, 3 infeasible, 4 size guard, 1 other.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

from .errors import (
    FleetChargeError,
    HorizonExceeded,
    InfeasibleDemand,
    InfeasibleInstance,
    InstanceError,
    SizeGuard,
)
from .exact import DEFAULT_GUARD, count_orderings, exact_solve
from .inner import DEFAULT_EXTENSION_SLOTS, InnerSolution, inner_solve
from .io import read_instance, write_instance
from .model import TAU_E_WH, WM_PER_KWH, CostBreakdown, Instance, truck_cost, validate_schedule
from .policies import PolicyKind, base_order
from .rollout import rollout_solve
from .scenario import generate_instance, preset

OUT_DIR_ENV = "FLEETCHARGE_OUT_DIR"
REPORT_FORMAT = "fleetcharge-report/1"
COMPARE_COLUMNS = ("policy", "status", "total", "energy", "waiting", "tardiness",
                   "time_s", "evaluations", "repairs", "gap_pct")


class ScheduleInvalid(FleetChargeError):
    pass


@dataclass
class RunReport:
    instance_path: str
    instance_hash: str
    policy: str
    cost: CostBreakdown
    rows: list[dict]
    solve_time_s: float
    evaluations: int
    repairs: int
    extra: dict = field(default_factory=dict)
    gap_pct: float | None = None

    def to_dict(self) -> dict:
        doc = {
            "format": REPORT_FORMAT,
            "instance": {"path": self.instance_path, "sha256": self.instance_hash},
            "policy": self.policy,
            "cost": self.cost.as_dict(),
            "solve_time_s": self.solve_time_s,
            "inner_evaluations": self.evaluations,
            "repair_iterations": self.repairs,
            "trucks": self.rows,
        }
        if self.gap_pct is not None:
            doc["gap_pct"] = self.gap_pct
        doc.update(self.extra)
        return doc


def parse_policy(name: str) -> tuple[str, PolicyKind | None]:
    name = name.strip().lower()
    if name == "exact":
        return "exact", None
    if name.startswith("rollout:"):
        return "rollout", PolicyKind.parse(name.split(":", 1)[1])
    return "base", PolicyKind.parse(name)


def run_policy(instance: Instance, policy: str, *, extension_slots: int = DEFAULT_EXTENSION_SLOTS,
               exact_guard: int = DEFAULT_GUARD) -> tuple[InnerSolution, dict, float, int]:
    """Solve with one named policy. Returns (solution, extras, seconds, inner evaluations)."""
    family, kind = parse_policy(policy)
    extra: dict = {}
    if family == "exact" and instance.n_trucks > exact_guard:
        raise SizeGuard(f"exact policy refused for N={instance.n_trucks} > {exact_guard}: would evaluate "
                        f"{count_orderings(instance.n_trucks, instance.n_ports):,} orderings")
    t0 = time.perf_counter()
    if family == "base":
        sol = inner_solve(instance, base_order(instance, kind), extension_slots=extension_slots)
        evals = 1
    elif family == "rollout":
        trace = rollout_solve(instance, kind, extension_slots=extension_slots)
        sol, evals = trace.solution, trace.evaluations
        extra = {"base_cost": trace.base_cost,
                 "improvement_vs_base": trace.base_cost - sol.cost.total,
                 "improved_or_equal": sol.cost.total <= trace.base_cost,
                 "used_base_fallback": trace.used_base_fallback,
                 "_trace": trace}
    else:
        _, sol = exact_solve(instance, guard=exact_guard, extension_slots=extension_slots)
        evals = count_orderings(instance.n_trucks, instance.n_ports)
    elapsed = time.perf_counter() - t0
    return sol, extra, elapsed, evals


def build_report(instance: Instance, path: str, digest: str, policy: str, sol: InnerSolution,
                 elapsed: float, evals: int, extra: dict) -> RunReport:
    violations = validate_schedule(instance, sol.schedule)
    if violations:
        raise ScheduleInvalid("; ".join(v.message for v in violations[:5]))
    tl = instance.timeline
    arr = instance.arrays
    rows = []
    for ts in sol.schedule.trucks:
        c = truck_cost(instance, ts)
        kw = sol.schedule.power_kw(ts.truck)
        rows.append({
            "truck": ts.truck,
            "port": ts.port + 1,
            "start": ts.start_time,
            "finish": ts.finish_time,
            "duration": ts.duration,
            "delivered_kwh": ts.delivered_wm / WM_PER_KWH,
            "demand_kwh": instance.truck(ts.truck).demand,
            "energy_cost": c.energy_cost,
            "waiting_cost": c.waiting_cost,
            "tardiness_cost": c.tardiness_cost,
            "profile": [[t, kw[t], float(arr.slot_price[t])] for t, _ in ts.energy_wm],
        })
    extra = {k: v for k, v in extra.items() if not k.startswith("_")}
    extra["timeline"] = {"origin": tl.origin, "slot_minutes": tl.slot_minutes, "num_slots": tl.num_slots}
    extra["station_cap_kw"] = instance.station.station_cap
    extra["ordering"] = [list(s) for s in sol.schedule.ordering.per_port]
    return RunReport(path, digest, policy, sol.cost, rows, elapsed, evals, sol.stats.repairs, extra)


def check_report(doc: dict) -> None:
    if doc.get("format") != REPORT_FORMAT:
        raise InstanceError("not a fleetcharge report")
    for row in doc["trucks"]:
        if abs(row["delivered_kwh"] - row["demand_kwh"]) * 1000.0 > TAU_E_WH + 1e-6:
            raise InstanceError(f"report truck {row['truck']} delivered energy does not match demand")
    c = doc["cost"]
    if c["total"] != c["energy"] + c["waiting"] + c["tardiness"]:
        raise InstanceError("report total is not the sum of its components")


def _default_out(name: str) -> Path:
    return Path(os.environ.get(OUT_DIR_ENV, ".")) / name


def _print_cost(policy: str, cost: CostBreakdown, elapsed: float) -> None:
    print(f"{policy:<14} total {cost.total:12.2f} EUR  energy {cost.energy_cost:10.2f}  "
          f"waiting {cost.waiting_cost:10.2f}  tardiness {cost.tardiness_cost:10.2f}  ({elapsed:.3f} s)")


def cmd_generate(args) -> int:
    overrides = {"rng_seed": args.seed}
    if args.n is not None:
        overrides["n_trucks"] = args.n
    if args.slot_minutes is not None:
        overrides["slot_minutes"] = args.slot_minutes
    if args.ports is not None:
        overrides["n_ports"] = args.ports
    if args.station_cap is not None:
        overrides["station_cap_kw"] = args.station_cap
    if args.slack is not None:
        overrides["slack"] = args.slack
    if args.horizon_slots is not None:
        overrides["horizon_slots"] = args.horizon_slots
    cfg = preset(args.preset, **overrides)
    instance = generate_instance(cfg)
    out = Path(args.out) if args.out else _default_out(f"{args.preset}_n{cfg.n_trucks}_s{args.seed}.json")
    out.parent.mkdir(parents=True, exist_ok=True)
    digest = write_instance(instance, out)
    print(f"{out}  sha256={digest}")
    return 0


def _write_json(path: Path, doc: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=2, allow_nan=False) + "\n", encoding="utf-8")


def cmd_solve(args) -> int:
    instance, digest = read_instance(args.instance)
    sol, extra, elapsed, evals = run_policy(instance, args.policy, extension_slots=args.extension_slots)
    trace = extra.get("_trace")
    report = build_report(instance, str(args.instance), digest, args.policy, sol, elapsed, evals, extra)
    stem = Path(args.instance).stem
    out = Path(args.out) if args.out else _default_out(f"{stem}_{args.policy.replace(':', '-')}.json")
    _write_json(out, report.to_dict())
    if trace is not None and args.trace:
        _write_json(Path(args.trace), trace.to_dict())
    _print_cost(args.policy, sol.cost, elapsed)
    if "base_cost" in extra:
        print(f"{'':<14} base {extra['base_cost']:.2f} EUR, improvement {extra['improvement_vs_base']:.2f} EUR")
    print(f"report -> {out}")
    return 0


def _gap_rows(rows: list[dict]) -> None:
    totals = [r["total"] for r in rows if r["status"] == "ok"]
    best = min(totals) if totals else math.nan
    for r in rows:
        if r["status"] == "ok":
            r["gap_pct"] = 0.0 if best == 0 else 100.0 * (r["total"] - best) / best


def _row_from_report(doc: dict) -> dict:
    c = doc["cost"]
    return {"policy": doc["policy"], "status": "ok", "total": c["total"], "energy": c["energy"],
            "waiting": c["waiting"], "tardiness": c["tardiness"], "time_s": doc["solve_time_s"],
            "evaluations": doc["inner_evaluations"], "repairs": doc["repair_iterations"], "gap_pct": None}


def compare_reports(docs: list[dict]) -> list[dict]:
    hashes = {d["instance"]["sha256"] for d in docs}
    if len(hashes) != 1:
        raise InstanceError("reports were computed from different instances; refusing to compare")
    rows = [_row_from_report(d) for d in docs]
    _gap_rows(rows)
    return rows


def compare_policies(instance: Instance, path: str, digest: str, policies: list[str],
                     extension_slots: int = DEFAULT_EXTENSION_SLOTS) -> list[dict]:
    rows = []
    for policy in policies:
        try:
            sol, extra, elapsed, evals = run_policy(instance, policy, extension_slots=extension_slots)
            rep = build_report(instance, path, digest, policy, sol, elapsed, evals, extra)
            rows.append(_row_from_report(rep.to_dict()))
        except FleetChargeError as exc:
            rows.append({"policy": policy, "status": f"error: {exc}", "total": None, "energy": None,
                         "waiting": None, "tardiness": None, "time_s": None, "evaluations": None,
                         "repairs": None, "gap_pct": None})
    _gap_rows(rows)
    return rows


def write_compare(rows: list[dict], csv_path: Path, json_path: Path, meta: dict) -> None:
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(COMPARE_COLUMNS)
        for r in rows:
            w.writerow(["" if r[k] is None else (repr(r[k]) if isinstance(r[k], float) else r[k])
                        for k in COMPARE_COLUMNS])
    _write_json(json_path, {**meta, "rows": rows})


def cmd_compare(args) -> int:
    if args.reports:
        docs = [json.loads(Path(p).read_text(encoding="utf-8")) for p in args.reports]
        for d in docs:
            check_report(d)
        rows = compare_reports(docs)
        meta = {"instance_sha256": docs[0]["instance"]["sha256"]}
        stem = Path(args.reports[0]).stem
    else:
        if not args.instance:
            raise InstanceError("compare needs an instance file or --reports")
        policies = [p for p in args.policies.split(",") if p.strip()]
        if len(policies) < 2:
            raise InstanceError("compare needs at least two policies")
        instance, digest = read_instance(args.instance)
        rows = compare_policies(instance, str(args.instance), digest, policies, args.extension_slots)
        meta = {"instance": str(args.instance), "instance_sha256": digest}
        stem = Path(args.instance).stem
    base = Path(args.out) if args.out else _default_out(f"{stem}_compare")
    write_compare(rows, base.with_suffix(".csv"), base.with_suffix(".json"), meta)
    for r in rows:
        if r["status"] == "ok":
            print(f"{r['policy']:<14} total {r['total']:12.2f}  gap {r['gap_pct']:7.2f}%  ({r['time_s']:.3f} s)")
        else:
            print(f"{r['policy']:<14} {r['status']}")
    print(f"comparison -> {base.with_suffix('.csv')}, {base.with_suffix('.json')}")
    return 0


GANTT_COLUMNS = ("truck", "port", "slot", "slot_start_min", "power_kw", "price_eur_per_kwh",
                 "aggregate_power_kw")


def gantt_rows(doc: dict) -> list[tuple]:
    check_report(doc)
    tl = doc["timeline"]
    agg: dict[int, float] = {}
    for row in doc["trucks"]:
        for slot, kw, _ in row["profile"]:
            agg[slot] = agg.get(slot, 0.0) + kw
    out = []
    for row in doc["trucks"]:
        for slot, kw, price in row["profile"]:
            if kw <= 0:
                continue
            out.append((row["truck"], row["port"], slot, tl["origin"] + slot * tl["slot_minutes"],
                        kw, price, agg[slot]))
    out.sort(key=lambda r: (r[2], r[1], r[0]))
    return out


def cmd_gantt(args) -> int:
    doc = json.loads(Path(args.report).read_text(encoding="utf-8"))
    rows = gantt_rows(doc)
    out = Path(args.out) if args.out else Path(args.report).with_suffix(".gantt.csv")
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(GANTT_COLUMNS)
        for r in rows:
            w.writerow([repr(x) if isinstance(x, float) else x for x in r])
    peak = max((r[-1] for r in rows), default=0.0)
    print(f"gantt -> {out}  ({len(rows)} rows, peak {peak:.1f} kW of {doc['station_cap_kw']:.1f})")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fleetcharge", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a seeded instance file")
    g.add_argument("--preset", choices=("small", "large"), default="small")
    g.add_argument("--n", type=int, help="number of trucks")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--slot-minutes", type=int)
    g.add_argument("--ports", type=int)
    g.add_argument("--station-cap", type=float, help="station cap in kW")
    g.add_argument("--slack", type=float)
    g.add_argument("--horizon-slots", type=int)
    g.add_argument("-o", "--out")
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("solve", help="solve an instance with one policy")
    s.add_argument("instance")
    s.add_argument("--policy", default="rollout:edf", help="fcfs|edf|scdf|rollout:<base>|exact")
    s.add_argument("--extension-slots", type=int, default=DEFAULT_EXTENSION_SLOTS)
    s.add_argument("--trace", help="also write the rollout trace here")
    s.add_argument("-o", "--out")
    s.set_defaults(func=cmd_solve)

    c = sub.add_parser("compare", help="solve with several policies and tabulate")
    c.add_argument("instance", nargs="?")
    c.add_argument("--policies", default="fcfs,edf,scdf,rollout:fcfs,rollout:edf,rollout:scdf")
    c.add_argument("--reports", nargs="+", help="compare existing report files instead")
    c.add_argument("--extension-slots", type=int, default=DEFAULT_EXTENSION_SLOTS)
    c.add_argument("-o", "--out", help="output path stem (.csv and .json are written)")
    c.set_defaults(func=cmd_compare)

    t = sub.add_parser("gantt", help="slot-level occupancy CSV from a report")
    t.add_argument("report")
    t.add_argument("-o", "--out")
    t.set_defaults(func=cmd_gantt)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SizeGuard as exc:
        print(f"size guard: {exc}", file=sys.stderr)
        return 4
    except (HorizonExceeded, InfeasibleDemand, InfeasibleInstance) as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return 3
    except (ScheduleInvalid, InstanceError) as exc:
        print(f"validation failure: {exc}", file=sys.stderr)
        return 2
    except (OSError, FleetChargeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
