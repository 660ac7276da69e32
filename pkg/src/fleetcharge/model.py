"""Domain types, the discretized timeline, cost evaluation and constraint checks.

Units at the API boundary: minutes, kW, kWh, euros. Internally energy is held
as integer watt-hours so that demand and flow capacities compare exactly.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import InstanceError

# Energy is kept internally in integer watt-minutes (1/60 Wh): a whole-watt
# power over a whole-minute slot is then an exact integer amount.
WM_PER_KWH = 60_000
WM_PER_WH = 60

# Demand tolerance (Wh) and station/port power tolerance (kW).
TAU_E_WH = 1
TAU_P_KW = 1e-6
# Slack on float kWh comparisons derived from user-supplied values.
_KWH_EPS = TAU_E_WH / 1000.0


def parse_clock(value) -> float:
    """Return minutes for ``"HH:MM"`` strings; numbers pass through."""
    if isinstance(value, str):
        hh, sep, mm = value.partition(":")
        if not sep:
            raise InstanceError(f"bad clock value {value!r}")
        return int(hh) * 60 + int(mm)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InstanceError(f"bad time value {value!r}")
    return value


def format_clock(minute: float) -> str:
    m = int(round(minute))
    return f"{m // 60:02d}:{m % 60:02d}"


def kwh_to_wm(kwh: float) -> int:
    # demands are meaningful to the Wh
    return int(round(kwh * 1000.0)) * WM_PER_WH


def slot_energy_wm(power_kw: float, slot_minutes: int) -> int:
    """Largest whole W*min deliverable in one slot without exceeding ``power_kw``."""
    return int(math.floor(power_kw * 1000.0 * slot_minutes + 1e-6))


@dataclass(frozen=True)
class TruckSpec:
    id: int
    arrival: float
    initial_energy: float
    demand: float
    capacity: float
    deadline: float
    power_cap: float
    waiting_rate: float
    tardiness_rate: float

    def __post_init__(self):
        if self.demand <= 0:
            raise InstanceError(f"truck {self.id}: demand must be positive")
        if self.initial_energy < 0:
            raise InstanceError(f"truck {self.id}: negative initial energy")
        if self.initial_energy + self.demand > self.capacity + _KWH_EPS:
            raise InstanceError(f"truck {self.id}: initial energy + demand exceeds capacity")
        if self.power_cap <= 0:
            raise InstanceError(f"truck {self.id}: power cap must be positive")
        if self.waiting_rate < 0 or self.tardiness_rate < 0:
            raise InstanceError(f"truck {self.id}: negative cost rate")
        if self.deadline < self.arrival:
            raise InstanceError(f"truck {self.id}: deadline before arrival")

    @property
    def demand_wm(self) -> int:
        return kwh_to_wm(self.demand)


@dataclass(frozen=True)
class StationSpec:
    port_powers: tuple[float, ...]
    station_cap: float

    def __post_init__(self):
        object.__setattr__(self, "port_powers", tuple(self.port_powers))
        if not self.port_powers:
            raise InstanceError("station needs at least one port")
        if any(p <= 0 for p in self.port_powers):
            raise InstanceError("port powers must be positive")
        if self.station_cap <= 0:
            raise InstanceError("station cap must be positive")

    @property
    def n_ports(self) -> int:
        return len(self.port_powers)


@dataclass(frozen=True)
class Tariff:
    """Piecewise-constant price, segments left-closed and right-open.

    With ``period`` set (daily by default) the breakpoints describe one period
    and the pattern repeats; with ``period=None`` they are absolute minutes and
    the last segment extends indefinitely.
    """

    breakpoints: tuple[tuple[float, float], ...]
    period: int | None = 1440

    def __post_init__(self):
        bps = tuple((parse_clock(s), float(p)) for s, p in self.breakpoints)
        object.__setattr__(self, "breakpoints", bps)
        if not bps:
            raise InstanceError("tariff needs at least one breakpoint")
        starts = [s for s, _ in bps]
        if any(b <= a for a, b in zip(starts, starts[1:])):
            raise InstanceError("tariff breakpoints must be strictly ascending")
        if any(p < 0 for _, p in bps):
            raise InstanceError("tariff prices must be nonnegative")
        if self.period is not None and not (0 <= starts[0] and starts[-1] < self.period):
            raise InstanceError("periodic tariff breakpoints must lie within one period")

    @cached_property
    def _starts(self) -> list[float]:
        return [s for s, _ in self.breakpoints]

    def price_at(self, minute: float) -> float:
        if self.period is not None:
            minute = minute % self.period
            k = bisect.bisect_right(self._starts, minute) - 1
            # before the first breakpoint of the period: previous period's last segment
            return self.breakpoints[k][1]
        k = bisect.bisect_right(self._starts, minute) - 1
        if k < 0:
            raise InstanceError(f"minute {minute} precedes the first tariff breakpoint")
        return self.breakpoints[k][1]


def price_at(tariff: Tariff, minute: float) -> float:
    return tariff.price_at(parse_clock(minute))


@dataclass(frozen=True)
class Timeline:
    origin: int
    slot_minutes: int
    num_slots: int

    def __post_init__(self):
        if int(self.slot_minutes) != self.slot_minutes or self.slot_minutes < 1:
            raise InstanceError("slot_minutes must be a positive integer")
        if int(self.num_slots) != self.num_slots or self.num_slots < 1:
            raise InstanceError("num_slots must be a positive integer")

    @property
    def end(self) -> int:
        return self.origin + self.slot_minutes * self.num_slots

    def slot_start(self, slot: int) -> int:
        return self.origin + self.slot_minutes * slot

    def first_slot_at_or_after(self, minute: float) -> int:
        return int(math.ceil((minute - self.origin) / self.slot_minutes - 1e-9))


@dataclass(frozen=True)
class Instance:
    trucks: tuple[TruckSpec, ...]
    station: StationSpec
    tariff: Tariff
    timeline: Timeline

    def __post_init__(self):
        object.__setattr__(self, "trucks", tuple(self.trucks))
        ids = [t.id for t in self.trucks]
        if ids != list(range(1, len(ids) + 1)):
            if sorted(ids) != list(range(1, len(ids) + 1)):
                raise InstanceError("truck ids must be unique and contiguous from 1")
            object.__setattr__(self, "trucks", tuple(sorted(self.trucks, key=lambda t: t.id)))
        tl = self.timeline
        for t in self.trucks:
            if not (tl.origin <= t.arrival < tl.end):
                raise InstanceError(f"truck {t.id}: arrival outside the timeline")
        for start, _ in self.tariff.breakpoints:
            if (start - tl.origin) % tl.slot_minutes != 0:
                raise InstanceError(f"tariff breakpoint {format_clock(start)} not on a slot boundary")
        if self.tariff.period is not None and self.tariff.period % tl.slot_minutes != 0:
            raise InstanceError("tariff period must be a multiple of the slot length")
        if self.tariff.period is None and self.tariff.breakpoints[0][0] > tl.origin:
            raise InstanceError("tariff does not cover the start of the horizon")

    @property
    def n_trucks(self) -> int:
        return len(self.trucks)

    @property
    def n_ports(self) -> int:
        return self.station.n_ports

    def truck(self, truck_id: int) -> TruckSpec:
        return self.trucks[truck_id - 1]

    @cached_property
    def arrays(self) -> InstanceArrays:
        return InstanceArrays.build(self)


@dataclass(frozen=True, eq=False)
class InstanceArrays:
    """Dense numeric view of an instance consumed by the kernels (index = id - 1)."""

    origin: int
    delta: int
    H: int
    slot_price: np.ndarray  # €/kWh per slot
    slot_key: np.ndarray  # integer flow cost per W*min, earliest slot wins ties
    slot_level: np.ndarray  # index into level_price
    level_price: np.ndarray
    arrival: np.ndarray
    deadline: np.ndarray
    eps: np.ndarray
    gamma: np.ndarray
    demand_wm: np.ndarray
    a_slot: np.ndarray
    cap_wm: np.ndarray  # (N, C) per-slot Wh at the effective cap
    nom: np.ndarray  # (N, C) full-power duration in slots
    station_wm: int

    @classmethod
    def build(cls, inst: Instance) -> InstanceArrays:
        tl = inst.timeline
        H, delta = tl.num_slots, tl.slot_minutes
        prices = np.array([inst.tariff.price_at(tl.slot_start(t)) for t in range(H)])
        levels, slot_level = np.unique(prices, return_inverse=True)
        price_int = np.rint(prices * 1e6).astype(np.int64)
        slot_key = price_int * (H + 1) + np.arange(H, dtype=np.int64)
        trucks = inst.trucks
        cap_wm = np.array(
            [[slot_energy_wm(effective_cap(t, c, inst.station), delta) for c in range(inst.n_ports)]
             for t in trucks], dtype=np.int64).reshape(len(trucks), inst.n_ports)
        demand_wm = np.array([t.demand_wm for t in trucks], dtype=np.int64)
        nom = -(-demand_wm[:, None] // cap_wm)
        return cls(
            origin=tl.origin, delta=delta, H=H,
            slot_price=prices, slot_key=slot_key,
            slot_level=slot_level.astype(np.int64), level_price=levels,
            arrival=np.array([t.arrival for t in trucks], dtype=np.float64),
            deadline=np.array([t.deadline for t in trucks], dtype=np.float64),
            eps=np.array([t.waiting_rate for t in trucks], dtype=np.float64),
            gamma=np.array([t.tardiness_rate for t in trucks], dtype=np.float64),
            demand_wm=demand_wm,
            a_slot=np.array([tl.first_slot_at_or_after(t.arrival) for t in trucks], dtype=np.int64),
            cap_wm=cap_wm, nom=nom.astype(np.int64),
            station_wm=slot_energy_wm(inst.station.station_cap, delta),
        )


def effective_cap(truck: TruckSpec, port_index: int, station: StationSpec) -> float:
    if not 0 <= port_index < station.n_ports:
        raise IndexError(f"port index {port_index} out of range for {station.n_ports} ports")
    return min(truck.power_cap, station.port_powers[port_index])


@dataclass(frozen=True)
class Ordering:
    """Per-port service sequences of truck ids; ports are indexed from 0."""

    per_port: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "per_port", tuple(tuple(s) for s in self.per_port))

    @property
    def n_ports(self) -> int:
        return len(self.per_port)

    def check(self, n_trucks: int, n_ports: int | None = None) -> None:
        if n_ports is not None and self.n_ports != n_ports:
            raise InstanceError(f"ordering has {self.n_ports} ports, expected {n_ports}")
        seen = [i for seq in self.per_port for i in seq]
        if len(seen) != len(set(seen)):
            raise InstanceError("port sequences overlap")
        if set(seen) != set(range(1, n_trucks + 1)):
            raise InstanceError("ordering does not cover every truck exactly once")

    def arcs(self) -> list[tuple[int, int]]:
        return [(seq[k], seq[k + 1]) for seq in self.per_port for k in range(len(seq) - 1)]

    def port_of(self) -> dict[int, int]:
        return {i: c for c, seq in enumerate(self.per_port) for i in seq}


@dataclass(frozen=True)
class TruckSchedule:
    truck: int
    port: int
    start_time: float
    finish_time: float
    energy_wm: tuple[tuple[int, int], ...]  # (slot, W*min) for every nonzero slot

    @property
    def duration(self) -> float:
        return self.finish_time - self.start_time

    @property
    def delivered_wm(self) -> int:
        return sum(w for _, w in self.energy_wm)


@dataclass(frozen=True)
class Schedule:
    ordering: Ordering
    trucks: tuple[TruckSchedule, ...]  # sorted by truck id
    slot_minutes: int

    def power_kw(self, truck_id: int) -> dict[int, float]:
        ts = self.trucks[truck_id - 1]
        return {t: w / (1000.0 * self.slot_minutes) for t, w in ts.energy_wm}


@dataclass(frozen=True)
class CostBreakdown:
    energy_cost: float
    waiting_cost: float
    tardiness_cost: float
    total: float = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        object.__setattr__(self, "total", self.energy_cost + self.waiting_cost + self.tardiness_cost)

    def as_dict(self) -> dict:
        return {"energy": self.energy_cost, "waiting": self.waiting_cost,
                "tardiness": self.tardiness_cost, "total": self.total}


INF_COST = CostBreakdown(math.inf, math.inf, math.inf)


def cost_from_arrays(arr: InstanceArrays, level_wm: np.ndarray, start_time: np.ndarray,
                     finish_time: np.ndarray) -> CostBreakdown:
    """Cost from per-price-level delivered Wh and per-truck start/finish minutes.

    Energy is aggregated per distinct price before converting to euros, so with a
    flat tariff the energy term is exactly ``price * total_Wmin / 60000``.
    """
    energy = 0.0
    for k in range(len(arr.level_price)):
        if level_wm[k]:
            energy += float(arr.level_price[k]) * int(level_wm[k]) / WM_PER_KWH
    waiting = 0.0
    tardiness = 0.0
    for i in range(len(start_time)):
        waiting += float(arr.eps[i]) * (float(start_time[i]) - float(arr.arrival[i]))
        late = float(finish_time[i]) - float(arr.deadline[i])
        if late > 0:
            tardiness += float(arr.gamma[i]) * late
    return CostBreakdown(energy, waiting, tardiness)


def evaluate_cost(instance: Instance, schedule: Schedule) -> CostBreakdown:
    arr = instance.arrays
    level_wm = np.zeros(len(arr.level_price), dtype=np.int64)
    for ts in schedule.trucks:
        for t, w in ts.energy_wm:
            level_wm[arr.slot_level[t]] += w
    start = np.array([ts.start_time for ts in schedule.trucks])
    finish = np.array([ts.finish_time for ts in schedule.trucks])
    return cost_from_arrays(arr, level_wm, start, finish)


def truck_cost(instance: Instance, ts: TruckSchedule) -> CostBreakdown:
    """Cost contribution of a single truck."""
    truck = instance.truck(ts.truck)
    arr = instance.arrays
    energy = sum(float(arr.slot_price[t]) * w / WM_PER_KWH for t, w in ts.energy_wm)
    late = max(ts.finish_time - truck.deadline, 0.0)
    return CostBreakdown(energy, truck.waiting_rate * (ts.start_time - truck.arrival),
                         truck.tardiness_rate * late)


@dataclass(frozen=True)
class Violation:
    constraint: str  # demand, battery, power, station, arrival, precedence, structure or window
    trucks: tuple[int, ...]
    magnitude: float
    message: str


def validate_schedule(instance: Instance, schedule: Schedule) -> list[Violation]:
    out: list[Violation] = []
    n = instance.n_trucks
    try:
        schedule.ordering.check(n, instance.n_ports)
    except InstanceError as exc:
        return [Violation("structure", (), 0.0, str(exc))]
    if [ts.truck for ts in schedule.trucks] != list(range(1, n + 1)):
        return [Violation("structure", (), 0.0, "schedule must list every truck once, by id")]
    tl = instance.timeline
    if schedule.slot_minutes != tl.slot_minutes:
        return [Violation("structure", (), 0.0, "schedule slot length differs from the timeline")]
    delta = tl.slot_minutes
    kw_per_wm = 1.0 / (1000.0 * delta)
    port_of = schedule.ordering.port_of()
    slot_total = np.zeros(tl.num_slots)

    for ts in schedule.trucks:
        truck = instance.truck(ts.truck)
        i = ts.truck
        if ts.port != port_of[i]:
            out.append(Violation("structure", (i,), 0.0, f"truck {i} port disagrees with ordering"))
            continue
        diff_wm = ts.delivered_wm - truck.demand_wm
        if abs(diff_wm) > TAU_E_WH * WM_PER_WH:
            out.append(Violation("demand", (i,), abs(diff_wm) / WM_PER_KWH,
                                 f"truck {i} receives {ts.delivered_wm / WM_PER_KWH:.3f} kWh of {truck.demand:.3f}"))
        excess = truck.initial_energy + truck.demand - truck.capacity
        if excess > _KWH_EPS:
            out.append(Violation("battery", (i,), excess, f"truck {i} would exceed battery capacity"))
        cap = effective_cap(truck, ts.port, instance.station)
        for t, w in ts.energy_wm:
            p = w * kw_per_wm
            if not 0 <= t < tl.num_slots:
                out.append(Violation("window", (i,), abs(p), f"truck {i} draws power outside the horizon"))
                continue
            slot_total[t] += p
            if w < 0 or p > cap + TAU_P_KW:
                over = p - cap if p > cap else -p
                out.append(Violation("power", (i,), over, f"truck {i} slot {t} power {p:.3f} kW outside [0, {cap}]"))
            lo, hi = tl.slot_start(t), tl.slot_start(t + 1)
            if w and not (lo < ts.finish_time and hi > ts.start_time):
                out.append(Violation("window", (i,), p, f"truck {i} charges in slot {t} outside its interval"))
        if ts.start_time < truck.arrival:
            out.append(Violation("arrival", (i,), truck.arrival - ts.start_time, f"truck {i} starts before arrival"))
        if ts.finish_time <= ts.start_time:
            out.append(Violation("arrival", (i,), ts.start_time - ts.finish_time, f"truck {i} finishes before it starts"))

    cap_kw = instance.station.station_cap
    for t in np.nonzero(slot_total > cap_kw + TAU_P_KW)[0]:
        out.append(Violation("station", (), float(slot_total[t] - cap_kw),
                             f"slot {t} aggregate power {slot_total[t]:.3f} kW exceeds station cap"))

    for i, j in schedule.ordering.arcs():
        gap = schedule.trucks[i - 1].finish_time - schedule.trucks[j - 1].start_time
        if gap > 1e-9:
            out.append(Violation("precedence", (i, j), gap, f"truck {j} starts {gap:.3f} min before truck {i} finishes"))
    return out
