"""Seeded instance generation for the small-fleet and large-fleet regimes."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import InstanceError
from .model import Instance, StationSpec, Tariff, Timeline, TruckSpec, parse_clock

TOU_SEGMENTS = (
    ("00:00", 0.101),
    ("06:00", 0.174),
    ("09:00", 0.128),
    ("12:00", 0.110),
    ("17:00", 0.202),
    ("21:00", 0.101),
)


def default_tariff() -> Tariff:
    """Six-segment daily time-of-use tariff, repeating every 24 h."""
    return Tariff(TOU_SEGMENTS, period=1440)


def flat_tariff(price: float) -> Tariff:
    return Tariff((("00:00", price),), period=1440)


@dataclass(frozen=True)
class ScenarioConfig:
    n_trucks: int
    n_ports: int
    station_cap_kw: float
    slack: float
    arrival_window: tuple[float, float]
    port_powers_kw: tuple[float, ...] | None = None  # None: draw each port from port_power_choices
    port_power_choices: tuple[float, ...] = (300.0, 350.0)
    battery_capacity_kwh: float = 468.0
    truck_power_cap_kw: float = 350.0
    initial_soc_range: tuple[float, float] = (0.20, 0.80)
    waiting_rate: float = 2.0
    tardiness_rate: float = 10.0
    rng_seed: int = 0
    slot_minutes: int = 5
    horizon_slots: int = 288
    origin: float | None = None  # defaults to the start of the arrival window
    tariff: Tariff = field(default_factory=default_tariff)

    def __post_init__(self):
        lo, hi = self.initial_soc_range
        if self.slack < 1:
            raise InstanceError("slack must be at least 1")
        if not (0.0 <= lo <= hi <= 1.0):
            raise InstanceError("initial SOC range must be a nonempty sub-interval of [0, 1]")
        a0, a1 = (parse_clock(x) for x in self.arrival_window)
        if a1 < a0:
            raise InstanceError("arrival window is empty")
        if self.n_trucks < 1 or self.n_ports < 1:
            raise InstanceError("need at least one truck and one port")
        if self.port_powers_kw is not None and len(self.port_powers_kw) != self.n_ports:
            raise InstanceError("port_powers_kw length must equal n_ports")


PRESETS: dict[str, ScenarioConfig] = {
    # Arrivals straddle the 09:00 price drop; 6 h horizon.
    "small": ScenarioConfig(n_trucks=8, n_ports=3, station_cap_kw=1000.0, slack=1.5,
                            arrival_window=(parse_clock("08:30"), parse_clock("09:00")),
                            horizon_slots=72),
    "large": ScenarioConfig(n_trucks=100, n_ports=10, station_cap_kw=3350.0, slack=2.0,
                            arrival_window=(parse_clock("06:00"), parse_clock("12:00")),
                            horizon_slots=288),
}


def preset(name: str, **overrides) -> ScenarioConfig:
    try:
        base = PRESETS[name]
    except KeyError:
        raise InstanceError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    return replace(base, **overrides)


def make_rng(seed: int) -> np.random.Generator:
    """PCG64 stream; only ``random()`` doubles are drawn, in a fixed order."""
    return np.random.Generator(np.random.PCG64(seed))


def generate_instance(config: ScenarioConfig) -> Instance:
    rng = make_rng(config.rng_seed)
    if config.port_powers_kw is None:
        choices = config.port_power_choices
        ports = tuple(float(choices[int(rng.random() * len(choices))]) for _ in range(config.n_ports))
    else:
        ports = tuple(float(p) for p in config.port_powers_kw)

    a0, a1 = (parse_clock(x) for x in config.arrival_window)
    soc_lo, soc_hi = config.initial_soc_range
    cap = float(config.battery_capacity_kwh)
    pmax = float(config.truck_power_cap_kw)
    trucks = []
    for i in range(1, config.n_trucks + 1):
        u_soc = rng.random()
        u_arr = rng.random()
        initial = round(cap * (soc_lo + (soc_hi - soc_lo) * u_soc), 3)
        demand = round(cap - initial, 3)
        arrival = int(round(a0 + u_arr * (a1 - a0)))
        deadline = arrival + config.slack * demand / pmax * 60.0
        trucks.append(TruckSpec(
            id=i, arrival=arrival, initial_energy=initial, demand=demand, capacity=cap,
            deadline=deadline, power_cap=pmax, waiting_rate=float(config.waiting_rate),
            tardiness_rate=float(config.tardiness_rate)))

    origin = a0 if config.origin is None else parse_clock(config.origin)
    timeline = Timeline(origin=int(origin), slot_minutes=int(config.slot_minutes),
                        num_slots=int(config.horizon_slots))
    return Instance(tuple(trucks), StationSpec(ports, float(config.station_cap_kw)),
                    config.tariff, timeline)
