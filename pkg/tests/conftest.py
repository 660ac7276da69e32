from __future__ import annotations

import sys

import numpy as np
import pytest

from fleetcharge.model import Instance, StationSpec, Tariff, Timeline, TruckSpec
from fleetcharge.scenario import ScenarioConfig, generate_instance, preset


def truck(id, arrival=0, demand=100.0, deadline=None, power_cap=350.0, waiting_rate=2.0,
          tardiness_rate=10.0, capacity=468.0, initial_energy=None):
    if initial_energy is None:
        initial_energy = capacity - demand
    if deadline is None:
        deadline = arrival + 600
    return TruckSpec(id=id, arrival=arrival, initial_energy=initial_energy, demand=demand,
                     capacity=capacity, deadline=deadline, power_cap=power_cap,
                     waiting_rate=waiting_rate, tardiness_rate=tardiness_rate)


def make_instance(trucks, ports=(350.0,), station_cap=10_000.0, tariff=None, origin=0,
                  slot_minutes=5, num_slots=48):
    if tariff is None:
        tariff = Tariff((("00:00", 0.1),))
    return Instance(tuple(trucks), StationSpec(tuple(ports), station_cap), tariff,
                    Timeline(origin, slot_minutes, num_slots))


def micro_instance(seed: int) -> Instance:
    """N <= 3, C <= 2, 12 slots of 15 min, random origin across the day."""
    r = np.random.default_rng(seed)
    n = int(r.integers(1, 4))
    c = int(r.integers(1, 3))
    origin = int(r.integers(0, 96)) * 15
    cfg = ScenarioConfig(n_trucks=n, n_ports=c, station_cap_kw=float(r.choice([400, 600, 1000])),
                         slack=1.5, arrival_window=(origin, origin + 30), battery_capacity_kwh=300.0,
                         rng_seed=seed, slot_minutes=15, horizon_slots=12)
    return generate_instance(cfg)


@pytest.fixture(scope="session")
def small_instances():
    return [generate_instance(preset("small", rng_seed=s)) for s in range(10)]


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "ACCEPTANCE_LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
