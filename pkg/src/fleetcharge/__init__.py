"""Charging schedules for electric-truck fleets at a shared station."""

from .errors import (
    FleetChargeError,
    HorizonExceeded,
    InfeasibleDemand,
    InfeasibleInstance,
    InstanceError,
    SizeGuard,
)
from .exact import enumerate_orderings, exact_solve
from .inner import InnerSolution, inner_bruteforce, inner_solve
from .model import (
    CostBreakdown,
    Instance,
    Ordering,
    Schedule,
    StationSpec,
    Tariff,
    Timeline,
    TruckSchedule,
    TruckSpec,
    effective_cap,
    evaluate_cost,
    price_at,
    validate_schedule,
)
from .policies import PolicyKind, base_order, complete_partial
from .rollout import Action, PartialState, lookahead_cost, rollout_solve, transition
from .scenario import ScenarioConfig, default_tariff, generate_instance, preset

__version__ = "0.1.0"
