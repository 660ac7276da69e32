"""Outer layer as a sequential decision process, solved by one-step lookahead rollout."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import FleetChargeError, InfeasibleInstance, InstanceError
from .inner import DEFAULT_EXTENSION_SLOTS, InnerSolution, _to_solution, inner_solve, solve_raw
from .model import Instance, Ordering
from .policies import PolicyKind, base_order, complete_partial


@dataclass(frozen=True)
class PartialState:
    per_port: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "per_port", tuple(tuple(s) for s in self.per_port))
        flat = [i for s in self.per_port for i in s]
        if len(flat) != len(set(flat)):
            raise InstanceError("partial state sequences overlap")

    @classmethod
    def empty(cls, n_ports: int) -> PartialState:
        return cls(((),) * n_ports)

    @property
    def stage(self) -> int:
        return sum(len(s) for s in self.per_port)

    def assigned(self) -> set[int]:
        return {i for s in self.per_port for i in s}

    def unassigned(self, n_trucks: int) -> list[int]:
        taken = self.assigned()
        return [i for i in range(1, n_trucks + 1) if i not in taken]


@dataclass(frozen=True)
class Action:
    truck: int
    port: int


def transition(state: PartialState, action: Action) -> PartialState:
    if not 0 <= action.port < len(state.per_port):
        raise InstanceError(f"port {action.port} out of range")
    if action.truck in state.assigned():
        raise InstanceError(f"truck {action.truck} is already assigned")
    seqs = list(state.per_port)
    seqs[action.port] = seqs[action.port] + (action.truck,)
    return PartialState(tuple(seqs))


def lookahead_cost(instance: Instance, state: PartialState, action: Action, base: PolicyKind, *,
                   extension_slots: int = DEFAULT_EXTENSION_SLOTS) -> float:
    """Cost of the ordering reached by ``action`` then completed by ``base``; inf if infeasible."""
    ordering = complete_partial(instance, transition(state, action), base)
    try:
        return solve_raw(instance, ordering, extension_slots).cost.total
    except FleetChargeError:
        return math.inf


@dataclass
class StageRecord:
    stage: int
    candidates: list[tuple[Action, float]]
    chosen: Action
    best_cost: float


@dataclass
class RolloutTrace:
    base: PolicyKind
    stages: list[StageRecord] = field(default_factory=list)
    ordering: Ordering | None = None
    solution: InnerSolution | None = None
    evaluations: int = 0
    base_cost: float = math.inf
    used_base_fallback: bool = False

    @property
    def cost(self) -> float:
        return self.solution.cost.total

    def to_dict(self) -> dict:
        def num(x):
            return None if math.isinf(x) else x

        return {
            "base": self.base.value,
            "evaluations": self.evaluations,
            "base_cost": num(self.base_cost),
            "used_base_fallback": self.used_base_fallback,
            "ordering": [list(s) for s in self.ordering.per_port],
            "stages": [
                {"stage": r.stage,
                 "chosen": [r.chosen.truck, r.chosen.port],
                 "best_cost": num(r.best_cost),
                 "candidates": [[a.truck, a.port, num(c)] for a, c in r.candidates]}
                for r in self.stages
            ],
        }


def rollout_solve(instance: Instance, base: PolicyKind, *,
                  extension_slots: int = DEFAULT_EXTENSION_SLOTS) -> RolloutTrace:
    """Build an ordering one (truck, port) decision at a time.

    Every candidate is scored by completing it with ``base`` and solving the
    inner layer; the cheapest wins (ties: lower truck id, then lower port).
    Exactly ``C*N*(N+1)/2`` candidate solves plus one final solve are made.
    """
    n, n_ports = instance.n_trucks, instance.n_ports
    trace = RolloutTrace(base=base)
    reference = base_order(instance, base)
    base_raw = None
    state = PartialState.empty(n_ports)

    while state.stage < n:
        best_action, best_cost = None, math.inf
        cands = []
        for i in state.unassigned(n):
            for c in range(n_ports):
                action = Action(i, c)
                ordering = complete_partial(instance, transition(state, action), base)
                trace.evaluations += 1
                try:
                    raw = solve_raw(instance, ordering, extension_slots)
                    cost = raw.cost.total
                except FleetChargeError:
                    raw, cost = None, math.inf
                if state.stage == 0 and ordering == reference:
                    base_raw, trace.base_cost = raw, cost
                cands.append((action, cost))
                if cost < best_cost:
                    best_action, best_cost = action, cost
        if best_action is None:
            raise InfeasibleInstance(f"every candidate at stage {state.stage} is infeasible")
        trace.stages.append(StageRecord(state.stage, cands, best_action, best_cost))
        state = transition(state, best_action)

    trace.ordering = Ordering(state.per_port)
    trace.evaluations += 1
    trace.solution = inner_solve(instance, trace.ordering, extension_slots=extension_slots)
    if base_raw is not None and trace.solution.cost.total > trace.base_cost:
        trace.used_base_fallback = True
        trace.ordering = reference
        trace.solution = _to_solution(instance, reference, base_raw)
    return trace
