"""Priority-rule base policies (FCFS, EDF, SCDF) and completion of partial orderings."""

from __future__ import annotations

import enum
from typing import TYPE_CHECKING, Sequence

from .errors import InstanceError
from .model import Instance, Ordering

if TYPE_CHECKING:
    from .rollout import PartialState


class PolicyKind(enum.Enum):
    FCFS = "fcfs"
    EDF = "edf"
    SCDF = "scdf"

    @property
    def key_field(self) -> str:
        return {"fcfs": "arrival", "edf": "deadline", "scdf": "demand"}[self.value]

    @classmethod
    def parse(cls, name: str) -> PolicyKind:
        try:
            return cls(name.strip().lower())
        except ValueError:
            raise ValueError(f"unknown base policy {name!r}; expected fcfs, edf or scdf") from None


def priority(instance: Instance, kind: PolicyKind, ids: Sequence[int] | None = None) -> list[int]:
    """Truck ids sorted by the policy key, ties to the lower id."""
    field = kind.key_field
    if ids is None:
        ids = range(1, instance.n_trucks + 1)
    return sorted(ids, key=lambda i: (getattr(instance.truck(i), field), i))


def _assign(instance: Instance, per_port: list[list[int]], queue: list[int]) -> Ordering:
    # nominal availability per port, in slots: full power, no station cap
    arr = instance.arrays
    avail = [0] * instance.n_ports
    for c, seq in enumerate(per_port):
        for i in seq:
            avail[c] = max(avail[c], int(arr.a_slot[i - 1])) + int(arr.nom[i - 1, c])
    for i in queue:
        c = min(range(instance.n_ports), key=lambda p: (avail[p], p))
        per_port[c].append(i)
        avail[c] = max(avail[c], int(arr.a_slot[i - 1])) + int(arr.nom[i - 1, c])
    return Ordering(tuple(tuple(s) for s in per_port))


def base_order(instance: Instance, kind: PolicyKind) -> Ordering:
    """List-schedule trucks in priority order onto the earliest-available port."""
    return _assign(instance, [[] for _ in range(instance.n_ports)], priority(instance, kind))


def complete_partial(instance: Instance, partial: PartialState, kind: PolicyKind) -> Ordering:
    """Append every unassigned truck to ``partial`` using the base policy's rule."""
    if len(partial.per_port) != instance.n_ports:
        raise InstanceError("partial state has the wrong number of ports")
    assigned = [i for seq in partial.per_port for i in seq]
    if len(assigned) != len(set(assigned)) or not set(assigned) <= set(range(1, instance.n_trucks + 1)):
        raise InstanceError("partial state is not a disjoint subset of the fleet")
    rest = priority(instance, kind, sorted(set(range(1, instance.n_trucks + 1)) - set(assigned)))
    return _assign(instance, [list(s) for s in partial.per_port], rest)
