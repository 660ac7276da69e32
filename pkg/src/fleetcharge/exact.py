"""Exhaustive search over every per-port ordering."""

from __future__ import annotations

import itertools
import math
from typing import Iterator

from .errors import FleetChargeError, InfeasibleInstance, SizeGuard
from .inner import DEFAULT_EXTENSION_SLOTS, InnerSolution, _to_solution, solve_raw
from .model import Instance, Ordering

DEFAULT_GUARD = 8


def count_orderings(n_trucks: int, n_ports: int) -> int:
    """|orderings| = n! * C(n + ports - 1, ports - 1)."""
    return math.factorial(n_trucks) * math.comb(n_trucks + n_ports - 1, n_ports - 1)


def _assignments(n: int, n_ports: int, canonical: bool) -> Iterator[tuple[int, ...]]:
    if not canonical:
        yield from itertools.product(range(n_ports), repeat=n)
        return

    # restricted-growth vectors: port labels introduced in increasing order
    def grow(prefix, used):
        if len(prefix) == n:
            yield tuple(prefix)
            return
        for c in range(min(used + 1, n_ports)):
            prefix.append(c)
            yield from grow(prefix, max(used, c + 1))
            prefix.pop()

    yield from grow([], 0)


def enumerate_orderings(n_trucks: int, n_ports: int, *, guard: int = DEFAULT_GUARD,
                        canonical_ports: bool = False) -> Iterator[Ordering]:
    """Yield every ordering once: assignment vectors in lexicographic order, then
    within-port permutations in lexicographic order.

    ``canonical_ports`` keeps one representative per relabeling of ports, which
    is only sound when all ports are interchangeable.
    """
    if n_trucks > guard:
        raise SizeGuard(f"exact enumeration refused for N={n_trucks} > {guard}: "
                        f"{count_orderings(n_trucks, n_ports):,} orderings")
    for assign in _assignments(n_trucks, n_ports, canonical_ports):
        groups = [[i + 1 for i in range(n_trucks) if assign[i] == c] for c in range(n_ports)]
        for perms in itertools.product(*(itertools.permutations(g) for g in groups)):
            yield Ordering(perms)


def exact_solve(instance: Instance, *, guard: int = DEFAULT_GUARD, symmetry_pruning: bool = False,
                extension_slots: int = DEFAULT_EXTENSION_SLOTS) -> tuple[Ordering, InnerSolution]:
    """Cheapest ordering under the shared inner solver; first in enumeration order on ties."""
    ports = instance.station.port_powers
    canonical = symmetry_pruning and len(set(ports)) == 1
    best_raw, best_ordering = None, None
    for ordering in enumerate_orderings(instance.n_trucks, instance.n_ports, guard=guard,
                                        canonical_ports=canonical):
        try:
            raw = solve_raw(instance, ordering, extension_slots)
        except FleetChargeError:
            continue
        if best_raw is None or raw.cost.total < best_raw.cost.total:
            best_raw, best_ordering = raw, ordering
    if best_raw is None:
        raise InfeasibleInstance("no ordering admits a feasible schedule")
    return best_ordering, _to_solution(instance, best_ordering, best_raw)
