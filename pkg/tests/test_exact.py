import pytest

from fleetcharge.errors import SizeGuard
from fleetcharge.exact import count_orderings, enumerate_orderings, exact_solve
from fleetcharge.inner import inner_solve
from fleetcharge.model import Tariff
from fleetcharge.policies import PolicyKind, base_order
from fleetcharge.rollout import rollout_solve
from fleetcharge.scenario import generate_instance, preset

from conftest import make_instance, truck


@pytest.mark.parametrize("n, c, expected", [(2, 1, 2), (2, 2, 6), (1, 3, 3)])
def test_counts(n, c, expected):
    got = [o.per_port for o in enumerate_orderings(n, c)]
    assert len(got) == expected == count_orderings(n, c)


def test_two_trucks_two_ports_listing():
    got = {o.per_port for o in enumerate_orderings(2, 2)}
    assert got == {((1,), (2,)), ((2,), (1,)), ((1, 2), ()), ((2, 1), ()), ((), (1, 2)), ((), (2, 1))}


@pytest.mark.parametrize("n, c", [(3, 2), (4, 3), (5, 2)])
def test_enumeration_has_no_duplicates(n, c):
    got = [o.per_port for o in enumerate_orderings(n, c)]
    assert len(set(got)) == len(got) == count_orderings(n, c)
    for o in enumerate_orderings(n, c):
        o.check(n, c)


def test_guard():
    with pytest.raises(SizeGuard, match="orderings"):
        next(enumerate_orderings(9, 2))


def test_single_truck_picks_the_best_port():
    # 100 kWh takes 17.1 min at 350 kW and 20 min at 300 kW
    inst = make_instance([truck(1, deadline=18)], ports=(300.0, 350.0, 300.0))
    ordering, sol = exact_solve(inst)
    assert ordering.per_port == ((), (1,), ())
    assert sol.cost.total == min(
        inner_solve(inst, o).cost.total for o in enumerate_orderings(1, 3))


def test_symmetric_instance():
    trucks = [truck(i, arrival=0, demand=90.0) for i in range(1, 4)]
    inst = make_instance(trucks, ports=(350.0, 350.0), tariff=Tariff((("00:00", 0.15),)), num_slots=96)
    _, sol = exact_solve(inst)
    for kind in PolicyKind:
        assert rollout_solve(inst, kind).cost == pytest.approx(sol.cost.total, rel=1e-12)


@pytest.mark.parametrize("seed", range(3))
def test_exact_dominates_every_ordering_and_policy(seed):
    inst = generate_instance(preset("small", n_trucks=4, rng_seed=200 + seed))
    _, best = exact_solve(inst)
    for o in list(enumerate_orderings(4, 3))[::37]:
        assert best.cost.total <= inner_solve(inst, o).cost.total
    for kind in PolicyKind:
        assert best.cost.total <= inner_solve(inst, base_order(inst, kind)).cost.total
        assert best.cost.total <= rollout_solve(inst, kind).cost


@pytest.mark.parametrize("seed", range(3))
def test_symmetry_pruning_agrees(seed):
    inst = generate_instance(preset("small", n_trucks=4, rng_seed=300 + seed,
                                    port_powers_kw=(350.0, 350.0, 350.0)))
    _, full = exact_solve(inst)
    _, pruned = exact_solve(inst, symmetry_pruning=True)
    assert pruned.cost.total == pytest.approx(full.cost.total, rel=1e-12)
    assert sum(1 for _ in enumerate_orderings(4, 3, canonical_ports=True)) < count_orderings(4, 3)
