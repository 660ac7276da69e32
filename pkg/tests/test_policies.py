import dataclasses

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fleetcharge.errors import InstanceError
from fleetcharge.model import Instance
from fleetcharge.policies import PolicyKind, base_order, complete_partial, priority
from fleetcharge.rollout import PartialState

from conftest import make_instance, truck


def test_fcfs_sorts_by_arrival():
    inst = make_instance([truck(1, arrival=10), truck(2, arrival=5), truck(3, arrival=20)])
    assert base_order(inst, PolicyKind.FCFS).per_port == ((2, 1, 3),)


def test_identical_trucks_spread_over_ports():
    inst = make_instance([truck(1), truck(2)], ports=(350.0, 350.0))
    assert base_order(inst, PolicyKind.EDF).per_port == ((1,), (2,))


def test_scdf_sorts_by_demand():
    inst = make_instance([truck(1, demand=50.0), truck(2, demand=30.0), truck(3, demand=70.0)])
    assert base_order(inst, PolicyKind.SCDF).per_port == ((2, 1, 3),)


def test_edf_sorts_by_deadline_ties_to_lower_id():
    inst = make_instance([truck(1, deadline=90), truck(2, deadline=60), truck(3, deadline=60)])
    assert priority(inst, PolicyKind.EDF) == [2, 3, 1]


def test_complete_partial_fills_the_empty_port():
    # truck 1 sits on the second port; port 0 is free from slot 0 so truck 2 goes there
    inst = make_instance([truck(1), truck(2)], ports=(350.0, 350.0))
    out = complete_partial(inst, PartialState(((), (1,))), PolicyKind.FCFS)
    assert out.per_port == ((2,), (1,))


def test_complete_partial_fixed_point_and_empty_case(small_instances):
    for inst in small_instances[:4]:
        for kind in PolicyKind:
            full = base_order(inst, kind)
            assert complete_partial(inst, PartialState.empty(inst.n_ports), kind) == full
            assert complete_partial(inst, PartialState(full.per_port), kind) == full


def test_complete_partial_rejects_malformed_state():
    inst = make_instance([truck(1), truck(2)], ports=(350.0, 350.0))
    with pytest.raises(InstanceError):
        complete_partial(inst, PartialState(((1,),)), PolicyKind.EDF)
    with pytest.raises(InstanceError):
        complete_partial(inst, PartialState(((3,), ())), PolicyKind.EDF)


def test_policy_parse():
    assert PolicyKind.parse(" EDF ") is PolicyKind.EDF
    with pytest.raises(ValueError):
        PolicyKind.parse("lifo")


fleet = st.lists(
    st.tuples(st.integers(0, 120), st.integers(10, 300), st.integers(0, 200)),
    min_size=1, max_size=7)


def _instance(rows, n_ports):
    trucks = [truck(i, arrival=a, demand=float(d), deadline=a + 60 + s)
              for i, (a, d, s) in enumerate(rows, start=1)]
    return make_instance(trucks, ports=(350.0, 300.0, 350.0)[:n_ports], num_slots=288)


@settings(max_examples=60, deadline=None)
@given(fleet, st.integers(1, 3), st.sampled_from(list(PolicyKind)))
def test_base_order_is_a_partition(rows, n_ports, kind):
    inst = _instance(rows, n_ports)
    base_order(inst, kind).check(inst.n_trucks, inst.n_ports)


@settings(max_examples=60, deadline=None)
@given(fleet, st.integers(1, 3), st.sampled_from(list(PolicyKind)), st.randoms(use_true_random=False))
def test_base_order_is_permutation_equivariant(rows, n_ports, kind, rnd):
    inst = _instance(rows, n_ports)
    keys = [getattr(t, kind.key_field) for t in inst.trucks]
    if len(set(keys)) != len(keys):
        return  # ties are broken by id, which relabeling changes
    n = inst.n_trucks
    perm = list(range(1, n + 1))
    rnd.shuffle(perm)  # old id i becomes perm[i-1]
    moved = sorted((dataclasses.replace(t, id=perm[t.id - 1]) for t in inst.trucks), key=lambda t: t.id)
    relabeled = Instance(tuple(moved), inst.station, inst.tariff, inst.timeline)
    expect = tuple(tuple(perm[i - 1] for i in seq) for seq in base_order(inst, kind).per_port)
    assert base_order(relabeled, kind).per_port == expect
