import json

import pytest
from hypothesis import given, settings, strategies as st

from cantordyn.findyn import (
    DynamicsError,
    EquivariantMap,
    FiniteSystem,
    cycle_decomposition,
    find_equivariant_maps,
    is_cyclic_partition,
    is_equivariant,
    phi_k_holds,
    product,
    system_from_json,
    system_to_json,
    to_dot,
)
from cantordyn.fraisse import cycle_types
from cantordyn.spiral import build_level, build_spiral, point_index, xi_step
from cantordyn.odometer import OdometerSpec, truncation

from oracles import all_maps, cyclic_partitions_exist, iterate_order, orbit

permutations = st.integers(1, 8).flatmap(lambda n: st.permutations(range(n)))


def test_identity_cycle_decomposition():
    cd = cycle_decomposition(FiniteSystem.from_permutation([0, 1, 2]))
    assert cd.cycles == ((0,), (1,), (2,))
    assert cd.order == 1


def test_single_six_cycle():
    cd = cycle_decomposition(FiniteSystem.cycle(6))
    assert cd.cycles == ((0, 1, 2, 3, 4, 5),)


def test_two_three_order():
    # (0 1)(2 3 4)
    sys = FiniteSystem.from_permutation([1, 0, 3, 4, 2])
    cd = cycle_decomposition(sys)
    assert cd.lengths == (2, 3)
    assert cd.order == 6
    assert iterate_order(sys.perm) == 6
    assert all(sys.power(k) != tuple(range(5)) for k in range(1, 6))


def test_cycle_decomposition_rejects_relations():
    with pytest.raises(DynamicsError):
        cycle_decomposition(build_spiral(1))


@given(permutations)
def test_cycles_follow_the_permutation(perm):
    sys = FiniteSystem.from_permutation(perm)
    cd = cycle_decomposition(sys)
    assert sorted(x for c in cd.cycles for x in c) == list(range(len(perm)))
    for c in cd.cycles:
        assert c[0] == min(c)
        assert all(perm[c[t]] == c[(t + 1) % len(c)] for t in range(len(c)))
    assert [c[0] for c in cd.cycles] == sorted(c[0] for c in cd.cycles)


def test_order_exhaustive_up_to_eight_states():
    for lengths in cycle_types(8):
        sys = FiniteSystem.from_cycle_type(lengths)
        order = cycle_decomposition(sys).order
        assert order == iterate_order(sys.perm)
        assert sys.power(order) == tuple(range(sys.size))


def test_invalid_systems_rejected():
    with pytest.raises(DynamicsError):
        FiniteSystem.from_permutation([0, 0])
    with pytest.raises(DynamicsError):
        FiniteSystem.from_relation(2, [(0, 1)])  # state 1 has no successor
    with pytest.raises(DynamicsError):
        FiniteSystem.from_permutation([1, 0], labels=["a", "a"])


def test_is_equivariant_examples():
    w1 = build_level(1).system
    assert is_equivariant(EquivariantMap.identity(w1))
    assert is_equivariant(EquivariantMap(FiniteSystem.cycle(2), FiniteSystem.cycle(1), (0, 0)))
    w2 = build_level(2)
    xi_m = EquivariantMap(w2.system, w1, tuple(point_index(xi_step(p)) for p in w2.points))
    assert is_equivariant(xi_m)
    bad = EquivariantMap(FiniteSystem.cycle(2), FiniteSystem.cycle(2), (0, 0))
    assert not is_equivariant(bad)


def test_product_c2_c3_is_one_cycle():
    z, px, py = product(FiniteSystem.cycle(2), FiniteSystem.cycle(3))
    assert z.size == 6
    assert len(orbit(z.perm, 0)) == 6


def test_product_c2_c2_two_cycles():
    z, _, _ = product(FiniteSystem.cycle(2), FiniteSystem.cycle(2))
    assert sorted(len(orbit(z.perm, x)) for x in (0, 1)) == [2, 2]
    assert cycle_decomposition(z).lengths == (2, 2)


def test_product_with_trivial_factor():
    y = FiniteSystem.from_cycle_type([3, 1, 2])
    z, _, py = product(FiniteSystem.cycle(1), y)
    assert z.perm == y.perm
    assert py.assignment == tuple(range(y.size))


def test_product_projections_exhaustive_up_to_five():
    types = cycle_types(5)
    for a in types:
        for b in types:
            _, px, py = product(FiniteSystem.from_cycle_type(a), FiniteSystem.from_cycle_type(b))
            for p in (px, py):
                assert p.is_surjective and is_equivariant(p)


def test_no_surjection_from_c8_onto_w1():
    c8 = truncation(OdometerSpec.parse(":2"), 3)
    assert find_equivariant_maps(c8, build_level(1).system, require_surjective=True) == []


def test_identity_always_found():
    for sys in (FiniteSystem.from_cycle_type([2, 3]), build_spiral(2)):
        maps = find_equivariant_maps(sys, sys, require_surjective=True)
        assert EquivariantMap.identity(sys) in maps


def test_c6_onto_c3_three_rotations():
    c6, c3 = FiniteSystem.cycle(6), FiniteSystem.cycle(3)
    found = [m.assignment for m in find_equivariant_maps(c6, c3, require_surjective=True)]
    brute = all_maps(c6.pairs(), 6, c3.pairs(), 3, surjective=True)
    assert found == brute
    assert found == [(0, 1, 2, 0, 1, 2), (1, 2, 0, 1, 2, 0), (2, 0, 1, 2, 0, 1)]


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 5).flatmap(lambda n: st.permutations(range(n))),
       st.integers(1, 3).flatmap(lambda n: st.permutations(range(n))),
       st.booleans())
def test_search_matches_brute_force(src, tgt, surj):
    x, y = FiniteSystem.from_permutation(src), FiniteSystem.from_permutation(tgt)
    found = [m.assignment for m in find_equivariant_maps(x, y, require_surjective=surj)]
    assert found == all_maps(x.pairs(), x.size, y.pairs(), y.size, surjective=surj)


def test_search_relation_targets_match_brute_force():
    s1 = build_spiral(1)
    for lengths in ([1], [2], [1, 1], [3], [2, 1]):
        x = FiniteSystem.from_cycle_type(lengths)
        found = [m.assignment for m in find_equivariant_maps(x, s1)]
        assert found == all_maps(x.pairs(), x.size, s1.pairs(), s1.size)


def test_max_results_truncates_in_order():
    c4, c2 = FiniteSystem.cycle(4), FiniteSystem.cycle(2)
    every = find_equivariant_maps(c4, c2)
    assert find_equivariant_maps(c4, c2, max_results=1) == every[:1]


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 5).flatmap(lambda n: st.permutations(range(n))),
       st.integers(1, 3).flatmap(lambda n: st.permutations(range(n))))
def test_surjective_maps_are_among_all_maps(src, tgt):
    x, y = FiniteSystem.from_permutation(src), FiniteSystem.from_permutation(tgt)
    every = set(m.assignment for m in find_equivariant_maps(x, y))
    onto = [m.assignment for m in find_equivariant_maps(x, y, require_surjective=True)]
    assert set(onto) <= every


def test_phi_k_examples():
    c8 = FiniteSystem.cycle(8)
    w = phi_k_holds(c8, 2)
    assert w == [[0, 2, 4, 6], [1, 3, 5, 7]]
    assert phi_k_holds(FiniteSystem.cycle(9), 2) is None
    sys = FiniteSystem.from_permutation([1, 0, 3, 4, 2])
    assert phi_k_holds(sys, 2) is None
    assert not cyclic_partitions_exist(sys.perm, 2)


def test_phi_k_agrees_with_brute_force():
    for lengths in cycle_types(8):
        sys = FiniteSystem.from_cycle_type(lengths)
        for k in range(1, 5):
            w = phi_k_holds(sys, k)
            assert (w is not None) == cyclic_partitions_exist(sys.perm, k), (lengths, k)
            assert (w is not None) == all(n % k == 0 for n in lengths)
            if w is not None:
                assert is_cyclic_partition(sys, w)


def test_json_round_trip():
    for sys in (FiniteSystem.from_cycle_type([2, 3]), build_spiral(2), build_level(1).system,
                truncation(OdometerSpec.parse(":2,3"), 2)):
        text = system_to_json(sys)
        again = system_from_json(text)
        assert system_to_json(again) == text
        assert again.succ == sys.succ and again.kind == sys.kind
    tuple_labels = truncation(OdometerSpec.parse(":2"), 2)
    assert system_from_json(system_to_json(tuple_labels)) == tuple_labels


def test_json_format():
    data = json.loads(system_to_json(FiniteSystem.cycle(2)))
    assert data == {"states": [0, 1], "kind": "perm", "dynamics": [[0, 1], [1, 0]]}


@pytest.mark.parametrize("text", [
    "{",
    '{"states": [0], "kind": "perm", "dynamics": []}',
    '{"states": [0, 1], "kind": "perm", "dynamics": [[0, 1], [0, 0]]}',
    '{"states": [0], "kind": "weird", "dynamics": [[0, 0]]}',
])
def test_json_rejects_malformed(text):
    with pytest.raises(DynamicsError):
        system_from_json(text)


def test_dot_has_node_and_edge_per_pair():
    sys = build_spiral(2)
    dot = to_dot(sys, "S2")
    assert dot.startswith('digraph "S2" {')
    assert dot.count(" -> ") == len(sys.pairs())
    assert dot.count("[label=") == sys.size
