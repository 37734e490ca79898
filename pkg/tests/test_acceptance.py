"""The ten acceptance criteria, each run at its stated size and time limit.

Every test records its verdict and wall time; conftest prints one
PASS/FAIL line per criterion at the end of the session.
"""

import itertools
import time
from contextlib import contextmanager
from math import factorial

from cantordyn import fraisse, spiral
from cantordyn.findyn import (
    EquivariantMap,
    FiniteSystem,
    cycle_decomposition,
    find_equivariant_maps,
    is_equivariant,
    phi_k_holds,
    product,
)
from cantordyn.fraisse import generic_chain, sweep_amalgamation
from cantordyn.odometer import OdometerSpec, conjugate, odometer_tower, swap_sentence_holds, truncation
from cantordyn.spiral import build_level, verify_xi_morphism, wandering_points
from cantordyn.tower import (
    ClopenSet,
    LevelPartition,
    PreconditionError,
    clopen_period,
    lifting_check,
    property_star,
    refines,
    spiral_tower,
)

from oracles import (
    SPEC_POOL,
    closed_walk_covers,
    cyclic_labellings,
    iterate_order,
    mutual_divisibility,
    star_chain_ok,
)


@contextmanager
def criterion(log, number, limit, title):
    # time every criterion from a cold start, without levels built earlier
    spiral._LEVELS.clear()
    fraisse._maps_onto.cache_clear()
    start = time.perf_counter()
    passed = False
    try:
        yield
        passed = True
    finally:
        secs = time.perf_counter() - start
        log[number] = (passed and secs < limit, secs, limit, title)
    assert secs < limit, f"AC{number} took {secs:.2f}s, limit {limit}s"


def test_ac1_spiral_sizes(acceptance_log):
    with criterion(acceptance_log, 1, 1.0, "|W_n| = 6^n(2n!+2n-1) for n = 1, 2, 3"):
        for n, expected in ((1, 18), (2, 252), (3, 3672)):
            assert build_level(n).system.size == expected == 6 ** n * (2 * factorial(n) + 2 * n - 1)


def test_ac2_xi_morphism(acceptance_log):
    with criterion(acceptance_log, 2, 5.0, "collapse map preserves the relation for n = 1, 2"):
        assert verify_xi_morphism(1)
        assert verify_xi_morphism(2)


def test_ac3_wandering_dichotomy(acceptance_log):
    with criterion(acceptance_log, 3, 10.0, "W_2 wanders on its 108 middle points; chain atoms are periodic"):
        w2 = build_level(2)
        found = wandering_points(w2)
        assert len(found) == 108
        assert set(found) == {p for p in w2.points if p.side == "m"}
        chain = generic_chain((2, 3), 5)
        assert chain.depth == 5
        for k, sys in enumerate(chain.levels):
            order = cycle_decomposition(sys).order
            assert order == iterate_order(sys.perm)
            for x in range(sys.size):
                period = clopen_period(chain, ClopenSet(k, {x}))
                assert period is not None and order % period == 0


def test_ac4_odometer_separation(acceptance_log):
    with criterion(acceptance_log, 4, 1.0, "swap sentence holds for :2, fails for :3; truncations agree"):
        two, three = OdometerSpec.parse(":2"), OdometerSpec.parse(":3")
        assert swap_sentence_holds(two) is True
        assert swap_sentence_holds(three) is False
        c2 = truncation(two, 1)
        assert phi_k_holds(c2, 2) is not None
        assert cyclic_labellings(c2.perm, 2)
        for n, size in ((1, 3), (2, 9), (3, 27)):
            sys = truncation(three, n)
            assert sys.size == size
            assert phi_k_holds(sys, 2) is None
            assert cyclic_labellings(sys.perm, 2) == []


def test_ac5_conjugacy_invariant(acceptance_log):
    with criterion(acceptance_log, 5, 1.0, "conjugacy matches partial-product divisibility to depth 12"):
        pool = [OdometerSpec.parse(s) for s in SPEC_POOL]
        assert len(pool) >= 10
        verdicts = set()
        for a, b in itertools.product(pool, repeat=2):
            direct = mutual_divisibility(a.bases(64), b.bases(64), 12, 64)
            assert conjugate(a, b) == direct, (str(a), str(b))
            verdicts.add(direct)
        assert verdicts == {True, False}


def test_ac6_amalgamation_soundness(acceptance_log):
    with criterion(acceptance_log, 6, 300.0, "amalgamate verifies on all problems |W| <= 3, |X|,|Y| <= 6"):
        checked, failures = sweep_amalgamation(3, 6)
        assert failures == []
        assert checked > 1_000_000


def test_ac7_jep_soundness(acceptance_log):
    with criterion(acceptance_log, 7, 30.0, "product projections onto and equivariant, all systems <= 5 states"):
        systems = [FiniteSystem.from_permutation(p)
                   for n in range(1, 6) for p in itertools.permutations(range(n))]
        assert len(systems) == 153
        for x in systems:
            for y in systems:
                _, px, py = product(x, y)
                assert px.is_surjective and py.is_surjective
                assert is_equivariant(px) and is_equivariant(py)


def test_ac8_odometers_do_not_factor_onto_spirals(acceptance_log):
    with criterion(acceptance_log, 8, 30.0, "no surjection from C_8, C_9, C_12 onto W_1"):
        w1 = build_level(1).system
        for text, n, size in ((":2", 3, 8), (":3", 2, 9), (":2,3", 3, 12)):
            c = truncation(OdometerSpec.parse(text), n)
            assert c.size == size
            assert find_equivariant_maps(c, w1, require_surjective=True) == []
            assert not closed_walk_covers(w1.succ, size, w1.size)


def test_ac9_property_star(acceptance_log):
    with criterion(acceptance_log, 9, 30.0, "property (*) on the :2 and :2,3 towers within depth 3"):
        for text in (":2", ":2,3"):
            spec = OdometerSpec.parse(text)
            t = odometer_tower(spec, 3)
            w = property_star(t, 3)
            assert w is not None and len(w.bases) == 3
            assert star_chain_ok(t, w.bases, w.partitions)
            prod = 1
            for a, p in zip(w.bases, w.partitions):
                prod *= a
                assert spec.partial_product(p.level + 1) % prod == 0


def test_ac10_lifting_contract(acceptance_log):
    with criterion(acceptance_log, 10, 30.0, "lifting finds a re-verified lift; bad inputs are rejected"):
        t = spiral_tower(2)
        w1 = t.levels[0]
        phi = EquivariantMap.identity(w1)
        a = LevelPartition.of_map(0, phi)
        r = lifting_check(t, phi, a, max_k=1)
        assert r.found
        psi = r.psi
        assert psi.is_surjective and is_equivariant(psi)
        assert refines(LevelPartition.of_map(r.level, psi), a, t)
        down = t.composite(r.level, 0)
        collapse = t.bondings[0].assignment
        assert all(collapse[psi(x)] == phi(down[x]) for x in range(psi.source.size))

        rejected = 0
        for bad_a, bad_phi in ((LevelPartition(0, [set(range(w1.size))]), phi),
                               (LevelPartition.atoms(t, 0), EquivariantMap(w1, w1, (0,) * w1.size))):
            try:
                lifting_check(t, bad_phi, bad_a, max_k=1)
            except PreconditionError:
                rejected += 1
        assert rejected == 2
