"""Inverse-limit towers of finite systems.

A :class:`Tower` is a list of finite systems ``levels[0] <- levels[1] <-
...`` with surjective equivariant bondings; it stands for the Cantor
system obtained as the inverse limit.  Clopen sets and finite clopen
partitions of the limit are represented at some level and compared by
pulling them back to a common deeper level.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from math import gcd
from typing import Sequence

from .findyn import (
    DynamicsError,
    EquivariantMap,
    FiniteSystem,
    ResourceLimitError,
    cycle_decomposition,
    is_equivariant,
    search_maps,
    system_from_dict,
    system_to_dict,
)
from .spiral import SpiralPoint, build_level, recurrent_states, xi_map


class PreconditionError(ValueError):
    """Inputs violate an operation's stated preconditions."""


@dataclass(frozen=True, eq=False)
class Tower:
    levels: tuple[FiniteSystem, ...]
    bondings: tuple[EquivariantMap, ...] = ()
    cantor: bool = False

    def __post_init__(self):
        object.__setattr__(self, "levels", tuple(self.levels))
        object.__setattr__(self, "bondings", tuple(self.bondings))

    @property
    def depth(self) -> int:
        return len(self.levels)

    def level_of(self, sys: FiniteSystem) -> int:
        for i, lvl in enumerate(self.levels):
            if lvl is sys:
                return i
        for i, lvl in enumerate(self.levels):
            if lvl == sys:
                return i
        raise PreconditionError("system is not a level of this tower")

    def composite(self, upper: int, lower: int) -> tuple[int, ...]:
        """Assignment of the composed bonding ``levels[upper] -> levels[lower]``."""
        if not 0 <= lower <= upper < self.depth:
            raise PreconditionError(f"no bonding from level {upper} to level {lower}")
        a = tuple(range(self.levels[upper].size))
        for i in range(upper - 1, lower - 1, -1):
            b = self.bondings[i].assignment
            a = tuple(b[v] for v in a)
        return a

    def to_dict(self) -> dict:
        return {
            "levels": [system_to_dict(s) for s in self.levels],
            "bondings": [list(b.assignment) for b in self.bondings],
        }

    @classmethod
    def from_dict(cls, data: dict, cantor: bool = False) -> "Tower":
        try:
            levels = [_restore_labels(system_from_dict(d)) for d in data["levels"]]
            raw = data.get("bondings", [])
        except (KeyError, TypeError) as exc:
            raise DynamicsError(f"malformed tower JSON: {exc}") from None
        if len(raw) != max(len(levels) - 1, 0):
            raise DynamicsError("a tower needs one bonding per consecutive pair of levels")
        bondings = [EquivariantMap(levels[i + 1], levels[i], tuple(a)) for i, a in enumerate(raw)]
        return cls(tuple(levels), tuple(bondings), cantor)

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_json(cls, text: str) -> "Tower":
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise DynamicsError(f"malformed JSON: {exc}") from None


def _restore_labels(sys: FiniteSystem) -> FiniteSystem:
    """Spiral levels come back from JSON with ``(word|side|index)`` strings."""
    if sys.is_permutation or not sys.labels or not isinstance(sys.labels[0], str):
        return sys
    try:
        return sys.relabel([SpiralPoint.parse(lab) for lab in sys.labels])
    except ValueError:
        return sys


def validate(t: Tower) -> tuple[bool, str | None]:
    """Check every tower invariant; report the first failure."""
    if not t.levels:
        return False, "tower has no levels"
    if len(t.bondings) != len(t.levels) - 1:
        return False, f"expected {len(t.levels) - 1} bondings, got {len(t.bondings)}"
    for i, b in enumerate(t.bondings):
        if b.source != t.levels[i + 1] or b.target != t.levels[i]:
            return False, f"bonding {i} does not map level {i + 1} to level {i}"
        if not b.is_surjective:
            return False, f"bonding {i} (level {i + 1} -> {i}) is not surjective"
        if not is_equivariant(b):
            return False, f"bonding {i} (level {i + 1} -> {i}) is not equivariant"
        lo, hi = t.levels[i].size, t.levels[i + 1].size
        if hi < lo:
            return False, f"level {i + 1} is smaller than level {i}"
        if t.cantor and hi == lo:
            return False, f"level {i + 1} does not properly refine level {i}"
    return True, None


@dataclass(frozen=True)
class ClopenSet:
    level: int
    states: frozenset[int]

    def __post_init__(self):
        object.__setattr__(self, "states", frozenset(self.states))
        if not self.states:
            raise ValueError("clopen sets here are nonempty")


@dataclass(frozen=True)
class LevelPartition:
    level: int
    blocks: tuple[frozenset[int], ...] = field()

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(frozenset(b) for b in self.blocks))
        if any(not b for b in self.blocks):
            raise ValueError("partition blocks must be nonempty")

    @classmethod
    def atoms(cls, t: Tower, level: int) -> "LevelPartition":
        return cls(level, tuple(frozenset([x]) for x in range(t.levels[level].size)))

    @classmethod
    def of_map(cls, level: int, f: EquivariantMap) -> "LevelPartition":
        """The fibre partition of ``f`` on ``level``."""
        return cls(level, tuple(frozenset(b) for b in f.fibers()))


def _check_partition(t: Tower, p: LevelPartition) -> None:
    if not 0 <= p.level < t.depth:
        raise PreconditionError(f"level {p.level} outside the tower")
    n = t.levels[p.level].size
    seen: set[int] = set()
    for b in p.blocks:
        if seen & b or any(not 0 <= x < n for x in b):
            raise PreconditionError("blocks must be disjoint sets of level states")
        seen |= b
    if len(seen) != n:
        raise PreconditionError("blocks must cover the level")


def pull_clopen(t: Tower, u: ClopenSet, level: int) -> ClopenSet:
    proj = t.composite(level, u.level)
    return ClopenSet(level, frozenset(x for x, v in enumerate(proj) if v in u.states))


def canonical_clopen(t: Tower, u: ClopenSet) -> ClopenSet:
    """Represent ``u`` at the least level where it is defined."""
    for i in range(u.level + 1):
        proj = t.composite(u.level, i)
        image = frozenset(proj[x] for x in u.states)
        if frozenset(x for x, v in enumerate(proj) if v in image) == u.states:
            return ClopenSet(i, image)
    return u


def _block_ids(t: Tower, p: LevelPartition, level: int) -> list[int]:
    """Block index of every state of ``level`` for the pull-back of ``p``."""
    ids = [0] * t.levels[p.level].size
    for j, b in enumerate(p.blocks):
        for x in b:
            ids[x] = j
    proj = t.composite(level, p.level)
    return [ids[v] for v in proj]


def pull_partition(t: Tower, p: LevelPartition, level: int) -> LevelPartition:
    ids = _block_ids(t, p, level)
    blocks: dict[int, set[int]] = {}
    for x, j in enumerate(ids):
        blocks.setdefault(j, set()).add(x)
    return LevelPartition(level, tuple(frozenset(blocks[j]) for j in sorted(blocks)))


def refines(p: LevelPartition, q: LevelPartition, t: Tower) -> bool:
    """Every block of ``p`` lies inside a block of ``q`` in the limit."""
    _check_partition(t, p)
    _check_partition(t, q)
    level = max(p.level, q.level)
    pid = _block_ids(t, p, level)
    qid = _block_ids(t, q, level)
    owner: dict[int, int] = {}
    for a, b in zip(pid, qid):
        if owner.setdefault(a, b) != b:
            return False
    return True


def clopen_period(t: Tower, u: ClopenSet) -> int | None:
    """Least ``n >= 1`` with ``sigma^n(U) = U``; None on relation levels."""
    sys = t.levels[u.level]
    if not sys.is_permutation:
        return None
    perm = sys.perm
    current = u.states
    n = 0
    while True:
        current = frozenset(perm[x] for x in current)
        n += 1
        if current == u.states:
            return n


def wandering_clopen_exists(t: Tower, depth: int | None = None) -> ClopenSet | None:
    """A level atom ``V`` with ``V`` disjoint from all its forward images.

    Permutation levels never contribute: every clopen set returns after
    the level's order.  On relation levels an atom qualifies when no
    relation path of length >= 1 leads back to it.
    """
    stop = t.depth if depth is None else min(depth, t.depth)
    for i in range(stop):
        sys = t.levels[i]
        if sys.is_permutation:
            continue
        rec = recurrent_states(sys)
        for x in range(sys.size):
            if not rec[x]:
                return ClopenSet(i, frozenset([x]))
    return None


@dataclass(frozen=True)
class StarWitness:
    """Bases ``a_1..a_d`` and partitions ``P_1..P_d``; ``P_s`` lists its
    ``a_1*...*a_s`` blocks in the order sigma cycles them."""

    bases: tuple[int, ...]
    partitions: tuple[LevelPartition, ...]


def property_star(t: Tower, depth: int) -> StarWitness | None:
    """Bounded search for an odometer-like refining chain of clopen
    partitions.

    Stage ``s`` looks for the shallowest level and then the least
    ``a_s >= 2`` such that ``a_1*...*a_s`` divides every cycle length of
    that level; the new partition is labelled so that it refines the
    previous one.  Minimal choices never block later stages, so absence
    means no chain of that depth is visible in the tower.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if not all(s.is_permutation for s in t.levels):
        raise PreconditionError("property (*) needs permutation levels")
    cds = [cycle_decomposition(s) for s in t.levels]
    gcds = [gcd(*cd.lengths) for cd in cds]
    bases: list[int] = []
    partitions: list[LevelPartition] = []
    modulus = 1
    level = 0
    labels: list[int] = [0] * t.levels[0].size
    for _ in range(depth):
        found = None
        for lv in range(level, t.depth):
            g = gcds[lv]
            if g % modulus == 0 and g // modulus >= 2:
                q = g // modulus
                a = next(d for d in range(2, q + 1) if q % d == 0)
                found = (lv, a)
                break
        if found is None:
            return None
        lv, a = found
        proj = t.composite(lv, level)
        pulled = [labels[v] for v in proj]
        new_mod = modulus * a
        new_labels = [0] * t.levels[lv].size
        for c in cds[lv].cycles:
            start = pulled[c[0]]
            for k, x in enumerate(c):
                new_labels[x] = (start + k) % new_mod
        blocks: list[set[int]] = [set() for _ in range(new_mod)]
        for x, j in enumerate(new_labels):
            blocks[j].add(x)
        bases.append(a)
        partitions.append(LevelPartition(lv, tuple(frozenset(b) for b in blocks)))
        modulus, level, labels = new_mod, lv, new_labels
    return StarWitness(tuple(bases), tuple(partitions))


@dataclass(frozen=True)
class LiftResult:
    status: str  # "found" or "absent"
    psi: EquivariantMap | None = None
    k: int | None = None
    level: int | None = None

    @property
    def found(self) -> bool:
        return self.status == "found"


def _spiral_level_of(sys: FiniteSystem) -> int:
    if sys.is_permutation or not sys.labels or not isinstance(sys.labels[0], SpiralPoint):
        raise PreconditionError("phi must map onto a spiral level W_n")
    n = sys.labels[0].level
    if build_level(n).system != sys:
        raise PreconditionError(f"phi's target is not the spiral level W_{n}")
    return n


def lifting_check(t: Tower, phi: EquivariantMap, a: LevelPartition,
                  max_k: int = 1, max_level: int | None = None) -> LiftResult:
    """Bounded search for a lift of ``phi`` through the collapse map.

    Looks for ``k <= max_k``, a tower level ``L <= max_level`` and a
    surjective equivariant ``psi : levels[L] -> W_{n+k}`` whose fibres
    refine ``a`` and with ``xi . psi = phi . (bonding L -> level of phi)``.
    Order: increasing ``k``, then ``L``, then lexicographic ``psi``.  An
    ``"absent"`` result only covers the searched range.
    """
    j = t.level_of(phi.source)
    n = _spiral_level_of(phi.target)
    if not (phi.is_surjective and is_equivariant(phi)):
        raise PreconditionError("phi must be a surjective equivariant map")
    _check_partition(t, a)
    if not refines(a, LevelPartition.of_map(j, phi), t):
        raise PreconditionError("the partition does not refine the fibres of phi")
    top = t.depth - 1 if max_level is None else min(max_level, t.depth - 1)

    for k in range(1, max_k + 1):
        try:
            target = build_level(n + k).system
            collapse = xi_map(n + k, n).assignment
        except ResourceLimitError:
            break
        preimages: list[list[int]] = [[] for _ in range(phi.target.size)]
        for v, w in enumerate(collapse):
            preimages[w].append(v)
        for lv in range(max(j, 0), top + 1):
            src = t.levels[lv]
            if src.size < target.size:
                continue
            down = t.composite(lv, j)
            wanted = [phi.assignment[v] for v in down]
            allowed = [preimages[w] for w in wanted]
            rivals = _rivals(t, a, lv, wanted)
            if rivals is None:
                continue
            for psi in search_maps(src, target, allowed=allowed, rivals=rivals,
                                   require_surjective=True):
                if _lift_ok(t, psi, lv, a, phi, j, collapse):
                    return LiftResult("found", psi, k, lv)
    return LiftResult("absent")


def _rivals(t: Tower, a: LevelPartition, lv: int,
            wanted: Sequence[int]) -> list[list[int]] | None:
    """States with the same ``phi`` image but different blocks of ``a``
    (pulled to ``lv``); only those could wrongly share a ``psi`` value.

    When ``a`` lives deeper than ``lv`` a state qualifies only if everything
    above it lies in one block of ``a``; otherwise no lift exists at ``lv``
    and None is returned.
    """
    if a.level <= lv:
        ids = _block_ids(t, a, lv)
    else:
        deep = _block_ids(t, a, a.level)
        ids = [-1] * len(wanted)
        for z, v in enumerate(t.composite(a.level, lv)):
            if ids[v] == -1:
                ids[v] = deep[z]
            elif ids[v] != deep[z]:
                return None
    groups: dict[int, list[int]] = {}
    for x, w in enumerate(wanted):
        groups.setdefault(w, []).append(x)
    rivals: list[list[int]] = [[] for _ in wanted]
    for members in groups.values():
        for x in members:
            rivals[x] = [y for y in members if ids[y] != ids[x]]
    return rivals


def _lift_ok(t: Tower, psi: EquivariantMap, lv: int, a: LevelPartition,
             phi: EquivariantMap, j: int, collapse: Sequence[int]) -> bool:
    if not (psi.is_surjective and is_equivariant(psi)):
        return False
    if not refines(LevelPartition.of_map(lv, psi), a, t):
        return False
    down = t.composite(lv, j)
    return all(collapse[psi.assignment[x]] == phi.assignment[down[x]]
               for x in range(psi.source.size))


def spiral_tower(top: int) -> Tower:
    """``W_1 <- W_2 <- ... <- W_top`` bonded by the collapse map."""
    levels = tuple(build_level(n).system for n in range(1, top + 1))
    bondings = tuple(xi_map(n + 1, n) for n in range(1, top))
    return Tower(levels, bondings, cantor=True)

