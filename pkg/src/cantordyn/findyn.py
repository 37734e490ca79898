"""Finite dynamical systems, equivariant maps and morphism search.

A :class:`FiniteSystem` is a finite state set ``0..n-1`` together with
dynamics, either a permutation (kind ``"perm"``) or a successor relation
in which every state has at least one successor (kind ``"rel"``).  Labels
are carried for display only and never affect semantics.

An :class:`EquivariantMap` ``f: X -> Y`` is equivariant when every
dynamics pair ``x -> y`` of ``X`` is sent to a dynamics pair
``f(x) -> f(y)`` of ``Y``.  For permutations on both sides this is the
usual ``f . sigma = tau . f``.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from functools import reduce
from math import gcd
from typing import Any, Callable, Hashable, Iterable, Iterator, Sequence

PERM = "perm"
REL = "rel"


class DynamicsError(ValueError):
    """Raised when an operation receives a system of the wrong kind or
    malformed dynamics."""


def lcm(*values: int) -> int:
    return reduce(lambda a, b: a * b // gcd(a, b), values, 1)


@dataclass(frozen=True, eq=False)
class FiniteSystem:
    kind: str
    succ: tuple[tuple[int, ...], ...]
    labels: tuple[Hashable, ...]
    pred: tuple[tuple[int, ...], ...] = field(init=False, repr=False)
    _where: dict = field(init=False, repr=False)

    def __post_init__(self):
        n = len(self.succ)
        if len(self.labels) != n:
            raise DynamicsError("one label per state required")
        object.__setattr__(self, "_where", {lab: x for x, lab in enumerate(self.labels)})
        if len(self._where) != n:
            raise DynamicsError("state labels must be unique")
        if self.kind not in (PERM, REL):
            raise DynamicsError(f"unknown dynamics kind {self.kind!r}")
        preds: list[list[int]] = [[] for _ in range(n)]
        for x, ys in enumerate(self.succ):
            if not ys:
                raise DynamicsError(f"state {x} has no successor")
            if len(set(ys)) != len(ys):
                raise DynamicsError(f"state {x} has a repeated successor")
            for y in ys:
                if not 0 <= y < n:
                    raise DynamicsError(f"successor {y} of state {x} out of range")
                preds[y].append(x)
        if self.kind == PERM:
            if any(len(ys) != 1 for ys in self.succ) or any(len(p) != 1 for p in preds):
                raise DynamicsError("permutation dynamics must be a bijection")
        object.__setattr__(self, "pred", tuple(tuple(sorted(p)) for p in preds))

    # construction

    @classmethod
    def from_permutation(cls, images: Sequence[int], labels: Sequence[Hashable] | None = None):
        labels = tuple(range(len(images))) if labels is None else tuple(labels)
        return cls(PERM, tuple((int(y),) for y in images), labels)

    @classmethod
    def from_relation(cls, size: int, pairs: Iterable[tuple[int, int]],
                      labels: Sequence[Hashable] | None = None):
        succ: list[set[int]] = [set() for _ in range(size)]
        for x, y in pairs:
            if not (0 <= x < size and 0 <= y < size):
                raise DynamicsError(f"pair {(x, y)} out of range")
            succ[x].add(y)
        labels = tuple(range(size)) if labels is None else tuple(labels)
        return cls(REL, tuple(tuple(sorted(s)) for s in succ), labels)

    @classmethod
    def cycle(cls, n: int) -> "FiniteSystem":
        """The cyclic system ``C_n``: ``x -> x+1 mod n``."""
        if n < 1:
            raise DynamicsError("cycle length must be positive")
        return cls.from_permutation([(x + 1) % n for x in range(n)])

    @classmethod
    def from_cycle_type(cls, lengths: Sequence[int]) -> "FiniteSystem":
        """Disjoint union of cycles with consecutive state blocks."""
        images = []
        start = 0
        for length in lengths:
            images.extend(start + (t + 1) % length for t in range(length))
            start += length
        return cls.from_permutation(images)

    # accessors

    @property
    def size(self) -> int:
        return len(self.succ)

    @property
    def is_permutation(self) -> bool:
        return self.kind == PERM

    @property
    def perm(self) -> tuple[int, ...]:
        if self.kind != PERM:
            raise DynamicsError("relation system has no permutation")
        return tuple(ys[0] for ys in self.succ)

    def pairs(self) -> list[tuple[int, int]]:
        return [(x, y) for x, ys in enumerate(self.succ) for y in ys]

    def has_pair(self, x: int, y: int) -> bool:
        return y in self.succ[x]

    def index(self, label: Hashable) -> int:
        return self._where[label]

    def power(self, k: int) -> tuple[int, ...]:
        """Images of every state under ``sigma**k``."""
        perm = self.perm
        out = list(range(self.size))
        for _ in range(k):
            out = [perm[x] for x in out]
        return tuple(out)

    def order(self) -> int:
        return cycle_decomposition(self).order

    def relabel(self, labels: Sequence[Hashable]) -> "FiniteSystem":
        return FiniteSystem(self.kind, self.succ, tuple(labels))

    def __eq__(self, other):
        if not isinstance(other, FiniteSystem):
            return NotImplemented
        return (self.kind, self.succ, self.labels) == (other.kind, other.succ, other.labels)

    def __hash__(self):
        return hash((self.kind, self.succ, self.labels))

    def __repr__(self):
        return f"FiniteSystem(kind={self.kind!r}, size={self.size})"


@dataclass(frozen=True)
class CycleDecomposition:
    cycles: tuple[tuple[int, ...], ...]

    @property
    def lengths(self) -> tuple[int, ...]:
        return tuple(len(c) for c in self.cycles)

    @property
    def order(self) -> int:
        return lcm(*self.lengths)

    def cycle_of(self) -> dict[int, tuple[int, int]]:
        """Map each state to ``(cycle index, position in cycle)``."""
        return {x: (i, t) for i, c in enumerate(self.cycles) for t, x in enumerate(c)}


def cycle_decomposition(sys: FiniteSystem) -> CycleDecomposition:
    """Cycles of a permutation system, each starting at its least state,
    listed by least state."""
    perm = sys.perm
    seen = [False] * sys.size
    cycles = []
    for x in range(sys.size):
        if seen[x]:
            continue
        c = []
        y = x
        while not seen[y]:
            seen[y] = True
            c.append(y)
            y = perm[y]
        cycles.append(tuple(c))
    return CycleDecomposition(tuple(cycles))


@dataclass(frozen=True)
class EquivariantMap:
    source: FiniteSystem
    target: FiniteSystem
    assignment: tuple[int, ...]

    def __post_init__(self):
        a = tuple(int(v) for v in self.assignment)
        if len(a) != self.source.size:
            raise DynamicsError("assignment must be total on the source")
        if any(not 0 <= v < self.target.size for v in a):
            raise DynamicsError("assignment value outside the target")
        object.__setattr__(self, "assignment", a)

    def __call__(self, x: int) -> int:
        return self.assignment[x]

    @property
    def is_surjective(self) -> bool:
        return len(set(self.assignment)) == self.target.size

    def fibers(self) -> list[list[int]]:
        """The partition of the source into nonempty point preimages, in
        target order."""
        blocks: list[list[int]] = [[] for _ in range(self.target.size)]
        for x, v in enumerate(self.assignment):
            blocks[v].append(x)
        return [b for b in blocks if b]

    def then(self, other: "EquivariantMap") -> "EquivariantMap":
        """``other . self``."""
        if other.source is not self.target and other.source != self.target:
            raise DynamicsError("maps are not composable")
        return EquivariantMap(self.source, other.target,
                              tuple(other.assignment[v] for v in self.assignment))

    @classmethod
    def identity(cls, sys: FiniteSystem) -> "EquivariantMap":
        return cls(sys, sys, tuple(range(sys.size)))


def is_equivariant(f: EquivariantMap) -> bool:
    target = f.target
    a = f.assignment
    return all(target.has_pair(a[x], a[y]) for x, ys in enumerate(f.source.succ) for y in ys)


def product(x: FiniteSystem, y: FiniteSystem):
    """Coordinatewise product ``Z = X x Y`` with its two projections.

    State ``(j, k)`` has index ``j * |Y| + k``.
    """
    if not (x.is_permutation and y.is_permutation):
        raise DynamicsError("product needs permutation systems")
    sx, sy = x.perm, y.perm
    ny = y.size
    images = [sx[j] * ny + sy[k] for j in range(x.size) for k in range(ny)]
    labels = [(lj, lk) for lj in x.labels for lk in y.labels]
    z = FiniteSystem.from_permutation(images, labels)
    px = EquivariantMap(z, x, tuple(j for j in range(x.size) for _ in range(ny)))
    py = EquivariantMap(z, y, tuple(k for _ in range(x.size) for k in range(ny)))
    return z, px, py


# Morphism search. Domains are int bitmasks over target states; arc
# consistency is maintained along every source dynamics pair.

def _bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


class ResourceLimitError(RuntimeError):
    """A construction would exceed its configured size cap."""


class _Search:
    def __init__(self, source: FiniteSystem, target: FiniteSystem,
                 rivals: Sequence[Sequence[int]] | None = None):
        self.source = source
        self.rivals = rivals
        self.target = target
        self.full = (1 << target.size) - 1
        self.succ_mask = [sum(1 << v for v in ys) for ys in target.succ]
        self.pred_mask = [sum(1 << v for v in ps) for ps in target.pred]
        self._img_cache: dict[tuple[int, int], int] = {}

    def image(self, mask: int, forward: bool) -> int:
        key = (mask, forward)
        hit = self._img_cache.get(key)
        if hit is None:
            table = self.succ_mask if forward else self.pred_mask
            hit = 0
            for v in _bits(mask):
                hit |= table[v]
            self._img_cache[key] = hit
        return hit

    def propagate(self, dom: list[int], queue: list[int]) -> bool:
        src = self.source
        pending = set(queue)
        while queue:
            x = queue.pop()
            pending.discard(x)
            dx = dom[x]
            if self.rivals is not None and not dx & (dx - 1):
                for y in self.rivals[x]:
                    if dom[y] & dx:
                        new = dom[y] & ~dx
                        if not new:
                            return False
                        dom[y] = new
                        if y not in pending:
                            pending.add(y)
                            queue.append(y)
            for neighbours, forward in ((src.succ[x], True), (src.pred[x], False)):
                allowed = self.image(dx, forward)
                for y in neighbours:
                    new = dom[y] & allowed
                    if new != dom[y]:
                        if not new:
                            return False
                        dom[y] = new
                        if y not in pending:
                            pending.add(y)
                            queue.append(y)
        return True

    def run(self, domains: list[int], require_surjective: bool) -> Iterator[tuple[int, ...]]:
        n = self.source.size
        if require_surjective and n < self.target.size:
            return
        dom = list(domains)
        if any(d == 0 for d in dom):
            return
        if not self.propagate(dom, list(range(n))):
            return
        stack: list[tuple[list[int], int, Iterator[int]]] = []
        node: list[int] | None = dom
        while True:
            if node is not None:
                ok = True
                if require_surjective:
                    covered = 0
                    for d in node:
                        covered |= d
                    ok = covered == self.full
                if ok:
                    var = next((x for x in range(n) if node[x] & (node[x] - 1)), None)
                    if var is None:
                        yield tuple(d.bit_length() - 1 for d in node)
                    else:
                        stack.append((node, var, _bits(node[var])))
                node = None
            if not stack:
                return
            parent, var, values = stack[-1]
            v = next(values, None)
            if v is None:
                stack.pop()
                continue
            child = list(parent)
            child[var] = 1 << v
            if self.propagate(child, [var]):
                node = child


def search_maps(source: FiniteSystem, target: FiniteSystem, *,
                allowed: Sequence[Iterable[int] | None] | None = None,
                rivals: Sequence[Sequence[int]] | None = None,
                require_surjective: bool = False) -> Iterator[EquivariantMap]:
    """Lazily enumerate equivariant maps in lexicographic order of
    assignment tuples.

    ``allowed[x]``, when given and not None, restricts the candidate images
    of source state ``x``.  ``rivals[x]`` lists states that must not share
    an image with ``x`` (the relation must be symmetric).
    """
    s = _Search(source, target, rivals)
    domains = [s.full] * source.size
    if allowed is not None:
        for x, vals in enumerate(allowed):
            if vals is not None:
                domains[x] = sum(1 << v for v in set(vals)) & s.full
    for a in s.run(domains, require_surjective):
        yield EquivariantMap(source, target, a)


def find_equivariant_maps(source: FiniteSystem, target: FiniteSystem,
                          require_surjective: bool = False,
                          max_results: int | None = None) -> list[EquivariantMap]:
    """Up to ``max_results`` equivariant maps, lexicographically ordered.

    When fewer than ``max_results`` maps come back the search was
    exhaustive.
    """
    it = search_maps(source, target, require_surjective=require_surjective)
    return list(itertools.islice(it, max_results))


def phi_k_holds(sys: FiniteSystem, k: int) -> list[list[int]] | None:
    """A partition into ``k`` nonempty blocks ``B_0..B_{k-1}`` with
    ``sigma(B_j) = B_{j+1 mod k}``, or None if there is none.

    Such a partition exists iff ``k`` divides every cycle length; block
    ``j`` collects the states at positions ``t = j (mod k)`` of each cycle.
    """
    if k < 1:
        raise ValueError("k must be positive")
    cd = cycle_decomposition(sys)
    if any(length % k for length in cd.lengths):
        return None
    blocks: list[list[int]] = [[] for _ in range(k)]
    for c in cd.cycles:
        for t, x in enumerate(c):
            blocks[t % k].append(x)
    return [sorted(b) for b in blocks]


def is_cyclic_partition(sys: FiniteSystem, blocks: Sequence[Iterable[int]]) -> bool:
    """True iff ``blocks`` partition the states and sigma carries block j
    onto block j+1 (cyclically)."""
    sets = [frozenset(b) for b in blocks]
    if any(not b for b in sets) or sum(map(len, sets)) != sys.size:
        return False
    if frozenset().union(*sets) != frozenset(range(sys.size)):
        return False
    perm = sys.perm
    k = len(sets)
    return all(frozenset(perm[x] for x in sets[j]) == sets[(j + 1) % k] for j in range(k))


# Serialisation

def _label_to_json(label: Any) -> Any:
    if isinstance(label, (str, int, bool)) or label is None:
        return label
    if isinstance(label, tuple):
        return [_label_to_json(v) for v in label]
    return str(label)


def _label_from_json(value: Any) -> Hashable:
    if isinstance(value, list):
        return tuple(_label_from_json(v) for v in value)
    return value


def system_to_dict(sys: FiniteSystem) -> dict:
    return {
        "states": [_label_to_json(lab) for lab in sys.labels],
        "kind": sys.kind,
        "dynamics": [[x, y] for x, y in sys.pairs()],
    }


def system_from_dict(data: dict) -> FiniteSystem:
    try:
        labels = [_label_from_json(v) for v in data["states"]]
        kind = data["kind"]
        pairs = [(int(x), int(y)) for x, y in data["dynamics"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise DynamicsError(f"malformed system JSON: {exc}") from None
    n = len(labels)
    if kind == PERM:
        images = [None] * n
        for x, y in pairs:
            if not (0 <= x < n and 0 <= y < n):
                raise DynamicsError(f"pair {(x, y)} out of range")
            if images[x] is not None:
                raise DynamicsError(f"state {x} has two images")
            images[x] = y
        if any(v is None for v in images):
            raise DynamicsError("permutation JSON must give one pair per state")
        return FiniteSystem.from_permutation(images, labels)
    if kind == REL:
        return FiniteSystem.from_relation(n, pairs, labels)
    raise DynamicsError(f"unknown dynamics kind {kind!r}")


def system_to_json(sys: FiniteSystem, **kw) -> str:
    return json.dumps(system_to_dict(sys), **kw)


def system_from_json(text: str) -> FiniteSystem:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DynamicsError(f"malformed JSON: {exc}") from None
    return system_from_dict(data)


def _dot_quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def to_dot(sys: FiniteSystem, name: str = "system",
           node_attrs: Callable[[int], dict[str, str]] | None = None) -> str:
    lines = [f"digraph {_dot_quote(name)} {{"]
    for x, lab in enumerate(sys.labels):
        text = ",".join(map(str, lab)) if isinstance(lab, tuple) else str(lab)
        attrs = {"label": text}
        if node_attrs is not None:
            attrs.update(node_attrs(x))
        body = ", ".join(f"{k}={_dot_quote(v)}" for k, v in attrs.items())
        lines.append(f"  n{x} [{body}];")
    for x, y in sys.pairs():
        lines.append(f"  n{x} -> n{y};")
    lines.append("}")
    return "\n".join(lines) + "\n"
