"""Joint embedding, amalgamation and chain building for finite
permutation systems.

Everything is phrased on the dual side: an embedding of finite algebras
with automorphism is a surjective equivariant map between finite
permutation systems pointing the other way.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

from sympy.utilities.iterables import partitions

from .findyn import (
    DynamicsError,
    EquivariantMap,
    FiniteSystem,
    ResourceLimitError,
    cycle_decomposition,
    is_equivariant,
    lcm,
    product,
    search_maps,
    system_from_dict,
    system_to_dict,
)
from .spiral import build_level, wandering_points
from .tower import ClopenSet, PreconditionError, Tower, clopen_period, validate


@dataclass(frozen=True)
class AmalgamProblem:
    """Surjections ``f: X -> W`` and ``g: Y -> W``."""

    f: EquivariantMap
    g: EquivariantMap

    @property
    def base(self) -> FiniteSystem:
        return self.f.target

    @property
    def left(self) -> FiniteSystem:
        return self.f.source

    @property
    def right(self) -> FiniteSystem:
        return self.g.source

    def check(self) -> None:
        if self.f.target != self.g.target:
            raise PreconditionError("f and g must share the base system")
        for name, sys in (("base", self.base), ("left", self.left), ("right", self.right)):
            if not sys.is_permutation:
                raise PreconditionError(f"{name} system is not a permutation system")
        for name, m in (("f", self.f), ("g", self.g)):
            if not m.is_surjective:
                raise PreconditionError(f"{name} is not surjective")
            if not is_equivariant(m):
                raise PreconditionError(f"{name} is not equivariant")


@dataclass(frozen=True)
class AmalgamSolution:
    apex: FiniteSystem
    h: EquivariantMap
    i: EquivariantMap
    # (n, m) per base cycle, in base-cycle order
    shape: tuple[tuple[int, int], ...] = field(default=(), compare=False)


def jep(x: FiniteSystem, y: FiniteSystem):
    """Joint embedding by the product; returns ``(Z, Z->X, Z->Y)``."""
    z, px, py = product(x, y)
    for p in (px, py):
        if not (p.is_surjective and is_equivariant(p)):
            raise AssertionError("product projection failed its certificate")
    return z, px, py


def _cycles_over(f: EquivariantMap) -> dict[int, list[tuple[int, ...]]]:
    """Cycles of ``f.source`` grouped by the base cycle containing their
    image, keyed by that base cycle's index."""
    base_cd = cycle_decomposition(f.target)
    where = base_cd.cycle_of()
    grouped: dict[int, list[tuple[int, ...]]] = {}
    for c in cycle_decomposition(f.source).cycles:
        grouped.setdefault(where[f.assignment[c[0]]][0], []).append(c)
    return grouped


def amalgamate(p: AmalgamProblem) -> AmalgamSolution:
    """Build ``Z`` with ``h: Z -> X`` and ``i: Z -> Y`` so that
    ``f . h = g . i``.

    For every base cycle: take the cycles of ``X`` and ``Y`` above it,
    let ``n`` be the larger of the two cycle counts and ``m`` the lcm of
    all their lengths, and lay down ``n`` cycles of length ``m``.  Cycle
    ``j`` wraps around the ``(j mod count)``-th cycle of each side; its
    ``Y``-start is the least point of that cycle lying over ``f(h(z_0))``.
    """
    p.check()
    f, g = p.f, p.g
    tau, pi = p.left.perm, p.right.perm
    left = _cycles_over(f)
    right = _cycles_over(g)
    base_cycles = cycle_decomposition(p.base).cycles

    images: list[int] = []
    labels: list[tuple[int, int, int]] = []
    h: list[int] = []
    i: list[int] = []
    shape = []
    for b in range(len(base_cycles)):
        xs, ys = left.get(b, []), right.get(b, [])
        if not xs or not ys:
            raise PreconditionError(f"base cycle {b} is not covered by both maps")
        n = max(len(xs), len(ys))
        m = lcm(*(len(c) for c in xs + ys))
        shape.append((n, m))
        for j in range(n):
            x0 = xs[j % len(xs)][0]
            yc = ys[j % len(ys)]
            w = f.assignment[x0]
            y0 = min(y for y in yc if g.assignment[y] == w)
            start = len(images)
            x, y = x0, y0
            for t in range(m):
                images.append(start + (t + 1) % m)
                labels.append((b, j, t))
                h.append(x)
                i.append(y)
                x, y = tau[x], pi[y]
    apex = FiniteSystem.from_permutation(images, labels)
    return AmalgamSolution(apex, EquivariantMap(apex, p.left, tuple(h)),
                           EquivariantMap(apex, p.right, tuple(i)), tuple(shape))


def verify_amalgam(p: AmalgamProblem, s: AmalgamSolution) -> bool:
    """Equivariance and surjectivity of ``h`` and ``i``, and
    ``f . h = g . i``, all checked pointwise."""
    if s.h.source != s.apex or s.i.source != s.apex:
        return False
    if s.h.target != p.left or s.i.target != p.right:
        return False
    for m in (s.h, s.i):
        if not (m.is_surjective and is_equivariant(m)):
            return False
    fa, ga = p.f.assignment, p.g.assignment
    return all(fa[a] == ga[b] for a, b in zip(s.h.assignment, s.i.assignment))


def cycle_types(max_size: int):
    """Permutation systems of every size ``1..max_size`` up to conjugacy,
    as cycle-length tuples in decreasing order."""
    out = []
    for size in range(1, max_size + 1):
        for part in partitions(size):
            lengths = sorted((k for k, mult in part.items() for _ in range(mult)), reverse=True)
            out.append(tuple(lengths))
    return out


@lru_cache(maxsize=None)
def _maps_onto(base_type: tuple[int, ...], max_side: int) -> tuple[EquivariantMap, ...]:
    base = FiniteSystem.from_cycle_type(base_type)
    out = []
    for lengths in cycle_types(max_side):
        out.extend(search_maps(FiniteSystem.from_cycle_type(lengths), base,
                               require_surjective=True))
    return tuple(out)


def amalgam_problems(max_base: int, max_side: int):
    """Every amalgamation problem with ``|W| <= max_base`` and
    ``|X|, |Y| <= max_side``, up to isomorphism of ``W``, ``X`` and ``Y``
    separately; all surjections ``f``, ``g`` are enumerated by morphism
    search."""
    for base_type in cycle_types(max_base):
        maps = _maps_onto(base_type, max_side)
        for f in maps:
            for g in maps:
                yield AmalgamProblem(f, g)


def _sweep_chunk(job):
    base_type, max_side, start, stop = job
    maps = _maps_onto(base_type, max_side)
    checked = 0
    failures = []
    for fi in range(start, stop):
        for gi, g in enumerate(maps):
            p = AmalgamProblem(maps[fi], g)
            checked += 1
            if not verify_amalgam(p, amalgamate(p)):
                failures.append((base_type, fi, gi))
    return checked, failures


def sweep_amalgamation(max_base: int = 3, max_side: int = 6, workers: int | None = None):
    """Amalgamate and verify every problem of :func:`amalgam_problems`.

    Returns ``(problems checked, failures)``; a failure is
    ``(base cycle type, index of f, index of g)``.  Independent problems
    are spread over ``workers`` processes.
    """
    jobs = []
    for base_type in cycle_types(max_base):
        count = len(_maps_onto(base_type, max_side))
        step = max(1, count // 16)
        jobs.extend((base_type, max_side, a, min(a + step, count)) for a in range(0, count, step))
    workers = workers or os.cpu_count() or 1
    if workers == 1:
        results = map(_sweep_chunk, jobs)
    else:
        with ProcessPoolExecutor(workers) as pool:
            results = list(pool.map(_sweep_chunk, jobs))
    checked = 0
    failures = []
    for c, fails in results:
        checked += c
        failures.extend(fails)
    return checked, failures


def _surjects(src: FiniteSystem, tgt: FiniteSystem) -> bool:
    return next(search_maps(src, tgt, require_surjective=True), None) is not None


def _extension(top: FiniteSystem, step: int) -> EquivariantMap:
    """A one-cycle extension of ``top``: double the length of one cycle
    (even steps) or add a copy of it (odd steps), with the covering map."""
    cycles = cycle_decomposition(top).cycles
    c = cycles[(step // 2) % len(cycles)]
    lengths = [len(cc) for cc in cycles]
    cover: list[int] = []
    new_lengths = []
    for cc in cycles:
        if cc is c and step % 2 == 0:
            new_lengths.append(2 * len(cc))
            cover.extend(cc[t % len(cc)] for t in range(2 * len(cc)))
        else:
            new_lengths.append(len(cc))
            cover.extend(cc)
    if step % 2 == 1:
        new_lengths.append(len(c))
        cover.extend(c)
    assert sum(new_lengths) > sum(lengths)
    ext = FiniteSystem.from_cycle_type(new_lengths)
    return EquivariantMap(ext, top, tuple(cover))


def generic_chain(size_schedule, depth: int, max_states: int = 50_000) -> Tower:
    """A strictly growing tower of permutation systems starting at ``C_1``.

    Step ``s`` (building level ``s``) uses the bound
    ``b = size_schedule[min(s, len) - 1]``: the top is multiplied by every
    system of size ``<= b`` it does not yet map onto, then extended along
    one cycle through :func:`amalgamate`.  Every system of size ``<= b``
    is then a factor of level ``s`` and of every later level.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    schedule = [int(b) for b in size_schedule] or [1]
    if any(b < 1 for b in schedule) or any(a > b for a, b in zip(schedule, schedule[1:])):
        raise ValueError("size schedule must be positive and nondecreasing")
    levels = [FiniteSystem.cycle(1)]
    bondings: list[EquivariantMap] = []
    for s in range(1, depth):
        bound = schedule[min(s, len(schedule)) - 1]
        top = levels[-1]
        down = EquivariantMap.identity(top)
        for lengths in cycle_types(bound):
            task = FiniteSystem.from_cycle_type(lengths)
            if _surjects(down.source, task):
                continue
            if down.source.size * task.size > max_states:
                raise ResourceLimitError(
                    f"chain level would exceed {max_states} states at step {s}")
            z, pz, _ = jep(down.source, task)
            down = pz.then(down)
        current = down.source
        ext = _extension(current, s)
        if ext.source.size > max_states:
            raise ResourceLimitError(f"chain level would exceed {max_states} states at step {s}")
        sol = amalgamate(AmalgamProblem(EquivariantMap.identity(current), ext))
        bond = sol.h.then(down)
        fresh = FiniteSystem.from_permutation(sol.apex.perm)
        bondings.append(EquivariantMap(fresh, top, bond.assignment))
        levels.append(fresh)
    tower = Tower(tuple(levels), tuple(bondings), cantor=True)
    ok, why = validate(tower)
    if not ok:
        raise AssertionError(f"chain failed validation: {why}")
    return tower


@dataclass
class NotSpecialReport:
    level_orders: list[int]
    max_atom_period: list[int]
    periods_divide_order: bool
    spiral_wandering: dict[int, int]

    @property
    def ok(self) -> bool:
        return self.periods_divide_order and all(v > 0 for v in self.spiral_wandering.values())

    def lines(self) -> list[str]:
        out = []
        for k, (order, mx) in enumerate(zip(self.level_orders, self.max_atom_period)):
            out.append(f"level {k}: order {order}, max atom period {mx}")
        out.append("periodic half: " + ("OK" if self.periods_divide_order else "FAILED"))
        for n, count in sorted(self.spiral_wandering.items()):
            out.append(f"W_{n}: {count} wandering points")
        out.append("wandering half: "
                   + ("OK" if all(v > 0 for v in self.spiral_wandering.values()) else "FAILED"))
        return out


def not_special_certificate(chain: Tower, spiral_depth: int) -> NotSpecialReport:
    """Finite evidence that the chain's limit is not special: every atom of
    the chain is periodic, while spiral levels carry wandering points."""
    if not all(s.is_permutation for s in chain.levels):
        raise PreconditionError("the chain must consist of permutation systems")
    orders, maxima = [], []
    divides = True
    for k, sys in enumerate(chain.levels):
        order = cycle_decomposition(sys).order
        periods = [clopen_period(chain, ClopenSet(k, {x})) for x in range(sys.size)]
        divides = divides and all(p is not None and order % p == 0 for p in periods)
        orders.append(order)
        maxima.append(max(periods))
    wandering = {n: len(wandering_points(build_level(n))) for n in range(1, spiral_depth + 1)}
    return NotSpecialReport(orders, maxima, divides, wandering)


def problem_to_dict(p: AmalgamProblem) -> dict:
    return {
        "base": system_to_dict(p.base),
        "left": system_to_dict(p.left),
        "right": system_to_dict(p.right),
        "f": list(p.f.assignment),
        "g": list(p.g.assignment),
    }


def problem_from_dict(data: dict) -> AmalgamProblem:
    try:
        w = system_from_dict(data["base"])
        x = system_from_dict(data["left"])
        y = system_from_dict(data["right"])
        return AmalgamProblem(EquivariantMap(x, w, tuple(data["f"])),
                              EquivariantMap(y, w, tuple(data["g"])))
    except (KeyError, TypeError) as exc:
        raise DynamicsError(f"malformed amalgamation problem: {exc}") from None


def solution_to_dict(s: AmalgamSolution) -> dict:
    return {"apex": system_to_dict(s.apex), "h": list(s.h.assignment), "i": list(s.i.assignment)}
