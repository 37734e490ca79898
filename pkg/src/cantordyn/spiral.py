"""n-spirals, the levels ``(W_n, R_n)`` and the collapse maps between them.

An n-spiral has a left cycle ``(l, 0..n!-1)``, a middle chain
``(m, -n+1..n-1)`` and a right cycle ``(r, 0..n!-1)``, with
``(l,0) -> (m,-n+1)`` and ``(m,n-1) -> (r,0)``.  ``W_n`` is the disjoint
union of ``6**n`` spirals indexed by words over six letters.

The collapse ``xi_step : W_{n+1} -> W_n`` reads the last letter of the
word.  The middle-chain rule of the ``M`` letters is the "straight down"
projection.  The cycle coordinates of all three families carry fixed
offsets chosen so that every relation pair lands on a relation pair; for
``n = 1`` the offsets vanish (everything is taken mod ``1! = 1``).
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from math import factorial

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .findyn import EquivariantMap, FiniteSystem, ResourceLimitError, to_dot

LETTERS = ("L1", "L2", "M1", "M2", "G1", "G2")
FAMILY = {"L1": "L", "L2": "L", "M1": "M", "M2": "M", "G1": "G", "G2": "G"}
SIDES = ("l", "m", "r")

#: largest level built by default (``|W_4| = 71280``)
MAX_LEVEL_STATES = 71_280


@dataclass(frozen=True, order=True)
class SpiralPoint:
    word: tuple[str, ...]
    side: str
    index: int

    def __post_init__(self):
        n = len(self.word)
        if n < 1 or any(a not in FAMILY for a in self.word):
            raise ValueError(f"bad spiral word {self.word!r}")
        check_side_index(n, self.side, self.index)

    @property
    def level(self) -> int:
        return len(self.word)

    def __str__(self):
        return f"({''.join(self.word)}|{self.side}|{self.index})"

    @classmethod
    def parse(cls, text: str) -> "SpiralPoint":
        m = re.fullmatch(r"\(((?:[LMG][12])+)\|([lmr])\|(-?\d+)\)", text.strip())
        if m is None:
            raise ValueError(f"cannot parse spiral point {text!r}")
        word = tuple(re.findall(r"[LMG][12]", m.group(1)))
        return cls(word, m.group(2), int(m.group(3)))


def check_side_index(n: int, side: str, index: int) -> None:
    if side in ("l", "r"):
        ok = 0 <= index < factorial(n)
    elif side == "m":
        ok = -n + 1 <= index <= n - 1
    else:
        raise ValueError(f"unknown side {side!r}")
    if not ok:
        raise ValueError(f"index {index} out of range for side {side} at level {n}")


def spiral_size(n: int) -> int:
    return 2 * factorial(n) + 2 * n - 1


def level_size(n: int) -> int:
    return 6 ** n * spiral_size(n)


def spiral_coords(n: int) -> list[tuple[str, int]]:
    """The ``(side, index)`` pairs of an n-spiral in state order."""
    nf = factorial(n)
    return ([("l", k) for k in range(nf)]
            + [("m", k) for k in range(-n + 1, n)]
            + [("r", k) for k in range(nf)])


def _coord_offset(n: int, side: str, index: int) -> int:
    nf = factorial(n)
    if side == "l":
        return index
    if side == "m":
        return nf + index + n - 1
    return nf + 2 * n - 1 + index


def spiral_pairs(n: int) -> list[tuple[int, int]]:
    """Relation pairs of an n-spiral on the state order of
    :func:`spiral_coords`."""
    if n < 1:
        raise ValueError("spiral level must be >= 1")
    nf = factorial(n)
    off = lambda side, k: _coord_offset(n, side, k)  # noqa: E731
    pairs = []
    for side in ("l", "r"):
        for k in range(nf):
            pairs.append((off(side, k), off(side, (k + 1) % nf)))
    for k in range(-n + 1, n - 1):
        pairs.append((off("m", k), off("m", k + 1)))
    pairs.append((off("l", 0), off("m", -n + 1)))
    pairs.append((off("m", n - 1), off("r", 0)))
    return pairs


def build_spiral(n: int) -> FiniteSystem:
    """A single n-spiral, labelled by ``(side, index)``."""
    if n < 1:
        raise ValueError("spiral level must be >= 1")
    return FiniteSystem.from_relation(spiral_size(n), spiral_pairs(n), spiral_coords(n))


def collapse_coords(letter: str, n: int, side: str, index: int) -> tuple[str, int]:
    """Image at level ``n`` of the level-``n+1`` spiral point
    ``(side, index)`` under the map of the letter's family."""
    check_side_index(n + 1, side, index)
    nf = factorial(n)
    family = FAMILY[letter]
    if family == "M":
        if side == "l":
            return "l", (index - 1) % nf
        if side == "r":
            return "r", (index + 1) % nf
        if index == -n:
            return "l", 0
        if index == n:
            return "r", 0
        return "m", index
    shift = {"l": 0, "m": n + 1, "r": 2 * n + 2}[side]
    if family == "L":
        return "l", (index + shift) % nf
    return "r", (index + shift - 2 * n - 2) % nf


def words(n: int) -> list[tuple[str, ...]]:
    return list(itertools.product(LETTERS, repeat=n))


@dataclass(frozen=True, eq=False)
class SpiralLevel:
    n: int
    system: FiniteSystem

    @property
    def points(self) -> tuple[SpiralPoint, ...]:
        return self.system.labels

    def index_of(self, p: SpiralPoint) -> int:
        if p.level != self.n:
            raise ValueError(f"point of level {p.level} is not in W_{self.n}")
        return point_index(p)

    def spiral_of(self, x: int) -> int:
        return x // spiral_size(self.n)

    def side_states(self, side: str) -> list[int]:
        return [x for x, p in enumerate(self.points) if p.side == side]


def point_index(p: SpiralPoint) -> int:
    n = p.level
    s = 0
    for a in p.word:
        s = s * 6 + LETTERS.index(a)
    return s * spiral_size(n) + _coord_offset(n, p.side, p.index)


_LEVELS: dict[int, SpiralLevel] = {}


def build_level(n: int, max_states: int = MAX_LEVEL_STATES) -> SpiralLevel:
    """``(W_n, R_n)``: ``6**n`` copies of the n-spiral in lexicographic word
    order."""
    if n < 1:
        raise ValueError("spiral level must be >= 1")
    size = level_size(n)
    if size > max_states:
        raise ResourceLimitError(f"W_{n} has {size} states, above the cap of {max_states}")
    cached = _LEVELS.get(n)
    if cached is not None:
        return cached
    per = spiral_size(n)
    base = spiral_pairs(n)
    coords = spiral_coords(n)
    labels = []
    succ: list[list[int]] = [[] for _ in range(size)]
    for s, w in enumerate(words(n)):
        start = s * per
        labels.extend(SpiralPoint(w, side, k) for side, k in coords)
        for x, y in base:
            succ[start + x].append(start + y)
    system = FiniteSystem("rel", tuple(tuple(sorted(v)) for v in succ), tuple(labels))
    level = SpiralLevel(n, system)
    _LEVELS[n] = level
    return level


def xi_step(p: SpiralPoint) -> SpiralPoint:
    """Collapse a point of ``W_{n+1}`` to ``W_n``; the target spiral's word
    drops the last letter."""
    if p.level < 2:
        raise ValueError("level-1 points have no image (there is no W_0)")
    side, k = collapse_coords(p.word[-1], p.level - 1, p.side, p.index)
    return SpiralPoint(p.word[:-1], side, k)


def xi(m: int, n: int, p: SpiralPoint) -> SpiralPoint:
    """The canonical map ``W_m -> W_n`` (``m > n``) applied to ``p``."""
    if not m > n >= 1:
        raise ValueError("need m > n >= 1")
    if p.level != m:
        raise ValueError(f"point has level {p.level}, expected {m}")
    for _ in range(m - n):
        p = xi_step(p)
    return p


def xi_map(m: int, n: int) -> EquivariantMap:
    """The canonical map ``W_m -> W_n`` as an :class:`EquivariantMap`."""
    if not m > n >= 1:
        raise ValueError("need m > n >= 1")
    src = build_level(m)
    tgt = build_level(n)
    return EquivariantMap(src.system, tgt.system,
                          tuple(point_index(xi(m, n, p)) for p in src.points))


def _pairs_preserved(src: FiniteSystem, tgt: FiniteSystem, image) -> bool:
    return all(tgt.has_pair(image[x], image[y]) for x, y in src.pairs())


def verify_xi_morphism(n: int, upper: FiniteSystem | None = None,
                       lower: FiniteSystem | None = None) -> bool:
    """Every pair of ``R_{n+1}`` maps to a pair of ``R_n`` under ``xi``.

    ``upper``/``lower`` replace the relations on ``W_{n+1}``/``W_n`` (same
    states), which is how corrupted levels are checked.
    """
    up = build_level(n + 1)
    upper = up.system if upper is None else upper
    lower = build_level(n).system if lower is None else lower
    image = [point_index(xi_step(p)) for p in up.points]
    return _pairs_preserved(upper, lower, image)


def corrupt_level(level: SpiralLevel | FiniteSystem, drop: tuple[int, int] | None = None) -> FiniteSystem:
    """Copy of a level with one relation pair removed.

    By default the pair ``(l,0) -> (m,-n+1)`` of the first spiral goes, so
    every state keeps a successor.
    """
    sys = level.system if isinstance(level, SpiralLevel) else level
    if drop is None:
        n = sys.labels[0].level if isinstance(sys.labels[0], SpiralPoint) else None
        if n is None:
            raise ValueError("give the pair to drop explicitly")
        drop = (_coord_offset(n, "l", 0), _coord_offset(n, "m", -n + 1))
    pairs = [pr for pr in sys.pairs() if pr != tuple(drop)]
    if len(pairs) == len(sys.pairs()):
        raise ValueError(f"pair {drop} is not in the relation")
    return FiniteSystem.from_relation(sys.size, pairs, sys.labels)


def recurrent_states(sys: FiniteSystem) -> np.ndarray:
    """Boolean mask of states lying on a closed path of length >= 1."""
    n = sys.size
    pairs = sys.pairs()
    rows = np.fromiter((x for x, _ in pairs), dtype=np.int64, count=len(pairs))
    cols = np.fromiter((y for _, y in pairs), dtype=np.int64, count=len(pairs))
    graph = csr_matrix((np.ones(len(pairs), dtype=np.int8), (rows, cols)), shape=(n, n))
    _, comp = connected_components(graph, directed=True, connection="strong")
    comp_size = np.bincount(comp, minlength=n)
    mask = comp_size[comp] > 1
    mask[rows[rows == cols]] = True
    return mask


def wandering_points(level: SpiralLevel | FiniteSystem) -> list:
    """Labels of the states from which no relation path returns."""
    sys = level.system if isinstance(level, SpiralLevel) else level
    rec = recurrent_states(sys)
    return [sys.labels[x] for x in range(sys.size) if not rec[x]]


SIDE_COLOURS = {"l": "lightblue", "m": "orange", "r": "palegreen"}


def level_to_dot(level: SpiralLevel | FiniteSystem, name: str = "spiral") -> str:
    """DOT export with the three sides colour-coded."""
    sys = level.system if isinstance(level, SpiralLevel) else level

    def attrs(x):
        lab = sys.labels[x]
        side = lab.side if isinstance(lab, SpiralPoint) else lab[0]
        return {"style": "filled", "fillcolor": SIDE_COLOURS[side]}

    return to_dot(sys, name, attrs)


def relabel_from_json(sys: FiniteSystem) -> FiniteSystem:
    """Turn string labels ``(word|side|index)`` back into points."""
    return sys.relabel([SpiralPoint.parse(lab) if isinstance(lab, str) else lab
                        for lab in sys.labels])
