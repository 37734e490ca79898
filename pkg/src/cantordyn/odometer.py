"""Odometers on eventually periodic digit sequences.

The odometer for ``(a_1, a_2, ...)`` adds one to the leftmost digit of
``prod {0..a_i-1}`` and carries to the right.  Its finite truncations are
single cycles of length ``m_n = a_1 * ... * a_n``; conjugacy is decided by
the supernatural number of the sequence.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import gcd, prod

from sympy import factorint, isprime

from .findyn import EquivariantMap, FiniteSystem, ResourceLimitError
from .tower import Tower

INF = "inf"
MAX_TRUNCATION_STATES = 100_000


@dataclass(frozen=True)
class OdometerSpec:
    """``preperiod`` followed by ``period`` repeated forever."""

    preperiod: tuple[int, ...]
    period: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "preperiod", tuple(int(a) for a in self.preperiod))
        object.__setattr__(self, "period", tuple(int(a) for a in self.period))
        if not self.period:
            raise ValueError("period must be nonempty")
        if any(a < 2 for a in self.preperiod + self.period):
            raise ValueError("every digit base must be >= 2")

    @classmethod
    def parse(cls, text: str) -> "OdometerSpec":
        """``"6:5"`` is (6, 5, 5, ...); ``":2"`` or ``"2"`` is constant 2.

        Without a colon the whole list is the period.
        """
        pre, sep, per = text.strip().partition(":")
        if not sep:
            pre, per = "", pre

        def ints(s):
            s = s.strip()
            return tuple(int(v) for v in s.split(",")) if s else ()

        try:
            return cls(ints(pre), ints(per))
        except ValueError as exc:
            raise ValueError(f"bad odometer spec {text!r}: {exc}") from None

    def __str__(self):
        return f"{','.join(map(str, self.preperiod))}:{','.join(map(str, self.period))}"

    def base(self, i: int) -> int:
        """``a_i`` for ``i >= 1``."""
        if i < 1:
            raise IndexError("digit positions start at 1")
        if i <= len(self.preperiod):
            return self.preperiod[i - 1]
        return self.period[(i - 1 - len(self.preperiod)) % len(self.period)]

    def bases(self, n: int) -> tuple[int, ...]:
        return tuple(self.base(i) for i in range(1, n + 1))

    def partial_product(self, n: int) -> int:
        return prod(self.bases(n))

    def to_dict(self) -> dict:
        return {"preperiod": list(self.preperiod), "period": list(self.period)}

    @classmethod
    def from_dict(cls, data: dict) -> "OdometerSpec":
        return cls(tuple(data.get("preperiod", ())), tuple(data["period"]))


@dataclass(frozen=True)
class SupernaturalNumber:
    """Prime -> exponent, exponent a positive int or ``INF``."""

    exponents: tuple[tuple[int, int | str], ...]

    @classmethod
    def from_map(cls, m: dict) -> "SupernaturalNumber":
        items = []
        for p, e in m.items():
            if not isprime(int(p)):
                raise ValueError(f"{p} is not a prime")
            if e == INF or e == float("inf"):
                items.append((int(p), INF))
            elif int(e) > 0:
                items.append((int(p), int(e)))
            elif int(e) < 0:
                raise ValueError("negative exponent")
        return cls(tuple(sorted(items)))

    def as_dict(self) -> dict:
        return dict(self.exponents)

    def exponent(self, p: int) -> int | str:
        return self.as_dict().get(p, 0)

    def divisible_by(self, k: int) -> bool:
        """True iff the integer ``k`` divides this supernatural number."""
        if k < 1:
            raise ValueError("k must be positive")
        own = self.as_dict()
        for p, e in factorint(k).items():
            have = own.get(p, 0)
            if have != INF and have < e:
                return False
        return True

    def to_json(self) -> dict:
        return {str(p): e for p, e in self.exponents}

    @classmethod
    def from_json(cls, data: dict) -> "SupernaturalNumber":
        return cls.from_map({int(p): e for p, e in data.items()})

    def __str__(self):
        if not self.exponents:
            return "1"
        return " * ".join(f"{p}^{'inf' if e == INF else e}" for p, e in self.exponents)


def _check_digits(spec: OdometerSpec, point) -> tuple[int, ...]:
    point = tuple(int(b) for b in point)
    for i, b in enumerate(point, start=1):
        if not 0 <= b < spec.base(i):
            raise ValueError(f"digit {b} at position {i} outside 0..{spec.base(i) - 1}")
    return point


def step(spec: OdometerSpec, point) -> tuple[int, ...]:
    """Add one on the left with carry.  The all-maximal vector wraps to
    all zeros."""
    digits = list(_check_digits(spec, point))
    for i, b in enumerate(digits):
        if b < spec.base(i + 1) - 1:
            digits[i] = b + 1
            return tuple(digits)
        digits[i] = 0
    return tuple(digits)


def _digit_vectors(spec: OdometerSpec, n: int) -> list[tuple[int, ...]]:
    """All level-n digit vectors, ordered by mixed-radix value with digit 1
    least significant."""
    ranges = [range(a) for a in reversed(spec.bases(n))]
    return [tuple(reversed(v)) for v in itertools.product(*ranges)]


def truncation(spec: OdometerSpec, n: int,
               max_states: int = MAX_TRUNCATION_STATES) -> FiniteSystem:
    """The permutation ``step`` on all digit vectors of length ``n``."""
    if n < 1:
        raise ValueError("truncation level must be >= 1")
    size = spec.partial_product(n)
    if size > max_states:
        raise ResourceLimitError(f"truncation has {size} states, above the cap of {max_states}")
    vectors = _digit_vectors(spec, n)
    where = {v: i for i, v in enumerate(vectors)}
    return FiniteSystem.from_permutation([where[step(spec, v)] for v in vectors], vectors)


def bonding(spec: OdometerSpec, n: int) -> EquivariantMap:
    """Drop digit ``n+1``: truncation ``n+1`` onto truncation ``n``."""
    upper = truncation(spec, n + 1)
    lower = truncation(spec, n)
    return EquivariantMap(upper, lower,
                          tuple(lower.index(v[:n]) for v in upper.labels))


def odometer_tower(spec: OdometerSpec, depth: int) -> Tower:
    """Truncations ``1..depth`` with their digit-drop bondings."""
    if depth < 1:
        raise ValueError("depth must be >= 1")
    levels = [truncation(spec, n) for n in range(1, depth + 1)]
    bondings = []
    for n in range(1, depth):
        upper, lower = levels[n], levels[n - 1]
        bondings.append(EquivariantMap(upper, lower,
                                       tuple(lower.index(v[:n]) for v in upper.labels)))
    return Tower(tuple(levels), tuple(bondings))


def supernatural(spec: OdometerSpec) -> SupernaturalNumber:
    exps: dict[int, int | str] = {}
    for a in spec.period:
        for p in factorint(a):
            exps[p] = INF
    for a in spec.preperiod:
        for p, e in factorint(a).items():
            if exps.get(p) != INF:
                exps[p] = exps.get(p, 0) + e
    return SupernaturalNumber.from_map(exps)


def conjugate(a: OdometerSpec, b: OdometerSpec) -> bool:
    return supernatural(a) == supernatural(b)


def phi_k_odometer(spec: OdometerSpec, k: int) -> tuple[bool, int | None]:
    """Whether the odometer has ``k`` clopen sets cyclically permuted, and
    the least truncation level ``n`` with ``k | m_n`` that exhibits it."""
    if k < 1:
        raise ValueError("k must be positive")
    if not supernatural(spec).divisible_by(k):
        return False, None
    remaining = k
    n = 0
    while remaining > 1:
        n += 1
        remaining //= gcd(remaining, spec.base(n))
    return True, max(n, 1)


def swap_sentence_holds(spec: OdometerSpec) -> bool:
    """A nontrivial clopen ``U`` with ``sigma(U)`` equal to its complement."""
    return phi_k_odometer(spec, 2)[0]
