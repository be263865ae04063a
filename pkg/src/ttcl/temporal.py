"""Crisp temporal primitives: point relations, Allen relations, demonstrations."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import NamedTuple


class DegenerateInterval(ValueError):
    """An interval is too short to be classified under the equality margin."""


class InvalidSignature(ValueError):
    """Four point relations that no pair of intervals can produce."""


class PointRelation(enum.Enum):
    BEFORE = "before"
    EQUALS = "equals"
    AFTER = "after"

    def invert(self) -> "PointRelation":
        return _POINT_INVERSE[self]

    @property
    def code(self) -> str:
        return self.value[0].upper()


_POINT_INVERSE = {
    PointRelation.BEFORE: PointRelation.AFTER,
    PointRelation.EQUALS: PointRelation.EQUALS,
    PointRelation.AFTER: PointRelation.BEFORE,
}


class AllenRelation(enum.Enum):
    BEFORE = "before"
    MEETS = "meets"
    OVERLAPS = "overlaps"
    STARTS = "starts"
    DURING = "during"
    FINISHES = "finishes"
    EQUALS = "equals"
    AFTER = "after"
    MET_BY = "met_by"
    OVERLAPPED_BY = "overlapped_by"
    STARTED_BY = "started_by"
    CONTAINS = "contains"
    FINISHED_BY = "finished_by"

    def invert(self) -> "AllenRelation":
        return invert(self)

    @property
    def index(self) -> int:
        return _INDEX[self]

    @property
    def bit(self) -> int:
        return 1 << _INDEX[self]


RELATIONS: tuple[AllenRelation, ...] = tuple(AllenRelation)
_INDEX = {r: i for i, r in enumerate(RELATIONS)}
FULL_MASK = (1 << len(RELATIONS)) - 1


class RelationSignature(NamedTuple):
    """Point relations between (x-, y-), (x-, y+), (x+, y-), (x+, y+)."""

    ss: PointRelation
    se: PointRelation
    es: PointRelation
    ee: PointRelation

    def invert(self) -> "RelationSignature":
        # swapping x and y exchanges the mixed channels
        return RelationSignature(self.ss.invert(), self.es.invert(), self.se.invert(), self.ee.invert())

    @property
    def code(self) -> str:
        return "".join(p.code for p in self)


CHANNELS = ("ss", "se", "es", "ee")

_B, _E, _A = PointRelation.BEFORE, PointRelation.EQUALS, PointRelation.AFTER

_SIGNATURES = {
    AllenRelation.BEFORE: RelationSignature(_B, _B, _B, _B),
    AllenRelation.MEETS: RelationSignature(_B, _B, _E, _B),
    AllenRelation.OVERLAPS: RelationSignature(_B, _B, _A, _B),
    AllenRelation.STARTS: RelationSignature(_E, _B, _A, _B),
    AllenRelation.DURING: RelationSignature(_A, _B, _A, _B),
    AllenRelation.FINISHES: RelationSignature(_A, _B, _A, _E),
    AllenRelation.EQUALS: RelationSignature(_E, _B, _A, _E),
    AllenRelation.AFTER: RelationSignature(_A, _A, _A, _A),
    AllenRelation.MET_BY: RelationSignature(_A, _E, _A, _A),
    AllenRelation.OVERLAPPED_BY: RelationSignature(_A, _B, _A, _A),
    AllenRelation.STARTED_BY: RelationSignature(_E, _B, _A, _A),
    AllenRelation.CONTAINS: RelationSignature(_B, _B, _A, _A),
    AllenRelation.FINISHED_BY: RelationSignature(_B, _B, _A, _E),
}
_BY_SIGNATURE = {sig: r for r, sig in _SIGNATURES.items()}

_INVERSE = {
    AllenRelation.BEFORE: AllenRelation.AFTER,
    AllenRelation.MEETS: AllenRelation.MET_BY,
    AllenRelation.OVERLAPS: AllenRelation.OVERLAPPED_BY,
    AllenRelation.STARTS: AllenRelation.STARTED_BY,
    AllenRelation.DURING: AllenRelation.CONTAINS,
    AllenRelation.FINISHES: AllenRelation.FINISHED_BY,
    AllenRelation.EQUALS: AllenRelation.EQUALS,
}
_INVERSE.update({v: k for k, v in list(_INVERSE.items())})

# Allen's transitivity table, row r1, column r2 in RELATIONS order.
_CODES = ("b", "m", "o", "s", "d", "f", "e", "bi", "mi", "oi", "si", "di", "fi")
_FULL = "b m o s d f e bi mi oi si di fi"
_COMPOSITION_ROWS = {
    "b": ["b", "b", "b", "b", "b m o s d", "b m o s d", "b", _FULL, "b m o s d", "b m o s d", "b", "b", "b"],
    "m": ["b", "b", "b", "m", "o s d", "o s d", "m", "bi mi oi si di", "f e fi", "o s d", "m", "b", "b"],
    "o": ["b", "b", "b m o", "o", "o s d", "o s d", "o", "bi mi oi si di", "oi si di",
          "o s d f e oi si di fi", "o di fi", "b m o di fi", "b m o"],
    "s": ["b", "b", "b m o", "s", "d", "d", "s", "bi", "mi", "d f oi", "s e si", "b m o di fi", "b m o"],
    "d": ["b", "b", "b m o s d", "d", "d", "d", "d", "bi", "bi", "d f bi mi oi", "d f bi mi oi", _FULL, "b m o s d"],
    "f": ["b", "m", "o s d", "d", "d", "f", "f", "bi", "bi", "bi mi oi", "bi mi oi", "bi mi oi si di", "f e fi"],
    "e": ["b", "m", "o", "s", "d", "f", "e", "bi", "mi", "oi", "si", "di", "fi"],
    "bi": [_FULL, "d f bi mi oi", "d f bi mi oi", "d f bi mi oi", "d f bi mi oi", "bi", "bi", "bi", "bi", "bi", "bi",
           "bi", "bi"],
    "mi": ["b m o di fi", "s e si", "d f oi", "d f oi", "d f oi", "mi", "mi", "bi", "bi", "bi", "bi", "bi", "mi"],
    "oi": ["b m o di fi", "o di fi", "o s d f e oi si di fi", "d f oi", "d f oi", "oi", "oi", "bi", "bi", "bi mi oi",
           "bi mi oi", "bi mi oi si di", "oi si di"],
    "si": ["b m o di fi", "o di fi", "o di fi", "s e si", "d f oi", "oi", "si", "bi", "mi", "oi", "si", "di", "di"],
    "di": ["b m o di fi", "o di fi", "o di fi", "o di fi", "o s d f e oi si di fi", "oi si di", "di",
           "bi mi oi si di", "oi si di", "oi si di", "di", "di", "di"],
    "fi": ["b", "m", "o", "o", "o s d", "f e fi", "fi", "bi mi oi si di", "oi si di", "oi si di", "di", "di", "fi"],
}
_BY_CODE = dict(zip(_CODES, RELATIONS))

COMPOSITION: dict[tuple[AllenRelation, AllenRelation], frozenset[AllenRelation]] = {
    (_BY_CODE[c1], r2): frozenset(_BY_CODE[c] for c in cell.split())
    for c1, row in _COMPOSITION_ROWS.items()
    for r2, cell in zip(RELATIONS, row)
}
_COMPOSITION_MASK = [[0] * len(RELATIONS) for _ in RELATIONS]
for (_r1, _r2), _cell in COMPOSITION.items():
    _COMPOSITION_MASK[_r1.index][_r2.index] = sum(r.bit for r in _cell)


@dataclass(frozen=True)
class TimeInterval:
    start: float
    end: float

    def __post_init__(self):
        if not (math.isfinite(self.start) and math.isfinite(self.end)):
            raise ValueError(f"interval bounds must be finite: [{self.start}, {self.end}]")
        if not self.start < self.end:
            raise ValueError(f"interval start must precede end: [{self.start}, {self.end}]")

    @property
    def duration(self) -> float:
        return self.end - self.start


@dataclass(frozen=True, order=True)
class Action:
    verb: str
    object: str

    def __post_init__(self):
        if not self.verb or not self.object:
            raise ValueError(f"action needs a verb and an object, got {self.verb!r}, {self.object!r}")

    @property
    def key(self) -> str:
        return f"{self.verb}:{self.object}"

    @classmethod
    def parse(cls, text: str) -> "Action":
        verb, sep, obj = text.partition(":")
        if not sep:
            raise ValueError(f"expected 'verb:object', got {text!r}")
        return cls(verb.strip(), obj.strip())

    def __str__(self) -> str:
        return self.key


@dataclass(frozen=True)
class ActionObservation:
    """An action with its start and end time.

    Bounds are not checked here so that malformed input can still be loaded
    and reported by :func:`validate_demonstration`.
    """

    action: Action
    start: float
    end: float

    @property
    def interval(self) -> TimeInterval:
        return TimeInterval(self.start, self.end)

    @property
    def duration(self) -> float:
        return self.end - self.start


@dataclass(frozen=True)
class Demonstration:
    id: str
    left: tuple[ActionObservation, ...] = ()
    right: tuple[ActionObservation, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "left", tuple(self.left))
        object.__setattr__(self, "right", tuple(self.right))

    def hands(self):
        yield "left", self.left
        yield "right", self.right

    def observations(self) -> list[tuple[str, ActionObservation]]:
        return [(hand, obs) for hand, seq in self.hands() for obs in seq]

    def actions(self) -> set[Action]:
        return {obs.action for _, obs in self.observations()}


@dataclass(frozen=True)
class Violation:
    hand: str
    index: int
    rule: str
    detail: str = field(default="", compare=False)

    def __str__(self) -> str:
        return f"{self.hand}[{self.index}] {self.rule}: {self.detail}"


def classify_point(t1: float, t2: float, epsilon: float = 0.0) -> PointRelation:
    if epsilon < 0:
        raise ValueError(f"epsilon must be non-negative, got {epsilon}")
    if abs(t1 - t2) <= epsilon:
        return PointRelation.EQUALS
    if t1 < t2 - epsilon:
        return PointRelation.BEFORE
    return PointRelation.AFTER


def signature_of(relation: AllenRelation) -> RelationSignature:
    return _SIGNATURES[relation]


def relation_of(signature: RelationSignature) -> AllenRelation:
    try:
        return _BY_SIGNATURE[tuple(signature)]
    except KeyError:
        raise InvalidSignature(f"no Allen relation has signature {RelationSignature(*signature).code}") from None


def classify_interval(x: TimeInterval, y: TimeInterval, epsilon: float = 0.0) -> AllenRelation:
    """Allen relation of ``x`` to ``y``; points closer than ``epsilon`` count as equal."""
    for iv in (x, y):
        if iv.duration <= 2 * epsilon:
            raise DegenerateInterval(f"duration {iv.duration} <= 2*epsilon for {iv}")
    sig = RelationSignature(
        classify_point(x.start, y.start, epsilon),
        classify_point(x.start, y.end, epsilon),
        classify_point(x.end, y.start, epsilon),
        classify_point(x.end, y.end, epsilon),
    )
    return relation_of(sig)


def invert(relation: AllenRelation) -> AllenRelation:
    return _INVERSE[relation]


def compose(r1: AllenRelation, r2: AllenRelation) -> frozenset[AllenRelation]:
    """Relations possible between a and c given ``r1(a, b)`` and ``r2(b, c)``."""
    return COMPOSITION[(r1, r2)]


def to_mask(relations) -> int:
    mask = 0
    for r in relations:
        mask |= r.bit
    return mask


def from_mask(mask: int) -> frozenset[AllenRelation]:
    return frozenset(r for r in RELATIONS if mask & r.bit)


_INVERT_MASK_CACHE: dict[int, int] = {}
_COMPOSE_MASK_CACHE: dict[tuple[int, int], int] = {}


def invert_mask(mask: int) -> int:
    out = _INVERT_MASK_CACHE.get(mask)
    if out is None:
        out = 0
        for r in RELATIONS:
            if mask & r.bit:
                out |= _INVERSE[r].bit
        _INVERT_MASK_CACHE[mask] = out
    return out


def compose_mask(m1: int, m2: int) -> int:
    """Composition lifted to relation sets encoded as 13-bit masks."""
    key = (m1, m2)
    out = _COMPOSE_MASK_CACHE.get(key)
    if out is None:
        out = 0
        bits1 = [i for i in range(len(RELATIONS)) if m1 >> i & 1]
        bits2 = [j for j in range(len(RELATIONS)) if m2 >> j & 1]
        for i in bits1:
            row = _COMPOSITION_MASK[i]
            for j in bits2:
                out |= row[j]
                if out == FULL_MASK:
                    break
            if out == FULL_MASK:
                break
        _COMPOSE_MASK_CACHE[key] = out
    return out


def validate_demonstration(demo: Demonstration) -> list[Violation]:
    violations = []
    for hand, seq in demo.hands():
        prev_end = None
        for idx, obs in enumerate(seq):
            if not (math.isfinite(obs.start) and math.isfinite(obs.end)):
                violations.append(Violation(hand, idx, "non-finite", f"[{obs.start}, {obs.end}]"))
                continue
            if not obs.start < obs.end:
                violations.append(Violation(hand, idx, "degenerate-interval", f"[{obs.start}, {obs.end}]"))
            if prev_end is not None and obs.start < prev_end:
                violations.append(Violation(hand, idx, "overlap",
                                            f"starts at {obs.start} before previous end {prev_end}"))
            prev_end = obs.end
    return violations
