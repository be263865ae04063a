"""Fuzzy point and interval relations estimated from keypoint-difference mixtures."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

from .apkm import ActionPairKeypointModel
from .mixture import GaussianMixture, mass
from .temporal import CHANNELS, RELATIONS, AllenRelation, PointRelation, invert, signature_of

DEFAULT_EPSILON = 0.1


@dataclass(frozen=True)
class FuzzyConfig:
    epsilon: float = DEFAULT_EPSILON

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")


@dataclass(frozen=True)
class FuzzyPointMembership:
    before: float
    equals: float
    after: float

    def __getitem__(self, relation: PointRelation) -> float:
        return getattr(self, relation.value)

    @property
    def total(self) -> float:
        return self.before + self.equals + self.after


@dataclass(frozen=True)
class FuzzyAllenProfile:
    membership: Mapping[AllenRelation, float]

    def __post_init__(self):
        missing = set(RELATIONS) - set(self.membership)
        if missing:
            raise ValueError(f"profile lacks {sorted(r.value for r in missing)}")

    def __getitem__(self, relation: AllenRelation) -> float:
        return self.membership[relation]

    def argmax(self) -> AllenRelation:
        # first relation in canonical order wins ties
        return max(RELATIONS, key=lambda r: (self.membership[r], -r.index))

    def ranked(self) -> list[tuple[AllenRelation, float]]:
        return sorted(((r, self.membership[r]) for r in RELATIONS), key=lambda t: (-t[1], t[0].index))

    def inverted(self) -> "FuzzyAllenProfile":
        """Profile of the same action pair taken in the opposite order."""
        return FuzzyAllenProfile({r: self.membership[invert(r)] for r in RELATIONS})

    def to_dict(self) -> dict:
        return {r.value: self.membership[r] for r in RELATIONS}

    @classmethod
    def from_dict(cls, data: Mapping[str, float]) -> "FuzzyAllenProfile":
        return cls({r: float(data[r.value]) for r in RELATIONS})


def filtered_components(model: GaussianMixture, epsilon: float) -> list[int]:
    """Indices of components whose mean lies strictly outside ``[-epsilon, epsilon]``."""
    return [i for i, c in enumerate(model.components) if c.mean < -epsilon or c.mean > epsilon]


def fuzzy_point(model: GaussianMixture, epsilon: float) -> FuzzyPointMembership:
    if not epsilon > 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    keep = filtered_components(model, epsilon)
    before = mass(model, -math.inf, -epsilon, keep) if keep else 0.0
    after = mass(model, epsilon, math.inf, keep) if keep else 0.0
    return FuzzyPointMembership(before, 1.0 - before - after, after)


def point_memberships(apkm: ActionPairKeypointModel, epsilon: float) -> dict[str, FuzzyPointMembership]:
    return {name: fuzzy_point(apkm.channel(name), epsilon) for name in CHANNELS}


_CONDITIONS = [(r, tuple(zip(CHANNELS, signature_of(r)))) for r in RELATIONS]


def fuzzy_allen(apkm: ActionPairKeypointModel, config: FuzzyConfig | None = None) -> FuzzyAllenProfile:
    """Membership in each Allen relation as the minimum over all four keypoint conditions."""
    config = config or FuzzyConfig()
    points = {name: {PointRelation.BEFORE: p.before, PointRelation.EQUALS: p.equals, PointRelation.AFTER: p.after}
              for name, p in point_memberships(apkm, config.epsilon).items()}
    return FuzzyAllenProfile({r: min(points[name][req] for name, req in cond) for r, cond in _CONDITIONS})
