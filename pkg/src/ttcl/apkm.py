"""Action pair keypoint models: four mixtures over keypoint time differences."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .mixture import GaussianMixture, fit_best
from .temporal import CHANNELS, Action, Demonstration, TimeInterval


class EmptyPairSet(ValueError):
    pass


class NoCooccurrence(ValueError):
    pass


@dataclass(frozen=True)
class FitConfig:
    """Knobs forwarded to :func:`ttcl.mixture.fit_best`."""

    seed: int = 0
    tol: float = 1e-7
    max_iter: int = 300
    max_components: int = 10

    def fit(self, samples) -> GaussianMixture:
        return fit_best(samples, seed=self.seed, max_components=self.max_components,
                        tol=self.tol, max_iter=self.max_iter)


@dataclass(frozen=True)
class KeypointDifferenceSets:
    """Differences ``keypoint(first) - keypoint(second)`` for every collected pair."""

    t_ss: tuple[float, ...]
    t_se: tuple[float, ...]
    t_es: tuple[float, ...]
    t_ee: tuple[float, ...]

    def __len__(self) -> int:
        return len(self.t_ss)

    def channel(self, name: str) -> tuple[float, ...]:
        return getattr(self, "t_" + name)


@dataclass(frozen=True)
class ActionPairKeypointModel:
    first: Action
    second: Action
    m_ss: GaussianMixture
    m_se: GaussianMixture
    m_es: GaussianMixture
    m_ee: GaussianMixture
    pair_count: int

    def channel(self, name: str) -> GaussianMixture:
        return getattr(self, "m_" + name)

    def channels(self):
        return [(name, self.channel(name)) for name in CHANNELS]

    @property
    def key(self) -> str:
        return pair_key(self.first, self.second)

    def to_dict(self) -> dict:
        out = {"first": self.first.key, "second": self.second.key, "pair_count": self.pair_count}
        out.update({name: m.to_dict() for name, m in self.channels()})
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "ActionPairKeypointModel":
        return cls(Action.parse(data["first"]), Action.parse(data["second"]),
                   *(GaussianMixture.from_dict(data[name]) for name in CHANNELS),
                   pair_count=int(data["pair_count"]))


def pair_key(a1: Action, a2: Action) -> str:
    return f"{a1.key}|{a2.key}"


def parse_pair_key(key: str) -> tuple[Action, Action]:
    left, sep, right = key.partition("|")
    if not sep:
        raise ValueError(f"expected 'verb:object|verb:object', got {key!r}")
    return Action.parse(left), Action.parse(right)


def collect_pairs(demos: Iterable[Demonstration], a1: Action, a2: Action) -> list[tuple[TimeInterval, TimeInterval]]:
    """All ordered observation pairs (a1, a2) within each demonstration, both hands pooled.

    A self pair (``a1 == a2``) only pairs observations from different hands.
    """
    pairs = []
    for demo in demos:
        pool = demo.observations()
        firsts = [(h, i, o) for i, (h, o) in enumerate(pool) if o.action == a1]
        if not firsts:
            continue
        seconds = [(h, i, o) for i, (h, o) in enumerate(pool) if o.action == a2]
        for h1, i1, o1 in firsts:
            for h2, i2, o2 in seconds:
                if i1 == i2 or (a1 == a2 and h1 == h2):
                    continue
                pairs.append((o1.interval, o2.interval))
    return pairs


def build_differences(pairs: Sequence[tuple[TimeInterval, TimeInterval]]) -> KeypointDifferenceSets:
    if not pairs:
        raise EmptyPairSet("no interval pairs to difference")
    return KeypointDifferenceSets(
        tuple(x.start - y.start for x, y in pairs),
        tuple(x.start - y.end for x, y in pairs),
        tuple(x.end - y.start for x, y in pairs),
        tuple(x.end - y.end for x, y in pairs),
    )


def fit_apkm(a1: Action, a2: Action, diffs: KeypointDifferenceSets,
             fit: FitConfig | None = None) -> ActionPairKeypointModel:
    fit = fit or FitConfig()
    mixtures = [fit.fit(np.asarray(diffs.channel(name))) for name in CHANNELS]
    return ActionPairKeypointModel(a1, a2, *mixtures, pair_count=len(diffs))


def build_apkm(demos: Iterable[Demonstration], a1: Action, a2: Action, seed: int = 0,
               fit: FitConfig | None = None) -> ActionPairKeypointModel:
    pairs = collect_pairs(demos, a1, a2)
    if not pairs:
        raise NoCooccurrence(f"{a1} and {a2} never co-occur")
    fit = fit or FitConfig(seed=seed)
    return fit_apkm(a1, a2, build_differences(pairs), fit)


def task_actions(demos: Iterable[Demonstration]) -> list[Action]:
    found = set()
    for demo in demos:
        found |= demo.actions()
    return sorted(found)


def _index(demo: Demonstration) -> dict[Action, list[tuple[str, int, float, float]]]:
    out: dict[Action, list] = {}
    for i, (hand, obs) in enumerate(demo.observations()):
        out.setdefault(obs.action, []).append((hand, i, obs.start, obs.end))
    return out


def build_all(demos: Sequence[Demonstration], seed: int = 0, fit: FitConfig | None = None,
              canonical_only: bool = False) -> dict[tuple[Action, Action], ActionPairKeypointModel]:
    """APKMs for every co-occurring ordered action pair.

    With ``canonical_only`` only pairs with ``first <= second`` are built; the
    reverse orientation carries the same information mirrored.
    """
    fit = fit or FitConfig(seed=seed)
    pairs: dict[tuple[Action, Action], list] = {}
    for demo in demos:
        index = _index(demo)
        for a1, firsts in index.items():
            for a2, seconds in index.items():
                if canonical_only and a2 < a1:
                    continue
                bucket = pairs.setdefault((a1, a2), [])
                same = a1 == a2
                for h1, i1, x0, x1 in firsts:
                    for h2, i2, y0, y1 in seconds:
                        if i1 == i2 or (same and h1 == h2):
                            continue
                        bucket.append((x0, x1, y0, y1))
    out = {}
    for key, found in sorted(pairs.items()):
        if not found:
            continue
        x0, x1, y0, y1 = np.array(found).T
        mixtures = [fit.fit(np.ascontiguousarray(d)) for d in (x0 - y0, x0 - y1, x1 - y0, x1 - y1)]
        out[key] = ActionPairKeypointModel(key[0], key[1], *mixtures, pair_count=len(found))
    return out
