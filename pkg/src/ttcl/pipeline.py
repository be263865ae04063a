"""End-to-end learning: demonstrations -> APKMs -> fuzzy profiles -> STTCs -> SSTTCs."""

from __future__ import annotations

import logging
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from statistics import fmean
from typing import Sequence

from .apkm import ActionPairKeypointModel, FitConfig, build_all, pair_key, parse_pair_key
from .fuzzy import FuzzyAllenProfile, FuzzyConfig, fuzzy_allen
from .solver import SolverConfig, SttcSet, infer_sttcs
from .ssttc import NoSuitableComponent, Ssttc, extract_ssttcs
from .temporal import Action, AllenRelation, Demonstration

log = logging.getLogger(__name__)

FORMAT_VERSION = 1


@dataclass
class TaskModel:
    apkms: dict[tuple[Action, Action], ActionPairKeypointModel]
    profiles: dict[tuple[Action, Action], FuzzyAllenProfile]
    sttcs: SttcSet
    ssttcs: dict[tuple[Action, Action], list[Ssttc]] = field(default_factory=dict)
    durations: dict[Action, float] = field(default_factory=dict)
    hands: dict[Action, str] = field(default_factory=dict)
    epsilon: float = 0.1
    theta: float = 0.5
    seed: int = 0

    def profile(self, a1: Action, a2: Action) -> FuzzyAllenProfile | None:
        if (a1, a2) in self.profiles:
            return self.profiles[(a1, a2)]
        if (a2, a1) in self.profiles:
            return self.profiles[(a2, a1)].inverted()
        return None

    def apkm(self, a1: Action, a2: Action) -> ActionPairKeypointModel | None:
        return self.apkms.get((a1, a2)) or self.apkms.get((a2, a1))

    def constraints_for(self, a1: Action, a2: Action) -> tuple[AllenRelation, list[Ssttc]] | None:
        """The STTC and SSTTCs of a pair, oriented as asked."""
        if (a1, a2) in self.sttcs.assignments:
            return self.sttcs.assignments[(a1, a2)], list(self.ssttcs.get((a1, a2), []))
        if (a2, a1) in self.sttcs.assignments:
            rel = self.sttcs.assignments[(a2, a1)].invert()
            return rel, [s.mirrored() for s in self.ssttcs.get((a2, a1), [])]
        return None

    def to_dict(self) -> dict:
        return {
            "format": FORMAT_VERSION,
            "config": {"epsilon": self.epsilon, "theta": self.theta, "seed": self.seed},
            "durations": {a.key: d for a, d in sorted(self.durations.items())},
            "hands": {a.key: h for a, h in sorted(self.hands.items())},
            "apkms": {pair_key(*p): m.to_dict() for p, m in sorted(self.apkms.items())},
            "profiles": {pair_key(*p): prof.to_dict() for p, prof in sorted(self.profiles.items())},
            "sttcs": self.sttcs.to_dict(),
            "ssttcs": [
                {"pair": pair_key(*p), "relation": self.sttcs.assignments[p].value,
                 "constraints": [s.to_dict() for s in cons]}
                for p, cons in sorted(self.ssttcs.items())
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TaskModel":
        if data.get("format") != FORMAT_VERSION:
            raise ValueError(f"unsupported model format {data.get('format')!r}")
        cfg = data["config"]
        ssttcs = {}
        for entry in data["ssttcs"]:
            pair = parse_pair_key(entry["pair"])
            ssttcs[pair] = [Ssttc(pair, c["channel"], float(c["mean"]), float(c["var"]), float(c["weight"]))
                            for c in entry["constraints"]]
        return cls(
            apkms={parse_pair_key(k): ActionPairKeypointModel.from_dict(v) for k, v in data["apkms"].items()},
            profiles={parse_pair_key(k): FuzzyAllenProfile.from_dict(v) for k, v in data["profiles"].items()},
            sttcs=SttcSet.from_dict(data["sttcs"]),
            ssttcs=ssttcs,
            durations={Action.parse(k): float(v) for k, v in data["durations"].items()},
            hands={Action.parse(k): v for k, v in data["hands"].items()},
            epsilon=float(cfg["epsilon"]), theta=float(cfg["theta"]), seed=int(cfg["seed"]),
        )


def action_statistics(demos: Sequence[Demonstration]) -> tuple[dict[Action, float], dict[Action, str]]:
    """Mean duration and most frequent hand of every action."""
    durations = defaultdict(list)
    hands = defaultdict(Counter)
    for demo in demos:
        for hand, obs in demo.observations():
            durations[obs.action].append(obs.duration)
            hands[obs.action][hand] += 1
    mean = {a: fmean(v) for a, v in durations.items()}
    # ties go to the alphabetically first hand
    hand = {a: min(c.items(), key=lambda t: (-t[1], t[0]))[0] for a, c in hands.items()}
    return mean, hand


def infer(demos: Sequence[Demonstration], fuzzy: FuzzyConfig, solver: SolverConfig, fit: FitConfig):
    """APKMs, profiles and STTCs of ``demos`` (canonical pair orientation only)."""
    apkms = build_all(demos, fit=fit, canonical_only=True)
    profiles = {pair: fuzzy_allen(m, fuzzy) for pair, m in apkms.items()}
    nodes = {a for pair in apkms for a in pair}
    return apkms, profiles, infer_sttcs(profiles, solver, nodes=nodes)


def learn(demos: Sequence[Demonstration], fuzzy: FuzzyConfig | None = None, solver: SolverConfig | None = None,
          fit: FitConfig | None = None, all_channels: bool = False) -> TaskModel:
    fuzzy = fuzzy or FuzzyConfig()
    solver = solver or SolverConfig()
    fit = fit or FitConfig()
    apkms, profiles, sttcs = infer(demos, fuzzy, solver, fit)
    ssttcs = {}
    for pair, rel in sorted(sttcs.assignments.items()):
        try:
            ssttcs[pair] = extract_ssttcs(apkms[pair], rel, fuzzy.epsilon, all_channels=all_channels)
        except NoSuitableComponent as exc:
            log.warning("skipping SSTTCs for %s: %s", pair_key(*pair), exc)
    durations, hands = action_statistics(demos)
    return TaskModel(apkms, profiles, sttcs, ssttcs, durations, hands,
                     epsilon=fuzzy.epsilon, theta=solver.theta, seed=fit.seed)
