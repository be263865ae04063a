"""Template-driven synthetic demonstrations with known ground-truth constraints."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .solver import SttcSet
from .temporal import (
    Action,
    ActionObservation,
    AllenRelation,
    Demonstration,
    TimeInterval,
    classify_interval,
    validate_demonstration,
)

HANDS = ("left", "right")


class ConfigError(ValueError):
    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


class RejectionLimitExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class TemplateEntry:
    action: Action
    hand: str
    start: float
    duration: float

    @property
    def end(self) -> float:
        return self.start + self.duration

    @property
    def interval(self) -> TimeInterval:
        return TimeInterval(self.start, self.end)


@dataclass(frozen=True)
class ModeTemplate:
    name: str
    entries: tuple[TemplateEntry, ...]

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))

    def hand(self, hand: str) -> list[TemplateEntry]:
        return sorted((e for e in self.entries if e.hand == hand), key=lambda e: e.start)

    def actions(self) -> set[Action]:
        return {e.action for e in self.entries}

    def check(self, epsilon: float) -> None:
        for e in self.entries:
            if e.hand not in HANDS:
                raise ConfigError(f"modes[{self.name}].hand", f"unknown hand {e.hand!r}")
            if not e.duration > 2 * epsilon:
                raise ConfigError(f"modes[{self.name}].duration",
                                  f"{e.action} lasts {e.duration}, needs more than {2 * epsilon}")
        for hand in HANDS:
            seq = self.hand(hand)
            for prev, nxt in zip(seq, seq[1:]):
                if nxt.start < prev.end:
                    raise ConfigError(f"modes[{self.name}].start",
                                      f"{prev.action} and {nxt.action} overlap on the {hand} hand")

    def to_dict(self) -> dict:
        return {"name": self.name,
                "entries": [{"verb": e.action.verb, "object": e.action.object, "hand": e.hand,
                             "start": e.start, "duration": e.duration} for e in self.entries]}

    @classmethod
    def from_dict(cls, data: dict) -> "ModeTemplate":
        entries = tuple(TemplateEntry(Action(e["verb"], e["object"]), e["hand"], float(e["start"]),
                                      float(e["duration"])) for e in data["entries"])
        return cls(str(data["name"]), entries)


@dataclass(frozen=True)
class GeneratorConfig:
    modes: tuple[ModeTemplate, ...]
    mode_weights: tuple[float, ...]
    jitter_sigma: float = 0.02
    n_demos: int = 60
    seed: int = 0
    epsilon: float = 0.1
    task: str = "synthetic"
    max_attempts: int = 1000

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(self.modes))
        object.__setattr__(self, "mode_weights", tuple(float(w) for w in self.mode_weights))
        self.validate()

    def validate(self) -> None:
        if not self.modes:
            raise ConfigError("modes", "at least one mode is required")
        if len(self.mode_weights) != len(self.modes):
            raise ConfigError("mode_weights", f"expected {len(self.modes)} weights, got {len(self.mode_weights)}")
        if any(w < 0 for w in self.mode_weights) or abs(sum(self.mode_weights) - 1.0) > 1e-9:
            raise ConfigError("mode_weights", f"weights must be non-negative and sum to 1, got {self.mode_weights}")
        if not self.jitter_sigma >= 0:
            raise ConfigError("jitter_sigma", "must be non-negative")
        if self.max_attempts < 1:
            raise ConfigError("max_attempts", "must be at least 1")
        if self.n_demos < 1:
            raise ConfigError("n_demos", "must be at least 1")
        if not self.epsilon > 0:
            raise ConfigError("epsilon", "must be positive")
        for mode in self.modes:
            mode.check(self.epsilon)

    def to_dict(self) -> dict:
        return {"task": self.task, "modes": [m.to_dict() for m in self.modes],
                "mode_weights": list(self.mode_weights), "jitter_sigma": self.jitter_sigma,
                "n_demos": self.n_demos, "seed": self.seed, "epsilon": self.epsilon,
                "max_attempts": self.max_attempts}

    @classmethod
    def from_dict(cls, data: dict) -> "GeneratorConfig":
        try:
            modes = tuple(ModeTemplate.from_dict(m) for m in data["modes"])
        except KeyError as exc:
            raise ConfigError("modes", f"missing key {exc}") from None
        except (TypeError, ValueError) as exc:
            raise ConfigError("modes", str(exc)) from None
        if "mode_weights" not in data:
            raise ConfigError("mode_weights", "missing")
        return cls(modes=modes, mode_weights=tuple(data["mode_weights"]),
                   jitter_sigma=float(data.get("jitter_sigma", 0.02)), n_demos=int(data.get("n_demos", 60)),
                   seed=int(data.get("seed", 0)), epsilon=float(data.get("epsilon", 0.1)),
                   task=str(data.get("task", "synthetic")), max_attempts=int(data.get("max_attempts", 1000)))


def derive_ground_truth(modes, epsilon: float = 0.1) -> SttcSet:
    """Relations that hold identically in every mode and for every instance pair."""
    modes = list(modes)
    truth = SttcSet()
    if not modes:
        return truth
    shared = set.intersection(*(m.actions() for m in modes))
    for a, b in itertools.combinations(sorted(shared), 2):
        seen = set()
        for mode in modes:
            xs = [e.interval for e in mode.entries if e.action == a]
            ys = [e.interval for e in mode.entries if e.action == b]
            seen.update(classify_interval(x, y, epsilon) for x in xs for y in ys)
            if len(seen) > 1:
                break
        if len(seen) == 1:
            truth.assignments[(a, b)] = seen.pop()
            truth.memberships[(a, b)] = 1.0
    return truth


def sample_demo(config: GeneratorConfig, mode: ModeTemplate, rng: np.random.Generator,
                demo_id: str = "demo") -> Demonstration:
    """Jitter every keypoint of ``mode``; redraw the whole demo until it is valid."""
    sigma = config.jitter_sigma
    seqs = {hand: mode.hand(hand) for hand in HANDS}
    for _ in range(config.max_attempts):
        hands = {}
        for hand in HANDS:
            obs = []
            for e in seqs[hand]:
                if sigma > 0:
                    ds, de = rng.normal(0.0, sigma, size=2)
                else:
                    ds = de = 0.0
                obs.append(ActionObservation(e.action, e.start + float(ds), e.end + float(de)))
            hands[hand] = tuple(obs)
        demo = Demonstration(demo_id, hands["left"], hands["right"])
        if not validate_demonstration(demo):
            return demo
    raise RejectionLimitExceeded(f"mode {mode.name}: no valid demo in {config.max_attempts} attempts "
                                 f"(jitter {sigma} too large for the template spacing)")


def generate(config: GeneratorConfig) -> tuple[list[Demonstration], SttcSet]:
    rng = np.random.default_rng(config.seed)
    weights = np.asarray(config.mode_weights)
    demos = []
    width = max(4, int(math.log10(config.n_demos)) + 1)
    for i in range(config.n_demos):
        mode = config.modes[int(rng.choice(len(config.modes), p=weights))]
        demos.append(sample_demo(config, mode, rng, f"demo{i:0{width}d}-{mode.name}"))
    return demos, derive_ground_truth(config.modes, config.epsilon)


def demo_mode(demo: Demonstration) -> str:
    """Mode name encoded in ids produced by :func:`generate`."""
    return demo.id.rsplit("-", 1)[-1]


def _mode(name, rows) -> ModeTemplate:
    return ModeTemplate(name, tuple(TemplateEntry(Action.parse(a), hand, s, e - s) for a, hand, s, e in rows))


def motor_task_config(n_demos: int = 60, seed: int = 0, jitter_sigma: float = 0.02,
                      epsilon: float = 0.1) -> GeneratorConfig:
    """Eight-action motor disassembly with two execution modes.

    The modes differ quantitatively everywhere and qualitatively only in
    where ``clean:rotor`` happens: once right after the inspection in mode
    ``a``, and once before and once after it in mode ``b``.
    """
    mode_a = _mode("a", [
        ("grasp:motor", "left", 0.0, 1.0),
        ("hold:motor", "left", 1.0, 9.0),
        ("place:motor", "left", 9.5, 10.5),
        ("grasp:screwdriver", "right", 0.6, 1.6),
        ("unscrew:screw", "right", 2.0, 4.5),
        ("remove:cover", "right", 5.0, 6.8),
        ("inspect:rotor", "right", 7.3, 7.9),
        ("clean:rotor", "right", 7.9, 8.5),
    ])
    mode_b = _mode("b", [
        ("grasp:motor", "left", 0.0, 1.2),
        ("hold:motor", "left", 1.2, 9.2),
        ("place:motor", "left", 9.6, 10.6),
        ("grasp:screwdriver", "right", 0.7, 1.8),
        ("unscrew:screw", "right", 2.3, 4.4),
        ("remove:cover", "right", 4.8, 6.2),
        ("clean:rotor", "right", 6.6, 7.1),
        ("inspect:rotor", "right", 7.5, 8.0),
        ("clean:rotor", "right", 8.4, 8.8),
    ])
    return GeneratorConfig((mode_a, mode_b), (0.5, 0.5), jitter_sigma=jitter_sigma, n_demos=n_demos,
                           seed=seed, epsilon=epsilon, task="motor-disassembly")


def pouring_task_config(n_demos: int = 20, seed: int = 0, jitter_sigma: float = 0.02,
                        epsilon: float = 0.1) -> GeneratorConfig:
    """Hold the cup while pouring milk: pouring leads by 0.5 s and lags by 0.5 s."""
    mode = _mode("pour", [
        ("grasp:cup", "left", 0.0, 1.0),
        ("hold:cup", "left", 2.0, 7.0),
        ("pour:milk", "right", 1.5, 7.5),
    ])
    return GeneratorConfig((mode,), (1.0,), jitter_sigma=jitter_sigma, n_demos=n_demos, seed=seed,
                           epsilon=epsilon, task="pouring")


# one interval pair per base relation, every unequal keypoint gap at least 1 s
_BASE_TEMPLATES = {
    AllenRelation.BEFORE: ((0.0, 1.0), (2.0, 3.0)),
    AllenRelation.MEETS: ((0.0, 1.0), (1.0, 2.0)),
    AllenRelation.OVERLAPS: ((0.0, 2.0), (1.0, 3.0)),
    AllenRelation.STARTS: ((0.0, 1.0), (0.0, 2.0)),
    AllenRelation.DURING: ((1.0, 2.0), (0.0, 3.0)),
    AllenRelation.FINISHES: ((1.0, 2.0), (0.0, 2.0)),
    AllenRelation.EQUALS: ((0.0, 1.0), (0.0, 1.0)),
}


def relation_template(relation: AllenRelation) -> tuple[tuple[float, float], tuple[float, float]]:
    """Nominal ``(x, y)`` intervals standing in ``relation``."""
    if relation in _BASE_TEMPLATES:
        return _BASE_TEMPLATES[relation]
    x, y = _BASE_TEMPLATES[relation.invert()]
    return y, x


def relation_task_config(relation: AllenRelation, n_demos: int = 50, seed: int = 0,
                         jitter_sigma: float = 0.02, epsilon: float = 0.1) -> GeneratorConfig:
    """``first:x`` on the left hand and ``second:y`` on the right, standing in ``relation``."""
    (x0, x1), (y0, y1) = relation_template(relation)
    mode = _mode(relation.value, [("first:x", "left", x0, x1), ("second:y", "right", y0, y1)])
    return GeneratorConfig((mode,), (1.0,), jitter_sigma=jitter_sigma, n_demos=n_demos, seed=seed,
                           epsilon=epsilon, task=f"{relation.value}-pair")


PRESETS = {"motor": motor_task_config, "pouring": pouring_task_config}
