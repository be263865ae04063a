"""Subsymbolic constraints (Gaussian keypoint offsets) and two-action synchronisation."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

from .apkm import ActionPairKeypointModel
from .temporal import (
    CHANNELS,
    RELATIONS,
    Action,
    AllenRelation,
    PointRelation,
    TimeInterval,
    classify_interval,
    signature_of,
)

# the relations a two-action containment plan can realise, mapped to the
# relation of (contained, containing)
CONTAINMENT_FAMILY = {
    AllenRelation.DURING: AllenRelation.DURING,
    AllenRelation.STARTS: AllenRelation.STARTS,
    AllenRelation.FINISHES: AllenRelation.FINISHES,
    AllenRelation.EQUALS: AllenRelation.EQUALS,
    AllenRelation.CONTAINS: AllenRelation.DURING,
    AllenRelation.STARTED_BY: AllenRelation.STARTS,
    AllenRelation.FINISHED_BY: AllenRelation.FINISHES,
}
_FIRST_IS_CONTAINED = {AllenRelation.DURING, AllenRelation.STARTS, AllenRelation.FINISHES}

_MIRROR_CHANNEL = {"ss": "ss", "se": "es", "es": "se", "ee": "ee"}


class NoSuitableComponent(ValueError):
    def __init__(self, channel: str, message: str = ""):
        super().__init__(message or f"no component with the expected sign in channel {channel}")
        self.channel = channel


class InfeasibleDurations(ValueError):
    pass


class UnsupportedRelation(ValueError):
    pass


@dataclass(frozen=True)
class Ssttc:
    pair: tuple[Action, Action]
    channel: str
    mean: float
    variance: float
    weight: float

    def mirrored(self) -> "Ssttc":
        """The same constraint seen from the swapped pair."""
        return Ssttc((self.pair[1], self.pair[0]), _MIRROR_CHANNEL[self.channel], -self.mean,
                     self.variance, self.weight)

    def to_dict(self) -> dict:
        return {"channel": self.channel, "mean": self.mean, "var": self.variance, "weight": self.weight}


@dataclass(frozen=True)
class PlanEntry:
    action: Action
    hand: str
    start: float
    duration: float

    @property
    def interval(self) -> TimeInterval:
        return TimeInterval(self.start, self.start + self.duration)


@dataclass(frozen=True)
class TimelinePlan:
    entries: tuple[PlanEntry, ...]
    objective_value: float

    def to_dict(self) -> dict:
        return {
            "entries": [{"verb": e.action.verb, "object": e.action.object, "hand": e.hand,
                         "start": e.start, "duration": e.duration} for e in self.entries],
            "objective": self.objective_value,
        }


def _satisfies(sig, conditions) -> bool:
    return all(sig[CHANNELS.index(ch)] == req for ch, req in conditions)


@lru_cache(maxsize=None)
def necessary_channels(relation: AllenRelation) -> tuple[tuple[str, PointRelation], ...]:
    """Smallest set of keypoint conditions that singles out ``relation``.

    Subsets are searched by size, then in channel order, so the answer is
    deterministic.
    """
    sig = signature_of(relation)
    for size in range(1, len(CHANNELS) + 1):
        for chans in itertools.combinations(CHANNELS, size):
            conds = tuple((ch, sig[CHANNELS.index(ch)]) for ch in chans)
            matches = [r for r in RELATIONS if _satisfies(signature_of(r), conds)]
            if matches == [relation]:
                return conds
    raise AssertionError(f"signature of {relation} is not unique")


def _suits(mean: float, required: PointRelation, epsilon: float) -> bool:
    if required is PointRelation.BEFORE:
        return mean < -epsilon
    if required is PointRelation.AFTER:
        return mean > epsilon
    return abs(mean) <= epsilon


def extract_ssttcs(apkm: ActionPairKeypointModel, relation: AllenRelation, epsilon: float = 0.1,
                   all_channels: bool = False) -> list[Ssttc]:
    """Pick the heaviest component with the expected sign in each necessary channel.

    With ``all_channels`` the remaining channels are reported as well when a
    suitable component exists there; they never raise.
    """
    pair = (apkm.first, apkm.second)
    needed = necessary_channels(relation)
    wanted = list(needed)
    if all_channels:
        sig = signature_of(relation)
        have = {ch for ch, _ in needed}
        wanted += [(ch, req) for ch, req in zip(CHANNELS, sig) if ch not in have]
        wanted.sort(key=lambda t: CHANNELS.index(t[0]))
    necessary = {ch for ch, _ in needed}
    out = []
    for ch, req in wanted:
        comps = [c for c in apkm.channel(ch).components if _suits(c.mean, req, epsilon)]
        if not comps:
            if ch in necessary:
                raise NoSuitableComponent(ch, f"{apkm.key}: no {req.value} component in channel {ch} "
                                              f"for relation {relation.value}")
            continue
        # heaviest first; the smaller |mean| breaks exact weight ties
        best = max(comps, key=lambda c: (c.weight, -abs(c.mean)))
        out.append(Ssttc(pair, ch, best.mean, best.variance, best.weight))
    return out


def _objective(t_m: float, t_c: float, gap: float, t_M: float, t_C: float) -> float:
    return abs(abs(t_m - t_c) - gap) + abs(t_m - t_M) + abs(t_c - t_C)


def plan_bimanual(relation: AllenRelation, ssttcs, mean_durations: tuple[float, float],
                  epsilon: float = 0.1, hands: tuple[str, str] = ("left", "right"),
                  slack: float = 1e-6) -> TimelinePlan:
    """Choose durations for a containment-family pair and lay both actions out.

    ``relation``, ``ssttcs``, ``mean_durations`` and ``hands`` all refer to the
    pair in the same (first, second) order. The containing action starts at 0;
    the contained one starts at the learned start offset. Durations minimise

        | |t_m - t_c| - (d_start + d_end) | + |t_m - t_M| + |t_c - t_C|

    subject to the planned intervals classifying as ``relation`` under
    ``epsilon``. Every bound on the duration difference is tightened by
    ``slack``.
    """
    if relation not in CONTAINMENT_FAMILY:
        raise UnsupportedRelation(f"cannot plan relation {relation.value}")
    by_channel = {s.channel: s for s in ssttcs}
    if "ss" not in by_channel or "ee" not in by_channel:
        raise InfeasibleDurations("planning needs ss and ee constraints")
    first, second = by_channel["ss"].pair
    if any(s.pair != (first, second) for s in ssttcs):
        raise ValueError("all constraints must refer to the same ordered pair")
    d_start = abs(by_channel["ss"].mean)
    d_end = abs(by_channel["ee"].mean)
    gap = d_start + d_end

    if relation in _FIRST_IS_CONTAINED:
        (contained, containing), (hand_c, hand_m) = (first, second), hands
        t_C, t_M = mean_durations
    else:
        (containing, contained), (hand_m, hand_c) = (first, second), hands
        t_M, t_C = mean_durations
    if not (t_M > 0 and t_C > 0):
        raise InfeasibleDurations(f"mean durations must be positive, got {mean_durations}")

    inner = CONTAINMENT_FAMILY[relation]
    sig = signature_of(inner)  # contained vs containing
    start = d_start
    if sig.ss is PointRelation.AFTER and not start > epsilon:
        raise InfeasibleDurations(f"start offset {start} must exceed epsilon for {relation.value}")
    if sig.ss is PointRelation.EQUALS and not start <= epsilon:
        raise InfeasibleDurations(f"start offset {start} must be within epsilon for {relation.value}")

    # feasible set in (t_m, t_c): both durations > 2 eps and the end condition
    min_dur = 2 * epsilon + slack
    if sig.ee is PointRelation.BEFORE:
        diff_lo, diff_hi = start + epsilon + slack, float("inf")
    else:
        # closed bounds pulled in as well so rounding cannot tip the check
        diff_lo, diff_hi = start - epsilon + slack, start + epsilon - slack

    def feasible(t_m, t_c):
        tol = 1e-12
        d = t_m - t_c
        return t_m >= min_dur - tol and t_c >= min_dur - tol and diff_lo - tol <= d <= diff_hi + tol

    u_lines = [t_M, min_dur]
    v_lines = [t_C, min_dur]
    diag = [gap, -gap, 0.0, diff_lo] + ([diff_hi] if diff_hi != float("inf") else [])
    points = [(u, v) for u in u_lines for v in v_lines]
    points += [(u, u - c) for u in u_lines for c in diag]
    points += [(v + c, v) for v in v_lines for c in diag]
    best = None
    for t_m, t_c in points:
        if not feasible(t_m, t_c):
            continue
        j = _objective(t_m, t_c, gap, t_M, t_C)
        key = (round(j, 12), round(abs(t_m - t_M) + abs(t_c - t_C), 12), t_m, t_c)
        if best is None or key < best[0]:
            best = (key, t_m, t_c, j)
    if best is None:
        raise InfeasibleDurations(f"no positive durations realise {relation.value}")
    _, t_m, t_c, j = best

    entries = {
        containing: PlanEntry(containing, hand_m, 0.0, t_m),
        contained: PlanEntry(contained, hand_c, start, t_c),
    }
    plan = TimelinePlan((entries[first], entries[second]), j)
    got = classify_interval(plan.entries[0].interval, plan.entries[1].interval, epsilon)
    if got is not relation:
        raise InfeasibleDurations(f"planned intervals classify as {got.value}, not {relation.value}")
    return plan
