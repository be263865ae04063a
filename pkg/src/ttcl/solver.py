"""Contradiction-free assignment of Allen relations to action pairs."""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Hashable, Mapping

from .fuzzy import FuzzyAllenProfile
from .temporal import (
    FULL_MASK,
    Action,
    AllenRelation,
    compose_mask,
    from_mask,
    invert_mask,
)


@dataclass(frozen=True)
class SolverConfig:
    theta: float = 0.5
    allow_fallback: bool = True

    def __post_init__(self):
        if not 0.0 <= self.theta <= 1.0:
            raise ValueError(f"theta must lie in [0, 1], got {self.theta}")


@dataclass(frozen=True)
class SttcCandidate:
    pair: tuple[Action, Action]
    relation: AllenRelation
    membership: float


@dataclass
class SttcSet:
    """Assigned relations keyed by canonical pair ``(a, b)`` with ``a < b``.

    ``symmetric`` holds actions judged bimanual-symmetric (same action on both
    hands at the same time); they are kept out of the relation network.
    """

    assignments: dict[tuple[Action, Action], AllenRelation] = field(default_factory=dict)
    memberships: dict[tuple[Action, Action], float] = field(default_factory=dict)
    symmetric: dict[Action, float] = field(default_factory=dict)

    def relation(self, a1: Action, a2: Action) -> AllenRelation | None:
        if (a1, a2) in self.assignments:
            return self.assignments[(a1, a2)]
        if (a2, a1) in self.assignments:
            return self.assignments[(a2, a1)].invert()
        return None

    def network(self) -> dict[tuple[Action, Action], frozenset[AllenRelation]]:
        return {pair: frozenset([r]) for pair, r in self.assignments.items()}

    def __eq__(self, other) -> bool:
        if not isinstance(other, SttcSet):
            return NotImplemented
        return self.assignments == other.assignments and set(self.symmetric) == set(other.symmetric)

    def to_dict(self) -> dict:
        constraints = []
        for (a, b) in sorted(self.assignments):
            constraints.append({
                "a": {"verb": a.verb, "object": a.object},
                "b": {"verb": b.verb, "object": b.object},
                "relation": self.assignments[(a, b)].value,
                "membership": self.memberships.get((a, b), 1.0),
            })
        symmetric = [{"action": {"verb": a.verb, "object": a.object}, "membership": m}
                     for a, m in sorted(self.symmetric.items())]
        return {"constraints": constraints, "symmetric": symmetric}

    @classmethod
    def from_dict(cls, data: dict) -> "SttcSet":
        out = cls()
        for c in data.get("constraints", []):
            a = Action(c["a"]["verb"], c["a"]["object"])
            b = Action(c["b"]["verb"], c["b"]["object"])
            rel = AllenRelation(c["relation"])
            if b < a:
                a, b, rel = b, a, rel.invert()
            out.assignments[(a, b)] = rel
            out.memberships[(a, b)] = float(c.get("membership", 1.0))
        for s in data.get("symmetric", []):
            out.symmetric[Action(s["action"]["verb"], s["action"]["object"])] = float(s["membership"])
        return out


class _MaskNetwork:
    """Dense n x n matrix of relation masks kept closed under inversion."""

    def __init__(self, nodes):
        self.nodes = list(nodes)
        self.index = {v: i for i, v in enumerate(self.nodes)}
        n = len(self.nodes)
        self.m = [[FULL_MASK] * n for _ in range(n)]
        eq = AllenRelation.EQUALS.bit
        for i in range(n):
            self.m[i][i] = eq

    def copy(self) -> "_MaskNetwork":
        out = _MaskNetwork.__new__(_MaskNetwork)
        out.nodes = self.nodes
        out.index = self.index
        out.m = [row[:] for row in self.m]
        return out

    def restrict(self, i: int, j: int, mask: int) -> bool:
        new = self.m[i][j] & mask
        if new == self.m[i][j]:
            return False
        self.m[i][j] = new
        self.m[j][i] = invert_mask(new)
        return True

    def propagate(self, queue) -> bool:
        """Path consistency from the edges in ``queue``; False on an empty domain."""
        m = self.m
        n = len(self.nodes)
        queue = deque(queue)
        pending = set(queue)
        for i, j in queue:
            if m[i][j] == 0:
                return False
        while queue:
            i, j = queue.popleft()
            pending.discard((i, j))
            rij = m[i][j]
            for k in range(n):
                if k == i or k == j:
                    continue
                # tighten (i, k) through j
                cand = compose_mask(rij, m[j][k])
                if m[i][k] & cand != m[i][k]:
                    new = m[i][k] & cand
                    if new == 0:
                        return False
                    m[i][k] = new
                    m[k][i] = invert_mask(new)
                    if (i, k) not in pending:
                        queue.append((i, k))
                        pending.add((i, k))
                # tighten (k, j) through i
                cand = compose_mask(m[k][i], rij)
                if m[k][j] & cand != m[k][j]:
                    new = m[k][j] & cand
                    if new == 0:
                        return False
                    m[k][j] = new
                    m[j][k] = invert_mask(new)
                    if (k, j) not in pending:
                        queue.append((k, j))
                        pending.add((k, j))
        return True


def path_consistency(network: Mapping[tuple[Hashable, Hashable], frozenset[AllenRelation] | set],
                     nodes=None) -> dict | None:
    """Reduce a qualitative network to its path-consistent closure.

    Keys are ordered node pairs; a pair given in both orientations is
    intersected. Returns ``{(u, v): relations}`` for every pair ``u`` before
    ``v`` in node order, or ``None`` when some domain becomes empty.
    """
    all_nodes = set(nodes or ())
    for u, v in network:
        all_nodes.update((u, v))
    ordered = sorted(all_nodes)
    net = _MaskNetwork(ordered)
    touched = []
    for (u, v), rels in network.items():
        mask = 0
        for r in rels:
            mask |= r.bit
        i, j = net.index[u], net.index[v]
        if i == j:
            if not mask & AllenRelation.EQUALS.bit:
                return None
            continue
        net.restrict(i, j, mask)
        touched.append((i, j))
    if not net.propagate(touched):
        return None
    return {(ordered[i], ordered[j]): from_mask(net.m[i][j])
            for i, j in itertools.combinations(range(len(ordered)), 2)}


def is_consistent(network, nodes=None) -> bool:
    return path_consistency(network, nodes) is not None


def canonical_profiles(profiles: Mapping[tuple[Action, Action], FuzzyAllenProfile]):
    """Split into canonically oriented pair profiles and self-pair profiles."""
    pairs: dict[tuple[Action, Action], FuzzyAllenProfile] = {}
    selves: dict[Action, FuzzyAllenProfile] = {}
    for (a1, a2), prof in profiles.items():
        if a1 == a2:
            selves[a1] = prof
        elif a1 < a2:
            pairs[(a1, a2)] = prof
        else:
            pairs.setdefault((a2, a1), prof.inverted())
    return pairs, selves


def infer_sttcs(profiles: Mapping[tuple[Action, Action], FuzzyAllenProfile],
                config: SolverConfig | None = None, nodes=None) -> SttcSet:
    """Greedy highest-membership-first assignment under path consistency."""
    config = config or SolverConfig()
    pairs, selves = canonical_profiles(profiles)
    result = SttcSet()
    for action, prof in sorted(selves.items()):
        m = prof[AllenRelation.EQUALS]
        if m >= config.theta:
            result.symmetric[action] = m

    all_nodes = set(nodes or ())
    for a, b in pairs:
        all_nodes.update((a, b))
    net = _MaskNetwork(sorted(all_nodes))

    candidates = []
    for pair, prof in pairs.items():
        ranked = [(r, m) for r, m in prof.ranked() if m >= config.theta]
        if ranked:
            candidates.append((pair, ranked))
    candidates.sort(key=lambda c: (-c[1][0][1], c[0]))

    for pair, ranked in candidates:
        options = ranked if config.allow_fallback else ranked[:1]
        i, j = net.index[pair[0]], net.index[pair[1]]
        for rel, m in options:
            if not net.m[i][j] & rel.bit:
                continue
            trial = net.copy()
            trial.restrict(i, j, rel.bit)
            if trial.propagate([(i, j)]):
                net = trial
                result.assignments[pair] = rel
                result.memberships[pair] = m
                break
    return result


def candidates_of(profiles, theta: float) -> list[SttcCandidate]:
    pairs, _ = canonical_profiles(profiles)
    return [SttcCandidate(pair, r, m) for pair, prof in sorted(pairs.items())
            for r, m in prof.ranked() if m >= theta]

