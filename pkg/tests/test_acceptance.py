"""Acceptance suite: one recorded verdict per criterion, each at its stated tolerance.

Run ``pytest tests/test_acceptance.py -v`` and read the "acceptance criteria"
section of the terminal summary, or add ``-s`` to see the lines as they happen.
"""

import itertools
import json
import math
import random
import time

import numpy as np
import pytest

from oracles import brute_force_best, brute_force_composition, quadrature_point
from ttcl import io
from ttcl.apkm import build_apkm
from ttcl.cli import main
from ttcl.evaluation import ScenarioConfig, aggregate, run_all_scenarios
from ttcl.fuzzy import FuzzyAllenProfile, fuzzy_allen, fuzzy_point
from ttcl.mixture import GaussianComponent, GaussianMixture, fit_best, fit_em
from ttcl.pipeline import TaskModel
from ttcl.solver import SolverConfig, infer_sttcs, is_consistent, path_consistency
from ttcl.synth import generate, motor_task_config, pouring_task_config, relation_task_config
from ttcl.temporal import (
    RELATIONS,
    Action,
    AllenRelation as R,
    TimeInterval,
    classify_interval,
    compose,
    invert,
    signature_of,
)


def cli(*args):
    return main([str(a) for a in args])


# 1 -------------------------------------------------------------------------


def test_allen_kernel(criterion):
    t0 = time.perf_counter()
    oracle = brute_force_composition()
    bad_cells = [(a, b) for a in RELATIONS for b in RELATIONS if set(compose(a, b)) != oracle[(a, b)]]
    involution = all(invert(invert(r)) is r for r in RELATIONS)
    distributive = all({invert(r) for r in compose(a, b)} == set(compose(invert(b), invert(a)))
                       for a, b in itertools.product(RELATIONS, RELATIONS))
    distinct = len({signature_of(r) for r in RELATIONS}) == 13
    rng = random.Random(0)
    seen, total = set(), True
    for _ in range(10_000):
        a, b = sorted(rng.sample(range(10), 2))
        c, d = sorted(rng.sample(range(10), 2))
        x, y = TimeInterval(a, b), TimeInterval(c, d)
        r = classify_interval(x, y)
        # exactly one relation: its signature matches and no other signature does
        total &= sum(signature_of(s) == signature_of(r) for s in RELATIONS) == 1
        total &= classify_interval(y, x) is invert(r)
        seen.add(r)
    elapsed = time.perf_counter() - t0
    ok = not bad_cells and involution and distributive and distinct and total and seen == set(RELATIONS) \
        and elapsed < 5.0
    criterion(1, "Allen kernel vs brute force, involution, distributivity, signatures", ok,
              f"{169 - len(bad_cells)}/169 cells, {len(seen)} relations seen, {elapsed:.2f}s")
    assert ok


# 2 -------------------------------------------------------------------------


def random_mixture(rng):
    k = int(rng.integers(1, 6))
    w = rng.uniform(0.05, 1.0, k)
    return GaussianMixture(tuple(GaussianComponent(wi / w.sum(), float(m), float(s) ** 2)
                                 for wi, m, s in zip(w, rng.uniform(-3, 3, k), rng.uniform(0.02, 1.5, k))))


def test_fuzzy_point_normalisation_and_quadrature(criterion):
    rng = np.random.default_rng(2)
    worst_sum = worst_quad = 0.0
    for _ in range(1000):
        m, eps = random_mixture(rng), float(rng.uniform(0.01, 1.0))
        p = fuzzy_point(m, eps)
        before, after = quadrature_point(m, eps)
        worst_sum = max(worst_sum, abs(p.before + p.equals + p.after - 1.0))
        worst_quad = max(worst_quad, abs(p.before - before), abs(p.after - after))
    ok = worst_sum <= 1e-9 and worst_quad <= 1e-6
    criterion(2, "point masses sum to 1 and match quadrature on 1000 mixtures", ok,
              f"max |sum-1|={worst_sum:.1e}, max quadrature gap={worst_quad:.1e}")
    assert ok


# 3 -------------------------------------------------------------------------


def test_single_relation_apkms(criterion):
    first, second = Action.parse("first:x"), Action.parse("second:y")
    t0 = time.perf_counter()
    misses = []
    lowest = 1.0
    for r in RELATIONS:
        demos, _ = generate(relation_task_config(r, n_demos=50, jitter_sigma=0.02, epsilon=0.1))
        profile = fuzzy_allen(build_apkm(demos, first, second))
        lowest = min(lowest, profile[r])
        if profile.argmax() is not r or profile[r] < 0.9:
            misses.append(f"{r.value}: argmax {profile.argmax().value} at {profile[r]:.3f}")
    elapsed = time.perf_counter() - t0
    ok = not misses and elapsed < 30.0
    criterion(3, "each of 13 relations is the argmax with membership >= 0.9", ok,
              f"lowest membership {lowest:.4f}, {elapsed:.1f}s" + (f"; {misses}" if misses else ""))
    assert ok


# 4 -------------------------------------------------------------------------


def random_profile(rng):
    m = {r: 0.0 for r in RELATIONS}
    for r in rng.sample(RELATIONS, rng.randint(1, 4)):
        m[r] = rng.random()
    return FuzzyAllenProfile(m)


def test_solver_consistency_and_cycle(criterion):
    rng = random.Random(11)
    nodes = [Action(f"n{i}", "x") for i in range(8)]
    failures = 0
    for _ in range(200):
        k = rng.randint(2, 8)
        pairs = [p for p in itertools.combinations(nodes[:k], 2) if rng.random() < 0.8]
        sttcs = infer_sttcs({p: random_profile(rng) for p in pairs}, SolverConfig(rng.choice([0.0, 0.3, 0.5])))
        net = sttcs.network()
        # the closure of a consistent singleton network leaves it unchanged
        closed = path_consistency(net)
        failures += not (is_consistent(net) and closed is not None
                         and all(closed[p] == s for p, s in net.items()))
    a, b, c = (Action(v, "x") for v in "abc")
    cycle = {(a, b): FuzzyAllenProfile({**dict.fromkeys(RELATIONS, 0.0), R.BEFORE: 0.9}),
             (b, c): FuzzyAllenProfile({**dict.fromkeys(RELATIONS, 0.0), R.BEFORE: 0.9}),
             (c, a): FuzzyAllenProfile({**dict.fromkeys(RELATIONS, 0.0), R.BEFORE: 0.8})}
    greedy = infer_sttcs(cycle, SolverConfig(0.5)).assignments
    best = {(min(p), max(p)): r if p[0] < p[1] else invert(r) for p, r in brute_force_best(cycle, 0.5).items()}
    ok = failures == 0 and greedy == best
    criterion(4, "200 random SttcSets path-consistent; 3-cycle greedy equals brute-force optimum", ok,
              f"{failures} inconsistent, greedy {sorted((str(u), str(v), r.value) for (u, v), r in greedy.items())}")
    assert ok


# 5, 6 ----------------------------------------------------------------------


@pytest.fixture(scope="module")
def motor_curves():
    demos, truth = generate(motor_task_config(n_demos=60, jitter_sigma=0.02, epsilon=0.1))
    config = ScenarioConfig(n_scenarios=20, demos_per_scenario=60)
    assert (config.fuzzy.epsilon, config.solver.theta) == (0.1, 0.5)
    t0 = time.perf_counter()
    curves = run_all_scenarios(demos, truth, config)
    return curves, time.perf_counter() - t0


def test_motor_learning_curve(criterion, motor_curves):
    curves, elapsed = motor_curves
    rows = aggregate(curves)
    prec = {r.n_demos: r.mean_precision for r in rows}
    min_recall = min(r.mean_recall for r in rows)
    # non-decreasing up to 0.02: no later k falls more than 0.02 below an earlier one
    worst_drop = max(prec[k] - prec[j] for k in range(5, 61) for j in range(k + 1, 61))
    checks = {
        "recall": min_recall == 1.0,
        "precision@40": prec[40] >= 0.95,
        "monotone": worst_drop <= 0.02,
        "runtime": elapsed < 120.0,
    }
    ok = all(checks.values())
    criterion(5, "motor learning curve: recall 1, precision@40 >= 0.95, monotone, < 2 min", ok,
              f"min recall {min_recall:.6f}, precision@5 {prec[5]:.4f}, @40 {prec[40]:.4f}, "
              f"@60 {prec[60]:.4f}, worst drop {worst_drop:.4f}, {elapsed:.1f}s"
              + ("" if ok else f", failed {[k for k, v in checks.items() if not v]}"))
    assert ok


def test_motor_exact_recovery(criterion, motor_curves):
    curves, _ = motor_curves
    exact = sum(c[-1].counts.fp == 0 and c[-1].counts.fn == 0 for c in curves)
    ok = exact >= 18
    criterion(6, "inferred SttcSet equals truth at k=60 in >= 18/20 scenarios", ok, f"{exact}/20")
    assert ok


# 7 -------------------------------------------------------------------------


POUR, HOLD = Action.parse("pour:milk"), Action.parse("hold:cup")


def pouring_showcase(tmp_path, jitter):
    demos, _ = generate(pouring_task_config(n_demos=20, jitter_sigma=jitter))
    io.save_demos(tmp_path / "demos.json", demos)
    assert cli("learn", "--demos", tmp_path / "demos.json", "--out", tmp_path / "model.json") == 0
    model = TaskModel.from_dict(io.read_json(tmp_path / "model.json"))
    relation, ssttcs = model.constraints_for(POUR, HOLD)
    means = {s.channel: s.mean for s in ssttcs}
    assert cli("plan", "--model", tmp_path / "model.json", "--pair", "pour:milk,hold:cup",
               "--durations", "6,5", "--out", tmp_path / "plan.json") == 0
    plan = json.loads((tmp_path / "plan.json").read_text())
    pour, hold = plan["entries"]
    span = lambda e: TimeInterval(e["start"], e["start"] + e["duration"])  # noqa: E731
    planned = classify_interval(span(pour), span(hold), model.epsilon)
    return len(demos), relation, means, pour["duration"], hold["duration"], plan["objective"], planned


def test_pouring_showcase(criterion, tmp_path):
    n, relation, means, t_m, t_c, objective, planned = pouring_showcase(tmp_path, 0.0)
    ok = (n == 20 and relation is R.CONTAINS and set(means) == {"ss", "ee"}
          and abs(means["ss"] + 0.5) <= 0.05 and abs(means["ee"] - 0.5) <= 0.05
          and math.isclose(t_m, 6.0, abs_tol=1e-9) and math.isclose(t_c, 5.0, abs_tol=1e-9)
          and abs(objective) <= 1e-6 and planned is relation)
    criterion(7, "pouring: ss/ee = -/+0.5, plan t_m=6 t_c=5 objective 0, plan classifies to the STTC", ok,
              f"{relation.value}, ss {means.get('ss', float('nan')):+.4f}, ee {means.get('ee', float('nan')):+.4f}, "
              f"t_m {t_m:.6f}, t_c {t_c:.6f}, objective {objective:.2e}, planned {planned.value}")
    assert ok

    # same pipeline on jittered demonstrations: reported, not gated
    tmp = tmp_path / "jittered"
    tmp.mkdir()
    _, relation, means, t_m, t_c, objective, planned = pouring_showcase(tmp, 0.02)
    floor = abs(1.0 - (abs(means["ss"]) + abs(means["ee"])))
    criterion("7*", "same showcase with jitter 0.02", None,
              f"{relation.value}, ss {means['ss']:+.4f}, ee {means['ee']:+.4f}, t_m {t_m:.6f}, t_c {t_c:.6f}, "
              f"objective {objective:.6f} vs floor |1-(d-+d+)| = {floor:.6f}, planned {planned.value}")


# 8 -------------------------------------------------------------------------


def test_model_selection(criterion):
    hits = 0
    for seed in range(100):
        rng = np.random.default_rng(seed)
        x = np.concatenate([rng.normal(-3.0, 0.3, 100), rng.normal(3.0, 0.3, 100)])
        hits += len(fit_best(x, seed=seed)) == 2
    rng = np.random.default_rng(8)
    over = 0
    for _ in range(300):
        n = int(rng.integers(1, 15))
        x = np.round(rng.normal(0, 5, n), int(rng.integers(0, 3)))  # rounding makes ties likely
        over += len(fit_best(x, seed=int(rng.integers(1 << 30)))) > n
    drops = 0
    for _ in range(200):
        n = int(rng.integers(3, 80))
        trace = []
        fit_em(rng.normal(0, 3, n) * rng.choice([0.1, 1, 10]), int(rng.integers(1, min(n, 6) + 1)),
               seed=int(rng.integers(1 << 30)), history=trace)
        drops += any(b < a - 1e-9 for a, b in zip(trace, trace[1:]))
    ok = hits >= 95 and over == 0 and drops == 0
    criterion(8, "BIC picks N=2 in >= 95/100 seeds, never exceeds n, EM LL monotone", ok,
              f"{hits}/100 seeds, {over} over-sized fits, {drops} non-monotone traces")
    assert ok


# 9 -------------------------------------------------------------------------


def test_cli_determinism(criterion, tmp_path):
    outputs = []
    for run in ("a", "b"):
        d = tmp_path / run
        d.mkdir()
        assert cli("generate", "--preset", "motor", "--seed", 4, "--out", d / "demos.json",
                   "--truth", d / "truth.json") == 0
        assert cli("learn", "--demos", d / "demos.json", "--out", d / "model.json") == 0
        assert cli("eval", "--demos", d / "demos.json", "--truth", d / "truth.json", "--scenarios", 3,
                   "--per-scenario", 12, "--seed", 2, "--out", d / "curve.csv") == 0
        outputs.append({f: (d / f).read_bytes() for f in ("demos.json", "truth.json", "model.json", "curve.csv")})
    differing = [f for f in outputs[0] if outputs[0][f] != outputs[1][f]]
    ok = not differing
    criterion(9, "generate, learn and eval are byte-identical across runs", ok,
              "4 files identical" if ok else f"differ: {differing}")
    assert ok
