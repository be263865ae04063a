"""Learning-curve evaluation: incremental scenarios scored against ground truth."""

from __future__ import annotations

import io
import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .apkm import FitConfig, task_actions
from .fuzzy import FuzzyConfig
from .pipeline import infer
from .solver import SolverConfig, SttcSet
from .temporal import Action, Demonstration


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0

    @property
    def precision(self) -> float:
        return self.tp / (self.tp + self.fp) if self.tp + self.fp else 1.0

    @property
    def recall(self) -> float:
        return self.tp / (self.tp + self.fn) if self.tp + self.fn else 1.0


@dataclass(frozen=True)
class LearningCurvePoint:
    n_demos: int
    precision: float
    recall: float
    counts: ConfusionCounts = field(default=ConfusionCounts(), compare=False)


@dataclass(frozen=True)
class ScenarioConfig:
    n_scenarios: int = 20
    demos_per_scenario: int = 60
    seed: int = 0
    fuzzy: FuzzyConfig = FuzzyConfig()
    solver: SolverConfig = SolverConfig()
    # looser EM tolerance than the library default: only the selected model
    # matters here and overfit candidates otherwise run to max_iter
    fit: FitConfig = FitConfig(tol=1e-2)


@dataclass(frozen=True)
class CurveRow:
    n_demos: int
    mean_precision: float
    std_precision: float
    mean_recall: float
    std_recall: float


CSV_HEADER = "n_demos,mean_precision,std_precision,mean_recall,std_recall"


def universe_of(demos: Sequence[Demonstration]) -> list[tuple[Action, Action]]:
    return list(itertools.combinations(task_actions(demos), 2))


def compare(predicted: SttcSet, truth: SttcSet, universe) -> ConfusionCounts:
    """Score each unordered pair; a wrong relation counts as both fp and fn."""
    tp = fp = fn = tn = 0
    for a, b in universe:
        p = predicted.relation(a, b)
        t = truth.relation(a, b)
        if p is None and t is None:
            tn += 1
        elif t is None:
            fp += 1
        elif p is None:
            fn += 1
        elif p is t:
            tp += 1
        else:
            fp += 1
            fn += 1
    return ConfusionCounts(tp, fp, fn, tn)


def run_scenario(dataset: Sequence[Demonstration], truth: SttcSet, order: Sequence[int],
                 config: ScenarioConfig = ScenarioConfig(), universe=None) -> list[LearningCurvePoint]:
    """Add demonstrations in ``order`` one at a time and score after each addition."""
    if universe is None:
        universe = universe_of(dataset)
    points = []
    for k in range(1, len(order) + 1):
        prefix = [dataset[i] for i in order[:k]]
        _, _, predicted = infer(prefix, config.fuzzy, config.solver, config.fit)
        counts = compare(predicted, truth, universe)
        points.append(LearningCurvePoint(k, counts.precision, counts.recall, counts))
    return points


def scenario_order(n_dataset: int, config: ScenarioConfig, index: int) -> list[int]:
    rng = np.random.default_rng(config.seed + index)
    return [int(i) for i in rng.permutation(n_dataset)[:config.demos_per_scenario]]


def _run_one(args):
    dataset, truth, config, index, universe = args
    return run_scenario(dataset, truth, scenario_order(len(dataset), config, index), config, universe)


def run_all_scenarios(dataset: Sequence[Demonstration], truth: SttcSet, config: ScenarioConfig,
                      jobs: int = 1) -> list[list[LearningCurvePoint]]:
    if config.demos_per_scenario > len(dataset):
        raise ValueError(f"demos_per_scenario={config.demos_per_scenario} exceeds dataset size {len(dataset)}")
    universe = universe_of(dataset)
    tasks = [(list(dataset), truth, config, i, universe) for i in range(config.n_scenarios)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_run_one, tasks))
    return [_run_one(t) for t in tasks]


def aggregate(curves: Sequence[Sequence[LearningCurvePoint]]) -> list[CurveRow]:
    prec = np.array([[p.precision for p in c] for c in curves])
    rec = np.array([[p.recall for p in c] for c in curves])
    rows = []
    for k in range(prec.shape[1]):
        rows.append(CurveRow(curves[0][k].n_demos, float(prec[:, k].mean()), float(prec[:, k].std()),
                             float(rec[:, k].mean()), float(rec[:, k].std())))
    return rows


def run_scenarios(dataset: Sequence[Demonstration], truth: SttcSet, config: ScenarioConfig = ScenarioConfig(),
                  jobs: int = 1) -> list[CurveRow]:
    return aggregate(run_all_scenarios(dataset, truth, config, jobs))


def curve_csv(rows: Sequence[CurveRow]) -> str:
    buf = io.StringIO()
    buf.write(CSV_HEADER + "\n")
    for r in rows:
        buf.write(f"{r.n_demos},{r.mean_precision:.6f},{r.std_precision:.6f},"
                  f"{r.mean_recall:.6f},{r.std_recall:.6f}\n")
    return buf.getvalue()
