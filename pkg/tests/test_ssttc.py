import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ttcl.apkm import ActionPairKeypointModel, build_apkm
from ttcl.mixture import GaussianComponent, GaussianMixture
from ttcl.ssttc import (
    CONTAINMENT_FAMILY,
    InfeasibleDurations,
    NoSuitableComponent,
    Ssttc,
    UnsupportedRelation,
    extract_ssttcs,
    necessary_channels,
    plan_bimanual,
)
from ttcl.synth import GeneratorConfig, ModeTemplate, TemplateEntry, generate, relation_task_config
from ttcl.temporal import (
    CHANNELS,
    RELATIONS,
    Action,
    AllenRelation as R,
    PointRelation as P,
    classify_interval,
    signature_of,
)

FIRST, SECOND = Action.parse("first:x"), Action.parse("second:y")
EPS = 0.1


def mixture(*parts):
    return GaussianMixture(tuple(GaussianComponent(w, m, v) for w, m, v in parts))


def apkm(**channels):
    flat = mixture((1.0, -3.0, 0.01))
    return ActionPairKeypointModel(FIRST, SECOND, *(channels.get(c, flat) for c in CHANNELS), pair_count=10)


def test_necessary_channel_examples():
    assert [c for c, _ in necessary_channels(R.DURING)] == ["ss", "ee"]
    assert necessary_channels(R.BEFORE) == (("es", P.BEFORE),)
    assert necessary_channels(R.MEETS) == (("es", P.EQUALS),)


@pytest.mark.parametrize("relation", RELATIONS, ids=lambda r: r.value)
def test_necessary_channels_single_out_the_relation(relation):
    conds = necessary_channels(relation)
    idx = {c: i for i, c in enumerate(CHANNELS)}
    hits = [r for r in RELATIONS if all(signature_of(r)[idx[c]] is req for c, req in conds)]
    assert hits == [relation]
    # no smaller condition set would do
    for drop in range(len(conds)):
        rest = conds[:drop] + conds[drop + 1:]
        if rest:
            assert len([r for r in RELATIONS if all(signature_of(r)[idx[c]] is req for c, req in rest)]) > 1


def test_extract_heaviest_suitable_component():
    ss = mixture((0.3, -2.0, 0.01), (0.7, 0.5, 0.01))
    ee = mixture((1.0, -0.5, 0.01))
    got = extract_ssttcs(apkm(ss=ss, ee=ee), R.DURING)
    assert [(s.channel, s.mean, s.weight) for s in got] == [("ss", 0.5, 0.7), ("ee", -0.5, 1.0)]


def test_extract_without_suitable_component():
    with pytest.raises(NoSuitableComponent) as info:
        extract_ssttcs(apkm(es=mixture((0.5, 1.0, 0.01), (0.5, 2.0, 0.01))), R.BEFORE)
    assert info.value.channel == "es"


def test_extract_equals():
    zero = mixture((1.0, 0.0, 0.001))
    got = extract_ssttcs(apkm(ss=zero, ee=zero), R.EQUALS)
    assert [(s.channel, s.mean) for s in got] == [("ss", 0.0), ("ee", 0.0)]


@pytest.mark.parametrize("relation", RELATIONS, ids=lambda r: r.value)
def test_extracted_components_exist_in_source(relation):
    demos, _ = generate(relation_task_config(relation, n_demos=30, seed=4))
    m = build_apkm(demos, FIRST, SECOND)
    got = extract_ssttcs(m, relation)
    assert [s.channel for s in got] == [c for c, _ in necessary_channels(relation)]
    for s in got:
        assert GaussianComponent(s.weight, s.mean, s.variance) in m.channel(s.channel).components
    full = extract_ssttcs(m, relation, all_channels=True)
    assert len(full) == 4 and {s.channel for s in got} <= {s.channel for s in full}


def ssttcs_for(relation, d_start, d_end):
    """ss/ee constraints for (FIRST, SECOND) with offsets signed as the relation implies."""
    sig = signature_of(relation)
    sign = {P.BEFORE: -1.0, P.AFTER: 1.0, P.EQUALS: 1.0}
    return [Ssttc((FIRST, SECOND), "ss", sign[sig.ss] * d_start, 1e-4, 1.0),
            Ssttc((FIRST, SECOND), "ee", sign[sig.ee] * d_end, 1e-4, 1.0)]


def grid_oracle(relation, d_start, d_end, durations, step, eps=EPS):
    """Smallest objective over a (t_first, t_second) grid, constraints closed."""
    sig = signature_of(relation)
    contained_first = relation in (R.DURING, R.STARTS, R.FINISHES)
    gap = d_start + d_end
    t_first, t_second = durations
    top = max(durations) + gap + 2.0
    axis = np.arange(0.0, top + step / 2, step)
    best = np.inf
    for a in axis:  # duration of FIRST
        b = axis  # durations of SECOND
        if contained_first:
            x0, x1, y0, y1 = d_start, d_start + a, 0.0, b
        else:
            x0, x1, y0, y1 = 0.0, a, d_start, d_start + b
        ok = (a >= 2 * eps - 1e-12) & (b >= 2 * eps - 1e-12)
        for d, req in zip((x0 - y0, x0 - y1, x1 - y0, x1 - y1), sig):
            d = np.asarray(d) + np.zeros_like(b)
            if req is P.BEFORE:
                ok &= d <= -eps + 1e-12
            elif req is P.AFTER:
                ok &= d >= eps - 1e-12
            else:
                ok &= np.abs(d) <= eps + 1e-12
        if not ok.any():
            continue
        t_m, t_c = (b, a) if contained_first else (a, b)
        t_M, t_C = (t_second, t_first) if contained_first else (t_first, t_second)
        j = np.abs(np.abs(t_m - t_c) - gap) + np.abs(t_m - t_M) + np.abs(t_c - t_C)
        best = min(best, float(j[ok].min()))
    return best


def check_plan(plan, relation):
    first, second = plan.entries
    assert (first.action, second.action) == (FIRST, SECOND)
    assert classify_interval(first.interval, second.interval, EPS) is relation


def test_showcase_plan():
    plan = plan_bimanual(R.CONTAINS, ssttcs_for(R.CONTAINS, 0.5, 0.5), (6.0, 5.0))
    pour, hold = plan.entries
    assert (pour.start, pour.duration) == (0.0, 6.0)
    assert (hold.start, hold.duration) == (0.5, 5.0)
    assert hold.start + hold.duration == 5.5
    assert plan.objective_value == pytest.approx(0.0, abs=1e-12)
    check_plan(plan, R.CONTAINS)


def test_breakpoint_plan_matches_fine_grid():
    plan = plan_bimanual(R.CONTAINS, ssttcs_for(R.CONTAINS, 0.5, 0.5), (6.0, 5.5), slack=1e-9)
    assert plan.objective_value == pytest.approx(0.5, abs=1e-6)
    assert plan.objective_value == pytest.approx(
        grid_oracle(R.CONTAINS, 0.5, 0.5, (6.0, 5.5), step=1e-3), abs=1e-6)
    check_plan(plan, R.CONTAINS)


def test_equals_plan():
    plan = plan_bimanual(R.EQUALS, ssttcs_for(R.EQUALS, 0.0, 0.0), (3.0, 3.0))
    a, b = plan.entries
    assert (a.start, a.duration, b.start, b.duration) == (0.0, 3.0, 0.0, 3.0)
    assert plan.objective_value == 0.0


def test_unsupported_and_infeasible():
    with pytest.raises(UnsupportedRelation):
        plan_bimanual(R.BEFORE, ssttcs_for(R.BEFORE, 1.0, 1.0), (1.0, 1.0))
    with pytest.raises(InfeasibleDurations):
        plan_bimanual(R.DURING, ssttcs_for(R.DURING, 0.5, 0.5)[:1], (1.0, 2.0))
    with pytest.raises(InfeasibleDurations):
        plan_bimanual(R.DURING, ssttcs_for(R.DURING, 0.05, 0.5), (1.0, 2.0))


cents = st.integers(30, 600).map(lambda c: c / 100)


@st.composite
def plan_inputs(draw):
    relation = draw(st.sampled_from(sorted(CONTAINMENT_FAMILY, key=lambda r: r.index)))
    inner = signature_of(CONTAINMENT_FAMILY[relation])
    offset = lambda req: draw(st.integers(11, 150) if req is P.AFTER or req is P.BEFORE  # noqa: E731
                              else st.integers(0, 10)) / 100
    return relation, offset(inner.ss), offset(inner.ee), (draw(cents), draw(cents))


@given(plan_inputs())
@settings(max_examples=40, deadline=None)
def test_plan_matches_grid_oracle(args):
    relation, d_start, d_end, durations = args
    plan = plan_bimanual(relation, ssttcs_for(relation, d_start, d_end), durations, slack=1e-9)
    check_plan(plan, relation)
    assert plan.objective_value == pytest.approx(grid_oracle(relation, d_start, d_end, durations, 0.01), abs=1e-6)


def test_plan_round_trip_through_learning():
    # demonstrations shaped like a plan; learned offsets land within 3 sigma/sqrt(n) of the template
    sigma, n = 0.02, 40
    mode = ModeTemplate("m", (TemplateEntry(FIRST, "left", 0.0, 6.0), TemplateEntry(SECOND, "right", 0.7, 4.9)))
    demos, _ = generate(GeneratorConfig((mode,), (1.0,), jitter_sigma=sigma, n_demos=n, seed=3))
    got = {s.channel: s.mean for s in extract_ssttcs(build_apkm(demos, FIRST, SECOND), R.CONTAINS)}
    bound = 3 * sigma * np.sqrt(2) / np.sqrt(n)
    assert abs(got["ss"] + 0.7) <= bound
    assert abs(got["ee"] - 0.4) <= bound


def test_mirrored_ssttc():
    s = Ssttc((FIRST, SECOND), "se", -1.0, 0.1, 0.5)
    m = s.mirrored()
    assert (m.pair, m.channel, m.mean) == ((SECOND, FIRST), "es", 1.0)
