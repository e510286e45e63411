import math

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from taip.hardness import (
    LN_HALF,
    MAX_COMPETENCE_HARDNESS,
    Aggregation,
    HardnessConfig,
    aggregate_program_hardness,
    competence_hardness,
    competence_hardness_from_coverages,
    entropy_term,
    hardness_curve,
    program_hardness,
)
from taip.model import Program

from conftest import flat_ontology, make_instance

unit = st.floats(0.0, 1.0)


def test_entropy_term_anchors():
    mpmath.mp.dps = 40
    half = float(2 * mpmath.mpf("0.5") * mpmath.log(mpmath.mpf("0.5")))
    assert entropy_term(1.0) == 0.0
    assert entropy_term(0.5) == pytest.approx(half, abs=1e-15)
    assert entropy_term(0.5) == pytest.approx(-0.693147, abs=5e-7)
    assert entropy_term(0.0) == pytest.approx(2 * half, abs=1e-15)
    assert entropy_term(0.0) == pytest.approx(-1.386294, abs=5e-7)


@pytest.mark.parametrize("x", [-0.01, 1.0001, float("nan")])
def test_entropy_term_domain(x):
    with pytest.raises(ValueError):
        entropy_term(x)


def test_entropy_term_continuous_at_half():
    below = entropy_term(0.5 - 1e-12)
    above = entropy_term(0.5 + 1e-12)
    assert abs(below - above) < 1e-9
    assert abs(below - LN_HALF) < 1e-9


@settings(max_examples=200)
@given(unit)
def test_entropy_term_range(x):
    assert 2 * LN_HALF - 1e-12 <= entropy_term(x) <= 1e-15


@pytest.mark.parametrize("n", [1, 2, 7, 50])
def test_competence_hardness_anchors(n):
    assert competence_hardness_from_coverages([1.0] * n) == 0.0
    assert abs(competence_hardness_from_coverages([0.5] * n) + LN_HALF) < 1e-12
    assert abs(competence_hardness_from_coverages([0.0] * n) - MAX_COMPETENCE_HARDNESS) < 1e-12
    assert MAX_COMPETENCE_HARDNESS == pytest.approx(1.386294, abs=5e-7)


def test_competence_hardness_needs_students():
    with pytest.raises(ValueError):
        competence_hardness_from_coverages([])


@settings(max_examples=100)
@given(st.lists(unit, min_size=1, max_size=12), st.randoms(use_true_random=False))
def test_competence_hardness_range_and_permutation(xs, rnd):
    h = competence_hardness_from_coverages(xs)
    assert -1e-15 <= h <= MAX_COMPETENCE_HARDNESS + 1e-12
    ys = list(xs)
    rnd.shuffle(ys)
    assert competence_hardness_from_coverages(ys) == pytest.approx(h, abs=1e-15)


def test_competence_hardness_through_instance():
    o = flat_ontology(["c", "d"])
    inst = make_instance(o, {"s1": ["c"], "s2": ["c"], "s3": ["d"]}, {"p": ({"c": 1.0}, 1)})
    assert competence_hardness("c", inst.students[:2], inst) == 0.0
    assert competence_hardness("c", inst.students[2:], inst) == pytest.approx(MAX_COMPETENCE_HARDNESS)
    assert competence_hardness("c", inst.students, inst) == pytest.approx(MAX_COMPETENCE_HARDNESS / 3)
    with pytest.raises(ValueError):
        competence_hardness("c", [], inst)


# -- program hardness ------------------------------------------------------------


def test_as_written_single_competence():
    p = Program.make("p", {"c": 1.0}, 1)
    cfg = HardnessConfig(epsilon=1e-6)
    assert aggregate_program_hardness(p, {"c": 0.4}, cfg) == pytest.approx(1 / (0.4 + 1e-6))


@settings(max_examples=100)
@given(st.floats(0.0, MAX_COMPETENCE_HARDNESS), st.floats(0.01, 1.0), st.floats(0.01, 1.0))
def test_as_written_equal_hardness_weights_cancel(h, w1, w2):
    single = aggregate_program_hardness(Program.make("p", {"c": 1.0}, 1), {"c": h})
    double = aggregate_program_hardness(Program.make("p", {"c": w1, "d": w2}, 1), {"c": h, "d": h})
    assert double == pytest.approx(single, rel=1e-12)


@settings(max_examples=100)
@given(
    st.lists(st.tuples(st.floats(0.0, MAX_COMPETENCE_HARDNESS), st.floats(0.01, 1.0)), min_size=1, max_size=5)
)
def test_weighted_mean_is_bounded(entries):
    weights = {f"c{i}": w for i, (_, w) in enumerate(entries)}
    hc = {f"c{i}": h for i, (h, _) in enumerate(entries)}
    p = Program.make("p", weights, 1)
    cfg = HardnessConfig(aggregation=Aggregation.WEIGHTED_MEAN)
    value = aggregate_program_hardness(p, hc, cfg)
    assert min(hc.values()) - 1e-12 <= value <= max(hc.values()) + 1e-12


def test_weighted_mean_with_no_coverage():
    o = flat_ontology(["c", "d", "z"])
    inst = make_instance(o, {"s1": ["z"], "s2": ["z"]}, {"p": ({"c": 0.3, "d": 0.9}, 1)})
    cfg = HardnessConfig(aggregation="weighted-mean")
    value = program_hardness(inst.programs[0], inst.students, inst, cfg)
    assert abs(value - MAX_COMPETENCE_HARDNESS) < 1e-12


def test_program_hardness_modes_disagree_on_order():
    o = flat_ontology(["easy", "hard", "z"])
    inst = make_instance(
        o,
        {"s1": ["easy"], "s2": ["easy"], "s3": ["z"]},
        {"pe": ({"easy": 1.0}, 1), "ph": ({"hard": 1.0}, 1)},
    )
    pe, ph = inst.programs
    aw = HardnessConfig()
    wm = HardnessConfig(aggregation=Aggregation.WEIGHTED_MEAN)
    assert program_hardness(ph, inst.students, inst, wm) > program_hardness(pe, inst.students, inst, wm)
    assert program_hardness(ph, inst.students, inst, aw) < program_hardness(pe, inst.students, inst, aw)


def test_program_hardness_needs_students():
    o = flat_ontology(["c"])
    inst = make_instance(o, {}, {"p": ({"c": 1.0}, 1)})
    with pytest.raises(ValueError):
        program_hardness(inst.programs[0], [], inst)


def test_config_validation():
    with pytest.raises(ValueError):
        HardnessConfig(epsilon=0.0)
    assert HardnessConfig(aggregation="as-written").aggregation is Aggregation.AS_WRITTEN


def test_hardness_curve_samples():
    curve = hardness_curve(5)
    assert [x for x, _ in curve] == [0.0, 0.25, 0.5, 0.75, 1.0]
    assert curve[0][1] == pytest.approx(MAX_COMPETENCE_HARDNESS)
    assert curve[2][1] == pytest.approx(-LN_HALF)
    assert curve[-1][1] == 0.0 and math.copysign(1.0, curve[-1][1]) == 1.0
    for x, h in curve:
        assert h == pytest.approx(competence_hardness_from_coverages([x, x, x]))
    with pytest.raises(ValueError):
        hardness_curve(1)
