import numpy as np
import pytest

from biomeval import (
    MetricError,
    OpenSetCurve,
    OpenSetPoint,
    ProbeTopMatch,
    interpolate_tpir_at_fpir,
    openset_curve,
)

from oracles import brute_openset_points


def _match(pid, known, score, correct):
    return ProbeTopMatch(probe_sample_id=pid, is_known=known, max_score=score, top_correct=correct)


def test_minimal_separable_curve_reaches_perfect_corner():
    curve = openset_curve([_match("k", True, 0.9, True), _match("u", False, 0.1, False)])
    assert any(p.fpir == 0.0 and p.tpir == 1.0 for p in curve.points)
    assert curve.closed_set_rank1 == 1.0
    assert curve.points[-1] == OpenSetPoint(fpir=1.0, tpir=1.0, threshold=float("-inf"))


def test_minus_inf_point_equals_closed_set_rank1():
    matches = [
        _match("k0", True, 0.9, True),
        _match("k1", True, 0.8, False),
        _match("k2", True, 0.4, True),
        _match("u0", False, 0.5, False),
        _match("u1", False, 0.2, False),
    ]
    curve = openset_curve(matches)
    rank1 = sum(1 for m in matches if m.is_known and m.top_correct) / 3
    last = curve.points[-1]
    assert last.threshold == float("-inf")
    assert last.fpir == 1.0
    assert last.tpir == rank1
    assert curve.closed_set_rank1 == rank1


def test_curve_points_match_brute_force(rng):
    matches = []
    for i in range(40):
        matches.append(_match(f"k{i}", True, float(np.round(rng.normal(0.6, 0.3), 2)),
                              bool(rng.random() < 0.8)))
    for i in range(25):
        matches.append(_match(f"u{i}", False, float(np.round(rng.normal(0.1, 0.3), 2)), False))
    curve = openset_curve(matches)
    raw = [{"probe_sample_id": m.probe_sample_id, "is_known": m.is_known,
            "max_score": m.max_score, "top_correct": m.top_correct} for m in matches]
    oracle = brute_openset_points(raw, [p.threshold for p in curve.points])
    assert [(p.fpir, p.tpir, p.threshold) for p in curve.points] == oracle


def test_curve_monotone_in_threshold(rng):
    matches = [_match(f"k{i}", True, float(rng.normal()), bool(rng.random() < 0.5)) for i in range(30)]
    matches += [_match(f"u{i}", False, float(rng.normal()), False) for i in range(20)]
    curve = openset_curve(matches)
    for a, b in zip(curve.points, curve.points[1:]):
        assert a.threshold > b.threshold or (a.threshold == b.threshold == float("-inf"))
        assert a.fpir <= b.fpir
        assert a.tpir <= b.tpir


def test_openset_curve_requires_both_probe_kinds():
    with pytest.raises(MetricError, match="unknown probe"):
        openset_curve([_match("k", True, 0.5, True)])
    with pytest.raises(MetricError, match="known probe"):
        openset_curve([_match("u", False, 0.5, False)])


def test_curve_validation_rejects_bad_lists():
    with pytest.raises(MetricError, match="no points"):
        OpenSetCurve(points=[])
    with pytest.raises(MetricError, match="out of range"):
        OpenSetCurve(points=[OpenSetPoint(1.5, 0.5, 0.0)])
    with pytest.raises(MetricError, match="FPIR ascending"):
        OpenSetCurve(points=[
            OpenSetPoint(0.5, 0.5, 0.0), OpenSetPoint(0.2, 0.6, -1.0), OpenSetPoint(1.0, 0.7, -2.0),
        ])
    with pytest.raises(MetricError, match="non-decreasing"):
        OpenSetCurve(points=[
            OpenSetPoint(0.2, 0.6, 0.0), OpenSetPoint(0.5, 0.5, -1.0), OpenSetPoint(1.0, 0.7, -2.0),
        ])
    with pytest.raises(MetricError, match="FPIR=1"):
        OpenSetCurve(points=[OpenSetPoint(0.0, 0.5, 0.0)])


def test_interpolation_is_a_conservative_step_function():
    curve = OpenSetCurve(points=[
        OpenSetPoint(0.0, 0.30, 0.9),
        OpenSetPoint(0.1, 0.55, 0.5),
        OpenSetPoint(1.0, 0.80, float("-inf")),
    ])
    assert interpolate_tpir_at_fpir(curve, 1.0) == 0.80
    assert interpolate_tpir_at_fpir(curve, 0.5) == 0.55  # step holds until the next point
    assert interpolate_tpir_at_fpir(curve, 0.1) == 0.55
    assert interpolate_tpir_at_fpir(curve, 0.05) == 0.30
    assert interpolate_tpir_at_fpir(curve, 0.0) == 0.30


def test_interpolation_below_curve_is_conservative_zero():
    lone = OpenSetCurve(points=[OpenSetPoint(1.0, 0.9, float("-inf"))])
    assert interpolate_tpir_at_fpir(lone, 0.001) == 0.0
    with pytest.raises(MetricError, match="outside"):
        interpolate_tpir_at_fpir(lone, 1.5)


def test_interpolation_prefers_best_point_at_same_fpir():
    curve = OpenSetCurve(points=[
        OpenSetPoint(0.2, 0.4, 0.7),
        OpenSetPoint(0.2, 0.5, 0.6),
        OpenSetPoint(1.0, 0.9, float("-inf")),
    ])
    assert interpolate_tpir_at_fpir(curve, 0.3) == 0.5
