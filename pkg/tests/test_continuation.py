from types import SimpleNamespace

import numpy as np
import pytest

from iso3bp.boundary import BranchKind, evaluate, residual
from iso3bp.continuation import (
    StopPolicy, ToleranceConfig, orient, predictor_step, stop_policy_evaluate, tangent_field,
    trace_branch,
)
from iso3bp.errors import ZeroTangent
from iso3bp.fixtures import Q200, named_point, p0

OE, ODD = BranchKind.ODD_EVEN, BranchKind.ODD


def period_coords(pt):
    return np.array([pt.period, pt.a, pt.b])


def closest(branch, target):
    c = branch.coords() * [branch.kind.period_multiplier, 1, 1]
    return np.min(np.max(np.abs(c - np.asarray(target)), axis=1))


def test_tolerance_validation():
    with pytest.raises(ValueError):
        ToleranceConfig(eps1=1e-4, eps2=1e-5)
    with pytest.raises(ValueError):
        ToleranceConfig(k=0)
    with pytest.raises(ValueError):
        ToleranceConfig(orientation=0)


@pytest.mark.parametrize("kind", [OE, ODD])
def test_tangent_is_orthogonal_to_both_rows(kind):
    ev = evaluate(p0(), kind)
    x = tangent_field(p0(), kind)
    for row in ev.jacobian:
        assert abs(x @ row) <= 1e-12 * np.linalg.norm(x) * np.linalg.norm(row)


def test_predictor_step_length_and_orientation(refined_p0):
    y, d = predictor_step(refined_p0, OE, 1e-3)
    assert np.linalg.norm(y - refined_p0.coords) == pytest.approx(1e-3, rel=1e-12)
    assert d[2] >= 0
    y2, d2 = predictor_step(y, OE, 1e-3, previous=d)
    assert d @ d2 > 0
    _, back = predictor_step(refined_p0, OE, 1e-3, orientation=-1)
    assert np.allclose(back, -d)


def test_zero_tangent_raises():
    with pytest.raises(ZeroTangent):
        orient(np.zeros(3))


def test_two_hundred_predictor_steps_reach_q200(refined_p0):
    y, d = refined_p0.coords, None
    for _ in range(200):
        y, d = predictor_step(y, OE, 1e-3, previous=d)
    assert np.max(np.abs(y - [float(v) for v in Q200])) <= 1e-3


def test_stop_rules():
    policy = StopPolicy(collision_guard=0.1)
    near = SimpleNamespace(r_min=0.03, zero_ratio=0.5, coords=np.array([3.0, 2.0, 2.0]))
    assert stop_policy_evaluate(near, 1, policy) == "collision-proximity"
    healthy = SimpleNamespace(r_min=5.0, zero_ratio=0.5, coords=np.array([3.0, 2.0, 2.0]))
    assert stop_policy_evaluate(healthy, 1, policy) is None
    flat = SimpleNamespace(r_min=5.0, zero_ratio=1e-9, coords=np.array([3.0, 2.0, 2.0]))
    assert stop_policy_evaluate(flat, 1, policy) == "zero-tangent"
    assert stop_policy_evaluate(healthy, policy.max_pillars, policy) == "max-pillars"
    outside = SimpleNamespace(r_min=5.0, zero_ratio=0.5, coords=np.array([3.0, 2.0, 1e-3]))
    assert stop_policy_evaluate(outside, 1, policy) == "left-box"


def test_unconvergeable_seed_is_reported_not_raised():
    br = trace_branch((1.0, 0.0, 0.0), OE)
    assert br.points == [] and br.termination in {"no-convergence", "singular-jacobian"}


def test_toward_p3(s1_toward_p3):
    br = s1_toward_p3
    assert br.termination == "left-box"
    assert closest(br, named_point("P3")) < 1e-2
    mid = np.linalg.norm(tangent_field(br.points[0], OE))
    end = br.points[int(np.argmin([abs(p.b - 0.2) for p in br.points]))]
    assert np.linalg.norm(tangent_field(end, OE)) < 0.2 * mid


def test_toward_p2(s1_toward_p2):
    br = s1_toward_p2
    assert br.termination == "collision-proximity"
    assert closest(br, named_point("P2")) < 1e-2


def _check_invariants(br, sample=60):
    tol = br.config
    pts = br.points
    idx = np.unique(np.linspace(0, len(pts) - 1, sample).astype(int))
    for i in idx:
        r = np.max(np.abs(residual(pts[i], br.kind)))
        assert r < (tol.eps1 if pts[i].is_pillar else tol.eps2)
    c = br.coords()
    chords = np.diff(c, axis=0)
    return np.linalg.norm(chords, axis=1), chords


def _no_reversal(br, sample=40):
    pillars = np.array([p.coords for p in br.pillars])
    steps = np.diff(pillars, axis=0)
    assert np.all(np.einsum("ij,ij->i", steps[:-1], steps[1:]) > 0)
    pts = br.points
    for i in np.unique(np.linspace(0, len(pts) - 2, sample).astype(int)):
        x0 = tangent_field(pts[i], br.kind)
        x1 = tangent_field(pts[i + 1], br.kind)
        chord = pts[i + 1].coords - pts[i].coords
        if pts[i + 1].is_pillar:
            continue
        assert np.sign(x0 @ chord) == np.sign(x1 @ chord) != 0


def test_s1_branch_invariants(s1_toward_p2, s1_toward_p3):
    for br in (s1_toward_p2, s1_toward_p3):
        gaps, _ = _check_invariants(br)
        assert gaps.max() <= 2 * br.config.h
        _no_reversal(br)


def test_s2_continues_through_crossing(s2_through_b):
    br = s2_through_b
    T, a, b = named_point("B")
    assert closest(br, (T / 2 * 2, a, b)) < 5e-3
    gaps, _ = _check_invariants(br)
    # only the deliberate jump across S1 may exceed the 2h gap
    assert np.sum(gaps > 2 * br.config.h) <= 2
    _no_reversal(br)
    # well past the crossing, on the far side from the seed
    assert br.points[-1].period > T / 2 + 1.0


def test_large_steps_are_retried_without_storing_bad_points(refined_p0):
    tol = ToleranceConfig(h=0.05, k=20)
    br = trace_branch(refined_p0.coords, OE, tol, StopPolicy(max_pillars=6))
    assert br.termination == "max-pillars"
    _check_invariants(br, sample=200)


def test_finer_discretisation_traces_the_same_curve(refined_p0, s1_toward_p2):
    fine = trace_branch(refined_p0.coords, OE, ToleranceConfig(h=1e-4, k=1),
                        StopPolicy(max_pillars=300))
    ref = s1_toward_p2.coords()[:400]
    for y in fine.coords()[::10]:
        seg = ref[1:] - ref[:-1]
        w = np.clip(np.einsum("ij,ij->i", y - ref[:-1], seg) / np.einsum("ij,ij->i", seg, seg), 0, 1)
        assert np.min(np.linalg.norm(ref[:-1] + w[:, None] * seg - y, axis=1)) < 1e-3
