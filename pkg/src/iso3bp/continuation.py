"""Pillar-point continuation of odd/even (S1) and odd (S2) solution curves.

Each segment takes ``k`` normalised Euler steps of length ``h`` along the
tangent field (the cross product of the two residual gradients), checks every
predicted point against ``eps2``, then corrects the last one back onto the
curve with Newton (``eps1``), requiring the correction to stay within ``eps3``.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .boundary import (
    BranchKind,
    CurvePoint,
    Evaluation,
    evaluate,
    newton_correct,
)
from .errors import IntegrationError, NumericalError, ZeroTangent
from .integrator import DEFAULT_CONFIG, IntegratorConfig

log = logging.getLogger(__name__)

H_MIN = 1e-6


@dataclass(frozen=True)
class ToleranceConfig:
    eps1: float = 1e-6
    eps2: float = 5e-5
    eps3: float = 5e-5
    h: float = 1e-3
    k: int = 200
    orientation: int = 1

    def __post_init__(self):
        if not 0 < self.eps1 < self.eps2:
            raise ValueError("need 0 < eps1 < eps2")
        if self.eps3 <= 0 or self.h <= 0 or self.k < 1:
            raise ValueError("eps3 and h must be positive and k >= 1")
        if self.orientation not in (1, -1):
            raise ValueError("orientation must be +1 or -1")


@dataclass(frozen=True)
class StopPolicy:
    collision_guard: float = 3e-3   # absolute bound on min R over [0, tau]
    zero_tangent: float = 1e-8      # on |X| / (|row1| |row2|)
    # jump over a crossing curve once the field's predicted zero is this
    # many steps ahead; the jump lands crossing_jump beyond the zero
    crossing_lookahead: float = 3.0
    crossing_jump: float = 1e-2
    max_pillars: int = 2000
    # b -> 0 ends on the line of circular equilibria (a**2 = 22.5, any tau)
    box: tuple = ((1e-3, 50.0), (0.0, 20.0), (1e-2, 20.0))


@dataclass
class Branch:
    kind: BranchKind
    config: ToleranceConfig
    points: list = field(default_factory=list)
    termination: str = "running"
    detail: str = ""

    @property
    def pillars(self):
        return [p for p in self.points if p.is_pillar]

    def coords(self):
        return np.array([p.coords for p in self.points])

    def arc_length(self):
        c = self.coords()
        return np.concatenate([[0.0], np.cumsum(np.linalg.norm(np.diff(c, axis=0), axis=1))])


def _distance_to_zero(before, after, h):
    """Arc length until the tangent ratio reaches zero, extrapolating linearly."""
    drop = before - after
    if drop <= 0.0:
        return math.inf
    return after * h / drop


def tangent_field(pt, kind: BranchKind, cfg: IntegratorConfig = DEFAULT_CONFIG):
    """Unnormalised tangent X (odd/even) or Z (odd) at ``pt``."""
    return evaluate(pt, kind, cfg).tangent


def orient(tangent, previous=None, orientation=1):
    """Unit tangent with a sign that continues ``previous``.

    Without a previous direction, ``orientation=+1`` picks the sign whose
    b-component is non-negative.
    """
    n = np.linalg.norm(tangent)
    if n == 0.0:
        raise ZeroTangent("tangent field vanishes")
    d = tangent / n
    if previous is None:
        ref = 1.0 if d[2] >= 0 else -1.0
        return d * ref * orientation
    return d if d @ previous >= 0 else -d


def predictor_step(pt, kind: BranchKind, h, cfg: IntegratorConfig = DEFAULT_CONFIG,
                   previous=None, orientation=1, zero_tangent=1e-8):
    """One normalised Euler step ``Y + h X/|X|``; returns (new coords, direction)."""
    ev = pt if isinstance(pt, Evaluation) else evaluate(pt, kind, cfg)
    if ev.zero_ratio < zero_tangent:
        raise ZeroTangent(f"tangent field below threshold at {ev.coords.tolist()}")
    d = orient(ev.tangent, previous, orientation)
    return ev.coords + h * d, d


def stop_policy_evaluate(ev: Evaluation, n_pillars: int, policy: StopPolicy):
    """None to continue, otherwise the reason to stop."""
    if ev.r_min < policy.collision_guard:
        return "collision-proximity"
    if ev.zero_ratio < policy.zero_tangent:
        return "zero-tangent"
    if n_pillars >= policy.max_pillars:
        return "max-pillars"
    for v, (lo, hi) in zip(ev.coords, policy.box):
        if not lo <= v <= hi:
            return "left-box"
    return None


def trace_branch(seed, kind: BranchKind, tol: ToleranceConfig = ToleranceConfig(),
                 stop: StopPolicy = StopPolicy(), cfg: IntegratorConfig = DEFAULT_CONFIG,
                 progress=None) -> Branch:
    """Trace a solution curve from ``seed`` until the stop policy fires.

    A segment whose predicted points break ``eps2``, or whose last point cannot
    be corrected within ``eps3``, is discarded and retried with half the step
    (half the step count once ``h`` would drop below ``H_MIN``). Segments that
    stay well inside ``eps2`` let ``h`` and ``k`` grow back toward the
    configured values. Never raises on numerical trouble; the reason is kept
    in ``termination``.
    """
    branch = Branch(kind, tol)
    try:
        q0 = evaluate(seed, kind, cfg)
        if q0.residual_norm >= tol.eps1:
            d0 = orient(q0.tangent, None, tol.orientation)
            q0 = newton_correct(q0.coords, kind, d0, tol.eps1, cfg=cfg).evaluation
    except NumericalError as exc:
        branch.termination, branch.detail = exc.reason, str(exc)
        return branch
    branch.points.append(q0.point(is_pillar=True))
    n_pillars = 1
    previous = None
    h, k = tol.h, tol.k
    while True:
        reason = stop_policy_evaluate(q0, n_pillars, stop)
        if reason:
            branch.termination = reason
            return branch
        segment = []
        ev = q0
        d = previous
        failure = None
        worst = 0.0
        jump = None
        try:
            for _ in range(k):
                ratio = ev.zero_ratio
                y, d = predictor_step(ev, kind, h, cfg, d, tol.orientation, stop.zero_tangent)
                ev = evaluate(y, kind, cfg)
                worst = max(worst, ev.residual_norm)
                if worst >= tol.eps2:
                    failure = "eps2"
                    break
                segment.append(ev)
                reason = stop_policy_evaluate(ev, n_pillars, stop)
                if reason and reason != "max-pillars":
                    break
                ahead = _distance_to_zero(ratio, ev.zero_ratio, h)
                if ahead < stop.crossing_lookahead * h:
                    jump = ahead + stop.crossing_jump
                    break
        except ZeroTangent as exc:
            reason = "zero-tangent"
            branch.detail = str(exc)
        except IntegrationError as exc:
            failure = "integration"
            branch.detail = str(exc)

        if reason and failure is None:
            branch.points.extend(e.point() for e in segment)
            branch.termination = reason
            return branch
        if failure is None:
            target = segment[-1].coords
            if jump is not None:
                target = target + jump * d
                log.info("crossing curve near %s; jumping %.3g", segment[-1].coords, jump)
            try:
                corr = newton_correct(target, kind, d, tol.eps1, cfg=cfg,
                                      eps3=None if jump is not None else tol.eps3)
            except NumericalError as exc:
                failure = "corrector"
                branch.detail = str(exc)
        if failure is not None:
            if h / 2 >= H_MIN:
                h /= 2
            elif k > 1:
                k //= 2
            else:
                branch.termination = "retry-exhausted"
                return branch
            log.debug("segment failed (%s); retrying with h=%g k=%d", failure, h, k)
            continue
        branch.points.extend(e.point() for e in segment)
        branch.points.append(corr.point)
        n_pillars += 1
        q0 = corr.evaluation
        previous = d
        if worst < tol.eps2 / 4:
            if k < tol.k:
                k = min(2 * k, tol.k)
            else:
                h = min(2 * h, tol.h)
        if progress is not None:
            progress(branch)
