"""Rotation angle over a period, rational-angle targets and closure checks."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .boundary import BranchKind, CurvePoint, newton_correct, solve_with_fixed
from .continuation import Branch
from .dynamics import (
    BodyPositions, Parameters, R0, ReducedState, embed_positions, embed_velocities,
)
from .errors import NumericalError, TargetOutOfRange
from .integrator import DEFAULT_CONFIG, IntegratorConfig, integrate_to, propagate

THETA_TOL = 1e-6
SYMMETRY_TOL = 1e-6
# printed table coordinates sit about 1e-6 off the curve, so row checks use a looser bound
ROW_EVENNESS_TOL = 1e-4


def _initial(b):
    return np.array([0.0, R0, float(b), 0.0, 0.0])


@dataclass(frozen=True)
class PeriodicRecord:
    T: float
    a: float
    b: float
    theta_T: float
    kind: BranchKind
    target: Optional[Fraction] = None
    closure_error: float = float("nan")

    @property
    def tau(self):
        return self.T / self.kind.period_multiplier

    def curve_point(self) -> CurvePoint:
        return CurvePoint(self.tau, self.a, self.b, self.kind, (0.0, 0.0), True)


@dataclass(frozen=True)
class Trajectory3D:
    """Samples of the embedded body positions; ``positions[i, j]`` is body j at ``t[i]``."""

    t: np.ndarray
    positions: np.ndarray
    states: np.ndarray

    def __post_init__(self):
        if self.t.ndim != 1 or self.positions.shape != (self.t.size, 3, 3):
            raise ValueError("inconsistent trajectory shapes")
        if np.any(np.diff(self.t) <= 0):
            raise ValueError("sample times must be strictly increasing")
        if not np.all(np.isfinite(self.positions)):
            raise ValueError("non-finite positions")

    def samples(self):
        for t, p in zip(self.t, self.positions):
            yield float(t), BodyPositions(p[0], p[1], p[2])


def _unpack(pt, kind):
    if isinstance(pt, CurvePoint):
        return pt.tau, pt.a, pt.b, pt.kind
    if isinstance(pt, PeriodicRecord):
        return pt.tau, pt.a, pt.b, pt.kind
    if kind is None:
        raise ValueError("kind is required for raw coordinates")
    tau, a, b = (float(v) for v in pt)
    return tau, a, b, BranchKind.parse(kind)


def theta_at_period(pt, kind=None, cfg: IntegratorConfig = DEFAULT_CONFIG):
    """Theta after one full period of the point's branch kind."""
    tau, a, b, kind = _unpack(pt, kind)
    T = kind.period_multiplier * tau
    x, _ = propagate(_initial(b), a, 0.0, T, cfg)
    return float(x[4])


def _embedded(x, a):
    s = ReducedState(0.0, x)
    return np.concatenate([embed_positions(s).as_array().ravel(),
                           embed_velocities(s, Parameters(a, 0.0)).as_array().ravel()])


def closure_error(T, a, b, cfg: IntegratorConfig = DEFAULT_CONFIG):
    """Max-norm mismatch of positions and velocities after T, up to rotation by Theta(T)."""
    x0 = _initial(b)
    x, _ = propagate(x0, a, 0.0, T, cfg)
    angle = -math.fmod(x[4], 2.0 * math.pi)
    c, s = math.cos(angle), math.sin(angle)
    rot = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    end = _embedded(x, a).reshape(6, 3) @ rot.T
    start = _embedded(x0, a).reshape(6, 3)
    return float(np.max(np.abs(end - start)))


def closure_check(rec: PeriodicRecord, cfg: IntegratorConfig = DEFAULT_CONFIG):
    return closure_error(rec.T, rec.a, rec.b, cfg)


def make_record(pt, kind=None, target=None, cfg: IntegratorConfig = DEFAULT_CONFIG):
    tau, a, b, kind = _unpack(pt, kind)
    T = kind.period_multiplier * tau
    return PeriodicRecord(T, a, b, theta_at_period((tau, a, b), kind, cfg), kind,
                          target, closure_error(T, a, b, cfg))


def _theta_profile(branch, indices, cfg):
    return np.array([theta_at_period(branch.points[i], cfg=cfg) for i in indices])


def _first_bracket(values, target):
    g = values - target
    hits = np.nonzero(np.sign(g[:-1]) * np.sign(g[1:]) <= 0)[0]
    return None if hits.size == 0 else int(hits[0])


def locate_rational_theta(branch: Branch, p: int, q: int,
                          cfg: IntegratorConfig = DEFAULT_CONFIG,
                          tol=THETA_TOL) -> PeriodicRecord:
    """First point along the branch where Theta(T) equals p*pi/q."""
    if q == 0:
        raise ValueError("q must be nonzero")
    target = Fraction(p, q)
    theta_star = float(target) * math.pi
    kind = branch.kind
    pts = branch.points
    if len(pts) < 2:
        raise TargetOutOfRange("branch has fewer than two points")

    pillars = [i for i, pt in enumerate(pts) if pt.is_pillar]
    if pillars[0] != 0:
        pillars.insert(0, 0)
    if pillars[-1] != len(pts) - 1:
        pillars.append(len(pts) - 1)
    j = _first_bracket(_theta_profile(branch, pillars, cfg), theta_star)
    if j is None:
        raise TargetOutOfRange(f"Theta(T) never reaches {target}*pi on this branch")
    fine = list(range(pillars[j], pillars[j + 1] + 1))
    k = _first_bracket(_theta_profile(branch, fine, cfg), theta_star)
    if k is None:
        # pillar values bracket the target but intermediates do not: use the pillar pair
        i0, i1 = pillars[j], pillars[j + 1]
    else:
        i0, i1 = fine[k], fine[k + 1]
    c0, c1 = np.array(pts[i0].coords), np.array(pts[i1].coords)
    chord = c1 - c0
    if not np.any(chord):
        return make_record(pts[i0], target=target, cfg=cfg)

    found = {}

    def g(w):
        guess = c0 + w * chord
        pt = newton_correct(guess, kind, chord, eps1=1e-11, max_iter=30, cfg=cfg).point
        val = theta_at_period(pt, cfg=cfg) - theta_star
        found[w] = (abs(val), pt)
        return val

    g0, g1 = g(0.0), g(1.0)
    if g0 == 0.0:
        w = 0.0
    elif g1 == 0.0:
        w = 1.0
    else:
        w = brentq(g, 0.0, 1.0, xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=100)
        g(w)
    err, pt = min(found.values(), key=lambda v: v[0])
    if err >= tol:
        raise NumericalError(f"Theta target missed by {err:.3g}")
    return make_record(pt, target=target, cfg=cfg)


@dataclass(frozen=True)
class SymmetryReport:
    kind: BranchKind
    origin_defect: float
    quarter_defect: float
    tol: float = SYMMETRY_TOL

    @property
    def matches_kind(self):
        if self.origin_defect >= self.tol:
            return False
        if self.kind is BranchKind.ODD_EVEN:
            return self.quarter_defect < self.tol
        return self.quarter_defect > 10.0 * self.tol


def _dense(b, a, t_end, cfg):
    _, dense = integrate_to(ReducedState(0.0, _initial(b)), Parameters(a, b), t_end, cfg,
                            want_dense=True)
    return dense


def symmetry_check(pt, kind=None, cfg: IntegratorConfig = DEFAULT_CONFIG,
                   n=50, tol=SYMMETRY_TOL) -> SymmetryReport:
    """Measure reflection defects of (F, R) about t=0 and about the quarter period."""
    tau, a, b, kind = _unpack(pt, kind)
    T = kind.period_multiplier * tau
    quarter = T / 4.0
    fwd = _dense(b, a, T / 2.0, cfg)
    bwd = _dense(b, a, -T / 2.0, cfg)
    s = np.linspace(0.0, quarter, n)
    plus = fwd.sample(s)
    minus = bwd.sample(-s)
    origin = max(np.max(np.abs(plus[:, 0] + minus[:, 0])),
                 np.max(np.abs(plus[:, 1] - minus[:, 1])))
    up = fwd.sample(quarter + s)
    down = fwd.sample(quarter - s)
    quarter_defect = np.max(np.abs(up[:, :2] - down[:, :2]))
    return SymmetryReport(kind, float(origin), float(quarter_defect), tol)


def full_trajectory(rec: PeriodicRecord, n_periods=1, samples_per_period=400,
                    cfg: IntegratorConfig = DEFAULT_CONFIG) -> Trajectory3D:
    if n_periods < 1 or samples_per_period < 2:
        raise ValueError("need n_periods >= 1 and samples_per_period >= 2")
    t_end = n_periods * rec.T
    dense = _dense(rec.b, rec.a, t_end, cfg)
    t = np.linspace(0.0, t_end, n_periods * samples_per_period + 1)
    states = dense.sample(t)
    if rec.a > 0 and np.any(np.diff(states[:, 4]) < 0):
        raise NumericalError("Theta decreased along the trajectory")
    pos = np.array([embed_positions(ReducedState(ti, x)).as_array() for ti, x in zip(t, states)])
    return Trajectory3D(t, pos, states)


def min_radius(T, a, b, cfg: IntegratorConfig = DEFAULT_CONFIG, samples=4000):
    """(t, R) at the smallest R over one period, refined between dense samples."""
    dense = _dense(b, a, T, cfg)
    t = np.unique(np.concatenate([np.linspace(0.0, T, samples), dense.times]))
    r = dense.sample(t)[:, 1]
    i = int(np.argmin(r))
    lo, hi = t[max(i - 1, 0)], t[min(i + 1, t.size - 1)]
    res = minimize_scalar(lambda s: dense(s)[1], bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-13})
    if res.fun < r[i]:
        return float(res.x), float(res.fun)
    return float(t[i]), float(r[i])


@dataclass(frozen=True)
class RowReport:
    label: str
    advisory: bool
    T: float
    T_printed: float
    theta: float
    theta_target: float
    closure: float
    residual: float
    symmetry: SymmetryReport

    @property
    def period_ok(self):
        return abs(self.T - self.T_printed) < 1e-3

    @property
    def theta_ok(self):
        return abs(self.theta - self.theta_target) < 1e-3

    @property
    def closure_ok(self):
        return self.closure < 1e-4

    @property
    def symmetry_ok(self):
        sym = self.symmetry
        if sym.origin_defect >= ROW_EVENNESS_TOL:
            return False
        if sym.kind is BranchKind.ODD_EVEN:
            return sym.quarter_defect < ROW_EVENNESS_TOL
        return sym.quarter_defect >= 1e-3

    @property
    def passed(self):
        return self.period_ok and self.theta_ok and self.closure_ok and self.symmetry_ok


def verify_row(row, cfg: IntegratorConfig = DEFAULT_CONFIG, b_shift=0.0) -> RowReport:
    """Re-solve the period with (a, b) fixed and check angle, closure and symmetry."""
    T_printed, a, b = row.coords
    b += b_shift
    kind = row.kind
    m = kind.period_multiplier
    ev = solve_with_fixed((T_printed / m, a, b), kind, free=[0], cfg=cfg)
    tau = float(ev.coords[0])
    T = m * tau
    return RowReport(
        row.label, row.advisory, T, T_printed,
        theta_at_period((tau, a, b), kind, cfg), float(row.theta_over_pi) * math.pi,
        closure_error(T, a, b, cfg), ev.residual_norm, symmetry_check((tau, a, b), kind, cfg),
    )
