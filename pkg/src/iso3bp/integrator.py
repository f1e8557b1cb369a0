"""Adaptive Taylor-series propagation plus an independent Runge-Kutta oracle."""
from __future__ import annotations

import bisect
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from . import _taylor
from .dynamics import (
    COLLISION_FLOOR,
    ExtendedState,
    Parameters,
    ReducedState,
    _rhs5,
    _rhs15,
)
from .errors import CollisionError, IntegrationError, StepSizeUnderflow


@dataclass(frozen=True)
class IntegratorConfig:
    abs_tol: float = 1e-12
    rel_tol: float = 1e-12
    taylor_order: int = 20
    max_step: float = 1.0
    min_step: float = 1e-13
    collision_floor: float = COLLISION_FLOOR
    max_steps: int = 1_000_000

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValueError("tolerances must be positive")
        if not 4 <= self.taylor_order <= 40:
            raise ValueError("taylor_order must lie in [4, 40]")
        if not 0 < self.min_step <= self.max_step:
            raise ValueError("need 0 < min_step <= max_step")
        if self.collision_floor <= 0:
            raise ValueError("collision_floor must be positive")


DEFAULT_CONFIG = IntegratorConfig()


@dataclass
class DenseOutput:
    """Piecewise Taylor polynomials covering the integrated span.

    ``t_nodes`` holds the step boundaries in integration order; ``coeffs[i]``
    is the coefficient table valid on ``[t_nodes[i], t_nodes[i+1]]``.
    """

    t_nodes: list = field(default_factory=list)
    coeffs: list = field(default_factory=list)
    errors: list = field(default_factory=list)
    direction: float = 1.0

    @property
    def span(self):
        lo, hi = self.t_nodes[0], self.t_nodes[-1]
        return (lo, hi) if lo <= hi else (hi, lo)

    @property
    def times(self):
        """Step boundaries in increasing order."""
        t = np.asarray(self.t_nodes)
        return t if self.direction > 0 else t[::-1]

    @property
    def states(self):
        out = [c[:, 0] for c in self.coeffs]
        out.append(_taylor.horner(self.coeffs[-1], self.t_nodes[-1] - self.t_nodes[-2]))
        out = np.array(out)
        return out if self.direction > 0 else out[::-1]

    def _index(self, t):
        key = [self.direction * s for s in self.t_nodes]
        i = bisect.bisect_right(key, self.direction * t) - 1
        return min(max(i, 0), len(self.coeffs) - 1)

    def __call__(self, t):
        lo, hi = self.span
        scale = max(1.0, abs(lo), abs(hi))
        if not lo - 1e-12 * scale <= t <= hi + 1e-12 * scale:
            raise ValueError(f"t={t} outside dense span [{lo}, {hi}]")
        i = self._index(t)
        return _taylor.horner(self.coeffs[i], t - self.t_nodes[i])

    def sample(self, ts):
        return np.array([self(t) for t in ts])


def _vector(s):
    return np.ascontiguousarray(s.x, dtype=float)


def taylor_coefficients(s: ReducedState, p: Parameters, order: int,
                        collision_floor=COLLISION_FLOOR):
    """Coefficient table ``c[i, k]`` (variable i, power k) about ``s.t``."""
    if order < 1:
        raise ValueError("order must be >= 1")
    x = _vector(s)
    if _taylor._collides(x, collision_floor):
        raise CollisionError("state below collision floor", s.t)
    return _taylor.coefficients(x, float(p.a), max(order, 2))[:, : order + 1]


def _step_array(x, a, cfg, direction=1.0, h_cap=None):
    c = _taylor.coefficients(x, a, cfg.taylor_order)
    tol = _taylor._state_tol(x, cfg.abs_tol, cfg.rel_tol)
    h_max = cfg.max_step if h_cap is None else min(cfg.max_step, h_cap)
    h, err = _taylor.step_size(c, tol, h_max)
    return c, h, err


def step(s: ReducedState, p: Parameters, cfg: IntegratorConfig = DEFAULT_CONFIG):
    """One adaptive forward step: (next state, step size, local error estimate)."""
    x = _vector(s)
    if _taylor._collides(x, cfg.collision_floor):
        raise CollisionError("state below collision floor", s.t)
    c, h, err = _step_array(x, float(p.a), cfg)
    if h < cfg.min_step:
        raise StepSizeUnderflow(f"required step {h:.3g} below min_step", s.t)
    xn = _taylor.horner(c, h)
    return type(s)(s.t + h, xn), h, err


def _raise_status(status, t):
    if status == _taylor.COLLISION:
        raise CollisionError(f"collision reached at t={t:.17g}", t)
    if status == _taylor.UNDERFLOW:
        raise StepSizeUnderflow(f"step size underflow at t={t:.17g}", t)
    if status == _taylor.NONFINITE:
        raise IntegrationError(f"non-finite state at t={t:.17g}", t)


def propagate(x0, a, t0, t_end, cfg: IntegratorConfig = DEFAULT_CONFIG):
    """Array-level fast path: returns (state vector at t_end, min R at step nodes)."""
    x, t, _, r_min, status = _taylor.propagate(
        np.ascontiguousarray(x0, dtype=float), float(a), float(t0), float(t_end),
        cfg.taylor_order, cfg.abs_tol, cfg.rel_tol, cfg.max_step, cfg.min_step,
        cfg.collision_floor, cfg.max_steps,
    )
    _raise_status(status, t)
    return x, r_min


def _propagate_dense(x0, a, t0, t_end, cfg):
    direction = 1.0 if t_end >= t0 else -1.0
    dense = DenseOutput(direction=direction)
    x = np.ascontiguousarray(x0, dtype=float)
    t = float(t0)
    dense.t_nodes.append(t)
    if _taylor._collides(x, cfg.collision_floor):
        raise CollisionError("initial state below collision floor", t)
    while direction * (t_end - t) > 0.0:
        if len(dense.coeffs) >= cfg.max_steps:
            raise StepSizeUnderflow("max_steps exceeded", t)
        remaining = direction * (t_end - t)
        c, h, err = _step_array(x, a, cfg)
        last = h >= remaining
        if last:
            h = remaining
        elif h < cfg.min_step:
            raise StepSizeUnderflow(f"step size underflow at t={t:.17g}", t)
        xn = _taylor.horner(c, direction * h)
        if not np.all(np.isfinite(xn)):
            raise IntegrationError(f"non-finite state at t={t:.17g}", t)
        t = float(t_end) if last else t + direction * h
        dense.coeffs.append(c)
        dense.errors.append(err)
        dense.t_nodes.append(t)
        x = xn
        if _taylor._collides(x, cfg.collision_floor):
            raise CollisionError(f"collision reached at t={t:.17g}", t)
    return x, dense


def integrate_to(s0: ReducedState, p: Parameters, t_end: float,
                 cfg: IntegratorConfig = DEFAULT_CONFIG, want_dense: bool = False):
    """Propagate ``s0`` to exactly ``t_end``; returns (state, DenseOutput or None).

    Negative time spans are integrated with negative Taylor steps.
    """
    x0 = _vector(s0)
    if want_dense:
        x, dense = _propagate_dense(x0, float(p.a), s0.t, float(t_end), cfg)
    else:
        x, _ = propagate(x0, p.a, s0.t, t_end, cfg)
        dense = None
    return type(s0)(float(t_end), x), dense


def reference_integrate(s0: ReducedState, p: Parameters, t_end: float,
                        cfg: IntegratorConfig = DEFAULT_CONFIG):
    """Same contract as :func:`integrate_to`, computed with scipy's DOP853."""
    x0 = _vector(s0)
    a = float(p.a)
    rhs = _rhs15 if x0.shape[0] == 15 else _rhs5
    floor = cfg.collision_floor

    def fun(t, x):
        return rhs(x, a)

    def hit(t, x):
        return x[1] - floor

    hit.terminal = True
    if t_end == s0.t:
        return type(s0)(t_end, x0)
    sol = solve_ivp(
        fun, (s0.t, float(t_end)), x0, method="DOP853",
        rtol=max(cfg.rel_tol, 1e-13), atol=cfg.abs_tol, events=hit,
        max_step=cfg.max_step,
    )
    if sol.status == 1:
        raise CollisionError("collision reached", float(sol.t[-1]))
    if sol.status != 0:
        raise StepSizeUnderflow(sol.message, float(sol.t[-1]))
    return type(s0)(float(t_end), sol.y[:, -1])
