"""Symmetry residuals, their Jacobians, and the Newton corrector.

A point ``(tau, a, b)`` is an odd/even solution when ``Fdot = Rdot = 0`` at
``t = tau`` (full reduced period ``4 tau``) and an odd solution when
``F = Rdot = 0`` at ``t = tau`` (full period ``2 tau``).
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .dynamics import R0
from .errors import IntegrationError, NoConvergence, CorrectionTooFar, SingularJacobian
from .integrator import DEFAULT_CONFIG, IntegratorConfig, propagate

COND_LIMIT = 1e12
# every residual vanishes at tau = 0 when b = 0; treat landing there as failure
TAU_MIN = 1e-3


class BranchKind(enum.Enum):
    ODD_EVEN = "odd-even"
    ODD = "odd"

    @property
    def period_multiplier(self):
        return 4 if self is BranchKind.ODD_EVEN else 2

    @classmethod
    def parse(cls, text):
        if isinstance(text, cls):
            return text
        key = str(text).lower().replace("_", "-")
        aliases = {"odd-even": cls.ODD_EVEN, "oddeven": cls.ODD_EVEN, "s1": cls.ODD_EVEN,
                   "odd": cls.ODD, "s2": cls.ODD}
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown branch kind {text!r}") from None


@dataclass(frozen=True)
class CurvePoint:
    tau: float
    a: float
    b: float
    kind: BranchKind
    residual: tuple = (np.nan, np.nan)
    is_pillar: bool = False

    @property
    def coords(self):
        return np.array([self.tau, self.a, self.b])

    @property
    def period(self):
        return self.kind.period_multiplier * self.tau

    @property
    def residual_norm(self):
        return float(np.max(np.abs(self.residual)))


@dataclass
class Evaluation:
    """Everything one extended integration to ``tau`` yields for a point."""

    coords: np.ndarray
    kind: BranchKind
    state: np.ndarray
    r_min: float
    residual: np.ndarray = field(init=False)
    jacobian: np.ndarray = field(init=False)
    tangent: np.ndarray = field(init=False)
    zero_ratio: float = field(init=False)

    def __post_init__(self):
        x = self.state
        a = self.coords[1]
        s3 = (4.0 * x[0] ** 2 + x[1] ** 2) ** 1.5
        fdd = -400.0 * x[0] / s3
        rdd = 100.0 * a * a / x[1] ** 3 - 25.0 / x[1] ** 2 - 200.0 * x[1] / s3
        grad_rdot = np.array([rdd, x[8], x[13]])
        if self.kind is BranchKind.ODD_EVEN:
            self.residual = np.array([x[2], x[3]])
            self.jacobian = np.array([[fdd, x[7], x[12]], grad_rdot])
        else:
            self.residual = np.array([x[0], x[3]])
            self.jacobian = np.array([[x[2], x[5], x[10]], grad_rdot])
        (u1, u2, u3), (v1, v2, v3) = self.jacobian.tolist()
        self.tangent = np.array([u2 * v3 - u3 * v2, u3 * v1 - u1 * v3, u1 * v2 - u2 * v1])
        # |X| / (|row1| |row2|): sine of the angle between the gradients
        denom = math.sqrt((u1 * u1 + u2 * u2 + u3 * u3) * (v1 * v1 + v2 * v2 + v3 * v3))
        t = self.tangent
        self.zero_ratio = math.sqrt(t @ t) / denom if denom > 0 else 0.0

    @property
    def residual_norm(self):
        return float(np.max(np.abs(self.residual)))

    def point(self, is_pillar=False):
        tau, a, b = self.coords
        return CurvePoint(float(tau), float(a), float(b), self.kind,
                          tuple(float(r) for r in self.residual), is_pillar)


def initial_extended(a, b):
    x = np.zeros(15)
    x[1] = R0
    x[2] = b
    x[12] = 1.0
    return x


def evaluate(pt, kind: BranchKind, cfg: IntegratorConfig = DEFAULT_CONFIG) -> Evaluation:
    """Integrate the extended system to ``tau`` and collect residual data."""
    tau, a, b = (float(v) for v in np.asarray(_coords(pt), dtype=float))
    if not tau > 0:
        raise ValueError(f"tau must be positive, got {tau}")
    x, r_min = propagate(initial_extended(a, b), a, 0.0, tau, cfg)
    return Evaluation(np.array([tau, a, b]), kind, x, r_min)


def _coords(pt):
    if isinstance(pt, CurvePoint):
        return pt.coords
    return np.asarray(pt, dtype=float)


def residual(pt, kind: BranchKind, cfg: IntegratorConfig = DEFAULT_CONFIG):
    """(Fdot, Rdot) or (F, Rdot) at ``t = tau`` from the original ODE."""
    tau, a, b = (float(v) for v in _coords(pt))
    if not tau > 0:
        raise ValueError(f"tau must be positive, got {tau}")
    x, _ = propagate(np.array([0.0, R0, b, 0.0, 0.0]), a, 0.0, tau, cfg)
    if kind is BranchKind.ODD_EVEN:
        return np.array([x[2], x[3]])
    return np.array([x[0], x[3]])


def residual_jacobian(pt, kind: BranchKind, cfg: IntegratorConfig = DEFAULT_CONFIG):
    """2x3 matrix of residual gradients over (t, a, b)."""
    return evaluate(pt, kind, cfg).jacobian


@dataclass(frozen=True)
class Correction:
    point: CurvePoint
    iterations: int
    moved: float
    correction: np.ndarray
    evaluation: Evaluation


def newton_correct(guess, kind: BranchKind, direction, eps1=1e-6, max_iter=20,
                   cfg: IntegratorConfig = DEFAULT_CONFIG, eps3=None) -> Correction:
    """Newton on ``residual = 0`` restricted to the plane through ``guess``
    orthogonal to ``direction``.

    Raises NoConvergence when ``max_iter`` is exhausted or an iterate cannot be
    integrated, SingularJacobian when the bordered 3x3 system is too
    ill-conditioned, and CorrectionTooFar when the result lies farther than
    ``eps3`` from the guess.
    """
    q = np.array(_coords(guess), dtype=float)
    d = np.asarray(direction, dtype=float)
    d = d / np.linalg.norm(d)
    y = q.copy()
    for it in range(max_iter + 1):
        try:
            ev = evaluate(y, kind, cfg)
        except (IntegrationError, ValueError) as exc:
            raise NoConvergence(f"iterate {y.tolist()} not integrable: {exc}") from exc
        if ev.residual_norm < eps1:
            break
        if it == max_iter:
            raise NoConvergence(
                f"residual {ev.residual_norm:.3g} after {max_iter} Newton iterations"
            )
        m = np.vstack([ev.jacobian, d])
        if not np.all(np.isfinite(m)) or np.linalg.cond(m) > COND_LIMIT:
            raise SingularJacobian(f"bordered Jacobian singular near {y.tolist()}")
        rhs = -np.concatenate([ev.residual, [d @ (y - q)]])
        y = y + np.linalg.solve(m, rhs)
    if y[0] < TAU_MIN:
        raise NoConvergence(f"collapsed onto the trivial tau=0 solution from {q.tolist()}")
    delta = y - q
    moved = float(np.linalg.norm(delta))
    if eps3 is not None and moved >= eps3:
        raise CorrectionTooFar(f"corrector moved {moved:.3g} >= eps3={eps3:g}")
    return Correction(ev.point(is_pillar=True), it, moved, delta, ev)


def solve_with_fixed(guess, kind: BranchKind, free, tol=1e-12, max_iter=30,
                     cfg: IntegratorConfig = DEFAULT_CONFIG) -> Evaluation:
    """Gauss-Newton on the residual over the coordinates listed in ``free``.

    ``free`` indexes (tau, a, b). With one free coordinate the two residual
    equations are solved in the least-squares sense.
    """
    free = list(free)
    y = np.array(_coords(guess), dtype=float)
    last = np.inf
    for _ in range(max_iter):
        try:
            ev = evaluate(y, kind, cfg)
        except (IntegrationError, ValueError) as exc:
            raise NoConvergence(f"iterate {y.tolist()} not integrable: {exc}") from exc
        j = ev.jacobian[:, free]
        step, *_ = np.linalg.lstsq(j, -ev.residual, rcond=None)
        y[free] += step
        size = float(np.max(np.abs(step)))
        if size < tol * max(1.0, float(np.max(np.abs(y[free])))) or size >= last > 0 and size < 1e-14:
            return evaluate(y, kind, cfg)
        last = size
    ev = evaluate(y, kind, cfg)
    if np.max(np.abs(step)) > 1e-8:
        raise NoConvergence(f"restricted solve did not settle near {y.tolist()}")
    return ev
