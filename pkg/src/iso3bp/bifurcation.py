"""Locate the crossing of the odd/even curve S1 with the odd curve S2.

On S1, the odd-system tangent Z evaluated at the half period is parallel to
S1 itself and vanishes where S2 crosses. The crossing is taken as the
minimiser of |Z| along S1, refined by golden-section search on arc length.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .boundary import BranchKind, CurvePoint, evaluate, newton_correct
from .continuation import Branch
from .errors import NoInteriorMinimum
from .integrator import DEFAULT_CONFIG, IntegratorConfig

INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass
class BifurcationReport:
    point: CurvePoint
    z_norm: float
    bracket: tuple
    history: list = field(default_factory=list)

    @property
    def full_period_coords(self):
        return (self.point.period, self.point.a, self.point.b)


def z_norm(coords, cfg: IntegratorConfig = DEFAULT_CONFIG):
    """|Z| at the half period of an odd/even point given as (tau, a, b)."""
    tau, a, b = coords
    return float(np.linalg.norm(evaluate((2.0 * tau, a, b), BranchKind.ODD, cfg).tangent))


def z_x_angle(coords, cfg: IntegratorConfig = DEFAULT_CONFIG):
    """Angle between Z (odd coordinates) and X mapped to odd coordinates."""
    tau, a, b = coords
    x = evaluate((tau, a, b), BranchKind.ODD_EVEN, cfg).tangent * np.array([2.0, 1.0, 1.0])
    z = evaluate((2.0 * tau, a, b), BranchKind.ODD, cfg).tangent
    c = abs(x @ z) / (np.linalg.norm(x) * np.linalg.norm(z))
    return math.acos(min(1.0, c)), float(np.linalg.norm(z))


def z_profile(branch: Branch, cfg: IntegratorConfig = DEFAULT_CONFIG, stride=1, indices=None):
    """Array of (arc length, |Z|) rows over the branch points."""
    if branch.kind is not BranchKind.ODD_EVEN:
        raise ValueError("z_profile needs an odd/even branch")
    s = branch.arc_length()
    idx = range(0, len(branch.points), stride) if indices is None else indices
    return np.array([(s[i], z_norm(branch.points[i].coords, cfg)) for i in idx])


def discrete_minimum(values):
    """Index of the smallest value; raises if it sits at either end."""
    values = np.asarray(values, dtype=float)
    if values.size < 3:
        raise NoInteriorMinimum("need at least three samples")
    i = int(np.argmin(values))
    if i == 0 or i == values.size - 1:
        raise NoInteriorMinimum(f"minimum at endpoint index {i}")
    return i


def _project(coords, direction, cfg):
    return newton_correct(coords, BranchKind.ODD_EVEN, direction, eps1=1e-11,
                          max_iter=30, cfg=cfg)


def find_bifurcation(branch: Branch, cfg: IntegratorConfig = DEFAULT_CONFIG,
                     xtol=1e-6) -> BifurcationReport:
    if len(branch.points) < 3:
        raise ValueError("branch needs at least three points")
    pts = branch.points
    coords = branch.coords()
    s = branch.arc_length()

    # pillars first, then every stored point between the neighbours of the best pillar
    pillar_idx = [i for i, p in enumerate(pts) if p.is_pillar]
    if len(pillar_idx) >= 3:
        coarse = [z_norm(coords[i], cfg) for i in pillar_idx]
        j = discrete_minimum(coarse)
        lo, hi = pillar_idx[j - 1], pillar_idx[j + 1]
    else:
        lo, hi = 0, len(pts) - 1
    fine_idx = list(range(lo, hi + 1))
    fine = [z_norm(coords[i], cfg) for i in fine_idx]
    j = int(np.argmin(fine))
    if (j == 0 and lo == 0) or (j == len(fine) - 1 and hi == len(pts) - 1):
        raise NoInteriorMinimum("minimum of |Z| at a branch endpoint")
    j = min(max(j, 1), len(fine) - 2)
    i0, i1 = fine_idx[j - 1], fine_idx[j + 1]
    coarse_min = fine[j]

    def point_at(sv):
        k = int(np.searchsorted(s, sv, side="right")) - 1
        k = min(max(k, i0), i1 - 1)
        span = s[k + 1] - s[k]
        w = 0.0 if span == 0 else (sv - s[k]) / span
        chord = coords[k + 1] - coords[k]
        guess = coords[k] + w * chord
        return _project(guess, chord, cfg)

    cache = {}

    def f(sv):
        if sv not in cache:
            corr = point_at(sv)
            cache[sv] = (z_norm(corr.point.coords, cfg), corr.point)
        return cache[sv][0]

    a, b = s[i0], s[i1]
    c = b - INVPHI * (b - a)
    d = a + INVPHI * (b - a)
    history = []
    best = min(coarse_min, f(c), f(d))
    history.append(best)
    while b - a > xtol:
        if f(c) < f(d):
            b, d = d, c
            c = b - INVPHI * (b - a)
        else:
            a, c = c, d
            d = a + INVPHI * (b - a)
        best = min(best, f(c), f(d))
        history.append(best)
    key = min(cache, key=lambda k: cache[k][0])
    zmin, pt = cache[key]
    if zmin > coarse_min:
        # the projected samples never beat the stored point itself
        zmin, pt = coarse_min, pts[fine_idx[j]]
    return BifurcationReport(pt, zmin, (pts[i0], pts[i1]), history)
