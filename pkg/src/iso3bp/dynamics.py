"""Reduced and extended equations of motion for the symmetric three-body family.

Body 1 (mass 200) moves on the z axis at height ``F``. Bodies 2 and 3 (mass
100 each) sit at ``(+-R cos(Theta), +-R sin(Theta), -F)``. With ``G = 1`` the
motion reduces to the five variables ``(F, R, Fdot, Rdot, Theta)``; the two
family parameters are ``a`` (angular momentum scale, ``R**2 Thetadot = 10 a``)
and ``b`` (the initial vertical velocity ``Fdot(0)``).

State vectors are plain numpy arrays in the order ``x1..x5`` (reduced) or
``x1..x15`` (extended: state, d/da block, d/db block).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import CollisionError

R0 = 10.0
MASSES = (200.0, 100.0, 100.0)
COLLISION_FLOOR = 1e-8

# a**2 at which R = 10, F = 0 is a relative equilibrium (0.1 a**2 = 2.25)
A_CIRCULAR = float(np.sqrt(22.5))


def _as_vector(x, size):
    x = np.array(x, dtype=float)
    if x.shape != (size,):
        raise ValueError(f"expected {size} components, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("state has non-finite components")
    if x[1] <= 0.0:
        raise CollisionError(f"R must be positive, got {x[1]!r}")
    x.flags.writeable = False
    return x


@dataclass(frozen=True)
class Parameters:
    a: float
    b: float

    def __post_init__(self):
        if not (np.isfinite(self.a) and np.isfinite(self.b)):
            raise ValueError("parameters must be finite")


@dataclass(frozen=True, eq=False)
class ReducedState:
    """(F, R, Fdot, Rdot, Theta) at time ``t``."""

    t: float
    x: np.ndarray = field(repr=False)

    size = 5

    def __post_init__(self):
        object.__setattr__(self, "x", _as_vector(self.x, self.size))
        object.__setattr__(self, "t", float(self.t))

    def __eq__(self, other):
        return (
            type(other) is type(self)
            and self.t == other.t
            and np.array_equal(self.x, other.x)
        )

    def __repr__(self):
        body = ", ".join(f"{v:.17g}" for v in self.x)
        return f"{type(self).__name__}(t={self.t:.17g}, x=[{body}])"

    F = property(lambda self: float(self.x[0]))
    R = property(lambda self: float(self.x[1]))
    Fdot = property(lambda self: float(self.x[2]))
    Rdot = property(lambda self: float(self.x[3]))
    Theta = property(lambda self: float(self.x[4]))

    @property
    def S(self):
        return float(np.hypot(self.x[1], 2.0 * self.x[0]))

    @classmethod
    def initial(cls, p: Parameters):
        return cls(0.0, [0.0, R0, p.b, 0.0, 0.0])


@dataclass(frozen=True, eq=False, repr=False)
class ExtendedState(ReducedState):
    """Reduced state plus its partial derivatives in ``a`` (x6..x10) and ``b`` (x11..x15)."""

    size = 15

    @classmethod
    def initial(cls, p: Parameters):
        x = np.zeros(15)
        x[1] = R0
        x[2] = p.b
        x[12] = 1.0
        return cls(0.0, x)

    def reduced(self) -> ReducedState:
        return ReducedState(self.t, self.x[:5])

    @property
    def d_da(self):
        return self.x[5:10]

    @property
    def d_db(self):
        return self.x[10:15]


@dataclass(frozen=True)
class BodyPositions:
    body1: np.ndarray
    body2: np.ndarray
    body3: np.ndarray

    def as_array(self):
        return np.stack([self.body1, self.body2, self.body3])

    def center_of_mass(self):
        m = np.asarray(MASSES)
        return m @ self.as_array() / m.sum()


def _check_collision(x1, x2, floor, t=None):
    if x2 <= floor:
        raise CollisionError(f"R = {x2!r} at or below collision floor {floor:g}", t)
    if np.hypot(x2, 2.0 * x1) <= floor:
        raise CollisionError("S at or below collision floor", t)


def _rhs5(x, a):
    x1, x2, x3, x4 = x[0], x[1], x[2], x[3]
    s3 = (4.0 * x1 * x1 + x2 * x2) ** 1.5
    return np.array([
        x3,
        x4,
        -400.0 * x1 / s3,
        100.0 * a * a / x2**3 - 25.0 / x2**2 - 200.0 * x2 / s3,
        10.0 * a / x2**2,
    ])


def rhs_original(s: ReducedState, p: Parameters, collision_floor=COLLISION_FLOOR):
    """Time derivative of the reduced state."""
    x = s.x
    _check_collision(x[0], x[1], collision_floor, s.t)
    return _rhs5(x, p.a)


def _rhs15(x, a):
    x1, x2 = x[0], x[1]
    x6, x7, x8, x9 = x[5], x[6], x[7], x[8]
    x11, x12, x13, x14 = x[10], x[11], x[12], x[13]
    u = 4.0 * x1 * x1 + x2 * x2
    w = u**-1.5
    v = u**-2.5
    out = np.empty(15)
    out[:5] = _rhs5(x, a)
    # d/da block
    out[5] = x8
    out[6] = x9
    out[7] = 3200 * x6 * x1**2 * v + 1200 * x2 * x7 * x1 * v - 400 * x2**2 * x6 * v
    out[8] = (
        -300 * a * a * x7 / x2**4 + 200 * a / x2**3 + 2400 * x1 * x2 * x6 * v
        + 50 * x7 / x2**3 + 600 * x2**2 * x7 * v - 200 * x7 * w
    )
    out[9] = 10 / x2**2 - 20 * a * x7 / x2**3
    # d/db block: same linearisation, no explicit b dependence
    out[10] = x13
    out[11] = x14
    out[12] = 3200 * x11 * x1**2 * v + 1200 * x2 * x12 * x1 * v - 400 * x2**2 * x11 * v
    out[13] = (
        -300 * a * a * x12 / x2**4 + 2400 * x1 * x2 * x11 * v
        + 50 * x12 / x2**3 + 600 * x2**2 * x12 * v - 200 * x12 * w
    )
    out[14] = -20 * a * x12 / x2**3
    return out


def rhs_extended(s: ExtendedState, p: Parameters, collision_floor=COLLISION_FLOOR):
    """Time derivative of the 15-component extended state."""
    x = s.x
    _check_collision(x[0], x[1], collision_floor, s.t)
    return _rhs15(x, p.a)


def energy(s: ReducedState, p: Parameters, collision_floor=COLLISION_FLOOR):
    """Total energy of the embedded three-body configuration (conserved)."""
    x1, x2, x3, x4 = s.x[:4]
    _check_collision(x1, x2, collision_floor, s.t)
    S = np.hypot(x2, 2.0 * x1)
    return float(
        200.0 * x3**2 + 100.0 * x4**2 + 10000.0 * p.a**2 / x2**2
        - 40000.0 / S - 5000.0 / x2
    )


def embed_positions(s: ReducedState) -> BodyPositions:
    F, R, th = s.x[0], s.x[1], s.x[4]
    c, sn = np.cos(th), np.sin(th)
    return BodyPositions(
        np.array([0.0, 0.0, F]),
        np.array([R * c, R * sn, -F]),
        np.array([-R * c, -R * sn, -F]),
    )


def embed_velocities(s: ReducedState, p: Parameters) -> BodyPositions:
    """Cartesian velocities of the three bodies, packed like positions."""
    F, R, Fd, Rd, th = s.x[:5]
    thd = 10.0 * p.a / R**2
    c, sn = np.cos(th), np.sin(th)
    v2 = np.array([Rd * c - R * thd * sn, Rd * sn + R * thd * c, -Fd])
    return BodyPositions(np.array([0.0, 0.0, Fd]), v2, -v2 * np.array([1, 1, -1]))


def pair_distances(s: ReducedState):
    """(distance between the two orbiting bodies, distance axis body to an orbiter)."""
    pos = embed_positions(s)
    d_outer = float(np.linalg.norm(pos.body2 - pos.body3))
    d_axis = float(np.linalg.norm(pos.body2 - pos.body1))
    return d_outer, d_axis
