"""Periodic solutions of the isosceles-symmetric three-body problem.

Two equal masses orbit the z-axis while a heavier body oscillates along it.
The package integrates the reduced equations with an adaptive Taylor method,
traces the curves of odd/even and odd periodic solutions in (tau, a, b) space,
locates their crossing and picks out orbits whose rotation angle is a rational
multiple of pi.
"""
from .bifurcation import find_bifurcation
from .boundary import BranchKind, CurvePoint, evaluate, newton_correct, residual
from .continuation import Branch, StopPolicy, ToleranceConfig, trace_branch
from .dynamics import ExtendedState, Parameters, ReducedState, energy
from .errors import NumericalError
from .integrator import DEFAULT_CONFIG, IntegratorConfig, integrate_to
from .periodic import locate_rational_theta, verify_row

__all__ = [
    "Branch", "BranchKind", "CurvePoint", "DEFAULT_CONFIG", "ExtendedState",
    "IntegratorConfig", "NumericalError", "Parameters", "ReducedState", "StopPolicy",
    "ToleranceConfig", "energy", "evaluate", "find_bifurcation", "integrate_to",
    "locate_rational_theta", "newton_correct", "residual", "trace_branch", "verify_row",
]
