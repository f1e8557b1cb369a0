import time

import numpy as np
import pytest

from iso3bp.boundary import BranchKind, evaluate, newton_correct
from iso3bp.continuation import ToleranceConfig, orient, trace_branch
from iso3bp.fixtures import TABLE_ROWS, p0


@pytest.fixture(scope="session")
def refined_p0():
    ev = evaluate(p0(), BranchKind.ODD_EVEN)
    return newton_correct(p0(), BranchKind.ODD_EVEN, orient(ev.tangent), eps1=1e-12).point


def _timed(fn, *args, **kwargs):
    start = time.perf_counter()
    branch = fn(*args, **kwargs)
    branch.elapsed = time.perf_counter() - start
    return branch


@pytest.fixture(scope="session")
def s1_toward_p2(refined_p0):
    return _timed(trace_branch, refined_p0.coords, BranchKind.ODD_EVEN, ToleranceConfig(orientation=1))


@pytest.fixture(scope="session")
def s1_toward_p3(refined_p0):
    return _timed(trace_branch, refined_p0.coords, BranchKind.ODD_EVEN, ToleranceConfig(orientation=-1))


def _s2_seed():
    row = TABLE_ROWS[0]
    T, a, b = row.coords
    return (T / 2, a, b)


@pytest.fixture(scope="session")
def s2_toward_p1():
    return _timed(trace_branch, _s2_seed(), BranchKind.ODD, ToleranceConfig(orientation=-1))


@pytest.fixture(scope="session")
def s2_through_b():
    from iso3bp.continuation import StopPolicy
    return trace_branch(_s2_seed(), BranchKind.ODD, ToleranceConfig(orientation=1),
                        StopPolicy(max_pillars=100))


def point_on(branch, index, value, free):
    """Curve point of ``branch`` with coordinate ``index`` fixed at ``value``."""
    from iso3bp.boundary import solve_with_fixed
    c = branch.coords()
    hits = np.nonzero(np.diff(np.sign(c[:, index] - value)))[0]
    assert hits.size, "branch never reaches the requested value"
    k = hits[0]
    w = (value - c[k, index]) / (c[k + 1, index] - c[k, index])
    guess = c[k] + w * (c[k + 1] - c[k])
    guess[index] = value
    return solve_with_fixed(guess, branch.kind, free=free)


ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])
