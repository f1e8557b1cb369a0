"""Branch files and trajectory CSV.

A branch file is line oriented text::

    iso3bp-branch 1
    kind odd-even
    tolerance eps1=... eps2=... eps3=... h=... k=200 orientation=1
    termination "left-box"
    detail ""
    points 2
    <tau> <a> <b> <r1> <r2> <pillar 0|1>
    ...
    end

Floats are written with 17 significant digits so binary64 values survive the
round trip; strings are JSON quoted.
"""
from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import numpy as np

from .boundary import BranchKind, CurvePoint
from .continuation import Branch, ToleranceConfig

MAGIC = "iso3bp-branch"
VERSION = 1
BASE_COLUMNS = ("t", "F", "R", "Fdot", "Rdot", "Theta")
EXTENDED_COLUMNS = tuple(f"x{i}" for i in range(6, 16))


class BranchFileError(ValueError):
    pass


def _num(x):
    return f"{float(x):.16e}"


def dumps_branch(branch: Branch) -> str:
    tol = branch.config
    lines = [
        f"{MAGIC} {VERSION}",
        f"kind {branch.kind.value}",
        "tolerance " + " ".join([
            f"eps1={_num(tol.eps1)}", f"eps2={_num(tol.eps2)}", f"eps3={_num(tol.eps3)}",
            f"h={_num(tol.h)}", f"k={tol.k}", f"orientation={tol.orientation}",
        ]),
        f"termination {json.dumps(branch.termination)}",
        f"detail {json.dumps(branch.detail)}",
        f"points {len(branch.points)}",
    ]
    for p in branch.points:
        r1, r2 = p.residual
        lines.append(" ".join([_num(p.tau), _num(p.a), _num(p.b), _num(r1), _num(r2),
                               "1" if p.is_pillar else "0"]))
    lines.append("end")
    return "\n".join(lines) + "\n"


def _field(line, name):
    head, _, rest = line.partition(" ")
    if head != name:
        raise BranchFileError(f"expected '{name}' line, got {line[:40]!r}")
    return rest


def loads_branch(text: str) -> Branch:
    lines = text.splitlines()
    if len(lines) < 7:
        raise BranchFileError("truncated branch file")
    magic = _field(lines[0], MAGIC)
    if magic.strip() != str(VERSION):
        raise BranchFileError(f"unsupported branch file version {magic!r}")
    try:
        kind = BranchKind.parse(_field(lines[1], "kind").strip())
        opts = dict(item.split("=", 1) for item in _field(lines[2], "tolerance").split())
        tol = ToleranceConfig(
            eps1=float(opts["eps1"]), eps2=float(opts["eps2"]), eps3=float(opts["eps3"]),
            h=float(opts["h"]), k=int(opts["k"]), orientation=int(opts["orientation"]),
        )
        termination = json.loads(_field(lines[3], "termination"))
        detail = json.loads(_field(lines[4], "detail"))
        n = int(_field(lines[5], "points"))
    except (KeyError, ValueError) as exc:
        if isinstance(exc, BranchFileError):
            raise
        raise BranchFileError(f"malformed header: {exc}") from exc
    body = lines[6:6 + n]
    if len(body) != n or len(lines) < 7 + n or lines[6 + n].strip() != "end":
        raise BranchFileError("point count does not match body")
    points = []
    for i, line in enumerate(body):
        parts = line.split()
        if len(parts) != 6 or parts[5] not in ("0", "1"):
            raise BranchFileError(f"bad point record on line {i + 7}")
        try:
            tau, a, b, r1, r2 = (float(v) for v in parts[:5])
        except ValueError as exc:
            raise BranchFileError(f"bad number on line {i + 7}") from exc
        points.append(CurvePoint(tau, a, b, kind, (r1, r2), parts[5] == "1"))
    return Branch(kind, tol, points, termination, detail)


def write_branch(branch: Branch, path):
    Path(path).write_text(dumps_branch(branch), encoding="utf-8")


def read_branch(path) -> Branch:
    return loads_branch(Path(path).read_text(encoding="utf-8"))


def dumps_trajectory(t, states) -> str:
    states = np.atleast_2d(np.asarray(states, dtype=float))
    t = np.asarray(t, dtype=float)
    if states.shape[0] != t.size or states.shape[1] not in (5, 15):
        raise ValueError("states must be (n, 5) or (n, 15) matching t")
    header = BASE_COLUMNS + (EXTENDED_COLUMNS if states.shape[1] == 15 else ())
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for ti, row in zip(t, states):
        w.writerow([repr(float(ti))] + [repr(float(v)) for v in row])
    return buf.getvalue()


def loads_trajectory(text: str):
    """(t, states) from CSV text written by :func:`dumps_trajectory`."""
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        raise ValueError("empty trajectory file")
    header = tuple(rows[0])
    if header not in (BASE_COLUMNS, BASE_COLUMNS + EXTENDED_COLUMNS):
        raise ValueError(f"unexpected trajectory columns {header}")
    data = np.array([[float(v) for v in r] for r in rows[1:] if r], dtype=float)
    data = data.reshape(-1, len(header))
    return data[:, 0], data[:, 1:]


def write_trajectory(path, t, states):
    Path(path).write_text(dumps_trajectory(t, states), encoding="utf-8")


def read_trajectory(path):
    return loads_trajectory(Path(path).read_text(encoding="utf-8"))
