"""Canonical two-variable test problems with known structure.

qpex1 is a feasible QP whose solution sits on one bound; qpex2 rescales it to
steer the constraint/bound angle and the bound distances; qpex3 is infeasible
with a unique closest pair between the hyperplane and the box; the qpex3
variant pins the second coordinate so the closest pair is unique only in the
range space; nonstrict makes the bound multiplier vanish at an active bound.
"""

from __future__ import annotations

import numpy as np

from .problem import QpProblem

__all__ = ["BUILTIN_NAMES", "make_builtin", "nonstrict", "qpex1", "qpex2",
           "qpex3", "qpex3_variant"]

_INF = np.inf


def qpex1():
    """min 0.5 y@y - 3 y2  s.t.  y1 + y2 = 1,  y >= 0; solution (0, 1)."""
    return QpProblem(Q=np.eye(2), q=[0.0, -3.0], A=[[1.0, 1.0]], b=[1.0],
                     lower=[0.0, 0.0], upper=[_INF, _INF])


def qpex2(kappa1=1.0, kappa2=1.0):
    """qpex1 with coordinates rescaled by kappa1, kappa2; solution (0, 1/kappa2)."""
    k1, k2 = float(kappa1), float(kappa2)
    return QpProblem(Q=np.diag([k1 ** 2, k2 ** 2]), q=[0.0, -3.0 * k2],
                     A=[[k1, k2]], b=[1.0], lower=[0.0, 0.0], upper=[_INF, _INF])


def nonstrict(kappa1=1.0, kappa2=1.0):
    """qpex2 with the linear cost shifted so the active bound multiplier is zero."""
    k1, k2 = float(kappa1), float(kappa2)
    return QpProblem(Q=np.diag([k1 ** 2, k2 ** 2]), q=[-2.0 * k1, -3.0 * k2],
                     A=[[k1, k2]], b=[1.0], lower=[0.0, 0.0], upper=[_INF, _INF])


def qpex3():
    """Infeasible: y1 - y2 = -1 never meets [-2,2] x [5,10]; closest pair (3,4)/(2,5)."""
    return QpProblem(Q=np.eye(2), q=[0.0, -3.0], A=[[1.0, -1.0]], b=[-1.0],
                     lower=[-2.0, 5.0], upper=[2.0, 10.0])


def qpex3_variant(q1=0.0):
    """qpex3 with the constraint replaced by y2 = 1 and a variable first cost entry."""
    return QpProblem(Q=np.eye(2), q=[float(q1), -3.0], A=[[0.0, 1.0]], b=[1.0],
                     lower=[-2.0, 5.0], upper=[2.0, 10.0])


BUILTIN_NAMES = ("qpex1", "qpex2", "qpex3", "qpex3-variant", "nonstrict")


def make_builtin(name, kappa1=1.0, kappa2=1.0, q1=0.0):
    """Instantiate a named built-in problem with its scaling parameters."""
    if name == "qpex1":
        return qpex1()
    if name == "qpex2":
        return qpex2(kappa1, kappa2)
    if name == "qpex3":
        return qpex3()
    if name == "qpex3-variant":
        return qpex3_variant(q1)
    if name == "nonstrict":
        return nonstrict(kappa1, kappa2)
    raise ValueError(f"unknown builtin {name!r}; choose from {', '.join(BUILTIN_NAMES)}")
