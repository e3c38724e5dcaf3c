"""Projection and reflection onto boxes, plus the complementarity check."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["ProjectionResult", "check_vi", "project_box", "reflect_box"]


@dataclass(frozen=True)
class ProjectionResult:
    """Projected point w and the increment lam = w - v it induces."""

    w: np.ndarray
    lam: np.ndarray


def project_box(v, box):
    """Euclidean projection of v onto the box.

    The returned pair satisfies the variational inequality: w is in the box and
    lam = w - v is nonnegative where w sits at a lower bound, nonpositive at an
    upper bound, and zero elsewhere.
    """
    v = np.asarray(v, dtype=float)
    w = box.clip(v)
    return ProjectionResult(w=w, lam=w - v)


def reflect_box(v, box):
    """Reflection 2 * project(v) - v across the box."""
    v = np.asarray(v, dtype=float)
    return 2.0 * box.clip(v) - v


def check_vi(w, lam, box, tol=1e-8):
    """True iff w lies in the box and lam satisfies the sign conditions, to tol.

    At a lower bound lam must be >= -tol, at an upper bound <= tol, and in the
    interior |lam| <= tol.  Membership of w itself is checked to the same tol.
    """
    w = np.asarray(w, dtype=float)
    lam = np.asarray(lam, dtype=float)
    if not box.contains(w, tol=tol):
        return False
    at_lower = w <= box.lower + tol
    at_upper = w >= box.upper - tol
    interior = ~at_lower & ~at_upper
    bad = (interior & (np.abs(lam) > tol))
    bad |= at_lower & ~at_upper & (lam < -tol)
    bad |= at_upper & ~at_lower & (lam > tol)
    return not bool(bad.any())
