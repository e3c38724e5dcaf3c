"""Exhaustive KKT reference solver for tiny problems.

Every coordinate is assigned one of {free, at-lower, at-upper} (bound states
only where the bound is finite), the resulting equality-constrained KKT system
is solved directly, and the first assignment in lexicographic order whose
solution is primal feasible with correctly signed multipliers wins.  This is a
correctness oracle, not a solver: cost grows as 3^n and the dimension is
capped accordingly.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .operators import null_range_basis
from .problem import Box, KktPoint

__all__ = ["MAX_ORACLE_DIM", "OracleResult", "oracle_solve"]

MAX_ORACLE_DIM = 12
FEASIBLE_GAP_TOL = 1e-8

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"


@dataclass(frozen=True)
class OracleResult:
    status: str
    kkt: KktPoint | None
    active_set: np.ndarray | None
    licq: bool | None


def _box_hyperplane_gap(problem, step_tol=1e-12, max_iter=200000):
    # Alternating projections between {A y = b} and the box; the limiting
    # separation is the minimum distance between the two sets.
    n, m = problem.n, problem.m
    box = problem.box
    if m == 0:
        return 0.0
    R, _ = null_range_basis(problem.A)
    AR = problem.A @ R
    rr_yp = R @ np.linalg.solve(AR, problem.b)
    y = rr_yp.copy()
    w = box.clip(y)
    for _ in range(max_iter):
        y_new = w + R @ (R.T @ (rr_yp - w))
        w_new = box.clip(y_new)
        if np.linalg.norm(y_new - y) + np.linalg.norm(w_new - w) <= step_tol:
            y, w = y_new, w_new
            break
        y, w = y_new, w_new
    return float(np.linalg.norm(y - w))


def _coordinate_states(problem):
    states = []
    for i in range(problem.n):
        opts = ["F"]
        if np.isfinite(problem.lower[i]):
            opts.append("L")
        if np.isfinite(problem.upper[i]):
            opts.append("U")
        states.append(opts)
    return states


def _try_assignment(problem, assignment, tol):
    n, m = problem.n, problem.m
    Q, q, A, b = problem.Q, problem.q, problem.A, problem.b
    free = [i for i, s in enumerate(assignment) if s == "F"]
    fixed = [i for i, s in enumerate(assignment) if s != "F"]
    y = np.zeros(n)
    for i in fixed:
        y[i] = problem.lower[i] if assignment[i] == "L" else problem.upper[i]

    nf = len(free)
    K = np.zeros((nf + m, nf + m))
    K[:nf, :nf] = Q[np.ix_(free, free)]
    if m:
        K[:nf, nf:] = A[:, free].T
        K[nf:, :nf] = A[:, free]
    rhs = np.concatenate([
        -q[free] - Q[np.ix_(free, fixed)] @ y[fixed],
        b - A[:, fixed] @ y[fixed],
    ])
    if K.size:
        try:
            sol = np.linalg.solve(K, rhs)
        except np.linalg.LinAlgError:
            return None
        if not np.all(np.isfinite(sol)):
            return None
    else:
        sol = rhs  # no unknowns
    y[free] = sol[:nf]
    xi = sol[nf:]

    if m and np.linalg.norm(A @ y - b) > tol * (1.0 + np.linalg.norm(b)):
        return None
    if np.any(y < problem.lower - tol) or np.any(y > problem.upper + tol):
        return None
    lam = Q @ y + q + A.T @ xi
    for i in free:
        lam[i] = 0.0
    for i in fixed:
        if assignment[i] == "L" and lam[i] < -tol:
            return None
        if assignment[i] == "U" and lam[i] > tol:
            return None
    return KktPoint(y_star=y, xi_star=xi, lambda_star=lam)


def _active_indices(problem, y, tol):
    scale = tol * (1.0 + np.abs(y))
    at = (y <= problem.lower + scale) | (y >= problem.upper - scale)
    return np.flatnonzero(at)


def _licq_holds(problem, active):
    R, _ = null_range_basis(problem.A)
    E = np.eye(problem.n)[:, active]
    stacked = np.hstack([R, E])
    if stacked.shape[1] == 0:
        return True
    return int(np.linalg.matrix_rank(stacked)) == stacked.shape[1]


def oracle_solve(problem, tol=1e-10, active_tol=1e-8):
    """Solve a tiny QP by exhaustive active-set enumeration.

    Returns an OracleResult whose status is ``infeasible`` when alternating
    projections leave a gap above 1e-8 between the equality hyperplane and the
    box, and ``optimal`` otherwise, carrying the first KKT point found in
    lexicographic assignment order (free before lower before upper).  The
    ``licq`` flag records whether the active bound gradients together with the
    equality rows are linearly independent; when it is False the multipliers
    need not be unique and the lexicographic tie-break is what pins them.
    """
    if problem.n > MAX_ORACLE_DIM:
        raise ValueError(
            f"oracle enumeration is capped at n = {MAX_ORACLE_DIM}, got n = {problem.n}")
    if _box_hyperplane_gap(problem) > FEASIBLE_GAP_TOL:
        return OracleResult(status=INFEASIBLE, kkt=None, active_set=None, licq=None)

    for assignment in itertools.product(*_coordinate_states(problem)):
        point = _try_assignment(problem, assignment, tol)
        if point is None:
            continue
        active = _active_indices(problem, point.y_star, active_tol)
        return OracleResult(status=OPTIMAL, kkt=point, active_set=active,
                            licq=_licq_holds(problem, active))
    raise RuntimeError("no KKT assignment satisfied feasibility and multiplier signs; "
                       "problem likely violates the positive-definiteness assumption")
