"""Distance minimizers between the equality hyperplane and the box.

For an infeasible problem the iteration's primal pair converges to the closest
points (y_circ, w_circ) of the two constraint sets, shifted by a common
objective-dependent null-space displacement y_q, while the multiplier drifts
along lambda_circ = w_circ - y_circ.  This module computes those quantities
independently of any iteration run and verifies a finished run against them.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import oracle as _oracle
from .operators import null_range_basis
from .problem import QpProblem

__all__ = [
    "InfeasibilityCertificate",
    "LimitReport",
    "build_certificate",
    "certificate_to_dict",
    "infeasibility_minimizer",
    "objective_shift",
    "verify_limit",
]


def infeasibility_minimizer(problem, y_start=None, step_tol=1e-10, max_iter=1_000_000):
    """Closest pair between {A y = b} and the box via alternating projections.

    Returns ``(y_circ, w_circ, distance)`` with ``A y_circ = b``, ``w_circ`` in
    the box and ``distance = ||y_circ - w_circ||`` the minimum separation of
    the two sets (zero exactly when the problem is feasible).  The range-space
    components of the pair are unique; the null-space component is pinned by
    starting from the minimum-norm particular solution unless ``y_start``
    (any point satisfying the equalities) is given.
    """
    n, m = problem.n, problem.m
    box = problem.box
    if m == 0:
        w = box.clip(np.zeros(n) if y_start is None else np.asarray(y_start, dtype=float))
        return w.copy(), w.copy(), 0.0

    R, _ = null_range_basis(problem.A)
    AR = problem.A @ R
    range_part = R @ np.linalg.solve(AR, problem.b)
    if y_start is None:
        y = range_part.copy()
    else:
        y = np.asarray(y_start, dtype=float).copy()
        if np.linalg.norm(problem.A @ y - problem.b) > 1e-8 * (1.0 + np.linalg.norm(problem.b)):
            raise ValueError("y_start does not satisfy the equality constraints")
    w = box.clip(y)
    for _ in range(max_iter):
        y_new = w + R @ (R.T @ (range_part - w))
        w_new = box.clip(y_new)
        step = np.linalg.norm(y_new - y) + np.linalg.norm(w_new - w)
        y, w = y_new, w_new
        if step <= step_tol:
            break
    return y, w, float(np.linalg.norm(y - w))


def objective_shift(problem, y_circ, w_circ):
    """Objective-aware null-space displacement (y_q, lambda_q).

    Solves the strictly convex reduced program

        minimize 0.5 z @ (Z^T Q Z) @ z + (Z^T q + Z^T Q y_circ) @ z
        subject to w_circ + Z z in the box

    through the enumeration oracle, and lifts the solution back:
    y_q = Z z in the null space of A, lambda_q the bound multiplier.  The
    lifted pair satisfies Z^T (Q (y_circ + y_q) + q - lambda_q) = 0 together
    with the complementarity of lambda_q at w_circ + y_q.
    """
    y_circ = np.asarray(y_circ, dtype=float)
    w_circ = np.asarray(w_circ, dtype=float)
    R, Z = null_range_basis(problem.A)
    n = problem.n
    Qs = 0.5 * (problem.Q + problem.Q.T)

    # Same program written in x = w_circ + Z z: quadratic in x restricted to
    # the affine slice R^T x = R^T w_circ, keeping the original box.
    P = Z @ Z.T
    Qx = P @ Qs @ P
    Qx = 0.5 * (Qx + Qx.T)
    qx = P @ (problem.q + Qs @ y_circ) - Qx @ w_circ
    shifted = QpProblem(Q=Qx, q=qx, A=R.T, b=R.T @ w_circ,
                        lower=problem.lower, upper=problem.upper)
    result = _oracle.oracle_solve(shifted)
    if result.status != _oracle.OPTIMAL:
        raise RuntimeError("reduced shift program was reported infeasible; "
                           "w_circ should always be a feasible point")
    x = result.kkt.y_star
    y_q = Z @ (Z.T @ (x - w_circ))
    lam_q = result.kkt.lambda_star
    return y_q, lam_q


@dataclass(frozen=True)
class InfeasibilityCertificate:
    """Computed minimizer pair plus the observed divergence fingerprint."""

    y_circ: np.ndarray
    w_circ: np.ndarray
    lambda_circ: np.ndarray
    y_q: np.ndarray | None
    lambda_q: np.ndarray | None
    distance: float
    omega: float
    drift_count: float


def build_certificate(problem, rows):
    """Assemble a certificate from the problem and the tail of a trace.

    The minimizer pair and the shift come from their own computations; omega
    (limit of the DR step norm) and the per-iteration multiplier drift are
    medians over the last sampled rows.
    """
    y_circ, w_circ, distance = infeasibility_minimizer(problem)
    lam_circ = w_circ - y_circ
    y_q = lam_q = None
    if distance > _oracle.FEASIBLE_GAP_TOL and problem.n <= _oracle.MAX_ORACLE_DIM:
        y_q, lam_q = objective_shift(problem, y_circ, w_circ)

    tail = [r for r in rows[-10:] if np.isfinite(r.norm_dv)]
    omega = float(np.median([r.norm_dv for r in tail])) if tail else float("nan")
    drift = float("nan")
    if tail and distance > 0.0:
        drift = float(np.median([r.norm_dlam for r in tail])) / float(np.linalg.norm(lam_circ))
    return InfeasibilityCertificate(y_circ=y_circ, w_circ=w_circ, lambda_circ=lam_circ,
                                    y_q=y_q, lambda_q=lam_q, distance=distance,
                                    omega=omega, drift_count=drift)


def certificate_to_dict(cert, checks=None):
    def enc(v):
        return None if v is None else np.asarray(v, dtype=float).tolist()

    doc = {
        "y_circ": enc(cert.y_circ),
        "w_circ": enc(cert.w_circ),
        "lambda_circ": enc(cert.lambda_circ),
        "y_q": enc(cert.y_q),
        "lambda_q": enc(cert.lambda_q),
        "distance": cert.distance,
        "omega": cert.omega,
        "drift_count": cert.drift_count,
    }
    if checks is not None:
        doc["checks"] = checks
    return doc


@dataclass
class LimitReport:
    """Per-check verdicts comparing a finished run against a certificate."""

    checks: dict = field(default_factory=dict)
    values: dict = field(default_factory=dict)
    misuse: str | None = None

    @property
    def ok(self):
        return self.misuse is None and all(self.checks.values())


def verify_limit(result, certificate, problem, eps_a=1e-3, tol_v=None):
    """Check the final iterate of an infeasible run against its certificate.

    Verifies (at ``tol_v``, default 1e-4 * (1 + ||y_circ||)): the primal
    iterates sit at the shifted minimizer pair, the per-iteration multiplier
    drift w - y equals lambda_circ, the null-space component of the unscaled
    multiplier matches lambda_q, and the final alignment angle is within
    ``eps_a`` of one.  A run that did not report infeasibility is flagged as
    misuse instead of checked.
    """
    report = LimitReport()
    if result.status != "infeasible":
        report.misuse = f"run finished with status {result.status!r}, not infeasible"
        return report
    cert = certificate
    if tol_v is None:
        tol_v = 1e-4 * (1.0 + float(np.linalg.norm(cert.y_circ)))

    state = result.final_state
    y_q = cert.y_q if cert.y_q is not None else np.zeros(problem.n)
    _, Z = null_range_basis(problem.A)

    def record(name, value, tol):
        report.values[name] = float(value)
        report.checks[name] = bool(value <= tol)

    record("primal_y", np.linalg.norm(state.y - (cert.y_circ + y_q)), tol_v)
    record("primal_w", np.linalg.norm(state.w - (cert.w_circ + y_q)), tol_v)
    # lambda update step equals w - y at the same iteration.
    record("multiplier_drift", np.linalg.norm((state.w - state.y) - cert.lambda_circ), tol_v)
    if cert.lambda_q is not None:
        # The unscaled multiplier carries the beta factor.
        znorm = np.linalg.norm(Z.T @ (result.beta * state.lam) - Z.T @ cert.lambda_q)
        record("null_space_multiplier", znorm, tol_v)
    cos = result.trace[-1].cos_theta if result.trace else float("nan")
    report.values["angle"] = float(cos)
    report.checks["angle"] = bool(np.isfinite(cos) and cos >= 1.0 - eps_a)
    return report
