"""Dense QP containers, validation, and canonical JSON I/O.

The canonical problem is

    minimize    q @ y + 0.5 * y @ Q @ y
    subject to  A @ y == b
                lower <= y <= upper   (componentwise, bounds may be infinite)

with ``Q`` symmetric, ``A`` of full row rank ``m <= n``, and every coordinate
satisfying ``lower[i] < upper[i]``.  All storage is dense; the intended scale
is n <= 500.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "AssumptionViolation",
    "Box",
    "KktPoint",
    "ProblemFormatError",
    "QpProblem",
    "ValidationReport",
    "kkt_residuals",
    "load_problem",
    "load_problem_file",
    "save_problem",
    "validate",
]

SYMMETRY_TOL = 1e-12


class ProblemFormatError(ValueError):
    """A problem document could not be parsed into a QpProblem."""


class AssumptionViolation(ValueError):
    """An operation was asked to run on a problem that breaks its assumptions."""


def _as_vector(x, n=None):
    v = np.asarray(x, dtype=float).reshape(-1)
    if n is not None and v.size != n:
        raise ValueError(f"expected vector of length {n}, got {v.size}")
    return v


@dataclass(frozen=True)
class Box:
    """Per-coordinate interval [lower, upper]; entries may be -inf / +inf."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "lower", _as_vector(self.lower))
        object.__setattr__(self, "upper", _as_vector(self.upper, self.lower.size))

    @property
    def n(self):
        return self.lower.size

    def is_ordered(self):
        return bool(np.all(self.lower < self.upper))

    def clip(self, v):
        """Componentwise clamp of v into the box (no arithmetic on infinities)."""
        return np.minimum(np.maximum(np.asarray(v, dtype=float), self.lower), self.upper)

    def contains(self, w, tol=0.0):
        w = np.asarray(w, dtype=float)
        return bool(np.all(w >= self.lower - tol) and np.all(w <= self.upper + tol))


@dataclass(frozen=True)
class QpProblem:
    """A dense box-and-equality constrained QP instance.

    Dimensional consistency is enforced at construction; the assumption-level
    checks (row rank, bound ordering, symmetry, reduced-Hessian definiteness)
    are reported by :func:`validate` instead of raised here, so that invalid
    instances can be inspected.
    """

    Q: np.ndarray
    q: np.ndarray
    A: np.ndarray
    b: np.ndarray
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        Q = np.atleast_2d(np.asarray(self.Q, dtype=float))
        q = _as_vector(self.q)
        n = q.size
        if Q.shape != (n, n):
            raise ValueError(f"Q has shape {Q.shape}, expected ({n}, {n})")
        A = np.asarray(self.A, dtype=float)
        if A.size == 0:
            A = A.reshape(0, n)
        A = np.atleast_2d(A)
        if A.shape[1] != n:
            raise ValueError(f"A has {A.shape[1]} columns, expected {n}")
        b = _as_vector(self.b, A.shape[0])
        lower = _as_vector(self.lower, n)
        upper = _as_vector(self.upper, n)
        for name, arr in (("Q", Q), ("q", q), ("A", A), ("b", b)):
            if np.isnan(arr).any():
                raise ValueError(f"{name} contains NaN entries")
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def n(self):
        return self.q.size

    @property
    def m(self):
        return self.A.shape[0]

    @property
    def box(self):
        return Box(self.lower, self.upper)

    def objective(self, y):
        y = _as_vector(y, self.n)
        return float(self.q @ y + 0.5 * y @ self.Q @ y)


@dataclass(frozen=True)
class KktPoint:
    """Primal point with equality and (unscaled) bound multipliers."""

    y_star: np.ndarray
    xi_star: np.ndarray
    lambda_star: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "y_star", _as_vector(self.y_star))
        object.__setattr__(self, "xi_star", _as_vector(self.xi_star))
        object.__setattr__(self, "lambda_star", _as_vector(self.lambda_star, self.y_star.size))


def kkt_residuals(problem, point, active_tol=1e-8):
    """Residuals of the first-order optimality system at ``point``.

    Returns a dict with keys ``stationarity`` (norm of Q y + A^T xi - lam + q),
    ``primal`` (norm of A y - b), ``box`` (largest bound violation of y) and
    ``complementarity`` (largest sign violation of the bound multipliers, with
    activity decided at ``active_tol`` relative slack).
    """
    y, xi, lam = point.y_star, point.xi_star, point.lambda_star
    stat = problem.Q @ y + problem.A.T @ xi - lam + problem.q
    primal = problem.A @ y - problem.b
    box_viol = np.maximum(problem.lower - y, y - problem.upper)
    box_viol = float(max(0.0, box_viol.max())) if y.size else 0.0

    scale = active_tol * (1.0 + np.abs(y))
    at_lower = y <= problem.lower + scale
    at_upper = y >= problem.upper - scale
    comp = np.where(at_lower & ~at_upper, np.maximum(0.0, -lam),
                    np.where(at_upper & ~at_lower, np.maximum(0.0, lam),
                             np.where(~at_lower & ~at_upper, np.abs(lam), 0.0)))
    return {
        "stationarity": float(np.linalg.norm(stat)),
        "primal": float(np.linalg.norm(primal)),
        "box": box_viol,
        "complementarity": float(comp.max()) if comp.size else 0.0,
    }


@dataclass
class ValidationReport:
    """Pass/fail outcome per assumption-level check."""

    checks: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)

    @property
    def ok(self):
        return all(self.checks.values())

    def failed(self):
        return sorted(name for name, passed in self.checks.items() if not passed)


def validate(problem, rank_tol=None):
    """Check the structural assumptions a solve relies on.

    Reported checks: ``symmetric_hessian`` (asymmetry above 1e-12),
    ``bounds_ordered`` (strict lower < upper everywhere), ``full_row_rank``
    (numerical rank of A equals m <= n), ``reduced_hessian_pd`` (smallest
    eigenvalue of the Hessian restricted to the null space of A is positive).
    Pure: repeated calls on the same problem give identical reports.
    """
    report = ValidationReport()
    Q, A = problem.Q, problem.A
    n, m = problem.n, problem.m

    asym = float(np.abs(Q - Q.T).max()) if n else 0.0
    report.checks["symmetric_hessian"] = asym <= SYMMETRY_TOL
    report.details["symmetric_hessian"] = asym

    bad = np.flatnonzero(~(problem.lower < problem.upper))
    report.checks["bounds_ordered"] = bad.size == 0
    report.details["bounds_ordered"] = bad.tolist()

    if m == 0:
        rank = 0
        Z = np.eye(n)
    else:
        _, s, Vh = np.linalg.svd(A)
        tol = rank_tol if rank_tol is not None else n * np.finfo(float).eps * (s[0] if s.size else 0.0)
        rank = int(np.count_nonzero(s > tol))
        Z = Vh[rank:].T
    report.checks["full_row_rank"] = (rank == m) and (m <= n)
    report.details["full_row_rank"] = rank

    Qs = 0.5 * (Q + Q.T)
    red = Z.T @ Qs @ Z
    min_eig = float(np.linalg.eigvalsh(red).min()) if red.size else np.inf
    report.checks["reduced_hessian_pd"] = min_eig > 0.0
    report.details["reduced_hessian_pd"] = min_eig
    return report


def _parse_matrix(doc, name, rows, cols):
    raw = doc.get(name)
    if raw is None:
        raise ProblemFormatError(f"missing field {name!r}")
    if len(raw) != rows:
        raise ProblemFormatError(f"{name} has {len(raw)} rows, expected {rows}")
    out = np.zeros((rows, cols))
    for i, row in enumerate(raw):
        if len(row) != cols:
            raise ProblemFormatError(f"{name}[{i}] has {len(row)} entries, expected {cols}")
        for j, x in enumerate(row):
            v = float(x)
            if np.isnan(v):
                raise ProblemFormatError(f"{name}[{i}][{j}] is NaN")
            out[i, j] = v
    return out


def _parse_vector(doc, name, length, none_value=None):
    raw = doc.get(name)
    if raw is None:
        raise ProblemFormatError(f"missing field {name!r}")
    if len(raw) != length:
        raise ProblemFormatError(f"{name} has {len(raw)} entries, expected {length}")
    out = np.zeros(length)
    for i, x in enumerate(raw):
        if x is None:
            if none_value is None:
                raise ProblemFormatError(f"{name}[{i}] is null")
            out[i] = none_value
            continue
        v = float(x)
        if np.isnan(v):
            raise ProblemFormatError(f"{name}[{i}] is NaN")
        out[i] = v
    return out


def load_problem(text):
    """Parse a canonical JSON problem document into a QpProblem.

    The document layout is ``{"n", "m", "Q", "q", "A", "b", "lower", "upper"}``
    with ``null`` bound entries standing for an unbounded side.  The Hessian is
    symmetrized on load; a warning is emitted when the asymmetry exceeds 1e-12.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemFormatError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ProblemFormatError("problem document must be a JSON object")
    try:
        n = int(doc["n"])
        m = int(doc["m"])
    except KeyError as exc:
        raise ProblemFormatError(f"missing field {exc.args[0]!r}") from exc
    if n < 1:
        raise ProblemFormatError(f"n must be >= 1, got {n}")
    if m < 0:
        raise ProblemFormatError(f"m must be >= 0, got {m}")

    Q = _parse_matrix(doc, "Q", n, n)
    q = _parse_vector(doc, "q", n)
    A = _parse_matrix(doc, "A", m, n) if m else np.zeros((0, n))
    b = _parse_vector(doc, "b", m)
    lower = _parse_vector(doc, "lower", n, none_value=-np.inf)
    upper = _parse_vector(doc, "upper", n, none_value=np.inf)

    asym = float(np.abs(Q - Q.T).max())
    if asym > SYMMETRY_TOL:
        warnings.warn(f"Hessian asymmetry {asym:.3e} exceeds {SYMMETRY_TOL}; symmetrizing")
    Q = 0.5 * (Q + Q.T)
    return QpProblem(Q=Q, q=q, A=A, b=b, lower=lower, upper=upper)


def load_problem_file(path):
    with open(path, "r", encoding="utf-8") as fh:
        return load_problem(fh.read())


def _encode_bound(v):
    return [None if not np.isfinite(x) else float(x) for x in v]


def save_problem(problem):
    """Serialize a QpProblem to the canonical JSON document (round-trip exact)."""
    doc = {
        "n": problem.n,
        "m": problem.m,
        "Q": problem.Q.tolist(),
        "q": problem.q.tolist(),
        "A": problem.A.tolist(),
        "b": problem.b.tolist(),
        "lower": _encode_bound(problem.lower),
        "upper": _encode_bound(problem.upper),
    }
    return json.dumps(doc, indent=2)
