"""Splitting iteration loop with optimality and divergence termination.

One iteration, in this order and with the new y feeding the later updates:

    y <- M (w + lam - q/beta) + N b      (equality-constrained step)
    w <- P(y - lam)                      (box projection)
    lam <- lam + w - y                   (scaled multiplier update)

The condensed form drives the single iterate v = y_next - lam; both forms are
exposed and stay in lockstep.  Termination is either the optimality test
max(beta ||dw||, ||dlam||) <= eps_o or the four-condition divergence detector.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import infeasibility as _infeas
from . import rates as _rates
from .operators import build_operators, optimal_beta
from .problem import KktPoint

__all__ = [
    "AdmmState",
    "SolveOptions",
    "SolveResult",
    "Status",
    "TraceRow",
    "admm_step",
    "detect_infeasibility",
    "dr_step",
    "initial_state",
    "recover_equality_multipliers",
    "solve",
    "write_trace_csv",
]

DETECTOR_WARMUP = 100
DETECTOR_STRIDE = 10
_TINY = 1e-14


class Status(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    ITER_LIMIT = "iter_limit"


@dataclass(frozen=True)
class SolveOptions:
    """Penalty, tolerances and iteration budget for a solve.

    ``beta`` may be the string ``"auto"`` to use the spectrally optimal
    penalty.  ``eps_o`` is the optimality tolerance; ``eps_r``, ``eps_a`` and
    ``eps_v`` parameterize the divergence detector.  ``trace_every`` thins the
    stored trace (the final row is always kept).
    """

    beta: float | str = "auto"
    eps_o: float = 1e-6
    eps_r: float = 1e-3
    eps_a: float = 1e-3
    eps_v: float = 1e-4
    max_iter: int = 100_000
    trace_every: int = 1

    def __post_init__(self):
        for name in ("eps_o", "eps_r", "eps_a", "eps_v"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")
        if self.max_iter < 1 or self.trace_every < 1:
            raise ValueError("max_iter and trace_every must be >= 1")
        if self.beta != "auto" and float(self.beta) <= 0.0:
            raise ValueError("beta must be positive or 'auto'")


@dataclass(frozen=True)
class AdmmState:
    """Iterate triple (y, w, lam) plus the condensed iterates v, u.

    After k steps: y and w are the k-th primal iterates, lam the k-th scaled
    multiplier, v the (k-1)-th condensed iterate y_k - lam_{k-1} = w_k - lam_k
    and u its reflection w_k + lam_k.  The freshly initialized state (k = 0)
    has no condensed iterate yet.
    """

    k: int
    y: np.ndarray
    w: np.ndarray
    lam: np.ndarray
    v: np.ndarray | None = None
    u: np.ndarray | None = None


@dataclass
class TraceRow:
    """Per-iteration diagnostics; reference columns are NaN without a reference."""

    k: int
    norm_dy: float
    norm_dw: float
    norm_dlam: float
    norm_dv: float
    cos_theta: float
    ratio_b: float
    opt_residual: float
    sign_ok: bool = False
    vdrift: float = math.nan
    dist_v: float = math.nan
    rate: float = math.nan
    alpha_k: float = math.nan
    active_subset: bool | None = None


@dataclass
class SolveResult:
    status: Status
    kkt: KktPoint | None
    certificate: object | None
    trace: list
    iterations: int
    beta: float
    final_state: AdmmState | None = None


def initial_state(problem, w0=None, lam0=None):
    """State before the first step: w projected into the box, lam as given."""
    n = problem.n
    w = problem.box.clip(np.zeros(n) if w0 is None else np.asarray(w0, dtype=float))
    lam = np.zeros(n) if lam0 is None else np.asarray(lam0, dtype=float).copy()
    if lam.size != n:
        raise ValueError(f"lam0 has length {lam.size}, expected {n}")
    return AdmmState(k=0, y=w.copy(), w=w, lam=lam)


def admm_step(state, bundle, problem):
    """One iteration of the extended form; returns the advanced state."""
    q_t = problem.q / bundle.beta
    y = bundle.M @ (state.w + state.lam - q_t) + bundle.N @ problem.b
    v = y - state.lam
    w = problem.box.clip(v)
    lam = state.lam + w - y
    return AdmmState(k=state.k + 1, y=y, w=w, lam=lam, v=v, u=w + lam)


def dr_step(v, bundle, problem):
    """One iteration of the condensed form on the single iterate v."""
    v = np.asarray(v, dtype=float)
    refl = 2.0 * problem.box.clip(v) - v
    q_t = problem.q / bundle.beta
    return 0.5 * ((2.0 * bundle.M - np.eye(bundle.n)) @ refl + v) \
        - bundle.M @ q_t + bundle.N @ problem.b


def recover_equality_multipliers(problem, bundle, y, lam_unscaled):
    """Equality multiplier from the range-space part of the stationarity system."""
    if problem.m == 0:
        return np.zeros(0)
    AR = problem.A @ bundle.R
    g = problem.Q @ y + problem.q - lam_unscaled
    return -np.linalg.solve(AR.T, bundle.R.T @ g)


def detect_infeasibility(rows, options):
    """True iff the latest diagnostics row matches the divergence signature.

    All four conditions must hold at once: (a) the optimality residual is
    still above eps_o; (b) the primal changes are smaller than the residual by
    a factor eps_r; (c) the multiplier is aligned with w - y up to eps_a (a
    near-zero multiplier or gap cannot certify alignment and fails the test);
    (d) the alignment holds componentwise, or the second difference of the
    condensed iterate has collapsed relative to its size (eps_v).
    """
    if not rows:
        return False
    row = rows[-1]
    if not (row.opt_residual > options.eps_o):
        return False
    if not (np.isfinite(row.ratio_b) and row.ratio_b <= options.eps_r):
        return False
    if not (np.isfinite(row.cos_theta) and row.cos_theta >= 1.0 - options.eps_a):
        return False
    drift_small = np.isfinite(row.vdrift) and row.vdrift <= options.eps_v
    return bool(row.sign_ok or drift_small)


def _diagnostics(state, prev, beta, v_prev, dv_prev):
    dw = float(np.linalg.norm(state.w - prev.w))
    dlam = float(np.linalg.norm(state.lam - prev.lam))
    dy = float(np.linalg.norm(state.y - prev.y)) if state.k > 1 else math.nan
    dv_vec = None
    dv = math.nan
    if v_prev is not None:
        dv_vec = state.v - v_prev
        dv = float(np.linalg.norm(dv_vec))
    vdrift = math.nan
    if dv_vec is not None and dv_prev is not None:
        v_norm = float(np.linalg.norm(state.v))
        if v_norm > _TINY:
            vdrift = float(np.linalg.norm(dv_vec - dv_prev)) / v_norm

    gap = state.w - state.y
    lam_norm = float(np.linalg.norm(state.lam))
    gap_norm = float(np.linalg.norm(gap))
    if lam_norm < _TINY or gap_norm < _TINY:
        cos_theta = math.nan
        sign_ok = False
    else:
        cos_theta = float(state.lam @ gap) / (lam_norm * gap_norm)
        sign_ok = bool(np.all(state.lam * gap >= -1e-12 * lam_norm * gap_norm))

    opt_residual = max(beta * dw, dlam)
    ratio_b = max(dy, beta * dw) / opt_residual if opt_residual > _TINY else math.nan

    return TraceRow(k=state.k, norm_dy=dy, norm_dw=dw, norm_dlam=dlam, norm_dv=dv,
                    cos_theta=cos_theta, ratio_b=ratio_b, opt_residual=opt_residual,
                    sign_ok=sign_ok, vdrift=vdrift), dv_vec


def solve(problem, options=None, *, w0=None, lam0=None, reference=None):
    """Run the iteration until optimality, divergence detection, or budget.

    Parameters
    ----------
    problem : QpProblem
        Must satisfy the structural assumptions (see ``validate``).
    options : SolveOptions, optional
    w0, lam0 : arrays, optional
        Initial iterates; w0 is projected into the box, both default to zero.
    reference : KktPoint, optional
        Independent reference solution.  When given, each trace row also
        carries the distance of the condensed iterate to the fixed point, the
        observed one-step rate, the multiplier ratio and whether the detected
        active set is contained in the reference one.

    Returns
    -------
    SolveResult
        ``status`` is optimal (with a KktPoint carrying the unscaled
        multiplier beta * lam and the recovered equality multiplier),
        infeasible (with an InfeasibilityCertificate), or iter_limit.  The
        trace is kept in all cases.
    """
    options = options or SolveOptions()
    if options.beta == "auto":
        # With m = n there is no reduced space and every penalty acts alike.
        beta = 1.0 if problem.m == problem.n else optimal_beta(problem)
    else:
        beta = float(options.beta)
    bundle = build_operators(problem, beta)

    context = None
    if reference is not None:
        context = _rates.RateContext.from_kkt(problem, reference, bundle)

    state = initial_state(problem, w0=w0, lam0=lam0)
    rows = []
    v_prev = None
    dv_prev = None
    dist_prev = math.nan

    status = Status.ITER_LIMIT
    for _ in range(options.max_iter):
        prev = state
        state = admm_step(state, bundle, problem)
        row, dv_vec = _diagnostics(state, prev, beta, v_prev, dv_prev)

        if context is not None:
            dist_v = float(np.linalg.norm(state.v - context.v_star))
            row.dist_v = dist_v
            row.rate = dist_v / dist_prev if dist_prev and not math.isnan(dist_prev) else math.nan
            row.alpha_k = (float(np.linalg.norm(state.lam - context.lam_star_scaled)) / dist_v
                           if dist_v > _TINY else math.nan)
            est = _rates.active_set_at(state.lam, context.lam_star_scaled,
                                       active_star=context.active_star)
            row.active_subset = est.subset_of_reference
            dist_prev = dist_v

        sampled = (state.k % options.trace_every == 0)
        if sampled:
            rows.append(row)

        done = False
        if row.opt_residual <= options.eps_o:
            status = Status.OPTIMAL
            done = True
        elif state.k >= DETECTOR_WARMUP and state.k % DETECTOR_STRIDE == 0 \
                and detect_infeasibility([row], options):
            status = Status.INFEASIBLE
            done = True
        if done:
            if not sampled:
                rows.append(row)
            break

        v_prev = state.v
        dv_prev = dv_vec

    result = SolveResult(status=status, kkt=None, certificate=None, trace=rows,
                         iterations=state.k, beta=beta, final_state=state)
    if status == Status.OPTIMAL:
        lam_unscaled = beta * state.lam
        xi = recover_equality_multipliers(problem, bundle, state.y, lam_unscaled)
        result.kkt = KktPoint(y_star=state.y, xi_star=xi, lambda_star=lam_unscaled)
    elif status == Status.INFEASIBLE:
        result.certificate = _infeas.build_certificate(problem, rows)
    return result


_BASE_COLUMNS = ("k", "norm_dy", "norm_dw", "norm_dlam", "norm_dv",
                 "cos_theta", "ratio_b", "opt_residual")
_REFERENCE_COLUMNS = ("dist_v", "rate", "active_subset")


def write_trace_csv(rows, path, include_reference=None):
    """Write sampled trace rows as CSV.

    Reference columns are appended when any row carries them (or always /
    never, when ``include_reference`` is forced).
    """
    if include_reference is None:
        include_reference = any(not math.isnan(r.dist_v) for r in rows)
    columns = _BASE_COLUMNS + (_REFERENCE_COLUMNS if include_reference else ())
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for r in rows:
            rec = [r.k, r.norm_dy, r.norm_dw, r.norm_dlam, r.norm_dv,
                   r.cos_theta, r.ratio_b, r.opt_residual]
            if include_reference:
                subset = "" if r.active_subset is None else int(r.active_subset)
                rec += [r.dist_v, r.rate, subset]
            writer.writerow(rec)
