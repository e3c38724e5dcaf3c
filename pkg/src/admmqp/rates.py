"""Worst-case contraction factors and the quantities that parameterize them.

The one-step contraction factor delta(kappa, c_F, alpha_max) is the square
root of

    sup  1/4 * ((kappa*zu + zv)^2 + gamma^2)
    s.t. (zu + zv)^2 >= 4 (1 - c_F^2) alpha^2
         gamma^2 <= 4 c_F^2 alpha^2
         gamma^2 <= (sqrt(1-zu^2) + sqrt(1-zv^2))^2
         0 <= zu, zv <= 1,  0 <= alpha <= alpha_max

with kappa the spectral norm of the MZ operator.  The rank-one structure of
the semidefinite relaxation makes the following elimination exact: for fixed
(zu, zv) the objective is increasing in alpha, so alpha binds at
min(alpha_max, (zu+zv) / (2 sqrt(1-c_F^2))) and gamma^2 at the smaller of its
two caps.  What is left is a 2-D maximization over (zu, zv) on the unit
square, done here on a dense grid followed by coordinate golden-section
refinement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .operators import null_range_basis
from .problem import KktPoint

__all__ = [
    "RateContext",
    "TABLE_GRID",
    "active_set_at",
    "alpha_max",
    "friedrichs_cos",
    "format_rate_table",
    "global_rate",
    "per_iteration_bound",
    "rate_table",
    "worst_case_delta",
]

GRID_POINTS = 801
TABLE_GRID = (0.0, 0.2, 0.4, 0.6, 0.8, 0.999)

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def friedrichs_cos(R, E):
    """Largest singular value of R^T E; zero when either factor is empty.

    R must have orthonormal columns and E unit coordinate columns, so the
    value is the cosine of the principal angle between the two subspaces and
    lies in [0, 1].
    """
    R = np.atleast_2d(np.asarray(R, dtype=float))
    E = np.atleast_2d(np.asarray(E, dtype=float))
    if R.shape[1] == 0 or E.shape[1] == 0:
        return 0.0
    s = np.linalg.svd(R.T @ E, compute_uv=False)
    return float(min(1.0, s[0]))


@dataclass(frozen=True)
class ActiveSetEstimate:
    indices: np.ndarray
    subset_of_reference: bool | None


def active_set_at(lam_next, lam_star, active_star=None, tol=None):
    """Indices where the multiplier iterate still disagrees with the reference.

    Both arguments must live in the same scaling (the iteration's own multiplier
    frame).  The default tolerance is 1e-6 * (1 + ||lam_star||).  When the
    reference active set is supplied, the estimate also reports whether the
    detected set is contained in it.
    """
    lam_next = np.asarray(lam_next, dtype=float)
    lam_star = np.asarray(lam_star, dtype=float)
    if tol is None:
        tol = 1e-6 * (1.0 + np.linalg.norm(lam_star))
    indices = np.flatnonzero(np.abs(lam_star - lam_next) > tol)
    subset = None
    if active_star is not None:
        subset = bool(np.isin(indices, np.asarray(active_star)).all())
    return ActiveSetEstimate(indices=indices, subset_of_reference=subset)


def alpha_max(delta_k, dy_min):
    """Upper bound sqrt(1 - (dy_min / delta_k)^2) on the multiplier ratio.

    Applies to iterations whose active set is not yet contained in the
    reference one; dy_min is the smallest distance of an inactive reference
    coordinate from its bounds.  Returns None when dy_min is infinite (no
    inactive coordinate has a finite bound, so the bound is not applicable).
    """
    if not np.isfinite(dy_min):
        return None
    if delta_k <= 0.0:
        raise ValueError("delta_k must be positive")
    ratio = dy_min / delta_k
    return float(np.sqrt(max(0.0, 1.0 - ratio * ratio)))


# --- worst-case contraction factor ------------------------------------------

@lru_cache(maxsize=16)
def _axis():
    return np.linspace(0.0, 1.0, GRID_POINTS)


@lru_cache(maxsize=16)
def _sines():
    t = _axis()
    return np.sqrt(np.maximum(0.0, 1.0 - t * t))


@lru_cache(maxsize=16)
def _objective_quad(mz):
    t = _axis()
    return (mz * t[:, None] + t[None, :]) ** 2


@lru_cache(maxsize=4)
def _gamma_cap_sq():
    s = _sines()
    return (s[:, None] + s[None, :]) ** 2


@lru_cache(maxsize=16)
def _alpha_cap(c_F):
    # (zu + zv) / (2 sqrt(1 - c_F^2)); None marks the unconstrained c_F = 1 case.
    if c_F >= 1.0:
        return None
    t = _axis()
    return (t[:, None] + t[None, :]) / (2.0 * math.sqrt(1.0 - c_F * c_F))


def _cell_value(zu, zv, mz, c_F, a_max):
    if c_F < 1.0:
        alpha = min(a_max, (zu + zv) / (2.0 * math.sqrt(1.0 - c_F * c_F)))
    else:
        alpha = a_max
    gsq = min(4.0 * c_F * c_F * alpha * alpha,
              (math.sqrt(max(0.0, 1.0 - zu * zu)) + math.sqrt(max(0.0, 1.0 - zv * zv))) ** 2)
    return 0.25 * ((mz * zu + zv) ** 2 + gsq)


def _golden_max(f, lo, hi, tol=1e-8):
    a, b = lo, hi
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc < fd:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
        else:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
    x = 0.5 * (a + b)
    return x, f(x)


@lru_cache(maxsize=65536)
def worst_case_delta(mz_norm, c_F, a_max):
    """Worst-case one-step contraction factor delta(mz_norm, c_F, a_max).

    Parameters
    ----------
    mz_norm : float in [0, 1)
        Spectral norm of the MZ operator.
    c_F : float in [0, 1]
        Cosine of the principal angle between the equality range space and the
        active-bound gradients.
    a_max : float in [0, 1]
        Cap on the multiplier-to-displacement ratio.

    The value is < 1 whenever c_F < 1 or a_max < 1, equals (1 + mz_norm)/2
    when either c_F = 0 or a_max = 0, and is nondecreasing in each argument.
    """
    mz_norm = float(mz_norm)
    c_F = float(c_F)
    a_max = float(a_max)
    if not 0.0 <= mz_norm < 1.0:
        raise ValueError(f"mz_norm must lie in [0, 1), got {mz_norm}")
    if not 0.0 <= c_F <= 1.0:
        raise ValueError(f"c_F must lie in [0, 1], got {c_F}")
    if not 0.0 <= a_max <= 1.0:
        raise ValueError(f"a_max must lie in [0, 1], got {a_max}")

    obj1 = _objective_quad(mz_norm)
    cap = _alpha_cap(c_F)
    alpha = a_max if cap is None else np.minimum(a_max, cap)
    gsq = np.minimum(4.0 * c_F * c_F * alpha * alpha, _gamma_cap_sq())
    values = obj1 + gsq
    flat = int(np.argmax(values))
    i, j = divmod(flat, GRID_POINTS)
    best = 0.25 * float(values[i, j])

    # Coordinate golden-section polish around the best grid cell.
    t = _axis()
    h = t[1] - t[0]
    zu, zv = float(t[i]), float(t[j])
    for _ in range(12):
        zu, _val = _golden_max(lambda x: _cell_value(x, zv, mz_norm, c_F, a_max),
                               max(0.0, zu - h), min(1.0, zu + h), tol=1e-7)
        zv, val = _golden_max(lambda x: _cell_value(zu, x, mz_norm, c_F, a_max),
                              max(0.0, zv - h), min(1.0, zv + h), tol=1e-7)
        best = max(best, val)
        h = max(h * 0.6, 2e-6)
    return math.sqrt(best)


def rate_table(mz_values=TABLE_GRID, line_values=TABLE_GRID, mode="cF"):
    """Matrix of contraction factors, rows over line_values, columns over mz.

    ``mode="cF"`` fixes a_max = 1 and varies c_F down the rows; ``mode="alpha"``
    fixes c_F = 1 and varies a_max.
    """
    if mode not in ("cF", "alpha"):
        raise ValueError(f"mode must be 'cF' or 'alpha', got {mode!r}")
    out = np.zeros((len(line_values), len(mz_values)))
    for r, line in enumerate(line_values):
        for c, mz in enumerate(mz_values):
            if mode == "cF":
                out[r, c] = worst_case_delta(mz, line, 1.0)
            else:
                out[r, c] = worst_case_delta(mz, 1.0, line)
    return out


def format_rate_table(table, mz_values=TABLE_GRID, line_values=TABLE_GRID, mode="cF"):
    """Render a rate table as TSV with a header row of mz values."""
    label = "c_F" if mode == "cF" else "alpha_max"
    lines = ["\t".join([label] + [f"{v:.3f}" for v in mz_values])]
    for line_value, row in zip(line_values, np.asarray(table)):
        lines.append("\t".join([f"{line_value:.3f}"] + [f"{x:.4f}" for x in row]))
    return "\n".join(lines) + "\n"


# --- reference-anchored context ----------------------------------------------

@dataclass(frozen=True)
class RateContext:
    """Everything about a reference solution that the rate bounds consume."""

    reference: KktPoint
    lam_star_scaled: np.ndarray
    v_star: np.ndarray
    active_star: np.ndarray
    e_star: np.ndarray
    cf_star: float
    dy_min: float
    i_min: int | None

    @classmethod
    def from_kkt(cls, problem, reference, bundle, active_star=None, active_tol=1e-9):
        """Build the context from a reference KKT point and an operator bundle.

        ``reference.lambda_star`` carries the unscaled multiplier; internally it
        is divided by beta to live in the iteration's frame.  The active set is
        detected from the primal point unless supplied explicitly.
        """
        y = reference.y_star
        if active_star is None:
            scale = active_tol * (1.0 + np.abs(y))
            at = (y <= problem.lower + scale) | (y >= problem.upper - scale)
            active_star = np.flatnonzero(at)
        else:
            active_star = np.asarray(active_star, dtype=int)
        lam_scaled = reference.lambda_star / bundle.beta
        v_star = y - lam_scaled
        e_star = np.eye(problem.n)[:, active_star]
        cf_star = friedrichs_cos(bundle.R, e_star)

        inactive = np.setdiff1d(np.arange(problem.n), active_star)
        dy_min = np.inf
        i_min = None
        for i in inactive:
            gap = min(y[i] - problem.lower[i], problem.upper[i] - y[i])
            if gap < dy_min:
                dy_min = gap
                i_min = int(i)
        return cls(reference=reference, lam_star_scaled=lam_scaled, v_star=v_star,
                   active_star=active_star, e_star=e_star, cf_star=cf_star,
                   dy_min=float(dy_min), i_min=i_min)


def global_rate(context, bundle, v0):
    """Uniform contraction factor valid for every iteration of a run from v0.

    The factor is the larger of the post-identification bound (active set
    contained in the reference one, multiplier ratio free) and the
    pre-identification bound (angle free, ratio capped through the initial
    displacement).  When no inactive coordinate has a finite bound the second
    branch cannot occur and the first bound alone is returned.
    """
    d_identified = worst_case_delta(bundle.mz_norm, context.cf_star, 1.0)
    if not np.isfinite(context.dy_min):
        return d_identified
    delta0 = float(np.linalg.norm(np.asarray(v0, dtype=float) - context.v_star))
    if delta0 <= 0.0:
        raise ValueError("initial displacement is zero; run starts at the fixed point")
    a_max = alpha_max(delta0, context.dy_min)
    return max(d_identified, worst_case_delta(bundle.mz_norm, 1.0, a_max))


def per_iteration_bound(row, context, bundle):
    """Contraction bound for the step taken from the iterate recorded in row.

    Consumes ``row.dist_v`` (distance of the row's DR iterate to the fixed
    point), ``row.alpha_k`` and ``row.active_subset``; the returned value
    bounds the ratio dist_v(next row) / dist_v(this row).  A converged row
    (dist_v below 1e-12) reports 0.
    """
    dist = float(row.dist_v)
    if not np.isfinite(dist):
        raise ValueError("row carries no reference distance")
    if dist < 1e-12:
        return 0.0
    if row.active_subset:
        a_k = min(1.0, float(row.alpha_k))
        return worst_case_delta(bundle.mz_norm, context.cf_star, a_k)
    a_max = alpha_max(dist, context.dy_min)
    if a_max is None:
        # Unreachable when the context is consistent: with no finite inactive
        # bound the active set is always contained in the reference one.
        return worst_case_delta(bundle.mz_norm, 1.0, 1.0)
    return worst_case_delta(bundle.mz_norm, 1.0, a_max)
