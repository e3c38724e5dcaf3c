"""Orthonormal constraint bases and the splitting operators derived from them.

For a problem with equality matrix A (full row rank m) the pair (R, Z) holds
orthonormal bases of range(A^T) and null(A).  Given a penalty beta > 0 the
iteration operators are

    M  = Z (Z^T (Q/beta + I) Z)^{-1} Z^T
    N  = (I - M Q/beta) R (A R)^{-1}
    MZ = 2 (Z^T Q Z / beta + I)^{-1} - I   ( = Z^T (2M - I) Z )

MZ is symmetric with spectrum strictly inside (-1, 1) whenever the reduced
Hessian Z^T Q Z is positive definite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .problem import AssumptionViolation

__all__ = ["OperatorBundle", "build_operators", "null_range_basis", "optimal_beta"]


def _fix_column_signs(B, tol=1e-12):
    # Deterministic sign convention: first entry of each column with magnitude
    # above tol (relative to the column peak) is made positive.
    B = B.copy()
    for j in range(B.shape[1]):
        col = B[:, j]
        peak = np.abs(col).max()
        if peak == 0.0:
            continue
        idx = np.flatnonzero(np.abs(col) > tol * peak)[0]
        if col[idx] < 0:
            B[:, j] = -col
    return B


def null_range_basis(A, rank_tol=None):
    """Orthonormal bases (R, Z) of range(A^T) and null(A) via SVD.

    Parameters
    ----------
    A : (m, n) array
        Equality constraint matrix; must have full row rank.
    rank_tol : float, optional
        Singular values above this count toward the rank.  Defaults to
        n * eps * sigma_max.

    Returns
    -------
    R : (n, m) array with R^T R = I_m, columns spanning range(A^T).
    Z : (n, n-m) array with Z^T Z = I_{n-m}, columns spanning null(A).

    The output is deterministic: a fixed sign convention makes the first
    nonzero entry of every basis column positive.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    m, n = A.shape
    if m == 0:
        return np.zeros((n, 0)), np.eye(n)
    _, s, Vh = np.linalg.svd(A)
    tol = rank_tol if rank_tol is not None else n * np.finfo(float).eps * s[0]
    rank = int(np.count_nonzero(s > tol))
    if rank != m:
        raise AssumptionViolation(f"A is rank deficient: numerical rank {rank} < m = {m}")
    R = _fix_column_signs(Vh[:m].T)
    Z = _fix_column_signs(Vh[m:].T)
    return R, Z


@dataclass(frozen=True)
class OperatorBundle:
    """Bases, iteration operators and reduced spectrum for a fixed beta."""

    R: np.ndarray
    Z: np.ndarray
    beta: float
    M: np.ndarray
    N: np.ndarray
    MZ: np.ndarray
    reduced_eigs: np.ndarray
    mz_norm: float

    @property
    def n(self):
        return self.M.shape[0]

    @property
    def m(self):
        return self.R.shape[1]


def _reduced_hessian(problem):
    R, Z = null_range_basis(problem.A)
    Qs = 0.5 * (problem.Q + problem.Q.T)
    ZQZ = Z.T @ Qs @ Z
    ZQZ = 0.5 * (ZQZ + ZQZ.T)
    return R, Z, Qs, ZQZ


def build_operators(problem, beta):
    """Assemble the OperatorBundle for a validated problem and penalty beta.

    Raises AssumptionViolation when the reduced Hessian has an eigenvalue <= 0.
    The inner inverse is realized through dense solves (one factorization,
    multiple right-hand sides), never an explicit matrix inverse.
    """
    beta = float(beta)
    if beta <= 0.0:
        raise ValueError(f"beta must be positive, got {beta}")
    R, Z, Qs, ZQZ = _reduced_hessian(problem)
    n, m = problem.n, problem.m
    p = n - m

    eigs = np.sort(np.linalg.eigvalsh(ZQZ)) if p else np.zeros(0)
    if p and eigs[0] <= 0.0:
        raise AssumptionViolation(
            f"reduced Hessian is not positive definite (min eigenvalue {eigs[0]:.3e})")

    if p:
        W = ZQZ / beta + np.eye(p)
        M = Z @ np.linalg.solve(W, Z.T)
        MZ = 2.0 * np.linalg.solve(W, np.eye(p)) - np.eye(p)
        MZ = 0.5 * (MZ + MZ.T)
        mz_norm = float(np.abs(np.linalg.eigvalsh(MZ)).max())
    else:
        M = np.zeros((n, n))
        MZ = np.zeros((0, 0))
        mz_norm = 0.0
    M = 0.5 * (M + M.T)

    if m:
        AR = problem.A @ R
        # N = (I - M Q / beta) R (A R)^{-1}
        RARinv = np.linalg.solve(AR.T, R.T).T
        N = (np.eye(n) - M @ Qs / beta) @ RARinv
    else:
        N = np.zeros((n, 0))

    return OperatorBundle(R=R, Z=Z, beta=beta, M=M, N=N, MZ=MZ,
                          reduced_eigs=eigs, mz_norm=mz_norm)


def optimal_beta(problem):
    """Penalty sqrt(lambda_min * lambda_max) of the reduced Hessian.

    This choice minimizes the spectral norm of MZ over all beta > 0, since the
    eigenvalues of MZ are (beta - lam_i)/(beta + lam_i) over the reduced
    spectrum lam_i.
    """
    _, _, _, ZQZ = _reduced_hessian(problem)
    if ZQZ.size == 0:
        raise AssumptionViolation("problem has no reduced space (m = n); no penalty to tune")
    eigs = np.linalg.eigvalsh(ZQZ)
    if eigs[0] <= 0.0:
        raise AssumptionViolation(
            f"reduced Hessian is not positive definite (min eigenvalue {eigs[0]:.3e})")
    return float(np.sqrt(eigs[0] * eigs[-1]))
