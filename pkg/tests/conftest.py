import numpy as np

from admmqp import QpProblem


def make_random_qp(rng, n_max=6, m_max=3):
    """Feasible, strictly convex QP with finite box and full-row-rank equalities."""
    n = int(rng.integers(1, n_max + 1))
    m = int(rng.integers(0, min(m_max, n - 1) + 1))
    G = rng.standard_normal((n, n))
    Q = G.T @ G + 0.1 * np.eye(n)
    while True:
        A = rng.standard_normal((m, n)) if m else np.zeros((0, n))
        if m == 0 or np.linalg.matrix_rank(A) == m:
            break
    lower = -1.0 - rng.random(n) * 2.0
    upper = lower + 0.5 + rng.random(n) * 3.5
    center = lower + (upper - lower) * rng.uniform(0.2, 0.8, n)
    b = A @ center
    q = rng.standard_normal(n)
    return QpProblem(Q=Q, q=q, A=A, b=b, lower=lower, upper=upper)


def random_full_rank(rng, m, n):
    while True:
        A = rng.standard_normal((m, n))
        if np.linalg.matrix_rank(A) == m:
            return A
