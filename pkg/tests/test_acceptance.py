"""Acceptance suite: one test per release criterion, each printing PASS/FAIL.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines.  Tolerances and budgets are fixed here, not configurable.
"""

import math
import time

import numpy as np
import pytest

import admmqp as aq
from admmqp.rates import rate_table
from conftest import make_random_qp
from test_rates import TABLE_ALPHA, TABLE_CF, brute_force_delta


def _report(name, ok, detail=""):
    line = f"acceptance {name}: {'PASS' if ok else 'FAIL'}"
    if detail:
        line += f"  ({detail})"
    print(line)
    assert ok, line


def test_criterion_01_qpex1_solve():
    t0 = time.time()
    res = aq.solve(aq.qpex1(), aq.SolveOptions(beta=1.0, eps_o=1e-6),
                   w0=[0.0, 0.0], lam0=[3.0, 3.0])
    elapsed = time.time() - t0
    ok = (res.status == aq.Status.OPTIMAL
          and np.abs(res.kkt.y_star - [0.0, 1.0]).max() <= 1e-5
          and np.abs(res.kkt.lambda_star - [2.0, 0.0]).max() <= 1e-4
          and elapsed < 1.0)
    _report("1 qpex1 solve", ok,
            f"iters={res.iterations} y={res.kkt.y_star} time={elapsed:.3f}s")


def _check_table(got, expect):
    for i in range(6):
        for j in range(6):
            if np.isnan(expect[i, j]):
                if got[i, j] < 0.999:
                    return False, (i, j, got[i, j])
            elif abs(got[i, j] - expect[i, j]) > 5e-3:
                return False, (i, j, got[i, j])
    return True, None


def test_criterion_02_table_cf():
    t0 = time.time()
    got = rate_table(mode="cF")
    elapsed = time.time() - t0
    ok, bad = _check_table(got, TABLE_CF)
    _report("2 contraction table (angle mode)", ok and elapsed < 30.0,
            f"time={elapsed:.1f}s worst cell={bad}")


def test_criterion_03_table_alpha():
    t0 = time.time()
    got = rate_table(mode="alpha")
    elapsed = time.time() - t0
    ok, bad = _check_table(got, TABLE_ALPHA)
    _report("3 contraction table (ratio mode)", ok and elapsed < 30.0,
            f"time={elapsed:.1f}s worst cell={bad}")


def _reference_run(problem, beta, lam0):
    ref = aq.oracle_solve(problem)
    bundle = aq.build_operators(problem, beta)
    ctx = aq.RateContext.from_kkt(problem, ref.kkt, bundle)
    res = aq.solve(problem, aq.SolveOptions(beta=beta), w0=np.zeros(problem.n),
                   lam0=lam0, reference=ref.kkt)
    assert res.status == aq.Status.OPTIMAL
    return res, ctx, bundle


def test_criterion_04_per_iteration_bound_validity_and_tightness():
    worst_excess = -np.inf
    for problem in (aq.qpex1(), aq.qpex2(1, 10), aq.qpex2(1, 100)):
        res, ctx, bundle = _reference_run(problem, 1.0, [3.0, 3.0])
        for prev, cur in zip(res.trace, res.trace[1:]):
            if not np.isfinite(cur.rate):
                continue
            bound = aq.per_iteration_bound(prev, ctx, bundle)
            worst_excess = max(worst_excess, cur.rate - bound)
    valid = worst_excess <= 1e-6

    res, ctx, bundle = _reference_run(aq.qpex1(), 1.0, [3.0, 3.0])
    gaps = [abs(cur.rate - aq.per_iteration_bound(prev, ctx, bundle))
            for prev, cur in zip(res.trace, res.trace[1:])
            if prev.active_subset and np.isfinite(cur.rate)]
    tight = bool(gaps) and min(gaps) <= 2e-2
    _report("4 per-iteration bound", valid and tight,
            f"worst excess={worst_excess:.2e} closest gap={min(gaps):.3f}")


def test_criterion_05_global_rate_certificate():
    for problem in (aq.qpex1(), aq.nonstrict(1, 1)):
        ref = aq.oracle_solve(problem)
        bundle = aq.build_operators(problem, 1.0)
        ctx = aq.RateContext.from_kkt(problem, ref.kkt, bundle)
        state = aq.initial_state(problem, w0=[0.0, 0.0], lam0=[3.0, 3.0])
        states = [state]
        for _ in range(400):
            state = aq.admm_step(state, bundle, problem)
            states.append(state)
            if len(states) > 2 and max(
                    np.linalg.norm(state.w - states[-2].w),
                    np.linalg.norm(state.lam - states[-2].lam)) < 1e-13:
                break
        delta_g = aq.global_rate(ctx, bundle, states[1].v)
        dist = [np.linalg.norm(s.v - ctx.v_star) for s in states[1:]]
        one_step = all(dist[k + 1] <= (delta_g + 1e-9) * dist[k]
                       for k in range(len(dist) - 1))
        target = np.concatenate([ref.kkt.y_star, ref.kkt.lambda_star / bundle.beta])
        pair = [np.linalg.norm(np.concatenate([s.w, s.lam]) - target) for s in states]
        two_step = all(pair[k + 2] <= delta_g * pair[k] + 1e-12
                       for k in range(len(pair) - 2))
        if not (delta_g < 1.0 and one_step and two_step):
            _report("5 global rate certificate", False,
                    f"delta_g={delta_g} one_step={one_step} two_step={two_step}")
    _report("5 global rate certificate", True, f"last delta_g={delta_g:.6f}")


def test_criterion_06_optimal_beta():
    b1 = aq.optimal_beta(aq.qpex1())
    b2 = aq.optimal_beta(aq.qpex2(10, 1))
    ok = abs(b1 - 1.0) <= 0.005 and abs(b2 - 1.98) <= 0.005
    _report("6 optimal penalty", ok, f"beta*={b1:.4f}, {b2:.4f}")


def test_criterion_07_infeasibility():
    t0 = time.time()
    ok = True
    detail = []
    for beta in (1.0, 10.0):
        res = aq.solve(aq.qpex3(), aq.SolveOptions(beta=beta))
        cert = res.certificate
        final = res.final_state
        ok &= res.status == aq.Status.INFEASIBLE
        ok &= np.abs(cert.y_circ - [3.0, 4.0]).max() <= 1e-6
        ok &= np.abs(cert.w_circ - [2.0, 5.0]).max() <= 1e-6
        ok &= np.abs((final.w - final.y) - [-1.0, 1.0]).max() <= 1e-3
        detail.append(f"beta={beta} iters={res.iterations}")
    for q1, expect_yq, expect_lamq in ((-3.0, (2, 0), (-1, 0)),
                                       (0.0, (0, 0), (0, 0)),
                                       (3.0, (-2, 0), (1, 0))):
        p = aq.qpex3_variant(q1)
        y0, w0, _ = aq.infeasibility_minimizer(p)
        yq, lamq = aq.objective_shift(p, y0, w0)
        ok &= np.abs(yq - expect_yq).max() <= 1e-8
        ok &= np.abs(lamq - expect_lamq).max() <= 1e-8
    elapsed = time.time() - t0
    _report("7 infeasibility detection and shift table", ok and elapsed < 5.0,
            "; ".join(detail) + f" time={elapsed:.2f}s")


def test_criterion_08_oracle_equivalence():
    t0 = time.time()
    rng = np.random.default_rng(12345)
    worst = 0.0
    false_detections = 0
    for _ in range(200):
        p = make_random_qp(rng)
        ref = aq.oracle_solve(p)
        res = aq.solve(p, aq.SolveOptions())
        if res.status == aq.Status.INFEASIBLE:
            false_detections += 1
            continue
        assert res.status == aq.Status.OPTIMAL
        worst = max(worst, float(np.abs(res.kkt.y_star - ref.kkt.y_star).max()))
    elapsed = time.time() - t0
    ok = worst <= 1e-5 and false_detections == 0 and elapsed < 60.0
    _report("8 oracle equivalence over 200 random problems", ok,
            f"worst |dy|={worst:.2e} false detections={false_detections} "
            f"time={elapsed:.1f}s")


def test_criterion_09_property_suites():
    # The randomized property suites live in the per-module tests; this
    # criterion re-runs their core loops at the required volume in one place.
    rng = np.random.default_rng(99)
    from admmqp.prox import project_box, reflect_box

    def random_box(n):
        lower = np.where(rng.random(n) < 0.25, -np.inf, -2.0 * rng.random(n) - 0.1)
        upper = np.where(rng.random(n) < 0.25, np.inf,
                         np.where(np.isfinite(lower), lower, -3.0) + 0.2 + 3.0 * rng.random(n))
        return aq.Box(lower=lower, upper=upper)

    for _ in range(1000):
        n = int(rng.integers(1, 8))
        box = random_box(n)
        v, vp = 10 * rng.standard_normal(n), 10 * rng.standard_normal(n)
        p, pp = project_box(v, box), project_box(vp, box)
        assert (p.w - pp.w) @ ((v - p.w) - (vp - pp.w)) >= -1e-12
        assert (np.linalg.norm(reflect_box(v, box) - reflect_box(vp, box))
                <= np.linalg.norm(v - vp) + 1e-12)

    checked_idents = 0
    checked_dv = 0
    while checked_idents < 1000 or checked_dv < 1000:
        p = make_random_qp(rng)
        bundle = aq.build_operators(p, float(rng.uniform(0.3, 3.0)))
        np.testing.assert_allclose(bundle.R.T @ bundle.R, np.eye(p.m), atol=1e-10)
        np.testing.assert_allclose(bundle.Z.T @ bundle.Z, np.eye(p.n - p.m), atol=1e-10)
        np.testing.assert_allclose(bundle.R.T @ bundle.Z, 0.0, atol=1e-10)
        np.testing.assert_allclose(bundle.R @ bundle.R.T + bundle.Z @ bundle.Z.T,
                                   np.eye(p.n), atol=1e-10)
        state = aq.initial_state(p, w0=rng.standard_normal(p.n),
                                 lam0=rng.standard_normal(p.n))
        states = [state]
        for _ in range(14):
            states.append(aq.admm_step(states[-1], bundle, p))
        for prev, cur in zip(states[1:], states[2:]):
            np.testing.assert_allclose(cur.v, cur.y - prev.lam, atol=1e-12)
            np.testing.assert_allclose(cur.v, cur.w - cur.lam, atol=1e-12)
            np.testing.assert_allclose(cur.u + cur.v, 2 * cur.w, atol=1e-12)
            checked_idents += 1
        dvs = [np.linalg.norm(b.v - a.v) for a, b in zip(states[1:], states[2:])]
        for a, b in zip(dvs, dvs[1:]):
            assert b <= a + 1e-12
            checked_dv += 1
    _report("9 property suites", True,
            f"identity checks={checked_idents} monotonicity checks={checked_dv}")


def test_criterion_10_qcqp_brute_force_cross_check():
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(5):
        mz = float(rng.uniform(0.0, 0.999))
        cf = float(rng.uniform(0.0, 1.0))
        am = float(rng.uniform(0.0, 1.0))
        diff = abs(aq.worst_case_delta(mz, cf, am) - brute_force_delta(mz, cf, am))
        worst = max(worst, diff)
    _report("10 QCQP brute-force cross-check", worst <= 2e-3,
            f"worst diff={worst:.2e}")
