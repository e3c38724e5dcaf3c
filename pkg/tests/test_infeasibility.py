import math

import numpy as np
import pytest

from admmqp import (SolveOptions, build_certificate, build_operators, check_vi,
                    infeasibility_minimizer, null_range_basis, objective_shift,
                    qpex1, qpex3, qpex3_variant, solve, verify_limit)


def test_minimizer_qpex3():
    y, w, d = infeasibility_minimizer(qpex3())
    np.testing.assert_allclose(y, [3.0, 4.0], atol=1e-9)
    np.testing.assert_allclose(w, [2.0, 5.0], atol=1e-9)
    assert d == pytest.approx(math.sqrt(2.0), abs=1e-9)


def test_minimizer_feasible_problem_has_zero_distance():
    y, w, d = infeasibility_minimizer(qpex1())
    assert d <= 1e-10
    np.testing.assert_allclose(y, w, atol=1e-10)


def test_minimizer_variant_range_components():
    p = qpex3_variant(0.0)
    y, w, d = infeasibility_minimizer(p)
    R, _ = null_range_basis(p.A)
    assert (R.T @ y)[0] == pytest.approx(1.0, abs=1e-9)
    assert (R.T @ w)[0] == pytest.approx(5.0, abs=1e-9)
    assert d == pytest.approx(4.0, abs=1e-9)


def test_minimizer_range_component_independent_of_start():
    p = qpex3_variant(0.0)
    y1, w1, _ = infeasibility_minimizer(p)
    y2, w2, _ = infeasibility_minimizer(p, y_start=[1.5, 1.0])
    R, _ = null_range_basis(p.A)
    np.testing.assert_allclose(R.T @ y1, R.T @ y2, atol=1e-8)
    np.testing.assert_allclose(R.T @ w1, R.T @ w2, atol=1e-8)
    p3 = qpex3()
    ya, wa, _ = infeasibility_minimizer(p3)
    yb, wb, _ = infeasibility_minimizer(p3, y_start=[4.0, 5.0])
    np.testing.assert_allclose(ya, yb, atol=1e-8)
    np.testing.assert_allclose(wa, wb, atol=1e-8)


def test_separating_hyperplane_witness():
    rng = np.random.default_rng(31)
    p = qpex3()
    y0, w0, _ = infeasibility_minimizer(p)
    direction = y0 - w0
    _, Z = null_range_basis(p.A)
    for _ in range(1000):
        w = p.box.clip(w0 + 4.0 * rng.standard_normal(2))
        assert direction @ (w - w0) <= 1e-10
        y = y0 + Z @ rng.standard_normal(1)  # stays on the equality set
        assert direction @ (y - y0) >= -1e-10


def test_objective_shift_qpex3_defining_equations():
    # The primal shift vanishes; the null-space multiplier component is pinned
    # by the stationarity equation (here 2*sqrt(2)), and the lexicographic
    # tie-break selects (0, 4) for the full vector.
    p = qpex3()
    y0, w0, _ = infeasibility_minimizer(p)
    yq, lamq = objective_shift(p, y0, w0)
    np.testing.assert_allclose(yq, [0.0, 0.0], atol=1e-9)
    _, Z = null_range_basis(p.A)
    resid = Z.T @ (p.Q @ (y0 + yq) + p.q - lamq)
    np.testing.assert_allclose(resid, 0.0, atol=1e-9)
    np.testing.assert_allclose(Z.T @ lamq, [2.0 * math.sqrt(2.0)], atol=1e-9)
    np.testing.assert_allclose(lamq, [0.0, 4.0], atol=1e-9)
    assert check_vi(w0 + yq, lamq, p.box, tol=1e-9)


@pytest.mark.parametrize("q1, expect_yq, expect_lamq", [
    (-3.0, (2.0, 0.0), (-1.0, 0.0)),
    (0.0, (0.0, 0.0), (0.0, 0.0)),
    (3.0, (-2.0, 0.0), (1.0, 0.0)),
])
def test_objective_shift_variant_table(q1, expect_yq, expect_lamq):
    p = qpex3_variant(q1)
    y0, w0, _ = infeasibility_minimizer(p)
    yq, lamq = objective_shift(p, y0, w0)
    np.testing.assert_allclose(yq, expect_yq, atol=1e-9)
    np.testing.assert_allclose(lamq, expect_lamq, atol=1e-9)


def test_shift_multiplier_family_stays_valid():
    p = qpex3()
    y0, w0, _ = infeasibility_minimizer(p)
    yq, lamq = objective_shift(p, y0, w0)
    lam_circ = w0 - y0
    _, Z = null_range_basis(p.A)
    for gamma in (0.0, 1.0, 10.0):
        lam = lamq + gamma * lam_circ
        np.testing.assert_allclose(Z.T @ (p.Q @ (y0 + yq) + p.q - lam), 0.0, atol=1e-9)
        assert check_vi(w0 + yq, lam, p.box, tol=1e-9)


def test_verify_limit_qpex3():
    p = qpex3()
    for beta, max_iter in ((1.0, 100000), (10.0, 100000)):
        res = solve(p, SolveOptions(beta=beta, max_iter=max_iter))
        assert res.status.value == "infeasible"
        report = verify_limit(res, res.certificate, p)
        assert report.misuse is None
        assert report.ok, (beta, report.checks, report.values)
        assert res.certificate.omega == pytest.approx(math.sqrt(2.0), abs=1e-6)
        assert res.certificate.drift_count == pytest.approx(1.0, abs=1e-6)


def test_verify_limit_beta10_converges_faster():
    p = qpex3()
    tol = 1e-3

    def settle_iteration(beta):
        bundle = build_operators(p, beta)
        from admmqp import admm_step, initial_state
        state = initial_state(p)
        for k in range(1, 200):
            state = admm_step(state, bundle, p)
            if (np.linalg.norm(state.y - [3.0, 4.0]) <= tol
                    and np.linalg.norm(state.w - [2.0, 5.0]) <= tol):
                return k
        return 200

    assert settle_iteration(10.0) < settle_iteration(1.0)


def test_verify_limit_flags_feasible_run():
    res = solve(qpex1(), SolveOptions(beta=1.0))
    cert = build_certificate(qpex3(), res.trace)
    report = verify_limit(res, cert, qpex3())
    assert report.misuse is not None
    assert not report.ok


def test_certificate_serialization():
    import json

    from admmqp.infeasibility import certificate_to_dict
    res = solve(qpex3(), SolveOptions(beta=1.0))
    doc = certificate_to_dict(res.certificate, checks={"angle": True})
    text = json.dumps(doc)
    back = json.loads(text)
    assert back["y_circ"] == [3.0, 4.0]
    assert back["w_circ"] == [2.0, 5.0]
    assert back["distance"] == pytest.approx(math.sqrt(2.0))
    assert back["checks"] == {"angle": True}
