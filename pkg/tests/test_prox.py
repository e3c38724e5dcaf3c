import numpy as np

from admmqp import Box, check_vi, project_box, reflect_box

BOX = Box(lower=[-2.0, 5.0], upper=[2.0, 10.0])


def test_project_clamps_to_box():
    res = project_box([3.0, 4.0], BOX)
    np.testing.assert_array_equal(res.w, [2.0, 5.0])
    np.testing.assert_array_equal(res.lam, [-1.0, 1.0])


def test_project_is_identity_inside():
    res = project_box([0.0, 7.0], BOX)
    np.testing.assert_array_equal(res.w, [0.0, 7.0])
    np.testing.assert_array_equal(res.lam, [0.0, 0.0])


def test_project_one_sided_bound():
    box = Box(lower=[0.0], upper=[np.inf])
    res = project_box([3.5], box)
    np.testing.assert_array_equal(res.w, [3.5])


def test_reflect_examples():
    np.testing.assert_array_equal(reflect_box([3.0, 4.0], BOX), [1.0, 6.0])
    np.testing.assert_array_equal(reflect_box([0.0, 7.0], BOX), [0.0, 7.0])
    # mirror about the lower face
    box = Box(lower=[1.0], upper=[np.inf])
    t = 0.75
    np.testing.assert_allclose(reflect_box([1.0 - t], box), [1.0 + t])


def test_check_vi_examples():
    box = Box(lower=[0.0, 0.0], upper=[np.inf, np.inf])
    assert check_vi([0.0, 1.0], [2.0, 0.0], box)
    assert check_vi([1.0, 1.0], [0.0, 0.0], box)
    assert not check_vi([1.0, 1.0], [0.5, 0.0], box)
    assert not check_vi([-1.0, 1.0], [0.0, 0.0], box)


def _random_box(rng, n):
    lower = np.where(rng.random(n) < 0.25, -np.inf, -2.0 * rng.random(n) - 0.1)
    upper = np.where(rng.random(n) < 0.25, np.inf,
                     np.where(np.isfinite(lower), lower, -3.0) + 0.2 + 3.0 * rng.random(n))
    return Box(lower=lower, upper=upper)


def test_firm_nonexpansiveness_randomized():
    rng = np.random.default_rng(42)
    for _ in range(1000):
        n = int(rng.integers(1, 8))
        box = _random_box(rng, n)
        v = 10.0 * rng.standard_normal(n)
        vp = 10.0 * rng.standard_normal(n)
        p, pp = project_box(v, box), project_box(vp, box)
        inner = (p.w - pp.w) @ ((v - p.w) - (vp - pp.w))
        assert inner >= -1e-12


def test_joint_nonexpansiveness_randomized():
    rng = np.random.default_rng(43)
    for _ in range(1000):
        n = int(rng.integers(1, 8))
        box = _random_box(rng, n)
        v = 10.0 * rng.standard_normal(n)
        vp = 10.0 * rng.standard_normal(n)
        p, pp = project_box(v, box), project_box(vp, box)
        joint = np.concatenate([p.w - pp.w, (v - p.w) - (vp - pp.w)])
        assert np.linalg.norm(joint) <= np.linalg.norm(v - vp) + 1e-12


def test_reflection_nonexpansiveness_randomized():
    rng = np.random.default_rng(44)
    for _ in range(1000):
        n = int(rng.integers(1, 8))
        box = _random_box(rng, n)
        v = 10.0 * rng.standard_normal(n)
        vp = 10.0 * rng.standard_normal(n)
        d = np.linalg.norm(reflect_box(v, box) - reflect_box(vp, box))
        assert d <= np.linalg.norm(v - vp) + 1e-12


def test_projection_idempotent():
    rng = np.random.default_rng(45)
    for _ in range(200):
        n = int(rng.integers(1, 8))
        box = _random_box(rng, n)
        w = project_box(10.0 * rng.standard_normal(n), box).w
        np.testing.assert_array_equal(project_box(w, box).w, w)


def test_projection_satisfies_vi_randomized():
    rng = np.random.default_rng(46)
    for _ in range(500):
        n = int(rng.integers(1, 8))
        box = _random_box(rng, n)
        res = project_box(10.0 * rng.standard_normal(n), box)
        assert check_vi(res.w, res.lam, box, tol=1e-12)
