import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays
from scipy import optimize

from cliquesplit import oracles as orc

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


def vec(n):
    return arrays(np.float64, n, elements=finite)


def weights(n):
    return arrays(np.float64, n, elements=st.floats(0.1, 3.0))


# -- smooth oracles ---------------------------------------------------------------


def test_quadratic_identity():
    f = orc.Quadratic(np.eye(2), np.zeros(2))
    np.testing.assert_array_equal(f.grad([3.0, -1.0]), [3.0, -1.0])
    assert f.lipschitz == pytest.approx(1.0) and f.strong_convexity == pytest.approx(1.0)
    assert f.value([3.0, -1.0]) == pytest.approx(5.0)


def test_quadratic_scalar_matrix():
    f = orc.Quadratic(2.0, [1.0, 1.0])
    assert f.lipschitz == pytest.approx(4.0)
    np.testing.assert_allclose(f.grad([0.0, 0.0]), [-2.0, -2.0])


def test_clique_mean_quadratic_lipschitz():
    f = orc.clique_mean_quadratic(2.0, 4, 1.0)
    assert f.lipschitz == pytest.approx(0.5)
    x = np.array([1.0, 2.0, 3.0, 6.0])
    assert f.value(x) == pytest.approx(0.5 * 2.0 * (3.0 - 1.0) ** 2)


def test_lasso_node_constant():
    rng = np.random.default_rng(0)
    P = np.eye(10) + 0.05 * rng.standard_normal((10, 10))
    f = orc.Quadratic(P, rng.standard_normal(10))
    assert f.lipschitz == pytest.approx(np.linalg.eigvalsh(P.T @ P)[-1])


def test_quadratic_gradient_finite_differences(rng):
    A = rng.normal(size=(4, 3))
    f = orc.Quadratic(A, rng.normal(size=4))
    x = rng.normal(size=3)
    h = 1e-6
    fd = [(f.value(x + h * e) - f.value(x - h * e)) / (2 * h) for e in np.eye(3)]
    np.testing.assert_allclose(f.grad(x), fd, rtol=1e-6, atol=1e-7)


def test_quadratic_shape_mismatch():
    with pytest.raises(ValueError):
        orc.Quadratic(np.eye(2), np.zeros(3))


# -- prox oracles: examples -------------------------------------------------------


def test_soft_threshold():
    np.testing.assert_array_equal(orc.L1Norm(1.0).prox([2.0, -0.5, 3.0], 1.0), [1.0, 0.0, 2.0])
    np.testing.assert_array_equal(orc.L1Norm(0.0).prox([2.0, -0.5], 1.0), [2.0, -0.5])
    assert orc.L1Norm(1.0).prox([2.0], 1.0, [2.0])[0] == pytest.approx(1.5)


def test_consensus_projection():
    c = orc.ConsensusSet(2)
    np.testing.assert_allclose(c.prox([0.0, 3.0], weights=[1.0, 0.5]), [1.0, 1.0])
    np.testing.assert_allclose(orc.ConsensusSet(3).prox([1.0, 2.0, 3.0]), [2.0, 2.0, 2.0])
    blocks = orc.ConsensusSet(2, m=2).prox([0.0, 1.0, 2.0, 5.0])
    np.testing.assert_allclose(blocks, [1.0, 3.0, 1.0, 3.0])


def test_halfspace_projection():
    h = orc.HalfSpace(np.ones(2), 1.0)
    np.testing.assert_array_equal(h.prox([0.2, 0.3]), [0.2, 0.3])
    np.testing.assert_allclose(h.prox([1.0, 1.0]), [0.5, 0.5])
    w = np.array([1.0, 0.5])
    out = h.prox([1.0, 1.0], weights=w)
    np.testing.assert_allclose(out, [2 / 3, 1 / 3])
    # KKT: W (x - out) parallel to the normal, constraint active
    r = w * (np.array([1.0, 1.0]) - out)
    assert r[0] == pytest.approx(r[1]) and r[0] > 0
    assert out.sum() == pytest.approx(1.0)


def test_halfspace_infinite_offset_never_binds():
    h = orc.HalfSpace(np.ones(3), np.inf)
    np.testing.assert_array_equal(h.prox([100.0, 5.0, 1.0]), [100.0, 5.0, 1.0])
    assert h.violation([1e9, 1e9, 1e9]) == 0.0


def test_nonneg():
    nn = orc.NonNegative()
    np.testing.assert_array_equal(nn.prox([-1.0, 2.0]), [0.0, 2.0])
    assert nn.violation([-0.5, 1.0]) == 0.5


def test_invalid_inputs():
    with pytest.raises(ValueError):
        orc.L1Norm(-1.0)
    with pytest.raises(ValueError):
        orc.HalfSpace([0.0, 0.0], 1.0)
    with pytest.raises(ValueError):
        orc.L1Norm(1.0).prox([1.0], 1.0, [0.0])


# -- prox oracles: properties -----------------------------------------------------


def prox_objective(g, x, step, w):
    def obj(u):
        r = x - u
        return g.value(u) + 0.5 * float(r @ (w * r)) / step
    return obj


@settings(max_examples=50, deadline=None)
@given(vec(3), weights(3), st.floats(0.05, 3.0), st.floats(0.0, 2.0))
def test_l1_prox_is_minimizer(x, w, step, lam):
    g = orc.L1Norm(lam)
    u = g.prox(x, step, w)
    obj = prox_objective(g, x, step, w)
    # separable: every coordinate optimal against a fine local grid
    for i in range(3):
        for d in (-1e-3, 1e-3):
            v = u.copy()
            v[i] += d
            assert obj(u) <= obj(v) + 1e-12


@settings(max_examples=50, deadline=None)
@given(vec(4), weights(4))
def test_consensus_prox_minimizes_weighted_distance(x, w):
    c = orc.ConsensusSet(4)
    u = c.prox(x, weights=w)
    res = optimize.minimize_scalar(lambda t: float(((x - t) ** 2 * w).sum()), bracket=(-10, 10),
                                   method="golden", tol=1e-12)
    np.testing.assert_allclose(u, np.full(4, res.x), atol=1e-6)


@settings(max_examples=50, deadline=None)
@given(vec(3), weights(3), arrays(np.float64, 3, elements=st.floats(0.1, 2.0)), finite)
def test_halfspace_prox_kkt(x, w, a, offset):
    h = orc.HalfSpace(a, offset)
    u = h.prox(x, weights=w)
    assert a @ u <= offset + 1e-9 * max(1.0, abs(offset))
    if a @ x > offset:
        # W (x - u) = t a with t >= 0 and the constraint active
        r = w * (x - u)
        t = r @ a / (a @ a)
        np.testing.assert_allclose(r, t * a, atol=1e-8)
        assert t >= -1e-12
        assert a @ u == pytest.approx(offset, abs=1e-8)


@pytest.mark.parametrize("oracle", [orc.L1Norm(0.7), orc.NonNegative(), orc.ConsensusSet(4),
                                    orc.HalfSpace([1.0, 2.0, 0.5, 1.0], 0.3), orc.ZeroProx()])
def test_firm_nonexpansiveness(oracle, rng):
    w = rng.uniform(0.2, 2.0, size=4)
    for _ in range(200):
        x, z = rng.normal(size=(2, 4)) * 3
        px, pz = oracle.prox(x, 0.8, w), oracle.prox(z, 0.8, w)
        d = px - pz
        assert d @ (w * (x - z)) >= d @ (w * d) - 1e-10
