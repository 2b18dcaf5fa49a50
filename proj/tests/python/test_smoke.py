import cmath
import math

import numpy as np
import pytest

import fimex


def test_nodes_and_tables():
    z = fimex.radau_nodes(3)
    assert z[0] == -1.0 and z[-1] == 1.0
    assert z[1] == pytest.approx(-1.0 / 3.0, abs=1e-15)
    t = fimex.build_propagator(3, "radau")
    np.testing.assert_allclose(t.B1, [[0, 0, 0], [0, 5 / 6, -1 / 6], [0, 1.5, 0.5]], atol=1e-14)
    np.testing.assert_array_equal(t.B_it, t.B1)
    assert "matrix,row,col,value" in t.to_csv()
    assert fimex.expected_order("radau-star", 4, 1) == 5


def test_quad_weights_integrates_constants():
    w = fimex.quad_weights([-1.0, 0.0, 1.0], -1.0, [1.0])
    assert w.sum() == pytest.approx(2.0, abs=1e-14)
    with pytest.raises(fimex.DegenerateInterpolation):
        fimex.quad_weights([0.0, 0.0], -1.0, [1.0])


def test_two_node_amplification():
    t = fimex.build_propagator(2, "radau")
    z1, z2 = complex(-2.0, 1.0), complex(-0.5, 0.3)
    assert fimex.amplification_radius(t, z1, z2) == pytest.approx(abs(1 + z2) / abs(1 - z1), rel=1e-13)
    with pytest.raises(fimex.PoleError):
        fimex.amplification(t, 1.0, 0.0)


def test_region_scan_shapes():
    t = fimex.build_propagator(4, "radau-star")
    grid = fimex.Grid(-4.0, 2.0, -3.0, 3.0, 21, 17)
    scan = fimex.region_S_hat(3j, t, 1, grid)
    assert scan.rho.shape == (17, 21)
    assert scan.mask.dtype == bool
    assert scan.stable_area > 0.0
    with pytest.raises(fimex.InvalidArgument):
        fimex.region_S_tilde(4.0, t, 1, grid)


def test_dahlquist_convergence():
    l1, l2 = complex(-1.0, 0.5), complex(-0.7, 1.1)
    exact = cmath.exp(l1 + l2)
    hs, errs = [], []
    for n in (10, 20, 40, 80):
        y = fimex.integrate_dahlquist(l1, l2, 1.0, 1.0, n, "radau-star", 4, 1)
        hs.append(1.0 / n)
        errs.append(abs(y - exact))
    fit = fimex.fit_order(hs, errs)
    assert abs(fit["order"] - 5) < 0.4


def test_python_callbacks_match_builtin_problem():
    lam = complex(-3.0, 0.0)

    def f1(t, y):
        return lam * y

    def f2(t, y):
        return np.zeros_like(y)

    y = fimex.integrate(f1, f2, np.array([1.0 + 0j]), 0.0, 1.0, 20, "radau", 3, 0,
                        jacobian_f1=lambda t, y: np.array([[lam]]))
    ref = fimex.integrate_dahlquist(lam, 0.0, 1.0, 1.0, 20, "radau", 3, 0)
    assert abs(y[0] - ref) < 1e-14


def test_vdp_and_kdv_smoke():
    y = fimex.integrate_vdp(1.0, "semi-implicit", 0.5, 50)
    assert y[0] == pytest.approx(1.619084329683232883, abs=1e-9)
    assert y[1] == pytest.approx(-0.8035304651763834477, abs=1e-9)
    u = fimex.integrate_kdv(64, 0.05, 20, "radau-star", 3, 1)
    assert u.shape == (64,)
    assert abs(u.mean()) < 1e-14
    assert math.isfinite(float(np.abs(u).max()))
