import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mfxwt.engine import (
    DataQualityWarning,
    MassExponentSurface,
    OrderGrid,
    diagonal_analysis,
    direct_estimate,
    fit_mass_exponents,
    joint_measure,
    joint_partition,
    legendre_spectrum,
    loglog_fit,
    plane_fit,
    scaled_partition_for_comparison,
)
from mfxwt.errors import DegenerateField, InvalidGrid, RangeTooNarrow, ShapeMismatch, ZeroCoefficient
from mfxwt.wavelet import KernelSpec, ScaleGrid, WaveletField, cwt


def single_series_log_partition(coefs, order):
    """ln sum_i |w|^order per scale, written independently of the engine."""
    out = []
    for row in coefs:
        a = np.abs(row)
        m = a.max()
        out.append(order * np.log(m) + np.log(np.sum((a / m) ** order)))
    return np.array(out)


@pytest.fixture(scope="module")
def pair():
    rng = np.random.default_rng(11)
    n = 2048
    x = rng.standard_normal(n)
    y = 0.6 * x + 0.8 * rng.standard_normal(n)
    grid = ScaleGrid.default(n, 12)
    return cwt(x, grid), cwt(y, grid)


def test_order_grid():
    g = OrderGrid.uniform(10, 0.5)
    assert g.shape == (21, 21)
    assert g.step_p == 0.5 and g.p_values[0] == 0
    with pytest.raises(InvalidGrid):
        OrderGrid(np.array([-0.5, 0, 0.5]), np.array([0.0, 1.0]))
    with pytest.raises(InvalidGrid):
        OrderGrid(np.array([0.0, 1.0, 3.0]), np.array([0.0, 1.0]))


def test_zero_order_counts_positions(pair):
    wx, wy = pair
    t = joint_partition(wx, wy, OrderGrid.uniform(2, 1))
    assert np.allclose(t.chi[0, 0], wx.n, rtol=1e-14)
    assert np.all(t.log_chi[0, 0] == t.log_chi[0, 0, 0])


def test_reduces_to_single_series(pair):
    wx, _ = pair
    grid = OrderGrid.uniform(10, 0.5)
    t = joint_partition(wx, wx, grid)
    for k, q in enumerate(grid.q_values):
        ref = single_series_log_partition(wx.coefficients, q)
        assert np.allclose(t.log_chi[k, k], ref, rtol=1e-12, atol=1e-12)


def test_cross_spectrum_order_four(pair):
    wx, wy = pair
    t = joint_partition(wx, wy, OrderGrid.uniform(4, 4))
    ref = np.sum((np.abs(wx.coefficients) * np.abs(wy.coefficients)) ** 2, axis=1)
    assert np.allclose(t.chi[1, 1], ref, rtol=1e-12)


def test_symmetry_is_exact(pair):
    wx, wy = pair
    grid = OrderGrid.uniform(10, 0.5)
    a = joint_partition(wx, wy, grid).log_chi
    b = joint_partition(wy, wx, grid).log_chi
    assert np.array_equal(a, np.swapaxes(b, 0, 1))


def test_measure_normalised(pair):
    wx, wy = pair
    for p, q in [(0, 0), (1, 3), (10, 10), (7.5, 0.5)]:
        for j in (0, 5, 11):
            mu = joint_measure(wx, wy, p, q, j)
            assert abs(mu.sum() - 1) < 1e-12
    mu = joint_measure(wx, wy, 0, 0, 3)
    assert np.allclose(mu, 1 / wx.n)


def test_mass_exponent_at_origin_is_zero(pair):
    wx, wy = pair
    s = fit_mass_exponents(joint_partition(wx, wy, OrderGrid.uniform(10, 0.5)))
    assert s.T[0, 0] == 0.0
    assert np.all(np.isfinite(s.T))
    assert s.r2.shape == s.T.shape
    assert np.all((s.r2 >= 0) & (s.r2 <= 1))
    assert legendre_spectrum(s).D[0, 0] == 0.0


def test_fit_is_bit_identical(pair):
    wx, wy = pair
    grid = OrderGrid.uniform(10, 0.5)
    a = fit_mass_exponents(joint_partition(wx, wy, grid), (8, 100))
    b = fit_mass_exponents(joint_partition(wx, wy, grid), (8, 100))
    assert np.array_equal(a.T, b.T) and np.array_equal(a.r2, b.r2)


def test_scaling_range(pair):
    wx, wy = pair
    t = joint_partition(wx, wy, OrderGrid.uniform(2, 1))
    s = fit_mass_exponents(t, (10, 200))
    assert s.scaling_range[0] >= 10 and s.scaling_range[1] <= 200
    with pytest.raises(RangeTooNarrow):
        fit_mass_exponents(t, (10, 20))


def test_loglog_fit_recovers_line():
    ls = np.log(np.geomspace(4, 400, 9))
    y = np.array([1.5 * ls - 2, -0.25 * ls + 7])
    slope, icpt, r2 = loglog_fit(ls, y)
    assert np.allclose(slope, [1.5, -0.25]) and np.allclose(icpt, [-2, 7])
    assert np.allclose(r2, 1)
    slope, _, r2 = loglog_fit(ls, np.full(9, 3.3))
    assert slope == 0.0 and r2 == 1.0


def _surface(T, step):
    axis = step * np.arange(T.shape[0])
    g = OrderGrid(axis, axis.copy())
    return MassExponentSurface(T, np.ones_like(T), g, (1, 2)), g


def test_legendre_of_plane():
    a, b, c = -0.485, -0.268, 0.135
    g = OrderGrid.uniform(10, 0.5)
    pp, qq = g.mesh()
    s, _ = _surface(a * pp + b * qq + c, 0.5)
    js = legendre_spectrum(s)
    assert np.allclose(js.h_x, 2 * a) and np.allclose(js.h_y, 2 * b)
    assert np.allclose(js.D, -c)
    assert js.h_x.mean() == pytest.approx(-0.970)
    assert js.h_y.mean() == pytest.approx(-0.536)


@pytest.mark.parametrize("step", [0.5, 0.25, 0.1])
def test_legendre_of_quadratic(step):
    a, b = 0.03, -0.02
    T_fn = lambda p, q: a * p**2 + b * q**2  # noqa: E731
    n = int(round(6 / step)) + 1
    axis = step * np.arange(n)
    pp, qq = np.meshgrid(axis, axis, indexing="ij")
    s, _ = _surface(T_fn(pp, qq), step)
    js = legendre_spectrum(s)
    assert np.max(np.abs(js.h_x - 4 * a * pp)) <= 10 * step**2
    assert np.max(np.abs(js.h_y - 4 * b * qq)) <= 10 * step**2
    # central differences are exact on a quadratic away from the edges
    assert np.allclose(js.h_x[1:-1], 4 * a * pp[1:-1], atol=1e-12)


def test_direct_uniform_measure(pair):
    wx, wy = pair
    js = direct_estimate(wx, wy, OrderGrid.uniform(1, 1))
    assert abs(js.D[0, 0]) < 1e-12
    assert js.method == "direct"


def test_direct_matches_legendre_roughly(pair):
    wx, wy = pair
    grid = OrderGrid.uniform(4, 0.5)
    leg = legendre_spectrum(fit_mass_exponents(joint_partition(wx, wy, grid)))
    d = direct_estimate(wx, wy, grid)
    inner = (slice(1, -1), slice(1, -1))
    assert np.max(np.abs(leg.h_x[inner] - d.h_x[inner])) < 0.05
    assert np.max(np.abs(leg.h_y[inner] - d.h_y[inner])) < 0.05


def test_white_noise_is_monofractal(pair):
    # the increments of a path with H = 1/2 give h near -1/2 everywhere
    wx, wy = pair
    d = diagonal_analysis(wx, wy)
    assert d.width < 0.3
    assert np.all(np.abs(d.h_xy + 0.5) < 0.3)


def test_diagonal_reduces_to_single_series(pair):
    wx, _ = pair
    q = np.arange(0, 10.25, 0.25)
    d = diagonal_analysis(wx, wx, q)
    for k, qk in enumerate(q):
        ref = single_series_log_partition(wx.coefficients, qk)
        assert np.allclose(d.meta["log_chi"][k], ref, rtol=1e-12, atol=1e-12)


def test_diagonal_agrees_with_joint_surface(pair):
    wx, wy = pair
    grid = OrderGrid.uniform(10, 0.5)
    s = fit_mass_exponents(joint_partition(wx, wy, grid))
    d = diagonal_analysis(wx, wy, grid.q_values)
    assert np.allclose(d.T, np.diag(s.T), atol=1e-10)
    assert d.width == pytest.approx(d.h_xy.max() - d.h_xy.min())
    assert d.width >= 0


def test_scaled_partition(pair):
    wx, wy = pair
    grid = OrderGrid.uniform(2, 2)
    t = joint_partition(wx, wy, grid)
    sc = scaled_partition_for_comparison(t)
    assert np.allclose(sc.chi[0, 0], wx.n / wx.scales)
    s0 = fit_mass_exponents(t).T
    s1 = fit_mass_exponents(sc).T
    assert s1[1, 1] == pytest.approx(s0[1, 1] + 1)


def test_plane_fit_recovers_plane():
    g = OrderGrid.uniform(10, 0.5)
    pp, qq = g.mesh()
    T = -0.4 * pp - 0.3 * qq + 0.1
    s = MassExponentSurface(T, np.ones_like(T), g, (1, 2))
    a, b, c, r2 = plane_fit(s)
    assert (a, b, c) == pytest.approx((-0.4, -0.3, 0.1))
    assert r2 == pytest.approx(1.0)


def test_shape_mismatch(pair):
    wx, _ = pair
    other = cwt(np.random.default_rng(2).standard_normal(2048), ScaleGrid.default(2048, 10))
    with pytest.raises(ShapeMismatch):
        joint_partition(wx, other, OrderGrid.uniform(2, 1))
    with pytest.raises(ShapeMismatch):
        diagonal_analysis(wx, other)


def test_degenerate_row(pair):
    wx, _ = pair
    c = wx.coefficients.copy()
    c[3] = 0.0
    z = WaveletField(c, wx.scale_grid, wx.kernel)
    with pytest.raises(DegenerateField):
        joint_partition(wx, z, OrderGrid.uniform(2, 1))


def test_exact_zeros_floored_and_reported(pair):
    wx, wy = pair
    c = wy.coefficients.copy()
    c[:, ::50] = 0.0  # 2% of positions
    z = WaveletField(c, wy.scale_grid, wy.kernel)
    with pytest.warns(DataQualityWarning):
        t = joint_partition(wx, z, OrderGrid.uniform(2, 1))
    assert t.meta["floored_y"][0] == 41 and t.meta["warnings"]
    with pytest.raises(ZeroCoefficient):
        direct_estimate(wx, z, OrderGrid.uniform(2, 1), floor=0.0)


def test_few_zeros_do_not_warn(pair):
    wx, wy = pair
    c = wy.coefficients.copy()
    c[:, 7] = 0.0
    z = WaveletField(c, wy.scale_grid, wy.kernel)
    with warnings.catch_warnings():
        warnings.simplefilter("error", DataQualityWarning)
        t = joint_partition(wx, z, OrderGrid.uniform(2, 1))
    assert t.meta["warnings"] == []


def test_exclude_edges():
    rng = np.random.default_rng(4)
    grid = ScaleGrid.logspaced(4, 64, 6)
    wx = cwt(rng.standard_normal(2048), grid)
    wy = cwt(rng.standard_normal(2048), grid)
    t = joint_partition(wx, wy, OrderGrid.uniform(2, 1), exclude_edges=True)
    h = wx.edge_halfwidths()
    assert np.allclose(t.chi[0, 0], wx.n - 2 * h)
    field = cwt(np.random.default_rng(0).standard_normal(1024), ScaleGrid.default(1024, 8), KernelSpec(2, 8))
    with pytest.raises(RangeTooNarrow):
        joint_partition(field, field, OrderGrid.uniform(2, 1), exclude_edges=True)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31), st.floats(0, 10), st.floats(0, 10))
def test_direct_slopes_are_consistent(seed, p, q):
    # D = p h_x/2 + q h_y/2 - T holds for the direct route as well
    rng = np.random.default_rng(seed)
    grid = ScaleGrid.default(512, 8)
    wx = cwt(rng.standard_normal(512), grid)
    wy = cwt(rng.standard_normal(512), grid)
    g = OrderGrid(np.array([p]), np.array([q]))
    d = direct_estimate(wx, wy, g)
    T = fit_mass_exponents(joint_partition(wx, wy, g)).T
    assert d.D[0, 0] == pytest.approx(p * d.h_x[0, 0] / 2 + q * d.h_y[0, 0] / 2 - T[0, 0], abs=1e-9)
