import numpy as np
import pytest

from dlrflow.grids import (
    SpatialGrid,
    VelocityGrid,
    fft_2d,
    gradient_x,
    ifft_2d,
    is_power_of_two,
)


def test_spatial_weights_sum_to_one():
    g = SpatialGrid(32)
    ones = np.ones(g.shape)
    assert g.inner(ones, ones) == pytest.approx(1.0, abs=1e-14)


def test_velocity_gaussian_normalization():
    g = VelocityGrid(64, 6.0)
    # solver's equilibrium weight integrates to exactly one by construction
    assert abs(g.integral(g.maxwellian) - 1.0) < 1e-12
    # the bare analytic Gaussian misses by the truncated tail, below the
    # 1e-7 budget of the default truncation
    analytic = np.exp(-0.5 * (g.v1 ** 2 + g.v2 ** 2)) / (2.0 * np.pi)
    assert abs(g.integral(analytic) - 1.0) < 1e-7
    # a wider box brings the bare Gaussian itself within 1e-10
    gw = VelocityGrid(64, 8.0)
    analytic = np.exp(-0.5 * (gw.v1 ** 2 + gw.v2 ** 2)) / (2.0 * np.pi)
    assert abs(gw.integral(analytic) - 1.0) < 1e-10


def test_velocity_grid_symmetric_and_odd_moments_vanish():
    g = VelocityGrid(16, 6.0)
    assert np.allclose(np.sort(g.v), np.sort(-g.v), atol=1e-14)
    assert abs(g.inner(g.maxwellian * g.v1, np.ones(g.shape))) < 1e-12
    assert abs(g.inner(g.maxwellian * g.v2, np.ones(g.shape))) < 1e-12


def test_inner_product_bilinear_symmetric():
    g = SpatialGrid(16)
    rng = np.random.default_rng(3)
    a, b, c = rng.standard_normal((3, 16, 16))
    assert g.inner(a, b) == pytest.approx(g.inner(b, a), rel=1e-14)
    assert g.inner(2.0 * a + c, b) == pytest.approx(
        2.0 * g.inner(a, b) + g.inner(c, b), rel=1e-12, abs=1e-14)


def test_inner_product_grid_mismatch_rejected():
    g = SpatialGrid(16)
    with pytest.raises(ValueError):
        g.inner(np.ones((16, 16)), np.ones((8, 8)))
    with pytest.raises(ValueError):
        g.inner(np.ones((8, 8)), np.ones((8, 8)))


def test_gradient_constant_is_zero():
    g = SpatialGrid(32)
    f = np.full(g.shape, 3.7)
    for method in ("centered2", "spectral"):
        d1, d2 = gradient_x(f, g, method)
        assert np.max(np.abs(d1)) < 1e-12
        assert np.max(np.abs(d2)) < 1e-12


def test_gradient_spectral_exact_on_resolved_mode():
    g = SpatialGrid(64)
    f = np.sin(2.0 * np.pi * g.x1)
    d1, d2 = gradient_x(f, g, "spectral")
    assert np.max(np.abs(d1 - 2.0 * np.pi * np.cos(2.0 * np.pi * g.x1))) < 1e-11
    assert np.max(np.abs(d2)) < 1e-12


def test_gradient_centered2_taylor_bound():
    g = SpatialGrid(128)
    f = np.sin(2.0 * np.pi * g.x1)
    d1, _ = gradient_x(f, g, "centered2")
    err = np.max(np.abs(d1 - 2.0 * np.pi * np.cos(2.0 * np.pi * g.x1)))
    bound = (2.0 * np.pi) ** 3 * g.h ** 2 / 6.0
    assert err <= 1.01 * bound


def test_gradient_unknown_method():
    g = SpatialGrid(16)
    with pytest.raises(ValueError):
        gradient_x(np.ones(g.shape), g, "upwind")


def test_fft_round_trip_and_modes():
    g = SpatialGrid(32)
    rng = np.random.default_rng(5)
    f = rng.standard_normal(g.shape)
    assert np.max(np.abs(ifft_2d(fft_2d(f)).real - f)) < 1e-12

    const = np.full(g.shape, 2.5)
    spec = fft_2d(const)
    assert abs(spec[0, 0] - 2.5 * g.n ** 2) < 1e-9
    spec[0, 0] = 0.0
    assert np.max(np.abs(spec)) < 1e-9

    f = np.sin(2.0 * np.pi * g.x2)
    spec = fft_2d(f)
    nonzero = np.argwhere(np.abs(spec) > 1e-8)
    assert sorted(map(tuple, nonzero)) == [(0, 1), (0, g.n - 1)]


@pytest.mark.parametrize("method,tol", [("spectral", 1e-10), ("centered2", 1e-13)])
def test_integration_by_parts(method, tol):
    g = SpatialGrid(32)
    rng = np.random.default_rng(11)
    f = rng.standard_normal(g.shape)
    h = rng.standard_normal(g.shape)
    lhs = g.inner(f, gradient_x(h, g, method)[0])
    rhs = -g.inner(gradient_x(f, g, method)[0], h)
    assert abs(lhs - rhs) < tol * max(1.0, abs(lhs))


def test_power_of_two():
    assert is_power_of_two(64)
    assert not is_power_of_two(96)
    assert not is_power_of_two(0)
