import numpy as np
import pytest
from hypothesis import given, strategies as st

from pairlab.spectral import (Field, GridSpec, convolve, fft_forward, fft_inverse,
                              fourier_l2_norm, lp_norm, mixed_norm, sobolev_norm,
                              weighted_l2)


def test_grid_accepts_powers_of_two_and_three_times():
    for n in (16, 24, 48, 64):
        assert GridSpec(1, n, 1.0).n == n
    for n in (10, 15, 40):
        with pytest.raises(ValueError):
            GridSpec(1, n, 1.0)


def test_grid_origin_and_spacing():
    g = GridSpec(1, 8, 4.0)
    assert g.dx == 0.5
    assert g.x[4] == 0.0
    assert g.x[0] == -2.0


def test_field_rejects_bad_shape_and_nan():
    g = GridSpec(1, 8, 1.0)
    with pytest.raises(ValueError):
        Field(g, 1, np.zeros(7))
    bad = np.zeros(8)
    bad[2] = np.nan
    with pytest.raises(ValueError):
        Field(g, 1, bad)


def test_axis_cap():
    g = GridSpec(3, 4, 1.0)
    f = Field(g, 2, np.zeros((4,) * 6))
    with pytest.raises(ValueError):
        fft_forward(f)


@given(st.integers(min_value=0, max_value=2 ** 31 - 1))
def test_plancherel_and_roundtrip(seed):
    rng = np.random.default_rng(seed)
    g = GridSpec(1, 16, 3.0)
    data = rng.standard_normal((16, 16)) + 1j * rng.standard_normal((16, 16))
    f = Field(g, 2, data)
    assert abs(f.norm() - fourier_l2_norm(f)) < 1e-12 * max(1.0, f.norm())
    back = fft_inverse(fft_forward(f))
    assert np.allclose(back.data, data, atol=1e-12)


def test_gaussian_l2_norm_matches_closed_form():
    g = GridSpec(1, 256, 40.0)
    f = Field(g, 1, np.exp(-g.x ** 2 / 2))
    assert abs(f.norm() ** 2 - np.sqrt(np.pi)) < 1e-12


def test_lp_norms_of_constant():
    g = GridSpec(1, 16, 2.0)
    f = Field(g, 1, 3.0 * np.ones(16))
    assert lp_norm(f, np.inf) == pytest.approx(3.0)
    assert lp_norm(f, 4) == pytest.approx(3.0 * 2.0 ** 0.25)


def test_sobolev_norm_of_single_mode():
    g = GridSpec(1, 32, 2 * np.pi)
    f = Field(g, 1, np.exp(3j * g.x))
    expected = np.sqrt(2 * np.pi) * 10.0 ** 0.75
    assert sobolev_norm(f, 1.5) == pytest.approx(expected, rel=1e-12)


def test_sobolev_norm_against_quadrature():
    # H^1 norm of a Gaussian: int (1 + k^2) |f^(k)|^2 dk with f^ the unitary transform
    from scipy.integrate import quad
    g = GridSpec(1, 128, 30.0)
    f = Field(g, 1, np.exp(-g.x ** 2 / 2))
    val, _ = quad(lambda k: (1 + k * k) * np.exp(-k * k), -np.inf, np.inf)
    assert sobolev_norm(f, 1.0) ** 2 == pytest.approx(val, rel=1e-10)


def test_weighted_l2_drops_zero_mode_only():
    g = GridSpec(1, 16, 2 * np.pi)
    f = Field(g, 1, 1.0 + np.cos(g.x))
    val = weighted_l2(f, lambda k2: 1.0 / k2)
    assert val == pytest.approx(np.sqrt(np.pi), rel=1e-12)
    w = np.ones(16)
    w[3] = np.inf
    with pytest.raises(ValueError):
        weighted_l2(f, w)


def test_convolution_with_gaussians():
    g = GridSpec(1, 256, 40.0)
    a = Field(g, 1, np.exp(-g.x ** 2))
    b = Field(g, 1, np.exp(-g.x ** 2))
    c = convolve(a, b)
    exact = np.sqrt(np.pi / 2) * np.exp(-g.x ** 2 / 2)
    assert np.abs(c.data - exact).max() < 1e-12


def test_convolution_is_commutative(rng):
    g = GridSpec(1, 32, 5.0)
    a = Field(g, 1, rng.standard_normal(32))
    b = Field(g, 1, rng.standard_normal(32))
    assert np.allclose(convolve(a, b).data, convolve(b, a).data, atol=1e-12)


def test_mixed_norms():
    g = GridSpec(1, 8, 2.0)
    u = np.zeros((8, 8))
    u[:, 2] = 1.0
    f = Field(g, 2, u)
    col = np.sqrt(2.0)
    assert mixed_norm(f, "inf") == pytest.approx(col)
    assert mixed_norm(f, "2") == pytest.approx(np.sqrt(g.dx) * col)
    assert mixed_norm(f, "2") == pytest.approx(f.norm())
    assert mixed_norm(f, "4") == pytest.approx(g.dx ** 0.25 * col)
