import numpy as np
import pytest

from pairlab.fitting import fit_exponent, strictly_decreasing


def test_exact_power_law():
    N = np.array([8, 16, 32, 64.0])
    fit = fit_exponent(N, 3.0 * N ** -0.5)
    assert abs(fit.slope + 0.5) < 1e-12
    assert fit.halfwidth < 1e-12
    assert fit.r2 == pytest.approx(1.0)


def test_constant_series_has_zero_slope():
    fit = fit_exponent([1, 2, 4, 8], [5.0] * 4)
    assert abs(fit.slope) < 1e-12


def test_noisy_synthetic_series():
    rng = np.random.default_rng(7)
    N = np.array([8, 16, 32, 64, 128.0])
    beta = 0.4
    y = N ** (-1 + 2 * beta) * (1 + 0.01 * rng.standard_normal(N.size))
    fit = fit_exponent(N, y)
    assert abs(fit.slope + 0.2) < 0.05
    assert fit.ci[0] < fit.slope < fit.ci[1]


def test_rejects_bad_input():
    with pytest.raises(ValueError):
        fit_exponent([1, 2], [1, 2])
    with pytest.raises(ValueError):
        fit_exponent([1, 2, 3], [1, 0, 2])


def test_strictly_decreasing():
    assert strictly_decreasing([3, 2, 1])
    assert not strictly_decreasing([3, 3, 1])
