import math

import numpy as np
import pytest

from pairlab import meanfield as mf
from pairlab.spectral import GridSpec


def test_profiles_have_unit_integral():
    for d in (1, 2, 3):
        assert mf.bump_profile(d).l1 == pytest.approx(1.0, rel=1e-10)
        assert mf.gaussian_profile(d).l1 == pytest.approx(1.0, rel=1e-8)


def test_scaled_potential_keeps_integral():
    g = GridSpec(1, 512, 8.0)
    inter = mf.make_interaction(mf.bump_profile(1), 64, 0.4, g)
    assert inter.exact_l1() == pytest.approx(1.0, rel=1e-9)
    # the grid sum converges to the same value once the bump is resolved
    assert inter.grid_l1() == pytest.approx(1.0, rel=1e-3)
    assert inter.sup == pytest.approx(64 ** 0.4 * mf.bump_profile(1).sup)


def test_resolution_guard_names_minimal_n():
    g = GridSpec(1, 32, 12.8)
    with pytest.raises(mf.ResolutionError, match="n >= "):
        mf.make_interaction(mf.bump_profile(1), 64, 0.4, g)


def test_gaussian_state_normalized():
    for d in (1, 2):
        g = GridSpec(d, 64, 16.0)
        assert mf.mass(mf.gaussian_state(g, 1.0), g) == pytest.approx(1.0, abs=1e-12)


def _run(d=1, N=8, beta=0.4, n=64, L=12.8, dt=0.005, steps=1000, profile=None):
    g = GridSpec(d, n, L)
    inter = mf.make_interaction(profile or mf.bump_profile(d), N, beta, g)
    st = mf.CondensateState(mf.gaussian_state(g, 1.0, kick=1.0), 0.0, inter)
    return mf.evolve_hartree(st, dt, steps, record_every=50)


def test_mass_and_energy_conservation():
    tr = _run()
    m = tr.masses()
    assert np.abs(m - m[0]).max() < 1e-8
    e = tr.energies()
    assert np.abs(e - e[0]).max() < 1e-3


def test_free_evolution_matches_closed_form():
    g = GridSpec(1, 512, 80.0)
    inter = mf.make_interaction(mf.zero_profile(1), 1, 0.0, g)
    s0 = 1.0
    st = mf.CondensateState(mf.gaussian_state(g, s0), 0.0, inter)
    tr = mf.evolve_hartree(st, 0.005, 400, record_every=400)
    t = tr.times[-1]
    z = 1 + 2j * t / s0 ** 2
    exact = (np.pi * s0 ** 2) ** -0.25 / np.sqrt(z) * np.exp(-g.x ** 2 / (2 * s0 ** 2 * z))
    assert np.abs(tr.phis[-1] - exact).max() < 1e-10


def test_strang_self_convergence_order():
    errs = []
    ref = _run(dt=0.00125, steps=800, n=64)
    for dt, steps in ((0.01, 100), (0.005, 200)):
        tr = _run(dt=dt, steps=steps, n=64)
        errs.append(np.abs(tr.phis[-1] - ref.phis[-1]).max())
    assert errs[0] / errs[1] > 3.5


def test_time_step_guard():
    g = GridSpec(1, 256, 4.0)
    inter = mf.make_interaction(mf.zero_profile(1), 1, 0.0, g)
    st = mf.CondensateState(mf.gaussian_state(g, 0.5), 0.0, inter)
    with pytest.raises(ValueError, match="exceeds pi"):
        mf.evolve_hartree(st, 0.01, 1)


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_nan_guard():
    g = GridSpec(1, 16, 4.0)
    phi = mf.gaussian_state(g, 1.0) * 1e200
    inter2 = mf.make_interaction(mf.bump_profile(1), 1, 0.0, g)
    st = mf.CondensateState(phi, 0.0, inter2)
    with pytest.raises(mf.NumericalGuardError):
        mf.evolve_hartree(st, 0.01, 5)


def test_time_derivative_of_polynomial_is_exact():
    g = GridSpec(1, 8, 1.0)
    inter = mf.make_interaction(mf.zero_profile(1), 1, 0.0, g)
    t = np.linspace(0.0, 1.0, 21)
    phis = np.array([(tt ** 3) * np.ones(8) for tt in t], dtype=complex)
    traj = mf.Trajectory(t, phis, inter)
    for j, expect in ((1, lambda s: 3 * s ** 2), (2, lambda s: 6 * s), (3, lambda s: 6 + 0 * s)):
        tj, der = mf.time_derivative(traj, j)
        assert np.allclose(der[:, 0], expect(tj), atol=1e-9)


def test_decay_window_validation():
    tr = _run(steps=100)
    with pytest.raises(ValueError):
        mf.decay_report(tr, 0, (0.0, 100.0))


def test_limit_flavor_is_close_for_large_N():
    g = GridSpec(1, 512, 6.4)
    dists = []
    for N in (16, 256):
        inter = mf.make_interaction(mf.bump_profile(1), N, 0.4, g)
        phi = mf.gaussian_state(g, 1.0)
        a = mf.evolve_hartree(mf.CondensateState(phi, 0.0, inter), 4e-5, 5000, 5000)
        b = mf.evolve_hartree(mf.CondensateState(phi, 0.0, inter, "limit"), 4e-5, 5000, 5000)
        dists.append(mf.compare_to_limit(a, b)[-1])
    assert dists[1] < dists[0]


def test_corrector_profile_solves_poisson_equation():
    cor = mf.CorrectorProfile(mf.bump_profile(1))
    x = cor._x
    h = x[1] - x[0]
    w = cor.w(x)
    lap = (np.roll(w, -1) - 2 * w + np.roll(w, 1)) / h ** 2
    v = mf.bump_profile(1)(np.abs(x)) - cor.removed_mean
    assert np.abs(lap + 0.5 * v).max() < 1e-3
    assert cor.removed_mean == pytest.approx(0.25, rel=1e-3)


def test_ansatz_residual_shrinks_with_N():
    g = GridSpec(1, 1024, 12.8)
    phi = mf.gaussian_state(g, 1.0).astype(complex)
    res = []
    for N in (8, 64, 512):
        inter = mf.make_interaction(mf.bump_profile(1), N, 0.4, g)
        traj = mf.Trajectory(np.array([0.0]), phi[None], inter)
        res.append(mf.heuristic_ansatz_check(inter, traj, relative=True)[0])
    assert res[0] > res[1] > res[2]


def test_corrector_uses_projected_profile():
    cor = mf.CorrectorProfile(mf.bump_profile(1))
    x = cor._x
    assert abs(np.sum(cor.v_projected(x))) < 1e-10 * len(x)
    h = x[1] - x[0]
    assert cor.vw_integral == pytest.approx(float(np.sum(cor.v_projected(x) * cor.w(x)) * h))


def test_energy_drift_per_unit_time():
    g = GridSpec(1, 64, 12.8)
    inter = mf.make_interaction(mf.bump_profile(1), 8, 0.4, g)
    st = mf.CondensateState(mf.gaussian_state(g, 1.0, kick=1.0), 0.0, inter)
    tr = mf.evolve_hartree(st, 0.005, 2000, record_every=100)
    e = tr.energies()
    assert np.abs(e - e[0]).max() / abs(e[0]) / tr.times[-1] < 1e-6


def test_l2_norm_scaling_law():
    g = GridSpec(1, 256, 8.0)
    inter = mf.make_interaction(mf.bump_profile(1), 16, 0.5, g)
    assert inter.grid_l2sq() / mf.bump_profile(1).l2sq == pytest.approx(4.0, rel=0.02)
    assert inter.sup == pytest.approx(4.0 * mf.bump_profile(1).sup)
