import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from pairlab import fock as fk
from pairlab import meanfield as mf


def _system(N=4.0, M=3, L=3.0, beta=0.4, **kw):
    return fk.ModeSystem(M, L, N, beta, mf.bump_profile(1), **kw)


def _sectors_close(a, b, upto, tol):
    return max(np.abs(a.blocks[n] - b.blocks[n]).max() for n in range(upto + 1)) < tol


def test_sector_dimensions_and_budget():
    space = fk.FockSpace(3, 6)
    for n in range(7):
        assert space.dims[n] == fk.sector_dim(n, 3) == math.comb(n + 2, 2)
        assert np.all(space.occ[n].sum(axis=1) == n)
    assert space.dim == math.comb(9, 3)
    with pytest.raises(fk.FockGuardError):
        fk.FockSpace(8, 40, budget=1000)


def test_laplacians_annihilate_constants():
    for kind in ("3pt", "spectral"):
        A = fk.periodic_laplacian(6, 0.5, kind)
        assert np.allclose(A, A.T)
        assert np.abs(A @ np.ones(6)).max() < 1e-12
    with pytest.raises(ValueError):
        fk.periodic_laplacian(6, 0.5, "5pt")


@given(st.floats(min_value=2.0, max_value=64.0), st.floats(min_value=0.0, max_value=0.9))
def test_cell_average_preserves_integral(N, beta):
    system = fk.ModeSystem(5, 5.0, N, beta, mf.bump_profile(1))
    assert system.W[0].sum() * system.dx == pytest.approx(1.0, rel=1e-9)
    assert np.allclose(system.W, system.W.T)


def test_point_coupling_samples_profile():
    system = _system(coupling="point")
    assert system.W[0, 0] == pytest.approx(4.0 ** 0.4 * mf.bump_profile(1).sup)


def test_coherent_state_matches_dense_exponential():
    space = fk.FockSpace(2, 24)
    f = np.array([0.6, 0.8j])
    a = fk.coherent_state(space, f, 2.0)
    b = fk.coherent_by_expm(space, f, 2.0)
    assert _sectors_close(a, b, 10, 1e-12)
    assert a.mean_number() == pytest.approx(2.0, rel=1e-8)


def test_one_mode_squeezed_vacuum_closed_form():
    r = 0.4
    space = fk.FockSpace(1, 60)
    psi = fk.bogoliubov_state(space, np.array([[r]]))
    for n in range(0, 61):
        c = psi.blocks[n][0]
        if n % 2:
            assert c == 0
            continue
        m = n // 2
        log_mag = (-0.5 * math.log(math.cosh(r)) + m * math.log(math.tanh(r))
                   + 0.5 * math.lgamma(n + 1) - m * math.log(2) - math.lgamma(m + 1))
        assert abs(c - math.exp(log_mag)) < 1e-14


def test_squeezing_recursion_matches_dense_exponential():
    space = fk.FockSpace(2, 40)
    K = np.array([[0.3, 0.2 - 0.1j], [0.2 - 0.1j, -0.25j]])
    a = fk.bogoliubov_state(space, K)
    b = fk.apply_B_exp(space, K, fk.vacuum(space))
    assert _sectors_close(a, b, 8, 1e-12)
    # exp(-B) maps the vacuum into even sectors only
    assert all(np.abs(a.blocks[n]).max() == 0 for n in range(1, 41, 2))


def test_displaced_squeezed_matches_dense_product():
    space = fk.FockSpace(2, 26)
    K = np.array([[0.2, 0.1], [0.1, 0.15j]])
    alpha = np.array([0.9, -0.5j])
    a = fk.displaced_squeezed(space, alpha, K)
    D = fk.expm_dense(space, -fk.A_operator(space, alpha))
    S = fk.expm_dense(space, -fk.B_operator(space, K))
    b = fk.FockVector.from_flat(space, D @ (S @ fk.vacuum(space).flat()))
    assert _sectors_close(a, b, 8, 1e-11)


def test_two_particle_block_matches_first_quantization():
    system = _system(M=4, L=4.0)
    space = fk.FockSpace(4, 2)
    H = fk.hamiltonian_block(space, 2, system.lap, system.W, system.N).toarray()
    M = 4
    I = np.eye(M)
    H2 = np.kron(system.lap, I) + np.kron(I, system.lap)
    H2 -= np.diag(system.W.ravel()) / system.N
    P = np.zeros((M * M, space.dims[2]))
    for col, occ in enumerate(space.occ[2]):
        idx = np.repeat(np.arange(M), occ)
        v = np.zeros((M, M))
        v[idx[0], idx[1]] += 1
        v[idx[1], idx[0]] += 1
        P[:, col] = v.ravel() / np.linalg.norm(v)
    assert np.abs(P.T @ H2 @ P - H).max() < 1e-12


def test_hamiltonian_is_hermitian_and_evolution_unitary():
    system = _system()
    space = fk.FockSpace(3, 10)
    ham = fk.build_hamiltonian(system, space)
    assert ham.hermiticity_defect() == 0.0
    psi = fk.coherent_state(space, fk.gaussian_modes(system), 4.0, tail_tol=1e-2)
    out = fk.evolve_exact(psi, ham, 0.7)
    assert abs(out.norm() - psi.norm()) < 1e-12
    assert np.allclose(out.sector_weights(), psi.sector_weights(), atol=1e-12)


def test_coherent_state_marginal_is_pure():
    system = _system(N=3.0)
    space = fk.FockSpace(3, 30)
    f = fk.gaussian_modes(system, 0.8, kick=0.5)
    psi = fk.coherent_state(space, f, 3.0)
    gamma = fk.marginal_gamma1(space, psi)
    assert np.trace(gamma).real == pytest.approx(1.0)
    assert fk.trace_distance(gamma, f) < 1e-7


def test_phase_min_distance_ignores_global_phase():
    space = fk.FockSpace(2, 20)
    psi = fk.coherent_state(space, np.array([0.6, 0.8]), 2.0)
    rotated = fk.FockVector(tuple(np.exp(0.8j) * b for b in psi.blocks))
    assert fk.phase_min_distance(psi, rotated) < 1e-7


def test_mode_dynamics_conserve_norm_and_bogoliubov_identity():
    system = _system()
    f0 = fk.gaussian_modes(system, 0.8)
    traj = fk.evolve_modes(system, f0, 1.0)
    assert np.linalg.norm(traj.f) == pytest.approx(1.0, abs=1e-10)
    assert traj.bogoliubov_residual() < 1e-9
    assert np.allclose(traj.S, traj.S.T, atol=1e-10)


def test_free_modes_have_no_pairs():
    system = fk.ModeSystem(3, 3.0, 4.0, 0.4, mf.zero_profile(1))
    traj = fk.evolve_modes(system, fk.gaussian_modes(system), 0.5)
    assert np.abs(traj.S).max() < 1e-14
    import scipy.linalg
    expected = scipy.linalg.expm(0.5j * system.lap) @ fk.gaussian_modes(system)
    assert np.abs(traj.f - expected).max() < 1e-10


def test_initial_error_vanishes():
    system = _system(N=4.0)
    res = fk.fock_error(system, fk.gaussian_modes(system), 0.0)
    assert res.error_k < 1e-7 and res.error_k0 < 1e-7
    assert res.trace_distance < 1e-7


def test_pair_correction_improves_approximation():
    system = _system(N=4.0, M=3)
    res = fk.fock_error(system, fk.gaussian_modes(system, 0.8), 0.5)
    assert res.error_k < res.error_k0
    assert res.exact_norm_drift < 1e-10
    assert res.ap_tail < 1e-8


def test_required_nmax_tail():
    from scipy.stats import poisson
    for N in (4, 9.5, 16):
        n = fk.required_nmax(N, tail=1e-10)
        assert poisson.sf(n, N) <= 1e-10 < poisson.sf(n - 1, N)


def test_truncation_guard():
    space = fk.FockSpace(2, 4)
    with pytest.raises(fk.FockGuardError):
        fk.coherent_state(space, np.array([1.0, 0.0]), 8.0)
