"""Each forcing summand against a direct loop evaluation of its integral."""
import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from pairlab import forcing as fc

n = 12
DX = 0.3
NPART = 8.0


def _inputs(seed, n=n, N=NPART, dx=DX):
    rng = np.random.default_rng(seed)

    def c(*shape):
        return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    V = rng.standard_normal((n, n))
    V = V + V.T
    return fc.ForcingInputs(c(n, n), c(n, n), c(n), V, N, dx)


@pytest.fixture(scope="module")
def fin():
    return _inputs(0)


def _loop_compose(a, b):
    m = a.shape[0]
    out = np.zeros((m, m), complex)
    for i in range(m):
        for j in range(m):
            out[i, j] = DX * sum(a[i, k] * b[k, j] for k in range(m))
    return out


def _oracle(f):
    u, p, phi, V = f.u, f.p, f.phi, f.V
    ub, pb, phib = u.conj(), p.conj(), phi.conj()
    ubu = _loop_compose(ub, u)
    uub = _loop_compose(u, ub)
    pbu = _loop_compose(pb, u)
    ubpb = _loop_compose(ub, pb)
    cbu = u + pbu
    g1 = -NPART ** -0.5
    g2 = -1.0 / (2 * NPART)
    R = range(n)
    out = {}

    def dbl(fn):
        return DX * DX * sum(V[a, b] * fn(a, b) for a in R for b in R)

    def sgl(fn):
        return DX * sum(fn(a) for a in R)

    one = {
        "F1A": lambda y: dbl(lambda a, b: u[y, b] * ubu[a, a] * phib[b]),
        "F1B": lambda y: dbl(lambda a, b: pb[y, b] * uub[a, a] * phi[b]),
        "F1C": lambda y: dbl(lambda a, b: u[y, a] * ubu[a, b] * phib[b]),
        "F1D": lambda y: dbl(lambda a, b: pb[y, a] * pbu[a, b] * phib[b]),
        "F1E": lambda y: dbl(lambda a, b: pb[y, a] * uub[a, b] * phi[b]),
        "F1F": lambda y: dbl(lambda a, b: u[y, a] * ubpb[a, b] * phi[b]),
        "F1G": lambda y: dbl(lambda a, b: pb[y, a] * u[a, b] * phib[b]),
        "F1H": lambda y: dbl(lambda a, b: u[y, a] * ub[a, b] * phi[b]),
        "F1I": lambda y: sgl(lambda a: V[y, a] * u[y, a] * phib[a]),
        "F1J": lambda y: sgl(lambda a: V[y, a] * uub[y, a] * phi[a]),
        "F1K": lambda y: sgl(lambda a: V[y, a] * pbu[y, a] * phib[a]),
        "F1L": lambda y: sgl(lambda a: V[y, a] * uub[a, a] * phi[y]),
    }
    for name, fn in one.items():
        out[name] = g1 * np.array([fn(y) for y in R])

    two = {
        "F2A": lambda y, z: V[y, z] * (u[y, z] + pbu[y, z]),
        "F2B": lambda y, z: dbl(lambda a, b: 2 * pb[y, b] * u[b, z] * ubu[a, a]),
        "F2C": lambda y, z: dbl(lambda a, b: 2 * pb[y, b] * u[a, z] * ubu[a, b]),
        "F2D": lambda y, z: dbl(lambda a, b: u[y, a] * u[b, z] * ubpb[a, b]),
        "F2E": lambda y, z: dbl(lambda a, b: pb[y, a] * p[b, z] * pbu[a, b]),
        "F2F": lambda y, z: dbl(lambda a, b: u[y, a] * u[b, z] * ub[a, b]),
        "F2G": lambda y, z: dbl(lambda a, b: pb[y, a] * p[b, z] * u[a, b]),
        "F2H": lambda y, z: sgl(lambda a: V[y, a] * 2 * u[y, z] * ubu[a, a]),
        "F2I": lambda y, z: sgl(lambda a: V[y, a] * pb[z, a] * u[a, y]),
        "F2J": lambda y, z: sgl(lambda a: V[y, a] * 2 * u[a, z] * ubu[a, y]),
        "F2K": lambda y, z: sgl(lambda a: V[y, a] * pb[z, a] * pbu[y, a]),
        "F2L": lambda y, z: sgl(lambda a: V[a, z] * pb[y, a] * cbu[a, z]),
    }
    for name, fn in two.items():
        out[name] = g2 * np.array([[fn(y, z) for z in R] for y in R])

    three = {
        "F3A": lambda y, z, w: V[y, z] * phi[z] * u[w, y],
        "F3B": lambda y, z, w: sgl(lambda a: V[y, a] * phib[a] * u[a, w]) * u[z, y],
        "F3C": lambda y, z, w: sgl(lambda a: pb[y, a] * V[a, z] * u[w, a]) * phi[z],
        "F3D": lambda y, z, w: sgl(lambda a: pb[z, a] * V[y, a] * phi[a]) * u[w, y],
        "F3E": lambda y, z, w: dbl(lambda a, b: pb[y, a] * phib[b] * u[z, a] * u[b, w]),
        "F3F": lambda y, z, w: dbl(lambda a, b: pb[y, a] * p[b, z] * phi[b] * u[w, a]),
    }
    for name, fn in three.items():
        out[name] = g1 * np.array([[[fn(y, z, w) for w in R] for z in R] for y in R])

    # the double integral of F4D factorizes over (x1, x2) for fixed outputs;
    # precompute the x1 and x2 factors so the loop stays affordable
    four = {
        "F4A": lambda y, z, w, v: V[y, z] * u[w, y] * u[z, v],
        "F4B": lambda y, z, w, v: sgl(lambda a: pb[z, a] * V[y, a] * u[a, v]) * u[w, y],
        "F4C": lambda y, z, w, v: sgl(lambda a: pb[y, a] * V[a, z] * u[w, a]) * u[z, v],
    }
    for name, fn in four.items():
        arr = np.zeros((n,) * 4, complex)
        for y, z, w, v in itertools.product(R, R, R, R):
            arr[y, z, w, v] = fn(y, z, w, v)
        out[name] = g2 * arr
    arr = np.zeros((n,) * 4, complex)
    for y, z, w, v in itertools.product(R, R, R, R):
        left = pb[y, :] * u[w, :]
        right = p[:, z] * u[:, v]
        arr[y, z, w, v] = DX * DX * (left @ V @ right)
    out["F4D"] = g2 * arr
    return out


@pytest.fixture(scope="module")
def oracle(fin):
    return _oracle(fin)


def test_registry_is_complete():
    counts = {l: sum(1 for s in fc.SECTOR_OF.values() if s == l) for l in (1, 2, 3, 4)}
    assert counts == {1: 12, 2: 12, 3: 6, 4: 4}


@pytest.mark.parametrize("name", sorted(fc.SUMMANDS))
def test_summand_matches_loop_oracle(name, fin, oracle):
    got = fc.summand(name, fin)
    ref = oracle[name]
    assert got.shape == ref.shape
    assert np.abs(got - ref).max() < 1e-10 * max(1.0, np.abs(ref).max())


def test_sector_split_and_symmetry(fin):
    for l in (2, 3, 4):
        sec = fc.assemble_sector(l, fin)
        assert np.abs(sec.full - (sec.singular + sec.regular)).max() < 1e-13 * np.abs(sec.full).max()
        for perm in itertools.permutations(range(l)):
            assert np.abs(np.transpose(sec.full, perm) - sec.full).max() < 1e-12


def test_sector_one_is_sum_of_summands(fin, oracle):
    total = sum(oracle[k] for k in oracle if k.startswith("F1"))
    assert np.abs(fc.assemble_F1(fin) - total).max() < 1e-10 * np.abs(total).max()


def test_zero_pair_kernels_give_zero_forcing():
    f = _inputs(1)
    f = fc.ForcingInputs(0 * f.u, 0 * f.p, f.phi, f.V, f.N, f.dx)
    norms = fc.sector_norms(f)
    assert all(v == 0.0 for v in norms.values())


@given(st.integers(min_value=0, max_value=2 ** 31 - 1),
       st.floats(min_value=0.1, max_value=3.0))
def test_singular_parts_scale_with_u(seed, lam):
    base = _inputs(seed, n=6)
    p0 = np.zeros_like(base.p)
    f = fc.ForcingInputs(base.u, p0, base.phi, base.V, base.N, base.dx)
    g = fc.ForcingInputs(lam * base.u, p0, base.phi, base.V, base.N, base.dx)
    # with p = 0 the singular parts are homogeneous of degree 1, 1, 2 in u
    for l, deg in ((2, 1), (3, 1), (4, 2)):
        a = fc.singular_part(l, f)
        b = fc.singular_part(l, g)
        assert np.abs(b - lam ** deg * a).max() < 1e-10 * max(1.0, np.abs(b).max())


@given(st.integers(min_value=0, max_value=2 ** 31 - 1))
def test_symmetrize_is_a_projection(seed):
    arr = np.random.default_rng(seed).standard_normal((3, 3, 3))
    s = fc.symmetrize(arr)
    assert np.allclose(fc.symmetrize(s), s)


def test_memory_guard():
    f = _inputs(2, n=50)
    with pytest.raises(MemoryError):
        fc.assemble_sector(4, f)


def test_prefactors_scale_with_N(fin):
    f2 = fc.ForcingInputs(fin.u, fin.p, fin.phi, fin.V, 4 * fin.N, fin.dx)
    assert np.allclose(fc.summand("F1A", f2), 0.5 * fc.summand("F1A", fin))
    assert np.allclose(fc.summand("F4D", f2), 0.25 * fc.summand("F4D", fin))


def test_predicted_exponents():
    p = fc.predicted_exponents(0.3, 3)
    assert p["F1"] == pytest.approx(-0.2)
    assert p["F2"] == pytest.approx(-0.4)
    p1 = fc.predicted_exponents(0.3, 1)
    assert p1["F4"] == pytest.approx(-0.8)


def test_sector_scaling_table_flags_and_ratios():
    Ns = [8, 16, 32, 64]
    rows = [{"F1": N ** -0.3, "F2s": 1.0 / N, "F2r": 0.1 / N ** 1.5} for N in Ns]
    table = fc.sector_scaling_table(Ns, rows, 0.4)
    fits = {e["sector"]: e for e in table if "fit" in e}
    assert fits["F1"]["fit"] == pytest.approx(-0.3)
    ratio = [e for e in table if e["sector"] == "F2r/F2s"][0]
    assert ratio["decreasing"]
    with pytest.raises(ValueError):
        fc.sector_scaling_table(Ns[:3], rows[:3], 0.4)


def test_singular_sector_three_norm_chain():
    from pairlab import meanfield as mf
    from pairlab.spectral import GridSpec
    g = GridSpec(1, 24, 3.0)
    for N in (4, 16):
        inter = mf.make_interaction(mf.bump_profile(1), N, 0.4, g)
        base = _inputs(5, n=24, N=N, dx=g.dx)
        f = fc.ForcingInputs(base.u, base.p, base.phi, inter.pair_matrix, N, g.dx)
        lhs = fc.sector_norm(fc.singular_part(3, f), g.dx)
        u_l2 = g.dx * np.linalg.norm(f.u)
        rhs = N ** -0.5 * np.sqrt(inter.grid_l2sq()) * u_l2 * np.abs(f.phi).max()
        assert lhs <= rhs * (1 + 1e-12)
