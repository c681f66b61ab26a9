import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bilayer_kpm.algebra import (AlgebraElement, Configuration, EmptyTruncation,
                                 Kernel, LatticeMismatch, adjoint, birkhoff_average,
                                 derive_parallel, derive_perpendicular,
                                 ergodic_character_sum, identity, represent,
                                 star_product, trace_per_unit_volume)
from bilayer_kpm.lattice import lattice_constants, supercell_params
from bilayer_kpm.model import ModelParams, toy_hamiltonian
from bilayer_kpm.testing import block_values, random_element, sample_points

from conftest import GOLDEN


def assert_same(f, g, pts, tol=1e-12):
    a, b = block_values(f, pts), block_values(g, pts)
    scale = max(1.0, np.max(np.abs(a)))
    assert np.max(np.abs(a - b)) <= tol * scale


def unit_h(W=0.5, sigma=0.25):
    return toy_hamiltonian(ModelParams(W=W, sigma=sigma), supercell_params(3, 3))


# ---- star product -------------------------------------------------------

def test_identity_is_unit(rng, golden_lattice):
    l1, l2 = golden_lattice
    f = random_element(rng, l1, l2)
    pts = sample_points(rng, l1, l2, 30)
    one = identity(l1, l2)
    assert_same(star_product(one, f), f, pts)
    assert_same(star_product(f, one), f, pts)


def test_inter_times_inter_lands_in_diagonal(rng, golden_lattice):
    l1, l2 = golden_lattice
    full = random_element(rng, l1, l2)
    f = AlgebraElement(l1, l2, f12=full.f12)
    g = AlgebraElement(l1, l2, f21=full.f21)
    fg = star_product(f, g)
    assert fg.f12 is None and fg.f21 is None
    for gamma2 in rng.uniform(-l2 / 2, l2 / 2, 5):
        qs = gamma2 + l2 * np.arange(-20, 21)
        oracle = np.sum(f.b12(qs) * g.b21(-qs))
        assert fg.b11(gamma2, 0.0) == pytest.approx(oracle, abs=1e-13)


def test_toy_square():
    h = unit_h()
    hh = star_product(h, h)
    q = np.arange(-10, 11)
    oracle = 2 + np.sum(np.where(np.abs(q) <= 1.5, 0.25 * np.exp(-q ** 2 / 0.0625), 0))
    assert hh.b11(0.0, 0.0).real == pytest.approx(oracle, abs=1e-14)
    assert oracle - 2 == pytest.approx(0.25, abs=1e-7)


def test_lattice_mismatch(golden_lattice):
    with pytest.raises(LatticeMismatch):
        star_product(identity(*golden_lattice), identity(1.0, 1.0))


def test_kernel_radius_validated():
    with pytest.raises(ValueError):
        Kernel(lambda x: x, -1.0)
    with pytest.raises(ValueError):
        Kernel(lambda x: x, math.inf)


def test_zero_beyond_support(rng, golden_lattice):
    l1, l2 = golden_lattice
    f = random_element(rng, l1, l2)
    x = np.linspace(-10, 10, 2001)
    assert np.all(f.b12(x)[np.abs(x) > f.f12.radius] == 0)
    assert np.all(f.b21(x)[np.abs(x) > f.f21.radius] == 0)
    m = l1 * np.arange(-20, 21)
    assert np.all(f.b11(0.1, m)[np.abs(m) > f.f11.radius] == 0)


# ---- axioms on random elements -----------------------------------------

@pytest.mark.parametrize("seed", range(20))
def test_axioms(seed, golden_lattice):
    rng = np.random.default_rng(seed)
    l1, l2 = golden_lattice
    f, g, h = (random_element(rng, l1, l2) for _ in range(3))
    pts = sample_points(rng, l1, l2, 20)
    assert_same(star_product(star_product(f, g), h), star_product(f, star_product(g, h)), pts)
    assert_same(adjoint(adjoint(f)), f, pts)
    assert_same(adjoint(star_product(f, g)), star_product(adjoint(g), adjoint(f)), pts)
    for D in (derive_parallel, derive_perpendicular):
        assert_same(D(star_product(f, g)), star_product(D(f), g) + star_product(f, D(g)), pts)


@settings(max_examples=15, deadline=None)
@given(alpha=st.floats(0.2, 5.0), seed=st.integers(0, 2 ** 32 - 1))
def test_associativity_any_ratio(alpha, seed):
    rng = np.random.default_rng(seed)
    l1, l2 = lattice_constants(alpha)
    f, g, h = (random_element(rng, l1, l2) for _ in range(3))
    pts = sample_points(rng, l1, l2, 10)
    assert_same(star_product(star_product(f, g), h), star_product(f, star_product(g, h)), pts)


# ---- adjoint and derivations --------------------------------------------

def test_toy_self_adjoint(rng):
    h = unit_h()
    pts = sample_points(rng, 1.0, 1.0, 40)
    assert_same(adjoint(h), h, pts, tol=0)


def test_adjoint_of_inter_block():
    f = AlgebraElement(1.0, 1.0, f12=Kernel(lambda q: 1j * (np.abs(q) < 1), 1.0))
    fa = adjoint(f)
    assert fa.f11 is None and fa.f12 is None and fa.f22 is None
    p = np.array([-0.9, -0.2, 0.5, 0.99, 1.5])
    np.testing.assert_array_equal(fa.b21(p), np.where(np.abs(p) < 1, -1j, 0))


def test_derivations_kill_identity(rng, golden_lattice):
    l1, l2 = golden_lattice
    pts = sample_points(rng, l1, l2, 20)
    for D in (derive_parallel, derive_perpendicular):
        assert np.all(block_values(D(identity(l1, l2)), pts) == 0)


def test_toy_derivatives():
    W, s = 0.5, 0.25
    h = unit_h(W, s)
    q = np.linspace(-1.4, 1.4, 29)
    gauss = W * np.exp(-q ** 2 / (2 * s ** 2))
    np.testing.assert_allclose(derive_parallel(h).b12(q), 1j * q * gauss, atol=1e-15)
    np.testing.assert_allclose(derive_perpendicular(h).b21(q), -1j * gauss, atol=1e-15)


def test_leibniz_toy(rng):
    h = unit_h()
    pts = sample_points(rng, 1.0, 1.0, 20)
    for D in (derive_parallel, derive_perpendicular):
        assert_same(D(star_product(h, h)), star_product(D(h), h) + star_product(h, D(h)), pts)


def test_perpendicular_is_bounded(rng, golden_lattice):
    l1, l2 = golden_lattice
    f = random_element(rng, l1, l2)
    off = AlgebraElement(l1, l2, f12=f.f12, f21=f.f21)
    cfg = Configuration(1, 0.2)
    a = represent(derive_perpendicular(f), cfg, 6.0).H
    b = represent(off, cfg, 6.0).H
    assert np.linalg.norm(a, 2) == pytest.approx(np.linalg.norm(b, 2), rel=1e-12)


# ---- representation ------------------------------------------------------

def test_represent_identity(golden_lattice):
    op = represent(identity(*golden_lattice), Configuration(2, 0.3), 5.0)
    np.testing.assert_array_equal(op.H, np.eye(op.N))


def test_represent_hermitian(rng, golden_lattice):
    l1, l2 = golden_lattice
    f = random_element(rng, l1, l2)
    H = represent(f + adjoint(f), Configuration(1, -0.4), 7.0).H
    np.testing.assert_allclose(H, H.conj().T, atol=1e-13)


def test_represent_empty():
    with pytest.raises(EmptyTruncation):
        represent(identity(1.0, 1.0), Configuration(1, 0.0), 0.5)


@pytest.mark.parametrize("seed", range(20))
def test_interior_homomorphism(seed, golden_lattice):
    rng = np.random.default_rng(1000 + seed)
    l1, l2 = golden_lattice
    f, g = random_element(rng, l1, l2), random_element(rng, l1, l2)
    cfg = Configuration(int(rng.integers(1, 3)), float(rng.uniform(-0.5, 0.5)))
    R = 9.0
    F, G = represent(f, cfg, R), represent(g, cfg, R)
    FG = represent(star_product(f, g), cfg, R).H
    reach = max(k.radius for k in (f.f11, f.f12, f.f21, f.f22)) \
        + max(k.radius for k in (g.f11, g.f12, g.f21, g.f22))
    rows = np.abs(F.x) <= R - reach
    assert rows.sum() >= 4
    P = F.H @ G.H
    assert np.max(np.abs(FG[rows] - P[rows])) <= 1e-12 * max(1, np.max(np.abs(P)))


def test_periodic_matches_minimal_image():
    sp = supercell_params(8, 5)
    h = toy_hamiltonian(ModelParams(), sp)
    op = represent(h, Configuration(1, 0.0), boundary=sp)
    assert op.N == 13
    np.testing.assert_allclose(op.H, op.H.conj().T, atol=1e-15)
    # each chain-1 site has two chain-1 neighbours
    assert np.all(np.sum(op.H[:8, :8].real == 1, axis=1) == 2)


def test_periodic_lattice_mismatch():
    with pytest.raises(LatticeMismatch):
        represent(identity(1.0, 1.0), Configuration(1, 0.0), boundary=supercell_params(8, 5))


# ---- trace and averages ---------------------------------------------------

def test_trace_identity(golden_lattice):
    assert trace_per_unit_volume(identity(*golden_lattice)) == pytest.approx(1, abs=1e-15)


def test_trace_toy():
    h = unit_h()
    assert trace_per_unit_volume(h) == 0
    t = trace_per_unit_volume(star_product(h, h))
    assert t.real == pytest.approx(2 + 2 * 0.25 * 0.25 * math.sqrt(math.pi) / 2, abs=1e-12)
    assert t.real == pytest.approx(2.1107784, abs=1e-7)


@pytest.mark.parametrize("alpha", [GOLDEN, 0.3, 4.0])
def test_trace_toy_closed_form(alpha):
    l1, l2 = lattice_constants(alpha)
    W, s = 0.5, 0.25
    h = toy_hamiltonian(ModelParams(W, s), type("SP", (), {"ell1": l1, "ell2": l2})())
    hh = star_product(h, h)
    exact = 2 + 2 * W ** 2 * s * math.sqrt(math.pi) / (l1 + l2)
    assert trace_per_unit_volume(hh, 256).real == pytest.approx(exact, abs=1e-12)
    assert trace_per_unit_volume(hh, 10_000).real == pytest.approx(exact, abs=1e-12)


def test_birkhoff_constant():
    assert birkhoff_average(lambda c: 1.0, Configuration(1, 0.1), GOLDEN, 50) == 1


def test_birkhoff_incommensurate_decay():
    l1, l2 = lattice_constants(GOLDEN)

    def char(c):
        return np.exp(2j * np.pi * c.gamma / l2) if c.layer == 1 else 0.0
    assert abs(birkhoff_average(char, Configuration(1, 0.0), GOLDEN, 1e4)) < 1e-2


@pytest.mark.parametrize("r", [3, 10, 100])
def test_birkhoff_commensurate(r):
    # the character of the other chain's offset is constant on the orbit
    def char(c):
        return np.exp(2j * np.pi * c.gamma)
    assert birkhoff_average(char, Configuration(1, 0.0), 1.0, r) == pytest.approx(1, abs=1e-12)


@pytest.mark.parametrize("ell,r", [(1.0, 10), (0.37, 55.5), (GOLDEN, 1e3)])
def test_character_sum_dual_point(ell, r):
    assert ergodic_character_sum(ell, 1 / ell, r) == 1


def test_character_sum_golden():
    k = GOLDEN
    bound = 2 / (abs(1 - np.exp(2j * np.pi * k)) * 2001)
    assert bound == pytest.approx(5.4e-4, rel=0.02)
    assert abs(ergodic_character_sum(1.0, k, 1000)) <= bound


def test_character_sum_alternating():
    assert ergodic_character_sum(1.0, 0.5, 100) == pytest.approx(1 / 201, abs=1e-15)
