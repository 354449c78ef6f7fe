import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bandunitary import (
    BandUnitary,
    Coefficients,
    ConfigurationError,
    DistributionSpec,
    PhaseField,
    PhaseModel,
    UsageError,
    apply,
    build_free,
    build_u,
    factorize,
    phase_char_fn,
    sample_eta_iid,
    sample_phases,
)
from bandunitary.model import free_s0

UNI = DistributionSpec.uniform()
r_values = st.floats(0.05, 0.95)
seeds = st.integers(0, 2 ** 32)


def test_coefficients_constraint():
    p = Coefficients.from_r(0.3)
    assert abs(p.r ** 2 + p.t ** 2 - 1) <= 1e-12
    assert p.tau == pytest.approx(p.t / p.r)
    for bad in (0.0, 1.0):
        with pytest.raises(ConfigurationError):
            Coefficients.from_r(bad)
    with pytest.raises(ConfigurationError):
        Coefficients(0.5, 0.5)


def test_fourier_density_validation():
    with pytest.raises(ConfigurationError):
        DistributionSpec.fourier(1.0, 1.0, [0.5])          # |c_1| > e^-1
    with pytest.raises(ConfigurationError):
        DistributionSpec.fourier(0.5, 1.0, [0.1])          # A < 1
    d = DistributionSpec.wrapped_cauchy(1.0)
    grid = np.linspace(-np.pi, np.pi, 4096, endpoint=False)
    assert d.density(grid).min() >= 0
    assert np.sum(d.density(grid)) * 2 * np.pi / 4096 == pytest.approx(1.0, abs=1e-12)


def test_point_masses_give_constant_eta():
    ph = sample_phases(DistributionSpec.point_mass(0), DistributionSpec.point_mass(0), (0, 50), 1)
    assert np.all(ph.eta == 0)
    a, b = 0.4, -1.1
    ph = sample_phases(DistributionSpec.point_mass(a), DistributionSpec.point_mass(b), (0, 50), 1)
    assert np.allclose(ph.eta, 2 * a, atol=1e-15)


@settings(max_examples=20, deadline=None)
@given(seeds, st.integers(-500, 500), st.integers(5, 300))
def test_phase_consistency_and_determinism(seed, lo, n):
    d_alpha = DistributionSpec.arc(0.3, 1.0)
    a = sample_phases(UNI, d_alpha, (lo, lo + n), seed)
    b = sample_phases(UNI, d_alpha, (lo, lo + n), seed)
    assert np.array_equal(a.eta, b.eta) and np.array_equal(a.theta, b.theta)
    diff = np.angle(np.exp(1j * (a.recomputed_eta() - a.eta)))
    assert np.max(np.abs(diff)) <= 1e-12


@settings(max_examples=10, deadline=None)
@given(seeds, st.integers(-300, 300))
def test_window_extension_keeps_realization(seed, lo):
    small = sample_phases(UNI, UNI, (lo, lo + 40), seed, 3)
    big = sample_phases(UNI, UNI, (lo - 1500, lo + 2100), seed, 3)
    assert np.array_equal(big.eta_range(lo, lo + 40), small.eta)


def test_block_streams_are_distinct():
    from bandunitary._rng import BLOCK, site_uniforms
    u = site_uniforms(3, 0, 1, -3 * BLOCK, 5 * BLOCK)
    assert len(np.unique(u)) == len(u)
    a, b = u[:BLOCK], u[BLOCK:2 * BLOCK]
    assert abs(np.corrcoef(a[1:], b[:-1])[0, 1]) < 0.15
    assert abs(np.mean(np.exp(2j * np.pi * u))) <= 4 / math.sqrt(len(u))


def test_phase_text_roundtrip():
    ph = sample_phases(UNI, UNI, (-3, 12), 5)
    back = PhaseField.from_text(ph.to_text())
    assert (back.lo, back.hi) == (ph.lo, ph.hi)
    assert np.array_equal(back.eta, ph.eta)


def test_phase_char_fn():
    ph = sample_phases(UNI, DistributionSpec.arc(0.0, 0.2), (0, 19999), 11)
    out = phase_char_fn(ph.eta, range(0, 9))
    assert out["phi"][0] == 1
    n = out["n_samples"]
    for k in range(1, 9):
        assert abs(out["phi"][k]) <= 3 / math.sqrt(n)
    c = 0.7
    out = phase_char_fn(np.full(1000, c), [2])
    assert out["phi"][2] == pytest.approx(np.exp(2j * c))
    two = phase_char_fn(np.zeros((10, 5)), [1])
    assert two["joint"][(1, 1)] == pytest.approx(1.0)
    with pytest.raises(UsageError):
        phase_char_fn([], [1])


def test_iid_eta_sampling_respects_support():
    ph = sample_eta_iid(DistributionSpec.arc(0.0, 0.3), (0, 5000), 2)
    assert np.max(np.abs(ph.eta)) <= 0.3 + 1e-12


@settings(max_examples=25, deadline=None)
@given(r_values, seeds)
def test_unitarity_and_bandwidth(r, seed):
    p = Coefficients.from_r(r)
    ph = sample_phases(UNI, UNI, (-2, 70), seed)
    U = build_u(p, ph, (1, 64))
    assert U.unitarity_defect() <= 1e-12
    dense = U.to_dense()
    i, j = np.nonzero(dense)
    assert np.max(np.abs(i - j)) <= 2
    mods = np.unique(np.round(np.abs(dense[np.abs(dense) > 0]), 12))
    allowed = np.round([r * r, r * p.t, p.t ** 2], 12)
    assert set(mods) <= set(allowed)


@settings(max_examples=15, deadline=None)
@given(r_values, seeds, st.integers(-20, 20))
def test_shift_covariance(r, seed, j):
    p = Coefficients.from_r(r)
    ph = sample_phases(UNI, UNI, (-60, 60), seed)
    a = build_u(p, ph, (-40, 40)).to_dense()
    b = build_u(p, ph.shifted(j), (-40 - 2 * j, 40 - 2 * j)).to_dense()
    assert np.max(np.abs(a - b)) <= 1e-15


def test_near_diagonal_limit():
    p = Coefficients.from_r(1 - 1e-9)
    ph = sample_phases(UNI, UNI, (-2, 30), 1)
    m = build_u(p, ph, (1, 26)).to_dense()
    off = m - np.diag(np.diag(m))
    mods = np.abs(off[np.abs(off) > 0])
    t2, rt = p.t ** 2, p.r * p.t
    assert np.all(np.isclose(mods, t2, rtol=1e-9) | np.isclose(mods, rt, rtol=1e-9))
    assert t2 <= 2e-9 and np.max(mods) <= 5e-5
    assert np.max(np.abs(np.abs(np.diag(m)) - 1)) <= 1e-8


def test_free_operator_entries():
    p = Coefficients.from_r(0.6)
    U0 = build_free(p, (-6, 15))
    for k in range(-2, 6):
        assert U0.entry(2 * k, 2 * k - 2) == pytest.approx(-p.t ** 2, abs=1e-15)
        assert U0.entry(2 * k, 2 * k) == pytest.approx(p.r ** 2, abs=1e-15)
    S0 = free_s0(p, (-5, 14)).to_dense()
    # S0 on sites -5..14: <phi_{2k-2}|S0 phi_{2k}> = -t^2
    assert S0[(2 - 2) + 5, 2 + 5] == pytest.approx(-p.t ** 2)
    half = build_free(Coefficients.balanced(), (0, 21)).to_dense()
    assert np.allclose(np.abs(half[np.abs(half) > 1e-14]), 0.5)


def test_free_two_shift_limit():
    p = Coefficients.from_t(1 - 1e-10)
    m = build_free(p, (1, 24)).to_dense()
    small = np.isclose(np.abs(m), p.r ** 2) | np.isclose(np.abs(m), p.r * p.t, rtol=1e-6)
    assert np.max(np.abs(m[small])) <= 2e-5
    big = np.abs(m) > 0.5
    assert np.all(big.sum(axis=0)[2:-2] == 1)


def test_free_truncation_spectrum_in_band():
    from bandunitary.spectrum import eigenphases, truncate
    p = Coefficients.from_r(0.8)
    ph = PhaseModel.free().sample((-4, 70), 0)
    mu = eigenphases(truncate(p, ph, 0, 60))
    assert np.max(np.abs(mu.phases)) <= p.band_edge + 1e-6


@settings(max_examples=15, deadline=None)
@given(r_values, seeds)
def test_factorization(r, seed):
    p = Coefficients.from_r(r)
    ph = sample_phases(UNI, UNI, (-2, 70), seed)
    U = build_u(p, ph, (1, 64))
    f = factorize(U, ph)
    assert f.residual <= 1e-12
    assert np.allclose(f.D, np.exp(-1j * ph.eta_range(1, 64)), atol=0)


def test_factorization_free_and_parity():
    p = Coefficients.from_r(0.4)
    ph = PhaseModel.free().sample((-2, 40), 0)
    f = factorize(build_u(p, ph, (1, 32)), ph)
    assert np.allclose(f.D, 1.0)
    with pytest.raises(UsageError):
        factorize(build_u(p, ph, (2, 33)), ph)


def test_apply_and_band_growth():
    p = Coefficients.from_r(0.5)
    ph = sample_phases(UNI, UNI, (-2, 90), 3)
    U = build_u(p, ph, (1, 84))
    e = np.zeros(U.dim, dtype=complex)
    e[40] = 1
    assert np.count_nonzero(apply(U, e)) <= 5
    v = np.random.default_rng(0).normal(size=U.dim) + 0j
    v[:3] = v[-3:] = 0
    assert abs(np.linalg.norm(apply(U, v)) - np.linalg.norm(v)) <= 1e-12
    U0 = build_free(p, (1, 84))
    w = e.copy()
    for s in range(1, 15):
        w = apply(U0, w)
        idx = np.flatnonzero(np.abs(w) > 0)
        assert idx.min() >= 40 - (2 * s + 2) and idx.max() <= 40 + 2 * s + 2
    with pytest.raises(UsageError):
        apply(U, np.zeros(3))


def test_window_too_small():
    p = Coefficients.from_r(0.5)
    ph = sample_phases(UNI, UNI, (0, 10), 0)
    with pytest.raises(UsageError):
        build_u(p, ph, (0, 10))


def test_from_dense_roundtrip():
    p = Coefficients.from_r(0.5)
    U = build_u(p, sample_phases(UNI, UNI, (-2, 30), 0), (1, 24))
    V = BandUnitary.from_dense(U.to_dense(), U.lo, p)
    assert np.array_equal(V.to_dense(), U.to_dense())


def test_model_dict_roundtrip():
    m = PhaseModel(DistributionSpec.arc(0.1, 0.5), DistributionSpec.wrapped_cauchy(1.0))
    assert PhaseModel.from_dict(m.to_dict()) == m
    with pytest.raises(ConfigurationError):
        PhaseModel(theta=UNI)
