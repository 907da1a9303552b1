import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dwell.fock import FullBasis, Model, Parity, SectorBasis
from dwell.hamiltonian import ModelParams, build_hamiltonian
from dwell.observables import (VAR_WIGNER, WindowError, degenerate_pairs, degeneracy_profile,
                               dos_histogram, eta_from_spacings, eta_profile, fisher,
                               fisher_sector, fisher_vs_energy, gs_gap, top_gap, unfold)
from dwell.spectra import Spectrum, full_spectrum, merged_spectrum, sector_spectra

MIX = ModelParams(U=9.0, omega=5.0, g=5.0)


def wigner_spacings(rng, size):
    # inverse CDF of p(s) = (pi/2) s exp(-pi s^2 / 4)
    return np.sqrt(-4.0 / np.pi * np.log1p(-rng.random(size)))


# --- Fisher information -----------------------------------------------------

def test_fisher_examples():
    basis = FullBasis(2, Model.ATOMS)
    psi = np.zeros(3)
    psi[basis.index((1, 1, 0))] = 1.0
    assert fisher(psi, basis) == 0.0
    cat = np.zeros(3)
    cat[basis.index((2, 0, 0))] = cat[basis.index((0, 2, 0))] = 1 / np.sqrt(2)
    assert fisher(cat, basis) == pytest.approx(4.0)


def test_fisher_rejects_bad_input():
    basis = FullBasis(2, Model.ATOMS)
    with pytest.raises(ValueError):
        fisher(np.ones(3), basis)
    with pytest.raises(TypeError):
        fisher(np.array([1.0, 0.0]), SectorBasis(2, Model.ATOMS, Parity.EVEN))


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 8), st.sampled_from(list(Model)), st.integers(0, 2 ** 31 - 1))
def test_fisher_nonnegative(n, model, seed):
    basis = FullBasis(n, model)
    v = np.random.default_rng(seed).normal(size=basis.dim)
    assert fisher(v / np.linalg.norm(v), basis) >= -1e-12


@pytest.mark.parametrize("model", list(Model))
def test_fisher_sector_equals_full_basis_variance(model):
    n, p = 6, ModelParams(U=-1.5, omega=5.0, g=5.0)
    full = FullBasis(n, model)
    for parity in Parity:
        basis = SectorBasis(n, model, parity)
        spec = full_spectrum(build_hamiltonian(basis, p), want_vectors=True)
        vecs = basis.to_full(spec.vectors, full)
        expect = [fisher(vecs[:, i], full) for i in range(basis.dim)]
        np.testing.assert_allclose(fisher_sector(spec.vectors, basis), expect, atol=1e-10)


def test_fisher_vs_energy_sorted_and_bounded():
    e, order, labels = fisher_vs_energy(ModelParams(U=-3.0), 40, Model.ATOMS)
    assert np.all(np.diff(e) >= 0)
    assert e.size == 41 and set(labels) == {"even", "odd"}
    assert np.all((order >= 0) & (order <= 1 + 1e-12))


# --- gaps ------------------------------------------------------------------

def test_gs_gap_examples():
    assert gs_gap(ModelParams(U=-2.0), 1000, Model.ATOMS) <= 1e-8
    assert gs_gap(ModelParams(U=0.0), 1000, Model.ATOMS) == pytest.approx(2 / 1000, rel=1e-9)
    assert gs_gap(MIX.replace(U=2.0), 80, Model.MIXTURE) > 0


@pytest.mark.parametrize("model", list(Model))
def test_top_gap_matches_full_spectrum(model):
    p = ModelParams(U=1.3, omega=5.0, g=5.0)
    n = 30
    e = merged_spectrum(n, model, p).energies
    assert top_gap(p, n, model) == pytest.approx((e[-1] - e[-2]) / n, abs=1e-12)


# --- degeneracy ------------------------------------------------------------

def test_degenerate_pairs_are_disjoint():
    mask = degenerate_pairs(np.array([1.0, 1.0, 1.0, 2.0, 3.0, 3.0]))
    assert mask.tolist() == [True, False, False, False, True]


def test_exact_pairs_give_unit_fraction():
    levels = np.repeat(np.linspace(1, 50, 200), 2)
    prof = degeneracy_profile(Spectrum(levels, 10), window=100, stride=10)
    np.testing.assert_array_equal(prof.fraction, 1.0)


def test_poisson_levels_give_zero_fraction(rng):
    levels = np.cumsum(rng.exponential(size=300))
    prof = degeneracy_profile(Spectrum(levels, 10))
    assert prof.fraction.max() == 0.0


@settings(max_examples=25, deadline=None)
@given(st.floats(-1e3, 1e3), st.floats(0.5, 20.0), st.integers(0, 2 ** 31 - 1))
def test_profile_shift_and_scale_invariant(shift, scale, seed):
    rng = np.random.default_rng(seed)
    # gaps well clear of the tolerance on either side; half the levels doubled
    base = 1000 + np.cumsum(0.1 + rng.exponential(size=150))
    levels = np.sort(np.concatenate([base, base[:75] + 1e-10]))
    ref = degeneracy_profile(Spectrum(levels, 1), 50, 5).fraction
    moved = degeneracy_profile(Spectrum(scale * levels, 1), 50, 5).fraction
    np.testing.assert_array_equal(ref, moved)
    shifted = degeneracy_profile(Spectrum(levels + shift, 1), 50, 5).fraction
    np.testing.assert_array_equal(ref, shifted)


def test_profile_window_too_large():
    with pytest.raises(WindowError):
        degeneracy_profile(Spectrum(np.arange(10.0), 1), window=100)


# --- density of states -------------------------------------------------------

def test_dos_counts_sum_to_levels(rng):
    levels = np.sort(rng.normal(size=777))
    h = dos_histogram(Spectrum(levels, 1), 0.05)
    assert h.counts.sum() == pytest.approx(777)


def test_dos_flat_for_uniform_levels():
    h = dos_histogram(Spectrum(np.linspace(0, 10, 10001), 1), 0.5)
    assert np.ptp(h.counts) <= 1


def test_dos_rejects_bad_width():
    with pytest.raises(ValueError):
        dos_histogram(Spectrum(np.arange(5.0), 1), 0.0)


# --- unfolding and eta ---------------------------------------------------------

def test_unfold_uniform_levels():
    np.testing.assert_allclose(unfold(np.arange(300.0)), 1.0, atol=1e-8)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 31 - 1), st.integers(60, 600))
def test_unfold_mean_is_one(seed, size):
    levels = np.cumsum(np.random.default_rng(seed).exponential(size=size))
    assert unfold(levels).mean() == pytest.approx(1.0, abs=1e-6)


def test_unfold_undoes_quadratic_stretch(rng):
    x = np.cumsum(wigner_spacings(rng, 5000))
    x /= x[-1]
    stretched = x + 0.7 * x ** 2
    s_ref = np.diff(x) / np.diff(x).mean()
    s = unfold(stretched)
    assert np.var(s) == pytest.approx(np.var(s_ref), rel=0.05)


def test_unfold_rejects_degenerate_input():
    with pytest.raises(np.linalg.LinAlgError):
        unfold(np.repeat([0.0, 1.0, 2.0], 30))
    with pytest.raises(WindowError):
        unfold(np.arange(10.0))


def test_eta_calibration(rng):
    assert eta_from_spacings(rng.exponential(size=10 ** 4)) == pytest.approx(1.0, abs=0.1)
    assert eta_from_spacings(wigner_spacings(rng, 10 ** 4)) == pytest.approx(0.0, abs=0.1)
    assert VAR_WIGNER == pytest.approx(0.27324, abs=1e-5)


def test_eta_profile_on_synthetic_levels(rng):
    poisson = Spectrum(np.cumsum(rng.exponential(size=5000)), 1)
    wigner = Spectrum(np.cumsum(wigner_spacings(rng, 5000)), 1)
    assert eta_profile(poisson).eta.mean() == pytest.approx(1.0, abs=0.1)
    assert eta_profile(wigner).eta.mean() == pytest.approx(0.0, abs=0.1)


def test_eta_profile_rejects_mixed_parity():
    even, odd = sector_spectra(40, Model.ATOMS, ModelParams(U=1.0))
    merged = merged_spectrum(40, Model.ATOMS, ModelParams(U=1.0))
    with pytest.raises(ValueError):
        eta_profile(merged, window=20)
    with pytest.raises(WindowError):
        eta_profile(even)


@pytest.mark.slow
def test_merged_sectors_bias_eta_toward_poisson():
    # chaotic region of a smaller mixture: superposing two independent
    # sequences suppresses level repulsion
    p, n = MIX, 200
    even, odd = sector_spectra(n, Model.MIXTURE, p)
    single = eta_profile(even)
    # doubled window so both profiles average over the same energy span
    merged = eta_profile(Spectrum(np.sort(np.concatenate([even.energies, odd.energies])), n),
                         window=500, stride=100)
    chaotic = single.energy_pp < 5.0
    assert chaotic.any()
    m_eta = np.interp(single.energy_pp[chaotic], merged.energy_pp, merged.eta)
    assert np.all(m_eta > single.eta[chaotic])
