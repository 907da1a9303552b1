import numpy as np
import pytest

from dwell.fluctuations import (InstabilityError, NonStationaryError, bmf_energy,
                                bogoliubov_matrix, build_blocks, excitations,
                                fluctuation_spectrum, h_half_residual, low_spectrum_bmf)
from dwell.fock import Model
from dwell.hamiltonian import ModelParams
from dwell.meanfield import (Phase, VariationalPoint, critical_u, energy_surface, ground_state,
                             solve_no_molecule, solve_symmetric)
from dwell.spectra import merged_spectrum

MIX = ModelParams(U=0.0, J=1.0, omega=5.0, g=5.0)


def grand_functional(z, p, lam, model):
    """Per-particle energy minus lam * particle number for complex amplitudes
    (a_R, a_L[, a_m]) with a_m = beta / sqrt(2)."""
    ar, al = z[0], z[1]
    f = (-p.J * 2 * (np.conj(ar) * al).real + p.U * (abs(ar) ** 4 + abs(al) ** 4)
         - lam * (abs(ar) ** 2 + abs(al) ** 2))
    if model is Model.MIXTURE:
        am = z[2]
        f += (p.omega * abs(am) ** 2 - lam * 2 * abs(am) ** 2
              - p.g / np.sqrt(2) * 2 * (np.conj(am) * (ar ** 2 + al ** 2)).real)
    return float(f)


def wirtinger_blocks(pt, p, h=1e-4):
    """Y_ij = d2F/dz_i* dz_j and Z_ij = d2F/dz_i* dz_j* by central differences."""
    z0 = np.array([pt.gamma_r, pt.gamma_l] + ([pt.beta / np.sqrt(2)] if pt.model is Model.MIXTURE else []),
                  dtype=complex)
    n = z0.size

    def d2(u, v):
        f = lambda a, b: grand_functional(z0 + a * h * u + b * h * v, p, pt.lam, pt.model)
        return (f(1, 1) - f(1, -1) - f(-1, 1) + f(-1, -1)) / (4 * h * h)

    e = np.eye(n)
    fxx = np.array([[d2(e[i], e[j]) for j in range(n)] for i in range(n)])
    fyy = np.array([[d2(1j * e[i], 1j * e[j]) for j in range(n)] for i in range(n)])
    return (fxx + fyy) / 4, (fxx - fyy) / 4


def constrained_gradient(pt, p, h=1e-6):
    """(dL/dgamma_r / 2, dL/dgamma_l / 2, dL/dbeta / sqrt 2) of E - lam (norm - 1)."""
    def lag(b, gr, gl):
        return energy_surface(p, b, gr, gl, pt.model) - pt.lam * (b * b + gr * gr + gl * gl - 1)
    x = np.array([pt.beta, pt.gamma_r, pt.gamma_l])
    grad = []
    for i in range(3):
        d = np.zeros(3)
        d[i] = h
        grad.append((lag(*(x + d)) - lag(*(x - d))) / (2 * h))
    parts = [grad[1] / 2, grad[2] / 2]
    if pt.model is Model.MIXTURE:
        parts.append(grad[0] / np.sqrt(2))
    return np.array(parts)


# --- blocks ---------------------------------------------------------------------

def test_blocks_atoms_zero_u():
    p = ModelParams(U=0)
    b = build_blocks(solve_no_molecule(p), p)
    np.testing.assert_allclose(b.y, [[1, -1], [-1, 1]], atol=1e-14)
    np.testing.assert_allclose(b.z, 0, atol=1e-14)


def test_blocks_atoms_half_u():
    p = ModelParams(U=0.5)
    b = build_blocks(solve_no_molecule(p), p)
    np.testing.assert_allclose(np.diag(b.y), [1.5, 1.5], atol=1e-14)
    assert b.y[0, 1] == pytest.approx(-1.0)
    np.testing.assert_allclose(np.diag(b.z), [0.5, 0.5], atol=1e-14)


@pytest.mark.parametrize("u,model", [(0.0, Model.MIXTURE), (2.0, Model.MIXTURE),
                                     (-2.5, Model.MIXTURE), (-2.0, Model.ATOMS),
                                     (0.7, Model.ATOMS)])
def test_blocks_match_wirtinger_oracle(u, model):
    p = (MIX if model is Model.MIXTURE else ModelParams(U=0)).replace(U=u)
    pt = ground_state(p, model)
    blocks = build_blocks(pt, p)
    y, z = wirtinger_blocks(pt, p)
    np.testing.assert_allclose(blocks.y, y, atol=1e-6)
    np.testing.assert_allclose(blocks.z, z, atol=1e-6)


def test_blocks_reject_nonstationary():
    p = ModelParams(U=0.5)
    pt = solve_no_molecule(p)
    moved = VariationalPoint(0.0, pt.gamma_r + 0.01, pt.gamma_l, pt.lam, pt.energy_pp, pt.phase,
                             Model.ATOMS)
    with pytest.raises(NonStationaryError):
        build_blocks(moved, p)


# --- H_1/2 residual -------------------------------------------------------------

@pytest.mark.parametrize("u", [-3.0, -1.5, -0.5, 0.0, 2.0])
def test_residual_vanishes_at_stationary_points(u):
    p = MIX.replace(U=u)
    assert h_half_residual(ground_state(p), p) <= 1e-10
    assert h_half_residual(solve_symmetric(p), p) <= 1e-10


def test_residual_detects_perturbation():
    pt = solve_symmetric(MIX)
    moved = VariationalPoint(pt.beta, pt.gamma_r + 0.01, pt.gamma_l, pt.lam, pt.energy_pp,
                             pt.phase)
    assert h_half_residual(moved, MIX) > 1e-4


@pytest.mark.parametrize("shift", [(0.0, 0.0, 0.0), (0.01, 0.0, 0.0), (0.0, -0.02, 0.01),
                                   (0.03, 0.01, -0.02)])
def test_residual_equals_constrained_gradient(shift):
    p = MIX.replace(U=-2.0)
    pt = ground_state(p)
    moved = VariationalPoint(pt.beta + shift[0], pt.gamma_r + shift[1], pt.gamma_l + shift[2],
                             pt.lam, pt.energy_pp, pt.phase)
    assert h_half_residual(moved, p) == pytest.approx(
        np.linalg.norm(constrained_gradient(moved, p)), abs=1e-9)


# --- excitations ------------------------------------------------------------------

def test_atoms_zero_u_modes():
    fs = fluctuation_spectrum(ModelParams(U=0), Model.ATOMS)
    np.testing.assert_allclose(fs.deltas, [0, 2], atol=1e-12)
    assert fs.goldstone_index == 0
    assert fs.gs_correction == pytest.approx(0, abs=1e-12)


@pytest.mark.parametrize("u", np.linspace(-0.99, 4, 11))
def test_atoms_symmetric_closed_form(u):
    fs = fluctuation_spectrum(ModelParams(U=u), Model.ATOMS)
    assert fs.excitations[0] == pytest.approx(2 * np.sqrt(1 + u), abs=1e-9)


def test_atoms_mode_softens_at_critical():
    vals = [fluctuation_spectrum(ModelParams(U=-1 + eps), Model.ATOMS).excitations[0]
            for eps in (1e-2, 1e-4, 1e-6)]
    assert vals[0] > vals[1] > vals[2]
    assert vals[2] < 3e-3


def test_mixture_three_modes_one_zero():
    fs = fluctuation_spectrum(MIX.replace(U=2.0))
    assert fs.deltas.size == 3
    assert np.sum(np.abs(fs.deltas) <= 1e-8) == 1
    assert np.all(fs.excitations > 1)


@pytest.mark.parametrize("model", [Model.ATOMS, Model.MIXTURE])
def test_single_goldstone_on_grid(model):
    base = MIX if model is Model.MIXTURE else ModelParams(U=0)
    u_c = critical_u(base, model)
    for u in np.linspace(-4, 4, 50):
        if abs(u - u_c) < 1e-3:
            continue
        fs = fluctuation_spectrum(base.replace(U=u), model)
        assert np.sum(np.abs(fs.deltas) <= 1e-8) == 1
        assert np.all(fs.excitations > 1e-8)


@pytest.mark.parametrize("u,model", [(2.0, Model.MIXTURE), (-3.0, Model.MIXTURE),
                                     (-2.0, Model.ATOMS), (1.0, Model.ATOMS)])
def test_bogoliubov_matrix_pm_pairing(u, model):
    base = MIX if model is Model.MIXTURE else ModelParams(U=0)
    p = base.replace(U=u)
    ev = np.linalg.eigvals(bogoliubov_matrix(build_blocks(ground_state(p, model), p)))
    ev = np.sort_complex(ev)
    # spectrum symmetric under negation; the zero-mode pair sits within sqrt(eps)
    np.testing.assert_allclose(np.sort_complex(-ev), ev, atol=1e-9)
    fs = fluctuation_spectrum(p, model)
    pos = np.sort(ev.real[ev.real > 1e-6])
    np.testing.assert_allclose(pos, fs.excitations, atol=1e-9)


def test_saddle_point_is_unstable():
    p = ModelParams(U=-3.0)
    # symmetric point of the dimer below U_c is a stationary saddle
    g = 1 / np.sqrt(2)
    saddle = VariationalPoint(0.0, g, g, p.U - p.J, 0.0, Phase.SYMMETRIC, Model.ATOMS)
    with pytest.raises(InstabilityError):
        excitations(build_blocks(saddle, p))


def test_atoms_limit_of_mixture():
    u = 0.5
    mix = fluctuation_spectrum(ModelParams(U=u, omega=1e6, g=1e-6))
    two = fluctuation_spectrum(ModelParams(U=u), Model.ATOMS)
    np.testing.assert_allclose(np.sort(mix.deltas)[:2], two.deltas, atol=1e-4)


# --- energies ------------------------------------------------------------------------

def test_bmf_atoms_zero_u():
    assert bmf_energy(ModelParams(U=0), 1000, Model.ATOMS) == pytest.approx(-1000.0, abs=1e-9)
    exact = merged_spectrum(1000, Model.ATOMS, ModelParams(U=0), k=1).energies[0]
    assert exact == pytest.approx(-1000.0, abs=1e-8)


def test_correction_is_order_one():
    p = MIX.replace(U=2.0)
    corr = [bmf_energy(p, n) - n * ground_state(p).energy_pp for n in (100, 200, 400, 800, 1600)]
    np.testing.assert_allclose(corr, corr[0], atol=1e-9)
    assert abs(corr[0]) < 5


@pytest.mark.parametrize("u", [-2.0, -1.6, -0.9, 0.0, 2.0])
def test_bmf_beats_mf_away_from_critical(u):
    n = 200
    p = MIX.replace(U=u)
    exact = merged_spectrum(n, Model.MIXTURE, p, k=1).energies[0]
    assert abs(bmf_energy(p, n) - exact) < abs(n * ground_state(p).energy_pp - exact)


def test_ladder_atoms_zero_u():
    np.testing.assert_allclose(low_spectrum_bmf(ModelParams(U=0), Model.ATOMS, 4), [2, 4, 6, 8],
                               atol=1e-12)


def test_ladder_doubles_in_broken_phase():
    gaps = low_spectrum_bmf(ModelParams(U=-2), Model.ATOMS, 4)
    assert gaps[0] == 0 and gaps[1] == pytest.approx(gaps[2])


def test_ladder_matches_exact_mixture():
    n, p = 200, MIX.replace(U=2.0)
    levels = merged_spectrum(n, Model.MIXTURE, p, k=3).energies
    exact = levels[1:] - levels[0]
    np.testing.assert_allclose(low_spectrum_bmf(p, Model.MIXTURE, 2), exact, rtol=0.05)


def test_ladder_collapses_at_critical():
    first = [low_spectrum_bmf(ModelParams(U=u), Model.ATOMS, 1)[0] for u in (0.0, -0.9, -0.999)]
    assert first[0] > first[1] > first[2]


def test_exact_gap_approaches_quasiparticle_energy():
    target = 2 * np.sqrt(2.0)
    errs = []
    for n in (250, 1000, 4000):
        lv = merged_spectrum(n, Model.ATOMS, ModelParams(U=1.0), k=2).energies
        errs.append(abs(lv[1] - lv[0] - target))
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] / target < 0.01
    lv = merged_spectrum(4000, Model.ATOMS, ModelParams(U=0.0), k=2).energies
    assert lv[1] - lv[0] == pytest.approx(2.0, rel=0.01)
