import numpy as np
import pytest

from dwell.criticality import (DEGENERATE, NORMAL, OUTSIDE, PrecursorError, Side, Step,
                               critical_energy, esqpt_boundary, esqpt_line_atoms,
                               esqpt_line_mixture_fit, locate_step, phase_diagram, precursor_u,
                               scaling_fit, upper_precursor_u)
from dwell.fock import Model
from dwell.hamiltonian import ModelParams
from dwell.meanfield import critical_u
from dwell.observables import DegeneracyProfile, top_gap
from dwell.spectra import merged_spectrum

ATOMS = ModelParams(U=0.0)
MIX = ModelParams(U=0.0, omega=5.0, g=5.0)


# --- precursors ------------------------------------------------------------------

@pytest.mark.parametrize("n,c", [(100, 3.0), (1000, 0.5), (5000, 20.0)])
def test_precursor_synthetic_oracle(n, c):
    u_c, bound = -1.3, 1e-4
    gap = lambda u, size: max(0.0, (u - u_c) + c / size)
    assert precursor_u(n, ATOMS, gap_bound=bound, gap=gap) == pytest.approx(
        u_c - c / n + bound, abs=1e-4)


def test_precursor_errors():
    with pytest.raises(ValueError):
        precursor_u(10, ATOMS, gap_bound=0.0)
    with pytest.raises(PrecursorError):
        precursor_u(10, ATOMS, gap=lambda u, n: 1.0)
    with pytest.raises(PrecursorError):
        precursor_u(10, ATOMS, gap=lambda u, n: 0.0)


@pytest.mark.parametrize("model,n", [(Model.ATOMS, 250), (Model.MIXTURE, 80)])
def test_precursor_is_monotone_in_bound(model, n):
    # {gap < b/2} lies inside {gap < b}, so the largest such U cannot grow
    p = MIX if model is Model.MIXTURE else ATOMS
    us = [precursor_u(n, p, model, b) for b in (1e-4, 5e-5, 2.5e-5)]
    assert us[0] > us[1] > us[2]
    assert all(u < critical_u(p, model) for u in us)


def test_precursor_gap_is_below_bound():
    u = precursor_u(250, ATOMS, Model.ATOMS)
    from dwell.observables import gs_gap
    assert gs_gap(ATOMS.replace(U=u - 1e-4), 250, Model.ATOMS) < 1e-4
    assert gs_gap(ATOMS.replace(U=u + 1e-4), 250, Model.ATOMS) >= 1e-4


def test_atoms_precursors_approach_critical_from_below():
    us = [precursor_u(n, ATOMS, Model.ATOMS) for n in (250, 1000, 4000)]
    assert us[0] < us[1] < us[2]
    assert all(u < -1.0 for u in us)


def test_mixture_precursors_monotone():
    u_c = critical_u(MIX)
    us = [precursor_u(n, MIX, Model.MIXTURE) for n in (20, 40, 80, 160)]
    assert all(a < b < u_c for a, b in zip(us, us[1:]))


def test_upper_precursor_mirrors_atoms():
    # dimer spectrum flips under U -> -U, so the top precursor mirrors the bottom one
    n = 250
    assert upper_precursor_u(n, ATOMS, Model.ATOMS) == pytest.approx(
        -precursor_u(n, ATOMS, Model.ATOMS), abs=1e-5)


def test_upper_precursor_closes_top_gap():
    n = 40
    ut = upper_precursor_u(n, MIX, Model.MIXTURE)
    assert top_gap(MIX.replace(U=ut + 1e-3), n, Model.MIXTURE) < 1e-4
    assert top_gap(MIX.replace(U=ut - 1e-3), n, Model.MIXTURE) >= 1e-4


# --- scaling fit -------------------------------------------------------------------

@pytest.mark.parametrize("sign", [1, -1])
def test_scaling_fit_recovers_exponent(sign):
    sizes = [20, 40, 80, 160, 320]
    samples = [(n, -1.0 + sign * 2.7 * n ** -0.75) for n in sizes]
    fit = scaling_fit(samples, -1.0)
    assert fit.alpha == pytest.approx(0.75, abs=1e-10)
    assert fit.alpha_err < 1e-10
    assert fit.samples == tuple(samples)


def test_scaling_fit_errors():
    with pytest.raises(ValueError):
        scaling_fit([(10, -1.1), (20, -1.05)], -1.0)
    with pytest.raises(ValueError):
        scaling_fit([(10, -1.1), (20, -0.95), (40, -1.01)], -1.0)
    with pytest.raises(ValueError):
        scaling_fit([(10, -1.1), (20, -1.0), (40, -1.01)], -1.0)


def test_mixture_exponent_insensitive_to_bound():
    sizes = (20, 40, 80, 160)
    u_c = critical_u(MIX)
    alphas = [scaling_fit([(n, precursor_u(n, MIX, Model.MIXTURE, b)) for n in sizes], u_c).alpha
              for b in (1e-4, 4e-4)]
    assert abs(alphas[0] - alphas[1]) <= 0.05


@pytest.mark.slow
def test_atoms_exponent_insensitive_to_bound():
    sizes = (250, 500, 1000, 2000, 4000)
    alphas = [scaling_fit([(n, precursor_u(n, ATOMS, Model.ATOMS, b)) for n in sizes], -1.0).alpha
              for b in (2.5e-5, 1e-4)]
    assert abs(alphas[0] - alphas[1]) <= 0.05


# --- step location ---------------------------------------------------------------

def _profile(x, y):
    return DegeneracyProfile(np.asarray(x), np.asarray(y), np.asarray(x) - x[0])


@pytest.mark.parametrize("rising", [True, False])
def test_locate_step_on_logistic(rising):
    x = np.linspace(0, 10, 200)
    y = 1 / (1 + np.exp(-(x - 6.3) / 0.05))
    step = locate_step(_profile(x, y if rising else 1 - y))
    assert isinstance(step, Step)
    assert step.energy_pp == pytest.approx(6.3, abs=1e-3)
    assert step.rising is rising


def test_locate_step_flat_profile():
    assert locate_step(_profile(np.linspace(0, 1, 50), np.full(50, 0.2))) is None


def test_line_helpers():
    np.testing.assert_allclose(esqpt_line_atoms([-3.0, 9.0]), [-2.5, 5.5])
    np.testing.assert_allclose(esqpt_line_mixture_fit([-2.0, 9.0]), [-2.81, 6.33])


# --- ESQPT boundary -------------------------------------------------------------

@pytest.mark.parametrize("u,expect", [(9.0, 5.5), (-3.0, -2.5)])
def test_atoms_critical_energy(u, expect):
    assert critical_energy(ATOMS.replace(U=u), 2000, Model.ATOMS) == pytest.approx(expect, abs=0.1)


def test_atoms_boundary_fit():
    grid = [-9, -7, -5, -3, -0.5, 0.0, 0.5, 3, 5, 7, 9]
    b = esqpt_boundary(ATOMS, 2000, Model.ATOMS, grid)
    assert set(b.omitted) == {-0.5, 0.0, 0.5}
    below, above = b.fit[Side.BELOW_UC], b.fit[Side.ABOVE_UTILDE]
    assert below[0] == pytest.approx(0.5, abs=0.05) and below[1] == pytest.approx(-1, abs=0.1)
    assert above[0] == pytest.approx(0.5, abs=0.05) and above[1] == pytest.approx(1, abs=0.1)
    for u, ec, side in b.segments:
        e = merged_spectrum(2000, Model.ATOMS, ATOMS.replace(U=u)).per_particle
        assert e[0] < ec < e[-1]


# --- phase diagram ----------------------------------------------------------------

@pytest.fixture(scope="module")
def atoms_diagram():
    us = [-3.0, -2.5, -2.0, -1.5, -0.5, 0.0, 0.5, 1.5, 2.0, 2.5, 3.0]
    return phase_diagram(ATOMS, 1000, Model.ATOMS, us, np.linspace(-4, 4, 81))


def test_atoms_phase_diagram_regions(atoms_diagram):
    d = atoms_diagram
    checked = 0
    for (u, e, label), (i, j) in zip(d.cells(), np.ndindex(d.labels.shape)):
        if label == OUTSIDE:
            assert not d.ground_pp[i] <= e <= d.top_pp[i]
            continue
        # skip cells within reach of the line or of the spectrum edges
        margin = 0.3
        if min(e - d.ground_pp[i], d.top_pp[i] - e) < margin:
            continue
        if abs(u) < 1:
            expect = NORMAL
        elif abs(e - esqpt_line_atoms(u)) < margin:
            continue
        elif u < 0:
            expect = DEGENERATE if e < esqpt_line_atoms(u) else NORMAL
        else:
            expect = DEGENERATE if e > esqpt_line_atoms(u) else NORMAL
        assert label == expect, (u, e)
        checked += 1
    assert checked > 100
    assert d.u_c < -1 and d.u_tilde > 1


def test_phase_diagram_stable_under_tolerance(atoms_diagram):
    d2 = phase_diagram(ATOMS, 1000, Model.ATOMS, atoms_diagram.u_grid, atoms_diagram.e_grid,
                       rel_tol=5e-7, markers=False)
    changed = np.argwhere(d2.labels != atoms_diagram.labels)
    for i, j in changed:
        # only cells adjacent to a label boundary may flip
        col = atoms_diagram.labels[i]
        assert col[max(j - 1, 0)] != col[j] or col[min(j + 1, col.size - 1)] != col[j]
    assert changed.shape[0] <= 0.02 * d2.labels.size


def test_mixture_diagram_breaks_u_symmetry():
    us = [-4.0, 4.0]
    d = phase_diagram(MIX, 80, Model.MIXTURE, us, np.linspace(-8, 8, 161), window=40, stride=4,
                      markers=False)
    mirrored = d.labels[1][::-1]
    assert np.any(d.labels[0] != mirrored)
    assert not np.allclose(d.ground_pp[0], -d.top_pp[1])
    a = phase_diagram(ATOMS, 80, Model.ATOMS, us, np.linspace(-8, 8, 161), window=40, stride=4,
                      markers=False)
    assert d.u_c is None
    np.testing.assert_allclose(a.ground_pp[0], -a.top_pp[1], atol=1e-9)
