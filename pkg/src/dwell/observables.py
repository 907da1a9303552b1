"""Spectral diagnostics: Fisher information, gaps, density of states,
degenerate-pair fraction and the spacing-variance chaos indicator."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fock import FullBasis, Model, Parity, SectorBasis
from .hamiltonian import ModelParams, build_hamiltonian
from .spectra import Spectrum, full_spectrum, lowest_k, merge_sectors, sector_spectra

VAR_POISSON = 1.0
VAR_WIGNER = 4.0 / np.pi - 1.0


class WindowError(ValueError):
    """Too few levels for the requested window."""


# --- Fisher information -----------------------------------------------------

def fisher(state: np.ndarray, basis: FullBasis) -> float:
    """Variance of the imbalance n_R - n_L in a normalized full-basis state."""
    if isinstance(basis, SectorBasis):
        raise TypeError("fisher expects a full basis; use fisher_sector for parity states")
    psi = np.asarray(state)
    norm = float(np.vdot(psi, psi).real)
    if abs(norm - 1.0) > 1e-8:
        raise ValueError(f"state is not normalized (norm^2 = {norm:.12g})")
    occ = basis.occupations
    imb = (occ[:, 1] - occ[:, 0]).astype(float)
    prob = np.abs(psi) ** 2
    mean = float(prob @ imb)
    return float(prob @ imb ** 2 - mean ** 2)


def fisher_sector(vectors: np.ndarray, basis: SectorBasis) -> np.ndarray:
    """<(n_R - n_L)^2> for parity eigenstates given in a sector basis.

    Both members of a symmetrized pair carry the same squared imbalance, so
    no expansion to the full basis is needed.  Works column-wise.
    """
    occ = basis.occupations
    imb2 = ((occ[:, 1] - occ[:, 0]) ** 2).astype(float)
    v = np.asarray(vectors)
    return imb2 @ (np.abs(v) ** 2)


def ground_state_order_parameter(p: ModelParams, n: int, model: Model) -> float:
    """sqrt(F_QFI)/N of the exact ground state (even sector)."""
    basis = SectorBasis(n, model, Parity.EVEN)
    spec = lowest_k(build_hamiltonian(basis, p), 1, want_vectors=True, n_particles=n)
    return float(np.sqrt(fisher_sector(spec.vectors[:, 0], basis)) / n)


def fisher_vs_energy(p: ModelParams, n: int, model: Model, **kwargs) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(E/N, sqrt(F_QFI)/N, parity) for every eigenstate, ascending in energy."""
    energies, orders, labels = [], [], []
    for parity in (Parity.EVEN, Parity.ODD):
        basis = SectorBasis(n, model, parity)
        if basis.dim == 0:
            continue
        spec = full_spectrum(build_hamiltonian(basis, p), True, n, **kwargs)
        energies.append(spec.per_particle)
        orders.append(np.sqrt(fisher_sector(spec.vectors, basis)) / n)
        labels.append(np.full(basis.dim, parity.value))
    e = np.concatenate(energies)
    order = np.argsort(e, kind="stable")
    return e[order], np.concatenate(orders)[order], np.concatenate(labels)[order]


# --- gaps ------------------------------------------------------------------

def gs_gap(p: ModelParams, n: int, model: Model) -> float:
    """(E_1 - E_0)/N over both parity sectors."""
    even, odd = sector_spectra(n, model, p, k=2)
    merged = merge_sectors(even, odd)
    return float((merged.energies[1] - merged.energies[0]) / n)


def top_gap(p: ModelParams, n: int, model: Model) -> float:
    """(E_max - E_max-1)/N, the ground-state gap of -H."""
    # -H(U, omega) is unitarily equivalent to H(-U, -omega): the gauge
    # (-1)^n_L restores the hopping sign, (-1)^n_mol the coupling sign.
    flipped = ModelParams(U=-p.U, J=p.J, omega=-p.omega, g=p.g)
    return gs_gap(flipped, n, model)


# --- degeneracy profile ------------------------------------------------------

@dataclass(frozen=True, eq=False)
class DegeneracyProfile:
    energy_pp: np.ndarray
    fraction: np.ndarray
    excitation_pp: np.ndarray
    window: int = 100
    stride: int = 10
    rel_tol: float = 1e-6

    @property
    def points(self):
        return list(zip(self.energy_pp.tolist(), self.fraction.tolist()))


def degenerate_pairs(energies: np.ndarray, rel_tol: float = 1e-6) -> np.ndarray:
    """Boolean mask over consecutive gaps marking disjoint near-degenerate pairs."""
    e = np.asarray(energies, dtype=float)
    close = np.abs(np.diff(e)) <= rel_tol * np.maximum(np.abs(e[:-1]), 1.0)
    taken = np.zeros_like(close)
    idx = np.flatnonzero(close)
    last = -2
    for i in idx:
        if i > last + 1:
            taken[i] = True
            last = i
    return taken


def degeneracy_profile(levels: Spectrum, window: int = 100, stride: int = 10,
                       rel_tol: float = 1e-6) -> DegeneracyProfile:
    """Fraction of degenerate pairs in sliding windows of ``window`` levels."""
    e = levels.energies
    if e.size < window:
        raise WindowError(f"{e.size} levels < window {window}")
    if window < 2 or stride < 1:
        raise ValueError("window >= 2 and stride >= 1 required")
    n = max(levels.n_particles, 1)
    centers, fractions = [], []
    for start in range(0, e.size - window + 1, stride):
        chunk = e[start:start + window]
        pairs = int(degenerate_pairs(chunk, rel_tol).sum())
        fractions.append(pairs / (window // 2))
        centers.append(chunk.mean() / n)
    centers = np.array(centers)
    return DegeneracyProfile(centers, np.clip(fractions, 0.0, 1.0), centers - e[0] / n,
                             window, stride, rel_tol)


# --- density of states -------------------------------------------------------

@dataclass(frozen=True, eq=False)
class DosHistogram:
    centers: np.ndarray
    density: np.ndarray
    bin_width: float

    @property
    def counts(self) -> np.ndarray:
        return self.density * self.bin_width

    @property
    def bins(self):
        return list(zip(self.centers.tolist(), self.density.tolist()))


def dos_histogram(levels: Spectrum, bin_width: float | None = None) -> DosHistogram:
    """Histogram of E/N; ``density * bin_width`` sums to the number of levels."""
    x = levels.per_particle
    lo, hi = float(x.min()), float(x.max())
    span = hi - lo
    if bin_width is None:
        bin_width = span / 100 if span > 0 else 1.0
    if bin_width <= 0:
        raise ValueError("bin width must be positive")
    nbins = max(1, int(np.ceil(span / bin_width)) or 1)
    edges = lo + bin_width * np.arange(nbins + 1)
    if edges[-1] < hi:
        edges = np.append(edges, edges[-1] + bin_width)
    counts, edges = np.histogram(x, bins=edges)
    centers = 0.5 * (edges[:-1] + edges[1:])
    return DosHistogram(centers, counts / bin_width, float(bin_width))


# --- level statistics ----------------------------------------------------------

def _cumulative_fit(e: np.ndarray, degree: int):
    if np.unique(e).size <= degree:
        raise np.linalg.LinAlgError("unfolding fit is rank deficient")
    staircase = np.arange(e.size, dtype=float)
    return np.polynomial.Polynomial.fit(e, staircase, degree)


def unfold(levels, degree: int = 5) -> np.ndarray:
    """Spacings of the unfolded levels, normalized to unit mean.

    The cumulative level count is fitted with a polynomial of ``degree`` and
    the levels are mapped through it.
    """
    e = np.sort(np.asarray(levels, dtype=float))
    if e.size < 50:
        raise WindowError("unfolding needs at least 50 levels")
    s = np.diff(_cumulative_fit(e, degree)(e))
    return s / s.mean()


def eta_from_spacings(spacings) -> float:
    """(var_s - var_W) / (var_P - var_W) for mean-normalized spacings."""
    s = np.asarray(spacings, dtype=float)
    s = s / s.mean()
    return float((np.var(s) - VAR_WIGNER) / (VAR_POISSON - VAR_WIGNER))


@dataclass(frozen=True, eq=False)
class ChaosProfile:
    energy_pp: np.ndarray
    eta: np.ndarray
    excitation_pp: np.ndarray
    window: int = 250
    stride: int = 50
    trim_fraction: float = 0.2

    @property
    def points(self):
        return list(zip(self.energy_pp.tolist(), self.eta.tolist()))


def eta_profile(levels: Spectrum, window: int = 250, stride: int = 50, trim: float = 0.2,
                degree: int = 5) -> ChaosProfile:
    """Sliding-window eta; input must hold a single symmetry class."""
    if levels.labels is not None and np.unique(levels.labels).size > 1:
        raise ValueError("eta_profile needs levels of a single parity")
    e = levels.energies
    if e.size < window:
        raise WindowError(f"{e.size} levels < window {window}")
    cut = int(round(trim * window))
    if window - 2 * cut - 1 < 50:
        raise WindowError("fewer than 50 spacings left after trimming")
    n = max(levels.n_particles, 1)
    centers, etas = [], []
    for start in range(0, e.size - window + 1, stride):
        chunk = e[start:start + window]
        x = _cumulative_fit(chunk, degree)(chunk)[cut:window - cut]
        etas.append(eta_from_spacings(np.diff(x)))
        centers.append(chunk.mean() / n)
    centers = np.array(centers)
    return ChaosProfile(centers, np.array(etas), centers - e[0] / n, window, stride, trim)
