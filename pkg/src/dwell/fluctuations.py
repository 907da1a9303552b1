"""Quadratic (Bogoliubov) fluctuations around the mean-field minimum.

After shifting every boson by its condensate amplitude, the order-one part
of the Hamiltonian is ``1/2 delta^+ M delta - 1/2 Tr Y`` with
``M = [[Y, Z], [Z, Y]]``.  Its quasiparticle energies are the positive
eigenvalues of ``[[Y, Z], [-Z, -Y]]``, or equivalently the square roots of
the eigenvalues of ``(Y - Z)(Y + Z)``.

``Y - Z`` annihilates the condensate phase direction at a stationary
point, which makes the zero mode a Jordan block of the Bogoliubov matrix.
Diagonalizing it directly smears that zero into noise of order
``sqrt(eps)``, so the phase direction is deflated first and the remaining
modes come from a reduced, well-conditioned problem.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .fock import Model
from .hamiltonian import ModelParams
from .meanfield import Phase, VariationalPoint, ground_state, stationarity_residuals

_SQRT2 = np.sqrt(2.0)


class NonStationaryError(ValueError):
    """The expansion point is not a stationary point of the energy surface."""


class InstabilityError(ArithmeticError):
    """Complex or imaginary quasiparticle energies (expansion around a saddle)."""


@dataclass(frozen=True, eq=False)
class BogoliubovBlocks:
    y: np.ndarray
    z: np.ndarray
    model: Model = Model.MIXTURE


@dataclass(frozen=True, eq=False)
class FluctuationSpectrum:
    """Quasiparticle energies sorted ascending; ``deltas[goldstone_index]`` is the zero mode."""

    deltas: np.ndarray
    goldstone_index: int
    gs_correction: float
    goldstone_residual: float = 0.0

    @property
    def excitations(self) -> np.ndarray:
        """Non-zero quasiparticle energies."""
        return np.delete(self.deltas, self.goldstone_index)


def h_half_residual(pt: VariationalPoint, p: ModelParams) -> float:
    """Norm of the coefficients of the terms linear in the shifted bosons.

    Per unit sqrt(N), the coefficient of ``d_i + d_i^+`` is half the
    derivative of the constrained energy with respect to ``gamma_i`` and that
    of ``f + f^+`` is the ``beta`` derivative over sqrt(2).
    """
    r = stationarity_residuals(pt, p)
    parts = [r[2], r[3]]
    if pt.model is Model.MIXTURE:
        parts.append(r[1] / _SQRT2)
    return float(np.linalg.norm(parts))


def build_blocks(pt: VariationalPoint, p: ModelParams, tol: float = 1e-9) -> BogoliubovBlocks:
    res = h_half_residual(pt, p)
    if not res <= tol:
        raise NonStationaryError(f"linear fluctuation terms do not cancel (residual {res:.3g})")
    U, J, lam, gr, gl, b = p.U, p.J, pt.lam, pt.gamma_r, pt.gamma_l, pt.beta
    if pt.model is Model.ATOMS:
        y = np.array([[4 * U * gr ** 2 - lam, -J],
                      [-J, 4 * U * gl ** 2 - lam]])
        z = np.diag([2 * U * gr ** 2, 2 * U * gl ** 2])
        return BogoliubovBlocks(y, z, Model.ATOMS)
    g, w = p.g, p.omega
    y = np.array([[4 * U * gr ** 2 - lam, -J, -_SQRT2 * gr * g],
                  [-J, 4 * U * gl ** 2 - lam, -_SQRT2 * gl * g],
                  [-_SQRT2 * gr * g, -_SQRT2 * gl * g, w - 2 * lam]])
    z = np.diag([2 * U * gr ** 2 - b * g, 2 * U * gl ** 2 - b * g, 0.0])
    return BogoliubovBlocks(y, z, Model.MIXTURE)


def bogoliubov_matrix(blocks: BogoliubovBlocks) -> np.ndarray:
    y, z = blocks.y, blocks.z
    return np.block([[y, z], [-z, -y]])


def excitations(blocks: BogoliubovBlocks, imag_tol: float = 1e-8,
                zero_tol: float = 1e-8) -> FluctuationSpectrum:
    y, z = blocks.y, blocks.z
    scale = max(1.0, float(np.max(np.abs(y))), float(np.max(np.abs(z))))
    stiff_x = y + z
    stiff_p = y - z
    w, vecs = np.linalg.eigh(stiff_p)
    k = int(np.argmin(np.abs(w)))
    residual = abs(float(w[k]))
    if residual > zero_tol * scale:
        raise NonStationaryError(f"no phase zero mode: smallest |eig(Y - Z)| = {residual:.3g}")
    keep = np.delete(np.arange(w.size), k)
    q = vecs[:, keep]
    reduced = np.diag(w[keep]) @ (q.T @ stiff_x @ q)
    sq = np.linalg.eigvals(reduced)
    if np.any(np.abs(sq.imag) > imag_tol * scale ** 2):
        raise InstabilityError(f"complex quasiparticle energies: {np.sqrt(sq.astype(complex))}")
    sq = sq.real
    if np.any(sq < -imag_tol * scale ** 2):
        raise InstabilityError(f"imaginary quasiparticle energies: {np.sqrt(sq.astype(complex))}")
    deltas = np.sort(np.concatenate([[0.0], np.sqrt(np.clip(sq, 0.0, None))]))
    correction = 0.5 * float(np.sum(deltas)) - 0.5 * float(np.trace(y))
    return FluctuationSpectrum(deltas, 0, correction, residual)


def fluctuation_spectrum(p: ModelParams, model: Model = Model.MIXTURE,
                         point: VariationalPoint | None = None) -> FluctuationSpectrum:
    point = point or ground_state(p, model)
    return excitations(build_blocks(point, p))


def bmf_energy(p: ModelParams, n: int, model: Model = Model.MIXTURE) -> float:
    """Total ground-state energy including the order-one fluctuation shift."""
    point = ground_state(p, model)
    return n * point.energy_pp + excitations(build_blocks(point, p)).gs_correction


def mf_energy(p: ModelParams, n: int, model: Model = Model.MIXTURE) -> float:
    return n * ground_state(p, model).energy_pp


def low_spectrum_bmf(p: ModelParams, model: Model = Model.MIXTURE, n_levels: int = 8,
                     max_quanta: int = 8) -> np.ndarray:
    """Excitation energies ``E_k - E_0`` (k >= 1) of the quasiparticle ladder.

    Levels are sums of quasiparticle energies over occupation vectors of the
    non-zero modes; in the broken phase each level appears twice (the
    parity doublet), so the first returned gap is 0 there.
    """
    point = ground_state(p, model)
    spec = excitations(build_blocks(point, p))
    modes = spec.excitations
    levels = sorted(
        float(np.dot(occ, modes))
        for occ in itertools.product(range(max_quanta + 1), repeat=modes.size)
        if sum(occ) <= max_quanta
    )
    if point.phase is Phase.BROKEN:
        levels = [e for e in levels for _ in (0, 1)]
    return np.array(levels[1:n_levels + 1])
