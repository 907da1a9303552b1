"""Coherent-state mean-field theory of the double well.

The energy per particle of the coherent state with molecular amplitude
``beta`` and atomic amplitudes ``gamma_r``, ``gamma_l`` (constrained to
``beta**2 + gamma_r**2 + gamma_l**2 == 1``) is minimized analytically on
two branches:

* symmetric (``gamma_r == gamma_l``): ``beta`` solves
  ``2U b^3 + 3g b^2 + (omega + 2J - 2U) b - g = 0``;
* broken (``gamma_r * gamma_l == -J / 2U``): ``beta`` solves
  ``4U b^3 + 3g b^2 + (omega - 4U) b - g = 0``.

Both cubics are also available as closed-form Cardano radicals, evaluated
in complex arithmetic with the principal cube root.  The radical is used
when it is real and lands on the lowest-energy root in ``[0, 1]``;
otherwise the polished numeric root wins.
"""
from __future__ import annotations

import enum
import logging
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .fock import Model
from .hamiltonian import ModelParams

log = logging.getLogger(__name__)

_CBRT2 = 2.0 ** (1.0 / 3.0)
_CBRT4 = 4.0 ** (1.0 / 3.0)
_SQRT3 = np.sqrt(3.0)
_BROKEN_TOL = 1e-7


class Phase(str, enum.Enum):
    SYMMETRIC = "symmetric"
    BROKEN = "broken"


class BranchError(ValueError):
    """The requested variational branch has no valid solution."""


@dataclass(frozen=True)
class VariationalPoint:
    beta: float
    gamma_r: float
    gamma_l: float
    lam: float
    energy_pp: float
    phase: Phase
    model: Model = Model.MIXTURE

    @property
    def imbalance(self) -> float:
        """Normalized population imbalance (n_R - n_L)/N."""
        return self.gamma_r ** 2 - self.gamma_l ** 2

    def flipped(self) -> "VariationalPoint":
        """The sign-reversed partner (gamma -> -gamma); same energy."""
        return VariationalPoint(self.beta, -self.gamma_r, -self.gamma_l, self.lam,
                                self.energy_pp, self.phase, self.model)


def _effective(p: ModelParams, model: Model) -> tuple[float, float]:
    if Model.parse(model) is Model.ATOMS:
        return 0.0, 0.0
    return p.omega, p.g


def energy_surface(p: ModelParams, beta, gamma_r, gamma_l, model: Model = Model.MIXTURE):
    """Energy per particle of the coherent state (not constrained)."""
    omega, g = _effective(p, model)
    if Model.parse(model) is Model.ATOMS:
        beta = 0.0
    gr2 = np.square(gamma_r)
    gl2 = np.square(gamma_l)
    return (-2.0 * p.J * np.multiply(gamma_r, gamma_l) + 0.5 * omega * np.square(beta)
            - g * np.multiply(beta, gr2 + gl2) + p.U * (gr2 * gr2 + gl2 * gl2))


def lagrange_multiplier(point: VariationalPoint, p: ModelParams) -> float:
    if point.gamma_r == 0:
        raise ZeroDivisionError("lagrange multiplier needs gamma_r != 0")
    _, g = _effective(p, point.model)
    gr, gl, b = point.gamma_r, point.gamma_l, point.beta
    return (2.0 * p.U * gr ** 3 - g * b * gr - p.J * gl) / gr


def stationarity_residuals(point: VariationalPoint, p: ModelParams) -> np.ndarray:
    """Residuals of the constraint and the three stationarity conditions.

    Order: constraint, molecular equation, right-well equation, left-well
    equation.  The molecular equation is identically zero without molecules.
    """
    omega, g = _effective(p, point.model)
    b, gr, gl, lam, U, J = point.beta, point.gamma_r, point.gamma_l, point.lam, p.U, p.J
    mol = 0.0 if point.model is Model.ATOMS else -g * (gr ** 2 + gl ** 2) + omega * b - 2 * lam * b
    return np.array([
        b ** 2 + gr ** 2 + gl ** 2 - 1.0,
        mol,
        g * b * gr - 2 * U * gr ** 3 + J * gl + lam * gr,
        J * gr + g * b * gl - 2 * U * gl ** 3 + lam * gl,
    ])


# --- cubic machinery -------------------------------------------------------

def symmetric_cubic(p: ModelParams) -> np.ndarray:
    return np.array([2 * p.U, 3 * p.g, p.omega + 2 * p.J - 2 * p.U, -p.g])


def broken_cubic(p: ModelParams) -> np.ndarray:
    return np.array([4 * p.U, 3 * p.g, p.omega - 4 * p.U, -p.g])


def _polish(coeffs, x, steps=3):
    d = np.polyder(coeffs)
    for _ in range(steps):
        slope = np.polyval(d, x)
        if slope == 0:
            break
        step = np.polyval(coeffs, x) / slope
        x = x - step
        if abs(step) <= 1e-16 * max(1.0, abs(x)):
            break
    return float(x)


def _unit_roots(coeffs) -> list[float]:
    c = np.asarray(coeffs, dtype=float)
    # a negligible leading term only adds a root far outside [0, 1]
    big = np.max(np.abs(c)) if c.size else 0.0
    lead = int(np.argmax(np.abs(c) > 1e-14 * big)) if big > 0 else c.size
    c = c[lead:]
    if c.size <= 1:
        return []
    roots = np.roots(c)
    scale = max(1.0, float(np.max(np.abs(roots)))) if roots.size else 1.0
    full = np.asarray(coeffs, dtype=float)
    out = []
    for r in roots:
        if abs(r.imag) <= 1e-7 * scale and -0.5 <= r.real <= 1.5:
            x = _polish(full, r.real, steps=50)
            if -1e-12 <= x <= 1 + 1e-12:
                out.append(min(max(x, 0.0), 1.0))
    return sorted(set(out))


def beta_symmetric_radical(p: ModelParams) -> complex:
    """Closed-form symmetric-branch molecular amplitude (complex-valued)."""
    J, U, w, g = p.J, p.U, p.omega, p.g
    if U == 0:
        return complex((-2 * J - w + np.sqrt(12 * g ** 2 + (2 * J + w) ** 2)) / (6 * g))
    A = -9 * g ** 2 + 6 * U * (2 * J - 2 * U + w)
    B = 54 * g * (2 * J * U - g ** 2 + U * w)
    C = (B + np.sqrt(complex(B ** 2 + 4 * A ** 3))) ** (1.0 / 3.0)
    if U > 0:
        return -g / (2 * U) - A / (3 * _CBRT4 * U * C) + C / (6 * _CBRT2 * U)
    return (-g / (2 * U) + (1 - 1j * _SQRT3) * A / (6 * _CBRT4 * U * C)
            - (1 + 1j * _SQRT3) * C / (12 * _CBRT2 * U))


def beta_broken_radical(p: ModelParams) -> complex:
    """Closed-form broken-branch molecular amplitude (complex-valued)."""
    U, w, g = p.U, p.omega, p.g
    if U == 0:
        raise BranchError("broken branch needs U != 0")
    A = 12 * U * (w - 4 * U) - 9 * g ** 2
    B = 54 * g * (2 * U * w - g ** 2)
    C = (B + np.sqrt(complex(B ** 2 + 4 * A ** 3))) ** (1.0 / 3.0)
    # Cardano puts the cube root of 4 (not 2) under the A term
    return (-g / (4 * U) + (1 - 1j * _SQRT3) * A / (12 * _CBRT4 * U * C)
            - (1 + 1j * _SQRT3) * C / (24 * _CBRT2 * U))


def _pick(radical, roots, coeffs, energy_of):
    if not roots:
        raise BranchError("no real root in [0, 1]")
    best = min(roots, key=energy_of)
    try:
        # extreme couplings overflow the radical; the numeric root stands then
        with np.errstate(all="ignore"):
            r = radical()
    except (ZeroDivisionError, FloatingPointError, BranchError):
        r = None
    if r is not None and np.isfinite(r) and abs(r.imag) <= 1e-9 and abs(r.real - best) <= 1e-8:
        return _polish(coeffs, r.real, steps=2)
    if r is not None:
        log.debug("radical beta %s disagrees with numeric root %.12g", r, best)
    return best


def _symmetric_from_beta(b: float, p: ModelParams, model: Model) -> VariationalPoint:
    gamma = np.sqrt(max(0.0, (1.0 - b * b) / 2.0))
    pt = VariationalPoint(b, gamma, gamma, 0.0, 0.0, Phase.SYMMETRIC, model)
    lam = lagrange_multiplier(pt, p)
    e = float(energy_surface(p, b, gamma, gamma, model))
    return VariationalPoint(b, gamma, gamma, lam, e, Phase.SYMMETRIC, model)


def _broken_gammas(b: float, p: ModelParams) -> tuple[float, float]:
    s = 1.0 - b * b
    rad = p.U ** 2 * s ** 2 - p.J ** 2
    if rad < 0:
        raise BranchError("broken branch invalid: negative radicand")
    gr = np.sqrt(s / 2.0 + np.sqrt(rad) / (2.0 * abs(p.U)))
    gl = -p.J / (2.0 * p.U * gr)
    return float(gr), float(gl)


def _broken_from_beta(b: float, p: ModelParams, model: Model) -> VariationalPoint:
    gr, gl = _broken_gammas(b, p)
    pt = VariationalPoint(b, gr, gl, 0.0, 0.0, Phase.BROKEN, model)
    lam = lagrange_multiplier(pt, p)
    e = float(energy_surface(p, b, gr, gl, model))
    return VariationalPoint(b, gr, gl, lam, e, Phase.BROKEN, model)


def solve_symmetric(p: ModelParams) -> VariationalPoint:
    """Symmetric-branch stationary point of the molecular model (any U)."""
    coeffs = symmetric_cubic(p)
    roots = _unit_roots(coeffs)
    energy = lambda b: _symmetric_from_beta(b, p, Model.MIXTURE).energy_pp
    b = _pick(lambda: beta_symmetric_radical(p), roots, coeffs, energy)
    return _symmetric_from_beta(b, p, Model.MIXTURE)


def solve_broken(p: ModelParams, u_c: float | None = None) -> VariationalPoint:
    """Symmetry-broken stationary point of the molecular model; needs U < U_c."""
    if p.U >= 0:
        raise BranchError("broken branch needs U < U_c < 0")
    u_c = critical_u(p) if u_c is None else u_c
    if p.U >= u_c:
        raise BranchError(f"broken branch needs U < U_c = {u_c:.6f}")
    coeffs = broken_cubic(p)
    valid = []
    for b in _unit_roots(coeffs):
        try:
            _broken_gammas(b, p)
        except BranchError:
            continue
        valid.append(b)
    energy = lambda b: _broken_from_beta(b, p, Model.MIXTURE).energy_pp
    b = _pick(lambda: beta_broken_radical(p), valid, coeffs, energy)
    return _broken_from_beta(b, p, Model.MIXTURE)


def solve_no_molecule(p: ModelParams) -> VariationalPoint:
    """Closed-form mean field of the dimer; the transition sits at U = -J."""
    U, J = p.U, p.J
    if U >= -J:
        gr = gl = 1.0 / np.sqrt(2.0)
        phase = Phase.SYMMETRIC
    else:
        gr = np.sqrt(0.5 + np.sign(U) * np.sqrt(U * U - J * J) / (2.0 * U))
        gl = -J / (2.0 * U * gr)
        phase = Phase.BROKEN
    pt = VariationalPoint(0.0, float(gr), float(gl), 0.0, 0.0, phase, Model.ATOMS)
    lam = lagrange_multiplier(pt, p)
    e = float(energy_surface(p, 0.0, gr, gl, Model.ATOMS))
    return VariationalPoint(0.0, float(gr), float(gl), lam, e, phase, Model.ATOMS)


def _sym_gap(U: float, p: ModelParams) -> float:
    # zero where the broken branch bifurcates from the symmetric one
    b = solve_symmetric(p.replace(U=U)).beta
    return U * (1.0 - b * b) + p.J


def critical_u(p: ModelParams, model: Model = Model.MIXTURE, lower: float = -50.0) -> float:
    """Mean-field critical coupling where the two beta branches meet."""
    if Model.parse(model) is Model.ATOMS or p.g == 0:
        # beta vanishes on both branches, which then meet at U = -J
        return -p.J
    grid = -np.geomspace(1e-3, -lower, 200)
    prev_u, prev_f = 0.0, p.J
    for u in grid:
        f = _sym_gap(u, p)
        if f < 0 <= prev_f:
            root = optimize.brentq(_sym_gap, u, prev_u, args=(p,), xtol=1e-13, rtol=1e-15)
            return float(root)
        prev_u, prev_f = u, f
    raise BranchError(f"no critical coupling bracketed in [{lower}, 0)")


def ground_state(p: ModelParams, model: Model = Model.MIXTURE) -> VariationalPoint:
    """Lowest mean-field branch at the given couplings."""
    model = Model.parse(model)
    if model is Model.ATOMS:
        return solve_no_molecule(p)
    u_c = critical_u(p)
    if p.U < u_c:
        return solve_broken(p, u_c)
    return solve_symmetric(p)


# --- independent oracle ------------------------------------------------------

def _angles_to_amplitudes(phi, theta):
    c = np.cos(phi)
    return np.sin(phi), c * np.cos(theta), c * np.sin(theta)


def numeric_minimize(p: ModelParams, model: Model = Model.MIXTURE,
                     grid: int = 200) -> VariationalPoint:
    """Global minimum of the energy surface on the unit sphere.

    Dense grid seeding in spherical angles followed by BFGS refinement with
    the analytic gradient.  Does not use the branch formulas.
    """
    model = Model.parse(model)
    atoms = model is Model.ATOMS

    def energy(x):
        phi, theta = (0.0, x[0]) if atoms else x
        return float(energy_surface(p, *_angles_to_amplitudes(phi, theta), model))

    def gradient(x):
        phi, theta = (0.0, x[0]) if atoms else x
        omega, g = _effective(p, model)
        b, gr, gl = _angles_to_amplitudes(phi, theta)
        dE_db = omega * b - g * (gr * gr + gl * gl)
        dE_dgr = -2 * p.J * gl - 2 * g * b * gr + 4 * p.U * gr ** 3
        dE_dgl = -2 * p.J * gr - 2 * g * b * gl + 4 * p.U * gl ** 3
        c, s = np.cos(phi), np.sin(phi)
        dth = dE_dgr * (-c * np.sin(theta)) + dE_dgl * (c * np.cos(theta))
        if atoms:
            return np.array([dth])
        dphi = dE_db * c + dE_dgr * (-s * np.cos(theta)) + dE_dgl * (-s * np.sin(theta))
        return np.array([dphi, dth])

    thetas = np.linspace(-np.pi, np.pi, grid, endpoint=False)
    if atoms:
        vals = energy_surface(p, 0.0, np.cos(thetas), np.sin(thetas), model)
        starts = [np.array([thetas[i]]) for i in np.argsort(vals)[:4]]
    else:
        phis = np.linspace(-np.pi / 2, np.pi / 2, grid)
        PH, TH = np.meshgrid(phis, thetas, indexing="ij")
        vals = energy_surface(p, *_angles_to_amplitudes(PH, TH), model)
        flat = np.argsort(vals, axis=None)[:4]
        starts = [np.array([PH.flat[i], TH.flat[i]]) for i in flat]

    best = None
    for x0 in starts:
        res = optimize.minimize(energy, x0, jac=gradient, method="BFGS",
                                options={"gtol": 1e-13, "maxiter": 500})
        if best is None or res.fun < best.fun:
            best = res
    phi, theta = (0.0, best.x[0]) if atoms else best.x
    b, gr, gl = _angles_to_amplitudes(phi, theta)
    if gr + gl < 0:
        gr, gl = -gr, -gl
    if gr < gl:
        gr, gl = gl, gr
    phase = Phase.BROKEN if abs(gr - gl) > _BROKEN_TOL else Phase.SYMMETRIC
    pt = VariationalPoint(float(b), float(gr), float(gl), 0.0, 0.0, phase, model)
    lam = lagrange_multiplier(pt, p) if gr != 0 else 0.0
    e = float(energy_surface(p, b, gr, gl, model))
    return VariationalPoint(float(b), float(gr), float(gl), lam, e, phase, model)
