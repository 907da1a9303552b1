"""Finite-size precursors of the ground-state transition, their scaling,
critical energies of the excited-state transition and the (U, E/N) phase
diagram."""
from __future__ import annotations

import enum
import logging
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import optimize, stats

from .fock import Model
from .hamiltonian import ModelParams
from .observables import DegeneracyProfile, degeneracy_profile, gs_gap
from .parallel import ordered_map
from .spectra import merged_spectrum

log = logging.getLogger(__name__)

DEFAULT_GAP_BOUND = 1e-4


class PrecursorError(RuntimeError):
    pass


class Side(str, enum.Enum):
    BELOW_UC = "below_uc"
    ABOVE_UTILDE = "above_utilde"


# --- ground-state precursor -------------------------------------------------

def precursor_u(n: int, p: ModelParams, model: Model = Model.MIXTURE,
                gap_bound: float = DEFAULT_GAP_BOUND, search: tuple[float, float] = (-50.0, 0.0),
                step: float = 0.05, tol: float = 1e-5,
                gap: Callable[[float, int], float] | None = None) -> float:
    """Largest U at which the ground-state gap per particle drops below ``gap_bound``.

    The coupling is scanned downward from ``search[1]`` in steps of ``step``
    (widening as it goes) until the gap falls under the bound, then bisected
    to ``tol``.  ``gap(U, n)`` overrides the exact-diagonalization gap.
    """
    if gap_bound <= 0:
        raise ValueError("gap bound must be positive")
    if gap is None:
        gap = lambda u, size: gs_gap(p.replace(U=u), size, model)
    lo_limit, hi = search
    if gap(hi, n) < gap_bound:
        raise PrecursorError(f"gap already below the bound at U={hi}")
    lo, h = hi, step
    while True:
        lo = max(hi - h, lo_limit)
        if gap(lo, n) < gap_bound:
            break
        if lo <= lo_limit:
            raise PrecursorError(f"gap never below {gap_bound} in [{lo_limit}, {search[1]}]")
        hi = lo
        h = min(h * 1.25, 1.0)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if gap(mid, n) < gap_bound:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def upper_precursor_u(n: int, p: ModelParams, model: Model = Model.MIXTURE,
                      gap_bound: float = DEFAULT_GAP_BOUND, **kwargs) -> float:
    """Smallest U at which the gap between the two highest levels drops below the bound."""
    # top of H(U, omega) is the bottom of H(-U, -omega)
    flipped = p.replace(omega=-p.omega)
    return -precursor_u(n, flipped, model, gap_bound, **kwargs)


@dataclass(frozen=True)
class ScalingFit:
    alpha: float
    alpha_err: float
    u_c_ref: float
    samples: tuple[tuple[int, float], ...]
    intercept: float = 0.0


def scaling_fit(samples: Sequence[tuple[int, float]], u_c_ref: float) -> ScalingFit:
    """Least-squares exponent of ``|U_c(N) - U_c| ~ N^-alpha``."""
    samples = tuple((int(n), float(u)) for n, u in samples)
    if len(samples) < 3:
        raise ValueError("scaling fit needs at least 3 sizes")
    sizes = np.array([s[0] for s in samples], dtype=float)
    diff = np.array([s[1] for s in samples]) - u_c_ref
    if np.any(diff == 0) or not (np.all(diff > 0) or np.all(diff < 0)):
        raise ValueError("precursors must sit strictly on one side of the reference coupling")
    res = stats.linregress(np.log(sizes), np.log(np.abs(diff)))
    return ScalingFit(float(-res.slope), float(res.stderr), float(u_c_ref), samples,
                      float(res.intercept))


def scan_qpt(sizes: Sequence[int], p: ModelParams, model: Model, u_c_ref: float,
             gap_bound: float = DEFAULT_GAP_BOUND, workers: int = 1) -> ScalingFit:
    """Precursors at every size plus their power-law fit."""
    us = ordered_map(lambda n: precursor_u(n, p, model, gap_bound), list(sizes), workers)
    return scaling_fit(list(zip(sizes, us)), u_c_ref)


# --- excited-state critical energy -----------------------------------------------

def _logistic(x, lo, hi, center, width):
    return lo + (hi - lo) / (1.0 + np.exp(-(x - center) / width))


@dataclass(frozen=True)
class Step:
    energy_pp: float
    width: float
    rising: bool


def locate_step(profile: DegeneracyProfile, min_contrast: float = 0.5) -> Step | None:
    """Half-height point of a logistic fit to the degenerate fraction.

    Returns None when the profile never changes by ``min_contrast``.
    """
    x, y = profile.energy_pp, profile.fraction
    if x.size < 4 or np.ptp(y) < min_contrast:
        return None
    # orient by where the degenerate end sits
    k = max(1, x.size // 10)
    rising = y[-k:].mean() > y[:k].mean()
    level = 0.5 * (y.min() + y.max())
    above = y >= level if rising else y < level
    i0 = int(np.argmax(above)) if above.any() else x.size // 2
    guess_center = x[min(max(i0, 0), x.size - 1)]
    guess = [y.min(), y.max(), guess_center, max(np.ptp(x) / 100, 1e-6)]
    if not rising:
        guess = [y.max(), y.min(), guess_center, max(np.ptp(x) / 100, 1e-6)]
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", optimize.OptimizeWarning)
            popt, _ = optimize.curve_fit(_logistic, x, y, p0=guess, maxfev=20000)
    except RuntimeError:
        return Step(float(guess_center), float(guess[3]), bool(rising))
    lo, hi, center, width = popt
    if width < 0:
        lo, hi, width = hi, lo, -width
    if not (x.min() <= center <= x.max()):
        return Step(float(guess_center), float(abs(guess[3])), bool(rising))
    return Step(float(center), float(width), bool(hi > lo))


def esqpt_line_atoms(U, J: float = 1.0):
    """Critical energy per particle of the dimer: U/2 - J below U_c, U/2 + J above."""
    U = np.asarray(U, dtype=float)
    return np.where(U < 0, U / 2 - J, U / 2 + J)


def esqpt_line_mixture_fit(U):
    """Linear fit of the molecular model's critical energy at omega = g = 5, N = 320."""
    U = np.asarray(U, dtype=float)
    return np.where(U < 0, 0.46 * U - 1.89, 0.42 * U + 2.55)


@dataclass(frozen=True, eq=False)
class EsqptBoundary:
    segments: list[tuple[float, float, Side]]
    omitted: list[float] = field(default_factory=list)
    fit: dict = field(default_factory=dict)

    def side(self, side: Side) -> list[tuple[float, float]]:
        return [(u, e) for u, e, s in self.segments if s is side]


def critical_energy(p: ModelParams, n: int, model: Model, window: int = 100,
                    stride: int = 10, rel_tol: float = 1e-6, **kwargs) -> float | None:
    spec = merged_spectrum(n, model, p, **kwargs)
    step = locate_step(degeneracy_profile(spec, window, stride, rel_tol))
    if step is None:
        return None
    e = spec.per_particle
    if not e[0] < step.energy_pp < e[-1]:
        return None
    return step.energy_pp


def esqpt_boundary(p: ModelParams, n: int, model: Model, u_grid: Sequence[float],
                   window: int = 100, stride: int = 10, rel_tol: float = 1e-6,
                   workers: int = 1, **kwargs) -> EsqptBoundary:
    """Critical energy at each coupling with linear fits per side.

    Couplings without a degeneracy step (between the two precursors) are
    listed in ``omitted``.
    """
    us = [float(u) for u in u_grid]
    ecs = ordered_map(
        lambda u: critical_energy(p.replace(U=u), n, model, window, stride, rel_tol, **kwargs),
        us, workers)
    segments, omitted = [], []
    for u, ec in zip(us, ecs):
        if ec is None:
            omitted.append(u)
        else:
            segments.append((u, ec, Side.BELOW_UC if u < 0 else Side.ABOVE_UTILDE))
    fit = {}
    for side in Side:
        pts = [(u, e) for u, e, s in segments if s is side]
        if len(pts) >= 2:
            slope, intercept = np.polyfit(*zip(*pts), 1)
            fit[side] = (float(slope), float(intercept))
    return EsqptBoundary(segments, omitted, fit)


# --- phase diagram ----------------------------------------------------------

DEGENERATE = "degenerate"
NORMAL = "nondegenerate"
OUTSIDE = "outside"


@dataclass(frozen=True, eq=False)
class PhaseDiagram:
    u_grid: np.ndarray
    e_grid: np.ndarray
    labels: np.ndarray  # shape (len(u_grid), len(e_grid))
    ground_pp: np.ndarray
    top_pp: np.ndarray
    u_c: float | None = None
    u_tilde: float | None = None

    def cells(self):
        for i, u in enumerate(self.u_grid):
            for j, e in enumerate(self.e_grid):
                yield float(u), float(e), str(self.labels[i, j])


def _label_column(p, n, model, e_grid, window, stride, rel_tol, kwargs):
    spec = merged_spectrum(n, model, p, **kwargs)
    prof = degeneracy_profile(spec, window, stride, rel_tol)
    e = spec.per_particle
    out = np.full(e_grid.size, OUTSIDE, dtype="<U13")
    inside = (e_grid >= e[0]) & (e_grid <= e[-1])
    if inside.any():
        idx = np.abs(prof.energy_pp[None, :] - e_grid[inside][:, None]).argmin(axis=1)
        out[inside] = np.where(prof.fraction[idx] >= 0.5, DEGENERATE, NORMAL)
    return out, e[0], e[-1]


def phase_diagram(p: ModelParams, n: int, model: Model, u_grid: Sequence[float],
                  e_grid: Sequence[float] | None = None, window: int = 100, stride: int = 10,
                  rel_tol: float = 1e-6, markers: bool = True,
                  gap_bound: float = DEFAULT_GAP_BOUND, workers: int = 1,
                  **kwargs) -> PhaseDiagram:
    """Degenerate / non-degenerate labels on a (U, E/N) grid."""
    us = np.asarray(u_grid, dtype=float)
    if e_grid is None:
        lo = min(esqpt_line_atoms(us.min()) - 2, -3.0)
        hi = max(esqpt_line_atoms(us.max()) + 2, 3.0)
        e_grid = np.linspace(lo, hi, 121)
    es = np.asarray(e_grid, dtype=float)
    cols = ordered_map(
        lambda u: _label_column(p.replace(U=u), n, model, es, window, stride, rel_tol, kwargs),
        list(us), workers)
    labels = np.array([c[0] for c in cols])
    ground = np.array([c[1] for c in cols])
    top = np.array([c[2] for c in cols])
    u_c = u_tilde = None
    if markers:
        try:
            u_c = precursor_u(n, p, model, gap_bound)
            u_tilde = upper_precursor_u(n, p, model, gap_bound)
        except PrecursorError as exc:
            log.warning("precursor markers unavailable: %s", exc)
    return PhaseDiagram(us, es, labels, ground, top, u_c, u_tilde)
