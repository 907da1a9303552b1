"""Datasets behind each figure id, as :class:`~dwell.io.Table` objects.

Ids: fig1a-d (variational amplitudes, imbalance vs sqrt(F)/N), fig2a/b
(ground-state gap vs U), fig3a/b (precursor scaling), fig4a/b (phase
diagram), fig5a/b (ground-state energy and approximation errors), fig6a/b
(low excitation gaps), fig7a/b (density of states), fig8a/b (degenerate
fraction), fig9 (chaos indicator) and fisher-a/b (Fisher information vs
energy).  Panel ``a`` is the molecular model, ``b`` the bare dimer.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import criticality as crit
from .fluctuations import (InstabilityError, NonStationaryError, bmf_energy,
                           low_spectrum_bmf)
from .fock import Model, Parity
from .hamiltonian import ModelParams
from .io import Table, table_from_columns
from .meanfield import BranchError, critical_u, ground_state
from .observables import (degeneracy_profile, dos_histogram, eta_profile,
                          fisher_vs_energy, gs_gap, ground_state_order_parameter)
from .parallel import ordered_map
from .spectra import merged_spectrum, sector_spectra

MIXTURE_PARAMS = ModelParams(U=0.0, J=1.0, omega=5.0, g=5.0)
ATOMS_PARAMS = ModelParams(U=0.0, J=1.0)


class UnknownFigureError(KeyError):
    pass


@dataclass
class FigureOptions:
    n: int | None = None
    sizes: list[int] | None = None
    u_grid: np.ndarray | None = None
    e_grid: np.ndarray | None = None
    u: float | None = None
    workers: int = 1
    allow_large: bool = False
    gap_bound: float = crit.DEFAULT_GAP_BOUND


def grid(start: float, stop: float, step: float) -> np.ndarray:
    """Inclusive arithmetic grid, rounded so it is reproducible."""
    if step <= 0 or stop < start:
        raise ValueError("grid needs step > 0 and stop >= start")
    count = int(np.floor((stop - start) / step + 1e-9)) + 1
    return np.round(start + step * np.arange(count), 12)


def _model_params(panel: str) -> tuple[Model, ModelParams]:
    return (Model.MIXTURE, MIXTURE_PARAMS) if panel == "a" else (Model.ATOMS, ATOMS_PARAMS)


def _meta(fig_id: str, model: Model, p: ModelParams, **extra) -> dict:
    meta = {"figure": fig_id, "model": model.value, "J": p.J}
    if model is Model.MIXTURE:
        meta.update(omega=p.omega, g=p.g)
    meta.update({k: v for k, v in extra.items() if v is not None})
    return meta


def _amplitudes(fig_id, opts, panel):
    model, p = _model_params(panel)
    us = opts.u_grid if opts.u_grid is not None else grid(-3.0, 3.0, 0.05)
    pts = [ground_state(p.replace(U=u), model) for u in us]
    cols = {"U": us, "gamma_r": [x.gamma_r for x in pts], "gamma_l": [x.gamma_l for x in pts],
            "beta": [x.beta for x in pts], "phase": [x.phase.value for x in pts]}
    return [("", table_from_columns(cols, _meta(fig_id, model, p, u_grid=None)))]


def _order(fig_id, opts, panel):
    model, p = _model_params(panel)
    us = opts.u_grid if opts.u_grid is not None else grid(-3.0, 1.0, 0.05)
    sizes = opts.sizes or ([100, 200] if model is Model.MIXTURE else [3200])
    cols = {"U": us, "mf_imbalance": [abs(ground_state(p.replace(U=u), model).imbalance) for u in us]}
    for n in sizes:
        cols[f"sqrtF_over_N_{n}"] = ordered_map(
            lambda u: ground_state_order_parameter(p.replace(U=u), n, model), us, opts.workers)
    return [("", table_from_columns(cols, _meta(fig_id, model, p, sizes=sizes)))]


def _gaps(fig_id, opts, panel):
    model, p = _model_params(panel)
    if model is Model.MIXTURE:
        sizes = opts.sizes or [20, 40, 80, 160, 320]
        us = opts.u_grid if opts.u_grid is not None else grid(-3.0, 0.0, 0.02)
    else:
        sizes = opts.sizes or [250, 1000, 4000, 16000]
        us = opts.u_grid if opts.u_grid is not None else grid(-1.5, -0.5, 0.01)
    cols = {"U": us}
    for n in sizes:
        cols[f"gap_pp_{n}"] = ordered_map(lambda u: gs_gap(p.replace(U=u), n, model), us,
                                          opts.workers)
    meta = _meta(fig_id, model, p, sizes=sizes, u_c=critical_u(p, model), gap_bound=opts.gap_bound)
    return [("", table_from_columns(cols, meta))]


def _scaling(fig_id, opts, panel):
    model, p = _model_params(panel)
    sizes = opts.sizes or ([20, 40, 80, 160, 320] if model is Model.MIXTURE
                           else [250, 500, 1000, 2000, 4000])
    u_c = critical_u(p, model)
    us = ordered_map(lambda n: crit.precursor_u(n, p, model, opts.gap_bound), sizes, opts.workers)
    meta = _meta(fig_id, model, p, u_c=u_c, gap_bound=opts.gap_bound)
    table = table_from_columns({"N": sizes, "U_c_N": us,
                                "abs_diff": [abs(u - u_c) for u in us]}, meta)
    try:
        fit = crit.scaling_fit(list(zip(sizes, us)), u_c)
        summary = {"alpha": fit.alpha, "alpha_err": fit.alpha_err, "u_c_ref": u_c,
                   "intercept": fit.intercept}
    except ValueError as exc:
        summary = {"alpha": None, "error": str(exc), "u_c_ref": u_c}
    return [("", table), ("fit", (summary, meta))]


def _phase(fig_id, opts, panel):
    model, p = _model_params(panel)
    n = opts.n or (160 if model is Model.MIXTURE else 1000)
    us = opts.u_grid if opts.u_grid is not None else (
        grid(-6.0, 9.0, 0.25) if model is Model.MIXTURE else grid(-3.0, 3.0, 0.1))
    pd = crit.phase_diagram(p, n, model, us, opts.e_grid, workers=opts.workers,
                            gap_bound=opts.gap_bound, allow_large=opts.allow_large)
    meta = _meta(fig_id, model, p, N=n)
    rows = [[u, e, lab] for u, e, lab in pd.cells()]
    cells = Table(["U", "E_pp", "label"], rows, meta)
    edges = table_from_columns({"U": pd.u_grid, "ground_pp": pd.ground_pp, "top_pp": pd.top_pp}, meta)
    return [("", cells), ("edges", edges), ("markers", ({"u_c": pd.u_c, "u_tilde": pd.u_tilde}, meta))]


def _energies(fig_id, opts, panel):
    model, p = Model.MIXTURE, MIXTURE_PARAMS
    n = opts.n or 200
    us = opts.u_grid if opts.u_grid is not None else (
        grid(-3.0, 3.0, 0.05) if panel == "a" else grid(-1.6, -0.6, 0.02))

    def row(u):
        q = p.replace(U=u)
        exact = merged_spectrum(n, model, q, k=1).energies[0] / n
        mf = ground_state(q, model).energy_pp
        try:
            bmf = bmf_energy(q, n, model) / n
        except (InstabilityError, NonStationaryError, BranchError):
            bmf = float("nan")
        return exact, mf, bmf

    vals = ordered_map(row, us, opts.workers)
    exact, mf, bmf = (np.array(c) for c in zip(*vals))
    cols = {"U": us, "exact_pp": exact, "mf_pp": mf, "bmf_pp": bmf}
    if panel == "b":
        cols = {"U": us, "exact_minus_mf": exact - mf, "exact_minus_bmf": exact - bmf}
    return [("", table_from_columns(cols, _meta(fig_id, model, p, N=n)))]


def _excitations(fig_id, opts, panel, n_levels=6):
    model, p = _model_params(panel)
    n = opts.n or 200
    us = opts.u_grid if opts.u_grid is not None else grid(-3.0, 3.0, 0.1)

    def row(u):
        q = p.replace(U=u)
        levels = merged_spectrum(n, model, q, k=n_levels + 1).energies
        exact = levels[1:] - levels[0]
        try:
            ladder = low_spectrum_bmf(q, model, n_levels)
        except (InstabilityError, NonStationaryError, BranchError):
            ladder = np.full(n_levels, np.nan)
        return np.concatenate([exact, ladder])

    vals = np.array(ordered_map(row, us, opts.workers))
    cols = {"U": us}
    for k in range(n_levels):
        cols[f"exact_{k + 1}"] = vals[:, k]
    for k in range(n_levels):
        cols[f"bmf_{k + 1}"] = vals[:, n_levels + k]
    return [("", table_from_columns(cols, _meta(fig_id, model, p, N=n)))]


def _esqpt_defaults(opts, panel):
    model, p = _model_params(panel)
    n = opts.n or (320 if model is Model.MIXTURE else 2000)
    u = 9.0 if opts.u is None else opts.u
    return model, p.replace(U=u), n


def _dos(fig_id, opts, panel):
    model, p, n = _esqpt_defaults(opts, panel)
    spec = merged_spectrum(n, model, p, allow_large=opts.allow_large)
    h = dos_histogram(spec)
    meta = _meta(fig_id, model, p, N=n, U=p.U, bin_width=h.bin_width)
    cols = {"E_pp": h.centers, "excitation_pp": h.centers - spec.per_particle[0], "density": h.density}
    return [("", table_from_columns(cols, meta))]


def _degeneracy(fig_id, opts, panel):
    model, p, n = _esqpt_defaults(opts, panel)
    spec = merged_spectrum(n, model, p, allow_large=opts.allow_large)
    prof = degeneracy_profile(spec)
    step = crit.locate_step(prof)
    meta = _meta(fig_id, model, p, N=n, U=p.U, window=prof.window, stride=prof.stride,
                 rel_tol=prof.rel_tol, E_c=None if step is None else step.energy_pp)
    cols = {"E_pp": prof.energy_pp, "excitation_pp": prof.excitation_pp, "fraction": prof.fraction}
    return [("", table_from_columns(cols, meta))]


def _chaos(fig_id, opts, panel):
    model = Model.MIXTURE
    p = MIXTURE_PARAMS.replace(U=9.0 if opts.u is None else opts.u)
    n = opts.n or 360
    even, _ = sector_spectra(n, model, p, allow_large=opts.allow_large)
    prof = eta_profile(even)
    meta = _meta(fig_id, model, p, N=n, U=p.U, parity=Parity.EVEN.value, window=prof.window,
                 stride=prof.stride, trim=prof.trim_fraction)
    cols = {"E_pp": prof.energy_pp, "excitation_pp": prof.excitation_pp, "eta": prof.eta}
    return [("", table_from_columns(cols, meta))]


def _fisher(fig_id, opts, panel):
    model, p = _model_params(panel)
    n = opts.n or (160 if model is Model.MIXTURE else 2000)
    p = p.replace(U=9.0 if opts.u is None else opts.u)
    e, order, labels = fisher_vs_energy(p, n, model, allow_large=opts.allow_large)
    meta = _meta(fig_id, model, p, N=n, U=p.U)
    cols = {"E_pp": e, "sqrtF_over_N": order, "parity": labels}
    return [("", table_from_columns(cols, meta))]


Builder = Callable[[str, FigureOptions], list]


def _panel(fn, panel) -> Builder:
    return lambda fig_id, opts: fn(fig_id, opts, panel)


FIGURES: dict[str, Builder] = {
    "fig1a": _panel(_amplitudes, "a"), "fig1b": _panel(_order, "a"),
    "fig1c": _panel(_amplitudes, "b"), "fig1d": _panel(_order, "b"),
    "fig2a": _panel(_gaps, "a"), "fig2b": _panel(_gaps, "b"),
    "fig3a": _panel(_scaling, "a"), "fig3b": _panel(_scaling, "b"),
    "fig4a": _panel(_phase, "a"), "fig4b": _panel(_phase, "b"),
    "fig5a": _panel(_energies, "a"), "fig5b": _panel(_energies, "b"),
    "fig6a": _panel(_excitations, "a"), "fig6b": _panel(_excitations, "b"),
    "fig7a": _panel(_dos, "a"), "fig7b": _panel(_dos, "b"),
    "fig8a": _panel(_degeneracy, "a"), "fig8b": _panel(_degeneracy, "b"),
    "fig9": _panel(_chaos, "a"),
    "fisher-a": _panel(_fisher, "a"), "fisher-b": _panel(_fisher, "b"),
}


def build_figure(fig_id: str, opts: FigureOptions | None = None) -> list:
    """List of ``(suffix, Table)`` or ``(suffix, (json_doc, meta))`` outputs."""
    if fig_id not in FIGURES:
        raise UnknownFigureError(f"unknown figure id {fig_id!r}; known: {', '.join(FIGURES)}")
    return FIGURES[fig_id](fig_id, opts or FigureOptions())
