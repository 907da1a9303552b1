"""``dwell`` command-line interface.

Every command writes CSV tables (and JSON summaries where a fit is
involved) into ``--out-dir`` and prints the paths it wrote.  Outputs carry
a provenance header and are byte-identical for identical invocations.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import criticality as crit
from . import figures
from .fluctuations import (InstabilityError, NonStationaryError, fluctuation_spectrum,
                           bmf_energy, mf_energy)
from .fock import FullBasis, Model, Parity, SectorBasis, basis_dimension, sector_dimensions
from .hamiltonian import ModelParams, build_hamiltonian
from .io import Table, read_csv, table_from_columns, write_csv, write_json
from .meanfield import BranchError, critical_u, ground_state
from .parallel import ordered_map
from .observables import (VAR_WIGNER, WindowError, degeneracy_profile, dos_histogram,
                          eta_from_spacings, eta_profile, fisher_vs_energy)
from .spectra import (DEFAULT_MAX_DIM, ResourceLimitError, Spectrum, full_basis_spectrum,
                      merge_sectors, sector_spectra)

log = logging.getLogger("dwell")

EXIT_CONFIG = 2
EXIT_RESOURCE = 3


class ConfigError(ValueError):
    pass


# --- argument helpers ----------------------------------------------------------

def _ints(text: str) -> list[int]:
    try:
        vals = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not vals or any(v < 1 for v in vals):
        raise argparse.ArgumentTypeError("sizes must be positive and non-empty")
    return vals


def _range(text: str) -> np.ndarray:
    """``from:to:step`` (inclusive) or a comma list."""
    try:
        if ":" in text:
            a, b, s = (float(x) for x in text.split(":"))
            return figures.grid(a, b, s)
        vals = np.array([float(x) for x in text.split(",") if x.strip()])
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}: {exc}")
    if vals.size == 0:
        raise argparse.ArgumentTypeError("empty grid")
    return vals


def _scan(text: str) -> np.ndarray:
    name, _, rest = text.partition(":")
    if name != "U" or not rest:
        raise argparse.ArgumentTypeError("scan must look like U:from:to:step")
    return _range(rest)


def _positive(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return v


def _global_flags(parser: argparse.ArgumentParser, suppress: bool):
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    g = parser.add_argument_group("global options")
    g.add_argument("--threads", type=int, default=d(1), help="worker count for sweeps")
    g.add_argument("--out-dir", type=Path, default=d(Path(".")), help="output directory")
    g.add_argument("--seed", type=int, default=d(0), help="seed for sampled statistics")
    g.add_argument("--allow-large", action="store_true", default=d(False),
                   help="permit full diagonalization above the dimension cap")
    g.add_argument("--max-dim", type=int, default=d(DEFAULT_MAX_DIM), help="dimension cap")
    g.add_argument("-v", "--verbose", action="store_true", default=d(False))


def _model_flags(parser, need_u=True, need_n=True):
    parser.add_argument("--model", required=True, choices=[m.value for m in Model])
    if need_n:
        parser.add_argument("--n", type=int, required=True, help="particle number")
    if need_u:
        parser.add_argument("-U", type=float, default=None, help="on-site interaction")
    parser.add_argument("-J", type=_positive, default=1.0, help="hopping (default 1)")
    parser.add_argument("--omega", type=float, default=None,
                        help="molecular detuning (mixture only, default 5)")
    parser.add_argument("--g", type=float, default=None,
                        help="atom-molecule coupling (mixture only, default 5)")


def _params(args, u: float | None = None) -> tuple[Model, ModelParams]:
    model = Model.parse(args.model)
    if model is Model.ATOMS and (args.omega is not None or args.g is not None):
        raise ConfigError("--omega/--g are only valid with --model mixture")
    if u is None:
        u = getattr(args, "U", None)
    if u is None:
        u = 0.0
    if model is Model.ATOMS:
        return model, ModelParams(U=u, J=args.J)
    omega = 5.0 if args.omega is None else args.omega
    g = 5.0 if args.g is None else args.g
    return model, ModelParams(U=u, J=args.J, omega=omega, g=g)


def _meta(command: str, model: Model, p: ModelParams | None, **extra) -> dict:
    meta = {"command": command, "model": model.value}
    if p is not None:
        meta.update(J=p.J, U=p.U)
        if model is Model.MIXTURE:
            meta.update(omega=p.omega, g=p.g)
    meta.update({k: v for k, v in extra.items() if v is not None})
    return meta


def _guard(args, n: int, model: Model, parity: str):
    if parity == "full":
        dims = [basis_dimension(n, model)]
    else:
        even, odd = sector_dimensions(n, model)
        dims = {"even": [even], "odd": [odd], "both": [even, odd]}[parity]
    big = max(dims)
    if big > args.max_dim and not args.allow_large:
        raise ResourceLimitError(big, args.max_dim)


def _emit(args, name: str, table: Table) -> Path:
    path = write_csv(args.out_dir / name, table)
    print(path)
    return path


def _emit_json(args, name: str, doc: dict, meta: dict) -> Path:
    path = write_json(args.out_dir / name, doc, meta)
    print(path)
    return path


def _stem(command: str, model: Model, n: int | None = None, extra: str = "") -> str:
    parts = [command, model.value] + ([f"N{n}"] if n is not None else []) + ([extra] if extra else [])
    return "_".join(parts)


# --- commands -----------------------------------------------------------------

def cmd_basis(args):
    model, _ = _params(args)
    basis = FullBasis(args.n, model) if args.parity == "full" else SectorBasis(
        args.n, model, Parity.parse(args.parity))
    occ = basis.occupations
    cols = {"index": np.arange(basis.dim), "n_left": occ[:, 0], "n_right": occ[:, 1],
            "n_mol": occ[:, 2]}
    meta = _meta("basis", model, None, N=args.n, parity=args.parity, dim=basis.dim)
    print(f"dimension {basis.dim}")
    _emit(args, (args.output or _stem("basis", model, args.n, args.parity)) + ".csv",
          table_from_columns(cols, meta))


def cmd_hamiltonian(args):
    model, p = _params(args)
    _guard(args, args.n, model, "full" if args.parity == "full" else args.parity)
    basis = FullBasis(args.n, model) if args.parity == "full" else SectorBasis(
        args.n, model, Parity.parse(args.parity))
    h = build_hamiltonian(basis, p)
    meta = _meta("hamiltonian", model, p, N=args.n, parity=args.parity, dim=h.dim,
                 storage="upper-triangle")
    cols = {"row": h.rows, "col": h.cols, "value": h.vals}
    _emit(args, (args.output or _stem("hamiltonian", model, args.n, args.parity)) + ".csv",
          table_from_columns(cols, meta))


def _spectrum(args, model, p, parity, k=None) -> Spectrum:
    if k is None:
        _guard(args, args.n, model, parity)
    opts = dict(max_dim=args.max_dim, allow_large=args.allow_large)
    if parity == "full":
        spec = full_basis_spectrum(args.n, model, p, **opts)
        return spec if k is None else spec.head(k)
    even, odd = sector_spectra(args.n, model, p, k=k, **opts)
    if parity == "even":
        return even
    if parity == "odd":
        return odd
    merged = merge_sectors(even, odd)
    return merged if k is None else merged.head(k)


def cmd_spectrum(args):
    model, p = _params(args)
    spec = _spectrum(args, model, p, args.parity, args.k)
    labels = spec.labels if spec.labels is not None else np.full(len(spec), "none")
    cols = {"index": np.arange(len(spec)), "energy": spec.energies,
            "energy_pp": spec.per_particle, "parity": labels}
    meta = _meta("spectrum", model, p, N=args.n, parity=args.parity, k=args.k)
    _emit(args, (args.output or _stem("spectrum", model, args.n, args.parity)) + ".csv",
          table_from_columns(cols, meta))


def _u_values(args) -> np.ndarray:
    if args.scan is not None:
        return args.scan
    if args.U is None:
        raise ConfigError("give -U or --scan U:from:to:step")
    return np.array([args.U])


def cmd_meanfield(args):
    model, p = _params(args)
    us = _u_values(args)
    rows = []
    for u in us:
        pt = ground_state(p.replace(U=float(u)), model)
        rows.append([float(u), pt.phase.value, pt.beta, pt.gamma_r, pt.gamma_l, pt.lam,
                     pt.energy_pp, pt.imbalance])
    meta = _meta("meanfield", model, p.replace(U=float(us[0])) if us.size == 1 else None)
    if us.size > 1:
        meta.update(J=p.J, scan=f"{float(us[0])!r}:{float(us[-1])!r}:{us.size}")
        if model is Model.MIXTURE:
            meta.update(omega=p.omega, g=p.g)
    cols = ["U", "phase", "beta", "gamma_r", "gamma_l", "lambda", "energy_pp", "imbalance"]
    if us.size == 1:
        print(", ".join(f"{c}={v}" for c, v in zip(cols, rows[0])))
    stem = args.output or _stem("meanfield", model)
    _emit(args, stem + ".csv", Table(cols, rows, meta))
    _emit_json(args, stem + ".json", {"u_c": critical_u(p, model)}, meta)


def cmd_fluct(args):
    model, p = _params(args)
    us = _u_values(args)
    n_modes = 2 if model is Model.ATOMS else 3
    rows = []
    for u in us:
        q = p.replace(U=float(u))
        try:
            fs = fluctuation_spectrum(q, model)
            row = [float(u)] + list(fs.deltas) + [fs.gs_correction, fs.goldstone_residual]
        except (InstabilityError, NonStationaryError, BranchError) as exc:
            log.warning("U=%g: %s", u, exc)
            row = [float(u)] + [float("nan")] * (n_modes + 2)
        if args.n is not None:
            row += [mf_energy(q, args.n, model), bmf_energy(q, args.n, model)]
        rows.append(row)
    cols = ["U"] + [f"delta_{i}" for i in range(n_modes)] + ["gs_correction", "goldstone_residual"]
    if args.n is not None:
        cols += ["E_mf", "E_bmf"]
    if us.size == 1:
        print(", ".join(f"{c}={v}" for c, v in zip(cols, rows[0])) + ", goldstone_index=0")
    meta = _meta("fluct", model, None, N=args.n, J=p.J,
                 U=f"{float(us[0])!r}:{float(us[-1])!r}:{us.size}" if us.size > 1 else float(us[0]))
    if model is Model.MIXTURE:
        meta.update(omega=p.omega, g=p.g)
    _emit(args, (args.output or _stem("fluct", model, args.n)) + ".csv", Table(cols, rows, meta))


def _read_spectrum(path: Path) -> tuple[Spectrum, dict]:
    table = read_csv(path)
    if "energy" not in table.columns:
        raise ConfigError(f"{path} has no energy column")
    n = int(table.meta.get("N", 0))
    e = table.column("energy")
    labels = table.column("parity") if "parity" in table.columns else None
    order = np.argsort(e, kind="stable")
    labels = None if labels is None else np.asarray(labels, dtype=str)[order]
    return Spectrum(e[order], n, None, labels), table.meta


def cmd_observables(args):
    what = args.what
    if what == "eta" and args.synthetic:
        rng = np.random.default_rng(args.seed)
        if args.synthetic == "poisson":
            s = rng.exponential(1.0, args.count)
        else:
            s = np.sqrt(-4.0 / np.pi * np.log(1.0 - rng.random(args.count)))
        meta = {"command": "observables", "what": "eta", "synthetic": args.synthetic,
                "count": args.count, "seed": args.seed}
        _emit_json(args, (args.output or f"eta_{args.synthetic}") + ".json",
                   {"eta": eta_from_spacings(s), "var_wigner": VAR_WIGNER}, meta)
        return
    if what == "fisher":
        model, p = _params(args)
        if args.n is None:
            raise ConfigError("--what fisher needs --n and model parameters")
        _guard(args, args.n, model, "both")
        e, order, labels = fisher_vs_energy(p, args.n, model, max_dim=args.max_dim,
                                            allow_large=args.allow_large)
        meta = _meta("observables", model, p, N=args.n, what="fisher")
        _emit(args, (args.output or _stem("fisher", model, args.n)) + ".csv",
              table_from_columns({"E_pp": e, "sqrtF_over_N": order, "parity": labels}, meta))
        return
    if args.input is None:
        raise ConfigError(f"--what {what} needs --in spectrum.csv")
    spec, src = _read_spectrum(args.input)
    meta = {k: v for k, v in src.items() if k not in ("dwell-version", "command")}
    meta.update(command="observables", what=what, source=args.input.name)
    if what == "dos":
        h = dos_histogram(spec, args.bin_width)
        meta["bin_width"] = h.bin_width
        cols = {"E_pp": h.centers, "density": h.density}
    elif what == "degeneracy":
        prof = degeneracy_profile(spec, args.window or 100, args.stride or 10, args.rel_tol)
        step = crit.locate_step(prof)
        meta.update(window=prof.window, stride=prof.stride, rel_tol=prof.rel_tol,
                    E_c=None if step is None else step.energy_pp)
        cols = {"E_pp": prof.energy_pp, "excitation_pp": prof.excitation_pp,
                "fraction": prof.fraction}
    else:
        if spec.labels is not None and np.unique(spec.labels).size > 1:
            keep = spec.labels == args.parity
            spec = Spectrum(spec.energies[keep], spec.n_particles, None, spec.labels[keep])
            meta["parity"] = args.parity
        prof = eta_profile(spec, args.window or 250, args.stride or 50, args.trim, args.degree)
        meta.update(window=prof.window, stride=prof.stride, trim=prof.trim_fraction,
                    degree=args.degree)
        cols = {"E_pp": prof.energy_pp, "excitation_pp": prof.excitation_pp, "eta": prof.eta}
    stem = args.output or f"{what}_{args.input.stem}"
    _emit(args, stem + ".csv", table_from_columns(cols, meta))


def cmd_scan_qpt(args):
    model, p = _params(args, u=0.0)
    if len(args.sizes) < 3:
        raise ConfigError("--sizes needs at least 3 particle numbers for the scaling fit")
    u_c = args.u_c if args.u_c is not None else critical_u(p, model)
    us = ordered_map(lambda n: crit.precursor_u(n, p, model, args.bound), args.sizes,
                     args.threads)
    meta = _meta("scan-qpt", model, None, J=p.J, gap_bound=args.bound, u_c=u_c)
    if model is Model.MIXTURE:
        meta.update(omega=p.omega, g=p.g)
    stem = args.output or _stem("qpt", model)
    _emit(args, stem + ".csv", table_from_columns({"N": args.sizes, "U_c_N": us}, meta))
    try:
        fit = crit.scaling_fit(list(zip(args.sizes, us)), u_c)
        doc = {"alpha": fit.alpha, "alpha_err": fit.alpha_err, "u_c_ref": u_c,
               "intercept": fit.intercept}
    except ValueError as exc:
        doc = {"alpha": None, "error": str(exc), "u_c_ref": u_c}
        print(f"dwell: scaling fit failed: {exc}", file=sys.stderr)
    _emit_json(args, stem + ".json", doc, meta)


def cmd_scan_esqpt(args):
    model, p = _params(args, u=0.0)
    _guard(args, args.n, model, "both")
    b = crit.esqpt_boundary(p, args.n, model, args.u_grid, args.window, args.stride,
                            args.rel_tol, workers=args.threads, max_dim=args.max_dim,
                            allow_large=args.allow_large)
    meta = _meta("scan-esqpt", model, None, N=args.n, J=p.J, window=args.window,
                 stride=args.stride, rel_tol=args.rel_tol)
    if model is Model.MIXTURE:
        meta.update(omega=p.omega, g=p.g)
    stem = args.output or _stem("esqpt", model, args.n)
    rows = [[u, e, s.value] for u, e, s in b.segments]
    _emit(args, stem + ".csv", Table(["U", "E_c_pp", "side"], rows, meta))
    doc = {"fit": {s.value: {"slope": v[0], "intercept": v[1]} for s, v in b.fit.items()},
           "omitted": b.omitted}
    _emit_json(args, stem + ".json", doc, meta)


def cmd_phase_diagram(args):
    model, p = _params(args, u=0.0)
    _guard(args, args.n, model, "both")
    pd = crit.phase_diagram(p, args.n, model, args.u_grid, args.e_grid, args.window,
                            args.stride, args.rel_tol, markers=not args.no_markers,
                            gap_bound=args.bound, workers=args.threads,
                            max_dim=args.max_dim, allow_large=args.allow_large)
    meta = _meta("phase-diagram", model, None, N=args.n, J=p.J, rel_tol=args.rel_tol)
    if model is Model.MIXTURE:
        meta.update(omega=p.omega, g=p.g)
    stem = args.output or _stem("phase", model, args.n)
    _emit(args, stem + ".csv", Table(["U", "E_pp", "label"], [list(c) for c in pd.cells()], meta))
    _emit_json(args, stem + ".json", {"u_c": pd.u_c, "u_tilde": pd.u_tilde,
                                      "ground_pp": pd.ground_pp, "top_pp": pd.top_pp}, meta)


def cmd_figure(args):
    opts = figures.FigureOptions(n=args.n, sizes=args.sizes, u_grid=args.u_grid,
                                 e_grid=args.e_grid, u=args.U, workers=args.threads,
                                 allow_large=args.allow_large, gap_bound=args.bound)
    outputs = figures.build_figure(args.id, opts)
    for suffix, item in outputs:
        stem = args.id + (f"_{suffix}" if suffix else "")
        if isinstance(item, Table):
            _emit(args, stem + ".csv", item)
        else:
            doc, meta = item
            _emit_json(args, stem + ".json", doc, meta)


# --- parser ---------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dwell", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"dwell {__version__}")
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, suppress=True)

    def add(name, fn, help_):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.set_defaults(func=fn)
        p.add_argument("-o", "--output", "--out", dest="output", default=None,
                       help="output file name (extension optional)")
        return p

    p = add("basis", cmd_basis, "enumerate the Fock basis")
    _model_flags(p, need_u=False)
    p.add_argument("--parity", choices=["full", "even", "odd"], default="full")

    p = add("hamiltonian", cmd_hamiltonian, "upper-triangle matrix elements")
    _model_flags(p)
    p.add_argument("--parity", choices=["full", "even", "odd"], default="full")

    p = add("spectrum", cmd_spectrum, "eigenvalues")
    _model_flags(p)
    p.add_argument("--parity", choices=["both", "even", "odd", "full"], default="both")
    p.add_argument("--k", type=int, default=None, help="only the k lowest levels")

    for name, fn, help_ in (("meanfield", cmd_meanfield, "variational ground state"),
                            ("fluct", cmd_fluct, "Bogoliubov excitations")):
        p = add(name, fn, help_)
        _model_flags(p, need_n=False)
        p.add_argument("--scan", type=_scan, default=None, metavar="U:FROM:TO:STEP")
        if name == "fluct":
            p.add_argument("--n", type=int, default=None, help="also report total energies")

    p = add("observables", cmd_observables, "DOS, degeneracy, eta or Fisher information")
    p.add_argument("--what", required=True, choices=["dos", "degeneracy", "eta", "fisher"])
    p.add_argument("--in", dest="input", type=Path, default=None, help="spectrum CSV")
    p.add_argument("--model", choices=[m.value for m in Model], default="atoms")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("-U", type=float, default=None)
    p.add_argument("-J", type=_positive, default=1.0)
    p.add_argument("--omega", type=float, default=None)
    p.add_argument("--g", type=float, default=None)
    p.add_argument("--bin-width", type=_positive, default=None)
    p.add_argument("--window", type=int, default=None)
    p.add_argument("--stride", type=int, default=None)
    p.add_argument("--rel-tol", type=_positive, default=1e-6)
    p.add_argument("--trim", type=float, default=0.2)
    p.add_argument("--degree", type=int, default=5)
    p.add_argument("--parity", choices=["even", "odd"], default="even",
                   help="sector used for eta when the input mixes parities")
    p.add_argument("--synthetic", choices=["poisson", "wigner"], default=None)
    p.add_argument("--count", type=int, default=10000)

    p = add("scan-qpt", cmd_scan_qpt, "finite-size precursors and scaling exponent")
    _model_flags(p, need_u=False, need_n=False)
    p.add_argument("--sizes", type=_ints, required=True)
    p.add_argument("--bound", type=_positive, default=crit.DEFAULT_GAP_BOUND)
    p.add_argument("--u-c", type=float, default=None, help="reference critical coupling")

    for name, fn, help_ in (("scan-esqpt", cmd_scan_esqpt, "critical energies over a U grid"),
                            ("phase-diagram", cmd_phase_diagram, "(U, E/N) phase labels")):
        p = add(name, fn, help_)
        _model_flags(p, need_u=False)
        p.add_argument("--u-grid", type=_range, required=True, metavar="FROM:TO:STEP")
        p.add_argument("--window", type=int, default=100)
        p.add_argument("--stride", type=int, default=10)
        p.add_argument("--rel-tol", type=_positive, default=1e-6)
        if name == "phase-diagram":
            p.add_argument("--e-grid", type=_range, default=None, metavar="FROM:TO:STEP")
            p.add_argument("--bound", type=_positive, default=crit.DEFAULT_GAP_BOUND)
            p.add_argument("--no-markers", action="store_true")

    p = add("figure", cmd_figure, "dataset behind a figure")
    p.add_argument("--id", required=True, help=", ".join(figures.FIGURES))
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--sizes", type=_ints, default=None)
    p.add_argument("--u-grid", type=_range, default=None)
    p.add_argument("--e-grid", type=_range, default=None)
    p.add_argument("-U", type=float, default=None)
    p.add_argument("--bound", type=_positive, default=crit.DEFAULT_GAP_BOUND)
    return parser


_RANGE_FLAGS = ("--u-grid", "--e-grid", "--scan")


def _attach_negative_ranges(argv: list[str]) -> list[str]:
    """Glue ``--u-grid -2:0:0.5`` into ``--u-grid=-2:0:0.5`` so argparse
    does not read the range as an option."""
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        if (tok in _RANGE_FLAGS and i + 1 < len(argv) and argv[i + 1].startswith("-")
                and argv[i + 1][1:2] in "0123456789."):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def main(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    args = parser.parse_args(_attach_negative_ranges(argv))
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="dwell: %(message)s")
    if args.threads < 1:
        parser.error("--threads must be >= 1")
    if getattr(args, "output", None):
        out = Path(args.output)
        if out.suffix in (".csv", ".json"):
            out = out.with_suffix("")
        args.output = str(out)
    try:
        args.func(args)
    except ResourceLimitError as exc:
        print(f"dwell: refused: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (ConfigError, ValueError, KeyError, WindowError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"dwell: error: {msg}", file=sys.stderr)
        return EXIT_CONFIG
    return 0


if __name__ == "__main__":
    sys.exit(main())
