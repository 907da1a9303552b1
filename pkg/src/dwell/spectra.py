"""Eigenspectra of :class:`~dwell.hamiltonian.SymMatrix` and parity merging.

The solver is picked from the matrix structure: tridiagonal LAPACK for the
atoms-only dimer, banded LAPACK for the molecular model in canonical order,
dense ``eigh`` otherwise, and Lanczos for a few low levels of large
matrices.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse.linalg as spla

from .fock import FullBasis, Model, Parity, SectorBasis, sector_dimensions
from .hamiltonian import ModelParams, SymMatrix, build_hamiltonian

DEFAULT_MAX_DIM = 30000
_DENSE_LOWEST_MAX = 2000


class ResourceLimitError(RuntimeError):
    def __init__(self, dim: int, cap: int):
        super().__init__(f"matrix dimension {dim} exceeds the full-diagonalization cap {cap}; "
                         "pass allow_large/--allow-large to proceed")
        self.dim = dim
        self.cap = cap


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Ascending eigenvalues (total energy) with optional vectors and parity labels."""

    energies: np.ndarray
    n_particles: int
    vectors: np.ndarray | None = field(default=None, repr=False)
    labels: np.ndarray | None = None

    def __post_init__(self):
        e = np.asarray(self.energies, dtype=float)
        if e.size > 1 and np.any(np.diff(e) < 0):
            raise ValueError("energies must be sorted")
        object.__setattr__(self, "energies", e)
        if self.labels is not None:
            object.__setattr__(self, "labels", np.asarray(self.labels, dtype="<U4"))

    def __len__(self) -> int:
        return self.energies.size

    @property
    def per_particle(self) -> np.ndarray:
        return self.energies / max(self.n_particles, 1)

    def head(self, k: int) -> "Spectrum":
        return Spectrum(self.energies[:k], self.n_particles,
                        None if self.vectors is None else self.vectors[:, :k],
                        None if self.labels is None else self.labels[:k])

    def with_label(self, label: str) -> "Spectrum":
        return Spectrum(self.energies, self.n_particles, self.vectors,
                        np.full(self.energies.size, label))


def _check(m: SymMatrix):
    if m.dim < 1:
        raise ValueError("empty matrix")
    if not np.all(np.isfinite(m.vals)):
        raise ValueError("matrix has non-finite entries")


def _tridiagonal(m: SymMatrix):
    d = m.diagonal()
    e = np.zeros(max(m.dim - 1, 0))
    off = m.cols == m.rows + 1
    e[m.rows[off]] = m.vals[off]
    return d, e


def full_spectrum(m: SymMatrix, want_vectors: bool = False, n_particles: int = 0,
                  max_dim: int = DEFAULT_MAX_DIM, allow_large: bool = False) -> Spectrum:
    """All eigenvalues (and optionally orthonormal eigenvectors)."""
    _check(m)
    if m.dim > max_dim and not allow_large:
        raise ResourceLimitError(m.dim, max_dim)
    b = m.bandwidth
    if m.dim == 1:
        w = m.diagonal()
        v = np.ones((1, 1)) if want_vectors else None
    elif b <= 1:
        d, e = _tridiagonal(m)
        if want_vectors:
            w, v = sla.eigh_tridiagonal(d, e)
        else:
            w, v = sla.eigh_tridiagonal(d, e, eigvals_only=True), None
    elif m.dim > 400 and 4 * b < m.dim:
        res = sla.eig_banded(m.to_banded(), lower=False, eigvals_only=not want_vectors,
                             overwrite_a_band=True, check_finite=False)
        w, v = (res, None) if not want_vectors else res
    else:
        dense = m.to_dense()
        if want_vectors:
            w, v = sla.eigh(dense, overwrite_a=True, check_finite=False)
        else:
            w, v = sla.eigh(dense, eigvals_only=True, overwrite_a=True, check_finite=False), None
    return Spectrum(np.asarray(w), n_particles, v)


def lowest_k(m: SymMatrix, k: int, want_vectors: bool = False, n_particles: int = 0) -> Spectrum:
    """The ``k`` smallest eigenvalues."""
    _check(m)
    if not 1 <= k <= m.dim:
        raise ValueError(f"k={k} outside [1, {m.dim}]")
    if k == m.dim or m.dim <= 64:
        return full_spectrum(m, want_vectors, n_particles, allow_large=True).head(k)
    if m.bandwidth <= 1:
        d, e = _tridiagonal(m)
        if want_vectors:
            w, v = sla.eigh_tridiagonal(d, e, select="i", select_range=(0, k - 1))
        else:
            w = sla.eigh_tridiagonal(d, e, eigvals_only=True, select="i",
                                     select_range=(0, k - 1))
            v = None
        return Spectrum(w, n_particles, v)
    if m.dim <= _DENSE_LOWEST_MAX:
        res = sla.eigh(m.to_dense(), subset_by_index=(0, k - 1), eigvals_only=not want_vectors)
        w, v = (res, None) if not want_vectors else res
        return Spectrum(w, n_particles, v)
    ncv = min(m.dim, max(2 * k + 1, 24))
    v0 = np.ones(m.dim) / np.sqrt(m.dim)
    w, v = spla.eigsh(m.to_sparse(), k=k, which="SA", tol=0, ncv=ncv, v0=v0)
    order = np.argsort(w)
    w = w[order]
    return Spectrum(w, n_particles, v[:, order] if want_vectors else None)


_PARITY_RANK = {"even": 0, "odd": 1}


def merge_sectors(even: Spectrum, odd: Spectrum) -> Spectrum:
    """Interleave two parity-labelled spectra; ties put even levels first."""
    if even.n_particles != odd.n_particles:
        raise ValueError("cannot merge spectra of different particle number")
    e = even if even.labels is not None else even.with_label(Parity.EVEN.value)
    o = odd if odd.labels is not None else odd.with_label(Parity.ODD.value)
    energies = np.concatenate([e.energies, o.energies])
    labels = np.concatenate([e.labels, o.labels])
    rank = np.array([_PARITY_RANK.get(x, 2) for x in labels], dtype=int)
    order = np.lexsort((rank, energies))
    return Spectrum(energies[order], even.n_particles, None, labels[order])


def sector_spectra(n: int, model: Model, p: ModelParams, want_vectors: bool = False,
                   k: int | None = None, max_dim: int = DEFAULT_MAX_DIM,
                   allow_large: bool = False) -> tuple[Spectrum, Spectrum]:
    """Even and odd spectra of the model Hamiltonian at particle number ``n``."""
    model = Model.parse(model)
    out = []
    for parity in (Parity.EVEN, Parity.ODD):
        basis = SectorBasis(n, model, parity)
        if basis.dim == 0:
            out.append(Spectrum(np.zeros(0), n, None, np.zeros(0, dtype="<U4")))
            continue
        if n == 0:
            # the vacuum carries no interaction or hopping energy
            out.append(Spectrum(np.zeros(1), 0, np.ones((1, 1)) if want_vectors else None,
                                np.array([parity.value])))
            continue
        h = build_hamiltonian(basis, p)
        if k is None:
            s = full_spectrum(h, want_vectors, n, max_dim=max_dim, allow_large=allow_large)
        else:
            s = lowest_k(h, min(k, basis.dim), want_vectors, n)
        out.append(s.with_label(parity.value) if s.vectors is None
                   else Spectrum(s.energies, n, s.vectors, np.full(len(s), parity.value)))
    return out[0], out[1]


def merged_spectrum(n: int, model: Model, p: ModelParams, k: int | None = None,
                    **kwargs) -> Spectrum:
    even, odd = sector_spectra(n, model, p, k=k, **kwargs)
    merged = merge_sectors(even, odd)
    return merged if k is None else merged.head(k)


def full_basis_spectrum(n: int, model: Model, p: ModelParams, want_vectors: bool = False,
                        **kwargs) -> Spectrum:
    """Spectrum of the unsymmetrized Hamiltonian (no parity labels)."""
    basis = FullBasis(n, model)
    return full_spectrum(build_hamiltonian(basis, p), want_vectors, n, **kwargs)


def sector_dims(n: int, model: Model) -> tuple[int, int]:
    return sector_dimensions(n, Model.parse(model))
