"""Sparse Hamiltonians of the two-site Bose-Hubbard dimer and its
atom-molecule extension.

Matrix elements come from exact integer occupations with a single square
root per entry.  Sector matrices are assembled directly in the
parity-symmetrized basis.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from . import _kernels
from .fock import FullBasis, Model, Parity, SectorBasis


class BasisMismatchError(ValueError):
    """Raised when an operator is requested on an incompatible basis."""


@dataclass(frozen=True)
class ModelParams:
    """Couplings in units of the hopping ``J``.

    ``omega`` and ``g`` are ignored by the atoms-only model.
    """

    U: float
    J: float = 1.0
    omega: float = 0.0
    g: float = 0.0

    def __post_init__(self):
        if not self.J > 0:
            raise ValueError("J is the energy unit and must be positive")
        for name in ("U", "J", "omega", "g"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    def replace(self, **changes) -> "ModelParams":
        values = dict(U=self.U, J=self.J, omega=self.omega, g=self.g)
        values.update(changes)
        return ModelParams(**values)


@dataclass(frozen=True, eq=False)
class SymMatrix:
    """Real symmetric matrix stored as its upper triangle (row <= col)."""

    dim: int
    rows: np.ndarray
    cols: np.ndarray
    vals: np.ndarray

    @classmethod
    def from_triplets(cls, dim, rows, cols, vals) -> "SymMatrix":
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        vals = np.asarray(vals, dtype=np.float64)
        if np.any(rows > cols):
            raise ValueError("only upper-triangle entries (row <= col) may be stored")
        if not np.all(np.isfinite(vals)):
            raise ValueError("matrix entries must be finite")
        coo = sp.coo_matrix((vals, (rows, cols)), shape=(dim, dim))
        coo.sum_duplicates()
        order = np.lexsort((coo.col, coo.row))
        return cls(int(dim), coo.row[order].astype(np.int64),
                   coo.col[order].astype(np.int64), coo.data[order])

    @property
    def entries(self):
        return list(zip(self.rows.tolist(), self.cols.tolist(), self.vals.tolist()))

    @cached_property
    def bandwidth(self) -> int:
        if self.rows.size == 0:
            return 0
        return int(np.max(self.cols - self.rows))

    def diagonal(self) -> np.ndarray:
        d = np.zeros(self.dim)
        on = self.rows == self.cols
        d[self.rows[on]] = self.vals[on]
        return d

    def to_sparse(self) -> sp.csr_matrix:
        off = self.rows != self.cols
        r = np.concatenate([self.rows, self.cols[off]])
        c = np.concatenate([self.cols, self.rows[off]])
        v = np.concatenate([self.vals, self.vals[off]])
        return sp.csr_matrix((v, (r, c)), shape=(self.dim, self.dim))

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.dim, self.dim))
        out[self.rows, self.cols] = self.vals
        out[self.cols, self.rows] = self.vals
        return out

    def to_banded(self) -> np.ndarray:
        """Upper banded storage as expected by ``scipy.linalg.eig_banded``."""
        b = self.bandwidth
        ab = np.zeros((b + 1, self.dim))
        ab[b + self.rows - self.cols, self.cols] = self.vals
        return ab

    def norm(self) -> float:
        """Frobenius norm."""
        off = self.rows != self.cols
        return float(np.sqrt(np.sum(self.vals ** 2) + np.sum(self.vals[off] ** 2)))


def _mode(basis) -> int:
    if isinstance(basis, SectorBasis):
        return 1 if basis.parity is Parity.EVEN else 2
    return 0


def _assemble(basis, p: ModelParams, mixture: bool) -> SymMatrix:
    omega = p.omega if mixture else 0.0
    g = p.g if mixture else 0.0
    rows, cols, vals = _kernels.assemble(basis.n, mixture, _mode(basis), p.J, p.U,
                                         omega, g, basis._layout.offsets)
    return SymMatrix.from_triplets(basis.dim, rows, cols, vals)


def build_h1(basis: FullBasis | SectorBasis, p: ModelParams) -> SymMatrix:
    """Two-site Bose-Hubbard Hamiltonian with interaction scaled by 1/N."""
    if basis.model is not Model.ATOMS:
        raise BasisMismatchError("build_h1 needs an atoms-only basis")
    if basis.n < 1:
        raise ValueError("build_h1 needs N >= 1")
    return _assemble(basis, p, mixture=False)


def build_h2(basis: FullBasis | SectorBasis, p: ModelParams) -> SymMatrix:
    """Atom-molecule Hamiltonian: dimer plus molecular level and pair conversion."""
    if basis.model is not Model.MIXTURE:
        raise BasisMismatchError("build_h2 needs an atom-molecule basis")
    if basis.n < 1:
        raise ValueError("build_h2 needs N >= 1")
    return _assemble(basis, p, mixture=True)


def build_hamiltonian(basis: FullBasis | SectorBasis, p: ModelParams) -> SymMatrix:
    """Dispatch to :func:`build_h1` or :func:`build_h2` by the basis model."""
    if basis.model is Model.ATOMS:
        return build_h1(basis, p)
    return build_h2(basis, p)


def imbalance_matrix(basis: FullBasis) -> SymMatrix:
    """Diagonal operator n_R - n_L on a full basis."""
    if isinstance(basis, SectorBasis):
        raise BasisMismatchError("the imbalance operator does not commute with parity; "
                                 "use a full basis")
    occ = basis.occupations
    idx = np.arange(basis.dim)
    return SymMatrix.from_triplets(basis.dim, idx, idx, (occ[:, 1] - occ[:, 0]).astype(float))


def parity_matrix(basis: FullBasis) -> sp.csr_matrix:
    """Permutation matrix exchanging the wells on a full basis."""
    occ = basis.occupations
    target = [basis.index((s[1], s[0], s[2])) for s in occ]
    return sp.csr_matrix((np.ones(basis.dim), (target, np.arange(basis.dim))),
                         shape=(basis.dim, basis.dim))
