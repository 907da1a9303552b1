"""Number-conserving Fock bases for the double-well models.

States are occupation triples ``(n_left, n_right, n_mol)`` with
``n_left + n_right + 2 * n_mol == N``.  The canonical order is descending
``n_mol`` and, inside each molecular block, descending ``n_left``.  Parity
sectors keep the same order restricted to representatives with
``n_left >= n_right``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple

import numpy as np


class Model(str, enum.Enum):
    ATOMS = "atoms"
    MIXTURE = "mixture"

    @classmethod
    def parse(cls, value) -> "Model":
        if isinstance(value, cls):
            return value
        aliases = {"atoms": cls.ATOMS, "atomsonly": cls.ATOMS,
                   "mixture": cls.MIXTURE, "atomsmolecule": cls.MIXTURE}
        try:
            return aliases[str(value).lower().replace("_", "").replace("-", "")]
        except KeyError:
            raise ValueError(f"unknown model {value!r} (expected 'atoms' or 'mixture')") from None


class Parity(str, enum.Enum):
    EVEN = "even"
    ODD = "odd"

    @property
    def sign(self) -> int:
        return 1 if self is Parity.EVEN else -1

    @classmethod
    def parse(cls, value) -> "Parity":
        if isinstance(value, cls):
            return value
        return cls(str(value).lower())


class FockState(NamedTuple):
    n_left: int
    n_right: int
    n_mol: int = 0


def apply_parity(s: FockState) -> FockState:
    """Exchange the two wells."""
    return FockState(s.n_right, s.n_left, s.n_mol)


def basis_dimension(n: int, model: Model) -> int:
    model = Model.parse(model)
    if model is Model.ATOMS:
        return n + 1
    return sum(n - 2 * m + 1 for m in range(n // 2 + 1))


def sector_dimensions(n: int, model: Model) -> tuple[int, int]:
    """(even, odd) dimensions without building the basis."""
    model = Model.parse(model)
    mols = range(n // 2 + 1) if model is Model.MIXTURE else (0,)
    even = sum((n - 2 * m) // 2 + 1 for m in mols)
    odd = sum((n - 2 * m + 1) // 2 for m in mols)
    return even, odd


def _mol_range(n: int, model: Model) -> list[int]:
    return list(range(n // 2, -1, -1)) if model is Model.MIXTURE else [0]


@dataclass(frozen=True)
class _Layout:
    """Block structure shared by full and sector bases.

    ``offsets[m]`` is the position of the first state with ``n_mol == m``;
    inside a block the position is ``A - n_left`` with ``A = N - 2m``.
    """

    n: int
    model: Model
    parity: Parity | None
    offsets: np.ndarray = field(repr=False)
    dim: int

    @classmethod
    def build(cls, n: int, model: Model, parity: Parity | None) -> "_Layout":
        offsets = np.zeros(n // 2 + 1, dtype=np.int64)
        pos = 0
        for m in _mol_range(n, model):
            offsets[m] = pos
            a = n - 2 * m
            if parity is None:
                size = a + 1
            elif parity is Parity.EVEN:
                size = a // 2 + 1
            else:
                size = (a + 1) // 2
            pos += size
        return cls(n, model, parity, offsets, pos)

    def lowest_left(self, a: int) -> int:
        if self.parity is None:
            return 0
        if self.parity is Parity.EVEN:
            return (a + 1) // 2
        return a // 2 + 1


class _BasisBase:
    n: int
    model: Model
    _layout: _Layout

    @cached_property
    def states(self) -> tuple[FockState, ...]:
        out = []
        for m in _mol_range(self.n, self.model):
            a = self.n - 2 * m
            for nl in range(a, self._layout.lowest_left(a) - 1, -1):
                out.append(FockState(nl, a - nl, m))
        return tuple(out)

    @cached_property
    def occupations(self) -> np.ndarray:
        """Integer array of shape (dim, 3): columns n_left, n_right, n_mol."""
        if not self.states:
            return np.zeros((0, 3), dtype=np.int64)
        return np.array(self.states, dtype=np.int64)

    @property
    def dim(self) -> int:
        return self._layout.dim

    def __len__(self) -> int:
        return self.dim

    def index(self, s: FockState) -> int:
        """Position of ``s`` in the basis; KeyError when absent."""
        nl, nr, m = s
        a = nl + nr
        if (min(nl, nr, m) < 0 or a + 2 * m != self.n
                or (self.model is Model.ATOMS and m != 0)
                or nl < self._layout.lowest_left(a)):
            raise KeyError(s)
        return int(self._layout.offsets[m] + (a - nl))

    def __contains__(self, s) -> bool:
        try:
            self.index(FockState(*s))
        except KeyError:
            return False
        return True


class FullBasis(_BasisBase):
    """All states with total number ``n`` (molecules count twice)."""

    parity = None

    def __init__(self, n: int, model: Model):
        if n < 0:
            raise ValueError("particle number must be non-negative")
        self.n = int(n)
        self.model = Model.parse(model)
        self._layout = _Layout.build(self.n, self.model, None)

    def __repr__(self) -> str:
        return f"FullBasis(n={self.n}, model={self.model.value}, dim={self.dim})"


class SectorBasis(_BasisBase):
    """Parity-symmetrized basis.

    Each entry of ``states`` is the representative ``|l, r, m>`` with
    ``l >= r`` of the normalized combination ``(|l,r,m> +- |r,l,m>)/sqrt(2)``.
    Self-symmetric states (``l == r``) only occur in the even sector and are
    used as they are.
    """

    def __init__(self, n: int, model: Model, parity: Parity):
        if n < 0:
            raise ValueError("particle number must be non-negative")
        self.n = int(n)
        self.model = Model.parse(model)
        self.parity = Parity.parse(parity)
        self._layout = _Layout.build(self.n, self.model, self.parity)

    @cached_property
    def self_symmetric(self) -> np.ndarray:
        occ = self.occupations
        return occ[:, 0] == occ[:, 1]

    def to_full(self, vectors: np.ndarray, full: FullBasis | None = None) -> np.ndarray:
        """Expand sector coefficient vectors (columns) into the full basis."""
        full = full or FullBasis(self.n, self.model)
        vectors = np.asarray(vectors)
        squeeze = vectors.ndim == 1
        v = vectors.reshape(self.dim, -1)
        out = np.zeros((full.dim, v.shape[1]), dtype=v.dtype)
        occ = self.occupations
        rows = np.array([full.index(FockState(*s)) for s in occ], dtype=np.int64)
        mirror = np.array([full.index(FockState(s[1], s[0], s[2])) for s in occ], dtype=np.int64)
        selfsym = self.self_symmetric
        pair = ~selfsym
        out[rows[selfsym]] = v[selfsym]
        out[rows[pair]] = v[pair] / np.sqrt(2.0)
        out[mirror[pair]] += self.parity.sign * v[pair] / np.sqrt(2.0)
        return out[:, 0] if squeeze else out

    def __repr__(self) -> str:
        return (f"SectorBasis(n={self.n}, model={self.model.value}, "
                f"parity={self.parity.value}, dim={self.dim})")


def build_basis(n: int, model: Model) -> FullBasis:
    return FullBasis(n, model)


def split_parity(basis: FullBasis) -> tuple[SectorBasis, SectorBasis]:
    return (SectorBasis(basis.n, basis.model, Parity.EVEN),
            SectorBasis(basis.n, basis.model, Parity.ODD))
