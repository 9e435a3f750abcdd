"""Spin-flip symmetry group of a parity-check matrix and its entropies.

All entropies are exact integers in bits (ranks over GF(2)).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import gf2
from .gf2 import BinMatrix


@dataclass(frozen=True)
class SymmetryTableau:
    """Generators of a symmetry group as the columns of ``t``.

    Row ``k`` of ``t`` belongs to lattice site ``sites[k]``; the tableau may
    cover only part of the lattice (e.g. a boundary).
    """

    t: BinMatrix
    sites: np.ndarray = field(compare=False)

    def __post_init__(self):
        if self.t.rows != len(self.sites):
            raise ValueError("one site label per tableau row required")

    @property
    def n_generators(self) -> int:
        return self.t.cols

    @cached_property
    def generators(self) -> BinMatrix:
        """Generators as rows (``t`` transposed); region ranks restrict its columns."""
        return self.t.T

    @cached_property
    def _row_of(self) -> np.ndarray:
        size = int(self.sites.max()) + 1 if len(self.sites) else 0
        pos = np.full(size, -1, dtype=np.int64)
        pos[self.sites] = np.arange(len(self.sites))
        return pos

    def rows_for(self, region) -> np.ndarray:
        sites = _sites(region)
        pos = self._row_of
        if sites.size and pos.size == 0:
            raise ValueError("tableau covers no sites")
        bad =(sites < 0) | (sites >= pos.size)
        rows = np.where(bad, -1, pos[np.where(bad, 0, sites)]) if sites.size else sites
        if np.any(rows < 0):
            raise ValueError(f"site {int(sites[np.argmax(rows < 0)])} is not covered by this tableau")
        return rows

    def rank_on(self, region) -> int:
        return gf2.restricted_rank(self.generators, self.rows_for(region))

    @cached_property
    def total_rank(self) -> int:
        return gf2.rank(self.t)

    def complement(self, region) -> np.ndarray:
        return np.setdiff1d(self.sites, _sites(region))


def _sites(region) -> np.ndarray:
    sites = getattr(region, "sites", region)
    return np.asarray(sites, dtype=np.int64).reshape(-1)


def solve_symmetry_group(p: BinMatrix) -> SymmetryTableau:
    """Solve P T = 0: the columns of T generate every spin-flip symmetry."""
    return SymmetryTableau(gf2.nullspace(p), np.arange(p.cols))


def config_entropy(t: SymmetryTableau) -> int:
    """log2 of the ground-state degeneracy, i.e. the rank of T."""
    return t.total_rank


def sym_entropy(t: SymmetryTableau, region) -> int:
    """rank T_A + rank T_Abar - rank T; the complement is taken within ``t.sites``."""
    a = _sites(region)
    return t.rank_on(a) + t.rank_on(t.complement(a)) - t.total_rank


def sym_mutual_info_cond(t: SymmetryTableau, a, b) -> int:
    """rank T_A + rank T_B - rank T_AB for disjoint A and B."""
    a, b = _sites(a), _sites(b)
    if np.intersect1d(a, b).size:
        raise ValueError("regions A and B overlap")
    return t.rank_on(a) + t.rank_on(b) - t.rank_on(np.concatenate([a, b]))


def boundary_tableau(t: SymmetryTableau, boundary) -> tuple[SymmetryTableau, int]:
    """Restrict T to the boundary rows; returns the restriction and log|G_bd| = its rank."""
    rows = t.rows_for(boundary)
    bd = SymmetryTableau(t.t.take_rows(rows), t.sites[rows])
    return bd, bd.total_rank


def boundary_sym_entropy(t_bd: SymmetryTableau, region) -> int:
    return sym_entropy(t_bd, region)


def boundary_mutual_info(t_bd: SymmetryTableau, a, b) -> int:
    """symS_A + symS_B - symS_AB on the boundary, A and B disjoint."""
    a, b = _sites(a), _sites(b)
    if np.intersect1d(a, b).size:
        raise ValueError("regions A and B overlap")
    ab = np.concatenate([a, b])
    return sym_entropy(t_bd, a) + sym_entropy(t_bd, b) - sym_entropy(t_bd, ab)


def top_bottom_mutual_info(t: SymmetryTableau, top, bottom) -> int:
    """Symmetries connecting the two boundaries: rank T_top + rank T_bot - rank T_bd."""
    top, bottom = _sites(top), _sites(bottom)
    if top.size == 0 or bottom.size == 0:
        raise ValueError("both boundaries must be nonempty")
    if np.intersect1d(top, bottom).size:
        raise ValueError("top and bottom boundaries overlap; the cylinder is too short")
    return t.rank_on(top) + t.rank_on(bottom) - t.rank_on(np.concatenate([top, bottom]))


def operator_size(t: SymmetryTableau, rng: np.random.Generator, n_samples: int = 100) -> float:
    """Mean Hamming weight over N of uniformly sampled non-identity group elements."""
    if t.n_generators == 0 or t.total_rank == 0:
        raise ValueError("trivial group: no non-identity symmetry to sample")
    weights = [gf2.random_combination(t.t, rng).sum() for _ in range(n_samples)]
    return float(np.mean(weights)) / t.t.rows


def snapshot_grid(t: SymmetryTableau, L: int, L_tau: int, rng: np.random.Generator | None = None, bulk=None) -> str:
    """Text picture of one sampled operator on an ``L_tau x L`` grid.

    ``B`` marks the sampled operator, ``O`` support of ``bulk`` (an optional
    second tableau), ``G`` the union support of all generators, ``.`` nothing.
    Sites not covered by the tableau are ``.``.
    """
    grid = np.full(L * L_tau, ".", dtype="<U1")
    dense = t.t.to_dense()
    union = dense.any(axis=1)
    grid[t.sites[union]] = "G"
    if bulk is not None:
        bd = bulk.t.to_dense().any(axis=1)
        grid[bulk.sites[bd]] = "O"
    if rng is not None and t.total_rank:
        op = gf2.random_combination(t.t, rng).astype(bool)
        grid[t.sites[op]] = "B"
    return "\n".join("".join(row) for row in grid.reshape(L_tau, L)) + "\n"
