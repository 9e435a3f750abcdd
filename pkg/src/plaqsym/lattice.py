"""Lattice geometry, disorder sampling and parity-check assembly.

Sites are labelled ``s = tau * L + i`` with ``i`` the periodic horizontal
coordinate and ``tau`` the layer (vertical / time) coordinate.

Every site carries one coin flip: plaquette with probability ``p``, single-site
term otherwise. Which spins a term touches depends on the model:

* RTPM terms are indexed by their head site ``(i, t)``. A plaquette couples
  ``(i, t)``, ``(i, t-1)`` and ``(i+1, t-1)``, so the head is fixed by the
  previous layer as ``x[i,t] = x[i,t-1] + x[i+1,t-1]``; a single-site term pins
  the head, ``x[i,t] = 0``.
* RXPM terms are indexed by their center ``(i, t)``. A plaquette couples the
  center and its four neighbours; a single-site term pins the center.

On a cylinder the vertical direction is open and every term whose support
would leave the lattice is dropped. That leaves heads in layers ``1..L_tau-1``
(RTPM) and centers in layers ``1..L_tau-2`` (RXPM), i.e. one resp. two free
layers at the top. Fixed boundaries add a single-site row for every spin of
the fixed layer.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .gf2 import BinMatrix

MODELS = ("rtpm", "rxpm")
TOPOLOGIES = ("torus", "cylinder")
BOUNDARY_KINDS = ("free", "fixed")

#: anisotropy exponent used for RTPM tori (L x L**z)
RTPM_Z = 1.697


@dataclass(frozen=True)
class LatticeGeometry:
    L: int
    L_tau: int
    topology: str = "torus"
    model: str = "rtpm"

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}; expected one of {MODELS}")
        if self.topology not in TOPOLOGIES:
            raise ValueError(f"unknown topology {self.topology!r}; expected one of {TOPOLOGIES}")
        if self.L < 2 or self.L_tau < 2:
            raise ValueError(f"lattice {self.L}x{self.L_tau} too small (need L, L_tau >= 2)")
        if self.model == "rxpm" and self.topology == "cylinder" and self.L_tau < 3:
            raise ValueError("RXPM cylinder needs L_tau >= 3 (two free layers plus bulk)")

    @classmethod
    def anisotropic(cls, L: int, z: float = RTPM_Z, topology: str = "torus", model: str = "rtpm"):
        """``L x round(L**z)`` lattice."""
        return cls(L, int(round(L**z)), topology, model)

    @property
    def n_sites(self) -> int:
        return self.L * self.L_tau

    @property
    def free_depth(self) -> int:
        """Number of layers forming one free boundary (1 for RTPM, 2 for RXPM)."""
        return 1 if self.model == "rtpm" else 2

    def site(self, i, t):
        return np.asarray(t) % self.L_tau * self.L + np.asarray(i) % self.L

    def coords(self, s):
        s = np.asarray(s)
        return s % self.L, s // self.L

    def term_layers(self) -> range:
        if self.topology == "torus":
            return range(self.L_tau)
        if self.model == "rtpm":
            return range(1, self.L_tau)
        return range(1, self.L_tau - 1)

    def term_sites(self) -> np.ndarray:
        layers = self.term_layers()
        return np.arange(layers.start * self.L, layers.stop * self.L)

    def layer_sites(self, *layers: int) -> np.ndarray:
        return np.concatenate([np.arange(t * self.L, (t + 1) * self.L) for t in layers]) if layers else np.array([], int)

    def top_boundary(self) -> np.ndarray:
        return self.layer_sites(*range(self.free_depth))

    def bottom_boundary(self) -> np.ndarray:
        return self.layer_sites(*range(self.L_tau - self.free_depth, self.L_tau))


@dataclass(frozen=True)
class BoundaryCondition:
    top: str = "free"
    bottom: str = "free"

    def __post_init__(self):
        for side in (self.top, self.bottom):
            if side not in BOUNDARY_KINDS:
                raise ValueError(f"unknown boundary kind {side!r}")


@dataclass(frozen=True)
class DisorderRealization:
    geometry: LatticeGeometry
    bc: BoundaryCondition | None
    p: float
    seed: int
    plaquette: np.ndarray = field(repr=False, compare=False)

    def __eq__(self, other):
        if not isinstance(other, DisorderRealization):
            return NotImplemented
        return (self.geometry, self.bc, self.p, self.seed) == (other.geometry, other.bc, other.p, other.seed) and np.array_equal(
            self.plaquette, other.plaquette
        )

    __hash__ = None

    def layer(self, t: int) -> np.ndarray:
        """Plaquette mask (length L) of the terms anchored in layer ``t``."""
        L = self.geometry.L
        return self.plaquette[t * L : (t + 1) * L]

    def to_record(self) -> str:
        """Replay record; see `realization_from_record`."""
        g = self.geometry
        bc = self.bc or BoundaryCondition()
        head = [
            f"model={g.model}",
            f"L={g.L}",
            f"Ltau={g.L_tau}",
            f"topology={g.topology}",
            f"top={bc.top if self.bc else '-'}",
            f"bottom={bc.bottom if self.bc else '-'}",
            f"p={self.p!r}",
            f"seed={self.seed}",
            "terms:",
        ]
        grid = self.plaquette.reshape(g.L_tau, g.L)
        return "\n".join(head + ["".join("1" if b else "0" for b in row) for row in grid]) + "\n"


def realization_from_record(text: str) -> DisorderRealization:
    """Parse the text written by `DisorderRealization.to_record`.

    The format is ``key=value`` lines (model, L, Ltau, topology, top, bottom,
    p, seed) followed by ``terms:`` and L_tau rows of L characters, ``1`` for a
    plaquette and ``0`` for a single-site term. ``top``/``bottom`` are ``-``
    on a torus.
    """
    lines = text.strip().splitlines()
    meta = {}
    k = 0
    while lines[k].strip() != "terms:":
        key, _, value = lines[k].partition("=")
        meta[key.strip()] = value.strip()
        k += 1
    geom = LatticeGeometry(int(meta["L"]), int(meta["Ltau"]), meta["topology"], meta["model"])
    bc = None if meta["top"] == "-" else BoundaryCondition(meta["top"], meta["bottom"])
    rows = [ln.strip() for ln in lines[k + 1 :] if ln.strip()]
    grid = np.array([[ch == "1" for ch in row] for row in rows], dtype=bool)
    if grid.shape != (geom.L_tau, geom.L):
        raise ValueError(f"term grid has shape {grid.shape}, expected {(geom.L_tau, geom.L)}")
    plaq = grid.reshape(-1)
    plaq.setflags(write=False)
    return DisorderRealization(geom, bc, float(meta["p"]), int(meta["seed"]), plaq)


def sample_terms(n: int, p: float, seed: int) -> np.ndarray:
    """Plaquette mask for ``n`` sites; site k's flip is the k-th draw of a Philox stream keyed by seed."""
    rng = np.random.Generator(np.random.Philox(key=int(seed) % 2**64))
    return rng.random(n) < p


def build_realization(geometry: LatticeGeometry, bc: BoundaryCondition | None = None, p: float = 1.0, seed: int = 0):
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p={p} outside [0, 1]")
    if geometry.topology == "torus":
        if bc is not None:
            raise ValueError("a torus carries no boundary condition")
    elif bc is None:
        bc = BoundaryCondition()
    plaq = sample_terms(geometry.n_sites, p, seed)
    plaq.setflags(write=False)
    return DisorderRealization(geometry, bc, float(p), int(seed), plaq)


def term_support(geometry: LatticeGeometry, site: int, plaquette: bool) -> list[int]:
    """Sites touched by the term anchored at ``site`` (with repetitions, if the lattice is tiny)."""
    i, t = (int(v) for v in geometry.coords(site))
    if not plaquette:
        return [int(site)]
    g = geometry
    if g.model == "rtpm":
        pts = [(i, t), (i, t - 1), (i + 1, t - 1)]
    else:
        pts = [(i, t), (i - 1, t), (i + 1, t), (i, t - 1), (i, t + 1)]
    return [int(g.site(a, b)) for a, b in pts]


def parity_rows(r: DisorderRealization) -> list[list[int]]:
    """Support of every parity row, in assembly order."""
    g = r.geometry
    rows = [term_support(g, s, bool(r.plaquette[s])) for s in g.term_sites()]
    if r.bc is not None:
        if r.bc.top == "fixed":
            rows += [[int(s)] for s in g.layer_sites(0)]
        if r.bc.bottom == "fixed":
            rows += [[int(s)] for s in g.layer_sites(g.L_tau - 1)]
    return rows


def assemble_parity_matrix(r: DisorderRealization) -> BinMatrix:
    """Parity-check matrix P with one row per constraint.

    Term rows come first in order of their anchor site, followed by the
    fixed-layer rows (top layer, then bottom layer). Repeated sites cancel
    mod 2, as sigma**2 = 1.
    """
    g = r.geometry
    anchors = g.term_sites()
    i, t = g.coords(anchors)
    plaq = r.plaquette[anchors]
    offsets = [(0, 0), (0, -1), (1, -1)] if g.model == "rtpm" else [(0, 0), (-1, 0), (1, 0), (0, -1), (0, 1)]
    k = np.arange(anchors.size)
    row_idx = [k]
    col_idx = [anchors]
    for di, dt in offsets[1:]:
        row_idx.append(k[plaq])
        col_idx.append(g.site(i[plaq] + di, t[plaq] + dt))
    n_rows = anchors.size
    if r.bc is not None:
        for side, layer in ((r.bc.top, 0), (r.bc.bottom, g.L_tau - 1)):
            if side == "fixed":
                row_idx.append(n_rows + np.arange(g.L))
                col_idx.append(g.layer_sites(layer))
                n_rows += g.L
    rows = np.concatenate(row_idx)
    cols = np.concatenate(col_idx).astype(np.uint64)
    words = np.zeros((n_rows, (g.n_sites + 63) // 64), dtype=np.uint64)
    np.bitwise_xor.at(words, (rows, (cols >> np.uint64(6)).astype(np.int64)), np.uint64(1) << (cols & np.uint64(63)))
    return BinMatrix(words, g.n_sites)


@dataclass(frozen=True)
class Region:
    name: str
    sites: np.ndarray = field(compare=False)

    def __len__(self):
        return int(self.sites.size)


def _columns(geometry: LatticeGeometry, x1: int, x2: int) -> np.ndarray:
    return np.arange(x1, x2) % geometry.L


def named_region(geometry: LatticeGeometry, kind: str, *args) -> Region | tuple[Region, Region]:
    """Site sets used by the analyzers.

    kinds:
      ``vertical_strip(L_A)``     columns ``[0, L_A)`` over all layers
      ``antipodal_pair(width)``   two vertical strips of ``width`` columns, L/2 apart;
                                  returns ``(A, B)``
      ``boundary_top``, ``boundary_bottom``
                                  the free boundary layers (1 for RTPM, 2 for RXPM)
      ``boundary_segment(x1, x2)`` top-boundary sites in columns ``[x1, x2)`` (mod L)
      ``boundary_half``           ``boundary_segment(0, L // 2)``
      ``boundary_antipodal(width)`` two top-boundary segments of ``width`` columns,
                                  L/2 apart; returns ``(A, B)``
    """
    g = geometry
    L = g.L
    if kind == "vertical_strip":
        (la,) = args
        if not 0 <= la <= L:
            raise ValueError(f"strip width {la} exceeds L={L}")
        cols = np.arange(la)
        sites = (np.arange(g.L_tau)[:, None] * L + cols[None, :]).reshape(-1)
        return Region(f"strip{la}", np.sort(sites))
    if kind == "antipodal_pair":
        (width,) = args
        if not 1 <= width <= L // 2:
            raise ValueError(f"antipodal strips of width {width} do not fit in L={L}")
        out = []
        for name, x0 in (("A", 0), ("B", L // 2)):
            cols = _columns(g, x0, x0 + width)
            sites = (np.arange(g.L_tau)[:, None] * L + cols[None, :]).reshape(-1)
            out.append(Region(name, np.sort(sites)))
        return tuple(out)
    if g.topology != "cylinder" and kind.startswith("boundary"):
        raise ValueError("boundary regions need a cylinder")
    if kind == "boundary_top":
        return Region("top", g.top_boundary())
    if kind == "boundary_bottom":
        return Region("bottom", g.bottom_boundary())
    if kind == "boundary_segment":
        x1, x2 = args
        if not (0 <= x2 - x1 <= L):
            raise ValueError(f"segment [{x1}, {x2}) exceeds L={L}")
        return Region(f"seg[{x1},{x2})", _boundary_cols(g, _columns(g, x1, x2)))
    if kind == "boundary_half":
        return Region("half", _boundary_cols(g, np.arange(L // 2)))
    if kind == "boundary_antipodal":
        (width,) = args
        if not 1 <= width <= L // 2:
            raise ValueError(f"segments of width {width} do not fit in L={L}")
        return (
            Region("A", _boundary_cols(g, _columns(g, 0, width))),
            Region("B", _boundary_cols(g, _columns(g, L // 2, L // 2 + width))),
        )
    raise ValueError(f"unknown region kind {kind!r}")


def _boundary_cols(g: LatticeGeometry, cols: np.ndarray) -> np.ndarray:
    return np.sort((np.arange(g.free_depth)[:, None] * g.L + cols[None, :]).reshape(-1))
