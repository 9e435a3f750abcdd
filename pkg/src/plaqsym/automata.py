"""Boundary symmetry generators evolved layer by layer as 1+1D automata.

RTPM: probabilistic automaton. A plaquette head applies
``x[i] <- x[i] + x[i+1]`` (rule 18), a single-site term forces ``x[i] <- 0``.

RXPM: second-order automaton with impurities. A plaquette center applies
``x_next[i] = x_prev[i] + x[i-1] + x[i] + x[i+1]``; a single-site term at
``(i, tau)`` demands ``x[i] = 0`` on layer ``tau`` and frees the spin at
``(i, tau + 1)``.

Each generator is one row of a boolean matrix laid out as
``[initial layers | previous layer (RXPM only) | current layer]``, so the
linear algebra on generators is a row XOR. The initial block records the
generator's support on the free top boundary (the rows of T0).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import gf2
from ._kernels import eliminate
from .gf2 import BinMatrix, _pack, _unpack
from .lattice import BoundaryCondition, DisorderRealization, LatticeGeometry, build_realization
from .symmetry import SymmetryTableau


@dataclass(frozen=True)
class CaGeneratorState:
    model: str
    L: int
    tau: int
    data: np.ndarray = field(repr=False)
    impurities: tuple[tuple[int, int], ...] = ()
    frozen: np.ndarray | None = field(default=None, repr=False)

    @property
    def n_init(self) -> int:
        return self.L if self.model == "rtpm" else 2 * self.L

    @property
    def n_generators(self) -> int:
        return self.data.shape[0]

    @property
    def init(self) -> np.ndarray:
        return self.data[:, : self.n_init]

    @property
    def cur(self) -> np.ndarray:
        return self.data[:, -self.L :]

    @property
    def prev(self) -> np.ndarray:
        if self.model != "rxpm":
            raise AttributeError("RTPM generators store a single layer")
        return self.data[:, self.n_init : self.n_init + self.L]

    @property
    def layers(self) -> np.ndarray:
        """The dynamic block: ``[prev | cur]`` for RXPM, ``cur`` for RTPM."""
        return self.data[:, self.n_init :]


def initial_state(model: str, L: int) -> CaGeneratorState:
    """Free top boundary: T0 = I_L (RTPM) or G1 = <X_{i,0}, X_{i,1}> (RXPM)."""
    if model == "rtpm":
        eye = np.eye(L, dtype=bool)
        return CaGeneratorState("rtpm", L, 0, np.hstack([eye, eye]))
    if model == "rxpm":
        eye = np.eye(2 * L, dtype=bool)
        return CaGeneratorState("rxpm", L, 1, np.hstack([eye, eye]))
    raise ValueError(f"unknown model {model!r}")


def _layer(L: int, p: float, rng, layer) -> np.ndarray:
    if layer is not None:
        layer = np.asarray(layer, dtype=bool)
        if layer.shape != (L,):
            raise ValueError(f"disorder layer must have length {L}")
        return layer
    if rng is None:
        raise ValueError("need either a disorder layer or an rng")
    return rng.random(L) < p


def rule18(x: np.ndarray) -> np.ndarray:
    """x_i + x_{i+1} along the last axis (periodic)."""
    return x ^ np.roll(x, -1, axis=-1)


def second_order_update(prev: np.ndarray, cur: np.ndarray) -> np.ndarray:
    """x_prev[i] + x[i-1] + x[i] + x[i+1] (periodic). Also inverts itself: update(next, cur) == prev."""
    return prev ^ cur ^ np.roll(cur, 1, axis=-1) ^ np.roll(cur, -1, axis=-1)


def pca_step_rtpm(state: CaGeneratorState, p3: float = 1.0, rng=None, layer=None) -> CaGeneratorState:
    """Advance every generator by one layer with a shared disorder layer."""
    if state.model != "rtpm":
        raise ValueError("pca_step_rtpm needs an RTPM state")
    plaq = _layer(state.L, p3, rng, layer)
    data = state.data.copy()
    data[:, -state.L :] = rule18(state.cur) & plaq
    t = state.tau + 1
    imp = state.impurities + tuple((int(i), t) for i in np.flatnonzero(~plaq))
    return replace(state, tau=t, data=data, impurities=imp)



def cawri_step_rxpm(state: CaGeneratorState, p5: float = 1.0, rng=None, layer=None, protect: int | None = None):
    """Advance to layer ``tau + 1`` using the terms centered on layer ``tau``.

    Impurity sites are handled in ascending order: generators violating
    ``x[i] = 0`` (the set Omega2) are multiplied by the first of them, which
    is then removed. Survivors get ``x_next[i] = 0`` at impurities and one
    fresh generator ``X_{i, tau+1}`` is appended per impurity.

    ``protect`` names a row that is never picked as the removed member (used
    to follow one sampled operator through the evolution).
    """
    if state.model != "rxpm":
        raise ValueError("cawri_step_rxpm needs an RXPM state")
    L = state.L
    plaq = _layer(L, p5, rng, layer)
    data = state.data.copy()
    keep = np.ones(data.shape[0], dtype=bool)
    impurities = np.flatnonzero(~plaq)
    for i in impurities:
        violating = np.flatnonzero(keep & data[:, -L + i])
        if protect is not None:
            violating = np.concatenate([violating[violating != protect], violating[violating == protect]])
        if violating.size == 0:
            continue
        first = violating[0]
        if first == protect:
            raise RuntimeError("followed operator left the symmetry group")
        data[violating[1:]] ^= data[first]
        keep[first] = False
    if protect is not None:
        protect = int(np.count_nonzero(keep[:protect]))
    data = data[keep]
    n_init = state.n_init
    prev, cur = data[:, n_init : n_init + L], data[:, n_init + L :]
    nxt = second_order_update(prev, cur)
    nxt[:, impurities] = False
    fresh = np.zeros((impurities.size, data.shape[1]), dtype=bool)
    fresh[np.arange(impurities.size), n_init + L + impurities] = True
    out = np.hstack([data[:, :n_init], cur, nxt])
    out = np.vstack([out, fresh])
    t = state.tau
    imp = state.impurities + tuple((int(i), t) for i in impurities)
    new = replace(state, tau=t + 1, data=out, impurities=imp)
    return (new, protect) if protect is not None else new


def _compact(state: CaGeneratorState) -> CaGeneratorState:
    """Re-express the generators so the dynamic blocks are independent.

    Rows whose dynamic block vanishes can never change again; those with a
    nonzero initial block move to ``frozen``, pure bulk ones are dropped.
    The spanned space is unchanged.
    """
    n_init = state.n_init
    dyn = state.layers
    order = np.concatenate([np.arange(n_init, state.data.shape[1]), np.arange(n_init)])
    w = _pack(state.data[:, order].astype(np.uint8))
    piv = eliminate(w, order.size, False)
    n_dyn = int(np.count_nonzero(piv < dyn.shape[1]))
    reduced = _unpack(w[: piv.size], order.size).astype(bool)
    data = np.empty_like(reduced)
    data[:, order] = reduced
    live, dead = data[:n_dyn], data[n_dyn:]
    frozen = dead[:, :n_init]
    if state.frozen is not None and state.frozen.size:
        frozen = np.vstack([state.frozen, frozen])
    if frozen.shape[0] > n_init:
        frozen = gf2.row_basis(BinMatrix.from_dense(frozen)).to_dense().astype(bool)
    return replace(state, data=live, frozen=frozen)


@dataclass(frozen=True)
class DynamicBoundaryTableau:
    """Generators as rows of (T0 | T_tau).

    ``t0`` columns are the top free layers, ``t_tau`` columns the last layer
    (RTPM) or the last two layers (RXPM), in site order.
    """

    t0: BinMatrix
    t_tau: BinMatrix
    model: str
    L: int
    L_tau: int

    def __post_init__(self):
        if self.t0.rows != self.t_tau.rows:
            raise ValueError("T0 and T_tau need the same generator rows")

    @property
    def geometry(self) -> LatticeGeometry:
        return LatticeGeometry(self.L, self.L_tau, "cylinder", self.model)

    @property
    def full(self) -> BinMatrix:
        return gf2.hstack([self.t0, self.t_tau])

    def final_layer_columns(self) -> np.ndarray:
        """Columns of ``full`` that belong to the last layer."""
        n = self.t0.cols + self.t_tau.cols
        return np.arange(n - self.L, n)

    def as_symmetry_tableau(self) -> SymmetryTableau:
        """Free-free boundary tableau over top and bottom boundary sites."""
        g = self.geometry
        top, bottom = g.top_boundary(), g.bottom_boundary()
        if np.intersect1d(top, bottom).size:
            raise ValueError("top and bottom boundaries overlap; the cylinder is too short")
        return SymmetryTableau(self.full.T, np.concatenate([top, bottom]))


def boundary_at(state: CaGeneratorState, L_tau: int | None = None) -> DynamicBoundaryTableau:
    """(T0 | T_tau) of the current generators, frozen ones included."""
    L_tau = state.tau + 1 if L_tau is None else L_tau
    init, dyn = state.init, state.layers
    if state.frozen is not None and state.frozen.size:
        init = np.vstack([init, state.frozen])
        dyn = np.vstack([dyn, np.zeros((state.frozen.shape[0], dyn.shape[1]), dtype=bool)])
    return DynamicBoundaryTableau(BinMatrix.from_dense(init), BinMatrix.from_dense(dyn), state.model, state.L, L_tau)


def evolve(realization: DisorderRealization, compact: bool = True, probe_rng=None):
    """Yield the generator state after each layer, starting at the initial free layers.

    The realization must be a cylinder; its boundary conditions are ignored
    (the fixed condition is applied afterwards by `apply_fixed_boundary`).
    With ``probe_rng`` a random combination of the initial generators is
    followed along and yielded as ``(state, probe_row)``.
    """
    g = realization.geometry
    if g.topology != "cylinder":
        raise ValueError("automaton dynamics needs a cylinder realization")
    state = initial_state(g.model, g.L)
    probe = None
    if probe_rng is not None:
        coeffs = probe_rng.integers(0, 2, size=state.n_generators).astype(bool)
        coeffs[probe_rng.integers(state.n_generators)] = True
        row = np.bitwise_xor.reduce(state.data[coeffs], axis=0)
        state = replace(state, data=np.vstack([state.data, row]))
        probe = state.n_generators - 1
    yield (state, probe) if probe_rng is not None else state
    while state.tau + 1 < g.L_tau:
        if g.model == "rtpm":
            state = pca_step_rtpm(state, layer=realization.layer(state.tau + 1))
        elif probe is not None:
            state, probe = cawri_step_rxpm(state, layer=realization.layer(state.tau), protect=probe)
        else:
            state = cawri_step_rxpm(state, layer=realization.layer(state.tau))
        if compact and probe is None and state.n_generators > 2 * state.layers.shape[1]:
            state = _compact(state)
        yield (state, probe) if probe_rng is not None else state


def cylinder_realization(model: str, L: int, L_tau: int, p: float, seed: int, bc: BoundaryCondition | None = None):
    return build_realization(LatticeGeometry(L, L_tau, "cylinder", model), bc or BoundaryCondition(), p, seed)


def run_dynamics(model: str, L: int, L_tau: int, p: float, seed: int, snapshots: bool = False):
    """Evolve the free top boundary through ``L_tau`` layers.

    Returns the row-reduced (T0 | T_tau) tableau; with ``snapshots`` also a
    space-time picture (see `space_time_snapshot`).
    """
    r = cylinder_realization(model, L, L_tau, p, seed)
    if snapshots:
        return _run_with_snapshot(r, seed)
    for state in evolve(r):
        pass
    return _reduced(boundary_at(state, L_tau))


def _reduced(dt: DynamicBoundaryTableau) -> DynamicBoundaryTableau:
    basis = gf2.row_basis(dt.full).to_dense()
    n0 = dt.t0.cols
    return DynamicBoundaryTableau(
        BinMatrix.from_dense(basis[:, :n0]) if basis.size else BinMatrix.zeros(0, n0),
        BinMatrix.from_dense(basis[:, n0:]) if basis.size else BinMatrix.zeros(0, dt.t_tau.cols),
        dt.model,
        dt.L,
        dt.L_tau,
    )


def _run_with_snapshot(r: DisorderRealization, seed: int):
    g = r.geometry
    rng = np.random.default_rng([seed, 0x5A])
    grid = np.full((g.L_tau, g.L), ".", dtype="<U1")
    first = True
    for state, probe in evolve(r, probe_rng=rng):
        cur = state.cur
        bulk = ~state.init.any(axis=1)
        if probe is not None:
            bulk[probe] = False
        rows = [state.tau - 1, state.tau] if first and g.model == "rxpm" else [state.tau]
        for t in rows:
            layer = cur if t == state.tau else state.prev
            grid[t, layer.any(axis=0)] = "G"
            grid[t, layer[bulk].any(axis=0)] = "O"
            grid[t, layer[probe]] = "B"
        first = False
    data = np.delete(state.data, probe, axis=0)
    final = _reduced(boundary_at(replace(state, data=data), g.L_tau))
    return final, "\n".join("".join(row) for row in grid) + "\n"


def space_time_snapshot(model: str, L: int, L_tau: int, p: float, seed: int) -> str:
    """``L_tau`` lines of ``L`` characters.

    ``B``: support of one sampled boundary operator, ``O``: support of
    generators seeded in the bulk (no initial support), ``G``: union support
    of all generators, ``.``: empty.
    """
    return run_dynamics(model, L, L_tau, p, seed, snapshots=True)[1]


def apply_fixed_boundary(dt: DynamicBoundaryTableau) -> BinMatrix:
    """Initial-layer supports (Q1) of the generators that vanish on the final layer."""
    kept, _ = gf2.zero_block_reduce(dt.full, dt.final_layer_columns())
    return gf2.restrict_columns(kept, np.arange(dt.t0.cols))


def fixed_boundary_tableau(dt: DynamicBoundaryTableau) -> SymmetryTableau:
    """Boundary tableau of the free top when the bottom layer is fixed to sigma = +1."""
    q1 = apply_fixed_boundary(dt)
    return SymmetryTableau(q1.T, dt.geometry.top_boundary())


def rtpm_torus_config_entropy(realization: DisorderRealization) -> int:
    """S_cf of an RTPM torus from the one-period transfer matrix of the automaton.

    A symmetry is a layer ``x_0`` that returns to itself after ``L_tau``
    steps (the wrap-around layer 0 is applied last), so
    ``S_cf = dim ker(M - I)``. Costs ``O(L_tau L^2)`` instead of a full
    elimination of the parity matrix.
    """
    g = realization.geometry
    if g.model != "rtpm" or g.topology != "torus":
        raise ValueError("needs an RTPM torus realization")
    m = np.eye(g.L, dtype=bool)
    for t in [*range(1, g.L_tau), 0]:
        m = rule18_rows(m) & realization.layer(t)[:, None]
    return g.L - gf2.rank(BinMatrix.from_dense(m ^ np.eye(g.L, dtype=bool)))


def rule18_rows(m: np.ndarray) -> np.ndarray:
    """Rule 18 applied to the output index (rows) of a layer map."""
    return m ^ np.roll(m, -1, axis=0)
