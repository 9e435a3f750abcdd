"""Binary symplectic stabilizer states, Pauli measurement and the cluster-state check.

A Pauli string on ``n`` qubits is a row ``(x | z)`` of length ``2n`` plus a
sign bit ``r``; it stands for ``(-1)^r P_1 ... P_n`` with ``(1,0) = X``,
``(0,1) = Z`` and ``(1,1) = Y``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import gf2
from .gf2 import BinMatrix
from .lattice import (
    BoundaryCondition,
    DisorderRealization,
    LatticeGeometry,
    assemble_parity_matrix,
    build_realization,
)
from .symmetry import boundary_tableau, solve_symmetry_group, sym_entropy

_PAULI = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}


def _g(x1, z1, x2, z2):
    """Exponent of i picked up when multiplying single-qubit Paulis (x1,z1)(x2,z2)."""
    x1, z1, x2, z2 = (a.astype(np.int64) for a in (x1, z1, x2, z2))
    return np.where(
        (x1 == 0) & (z1 == 0),
        0,
        np.where(
            (x1 == 1) & (z1 == 1),
            z2 - x2,
            np.where(x1 == 1, z2 * (2 * x2 - 1), x2 * (1 - 2 * z2)),
        ),
    )


def pauli_product(a: np.ndarray, ra: int, b: np.ndarray, rb: int) -> tuple[np.ndarray, int]:
    """Product of two commuting Pauli rows with their signs; returns (row, sign)."""
    n = a.size // 2
    phase = 2 * int(ra) + 2 * int(rb) + int(_g(a[:n], a[n:], b[:n], b[n:]).sum())
    phase %= 4
    if phase not in (0, 2):
        raise ValueError("product of anticommuting Paulis is not Hermitian")
    return a ^ b, phase // 2


def symplectic_product(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Matrix of symplectic inner products between the rows of ``a`` and ``b``."""
    n = a.shape[-1] // 2
    a = np.atleast_2d(a).astype(np.int64)
    b = np.atleast_2d(b).astype(np.int64)
    return ((a[:, :n] @ b[:, n:].T + a[:, n:] @ b[:, :n].T) & 1).astype(np.uint8)


def pauli_from_string(s: str) -> tuple[np.ndarray, int]:
    """Parse ``'+XIZY'``/``'-ZZ'``/``'XX'`` into a symplectic row and sign."""
    sign = 0
    if s[:1] in "+-":
        sign = int(s[0] == "-")
        s = s[1:]
    if not s or set(s) - set(_PAULI):
        raise ValueError(f"not a Pauli string: {s!r}")
    xz = np.array([_PAULI[c] for c in s], dtype=np.uint8)
    return np.concatenate([xz[:, 0], xz[:, 1]]), sign


def pauli_to_string(row: np.ndarray, sign: int = 0) -> str:
    n = row.size // 2
    names = {(0, 0): "I", (1, 0): "X", (1, 1): "Y", (0, 1): "Z"}
    return ("-" if sign else "+") + "".join(names[(int(row[k]), int(row[n + k]))] for k in range(n))


def single_qubit_pauli(n: int, qubit: int, kind: str) -> np.ndarray:
    row = np.zeros(2 * n, dtype=np.uint8)
    x, z = _PAULI[kind]
    row[qubit], row[n + qubit] = x, z
    return row


@dataclass
class StabilizerTableau:
    """Generators as rows of ``xz`` (``m x 2n``) with sign bits ``r``."""

    n_qubits: int
    xz: np.ndarray
    r: np.ndarray

    def __post_init__(self):
        self.xz = np.asarray(self.xz, dtype=np.uint8).reshape(-1, 2 * self.n_qubits)
        self.r = np.asarray(self.r, dtype=np.uint8).reshape(-1)
        if self.r.size != self.xz.shape[0]:
            raise ValueError("one sign bit per generator required")

    @classmethod
    def from_strings(cls, strings) -> StabilizerTableau:
        rows, signs = zip(*(pauli_from_string(s) for s in strings))
        return cls(rows[0].size // 2, np.array(rows), np.array(signs))

    @property
    def n_generators(self) -> int:
        return self.xz.shape[0]

    def copy(self) -> StabilizerTableau:
        return StabilizerTableau(self.n_qubits, self.xz.copy(), self.r.copy())

    def commutes(self) -> bool:
        return not symplectic_product(self.xz, self.xz).any()

    def rank(self) -> int:
        return gf2.rank(BinMatrix.from_dense(self.xz))

    def is_pure(self) -> bool:
        return self.n_generators == self.n_qubits and self.rank() == self.n_qubits and self.commutes()

    def region_rank(self, qubits) -> int:
        q = np.asarray(qubits, dtype=np.int64)
        if q.size == 0:
            return 0
        return gf2.restricted_rank(BinMatrix.from_dense(self.xz), np.concatenate([q, q + self.n_qubits]))

    def to_strings(self) -> list[str]:
        return [pauli_to_string(row, s) for row, s in zip(self.xz, self.r)]


def build_cluster_state(Lx: int, Ly: int, topology: str = "cylinder") -> StabilizerTableau:
    """Square-lattice graph state ``g_i = X_i prod_{j in N_i} Z_j``, qubit ``y * Lx + x``.

    ``topology`` is ``open`` (a patch), ``cylinder`` (periodic in x) or
    ``torus``. On a ring of length 2 the two neighbors coincide and their Z
    factors cancel, matching the graph with a doubled edge taken mod 2.
    """
    if Lx < 1 or Ly < 1:
        raise ValueError("need Lx, Ly >= 1")
    if topology not in ("open", "cylinder", "torus"):
        raise ValueError(f"unknown topology {topology!r}")
    n = Lx * Ly
    xz = np.zeros((n, 2 * n), dtype=np.uint8)
    wrap_x = topology in ("cylinder", "torus")
    wrap_y = topology == "torus"
    for y in range(Ly):
        for x in range(Lx):
            q = y * Lx + x
            xz[q, q] = 1
            for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                nx, ny = x + dx, y + dy
                if wrap_x:
                    nx %= Lx
                if wrap_y:
                    ny %= Ly
                if 0 <= nx < Lx and 0 <= ny < Ly and (nx, ny) != (x, y):
                    xz[q, n + ny * Lx + nx] ^= 1
    return StabilizerTableau(n, xz, np.zeros(n, dtype=np.uint8))


def commutator_matrix(tableau: StabilizerTableau, observables) -> BinMatrix:
    """``P[i, j] = 1`` iff observable ``i`` anticommutes with generator ``j``.

    Observables are symplectic rows (or Pauli strings).
    """
    obs = _as_rows(observables, tableau.n_qubits)
    return BinMatrix.from_dense(symplectic_product(obs, tableau.xz))


def _as_rows(observables, n: int) -> np.ndarray:
    if isinstance(observables, np.ndarray):
        rows = np.atleast_2d(observables)
    else:
        rows = [pauli_from_string(o)[0] if isinstance(o, str) else np.asarray(o) for o in observables]
        rows = np.array(rows).reshape(-1, 2 * n) if rows else np.zeros((0, 2 * n))
    if rows.shape[1] != 2 * n or np.any((rows != 0) & (rows != 1)):
        raise ValueError("observables must be 0/1 symplectic rows of length 2n")
    return rows.astype(np.uint8)


def _solve_membership(xz: np.ndarray, target: np.ndarray) -> np.ndarray | None:
    """Coefficients c with ``c @ xz = target`` (mod 2), or None if not in the span."""
    m = xz.shape[0]
    aug = np.hstack([xz.T, target[:, None]]).astype(np.uint8)
    res = gf2.rref(BinMatrix.from_dense(aug))
    if m in res.pivot_columns:
        return None
    dense = res.matrix.to_dense()
    c = np.zeros(m, dtype=np.uint8)
    for row, col in enumerate(res.pivot_columns):
        c[col] = dense[row, m]
    return c


def measure(tableau: StabilizerTableau, obs: np.ndarray, rng: np.random.Generator | None = None) -> tuple[StabilizerTableau, int, bool]:
    """Measure one Pauli observable; returns ``(post, outcome_bit, random)``.

    A random outcome replaces the first anticommuting generator by the
    observable after multiplying it into the other anticommuting ones.
    A deterministic outcome is read off the sign of the stabilizer product
    equal to the observable.
    """
    t = tableau.copy()
    obs = np.asarray(obs, dtype=np.uint8)
    anti = np.flatnonzero(symplectic_product(obs, t.xz)[0])
    if anti.size:
        first = anti[0]
        for k in anti[1:]:
            t.xz[k], t.r[k] = pauli_product(t.xz[k], t.r[k], t.xz[first], t.r[first])
        outcome = int(rng.integers(2)) if rng is not None else 0
        t.xz[first], t.r[first] = obs, outcome
        return t, outcome, True
    c = _solve_membership(t.xz, obs)
    if c is None:
        raise ValueError("observable commutes with a mixed state's stabilizers but is not in the group")
    row, sign = np.zeros_like(obs), 0
    for k in np.flatnonzero(c):
        row, sign = pauli_product(row, sign, t.xz[k], t.r[k])
    return t, sign, False


@dataclass(frozen=True)
class MeasurementPattern:
    """Single-qubit Y/Z bases of the measured qubits of an ``Lx x Ly`` cylinder.

    Row 0 is the unmeasured boundary. Bulk rows ``1 .. Ly-2`` use ``Y``
    where the matching RXPM realization has a plaquette and ``Z`` otherwise;
    the last row is measured in ``Z`` (the fixed side).
    """

    Lx: int
    Ly: int
    p5: float
    seed: int
    bases: np.ndarray = field(repr=False, compare=False)

    @classmethod
    def sample(cls, Lx: int, Ly: int, p5: float, seed: int) -> MeasurementPattern:
        return cls.from_realization(mbqc_realization(Lx, Ly, p5, seed))

    @classmethod
    def from_realization(cls, r: DisorderRealization) -> MeasurementPattern:
        g = r.geometry
        if g.model != "rxpm" or g.topology != "cylinder" or r.bc != BoundaryCondition("free", "fixed"):
            raise ValueError("pattern needs an RXPM cylinder realization with free top and fixed bottom")
        grid = np.full((g.L_tau, g.L), "-", dtype="<U1")
        plaq = r.plaquette.reshape(g.L_tau, g.L)
        grid[1:-1] = np.where(plaq[1:-1], "Y", "Z")
        grid[-1] = "Z"
        return cls(g.L, g.L_tau, r.p, r.seed, grid)

    def measured_qubits(self) -> np.ndarray:
        return np.flatnonzero(self.bases.reshape(-1) != "-")

    def boundary_qubits(self) -> np.ndarray:
        return np.arange(self.Lx)

    def observables(self) -> np.ndarray:
        n = self.Lx * self.Ly
        flat = self.bases.reshape(-1)
        return np.array([single_qubit_pauli(n, q, flat[q]) for q in self.measured_qubits()], dtype=np.uint8)

    def to_record(self) -> str:
        head = [f"Lx={self.Lx}", f"Ly={self.Ly}", f"p5={self.p5!r}", f"seed={self.seed}", "bases:"]
        return "\n".join(head + ["".join(row) for row in self.bases]) + "\n"


def mbqc_realization(Lx: int, Ly: int, p5: float, seed: int) -> DisorderRealization:
    """The RXPM realization (free top, fixed bottom) that mirrors an ``Lx x Ly`` measurement pattern."""
    return build_realization(LatticeGeometry(Lx, Ly, "cylinder", "rxpm"), BoundaryCondition("free", "fixed"), p5, seed)


def measure_all(tableau: StabilizerTableau, pattern: MeasurementPattern, rng: np.random.Generator | None = None) -> StabilizerTableau:
    """Measure every non-boundary qubit of ``pattern`` in order of qubit index."""
    if tableau.n_qubits != pattern.Lx * pattern.Ly:
        raise ValueError("pattern and tableau sizes differ")
    rng = np.random.default_rng([pattern.seed, 0xC1]) if rng is None else rng
    t = tableau
    for obs in pattern.observables():
        t, _, _ = measure(t, obs, rng)
    return t


def post_measurement_group(tableau: StabilizerTableau, observables) -> np.ndarray:
    """Unsigned generators of <O_i, prod_j g_j^{x_j}> for every x with P x = 0."""
    obs = _as_rows(observables, tableau.n_qubits)
    x = gf2.nullspace(commutator_matrix(tableau, obs)).to_dense()
    induced = (x.T.astype(np.int64) @ tableau.xz.astype(np.int64) & 1).astype(np.uint8)
    return np.vstack([obs, induced])


def entanglement_entropy(tableau: StabilizerTableau, region) -> int | float:
    """½ (rank S|_A + rank S|_Abar - rank S), in bits; an integer for pure states."""
    a = np.unique(np.asarray(region, dtype=np.int64))
    if a.size and (a.min() < 0 or a.max() >= tableau.n_qubits):
        raise ValueError("region outside the register")
    abar = np.setdiff1d(np.arange(tableau.n_qubits), a)
    twice = tableau.region_rank(a) + tableau.region_rank(abar) - tableau.rank()
    return twice // 2 if twice % 2 == 0 else twice / 2


def interval_endpoints(x1: int, length: int, L: int) -> int:
    """l_A of an interval on a ring of ``L`` sites: 2 endpoints, or 0 for the empty or full ring.

    The seam at x = 0 is not a boundary of the ring, so ``x1`` does not matter.
    """
    return 0 if length <= 0 or length >= L else 2


@dataclass(frozen=True)
class EquivalenceReport:
    parity_matches: bool
    rows: tuple[tuple[int, int, float, int, int], ...]  # (x1, length, S_A, symS_bd, l_A)

    @property
    def max_violation(self) -> float:
        return max((abs(s - 0.5 * sym) - la for _, _, s, sym, la in self.rows), default=0.0)

    @property
    def ok(self) -> bool:
        return self.parity_matches and self.max_violation <= 0


def check_equivalence(realization: DisorderRealization, pattern: MeasurementPattern, intervals=None) -> EquivalenceReport:
    """Compare boundary entanglement after measurement with half the RXPM boundary symmetry entropy.

    ``intervals`` is an iterable of ``(x1, length)`` pairs on the unmeasured
    row; by default every contiguous interval is tested.
    """
    g = realization.geometry
    if (g.L, g.L_tau, realization.seed, realization.p) != (pattern.Lx, pattern.Ly, pattern.seed, pattern.p5):
        raise ValueError("realization and pattern do not describe the same disorder")
    if MeasurementPattern.from_realization(realization).bases.tolist() != pattern.bases.tolist():
        raise ValueError("realization and pattern bases disagree")
    cluster = build_cluster_state(g.L, g.L_tau, "cylinder")
    p_stab = commutator_matrix(cluster, pattern.observables())
    p_model = assemble_parity_matrix(realization)
    parity_matches = p_stab == p_model

    post = measure_all(cluster, pattern)
    t = solve_symmetry_group(p_model)
    t_bd, _ = boundary_tableau(t, g.top_boundary())
    L = g.L
    if intervals is None:
        intervals = [(x1, n) for n in range(1, L) for x1 in range(L)]
    rows = []
    for x1, n in intervals:
        cols = (x1 + np.arange(n)) % L
        s_a = entanglement_entropy(post, cols)
        bd_sites = np.concatenate([cols + L * layer for layer in range(g.free_depth)])
        sym = sym_entropy(t_bd, bd_sites)
        rows.append((int(x1), int(n), s_a, int(sym), interval_endpoints(x1, n, L)))
    return EquivalenceReport(bool(parity_matches), tuple(rows))
