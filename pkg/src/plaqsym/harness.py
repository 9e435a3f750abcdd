"""Disorder-averaged parameter sweeps with reproducible per-replicate seeds.

A sweep is a grid of cells ``(L, L_tau, p)``. Each replicate of a cell gets
its own seed ``base_seed XOR hash(cell, replicate)``, so results do not depend
on how tasks are scheduled, and two runs over disjoint replicate ranges can be
merged into exactly the table of one longer run.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace

import numpy as np

from . import __version__
from .automata import fixed_boundary_tableau, run_dynamics
from .lattice import (
    MODELS,
    BoundaryCondition,
    LatticeGeometry,
    assemble_parity_matrix,
    build_realization,
    named_region,
)
from .symmetry import (
    boundary_mutual_info,
    config_entropy,
    operator_size,
    solve_symmetry_group,
    sym_entropy,
    sym_mutual_info_cond,
    top_bottom_mutual_info,
)

CSV_FIELDS = ("model", "L", "Ltau", "p", "obs", "mean", "se", "n", "seed0", "seed1", "secs")
THREADS_ENV = "PLAQSYM_THREADS"
# Width of each antipodal line in symI_AB: one column for RTPM, two for RXPM.
ANTIPODAL_WIDTH = {"rtpm": 1, "rxpm": 2}

# Observables evaluated on the full static tableau (torus or cylinder).
BULK_OBSERVABLES = ("scf", "scf_density", "symS_half", "symS", "symI_AB", "opsize")
# Observables of the boundary group, computed through the automaton on a cylinder.
BOUNDARY_OBSERVABLES = ("tb_symI", "bd_rank", "bd_symS_half", "bd_symS", "bd_symI_AB", "bd_symI")


class SweepError(RuntimeError):
    """A cell failed; the sweep is aborted instead of averaging over survivors."""


def parse_observable(name: str) -> tuple[str, tuple[int, ...]]:
    """``'bd_symI@0,4,16,20'`` -> ``('bd_symI', (0, 4, 16, 20))``."""
    base, _, args = name.partition("@")
    if base not in BULK_OBSERVABLES + BOUNDARY_OBSERVABLES:
        raise ValueError(f"unknown observable {base!r}")
    params = tuple(int(a) for a in args.split(",")) if args else ()
    need = {"symS": 1, "bd_symS": 2, "bd_symI": 4}.get(base, 0)
    if len(params) != need:
        raise ValueError(f"observable {base!r} takes {need} integer parameters, got {len(params)}")
    return base, params


def _is_boundary(name: str) -> bool:
    return parse_observable(name)[0] in BOUNDARY_OBSERVABLES


def evaluate(model: str, topology: str, bc: BoundaryCondition | None, L: int, L_tau: int, p: float, seed: int, observables) -> dict[str, float]:
    """Exact observables of one disorder realization."""
    out: dict[str, float] = {}
    bulk = [o for o in observables if not _is_boundary(o)]
    bound = [o for o in observables if _is_boundary(o)]
    geom = LatticeGeometry(L, L_tau, topology, model)
    if bulk:
        r = build_realization(geom, bc if topology == "cylinder" else None, p, seed)
        t = solve_symmetry_group(assemble_parity_matrix(r))
        for name in bulk:
            out[name] = float(_bulk_value(name, t, geom, seed))
    if bound:
        if topology != "cylinder":
            raise ValueError("boundary observables need a cylinder")
        bc = bc or BoundaryCondition()
        if bc.top != "free":
            raise ValueError("boundary observables follow the free top boundary")
        dt = run_dynamics(model, L, L_tau, p, seed)
        if bc.bottom == "fixed":
            t_bd = fixed_boundary_tableau(dt)
        else:
            t_bd = dt.as_symmetry_tableau()
        for name in bound:
            out[name] = float(_boundary_value(name, t_bd, geom, bc))
    return out


def _bulk_value(name, t, geom, seed):
    base, args = parse_observable(name)
    L = geom.L
    if base == "scf":
        return config_entropy(t)
    if base == "scf_density":
        return config_entropy(t) / geom.n_sites
    if base == "symS_half":
        return sym_entropy(t, named_region(geom, "vertical_strip", L // 2))
    if base == "symS":
        return sym_entropy(t, named_region(geom, "vertical_strip", args[0]))
    if base == "symI_AB":
        a, b = named_region(geom, "antipodal_pair", ANTIPODAL_WIDTH[geom.model])
        return sym_mutual_info_cond(t, a, b)
    if base == "opsize":
        if t.total_rank == 0:
            return 0.0
        return operator_size(t, np.random.default_rng([seed, 0x0B5]), 16)
    raise AssertionError(base)


def _boundary_value(name, t_bd, geom, bc):
    base, args = parse_observable(name)
    L = geom.L
    if base == "tb_symI":
        if bc.bottom != "free":
            raise ValueError("tb_symI needs free boundaries on both ends")
        return top_bottom_mutual_info(t_bd, geom.top_boundary(), geom.bottom_boundary())
    if base == "bd_rank":
        return t_bd.total_rank
    if base == "bd_symS_half":
        return sym_entropy(t_bd, named_region(geom, "boundary_half"))
    if base == "bd_symS":
        return sym_entropy(t_bd, named_region(geom, "boundary_segment", *args))
    if base == "bd_symI_AB":
        a, b = named_region(geom, "boundary_antipodal", max(1, L // 8))
        return boundary_mutual_info(t_bd, a, b)
    if base == "bd_symI":
        x1, x2, x3, x4 = args
        a = named_region(geom, "boundary_segment", x1, x2)
        b = named_region(geom, "boundary_segment", x3, x4)
        return boundary_mutual_info(t_bd, a, b)
    raise AssertionError(base)


def cell_seed(base_seed: int, cell: tuple, replicate: int) -> int:
    """Seed of one (cell, replicate) pair; stable across processes and platforms."""
    key = repr((tuple(cell), int(replicate))).encode()
    h = int.from_bytes(hashlib.blake2b(key, digest_size=8).digest(), "little")
    return (int(base_seed) ^ h) & (2**63 - 1)


def ltau_values(rule: str, L: int) -> list[int]:
    """Expand an L_tau rule for one width.

    ``square`` -> L; ``power:z`` -> round(L**z); ``ratio:r`` -> round(r L);
    ``ratios:r1,r2,...`` -> one value per ratio; ``fixed:n`` -> n.
    """
    kind, _, arg = rule.partition(":")
    if kind == "square":
        vals = [L]
    elif kind == "power":
        vals = [round(L ** float(arg))]
    elif kind == "ratio":
        vals = [round(float(arg) * L)]
    elif kind == "ratios":
        vals = [round(float(a) * L) for a in arg.split(",")]
    elif kind == "fixed":
        vals = [int(arg)]
    else:
        raise ValueError(f"unknown L_tau rule {rule!r}")
    return list(dict.fromkeys(max(v, 1) for v in vals))


@dataclass(frozen=True)
class SweepConfig:
    model: str
    sizes: tuple[int, ...]
    p: tuple[float, ...]
    topology: str = "torus"
    bc: tuple[str, str] | None = None
    ltau: str = "square"
    realizations: int = 100
    first_replicate: int = 0
    seed: int = 0
    observables: tuple[str, ...] = ("scf",)
    workers: int = 0

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}")
        if self.realizations < 1:
            raise ValueError("need at least one realization per point")
        if any(not 0.0 <= q <= 1.0 for q in self.p):
            raise ValueError("p values must lie in [0, 1]")
        if not self.sizes or not self.p or not self.observables:
            raise ValueError("sizes, p and observables must be nonempty")
        for o in self.observables:
            parse_observable(o)
        if self.topology == "torus" and self.bc is not None:
            raise ValueError("a torus takes no boundary condition")
        for L in self.sizes:
            ltau_values(self.ltau, L)

    def boundary(self) -> BoundaryCondition | None:
        if self.topology != "cylinder":
            return None
        return BoundaryCondition(*self.bc) if self.bc else BoundaryCondition()

    def cells(self) -> list[tuple[int, int, float]]:
        return [(L, lt, float(q)) for L in self.sizes for lt in ltau_values(self.ltau, L) for q in self.p]

    def to_text(self) -> str:
        d = asdict(self)
        lines = []
        for k, v in d.items():
            if isinstance(v, (tuple, list)):
                v = ",".join(str(x) for x in v)
            elif v is None:
                v = "-"
            lines.append(f"{k} = {v}")
        return "\n".join(lines) + "\n"


_CONFIG_TYPES = {
    "model": str,
    "sizes": lambda s: tuple(int(x) for x in _split(s)),
    "p": lambda s: tuple(_p_grid(s)),
    "topology": str,
    "bc": lambda s: None if s == "-" else tuple(_split(s)),
    "ltau": str,
    "realizations": int,
    "first_replicate": int,
    "seed": int,
    "observables": lambda s: tuple(_split_observables(s)),
    "workers": int,
}


def _split_observables(s: str) -> list[str]:
    # bare integers continue the parameter list of the preceding name@...
    out = []
    for tok in _split(s):
        if tok.lstrip("-").isdigit() and out and "@" in out[-1]:
            out[-1] += "," + tok
        else:
            out.append(tok)
    return out


def _split(s: str) -> list[str]:
    return [x.strip() for x in s.split(",") if x.strip()]


def _p_grid(s: str) -> list[float]:
    """Comma list, or ``start:stop:step`` with an inclusive stop."""
    if ":" in s:
        a, b, h = (float(x) for x in s.split(":"))
        n = int(round((b - a) / h)) + 1
        return [round(a + k * h, 12) for k in range(n)]
    return [float(x) for x in _split(s)]


def parse_config(text: str) -> SweepConfig:
    """Read ``key = value`` lines (``#`` starts a comment).

    Keys: model, sizes, p, topology, bc (``top,bottom`` or ``-``), ltau,
    realizations, first_replicate, seed, observables, workers. Lists are
    comma separated; ``p`` also accepts ``start:stop:step``.
    """
    kw = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep or key not in _CONFIG_TYPES:
            raise ValueError(f"line {lineno}: expected 'key = value' with a known key, got {raw!r}")
        kw[key] = _CONFIG_TYPES[key](value.strip())
    missing = {"model", "sizes", "p"} - kw.keys()
    if missing:
        raise ValueError(f"config is missing {sorted(missing)}")
    return SweepConfig(**kw)


@dataclass(frozen=True)
class ResultRow:
    model: str
    L: int
    Ltau: int
    p: float
    obs: str
    mean: float
    se: float
    n: int
    seed0: int
    seed1: int
    secs: float = field(default=0.0, compare=False)

    @property
    def key(self) -> tuple:
        return (self.model, self.L, self.Ltau, self.p, self.obs)


@dataclass
class ResultTable:
    rows: list[ResultRow] = field(default_factory=list)
    meta: dict[str, str] = field(default_factory=dict)

    def __eq__(self, other):
        return isinstance(other, ResultTable) and self.rows == other.rows

    def select(self, obs: str | None = None, **where) -> list[ResultRow]:
        out = [r for r in self.rows if obs is None or r.obs == obs]
        for k, v in where.items():
            out = [r for r in out if getattr(r, k) == v]
        return out

    def curves(self, obs: str, by: str = "L", x: str = "p") -> dict:
        """``{by_value: (x, mean, se)}`` arrays sorted by x."""
        out = {}
        for key in sorted({getattr(r, by) for r in self.select(obs)}):
            rows = sorted(self.select(obs, **{by: key}), key=lambda r: getattr(r, x))
            out[key] = tuple(np.array([getattr(r, f) for r in rows], dtype=float) for f in (x, "mean", "se"))
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        for k, v in self.meta.items():
            buf.write(f"# {k}: {v}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_FIELDS)
        for r in self.rows:
            w.writerow([_fmt(getattr(r, f)) for f in CSV_FIELDS])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> ResultTable:
        meta, body = {}, []
        for line in text.splitlines():
            if line.startswith("#"):
                k, _, v = line[1:].partition(":")
                meta[k.strip()] = v.strip()
            elif line.strip():
                body.append(line)
        reader = csv.DictReader(body)
        if tuple(reader.fieldnames or ()) != CSV_FIELDS:
            raise ValueError(f"unexpected CSV header {reader.fieldnames}")
        return cls([_row_from_dict(d) for d in reader], meta)

    def to_json(self) -> str:
        return json.dumps({"meta": self.meta, "rows": [{f: getattr(r, f) for f in CSV_FIELDS} for r in self.rows]}, indent=1)

    @classmethod
    def from_json(cls, text: str) -> ResultTable:
        d = json.loads(text)
        return cls([_row_from_dict(r) for r in d["rows"]], dict(d.get("meta", {})))


def _fmt(v):
    return repr(v) if isinstance(v, float) else str(v)


def _row_from_dict(d) -> ResultRow:
    kinds = {f.name: f.type for f in fields(ResultRow)}
    conv = {"int": int, "float": float, "str": str}
    return ResultRow(**{k: conv[kinds[k]](d[k]) for k in CSV_FIELDS})


def _run_cell(args):
    model, topology, bc, base_seed, cell, reps, observables = args
    L, L_tau, p = cell
    t0 = time.perf_counter()
    values = np.empty((len(reps), len(observables)))
    try:
        for k, rep in enumerate(reps):
            seed = cell_seed(base_seed, (model, topology, bc, L, L_tau, p), rep)
            res = evaluate(model, topology, BoundaryCondition(*bc) if bc else None, L, L_tau, p, seed, observables)
            values[k] = [res[o] for o in observables]
    except (MemoryError, ValueError, RuntimeError) as exc:
        raise SweepError(f"cell L={L} Ltau={L_tau} p={p}: {exc}") from exc
    return values, time.perf_counter() - t0


def _summarize(x: np.ndarray) -> tuple[float, float]:
    n = x.size
    mean = float(x.mean())
    se = float(x.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return mean, se


def default_workers() -> int:
    env = os.environ.get(THREADS_ENV)
    return max(1, int(env)) if env else 1


def run_sweep(config: SweepConfig, progress=None) -> ResultTable:
    """Evaluate every cell over ``config.realizations`` replicates.

    ``progress`` is called with ``(done, total)`` after each cell.
    """
    bc = config.boundary()
    bc_key = (bc.top, bc.bottom) if bc else None
    reps = tuple(range(config.first_replicate, config.first_replicate + config.realizations))
    cells = config.cells()
    tasks = [(config.model, config.topology, bc_key, config.seed, c, reps, config.observables) for c in cells]
    workers = config.workers or default_workers()
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            results = []
            for k, res in enumerate(pool.map(_run_cell, tasks)):
                results.append(res)
                if progress:
                    progress(k + 1, len(tasks))
    else:
        results = []
        for k, task in enumerate(tasks):
            results.append(_run_cell(task))
            if progress:
                progress(k + 1, len(tasks))
    rows = []
    for (L, L_tau, p), (values, secs) in zip(cells, results):
        for j, obs in enumerate(config.observables):
            mean, se = _summarize(values[:, j])
            rows.append(ResultRow(config.model, L, L_tau, p, obs, mean, se, len(reps), reps[0], reps[-1], secs))
    meta = {"version": __version__, "config": config.to_text().strip().replace("\n", "; ")}
    return ResultTable(rows, meta)


def merge(*tables: ResultTable) -> ResultTable:
    """Pool tables over disjoint replicate ranges of the same cells.

    Means and standard errors equal those of one run over the union of the
    replicates, rebuilt from each part's (mean, se, n).
    """
    groups: dict[tuple, list[ResultRow]] = {}
    order = []
    meta = {}
    for t in tables:
        meta.update(t.meta)
        for r in t.rows:
            if r.key not in groups:
                groups[r.key] = []
                order.append(r.key)
            groups[r.key].append(r)
    rows = []
    for key in order:
        parts = sorted(groups[key], key=lambda r: r.seed0)
        for a, b in zip(parts, parts[1:]):
            if b.seed0 <= a.seed1:
                raise ValueError(f"overlapping replicate ranges for {key}")
        if len(parts) == 1:
            rows.append(parts[0])
            continue
        n = sum(r.n for r in parts)
        total = sum(r.mean * r.n for r in parts)
        sumsq = sum((r.se**2 * r.n) * (r.n - 1) + r.n * r.mean**2 for r in parts)
        mean = total / n
        var = max((sumsq - n * mean**2) / (n - 1), 0.0) if n > 1 else 0.0
        rows.append(
            replace(
                parts[0],
                mean=mean,
                se=math.sqrt(var / n),
                n=n,
                seed0=parts[0].seed0,
                seed1=max(r.seed1 for r in parts),
                secs=sum(r.secs for r in parts),
            )
        )
    return ResultTable(rows, meta)
