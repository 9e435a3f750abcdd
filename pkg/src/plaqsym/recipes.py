"""Scaled-down reproduction recipes behind ``plaqsym reproduce``.

Every recipe writes ``<id>.csv``/``<id>.json`` (the sweep), a fit report and
``<id>_plot.py``, a standalone matplotlib script over the CSV. ``smoke``
finishes in seconds; ``desk`` uses the ensemble sizes of the acceptance runs.
"""

from __future__ import annotations

import math
from dataclasses import replace
from pathlib import Path

import numpy as np

from .automata import space_time_snapshot
from .harness import ResultTable, SweepConfig, run_sweep
from .lattice import RTPM_Z
from .scaling import (
    cross_ratio,
    estimate_crossing,
    fit_collapse,
    fit_dynamic_collapse,
    fit_log_sin,
    fit_power_tail,
)

# reference critical points: grid centers and fallbacks when curves never cross
P3C = 0.81
P5C = 0.743
# dynamic fits use y = pi h0 theta^(-1/z) early and log y = a - 2 pi h1 theta late
EARLY_FORM = "pi*h0*theta^(-1/z)"
# neutral starting exponent for collapses (kept away from the values being tested)
NU_START = 1.0


def _grid(a, b, h):
    return tuple(round(a + k * h, 6) for k in range(int(round((b - a) / h)) + 1))


def window(curves: dict, lo: float, hi: float) -> dict:
    out = {}
    for L, (x, y, se) in curves.items():
        keep = (x >= lo - 1e-9) & (x <= hi + 1e-9)
        out[L] = (x[keep], y[keep], se[keep])
    return out


def fit_table(table: ResultTable, obs: str, kind: str, p0=0.8, nu0=1.2, z=None, L=None) -> dict:
    """Generic fit of one observable of a result table (used by ``plaqsym fit``)."""
    if kind == "crossing":
        c = estimate_crossing(table.curves(obs))
        return {"kind": kind, "p_c": c.p_c, "p_c_err": c.err, "pairs": {f"{a}-{b}": v for (a, b), v in c.pairs.items()}}
    if kind == "collapse":
        f = fit_collapse(table.curves(obs), p0, nu0)
        return {"kind": kind, "p_c": f.p_c, "p_c_err": f.p_c_err, "nu": f.nu, "nu_err": f.nu_err, "quality": f.quality, "converged": f.converged}
    if kind == "dynamic":
        d = fit_dynamic_collapse(table.curves(obs, x="Ltau"), z=z)
        return {"kind": kind, "z": d.z, "z_err": d.z_err, "h0": d.h0, "h0_err": d.h0_err, "h1": d.h1, "h1_err": d.h1_err, "quality": d.quality}
    if kind == "logsin":
        # obs is a prefix such as "bd_symS@0," whose rows differ in the last parameter
        pts = sorted((int(r.obs.rsplit(",", 1)[-1].split("@")[-1]), r.mean) for r in table.rows if r.obs.startswith(obs) and r.L == L)
        la, y = (np.array(v, dtype=float) for v in zip(*pts))
        f = fit_log_sin(la, y, L)
        return {"kind": kind, "c": f.c, "c_err": f.c_err, "b": f.b, "log_base": f.base}
    if kind == "tail":
        pts = []
        for r in table.rows:
            if r.obs.startswith(obs) and r.L == L and r.mean > 0:
                q = tuple(int(v) for v in r.obs.split("@")[1].split(","))
                pts.append((cross_ratio(*q, L), r.mean, r.se))
        chi, y, se = (np.array(v) for v in zip(*pts))
        t = fit_power_tail(chi, y, chi_max=0.5, se=se)
        return {"kind": kind, "delta": t.delta, "delta_err": t.delta_err}
    raise ValueError(f"unknown fit kind {kind!r}")


def _write_table(out: Path, name: str, table: ResultTable):
    (out / f"{name}.csv").write_text(table.to_csv())
    (out / f"{name}.json").write_text(table.to_json())


def _write_points(out: Path, name: str, header: str, rows):
    lines = [header] + [",".join(repr(float(v)) if isinstance(v, (float, np.floating)) else str(v) for v in r) for r in rows]
    (out / name).write_text("\n".join(lines) + "\n")


_PLOT = '''"""Plot {csv}: mean +- se of each observable against {x}, one line per {by}."""
import csv
import sys
from collections import defaultdict

import matplotlib.pyplot as plt

rows = [r for r in csv.DictReader(l for l in open("{csv}") if not l.startswith("#"))]
series = defaultdict(list)
for r in rows:
    series[(r["obs"], r["{by}"])].append((float(r["{x}"]), float(r["mean"]), float(r["se"])))
for (obs, key), pts in sorted(series.items()):
    pts.sort()
    x, y, e = zip(*pts)
    plt.errorbar(x, y, yerr=e, marker="o", label=f"{{obs}} {by}={{key}}")
plt.xlabel("{x}")
plt.legend(fontsize=6)
plt.savefig(sys.argv[1] if len(sys.argv) > 1 else "{name}.png", dpi=150)
'''


def _write_plot(out: Path, name: str, x: str = "p", by: str = "L"):
    (out / f"{name}_plot.py").write_text(_PLOT.format(csv=f"{name}.csv", x=x, by=by, name=name))


def _sweep(cfg: SweepConfig, workers: int) -> ResultTable:
    return run_sweep(replace(cfg, workers=workers))


# individual recipes


def rtpm_bulk(scale: str, out: Path, workers: int = 1) -> dict:
    """S_cf and symI_AB of RTPM on L x L^z tori: crossing and collapse."""
    if scale == "desk":
        cfg = SweepConfig("rtpm", (8, 12, 16), _grid(0.70, 0.92, 0.02), ltau=f"power:{RTPM_Z}", realizations=1000, seed=3, observables=("scf", "symI_AB"))
    else:
        cfg = SweepConfig("rtpm", (4, 6, 8), _grid(0.6, 1.0, 0.1), ltau=f"power:{RTPM_Z}", realizations=10, seed=3, observables=("scf", "symI_AB"))
    table = _sweep(cfg, workers)
    _write_table(out, "fig4b", table)
    _write_plot(out, "fig4b")
    return {"figure": "fig4b", **bulk_fits(table, "scf", P3C)}


def bulk_fits(table: ResultTable, obs: str, p0: float, nu0: float = NU_START, half_width: float = 0.08) -> dict:
    """Crossing over the whole grid, collapse on ``|p - p_cross| <= half_width``."""
    curves = table.curves(obs)
    cross = estimate_crossing(curves)
    center = cross.p_c if math.isfinite(cross.p_c) else p0
    sub = window(curves, center - half_width, center + half_width)
    col = fit_collapse(sub, center, nu0)
    return {
        "observable": obs,
        "crossing": {"p_c": cross.p_c, "err": cross.err},
        "collapse": {"p_c": col.p_c, "p_c_err": col.p_c_err, "nu": col.nu, "nu_err": col.nu_err, "quality": col.quality, "converged": col.converged, "p_range": [center - half_width, center + half_width]},
    }


def rxpm_bulk(scale: str, out: Path, workers: int = 1) -> dict:
    """symI_AB|C of RXPM on L x L tori: crossing and collapse."""
    if scale == "desk":
        cfg = SweepConfig("rxpm", (12, 16, 24), _grid(0.60, 0.84, 0.02), realizations=1000, seed=5, observables=("symI_AB",))
    else:
        cfg = SweepConfig("rxpm", (6, 8, 10), _grid(0.6, 0.9, 0.1), realizations=10, seed=5, observables=("symI_AB",))
    table = _sweep(cfg, workers)
    _write_table(out, "fig5", table)
    _write_plot(out, "fig5")
    return {"figure": "fig5", **bulk_fits(table, "symI_AB", P5C, half_width=0.1)}


def rxpm_phases(scale: str, out: Path, workers: int = 1) -> dict:
    """S_cf / L^2 of RXPM across the transition."""
    sizes, reps = ((8, 16, 24), 100) if scale == "desk" else ((4, 6, 8), 5)
    cfg = SweepConfig("rxpm", sizes, (0.3, 0.5, 0.6, 0.7, P5C, 0.8, 0.9, 1.0), realizations=reps, seed=4, observables=("scf_density",))
    table = _sweep(cfg, workers)
    _write_table(out, "fig4d", table)
    _write_plot(out, "fig4d")
    dens = {p: {L: r.mean for L, r in ((r.L, r) for r in table.select("scf_density", p=p))} for p in cfg.p}
    return {"figure": "fig4d", "scf_density": {str(p): v for p, v in dens.items()}}


def operator_size(scale: str, out: Path, workers: int = 1) -> dict:
    """Typical operator size fraction on L x L tori for both models."""
    L, reps = (16, 50) if scale == "desk" else (6, 4)
    ps = _grid(0.5, 1.0, 0.05)
    tables = [
        _sweep(SweepConfig(m, (L,), ps, realizations=reps, seed=2, observables=("opsize",)), workers)
        for m in ("rtpm", "rxpm")
    ]
    table = ResultTable(tables[0].rows + tables[1].rows, tables[0].meta)
    _write_table(out, "fig3", table)
    _write_plot(out, "fig3", by="model")
    return {"figure": "fig3", "opsize": {f"{r.model}@{r.p}": r.mean for r in table.rows}, "identity_excluded": True}


def rxpm_strip_entropy(scale: str, out: Path, workers: int = 1) -> dict:
    """symS_A / L of vertical strips at p5^c and the log-chord fit."""
    L, reps = (24, 200) if scale == "desk" else (8, 5)
    obs = tuple(f"symS@{la}" for la in range(1, L))
    table = _sweep(SweepConfig("rxpm", (L,), (P5C,), realizations=reps, seed=6, observables=obs), workers)
    _write_table(out, "fig6", table)
    la = np.arange(1, L)
    y = np.array([table.select(f"symS@{k}")[0].mean for k in la]) / L
    fit = fit_log_sin(la, y, L, form="chord")
    return {"figure": "fig6", "c_tilde": fit.c, "c_tilde_err": fit.c_err, "b": fit.b, "log_base": fit.base}


def dynamic_table(model: str, sizes, thetas, p: float, reps: int, seed: int, z: float, workers: int = 1) -> ResultTable:
    """Top-bottom symI on free-free cylinders with L_tau = theta L^z."""
    tables = []
    for L in sizes:
        lts = sorted({max(round(t * L**z), 2 if model == "rtpm" else 4) for t in thetas})
        rule = "ratios:" + ",".join(repr(lt / L) for lt in lts)
        cfg = SweepConfig(model, (L,), (p,), topology="cylinder", bc=("free", "free"), ltau=rule, realizations=reps, seed=seed, observables=("tb_symI",))
        tables.append(_sweep(cfg, workers))
    return ResultTable([r for t in tables for r in t.rows], tables[0].meta)


def rtpm_dynamics(scale: str, out: Path, workers: int = 1) -> dict:
    """RTPM top-bottom symI: dynamic collapse in L_tau / L^z at p3^c."""
    if scale == "desk":
        sizes, reps = (16, 32, 64), 200
    else:
        sizes, reps = (8, 16), 10
    thetas = np.geomspace(0.05, 3.0, 14)
    table = dynamic_table("rtpm", sizes, thetas, P3C, reps, 10, RTPM_Z, workers)
    _write_table(out, "fig10", table)
    _write_plot(out, "fig10", x="Ltau")
    d = fit_dynamic_collapse(table.curves("tb_symI", x="Ltau"))
    return {"figure": "fig10", "z": d.z, "z_err": d.z_err, "h0": d.h0, "h1": d.h1, "early_slope": d.early_slope, "early_form": EARLY_FORM}


def rxpm_dynamics(scale: str, out: Path, workers: int = 1) -> dict:
    """RXPM top-bottom symI at p5^c: h0 (early) and h1 (late) with z = 1."""
    if scale == "desk":
        sizes, reps = (16, 32), 300
    else:
        sizes, reps = (16, 24), 10
    thetas = _grid(0.25, 3.0, 0.125)
    table = dynamic_table("rxpm", sizes, thetas, P5C, reps, 12, 1.0, workers)
    _write_table(out, "fig15", table)
    _write_plot(out, "fig15", x="Ltau")
    d = fit_dynamic_collapse(table.curves("tb_symI", x="Ltau"), z=1.0)
    try:
        z_free = fit_dynamic_collapse(table.curves("tb_symI", x="Ltau")).z
    except ValueError:  # a free z can push the early window off the grid
        z_free = None
    return {"figure": "fig15", "h0": d.h0, "h0_err": d.h0_err, "h1": d.h1, "h1_err": d.h1_err, "early_slope": d.early_slope, "early_form": EARLY_FORM, "z_free": z_free}


def snapshots(scale: str, out: Path, workers: int = 1) -> dict:
    """Space-time pictures of one boundary operator for both automata."""
    L = 64 if scale == "desk" else 16
    files = []
    for model, ps in (("rtpm", (0.9, 0.81, 0.75)), ("rxpm", (0.8, 0.743, 0.7))):
        for p in ps:
            name = f"fig13_{model}_{p}.txt"
            (out / name).write_text(space_time_snapshot(model, L, L, p, 1))
            files.append(name)
    return {"figure": "fig13", "files": files}


def rtpm_boundary(scale: str, out: Path, workers: int = 1) -> dict:
    """RTPM free top / fixed bottom: symI_AB^bd collapse (nu3') and half-boundary entropy."""
    if scale == "desk":
        sizes, ps, reps = (16, 32, 64), _grid(0.72, 0.90, 0.02), 200
    else:
        sizes, ps, reps = (8, 16), _grid(0.7, 0.9, 0.1), 5
    cfg = SweepConfig("rtpm", sizes, ps, topology="cylinder", bc=("free", "fixed"), ltau="ratio:4", realizations=reps, seed=18, observables=("bd_symI_AB", "bd_symS_half"))
    table = _sweep(cfg, workers)
    _write_table(out, "fig18", table)
    _write_plot(out, "fig18")
    res = {"figure": "fig18"}
    if len(sizes) >= 3:
        res.update(bulk_fits(table, "bd_symI_AB", P3C))
    res["symS_half_at_pc"] = {r.L: r.mean for r in table.select("bd_symS_half") if abs(r.p - 0.82) < 0.011}
    return res


def boundary_criticality_observables(L: int) -> tuple[tuple[str, ...], list[tuple[int, int, int, int]]]:
    """bd_symS for every L_A and bd_symI for pairs of equal segments at several separations."""
    obs = [f"bd_symS@0,{la}" for la in range(1, L)]
    quads = []
    for ell in sorted({max(1, L // 16), max(1, L // 8), L // 4}):
        for gap in range(ell, L - 2 * ell + 1, max(1, L // 16)):
            quads.append((0, ell, ell + gap, 2 * ell + gap))
    obs += [f"bd_symI@{a},{b},{c},{d}" for a, b, c, d in quads]
    return tuple(obs), quads


def rxpm_boundary(scale: str, out: Path, workers: int = 1) -> dict:
    """RXPM free top / fixed bottom at p5^c: log-sin c and cross-ratio exponent."""
    sizes, reps = ((32, 64), 1000) if scale == "desk" else ((16,), 5)
    tables, fits = [], {}
    for L in sizes:
        obs, quads = boundary_criticality_observables(L)
        cfg = SweepConfig("rxpm", (L,), (P5C,), topology="cylinder", bc=("free", "fixed"), ltau="ratio:4", realizations=reps, seed=19, observables=obs)
        t = _sweep(cfg, workers)
        tables.append(t)
        fits[L] = boundary_fits(t, L, quads)
    table = ResultTable([r for t in tables for r in t.rows], tables[0].meta)
    _write_table(out, "fig19", table)
    _write_points(out, "fig19_crossratio.csv", "L,x1,x2,x3,x4,chi,symI,se", [row for f in fits.values() for row in f.pop("points")])
    return {"figure": "fig19", "fits": fits}


def boundary_fits(table: ResultTable, L: int, quads, chi_max: float = 0.5) -> dict:
    la = np.arange(1, L)
    y = np.array([table.select(f"bd_symS@0,{k}", L=L)[0].mean for k in la])
    ls = fit_log_sin(la, y, L)
    pts = []
    for q in quads:
        r = table.select("bd_symI@" + ",".join(map(str, q)), L=L)[0]
        pts.append((L, *q, cross_ratio(*q, L), r.mean, r.se))
    chi = np.array([p[5] for p in pts])
    val = np.array([p[6] for p in pts])
    se = np.array([p[7] for p in pts])
    keep = (chi <= chi_max) & (val > 0)
    tail = fit_power_tail(chi[keep], val[keep], se=se[keep]) if keep.sum() >= 2 else None
    return {
        "c": ls.c,
        "c_err": ls.c_err,
        "b": ls.b,
        "delta": tail.delta if tail else math.nan,
        "delta_err": tail.delta_err if tail else math.nan,
        "chi_max": chi_max,
        "points": pts,
    }


def table1(scale: str, out: Path, workers: int = 1) -> dict:
    """Exponent table assembled from the bulk, dynamic and boundary recipes."""
    rows = {}
    rt = rtpm_bulk(scale, out, workers)
    rows["RTPM"] = {"p_c": rt["crossing"]["p_c"], "p_c_err": rt["crossing"]["err"], "nu": rt["collapse"]["nu"], "nu_err": rt["collapse"]["nu_err"]}
    rx = rxpm_bulk(scale, out, workers)
    dyn = rxpm_dynamics(scale, out, workers)
    bd = rxpm_boundary(scale, out, workers)
    big = max(bd["fits"])
    rows["RXPM"] = {
        "p_c": rx["crossing"]["p_c"],
        "p_c_err": rx["crossing"]["err"],
        "nu": rx["collapse"]["nu"],
        "nu_err": rx["collapse"]["nu_err"],
        "z": 1.0,
        "h0": dyn["h0"],
        "h0_err": dyn["h0_err"],
        "h1": dyn["h1"],
        "h1_err": dyn["h1_err"],
        "c": bd["fits"][big]["c"],
        "c_err": bd["fits"][big]["c_err"],
        "delta": bd["fits"][big]["delta"],
        "delta_err": bd["fits"][big]["delta_err"],
    }
    lines = ["model,quantity,value,err"]
    for model, d in rows.items():
        for k, v in d.items():
            if not k.endswith("_err"):
                lines.append(f"{model},{k},{v!r},{d.get(k + '_err', 0.0)!r}")
    (out / "table1.csv").write_text("\n".join(lines) + "\n")
    return {"figure": "table1", "rows": rows}


RECIPES = {
    "fig3": operator_size,
    "fig4b": rtpm_bulk,
    "fig4d": rxpm_phases,
    "fig5": rxpm_bulk,
    "fig6": rxpm_strip_entropy,
    "fig10": rtpm_dynamics,
    "fig13": snapshots,
    "fig15": rxpm_dynamics,
    "fig18": rtpm_boundary,
    "fig19": rxpm_boundary,
    "table1": table1,
}
