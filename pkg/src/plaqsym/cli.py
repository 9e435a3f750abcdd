"""Command-line entry point: ``plaqsym <command> ...``.

Exit codes: 0 success, 1 computation failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .automata import run_dynamics, space_time_snapshot
from .harness import (
    THREADS_ENV,
    ResultTable,
    SweepConfig,
    default_workers,
    evaluate,
    parse_config,
    parse_observable,
    run_sweep,
)
from .lattice import MODELS, BoundaryCondition, LatticeGeometry, build_realization
from .stabilizer import MeasurementPattern, check_equivalence, mbqc_realization

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _meta(args) -> dict:
    flags = {k: v for k, v in vars(args).items() if k != "func"}
    return {"version": __version__, "flags": flags}


def _bc(text: str | None) -> BoundaryCondition | None:
    if text is None:
        return None
    top, _, bottom = text.partition(",")
    try:
        return BoundaryCondition(top, bottom or "free")
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _geometry(args) -> LatticeGeometry:
    try:
        return LatticeGeometry(args.L, args.Ltau, args.topology, args.model)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _emit(obj, out: str | None):
    text = json.dumps(obj, indent=1, default=_jsonable)
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def _jsonable(v):
    if isinstance(v, np.generic):
        return v.item()
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, Path):
        return str(v)
    raise TypeError(type(v))


def cmd_sample(args):
    geom = _geometry(args)
    bc = _bc(args.bc)
    if geom.topology == "torus" and bc is not None:
        raise UsageError("--bc is only valid on a cylinder")
    obs = [o for o in args.obs.split(",") if o]
    for o in obs:
        try:
            parse_observable(o)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
    values = evaluate(geom.model, geom.topology, bc, geom.L, geom.L_tau, args.p, args.seed, obs)
    report = {"meta": _meta(args), "values": {k: (int(v) if float(v).is_integer() else v) for k, v in values.items()}}
    if args.record:
        r = build_realization(geom, bc if geom.topology == "cylinder" else None, args.p, args.seed)
        Path(args.record).write_text(r.to_record())
    _emit(report, args.out)


def cmd_sweep(args):
    if args.config:
        try:
            cfg = parse_config(Path(args.config).read_text())
        except (OSError, ValueError) as exc:
            raise UsageError(str(exc)) from exc
    else:
        if not (args.model and args.sizes and args.p):
            raise UsageError("sweep needs --config or all of --model, --sizes, --p")
        text = f"model = {args.model}\nsizes = {args.sizes}\np = {args.p}\n"
        for key in ("topology", "bc", "ltau", "realizations", "seed", "observables"):
            val = getattr(args, key)
            if val is not None:
                text += f"{key} = {val}\n"
        try:
            cfg = parse_config(text)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
    if args.threads:
        from dataclasses import replace

        cfg = replace(cfg, workers=args.threads)
    table = run_sweep(cfg)
    table.meta["flags"] = json.dumps(_meta(args)["flags"], sort_keys=True)
    prefix = Path(args.out)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    prefix.with_suffix(".csv").write_text(table.to_csv())
    prefix.with_suffix(".json").write_text(table.to_json())
    print(f"wrote {prefix.with_suffix('.csv')} and {prefix.with_suffix('.json')}")


def cmd_dynamics(args):
    if args.model not in MODELS:
        raise UsageError(f"unknown model {args.model}")
    bc = _bc(args.bc) or BoundaryCondition()
    try:
        LatticeGeometry(args.L, args.Ltau, "cylinder", args.model)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    from .automata import fixed_boundary_tableau
    from .symmetry import top_bottom_mutual_info

    dt = run_dynamics(args.model, args.L, args.Ltau, args.p, args.seed)
    geom = dt.geometry
    report = {"meta": _meta(args), "generators": dt.t0.rows, "rank_T0": int(_rank(dt.t0)), "rank_Ttau": int(_rank(dt.t_tau))}
    if bc.bottom == "fixed":
        report["log_G_bd_fixed"] = fixed_boundary_tableau(dt).total_rank
    elif geom.L_tau >= 2 * geom.free_depth:
        report["tb_symI"] = top_bottom_mutual_info(dt.as_symmetry_tableau(), geom.top_boundary(), geom.bottom_boundary())
    if args.tableau:
        Path(args.tableau).write_text(dt.full.to_text() + "\n")
    _emit(report, args.out)


def _rank(m):
    from .gf2 import rank

    return rank(m)


def cmd_snapshot(args):
    if args.model not in MODELS:
        raise UsageError(f"unknown model {args.model}")
    try:
        LatticeGeometry(args.L, args.Ltau, "cylinder", args.model)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    grid = space_time_snapshot(args.model, args.L, args.Ltau, args.p, args.seed)
    out = Path(args.out)
    out.write_text(grid)
    out.with_suffix(out.suffix + ".meta.json").write_text(json.dumps(_meta(args), indent=1) + "\n")
    print(f"wrote {out}")


def cmd_xcheck(args):
    failures = 0
    worst = 0.0
    parity_ok = 0
    for k in range(args.seeds):
        seed = args.seed + k
        r = mbqc_realization(args.L, args.Ly, args.p, seed)
        rep = check_equivalence(r, MeasurementPattern.from_realization(r))
        parity_ok += rep.parity_matches
        worst = max(worst, max(abs(s - 0.5 * sym) for _, _, s, sym, _ in rep.rows))
        failures += not rep.ok
    report = {
        "meta": _meta(args),
        "realizations": args.seeds,
        "parity_matrix_matches": parity_ok,
        "max_abs_deviation": worst,
        "bound_failures": failures,
        "ok": failures == 0 and parity_ok == args.seeds,
    }
    _emit(report, args.out)
    if not report["ok"]:
        raise RuntimeError("equivalence check failed")


def cmd_fit(args):
    from . import recipes

    try:
        table = ResultTable.from_csv(Path(args.csv).read_text())
    except (OSError, ValueError) as exc:
        raise UsageError(str(exc)) from exc
    if not table.select(args.obs):
        raise UsageError(f"observable {args.obs!r} not in {args.csv}")
    report = recipes.fit_table(table, args.obs, args.kind, p0=args.p0, nu0=args.nu0, z=args.z, L=args.L)
    report["meta"] = _meta(args)
    _emit(report, args.out)


def cmd_reproduce(args):
    from . import recipes

    if args.id not in recipes.RECIPES:
        raise UsageError(f"unknown figure id {args.id!r}; available: {', '.join(recipes.RECIPES)}")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    report = recipes.RECIPES[args.id](args.scale, out, args.threads or default_workers())
    report["meta"] = _meta(args)
    (out / f"{args.id}_report.json").write_text(json.dumps(report, indent=1, default=_jsonable) + "\n")
    print(json.dumps({k: v for k, v in report.items() if k != "meta"}, indent=1, default=_jsonable))


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="plaqsym", description="Random plaquette model symmetry toolkit.")
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("--threads", type=int, default=0, help=f"worker processes (default ${THREADS_ENV} or 1)")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("sample", help="exact observables of one realization")
    _lattice_flags(s)
    s.add_argument("--topology", choices=("torus", "cylinder"), default="torus")
    s.add_argument("--obs", default="scf")
    s.add_argument("--record", help="also write the realization replay record here")
    s.add_argument("--out")
    s.set_defaults(func=cmd_sample)

    s = sub.add_parser("sweep", help="disorder-averaged parameter sweep")
    s.add_argument("--config", help="key = value config file")
    s.add_argument("--model", choices=MODELS)
    s.add_argument("--sizes")
    s.add_argument("--p")
    s.add_argument("--topology", choices=("torus", "cylinder"))
    s.add_argument("--bc")
    s.add_argument("--ltau")
    s.add_argument("--realizations", type=int)
    s.add_argument("--seed", type=int)
    s.add_argument("--observables")
    s.add_argument("--out", required=True, help="output prefix; writes .csv and .json")
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("dynamics", help="automaton evolution of the boundary generators")
    _lattice_flags(s)
    s.add_argument("--tableau", help="write (T0 | T_tau) as 0/1 text")
    s.add_argument("--out")
    s.set_defaults(func=cmd_dynamics)

    s = sub.add_parser("snapshot", help="space-time picture of one sampled boundary operator")
    _lattice_flags(s)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_snapshot)

    s = sub.add_parser("xcheck", help="cluster-state measurement vs RXPM boundary symmetry check")
    s.add_argument("--L", type=int, default=8)
    s.add_argument("--Ly", type=int, default=8)
    s.add_argument("--p", type=_prob, default=0.743)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--seeds", type=int, default=50)
    s.add_argument("--out")
    s.set_defaults(func=cmd_xcheck)

    s = sub.add_parser("fit", help="fit a sweep CSV")
    s.add_argument("--csv", required=True)
    s.add_argument("--obs", required=True)
    s.add_argument("--kind", required=True, choices=("crossing", "collapse", "dynamic", "logsin", "tail"))
    s.add_argument("--p0", type=float, default=0.8)
    s.add_argument("--nu0", type=float, default=1.2)
    s.add_argument("--z", type=float, default=None, help="fix z in a dynamic collapse")
    s.add_argument("--L", type=int, default=None, help="system size for logsin/tail fits")
    s.add_argument("--out")
    s.set_defaults(func=cmd_fit)

    s = sub.add_parser("reproduce", help="run a scaled-down figure recipe")
    s.add_argument("id")
    s.add_argument("--scale", choices=("smoke", "desk"), default="smoke")
    s.add_argument("--out", default="reproduce")
    s.set_defaults(func=cmd_reproduce)
    return p


def _prob(text: str) -> float:
    v = float(text)
    if not 0.0 <= v <= 1.0:
        raise argparse.ArgumentTypeError("probability must lie in [0, 1]")
    return v


def _lattice_flags(s):
    s.add_argument("--model", choices=MODELS, required=True)
    s.add_argument("--L", type=int, required=True)
    s.add_argument("--Ltau", type=int, required=True)
    s.add_argument("--bc", help="top,bottom with free/fixed (cylinder only)")
    s.add_argument("--p", type=_prob, required=True)
    s.add_argument("--seed", type=int, default=0)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        args.func(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except Exception as exc:  # noqa: BLE001 - any computation failure maps to exit 1
        print(f"plaqsym: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
