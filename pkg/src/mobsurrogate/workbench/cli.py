"""Command-line entry point ``mobsurrogate``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .. import __version__
from ..dynamics import SystemParams, integrate
from ..indicators import (
    MOLAIE_LLE,
    MOLAIE_X0,
    bifurcation_scan,
    classify_lle,
    lyapunov_spectrum,
    mob_lle,
    molaie_system,
    sticking_time,
)
from .config import deep_merge, load_config, resolve_config
from .problems import PARAM_UNITS, QOI_UNITS
from .reference import reference_grid
from .report import write_metrics_csv, write_trace_csv
from .study import RunRecord, run_adaptive_study

__all__ = ["main", "build_parser"]

log = logging.getLogger("mobsurrogate")


def _parse_set(items) -> dict:
    out = {}
    for item in items or ():
        key, sep, val = item.partition("=")
        if not sep or key not in SystemParams.field_names():
            raise SystemExit(f"bad --set {item!r}; expected NAME=VALUE with a parameter name")
        out[key] = float(val)
    return out


def _config_doc(args) -> dict:
    doc = load_config(args.config) if getattr(args, "config", None) else {}
    cli = {
        "problem": getattr(args, "problem", None),
        "overrides": _parse_set(getattr(args, "set", None)) or None,
        "integrator": {"rel_tol": getattr(args, "rtol", None),
                       "abs_tol": getattr(args, "atol", None)},
    }
    cli["integrator"] = {k: v for k, v in cli["integrator"].items() if v is not None} or None
    return deep_merge(doc, {k: v for k, v in cli.items() if v is not None})


def _point_params(args):
    """Fixed parameters of the problem with --set applied, plus the evaluator."""
    rc = resolve_config(_config_doc(args))
    return rc.spec.fixed, rc


def _write_csv(path, header, rows):
    fh = open(path, "w", newline="") if path else sys.stdout
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v
                        for v in row])
    finally:
        if path:
            fh.close()


def cmd_simulate(args):
    p, rc = _point_params(args)
    traj = integrate(p, rc.evaluator.init, args.t_end, rc.evaluator.icfg)
    vr = traj.relative_velocity(p.V0)
    rows = zip(traj.t, traj.X, traj.Xdot, traj.z, vr)
    _write_csv(args.out, ["t [s]", "X [m]", "Xdot [m/s]", "z [m]", "V_R [m/s]"], rows)


def cmd_sticking_time(args):
    p, rc = _point_params(args)
    ev = rc.evaluator
    print(repr(sticking_time(p, ev.init, ev.stick, ev.icfg)))


def cmd_lle(args):
    p, rc = _point_params(args)
    ev = rc.evaluator
    if args.sweep is None:
        value = mob_lle(p, ev.init, ev.lle, ev.icfg)
        print(f"{value!r} {classify_lle(value)}")
        return
    name, lo, hi, n = args.sweep
    rows = []
    for v in np.linspace(float(lo), float(hi), int(n)):
        value = mob_lle(p.replace(**{name: float(v)}), ev.init, ev.lle, ev.icfg)
        rows.append((v, value, classify_lle(value)))
    _write_csv(args.out, [f"{name} [{PARAM_UNITS[name]}]", "lle [1/s]", "unstable [1]"], rows)


def cmd_bifurcation(args):
    p, rc = _point_params(args)
    name, lo, hi, n = args.param
    grid = np.linspace(float(lo), float(hi), int(n))
    scan = bifurcation_scan(p, name, grid, tuple(args.window), rc.evaluator.icfg,
                            rc.evaluator.init)
    rows = [(v, pk) for v, peaks in scan for pk in peaks]
    _write_csv(args.out, [f"{name} [{PARAM_UNITS[name]}]", "X_peak [m]"], rows)


def _reference(rc, args):
    ref_cfg = dict(rc.reference)
    if getattr(args, "resolution", None):
        ref_cfg["resolution"] = args.resolution if args.resolution in ("desk", "paper") \
            else [int(r) for r in args.resolution.split("x")]
    if getattr(args, "layout", None):
        ref_cfg["layout"] = args.layout
    if getattr(args, "cache_dir", None):
        ref_cfg["cache_dir"] = args.cache_dir
    surf = reference_grid(
        rc.spec, ref_cfg["resolution"], rc.evaluator, ref_cfg["layout"], ref_cfg["cache_dir"],
        progress=lambda d, t: log.info("reference %d/%d", d, t),
    )
    return surf, ref_cfg


def cmd_reference(args):
    rc = resolve_config(_config_doc(args))
    surf, _ = _reference(rc, args)
    header = [f"{n} [{PARAM_UNITS[n]}]" for n in rc.spec.names] + \
        [f"{rc.spec.qoi} [{QOI_UNITS[rc.spec.qoi]}]"]
    rows = [tuple(x) + (y,) for x, y in zip(surf.x_ref, surf.y_ref)]
    if surf.labels is not None:
        header.append("unstable [1]")
        rows = [r + (int(c),) for r, c in zip(rows, surf.labels)]
    _write_csv(args.out, header, rows)


def cmd_adapt(args):
    doc = _config_doc(args)
    study = {k: v for k, v in {
        "scheme": args.scheme, "budget": args.budget, "n_init": args.n_init,
        "seeds": args.seeds, "pool_size": args.pool_size,
    }.items() if v is not None}
    rc = resolve_config(deep_merge(doc, {"study": study}))
    reference, ref_cfg = (None, None) if args.no_reference else _reference(rc, args)
    records = run_adaptive_study(rc.spec, rc.study, reference, rc.evaluator)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = {"version": __version__, "config": rc.to_dict(), "reference": ref_cfg,
                "wall_clock": {str(r.seed): r.wall_clock for r in records}}
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True))
    (out / "runs.json").write_text(
        "[" + ",\n".join(r.to_json() for r in records) + "]\n")
    for r in records:
        print(f"seed {r.seed}: {r.status} ({r.wall_clock:.1f} s)"
              + (f" {r.error}" if r.error else ""))
    if reference is not None and any(r.status == "ok" for r in records):
        write_metrics_csv(records, out / "metrics.csv", QOI_UNITS[rc.spec.qoi])
        write_trace_csv(records, out / "trace.csv")


def cmd_report(args):
    records = []
    for path in args.runs:
        records += [RunRecord.from_dict(d) for d in json.loads(Path(path).read_text())]
    text = write_metrics_csv(records, args.out)
    if args.out is None:
        sys.stdout.write(text)
    if args.trace:
        write_trace_csv(records, args.trace)


def cmd_verify_molaie(args):
    grid = np.linspace(3.3, 3.4, args.n)
    ok = True
    print("a,lle_analytic,lle_perturbation,diff")
    for a in grid:
        sys_ = molaie_system(float(a))
        la = lyapunov_spectrum(sys_, MOLAIE_X0, MOLAIE_LLE, "analytic").lle
        lp = lyapunov_spectrum(sys_, MOLAIE_X0, MOLAIE_LLE, "perturbation").lle
        diff = abs(lp - la)
        ok &= diff <= 0.02 and (abs(la) <= 0.01 or np.sign(la) == np.sign(lp))
        print(f"{a:.3f},{la:.6f},{lp:.6f},{diff:.2e}")
    print("PASS" if ok else "FAIL")
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mobsurrogate", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp, problem=True):
        sp.add_argument("--config", help="YAML or JSON study configuration")
        if problem:
            sp.add_argument("--problem", help="problem name P0..P5")
        sp.add_argument("--set", action="append", metavar="NAME=VALUE",
                        help="override a fixed oscillator parameter (repeatable)")
        sp.add_argument("--rtol", type=float)
        sp.add_argument("--atol", type=float)
        sp.add_argument("--out", help="output file (stdout when omitted)")

    sp = sub.add_parser("simulate", help="integrate one trajectory to CSV")
    common(sp)
    sp.add_argument("--t-end", type=float, default=250.0)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("sticking-time", help="sticking time at one parameter point")
    common(sp)
    sp.set_defaults(func=cmd_sticking_time)

    sp = sub.add_parser("lle", help="largest Lyapunov exponent at a point or over a sweep")
    common(sp)
    sp.add_argument("--sweep", nargs=4, metavar=("NAME", "LO", "HI", "N"))
    sp.set_defaults(func=cmd_lle)

    sp = sub.add_parser("bifurcation", help="displacement peaks over a parameter sweep")
    common(sp)
    sp.add_argument("--param", nargs=4, required=True, metavar=("NAME", "LO", "HI", "N"))
    sp.add_argument("--window", nargs=2, type=float, default=(150.0, 250.0))
    sp.set_defaults(func=cmd_bifurcation)

    def ref_opts(sp):
        sp.add_argument("--resolution", help="desk, paper or e.g. 60x60")
        sp.add_argument("--layout", choices=("grid", "tplhd"))
        sp.add_argument("--cache-dir")

    sp = sub.add_parser("reference", help="build or load a cached reference surface")
    common(sp)
    ref_opts(sp)
    sp.set_defaults(func=cmd_reference)

    sp = sub.add_parser("adapt", help="run an adaptive study over seeds")
    common(sp)
    ref_opts(sp)
    sp.add_argument("--scheme", choices=("tplhd", "mepe", "eigf", "mivor"))
    sp.add_argument("--budget", type=int)
    sp.add_argument("--n-init", type=int)
    sp.add_argument("--seeds", type=int, nargs="+")
    sp.add_argument("--pool-size", type=int)
    sp.add_argument("--no-reference", action="store_true", help="skip metrics")
    sp.add_argument("--out-dir", default="study")
    sp.set_defaults(func=cmd_adapt)

    sp = sub.add_parser("report", help="per-step mean metrics of saved runs")
    sp.add_argument("runs", nargs="+", help="runs.json files")
    sp.add_argument("--out")
    sp.add_argument("--trace", help="write sample positions to this CSV")
    sp.set_defaults(func=cmd_report)

    sp = sub.add_parser("verify-molaie", help="compare Lyapunov estimators on the Molaie flow")
    sp.add_argument("--n", type=int, default=11)
    sp.set_defaults(func=cmd_verify_molaie)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    return int(args.func(args) or 0)


if __name__ == "__main__":
    sys.exit(main())
