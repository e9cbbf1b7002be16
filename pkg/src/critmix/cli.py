"""Command-line front end.

Subcommands cover the whole workflow: `critset` scans and traces the
mathematical critical curves, `bank` builds the solved-point bank,
`invert` follows homotopy paths to the critical points, `solve` runs the
reference solvers from explicit seeds, `sweep` repeats the inversion over
a composition list reusing one bank, and `demo1d` prints the
one-dimensional fold illustration.  Every command writes delimited data
plus rendered figures into the output directory; results JSON is
byte-stable across reruns (timings live in a separate file).
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import logging
import os
import sys
import tempfile
import time
from pathlib import Path

import numpy as np

from . import figures
from .config import MixtureConfig, builtin_config_names, config_digest, load_config
from .critical_system import CriticalContext, DomainBox, DomainPoint, eval_detj_u
from .critical_set import Grid, bracket_roots, critical_image, sign_grid, trace_all_curves
from .errors import (ConfigInvalid, CritmixError, EmptyBank, ModelMismatch, NoConvergence)
from .inversion import InversionParams, invert_origin_report
from .reference_solvers import DoubleLoopParams, hk_double_loop, newton_2x2
from .solved_bank import (Bank, build_bank, default_ring_targets, load_bank,
                          reuse_bank, save_bank)
from .demo1d import CRITICAL_IMAGES, CRITICAL_POINTS, invert_cubic_map

log = logging.getLogger("critmix")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BANK = 3
EXIT_NUMERIC = 4


def _atomic_write(path: Path, text: str):
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as f:
            f.write(text)
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.unlink(tmp)


def _write_json(path: Path, obj):
    _atomic_write(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _write_csv(path: Path, header: list[str], rows):
    import io

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    _atomic_write(path, buf.getvalue())


def _result_record(r, composition):
    return {
        "z1": composition[0],
        "z2": composition[1],
        "Tc_K": r.T,
        "Vc_m3_per_mol": r.V,
        "Pc_kPa": r.P,
        "F1_raw": r.residuals[0],
        "F2_raw": r.residuals[1],
        "stability": r.stability.value,
    }


def _report(out: Path, command: str, digest: str, records, outcomes, t_start: float):
    _write_json(out / "results.json", {
        "command": command,
        "inputs_digest": digest,
        "results": records,
        "path_outcomes": outcomes,
    })
    _write_json(out / "timings.json", {"seconds": time.time() - t_start})


def _ctx_and_grid(cfg: MixtureConfig, args) -> tuple[CriticalContext, Grid]:
    box = cfg.box
    if getattr(args, "seed_box", None):
        vals = [float(v) for v in args.seed_box.split(",")]
        if len(vals) != 4:
            raise ConfigInvalid("--seed-box needs V_min,V_max,T_min,T_max")
        box = DomainBox(V_min=vals[0], V_max=vals[1], T_min=vals[2], T_max=vals[3])
    grid = cfg.grid
    if getattr(args, "grid", None):
        try:
            nv, nt = (int(v) for v in args.grid.lower().split("x"))
        except ValueError as exc:
            raise ConfigInvalid("--grid must look like 201x201") from exc
        grid = Grid(V_min=box.V_min, V_max=box.V_max, T_min=box.T_min, T_max=box.T_max,
                    nV=nv, nT=nt, log_V=grid.log_V)
    else:
        grid = Grid(V_min=box.V_min, V_max=box.V_max, T_min=box.T_min, T_max=box.T_max,
                    nV=grid.nV, nT=grid.nT, log_V=grid.log_V)
    return CriticalContext.create(cfg.spec, box), grid


def _inv_params(cfg: MixtureConfig, args) -> InversionParams:
    p = cfg.inversion_params
    changes = {}
    if getattr(args, "steps", None):
        changes["steps_per_leg"] = int(args.steps)
    if getattr(args, "no_guard", False):
        changes["detj_guard"] = False
    return dataclasses.replace(p, **changes) if changes else p


def _fresh_bank(ctx, cfg) -> Bank:
    sg = sign_grid(ctx, Grid(V_min=ctx.box.V_min, V_max=ctx.box.V_max,
                             T_min=ctx.box.T_min, T_max=ctx.box.T_max,
                             nV=cfg.grid.nV, nT=cfg.grid.nT, log_V=cfg.grid.log_V))
    seeds = bracket_roots(ctx, sg)
    return build_bank(ctx, seeds, default_ring_targets(cfg.bank_params), cfg.bank_params)


def _bank_for(ctx, cfg, args) -> Bank:
    if getattr(args, "bank", None):
        # retag unconditionally: even at the same composition the file may
        # have been built with different scaling references
        return reuse_bank(load_bank(args.bank), ctx)
    return _fresh_bank(ctx, cfg)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_critset(args) -> int:
    t0 = time.time()
    cfg = load_config(args.config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    ctx, grid = _ctx_and_grid(cfg, args)

    sg = sign_grid(ctx, grid)
    v = grid.v_nodes()
    t = grid.t_nodes()
    rows = [(v[i], t[j], sg.det_j[i, j]) for i in range(grid.nV) for j in range(grid.nT)]
    _write_csv(out / "sign_grid.csv", ["V", "T", "detJ"], rows)

    seeds = bracket_roots(ctx, sg, cfg.curve_params.curve_tol, cfg.curve_params.merge_cells)
    curves = trace_all_curves(ctx, seeds, cfg.curve_params)
    curves_doc = []
    for i, c in enumerate(curves):
        u = np.array([[p.V / ctx.scaling.V_ref, p.T / ctx.scaling.T_ref] for p in c.points])
        detj = eval_detj_u(ctx, u)
        _write_csv(out / f"curve_{i:03d}.csv", ["V", "T", "detJ"],
                   [(p.V, p.T, float(d)) for p, d in zip(c.points, detj)])
        curves_doc.append({"closed": c.closed,
                           "points": [{"V": p.V, "T": p.T} for p in c.points]})
        img = critical_image(ctx, c)
        _write_csv(out / f"critical_image_{i:03d}.csv", ["V", "T", "F1", "F2"],
                   [(p.V, p.T, q.F1, q.F2) for p, q in zip(c.points, img)])
    _write_json(out / "curves.json", {"curves": curves_doc})

    if not args.no_figures:
        figures.save_sign_grid(sg, out / "sign_grid.png", curves)
        figures.save_curves(curves, ctx.box, out / "critical_curves.png",
                            extra_points=seeds, extra_label="seeds")
        figures.save_image_curves([critical_image(ctx, c) for c in curves],
                                  out / "critical_image.png")
    _report(out, "critset", config_digest(args.config), [],
            {"n_seeds": len(seeds), "n_curves": len(curves)}, t0)
    print(f"critset: {len(seeds)} seeds, {len(curves)} curves -> {out}")
    return EXIT_OK


def cmd_bank(args) -> int:
    t0 = time.time()
    cfg = load_config(args.config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    ctx, grid = _ctx_and_grid(cfg, args)
    bank = _fresh_bank(ctx, cfg)
    save_bank(bank, out / "bank.json")
    if not args.no_figures:
        figures.save_bank_domain(bank, [], ctx.box, out / "bank_domain.png")
        figures.save_image_curves([], out / "bank_image.png", bank=bank)
    _report(out, "bank", config_digest(args.config),
            [{"n_entries": len(bank.entries)}],
            {"n_attempted": bank.provenance["n_attempted"],
             "n_converged": bank.provenance["n_converged"]}, t0)
    print(f"bank: {len(bank.entries)} entries -> {out / 'bank.json'}")
    return EXIT_OK


def _emit_paths(out: Path, traces):
    for i, tr in enumerate(traces):
        rows = []
        leg = 0
        prev = None
        moving = None  # which image component the current leg advances
        for k, (wp, dp, s) in enumerate(zip(tr.image_waypoints, tr.domain_points,
                                            tr.det_j_signs)):
            if prev is not None:
                now = 0 if abs(wp.F1 - prev.F1) > abs(wp.F2 - prev.F2) else 1
                if moving is not None and now != moving:
                    leg += 1  # corner crossed
                moving = now
            rows.append((leg, k, wp.F1, wp.F2, dp.V, dp.T, s))
            prev = wp
        _write_csv(out / f"path_{i:03d}.csv",
                   ["leg", "step", "F1", "F2", "V", "T", "detJ_sign"], rows)


def cmd_invert(args) -> int:
    t0 = time.time()
    cfg = load_config(args.config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    ctx, _ = _ctx_and_grid(cfg, args)
    bank = _bank_for(ctx, cfg, args)
    params = _inv_params(cfg, args)
    results, traces = invert_origin_report(ctx, bank, params)
    records = [_result_record(r, ctx.n0) for r in results]
    _emit_paths(out, traces)
    if args.format == "csv":
        _write_csv(out / "results.csv",
                   ["z1", "z2", "Tc_K", "Vc_m3_per_mol", "Pc_kPa", "F1_raw", "F2_raw",
                    "stability"],
                   [(r["z1"], r["z2"], r["Tc_K"], r["Vc_m3_per_mol"], r["Pc_kPa"],
                     r["F1_raw"], r["F2_raw"], r["stability"]) for r in records])
    if not args.no_figures:
        figures.save_paths(traces, results, [], ctx.box, out / "inversion_paths.png")
    digest = config_digest(args.config, *( [args.bank] if args.bank else [] ))
    _report(out, "invert", digest, records,
            {t.start_label or f"path{i}": t.outcome.value for i, t in enumerate(traces)}, t0)
    for r in records:
        print(f"critical point: Tc = {r['Tc_K']:.4f} K  Vc = {r['Vc_m3_per_mol']:.5e} m3/mol  "
              f"Pc = {r['Pc_kPa']:.2f} kPa  [{r['stability']}]")
    return EXIT_OK


def cmd_solve(args) -> int:
    t0 = time.time()
    cfg = load_config(args.config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    ctx, _ = _ctx_and_grid(cfg, args)
    seeds = list(cfg.seeds)
    for s in args.seed or []:
        v, t = (float(x) for x in s.split(","))
        seeds.append(DomainPoint(V=v, T=t))
    if not seeds:
        raise ConfigInvalid("solve needs seeds (config 'seeds' or --seed V,T)")
    records = []
    outcomes = {}
    for i, p in enumerate(seeds):
        for solver, fn in (("hk_double_loop",
                            lambda: hk_double_loop(ctx, DoubleLoopParams(initial=p))),
                           ("newton_2x2", lambda: newton_2x2(ctx, p))):
            key = f"seed{i}:{solver}"
            try:
                r = fn()
                rec = _result_record(r, ctx.n0)
                rec["solver"] = solver
                rec["seed_V"] = p.V
                rec["seed_T"] = p.T
                records.append(rec)
                outcomes[key] = "converged"
            except CritmixError as exc:
                outcomes[key] = f"failed: {exc}"
    _report(out, "solve", config_digest(args.config), records, outcomes, t0)
    for r in records:
        print(f"{r['solver']}: Tc = {r['Tc_K']:.4f} K  Vc = {r['Vc_m3_per_mol']:.5e}  "
              f"Pc = {r['Pc_kPa']:.2f} kPa")
    if not records:
        raise NoConvergence("; ".join(f"{k}: {v}" for k, v in outcomes.items()))
    return EXIT_OK


def cmd_sweep(args) -> int:
    t0 = time.time()
    cfg = load_config(args.config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    comps = tuple(float(v) for v in args.comps.split(",")) if args.comps else cfg.sweep_z1
    if not comps:
        raise ConfigInvalid("sweep needs compositions (--comps or config 'sweep.z1')")
    ctx0, _ = _ctx_and_grid(cfg, args)
    bank = _bank_for(ctx0, cfg, args)
    params = _inv_params(cfg, args)

    rows = []
    per_comp_curves = {}
    outcomes = {}
    import dataclasses as _dc

    for z1 in comps:
        spec = _dc.replace(cfg.spec, z=(z1, 1.0 - z1))
        ctx = CriticalContext.create(spec, ctx0.box)
        try:
            b = reuse_bank(bank, ctx)
            results, traces = invert_origin_report(ctx, b, params)
            outcomes[f"z1={z1}"] = [t.outcome.value for t in traces]
            for r in results:
                rows.append(_result_record(r, ctx.n0))
        except CritmixError as exc:
            outcomes[f"z1={z1}"] = f"failed: {exc}"
            rows.append({"z1": z1, "z2": 1.0 - z1, "Tc_K": None, "Vc_m3_per_mol": None,
                         "Pc_kPa": None, "F1_raw": None, "F2_raw": None, "stability": None})
            continue
        if not args.no_figures:
            sg = sign_grid(ctx, Grid(V_min=ctx.box.V_min, V_max=ctx.box.V_max,
                                     T_min=ctx.box.T_min, T_max=ctx.box.T_max,
                                     nV=101, nT=101, log_V=True))
            seeds = bracket_roots(ctx, sg)
            per_comp_curves[z1] = trace_all_curves(ctx, seeds, cfg.curve_params)

    rows.sort(key=lambda r: -r["z1"])
    _write_csv(out / "locus.csv",
               ["z1", "z2", "Tc_K", "Vc_m3_per_mol", "Pc_kPa", "F1_raw", "F2_raw", "stability"],
               [tuple(r[k] for k in ("z1", "z2", "Tc_K", "Vc_m3_per_mol", "Pc_kPa",
                                     "F1_raw", "F2_raw", "stability")) for r in rows])
    if not args.no_figures:
        figures.save_locus(rows, per_comp_curves, out / "locus.png")
    digest = config_digest(args.config, *( [args.bank] if args.bank else [] ))
    _report(out, "sweep", digest, rows, outcomes, t0)
    for r in rows:
        if r["Tc_K"] is None:
            print(f"z1 = {r['z1']:.2f}: failed")
        else:
            print(f"z1 = {r['z1']:.2f}: Tc = {r['Tc_K']:.3f} K  Pc = {r['Pc_kPa']:.2f} kPa  "
                  f"Vc = {r['Vc_m3_per_mol']:.3e} m3/mol")
    return EXIT_OK


def cmd_demo1d(args) -> int:
    qs = [float(v) for v in args.q]
    lines = [f"critical points: p = {CRITICAL_POINTS[0]:+.0f}, {CRITICAL_POINTS[1]:+.0f}; "
             f"critical images: q = {CRITICAL_IMAGES[0]:+.0f}, {CRITICAL_IMAGES[1]:+.0f}"]
    rows = []
    for q in qs:
        roots = invert_cubic_map(q)
        lines.append(f"q = {q:g}: {len(roots)} solution(s): "
                     + ", ".join(f"{r:.6f}" for r in roots))
        for r in roots:
            rows.append((q, r))
    print("\n".join(lines))
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        _write_csv(out / "demo1d.csv", ["q", "p"], rows)
        if not args.no_figures:
            figures.save_demo1d(qs, out / "demo1d.png")
    return EXIT_OK


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="critmix",
        description="Critical points of binary mixtures by inversion of the "
                    "(det Q, cubic form) plane map.",
        epilog=f"bundled configs: {', '.join(builtin_config_names())}")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, bank=False):
        p.add_argument("--config", required=True,
                       help="config file path or bundled config name")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--grid", help="override grid as nVxnT, e.g. 161x161")
        p.add_argument("--seed-box", help="override domain box: V_min,V_max,T_min,T_max")
        p.add_argument("--steps", type=int, help="homotopy steps per leg")
        p.add_argument("--no-guard", action="store_true",
                       help="disable the det J sign-crossing guard")
        p.add_argument("--format", choices=("csv", "json"), default="json")
        p.add_argument("--no-figures", action="store_true", help="skip figure rendering")
        if bank:
            p.add_argument("--bank", help="bank JSON from a previous `bank` run")

    common(sub.add_parser("critset", help="scan and trace the critical curves"))
    common(sub.add_parser("bank", help="build the bank of solved points"))
    common(sub.add_parser("invert", help="invert the origin from a bank"), bank=True)
    p = sub.add_parser("solve", help="run the reference solvers from seeds")
    common(p)
    p.add_argument("--seed", action="append", help="V,T seed (repeatable)")
    p = sub.add_parser("sweep", help="composition sweep reusing one bank")
    common(p, bank=True)
    p.add_argument("--comps", help="comma-separated z1 list (defaults to config sweep.z1)")
    p = sub.add_parser("demo1d", help="one-dimensional fold illustration")
    p.add_argument("q", nargs="+", help="target values to invert")
    p.add_argument("--out", help="optional output directory for CSV/figure")
    p.add_argument("--no-figures", action="store_true")
    return ap


_DISPATCH = {
    "critset": cmd_critset,
    "bank": cmd_bank,
    "invert": cmd_invert,
    "solve": cmd_solve,
    "sweep": cmd_sweep,
    "demo1d": cmd_demo1d,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return _DISPATCH[args.command](args)
    except ConfigInvalid as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (EmptyBank, ModelMismatch) as exc:
        print(f"bank error: {exc}", file=sys.stderr)
        return EXIT_BANK
    except CritmixError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
