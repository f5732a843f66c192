"""Command-line front end: profile / regimes / buildup / propagate / validate.

Every command reads one JSON config, writes CSV-first outputs plus a JSON run
manifest (resolved config, package versions, seed, wall time) into --out.
Outputs are deterministic for a given (config, seed): manifests carry wall
time and are the one exception.  Exit codes: 0 success, 1 runtime failure,
2 config error.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import csv
import json
import math
import os
import platform
import sys
import time
from dataclasses import replace

import numpy as np

from . import __version__
from ._svg import line_plot
from .buildup import (
    DEFAULT_POOL_RATIO,
    DEFAULT_T1N,
    RateChainParams,
    bulk_profile,
    injection_rate,
    simulate_buildup,
    small_time_injection_rate,
)
from .cascade import analytic_gaps
from .errors import SpinRatchetError
from .fitting import fit_profile, fit_result_to_dict, regress_omega_opt, write_profile_csv
from .propagator import PropagationPolicy, export_record_csv, propagate_sweep
from .ratchet import RatchetParams, find_omega_opt, total_polarization
from .system import DriveConfig, HyperfineCoupling, PhysicalConstants, SpinSystem, SweepConfig, validate_system


class ConfigError(Exception):
    pass


def _req(cfg, path):
    node = cfg
    for key in path.split("."):
        if not isinstance(node, dict) or key not in node:
            raise ConfigError(f"missing config key: {path}")
        node = node[key]
    if isinstance(node, list) and not node:
        raise ConfigError(f"config key is empty: {path}")
    return node


def _get(cfg, path, default=None):
    node = cfg
    for key in path.split("."):
        if not isinstance(node, dict) or key not in node:
            return default
        node = node[key]
    return node


def _float(value):
    if isinstance(value, str) and value.lower() in ("inf", "infinity"):
        return math.inf
    return float(value)


def build_system(cfg):
    sc = _req(cfg, "system")
    constants = PhysicalConstants(
        gamma_e=_float(sc.get("gamma_e", PhysicalConstants.gamma_e)),
        gamma_n=_float(sc.get("gamma_n", PhysicalConstants.gamma_n)),
        delta_zfs=_float(sc.get("delta_zfs", PhysicalConstants.delta_zfs)),
    )
    nuclei = tuple(
        HyperfineCoupling(a_par=_float(n["a_par"]), a_perp=_float(n["a_perp"]))
        for n in sc.get("nuclei", [])
    )
    return SpinSystem(
        b0=_float(_req(cfg, "system.b0")),
        nuclei=nuclei,
        constants=constants,
        exact_cap=int(sc.get("exact_cap", 6)),
    )


def build_drive(cfg):
    return DriveConfig(
        eta_e=_float(_req(cfg, "drive.eta_e")),
        eta_r=_float(_req(cfg, "drive.eta_r")),
        c_e=_float(_req(cfg, "drive.c_e")),
        c_r=_float(_req(cfg, "drive.c_r")),
    )


def build_sweep(cfg, system):
    sc = _req(cfg, "sweep")
    f0 = _float(sc.get("f0", system.electron_transition))
    return SweepConfig(
        f0=f0,
        bandwidth=_float(_req(cfg, "sweep.bandwidth")),
        omega_r=_float(_req(cfg, "sweep.omega_r")),
        duration=_float(_req(cfg, "sweep.duration")),
    )


def build_chain_template(cfg, drive, omega_r):
    cc = cfg.get("chain", {})
    return RateChainParams(
        kappa_e=drive.kappa_e,
        omega_r=omega_r,
        inj_rate=0.0,
        kappa_d=_float(cc.get("kappa_d", math.inf)),
        t1n=_float(cc.get("t1n", DEFAULT_T1N)),
        n_prox=_float(cc.get("n_prox", 1.0)),
        n_bulk=_float(cc.get("n_bulk", DEFAULT_POOL_RATIO)),
    )


def _gap_pair(cfg, system, drive):
    gaps = _get(cfg, "gaps")
    if gaps is not None:
        return _float(gaps["eps1"]), _float(gaps["eps2"])
    if system.n_nuclei < 1:
        raise ConfigError("missing config key: gaps (or system.nuclei for derived gaps)")
    return analytic_gaps(system, drive, 0)


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([f"{v:.12g}" if isinstance(v, float) else v for v in row])


def _write_manifest(out_dir, command, cfg, args, wall, outputs, extra=None):
    manifest = {
        "command": command,
        "config": cfg,
        "seed": args.seed,
        "threads": args.threads,
        "tunneling_law": args.tunneling_law,
        "versions": {
            "spinratchet": __version__,
            "numpy": np.__version__,
            "python": platform.python_version(),
        },
        "wall_time_s": wall,
        "outputs": sorted(outputs),
    }
    if extra:
        manifest.update(extra)
    path = os.path.join(out_dir, "run_manifest.json")
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def cmd_profile(cfg, args):
    system = build_system(cfg)
    drive = build_drive(cfg)
    sweep = build_sweep(cfg, system)
    omega_grid = [
        _float(w) for w in _req(cfg, "grids.omega_r")
    ]
    eps1, eps2 = _gap_pair(cfg, system, drive)
    params = RatchetParams(
        kappa_e=drive.kappa_e,
        eps1=eps1,
        eps2=eps2,
        bandwidth=sweep.bandwidth,
        duration=sweep.duration,
    )
    law = args.tunneling_law
    grid = np.asarray(omega_grid, dtype=float)
    signal = total_polarization(params, grid, law)
    outputs = []
    path = os.path.join(args.out, "analytic_profile.csv")
    _write_csv(path, ["omega_r_hz", "signal"], zip(grid.tolist(), signal.tolist()))
    outputs.append(path)

    omega_opt = find_omega_opt(params, law=law)
    opt_path = os.path.join(args.out, "omega_opt.json")
    with open(opt_path, "w") as fh:
        json.dump(
            {"omega_opt_hz": omega_opt, "tunneling_law": law, "eps1_hz": eps1, "eps2_hz": eps2},
            fh,
            indent=2,
            sort_keys=True,
        )
        fh.write("\n")
    outputs.append(opt_path)

    if _get(cfg, "profile.include_bulk", False):
        chain = build_chain_template(cfg, drive, sweep.omega_r)
        bulk = bulk_profile(system, drive, sweep, grid, chain, sweep.duration, law)
        bulk_path = os.path.join(args.out, "bulk_profile.csv")
        write_profile_csv(bulk, bulk_path)
        outputs.append(bulk_path)

    if args.svg:
        svg_path = os.path.join(args.out, "analytic_profile.svg")
        line_plot(
            svg_path,
            grid.tolist(),
            signal.tolist(),
            xlabel="omega_r (Hz)",
            ylabel="total polarization (arb.)",
            title="sweep-rate profile",
            logx=True,
        )
        outputs.append(svg_path)
    return outputs, {}


def _regimes_cell(system, cfg, sweep, omega_grid, chain, law, eta_e, eta_r):
    drive = DriveConfig(
        eta_e=eta_e,
        eta_r=eta_r,
        c_e=_float(_req(cfg, "drive.c_e")),
        c_r=_float(_req(cfg, "drive.c_r")),
    )
    profile = bulk_profile(system, drive, sweep, omega_grid, chain, sweep.duration, law)
    fit = fit_profile(profile, law=law)
    return profile, fit


def cmd_regimes(cfg, args):
    system = build_system(cfg)
    drive = build_drive(cfg)
    sweep = build_sweep(cfg, system)
    eta_es = [_float(v) for v in _req(cfg, "grids.eta_e")]
    eta_rs = [_float(v) for v in _req(cfg, "grids.eta_r")]
    omega_grid = np.asarray([_float(w) for w in _req(cfg, "grids.omega_r")], dtype=float)
    chain = build_chain_template(cfg, drive, sweep.omega_r)
    law = args.tunneling_law

    cells_dir = os.path.join(args.out, "cells")
    os.makedirs(cells_dir, exist_ok=True)
    jobs = {}
    with concurrent.futures.ThreadPoolExecutor(max_workers=args.threads) as pool:
        for ri, eta_r in enumerate(eta_rs):
            for ei, eta_e in enumerate(eta_es):
                jobs[(ri, ei)] = pool.submit(
                    _regimes_cell, system, cfg, sweep, omega_grid, chain, law, eta_e, eta_r
                )
    results = {}
    failed = []
    for key in sorted(jobs):
        try:
            results[key] = jobs[key].result()
        except Exception as exc:  # noqa: BLE001 - cell failures go to the manifest
            failed.append({"cell": list(key), "error": f"{type(exc).__name__}: {exc}"})

    outputs = []
    summary_rows = []
    for (ri, ei), (profile, fit) in sorted(results.items()):
        stem = os.path.join(cells_dir, f"cell_r{ri}_e{ei}")
        write_profile_csv(profile, stem + ".csv")
        with open(stem + "_fit.json", "w") as fh:
            json.dump(fit_result_to_dict(fit), fh, indent=2, sort_keys=True)
            fh.write("\n")
        outputs.extend([stem + ".csv", stem + "_fit.json"])
        summary_rows.append(
            (eta_rs[ri], eta_es[ei], fit.omega_opt, int(fit.extrapolated))
        )
    summary_path = os.path.join(args.out, "summary_cells.csv")
    _write_csv(summary_path, ["eta_r_w", "eta_e_w", "omega_opt_hz", "extrapolated"], summary_rows)
    outputs.append(summary_path)

    slope_rows = []
    degenerate = []
    for ri, eta_r in enumerate(eta_rs):
        pts = [
            (eta_es[ei], results[(ri, ei)][1].omega_opt)
            for ei in range(len(eta_es))
            if (ri, ei) in results
        ]
        xs = {x for x, _ in pts}
        if len(pts) < 3 or len(xs) < 2:
            degenerate.append(eta_r)
            slope_rows.append((eta_r, math.nan, math.nan, math.nan, math.nan, len(pts)))
            continue
        reg = regress_omega_opt(pts)
        slope_rows.append(
            (eta_r, reg["slope"], reg["stderr_slope"], reg["intercept"], reg["r2"], reg["n"])
        )
    slopes_path = os.path.join(args.out, "slopes.csv")
    _write_csv(
        slopes_path,
        ["eta_r_w", "slope_hz_per_w", "stderr_slope", "intercept_hz", "r2", "n_points"],
        slope_rows,
    )
    outputs.append(slopes_path)

    if args.svg:
        good = [(r[0], r[1]) for r in slope_rows if not math.isnan(r[1])]
        if good:
            svg_path = os.path.join(args.out, "slopes.svg")
            line_plot(
                svg_path,
                [g[0] for g in good],
                [g[1] for g in good],
                xlabel="eta_r (W)",
                ylabel="d omega_opt / d eta_e (Hz/W)",
                title="slope vs MW power",
            )
            outputs.append(svg_path)

    extra = {"failed_cells": failed, "degenerate_regressions": degenerate}
    exit_code = 1 if failed else 0
    return outputs, extra, exit_code


def cmd_buildup(cfg, args):
    system = build_system(cfg)
    drive = build_drive(cfg)
    sweep = build_sweep(cfg, system)
    law = args.tunneling_law
    window = _float(_get(cfg, "buildup.window", 0.6))
    eta_es = [_float(v) for v in _get(cfg, "grids.eta_e", [])] or [drive.eta_e]

    outputs = []
    slope_rows = []
    for ei, eta_e in enumerate(eta_es):
        drive_i = replace(drive, eta_e=eta_e)
        inj = _get(cfg, "chain.inj_rate")
        gam = _float(inj) if inj is not None else float(
            injection_rate(system, drive_i, sweep.omega_r, sweep.bandwidth, law)
        )
        template = build_chain_template(cfg, drive_i, sweep.omega_r)
        params = replace(template, kappa_e=drive_i.kappa_e, inj_rate=gam)
        duration = _float(_get(cfg, "buildup.duration", sweep.duration))
        dt_cfg = _get(cfg, "buildup.dt")
        scales = [params.t1n, duration]
        if gam > 0:
            scales.append(1.0 / gam)
        if 0 < params.kappa_d < math.inf:
            scales.append(1.0 / params.kappa_d)
        dt = _float(dt_cfg) if dt_cfg is not None else min(scales) / 12.0
        if duration / dt > 5e6:
            raise SpinRatchetError(
                f"buildup needs {duration / dt:.3g} steps; set buildup.dt explicitly"
            )
        series = simulate_buildup(params, duration, dt)
        name = "buildup.csv" if len(eta_es) == 1 else f"buildup_e{ei}.csv"
        path = os.path.join(args.out, name)
        _write_csv(
            path,
            ["t_s", "p_e", "p_p", "p_b"],
            zip(series.t.tolist(), series.p_e.tolist(), series.p_p.tolist(), series.p_b.tolist()),
        )
        outputs.append(path)
        slope_rows.append((eta_e, small_time_injection_rate(series, window=window)))
        if args.svg:
            svg_path = path.replace(".csv", ".svg")
            line_plot(
                svg_path,
                series.t.tolist(),
                series.p_b.tolist(),
                xlabel="t (s)",
                ylabel="bulk polarization",
                title=f"buildup (eta_e = {eta_e:g} W)",
            )
            outputs.append(svg_path)
    if len(eta_es) > 1:
        rates_path = os.path.join(args.out, "injection_rates.csv")
        _write_csv(rates_path, ["eta_e_w", "pb_slope_per_s"], slope_rows)
        outputs.append(rates_path)
    return outputs, {}


def cmd_propagate(cfg, args):
    system = build_system(cfg)
    drive = build_drive(cfg)
    sweep = build_sweep(cfg, system)
    pc = cfg.get("propagation", {})
    policy = PropagationPolicy(
        steps_per_sweep=int(pc.get("steps_per_sweep", 1000)),
        reset_mode=_get(cfg, "mode.reset_mode", "full"),
        p_e=_float(_get(cfg, "mode.p_e", 1.0)),
        sweeps=int(pc.get("sweeps", 1)),
    )
    initial = pc.get("initial_nuclear", "mixed")
    n_dim = 2**system.n_nuclei
    if initial == "mixed":
        rho_n = None
    elif initial == "down":
        rho_n = np.zeros((n_dim, n_dim), dtype=complex)
        rho_n[n_dim - 1, n_dim - 1] = 1.0  # all nuclei down
    else:
        raise ConfigError("propagation.initial_nuclear must be 'mixed' or 'down'")
    record = propagate_sweep(system, drive, sweep, policy, initial_nuclear=rho_n)
    path = os.path.join(args.out, "propagation.csv")
    export_record_csv(record, path)
    outputs = [path]
    if args.svg:
        svg_path = os.path.join(args.out, "propagation.svg")
        line_plot(
            svg_path,
            list(range(1, policy.sweeps + 1)),
            record.iz[:, 0].tolist(),
            xlabel="sweep",
            ylabel="<I_z> (nucleus 0)",
            title="nuclear polarization per sweep",
        )
        outputs.append(svg_path)
    return outputs, {}


def cmd_validate(cfg, args):
    system = build_system(cfg)
    drive = build_drive(cfg)
    sweep = build_sweep(cfg, system)
    report = validate_system(system, drive, sweep)
    for warning in report.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    print("PASS" if report.ok else "FAIL")
    path = os.path.join(args.out, "validation.json")
    with open(path, "w") as fh:
        json.dump(
            {"ok": report.ok, "errors": list(report.errors), "warnings": list(report.warnings)},
            fh,
            indent=2,
            sort_keys=True,
        )
        fh.write("\n")
    return [path], {}


_COMMANDS = {
    "profile": cmd_profile,
    "regimes": cmd_regimes,
    "buildup": cmd_buildup,
    "propagate": cmd_propagate,
    "validate": cmd_validate,
}


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="spinratchet", description="swept-microwave DNP spin-ratchet studies"
    )
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("--config", required=True, help="JSON study config")
    parser.add_argument("--out", default="out", help="output directory")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    parser.add_argument("--tunneling-law", choices=("paper", "standard"), default="paper")
    parser.add_argument("--svg", action="store_true", help="emit SVG plots beside CSVs")
    args = parser.parse_args(argv)

    try:
        with open(args.config) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    os.makedirs(args.out, exist_ok=True)
    start = time.perf_counter()
    try:
        result = _COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (SpinRatchetError, ValueError, KeyError, OSError) as exc:
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    wall = time.perf_counter() - start
    if len(result) == 2:
        (outputs, extra), exit_code = result, 0
    else:
        outputs, extra, exit_code = result
    _write_manifest(args.out, args.command, cfg, args, wall, outputs, extra)
    return exit_code


if __name__ == "__main__":
    sys.exit(main())
