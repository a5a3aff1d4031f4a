"""``mejpa`` command-line front end.

Exit codes: 0 success, 1 configuration error, 2 numerical or model error.
"""

import argparse
import datetime as dt
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace

import numpy as np

from . import __version__
from .config import is_config_error, load_config
from .design_opt import flatten_gain, gbw_scaling_study, maximize_bandwidth, sweep_parameter
from .errors import ConfigError, MejpaError
from .junction_lab import (
    flux_tuning_curve,
    josephson_inductance,
    plasma_frequency,
    squid_inductance,
)
from .noise_cal import (
    YFactorInputs,
    callen_welton_temperature,
    dsnr_from_traces,
    quantum_limit_temperature,
    read_trace,
    t_jpa_from_dsnr,
    y_factor_hemt,
)
from .pump_gain import gain_profile, retune
from .results import ResultTable, render, write_atomic

log = logging.getLogger("mejpa")

EXIT_OK, EXIT_CONFIG, EXIT_MODEL = 0, 1, 2
SEED_ENV = "MEJPA_SEED"


class _Parser(argparse.ArgumentParser):
    # usage mistakes are configuration errors, not model errors
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _seed():
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return None
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def _grid(design, points):
    if points is None:
        return design
    return replace(design, grid=replace(design.grid, points=points))


def cmd_junction(run, args):
    d = run.design
    if d.junctions is None:
        raise ConfigError("junction command needs a 'junction' block")
    jj = d.junctions[0]
    sq = d.squid
    row = [
        jj.area, jj.i_c, jj.c_j, jj.r_n if jj.r_n is not None else float("nan"),
        2 * jj.i_c, 2 * jj.c_j, sq.i_c_total, sq.c_total,
        josephson_inductance(sq, d.constants), squid_inductance(sq, d.constants),
        plasma_frequency(sq, d.constants) / (2 * np.pi),
    ]
    cols = ["area_um2", "i_c_a", "c_j_f", "r_n_ohm", "pair_i_c_a", "pair_c_f",
            "squid_i_c_a", "squid_c_f", "l_j0_h", "l_squid_h", "f_plasma_hz"]
    units = ["um^2", "A", "F", "ohm", "A", "F", "A", "F", "H", "H", "Hz"]
    return ResultTable(cols, units, [row])


def cmd_tune(run, args):
    b = run.block("tune")
    points = args.grid_points or b["points"]
    grid = np.linspace(b["flux_min"], b["flux_max"], points)
    curve = flux_tuning_curve(run.design.squid, grid, run.design.constants)
    f = np.array([c[1] for c in curve])
    finite = f[np.isfinite(f)]
    meta = {"gap_points": int(np.sum(~np.isfinite(f)))}
    if finite.size:
        meta.update(f_min_hz=float(finite.min()), f_max_hz=float(finite.max()))
    return ResultTable(["flux_phi0", "freq_hz"], ["Phi0", "Hz"], curve, meta)


def _profile_table(prof):
    g_i = np.asarray(prof.idler_complex)
    rows = np.column_stack([
        prof.freqs, prof.gain_db, 20 * np.log10(np.maximum(np.abs(g_i), 1e-300)),
        np.real(prof.g_complex), np.imag(prof.g_complex),
    ])
    return ResultTable(
        ["freq_hz", "gain_db", "idler_gain_db", "g_real", "g_imag"],
        ["Hz", "dB", "dB", "1", "1"], rows.tolist(), _profile_meta(prof),
    )


def _profile_meta(prof):
    return {
        "center_gain_db": prof.center_gain_db, "g0": prof.g0, "g2": prof.g2, "g4": prof.g4,
        "kappa0_rad_s": prof.kappa0, "threshold_db": prof.threshold_db,
        "bw_at_threshold_hz": prof.bw_at_threshold, "bw_3db_hz": prof.bw_3db,
        "ripple_db": prof.ripple_db, "band_truncated": prof.band_truncated,
    }


def cmd_gain(run, args):
    b = run.block("gain")
    cfg = _grid(run.design, args.grid_points)
    if b.get("target_g0_db") is not None:
        cfg = retune(cfg, b["target_g0_db"])
    prof = gain_profile(cfg, threshold_db=b["threshold_db"], fit_points=b["fit_points"])
    table = _profile_table(prof)
    table.metadata.update(pump_depth=cfg.pump.pump_depth, f_pump_hz=cfg.pump.f_pump)
    return table


def cmd_sweep(run, args):
    b = run.block("sweep")
    if "values" in b:
        values = b["values"]
    else:
        r = b["range"]
        values = np.linspace(r["start"], r["stop"], r["points"]).tolist()
    cfg = _grid(run.design, args.grid_points)
    kwargs = dict(retune=b["retune"], target_g0_db=b.get("target_g0_db"), threshold_db=b["threshold_db"])
    if b["workers"] > 1:
        with ThreadPoolExecutor(b["workers"]) as pool:
            res = sweep_parameter(cfg, b["path"], values, map_fn=pool.map, **kwargs)
    else:
        res = sweep_parameter(cfg, b["path"], values, **kwargs)
    keys = ["value", "f_center_hz", "f_plasma_hz", "pump_depth", "center_gain_db",
            "g2", "bw_hz", "bw_3db_hz", "ripple_db"]
    units = ["si", "Hz", "Hz", "Phi0", "dB", "s^2/rad^2", "Hz", "Hz", "dB"]
    nan = float("nan")
    rows = []
    for s in res.summary:
        rows.append([nan if s.get(k) is None else s[k] for k in keys])
    errors = {str(v): e for v, e in zip(res.values, res.errors) if e}
    return ResultTable(keys, units, rows, {"path": res.path, "errors": errors})


def cmd_optimize(run, args):
    b = run.block("optimize")
    cfg = _grid(run.design, args.grid_points)
    seed = args.seed
    mode = b["mode"]
    if mode == "scaling":
        res = gbw_scaling_study(cfg, b["g0_list_db"], b["free_params"] or None, b["max_evals"])
        rows = [[g, w] for g, w in zip(res.g0_db, res.bandwidth_hz)]
        return ResultTable(["g0_db", "bw_3db_hz"], ["dB", "Hz"], rows,
                           {"slope": res.slope, "null_params": b["free_params"]})
    if not b["free_params"]:
        raise ConfigError("optimize.free_params must name at least one parameter")
    bounds = {k: tuple(v) for k, v in b["bounds"].items()}
    if mode == "flatten":
        if b.get("target_g0_db") is None:
            raise ConfigError("optimize.target_g0_db is required for mode 'flatten'")
        rep = flatten_gain(cfg, b["free_params"], b["target_g0_db"], max_evals=b["max_evals"],
                           bounds=bounds, seed=seed)
    else:
        rep = maximize_bandwidth(cfg, b["free_params"], b["g_floor_db"], b["ripple_cap_db"],
                                 target_g0_db=b.get("target_g0_db"), bounds=bounds,
                                 max_evals=b["max_evals"], seed=seed)
    initial = [float(run.design.get(p)) for p in b["free_params"]]
    rows = [[i, v, init] for i, (v, init) in enumerate(zip(rep.best_params.values(), initial))]
    meta = {
        "mode": mode, "params": list(rep.best_params), "objective": rep.objective,
        "initial_objective": rep.initial_objective, "iterations": rep.iterations,
        "converged": rep.converged, "constraint_slacks": rep.constraint_slacks,
        "pump_depth": rep.best_config.pump.pump_depth, "seed": seed, **rep.extras,
    }
    return ResultTable(["param_index", "best_value", "initial_value"], ["1", "si", "si"], rows, meta)


def cmd_noise(run, args):
    b = run.block("noise")
    f = b.get("f_hz")
    if "dsnr" in b:
        dsnr = b["dsnr"]
    elif "dsnr_db" in b:
        dsnr = 10 ** (b["dsnr_db"] / 10)
    elif "traces" in b:
        on = read_trace(run.base_dir / b["traces"]["on"])
        off = read_trace(run.base_dir / b["traces"]["off"])
        dsnr = dsnr_from_traces(on, off)
    else:
        raise ConfigError("noise block needs dsnr, dsnr_db or traces")
    if "g_jpa" in b:
        g = b["g_jpa"]
    elif "g_jpa_db" in b:
        g = 10 ** (b["g_jpa_db"] / 10)
    else:
        raise ConfigError("noise block needs g_jpa or g_jpa_db")
    if "t_hemt" in b:
        t_hemt = b["t_hemt"]
    elif "y_factor" in b:
        y = b["y_factor"]
        t_hot, t_cold = y["t_hot"], y["t_cold"]
        if b["callen_welton"]:
            if f is None:
                raise ConfigError("callen_welton needs noise.f_hz")
            t_hot = callen_welton_temperature(f, t_hot, run.design.constants)
            t_cold = callen_welton_temperature(f, t_cold, run.design.constants)
        if "y" in y:
            p_hot, p_cold = y["y"], 1.0
        elif "p_hot" in y and "p_cold" in y:
            p_hot, p_cold = y["p_hot"], y["p_cold"]
        else:
            raise ConfigError("noise.y_factor needs y or p_hot and p_cold")
        t_hemt = y_factor_hemt(YFactorInputs(t_hot, t_cold, p_hot, p_cold))
    else:
        raise ConfigError("noise block needs t_hemt or y_factor")
    budget = t_jpa_from_dsnr(dsnr, g, t_hemt, b.get("t_in"), f, run.design.constants)
    t_q = budget.t_quantum if budget.t_quantum is not None else float("nan")
    cols = ["t_in_k", "t_hemt_k", "g_jpa", "dsnr", "t_sys_k", "t_jpa_k", "t_quantum_k", "sub_vacuum"]
    row = [budget.t_in, budget.t_hemt, budget.g_jpa, budget.dsnr, budget.t_sys, budget.t_jpa,
           t_q, budget.sub_vacuum]
    return ResultTable(cols, ["K", "K", "1", "1", "K", "K", "K", "1"], [row])


COMMANDS = {
    "junction": cmd_junction,
    "tune": cmd_tune,
    "gain": cmd_gain,
    "sweep": cmd_sweep,
    "optimize": cmd_optimize,
    "noise": cmd_noise,
}


def build_parser():
    p = _Parser(prog="mejpa", description="Merged-element flux-pumped JPA design tool.")
    p.add_argument("--version", action="version", version=f"mejpa {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", required=True, help="JSON run configuration")
    p.add_argument("--out", help="output file (default: standard output)")
    p.add_argument("--format", choices=["csv", "json"], help="output format (default: csv)")
    p.add_argument("--grid-points", type=int, help="override the number of grid points")
    return p


def run_command(cmd, run, out=None, fmt=None, grid_points=None, seed=None):
    """Execute one command on a loaded configuration; returns the rendered text."""
    args = argparse.Namespace(grid_points=grid_points, seed=seed)
    table = COMMANDS[cmd](run, args)
    meta = {
        "tool": "mejpa", "version": __version__, "command": cmd,
        "config": os.path.basename(run.source) if run.source else None,
        "config_sha256": run.config_sha256, "defaults_applied": run.defaults_applied,
        "seed": seed, **table.metadata,
        "timestamp": dt.datetime.now(dt.timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ"),
    }
    table.metadata = meta
    text = render(table, fmt or run.output_format or "csv")
    if out:
        write_atomic(out, text)
    else:
        sys.stdout.write(text)
    return text


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.grid_points is not None and args.grid_points < 3:
        print("mejpa: error: --grid-points must be >= 3", file=sys.stderr)
        return EXIT_CONFIG
    try:
        seed = _seed()
        run = load_config(args.config)
    except (MejpaError, ValueError) as exc:
        print(f"mejpa: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        run_command(args.command, run, args.out, args.format, args.grid_points, seed)
    except Exception as exc:  # noqa: BLE001 - contract: never crash with a traceback
        if is_config_error(exc):
            print(f"mejpa: config error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        log.debug("model error", exc_info=True)
        print(f"mejpa: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_MODEL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
