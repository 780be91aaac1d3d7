"""Command-line entry point.

    dampedeuler constants        --gamma 2 --nu 0
    dampedeuler barenblatt-check --gamma 2 --nu 0.5 --times 0,1,100
    dampedeuler lemma-check      --gamma 1.5 --samples 1000000 --seed 7
    dampedeuler simulate         --gamma 2 --nu 0 --cells 4000 --end-time 1e4
    dampedeuler rates            --run runs/simulate-<hash>
    dampedeuler full-pipeline    --gamma 2 --nu 0 --cells 4000 --end-time 1e4

Every run writes into ``<out>/<subcommand>-<config hash>/``.  Exit status is
0 when every asserted check passes, 2 when a check fails and 1 on a usage or
configuration error.
"""
import argparse
import json
import logging
import os
import sys

import numpy as np

from . import barenblatt as bb
from . import inequalities as iq
from .io import config_hash, dumps, read_csv_columns, write_csv, write_json
from .params import DomainError, derive_gas_model, rate_table
from .rates import (QUANTITIES, compare_to_theory, default_window, distance_table,
                    fit_slope, weighted_estimate_monitor, MassMismatch)
from .solver import (FluidState, Grid1D, SolverConfig, SolverError, required_half_width,
                     simulate)

log = logging.getLogger("dampedeuler")

EXIT_OK, EXIT_USAGE, EXIT_CHECK = 0, 1, 2

SUBCOMMANDS = ("constants", "barenblatt-check", "lemma-check", "simulate", "rates", "full-pipeline")

# every configurable key with its default; a JSON config file may set any of
# these and command-line flags override the file
DEFAULTS = {
    "gamma": 2.0, "nu": 0.0, "mass": 1.0, "epsilon": 1e-3, "quad_order": 64,
    "out": "runs", "seed": 0,
    # barenblatt-check
    "times": [0.0, 1.0, 100.0, 10000.0], "h_list": [1e-2, 5e-3, 2.5e-3],
    # lemma-check
    "cap": 2.0, "samples": 1000000, "taylor_samples": 10000,
    # simulate
    "initial_data": "box", "cells": 1000, "cfl": 0.45, "limiter": "minmod",
    "density_floor": 0.0, "end_time": 1000.0, "output_times": None, "n_outputs": 25,
    "half_width": None, "box_half_width": None, "perturbation": 0.1,
    # rates
    "run": None, "t_lo": None, "t_hi": None, "margin": 0.1,
}

KEYS_BY_COMMAND = {
    "constants": ("gamma", "nu", "mass", "epsilon", "quad_order"),
    "barenblatt-check": ("gamma", "nu", "mass", "quad_order", "times", "h_list"),
    "lemma-check": ("gamma", "nu", "cap", "samples", "taylor_samples", "seed"),
    "simulate": ("gamma", "nu", "mass", "quad_order", "initial_data", "cells", "cfl", "limiter",
                 "density_floor", "end_time", "output_times", "n_outputs", "half_width",
                 "box_half_width", "perturbation"),
    "rates": ("run", "epsilon", "t_lo", "t_hi", "margin"),
}
KEYS_BY_COMMAND["full-pipeline"] = tuple(dict.fromkeys(
    KEYS_BY_COMMAND["constants"] + KEYS_BY_COMMAND["barenblatt-check"]
    + KEYS_BY_COMMAND["lemma-check"] + KEYS_BY_COMMAND["simulate"]
    + ("t_lo", "t_hi", "margin")))

MASS_DRIFT_TOL = 1e-10
DARCY_TOL = 1e-6
BARENBLATT_MASS_TOL = 1e-8
ORDER_TARGET, ORDER_TOL = 2.0, 0.2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _float_list(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def build_parser():
    p = _Parser(prog="dampedeuler", description="Damped Euler / Barenblatt numerical laboratory")
    sub = p.add_subparsers(dest="command", metavar="subcommand")
    sub.required = True
    S = argparse.SUPPRESS
    for name in SUBCOMMANDS:
        sp = sub.add_parser(name, argument_default=S)
        keys = KEYS_BY_COMMAND[name]
        sp.add_argument("--config", help="JSON file of defaults; flags override it")
        sp.add_argument("--out", help="base output directory (default: runs)")
        sp.add_argument("-v", "--verbose", action="store_true")
        if "gamma" in keys:
            sp.add_argument("--gamma", type=float)
            sp.add_argument("--nu", type=float)
        if "mass" in keys:
            sp.add_argument("--mass", type=float)
        if "epsilon" in keys:
            sp.add_argument("--epsilon", type=float)
        if "quad_order" in keys:
            sp.add_argument("--quad-order", dest="quad_order", type=int)
        if "times" in keys:
            sp.add_argument("--times", type=_float_list, help="comma-separated times")
            sp.add_argument("--h-list", dest="h_list", type=_float_list,
                            help="comma-separated difference steps")
        if "cap" in keys:
            sp.add_argument("--cap", type=float)
            sp.add_argument("--samples", type=int)
            sp.add_argument("--taylor-samples", dest="taylor_samples", type=int)
            sp.add_argument("--seed", type=int)
        if "cells" in keys:
            sp.add_argument("--initial-data", dest="initial_data",
                            choices=("box", "barenblatt_perturbed"))
            sp.add_argument("--cells", type=int)
            sp.add_argument("--cfl", type=float)
            sp.add_argument("--limiter", choices=("none", "minmod"))
            sp.add_argument("--density-floor", dest="density_floor", type=float)
            sp.add_argument("--end-time", dest="end_time", type=float)
            sp.add_argument("--output-times", dest="output_times", type=_float_list)
            sp.add_argument("--n-outputs", dest="n_outputs", type=int,
                            help="log-spaced outputs in [1, end-time] plus t=0")
            sp.add_argument("--half-width", dest="half_width", type=float,
                            help="domain half width (default: sized from the final support)")
            sp.add_argument("--box-half-width", dest="box_half_width", type=float)
            sp.add_argument("--perturbation", type=float)
        if "run" in keys:
            sp.add_argument("--run", help="directory written by 'simulate'")
        if "margin" in keys:
            sp.add_argument("--t-lo", dest="t_lo", type=float)
            sp.add_argument("--t-hi", dest="t_hi", type=float)
            sp.add_argument("--margin", type=float)
    return p


def resolve_config(command, flags):
    """Defaults, then the JSON config file, then explicit flags."""
    keys = KEYS_BY_COMMAND[command]
    cfg = {k: DEFAULTS[k] for k in keys}
    path = flags.pop("config", None)
    if path is not None:
        try:
            with open(path) as fh:
                data = json.load(fh)
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read config file {path}: {exc}")
        if not isinstance(data, dict):
            raise UsageError("config file must hold a JSON object")
        unknown = set(data) - set(keys) - {"out"}
        if unknown:
            raise UsageError(f"unknown config keys for {command}: {sorted(unknown)}")
        cfg.update(data)
    out = flags.pop("out", None) or cfg.pop("out", None) or DEFAULTS["out"]
    cfg.pop("out", None)
    flags.pop("verbose", None)
    cfg.update(flags)
    return cfg, out


def _output_times(cfg):
    if cfg["output_times"] is not None:
        return sorted(float(t) for t in cfg["output_times"])
    T = float(cfg["end_time"])
    if T <= 1.0:
        return [0.0, T] if T > 0 else [0.0]
    return [0.0] + list(np.geomspace(1.0, T, int(cfg["n_outputs"])))


def _validate(command, cfg):
    """Raise before any computation if a module precondition fails."""
    if "gamma" in cfg:
        derive_gas_model(cfg["gamma"], cfg["nu"], cfg.get("quad_order", 64))
    if "mass" in cfg and not cfg["mass"] > 0:
        raise DomainError("mass must be positive")
    if "epsilon" in cfg and not 0.0 < cfg["epsilon"] < 0.01:
        raise DomainError("epsilon must lie in (0, 0.01)")
    if "times" in cfg:
        if any(t < 0 for t in cfg["times"]):
            raise DomainError("times must be >= 0")
        if len(cfg["h_list"]) < 2 or any(h <= 0 for h in cfg["h_list"]):
            raise DomainError("h-list needs at least two positive steps")
    if "samples" in cfg:
        if cfg["samples"] < 10 ** 4:
            raise DomainError("samples must be >= 10^4")
        if not cfg["cap"] > 0:
            raise DomainError("cap must be positive")
    if "cells" in cfg:
        if cfg["cells"] < 2:
            raise DomainError("need at least two cells")
        SolverConfig(cfl=cfg["cfl"], limiter=cfg["limiter"], density_floor=cfg["density_floor"],
                     end_time=cfg["end_time"], output_times=_output_times(cfg),
                     initial_data=cfg["initial_data"]).validate()
    if command == "rates":
        if cfg["run"] is None:
            raise UsageError("rates needs --run")
        if not os.path.isfile(os.path.join(cfg["run"], "manifest.json")):
            raise UsageError(f"no manifest.json in {cfg['run']}")
    if cfg.get("margin") is not None and not 0 <= cfg["margin"] < 1:
        raise DomainError("margin must lie in [0, 1)")


def run_dir(out, command, cfg):
    path = os.path.join(out, f"{command}-{config_hash(cfg)}")
    os.makedirs(path, exist_ok=True)
    return path


# ---------------------------------------------------------------------------
# subcommands; each returns (summary dict, all_checks_passed)


def do_constants(cfg, path):
    model = derive_gas_model(cfg["gamma"], cfg["nu"], cfg["quad_order"])
    table = rate_table(model, cfg["epsilon"])
    prof = bb.calibrate(model, cfg["mass"])
    constants = {
        "gamma": model.gamma, "nu": model.nu, "kappa": model.kappa, "alpha": model.alpha,
        "theta": model.theta, "lambda": model.lam, "C1": model.c1, "C2": model.c2,
        "A0": prof.a0, "B0": prof.b0, "support_edge_t0": float(bb.support_edge(prof, 0.0)),
        "k": table.k, "mu": table.mu, "mu_plus_eps": table.mu_plus_eps, "phi": table.phi,
        "mu_star": table.mu_star, "theta_star": table.theta_star, "omega": table.omega,
        "epsilon": table.epsilon, "first_branch": table.first_branch,
    }
    ratio = model.c2 / model.c1
    ratio_ok = abs(ratio - 2 * model.gamma * (model.gamma + 1) / (model.gamma - 1) ** 2) <= 1e-10 * ratio
    verdicts = {"c2_over_c1": "PASS" if ratio_ok else "FAIL",
                "k_positive": "PASS" if table.k > 0 else "FAIL",
                "phi_positive": "PASS" if table.phi > 0 else "FAIL"}
    summary = {"config": cfg, "constants": constants, "verdicts": verdicts}
    write_json(os.path.join(path, "constants.json"), summary)
    return summary, all(v == "PASS" for v in verdicts.values())


def _observed_order(residuals, hs):
    return float(np.polyfit(np.log(hs), np.log(residuals), 1)[0])


def do_barenblatt_check(cfg, path):
    model = derive_gas_model(cfg["gamma"], cfg["nu"], cfg["quad_order"])
    prof = bb.calibrate(model, cfg["mass"])
    hs = sorted(cfg["h_list"], reverse=True)
    rows = {"t": [], "mass_error": [], "darcy_error": [], "pme_residual": [], "edge": []}
    orders = []
    for t in cfg["times"]:
        edge = float(bb.support_edge(prof, t))
        mass_err = abs(bb.mass_integral(prof, t) - prof.mass) / prof.mass
        x = np.linspace(-0.9 * edge, 0.9 * edge, 100)
        ref = bb.darcy_momentum(prof, x, t)
        darcy = float(np.max(np.abs(bb.momentum(prof, x, t) - ref)) / np.max(np.abs(ref)))
        res = [bb.pme_residual(prof, h, t, similarity=True) for h in hs]
        orders.append(_observed_order(res, hs))
        for key, val in zip(rows, (t, mass_err, darcy, res[-1], edge)):
            rows[key].append(val)
    write_csv(os.path.join(path, "barenblatt.csv"), list(rows), list(rows.values()))
    ok_mass = max(rows["mass_error"]) < BARENBLATT_MASS_TOL
    ok_darcy = max(rows["darcy_error"]) < DARCY_TOL
    ok_order = all(abs(o - ORDER_TARGET) <= ORDER_TOL for o in orders)
    verdicts = {"mass": "PASS" if ok_mass else "FAIL", "darcy": "PASS" if ok_darcy else "FAIL",
                "pme_order": "PASS" if ok_order else "FAIL"}
    summary = {"config": cfg, "observed_orders": dict(zip([fmt_key(t) for t in cfg["times"]], orders)),
               "max_mass_error": max(rows["mass_error"]), "max_darcy_error": max(rows["darcy_error"]),
               "verdicts": verdicts}
    write_json(os.path.join(path, "barenblatt.json"), summary)
    return summary, ok_mass and ok_darcy and ok_order


def fmt_key(t):
    return format(float(t), ".17g")


def lemma_reports(cfg):
    model = derive_gas_model(cfg["gamma"], cfg["nu"])
    cap, n, seed = cfg["cap"], int(cfg["samples"]), int(cfg["seed"])
    reports = [iq.check_lemma31(model, cap, n, seed)]
    reports.extend(iq.check_lemma32(model, cap, n, seed))
    if model.gamma < 2.0:
        reports.extend(iq.check_lemma33(model, cap, n, seed))
    # Taylor remainder for the power weight |xi|^(2 gamma/(gamma-1))
    k = 2.0 * model.gamma / (model.gamma - 1.0)
    for order in (0, 1, 2):
        reports.append(iq.check_taylor_remainder(k, order, cfg["taylor_samples"], seed))
    return reports


def do_lemma_check(cfg, path):
    reports = lemma_reports(cfg)
    verdicts = {r.lemma_id: "PASS" if r.passed else "FAIL" for r in reports}
    summary = {"config": cfg, "reports": [r.to_dict() for r in reports], "verdicts": verdicts}
    write_json(os.path.join(path, "lemmas.json"), summary)
    return summary, all(r.passed for r in reports)


def _grid_for(cfg, prof):
    half = cfg["half_width"]
    if half is None:
        half = required_half_width(prof, cfg["end_time"])
    return Grid1D.symmetric(float(half), int(cfg["cells"]))


def do_simulate(cfg, path):
    model = derive_gas_model(cfg["gamma"], cfg["nu"], cfg["quad_order"])
    prof = bb.calibrate(model, cfg["mass"])
    grid = _grid_for(cfg, prof)
    times = _output_times(cfg)
    scfg = SolverConfig(cfl=cfg["cfl"], limiter=cfg["limiter"], density_floor=cfg["density_floor"],
                        end_time=cfg["end_time"], output_times=times,
                        initial_data=cfg["initial_data"], box_half_width=cfg["box_half_width"],
                        perturbation=cfg["perturbation"]).validate()
    manifest = {"config": cfg, "grid": {"x_min": grid.x_min, "x_max": grid.x_max,
                                        "n_cells": grid.n_cells, "dx": grid.dx}}

    def progress(state, diag):
        log.info("t=%.6g steps=%d", state.time, diag.steps)

    try:
        snaps, diag = simulate(model, grid, scfg, cfg["mass"], progress=progress)
    except SolverError as exc:
        manifest["error"] = f"{type(exc).__name__}: {exc}"
        manifest["verdicts"] = {"run_completed": "FAIL"}
        write_json(os.path.join(path, "manifest.json"), manifest)
        return manifest, False
    entries = []
    for i, s in enumerate(snaps):
        name = f"snapshot_{i:04d}.csv"
        write_csv(os.path.join(path, name), ["x", "rho", "mom"], [grid.centers, s.rho, s.mom])
        entries.append({"index": i, "time": s.time, "file": name, "mass": s.mass()})
    d = diag.to_dict()
    checks = {
        "run_completed": True,
        "mass_conservation": d["max_mass_drift"] < MASS_DRIFT_TOL,
        "positivity": d["min_rho"] >= 0.0,
        "invariant_region": d["max_speed_ratio"] <= d["c_inv"] + scfg.invariant_tol,
    }
    manifest.update({"diagnostics": d, "snapshots": entries,
                     "verdicts": {k: "PASS" if v else "FAIL" for k, v in checks.items()}})
    write_json(os.path.join(path, "manifest.json"), manifest)
    return manifest, all(checks.values())


def load_run(run_path):
    """Read a simulate directory back into (model, profile, snapshots, manifest)."""
    with open(os.path.join(run_path, "manifest.json")) as fh:
        manifest = json.load(fh)
    if "snapshots" not in manifest:
        raise UsageError(f"{run_path} holds no snapshots (failed run?)")
    cfg = manifest["config"]
    model = derive_gas_model(cfg["gamma"], cfg["nu"], cfg.get("quad_order", 64))
    prof = bb.calibrate(model, cfg["mass"])
    g = manifest["grid"]
    grid = Grid1D(g["x_min"], g["x_max"], g["n_cells"])
    snaps = []
    for e in manifest["snapshots"]:
        cols = read_csv_columns(os.path.join(run_path, e["file"]))
        snaps.append(FluidState(float(e["time"]), cols["rho"], cols["mom"], grid,
                                manifest["diagnostics"]["c_inv"]))
    return model, prof, snaps, manifest


def rates_from_snapshots(model, prof, snaps, epsilon, t_lo, t_hi, margin, path):
    table = rate_table(model, epsilon)
    series = distance_table(model, prof, snaps)
    times = series["l1_density"].times
    window = list(default_window(times))
    if t_lo is not None:
        window[0] = t_lo
    if t_hi is not None:
        window[1] = t_hi
    fits = [fit_slope(series[q], window) for q in QUANTITIES]
    rows = compare_to_theory(fits, table, margin)
    cols = ["quantity", "t_lo", "t_hi", "slope", "stderr", "theory_rate", "verdict"]
    write_csv(os.path.join(path, "rates.csv"), cols, [[r[c] for r in rows] for c in cols])
    write_csv(os.path.join(path, "series.csv"), ["t"] + list(QUANTITIES),
              [times] + [series[q].values for q in QUANTITIES])
    monitor = weighted_estimate_monitor(table, series)
    verdicts = {r["quantity"]: r["verdict"] for r in rows}
    verdicts.update({f"weighted_{k}": v["verdict"] for k, v in monitor.items()})
    ok = not any(v in ("INCONSISTENT", "UNBOUNDED") for v in verdicts.values())
    summary = {"window": window, "margin": margin, "rate_table": table.__dict__,
               "fits": rows, "weighted_monitor": monitor, "verdicts": verdicts}
    return summary, ok


def do_rates(cfg, path):
    model, prof, snaps, _ = load_run(cfg["run"])
    summary, ok = rates_from_snapshots(model, prof, snaps, cfg["epsilon"], cfg["t_lo"],
                                       cfg["t_hi"], cfg["margin"], path)
    summary = {"config": cfg, **summary}
    write_json(os.path.join(path, "rates.json"), summary)
    return summary, ok


def do_full_pipeline(cfg, path):
    def part(name, keys):
        sub = {k: cfg[k] for k in keys if k in cfg}
        d = os.path.join(path, name)
        os.makedirs(d, exist_ok=True)
        return sub, d

    verdicts = {}
    results = {}
    for name, fn in (("constants", do_constants), ("barenblatt-check", do_barenblatt_check),
                     ("lemma-check", do_lemma_check), ("simulate", do_simulate)):
        sub, d = part(name, KEYS_BY_COMMAND[name])
        summary, ok = fn(sub, d)
        results[name] = ok
        verdicts.update({f"{name}/{k}": v for k, v in summary["verdicts"].items()})
    if results["simulate"]:
        sim_dir = os.path.join(path, "simulate")
        model, prof, snaps, _ = load_run(sim_dir)
        d = os.path.join(path, "rates")
        os.makedirs(d, exist_ok=True)
        summary, ok = rates_from_snapshots(model, prof, snaps, cfg["epsilon"], cfg["t_lo"],
                                           cfg["t_hi"], cfg["margin"], d)
        write_json(os.path.join(d, "rates.json"), summary)
        results["rates"] = ok
        verdicts.update({f"rates/{k}": v for k, v in summary["verdicts"].items()})
    else:
        results["rates"] = False
        verdicts["rates/run_available"] = "FAIL"
    summary = {"config": cfg, "stages": results, "verdicts": verdicts}
    write_json(os.path.join(path, "pipeline.json"), summary)
    return summary, all(results.values())


HANDLERS = {
    "constants": do_constants, "barenblatt-check": do_barenblatt_check,
    "lemma-check": do_lemma_check, "simulate": do_simulate, "rates": do_rates,
    "full-pipeline": do_full_pipeline,
}


def run(argv=None):
    """Parse ``argv``, execute one subcommand and return the exit status."""
    try:
        ns = build_parser().parse_args(argv)
        flags = vars(ns)
        command = flags.pop("command")
        verbose = flags.get("verbose", False)
        logging.basicConfig(level=logging.INFO if verbose else logging.WARNING,
                            format="%(levelname)s %(message)s")
        cfg, out = resolve_config(command, flags)
        if command == "rates":
            cfg["run"] = os.path.normpath(cfg["run"]) if cfg["run"] else None
        _validate(command, cfg)
    except (UsageError, DomainError, ValueError) as exc:
        print(f"dampedeuler: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    path = run_dir(out, command, cfg)
    try:
        summary, ok = HANDLERS[command](cfg, path)
    except (UsageError, DomainError, MassMismatch, OSError) as exc:
        print(f"dampedeuler: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    sys.stdout.write(dumps({"run_dir": path, "verdicts": summary["verdicts"]}))
    if command == "constants":
        sys.stdout.write(dumps(summary["constants"]))
    return EXIT_OK if ok else EXIT_CHECK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
