"""
Batch experiment runner.

    adiabatic-sensing <subcommand> [--config FILE] [key=value ...]

The config is a flat YAML mapping; ``key=value`` overrides are applied after
the file, last one wins. Every CSV starts with ``# key: value`` lines that
echo the fully resolved config (seed included); :func:`load_echo` reads them
back. Exit status: 0 success, 2 configuration error, 3 numerical invariant
violated.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import warnings
from dataclasses import replace

import numpy as np
import yaml

from . import __version__
from .adiabatic import adiabatic_time, make_schedule, sweep
from .dd import audit_cycle, build_cycle, gate_duration
from .errors import ConfigError, InvariantError, ParameterError
from .estimate import scaling_fit, scan_sensitivity, sensitivity_closed_form, sql_and_enhancement
from .model import SensorParams
from .noise import NoiseSpec, plain_ramsey_contrast, sensor_leakage
from .protocol import CSV_COLUMNS, RamseyConfig, draw_noise, ramsey_run

SUBCOMMANDS = ("ramsey-scan", "scaling", "adiabatic", "dd-audit", "noise-compare")

# key -> (type, default); "floats"/"ints"/"strs" are lists
SCHEMA = {
    "b0": ("float", 0.02),
    "delta_b": ("float", 0.0),
    "h": ("float", 1.0),
    "gamma": ("float", 1.5),
    "lambda0": ("float", 10.0),
    "N": ("int", 1),
    "T_s": ("float", 40.0),
    "tau": ("float", 0.08),
    "order": ("int", 1),
    "layout": ("str", "symmetric"),
    "drive_during_interaction": ("bool", False),
    "models": ("strs", ["ideal", "dd_numeric"]),
    "prep_error": ("float", 0.0),
    "delta_prime": ("float?", None),
    "noise_kind": ("str", "none"),
    "noise_sigma": ("float", 0.0),
    "noise_tau_c": ("float", 10.0),
    "noise_target": ("str", "sensors"),
    "noise_dt": ("float?", None),
    "trajectories": ("int", 1),
    "seed": ("int", 0),
    "scan_param": ("str", "delta_b"),
    "scan_start": ("float", 0.0),
    "scan_stop": ("float", 0.1),
    "scan_points": ("int", 101),
    "N_values": ("ints", [1, 2, 4, 8, 16]),
    "scan_width_points": ("int", 401),
    "working_point": ("str", "best"),
    "epsilon_a": ("float", 0.01),
    "epsilon_values": ("floats", [0.04, 0.02, 0.01, 0.005]),
    "schedule": ("str", "local_adiabatic"),
    "sweep_dt": ("float", 1e-3),
    "tau_values": ("floats", [0.16, 0.08, 0.04]),
    "sigma_values": ("floats", [0.05, 0.1, 0.2]),
    "output_dir": ("str", "."),
}


def _coerce(key: str, value, where: str):
    kind, _ = SCHEMA[key]
    try:
        if kind == "float?":
            return None if value is None else float(value)
        if value is None:
            raise TypeError("missing value")
        if kind == "float":
            return float(value)
        if kind == "int":
            if isinstance(value, bool) or float(value) != int(float(value)):
                raise TypeError("not an integer")
            return int(float(value))
        if kind == "bool":
            if isinstance(value, bool):
                return value
            if str(value).lower() in ("true", "false"):
                return str(value).lower() == "true"
            raise TypeError("not a boolean")
        if kind == "str":
            if isinstance(value, (list, dict)):
                raise TypeError("not a string")
            return str(value)
        if not isinstance(value, list):
            value = [value]
        elem = {"floats": float, "ints": int, "strs": str}[kind]
        return [elem(v) for v in value]
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: bad value {value!r} for {key!r} ({kind}): {exc}") from None


def _parse_file(path: str) -> dict:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config: {exc}") from None
    try:
        root = yaml.compose(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML: {exc}") from None
    if root is None:
        return {}
    if not isinstance(root, yaml.MappingNode):
        raise ConfigError(f"{path}: config must be a flat mapping")
    out = {}
    for knode, vnode in root.value:
        where = f"{path}:{knode.start_mark.line + 1}"
        key = knode.value
        if key not in SCHEMA:
            raise ConfigError(f"{where}: unknown key {key!r}")
        if isinstance(vnode, yaml.MappingNode):
            raise ConfigError(f"{where}: nested mappings are not allowed")
        value = yaml.safe_load(yaml.serialize(vnode))
        out[key] = _coerce(key, value, where)
    return out


def _parse_overrides(items) -> dict:
    out = {}
    for item in items:
        if "=" not in item:
            raise ConfigError(f"override {item!r}: expected key=value")
        key, raw = item.split("=", 1)
        key = key.strip()
        if key not in SCHEMA:
            raise ConfigError(f"override {item!r}: unknown key {key!r}")
        try:
            value = yaml.safe_load(raw)
        except yaml.YAMLError as exc:
            raise ConfigError(f"override {item!r}: {exc}") from None
        out[key] = _coerce(key, value, f"override {item!r}")
    return out


def resolve_config(path: str | None = None, overrides=()) -> dict:
    """Defaults, then the file, then overrides (last wins); validated."""
    cfg = {k: (list(v) if isinstance(v, list) else v) for k, (_, v) in SCHEMA.items()}
    if path is not None:
        cfg.update(_parse_file(path))
    cfg.update(_parse_overrides(overrides))
    if not cfg["models"]:
        raise ConfigError("models must not be empty")
    try:
        for model in cfg["models"]:
            base_ramsey(cfg, model)
    except (ParameterError, InvariantError) as exc:
        raise ConfigError(f"invalid configuration: {exc}") from None
    return cfg


def _format(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if value is None:
        return "null"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, list):
        return "[" + ", ".join(_format(v) for v in value) + "]"
    if isinstance(value, str):
        return json.dumps(value)
    return str(value)


def echo_lines(cfg: dict, subcommand: str) -> list[str]:
    lines = [f"# adiabatic-sensing {__version__} {subcommand}"]
    lines += [f"# {k}: {_format(cfg[k])}" for k in SCHEMA]
    return lines


def load_echo(path: str) -> dict:
    """Rebuild the config from the header of a CSV written by this tool."""
    items = []
    with open(path) as fh:
        for line in fh:
            if not line.startswith("# "):
                break
            body = line[2:].rstrip("\n")
            key, sep, raw = body.partition(": ")
            if sep and key in SCHEMA:
                items.append(f"{key}={raw}")
    return resolve_config(None, items)


def base_ramsey(cfg: dict, model: str) -> RamseyConfig:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        params = SensorParams(cfg["b0"], cfg["delta_b"], cfg["h"], cfg["gamma"], cfg["lambda0"])
    noise = NoiseSpec(cfg["noise_kind"], cfg["noise_sigma"], cfg["noise_tau_c"], cfg["noise_target"], cfg["seed"])
    return RamseyConfig(
        params=params, N=cfg["N"], T_s=cfg["T_s"], tau=cfg["tau"], order=cfg["order"], layout=cfg["layout"],
        drive_during_interaction=cfg["drive_during_interaction"], model=model, prep_error=cfg["prep_error"],
        delta_prime=cfg["delta_prime"], noise=noise, noise_dt=cfg["noise_dt"], trajectories=cfg["trajectories"],
    )


def _write_csv(path: str, header: list[str], columns, rows):
    with open(path, "w", newline="") as fh:
        for line in header:
            fh.write(line + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        w.writerows(rows)


def _r(x) -> str:
    return repr(float(x))


def cmd_ramsey_scan(cfg: dict) -> list[str]:
    scan = np.linspace(cfg["scan_start"], cfg["scan_stop"], cfg["scan_points"])
    paths = []
    for model in cfg["models"]:
        curve = ramsey_run(base_ramsey(cfg, model), scan, cfg["scan_param"])
        path = os.path.join(cfg["output_dir"], f"ramsey_{model}.csv")
        _write_csv(path, echo_lines(cfg, "ramsey-scan"), CSV_COLUMNS, curve.rows())
        paths.append(path)
    return paths


def cmd_scaling(cfg: dict) -> list[str]:
    model = cfg["models"][-1]
    rows, points = [], []
    for N in cfg["N_values"]:
        c = replace(base_ramsey(cfg, model), N=N)
        wp = cfg["working_point"]
        rep, _ = scan_sensitivity(c, cfg["scan_width_points"], wp if wp in ("best", "max_slope") else float(wp),
                                  cfg["epsilon_a"])
        cf = sensitivity_closed_form(N, cfg["h"], cfg["gamma"], rep.T_a, rep.T_s, rep.tau_d, rep.tau, "physical")
        sql = sql_and_enhancement(N, rep.total_time, rep.T_s, cfg["h"], cfg["gamma"], "physical")
        points.append((N, rep.delta_b))
        rows.append([str(N), _r(rep.delta_b), _r(cf), _r(rep.delta_b / cf), _r(rep.sql_total_time),
                     _r(rep.sql_interrogation_time), _r(rep.enhancement), _r(sql.enhancement),
                     _r(rep.working_point), _r(rep.total_time)])
    exponent, intercept, r2 = scaling_fit(points)
    header = echo_lines(cfg, "scaling") + [
        f"# fit_model: {model}", f"# exponent: {exponent!r}", f"# intercept: {intercept!r}", f"# r2: {r2!r}",
    ]
    cols = ["N", "delta_b", "closed_form_physical", "ratio_to_closed_form", "sql_total_time",
            "sql_interrogation_time", "enhancement", "enhancement_formula", "working_point", "total_time"]
    path = os.path.join(cfg["output_dir"], "scaling.csv")
    _write_csv(path, header, cols, rows)
    return [path]


def cmd_adiabatic(cfg: dict) -> list[str]:
    b = cfg["b0"] + cfg["delta_b"]
    rows = []
    for eps in cfg["epsilon_values"]:
        T_a = adiabatic_time(eps, cfg["lambda0"], cfg["h"], b)
        if cfg["schedule"] == "linear":
            sched = make_schedule("linear", cfg["lambda0"], cfg["h"], b, eps, duration=T_a)
        else:
            sched = make_schedule(cfg["schedule"], cfg["lambda0"], cfg["h"], b, eps)
        res = sweep(sched, b, cfg["sweep_dt"])
        rows.append([_r(eps), _r(T_a), _r(sched.duration), _r(res.ground_fidelity), _r(1 - res.ground_fidelity),
                     _r(res.lz_estimate), _r(res.min_gap), _r(float(np.max(res.epsilon_trace)))])
    cols = ["epsilon_a", "T_a_closed_form", "schedule_duration", "ground_fidelity", "infidelity",
            "lz_estimate", "min_gap", "max_epsilon"]
    path = os.path.join(cfg["output_dir"], "adiabatic.csv")
    _write_csv(path, echo_lines(cfg, "adiabatic"), cols, rows)
    return [path]


def cmd_dd_audit(cfg: dict) -> list[str]:
    b = cfg["b0"] + cfg["delta_b"]
    tau_d = gate_duration(cfg["b0"], cfg["h"])
    rows = []
    for order in (1, 2):
        for tau in cfg["tau_values"]:
            cyc = build_cycle(order, tau, tau_d, cfg["layout"])
            a = audit_cycle(cyc, cfg["gamma"], b, cfg["b0"], cfg["h"], cfg["drive_during_interaction"])
            rows.append([str(order), _r(tau), cfg["layout"], str(cyc.gate_count), _r(cyc.interaction_time),
                         _r(cyc.duration), _r(a.zz), _r(a.analytic.zz), _r(a.residual), _r(a.residual_probe),
                         _r(a.analytic.delta_x), _r(a.second_order), _r(abs(a.residual - a.analytic.delta_x))])
    cols = ["order", "tau", "layout", "gate_count", "interaction_time", "duration", "zz_numeric", "zz_analytic",
            "residual", "residual_probe", "delta_x_analytic", "second_order_term", "abs_error"]
    path = os.path.join(cfg["output_dir"], "dd_audit.csv")
    _write_csv(path, echo_lines(cfg, "dd-audit"), cols, rows)
    return [path]


def cmd_noise_compare(cfg: dict) -> list[str]:
    rows = []
    for sigma in cfg["sigma_values"]:
        c = replace(base_ramsey(cfg, "dd_numeric"),
                    noise=NoiseSpec("ou", sigma, cfg["noise_tau_c"], "sensors", cfg["seed"]))
        protected = float(ramsey_run(c).contrast[0])
        T = c.realization_time
        sensors, _ = draw_noise(c)
        first = sensors[:, 0, :]
        plain = plain_ramsey_contrast(first, c.dt_noise, T)
        leak = sensor_leakage(c.params.b, c.params.h, first, c.dt_noise, c.T_s)
        rows.append([_r(sigma), _r(T), _r(protected), _r(plain), _r(float(np.mean(leak)))])
    cols = ["sigma", "total_time", "protected_contrast", "plain_contrast", "leakage_over_T_s"]
    path = os.path.join(cfg["output_dir"], "noise_compare.csv")
    _write_csv(path, echo_lines(cfg, "noise-compare"), cols, rows)
    return [path]


COMMANDS = {
    "ramsey-scan": cmd_ramsey_scan,
    "scaling": cmd_scaling,
    "adiabatic": cmd_adiabatic,
    "dd-audit": cmd_dd_audit,
    "noise-compare": cmd_noise_compare,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="adiabatic-sensing", description=__doc__.strip().splitlines()[0])
    ap.add_argument("subcommand", choices=SUBCOMMANDS)
    ap.add_argument("--config", "-c", help="flat YAML config file")
    ap.add_argument("overrides", nargs="*", metavar="key=value", help="config overrides, applied last")
    return ap


def run(subcommand: str, config_path: str | None = None, overrides=()) -> list[str]:
    cfg = resolve_config(config_path, overrides)
    os.makedirs(cfg["output_dir"], exist_ok=True)
    return COMMANDS[subcommand](cfg)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        paths = run(args.subcommand, args.config, args.overrides)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ParameterError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except InvariantError as exc:
        print(f"invariant violated: {exc}", file=sys.stderr)
        return 3
    for p in paths:
        print(p)
    return 0


if __name__ == "__main__":
    sys.exit(main())
