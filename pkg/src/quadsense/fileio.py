"""Configuration parsing, CSV emission and run-metadata sidecars.

All CSVs are UTF-8, comma-delimited, with a mandatory header row and floats
written with 17 significant digits so values round-trip exactly through
text.  Output files are never silently overwritten.
"""

from __future__ import annotations

import json
import os
from dataclasses import asdict
from typing import Optional

from .dynamics import IntegratorConfig, Trajectory
from .errors import ConfigError
from .model import SystemParams
from .sensing import SensingResult
from .stochastic import EnsembleResult
from .sweeps import SweepResult

TRAJECTORY_HEADER = "t,x_c,p_c,x_m,p_m"
ENSEMBLE_HEADER = ("t,mean_x_c,se_x_c,mean_p_c,se_p_c,"
                   "mean_x_m,se_x_m,mean_p_m,se_p_m")
SENSING_HEADER = "delta_omega,amp_ref,amp_shifted,delta_xc,mass_ratio,stabilized"
SWEEP_HEADER = "axis,axis_value,delta_omega,delta_xc,amp_ref,amp_shifted,status"

# Config keys: every rate in units of kappa except the physical kappa itself.
REQUIRED_KEYS = ("g_m", "delta", "omega_m", "gamma_m", "drive_E", "n_th")
OPTIONAL_KEYS = ("kappa_hz",)
KNOWN_KEYS = REQUIRED_KEYS + OPTIONAL_KEYS


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def parse_config_text(text: str, source: str = "<config>") -> dict:
    """Parse flat ``key = value`` lines; '#' starts a comment."""
    raw = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected key=value, got {line!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in KNOWN_KEYS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r} "
                              f"(known: {', '.join(KNOWN_KEYS)})")
        if key in raw:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        try:
            raw[key] = float(value.strip())
        except ValueError:
            raise ConfigError(f"{source}:{lineno}: value for {key!r} is not "
                              f"a number: {value.strip()!r}") from None
    return raw


def load_config(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config_text(text, source=path)


def apply_overrides(raw: dict, overrides) -> dict:
    out = dict(raw)
    for item in overrides or ():
        if "=" not in item:
            raise ConfigError(f"override must look like key=value, got {item!r}")
        key, _, value = item.partition("=")
        key = key.strip()
        if key not in KNOWN_KEYS:
            raise ConfigError(f"unknown override key {key!r}")
        try:
            out[key] = float(value.strip())
        except ValueError:
            raise ConfigError(f"override value for {key!r} is not a number: "
                              f"{value.strip()!r}") from None
    return out


def params_from_raw(raw: dict) -> SystemParams:
    missing = [k for k in REQUIRED_KEYS if k not in raw]
    if missing:
        raise ConfigError(f"missing required config keys: {', '.join(missing)}")
    try:
        return SystemParams(
            g_m=raw["g_m"], delta=raw["delta"], omega_m=raw["omega_m"],
            gamma_m=raw["gamma_m"], drive_E=raw["drive_E"], n_th=raw["n_th"],
            kappa=raw.get("kappa_hz", 1.0))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def open_new(path: str, force: bool = False):
    if os.path.exists(path) and not force:
        raise ConfigError(f"refusing to overwrite existing file {path} "
                          f"(pass force to allow)")
    return open(path, "w", encoding="utf-8", newline="\n")


def write_trajectory_csv(traj: Trajectory, path: str, force: bool = False):
    with open_new(path, force) as fh:
        fh.write(TRAJECTORY_HEADER + "\n")
        for t, row in zip(traj.times, traj.states):
            fh.write(",".join([fmt(t)] + [fmt(v) for v in row]) + "\n")


def write_ensemble_csv(result: EnsembleResult, path: str, force: bool = False):
    traj = result.mean_trajectory
    with open_new(path, force) as fh:
        fh.write(ENSEMBLE_HEADER + "\n")
        for t, mean, se in zip(traj.times, traj.states, result.stderr):
            cells = [fmt(t)]
            for i in range(4):
                cells.append(fmt(mean[i]))
                cells.append(fmt(se[i]))
            fh.write(",".join(cells) + "\n")


def write_sensing_csv(result: SensingResult, path: str, force: bool = False):
    with open_new(path, force) as fh:
        fh.write(SENSING_HEADER + "\n")
        row = result.csv_row()
        fh.write(",".join([
            fmt(row["delta_omega"]), fmt(row["amp_ref"]),
            fmt(row["amp_shifted"]), fmt(row["delta_xc"]),
            fmt(row["mass_ratio"]),
            "true" if row["stabilized"] else "false"]) + "\n")


def write_sweep_csv(result: SweepResult, path: str, force: bool = False):
    with open_new(path, force) as fh:
        fh.write(SWEEP_HEADER + "\n")
        for r in result.rows:
            fh.write(",".join([
                result.spec.axis, fmt(r.axis_value), fmt(r.delta_omega),
                fmt(r.delta_xc), fmt(r.amp_ref), fmt(r.amp_shifted),
                r.status]) + "\n")


def sidecar_payload(command: str, params: SystemParams, raw_config: dict,
                    overrides, cfg: IntegratorConfig, version: str,
                    seed: Optional[int] = None,
                    extra: Optional[dict] = None) -> dict:
    payload = {
        "tool": "quadsense",
        "version": version,
        "command": command,
        "params": {k: getattr(params, k) for k in
                   ("g_m", "delta", "omega_m", "gamma_m", "drive_E",
                    "n_th", "kappa")},
        "config_raw": dict(raw_config),
        "overrides": list(overrides or ()),
        "integrator": asdict(cfg),
        "seed": seed,
    }
    if "kappa_hz" in raw_config:
        kappa_hz = raw_config["kappa_hz"]
        physical = {
            "kappa_hz": kappa_hz,
            "omega_m_hz": params.omega_m * kappa_hz,
            "gamma_m_hz": params.gamma_m * kappa_hz,
        }
        if extra and "delta_omega" in extra:
            physical["delta_omega_hz"] = extra["delta_omega"] * kappa_hz
            physical["mass_ratio"] = 2.0 * extra["delta_omega"] / params.omega_m
        payload["physical"] = physical
    if extra:
        payload.update(extra)
    return payload


def write_sidecar(payload: dict, path: str, force: bool = False):
    with open_new(path, force) as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
