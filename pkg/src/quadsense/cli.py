"""Command-line entry point: one command, one deterministic artifact set.

Every command loads the flat key=value configuration, applies --set
overrides, runs the requested operation and writes its CSV(s) next to a
``*.run.json`` sidecar echoing the full parameter set, tolerances, seed and
tool version.  Existing outputs are never overwritten without --force.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import __version__, fileio
from .dynamics import IntegratorConfig, integrate_means
from .errors import ConfigError, QuadsenseError
from .sensing import DEFAULT_SHIFT_SIGN, delta_xc_exact
from .stochastic import NoiseSpec, ensemble_mean
from .sweeps import (find_optimal_drive, sweep_coupling, sweep_drive,
                     sweep_quality, sweep_sideband)

FIG2_DELTA_OMEGAS = "0.001,0.002,0.003,0.004,0.005,0.006"
DRIVE_VALUES = "1e6,2e6,3e6,4.5e6,6e6,9e6,1.3e7,1.8e7,2.5e7,3.5e7"
COUPLING_VALUES = "1e-7,3e-7,1e-6,3e-6,1e-5"
SIDEBAND_VALUES = "50,100,200,400"
SIDEBAND_RATIOS = "1e-5,2e-5,3e-5,5e-5,7e-5,1e-4"
QUALITY_VALUES = "1e4,1e5,1e6,1e7"


def _floats(text: str):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"expected a comma-separated list of numbers, "
                          f"got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="quadsense",
        description="Optomechanical quadrature mass-sensing simulator")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="flat key=value file")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override a config value (repeatable)")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--force", action="store_true",
                       help="allow overwriting existing output files")
        p.add_argument("--t-end", type=float, default=600.0,
                       help="nominal measurement time in 1/kappa")
        p.add_argument("--rel-tol", type=float, default=1.0e-9)
        p.add_argument("--shift-sign", type=int, choices=(-1, 1),
                       default=DEFAULT_SHIFT_SIGN,
                       help="sign of the applied frequency shift "
                            "(-1: added mass lowers omega_m)")

    p = sub.add_parser("simulate", help="mean-field trajectory CSV")
    common(p)
    p.add_argument("--delta-omega", type=float, default=0.0)

    p = sub.add_parser("ensemble", help="stochastic ensemble mean CSV")
    common(p)
    p.add_argument("--delta-omega", type=float, default=0.0)
    p.add_argument("--trajectories", type=int, default=100)

    p = sub.add_parser("delta", help="exact sensing signal CSV")
    common(p)
    p.add_argument("--delta-omega", type=float, required=True)
    p.add_argument("--no-auto-extend", action="store_true",
                   help="measure at --t-end even if not stabilized there")

    for name, help_text in (("sweep-drive", "sensing signal vs drive amplitude"),
                            ("sweep-coupling", "sensing signal vs g_m"),
                            ("sweep-quality", "sensing signal vs Q_m")):
        p = sub.add_parser(name, help=help_text)
        common(p)
        defaults = {"sweep-drive": DRIVE_VALUES,
                    "sweep-coupling": COUPLING_VALUES,
                    "sweep-quality": QUALITY_VALUES}[name]
        p.add_argument("--values", default=defaults,
                       help="comma-separated axis values")
        p.add_argument("--delta-omegas", default=FIG2_DELTA_OMEGAS)

    p = sub.add_parser("sweep-sideband", help="sensing signal vs omega_m/kappa")
    common(p)
    p.add_argument("--values", default=SIDEBAND_VALUES)
    p.add_argument("--ratios", default=SIDEBAND_RATIOS,
                   help="relative deviations delta_omega/omega_m")
    p.add_argument("--j-target", type=float, default=0.06)

    p = sub.add_parser("optimize-drive", help="golden-section drive optimum")
    common(p)
    p.add_argument("--delta-omega", type=float, required=True)
    p.add_argument("--bracket", required=True, metavar="LO,HI")
    return parser


def _prepare(args):
    raw = fileio.apply_overrides(fileio.load_config(args.config), args.set)
    params = fileio.params_from_raw(raw)
    cfg = IntegratorConfig(t_end=args.t_end, rel_tol=args.rel_tol)
    os.makedirs(args.out, exist_ok=True)
    return params, raw, cfg


def _emit(args, name, writer, payload):
    path = os.path.join(args.out, name)
    writer(path)
    sidecar = os.path.splitext(path)[0] + ".run.json"
    fileio.write_sidecar(payload, sidecar, force=args.force)
    return [path, sidecar]


def run(args) -> list:
    """Execute one parsed command; returns the list of files written."""
    params, raw, cfg = _prepare(args)

    def payload(**extra):
        return fileio.sidecar_payload(
            args.command, params, raw, args.set, cfg, __version__,
            seed=args.seed, extra={"shift_sign": args.shift_sign, **extra})

    if args.command == "simulate":
        omega_eff = params.omega_m + args.shift_sign * args.delta_omega
        traj = integrate_means(params, omega_eff, cfg)
        tag = repr(float(args.delta_omega))  # shortest round-trip, clean names
        return _emit(args, f"trajectory_dw{tag}.csv",
                     lambda p: fileio.write_trajectory_csv(traj, p, args.force),
                     payload(delta_omega=args.delta_omega,
                             omega_m_eff=omega_eff))

    if args.command == "ensemble":
        noise = NoiseSpec(seed=args.seed, n_trajectories=args.trajectories)
        omega_eff = params.omega_m + args.shift_sign * args.delta_omega
        result = ensemble_mean(params, omega_eff, noise, cfg)
        return _emit(args, "ensemble.csv",
                     lambda p: fileio.write_ensemble_csv(result, p, args.force),
                     payload(delta_omega=args.delta_omega,
                             n_trajectories=args.trajectories))

    if args.command == "delta":
        result = delta_xc_exact(params, args.delta_omega, cfg,
                                shift_sign=args.shift_sign,
                                auto_extend=not args.no_auto_extend,
                                require_stabilized=not args.no_auto_extend)
        return _emit(args, "sensing.csv",
                     lambda p: fileio.write_sensing_csv(result, p, args.force),
                     payload(delta_omega=args.delta_omega,
                             t_end_used=result.t_end_used))

    if args.command in ("sweep-drive", "sweep-coupling", "sweep-quality"):
        values = _floats(args.values)
        dws = _floats(args.delta_omegas)
        fn = {"sweep-drive": sweep_drive, "sweep-coupling": sweep_coupling,
              "sweep-quality": sweep_quality}[args.command]
        result = fn(params, values, dws, cfg, shift_sign=args.shift_sign)
        return _emit(args, f"sweep_{result.spec.axis}.csv",
                     lambda p: fileio.write_sweep_csv(result, p, args.force),
                     payload(values=values, delta_omegas=dws))

    if args.command == "sweep-sideband":
        values = _floats(args.values)
        ratios = _floats(args.ratios)
        result = sweep_sideband(params, values, ratios, args.j_target, cfg,
                                shift_sign=args.shift_sign)
        return _emit(args, "sweep_sideband.csv",
                     lambda p: fileio.write_sweep_csv(result, p, args.force),
                     payload(values=values, ratios=ratios,
                             j_target=args.j_target))

    if args.command == "optimize-drive":
        bracket = _floats(args.bracket)
        if len(bracket) != 2:
            raise ConfigError("--bracket needs exactly LO,HI")
        e_opt, dxc_opt = find_optimal_drive(params, args.delta_omega, bracket,
                                            cfg, shift_sign=args.shift_sign)

        def write(path):
            with fileio.open_new(path, args.force) as fh:
                fh.write("E_opt,delta_xc_opt\n")
                fh.write(f"{fileio.fmt(e_opt)},{fileio.fmt(dxc_opt)}\n")

        return _emit(args, "optimum.csv", write,
                     payload(delta_omega=args.delta_omega, bracket=bracket,
                             E_opt=e_opt, delta_xc_opt=dxc_opt))

    raise AssertionError(f"unhandled command {args.command}")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        written = run(args)
    except ConfigError as exc:
        print(json.dumps({"error": "ConfigError", "message": str(exc)}),
              file=sys.stderr)
        return 2
    except QuadsenseError as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return 3
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
