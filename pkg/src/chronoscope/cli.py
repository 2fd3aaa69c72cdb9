"""``chronoscope`` command-line front end.

Every run writes plot-ready CSV/JSON files plus ``manifest.json`` into ``--out``.
Settings may come from a JSON ``--config`` file whose keys are the flag names
(``T0_ps``, ``bw2_ghz``, ...); explicit flags override the file.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import math
import os
import platform
import sys
from pathlib import Path
from typing import Any, Sequence

import numpy as np
import scipy

from . import __version__
from .elements import element_to_dict, load_chain, trace_chain, write_stage_csv
from .envelope import TimeGrid, from_function, write_envelope_csv
from .errors import ChronoscopeError, ConfigParseError
from .hom import (
    EmitterPair,
    SpdcSource,
    coincidence_curve,
    visibility_scan,
    write_hom_curve_csv,
    write_visibility_scan_csv,
)
from .pulses import parse_pulse
from .spdc import SpdcConfig, jsa, phase_matching_solve, photon_marginals, write_jsa_csv, write_marginals_csv
from .telescope import TelescopeDesign, classify, fresnel_design

GRID_ENV = "CHRONOSCOPE_GRID_N"
DEFAULT_GRID_N = 8192
CHIRP_TOLERANCE = 1e-3


def ghz_to_rad_per_ps(nu_ghz: float) -> float:
    return 2.0 * math.pi * nu_ghz * 1e-3


def rad_per_ps_to_ghz(omega: float) -> float:
    return omega / (2.0 * math.pi) * 1e3


def parse_range(text: str, drop_zero: bool = False) -> np.ndarray:
    """``start:stop:step`` inclusive of both ends, or a comma-separated list."""
    try:
        if ":" in text:
            start, stop, step = (float(x) for x in text.split(":"))
            if step == 0 or (stop - start) / step < 0:
                raise ValueError("step does not reach stop")
            count = int(round((stop - start) / step)) + 1
            values = np.round(np.linspace(start, stop, count), 12)
        else:
            values = np.array([float(x) for x in text.split(",") if x.strip()])
    except ValueError as exc:
        raise ConfigParseError(f"bad range {text!r}: {exc}") from exc
    if drop_zero:
        values = values[values != 0]
    if values.size == 0:
        raise ConfigParseError(f"range {text!r} is empty")
    return values + 0.0


def _default_grid_n() -> int:
    raw = os.environ.get(GRID_ENV)
    if raw is None:
        return DEFAULT_GRID_N
    try:
        return int(raw)
    except ValueError as exc:
        raise ConfigParseError(f"{GRID_ENV}={raw!r} is not an integer") from exc


def _dump_json(data: Any, path: Path) -> None:
    path.write_text(json.dumps(data, indent=2, sort_keys=True, default=_json_default) + "\n", encoding="utf-8")


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, Path):
        return str(obj)
    return str(obj)


def _print_report(title: str, items: dict) -> None:
    print(title)
    for key, value in items.items():
        text = f"{value:.12g}" if isinstance(value, float) else str(value)
        print(f"  {key}: {text}")


# ---------------------------------------------------------------- commands


def cmd_design(args, out: Path) -> tuple[dict, list[str]]:
    bw2 = ghz_to_rad_per_ps(args.bw2_ghz)
    report = fresnel_design(args.T0_ps, args.M, bw2)
    design = report.design()
    cls = classify(design)
    data = {
        "fresnel_design": report.as_dict(),
        "modulator_bandwidth_2_ghz": args.bw2_ghz,
        "required_bw_1_ghz": rad_per_ps_to_ghz(report.required_bw_1),
        "required_bw_2_ghz": rad_per_ps_to_ghz(report.required_bw_2),
        "telescope": design.as_dict(),
        "classification": {"kind": cls.kind.value, "spatial_counterpart": cls.spatial_counterpart.value},
        "chain": [element_to_dict(e) for e in report.elements()],
    }
    _dump_json(data, out / "design.json")
    _print_report(
        "Fresnel telescope design",
        {
            "focal_1_min_ps2": report.focal_1_min,
            "focal_2_ps2": report.focal_2,
            "inter_gdd_ps2": report.inter_gdd,
            "output_gdd_ps2": report.output_gdd,
            "required_bw_1_ghz": data["required_bw_1_ghz"],
            "min_output_fwhm_ps": report.min_output_fwhm,
            "fourier_processor_M_omega": report.fourier_processor_M_omega,
            "classification": cls.kind.value,
        },
    )
    return {"bw2_rad_per_ps": bw2, **report.as_dict()}, ["design.json"]


def cmd_classify(args, out: Path) -> tuple[dict, list[str]]:
    design = TelescopeDesign(args.M, args.D_inter, args.D_in)
    cls = classify(design)
    data = {
        "telescope": design.as_dict(),
        "kind": cls.kind.value,
        "spatial_counterpart": cls.spatial_counterpart.value,
        "has_spatial_counterpart": cls.has_spatial_counterpart,
        "erecting": cls.erecting,
        "chain": [element_to_dict(e) for e in design.elements()],
    }
    _dump_json(data, out / "classify.json")
    _print_report("Telescope classification", {k: data[k] for k in ("kind", "spatial_counterpart", "erecting")})
    return design.as_dict(), ["classify.json"]


def cmd_propagate(args, out: Path) -> tuple[dict, list[str]]:
    if args.chain:
        chain = load_chain(args.chain)
    elif args.M is not None and args.D_inter is not None:
        chain = TelescopeDesign(args.M, args.D_inter, args.D_in).elements()
    else:
        raise ConfigParseError("propagate needs --chain FILE or both --M and --D-inter")
    try:
        pulse = parse_pulse(args.pulse)
    except (TypeError, ValueError) as exc:
        raise ConfigParseError(f"bad --pulse {args.pulse!r}: {exc}") from exc
    grid = TimeGrid(args.grid_n, args.dt, args.t_center)
    records = trace_chain(from_function(pulse, grid), chain)
    write_stage_csv(records, out / "stages.csv")
    write_envelope_csv(records[0].envelope, out / "input_envelope.csv")
    write_envelope_csv(records[-1].envelope, out / "output_envelope.csv")
    last = records[-1]
    phase_metric = abs(last.chirp_c2) * last.moments.delta_t**2
    verdict = "chirp-free" if phase_metric <= CHIRP_TOLERANCE else "chirped"
    derived = {
        "grid_n": args.grid_n,
        "dt_ps": args.dt,
        "stages": len(records) - 1,
        "output_delta_t_ps": last.moments.delta_t,
        "residual_chirp_ps2_inv": last.chirp_c2,
        "chirp_phase_metric_rad": phase_metric,
        "verdict": verdict,
        "chain": [element_to_dict(e) for e in chain],
    }
    _dump_json(derived, out / "propagate.json")
    _print_report("Propagation", {k: derived[k] for k in ("stages", "output_delta_t_ps", "residual_chirp_ps2_inv", "verdict")})
    return derived, ["stages.csv", "input_envelope.csv", "output_envelope.csv", "propagate.json"]


def _spdc_config(args) -> SpdcConfig:
    return SpdcConfig(
        lambda_p=args.lambda_p,
        length_mm=args.length_mm,
        pump_sigma=args.pump_sigma,
        n_omega=args.n_omega,
        n_omega_prime=args.n_omega_prime,
        sidelobe_filter=not args.no_filter,
    )


def cmd_jsa(args, out: Path) -> tuple[dict, list[str]]:
    config = _spdc_config(args)
    j = jsa(config, args.kind)
    marg = photon_marginals(j)
    pm = j.matching or phase_matching_solve(config.crystal, config.lambda_p, config.length_mm)
    write_jsa_csv(j, out / "jsa.csv")
    write_marginals_csv(marg, out / "marginals.csv")
    derived = {
        "phase_matching": pm.report(),
        "kind": args.kind,
        "sigma_o_rad_per_ps": marg.sigma_o,
        "sigma_e_rad_per_ps": marg.sigma_e,
        "K": marg.K,
        "delta_t_o_ps": marg.delta_t_o,
        "delta_t_e_ps": marg.delta_t_e,
        "fwhm_t_o_ps": marg.fwhm_t_o,
        "fwhm_t_e_ps": marg.fwhm_t_e,
    }
    _dump_json(derived, out / "phase_matching.json")
    _print_report(
        "SPDC pair",
        {"theta_p_deg": pm.theta_p, "tau_e_ps": pm.tau_e, **{k: derived[k] for k in ("K", "fwhm_t_o_ps", "fwhm_t_e_ps")}},
    )
    return derived, ["jsa.csv", "marginals.csv", "phase_matching.json"]


def cmd_hom(args, out: Path) -> tuple[dict, list[str]]:
    if args.scan_M is None and args.M is None:
        raise ConfigParseError("hom needs --M and/or --scan-M")
    if args.source == "emitters":
        if args.tau1 is None or args.tau2 is None:
            raise ConfigParseError("emitter source needs --tau1 and --tau2")
        source = EmitterPair(args.tau1, args.tau2, args.mu1, args.mu2)
    elif args.source == "spdc":
        source = SpdcSource(args.K, args.omega_p)
    else:
        source = jsa(_spdc_config(args), args.kind)
    derived: dict = {"source": args.source}
    files = []
    if args.scan_M is not None:
        if args.source == "jsa":
            raise ConfigParseError("visibility scans use the closed forms; choose --source spdc or emitters")
        points = visibility_scan(source, parse_range(args.scan_M, drop_zero=True))
        write_visibility_scan_csv(points, out / "visibility_scan.csv")
        files.append("visibility_scan.csv")
        best = max(points, key=lambda p: p.visibility)
        derived["scan_max"] = {"M": best.M, "visibility": best.visibility, "argmax_delay_ps": best.argmax_delay}
        _print_report("Visibility scan", {"points": len(points), "best_M": best.M, "best_visibility": best.visibility})
    if args.M is not None:
        delays = parse_range(args.delays)
        curve = coincidence_curve(source, args.M, delays, mode=args.mode, t_d_mode=args.t_d_mode)
        write_hom_curve_csv(curve, out / "hom_curve.csv")
        files.append("hom_curve.csv")
        derived["curve"] = {**curve.metadata, "visibility": curve.visibility, "points": len(delays)}
        _print_report("Coincidence curve", {"M": args.M, "visibility": curve.visibility})
    return derived, files


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", type=Path, default=Path("."), help="output directory (created if missing)")
    common.add_argument("--config", type=Path, help="JSON file of flag defaults; flags win")

    parser = argparse.ArgumentParser(prog="chronoscope", description="Time-telescope and HOM interference toolkit.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("design", parents=[common], help="size a Fresnel-lens compressing telescope")
    p.add_argument("--T0-ps", dest="T0_ps", type=float, required=True, help="input intensity FWHM [ps]")
    p.add_argument("--M", type=float, required=True, help="magnification, 0 < M < 1")
    p.add_argument("--bw2-ghz", dest="bw2_ghz", type=float, required=True, help="second modulator bandwidth [GHz]")
    p.set_defaults(handler=cmd_design)

    p = sub.add_parser("classify", parents=[common], help="classify a telescope")
    p.add_argument("--M", type=float, required=True)
    p.add_argument("--D-inter", dest="D_inter", type=float, required=True, help="inter-lens GDD [ps^2]")
    p.add_argument("--D-in", dest="D_in", type=float, default=0.0, help="input GDD [ps^2]")
    p.set_defaults(handler=cmd_classify)

    p = sub.add_parser("propagate", parents=[common], help="propagate a pulse through an element chain")
    p.add_argument("--chain", type=Path, help="JSON list of elements")
    p.add_argument("--M", type=float, help="build a telescope chain instead of --chain")
    p.add_argument("--D-inter", dest="D_inter", type=float)
    p.add_argument("--D-in", dest="D_in", type=float, default=0.0)
    p.add_argument("--pulse", default="gauss:sigma_t=1", help="e.g. gauss:sigma_t=1,c2=0.1 or exp:tau=1,rise=0.2")
    p.add_argument("--grid-n", dest="grid_n", type=int, default=None, help=f"grid points (default ${GRID_ENV} or {DEFAULT_GRID_N})")
    p.add_argument("--dt", type=float, default=0.01, help="grid step [ps]")
    p.add_argument("--t-center", dest="t_center", type=float, default=0.0)
    p.set_defaults(handler=cmd_propagate)

    def spdc_flags(p):
        p.add_argument("--kind", choices=["exact", "gaussian_approx"], default="exact")
        p.add_argument("--lambda-p", dest="lambda_p", type=float, default=415.0, help="pump wavelength [nm]")
        p.add_argument("--length-mm", dest="length_mm", type=float, default=5.0)
        p.add_argument("--pump-sigma", dest="pump_sigma", type=float, default=19.0, help="pump bandwidth [rad/ps]")
        p.add_argument("--n-omega", dest="n_omega", type=int, default=512)
        p.add_argument("--n-omega-prime", dest="n_omega_prime", type=int, default=512)
        p.add_argument("--no-filter", dest="no_filter", action="store_true", help="keep the sinc side lobes")

    p = sub.add_parser("jsa", parents=[common], help="KDP phase matching and joint spectrum")
    spdc_flags(p)
    p.set_defaults(handler=cmd_jsa)

    p = sub.add_parser("hom", parents=[common], help="HOM coincidence curves and visibility scans")
    p.add_argument("--source", choices=["spdc", "emitters", "jsa"], default="spdc")
    p.add_argument("--K", type=float, default=6.0)
    p.add_argument("--omega-p", dest="omega_p", type=float, default=19.0)
    p.add_argument("--tau1", type=float)
    p.add_argument("--tau2", type=float)
    p.add_argument("--mu1", type=float, default=1.0)
    p.add_argument("--mu2", type=float, default=1.0)
    p.add_argument("--M", type=float, help="magnification for a coincidence curve")
    p.add_argument("--delays", default="-1:1:0.01", help="start:stop:step or list [ps]")
    p.add_argument("--scan-M", dest="scan_M", help="start:stop:step; M = 0 is skipped")
    p.add_argument("--mode", choices=["analytic", "numeric"], default="analytic")
    p.add_argument("--t-d-mode", dest="t_d_mode", choices=["formula", "optimize"], default="formula")
    spdc_flags(p)
    p.set_defaults(handler=cmd_hom)
    return parser


def _load_config(path: Path) -> dict:
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigParseError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigParseError("config file must hold a JSON object")
    return data


RANGE_FLAGS = ("--scan-M", "--delays")


def _join_range_values(argv: Sequence[str]) -> list[str]:
    # "--scan-M -6:6:0.05" would otherwise be read as an unknown option
    out: list[str] = []
    items = list(argv)
    i = 0
    while i < len(items):
        if items[i] in RANGE_FLAGS and i + 1 < len(items):
            out.append(f"{items[i]}={items[i + 1]}")
            i += 2
        else:
            out.append(items[i])
            i += 1
    return out


def parse_args(argv: Sequence[str] | None) -> argparse.Namespace:
    argv = _join_range_values(sys.argv[1:] if argv is None else argv)
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config", type=Path)
    config_path = pre.parse_known_args(argv)[0].config
    parser = build_parser()
    if config_path is None:
        return parser.parse_args(argv)
    config = _load_config(config_path)
    subparsers = parser._subparsers._group_actions[0].choices
    # config values become defaults so command-line flags still win
    for sub in subparsers.values():
        known = {a.dest for a in sub._actions}
        for action in sub._actions:
            if action.dest in config:
                action.required = False
        sub.set_defaults(**{k: v for k, v in config.items() if k in known})
    args = parser.parse_args(argv)
    known = {a.dest for a in subparsers[args.command]._actions}
    unknown = sorted(set(config) - known)
    if unknown:
        raise ConfigParseError(f"unknown config keys for {args.command}: {unknown}")
    return args


def _manifest(args: argparse.Namespace, derived: dict, files: list[str]) -> dict:
    inputs = {k: v for k, v in sorted(vars(args).items()) if k != "handler"}
    return {
        "command": args.command,
        "inputs": inputs,
        "versions": {
            "chronoscope": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": platform.python_version(),
        },
        "derived": derived,
        "outputs": files,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(),
    }


def _error_object(exc: BaseException) -> dict:
    return {
        "error": type(exc).__name__,
        "message": str(exc),
        "stage": getattr(exc, "stage", None),
    }


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = parse_args(argv)
        if getattr(args, "grid_n", "absent") is None:
            args.grid_n = _default_grid_n()
        out: Path = args.out
        out.mkdir(parents=True, exist_ok=True)
        derived, files = args.handler(args, out)
        _dump_json(_manifest(args, derived, files), out / "manifest.json")
    except ConfigParseError as exc:
        print(json.dumps(_error_object(exc)), file=sys.stderr)
        return 2
    except (ChronoscopeError, ValueError, OSError) as exc:
        print(json.dumps(_error_object(exc)), file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
