"""Command-line front end: run campaigns and emit plot-ready CSV files.

Exit codes: 0 success, 2 configuration error, 3 integration fault.  All
output is deterministic: identical configuration and seed give byte-identical
files, and numbers are written in fixed 9-significant-digit scientific
notation so reruns can be diffed.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict, replace
from pathlib import Path
from typing import Any, Sequence

from .control import ActuatorBounds, FlConfig, IpConfig
from .kinetics import FullModelParams, SimplifiedModelParams
from .plant import (
    DayNightLight,
    IntegrationError,
    NoiseConfig,
    PiecewiseConstantLight,
    SamplingConfig,
)
from .radiative import Geometry
from .scenarios import (
    BUILTIN_SCENARIOS,
    MU0_SWEEP_VALUES,
    FixedReference,
    MapReference,
    Reference,
    Scenario,
    ScheduleReference,
    SimulationTrace,
    TrackingMetrics,
    compute_metrics,
    robustness_sweep,
    run_scenario,
)
from .steady_state import setpoint_map

__all__ = ["main", "ConfigError", "scenario_to_config", "scenario_from_config"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INTEGRATION = 3

TRACE_HEADER = "t,x_true,y_meas,y_ref,d_applied,q0,f_est"
METRICS_HEADER = "offset,iae,settle_time,batch_duration"
SWEEP_HEADER = "controller,mu0,offset,iae,settle_time,batch_duration,status"
MAP_HEADER = "q0,x_star,d_star,productivity"


class ConfigError(ValueError):
    """Configuration input the CLI refuses to run."""


def _fmt(x: float) -> str:
    """Fixed 9-significant-digit scientific notation."""
    return f"{x:.8e}"


def _fmt_opt(x: float | None) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    return _fmt(x)


# --- scenario <-> config dict -------------------------------------------------
#
# The config file is JSON with nested keys mirroring the dataclass fields,
# so every model constant can be overridden either in the file or with
# --set dotted.key=value flags.


def scenario_to_config(s: Scenario) -> dict[str, Any]:
    """Nested plain-dict form of a scenario."""
    if isinstance(s.light, PiecewiseConstantLight):
        light: dict[str, Any] = {
            "kind": "piecewise",
            "segments": [list(seg) for seg in s.light.segments],
        }
    else:
        light = {"kind": "day_night", **asdict(s.light)}

    if isinstance(s.reference, FixedReference):
        reference: dict[str, Any] = {"kind": "fixed", "value": s.reference.value}
    elif isinstance(s.reference, ScheduleReference):
        reference = {"kind": "schedule", "points": [list(p) for p in s.reference.points]}
    else:
        reference = {"kind": "map"}

    if isinstance(s.controller, FlConfig):
        controller: dict[str, Any] = {
            "kind": "fl",
            "lam": s.controller.lam,
            "x_floor": s.controller.x_floor,
            "mu0": s.controller.sp.mu_0,
        }
        simplified = asdict(s.controller.sp)
    else:
        c = s.controller
        controller = {
            "kind": "ip",
            "a": c.a,
            "k_p": c.k_p,
            "tau_h": c.tau_h,
            "estimator": c.estimator,
            "warmup": c.warmup,
            "record_raw_control": c.record_raw_control,
        }
        simplified = asdict(SimplifiedModelParams())

    if isinstance(s.plant, SimplifiedModelParams):
        plant: dict[str, Any] = {"model": "simplified", **asdict(s.plant)}
    else:
        plant = {"model": "full", **asdict(s.plant)}

    return {
        "name": s.name,
        "duration_h": s.duration_h,
        "x0": s.x0,
        "light": light,
        "reference": reference,
        "controller": controller,
        "simplified": simplified,
        "plant": plant,
        "geometry": asdict(s.geometry),
        "sampling": asdict(s.sampling),
        "noise": asdict(s.noise),
        "bounds": asdict(s.bounds),
        "n_nodes": s.n_nodes,
    }


def _build(cls, section: dict[str, Any], where: str):
    try:
        return cls(**section)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad {where} section: {exc}") from exc


def scenario_from_config(cfg: dict[str, Any]) -> Scenario:
    """Construct and validate a scenario from its plain-dict form."""
    try:
        light_cfg = dict(cfg["light"])
        ref_cfg = dict(cfg["reference"])
        ctl_cfg = dict(cfg["controller"])
        simplified = _build(
            SimplifiedModelParams, dict(cfg["simplified"]), "simplified"
        )
        plant_cfg = dict(cfg["plant"])
    except KeyError as exc:
        raise ConfigError(f"missing config section: {exc}") from exc

    kind = light_cfg.pop("kind", None)
    if kind == "piecewise":
        segments = tuple(tuple(seg) for seg in light_cfg.pop("segments", ()))
        light = _build(PiecewiseConstantLight, {"segments": segments, **light_cfg}, "light")
    elif kind == "day_night":
        light = _build(DayNightLight, light_cfg, "light")
    else:
        raise ConfigError(f"unknown light kind: {kind!r}")

    kind = ref_cfg.pop("kind", None)
    if kind == "fixed":
        reference: Reference = _build(FixedReference, ref_cfg, "reference")
    elif kind == "schedule":
        points = tuple(tuple(p) for p in ref_cfg.pop("points", ()))
        reference = _build(ScheduleReference, {"points": points, **ref_cfg}, "reference")
    elif kind == "map":
        reference = MapReference()
    else:
        raise ConfigError(f"unknown reference kind: {kind!r}")

    kind = ctl_cfg.pop("kind", None)
    if kind == "fl":
        mu0 = ctl_cfg.pop("mu0", simplified.mu_0)
        sp = replace(simplified, mu_0=mu0)
        controller: FlConfig | IpConfig = _build(
            FlConfig, {"sp": sp, **ctl_cfg}, "controller"
        )
    elif kind == "ip":
        controller = _build(IpConfig, ctl_cfg, "controller")
    else:
        raise ConfigError(f"unknown controller kind: {kind!r}")

    model = plant_cfg.pop("model", "full")
    if model == "full":
        plant: FullModelParams | SimplifiedModelParams = _build(
            FullModelParams, plant_cfg, "plant"
        )
    elif model == "simplified":
        plant = _build(SimplifiedModelParams, plant_cfg, "plant")
    else:
        raise ConfigError(f"unknown plant model: {model!r}")

    try:
        return Scenario(
            name=str(cfg.get("name", "custom")),
            duration_h=float(cfg["duration_h"]),
            x0=float(cfg["x0"]),
            light=light,
            reference=reference,
            controller=controller,
            plant=plant,
            geometry=_build(Geometry, dict(cfg["geometry"]), "geometry"),
            sampling=_build(SamplingConfig, dict(cfg["sampling"]), "sampling"),
            noise=_build(NoiseConfig, dict(cfg["noise"]), "noise"),
            bounds=_build(ActuatorBounds, dict(cfg["bounds"]), "bounds"),
            n_nodes=int(cfg.get("n_nodes", 101)),
        )
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad scenario config: {exc}") from exc


def _parse_scalar(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_overrides(cfg: dict[str, Any], pairs: Sequence[str]) -> dict[str, Any]:
    """Apply --set dotted.key=value overrides; keys must already exist."""
    for pair in pairs:
        key, sep, value = pair.partition("=")
        if not sep:
            raise ConfigError(f"--set expects key=value, got {pair!r}")
        node: Any = cfg
        parts = key.split(".")
        for part in parts[:-1]:
            if not isinstance(node, dict) or part not in node:
                raise ConfigError(f"--set references unknown key {key!r}")
            node = node[part]
        leaf = parts[-1]
        if not isinstance(node, dict) or leaf not in node:
            raise ConfigError(f"--set references unknown key {key!r}")
        node[leaf] = _parse_scalar(value)
    return cfg


def load_scenario(args: argparse.Namespace) -> Scenario:
    """Resolve the scenario from --config or --scenario plus overrides."""
    if getattr(args, "config", None):
        path = Path(args.config)
        try:
            cfg = json.loads(path.read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
        if not isinstance(cfg, dict):
            raise ConfigError("config root must be a JSON object")
    else:
        name = args.scenario
        if name not in BUILTIN_SCENARIOS:
            known = ", ".join(sorted(BUILTIN_SCENARIOS))
            raise ConfigError(f"unknown scenario {name!r} (built-ins: {known})")
        builder = BUILTIN_SCENARIOS[name]
        kwargs: dict[str, Any] = {"controller": args.controller}
        if name == "paper-4.1":
            kwargs["reference"] = args.reference
        elif args.reference != "anchors":
            raise ConfigError("--reference map is only meaningful for paper-4.1")
        cfg = scenario_to_config(builder(**kwargs))

    cfg = apply_overrides(cfg, args.set or [])
    if args.seed is not None:
        cfg.setdefault("noise", {})["seed"] = args.seed
    return scenario_from_config(cfg)


# --- CSV writers ---------------------------------------------------------------


def write_trace_csv(path: Path, trace: SimulationTrace) -> None:
    lines = [TRACE_HEADER]
    for i in range(len(trace)):
        lines.append(
            ",".join(
                (
                    _fmt(trace.t[i]),
                    _fmt(trace.x_true[i]),
                    _fmt(trace.y_meas[i]),
                    _fmt(trace.y_ref[i]),
                    _fmt(trace.d_applied[i]),
                    _fmt(trace.q0[i]),
                    _fmt_opt(float(trace.f_est[i])),
                )
            )
        )
    path.write_text("\n".join(lines) + "\n")


def write_metrics_csv(path: Path, m: TrackingMetrics) -> None:
    row = ",".join(
        (
            _fmt(m.steady_state_offset),
            _fmt(m.iae),
            _fmt_opt(m.settle_time_to_2pct),
            _fmt(m.batch_phase_duration),
        )
    )
    path.write_text(METRICS_HEADER + "\n" + row + "\n")


# --- subcommands ---------------------------------------------------------------


def cmd_simulate(args: argparse.Namespace) -> int:
    scenario = load_scenario(args)
    trace = run_scenario(scenario)  # run fully before writing any file
    metrics = compute_metrics(trace)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_trace_csv(out / "trace.csv", trace)
    write_metrics_csv(out / "metrics.csv", metrics)
    print(f"wrote {out / 'trace.csv'} and {out / 'metrics.csv'}")
    return EXIT_OK


def cmd_setpoint_map(args: argparse.Namespace) -> int:
    lo, hi, steps = args.q0_min, args.q0_max, args.steps
    if not (100.0 <= lo < hi <= 1000.0):
        raise ConfigError(f"need 100 <= q0-min < q0-max <= 1000, got [{lo}, {hi}]")
    if steps < 2:
        raise ConfigError("steps must be >= 2")
    grid = [lo + (hi - lo) * i / (steps - 1) for i in range(steps)]
    points = setpoint_map(grid)
    lines = [MAP_HEADER]
    for op in points:
        lines.append(
            ",".join((_fmt(op.q0), _fmt(op.x_star), _fmt(op.d_star), _fmt(op.productivity)))
        )
    path = Path(args.out)
    if path.parent != Path("."):
        path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n")
    print(f"wrote {path}")
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    base = load_scenario(args)
    mu0_values = tuple(args.mu0) if args.mu0 else MU0_SWEEP_VALUES
    if not mu0_values:
        raise ConfigError("sweep needs at least one mu0 value")
    cells = robustness_sweep(base, mu0_values)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    lines = [SWEEP_HEADER]
    any_ok = False
    for cell in cells:
        if cell.trace is not None and cell.metrics is not None:
            any_ok = True
            write_trace_csv(
                out / f"trace_{cell.controller_kind}_mu{cell.mu_0:g}.csv", cell.trace
            )
            m = cell.metrics
            lines.append(
                ",".join(
                    (
                        cell.controller_kind,
                        _fmt(cell.mu_0),
                        _fmt(m.steady_state_offset),
                        _fmt(m.iae),
                        _fmt_opt(m.settle_time_to_2pct),
                        _fmt(m.batch_phase_duration),
                        "ok",
                    )
                )
            )
        else:
            reason = (cell.error or "failed").replace(",", ";").replace("\n", " ")
            lines.append(
                ",".join(
                    (cell.controller_kind, _fmt(cell.mu_0), "", "", "", "", f"failed: {reason}")
                )
            )
    (out / "summary.csv").write_text("\n".join(lines) + "\n")
    print(f"wrote {out / 'summary.csv'} ({sum(1 for c in cells if c.trace is not None)}"
          f"/{len(cells)} cells ok)")
    return EXIT_OK if any_ok else EXIT_INTEGRATION


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pbrsim",
        description="Closed-loop photobioreactor simulation workbench.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_scenario_args(p: argparse.ArgumentParser) -> None:
        src = p.add_mutually_exclusive_group()
        src.add_argument(
            "--scenario",
            default="paper-4.1",
            help="built-in scenario name (default: %(default)s)",
        )
        src.add_argument("--config", help="JSON scenario config file")
        p.add_argument(
            "--controller",
            choices=("fl", "ip"),
            default="ip",
            help="controller for built-in scenarios (default: %(default)s)",
        )
        p.add_argument(
            "--reference",
            choices=("anchors", "map"),
            default="anchors",
            help="paper-4.1 reference mode: hard-coded setpoints or the live "
            "productivity optimizer (default: %(default)s)",
        )
        p.add_argument("--seed", type=int, default=None, help="measurement noise seed")
        p.add_argument(
            "--set",
            action="append",
            metavar="KEY=VALUE",
            help="override a config entry by dotted key, e.g. controller.mu0=0.21",
        )

    p_sim = sub.add_parser("simulate", help="run one scenario, write trace + metrics")
    add_scenario_args(p_sim)
    p_sim.add_argument("--out", default=".", help="output directory (default: %(default)s)")
    p_sim.set_defaults(func=cmd_simulate)

    p_map = sub.add_parser(
        "setpoint-map", help="tabulate productivity-optimal setpoints versus light"
    )
    p_map.add_argument("--q0-min", type=float, default=100.0)
    p_map.add_argument("--q0-max", type=float, default=1000.0)
    p_map.add_argument("--steps", type=int, default=10)
    p_map.add_argument(
        "--out", default="setpoint_map.csv", help="output CSV path (default: %(default)s)"
    )
    p_map.set_defaults(func=cmd_setpoint_map)

    p_sweep = sub.add_parser(
        "sweep", help="robustness sweep over controller-model mu_0 values"
    )
    add_scenario_args(p_sweep)
    p_sweep.add_argument(
        "--mu0",
        type=float,
        action="append",
        help="mu_0 value for the controller model (repeatable; "
        "default 0.07 0.14 0.21)",
    )
    p_sweep.add_argument("--out", default=".", help="output directory (default: %(default)s)")
    p_sweep.set_defaults(func=cmd_sweep)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except IntegrationError as exc:
        print(f"integration fault: {exc}", file=sys.stderr)
        return EXIT_INTEGRATION


if __name__ == "__main__":
    sys.exit(main())
