"""Command-line front end: csa, solve, simulate, and sweep subcommands.

Every subcommand reads one scenario YAML file and is a pure function of it.
Exit codes: 0 success, 2 bad configuration or arguments, 3 the requested
problem is infeasible, 4 a numerical failure. Output formats: ``structured``
(JSON on stdout or to ``--out``) and ``csv``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from .centroidal import CentroidalSetup, desired_y, reference_csa, solve_centroidal
from .constraints import SlidingSpec, _component_permutation, cone_margins
from .controller import TraceRecord, _hand_targets_at, _setup_at, run_scenario
from .errors import BalanceInfeasible, ConfigInvalid, NumericalBreakdown
from .scenario import SCHEMA_VERSION, ScenarioConfig, load_config
from .spatial import Wrench

TRACE_COLUMNS = (
    "t",
    "com_x",
    "com_y",
    "com_des_x",
    "com_des_y",
    "f_hand_meas",
    "f_hand_des",
    "fz_lf",
    "fz_rf",
    "status",
    "ne_residual",
)

SWEEP_RESOLUTION = 0.1


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _dump_json(payload: dict, out: str | None) -> None:
    payload = {"schema_version": SCHEMA_VERSION, **payload}
    _emit(json.dumps(payload, indent=2, sort_keys=True), out)


def _setup_at_time(config: ScenarioConfig, at: float) -> CentroidalSetup:
    force = float(np.interp(at, config.force_profile[0], config.force_profile[1]))
    spec, mode, surface, _ = _hand_targets_at(config, at, force)
    return _setup_at(config, spec, mode, surface)


def cmd_csa(config: ScenarioConfig, args) -> int:
    setup = _setup_at_time(config, args.at)
    csa = reference_csa(setup)
    middle = desired_y(setup, csa).com[:2]
    if args.plot:
        from .plots import plot_csa

        plot_csa(csa, setup.feet, middle, args.plot)
    if args.format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["vertex_x", "vertex_y"])
        writer.writerows(csa.vertices.tolist())
        _emit(buf.getvalue(), args.out)
    else:
        _dump_json(
            {
                "at": args.at,
                "vertices": csa.vertices.tolist(),
                "scale": csa.scale,
                "offset": csa.offset.tolist(),
                "middle": middle.tolist(),
            },
            args.out,
        )
    return 0


def _wrench_dict(w) -> dict:
    return {"force": w.force.tolist(), "torque": w.torque.tolist()}


def cmd_solve(config: ScenarioConfig, args) -> int:
    setup = _setup_at_time(config, args.at)
    result = solve_centroidal(setup)
    bounds = setup.contact_bounds()
    contact_wrenches = (result.y.w_rf, result.y.w_lf, result.y.w_rh)
    margins = {}
    for patch, name, w, b in zip(setup.contacts, ("rf", "lf", "rh"), contact_wrenches, bounds):
        # cone_margins expects the normal in the z slot; permute hand wrenches.
        canonical = w.as_vector()[_component_permutation(patch.normal_axis)]
        margins[name] = cone_margins(Wrench.from_vector(canonical, frame=w.frame), b).tolist()
    if args.format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["entry", "value"])
        labels = ["com_x", "com_y", "com_z"] + [
            f"{c}_{comp}"
            for c in ("rf", "lf", "rh")
            for comp in ("fx", "fy", "fz", "tx", "ty", "tz")
        ]
        for label, value in zip(labels, result.y.to_array()):
            writer.writerow([label, repr(float(value))])
        _emit(buf.getvalue(), args.out)
    else:
        _dump_json(
            {
                "at": args.at,
                "status": result.status.value,
                "com": result.y.com.tolist(),
                "contact_wrenches": {
                    "rf": _wrench_dict(result.y.w_rf),
                    "lf": _wrench_dict(result.y.w_lf),
                    "rh": _wrench_dict(result.y.w_rh),
                },
                "world_wrenches": {
                    "rf": _wrench_dict(result.world_wrenches[0]),
                    "lf": _wrench_dict(result.world_wrenches[1]),
                    "rh": _wrench_dict(result.world_wrenches[2]),
                },
                "cone_margins": margins,
                "newton_euler_residual": result.newton_euler_residual,
                "sliding_residual": result.sliding_residual,
                "csa_vertices": result.csa.vertices.tolist(),
            },
            args.out,
        )
    return 0


def trace_rows(records: list[TraceRecord]) -> list[list]:
    rows = []
    for r in records:
        rows.append(
            [
                repr(r.t),
                repr(float(r.com[0])),
                repr(float(r.com[1])),
                repr(float(r.com_des[0])),
                repr(float(r.com_des[1])),
                repr(r.hand_force_measured),
                repr(r.hand_force_desired),
                repr(r.foot_fz[0]),
                repr(r.foot_fz[1]),
                r.status,
                repr(r.newton_euler_residual),
            ]
        )
    return rows


def write_trace_csv(records: list[TraceRecord], out) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(TRACE_COLUMNS)
    writer.writerows(trace_rows(records))
    text = buf.getvalue()
    if out:
        Path(out).write_text(text)
    return text


def trace_summary(records: list[TraceRecord]) -> dict:
    feasible = [r for r in records if r.status != "infeasible"]
    hit_infeasible = len(feasible) != len(records)
    final = feasible[-1] if feasible else None
    return {
        "status": "infeasible" if hit_infeasible else "completed",
        "ticks": len(records),
        "final_time": records[-1].t if records else 0.0,
        "final_force_error": (
            abs(final.hand_force_measured - final.hand_force_desired) if final else None
        ),
        "final_com_error": (
            float(np.linalg.norm(final.com[:2] - final.com_des[:2])) if final else None
        ),
        "max_ne_residual": max((r.newton_euler_residual for r in feasible), default=None),
        "max_sliding_residual": max((r.sliding_residual for r in feasible), default=None),
        "max_feasible_force": (
            feasible[-1].hand_force_desired if hit_infeasible and feasible else None
        ),
    }


def cmd_simulate(config: ScenarioConfig, args) -> int:
    records = run_scenario(config)
    if args.plot:
        from .plots import plot_com_path, plot_force_tracking

        prefix = Path(args.plot)
        plot_force_tracking(records, prefix.with_name(prefix.name + "_force.svg"))
        plot_com_path(records, prefix.with_name(prefix.name + "_com.svg"))
    summary = trace_summary(records)
    if args.format == "csv":
        text = write_trace_csv(records, args.out)
        if args.out:
            summary_path = Path(args.out).with_suffix(".summary.json")
            summary_path.write_text(
                json.dumps({"schema_version": SCHEMA_VERSION, **summary}, indent=2, sort_keys=True)
            )
        else:
            sys.stdout.write(text)
    else:
        _dump_json(summary, args.out)
    return 0


def _force_feasible(config: ScenarioConfig, force: float, com_fix) -> bool:
    setup = _setup_at_time(config, 0.0)
    probe = CentroidalSetup(
        mass=setup.mass,
        right_foot=setup.right_foot,
        left_foot=setup.left_foot,
        hand=setup.hand,
        hand_target=SlidingSpec(force),
        foot_fz_limits=setup.foot_fz_limits,
        com_fix=com_fix,
        csa_middle=setup.csa_middle,
        g=setup.g,
    )
    try:
        solve_centroidal(probe)
    except BalanceInfeasible:
        return False
    return True


def _bisect_boundary(config: ScenarioConfig, lo: float, hi: float, com_fix) -> dict:
    lo_ok = _force_feasible(config, lo, com_fix)
    hi_ok = _force_feasible(config, hi, com_fix)
    if not lo_ok:
        return {"boundary": lo, "feasible_at_lo": False, "feasible_at_hi": hi_ok}
    if hi_ok:
        return {"boundary": hi, "feasible_at_lo": True, "feasible_at_hi": True}
    a, b = lo, hi
    while b - a > SWEEP_RESOLUTION:
        mid = 0.5 * (a + b)
        if _force_feasible(config, mid, com_fix):
            a = mid
        else:
            b = mid
    return {"boundary": a, "feasible_at_lo": True, "feasible_at_hi": False}


def cmd_sweep(config: ScenarioConfig, args) -> int:
    if args.parameter != "hand_force":
        raise ConfigInvalid(f"unsupported sweep parameter {args.parameter!r}")
    if not args.lo < args.hi:
        raise ConfigInvalid(f"sweep needs lo < hi, got lo={args.lo} hi={args.hi}")

    fixed_point = config.com_fix
    if fixed_point is None:
        rest = solve_centroidal(_setup_at_time(config, 0.0))
        fixed_point = rest.y.com[:2]

    free = _bisect_boundary(config, args.lo, args.hi, None)
    fixed = _bisect_boundary(config, args.lo, args.hi, fixed_point)
    payload = {
        "parameter": args.parameter,
        "lo": args.lo,
        "hi": args.hi,
        "resolution": SWEEP_RESOLUTION,
        "fixed_com": {**fixed, "point": np.asarray(fixed_point).tolist()},
        "free_com": free,
        "ratio": (free["boundary"] / fixed["boundary"] if fixed["boundary"] > 0 else None),
    }
    if args.format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["policy", "boundary", "feasible_at_lo", "feasible_at_hi"])
        writer.writerow(["fixed", repr(fixed["boundary"]), fixed["feasible_at_lo"], fixed["feasible_at_hi"]])
        writer.writerow(["free", repr(free["boundary"]), free["feasible_at_lo"], free["feasible_at_hi"]])
        _emit(buf.getvalue(), args.out)
    else:
        _dump_json(payload, args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="combalance",
        description="Static multi-contact balance: support areas, force distribution, simulation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="scenario YAML file")
        p.add_argument("--out", default=None, help="write output here instead of stdout")
        p.add_argument(
            "--format", choices=("csv", "structured"), default="structured", help="output format"
        )

    p_csa = sub.add_parser("csa", help="compute the support area for a scenario")
    common(p_csa)
    p_csa.add_argument("--at", type=float, default=0.0, help="time along the force profile [s]")
    p_csa.add_argument("--plot", default=None, help="also write an SVG view to this path")
    p_csa.set_defaults(func=cmd_csa)

    p_solve = sub.add_parser("solve", help="solve one static force distribution")
    common(p_solve)
    p_solve.add_argument("--at", type=float, default=0.0, help="time along the force profile [s]")
    p_solve.set_defaults(func=cmd_solve)

    p_sim = sub.add_parser("simulate", help="run the scenario tick by tick")
    common(p_sim)
    p_sim.add_argument("--plot", default=None, help="SVG path prefix for tracking and CoM plots")
    p_sim.set_defaults(func=cmd_simulate)

    p_sweep = sub.add_parser("sweep", help="bisect the feasible hand-force boundary")
    common(p_sweep)
    p_sweep.add_argument("--parameter", default="hand_force", help="swept quantity")
    p_sweep.add_argument("--lo", type=float, required=True, help="lower bracket [N]")
    p_sweep.add_argument("--hi", type=float, required=True, help="upper bracket [N]")
    p_sweep.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = load_config(args.config)
        return args.func(config, args)
    except ConfigInvalid as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except BalanceInfeasible as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return 3
    except NumericalBreakdown as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
