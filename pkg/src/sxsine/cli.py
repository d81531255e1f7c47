"""Command-line front end.

Exit codes: 0 success, 1 property violation (containment or conservation),
2 usage or validation error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    STATE_VARS,
    analytic_trajectory,
    check_containment,
    conservation_residual,
    flowpipe,
    project_flowpipe,
    simulate,
    sine_through,
)
from .errors import SxSineError
from .expr import format_real
from .sine_builder import (
    SimulinkSineBlock,
    SineParams,
    StateBox,
    build_network,
    enlarge_initial,
    from_simulink,
    initial_conditions,
)
from .sx_io import AnalysisConfig, Polygon, emit_cfg, emit_gen, emit_sx, initially_predicate, parse_gen
from .plotting import render_svg

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _dump_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _resolve_params(args) -> SineParams:
    simulink = args.simulink or any(
        v is not None for v in (args.frequency, args.sample_time, args.sine_type))
    try:
        if simulink:
            frequency = args.frequency if args.frequency is not None else args.omega
            block = SimulinkSineBlock(
                amplitude=args.amplitude, bias=args.bias, frequency=frequency,
                phase=args.phase,
                sample_time=args.sample_time if args.sample_time is not None else 0.0,
                sine_type=args.sine_type or "time_based",
            )
            return from_simulink(block)
        return SineParams.normalized(args.amplitude, args.omega, args.bias, args.phase)
    except (SxSineError, ValueError) as err:
        raise UsageError(str(err)) from None


def _params_dict(p: SineParams) -> dict:
    return {"amplitude": p.amplitude, "omega": p.omega, "bias": p.bias, "phase": p.phase}


def _initial_box(p: SineParams, fraction: float) -> StateBox:
    if fraction < 0:
        raise UsageError("--enlarge must be >= 0")
    return enlarge_initial(initial_conditions(p), fraction)


def _write_manifest(path: Path, command: str, params: dict, inputs, outputs, started) -> None:
    _dump_json(path, {
        "command": command,
        "parameters": params,
        "inputs": [str(p) for p in inputs],
        "outputs": [str(p) for p in outputs],
        "version": __version__,
        "duration_s": time.perf_counter() - started,
    })


# -- commands ----------------------------------------------------------------

def cmd_generate(args) -> int:
    started = time.perf_counter()
    p = _resolve_params(args)
    init = initial_conditions(p)
    box = _initial_box(p, args.enlarge)
    model = build_network(p)
    try:
        cfg = AnalysisConfig(
            initially=initially_predicate(model, box),
            scenario=args.scenario,
            flowpipe_tolerance=args.flowpipe_tolerance,
            time_horizon=args.time_horizon,
            iter_max=args.iter_max,
            output_variables=tuple(v.strip() for v in args.output_variables.split(",") if v.strip()),
            output_format=args.output_format,
        )
    except ValueError as err:
        raise UsageError(str(err)) from None

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    model_path, cfg_path = out / "model.xml", out / "model.cfg"
    model_path.write_text(emit_sx(model), encoding="utf-8")
    cfg_path.write_text(emit_cfg(cfg), encoding="utf-8")
    params = _params_dict(p) | {
        "enlarge": args.enlarge, "scenario": cfg.scenario,
        "flowpipe_tolerance": cfg.flowpipe_tolerance, "time_horizon": cfg.time_horizon,
        "iter_max": cfg.iter_max, "output_variables": list(cfg.output_variables),
        "output_format": cfg.output_format,
    }
    _write_manifest(out / "manifest.json", "generate", params, [],
                    [model_path, cfg_path], started)
    print(f"x0 = {format_real(init.x0)}")
    print(f"y0 = {format_real(init.y0)}")
    return EXIT_OK


def cmd_check(args) -> int:
    started = time.perf_counter()
    p = _resolve_params(args)
    box = _initial_box(p, args.enlarge)
    init = initial_conditions(p)
    sim_p = p
    if args.sim_omega is not None:
        sim_p = SineParams(p.amplitude, args.sim_omega, p.bias, p.phase)
    try:
        fp = flowpipe(box, p, args.step, args.horizon)
        sim = simulate(sim_p, [init.x0, init.y0, init.t0], args.sim_step, args.horizon)
    except (SxSineError, ValueError) as err:
        raise UsageError(str(err)) from None

    report = check_containment(fp, sim)
    residual = max(conservation_residual(p, s) for s in sim.states)
    tolerance = 1e-6 * max(1.0, p.amplitude ** 2)
    result = {
        "parameters": _params_dict(p),
        "enlarge": args.enlarge,
        "step": args.step,
        "horizon": args.horizon,
        "sim_step": args.sim_step,
        "segments": len(fp),
        "samples": len(sim),
        "contained": report.contained,
        "margin": report.margin,
        "violations": len(report.violations),
        "fallback_segments": len(report.fallback_segments),
        "residual_max": residual,
        "residual_tolerance": tolerance,
        "residual_ok": residual < tolerance,
    }
    ok = report.contained and residual < tolerance

    if args.mc_samples:
        rng = np.random.default_rng(args.seed)
        margins, bad = [], 0
        for _ in range(args.mc_samples):
            s0 = rng.uniform(box.lower, box.upper)
            tr = analytic_trajectory(sine_through(p.omega, p.bias, s0), sim.times)
            r = check_containment(fp, tr)
            margins.append(r.margin)
            bad += not r.contained
        result["monte_carlo"] = {
            "samples": args.mc_samples, "seed": args.seed,
            "uncontained": bad, "min_margin": min(margins),
        }
        ok = ok and bad == 0

    if report.violations:
        v = report.violations[0]
        result["first_violation"] = {
            "sample": v.sample, "time": v.time, "segment": v.segment,
            "state": [v.state.x, v.state.y, v.state.t],
        }
        print(f"containment violated at sample {v.sample} (t={v.time!r}, segment {v.segment}): "
              f"x={v.state.x!r} y={v.state.y!r}", file=sys.stderr)
    if residual >= tolerance:
        print(f"conservation residual {residual:.3g} exceeds {tolerance:.3g}", file=sys.stderr)

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    report_path = out / "report.json"
    _dump_json(report_path, result)
    _write_manifest(out / "manifest.json", "check",
                    _params_dict(p) | {"enlarge": args.enlarge, "step": args.step,
                                        "horizon": args.horizon, "sim_step": args.sim_step},
                    [], [report_path], started)
    print(f"contained = {str(report.contained).lower()}, margin = {report.margin:.6g}, "
          f"residual = {residual:.3g}")
    return EXIT_OK if ok else EXIT_VIOLATION


def _parse_dims(text: str) -> tuple[str, str]:
    dims = tuple(d.strip() for d in text.split(","))
    if len(dims) != 2 or any(d not in STATE_VARS for d in dims) or dims[0] == dims[1]:
        raise UsageError(f"--dims must be two distinct names from {','.join(STATE_VARS)}, got {text!r}")
    return dims


def cmd_plot(args) -> int:
    started = time.perf_counter()
    dims = _parse_dims(args.dims)
    rows = [STATE_VARS.index(d) for d in dims]
    polygons: list[Polygon] = []
    polyline: list[tuple[float, float]] = []
    inputs = []
    params: dict = {"source": args.source, "dims": list(dims), "format": args.format}

    if args.source == "gen":
        if not args.file:
            raise UsageError("--source gen requires --file")
        try:
            polygons = parse_gen(Path(args.file).read_text(encoding="utf-8"))
        except (OSError, UnicodeDecodeError, SxSineError) as err:
            raise UsageError(f"cannot read GEN file {args.file}: {err}") from None
        inputs.append(args.file)
    else:
        p = _resolve_params(args)
        params |= _params_dict(p) | {"step": args.step, "horizon": args.horizon,
                                     "enlarge": args.enlarge}
        init = initial_conditions(p)
        try:
            if args.source == "flowpipe":
                fp = flowpipe(_initial_box(p, args.enlarge), p, args.step, args.horizon)
                polygons = project_flowpipe(fp, dims)
            if args.source == "trajectory" or args.overlay:
                sim = simulate(p, [init.x0, init.y0, init.t0], args.sim_step, args.horizon)
                polyline = [(float(s[rows[0]]), float(s[rows[1]])) for s in sim.states]
        except (SxSineError, ValueError) as err:
            raise UsageError(str(err)) from None

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    if args.format == "csv":
        blocks = polygons if polygons else [Polygon(tuple(polyline))]
        out.write_text(emit_gen(blocks), encoding="utf-8")
    else:
        out.write_text(render_svg(polygons, polyline, dims), encoding="utf-8")
    _write_manifest(out.with_name(out.stem + ".manifest.json"), "plot", params,
                    inputs, [out], started)
    return EXIT_OK


# -- argument parsing --------------------------------------------------------

def _signal_flags() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    g = parent.add_argument_group("signal (defaults: the A=0.5, omega=1, mu=2, phi=0 example)")
    g.add_argument("--amplitude", type=float, default=0.5, help="A")
    g.add_argument("--omega", type=float, default=1.0, help="angular frequency, rad/s")
    g.add_argument("--bias", type=float, default=2.0, help="mu")
    g.add_argument("--phase", type=float, default=0.0, help="phi, rad")
    s = parent.add_argument_group("Simulink sine-wave block vocabulary")
    s.add_argument("--simulink", action="store_true",
                   help="read the signal from Simulink-style flags")
    s.add_argument("--frequency", type=float, help="block frequency, rad/s (maps to omega)")
    s.add_argument("--sample-time", type=float, help="block sample time; must be 0")
    s.add_argument("--sine-type", choices=["time_based", "sample_based"])
    return parent


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sxsine",
        description="Compile sine signals to SpaceEx SX models and verify the encoding.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    signal = _signal_flags()

    gen = sub.add_parser("generate", parents=[signal], help="write model.xml and model.cfg")
    gen.add_argument("--out-dir", default=".")
    gen.add_argument("--enlarge", type=float, default=0.0,
                     help="total initial-box width as a fraction of |x0|, |y0|")
    gen.add_argument("--scenario", default="stc", choices=["stc", "lgg", "supp"])
    gen.add_argument("--flowpipe-tolerance", type=float, default=0.01)
    gen.add_argument("--time-horizon", type=float, default=10.0)
    gen.add_argument("--iter-max", type=int, default=-1)
    gen.add_argument("--output-variables", default="t_gl,y")
    gen.add_argument("--output-format", default="GEN", choices=["GEN", "TXT", "INTV"])
    gen.set_defaults(func=cmd_generate)

    chk = sub.add_parser("check", parents=[signal],
                         help="check that the simulation lies in the flowpipe")
    chk.add_argument("--out-dir", default=".")
    chk.add_argument("--enlarge", type=float, default=0.0)
    chk.add_argument("--step", type=float, default=0.01, help="flowpipe time step")
    chk.add_argument("--horizon", type=float, default=10.0)
    chk.add_argument("--sim-step", type=float, default=1e-3, help="RK4 step")
    chk.add_argument("--mc-samples", type=int, default=0,
                     help="also check N exact trajectories from random initial-box points")
    chk.add_argument("--seed", type=int, default=0)
    # test hook: simulate with a different omega than the flowpipe
    chk.add_argument("--sim-omega", type=float, help=argparse.SUPPRESS)
    chk.set_defaults(func=cmd_check)

    plot = sub.add_parser("plot", parents=[signal], help="emit SVG or GEN-style CSV plot data")
    plot.add_argument("--source", choices=["flowpipe", "trajectory", "gen"], default="flowpipe")
    plot.add_argument("--file", help="GEN file for --source gen")
    plot.add_argument("--dims", default="t,y")
    plot.add_argument("--overlay", action="store_true",
                      help="draw the RK4 trajectory over the flowpipe")
    plot.add_argument("--format", choices=["svg", "csv"], default="svg")
    plot.add_argument("--out", required=True)
    plot.add_argument("--enlarge", type=float, default=0.0)
    plot.add_argument("--step", type=float, default=0.01)
    plot.add_argument("--horizon", type=float, default=10.0)
    plot.add_argument("--sim-step", type=float, default=1e-3)
    plot.set_defaults(func=cmd_plot)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
