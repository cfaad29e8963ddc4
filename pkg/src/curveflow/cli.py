"""Command-line front end.

Subcommands::

    run       drive a flow scenario and write trajectory / SVG / diagnostics
    check     quick self-test of the kernel invariants on built-in scenarios
    resample  resample a polyline file onto N equal-edge points

Exit codes: 0 success, 1 usage error, 2 assertion or bound violation.
"""

import argparse
import concurrent.futures
import dataclasses
import os
import sys

import numpy as np

from .diagnostics import fd_gradient_check, full_residual_report, self_intersections
from .energy import EnergyParams, dissipation, energy, objective
from .errors import BadParameters, BoundViolation, CurveFlowError
from .flow import FlowConfig, run_flow
from .io import render_svg, write_phase_svgs, write_trajectory
from .minimize import SolverOptions, minimize_step
from .polyline import from_reduced, resample_equal_arclength, to_reduced, validate
from .scenarios import PRESETS, Scenario, make_scenario


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _read_config(path: str) -> dict:
    """key=value lines; '#' starts a comment."""
    values = {}
    with open(path) as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}: bad config line {raw.rstrip()!r}")
            key, val = line.split("=", 1)
            values[key.strip()] = val.strip().strip('"')
    return values


def build_parser() -> _Parser:
    parser = _Parser(prog="curveflow", description=__doc__)
    sub = parser.add_subparsers(dest="command")

    run_p = sub.add_parser("run", help="run a flow scenario")
    run_p.add_argument("--scenario", action="append", default=None,
                       choices=sorted(PRESETS) + ["file"],
                       help="preset name; repeat for several scenarios")
    run_p.add_argument("--in", dest="infile", default=None,
                       help="polyline file for --scenario file")
    run_p.add_argument("--n", type=int, default=None, help="vertex count")
    run_p.add_argument("--eps", type=float, default=None, help="bending weight")
    run_p.add_argument("--tau", type=float, default=None, help="time step")
    run_p.add_argument("--steps", type=int, default=None, help="step cap")
    run_p.add_argument("--stop-tol", type=float, default=None,
                       help="terminate when max vertex speed drops below this")
    run_p.add_argument("--out", default=None, help="output directory (default .)")
    run_p.add_argument("--format", default=None, choices=["jsonl", "csv"],
                       help="trajectory format (default jsonl)")
    run_p.add_argument("--svg", action="store_true", help="render the flow")
    run_p.add_argument("--svg-stride", type=int, default=None)
    run_p.add_argument("--snapshot-every", type=int, default=None)
    run_p.add_argument("--diagnostics", action="store_true",
                       help="write per-step residual norms")
    run_p.add_argument("--grad-tol", type=float, default=None,
                       help="inner solver stationarity tolerance (default 1e-8)")
    run_p.add_argument("--parallel", action="store_true",
                       help="run multiple scenarios concurrently")
    run_p.add_argument("--config", default=None,
                       help="key=value file; explicit flags override it")

    sub.add_parser("check", help="run the built-in invariant self-test")

    rs_p = sub.add_parser("resample", help="equal-edge resampling of a polyline")
    rs_p.add_argument("--in", dest="infile", required=True)
    rs_p.add_argument("--n", type=int, required=True)
    rs_p.add_argument("--out", default=None, help="output file (default stdout)")
    return parser


def _apply_config(args, config):
    mapping = {
        "scenario": ("scenario", lambda v: [v]),
        "n": ("n", int),
        "eps": ("eps", float),
        "tau": ("tau", float),
        "steps": ("steps", int),
        "stop_tol": ("stop_tol", float),
        "out": ("out", str),
        "format": ("format", str),
        "svg": ("svg", lambda v: v.lower() in ("1", "true", "yes")),
        "diagnostics": ("diagnostics", lambda v: v.lower() in ("1", "true", "yes")),
        "grad_tol": ("grad_tol", float),
        "in": ("infile", str),
        "snapshot_every": ("snapshot_every", int),
    }
    for key, val in config.items():
        if key not in mapping:
            raise UsageError(f"unknown config key {key!r}")
        attr, conv = mapping[key]
        if getattr(args, attr) in (None, False):  # explicit flags win
            setattr(args, attr, conv(val))


def _run_one(name: str, args) -> int:
    if name == "file":
        if not args.infile:
            raise UsageError("--scenario file needs --in FILE")
        n = args.n if args.n is not None else 120
        scenario = Scenario(kind="file", n=n, path=args.infile)
        eps = args.eps if args.eps is not None else 0.01
        tau = args.tau if args.tau is not None else 0.05
        stop_tol = args.stop_tol
        max_steps = args.steps
    else:
        preset = PRESETS[name]
        scenario = preset.scenario
        if args.n is not None:
            scenario = dataclasses.replace(scenario, n=args.n)
        eps = args.eps if args.eps is not None else preset.params.epsilon
        tau = args.tau if args.tau is not None else preset.params.tau
        stop_tol = args.stop_tol if args.stop_tol is not None else preset.stop_tol
        max_steps = args.steps if args.steps is not None else preset.max_steps
    if stop_tol is None and max_steps is None:
        raise UsageError("need --steps or --stop-tol")
    out_dir = args.out if args.out is not None else "."
    fmt = args.format if args.format is not None else "jsonl"
    grad_tol = args.grad_tol if args.grad_tol is not None else 1e-8
    snapshot_every = args.snapshot_every if args.snapshot_every else 1

    params = EnergyParams(epsilon=eps, tau=tau)
    cfg = FlowConfig(
        params=params,
        n_steps=max_steps,
        stop_tol=stop_tol,
        solver=SolverOptions(grad_tol=grad_tol),
        snapshot_every=snapshot_every,
    )
    initial = make_scenario(scenario)
    traj = run_flow(initial, cfg)

    os.makedirs(out_dir, exist_ok=True)
    traj_path = os.path.join(out_dir, f"{name}.{fmt}")
    write_trajectory(traj, traj_path, fmt=fmt)
    outputs = [traj_path]
    if args.svg:
        stride = args.svg_stride
        if stride is None:
            stride = max(1, len(traj.snapshots) // 24)
        svg_path = os.path.join(out_dir, f"{name}.svg")
        render_svg(traj, svg_path, stride=stride)
        outputs.append(svg_path)
        if scenario.kind == "asym_gamma":
            outputs.extend(write_phase_svgs(traj, out_dir, name, stride=stride))
    if args.diagnostics:
        diag_path = os.path.join(out_dir, f"{name}.diagnostics.csv")
        with open(diag_path, "w") as fh:
            fh.write("snapshot_step,interior_L2,interior_max,coupling_L2,"
                     "boundary_start,boundary_end,kappa_start,kappa_end\n")
            for k in range(len(traj.snapshots) - 1):
                rep = full_residual_report(traj, k, params)
                fh.write(
                    f"{traj.snapshot_steps[k]},{rep.interior_L2:.9e},"
                    f"{rep.interior_max:.9e},{rep.coupling_L2:.9e},"
                    f"{np.linalg.norm(rep.boundary_start):.9e},"
                    f"{np.linalg.norm(rep.boundary_end):.9e},"
                    f"{rep.kappa_boundary[0]:.9e},{rep.kappa_boundary[1]:.9e}\n"
                )
        outputs.append(diag_path)

    final = traj.final
    print(
        f"[{name}] steps={traj.n_steps} E0={traj.energies[0]:.6f} "
        f"E={traj.energies[-1]:.6f} length={final.total_length:.6f} "
        f"gap={final.gap:.6f} crossings={self_intersections(final)}"
    )
    for p in outputs:
        print(f"[{name}] wrote {p}")
    return 0


def cmd_run(args) -> int:
    if not args.scenario:
        raise UsageError("run needs at least one --scenario")
    names = args.scenario
    if args.parallel and len(names) > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=len(names)) as ex:
            codes = list(ex.map(lambda nm: _run_one(nm, args), names))
        return max(codes)
    code = 0
    for nm in names:
        code = max(code, _run_one(nm, args))
    return code


def cmd_check(args) -> int:
    """Fast invariant sweep; prints one line per check."""
    failures = 0

    def report(label, ok, detail=""):
        nonlocal failures
        print(f"[{'PASS' if ok else 'FAIL'}] {label}" + (f" {detail}" if detail else ""))
        failures += 0 if ok else 1

    for name, preset in PRESETS.items():
        curve = make_scenario(preset.scenario)
        report(f"scenario {name} admissible", curve.is_admissible(),
               f"N={curve.n} length={curve.total_length:.4f}")
    gcurve = make_scenario(PRESETS["gamma"].scenario)
    report("gamma has exactly one crossing", self_intersections(gcurve) == 1)

    rng = np.random.default_rng(7)
    params = EnergyParams(epsilon=0.05, tau=0.1)
    worst = 0.0
    for _ in range(10):
        n = int(rng.integers(5, 30))
        headings = np.cumsum(rng.uniform(-0.6, 0.6, n - 1))
        prev = from_reduced(
            to_reduced(
                validate(
                    np.column_stack(
                        [np.cumsum(np.cos(headings)), np.cumsum(np.sin(headings))]
                    )
                    * 0.1
                )
            )
        )
        rc = to_reduced(prev)
        worst = max(worst, fd_gradient_check(rc, prev, params))
    report("analytic gradient matches finite differences", worst < 1e-6,
           f"max rel err {worst:.2e}")

    seg = make_scenario(Scenario(kind="segment", n=21, length=2.0))
    stepped, rep = minimize_step(seg, EnergyParams(epsilon=0.01, tau=0.05))
    report("segment step descends", rep.f_final <= rep.f_initial,
           f"F {rep.f_initial:.6f} -> {rep.f_final:.6f}")
    report("segment step shortens toward unit length",
           1.0 < stepped.total_length < 2.0,
           f"length {stepped.total_length:.6f}")
    d_self = dissipation(seg, seg)
    report("dissipation(c, c) == 0", d_self == 0.0)
    obj_id = objective(to_reduced(seg), seg, EnergyParams(epsilon=0.01, tau=0.05))
    e_id = energy(seg, EnergyParams(epsilon=0.01, tau=0.05)).total
    report("objective at prev equals E(prev)", abs(obj_id - e_id) < 1e-12 * (1 + abs(e_id)))

    cfg = FlowConfig(
        params=EnergyParams(epsilon=0.01, tau=0.05),
        n_steps=40,
        solver=SolverOptions(grad_tol=1e-8),
    )
    traj = run_flow(seg, cfg)
    mono = all(
        traj.energies[k + 1] <= traj.energies[k] + 1e-10 * (1 + abs(traj.energies[0]))
        for k in range(len(traj.energies) - 1)
    )
    report("flow energy is non-increasing", mono)
    report("summed dissipation below initial energy",
           sum(traj.diss_over_tau) <= traj.energies[0] + 1e-8)

    print(f"{'OK' if failures == 0 else f'{failures} check(s) failed'}")
    return 0 if failures == 0 else 2


def cmd_resample(args) -> int:
    pts = np.loadtxt(args.infile, dtype=float, ndmin=2)
    curve = resample_equal_arclength(pts, args.n)
    lines = [f"{format(p[0], '.17g')} {format(p[1], '.17g')}" for p in curve.points]
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
        print(f"wrote {args.out} (N={curve.n}, l={curve.edge_len:.9g})")
    else:
        sys.stdout.write(text)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("missing subcommand (run, check, resample)")
        if args.command == "run":
            if args.config:
                _apply_config(args, _read_config(args.config))
            return cmd_run(args)
        if args.command == "check":
            return cmd_check(args)
        return cmd_resample(args)
    except (UsageError, BadParameters, ValueError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 1
    except BoundViolation as exc:
        print(f"bound violation: {exc}", file=sys.stderr)
        return 2
    except CurveFlowError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
