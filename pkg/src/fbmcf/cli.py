"""Command-line driver: run, monitor, rescale, verify.

Exit codes: 0 success, 1 verification failure, 2 validation error,
3 numerical abort.
"""

from __future__ import annotations

import argparse
import os
import sys
import time

import numpy as np
import yaml

from .errors import FbmcfError, ScenarioError
from .flow import run as flow_run
from .io import load_trajectory, save_trajectory, write_manifest, write_obj
from .monitors import DensityQuery, monotonicity_report, singular_set_scan
from .rescaling import normalized_frame, parabolic_rescale, planarity_multiplicity
from .scenario import load_scenario

EXIT_OK, EXIT_VERIFY, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 1, 2, 3
_ERROR_REASONS = {"cfl-violation", "chart-exit", "non-finite", "error",
                  "past-singularity"}


def command_run(args):
    scenario = load_scenario(args.scenario)
    outdir = args.out or scenario.output_dir
    os.makedirs(outdir, exist_ok=True)
    t0 = time.perf_counter()
    try:
        initial = scenario.build_initial()
        config = scenario.build_flow_config()
    except FbmcfError as err:
        write_manifest(outdir, scenario.echo(), f"past-singularity: {err}",
                       time.perf_counter() - t0, [])
        print(f"run aborted: {err}", file=sys.stderr)
        return EXIT_NUMERICAL
    trajectory = flow_run(initial, config)
    files = save_trajectory(outdir, trajectory, scenario.echo())
    write_manifest(outdir, scenario.echo(), trajectory.stop_reason,
                   time.perf_counter() - t0, files)
    print(f"stop_reason: {trajectory.stop_reason} "
          f"({len(trajectory.snapshots)} snapshots in {outdir})")
    return EXIT_NUMERICAL if trajectory.stop_reason in _ERROR_REASONS else EXIT_OK


def _parse_queries(path):
    with open(path) as fh:
        data = yaml.safe_load(fh)
    if not isinstance(data, list):
        raise ScenarioError("query file must contain a list of queries")
    return data


def command_monitor(args):
    trajectory = load_trajectory(args.dir)
    queries = _parse_queries(args.query_file)
    for k, q in enumerate(queries):
        name = q.get("name", f"q{k}")
        kind = q.get("type", "density")
        if kind == "density":
            query = DensityQuery(
                P=np.asarray(q["P"], dtype=float), T=float(q["T"]),
                location=q.get("location", "interior"),
                r=float(q.get("r", np.inf)), kappa=float(q.get("kappa", 0.0)),
                sample_times=[float(t) for t in q["sample_times"]])
            rep = monotonicity_report(trajectory, query)
            path = os.path.join(args.dir, f"density_{name}.csv")
            rows = ["t,value,violation"]
            prev = None
            for t, v in zip(rep.times, rep.values):
                viol = 0.0 if prev is None else max(v - prev, 0.0)
                rows.append(f"{t:.17g},{v:.17g},{viol:.17g}")
                prev = v
            with open(path, "w") as fh:
                fh.write("\n".join(rows) + "\n")
        elif kind == "scan":
            scan = singular_set_scan(trajectory, float(q["epsilon"]),
                                     [float(r) for r in q["r_grid"]])
            path = os.path.join(args.dir, f"scan_{name}.csv")
            rows = ["px,py,pz,r,mass,flagged"]
            for i, P in enumerate(scan.candidates):
                for j, r in enumerate(scan.r_grid):
                    rows.append(f"{P[0]:.17g},{P[1]:.17g},{P[2]:.17g},"
                                f"{r:.17g},{scan.masses[i, j]:.17g},"
                                f"{int(scan.flagged[i])}")
            with open(path, "w") as fh:
                fh.write("\n".join(rows) + "\n")
        else:
            raise ScenarioError(f"unknown query type {kind!r}", key="type")
        print(f"wrote {path}")
    return EXIT_OK


def command_rescale(args):
    trajectory = load_trajectory(args.dir)
    P = np.asarray([float(v) for v in args.point.split(",")], dtype=float)
    patch = trajectory.snapshots[-1].patch
    if args.s is not None:
        frame = normalized_frame(trajectory, P, args.s, args.terminal_time,
                                 patch=patch)
    else:
        frame = parabolic_rescale(trajectory, P, args.terminal_time,
                                  args.lam, args.tau, patch=patch)
    outdir = args.out or args.dir
    os.makedirs(outdir, exist_ok=True)
    write_obj(os.path.join(outdir, "frame.obj"), frame.surface)
    rep = planarity_multiplicity(frame, args.region_radius,
                                 boundary_mode=args.boundary)
    with open(os.path.join(outdir, "planarity.csv"), "w") as fh:
        fh.write("deviation,sheets,fit_nx,fit_ny,fit_nz\n")
        fh.write(f"{rep.deviation:.17g},{rep.sheet_count},"
                 f"{rep.normal[0]:.17g},{rep.normal[1]:.17g},"
                 f"{rep.normal[2]:.17g}\n")
    print(f"wrote frame.obj and planarity.csv to {outdir}")
    return EXIT_OK


def command_verify(args):
    from .acceptance import run_all

    results = run_all(fast=args.fast)
    all_ok = True
    for r in results:
        mark = "SKIP" if r["skipped"] else ("PASS" if r["passed"] else "FAIL")
        print(f"[{mark}] criterion {r['criterion']:2d} "
              f"({r['seconds']:6.1f}s): {r['name']} -- {r['detail']}")
        all_ok = all_ok and (r["passed"] or r["skipped"])
    print("verification", "PASSED" if all_ok else "FAILED")
    return EXIT_OK if all_ok else EXIT_VERIFY


def build_parser():
    parser = argparse.ArgumentParser(
        prog="fbmcf",
        description="free-boundary mean curvature flow laboratory")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="execute a scenario and persist the run")
    p.add_argument("scenario")
    p.add_argument("--out", default=None)
    p.set_defaults(fn=command_run)

    p = sub.add_parser("monitor", help="evaluate monitor queries on a stored run")
    p.add_argument("dir")
    p.add_argument("query_file")
    p.set_defaults(fn=command_monitor)

    p = sub.add_parser("rescale", help="build a rescaled frame of a stored run")
    p.add_argument("dir")
    p.add_argument("--point", default="0,0,0")
    p.add_argument("--terminal-time", type=float, required=True)
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--tau", type=float, default=-1.0)
    p.add_argument("--s", type=float, default=None)
    p.add_argument("--region-radius", type=float, default=0.5)
    p.add_argument("--boundary", action="store_true")
    p.add_argument("--out", default=None)
    p.set_defaults(fn=command_rescale)

    p = sub.add_parser("verify", help="run the acceptance suite")
    p.add_argument("--fast", action="store_true")
    p.set_defaults(fn=command_verify)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ScenarioError as err:
        loc = ""
        if err.key:
            loc = f" (key: {err.key})"
        elif err.line is not None:
            loc = f" (line {err.line}, column {err.column})"
        print(f"validation error: {err}{loc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (FileNotFoundError, ValueError) as err:
        print(f"validation error: {err}", file=sys.stderr)
        return EXIT_VALIDATION
    except FbmcfError as err:
        print(f"numerical abort: {err}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
