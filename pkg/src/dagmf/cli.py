"""Batch command-line front-end.

Subcommands: `solve` runs the full pipeline from graph/volume files,
`validate` checks a graph spec, `build-dag` compiles a group spec into an
explicit weighted graph. Exit codes: 0 success/converged, 1 input error,
2 solver hit the iteration cap without converging.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from dagmf.graph import (ConstructionResult, GraphError, LabelGraph,
                         SuperObjectSpec, build_superobject_dag, parse_graph_json)
from dagmf.problem import ProblemSpec
from dagmf.solver import SolverParams, solve
from dagmf.volio import VolumeFormatError, read_volume, write_volume

ARGMAX_FIELD = "argmax"


def _load_graph(path) -> tuple[LabelGraph, dict[int, int]]:
    """Parse a graph file; returns (normalized graph, group smoothness scales)."""
    with open(path, "r", encoding="utf-8") as fh:
        parsed = parse_graph_json(fh.read())
    if isinstance(parsed, SuperObjectSpec):
        result = build_superobject_dag(parsed)
        return result.graph, result.smoothness_scale
    return parsed, {}


def _resolve_label(graph: LabelGraph, token: str) -> int:
    for lab in graph.labels.values():
        if lab.name == token:
            return lab.id
    try:
        lid = int(token)
    except ValueError:
        raise GraphError(f"unknown label {token!r}")
    if lid not in graph.labels:
        raise GraphError(f"unknown label id {lid}")
    return lid


def _assemble_smoothness(graph, lattice, smooth_fields, alphas, scale):
    """Combine uniform alphas, optional per-label volumes, and group scaling."""
    out = {}
    for lid in graph.labels:
        if lid == graph.source:
            continue
        vol = smooth_fields.get(lid)
        alpha = alphas.get(lid)
        if vol is None and alpha is None:
            continue
        if alpha is None:
            alpha = 1.0
        field = np.full(lattice.dims, alpha) if vol is None else alpha * vol.astype(np.float64)
        out[lid] = field * scale.get(lid, 1)
    return out


def cmd_validate(args) -> int:
    with open(args.graph, "r", encoding="utf-8") as fh:
        parsed = parse_graph_json(fh.read())
    if isinstance(parsed, SuperObjectSpec):
        result = build_superobject_dag(parsed)
        graph = result.graph
        print(f"compiled super-object spec: r={result.r}")
    else:
        graph = parsed
    report = graph.validate()
    if report.ok:
        order = graph.topo_sort().order
        print(f"ok: {len(graph.labels)} labels, {len(graph.edges)} edges")
        for lid in order:
            lab = graph.labels[lid]
            kids = graph.children(lid)
            kid_str = ", ".join(f"{graph.labels[c].name}={w:g}"
                                for c, w in sorted(kids.items())) or "(end-label)"
            print(f"  {lab.name}({lid}): {kid_str}")
        return 0
    for v in report.violations:
        print(f"violation: {v}", file=sys.stderr)
    return 1


def cmd_build_dag(args) -> int:
    with open(args.groups, "r", encoding="utf-8") as fh:
        parsed = parse_graph_json(fh.read())
    if not isinstance(parsed, SuperObjectSpec):
        print("error: input file does not carry a 'groups' list", file=sys.stderr)
        return 1
    result = build_superobject_dag(parsed)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(result.graph.to_json())
    print(f"r={result.r}")
    for gset, gid in result.group_ids.items():
        print(f"group {result.graph.labels[gid].name}({gid}): smoothness scale {result.r}")
    return 0


def cmd_solve(args) -> int:
    graph, scale = _load_graph(args.graph)
    lattice, data_fields = read_volume(args.data)
    ends = graph.end_labels()
    for lid in ends:
        if lid not in data_fields:
            raise VolumeFormatError(
                f"missing data field for end-label {graph.labels[lid].name}({lid})")
    data = {lid: data_fields[lid].astype(np.float64) for lid in ends}

    smooth_fields = {}
    if args.smooth:
        s_lat, smooth_fields = read_volume(args.smooth)
        if s_lat.dims != lattice.dims:
            raise VolumeFormatError(f"smoothness lattice {s_lat.dims} does not "
                                    f"match data lattice {lattice.dims}")
        for lid in smooth_fields:
            if lid not in graph.labels or lid == graph.source:
                raise VolumeFormatError(f"smoothness field for unknown/source label {lid}")
    alphas = {}
    for spec in args.alpha or []:
        if "=" not in spec:
            raise GraphError(f"--alpha expects LABEL=VALUE, got {spec!r}")
        token, val = spec.split("=", 1)
        alphas[_resolve_label(graph, token)] = float(val)

    smoothness = _assemble_smoothness(graph, lattice, smooth_fields, alphas, scale)
    problem = ProblemSpec.build(graph, lattice, data, smoothness, alpha=alphas)
    params = SolverParams(c=args.c, tau=args.tau, tol=args.tol,
                          max_iters=args.max_iters,
                          check_interval=args.check_interval,
                          workers=args.workers)
    labeling, report = solve(problem, params)

    if args.mode == "prob":
        out_fields = {lid: labeling[lid] for lid in ends}
    else:
        stacked = np.stack([labeling[lid] for lid in ends])
        winner = np.argmax(stacked, axis=0)  # argmax ties to lowest label id
        codes = np.array(ends, dtype=np.float32)[winner]
        out_fields = {graph.source: codes}
    write_volume(args.out, lattice, out_fields)

    if args.report:
        lines = [f"{key}={_fmt(val)}" for key, val in sorted(report.as_dict().items())]
        with open(args.report, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + "\n")
    print(f"iterations={report.iterations} residual={report.residual:.3e} "
          f"primal={report.primal:.6f} dual={report.dual:.6f} "
          f"converged={str(report.converged).lower()}")
    return 0 if report.converged else 2


def _fmt(val) -> str:
    if isinstance(val, bool):
        return str(val).lower()
    if isinstance(val, float):
        return repr(val)
    return str(val)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dagmf",
                                     description="DAG-structured continuous "
                                                 "max-flow segmentation")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="run a segmentation")
    p.add_argument("--graph", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--smooth", help="per-label smoothness volume")
    p.add_argument("--alpha", action="append", metavar="LABEL=VALUE",
                   help="uniform smoothness scale for a label (repeatable)")
    p.add_argument("--out", required=True)
    p.add_argument("--mode", choices=["prob", "argmax"], default="prob")
    p.add_argument("--c", type=float, default=0.25)
    p.add_argument("--tau", type=float, default=0.1)
    p.add_argument("--tol", type=float, default=1e-4)
    p.add_argument("--max-iters", type=int, default=5000)
    p.add_argument("--check-interval", type=int, default=10)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--report", help="write key=value run report here")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("validate", help="validate a graph spec file")
    p.add_argument("--graph", required=True)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("build-dag", help="compile a group spec to a weighted graph")
    p.add_argument("--groups", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_build_dag)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (GraphError, VolumeFormatError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
