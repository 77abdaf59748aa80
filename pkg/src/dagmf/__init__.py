"""Continuous max-flow multi-region segmentation over weighted rooted DAGs."""

from dagmf.graph import (ConstructionResult, Edge, GraphError, Label, LabelGraph,
                         SuperObjectSpec, TopoOrdering, ValidationReport,
                         build_superobject_dag, insert_passthrough,
                         parse_graph_json)
from dagmf.kernels import backend_name
from dagmf.lattice import Lattice
from dagmf.problem import ProblemSpec
from dagmf.solver import (SolveReport, SolverParams, SolverState, divergence,
                          dual_value, energy, gradient, init_solution,
                          project_flow, solve, update_flows, update_multipliers)
from dagmf.volio import VolumeFormatError, read_volume, write_volume

__all__ = [
    "ConstructionResult", "Edge", "GraphError", "Label", "LabelGraph",
    "Lattice", "ProblemSpec", "SolveReport", "SolverParams", "SolverState",
    "SuperObjectSpec", "TopoOrdering", "ValidationReport",
    "VolumeFormatError", "backend_name", "build_superobject_dag",
    "divergence", "dual_value", "energy", "gradient", "init_solution",
    "insert_passthrough", "parse_graph_json", "project_flow", "read_volume",
    "solve", "update_flows", "update_multipliers", "write_volume",
]

__version__ = "0.1.0"
