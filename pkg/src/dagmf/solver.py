"""Augmented-Lagrangian primal-dual solver.

Flows are maximized label by label along a topological ordering of the
graph, with per-label spatial flows updated by projected gradient ascent;
the Lagrange multipliers u then serve as the (probabilistic) labeling.
Hot per-voxel work is delegated to the selected kernel backend.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from dagmf.graph import LabelGraph
from dagmf.kernels import K, set_workers
from dagmf.lattice import Lattice
from dagmf.problem import ProblemSpec


@dataclass(frozen=True)
class SolverParams:
    c: float = 0.25
    tau: float = 0.1
    tol: float = 1e-4
    max_iters: int = 5000
    check_interval: int = 10
    workers: int | None = None

    def __post_init__(self):
        if self.c <= 0 or self.tau <= 0 or self.tol <= 0:
            raise ValueError("c, tau, and tol must be positive")
        if self.max_iters < 1 or self.check_interval < 1:
            raise ValueError("max_iters and check_interval must be >= 1")


@dataclass
class SolveReport:
    iterations: int
    residual: float
    primal: float
    dual: float
    gap: float
    converged: bool
    wall_time: float

    def as_dict(self) -> dict:
        return {"iterations": self.iterations, "residual": self.residual,
                "primal": self.primal, "dual": self.dual, "gap": self.gap,
                "converged": self.converged, "wall_time": self.wall_time}


class _GraphIndex:
    """Adjacency and sweep data precomputed from a validated graph."""

    def __init__(self, graph: LabelGraph):
        self.source = graph.source
        self.order = graph.topo_sort().order
        self.parents = {lid: sorted(graph.parents(lid).items()) for lid in self.order}
        self.children = {lid: sorted(graph.children(lid).items()) for lid in self.order}
        self.leaves = frozenset(graph.end_labels())
        self.flow_factor = {}
        for lid in self.order:
            wsq = sum(w * w for _, w in self.children[lid])
            if lid == self.source:
                self.flow_factor[lid] = 1.0 / wsq
            elif lid not in self.leaves:
                self.flow_factor[lid] = 1.0 / (1.0 + wsq)


class SolverState:
    """All per-label iteration fields, keyed by label id.

    u, q, rho exist for every non-source label, sigma for every non-leaf
    label, p for all labels. divq caches the divergence of each q.
    """

    def __init__(self, problem: ProblemSpec):
        self.lattice = problem.lattice
        self.index = _GraphIndex(problem.graph)
        idx = self.index
        zeros = problem.lattice.zeros
        self.u = {lid: zeros() for lid in idx.order if lid != idx.source}
        self.p = {lid: zeros() for lid in idx.order}
        self.q = {lid: problem.lattice.zeros_vector()
                  for lid in idx.order if lid != idx.source}
        self.rho = {lid: zeros() for lid in idx.order}
        self.sigma = {lid: zeros() for lid in idx.order if lid not in idx.leaves}
        self.divq = {lid: zeros() for lid in idx.order if lid != idx.source}


# -- differential operators (public, same discretization as the kernels) --


def gradient(u: np.ndarray) -> np.ndarray:
    """Forward-difference gradient, zero-flux boundary; returns (3, ...)."""
    arr = np.ascontiguousarray(u, dtype=np.float64)
    if arr.ndim > 3:
        raise ValueError("scalar field must be 1-3 dimensional")
    return K.gradient(Lattice(arr.shape).as_field(arr))


def divergence(q: np.ndarray) -> np.ndarray:
    """Boundary-truncated backward-difference divergence (exact negative
    adjoint of `gradient`)."""
    q = np.ascontiguousarray(q, dtype=np.float64)
    if q.ndim != 4 or q.shape[0] != 3:
        raise ValueError("expected a (3, nx, ny, nz) flow field")
    return K.divergence(q)


def project_flow(q: np.ndarray, cap: np.ndarray) -> np.ndarray:
    """Radially clamp the per-voxel flow magnitude to cap; returns a copy."""
    q = np.array(q, dtype=np.float64)
    cap = np.ascontiguousarray(cap, dtype=np.float64)
    if q.shape[1:] != cap.shape:
        raise ValueError(f"lattice mismatch: flow {q.shape[1:]} vs cap {cap.shape}")
    if np.any(cap < 0):
        raise ValueError("flow capacity must be non-negative")
    K.project(q, cap)
    return q


# -- iteration ------------------------------------------------------------


def init_solution(problem: ProblemSpec, params: SolverParams | None = None) -> SolverState:
    """Start from the exact optimum of the zero-smoothness problem.

    All spatial flows are zero; every flow field carries the per-voxel
    minimum data term and the end-label multipliers split the argmin set
    uniformly, accumulating up the graph.
    """
    state = SolverState(problem)
    idx = state.index
    stacked = np.stack([problem.data[lid] for lid in sorted(idx.leaves)])
    min_d = stacked.min(axis=0)
    n_argmin = (stacked == min_d).sum(axis=0)
    for lid in idx.order[::-1]:
        state.p[lid][:] = min_d
        state.rho[lid][:] = min_d
        if lid in idx.leaves:
            state.u[lid][:] = (problem.data[lid] == min_d) / n_argmin
        if lid != idx.source:
            for par, w in idx.parents[lid]:
                if par != idx.source:
                    state.u[par] += w * state.u[lid]
    return state


def update_flows(state: SolverState, problem: ProblemSpec, params: SolverParams) -> SolverState:
    """One flow-maximization pass (spatial flows, then sink/interior/source
    flows along the reverse topological ordering)."""
    idx = state.index
    inv_c = 1.0 / params.c
    tau = min(params.tau, 0.5 / problem.lattice.ndim_effective)
    for lid in idx.order:
        if lid == idx.source:
            continue
        K.chambolle_step(state.q[lid], state.divq[lid], state.p[lid],
                         state.rho[lid], state.u[lid], problem.smoothness[lid],
                         tau, inv_c)
    for lid in idx.order:
        if lid == idx.source:
            K.fill(state.sigma[lid], inv_c)
        elif lid not in idx.leaves:
            K.seed_sigma(state.sigma[lid], state.rho[lid], state.divq[lid],
                         state.u[lid], inv_c)
    for lid in idx.order[::-1]:
        if lid in idx.leaves:
            K.leaf_flow(state.p[lid], problem.data[lid], state.rho[lid],
                        state.divq[lid], state.u[lid], inv_c)
        else:
            K.scale_into(state.p[lid], state.sigma[lid], idx.flow_factor[lid])
        if lid != idx.source:
            for par, w in idx.parents[lid]:
                K.accumulate_parent_sigma(state.sigma[par], w, state.divq[lid],
                                          state.p[lid], state.rho[lid],
                                          state.p[par], state.u[lid], inv_c)
    # refresh the weighted-parent-flow accumulators so the multiplier step
    # and the next spatial-flow ascent see the flows just computed
    for lid in idx.order:
        if lid != idx.source:
            K.fill(state.rho[lid], 0.0)
    for lid in idx.order:
        for chd, w in idx.children[lid]:
            K.axpy(state.rho[chd], w, state.p[lid])
    return state


def update_multipliers(state: SolverState, problem: ProblemSpec,
                       params: SolverParams) -> tuple[SolverState, float]:
    """Descend every multiplier along its conservation residual; returns
    the max |G_L| over labels and voxels."""
    idx = state.index
    residual = 0.0
    for lid in idx.order:
        if lid == idx.source:
            continue
        r = K.multiplier_step(state.u[lid], state.divq[lid], state.rho[lid],
                              state.p[lid], params.c)
        residual = max(residual, r)
    return state, residual


def solve(problem: ProblemSpec, params: SolverParams | None = None,
          diagnostics=None) -> tuple[dict[int, np.ndarray], SolveReport]:
    """Run the primal-dual iteration to the residual tolerance.

    Returns the labeling (end-label multipliers clamped to [0,1], interior
    labels recomputed as their weighted child sums, arrays in lattice
    shape) and a report. Non-convergence within max_iters is reported, not
    raised.
    """
    params = params or SolverParams()
    if params.workers is not None:
        set_workers(params.workers)
    t0 = time.perf_counter()
    state = init_solution(problem, params)
    idx = state.index
    residual = np.inf
    converged = False
    it = 0
    for it in range(1, params.max_iters + 1):
        update_flows(state, problem, params)
        _, residual = update_multipliers(state, problem, params)
        if it % params.check_interval == 0 or it == params.max_iters:
            if diagnostics is not None:
                u_now = _output_labeling(state, problem)
                diagnostics({"iteration": it, "residual": residual,
                             "primal": energy(u_now, problem, tol=None),
                             "dual": dual_value(state)})
            if residual <= params.tol:
                converged = True
                break
    u_out = _output_labeling(state, problem)
    primal = energy(u_out, problem, tol=None)
    dual = dual_value(state)
    report = SolveReport(iterations=it, residual=float(residual), primal=primal,
                         dual=dual, gap=primal - dual, converged=converged,
                         wall_time=time.perf_counter() - t0)
    shaped = {lid: arr.reshape(problem.lattice.dims) for lid, arr in u_out.items()}
    return shaped, report


def _output_labeling(state: SolverState, problem: ProblemSpec) -> dict[int, np.ndarray]:
    idx = state.index
    out = {lid: np.clip(state.u[lid], 0.0, 1.0) for lid in idx.leaves}
    _fill_interior(out, idx)
    return out


def _fill_interior(u: dict[int, np.ndarray], idx: _GraphIndex) -> None:
    """Derive interior (and source) labeling as weighted child sums."""
    for lid in idx.order[::-1]:
        if lid in idx.leaves:
            continue
        acc = None
        for chd, w in idx.children[lid]:
            acc = w * u[chd] if acc is None else acc + w * u[chd]
        u[lid] = acc


def dual_value(state: SolverState) -> float:
    """Total source flow, the value of the flow-maximization objective."""
    return float(np.sum(state.p[state.index.source]))


def energy(u: dict[int, np.ndarray], problem: ProblemSpec,
           tol: float | None = 1e-4) -> float:
    """Relaxed segmentation energy: data terms on end-labels plus weighted
    total variation of every non-source labeling function.

    Interior labelings are always recomputed from the end-labels. When a
    tolerance is given, constraint violations beyond 10*tol raise.
    """
    idx = _GraphIndex(problem.graph)
    lat = problem.lattice
    u = {lid: lat.as_field(arr) for lid, arr in u.items() if lid in idx.leaves}
    if set(u) != set(idx.leaves):
        raise ValueError("labeling must cover every end-label")
    _fill_interior(u, idx)
    if tol is not None:
        slack = 10.0 * tol
        worst = min(float(arr.min()) for arr in u.values())
        if worst < -slack:
            raise ValueError(f"labeling violates u >= 0 by {-worst}")
        src_sum = u[idx.source]
        dev = float(np.max(np.abs(src_sum - 1.0)))
        if dev > slack:
            raise ValueError(f"weighted end-label sums deviate from 1 by {dev}")
    total = 0.0
    for lid in idx.order:
        if lid == idx.source:
            continue
        if lid in idx.leaves:
            total += float(np.sum(problem.data[lid] * u[lid]))
        g = K.gradient(u[lid])
        mag = np.sqrt(g[0] ** 2 + g[1] ** 2 + g[2] ** 2)
        total += float(np.sum(problem.smoothness[lid] * mag))
    return total
