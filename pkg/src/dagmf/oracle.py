"""Independent verification oracles.

Everything here deliberately avoids the solver's kernel code paths: the
finite-difference stencils are re-implemented so that a shared bug cannot
hide. Intended for desk-scale cross-checks and acceptance tests.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from dagmf.lattice import Lattice
from dagmf.problem import ProblemSpec

BRUTE_FORCE_LIMIT = 10**6


@dataclass(frozen=True)
class DiscreteLabeling:
    """Per-voxel assignment of end-label ids (an integral partition)."""

    lattice: Lattice
    assignment: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.assignment)
        if arr.size != self.lattice.n_voxels:
            raise ValueError("assignment does not cover the lattice")
        object.__setattr__(self, "assignment",
                           arr.reshape(self.lattice.dims).astype(np.int64))


# independent forward-difference stencil (zero-flux boundary)
def _grad_parts(u: np.ndarray) -> list[np.ndarray]:
    parts = []
    for axis in range(u.ndim):
        if u.shape[axis] == 1:
            parts.append(np.zeros_like(u))
            continue
        d = np.diff(u, axis=axis)
        pad = np.zeros_like(np.take(u, [0], axis=axis))
        parts.append(np.concatenate([d, pad], axis=axis))
    return parts


def _grad_mag(u: np.ndarray) -> np.ndarray:
    return np.sqrt(sum(p ** 2 for p in _grad_parts(u)))


def _div(parts: list[np.ndarray]) -> np.ndarray:
    out = np.zeros_like(parts[0])
    for axis, comp in enumerate(parts):
        t = comp.copy()
        last = [slice(None)] * t.ndim
        last[axis] = slice(-1, None)
        t[tuple(last)] = 0.0
        out += t
        hi = [slice(None)] * t.ndim
        hi[axis] = slice(1, None)
        lo = [slice(None)] * t.ndim
        lo[axis] = slice(None, -1)
        out[tuple(hi)] -= t[tuple(lo)]
    return out


def _indicators(labeling: DiscreteLabeling, ends: list[int]) -> dict[int, np.ndarray]:
    a = labeling.assignment
    unknown = sorted(set(np.unique(a)) - set(ends))
    if unknown:
        raise ValueError(f"assignment uses non-end-label ids {unknown}")
    return {lid: (a == lid).astype(np.float64) for lid in ends}


def discrete_energy(labeling: DiscreteLabeling, problem: ProblemSpec) -> float:
    """Segmentation energy of an integral labeling.

    Interior labeling functions are derived by weighted accumulation from
    the end-label indicators; all total-variation terms use this module's
    own stencil.
    """
    graph = problem.graph
    ends = graph.end_labels()
    dims = problem.lattice.dims
    u = _indicators(labeling, ends)
    order = graph.topo_sort().order
    for lid in order[::-1]:
        if lid in u or lid == graph.source:
            continue
        u[lid] = sum(w * u[chd] for chd, w in sorted(graph.children(lid).items()))
    total = 0.0
    for lid in order:
        if lid == graph.source:
            continue
        if lid in ends:
            total += float(np.sum(problem.data[lid].reshape(dims) * u[lid]))
        total += float(np.sum(problem.smoothness[lid].reshape(dims) * _grad_mag(u[lid])))
    return total


def brute_force_min(problem: ProblemSpec) -> tuple[float, list[DiscreteLabeling]]:
    """Exhaustive discrete minimum over all end-labelings.

    Enumeration is lexicographic by voxel index then ascending label id;
    every minimizer (ties within 1e-12) is returned.
    """
    ends = problem.graph.end_labels()
    n = problem.lattice.n_voxels
    count = len(ends) ** n
    if count > BRUTE_FORCE_LIMIT:
        raise ValueError(f"{len(ends)}^{n} = {count} labelings exceeds the "
                         f"enumeration guard of {BRUTE_FORCE_LIMIT}")
    best = np.inf
    argmins: list[DiscreteLabeling] = []
    for combo in itertools.product(ends, repeat=n):
        lab = DiscreteLabeling(problem.lattice, np.array(combo))
        e = discrete_energy(lab, problem)
        if e < best - 1e-12:
            best = e
            argmins = [lab]
        elif e <= best + 1e-12:
            argmins.append(lab)
    return float(best), argmins


def potts_max_flow(data: dict[int, np.ndarray], smoothness: dict[int, np.ndarray],
                   lattice: Lattice, c: float = 0.25, tau: float = 0.1,
                   tol: float = 1e-6, max_iters: int = 20000
                   ) -> tuple[dict[int, np.ndarray], float, int]:
    """Flat multi-label continuous max-flow, written from scratch.

    Serves as the reference the star-shaped graph solve is compared
    against. Returns (labeling, energy, iterations).
    """
    ids = sorted(data)
    dims = lattice.dims
    d = {lid: np.asarray(data[lid], dtype=np.float64).reshape(dims) for lid in ids}
    cap = {lid: np.asarray(smoothness.get(lid, np.zeros(dims)),
                           dtype=np.float64).reshape(dims) for lid in ids}
    tau = min(tau, 0.5 / lattice.ndim_effective)

    stacked = np.stack([d[lid] for lid in ids])
    min_d = stacked.min(axis=0)
    n_min = (stacked == min_d).sum(axis=0)
    u = {lid: (d[lid] == min_d) / n_min for lid in ids}
    ps = min_d.copy()
    p = {lid: min_d.copy() for lid in ids}
    q = {lid: [np.zeros(dims) for _ in range(len(dims))] for lid in ids}
    divq = {lid: np.zeros(dims) for lid in ids}

    it = 0
    for it in range(1, max_iters + 1):
        for lid in ids:
            drive = divq[lid] - ps + p[lid] - u[lid] / c
            g = _grad_parts(drive)
            comps = [qa + tau * ga for qa, ga in zip(q[lid], g)]
            mag = np.sqrt(sum(a ** 2 for a in comps))
            over = mag > cap[lid]
            scale = np.ones(dims)
            np.divide(cap[lid], mag, out=scale, where=over)
            q[lid] = [a * scale for a in comps]
            divq[lid] = _div(q[lid])
            p[lid] = np.minimum(d[lid], ps - divq[lid] + u[lid] / c)
        ps = (1.0 / c + sum(p[lid] + divq[lid] - u[lid] / c for lid in ids)) / len(ids)
        residual = 0.0
        for lid in ids:
            g_l = divq[lid] - ps + p[lid]
            u[lid] = u[lid] - c * g_l
            residual = max(residual, float(np.max(np.abs(g_l))))
        if residual <= tol:
            break
    out = {lid: np.clip(u[lid], 0.0, 1.0) for lid in ids}
    e = sum(float(np.sum(d[lid] * out[lid]))
            + float(np.sum(cap[lid] * _grad_mag(out[lid]))) for lid in ids)
    return out, e, it


def ishikawa_energy(u_ordered: list[np.ndarray], data: list[np.ndarray],
                    layer_smoothness: list[np.ndarray], lattice: Lattice) -> float:
    """Layered (full ordering) model energy.

    Labels are ordered; boundary costs apply to the cumulative threshold
    functions theta_i = sum of u_j for j >= i, i = 1..m-1, with one
    smoothness field per layer interface.
    """
    m = len(u_ordered)
    if len(data) != m or len(layer_smoothness) != m - 1:
        raise ValueError("need one data field per label and one smoothness "
                         "field per layer interface")
    dims = lattice.dims
    u = [np.asarray(a, dtype=np.float64).reshape(dims) for a in u_ordered]
    total = sum(float(np.sum(np.asarray(d, dtype=np.float64).reshape(dims) * ui))
                for d, ui in zip(data, u))
    for i in range(1, m):
        theta = sum(u[j] for j in range(i, m))
        s = np.asarray(layer_smoothness[i - 1], dtype=np.float64).reshape(dims)
        total += float(np.sum(s * _grad_mag(theta)))
    return total
