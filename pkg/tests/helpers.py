"""Shared graph builders and random problem generators for the tests."""

from __future__ import annotations

import numpy as np

from dagmf import (Edge, Label, LabelGraph, Lattice, ProblemSpec,
                   SuperObjectSpec, build_superobject_dag)

S, A, B, C, D, E = range(6)


def star_graph(n_labels: int) -> LabelGraph:
    """Flat multi-label structure: source over n end-labels (ids 1..n)."""
    labels = [Label(0, "S")] + [Label(i, f"L{i}") for i in range(1, n_labels + 1)]
    edges = [Edge(0, i, 1.0) for i in range(1, n_labels + 1)]
    return LabelGraph(labels, 0, edges)


def two_tier_graph() -> LabelGraph:
    """The worked example: S over A, B, E; A and B over C and D; E also
    fed directly from S. Incoming weights split evenly per child."""
    labels = [Label(S, "S"), Label(A, "A"), Label(B, "B"),
              Label(C, "C"), Label(D, "D"), Label(E, "E")]
    edges = [
        Edge(S, A, 1.0), Edge(S, B, 1.0),
        Edge(A, C, 0.5), Edge(B, C, 0.5),
        Edge(A, D, 0.5), Edge(B, D, 0.5),
        Edge(A, E, 1 / 3), Edge(B, E, 1 / 3), Edge(S, E, 1 / 3),
    ]
    return LabelGraph(labels, S, edges)


def overlapping_groups_spec() -> SuperObjectSpec:
    """Five end-labels A..E with the conflicting groups AB, BC, CD."""
    ends = [Label(i, n) for i, n in zip(range(1, 6), "ABCDE")]
    return SuperObjectSpec(end_labels=ends, source=Label(0, "S"),
                           groups=[(1, 2), (2, 3), (3, 4)])


def chain_ishikawa_graph(n_ends: int):
    """Layered full-ordering structure as a unit-weight chain of
    intermediates: S -> {E1, W1}, W_i -> {E_{i+1}, W_{i+1}}, last W gets
    the two final end-labels. Returns (graph, end ids in layer order,
    intermediate ids in layer order)."""
    assert n_ends >= 2
    labels = [Label(0, "S")] + [Label(i, f"E{i}") for i in range(1, n_ends + 1)]
    inter = []
    edges = [Edge(0, 1, 1.0)]
    prev = 0
    for i in range(1, n_ends - 1):
        wid = n_ends + i
        labels.append(Label(wid, f"W{i}"))
        inter.append(wid)
        edges.append(Edge(prev, wid, 1.0))
        edges.append(Edge(wid, i + 1, 1.0))
        prev = wid
    if n_ends == 2:
        edges.append(Edge(0, 2, 1.0))
    else:
        edges.append(Edge(prev, n_ends, 1.0))
    graph = LabelGraph(labels, 0, edges)
    return graph, list(range(1, n_ends + 1)), inter


def random_spec(rng: np.random.Generator, max_ends: int = 6,
                max_groups: int = 4) -> SuperObjectSpec:
    n = int(rng.integers(2, max_ends + 1))
    ends = [Label(i, f"L{i}") for i in range(1, n + 1)]
    ids = [lab.id for lab in ends]
    groups: list[tuple[int, ...]] = []
    seen = set()
    for _ in range(int(rng.integers(0, max_groups + 1))):
        size = int(rng.integers(2, n + 1))
        if size == n:
            continue
        g = tuple(sorted(rng.choice(ids, size=size, replace=False).tolist()))
        if frozenset(g) in seen:
            continue
        seen.add(frozenset(g))
        groups.append(g)
    return SuperObjectSpec(end_labels=ends, source=Label(0, "S"), groups=groups)


def random_problem(rng: np.random.Generator, dims: tuple[int, ...],
                   max_ends: int = 3, max_groups: int = 2,
                   alpha_range: tuple[float, float] = (0.0, 1.0)) -> ProblemSpec:
    spec = random_spec(rng, max_ends=max_ends, max_groups=max_groups)
    result = build_superobject_dag(spec)
    graph = result.graph
    lattice = Lattice(dims)
    data = {lid: rng.random(dims) for lid in graph.end_labels()}
    lo, hi = alpha_range
    smooth = {}
    for lid in graph.labels:
        if lid == graph.source:
            continue
        alpha = lo + (hi - lo) * float(rng.random())
        smooth[lid] = np.full(dims, alpha * result.smoothness_scale.get(lid, 1))
    return ProblemSpec.build(graph, lattice, data, smooth)


def three_region_phantom(rng: np.random.Generator, side: int, n_labels: int = 3,
                         noise: float = 0.3) -> dict[int, np.ndarray]:
    """Noisy data terms for concentric square regions, keyed 1..n_labels."""
    yy, xx = np.mgrid[0:side, 0:side]
    centre = (side - 1) / 2.0
    radius = np.maximum(np.abs(yy - centre), np.abs(xx - centre))
    bins = np.minimum((radius / (side / 2.0 + 1e-9) * n_labels).astype(int),
                      n_labels - 1)
    data = {}
    for i in range(n_labels):
        clean = np.where(bins == i, 0.0, 1.0)
        data[i + 1] = clean + noise * rng.standard_normal((side, side))
    return data
