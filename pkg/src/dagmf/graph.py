"""Weighted rooted DAGs of segmentation labels.

A label graph has a single parentless source vertex, intermediate
vertices, and childless end-labels (the regions of the final partition).
Edges point from parent to child and carry non-negative weights; a graph
is solver-ready once every non-source vertex's incoming weights sum to 1.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from heapq import heappush, heappop

WEIGHT_TOL = 1e-12


class GraphError(ValueError):
    """Malformed label graph or group specification."""


@dataclass(frozen=True)
class Label:
    id: int
    name: str


@dataclass(frozen=True)
class Edge:
    parent: int
    child: int
    weight: float  # pre-normalization this may be an integer multiplicity

    def __post_init__(self):
        if self.weight < 0:
            raise GraphError(f"edge ({self.parent}->{self.child}) has negative weight")


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.violations


@dataclass(frozen=True)
class TopoOrdering:
    """Parents-before-children ordering and its reversal."""

    order: tuple[int, ...]

    @property
    def reverse(self) -> tuple[int, ...]:
        return self.order[::-1]


class LabelGraph:
    """Rooted weighted DAG over labels.

    Edges are stored as given (duplicates allowed, weights possibly
    unnormalized multiplicities); :meth:`normalized` merges duplicates and
    rescales each vertex's incoming weights to sum to 1.
    """

    def __init__(self, labels: list[Label], source: int, edges: list[Edge]):
        ids = [lab.id for lab in labels]
        if len(set(ids)) != len(ids):
            raise GraphError("duplicate label ids")
        if source not in set(ids):
            raise GraphError(f"source id {source} not among labels")
        self.labels = {lab.id: lab for lab in labels}
        self.source = source
        self.edges = list(edges)
        for e in self.edges:
            if e.parent not in self.labels or e.child not in self.labels:
                raise GraphError(f"edge ({e.parent}->{e.child}) references unknown label")

    # -- adjacency views -------------------------------------------------

    def parents(self, lid: int) -> dict[int, float]:
        """Merged weight per parent of `lid`."""
        self._check_id(lid)
        out: dict[int, float] = {}
        for e in self.edges:
            if e.child == lid:
                out[e.parent] = out.get(e.parent, 0.0) + e.weight
        return out

    def children(self, lid: int) -> dict[int, float]:
        """Merged weight per child of `lid`."""
        self._check_id(lid)
        out: dict[int, float] = {}
        for e in self.edges:
            if e.parent == lid:
                out[e.child] = out.get(e.child, 0.0) + e.weight
        return out

    def end_labels(self) -> list[int]:
        """Childless vertices, ascending id."""
        has_child = {e.parent for e in self.edges}
        return sorted(lid for lid in self.labels if lid not in has_child)

    def _check_id(self, lid: int):
        if lid not in self.labels:
            raise GraphError(f"unknown label id {lid}")

    # -- normalization ---------------------------------------------------

    def normalized(self) -> "LabelGraph":
        """Merge duplicate edges and rescale incoming weights per child.

        Weights are combined exactly (rationals) before conversion to
        float, so integer multiplicities normalize without rounding drift.
        """
        totals: dict[int, Fraction] = {}
        merged: dict[tuple[int, int], Fraction] = {}
        for e in self.edges:
            w = Fraction(e.weight).limit_denominator(10**12) if not float(
                e.weight).is_integer() else Fraction(int(e.weight))
            merged[(e.parent, e.child)] = merged.get((e.parent, e.child), Fraction(0)) + w
            totals[e.child] = totals.get(e.child, Fraction(0)) + w
        edges = []
        for (par, chd), w in sorted(merged.items()):
            tot = totals[chd]
            if tot == 0:
                raise GraphError(f"label {chd} has zero total incoming weight")
            edges.append(Edge(par, chd, float(w / tot)))
        return LabelGraph(list(self.labels.values()), self.source, edges)

    # -- validation ------------------------------------------------------

    def validate(self) -> ValidationReport:
        """Check the rooted-DAG invariants and per-child weight sums."""
        v: list[str] = []
        incoming: dict[int, float] = {lid: 0.0 for lid in self.labels}
        for e in self.edges:
            incoming[e.child] += e.weight
        parentless = sorted(lid for lid in self.labels
                            if not any(e.child == lid for e in self.edges))
        if parentless != [self.source]:
            v.append(f"expected exactly one parentless vertex (the source {self.source}), "
                     f"found {parentless}")
        for lid, tot in incoming.items():
            if lid == self.source:
                continue
            if abs(tot - 1.0) > WEIGHT_TOL:
                v.append(f"label {lid}: incoming weights sum {tot!r} != 1")
        # reachability from the source
        seen = {self.source}
        stack = [self.source]
        kids = {lid: sorted(self.children(lid)) for lid in self.labels}
        while stack:
            for c in kids[stack.pop()]:
                if c not in seen:
                    seen.add(c)
                    stack.append(c)
        for lid in sorted(set(self.labels) - seen):
            v.append(f"label {lid} not reachable from source")
        # cycles: Kahn's algorithm leaves cyclic vertices unprocessed
        indeg = {lid: 0 for lid in self.labels}
        for e in {(e.parent, e.child) for e in self.edges}:
            indeg[e[1]] += 1
        queue = [lid for lid, d in indeg.items() if d == 0]
        done = 0
        while queue:
            done += 1
            for c in kids[queue.pop()]:
                indeg[c] -= 1
                if indeg[c] == 0:
                    queue.append(c)
        if done != len(self.labels):
            cyclic = sorted(lid for lid, d in indeg.items() if d > 0)
            v.append(f"cycle through labels {cyclic}")
        return ValidationReport(tuple(v))

    def topo_sort(self) -> TopoOrdering:
        """Deterministic topological ordering, ties broken by ascending id."""
        rep = self.validate()
        if not rep.ok:
            raise GraphError("cannot sort invalid graph: " + "; ".join(rep.violations))
        indeg = {lid: 0 for lid in self.labels}
        kids = {lid: sorted(self.children(lid)) for lid in self.labels}
        for lid in self.labels:
            for c in kids[lid]:
                indeg[c] += 1
        heap: list[int] = []
        for lid, d in indeg.items():
            if d == 0:
                heappush(heap, lid)
        order = []
        while heap:
            lid = heappop(heap)
            order.append(lid)
            for c in kids[lid]:
                indeg[c] -= 1
                if indeg[c] == 0:
                    heappush(heap, c)
        return TopoOrdering(tuple(order))

    # -- serialization ---------------------------------------------------

    def to_json(self) -> str:
        doc = {
            "labels": [{"id": lab.id, "name": lab.name}
                       for lab in sorted(self.labels.values(), key=lambda l: l.id)],
            "source": self.source,
            "edges": [{"parent": e.parent, "child": e.child, "weight": e.weight}
                      for e in self.edges],
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"

    def __eq__(self, other):
        return (isinstance(other, LabelGraph)
                and self.labels == other.labels
                and self.source == other.source
                and self.edges == other.edges)

    def __repr__(self):
        return (f"LabelGraph({len(self.labels)} labels, source={self.source}, "
                f"{len(self.edges)} edges)")


def parse_graph_json(text: str) -> "LabelGraph | SuperObjectSpec":
    """Parse a graph spec document.

    Documents carrying a non-empty "groups" list describe a super-object
    specification and must be compiled with :func:`build_superobject_dag`;
    otherwise an explicit edge list is expected. Edges carry either an
    integer "multiplicity" (normalized on load) or a final "weight".
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GraphError(f"graph file is not valid JSON: {exc}") from exc
    for key in ("labels", "source"):
        if key not in doc:
            raise GraphError(f"graph file missing required key {key!r}")
    labels = [Label(int(entry["id"]), str(entry["name"])) for entry in doc["labels"]]
    source = int(doc["source"])
    if doc.get("groups"):
        if doc.get("edges"):
            raise GraphError("graph file may carry either 'edges' or 'groups', not both")
        known = {lab.id for lab in labels}
        groups = [tuple(int(i) for i in g) for g in doc["groups"]]
        for g in groups:
            for lid in g:
                if lid not in known:
                    raise GraphError(f"group references unknown label id {lid}")
        end = [lab for lab in labels if lab.id != source]
        return SuperObjectSpec(end_labels=end, source=Label(source, _name_of(labels, source)),
                               groups=groups)
    edges = []
    for entry in doc.get("edges", []):
        if "weight" in entry and "multiplicity" in entry:
            raise GraphError("edge carries both 'weight' and 'multiplicity'")
        if "weight" in entry:
            w = float(entry["weight"])
        else:
            w = float(int(entry.get("multiplicity", 1)))
        edges.append(Edge(int(entry["parent"]), int(entry["child"]), w))
    graph = LabelGraph(labels, source, edges)
    if any("multiplicity" in entry for entry in doc.get("edges", [])):
        graph = graph.normalized()
    return graph


def _name_of(labels: list[Label], lid: int) -> str:
    for lab in labels:
        if lab.id == lid:
            return lab.name
    raise GraphError(f"unknown label id {lid}")


# -- super-object construction -------------------------------------------


@dataclass(frozen=True)
class SuperObjectSpec:
    """End-labels plus the groups of them that receive joint regularization."""

    end_labels: list[Label]
    source: Label
    groups: list[tuple[int, ...]] = field(default_factory=list)

    def __post_init__(self):
        if not self.end_labels:
            raise GraphError("at least one end-label is required")
        ids = {lab.id for lab in self.end_labels}
        if self.source.id in ids:
            raise GraphError("source id collides with an end-label")
        seen = set()
        for g in self.groups:
            gs = frozenset(g)
            if len(gs) < 2:
                raise GraphError(f"group {sorted(g)} has fewer than two members; "
                                 "scale that label's smoothness directly instead")
            if gs == ids:
                raise GraphError("a group equal to all end-labels is redundant; "
                                 "regularize via the source instead")
            if not gs <= ids:
                raise GraphError(f"group {sorted(g)} contains non-end-label ids")
            if gs in seen:
                raise GraphError(f"duplicate group {sorted(g)}")
            seen.add(gs)


@dataclass(frozen=True)
class ConstructionResult:
    """Compiled super-object DAG.

    `graph` is normalized and solver-ready; `r` is the common parent count
    every end-label was padded to; the smoothness field of each group
    vertex must be scaled by `smoothness_scale[group_id]` (= r) before
    solving; `padding` records the source-edge multiplicities added per
    end-label; `group_ids` maps each group (as a frozenset of member ids)
    to its new vertex id.
    """

    graph: LabelGraph
    r: int
    smoothness_scale: dict[int, int]
    padding: dict[int, int]
    group_ids: dict[frozenset[int], int]


def build_superobject_dag(spec: SuperObjectSpec) -> ConstructionResult:
    """Compile a group specification into a normalized rooted DAG.

    Each group becomes a vertex with the source as sole parent and the
    group members as children. End-labels are padded with source edges
    (with multiplicity) up to the common parent count r, then multiplicities
    are merged and normalized; group smoothness must be scaled by r.
    """
    src = spec.source.id
    membership = {lab.id: 0 for lab in spec.end_labels}
    for g in spec.groups:
        for lid in g:
            membership[lid] += 1
    r = max(1, max(membership.values()))

    next_id = max([src] + [lab.id for lab in spec.end_labels]) + 1
    names = {lab.id: lab.name for lab in spec.end_labels}
    labels = [spec.source] + list(spec.end_labels)
    group_ids: dict[frozenset[int], int] = {}
    mult: dict[tuple[int, int], int] = {}
    for g in spec.groups:
        gid = next_id
        next_id += 1
        group_ids[frozenset(g)] = gid
        labels.append(Label(gid, "".join(names[m] for m in sorted(g))))
        mult[(src, gid)] = 1
        for m in sorted(set(g)):
            mult[(gid, m)] = 1
    padding = {}
    for lab in spec.end_labels:
        pad = r - membership[lab.id]
        if pad:
            padding[lab.id] = pad
            mult[(src, lab.id)] = mult.get((src, lab.id), 0) + pad

    # exact normalization check: incoming multiplicities of every end-label
    # sum to r, of every group vertex to 1
    for lab in spec.end_labels:
        total = sum(m for (p, c), m in mult.items() if c == lab.id)
        assert total == r, (lab, total, r)
        assert sum(Fraction(m, r) for (p, c), m in mult.items() if c == lab.id) == 1

    edges = [Edge(p, c, float(m)) for (p, c), m in sorted(mult.items())]
    graph = LabelGraph(labels, src, edges).normalized()
    scale = {gid: r for gid in group_ids.values()}
    return ConstructionResult(graph=graph, r=r, smoothness_scale=scale,
                              padding=padding, group_ids=group_ids)


def insert_passthrough(graph: LabelGraph, parent: int, child: int,
                       new_id: int, name: str = "") -> LabelGraph:
    """Split edge parent->child through a fresh intermediate vertex.

    The intermediate inherits the edge's weight on its child side and unit
    weight from the parent, so normalization sums are preserved. With zero
    smoothness on the new vertex the model energy is unchanged.
    """
    w = graph.parents(child).get(parent)
    if w is None:
        raise GraphError(f"no edge ({parent}->{child})")
    if new_id in graph.labels:
        raise GraphError(f"label id {new_id} already in use")
    edges = [e for e in graph.edges if not (e.parent == parent and e.child == child)]
    edges += [Edge(parent, new_id, 1.0), Edge(new_id, child, w)]
    labels = list(graph.labels.values()) + [Label(new_id, name or f"via{new_id}")]
    return LabelGraph(labels, graph.source, edges)
