"""Problem assembly: a validated label graph bound to lattice fields."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from dagmf.graph import LabelGraph, GraphError
from dagmf.lattice import Lattice


@dataclass
class ProblemSpec:
    """A segmentation problem ready for the solver.

    `data` maps every end-label to its sink-capacity field; `smoothness`
    maps non-source labels to the full boundary-cost field (per-label
    scale, any spatially varying term, and any group rescaling already
    multiplied in). Fields are stored in the padded 3D layout.
    """

    graph: LabelGraph
    lattice: Lattice
    data: dict[int, np.ndarray]
    smoothness: dict[int, np.ndarray]
    alpha: dict[int, float] = field(default_factory=dict)

    @classmethod
    def build(cls, graph: LabelGraph, lattice: Lattice,
              data: dict[int, np.ndarray],
              smoothness: dict[int, np.ndarray] | None = None,
              alpha: dict[int, float] | None = None) -> "ProblemSpec":
        report = graph.validate()
        if not report.ok:
            raise GraphError("invalid graph: " + "; ".join(report.violations))
        ends = graph.end_labels()
        missing = sorted(set(ends) - set(data))
        if missing:
            names = ", ".join(f"{graph.labels[i].name}({i})" for i in missing)
            raise ValueError(f"missing data field for end-label(s): {names}")
        extra = sorted(set(data) - set(ends))
        if extra:
            raise ValueError(f"data fields given for non-end-labels: {extra}")
        dfields = {lid: lattice.as_field(arr) for lid, arr in data.items()}
        sfields = {}
        for lid, arr in (smoothness or {}).items():
            if lid not in graph.labels or lid == graph.source:
                raise ValueError(f"smoothness field for unknown/source label {lid}")
            f = lattice.as_field(arr)
            if np.any(f < 0):
                raise ValueError(f"smoothness field for label {lid} is negative somewhere")
            sfields[lid] = f
        for lid in graph.labels:
            if lid != graph.source and lid not in sfields:
                sfields[lid] = lattice.zeros()
        return cls(graph=graph, lattice=lattice, data=dfields,
                   smoothness=sfields, alpha=dict(alpha or {}))
