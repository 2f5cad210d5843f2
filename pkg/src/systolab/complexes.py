"""Piecewise-flat metric simplicial complexes of dimension at most two.

A complex is a multigraph with positive edge lengths plus a set of triangles
(ordered edge triples); every triangle must satisfy the strict triangle
inequality so that it has a flat Euclidean realization.  Loop edges and
parallel edges are allowed in the 1-skeleton (wedges of circles need them)
but cannot bound triangles.

Two refinement operations are provided, both exactly area-preserving:

* ``subdivide_barycentric`` inserts the flat barycenter of each triangle and
  its three spokes (1 -> 3 triangles); original edges are kept, so distances
  never increase.
* ``subdivide_midpoint`` halves every edge and adds the medial triangle
  (1 -> 4 similar triangles at half scale); path lengths through midpoints
  can strictly decrease, so repeated refinement lets edge paths approach the
  underlying flat geodesics.

Both operations transport an optional group labeling of the directed edges
so that the holonomy of every loop is preserved; this is what keeps covering
spaces consistent across refinements.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import ParseError, ValidationError
from .groups import Group


@dataclass(frozen=True)
class Edge:
    id: int
    u: int  # vertex index
    v: int
    length: float


@dataclass(frozen=True)
class EdgeLabels:
    """Group labels for the directed edges of a complex.

    ``keys[i]`` is the label of edge i traversed from ``edges[i].u`` to
    ``edges[i].v``; the reverse traversal carries the inverse.  Loop products
    of labels define a holonomy homomorphism pi_1 -> target.
    """

    target: Group
    keys: tuple

    def forward(self, edge_index: int):
        return self.keys[edge_index]

    def backward(self, edge_index: int):
        return self.target.inv_key(self.keys[edge_index])


def heron_area(a: float, b: float, c: float) -> float:
    s = 0.5 * (a + b + c)
    val = s * (s - a) * (s - b) * (s - c)
    return math.sqrt(max(val, 0.0))


def flat_coordinates(a: float, b: float, c: float):
    """Planar coordinates of a triangle with sides a=|BC|, b=|CA|, c=|AB|.

    Returns (A, B, C) with A at the origin and B on the positive x-axis.
    """
    x = (b * b + c * c - a * a) / (2.0 * c)
    y = math.sqrt(max(b * b - x * x, 0.0))
    return (0.0, 0.0), (c, 0.0), (x, y)


class MetricComplex:
    """Validated piecewise-flat complex.  Immutable once constructed."""

    def __init__(
        self,
        vertex_ids: Sequence[int],
        edges: Sequence[Edge],
        triangles: Sequence[tuple[int, int, int]],
        basepoint: int = 0,
    ):
        self.vertex_ids = tuple(vertex_ids)
        self.edges = tuple(edges)
        self.triangles = tuple(tuple(t) for t in triangles)
        self.basepoint = basepoint
        self._validate()
        self._adjacency = None
        self._triangle_cycles = None

    # -- construction ------------------------------------------------------
    def _validate(self) -> None:
        nv = len(self.vertex_ids)
        if nv == 0:
            raise ValidationError("complex has no vertices")
        if len(set(self.vertex_ids)) != nv:
            raise ValidationError("duplicate vertex ids")
        if not 0 <= self.basepoint < nv:
            raise ValidationError("basepoint out of range")
        seen_edge_ids = set()
        for e in self.edges:
            if e.id in seen_edge_ids:
                raise ValidationError(f"duplicate edge id {e.id}")
            seen_edge_ids.add(e.id)
            if not (0 <= e.u < nv and 0 <= e.v < nv):
                raise ValidationError(f"edge {e.id} has bad endpoints")
            if not (math.isfinite(e.length) and e.length > 0):
                raise ValidationError(f"edge {e.id} must have positive length")
        for t in self.triangles:
            self._validate_triangle(t)
        self._check_connected()

    def _validate_triangle(self, t) -> None:
        if len(t) != 3 or len(set(t)) != 3:
            raise ValidationError(f"triangle {t} needs three distinct edges")
        for ei in t:
            if not 0 <= ei < len(self.edges):
                raise ValidationError(f"triangle {t} references a missing edge")
            e = self.edges[ei]
            if e.u == e.v:
                raise ValidationError(f"triangle {t} contains the loop edge {e.id}")
        cycle = self.triangle_cycle(t)
        if cycle is None:
            tid = tuple(self.edges[ei].id for ei in t)
            raise ValidationError(f"edges {tid} do not close up into a triangle")
        lengths = sorted(self.edges[ei].length for ei in t)
        if not lengths[0] + lengths[1] > lengths[2]:
            tid = tuple(self.edges[ei].id for ei in t)
            raise ValidationError(
                f"triangle with edges {tid} violates the strict triangle "
                f"inequality: {lengths}"
            )

    def triangle_cycle(self, t):
        """Directed boundary of a triangle as ((edge_index, +1/-1), ...).

        Direction +1 means the edge is traversed u -> v.  Returns None when
        the three edges do not form a 3-cycle on three distinct vertices.
        """
        e0, e1, e2 = (self.edges[i] for i in t)
        for flip0 in (1, -1):
            a, b = (e0.u, e0.v) if flip0 == 1 else (e0.v, e0.u)
            for i, j in ((1, 2), (2, 1)):
                em, el = self.edges[t[i]], self.edges[t[j]]
                for flip1 in (1, -1):
                    bm, c = (em.u, em.v) if flip1 == 1 else (em.v, em.u)
                    if bm != b:
                        continue
                    for flip2 in (1, -1):
                        cl, al = (el.u, el.v) if flip2 == 1 else (el.v, el.u)
                        if cl == c and al == a and len({a, b, c}) == 3:
                            return ((t[0], flip0), (t[i], flip1), (t[j], flip2))
        return None

    def _check_connected(self) -> None:
        nv = len(self.vertex_ids)
        if nv == 1:
            return
        seen = {0}
        stack = [0]
        adj: dict[int, list[int]] = {}
        for e in self.edges:
            adj.setdefault(e.u, []).append(e.v)
            adj.setdefault(e.v, []).append(e.u)
        while stack:
            u = stack.pop()
            for w in adj.get(u, ()):
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        if len(seen) != nv:
            raise ValidationError("complex is not connected")

    # -- queries -------------------------------------------------------------
    @property
    def dimension(self) -> int:
        if self.triangles:
            return 2
        return 1 if self.edges else 0

    def is_pure(self) -> bool:
        if self.dimension != 2:
            return True
        used = {ei for t in self.triangles for ei in t}
        return len(used) == len(self.edges)

    def adjacency(self):
        """Per-vertex list of (neighbor, length, edge_index, direction)."""
        if self._adjacency is None:
            adj = [[] for _ in self.vertex_ids]
            for i, e in enumerate(self.edges):
                adj[e.u].append((e.v, e.length, i, +1))
                if e.u != e.v:
                    adj[e.v].append((e.u, e.length, i, -1))
                else:
                    adj[e.u].append((e.u, e.length, i, -1))
            self._adjacency = tuple(tuple(x) for x in adj)
        return self._adjacency

    def edge_index_by_id(self, edge_id: int) -> int:
        for i, e in enumerate(self.edges):
            if e.id == edge_id:
                return i
        raise ValidationError(f"no edge with id {edge_id}")

    def triangle_area(self, t) -> float:
        a, b, c = (self.edges[ei].length for ei in t)
        return heron_area(a, b, c)

    def total_edge_length(self) -> float:
        return sum(e.length for e in self.edges)

    def lengths(self) -> tuple[float, ...]:
        return tuple(e.length for e in self.edges)

    def with_lengths(self, lengths) -> "MetricComplex":
        if len(lengths) != len(self.edges):
            raise ValidationError("length vector has the wrong size")
        edges = tuple(
            Edge(e.id, e.u, e.v, float(l)) for e, l in zip(self.edges, lengths)
        )
        return MetricComplex(self.vertex_ids, edges, self.triangles, self.basepoint)

    def scaled(self, factor: float) -> "MetricComplex":
        return self.with_lengths([e.length * factor for e in self.edges])


# ---------------------------------------------------------------------------
# text format


def parse_complex(text: str) -> MetricComplex:
    """Parse the line-oriented complex format (v / e / t / base lines)."""
    vertex_ids: list[int] = []
    vid_to_idx: dict[int, int] = {}
    edge_rows: list[tuple[int, int, int, float]] = []
    triangle_rows: list[tuple[int, ...]] = []
    base_id = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        kind = parts[0]
        try:
            if kind == "v":
                (vid,) = (int(parts[1]),)
                if vid in vid_to_idx:
                    raise ParseError(f"duplicate vertex {vid}", line=lineno)
                vid_to_idx[vid] = len(vertex_ids)
                vertex_ids.append(vid)
            elif kind == "e":
                eid, u, v = (int(x) for x in parts[1:4])
                length = float(parts[4])
                edge_rows.append((eid, u, v, length))
            elif kind == "t":
                triangle_rows.append(tuple(int(x) for x in parts[1:4]))
            elif kind == "base":
                base_id = int(parts[1])
            else:
                raise ParseError(f"unknown directive {kind!r}", line=lineno)
        except (IndexError, ValueError):
            raise ParseError(f"malformed line {raw!r}", line=lineno) from None
    edges = []
    eid_to_idx: dict[int, int] = {}
    for eid, u, v, length in edge_rows:
        for w in (u, v):
            if w not in vid_to_idx:
                vid_to_idx[w] = len(vertex_ids)
                vertex_ids.append(w)
        if eid in eid_to_idx:
            raise ParseError(f"duplicate edge id {eid}")
        eid_to_idx[eid] = len(edges)
        edges.append(Edge(eid, vid_to_idx[u], vid_to_idx[v], length))
    triangles = []
    for row in triangle_rows:
        try:
            triangles.append(tuple(eid_to_idx[eid] for eid in row))
        except KeyError as exc:
            raise ParseError(f"triangle references missing edge {exc}") from None
    base = 0
    if base_id is not None:
        if base_id not in vid_to_idx:
            raise ParseError(f"basepoint {base_id} is not a vertex")
        base = vid_to_idx[base_id]
    return MetricComplex(vertex_ids, edges, triangles, base)


def load_complex(path) -> MetricComplex:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_complex(fh.read())


def complex_to_text(X: MetricComplex) -> str:
    lines = [f"v {vid}" for vid in X.vertex_ids]
    for e in X.edges:
        lines.append(
            f"e {e.id} {X.vertex_ids[e.u]} {X.vertex_ids[e.v]} {e.length!r}"
        )
    for t in X.triangles:
        lines.append("t " + " ".join(str(X.edges[ei].id) for ei in t))
    lines.append(f"base {X.vertex_ids[X.basepoint]}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# subdivision


def _path_label(target: Group, steps) -> object:
    key = target.identity_key()
    for k in steps:
        key = target.mul_key(key, k)
    return key


def _directed_label(labels: EdgeLabels, edge_index: int, direction: int):
    return (
        labels.forward(edge_index)
        if direction == 1
        else labels.backward(edge_index)
    )


def subdivide_midpoint(X: MetricComplex, labels: EdgeLabels | None = None):
    """Halve every edge and add the medial triangle of every triangle.

    The four sub-triangles of a flat triangle are similar to it at ratio 1/2,
    so areas are preserved exactly and no coordinate computation is needed.
    Labels split as (full label, identity) along each edge; medial labels are
    the label products of corner paths, which keeps all loop holonomies.
    """
    new_vertex_ids = list(X.vertex_ids)
    next_vid = max(X.vertex_ids) + 1
    midpoint_of = []
    for _e in X.edges:
        midpoint_of.append(len(new_vertex_ids))
        new_vertex_ids.append(next_vid)
        next_vid += 1

    target = labels.target if labels is not None else None
    new_edges: list[Edge] = []
    new_keys: list = []
    half_edges = []  # per old edge: (first_half_index, second_half_index)
    for i, e in enumerate(X.edges):
        m = midpoint_of[i]
        first = len(new_edges)
        new_edges.append(Edge(first, e.u, m, e.length / 2.0))
        new_edges.append(Edge(first + 1, m, e.v, e.length / 2.0))
        half_edges.append((first, first + 1))
        if labels is not None:
            new_keys.append(labels.forward(i))
            new_keys.append(target.identity_key())

    new_triangles: list[tuple[int, int, int]] = []
    for t in X.triangles:
        cycle = X.triangle_cycle(t)
        # directed boundary (A->B, B->C, C->A)
        verts = []
        for ei, d in cycle:
            e = X.edges[ei]
            verts.append(e.u if d == 1 else e.v)
        A, B, C = verts
        (eAB, dAB), (eBC, dBC), (eCA, dCA) = cycle
        mAB, mBC, mCA = midpoint_of[eAB], midpoint_of[eBC], midpoint_of[eCA]
        lAB, lBC, lCA = (X.edges[ei].length for ei, _d in cycle)

        def half_to_mid(ei, d):
            # label of (start vertex of directed traversal) -> midpoint
            if labels is None:
                return None
            if d == 1:
                return labels.forward(ei)  # u -> m carries the full label
            return target.identity_key()  # v -> m is the trivial half

        def half_from_mid(ei, d):
            # label of midpoint -> (end vertex of directed traversal)
            if labels is None:
                return None
            if d == 1:
                return target.identity_key()
            return labels.backward(ei)

        def add_medial(m1, m2, length, label_key):
            idx = len(new_edges)
            new_edges.append(Edge(idx, m1, m2, length))
            if labels is not None:
                new_keys.append(label_key)
            return idx

        # medial edge m(AB)->m(BC) is homotopic to the corner path through B
        lbl = None
        if labels is not None:
            lbl = _path_label(target, [half_from_mid(eAB, dAB), half_to_mid(eBC, dBC)])
        m_ab_bc = add_medial(mAB, mBC, lCA / 2.0, lbl)
        if labels is not None:
            lbl = _path_label(target, [half_from_mid(eBC, dBC), half_to_mid(eCA, dCA)])
        m_bc_ca = add_medial(mBC, mCA, lAB / 2.0, lbl)
        if labels is not None:
            lbl = _path_label(target, [half_from_mid(eCA, dCA), half_to_mid(eAB, dAB)])
        m_ca_ab = add_medial(mCA, mAB, lBC / 2.0, lbl)

        def half_index(ei, d, first_part: bool):
            h1, h2 = half_edges[ei]
            if d == 1:
                return h1 if first_part else h2
            return h2 if first_part else h1

        # corner triangles at A, B, C, then the central medial triangle
        new_triangles.append(
            (half_index(eAB, dAB, True), m_ca_ab, half_index(eCA, dCA, False))
        )
        new_triangles.append(
            (half_index(eAB, dAB, False), half_index(eBC, dBC, True), m_ab_bc)
        )
        new_triangles.append(
            (half_index(eBC, dBC, False), half_index(eCA, dCA, True), m_bc_ca)
        )
        new_triangles.append((m_ab_bc, m_bc_ca, m_ca_ab))

    X2 = MetricComplex(new_vertex_ids, new_edges, new_triangles, X.basepoint)
    labels2 = (
        EdgeLabels(target, tuple(new_keys)) if labels is not None else None
    )
    return X2, labels2


def subdivide_barycentric(X: MetricComplex, labels: EdgeLabels | None = None):
    """Insert the flat barycenter of each triangle with its three spokes.

    Original edges survive, so the refinement never increases any distance
    and preserves total area: the three sub-triangles tile the flat parent.
    """
    new_vertex_ids = list(X.vertex_ids)
    next_vid = max(X.vertex_ids) + 1
    target = labels.target if labels is not None else None
    new_edges = list(X.edges)
    new_keys = list(labels.keys) if labels is not None else None
    new_triangles: list[tuple[int, int, int]] = []

    for t in X.triangles:
        cycle = X.triangle_cycle(t)
        verts = []
        for ei, d in cycle:
            e = X.edges[ei]
            verts.append(e.u if d == 1 else e.v)
        A, B, C = verts
        lens = [X.edges[ei].length for ei, _d in cycle]
        cAB, aBC, bCA = lens
        # flat realization with A at origin, B on the x-axis
        pa, pb, pc = flat_coordinates(aBC, bCA, cAB)
        bary = (
            (pa[0] + pb[0] + pc[0]) / 3.0,
            (pa[1] + pb[1] + pc[1]) / 3.0,
        )

        def dist(p, q):
            return math.hypot(p[0] - q[0], p[1] - q[1])

        bar_idx = len(new_vertex_ids)
        new_vertex_ids.append(next_vid)
        next_vid += 1

        spoke_len = [dist(bary, pa), dist(bary, pb), dist(bary, pc)]
        spokes = []
        # spoke labels: vertex -> barycenter is homotopic (inside the flat
        # triangle) to vertex -> A -> barycenter, with A -> barycenter trivial
        boundary_keys = None
        if labels is not None:
            boundary_keys = [
                _directed_label(labels, ei, d) for ei, d in cycle
            ]
        for corner_pos, vtx in enumerate((A, B, C)):
            idx = len(new_edges)
            new_edges.append(Edge(idx, vtx, bar_idx, spoke_len[corner_pos]))
            if labels is not None:
                if corner_pos == 0:
                    key = target.identity_key()
                elif corner_pos == 1:
                    # B -> A along the boundary is the reverse of A -> B
                    key = target.inv_key(boundary_keys[0])
                else:
                    # C -> A directly
                    key = boundary_keys[2]
                new_keys.append(key)
            spokes.append(idx)

        (eAB, _), (eBC, _), (eCA, _) = cycle
        new_triangles.append((eAB, spokes[1], spokes[0]))
        new_triangles.append((eBC, spokes[2], spokes[1]))
        new_triangles.append((eCA, spokes[0], spokes[2]))

    X2 = MetricComplex(new_vertex_ids, new_edges, new_triangles, X.basepoint)
    labels2 = (
        EdgeLabels(target, tuple(new_keys)) if labels is not None else None
    )
    return X2, labels2
