"""Ready-made test complexes with their natural homomorphisms.

Each builder returns a (complex, pi-one data) pair where phi is derived from
a hand-assigned edge labeling: torus edges are labeled by their wrap counts,
the projective plane's edges by whether the canonical lift flips antipodes.
Deriving phi from a labeling (rather than typing chord images directly) keeps
the builders independent of the spanning tree the presentation picks.
"""
from __future__ import annotations

import itertools
import math

from .complexes import Edge, EdgeLabels, MetricComplex
from .groups import FiniteTableGroup, FreeAbelianGroup, FreeGroup
from .presentation import PiOneData, phi_from_labeling, presentation


def circle(length: float = 1.0):
    """One vertex, one loop edge; phi is the identity onto Z."""
    X = MetricComplex([0], [Edge(0, 0, 0, length)], [])
    Z = FreeGroup(1)
    labels = EdgeLabels(Z, ((1,),))
    return X, phi_from_labeling(X, labels)


def circle_mod2(length: float = 1.0):
    """Circle with phi: Z -> Z/2 onto; the cover is the double circle."""
    X = MetricComplex([0], [Edge(0, 0, 0, length)], [])
    Z2 = FiniteTableGroup([[0, 1], [1, 0]], 0)
    labels = EdgeLabels(Z2, (1,))
    return X, phi_from_labeling(X, labels)


def wedge_of_circles(lengths):
    """Wedge of circles; phi is the identity onto the free group."""
    lengths = list(lengths)
    X = MetricComplex(
        [0],
        [Edge(i, 0, 0, float(l)) for i, l in enumerate(lengths)],
        [],
    )
    F = FreeGroup(len(lengths))
    labels = EdgeLabels(F, tuple((i + 1,) for i in range(len(lengths))))
    return X, phi_from_labeling(X, labels)


def grid_torus(nx: int = 3, ny: int = 4, sx: float = 1.0, sy: float = 1.0):
    """Unit-grid torus triangulation: each cell split along its diagonal.

    phi is the abelianization onto Z^2, read off the wrap counts of the
    edges; the diagonal of a cell runs corner to corner, so its flat length
    is the hypotenuse.
    """
    if nx < 3 or ny < 3:
        raise ValueError("need at least a 3x3 grid for a simplicial torus")

    def vid(i, j):
        return (i % nx) + nx * (j % ny)

    vertex_ids = list(range(nx * ny))
    edges = []
    keys = []
    edge_index = {}

    def add_edge(i, j, di, dj, length):
        u = vid(i, j)
        v = vid(i + di, j + dj)
        wrap_x = 1 if i + di >= nx else 0
        wrap_y = 1 if j + dj >= ny else 0
        idx = len(edges)
        edges.append(Edge(idx, u, v, length))
        keys.append((wrap_x, wrap_y))
        edge_index[(i, j, di, dj)] = idx
        return idx

    diag = math.hypot(sx, sy)
    for j in range(ny):
        for i in range(nx):
            add_edge(i, j, 1, 0, sx)
            add_edge(i, j, 0, 1, sy)
            add_edge(i, j, 1, 1, diag)
    triangles = []
    for j in range(ny):
        for i in range(nx):
            h = edge_index[(i, j, 1, 0)]
            d = edge_index[(i, j, 1, 1)]
            # right vertical: from (i+1, j) upward
            rv = edge_index[((i + 1) % nx, j, 0, 1)]
            # top horizontal: from (i, j+1) rightward
            th = edge_index[(i, (j + 1) % ny, 1, 0)]
            v = edge_index[(i, j, 0, 1)]
            triangles.append((h, rv, d))
            triangles.append((d, th, v))
    X = MetricComplex(vertex_ids, edges, triangles)
    labels = EdgeLabels(FreeAbelianGroup(2), tuple(keys))
    return X, phi_from_labeling(X, labels)


def _icosahedron():
    """Vertices and faces of the regular icosahedron (unit-ish coordinates)."""
    phi = (1 + math.sqrt(5)) / 2
    verts = []
    for a, b in itertools.product((1.0, -1.0), (phi, -phi)):
        verts.append((0.0, a, b))
        verts.append((a, b, 0.0))
        verts.append((b, 0.0, a))
    # edges connect vertices at the minimal nonzero distance (length 2)
    def d2(p, q):
        return sum((x - y) ** 2 for x, y in zip(p, q))

    n = len(verts)
    adj = {
        (i, j)
        for i in range(n)
        for j in range(n)
        if i != j and abs(d2(verts[i], verts[j]) - 4.0) < 1e-9
    }
    faces = sorted(
        (i, j, k)
        for i in range(n)
        for j in range(i + 1, n)
        for k in range(j + 1, n)
        if (i, j) in adj and (j, k) in adj and (i, k) in adj
    )
    assert len(faces) == 20
    return verts, adj, faces


def projective_plane(edge_length: float = 1.0):
    """Antipodal quotient of the icosahedron: the 6-vertex triangulation of
    the projective plane, with phi onto Z/2.

    Each quotient edge is labeled by whether its canonical lift connects a
    chosen representative to the antipode of the other representative; loop
    holonomy then detects exactly the noncontractible classes.
    """
    verts, adj, faces = _icosahedron()
    n = len(verts)

    def antipode(i):
        v = verts[i]
        for j in range(n):
            if all(abs(verts[j][k] + v[k]) < 1e-9 for k in range(3)):
                return j
        raise AssertionError("icosahedron is centrally symmetric")

    anti = [antipode(i) for i in range(n)]
    # pick one representative per antipodal pair
    reps = []
    cls = {}
    for i in range(n):
        if anti[i] not in cls:
            cls[i] = len(reps)
            reps.append(i)
        else:
            cls[i] = cls[anti[i]]
    assert len(reps) == 6

    Z2 = FiniteTableGroup([[0, 1], [1, 0]], 0)
    edges = []
    keys = []
    edge_of_pair = {}
    for a in range(6):
        for b in range(a + 1, 6):
            ra, rb = reps[a], reps[b]
            if (ra, rb) in adj:
                flip = 0
            elif (ra, anti[rb]) in adj:
                flip = 1
            else:
                raise AssertionError("quotient of the icosahedron is complete")
            idx = len(edges)
            edges.append(Edge(idx, a, b, edge_length))
            keys.append(flip)
            edge_of_pair[(a, b)] = idx
    triangles = set()
    for (i, j, k) in faces:
        tri = tuple(sorted((cls[i], cls[j], cls[k])))
        triangles.add(
            (
                edge_of_pair[(tri[0], tri[1])],
                edge_of_pair[(tri[1], tri[2])],
                edge_of_pair[(tri[0], tri[2])],
            )
        )
    triangles = sorted(triangles)
    assert len(triangles) == 10
    X = MetricComplex(list(range(6)), edges, triangles)
    labels = EdgeLabels(Z2, tuple(keys))
    return X, phi_from_labeling(X, labels)


def triangle_disk(a: float = 1.0, b: float = 1.0, c: float = 1.0):
    """A single flat triangle (contractible)."""
    X = MetricComplex(
        [0, 1, 2],
        [Edge(0, 0, 1, c), Edge(1, 1, 2, a), Edge(2, 2, 0, b)],
        [(0, 1, 2)],
    )
    return X, presentation(X)


def two_equilateral_square(side: float = 1.0):
    """Square split into two unit equilateral-ish triangles (disk)."""
    diag = side
    X = MetricComplex(
        [0, 1, 2, 3],
        [
            Edge(0, 0, 1, side),
            Edge(1, 1, 2, side),
            Edge(2, 2, 0, diag),
            Edge(3, 2, 3, side),
            Edge(4, 3, 0, side),
        ],
        [(0, 1, 2), (2, 3, 4)],
    )
    return X, presentation(X)
