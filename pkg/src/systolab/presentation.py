"""Spanning-tree presentations of the fundamental group and homomorphisms
into computable groups.

The edge-path group of a connected complex is presented by one generator per
non-tree edge (chord) and one relator per triangle (its boundary word with
tree edges elided).  A homomorphism phi into a target group is stored as one
image per chord; it is well-defined exactly when every relator maps to the
identity, which is checked at attachment time.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, replace

from .complexes import EdgeLabels, MetricComplex
from .errors import ParseError, ValidationError
from .groups import Group, GroupElement, parse_group


@dataclass(frozen=True)
class PiOneData:
    """Presentation of pi_1(X, basepoint) plus an optional homomorphism.

    relators are stored as words over the chords: tuples of nonzero signed
    (chord position + 1) entries, freely reduced.
    """

    complex: MetricComplex
    basepoint: int
    tree_edges: tuple[int, ...]  # edge indices
    chords: tuple[int, ...]  # edge indices
    relators: tuple[tuple[int, ...], ...]
    parent: tuple  # per vertex: (edge_index, direction, parent_vertex) or None
    target: Group | None = None
    images: tuple[GroupElement, ...] | None = None

    @property
    def chord_symbols(self) -> tuple[str, ...]:
        return tuple(f"g{self.complex.edges[c].id}" for c in self.chords)

    def chord_position(self, edge_index: int) -> int:
        return self.chords.index(edge_index)

    def has_phi(self) -> bool:
        return self.target is not None

    def labeling(self) -> EdgeLabels:
        """Directed-edge labels: identity on tree edges, phi on chords."""
        if not self.has_phi():
            raise ValidationError("no homomorphism attached")
        keys = []
        chord_pos = {c: i for i, c in enumerate(self.chords)}
        for i in range(len(self.complex.edges)):
            if i in chord_pos:
                keys.append(self.images[chord_pos[i]].key)
            else:
                keys.append(self.target.identity_key())
        return EdgeLabels(self.target, tuple(keys))

    def relator_matrix(self) -> list[list[int]]:
        """Exponent-sum matrix of relators over chords (rows = relators)."""
        rows = []
        for rel in self.relators:
            row = [0] * len(self.chords)
            for letter in rel:
                row[abs(letter) - 1] += 1 if letter > 0 else -1
            rows.append(row)
        return rows


def _reduce_word(letters) -> tuple[int, ...]:
    out: list[int] = []
    for x in letters:
        if x == 0:
            continue
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def presentation(X: MetricComplex, basepoint: int | None = None) -> PiOneData:
    """Edge-path presentation from a breadth-first spanning tree.

    The rank of the abelianization equals the first Betti number; tests
    cross-check this against E - V + 1 minus the number of independent
    triangle relations.
    """
    base = X.basepoint if basepoint is None else basepoint
    nv = len(X.vertex_ids)
    parent: list = [None] * nv
    in_tree = set()
    seen = {base}
    queue = deque([base])
    adj = X.adjacency()
    while queue:
        u = queue.popleft()
        for (w, _length, ei, direction) in adj[u]:
            if w not in seen:
                seen.add(w)
                parent[w] = (ei, direction, u)
                in_tree.add(ei)
                queue.append(w)
    if len(seen) != nv:
        raise ValidationError("complex is not connected")
    tree_edges = tuple(sorted(in_tree))
    chords = tuple(i for i in range(len(X.edges)) if i not in in_tree)
    chord_pos = {c: i for i, c in enumerate(chords)}
    relators = []
    for t in X.triangles:
        word = []
        for ei, direction in X.triangle_cycle(t):
            if ei in chord_pos:
                word.append(direction * (chord_pos[ei] + 1))
        relators.append(_reduce_word(word))
    return PiOneData(
        complex=X,
        basepoint=base,
        tree_edges=tree_edges,
        chords=chords,
        relators=tuple(relators),
        parent=tuple(parent),
    )


def attach_phi(P: PiOneData, target: Group, images) -> PiOneData:
    """Attach a homomorphism given by one image per chord.

    ``images`` is either a sequence aligned with ``P.chords`` or a mapping
    from edge id to group element; unlisted chords map to the identity.
    Every relator must map to the identity of the target, otherwise the
    offending triangle is reported.
    """
    if isinstance(images, dict):
        by_id = dict(images)
        seq = []
        for c in P.chords:
            eid = P.complex.edges[c].id
            seq.append(by_id.pop(eid, target.identity()))
        if by_id:
            raise ValidationError(
                f"images given for non-chord edges: {sorted(by_id)}"
            )
        images = seq
    images = tuple(images)
    if len(images) != len(P.chords):
        raise ValidationError(
            f"expected {len(P.chords)} images, got {len(images)}"
        )
    for g in images:
        target._check(g)
    for t_index, rel in enumerate(P.relators):
        img = target.identity()
        for letter in rel:
            g = images[abs(letter) - 1]
            img = img * (g if letter > 0 else ~g)
        if not img.is_identity():
            tri = P.complex.triangles[t_index]
            tids = tuple(P.complex.edges[ei].id for ei in tri)
            raise ValidationError(
                f"relator of triangle {tids} maps to {img} instead of the "
                "identity; phi is not well-defined"
            )
    return replace(P, target=target, images=images)


def _label_to_vertex(X: MetricComplex, P_parent, base, labels: EdgeLabels):
    """Label product along the tree path from the basepoint to each vertex."""
    target = labels.target
    out = [None] * len(X.vertex_ids)
    out[base] = target.identity_key()
    order = [base]
    # parents always point toward the basepoint, so one pass in BFS order works
    remaining = [v for v in range(len(X.vertex_ids)) if v != base]
    while remaining:
        progressed = []
        for v in remaining:
            ei, direction, pv = P_parent[v]
            if out[pv] is None:
                continue
            step = (
                labels.forward(ei) if direction == 1 else labels.backward(ei)
            )
            out[v] = target.mul_key(out[pv], step)
            progressed.append(v)
        if not progressed:
            raise ValidationError("broken spanning tree")
        remaining = [v for v in remaining if out[v] is None]
        order.extend(progressed)
    return out


def phi_from_labeling(
    X: MetricComplex, labels: EdgeLabels, basepoint: int | None = None
) -> PiOneData:
    """Build PiOneData whose phi is the holonomy of the given edge labeling.

    The image of a chord is the label product along its based loop
    (tree path in, chord, tree path out); relators are then re-verified.
    """
    P = presentation(X, basepoint)
    target = labels.target
    to_vertex = _label_to_vertex(X, P.parent, P.basepoint, labels)
    images = []
    for c in P.chords:
        e = X.edges[c]
        key = target.mul_key(
            target.mul_key(to_vertex[e.u], labels.forward(c)),
            target.inv_key(to_vertex[e.v]),
        )
        images.append(GroupElement(target, key))
    return attach_phi(P, target, images)


# ---------------------------------------------------------------------------
# phi text format


def parse_phi(X: MetricComplex, text: str) -> PiOneData:
    """Parse a phi file: a ``target`` line then ``map <edge-id> <literal>``."""
    target = None
    assignments: list[tuple[int, str, int]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split(None, 1)
        if parts[0] == "target":
            if len(parts) != 2:
                raise ParseError("target line needs a group spec", line=lineno)
            target = parse_group(parts[1])
        elif parts[0] == "map":
            body = parts[1].split(None, 1)
            if len(body) != 2:
                raise ParseError("map line needs an edge id and a literal", line=lineno)
            try:
                eid = int(body[0])
            except ValueError:
                raise ParseError(f"bad edge id {body[0]!r}", line=lineno) from None
            assignments.append((eid, body[1], lineno))
        else:
            raise ParseError(f"unknown directive {parts[0]!r}", line=lineno)
    if target is None:
        raise ParseError("phi file has no target line")
    P = presentation(X)
    images: dict[int, GroupElement] = {}
    for eid, literal, lineno in assignments:
        try:
            images[eid] = target.element_from_literal(literal)
        except ParseError as exc:
            raise ParseError(str(exc), line=lineno) from None
    return attach_phi(P, target, images)


def load_phi(X: MetricComplex, path) -> PiOneData:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_phi(X, fh.read())


def phi_to_text(P: PiOneData) -> str:
    if not P.has_phi():
        raise ValidationError("no homomorphism attached")
    lines = [f"target {P.target.describe()}"]
    for c, img in zip(P.chords, P.images):
        if not img.is_identity():
            lines.append(f"map {P.complex.edges[c].id} {img}")
    return "\n".join(lines) + "\n"
