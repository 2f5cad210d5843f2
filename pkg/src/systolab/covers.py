"""Galois covers of labeled complexes, expanded lazily by Dijkstra.

A cover state is a pair (vertex, deck label); crossing a directed edge
multiplies the label on the right by the edge's group label.  Expanding
states in distance order from a basepoint lift enumerates the cover ball
exactly: the frontier is monotone, so every state settled at distance d is
final.  Distances from the basepoint lift to its deck translates define the
induced norm on the deck group, which ties the geometry of the cover to the
growth machinery on groups.

When the deck group is finite the whole cover is a finite weighted graph;
``FiniteCover`` materializes it as a sparse matrix so that multi-source
shortest paths run at C speed (used heavily by the metric optimizer).
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra as sparse_dijkstra

from .complexes import EdgeLabels, MetricComplex
from .errors import BudgetExceeded, ValidationError
from .groups import GroupElement
from .norms import Budget, Norm, _as_budget

DEFAULT_GROUP_CLOSURE_CAP = 4096


@dataclass
class CoverFrontier:
    """Snapshot of a cover expansion.

    visited maps (vertex, deck key) to its exact distance; radius_reached is
    the largest distance proven complete; saturated means the frontier was
    exhausted (the reachable cover is finite and fully explored).
    """

    visited: dict
    radius_reached: float
    saturated: bool
    budget_exhausted: bool = False


class CoverGeometry:
    """Adjacency structure of the cover defined by an edge labeling."""

    def __init__(self, X: MetricComplex, labels: EdgeLabels):
        if len(labels.keys) != len(X.edges):
            raise ValidationError("labeling does not match the complex")
        self.complex = X
        self.target = labels.target
        self.labels = labels
        moves = [[] for _ in X.vertex_ids]
        for i, e in enumerate(X.edges):
            fwd = labels.forward(i)
            bwd = labels.backward(i)
            moves[e.u].append((e.v, e.length, fwd, i))
            moves[e.v].append((e.u, e.length, bwd, i))
        self.moves = tuple(tuple(m) for m in moves)

    def start(self, vertex: int | None = None):
        v = self.complex.basepoint if vertex is None else vertex
        return (v, self.target.identity_key())

    def expansion(self, starts, budget=None, track_parents=False):
        return CoverExpansion(self, starts, budget=budget, track_parents=track_parents)


class CoverExpansion:
    """Resumable Dijkstra over cover states.

    ``run`` settles states until a stop condition fires and may be called
    again to continue; settled distances are exact and never revisited.
    """

    def __init__(self, geometry: CoverGeometry, starts, budget=None, track_parents=False):
        self.geometry = geometry
        self.budget = _as_budget(budget)
        self.dist: dict = {}
        self.parent: dict | None = {} if track_parents else None
        self._tentative: dict = {}
        self._heap: list = []
        self.exhausted = False
        self.radius_reached = 0.0
        for s in starts:
            self._tentative[s] = 0.0
            heapq.heappush(self._heap, (0.0, s))
            if self.parent is not None:
                self.parent[s] = None

    def frontier_min(self) -> float:
        while self._heap:
            d, state = self._heap[0]
            if d > self._tentative.get(state, math.inf) or state in self.dist:
                heapq.heappop(self._heap)
                continue
            return d
        return math.inf

    def run(self, radius=math.inf, stop=None, max_radius_exclusive=None):
        """Settle states in distance order.

        Stops (returning the state) when ``stop(state, d)`` is true for a
        settled state; stops returning None when the frontier exceeds
        ``radius`` (all states with distance <= radius are then settled) or
        is exhausted.  Raises BudgetExceeded if the node budget runs out.
        """
        while self._heap:
            d, state = heapq.heappop(self._heap)
            if state in self.dist or d > self._tentative.get(state, math.inf):
                continue
            if d > radius:
                # push back; caller may resume with a larger radius
                heapq.heappush(self._heap, (d, state))
                self.radius_reached = max(self.radius_reached, radius)
                return None
            try:
                self.budget.tick(lower_bound=d)
            except BudgetExceeded:
                heapq.heappush(self._heap, (d, state))
                self.radius_reached = max(self.radius_reached, d)
                raise
            self.dist[state] = d
            self.radius_reached = max(self.radius_reached, d)
            v, key = state
            target = self.geometry.target
            # expand before honoring `stop`: a settled state is never revisited,
            # so skipping its neighbors would strand them on resumed runs
            for (w, length, label, edge_index) in self.geometry.moves[v]:
                nstate = (w, target.mul_key(key, label))
                if nstate in self.dist:
                    continue
                nd = d + length
                if max_radius_exclusive is not None and nd > max_radius_exclusive:
                    continue
                if nd < self._tentative.get(nstate, math.inf):
                    self._tentative[nstate] = nd
                    heapq.heappush(self._heap, (nd, nstate))
                    if self.parent is not None:
                        self.parent[nstate] = (state, edge_index)
            if stop is not None and stop(state, d):
                return state
        # the frontier emptied: every reachable state is settled
        self.exhausted = True
        self.radius_reached = math.inf
        return None

    def path_edges(self, state) -> tuple[int, ...]:
        """Edge indices of the shortest path into ``state`` (parents on)."""
        if self.parent is None:
            raise ValidationError("expansion was created without parent tracking")
        edges = []
        cur = state
        while self.parent[cur] is not None:
            cur, ei = self.parent[cur]
            edges.append(ei)
        return tuple(reversed(edges))


def expand_cover(
    X: MetricComplex,
    P,
    radius_budget: float,
    node_budget: int | None = None,
) -> CoverFrontier:
    """Expand the cover around the basepoint lift out to radius_budget.

    Complete for every cover point within the radius; if the node budget is
    hit first the partial frontier is returned flagged, with radius_reached
    marking how far completeness is still guaranteed.
    """
    if not radius_budget > 0:
        raise ValidationError("radius budget must be positive")
    geometry = CoverGeometry(X, P.labeling())
    exp = geometry.expansion([geometry.start()], budget=Budget(node_budget))
    try:
        exp.run(radius=radius_budget)
        return CoverFrontier(
            visited=dict(exp.dist),
            radius_reached=exp.radius_reached,
            saturated=exp.exhausted,
        )
    except BudgetExceeded as exc:
        return CoverFrontier(
            visited=dict(exp.dist),
            radius_reached=exc.lower_bound,
            saturated=False,
            budget_exhausted=True,
        )


class GeometricNorm(Norm):
    """Induced norm on the deck group: distance from the basepoint lift to
    its translate, measured along edge paths in the cover."""

    def __init__(self, X: MetricComplex, labels: EdgeLabels, budget_limit=None):
        super().__init__(labels.target)
        self.geometry = CoverGeometry(X, labels)
        self._expansion = self.geometry.expansion(
            [self.geometry.start()], budget=Budget(budget_limit)
        )
        self._base = self.geometry.start()[0]

    def describe(self):
        return "geometric"

    def value(self, g: GroupElement, budget=None) -> float:
        self.group._check(g)
        state = (self._base, g.key)
        if state in self._expansion.dist:
            return self._expansion.dist[state]
        hit = self._expansion.run(stop=lambda s, d: s == state)
        if hit is not None:
            return self._expansion.dist[state]
        raise BudgetExceeded(
            "deck transformation unreachable in the cover",
            lower_bound=math.inf,
        )

    def iter_ball(self, r_max, budget=None):
        exp = self._expansion
        try:
            exp.run(radius=r_max)
        except BudgetExceeded:
            # report what is proven, then signal the shortfall
            fiber = sorted(
                (d, key)
                for (v, key), d in exp.dist.items()
                if v == self._base and d <= exp.radius_reached
            )
            def partial():
                for d, key in fiber:
                    yield key, d
                raise BudgetExceeded(
                    "cover expansion budget exhausted",
                    lower_bound=exp.radius_reached,
                    visited=exp.budget.used,
                )
            return partial()
        fiber = sorted(
            (d, key) for (v, key), d in exp.dist.items() if v == self._base and d <= r_max
        )
        return ((key, d) for d, key in fiber)


# ---------------------------------------------------------------------------
# finite covers as sparse graphs


def enumerate_deck_group(geometry: CoverGeometry, cap: int = DEFAULT_GROUP_CLOSURE_CAP):
    """All deck labels generated by the edge labels, or None when the closure
    exceeds ``cap`` (the deck group is then treated as infinite)."""
    target = geometry.target
    gens = set()
    for i in range(len(geometry.complex.edges)):
        gens.add(geometry.labels.forward(i))
        gens.add(geometry.labels.backward(i))
    gens.discard(target.identity_key())
    seen = {target.identity_key()}
    frontier = [target.identity_key()]
    while frontier:
        nxt = []
        for key in frontier:
            for g in gens:
                prod = target.mul_key(key, g)
                if prod not in seen:
                    seen.add(prod)
                    if len(seen) > cap:
                        return None
                    nxt.append(prod)
        frontier = nxt
    return sorted(seen)


class FiniteCover:
    """Materialized cover graph for a finite deck group."""

    def __init__(self, geometry: CoverGeometry, deck_keys):
        self.geometry = geometry
        self.deck_keys = tuple(deck_keys)
        self.deck_index = {k: i for i, k in enumerate(self.deck_keys)}
        nv = len(geometry.complex.vertex_ids)
        self.n_states = nv * len(self.deck_keys)
        rows, cols, lens, eids = [], [], [], []
        target = geometry.target
        for gi, gkey in enumerate(self.deck_keys):
            for v, moves in enumerate(geometry.moves):
                src = self.state_index(v, gi)
                for (w, length, label, edge_index) in moves:
                    ngi = self.deck_index[target.mul_key(gkey, label)]
                    dst = self.state_index(w, ngi)
                    if dst == src:
                        continue
                    rows.append(src)
                    cols.append(dst)
                    lens.append(length)
                    eids.append(edge_index)
        # collapse parallel cover edges to the shortest one (deterministic
        # tie-break by edge index); scipy would otherwise sum duplicates
        best: dict[tuple[int, int], tuple[float, int]] = {}
        for r, c, l, ei in zip(rows, cols, lens, eids):
            cur = best.get((r, c))
            if cur is None or (l, ei) < cur:
                best[(r, c)] = (l, ei)
        self.edge_of_pair = {rc: ei for rc, (l, ei) in best.items()}
        rr = np.fromiter((rc[0] for rc in best), dtype=np.int64, count=len(best))
        cc = np.fromiter((rc[1] for rc in best), dtype=np.int64, count=len(best))
        ww = np.fromiter((lw[0] for lw in best.values()), dtype=np.float64, count=len(best))
        self.matrix = csr_matrix((ww, (rr, cc)), shape=(self.n_states, self.n_states))

    def state_index(self, vertex: int, deck_i: int) -> int:
        return vertex * len(self.deck_keys) + deck_i

    def shortest_from(self, sources, return_predecessors=False):
        return sparse_dijkstra(
            self.matrix,
            directed=True,
            indices=sources,
            return_predecessors=return_predecessors,
        )

    def path_edges(self, predecessors_row, end_state: int) -> tuple[int, ...]:
        edges = []
        cur = end_state
        while True:
            prev = int(predecessors_row[cur])
            if prev < 0:
                break
            edges.append(self.edge_of_pair[(prev, cur)])
            cur = prev
        return tuple(reversed(edges))


def finite_cover_or_none(geometry: CoverGeometry, cap=DEFAULT_GROUP_CLOSURE_CAP,
                         max_states=500_000):
    deck = enumerate_deck_group(geometry, cap=cap)
    if deck is None:
        return None
    if len(deck) * len(geometry.complex.vertex_ids) > max_states:
        return None
    return FiniteCover(geometry, deck)
