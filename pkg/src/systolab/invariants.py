"""Metric invariants of a complex with a homomorphism attached: volume,
systole, stable systole, volume entropy, and the systolic ratio.

The systole is the length of the shortest edge loop whose deck label is
nontrivial.  It is found by running a cover Dijkstra from every vertex's
identity lift until a state (same vertex, nontrivial label) is settled; the
minimum over basepoints is exact for edge-path loops because every loop
passes through a vertex.  When the deck group is finite the search runs on
the materialized cover via sparse shortest paths instead.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra as sparse_dijkstra

from .complexes import EdgeLabels, MetricComplex
from .covers import CoverGeometry, GeometricNorm, finite_cover_or_none
from .errors import BudgetExceeded, NotEssential, ValidationError
from .groups import FreeAbelianGroup, GroupElement
from .growth import EntropyEstimate, _estimate_from_counts, sample_radii
from .norms import Budget, GeneratorNorm
from .presentation import PiOneData


@dataclass
class SystoleResult:
    """Shortest noncontractible edge loop under phi."""

    length: float  # +inf when no nontrivial loop exists
    witness_edges: tuple[int, ...]  # edge ids along the loop
    witness_label: GroupElement | None
    basepoint: int  # vertex id
    saturated: bool = False


@dataclass
class StableSystoleResult:
    """Per-multiple loop lengths and the stable-norm bracket for one class.

    The loop through the best basepoint can be repeated, and loops at
    different basepoints concatenate through a connecting path of length at
    most the 1-skeleton diameter D, so (l(ka) + 2D)/k is subadditive in k and
    brackets the limit from above; the lower bracket subtracts the same
    correction.
    """

    homology_class: tuple[int, ...]
    per_k: tuple[tuple[int, float, float], ...]  # (k, l(ka), l(ka)/k)
    bracket: tuple[float, float]
    diameter: float


def volume(X: MetricComplex) -> float:
    """Total edge length in dimension 1, total flat triangle area in
    dimension 2.  Mixed-dimension complexes are rejected."""
    if X.dimension == 2:
        if not X.is_pure():
            raise ValidationError(
                "complex mixes dimensions: some edges bound no triangle"
            )
        return sum(X.triangle_area(t) for t in X.triangles)
    if X.dimension == 1:
        return X.total_edge_length()
    raise ValidationError("zero-dimensional complex has no volume")


def _require_phi(P: PiOneData) -> None:
    if not P.has_phi():
        raise ValidationError("no homomorphism attached")


def _systole_finite(fc, X, radius_budget):
    deck = fc.deck_keys
    n_deck = len(deck)
    identity_ix = fc.deck_index[fc.geometry.target.identity_key()]
    nv = len(X.vertex_ids)
    sources = [fc.state_index(v, identity_ix) for v in range(nv)]
    dist, preds = fc.shortest_from(sources, return_predecessors=True)
    best = (math.inf, -1, -1)  # (length, vertex, deck index)
    for v in range(nv):
        row = dist[v]
        for gi in range(n_deck):
            if gi == identity_ix:
                continue
            d = row[fc.state_index(v, gi)]
            if d < best[0] - 1e-15 or (
                abs(d - best[0]) <= 1e-15 and (v, gi) < (best[1], best[2])
            ):
                best = (d, v, gi)
    length, v, gi = best
    if not math.isfinite(length):
        return SystoleResult(
            length=math.inf,
            witness_edges=(),
            witness_label=None,
            basepoint=X.vertex_ids[X.basepoint],
            saturated=True,
        )
    end_state = fc.state_index(v, gi)
    path = fc.path_edges(preds[v], end_state)
    label = GroupElement(fc.geometry.target, deck[gi])
    return SystoleResult(
        length=float(length),
        witness_edges=tuple(X.edges[ei].id for ei in path),
        witness_label=label,
        basepoint=X.vertex_ids[v],
    )


def _systole_lazy(geometry, X, radius_budget, node_budget, threads):
    target = geometry.target
    idk = target.identity_key()
    nv = len(X.vertex_ids)
    budget = Budget(node_budget)

    def search_from(v, bound):
        exp = geometry.expansion([(v, idk)], budget=budget, track_parents=True)

        def stop(state, d):
            return state[0] == v and state[1] != idk

        try:
            hit = exp.run(radius=min(bound, radius_budget), stop=stop)
        except BudgetExceeded as exc:
            return None, exc.lower_bound, exp, False
        if hit is not None:
            return hit, exp.dist[hit], exp, True
        # frontier exceeded the bound or was exhausted: no loop below bound
        return None, (math.inf if exp.exhausted else min(bound, radius_budget)), exp, True

    results = []
    if threads > 1:
        # each source is searched independently so results match the
        # sequential run exactly
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(
                pool.map(lambda v: search_from(v, radius_budget), range(nv))
            )
    else:
        bound = radius_budget
        for v in range(nv):
            res = search_from(v, bound)
            results.append(res)
            if res[0] is not None:
                bound = min(bound, res[1])

    best = None  # (length, vertex, hit, expansion)
    proven = math.inf
    conclusive = True
    for v, (hit, value, exp, ok) in enumerate(results):
        if hit is not None:
            if best is None or value < best[0] - 1e-15:
                best = (value, v, hit, exp)
        else:
            proven = min(proven, value)
            conclusive = conclusive and ok
    if best is None:
        if conclusive and math.isinf(proven):
            return SystoleResult(
                length=math.inf,
                witness_edges=(),
                witness_label=None,
                basepoint=X.vertex_ids[X.basepoint],
                saturated=True,
            )
        raise BudgetExceeded(
            "systole search inconclusive: no nontrivial loop found before the "
            "budget ran out",
            lower_bound=proven,
            visited=budget.used,
        )
    length, v, hit, exp = best
    if not conclusive and proven < length:
        raise BudgetExceeded(
            "systole search inconclusive: a shorter loop may exist below the "
            "unexplored radius",
            lower_bound=proven,
            visited=budget.used,
        )
    path = exp.path_edges(hit)
    return SystoleResult(
        length=length,
        witness_edges=tuple(X.edges[ei].id for ei in path),
        witness_label=GroupElement(geometry.target, hit[1]),
        basepoint=X.vertex_ids[v],
    )


def phi_systole(
    X: MetricComplex,
    P: PiOneData,
    radius_budget: float = math.inf,
    node_budget: int | None = None,
    threads: int = 1,
    force_lazy: bool = False,
) -> SystoleResult:
    """Length of the shortest edge loop with nontrivial image under phi.

    Returns length +inf (saturated) when the cover is finite, fully explored,
    and contains no nontrivial loop; raises BudgetExceeded with the proven
    lower bound when the budget stops the search first.
    """
    _require_phi(P)
    geometry = CoverGeometry(X, P.labeling())
    if not force_lazy:
        fc = finite_cover_or_none(geometry)
        if fc is not None:
            return _systole_finite(fc, X, radius_budget)
    return _systole_lazy(geometry, X, radius_budget, node_budget, threads)


def graph_diameter(X: MetricComplex) -> float:
    """Diameter of the 1-skeleton (weighted graph metric)."""
    nv = len(X.vertex_ids)
    if nv == 1:
        return 0.0
    rows, cols, vals = [], [], []
    for e in X.edges:
        if e.u == e.v:
            continue
        rows += [e.u, e.v]
        cols += [e.v, e.u]
        vals += [e.length, e.length]
    best: dict[tuple[int, int], float] = {}
    for r, c, w in zip(rows, cols, vals):
        if (r, c) not in best or w < best[(r, c)]:
            best[(r, c)] = w
    rr = np.array([rc[0] for rc in best], dtype=np.int64)
    cc = np.array([rc[1] for rc in best], dtype=np.int64)
    ww = np.array(list(best.values()), dtype=np.float64)
    m = csr_matrix((ww, (rr, cc)), shape=(nv, nv))
    dist = sparse_dijkstra(m, directed=True)
    return float(dist.max())


def _h_labeling(P: PiOneData):
    """Relabel edges by the torsion-free abelianized images of phi."""
    _require_phi(P)
    b = P.target.abelianized_rank()
    if b == 0:
        raise ValidationError(
            "target group has no nontrivial torsion-free abelianization: "
            "no nontrivial classes"
        )
    H = FreeAbelianGroup(b)
    base_labels = P.labeling()
    keys = tuple(
        P.target.abelianized_image_key(k) for k in base_labels.keys
    )
    return EdgeLabels(H, keys), H


def stable_systole(
    X: MetricComplex,
    P: PiOneData,
    a,
    k_max: int,
    node_budget: int | None = None,
    radius_budget: float = math.inf,
) -> StableSystoleResult:
    """Sampled stable norm of a homology class.

    For k = 1..k_max the shortest loop (any basepoint) whose abelianized
    label equals k*a is found on the integer-vector labeled cover; the
    bracket combines the samples with the 2D connecting correction.
    """
    labels, H = _h_labeling(P)
    a = tuple(int(x) for x in a)
    if len(a) != H.rank or all(x == 0 for x in a):
        raise ValidationError("class must be a nonzero integer vector of the right rank")
    geometry = CoverGeometry(X, labels)
    D = graph_diameter(X)
    nv = len(X.vertex_ids)
    idk = H.identity_key()
    budget = Budget(node_budget)
    per_k = []
    bound = radius_budget
    ell_1 = None
    for k in range(1, k_max + 1):
        target_key = tuple(k * x for x in a)
        if ell_1 is not None:
            # k copies of the best single loop; slack absorbs float roundoff
            bound = min(radius_budget, k * ell_1 * (1.0 + 1e-9) + 1e-12)
        best = math.inf
        for v in range(nv):
            exp = geometry.expansion([(v, idk)], budget=budget)
            goal = (v, target_key)
            local_bound = min(bound, best)
            hit = exp.run(radius=local_bound, stop=lambda s, d: s == goal)
            if hit is not None:
                best = min(best, exp.dist[hit])
        if not math.isfinite(best):
            raise BudgetExceeded(
                f"no loop in class {k}*{a} within radius {bound}",
                lower_bound=bound,
                visited=budget.used,
            )
        if k == 1:
            ell_1 = best
        per_k.append((k, best, best / k))
    lower = max(max((l - 2 * D) / k for k, l, _ in per_k), 0.0)
    upper = min((l + 2 * D) / k for k, l, _ in per_k)
    return StableSystoleResult(
        homology_class=a,
        per_k=tuple(per_k),
        bracket=(lower, upper),
        diameter=D,
    )


def volume_entropy(
    X: MetricComplex,
    P: PiOneData,
    r_max: float,
    samples: int = 6,
    radii=None,
    node_budget: int | None = None,
    gen_norm_radius: float | None = None,
) -> EntropyEstimate:
    """Entropy of the induced norm on the deck group from one cover expansion.

    Counts beta(r) = #{deck labels at distance <= r from the basepoint lift}
    at the sampled radii and estimates the growth rate exactly as the group
    pipeline does, so the two sides can be cross-validated.

    When ``gen_norm_radius`` R is given, the finite set S of deck labels with
    induced norm at most R + 2D generates the deck group; the entropy of the
    associated generator norm, inflated by the sandwich factor (R+2D)/R, is
    reported in the diagnostics as an upper estimate.
    """
    _require_phi(P)
    if radii is None:
        radii = sample_radii(r_max, samples)
    else:
        radii = tuple(sorted(float(r) for r in radii))
    labels = P.labeling()
    geometry = CoverGeometry(X, labels)
    base = geometry.start()[0]
    D = graph_diameter(X)
    expand_to = radii[-1]
    if gen_norm_radius is not None:
        expand_to = max(expand_to, gen_norm_radius + 2 * D)
    exp = geometry.expansion([geometry.start()], budget=Budget(node_budget))
    exhausted_flag = True
    try:
        exp.run(radius=expand_to)
    except BudgetExceeded:
        exhausted_flag = False
    fiber = sorted(
        (d, key) for (v, key), d in exp.dist.items() if v == base
    )
    counts = []
    i = 0
    total = 0
    for r in radii:
        while i < len(fiber) and fiber[i][0] <= r:
            total += 1
            i += 1
        counts.append(total)
    extra = {
        "complex_vertices": len(X.vertex_ids),
        "norm": "geometric",
        "exhaustive": exhausted_flag and exp.radius_reached >= radii[-1],
        "exhaustive_up_to": exp.radius_reached,
        "deck_saturated": exp.exhausted,
    }
    if gen_norm_radius is not None and extra["exhaustive"]:
        R = float(gen_norm_radius)
        cut = R + 2 * D
        gens = [
            GroupElement(labels.target, key)
            for d, key in fiber
            if 0 < d <= cut
        ]
        if gens:
            gnorm = GeneratorNorm(labels.target, _FiberNorm(labels.target, fiber), gens)
            from .growth import entropy_estimate as _group_entropy

            gen_est = _group_entropy(
                labels.target, gnorm, r_max, samples=samples,
                budget=Budget(node_budget),
            )
            factor = cut / R
            extra["generator_set_radius"] = cut
            extra["generator_set_size"] = gnorm.generating_set_size()
            extra["sandwich_factor"] = factor
            extra["generator_norm_estimate"] = gen_est.point_estimate
            extra["generator_norm_upper_estimate"] = factor * gen_est.point_estimate
    return _estimate_from_counts(radii, counts, 0, False, extra=extra)


class _FiberNorm:
    """Norm lookup backed by precomputed fiber distances (internal)."""

    def __init__(self, group, fiber):
        self.group = group
        self._dist = {key: d for d, key in fiber}

    def value(self, g, budget=None):
        try:
            return self._dist[g.key]
        except KeyError:
            raise BudgetExceeded(
                "fiber distance not expanded this far", lower_bound=math.inf
            ) from None

    def describe(self):
        return "geometric"


def systolic_ratio(
    X: MetricComplex,
    P: PiOneData,
    radius_budget: float = math.inf,
    node_budget: int | None = None,
) -> float:
    """Volume divided by the n-th power of the systole for this one metric."""
    sys = phi_systole(X, P, radius_budget=radius_budget, node_budget=node_budget)
    if not math.isfinite(sys.length):
        raise NotEssential(
            "every loop has trivial image under phi: the systolic ratio is "
            "undefined at this metric"
        )
    n = X.dimension
    return volume(X) / sys.length**n
