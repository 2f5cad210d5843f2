"""Independent brute-force oracles for cross-checking the library.

Everything here is deliberately naive: breadth-first products for ball
counts, explicit walk enumeration for loops, direct recursion for
alternating words.  None of it shares code paths with the package.
"""
from __future__ import annotations

import itertools
import math
from functools import lru_cache


def brute_ball_counts(identity_key, mul_key, moves, r):
    """Norm ball by repeated relaxation: moves is [(key, weight)].

    Returns {key: cost} for all elements of cost <= r, found by breadth-first
    products with per-key minima.
    """
    best = {identity_key: 0.0}
    frontier = {identity_key: 0.0}
    while frontier:
        nxt = {}
        for key, cost in frontier.items():
            for skey, w in moves:
                nk = mul_key(key, skey)
                nc = cost + w
                if nc <= r + 1e-12 and nc < best.get(nk, math.inf) - 1e-12:
                    best[nk] = nc
                    nxt[nk] = nc
        frontier = nxt
    return best


def free_group_ball_size(rank, r):
    """Closed form: reduced words of length <= r over `rank` generators."""
    if rank == 0:
        return 1
    q = 2 * rank - 1
    total = 1
    layer = 2 * rank
    for _ in range(int(r)):
        total += layer
        layer *= q
    return total


def lattice_ball_size(dim, r):
    """Integer points with l1 norm <= r, by direct enumeration."""
    r = int(r)
    count = 0
    for point in itertools.product(range(-r, r + 1), repeat=dim):
        if sum(abs(x) for x in point) <= r:
            count += 1
    return count


def alternating_count(rho, r):
    """Number of alternating words in Z * Z with cost sum|a_i| + rho*sum|b_j|
    at most r, counted by direct dynamic programming over integer budgets.

    Requires integer rho and integer r.
    """
    rho = int(rho)
    r = int(r)

    @lru_cache(maxsize=None)
    def tails(budget, last):
        # words (possibly empty) whose first letter is not from factor `last`
        total = 1
        for factor, unit in ((0, 1), (1, rho)):
            if factor == last:
                continue
            k = unit
            while k <= budget:
                # letter of absolute size k/unit, two signs
                total += 2 * tails(budget - k, factor)
                k += unit
        return total

    return tails(r, None if r >= 0 else None)


def reduce_free_product(letters, factor_mul, factor_id):
    """Concatenate-and-reduce oracle for free-product normal forms.

    letters: list of (factor, key) pairs, possibly unreduced.
    """
    out = []
    for fi, key in letters:
        if key == factor_id[fi]:
            continue
        if out and out[-1][0] == fi:
            merged = factor_mul[fi](out[-1][1], key)
            if merged == factor_id[fi]:
                out.pop()
            else:
                out[-1] = (fi, merged)
        else:
            out.append((fi, key))
    return tuple(out)


def brute_min_factorization(identity, target, gens_with_weights, depth):
    """Cheapest product of at most `depth` generators equal to target.

    gens_with_weights: [(element, weight)]; elements support * and ==.
    """
    best = math.inf if target != identity else 0.0
    layer = {identity: 0.0}
    for _ in range(depth):
        nxt = {}
        for elt, cost in layer.items():
            for g, w in gens_with_weights:
                ne = elt * g
                nc = cost + w
                if nc < nxt.get(ne, math.inf):
                    nxt[ne] = nc
        for ne, nc in nxt.items():
            if ne == target:
                best = min(best, nc)
        merged = dict(layer)
        for k, v in nxt.items():
            if v < merged.get(k, math.inf):
                merged[k] = v
        layer = merged
    return best


def enumerate_edge_loops(adjacency, start, max_edges):
    """All closed edge walks from `start` with at most max_edges edges.

    adjacency: per-vertex list of (neighbor, length, edge_index, direction).
    Yields (total_length, [(edge_index, direction), ...]).
    """
    stack = [(start, 0.0, [])]
    while stack:
        v, cost, path = stack.pop()
        if path and v == start:
            yield cost, path
        if len(path) >= max_edges:
            continue
        for (w, length, ei, direction) in adjacency[v]:
            stack.append((w, cost + length, path + [(ei, direction)]))


def smith_normal_form_rank_and_ones(rows):
    """(rank, all invariant factors are 1?) of an integer matrix via sympy."""
    from sympy import Matrix
    from sympy.matrices.normalforms import smith_normal_form

    m = Matrix(rows)
    if m.rows == 0 or m.cols == 0:
        return 0, True
    snf = smith_normal_form(m)
    diag = [snf[i, i] for i in range(min(snf.rows, snf.cols))]
    nonzero = [abs(d) for d in diag if d != 0]
    return len(nonzero), all(d == 1 for d in nonzero)


def tree_ball_states(degree, radius):
    """Vertices within integer radius in the infinite degree-regular tree."""
    total = 1
    layer = degree
    for _ in range(int(radius)):
        total += layer
        layer *= degree - 1
    return total
