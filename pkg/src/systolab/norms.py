"""Norms (length functions) on finitely generated groups.

A norm vanishes exactly at the identity, is symmetric under inversion, and is
subadditive.  Word norms and generator norms are evaluated by weighted
Dijkstra search on the lazily expanded Cayley graph, keyed by normal forms
and pruned at the current best; free-product norms are read directly off the
alternating normal form.

Ball enumeration (`iter_ball`) yields ``(key, cost)`` pairs in nondecreasing
cost order with each element appearing exactly once, which makes growth
counts at any radius below the enumeration horizon exact.
"""
from __future__ import annotations

import heapq
import math
from typing import Iterator

from .errors import BudgetExceeded, GroupMismatch, ParseError, ValidationError
from .groups import FreeProductGroup, Group, GroupElement, TrivialGroup

DEFAULT_BUDGET = 10_000_000


class Budget:
    """Shared counter of settled search states.

    Raises BudgetExceeded once more than ``limit`` states have been settled;
    the exception carries the radius proven complete so far.
    """

    __slots__ = ("limit", "used")

    def __init__(self, limit: int | None = None):
        self.limit = DEFAULT_BUDGET if limit is None else int(limit)
        self.used = 0

    def tick(self, lower_bound: float = 0.0) -> None:
        self.used += 1
        if self.used > self.limit:
            raise BudgetExceeded(
                f"search budget of {self.limit} states exhausted",
                lower_bound=lower_bound,
                visited=self.used,
            )


def _as_budget(budget) -> Budget:
    if budget is None:
        return Budget()
    if isinstance(budget, Budget):
        return budget
    return Budget(budget)


def _symmetric_closure(group: Group, gens) -> list[GroupElement]:
    idk = group.identity_key()
    seen = {}
    for g in gens:
        group._check(g)
        if g.key == idk:
            raise ValidationError("generating set must not contain the identity")
        seen.setdefault(g.key, g)
        inv = ~g
        seen.setdefault(inv.key, inv)
    return [seen[k] for k in sorted(seen)]


def _dijkstra_to(group: Group, pairs, target_key, budget: Budget) -> float:
    """Shortest weighted factorization cost from the identity to target_key."""
    idk = group.identity_key()
    if target_key == idk:
        return 0.0
    dist = {idk: 0.0}
    heap: list[tuple[float, object]] = [(0.0, idk)]
    best = math.inf
    while heap:
        d, key = heapq.heappop(heap)
        if d > dist.get(key, math.inf):
            continue
        if key == target_key:
            return d
        budget.tick(lower_bound=d)
        for skey, w in pairs:
            nk = group.mul_key(key, skey)
            nd = d + w
            if nd >= best:
                continue
            if nd < dist.get(nk, math.inf):
                dist[nk] = nd
                if nk == target_key:
                    best = nd
                heapq.heappush(heap, (nd, nk))
    if math.isfinite(best):
        return best
    raise BudgetExceeded(
        "element is not generated by the given set",
        lower_bound=math.inf,
        visited=budget.used,
    )


def _iter_cayley(group: Group, pairs, r_max: float, budget: Budget) -> Iterator:
    """Enumerate the ball of radius r_max in nondecreasing cost order.

    ``pairs`` is a list of (generator key, weight).  Ties are broken by the
    lexicographic order of normal-form keys, so the sequence is deterministic.
    """
    idk = group.identity_key()
    dist = {idk: 0.0}
    heap: list[tuple[float, object]] = [(0.0, idk)]
    while heap:
        d, key = heapq.heappop(heap)
        if d > dist.get(key, math.inf):
            continue
        budget.tick(lower_bound=d)
        yield key, d
        for skey, w in pairs:
            nk = group.mul_key(key, skey)
            nd = d + w
            if nd <= r_max and nd < dist.get(nk, math.inf):
                dist[nk] = nd
                heapq.heappush(heap, (nd, nk))


class _MemoStream:
    """Random access into a cost-ordered enumeration, cached as consumed."""

    __slots__ = ("_iter", "_cache", "_done")

    def __init__(self, iterator):
        self._iter = iterator
        self._cache: list = []
        self._done = False

    def get(self, i: int):
        while not self._done and len(self._cache) <= i:
            try:
                self._cache.append(next(self._iter))
            except StopIteration:
                self._done = True
        return self._cache[i] if i < len(self._cache) else None


class Norm:
    """Base class for norms on a group."""

    def __init__(self, group: Group):
        self.group = group

    def value(self, g: GroupElement, budget=None) -> float:
        raise NotImplementedError

    def describe(self) -> str:
        raise NotImplementedError

    @property
    def is_generator_norm(self) -> bool:
        return False

    def generating_pairs(self) -> list[tuple[GroupElement, float]] | None:
        """(element, weight) pairs for generator-type norms, else None."""
        return None

    def generating_set_size(self) -> int | None:
        pairs = self.generating_pairs()
        return None if pairs is None else len(pairs)

    def iter_ball(self, r_max: float, budget=None) -> Iterator:
        raise NotImplementedError

    def __repr__(self):
        return f"<norm {self.describe()} on {self.group.describe()}>"


class _CayleyNorm(Norm):
    """Common machinery for word and generator norms."""

    def __init__(self, group: Group, gens):
        super().__init__(group)
        self._gens = _symmetric_closure(group, gens)
        self._pairs = [(g.key, self._weight_of(g)) for g in self._gens]
        for g, (_, w) in zip(self._gens, self._pairs):
            if not (w > 0 and math.isfinite(w)):
                raise ValidationError(
                    f"generator {g} has non-positive weight {w}"
                )

    def _weight_of(self, g: GroupElement) -> float:
        raise NotImplementedError

    @property
    def is_generator_norm(self) -> bool:
        return True

    def generating_pairs(self):
        return [
            (GroupElement(self.group, k), w) for k, w in self._pairs
        ]

    def value(self, g: GroupElement, budget=None) -> float:
        self.group._check(g)
        return _dijkstra_to(self.group, self._pairs, g.key, _as_budget(budget))

    def iter_ball(self, r_max, budget=None):
        return _iter_cayley(self.group, self._pairs, r_max, _as_budget(budget))


class WordNorm(_CayleyNorm):
    """Word length with respect to a finite symmetric generating set.

    The default generating set is the group's standard generators together
    with their inverses.
    """

    def __init__(self, group: Group, gens=None):
        super().__init__(group, group.generators() if gens is None else gens)

    def _weight_of(self, g):
        return 1.0

    def describe(self):
        return "word"


class GeneratorNorm(_CayleyNorm):
    """Cheapest factorization cost over S, weighting each s by a base norm."""

    def __init__(self, group: Group, base: Norm, gens=None):
        if base.group != group:
            raise GroupMismatch("base norm is defined on a different group")
        self.base = base
        super().__init__(group, group.generators() if gens is None else gens)

    def _weight_of(self, g):
        return self.base.value(g)

    def describe(self):
        gens = " ".join(str(g) for g in self._gens)
        return f"genorm ( {self.base.describe()} ) [ {gens} ]"


class FreeProductNorm(Norm):
    """Sum of factor norms over the alternating normal form, the right factor
    scaled by rho.

    When both factor norms are generator norms this is itself a generator
    norm with respect to the union of the two generating sets.
    """

    def __init__(self, group: FreeProductGroup, left: Norm, rho: float, right: Norm):
        if not isinstance(group, FreeProductGroup) or len(group.factors) != 2:
            raise ValidationError(
                "free-product norms require a two-factor free product"
            )
        if left.group != group.factors[0] or right.group != group.factors[1]:
            raise GroupMismatch("factor norms must match the product factors")
        if not rho > 0:
            raise ValidationError("rho must be positive")
        super().__init__(group)
        self.left = left
        self.right = right
        self.rho = float(rho)

    def value(self, g: GroupElement, budget=None) -> float:
        self.group._check(g)
        total = 0.0
        for fi, sub in g.key:
            piece = GroupElement(self.group.factors[fi], sub)
            if fi == 0:
                total += self.left.value(piece, budget)
            else:
                total += self.rho * self.right.value(piece, budget)
        return total

    @property
    def is_generator_norm(self) -> bool:
        return self.left.is_generator_norm and self.right.is_generator_norm

    def generating_pairs(self):
        lp = self.left.generating_pairs()
        rp = self.right.generating_pairs()
        if lp is None or rp is None:
            return None
        out = [(self.group.embed(0, g), w) for g, w in lp]
        out += [(self.group.embed(1, g), self.rho * w) for g, w in rp]
        return out

    def describe(self):
        return (
            f"freeprod ( {self.left.describe()} ) {self.rho:g} "
            f"( {self.right.describe()} )"
        )

    def iter_ball(self, r_max, budget=None):
        budget = _as_budget(budget)
        streams = []
        for norm, scale in ((self.left, 1.0), (self.right, self.rho)):
            factor_r = r_max / scale

            def letters(norm=norm, scale=scale, factor_r=factor_r):
                it = norm.iter_ball(factor_r, budget)
                for key, cost in it:
                    if cost > 0.0 or key != norm.group.identity_key():
                        yield key, scale * cost

            streams.append(_MemoStream(letters()))
        return self._iter_alternating(streams, r_max, budget)

    def _iter_alternating(self, streams, r_max, budget):
        # Each alternating word is pushed exactly once, by its parent
        # (drop the final letter), so no dedup map is needed.
        heap: list[tuple[float, tuple]] = [(0.0, ())]
        while heap:
            cost, word = heapq.heappop(heap)
            budget.tick(lower_bound=cost)
            yield word, cost
            last = word[-1][0] if word else None
            for fi in (0, 1):
                if fi == last:
                    continue
                stream = streams[fi]
                i = 0
                while True:
                    item = stream.get(i)
                    if item is None:
                        break
                    sub, sub_cost = item
                    nc = cost + sub_cost
                    if nc > r_max:
                        break  # stream is cost-sorted
                    heapq.heappush(heap, (nc, word + ((fi, sub),)))
                    i += 1


def eval_norm(norm: Norm, g: GroupElement, budget=None) -> float:
    """Evaluate a norm; the element must belong to the norm's group."""
    norm.group._check(g)
    return norm.value(g, budget=budget)


# ---------------------------------------------------------------------------
# norm specification text format


def _parse_norm_tokens(group: Group, tokens: list[str], pos: int):
    if pos >= len(tokens):
        raise ParseError("unexpected end of norm specification")
    head = tokens[pos]
    if head == "(":
        norm, pos = _parse_norm_tokens(group, tokens, pos + 1)
        if pos >= len(tokens) or tokens[pos] != ")":
            raise ParseError("unbalanced parentheses in norm specification")
        return norm, pos + 1
    if head == "word":
        return WordNorm(group), pos + 1
    if head == "genorm":
        base, pos = _parse_norm_tokens(group, tokens, pos + 1)
        gens = None
        if pos < len(tokens) and tokens[pos] == "[":
            pos += 1
            gens = []
            while pos < len(tokens) and tokens[pos] != "]":
                gens.append(group.element_from_literal(tokens[pos]))
                pos += 1
            if pos >= len(tokens):
                raise ParseError("unterminated generating set")
            pos += 1
        return GeneratorNorm(group, base, gens), pos
    if head == "freeprod":
        if not isinstance(group, FreeProductGroup) or len(group.factors) != 2:
            raise ParseError(
                "freeprod norms need a two-factor free product group"
            )
        left, pos = _parse_norm_tokens(group.factors[0], tokens, pos + 1)
        if pos >= len(tokens):
            raise ParseError("freeprod needs a scale")
        try:
            rho = float(tokens[pos])
        except ValueError:
            raise ParseError(f"bad scale {tokens[pos]!r}") from None
        right, pos = _parse_norm_tokens(group.factors[1], tokens, pos + 1)
        return FreeProductNorm(group, left, rho, right), pos
    raise ParseError(f"unknown norm kind {head!r}")


def parse_norm(group: Group, text: str) -> Norm:
    """Parse a norm specification such as ``word`` or ``freeprod word 2 word``."""
    for ch in "()[]":
        text = text.replace(ch, f" {ch} ")
    tokens = text.split()
    norm, pos = _parse_norm_tokens(group, tokens, 0)
    if pos != len(tokens):
        raise ParseError(f"trailing tokens in norm specification: {tokens[pos:]}")
    return norm
