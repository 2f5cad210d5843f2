"""Growth functions and volume entropy of norms on groups.

The growth function beta(r) counts group elements of norm at most r.  It is
computed by a single monotone ball enumeration, so every count below the
enumeration horizon is exact.  The entropy of a norm is the exponential
growth rate of beta; we estimate it by the slope of log beta over the last
octave of sampled radii, and for generator norms we also report the finite
upper bound min_t (log beta(t) + log #S) / t, which always dominates the
limit.
"""
from __future__ import annotations

import math
from bisect import bisect_left
from dataclasses import dataclass, field

from .errors import BudgetExceeded, ValidationError
from .groups import FreeProductGroup, Group
from .norms import Budget, FreeProductNorm, Norm, _as_budget

DEFAULT_SAMPLES = 6


@dataclass
class GrowthTable:
    """Sampled growth function of a norm."""

    radii: tuple[float, ...]
    counts: tuple[int, ...]
    group: str
    norm: str
    exhaustive_up_to: float

    def count_at(self, r: float) -> int:
        i = bisect_left(self.radii, r)
        if i >= len(self.radii) or self.radii[i] != r:
            raise ValueError(f"radius {r} was not sampled")
        return self.counts[i]


@dataclass
class EntropyEstimate:
    """Entropy brackets and diagnostics for one (group, norm) pair.

    lower_sequence holds (r, log beta(r) / r); point_estimate is the slope of
    log beta over the last sampled octave; upper_bound is the generator-norm
    bound (None when the norm is not a generator norm).
    """

    lower_sequence: tuple[tuple[float, float], ...]
    upper_bound: float | None
    point_estimate: float
    diagnostics: dict = field(default_factory=dict)


@dataclass
class FreeProductLimitRow:
    rho: float
    estimate: EntropyEstimate


@dataclass
class FreeProductLimitResult:
    rows: tuple[FreeProductLimitRow, ...]
    baseline: EntropyEstimate
    r_max: float


def sample_radii(r_max: float, samples: int = DEFAULT_SAMPLES) -> tuple[float, ...]:
    """Geometric radii r_max * 2**(-k), ascending; probes several scales."""
    if not r_max > 0:
        raise ValidationError("r_max must be positive")
    if samples < 2:
        raise ValidationError("need at least two sample radii")
    return tuple(r_max * 2.0 ** (-k) for k in reversed(range(samples)))


def _count_thresholds(stream, radii):
    """Exact counts at each radius from one monotone enumeration.

    Returns (counts, exhaustive, visited, completed_radius).  If the budget
    runs out mid-stream, counts at radii beyond the completed radius are
    lower bounds only and ``exhaustive`` is False.
    """
    bins = [0] * len(radii)
    visited = 0
    exhaustive = True
    completed = radii[-1]
    try:
        for _key, cost in stream:
            visited += 1
            i = bisect_left(radii, cost)
            if i < len(radii):
                bins[i] += 1
    except BudgetExceeded as exc:
        exhaustive = False
        completed = exc.lower_bound
        visited = exc.visited
    counts = []
    total = 0
    for b in bins:
        total += b
        counts.append(total)
    return tuple(counts), exhaustive, visited, completed


def growth_table(
    group: Group,
    norm: Norm,
    r_max: float | None = None,
    radii=None,
    samples: int = DEFAULT_SAMPLES,
    budget=None,
) -> GrowthTable:
    """Exact beta(r) at the given radii (default: geometric up to r_max)."""
    if norm.group != group:
        raise ValidationError("norm is not defined on this group")
    if radii is None:
        radii = sample_radii(r_max, samples)
    else:
        radii = tuple(sorted(float(r) for r in radii))
        if not radii or radii[0] < 0:
            raise ValidationError("radii must be nonnegative")
    stream = norm.iter_ball(radii[-1], budget=_as_budget(budget))
    counts, exhaustive, _visited, completed = _count_thresholds(stream, radii)
    return GrowthTable(
        radii=radii,
        counts=counts,
        group=group.describe(),
        norm=norm.describe(),
        exhaustive_up_to=completed if not exhaustive else radii[-1],
    )


def ball_count(group: Group, norm: Norm, r: float, budget=None) -> int:
    """Exact number of elements with norm at most r.

    Raises BudgetExceeded (carrying the partial count as a lower bound) if
    the enumeration budget runs out first.
    """
    if norm.group != group:
        raise ValidationError("norm is not defined on this group")
    if r < 0:
        raise ValidationError("radius must be nonnegative")
    count = 0
    try:
        for _key, _cost in norm.iter_ball(r, budget=_as_budget(budget)):
            count += 1
    except BudgetExceeded as exc:
        raise BudgetExceeded(
            f"ball enumeration budget exhausted after {count} elements",
            lower_bound=count,
            visited=exc.visited,
        ) from None
    return count


def _octave_point_estimate(radii, counts) -> float:
    """Slope of log beta over the last sampled octave.

    Falls back to log beta(r)/r when only one usable radius exists.
    """
    r1, c1 = radii[-1], counts[-1]
    if len(radii) < 2:
        return math.log(c1) / r1 if r1 > 0 else 0.0
    target = r1 / 2.0
    best = min(
        range(len(radii) - 1),
        key=lambda i: (abs(radii[i] - target), -radii[i]),
    )
    r0, c0 = radii[best], counts[best]
    if r1 <= r0 or c0 < 1:
        return math.log(c1) / r1 if r1 > 0 else 0.0
    return (math.log(c1) - math.log(c0)) / (r1 - r0)


def _estimate_from_counts(
    radii, counts, set_size, is_generator, extra=None
) -> EntropyEstimate:
    lower = tuple(
        (r, math.log(c) / r) for r, c in zip(radii, counts) if r > 0 and c >= 1
    )
    upper = None
    if is_generator:
        if set_size == 0:
            upper = 0.0  # only the identity exists
        else:
            log_s = math.log(set_size)
            upper = min(
                (math.log(c) + log_s) / r
                for r, c in zip(radii, counts)
                if r > 0 and c >= 1
            )
    point = _octave_point_estimate(radii, counts)
    converged = True
    if len(lower) >= 2:
        a, b = lower[-2][1], lower[-1][1]
        scale = max(abs(a), abs(b), 1e-12)
        converged = abs(a - b) / scale <= 0.05
    diag = {
        "radii": tuple(radii),
        "counts": tuple(counts),
        "set_size": set_size,
        "converged": converged,
    }
    if extra:
        diag.update(extra)
    return EntropyEstimate(
        lower_sequence=lower,
        upper_bound=upper,
        point_estimate=point,
        diagnostics=diag,
    )


def entropy_estimate(
    group: Group,
    norm: Norm,
    r_max: float,
    samples: int = DEFAULT_SAMPLES,
    radii=None,
    budget=None,
) -> EntropyEstimate:
    """Estimate the volume entropy of a norm from one ball enumeration.

    The Fekete-style upper bound is emitted only for generator norms, where
    submultiplicativity beta(r+t) <= beta(r) beta(t) #S makes the limit exist;
    for other norms the sequence is reported with a convergence heuristic
    (relative change over the last octave at most 5%) instead.
    """
    if radii is None:
        radii = sample_radii(r_max, samples)
    else:
        radii = tuple(sorted(float(r) for r in radii))
    table = growth_table(group, norm, radii=radii, budget=budget)
    exhaustive = table.exhaustive_up_to >= radii[-1]
    extra = {
        "group": group.describe(),
        "norm": norm.describe(),
        "exhaustive": exhaustive,
        "exhaustive_up_to": table.exhaustive_up_to,
    }
    est = _estimate_from_counts(
        table.radii,
        table.counts,
        norm.generating_set_size() or 0,
        norm.is_generator_norm,
        extra=extra,
    )
    return est


def free_product_limit(
    G: Group,
    H: Group,
    left_norm: Norm,
    right_norm: Norm,
    rho_list,
    r_max: float,
    samples: int = DEFAULT_SAMPLES,
    budget_limit: int | None = None,
    threads: int = 1,
) -> FreeProductLimitResult:
    """Entropy of the combined norm on G*H for each scale rho.

    As rho grows the right factor becomes expensive and the entropy decays to
    the entropy of (G, left_norm), which is reported as the baseline at the
    same radius.
    """
    rhos = [float(r) for r in rho_list]
    if any(r <= 0 for r in rhos) or any(b <= a for a, b in zip(rhos, rhos[1:])):
        raise ValidationError("rho_list must be positive and increasing")
    if not (left_norm.is_generator_norm and right_norm.is_generator_norm):
        raise ValidationError("factor norms must be generator norms")
    product = FreeProductGroup([G, H])

    def run_one(rho: float) -> FreeProductLimitRow:
        norm = FreeProductNorm(product, left_norm, rho, right_norm)
        est = entropy_estimate(
            product, norm, r_max, samples=samples, budget=Budget(budget_limit)
        )
        return FreeProductLimitRow(rho=rho, estimate=est)

    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = tuple(pool.map(run_one, rhos))
    else:
        rows = tuple(run_one(rho) for rho in rhos)
    baseline = entropy_estimate(
        G, left_norm, r_max, samples=samples, budget=Budget(budget_limit)
    )
    return FreeProductLimitResult(rows=rows, baseline=baseline, r_max=r_max)


def norm_table(norm: Norm, r_max: float, budget=None) -> dict:
    """All norm values on the ball of radius r_max, keyed by normal form.

    One enumeration pass; useful for bulk property checks.
    """
    return {key: cost for key, cost in norm.iter_ball(r_max, budget=_as_budget(budget))}
