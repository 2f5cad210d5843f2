"""Derivative-free minimization of the systolic ratio over edge lengths.

The systole is a minimum over loops, so the ratio is only piecewise smooth
in the edge lengths; a multiplicative coordinate pattern search sidesteps
subgradients entirely and keeps lengths positive by construction.  Moves
that would break a triangle inequality (within a small slack) are rejected
outright, accepted moves must improve strictly, and the step shrinks toward
1 whenever a full sweep over the edges makes no progress.

Optional interleaved refinement: after the search converges at one
triangulation, the complex is midpoint-refined and re-optimized.  Refining
adds paths through edge midpoints, which is how edge-path systoles track the
underlying flat geodesics as the mesh gets finer.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra as sparse_dijkstra

from .complexes import MetricComplex, subdivide_midpoint
from .covers import CoverGeometry, finite_cover_or_none
from .errors import NotEssential, ValidationError
from .growth import EntropyEstimate
from .invariants import phi_systole, systolic_ratio, volume, volume_entropy
from .presentation import PiOneData, phi_from_labeling


@dataclass(frozen=True)
class OptimizeConfig:
    """Pattern-search parameters; a config fully determines the run."""

    max_iters: int = 60  # sweeps over the edge set, per stage
    initial_step: float = 1.10  # multiplicative trial factor, > 1
    shrink: float = 0.5  # step-excess shrink factor on a stalled sweep
    min_step: float = 1.0005  # stop once the step falls below this
    seed: int | None = None  # shuffles the edge visiting order when set
    normalize: bool = False  # rescale to unit volume after accepted moves
    subdivision_rounds: int = 0
    triangle_slack: float = 1e-6

    def __post_init__(self):
        if not self.initial_step > 1 or not self.min_step > 1:
            raise ValidationError("steps must be greater than 1")
        if not 0 < self.shrink < 1:
            raise ValidationError("shrink factor must be in (0, 1)")


@dataclass
class OptimizeResult:
    complex: MetricComplex
    pi_one: PiOneData
    trace: list = field(default_factory=list)  # (stage, iteration, ratio)
    accepted: int = 0
    stalled: bool = False
    final_ratio: float = math.nan
    verified_ratio: float = math.nan


class _RatioEvaluator:
    """Volume and systole for varying lengths at fixed combinatorics.

    The cover's combinatorial structure does not depend on the metric, so it
    is materialized once; each evaluation only rewrites edge weights.
    """

    def __init__(self, X: MetricComplex, P: PiOneData):
        self.X = X
        self.P = P
        self.n = X.dimension
        geometry = CoverGeometry(X, P.labeling())
        self.finite = finite_cover_or_none(geometry)
        if self.finite is not None:
            fc = self.finite
            pairs = list(fc.edge_of_pair.items())
            self._rows = np.array([rc[0] for rc, _ in pairs], dtype=np.int64)
            self._cols = np.array([rc[1] for rc, _ in pairs], dtype=np.int64)
            self._edge_map = np.array([ei for _, ei in pairs], dtype=np.int64)
            self._identity_ix = fc.deck_index[geometry.target.identity_key()]
            self._nv = len(X.vertex_ids)
            self._n_deck = len(fc.deck_keys)
            fiber = [
                fc.state_index(v, gi)
                for v in range(self._nv)
                for gi in range(self._n_deck)
                if gi != self._identity_ix
            ]
            self._fiber_per_vertex = np.array(fiber, dtype=np.int64).reshape(
                self._nv, self._n_deck - 1
            )
            self._sources = np.array(
                [fc.state_index(v, self._identity_ix) for v in range(self._nv)],
                dtype=np.int64,
            )

    def systole(self, X: MetricComplex) -> float:
        if self.finite is not None:
            lengths = np.asarray(X.lengths())
            n = self.finite.n_states
            m = csr_matrix(
                (lengths[self._edge_map], (self._rows, self._cols)), shape=(n, n)
            )
            dist = sparse_dijkstra(m, directed=True, indices=self._sources)
            per_vertex = dist[np.arange(self._nv)[:, None], self._fiber_per_vertex]
            return float(per_vertex.min())
        return phi_systole(X, self._reattach(X)).length

    def _reattach(self, X: MetricComplex) -> PiOneData:
        return replace(self.P, complex=X)

    def ratio(self, X: MetricComplex) -> float:
        sys = self.systole(X)
        if not math.isfinite(sys) or sys <= 0:
            raise NotEssential("systole vanished or became infinite")
        return volume(X) / sys**self.n


def _triangles_ok(X: MetricComplex, lengths, slack: float) -> bool:
    for t in X.triangles:
        a, b, c = sorted(lengths[ei] for ei in t)
        if not a + b > c * (1.0 + slack):
            return False
    return True


def _optimize_stage(
    X: MetricComplex, P: PiOneData, cfg: OptimizeConfig, stage: int, trace, start_iter
):
    evaluator = _RatioEvaluator(X, P)
    lengths = list(X.lengths())
    current = evaluator.ratio(X)
    trace.append((stage, start_iter, current))
    iteration = start_iter
    accepted = 0
    step = cfg.initial_step
    order = list(range(len(lengths)))
    rng = random.Random(cfg.seed) if cfg.seed is not None else None
    stalled_on_triangles = False
    for _sweep in range(cfg.max_iters):
        if rng is not None:
            rng.shuffle(order)
        improved = False
        any_valid_move = False
        for ei in order:
            for factor in (step, 1.0 / step):
                trial = list(lengths)
                trial[ei] = lengths[ei] * factor
                if not _triangles_ok(X, trial, cfg.triangle_slack):
                    continue
                any_valid_move = True
                candidate = X.with_lengths(trial)
                value = evaluator.ratio(candidate)
                if value < current * (1.0 - 1e-12):
                    lengths = trial
                    current = value
                    if cfg.normalize:
                        vol = volume(X.with_lengths(lengths))
                        scale = vol ** (-1.0 / X.dimension)
                        lengths = [l * scale for l in lengths]
                    iteration += 1
                    accepted += 1
                    trace.append((stage, iteration, current))
                    improved = True
                    break
        if not improved:
            if not any_valid_move:
                stalled_on_triangles = True
                break
            step = 1.0 + (step - 1.0) * cfg.shrink
            if step < cfg.min_step:
                break
    return X.with_lengths(lengths), current, iteration, accepted, stalled_on_triangles


def optimize_ratio(X: MetricComplex, P: PiOneData, cfg: OptimizeConfig) -> OptimizeResult:
    """Minimize volume / systole^n over edge lengths, with optional
    interleaved midpoint refinement between stages.

    Within each stage the trace is non-increasing by construction; the final
    ratio is re-verified by an independent from-scratch systole and volume
    computation on the resulting complex.
    """
    if not P.has_phi():
        raise ValidationError("no homomorphism attached")
    initial = phi_systole(X, P)
    if not math.isfinite(initial.length):
        raise NotEssential("initial metric has no noncontractible loop")
    trace: list = []
    result = OptimizeResult(complex=X, pi_one=P, trace=trace)
    iteration = 0
    current_X, current_P = X, P
    for stage in range(cfg.subdivision_rounds + 1):
        if stage > 0:
            labels = current_P.labeling()
            current_X, labels = subdivide_midpoint(current_X, labels)
            current_P = phi_from_labeling(current_X, labels)
        current_X, ratio, iteration, accepted, stalled = _optimize_stage(
            current_X, current_P, cfg, stage, trace, iteration
        )
        current_P = replace(current_P, complex=current_X)
        result.accepted += accepted
        result.stalled = result.stalled or stalled
        result.final_ratio = ratio
    result.complex = current_X
    result.pi_one = current_P
    # independent re-check with the lazy cover search
    sys = phi_systole(current_X, current_P, force_lazy=True)
    result.verified_ratio = volume(current_X) / sys.length**current_X.dimension
    return result


@dataclass
class ScanRow:
    name: str
    dimension: int
    volume: float
    systole: float
    ratio: float
    entropy: float
    entropy_product: float
    implied_constant: float | None  # None when the entropy is numerically zero


ENTROPY_FLOOR = 1e-3


def entropy_systole_scan(members, r_max: float, node_budget=None, threads: int = 1):
    """Tabulate ratio, normalized entropy, and the implied inequality
    constant across a family of complexes.

    For each metric the row reports ratio = vol/sys^n, the scale-invariant
    entropy product lambda * vol^(1/n), and the constant that would make
    ratio >= c * lambda^n / log^n(1 + lambda) tight; rows whose entropy
    product falls below 1e-3 leave the constant empty since the bound is
    vacuous as the entropy vanishes.
    """

    def run_one(member) -> ScanRow:
        name, X, P = member
        n = X.dimension
        vol = volume(X)
        sys = phi_systole(X, P, node_budget=node_budget)
        if not math.isfinite(sys.length):
            raise NotEssential(f"family member {name!r} is not essential")
        ratio = vol / sys.length**n
        est: EntropyEstimate = volume_entropy(
            X, P, r_max, node_budget=node_budget
        )
        lam = est.point_estimate
        product = lam * vol ** (1.0 / n)
        if product < ENTROPY_FLOOR:
            implied = None
        else:
            implied = ratio * math.log1p(product) ** n / product**n
        return ScanRow(
            name=name,
            dimension=n,
            volume=vol,
            systole=sys.length,
            ratio=ratio,
            entropy=lam,
            entropy_product=product,
            implied_constant=implied,
        )

    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(run_one, members))
    return [run_one(m) for m in members]
