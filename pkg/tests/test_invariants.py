import math
import random

import pytest

import systolab.library as lib
from oracles import enumerate_edge_loops
from systolab import (
    BudgetExceeded,
    NotEssential,
    ValidationError,
    attach_phi,
    graph_diameter,
    phi_from_labeling,
    phi_systole,
    presentation,
    stable_systole,
    subdivide_barycentric,
    subdivide_midpoint,
    systolic_ratio,
    volume,
    volume_entropy,
)


def test_systole_wedge_takes_short_circle():
    X, P = lib.wedge_of_circles([3.0, 5.0])
    result = phi_systole(X, P)
    assert result.length == 3.0
    assert not result.witness_label.is_identity()
    assert sum(X.edges[X.edge_index_by_id(eid)].length
               for eid in result.witness_edges) == result.length


def test_systole_circle_mod2_needs_odd_winding():
    X, P = lib.circle_mod2(7.0)
    result = phi_systole(X, P)
    assert result.length == 7.0
    # oracle: the double cover is a circle of length 14, so the shortest
    # path between the two lifts of the vertex is 7
    assert result.length == 14.0 / 2


def test_systole_grid_torus_via_loop_oracle():
    X, P = lib.grid_torus(3, 4)
    result = phi_systole(X, P)
    assert result.length == 3.0
    # brute force: enumerate closed edge walks of at most 4 edges and keep
    # those with nontrivial abelianized label
    labels = P.labeling()
    target = labels.target
    best = math.inf
    for start in range(len(X.vertex_ids)):
        for cost, path in enumerate_edge_loops(X.adjacency(), start, 4):
            key = target.identity_key()
            for ei, direction in path:
                step = labels.forward(ei) if direction == 1 else labels.backward(ei)
                key = target.mul_key(key, step)
            if key != target.identity_key():
                best = min(best, cost)
    assert result.length == pytest.approx(best)


def test_systole_finite_and_lazy_paths_agree():
    for X, P in (lib.circle_mod2(7.0), lib.projective_plane(), lib.grid_torus(3, 4)):
        fast = phi_systole(X, P)
        slow = phi_systole(X, P, force_lazy=True)
        assert fast.length == pytest.approx(slow.length)


def test_systole_witness_label_nontrivial_and_consistent():
    X, P = lib.grid_torus(3, 4)
    result = phi_systole(X, P)
    labels = P.labeling()
    target = labels.target
    # replay the witness path from its basepoint; its holonomy must be the label
    key = target.identity_key()
    v = X.vertex_ids.index(result.basepoint)
    for eid in result.witness_edges:
        ei = X.edge_index_by_id(eid)
        e = X.edges[ei]
        if e.u == v:
            key = target.mul_key(key, labels.forward(ei))
            v = e.v
        else:
            assert e.v == v
            key = target.mul_key(key, labels.backward(ei))
            v = e.u
    assert v == X.vertex_ids.index(result.basepoint)
    assert key == result.witness_label.key


def test_systole_infinite_when_phi_trivial():
    from systolab import TrivialGroup

    X, _ = lib.grid_torus(3, 4)
    P = attach_phi(presentation(X), TrivialGroup(),
                   [TrivialGroup().identity()] * 25)
    result = phi_systole(X, P)
    assert math.isinf(result.length)
    assert result.saturated
    with pytest.raises(NotEssential):
        systolic_ratio(X, P)


def test_systole_budget_inconclusive():
    X, P = lib.wedge_of_circles([1.0, 1.0])
    with pytest.raises(BudgetExceeded) as err:
        phi_systole(X, P, force_lazy=True, node_budget=1)
    # the frontier had only reached radius 1, so that is all that is proven
    assert 0 < err.value.lower_bound <= 1.0


def test_systole_threads_match_sequential():
    X, P = lib.grid_torus(3, 4)
    seq = phi_systole(X, P, force_lazy=True, threads=1)
    par = phi_systole(X, P, force_lazy=True, threads=4)
    assert seq.length == par.length
    assert seq.basepoint == par.basepoint
    assert seq.witness_edges == par.witness_edges


def test_volume_examples():
    X, _ = lib.wedge_of_circles([3.0, 5.0])
    assert volume(X) == 8.0
    Xt, _ = lib.grid_torus(3, 4)
    assert volume(Xt) == pytest.approx(12.0)


def test_systolic_ratio_circle_is_one():
    X, P = lib.circle(5.0)
    assert systolic_ratio(X, P) == pytest.approx(1.0)


def test_systolic_ratio_grid_torus():
    X, P = lib.grid_torus(3, 4)
    assert systolic_ratio(X, P) == pytest.approx(12.0 / 9.0, rel=1e-9)


@pytest.mark.parametrize("factor", [0.5, 3.0])
def test_systolic_ratio_scale_invariant(factor):
    from dataclasses import replace

    for X, P in (
        lib.circle(5.0),
        lib.wedge_of_circles([3.0, 5.0]),
        lib.grid_torus(3, 4),
        lib.projective_plane(),
    ):
        base = systolic_ratio(X, P)
        scaled = systolic_ratio(X.scaled(factor), replace(P, complex=X.scaled(factor)))
        assert scaled == pytest.approx(base, rel=1e-12)


def test_stable_systole_circle_exact():
    X, P = lib.circle(5.0)
    result = stable_systole(X, P, (1,), 4)
    assert [l for _k, l, _r in result.per_k] == [5.0, 10.0, 15.0, 20.0]
    assert result.bracket == (5.0, 5.0)
    assert result.diameter == 0.0


def test_stable_systole_wedge_diagonal_class():
    X, P = lib.wedge_of_circles([1.0, 1.0])
    result = stable_systole(X, P, (1, 1), 4)
    assert [l for _k, l, _r in result.per_k] == [2.0, 4.0, 6.0, 8.0]
    lower, upper = result.bracket
    assert lower <= 2.0 <= upper
    assert upper - lower <= 2 * result.diameter / 1 + 1e-12


def test_stable_systole_grid_torus_short_direction():
    X, P = lib.grid_torus(3, 4)
    result = stable_systole(X, P, (1, 0), 4)
    assert [l for _k, l, _r in result.per_k] == [3.0, 6.0, 9.0, 12.0]
    lower, upper = result.bracket
    assert lower <= 3.0 <= upper


def test_stable_systole_brackets_later_ratios():
    # Fekete-style property: every later ratio sample sits in the bracket
    X, P = lib.grid_torus(3, 4)
    result = stable_systole(X, P, (1, 1), 4)
    lower, upper = result.bracket
    for _k, _l, ratio in result.per_k[1:]:
        assert lower - 1e-9 <= ratio <= upper + 1e-9


def test_stable_systole_dominates_systole():
    # any loop in a nontrivial torsion-free class is noncontractible
    X, P = lib.grid_torus(3, 4)
    sys_len = phi_systole(X, P).length
    for cls in ((1, 0), (0, 1), (1, 1)):
        result = stable_systole(X, P, cls, 3)
        assert result.per_k[0][1] >= sys_len - 1e-12


def test_stable_systole_rejects_torsion_only_targets():
    X, P = lib.projective_plane()
    with pytest.raises(ValidationError):
        stable_systole(X, P, (1,), 3)
    with pytest.raises(ValidationError):
        stable_systole(*lib.circle(1.0), a=(0,), k_max=3)


def test_volume_entropy_unit_wedge_close_to_log3():
    X, P = lib.wedge_of_circles([1.0, 1.0])
    est = volume_entropy(X, P, 8.0)
    assert est.point_estimate == pytest.approx(math.log(3), rel=0.02)


def test_volume_entropy_circle_decays():
    X, P = lib.circle(1.0)
    est = volume_entropy(X, P, 32.0)
    assert est.point_estimate <= 0.1


def test_volume_entropy_finite_deck_group_is_zero():
    X, P = lib.projective_plane()
    est = volume_entropy(X, P, 16.0)
    assert est.point_estimate == 0.0
    assert est.diagnostics["deck_saturated"]


@pytest.mark.parametrize("rho", [1.0, 2.0, 4.0])
def test_volume_entropy_matches_free_product_pipeline(rho):
    # the wedge cover's induced norm is exactly the combined factor norm
    from systolab import (
        FreeGroup,
        FreeProductGroup,
        FreeProductNorm,
        WordNorm,
        entropy_estimate,
    )

    r_max = 8.0
    X, P = lib.wedge_of_circles([1.0, rho])
    geo_est = volume_entropy(X, P, r_max)
    G = FreeProductGroup([FreeGroup(1), FreeGroup(1)])
    norm = FreeProductNorm(G, WordNorm(G.factors[0]), rho, WordNorm(G.factors[1]))
    grp_est = entropy_estimate(G, norm, r_max)
    assert geo_est.point_estimate == pytest.approx(grp_est.point_estimate, rel=0.03)
    assert geo_est.diagnostics["counts"] == grp_est.diagnostics["counts"]


def test_volume_entropy_scale_invariance_of_product():
    from dataclasses import replace

    X, P = lib.wedge_of_circles([1.0, 2.0])
    base = volume_entropy(X, P, 8.0)
    base_product = base.point_estimate * volume(X)
    for c in (0.5, 3.0):
        Xc = X.scaled(c)
        Pc = replace(P, complex=Xc)
        est = volume_entropy(Xc, Pc, 8.0 * c)
        product = est.point_estimate * volume(Xc)
        assert product == pytest.approx(base_product, rel=1e-9)
        assert est.diagnostics["counts"] == base.diagnostics["counts"]


def test_volume_entropy_generator_norm_comparison():
    X, P = lib.wedge_of_circles([1.0, 1.0])
    est = volume_entropy(X, P, 8.0, gen_norm_radius=2.0)
    diag = est.diagnostics
    assert diag["sandwich_factor"] == pytest.approx((2.0 + 2 * 0.0) / 2.0)
    assert diag["generator_norm_upper_estimate"] >= est.point_estimate - 1e-9
    # torus has positive diameter, so the sandwich factor exceeds 1
    Xt, Pt = lib.grid_torus(3, 4)
    est_t = volume_entropy(Xt, Pt, 10.0, gen_norm_radius=3.0)
    assert est_t.diagnostics["sandwich_factor"] > 1.0


def test_graph_diameter():
    X, _ = lib.circle(5.0)
    assert graph_diameter(X) == 0.0
    Xt, _ = lib.grid_torus(3, 4)
    d = graph_diameter(Xt)
    assert 0 < d <= 3.0


def test_subdivision_systole_monotone_volume_preserved():
    X, P = lib.projective_plane()
    base_sys = phi_systole(X, P).length
    base_vol = volume(X)
    labels = P.labeling()
    for subdivide in (subdivide_midpoint, subdivide_barycentric):
        X2, lab2 = subdivide(X, labels)
        P2 = phi_from_labeling(X2, lab2)
        assert volume(X2) == pytest.approx(base_vol, rel=1e-12)
        assert phi_systole(X2, P2).length <= base_sys + 1e-12


def test_gromov_direction_data():
    # sys / vol^(1/n) stays finite across the essential test complexes
    observed = []
    for X, P in (
        lib.circle(5.0),
        lib.wedge_of_circles([1.0, 2.0]),
        lib.grid_torus(3, 4),
        lib.projective_plane(),
    ):
        n = X.dimension
        value = phi_systole(X, P).length / volume(X) ** (1.0 / n)
        assert math.isfinite(value) and value > 0
        observed.append(value)
    assert max(observed) < 10.0


def test_stable_systole_loops_are_phi_nontrivial():
    # witnesses in nonzero torsion-free classes are noncontractible, so the
    # systole is a lower bound for every sampled loop length
    X, P = lib.wedge_of_circles([1.0, 1.0])
    sys_len = phi_systole(X, P).length
    result = stable_systole(X, P, (2, -1), 3)
    for _k, length, _r in result.per_k:
        assert length >= sys_len - 1e-12
