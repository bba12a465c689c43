import numpy as np
import pytest

from drsubmax.model import RefusalError, check_submodular_sample
from drsubmax.problems import (
    CoveringInstance,
    InfluenceInstance,
    QuadraticInstance,
    SetFunctionExtension,
    availability,
    build_problem,
    covering_grad_uncap,
    covering_value_cap,
    covering_value_uncap,
    family_of,
    gen_covering,
    gen_influence,
    gen_quadratic,
    influence_value,
    quadratic_from_hessian,
    reachable_sets,
    solve_assignment,
    subset_masks,
)
from drsubmax.problems.availability import subset_probabilities


def covering(fac, dem, dbar=0.2, budget=1.0, a=None, K=None, g="identity"):
    fac = np.asarray(fac, dtype=float)
    a = np.full(len(fac), 0.5) if a is None else a
    return CoveringInstance(fac, dem, np.ones(len(dem)), dbar, budget, a, K, g)


def exhaustive_submodular(table, n):
    """Check monotone and diminishing returns over every (S, i) pair."""
    for S in range(2**n):
        for i in range(n):
            if S >> i & 1:
                continue
            gain = table[S | 1 << i] - table[S]
            if gain < -1e-9:
                return False
            for j in range(n):
                if j != i and not S >> j & 1:
                    if table[S | 1 << j | 1 << i] - table[S | 1 << j] > gain + 1e-9:
                        return False
    return True


class TestQuadratic:
    def test_bilinear_from_hessian(self):
        q = quadratic_from_hessian([[0.0, -1.0], [-1.0, 0.0]])
        assert q.h.tolist() == [1.0, 1.0]
        for x in ([0.2, 0.9], [1.0, 1.0], [0.5, 0.5]):
            x = np.array(x)
            assert q.value(x) == pytest.approx(x[0] + x[1] - x[0] * x[1], abs=1e-15)

    @pytest.mark.parametrize("seed", range(5))
    def test_generator_properties(self, seed):
        q = family_of(gen_quadratic(6, 4, seed))
        assert np.array_equal(q.H, q.H.T)
        assert np.all((q.H >= -1) & (q.H <= 0))
        assert np.all((q.A >= 0) & (q.A <= 1))
        assert np.all(q.b == 1.0)
        assert np.allclose(q.gradient(np.ones(6)), 0.0, atol=1e-12)
        assert np.array_equal(q.gradient(np.zeros(6)), q.h)
        assert np.all(q.h >= 0)
        p = q.to_problem()
        assert check_submodular_sample(p, trials=2000, rng_seed=seed).passed
        X = np.random.default_rng(seed).random((500, 6))
        assert np.all(p.gradients(X) >= -1e-12)

    def test_rejects_positive_entries(self):
        with pytest.raises(ValueError):
            QuadraticInstance([[0.0, 0.1], [0.1, 0.0]], [0, 0], np.zeros((0, 2)), [])


class TestUncapCovering:
    def test_single_demand_single_facility(self):
        inst = covering([[0.0, 0.0], [0.9, 0.9]], [[0.05, 0.0]])
        assert covering_value_uncap(inst, [0.3, 0.7]) == pytest.approx(0.3)

    def test_two_facilities_same_demand(self):
        inst = covering([[0.0, 0.0], [0.1, 0.0]], [[0.05, 0.0]])
        assert covering_value_uncap(inst, [0.5, 0.5]) == pytest.approx(0.75)

    def test_contest_value(self):
        g = availability(np.array([1.0]), "contest", np.array([0.4]))
        assert g[0] == pytest.approx(1 / 1.4)
        inst = covering([[0.0, 0.0]], [[0.0, 0.0]], a=np.array([0.4]), g="contest")
        assert covering_value_uncap(inst, [1.0]) == pytest.approx(0.7142857142857143)

    def test_gradient_formula(self):
        inst = family_of(gen_covering(4, 30, 2.0, False, 3))
        x = np.array([0.2, 0.5, 0.7, 0.1])
        g = availability(x, "contest", inst.a)
        slope = inst.a / (x + inst.a) ** 2
        C = inst.coverage
        expected = np.zeros(4)
        for i in range(4):
            for j in np.flatnonzero(C[:, i]):
                others = [k for k in np.flatnonzero(C[j]) if k != i]
                expected[i] += np.prod(1 - g[others])
            expected[i] *= slope[i]
        assert covering_grad_uncap(inst, x) == pytest.approx(expected, rel=1e-12)

    def test_coverage_threshold_inclusive(self):
        inst = covering([[0.0, 0.0]], [[0.2, 0.0], [0.2000001, 0.0]])
        assert inst.coverage[:, 0].tolist() == [True, False]


class TestAssignment:
    def test_empty_set(self):
        inst = covering([[0.0, 0.0]], [[0.0, 0.0]], K=np.array([1.0]))
        assert solve_assignment(inst, []) == 0.0

    def test_capacity_binds(self):
        inst = covering([[0.5, 0.5]], [[0.5, 0.5], [0.55, 0.5], [0.5, 0.55]], K=np.array([2.0]))
        assert solve_assignment(inst, [0]) == pytest.approx(2.0)

    def test_disjoint_facilities(self):
        inst = covering([[0.0, 0.0], [1.0, 1.0]], [[0.0, 0.0], [1.0, 1.0]], K=np.array([1.0, 1.0]))
        assert solve_assignment(inst, [0, 1]) == pytest.approx(2.0)

    def test_demand_counted_once(self):
        inst = covering([[0.0, 0.0], [0.05, 0.0]], [[0.0, 0.0]], K=np.array([5.0, 5.0]))
        assert solve_assignment(inst, [0, 1]) == pytest.approx(1.0)

    def test_slack_capacities_equal_uncap(self):
        base = family_of(gen_covering(4, 25, 2.0, False, 5))
        cap = CoveringInstance(base.facility_xy, base.demand_xy, base.weights, base.dbar, base.budget,
                               base.a, np.full(4, 25.0), base.g_kind)
        rng = np.random.default_rng(0)
        for x in rng.random((10, 4)):
            assert covering_value_cap(cap, x) == pytest.approx(covering_value_uncap(base, x), abs=1e-9)

    def test_set_values_monotone_submodular(self):
        inst = family_of(gen_covering(5, 40, 2.0, True, 1))
        assert exhaustive_submodular(inst.set_values, 5)

    def test_vertex_identity(self):
        inst = family_of(gen_covering(4, 30, 2.0, True, 2, g_kind="identity"))
        for S, mask in enumerate(subset_masks(4)):
            assert covering_value_cap(inst, mask.astype(float)) == inst.set_values[S]


class TestInfluence:
    def test_all_ones_identity(self):
        inst = family_of(gen_influence(6, 2.0, "identity", 4))
        assert influence_value(inst, np.ones(6)) == pytest.approx(5 * 6)

    def test_zero(self):
        inst = family_of(gen_influence(6, 2.0, "contest", 4))
        assert influence_value(inst, np.zeros(6)) == 0.0

    def test_single_node(self):
        inst = InfluenceInstance(1, (), 0.1, (1, 2, 3, 4, 5), "identity", 1.0, [1.0])
        assert influence_value(inst, [0.5]) == pytest.approx(2.5)

    def test_reach_sets_are_bfs_fixed_points(self):
        inst = family_of(gen_influence(8, 2.0, "identity", 0))
        for live, reach in zip(inst.scenarios, inst.reach_sets):
            for i, r in enumerate(reach):
                assert i in r
                for u, v in live:
                    if u in r:
                        assert v in r

    def test_reachable_sets_chain(self):
        assert reachable_sets(3, [(0, 1), (1, 2)]) == [frozenset({0, 1, 2}), frozenset({1, 2}), frozenset({2})]

    def test_scenarios_monotone_submodular(self):
        inst = family_of(gen_influence(8, 2.0, "identity", 6))
        for table in inst.scenario_tables:
            assert exhaustive_submodular(table, 8)

    def test_vertex_identity(self):
        inst = family_of(gen_influence(10, 2.0, "identity", 3))
        table = inst.scenario_tables.sum(axis=0)
        masks = subset_masks(10)
        idx = np.random.default_rng(0).choice(2**10, size=60, replace=False)
        vals = inst.extension.value_batch(masks[idx].astype(float))
        assert np.array_equal(vals, table[idx])

    def test_guard(self):
        inst = family_of(gen_influence(13, 2.0, "identity", 0))
        with pytest.raises(RefusalError):
            inst.scenario_tables


class TestGenerators:
    def test_covering_contest_parameters(self):
        inst = gen_covering(5, 150, 2.0, False, 1)
        assert inst.payload["a"].tolist() == [0.4] * 5
        assert len(inst.payload["demand_xy"]) == 150

    def test_capacities(self):
        inst = gen_covering(5, 150, 2.0, True, 1)
        assert inst.kind == "cap_covering"
        assert np.allclose(inst.payload["K"], 150 / (0.9 * 5))

    def test_influence_arc_count(self):
        inst = gen_influence(5, 2.0, "contest", 1)
        arcs = inst.payload["arcs"]
        assert len(arcs) == 11
        assert len({tuple(a) for a in arcs}) == 11
        assert all(u != v for u, v in arcs)

    def test_tiny_graph_arc_cap(self):
        assert len(gen_influence(2, 1.0, "identity", 0).payload["arcs"]) == 2

    @pytest.mark.parametrize("make", [
        lambda s: gen_quadratic(5, 5, s),
        lambda s: gen_covering(5, 150, 3.0, False, s),
        lambda s: gen_covering(4, 20, 2.0, True, s),
        lambda s: gen_influence(6, 2.0, "contest", s),
    ])
    def test_seed_determinism(self, make):
        assert make(11).to_json() == make(11).to_json()
        assert make(11).to_json() != make(12).to_json()

    def test_build_problem_kinds(self, family_instances):
        for name, inst in family_instances.items():
            p = build_problem(inst)
            assert p.name == name
            assert p.dimension == inst.n
            assert np.allclose(p.constraints.rhs, [inst.budget]) or name == "quadratic"


class TestExtension:
    def test_probabilities_sum_to_one(self):
        G = np.random.default_rng(0).random((5, 6))
        W = subset_probabilities(G)
        assert W.shape == (5, 64)
        assert np.allclose(W.sum(axis=1), 1.0)

    def test_bit_order(self):
        W = subset_probabilities(np.array([[1.0, 0.0, 1.0]]))
        assert np.argmax(W[0]) == 0b101

    def test_table_length(self):
        with pytest.raises(ValueError):
            SetFunctionExtension(np.zeros(6), "identity")

    def test_guard(self):
        with pytest.raises(RefusalError):
            SetFunctionExtension(np.zeros(2**13), "identity")

    def test_monte_carlo_agreement(self):
        inst = family_of(gen_influence(6, 2.0, "contest", 2))
        ext = inst.extension
        rng = np.random.default_rng(1)
        weights = 1 << np.arange(6)
        for x in rng.random((5, 6)):
            g = availability(x, "contest", inst.a)
            draws = rng.random((100_000, 6)) < g
            samples = ext.table[draws.astype(int) @ weights]
            se = samples.std(ddof=1) / np.sqrt(samples.size)
            assert abs(samples.mean() - ext.value(x)) <= 4 * se
