import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from drsubmax import lp
from drsubmax.model import DomainError
from drsubmax.verify import vertex_enumerate_lp

INF = np.inf


def two_cut_model():
    # eta <= 0.5 + 0.75 x, eta <= 1.25 - 0.25 x over x in [0, 1]
    return lp.LpModel(
        [0.0, 1.0],
        (([-0.75, 1.0], lp.LE, 0.5), ([0.25, 1.0], lp.LE, 1.25)),
        ((0.0, 1.0), (0.0, INF)),
    )


class TestExamples:
    def test_single_bound(self):
        sol = lp.solve(lp.LpModel([1.0], (([1.0], lp.LE, 1.0),)))
        assert sol.optimal and sol.x[0] == pytest.approx(1.0)

    def test_simplex(self):
        m = lp.LpModel([1.0, 1.0], (([1.0, 1.0], lp.LE, 1.0),), ((0, 1), (0, 1)))
        sol = lp.solve(m)
        assert sol.optimal and sol.objective_value == pytest.approx(1.0)

    def test_two_envelope_cuts(self):
        sol = lp.solve(two_cut_model())
        assert sol.optimal
        assert sol.x[0] == pytest.approx(0.75, abs=1e-12)
        assert sol.x[1] == pytest.approx(1.0625, abs=1e-12)

    @pytest.mark.parametrize("model", [
        lp.LpModel([1.0], (([1.0], lp.LE, 1.0),)),
        lp.LpModel([1.0, 1.0], (([1.0, 1.0], lp.LE, 1.0),), ((0, 1), (0, 1))),
        two_cut_model(),
    ])
    def test_examples_match_vertex_enumeration(self, model):
        a, b = lp.solve(model), vertex_enumerate_lp(model)
        assert a.objective_value == pytest.approx(b.objective_value, abs=1e-9)


class TestStatuses:
    def test_infeasible(self):
        m = lp.LpModel([1.0], (([1.0], lp.GE, 2.0),), ((0.0, 1.0),))
        assert lp.solve(m).status is lp.LpStatus.INFEASIBLE

    def test_unbounded(self):
        m = lp.LpModel([1.0, 0.0], (([0.0, 1.0], lp.LE, 1.0),))
        assert lp.solve(m).status is lp.LpStatus.UNBOUNDED

    def test_unbounded_without_rows(self):
        assert lp.solve(lp.LpModel([1.0])).status is lp.LpStatus.UNBOUNDED

    def test_no_rows_bounded(self):
        sol = lp.solve(lp.LpModel([1.0, -1.0], (), ((0, 2), (1, 3))))
        assert sol.x.tolist() == [2.0, 1.0]

    def test_equality_rows(self):
        m = lp.LpModel([1.0, 2.0], (([1.0, 1.0], lp.EQ, 1.0), ([1.0, -1.0], lp.GE, -0.5)), ((0, 1), (0, 1)))
        sol = lp.solve(m)
        assert sol.optimal
        assert sol.x == pytest.approx([0.25, 0.75])

    def test_shifted_lower_bounds(self):
        m = lp.LpModel([1.0, 1.0], (([1.0, 1.0], lp.LE, 0.0),), ((-1.0, 1.0), (-2.0, 0.5)))
        sol = lp.solve(m)
        assert sol.objective_value == pytest.approx(0.0)

    def test_optimal_solution_verifies(self):
        sol = lp.solve(two_cut_model())
        A, _, rhs = two_cut_model().row_matrix()
        assert np.all(A @ sol.x <= rhs + 1e-7)


class TestModelValidation:
    def test_row_length(self):
        with pytest.raises(DomainError):
            lp.LpModel([1.0, 1.0], (([1.0], lp.LE, 1.0),))

    def test_bad_sense(self):
        with pytest.raises(DomainError):
            lp.LpModel([1.0], (([1.0], "<", 1.0),))

    def test_bounds(self):
        with pytest.raises(DomainError):
            lp.LpModel([1.0], (), ((1.0, 0.0),))
        with pytest.raises(DomainError):
            lp.LpModel([1.0], (), ((-INF, 0.0),))


class TestAddRow:
    def test_append_to_empty(self):
        m = lp.add_row(lp.LpModel([1.0]), [1.0], lp.LE, 1.0)
        assert m.num_rows == 1
        assert lp.solve(m).objective_value == pytest.approx(1.0)

    def test_length_mismatch(self):
        with pytest.raises(DomainError):
            lp.add_row(lp.LpModel([1.0, 0.0]), [1.0], lp.LE, 1.0)

    def test_duplicate_row_same_optimum(self):
        m = two_cut_model()
        m2 = lp.add_row(m, *m.rows[0])
        assert lp.solve(m2).objective_value == pytest.approx(lp.solve(m).objective_value, abs=1e-12)

    def test_incremental_equals_cold(self):
        m = lp.LpModel([0.0, 1.0], (), ((0.0, 1.0), (0.0, INF)))
        m = lp.add_row(m, [-0.75, 1.0], lp.LE, 0.5)
        m = lp.add_row(m, [0.25, 1.0], lp.LE, 1.25)
        assert lp.solve(m).objective_value == pytest.approx(lp.solve(two_cut_model()).objective_value, abs=1e-9)


def random_lp(rng, n, m):
    A = rng.normal(size=(m, n))
    rhs = rng.random(m) + 0.1
    senses = rng.choice([lp.LE, lp.GE], size=m, p=[0.75, 0.25])
    # GE rows are made satisfiable at the origin
    rhs = np.where(senses == lp.GE, -rhs, rhs)
    hi = rng.random(n) * 3 + 0.1
    c = rng.normal(size=n)
    return lp.LpModel(c, tuple((A[i], senses[i], rhs[i]) for i in range(m)), tuple((0.0, h) for h in hi))


class TestAgainstOracles:
    def test_vertex_enumeration_50_random(self):
        rng = np.random.default_rng(2024)
        for _ in range(50):
            model = random_lp(rng, int(rng.integers(1, 7)), int(rng.integers(1, 9)))
            a, b = lp.solve(model), vertex_enumerate_lp(model)
            assert a.status is b.status
            if a.optimal:
                assert a.objective_value == pytest.approx(b.objective_value, abs=1e-7)

    def test_scipy_cross_check(self):
        linprog = pytest.importorskip("scipy.optimize").linprog
        rng = np.random.default_rng(7)
        for _ in range(100):
            n, m = int(rng.integers(1, 8)), int(rng.integers(1, 30))
            model = random_lp(rng, n, m)
            A, senses, rhs = model.row_matrix()
            sign = np.where(np.array(senses) == lp.LE, 1.0, -1.0)
            ref = linprog(-model.objective, A_ub=A * sign[:, None], b_ub=rhs * sign,
                          bounds=list(model.var_bounds), method="highs")
            sol = lp.solve(model)
            assert sol.optimal
            assert sol.objective_value == pytest.approx(-ref.fun, abs=1e-7)

    def test_many_near_parallel_cuts(self):
        # the shape of cutting-plane main problems: few columns, many close rows
        rng = np.random.default_rng(3)
        n = 4
        rows = [(np.append(np.zeros(n), 0.0) + np.eye(n + 1)[k], lp.LE, 1.0) for k in range(n)]
        for _ in range(300):
            g = rng.random(n)
            rows.append((np.append(-g * (1 + 1e-7 * rng.random(n)), 1.0), lp.LE, 1.0 + rng.random() * 1e-3))
        model = lp.LpModel(np.append(np.zeros(n), 1.0), tuple(rows), tuple([(0.0, 1.0)] * n + [(0.0, INF)]))
        sol = lp.solve(model)
        assert sol.optimal
        A, _, rhs = model.row_matrix()
        assert np.all(A @ sol.x <= rhs + 1e-7)


class TestDeterminism:
    def test_bit_identical(self):
        rng = np.random.default_rng(1)
        model = random_lp(rng, 5, 12)
        a, b = lp.solve(model), lp.solve(model)
        assert a.x.tobytes() == b.x.tobytes()
        assert a.objective_value == b.objective_value

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 10_000))
    def test_status_optimal_implies_feasible(self, seed):
        rng = np.random.default_rng(seed)
        model = random_lp(rng, int(rng.integers(1, 6)), int(rng.integers(1, 12)))
        sol = lp.solve(model)
        if sol.optimal:
            A, senses, rhs = model.row_matrix()
            act = A @ sol.x
            for s, a, r in zip(senses, act, rhs):
                assert (a <= r + 1e-7) if s == lp.LE else (a >= r - 1e-7)
            lo = np.array([b[0] for b in model.var_bounds])
            hi = np.array([b[1] for b in model.var_bounds])
            assert np.all(sol.x >= lo - 1e-9) and np.all(sol.x <= hi + 1e-9)
