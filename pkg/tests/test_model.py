import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from drsubmax.model import (
    BoxBounds,
    DomainError,
    Instance,
    LinearConstraints,
    check_submodular_sample,
    evaluate,
    project_into_box,
)
from drsubmax.problems import gen_covering, gen_influence, gen_quadratic, sqrt_problem
from drsubmax.verify import fd_gradient_check

from conftest import product_problem


class TestBoxes:
    def test_rejects_inverted_bounds(self):
        with pytest.raises(DomainError):
            BoxBounds([0.0, 1.0], [1.0, 0.5])

    def test_rejects_infinite(self):
        with pytest.raises(DomainError):
            BoxBounds([0.0], [np.inf])

    def test_rejects_length_mismatch(self):
        with pytest.raises(DomainError):
            BoxBounds([0.0, 0.0], [1.0])

    def test_replace_keeps_other_axes(self):
        box = BoxBounds.unit(3).replace(1, 0.25, 0.5)
        assert box.lower.tolist() == [0.0, 0.25, 0.0]
        assert box.upper.tolist() == [1.0, 0.5, 1.0]

    def test_constraints_row_count(self):
        with pytest.raises(DomainError):
            LinearConstraints(np.ones((2, 3)), [1.0])


class TestEvaluate:
    @pytest.mark.parametrize("x, expected", [((0, 0), 0.0), ((1, 1), 1.0), ((0.5, 0.5), 0.75)])
    def test_bilinear_values(self, bilinear, x, expected):
        assert evaluate(bilinear, np.array(x, dtype=float)) == pytest.approx(expected, abs=1e-15)

    def test_out_of_box(self, bilinear):
        with pytest.raises(DomainError):
            evaluate(bilinear, np.array([1.1, 0.0]))

    def test_box_tolerance(self, bilinear):
        evaluate(bilinear, np.array([1.0 + 5e-13, 0.0]))
        with pytest.raises(DomainError):
            evaluate(bilinear, np.array([1.0 + 1e-11, 0.0]))

    def test_deterministic(self, family_problems):
        p = family_problems["influence_max"]
        x = np.full(p.dimension, 0.3)
        assert evaluate(p, x) == evaluate(p, x)


class TestProjection:
    @pytest.mark.parametrize(
        "x, lo, hi, expected",
        [
            ((1.2, -0.1), (0, 0), (1, 1), (1.0, 0.0)),
            ((0.5, 0.5), (0, 0), (1, 1), (0.5, 0.5)),
            ((0.3,), (0.4,), (0.6,), (0.4,)),
        ],
    )
    def test_examples(self, x, lo, hi, expected):
        out = project_into_box(np.array(x, dtype=float), BoxBounds(lo, hi))
        assert out.tolist() == list(expected)

    def test_length_mismatch(self):
        with pytest.raises(DomainError):
            project_into_box(np.zeros(3), BoxBounds.unit(2))

    @given(st.lists(st.floats(-5, 5), min_size=3, max_size=3))
    def test_idempotent_and_inside(self, xs):
        box = BoxBounds([0.0, -1.0, 0.5], [1.0, 2.0, 0.5])
        once = project_into_box(np.array(xs), box)
        assert box.contains(once)
        assert np.array_equal(project_into_box(once, box), once)


class TestSubmodularCheck:
    def test_bilinear_passes_with_zero_violation(self, bilinear):
        rep = check_submodular_sample(bilinear, trials=1000, rng_seed=0)
        assert rep.passed
        assert rep.max_violation <= 1e-15

    def test_product_fails(self):
        # x=(1,0), y=(0,1): F(x)+F(y)=0 < F(max)+F(min)=1
        rep = check_submodular_sample(product_problem(), trials=1000, rng_seed=0)
        assert not rep.passed
        assert rep.lattice_violation > 0.1

    def test_sqrt_passes(self):
        assert check_submodular_sample(sqrt_problem(1), trials=1000).passed

    def test_trials_positive(self, bilinear):
        with pytest.raises(DomainError):
            check_submodular_sample(bilinear, trials=0)

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_families_pass(self, family_problems, seed):
        for name, p in family_problems.items():
            rep = check_submodular_sample(p, trials=10_000, rng_seed=seed)
            assert rep.passed, name
            assert rep.monotone_violation <= 1e-9, name


class TestFamilyGradients:
    def test_fd_at_interior_points(self, family_problems):
        rng = np.random.default_rng(3)
        for name, p in family_problems.items():
            X = 2e-5 + (1 - 4e-5) * rng.random((100, p.dimension))
            err = max(fd_gradient_check(p, x) for x in X)
            assert err <= 1e-5, name


class TestInstanceJson:
    @pytest.mark.parametrize(
        "inst",
        [
            gen_quadratic(5, 5, 1),
            gen_covering(5, 150, 2.0, False, 1),
            gen_covering(4, 20, 3.0, True, 2),
            gen_influence(5, 2.0, "contest", 1),
            gen_influence(4, 1.0, "identity", 9),
        ],
        ids=lambda i: i.kind,
    )
    def test_round_trip_bytes(self, inst, tmp_path):
        text = inst.to_json()
        again = Instance.from_json(text)
        assert again.to_json() == text
        path = tmp_path / "inst.json"
        inst.save(path)
        assert Instance.load(path).to_json() == path.read_text(encoding="utf-8")

    def test_schema_fields(self):
        doc = json.loads(gen_quadratic(2, 2, 0).to_json())
        assert set(doc) == {"kind", "seed", "n", "budget", "payload"}
        assert set(doc["payload"]) >= {"H", "h", "A", "b"}

    def test_floats_have_17_digits(self):
        text = gen_quadratic(2, 2, 0).to_json()
        doc = json.loads(text)
        v = doc["payload"]["H"][0][1]
        assert format(v, ".17g") in text

    def test_float_values_exact(self):
        inst = gen_covering(3, 10, 2.0, False, 4)
        again = Instance.from_json(inst.to_json())
        a = np.array(inst.payload["demand_xy"])
        b = np.array(again.payload["demand_xy"])
        assert np.array_equal(a, b)

    def test_missing_field(self):
        with pytest.raises(DomainError):
            Instance.from_json('{"kind": "quadratic", "seed": 0, "n": 2}')

    def test_unknown_kind(self):
        with pytest.raises(DomainError):
            Instance("knapsack", 0, 2, 1.0, {})

    def test_dimension_mismatch_rejected(self):
        inst = gen_quadratic(3, 2, 0)
        bad = Instance(inst.kind, inst.seed, 4, inst.budget, inst.payload)
        with pytest.raises(DomainError):
            bad.to_problem()

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(1, 6))
    def test_round_trip_any_seed(self, seed, n):
        inst = gen_quadratic(n, 2, seed)
        assert Instance.from_json(inst.to_json()).to_json() == inst.to_json()
