import numpy as np
import pytest

from drsubmax.model import BoxBounds, LinearConstraints, OracleProblem
from drsubmax.problems import (
    bilinear_problem,
    build_problem,
    gen_covering,
    gen_influence,
    gen_quadratic,
    sqrt_problem,
)


def product_problem():
    """x1 * x2 on the unit square: increasing but supermodular."""
    return OracleProblem(
        lambda x: float(x[0] * x[1]),
        lambda x: np.array([x[1], x[0]]),
        BoxBounds.unit(2),
        LinearConstraints.empty(2),
        "product",
        value_batch=lambda X: X[:, 0] * X[:, 1],
        gradient_batch=lambda X: X[:, ::-1].copy(),
    )


@pytest.fixture
def bilinear():
    return bilinear_problem()


@pytest.fixture
def bilinear_budget():
    return bilinear_problem(budget=1.0)


@pytest.fixture
def sqrt1():
    return sqrt_problem(1)


@pytest.fixture(scope="session")
def family_instances():
    """One small seeded instance per family."""
    return {
        "quadratic": gen_quadratic(4, 3, 7),
        "uncap_covering": gen_covering(5, 40, 2.0, False, 7),
        "cap_covering": gen_covering(4, 30, 2.0, True, 7),
        "influence_max": gen_influence(6, 2.0, "contest", 7),
    }


@pytest.fixture(scope="session")
def family_problems(family_instances):
    return {k: build_problem(v) for k, v in family_instances.items()}


_ACCEPTANCE_LINES = []


@pytest.fixture
def report(capsys):
    """Record one PASS/FAIL line for an acceptance criterion and echo it."""
    def _report(number, title, passed, detail=""):
        line = f"[{'PASS' if passed else 'FAIL'}] criterion {number:>2}: {title}" + (f" ({detail})" if detail else "")
        _ACCEPTANCE_LINES.append(line)
        with capsys.disabled():
            print("\n" + line)
        return passed
    return _report


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)
