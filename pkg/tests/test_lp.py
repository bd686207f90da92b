import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from reducible_anosov import lp

from oracles import linprog_max


def test_simple_box():
    a = np.array([[1.0, 0], [-1, 0], [0, 1], [0, -1]])
    b = np.array([1.0, 1, 2, 2])
    res = lp.maximize([1.0, 1.0], a, b)
    assert res.status == lp.OPTIMAL and res.value == pytest.approx(3.0)
    assert np.allclose(res.point, [1, 2])


def test_unbounded():
    assert lp.maximize([1.0], [[-1.0]], [1.0]).status == lp.UNBOUNDED


def test_infeasible():
    assert lp.maximize([1.0], [[1.0], [-1.0]], [-1.0, -1.0]).status == lp.INFEASIBLE


def test_no_constraints():
    assert lp.maximize([0.0, 0.0], np.zeros((0, 2)), np.zeros(0)).status == lp.OPTIMAL
    assert lp.maximize([1.0, 0.0], np.zeros((0, 2)), np.zeros(0)).status == lp.UNBOUNDED


def test_minimize():
    res = lp.minimize([1.0], [[1.0], [-1.0]], [3.0, 2.0])
    assert res.value == pytest.approx(-2.0)


def test_degenerate_does_not_cycle():
    # many constraints through the same vertex
    angles = np.linspace(0, np.pi / 2, 25)
    a = np.column_stack([np.cos(angles), np.sin(angles)])
    b = np.zeros(len(angles))
    res = lp.maximize([1.0, 1.0], np.vstack([a, [[-1, 0], [0, -1]]]), np.append(b, [1.0, 1.0]))
    assert res.status == lp.OPTIMAL and res.value == pytest.approx(0.0, abs=1e-9)


def test_shape_check():
    with pytest.raises(ValueError):
        lp.maximize([1.0, 2.0], [[1.0]], [1.0])


@st.composite
def problems(draw):
    n = draw(st.integers(1, 4))
    m = draw(st.integers(1, 10))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    a = np.round(rng.normal(size=(m, n)), 3)
    b = np.round(rng.normal(size=m) + draw(st.sampled_from([-0.5, 0.5, 2.0])), 3)
    c = np.round(rng.normal(size=n), 3)
    return c, a, b


@given(problems())
@settings(max_examples=300, deadline=None)
def test_against_highs(prob):
    c, a, b = prob
    status, value = linprog_max(c, a, b)
    res = lp.maximize(c, a, b)
    assert res.status == status
    if status == lp.OPTIMAL:
        assert res.value == pytest.approx(value, rel=1e-7, abs=1e-7)
        assert np.all(a @ res.point <= b + 1e-8 * np.maximum(1, np.abs(b)))


def test_deterministic():
    rng = np.random.default_rng(1)
    a = rng.normal(size=(40, 3))
    b = np.abs(rng.normal(size=40)) + 0.1
    c = rng.normal(size=3)
    r1, r2 = lp.maximize(c, a, b), lp.maximize(c, a, b)
    assert r1.status == r2.status
    if r1.point is not None:
        assert np.array_equal(r1.point, r2.point)
