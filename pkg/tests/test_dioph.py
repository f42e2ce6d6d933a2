import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from azvass.dioph import (DioSystem, SearchLimit, ch16_bound, feasible, hilbert_basis,
                          integer_feasible, minimal_solutions, particular_solutions,
                          rational_feasible)
from azvass.core import AffineVass, Configuration
from azvass.solver import reach_zvass
from tests.helpers import box_minimal


def test_two_unknowns_sum_to_two():
    basis = minimal_solutions(DioSystem([[1, 1]], [2]))
    assert set(basis.particulars) == {(2, 0), (1, 1), (0, 2)}
    assert basis.periods == ()


def test_diagonal_period():
    basis = minimal_solutions(DioSystem([[1, -1]], [0]))
    assert set(basis.particulars) == {(0, 0)}
    assert set(basis.periods) == {(1, 1)}


def test_weighted_period():
    assert set(hilbert_basis(DioSystem([[2, -3]], [0]))) == {(3, 2)}
    assert box_minimal([[2, -3]], [0], 10, nonzero=True) == {(3, 2)}


def test_feasibility_examples():
    assert not feasible(DioSystem([[1, 1]], [-1]))
    assert feasible(DioSystem([], [], cols=3))
    assert minimal_solutions(DioSystem([], [], cols=3)).particulars == ((0, 0, 0),)


def test_flow_shaped_system_from_a_solved_instance():
    # p --(+1)--> q with a loop (-2) at q; reach q(-3) from p(0)
    vass = AffineVass.build(1, ["p", "q"], [("p", "q", None, (1,)), ("q", "q", None, (-2,))])
    res = reach_zvass(vass, "p", (0,), "q", (-3,))
    assert res.reachable and res.witness.counts == {0: 1, 1: 2}
    # flow at p and q, effect equation; unknowns (x0, x1)
    sys = DioSystem([[-1, 0], [1, 0], [1, -2]], [-1, 1, -3])
    assert feasible(sys)
    assert sys.solves((res.witness.counts[0], res.witness.counts[1]))


def test_ch16_bound_example_and_monotonicity():
    sys = DioSystem([[1], [-1]], [0, 0])
    assert ch16_bound(sys) == 9
    assert ch16_bound(DioSystem([[1], [-1]], [0, 5])) >= ch16_bound(sys)


def test_search_limit_is_raised():
    sys = DioSystem([[7, -11, 13, -17]], [1])
    with pytest.raises(SearchLimit):
        particular_solutions(sys, budget=3)


def _random_system(rng, m, k, lo=-3, hi=3):
    A = [[rng.randint(lo, hi) for _ in range(k)] for _ in range(m)]
    c = [rng.randint(lo, hi) for _ in range(m)]
    return A, c


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 2), st.integers(1, 4), st.randoms(use_true_random=False))
def test_minimal_solutions_match_box_search(m, k, rng):
    A, c = _random_system(rng, m, k)
    sys = DioSystem(A, c)
    basis = minimal_solutions(sys)
    bound = ch16_bound(sys)
    for x in basis.particulars + basis.periods:
        assert max(x) <= bound
    side = 8 if k == 4 else 12
    in_box = {x for x in basis.particulars if max(x, default=0) <= side}
    assert in_box == box_minimal(A, c, side)
    periods_in_box = {x for x in basis.periods if max(x) <= side}
    assert periods_in_box == box_minimal(A, [0] * m, side, nonzero=True)
    # reconstruction: particular + period is again a solution
    for x in basis.particulars:
        assert sys.solves(x)
        for h in basis.periods:
            assert sys.solves(tuple(a + b for a, b in zip(x, h)))
    # pairwise incomparable
    for x, y in itertools.permutations(basis.particulars, 2):
        assert not all(a <= b for a, b in zip(x, y))


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 3), st.integers(1, 4), st.randoms(use_true_random=False))
def test_feasibility_filters_agree_with_box(m, k, rng):
    A, c = _random_system(rng, m, k)
    sys = DioSystem(A, c)
    natural = any(sys.solves(x) for x in itertools.product(range(7), repeat=k))
    integral = natural or any(sys.evaluate(x) == sys.c
                              for x in itertools.product(range(-6, 7), repeat=k))
    if natural:
        assert rational_feasible(sys)
    if integral:
        assert integer_feasible(sys)
    # both filters are necessary conditions for a natural solution
    if not rational_feasible(sys) or not integer_feasible(sys):
        assert not natural


def test_feasibility_filter_examples():
    assert not integer_feasible(DioSystem([[3]], [5]))
    assert rational_feasible(DioSystem([[3]], [5]))
    assert not rational_feasible(DioSystem([[1, 1]], [-1]))
    assert integer_feasible(DioSystem([[2, 3]], [1]))
    assert not integer_feasible(DioSystem([[2, 4], [1, 1]], [1, 0]))
    assert rational_feasible(DioSystem([[1, -1], [1, 1]], [0, 2]))
