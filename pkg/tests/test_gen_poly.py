import pytest
from hypothesis import given, settings, strategies as st

from azvass.core import Bounds, bfs_reach, identity, mat_power, replay
from azvass.gen.poly import (Add, CounterProgram, Loop, Polynomial, PolyParseError,
                             ProgramError, ZeroTest, compile_poly, lower_ir,
                             non_identity_matrices, parse_polynomial, run_ir_bounded,
                             zero_test_audit)

CASES = [("x1 - 2", (2,)), ("x1^2 - 4", (2,)), ("x1*x2 - 6", (2, 3))]


def test_parse_and_print():
    p = parse_polynomial("x1*x2 - 6")
    assert p.nvars == 2 and p.evaluate((2, 3)) == 0
    assert str(p) == "x1*x2 - 6"
    q = parse_polynomial("(x1 + 1)^2 - 2*x2")
    assert q.evaluate((3, 8)) == 0
    assert str(parse_polynomial("-x1^3 + 5")) == "-x1^3 + 5"


@pytest.mark.parametrize("text, col", [("x1 +", 5), ("y1", 1), ("x1 + x0", 6),
                                       ("x1 ** 2", 4), ("2 / x1", 1), ("x1^-1", 4)])
def test_parse_errors_report_columns(text, col):
    with pytest.raises(PolyParseError) as exc:
        parse_polynomial(text)
    assert exc.value.col == col


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.integers(-5, 5), st.integers(0, 3), st.integers(0, 2)),
                min_size=1, max_size=4), st.integers(0, 4), st.integers(0, 4))
def test_parser_agrees_with_evaluation(terms, a, b):
    text = " + ".join(f"({c})*x1^{e1}*x2^{e2}" for c, e1, e2 in terms)
    p = parse_polynomial(text)
    assert p.evaluate((a, b)) == sum(c * a ** e1 * b ** e2 for c, e1, e2 in terms)


@pytest.mark.parametrize("text, sol", CASES)
def test_compiled_programs(text, sol):
    cp = compile_poly(parse_polynomial(text))
    low = lower_ir(cp)
    assert len(non_identity_matrices(low.vass)) == 1
    assert run_ir_bounded(cp, sol).all_zero
    assert run_ir_bounded(cp, sol).tests_pass
    run = low.canonical_run(sol)
    assert replay(low.vass, run)[-1] == low.query.target
    assert zero_test_audit(low, run).ok
    wrong = tuple(x + 1 for x in sol)
    assert not run_ir_bounded(cp, wrong).all_zero


def test_macro_usage():
    assert compile_poly(parse_polynomial("x1^2 - 4")).macros.get("square", 0) >= 1
    assert compile_poly(parse_polynomial("x1*x2 - 6")).macros.get("square", 0) >= 3


def test_linear_polynomial_witness():
    low = lower_ir(compile_poly(parse_polynomial("x1 - 2")))
    found = bfs_reach(low.vass, low.query.source, low.query.target,
                      Bounds(max_steps=20, max_abs_value=8))
    assert found.found
    assert zero_test_audit(low, found.run).ok


def test_shared_matrix_powers():
    low = lower_ir(compile_poly(parse_polynomial("x1*x2 - 6")))
    a = low.matrix
    d = len(a)
    ident = identity(d)
    for n in range(1, 9):
        expected = tuple(tuple(ident[i][j] + n * (a[i][j] - ident[i][j]) for j in range(d))
                         for i in range(d))
        assert mat_power(a, n) == expected


def test_program_without_squares_lowers_to_plain_system():
    prog = CounterProgram(counters=["a"], body=[
        Loop((Add(0, 1),), var=0), Loop((Add(0, -1),), guard=0), ZeroTest(0)],
        squares=[], groups={0: [0]}, result=0)
    low = lower_ir(prog)
    assert low.vass.is_zvass()
    run = low.canonical_run((3,))
    assert replay(low.vass, run)[-1] == low.query.target


def test_invalid_programs():
    untested = CounterProgram(["a"], [Add(0, 1)], [], {}, 0)
    with pytest.raises(ProgramError):
        lower_ir(untested)
    modified = CounterProgram(["a"], [ZeroTest(0), Add(0, 1)], [], {}, 0)
    with pytest.raises(ProgramError):
        lower_ir(modified)


def test_wrong_audit_is_reported():
    low = lower_ir(compile_poly(parse_polynomial("x1 - 2")))
    from azvass.core import Run
    # a run that stops at the first test point with a nonzero counter cannot pass
    bad = low.canonical_run((3,))
    report = zero_test_audit(low, Run(bad.start, bad.steps[:len(bad.steps) // 2]))
    assert not report.ok
