"""The twelve acceptance criteria, each with its time limit.

Every criterion prints one ``PASS``/``FAIL`` line; the lines are repeated in
the terminal summary of the pytest run.
"""
import functools
import itertools
import random
import time

from azvass.c1 import decide_c1, normalize_c1
from azvass.core import (Bounds, Configuration, Run, apply_transition, bfs_reach,
                         classify_matrix, mat_mul, mat_power, reachable_configurations, replay, Transition)
from azvass.dioph import DioSystem, ch16_bound, minimal_solutions
from azvass.formula import FormulaError, evaluate_script, export_formula, to_smtlib, witness_assignment
from azvass.gen.lba import Outcome, gen_lba, simulate_lba, tape_invariant
from azvass.gen.pcp import PcpInstance, bit_gadget, gen_pcp, solve_pcp_bounded
from azvass.gen.poly import (compile_poly, lower_ir, non_identity_matrices, parse_polynomial,
                             run_ir_bounded, zero_test_audit)
from azvass.monoid import Finiteness, decide_finiteness
from azvass.reduce import check_size_bounds, original_steps, reduce_afmp, stage_sequence_ok
from azvass.solver import reach_affine, reach_reset, reach_zvass
from azvass.upset import intersect_nonempty
from tests.conftest import ACCEPTANCE
from tests.helpers import (COPY, LBAS, TRANSFER, all_ones_plane, box_minimal,
                           copy_transfer_system, mul_edge_system, random_afmp, random_c1,
                           random_query, random_reset, random_walk, random_zvass,
                           zvass_reachable_within)
from tests.test_c1 import check_c1_verdict
from tests.test_upset import WINDOW, build, clip, ref_member, ref_set, ref_sum, window


def criterion(num, title, limit):
    """Record PASS/FAIL for criterion ``num``; exceeding ``limit`` seconds is a failure."""
    def wrap(fn):
        @functools.wraps(fn)
        def run(*args, **kwargs):
            t0 = time.perf_counter()
            try:
                fn(*args, **kwargs)
                elapsed = time.perf_counter() - t0
                assert elapsed < limit, f"took {elapsed:.1f}s, limit {limit}s"
            except BaseException as exc:
                line = f"criterion {num:2d} FAIL  {title}: {type(exc).__name__} {exc}"
                ACCEPTANCE[num] = line.splitlines()[0]
                print(ACCEPTANCE[num])
                raise
            ACCEPTANCE[num] = f"criterion {num:2d} PASS  {title} ({elapsed:.1f}s)"
            print(ACCEPTANCE[num])
        return run
    return wrap


def replays_to(vass, source, steps, target):
    return replay(vass, Run(source, tuple(steps)))[-1] == target


@criterion(1, "copy-transfer monoid is infinite, (A*B)^n has entries 2^(n-1)", 1)
def test_criterion_01_monoid_infinite():
    fin = decide_finiteness([COPY, TRANSFER])
    assert fin.status is Finiteness.INFINITE
    ab = mat_mul(COPY, TRANSFER)
    for n in range(1, 9):
        assert mat_power(ab, n) == ((2 ** (n - 1),) * 2,) * 2


@criterion(2, "copy-transfer reachable q-set under cap 64 is {(2^n, 2^n) : n <= 6}", 5)
def test_criterion_02_reachable_set():
    vass = copy_transfer_system()
    cap = Bounds(max_abs_value=64)
    src = Configuration("p", (1, 1))
    seen = {c.values for c in reachable_configurations(vass, src, cap) if c.state == "q"}
    assert seen == {(2 ** n, 2 ** n) for n in range(7)}
    hits = {(a, b) for a in range(-64, 65) for b in range(-64, 65)
            if bfs_reach(vass, src, Configuration("q", (a, b)), cap).found}
    assert hits == seen


@criterion(3, "finite-monoid reduction: size bounds and bounded oracle agreement", 120)
def test_criterion_03_reduction():
    rng = random.Random(3)
    bounds = Bounds(max_steps=8, max_abs_value=8)
    found = 0
    for _ in range(100):
        vass = random_afmp(rng, max_d=3, max_states=3, max_trans=4)
        p, u, q, v = random_query(rng, vass, bound=2, walk=0.6, max_len=4)
        red = reduce_afmp(vass, p, q)
        check_size_bounds(red)
        src, tgt = Configuration(p, u), Configuration(q, v)
        rsrc, rtgt = red.start_config(u), red.end_config(v)
        direct = bfs_reach(vass, src, tgt, bounds)
        reduced = bfs_reach(red.inner, rsrc, rtgt, Bounds(max_steps=12, max_abs_value=8))
        steps = reduced.run.steps if reduced.found else None
        if direct.found:
            found += 1
            assert replays_to(vass, src, direct.run.steps, tgt)
            if steps is None:      # beyond the caps: decide the reduced side exactly
                res = reach_zvass(red.inner, red.start, rsrc.values, red.end, rtgt.values)
                assert res.reachable
                steps = res.witness.run.steps
        if steps is not None:
            found += not direct.found
            assert replays_to(red.inner, rsrc, steps, rtgt)
            assert stage_sequence_ok(red, steps)
            assert replays_to(vass, src, original_steps(red, steps), tgt)
    assert found >= 30, f"only {found} instances exercised the agreement check"


@criterion(4, "Z-VASS solver against exhaustive runs of length <= 8", 120)
def test_criterion_04_zvass_solver():
    rng = random.Random(4)
    for _ in range(100):
        vass = random_zvass(rng, max_d=3, max_trans=5, entry=2)
        p, u, q, v = random_query(rng, vass, bound=3, walk=0.5)
        res = reach_zvass(vass, p, u, q, v)
        assert not res.unknown
        if res.reachable:
            assert replay(vass, res.witness.run)[-1] == Configuration(q, v)
        else:
            assert not zvass_reachable_within(vass, Configuration(p, u), Configuration(q, v), 8)


@criterion(5, "minimal solutions match box-12 search and respect the size bound", 60)
def test_criterion_05_dioph():
    rng = random.Random(5)
    for _ in range(100):
        m, k = rng.randint(1, 2), rng.randint(1, 4)
        A = [[rng.randint(-3, 3) for _ in range(k)] for _ in range(m)]
        c = [rng.randint(-3, 3) for _ in range(m)]
        sys = DioSystem(A, c)
        basis = minimal_solutions(sys)
        bound = ch16_bound(sys)
        assert all(max(x) <= bound for x in basis.particulars + basis.periods)
        assert {x for x in basis.particulars if max(x, default=0) <= 12} == box_minimal(A, c, 12)
        assert {x for x in basis.periods if max(x) <= 12} == \
            box_minimal(A, [0] * m, 12, nonzero=True)


@criterion(6, "reset systems: reset route = general route = bounded oracle", 120)
def test_criterion_06_reset():
    rng = random.Random(6)
    for _ in range(50):
        vass = random_reset(rng, max_d=4)
        p, u, q, v = random_query(rng, vass, bound=2, walk=0.6, max_len=4)
        a = reach_reset(vass, p, u, q, v)
        b = reach_affine(vass, p, u, q, v)
        assert a.status == b.status and not a.unknown
        src, tgt = Configuration(p, u), Configuration(q, v)
        oracle = bfs_reach(vass, src, tgt, Bounds(max_steps=6, max_abs_value=12))
        if oracle.found:
            assert a.reachable
        if a.reachable:
            for res in (a, b):
                assert replay(vass, res.witness.run)[-1] == tgt
            confs = replay(vass, a.witness.run)
            cap = max(max((abs(x) for x in c.values), default=0) for c in confs)
            assert bfs_reach(vass, src, tgt, Bounds(max_steps=max(len(a.witness.run), 1),
                                                    max_abs_value=max(cap, 1))).found


@criterion(7, "LBA pipeline agrees with simulation on all length-2 words", 120)
def test_criterion_07_lba():
    for lba in LBAS.values():
        for word in ("".join(w) for w in itertools.product("ab", repeat=2)):
            vass, query, lay = gen_lba(lba, word)
            assert all(classify_matrix(t.mat).permutation for t in vass.transitions)
            res = reach_affine(vass, query.source.state, query.source.values,
                               query.target.state, query.target.values)
            assert not res.unknown
            assert res.reachable == (simulate_lba(lba, word) is Outcome.ACCEPT)
            if res.reachable:
                confs = replay(vass, res.witness.run)
                assert confs[-1] == query.target
                assert all(tape_invariant(lay, c.values) for c in confs)


@criterion(8, "PCP pipeline finds a replaying witness; bit gadget net effect", 60)
def test_criterion_08_pcp():
    inst = PcpInstance((("0", "00"), ("01", "1")))
    assert solve_pcp_bounded(inst, 4) == (1, 2)
    vass, query = gen_pcp(inst)
    found = bfs_reach(vass, query.source, query.target, Bounds(max_steps=25, max_abs_value=64))
    assert found.found
    assert replay(vass, found.run)[-1] == query.target
    rng = random.Random(8)
    for _ in range(20):
        x, y, bit = rng.randint(0, 10 ** 6), rng.randint(0, 10 ** 6), rng.randint(0, 1)
        (m1, b1), (m2, b2) = bit_gadget(0, bit)
        conf = Configuration("a", (x, y, 0))
        conf = apply_transition(Transition("a", "b", m1, b1), conf)
        conf = apply_transition(Transition("b", "c", m2, b2), conf)
        assert conf.values == (2 * x + bit, y, 0)


@criterion(9, "polynomial compiler: one non-identity matrix, IR roots, audited witness", 120)
def test_criterion_09_poly():
    for text, root in (("x1 - 2", (2,)), ("x1^2 - 4", (2,)), ("x1*x2 - 6", (2, 3))):
        cp = compile_poly(parse_polynomial(text))
        low = lower_ir(cp)
        assert len(non_identity_matrices(low.vass)) == 1
        assert run_ir_bounded(cp, root).all_zero
        run = low.canonical_run(root)
        assert replay(low.vass, run)[-1] == low.query.target
        assert zero_test_audit(low, run).ok
    low = lower_ir(compile_poly(parse_polynomial("x1 - 2")))
    found = bfs_reach(low.vass, low.query.source, low.query.target,
                      Bounds(max_steps=20, max_abs_value=8))
    assert found.found
    assert replay(low.vass, found.run)[-1] == low.query.target
    assert zero_test_audit(low, found.run).ok


@criterion(10, "all-ones class: fixtures and 30 random systems", 180)
def test_criterion_10_c1():
    plane = normalize_c1(all_ones_plane())
    assert decide_c1(plane, "p", (0, 0), "p", (5, 7)).reachable
    assert decide_c1(plane, "p", (3, 3), "p", (-1, 4)).reachable
    mul = mul_edge_system()
    assert check_c1_verdict(mul, "p", (0, 0), "q", (2, 2)).reachable
    res = check_c1_verdict(mul, "p", (0, 0), "q", (2, 3))
    assert res.unreachable and "fixpoint" in res.evidence
    rng = random.Random(10)
    for _ in range(30):
        vass = random_c1(rng)
        p = rng.choice(vass.states)
        u = tuple(rng.randint(-2, 2) for _ in range(2))
        if rng.random() < 0.5:
            _, end = random_walk(rng, vass, Configuration(p, u), 5)
            q, v = end.state, end.values
        else:
            q, v = rng.choice(vass.states), tuple(rng.randint(-4, 4) for _ in range(2))
        check_c1_verdict(vass, p, u, q, v)


@criterion(11, "ultimately periodic sets agree with window semantics on [-200, 200]", 30)
def test_criterion_11_upset():
    rng = random.Random(11)
    full = set(range(-WINDOW, WINDOW + 1))
    for _ in range(200):
        sa, sb = _shape(rng), _shape(rng)
        a, b = build(sa), build(sb)
        ra, rb = ref_set(sa), ref_set(sb)
        c, k = rng.randint(-20, 20), rng.randint(0, 4)
        assert window(a.union(b)) == clip(ra | rb)
        assert window(a.intersection(b)) == clip(ra & rb)
        assert window(a.difference(b)) == clip(ra - rb)
        assert window(a.complement()) == full - clip(ra)
        assert window(a.negate()) == clip({-n for n in ra})
        assert window(a.add_constant(c)) == clip({n + c for n in ra})
        assert window(a.scale(k)) == clip({k * n for n in ra})
        assert window(a.minkowski_sum(b)) == clip(ref_sum(ra, rb))
        assert a.is_subset(b) == (ra <= rb)
        assert a.equal(b) == (ra == rb)
        w = intersect_nonempty(a, b)
        assert (w is None) == (not ra & rb)
        assert w is None or (ref_member(sa, w) and ref_member(sb, w))


def _shape(rng):
    out = []
    for _ in range(rng.randint(0, 4)):
        kind = rng.choice(["point", "point", "ray", "line"])
        if kind == "point":
            out.append(("point", rng.randint(-30, 30)))
        elif kind == "ray":
            out.append(("ray", rng.randint(-30, 30), rng.randint(1, 6), rng.choice([1, -1])))
        else:
            out.append(("line", rng.randint(-30, 30), rng.randint(1, 6)))
    return out


@criterion(12, "formula export: witnesses satisfy it, random assignments refute it", 60)
def test_criterion_12_formula():
    rng = random.Random(12)
    reachable = unreachable = 0
    while reachable < 10 or unreachable < 10:
        vass = random_afmp(rng, max_d=2, max_states=2, max_trans=3)
        p, u, q, v = random_query(rng, vass, bound=2, walk=0.5, max_len=4)
        res = reach_affine(vass, p, u, q, v)
        if res.reachable and reachable < 10:
            reachable += 1
            for f in _formulas(vass, p, q):
                if f.reduced:
                    red = reduce_afmp(vass, p, q)
                    src, tgt = red.start_config(u).values, red.end_config(v).values
                else:
                    src, tgt = u, v
                inner = reach_zvass(f.inner, f.start, src, f.end, tgt)
                assert inner.reachable
                env = witness_assignment(f, u, v, inner.witness.counts)
                assert f.holds(env)
                assert evaluate_script(to_smtlib(f, (u, v)), env)
        elif res.unreachable and unreachable < 10:
            unreachable += 1
            for f in _formulas(vass, p, q):
                script = to_smtlib(f, (u, v))
                for _ in range(50):
                    env = {name: rng.randint(-3, 3) for name in f.consts}
                    env.update(zip(f.u_names, u))
                    env.update(zip(f.v_names, v))
                    assert not evaluate_script(script, env)


def _formulas(vass, p, q):
    """The distance encoding always; the supports encoding when it stays under its cap."""
    out = [export_formula(vass, p, q, encoding="distance")]
    try:
        out.append(export_formula(vass, p, q, encoding="supports"))
    except FormulaError:
        pass
    return out
