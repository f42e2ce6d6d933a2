import pytest
from hypothesis import given, settings, strategies as st

from azvass.c1 import (NotC1, add_set, attach_gadget, compute_S, decide_c1, delta,
                       delta_abstract, is_c1, level_sets, net_reach_bounded, normalize_c1)
from azvass.core import AffineVass, Bounds, Configuration, Run, bfs_reach, identity, replay
from azvass.upset import UPSet
from tests.helpers import (J2, all_ones_plane, copy_transfer_system, mul_edge_system,
                           random_c1, random_walk)


def test_membership():
    assert is_c1(all_ones_plane())
    assert not is_c1(copy_transfer_system())
    squared = AffineVass.build(2, ["p"], [("p", "p", ((2, 2), (2, 2)), None)])
    assert is_c1(squared)


def test_normalize_keeps_normal_systems():
    sys = normalize_c1(mul_edge_system())
    assert sys.base.transitions == mul_edge_system().transitions
    assert len(sys.t_id) == 1 and len(sys.t_one) == 1


def test_normalize_splits_vector_off_all_ones_edge():
    vass = AffineVass.build(2, ["p", "q"], [("p", "q", J2, (1, -1))])
    sys = normalize_c1(vass)
    first, second = sys.base.transitions
    assert (first.mat, first.vec) == (J2, (0, 0))
    assert (second.mat, second.vec) == (identity(2), (1, -1))
    assert first.tgt == second.src and second.tgt == "q"


def test_normalize_expands_powers():
    vass = AffineVass.build(2, ["p", "q"], [("p", "q", ((2, 2), (2, 2)), None)])
    sys = normalize_c1(vass)
    assert [t.mat for t in sys.base.transitions] == [J2, J2]
    src = Configuration("p", (1, 2))
    direct = replay(vass, Run(src, (0,)))[-1]
    assert replay(sys.base, Run(src, (0, 1)))[-1] == direct


def test_normalize_rejects_other_matrices():
    with pytest.raises(NotC1):
        normalize_c1(copy_transfer_system())


def test_delta_abstraction_examples():
    vass = AffineVass.build(2, ["p", "q"], [("p", "q", None, (1, -3)), ("p", "q", J2, None)])
    net = delta_abstract(normalize_c1(vass))
    assert [(t.op, t.const) for t in net.transitions] == [("add", -2), ("mul", 2)]


@settings(max_examples=100, deadline=None)
@given(st.randoms(use_true_random=False))
def test_delta_abstraction_tracks_entry_sum(rng):
    sys = normalize_c1(random_c1(rng))
    net = delta_abstract(sys)
    start = Configuration(rng.choice(sys.base.states),
                          tuple(rng.randint(-3, 3) for _ in range(sys.d)))
    steps, _ = random_walk(rng, sys.base, start, 6)
    counter = delta(start.values)
    for i, conf in zip(steps, replay(sys.base, Run(start, steps))[1:]):
        counter = net.transitions[i].apply(counter)
        assert counter == delta(conf.values)


# ---------------------------------------------------------------------------
# target sets


def test_target_set_empty_path():
    vass = AffineVass.build(2, ["r"], [("r", "r", J2, None)])
    sys = normalize_c1(vass)
    assert compute_S(sys, "r", (2, 2), "r") == UPSet.finite([4])
    assert compute_S(sys, "r", (2, 3), "r").is_empty()


def test_target_set_with_unit_loops():
    vass = AffineVass.build(2, ["r"], [("r", "r", None, (1, 0)), ("r", "r", None, (0, 1)),
                                       ("r", "r", J2, None)])
    # r(n, n) reaches r(2, 2) for every n <= 2, so S = {2n : n <= 2}
    s = compute_S(normalize_c1(vass), "r", (2, 2), "r")
    assert s == UPSet.ray(4, 2, -1)


def test_add_set_contains_zero_on_the_diagonal():
    sys = normalize_c1(mul_edge_system())
    assert 0 in add_set(sys, "p", "p")
    assert add_set(sys, "p", "p") == UPSet.ray(0, 1)
    assert add_set(sys, "q", "p").is_empty()


# ---------------------------------------------------------------------------
# decision


def test_plane_reachability():
    sys = normalize_c1(all_ones_plane())
    for u, v in [((0, 0), (5, 7)), ((3, 3), (-1, 4))]:
        res = decide_c1(sys, "p", u, "p", v)
        assert res.reachable
        assert res.stats["condition"] == 1


def test_mul_edge_reachable_at_level_one():
    vass = mul_edge_system()
    res = decide_c1(normalize_c1(vass), "p", (0, 0), "q", (2, 2))
    assert res.reachable and res.stats["level"] == 1
    assert replay(vass, res.witness.run)[-1] == Configuration("q", (2, 2))
    assert bfs_reach(vass, Configuration("p", (0, 0)), Configuration("q", (2, 2))).found


def test_mul_edge_unreachable_by_fixpoint():
    vass = mul_edge_system()
    res = decide_c1(normalize_c1(vass), "p", (0, 0), "q", (2, 3))
    assert res.unreachable and "fixpoint" in res.evidence
    assert not bfs_reach(vass, Configuration("p", (0, 0)), Configuration("q", (2, 3)),
                         Bounds(max_steps=12, max_abs_value=40)).found


def test_depth_cap_gives_unknown():
    # double then add one: every level holds a single new value (2, 6, 14, ...)
    vass = AffineVass.build(2, ["p", "q"], [("p", "q", J2, None), ("q", "p", None, (1, 0))])
    res = decide_c1(normalize_c1(vass), "p", (1, 0), "q", (3, 4), depth=2)
    assert res.unknown and res.stats["depth_capped"] == 2
    assert decide_c1(normalize_c1(vass), "p", (1, 0), "q", (7, 7), depth=4).reachable


def _next_level(sys, current, adds):
    """One application of the level operator, written out directly."""
    d = sys.d
    nxt = {s: UPSet.empty() for s in sys.base.states}
    for i in sys.t_one:
        t = sys.base.transitions[i]
        pre = UPSet.empty()
        for s in sys.base.states:
            pre = pre.union(current[s].minkowski_sum(adds[(s, t.src)]))
        nxt[t.tgt] = nxt[t.tgt].union(pre.scale(d))
    return nxt


def check_c1_verdict(vass, p, u, q, v, depth=8):
    """Reachable: the witness replays and the oracle confirms it; fixpoint Unreachable:
    three more levels add nothing and never meet the target sets."""
    sys = normalize_c1(vass)
    res = decide_c1(sys, p, u, q, v, depth)
    if res.reachable:
        run = res.witness.run
        assert replay(vass, run)[-1] == Configuration(q, v)
        configs = replay(vass, run)
        bound = max(max(abs(x) for x in c.values) for c in configs)
        found = bfs_reach(vass, Configuration(p, u), Configuration(q, v),
                          Bounds(max_steps=max(len(run), 1), max_abs_value=max(bound, 1)))
        assert found.found
    elif res.unreachable:
        states = sys.base.states
        adds = {(a, b): add_set(sys, a, b) for a in states for b in states}
        levels = level_sets(sys, p, u, depth, adds)
        assert levels.status == "fixpoint"
        targets = {r: compute_S(sys, q, v, r) for r in states}
        union = dict(levels.union)
        current = levels.levels[-1]
        for _ in range(3):
            current = _next_level(sys, current, adds)
            for r in states:
                assert current[r].is_subset(union[r])
                assert current[r].intersect_nonempty(targets[r]) is None
        assert not bfs_reach(vass, Configuration(p, u), Configuration(q, v),
                             Bounds(max_steps=8, max_abs_value=60)).found
    return res


@settings(max_examples=30, deadline=None)
@given(st.randoms(use_true_random=False))
def test_random_c1_systems(rng):
    vass = random_c1(rng)
    p = rng.choice(vass.states)
    u = tuple(rng.randint(-2, 2) for _ in range(2))
    if rng.random() < 0.5:
        _, end = random_walk(rng, vass, Configuration(p, u), 5)
        q, v = end.state, end.values
    else:
        q, v = rng.choice(vass.states), tuple(rng.randint(-4, 4) for _ in range(2))
    check_c1_verdict(vass, p, u, q, v)


# ---------------------------------------------------------------------------
# gadget cross-check


def test_gadget_shapes():
    net = delta_abstract(normalize_c1(mul_edge_system()))
    single, exit_ = attach_gadget(net, UPSet.finite([4]), "q")
    added = single.transitions[len(net.transitions):]
    assert [(t.op, t.const) for t in added] == [("mul", 2), ("add", -4)]
    assert added[-1].tgt == exit_
    ray, exit_ = attach_gadget(net, UPSet.ray(0, 3), "q")
    added = ray.transitions[len(net.transitions):]
    assert [(t.op, t.const) for t in added] == [("mul", 2), ("add", 0), ("add", -3), ("add", 0)]


def test_gadget_agrees_with_level_one_example():
    sys = normalize_c1(mul_edge_system())
    net = delta_abstract(sys)
    for v, expected in [((2, 2), True), ((2, 3), False)]:
        S = compute_S(sys, "q", v, "q")
        gnet, exit_ = attach_gadget(net, S, "q")
        hit = net_reach_bounded(gnet, "p", 0, exit_, 0, max_steps=12, max_abs=60)
        assert (hit is not None) == expected
        assert decide_c1(sys, "p", (0, 0), "q", v).reachable == expected
