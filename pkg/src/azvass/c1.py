"""Reachability for systems whose matrices are powers of the all-ones matrix.

After normalization every transition either adds a vector (matrix ``I``) or
multiplies by the all-ones matrix ``J`` with a zero vector.  A run either
never multiplies, which is plain Z-VASS reachability, or its last
multiplication lands in some ``r(n, ..., n)`` followed by additive steps to
the target.  Since ``J x = (s, ..., s)`` with ``s`` the entry sum of ``x``,
the values reachable right after a multiplication are tracked exactly as
ultimately periodic sets of entry sums, level by level.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Optional

from .core import (AffineVass, Configuration, Run, Transition, VassError, fresh_state,
                   identity, ones_matrix, replay, zero_vector)
from .dioph import DioSystem, SolutionBasis, minimal_solutions, project_to_int
from .solver import Status, Verdict, _witness, reach_zvass
from .upset import UPSet


class NotC1(VassError):
    """A matrix is neither the identity nor a power of the all-ones matrix."""


def _power_of(c: int, d: int) -> bool:
    if c < 1:
        return False
    while c % d == 0:
        c //= d
    return c == 1


def all_ones_power(a, d: int) -> Optional[int]:
    """``n`` with ``a = J^n`` (``J^n`` has entries ``d^(n-1)``), else ``None``."""
    c = a[0][0]
    if any(x != c for row in a for x in row) or not _power_of(c, d):
        return None
    n = 1
    while c > 1:
        c //= d
        n += 1
    return n


def is_c1(vass: AffineVass) -> bool:
    """Every matrix is ``I`` or a power of ``J`` and at least one is not ``I``; ``d >= 2``."""
    d = vass.d
    if d < 2:
        return False
    ident = identity(d)
    seen_power = False
    for t in vass.transitions:
        if t.mat == ident:
            continue
        if all_ones_power(t.mat, d) is None:
            return False
        seen_power = True
    return seen_power


@dataclass
class C1System:
    base: AffineVass
    t_id: tuple                  # indices of identity transitions
    t_one: tuple                 # indices of all-ones transitions
    source: AffineVass
    origin: tuple                # per base transition: (source index, completes it?)

    @property
    def d(self) -> int:
        return self.base.d

    def lift_steps(self, steps) -> list:
        return [self.origin[i][0] for i in steps if self.origin[i][1]]


def normalize_c1(vass: AffineVass) -> C1System:
    """Expand ``J^n`` into ``n`` chained ``J`` steps and split ``(J, b)`` into ``J`` then ``+b``."""
    d = vass.d
    ident, one, zero = identity(d), ones_matrix(d), zero_vector(d)
    states = list(vass.states)
    taken = set(states)
    trans, origin = [], []

    def fresh(hint):
        s = fresh_state(taken, hint)
        taken.add(s)
        states.append(s)
        return s

    for i, t in enumerate(vass.transitions):
        if t.mat == ident:
            trans.append(t)
            origin.append((i, True))
            continue
        n = all_ones_power(t.mat, d)
        if n is None:
            raise NotC1(f"transition {i} has a matrix outside the all-ones class")
        cur = t.src
        for k in range(n):
            last = k == n - 1
            nxt = t.tgt if last and not any(t.vec) else fresh(f"{t.src}~{i}.{k}")
            trans.append(Transition(cur, nxt, one, zero))
            origin.append((i, last and not any(t.vec)))
            cur = nxt
        if any(t.vec):
            trans.append(Transition(cur, t.tgt, ident, t.vec))
            origin.append((i, True))
    base = AffineVass(d, tuple(states), tuple(trans))
    t_id = tuple(i for i, t in enumerate(trans) if t.mat == ident)
    t_one = tuple(i for i, t in enumerate(trans) if t.mat != ident)
    return C1System(base, t_id, t_one, vass, tuple(origin))


# ---------------------------------------------------------------------------
# one-counter abstraction


@dataclass(frozen=True)
class NetTransition:
    src: str
    op: str      # "add" or "mul"
    const: int
    tgt: str

    def apply(self, n: int) -> int:
        return n + self.const if self.op == "add" else n * self.const


@dataclass
class OneCounterNet:
    states: tuple
    transitions: tuple


def delta(vec) -> int:
    return sum(vec)


def delta_abstract(sys: C1System) -> OneCounterNet:
    trans = []
    for t in sys.base.transitions:
        if t.mat == identity(sys.d):
            trans.append(NetTransition(t.src, "add", delta(t.vec), t.tgt))
        else:
            trans.append(NetTransition(t.src, "mul", sys.d, t.tgt))
    return OneCounterNet(sys.base.states, tuple(trans))


def net_reach_bounded(net: OneCounterNet, src: str, c0: int, tgt: str, value: int,
                      max_steps: int = 30, max_abs: int = 200) -> Optional[list]:
    """Breadth-first search over ``(state, counter)`` pairs; returns transition indices."""
    start = (src, c0)
    parents = {start: None}
    frontier = [start]
    if start == (tgt, value):
        return []
    for _ in range(max_steps):
        nxt = []
        for conf in frontier:
            for i, t in enumerate(net.transitions):
                if t.src != conf[0]:
                    continue
                n = t.apply(conf[1])
                if abs(n) > max_abs:
                    continue
                c = (t.tgt, n)
                if c in parents:
                    continue
                parents[c] = (conf, i)
                if c == (tgt, value):
                    steps = []
                    while parents[c] is not None:
                        c, j = parents[c]
                        steps.append(j)
                    return steps[::-1]
                nxt.append(c)
        frontier = nxt
    return None


# ---------------------------------------------------------------------------
# additive parts


def _restrict(vass: AffineVass, indices) -> AffineVass:
    return AffineVass(vass.d, vass.states, tuple(vass.transitions[i] for i in indices))


def connected_supports(vass: AffineVass, indices, s0: str, s1: str):
    """Edge sets (as sorted index tuples) whose undirected graph is connected and
    contains ``s0``, restricted to edges that can lie on a path ``s0 -> s1``."""
    fwd = {s0}
    todo = [s0]
    while todo:
        s = todo.pop()
        for i in indices:
            t = vass.transitions[i]
            if t.src == s and t.tgt not in fwd:
                fwd.add(t.tgt)
                todo.append(t.tgt)
    bwd = {s1}
    todo = [s1]
    while todo:
        s = todo.pop()
        for i in indices:
            t = vass.transitions[i]
            if t.tgt == s and t.src not in bwd:
                bwd.add(t.src)
                todo.append(t.src)
    usable = [i for i in indices
              if vass.transitions[i].src in fwd and vass.transitions[i].tgt in bwd]
    seen = set()
    queue = deque()
    for i in usable:
        t = vass.transitions[i]
        if s0 in (t.src, t.tgt):
            key = (i,)
            if key not in seen:
                seen.add(key)
                queue.append(key)
    while queue:
        sup = queue.popleft()
        yield sup
        verts = {vass.transitions[i].src for i in sup} | {vass.transitions[i].tgt for i in sup}
        for i in usable:
            if i in sup:
                continue
            t = vass.transitions[i]
            if t.src in verts or t.tgt in verts:
                key = tuple(sorted(sup + (i,)))
                if key not in seen:
                    seen.add(key)
                    queue.append(key)


def _flow_rows(vass, sup, s0, s1):
    states = sorted({vass.transitions[i].src for i in sup} | {vass.transitions[i].tgt for i in sup}
                    | {s0, s1})
    rows, rhs = [], []
    for s in states:
        coeff = [(vass.transitions[i].tgt == s) - (vass.transitions[i].src == s) for i in sup]
        # x = 1 + x' on the support
        rows.append(coeff)
        rhs.append((s == s1) - (s == s0) - sum(coeff))
    return rows, rhs


def _basis(rows, rhs, cols) -> SolutionBasis:
    return minimal_solutions(DioSystem(rows, rhs, cols=cols))


def add_set(sys: C1System, s0: str, s1: str) -> UPSet:
    """Entry-sum effects of identity-transition paths from ``s0`` to ``s1``."""
    vass = sys.base
    result = UPSet.finite([0]) if s0 == s1 else UPSet.empty()
    for sup in connected_supports(vass, sys.t_id, s0, s1):
        rows, rhs = _flow_rows(vass, sup, s0, s1)
        basis = _basis(rows, rhs, len(sup))
        if not basis.particulars:
            continue
        weights = [delta(vass.transitions[i].vec) for i in sup]
        offset = sum(weights)
        result = result.union(project_to_int(basis, weights).add_constant(offset))
    return result


def compute_S(sys: C1System, q: str, v, r: str) -> UPSet:
    """``{d n : r(n, ..., n) ->* q(v)}`` using identity transitions only."""
    vass = sys.base
    d = sys.d
    v = tuple(v)
    result = UPSet.empty()
    if r == q and all(x == v[0] for x in v):
        result = UPSet.finite([d * v[0]])
    for sup in connected_supports(vass, sys.t_id, r, q):
        rows, rhs = _flow_rows(vass, sup, r, q)
        k = len(sup)
        rows = [row + [0, 0] for row in rows]
        for c in range(d):
            col = [vass.transitions[i].vec[c] for i in sup]
            rows.append(col + [1, -1])
            rhs.append(v[c] - sum(col))
        basis = _basis(rows, rhs, k + 2)
        if not basis.particulars:
            continue
        weights = [0] * k + [d, -d]
        result = result.union(project_to_int(basis, weights))
    return result


# ---------------------------------------------------------------------------
# level iteration


@dataclass
class LevelSets:
    levels: list = field(default_factory=list)    # levels[k-1][state] = V_k(state)
    union: dict = field(default_factory=dict)     # accumulated U_k
    status: str = "running"                       # "fixpoint" or "depth-capped"
    k: int = 0


def _states_union(a: dict, b: dict) -> dict:
    return {s: a[s].union(b[s]) for s in a}


def level_sets(sys: C1System, p: str, u, depth: int, adds: dict) -> LevelSets:
    """Iterate ``V_k`` until the accumulated union stops growing or ``depth`` levels.

    ``adds[(s, s')]`` is the additive effect set from ``s`` to ``s'``.
    """
    vass = sys.base
    d = sys.d
    states = vass.states
    empty = UPSet.empty()
    c0 = delta(u)
    out = LevelSets(union={s: empty for s in states})
    current = None
    for k in range(1, depth + 1):
        nxt = {s: empty for s in states}
        for i in sys.t_one:
            t = vass.transitions[i]
            if current is None:
                pre = adds[(p, t.src)].add_constant(c0)
            else:
                pre = empty
                for s in states:
                    if not current[s].is_empty():
                        pre = pre.union(current[s].minkowski_sum(adds[(s, t.src)]))
            nxt[t.tgt] = nxt[t.tgt].union(pre.scale(d))
        out.levels.append(nxt)
        new_union = _states_union(out.union, nxt)
        out.k = k
        if new_union == out.union:
            out.union = new_union
            out.status = "fixpoint"
            return out
        out.union = new_union
        current = nxt
    out.status = "depth-capped"
    return out


def _segment(sys: C1System, s0: str, s1: str, amount: int) -> list:
    """Identity-transition path ``s0 -> s1`` whose entry-sum effect is ``amount``."""
    vass = sys.base
    flat = AffineVass(1, vass.states,
                      tuple(Transition(vass.transitions[i].src, vass.transitions[i].tgt,
                                       ((1,),), (delta(vass.transitions[i].vec),))
                            for i in sys.t_id))
    res = reach_zvass(flat, s0, (0,), s1, (amount,))
    assert res.reachable, "additive segment promised by the effect set is missing"
    return [sys.t_id[i] for i in res.witness.run.steps]


def decide_c1(sys: C1System, p: str, u, q: str, v, depth: int = 8) -> Verdict:
    """Decide ``p(u) ->* q(v)``; ``depth`` caps the number of multiplications explored."""
    u, v = tuple(u), tuple(v)
    vass = sys.base
    source = sys.source
    d = sys.d
    if d == 1:
        return reach_zvass(_restrict(vass, range(len(vass.transitions))), p, u, q, v)
    t_id_sys = _restrict(vass, sys.t_id)
    cond1 = reach_zvass(t_id_sys, p, u, q, v)
    stats = {"condition1": cond1.status.value}
    if cond1.reachable:
        steps = [sys.t_id[i] for i in cond1.witness.run.steps]
        return _finish(sys, p, u, q, v, steps, stats | {"condition": 1})

    states = vass.states
    adds = {(a, b): add_set(sys, a, b) for a in states for b in states}
    targets = {r: compute_S(sys, q, v, r) for r in states}
    levels = level_sets(sys, p, u, depth, adds)
    stats["levels"] = levels.k
    for k, lv in enumerate(levels.levels, start=1):
        for r in states:
            m = lv[r].intersect_nonempty(targets[r])
            if m is None:
                continue
            steps = _trace(sys, p, u, levels, adds, k, r, m)
            n = m // d
            tail = reach_zvass(t_id_sys, r, (n,) * d, q, v)
            assert tail.reachable, "final additive segment promised by S is missing"
            steps += [sys.t_id[i] for i in tail.witness.run.steps]
            return _finish(sys, p, u, q, v, steps, stats | {"condition": 2, "level": k, "via": r})
    if cond1.unknown:
        return Verdict(Status.UNKNOWN, reason=cond1.reason, method="all-ones", stats=stats)
    if levels.status == "fixpoint":
        return Verdict(Status.UNREACHABLE,
                       evidence={"reason": "no additive run and the multiplication levels "
                                           "reached a fixpoint without meeting the target sets",
                                 "fixpoint": levels.k},
                       method="all-ones", stats=stats | {"fixpoint": levels.k})
    return Verdict(Status.UNKNOWN, reason=f"depth cap {depth} reached before a fixpoint",
                   method="all-ones", stats=stats | {"depth_capped": depth})


def _trace(sys, p, u, levels, adds, k, r, m) -> list:
    """Steps from ``p(u)`` ending with a multiplication into ``r`` with entry sum ``m``."""
    vass = sys.base
    d = sys.d
    c0 = delta(u)
    tail = []
    while True:
        found = None
        for i in sys.t_one:
            t = vass.transitions[i]
            if t.tgt != r or m % d:
                continue
            want = m // d
            if k == 1:
                if (want - c0) in adds[(p, t.src)]:
                    found = (i, p, c0)
                    break
                continue
            for s in vass.states:
                prev = levels.levels[k - 2][s]
                back = adds[(s, t.src)].negate().add_constant(want)
                m2 = prev.intersect_nonempty(back)
                if m2 is not None:
                    found = (i, s, m2)
                    break
            if found:
                break
        assert found is not None, "level set element without a predecessor"
        i, s, before = found
        t = vass.transitions[i]
        tail = _segment(sys, s, t.src, m // d - before) + [i] + tail
        if k == 1:
            return tail
        k, r, m = k - 1, s, before


def _finish(sys, p, u, q, v, steps, stats) -> Verdict:
    base_run = Run(Configuration(p, u), tuple(steps))
    configs = replay(sys.base, base_run)
    assert configs[-1] == Configuration(q, v), "assembled run misses the target"
    orig = sys.lift_steps(steps)
    start = Configuration(p, u)
    assert replay(sys.source, Run(start, tuple(orig)))[-1] == Configuration(q, v)
    return Verdict(Status.REACHABLE, _witness(sys.source, start, orig), method="all-ones",
                   stats=stats)


# ---------------------------------------------------------------------------
# gadget cross-check


def attach_gadget(net: OneCounterNet, S: UPSet, r: str):
    """Copy every multiplication into ``r`` towards a gadget that subtracts an element of ``S``.

    Returns the extended net and the exit state; reaching the exit with
    counter 0 means some multiplication into ``r`` produced a value of ``S``.
    """
    taken = set(net.states)
    entry = fresh_state(taken, f"{r}_gadget")
    taken.add(entry)
    exit_ = fresh_state(taken, f"{r}_exit")
    taken.add(exit_)
    states = list(net.states) + [entry, exit_]
    trans = list(net.transitions)
    for t in net.transitions:
        if t.op == "mul" and t.tgt == r:
            trans.append(NetTransition(t.src, "mul", t.const, entry))
    points, rays, lines = S.decompose()
    for f in points:
        trans.append(NetTransition(entry, "add", -f, exit_))
    expanded = list(rays)
    for b, a in lines:
        expanded += [(b, a, 1), (b, a, -1)]
    for j, (b, a, direction) in enumerate(expanded):
        loop = fresh_state(taken, f"{r}_ray{j}")
        taken.add(loop)
        states.append(loop)
        trans.append(NetTransition(entry, "add", -b, loop))
        trans.append(NetTransition(loop, "add", -a * direction, loop))
        trans.append(NetTransition(loop, "add", 0, exit_))
    return OneCounterNet(tuple(states), tuple(trans)), exit_
