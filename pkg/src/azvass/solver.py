"""Reachability decisions.

``reach_zvass`` is exact for identity-matrix systems: a run from ``p(u)`` to
``q(v)`` exists iff some natural transition-count vector balances the flow
from ``p`` to ``q``, sums to ``v - u`` and has a support that is connected
and touches ``p``.  Affine systems with a finite monoid are reduced to that
case; the all-ones class has its own procedure in :mod:`azvass.c1`.
"""

from __future__ import annotations

import enum
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .core import (AffineVass, Bounds, Configuration, Run, VassError, bfs_reach,
                   classify_matrix, identity, mat_vec, replay, vec_add, vec_scale, vec_sub)
from .dioph import (DioSystem, SearchLimit, hilbert_basis, integer_feasible, iter_particulars,
                    rational_feasible)
from .monoid import Finiteness, MonoidCaps, decide_finiteness, generate_monoid
from .reduce import from_origin_system, original_steps, pair_id, reduce_afmp


class NotZVass(VassError):
    """A transition matrix is not the identity."""


class NotReset(VassError):
    """A transition matrix is not a reset matrix."""


class Status(enum.Enum):
    REACHABLE = "reachable"
    UNREACHABLE = "unreachable"
    UNKNOWN = "unknown"


@dataclass
class ParikhWitness:
    counts: dict   # transition index -> number of uses
    run: Run


@dataclass
class Verdict:
    status: Status
    witness: Optional[ParikhWitness] = None
    evidence: Optional[dict] = None   # why the answer is "unreachable"
    reason: Optional[str] = None      # why the answer is "unknown"
    method: str = ""
    stats: dict = field(default_factory=dict)

    @property
    def reachable(self) -> bool:
        return self.status is Status.REACHABLE

    @property
    def unreachable(self) -> bool:
        return self.status is Status.UNREACHABLE

    @property
    def unknown(self) -> bool:
        return self.status is Status.UNKNOWN


def parikh_counts(steps: Sequence[int]) -> dict:
    counts = defaultdict(int)
    for i in steps:
        counts[i] += 1
    return dict(sorted(counts.items()))


def _witness(vass: AffineVass, start: Configuration, steps) -> ParikhWitness:
    return ParikhWitness(parikh_counts(steps), Run(start, tuple(steps)))


# ---------------------------------------------------------------------------
# graph helpers


def _forward(vass: AffineVass, src: str, usable) -> set:
    seen = {src}
    todo = [src]
    while todo:
        s = todo.pop()
        for i in usable:
            t = vass.transitions[i]
            if t.src == s and t.tgt not in seen:
                seen.add(t.tgt)
                todo.append(t.tgt)
    return seen


def _backward(vass: AffineVass, tgt: str, usable) -> set:
    seen = {tgt}
    todo = [tgt]
    while todo:
        s = todo.pop()
        for i in usable:
            t = vass.transitions[i]
            if t.tgt == s and t.src not in seen:
                seen.add(t.src)
                todo.append(t.src)
    return seen


def _component(edges, root) -> set:
    """Vertices connected to ``root`` through undirected ``edges`` (pairs)."""
    adj = defaultdict(set)
    for a, b in edges:
        adj[a].add(b)
        adj[b].add(a)
    seen = {root}
    todo = [root]
    while todo:
        s = todo.pop()
        for n in adj[s]:
            if n not in seen:
                seen.add(n)
                todo.append(n)
    return seen


def flow_balanced(vass: AffineVass, counts: dict, p: str, q: str) -> bool:
    net = defaultdict(int)
    for i, n in counts.items():
        t = vass.transitions[i]
        net[t.tgt] += n
        net[t.src] -= n
    for s in vass.states:
        want = (s == q) - (s == p)
        if net[s] != want:
            return False
    return True


def effect_of(vass: AffineVass, counts: dict) -> tuple:
    total = (0,) * vass.d
    for i, n in counts.items():
        total = vec_add(total, vec_scale(n, vass.transitions[i].vec))
    return total


def euler_path(vass: AffineVass, counts: dict, p: str) -> list:
    """Hierholzer's algorithm on the multigraph where edge ``i`` occurs ``counts[i]`` times."""
    adj = defaultdict(list)
    for i in sorted(counts, reverse=True):
        adj[vass.transitions[i].src].extend([i] * counts[i])
    stack = [(p, None)]
    path = []
    while stack:
        s, e = stack[-1]
        if adj[s]:
            i = adj[s].pop()
            stack.append((vass.transitions[i].tgt, i))
        else:
            stack.pop()
            if e is not None:
                path.append(e)
    path.reverse()
    if len(path) != sum(counts.values()):
        raise VassError("transition counts do not form a connected path")
    return path


# ---------------------------------------------------------------------------
# identity-matrix systems


def reach_zvass(vass: AffineVass, p: str, u, q: str, v, budget: int = 5_000_000) -> Verdict:
    """Exact reachability ``p(u) ->* q(v)`` in an identity-matrix system.

    The answer is Unknown only when the completion search exceeds ``budget``.
    """
    try:
        return _reach_zvass(vass, p, u, q, v, budget)
    except SearchLimit:
        return Verdict(Status.UNKNOWN, reason="Diophantine search budget exhausted",
                       method="parikh", stats={"budget": budget})


def _reach_zvass(vass: AffineVass, p: str, u, q: str, v, budget: int) -> Verdict:
    if not vass.is_zvass():
        raise NotZVass("reach_zvass needs identity matrices only")
    u, v = tuple(u), tuple(v)
    start = Configuration(p, u)
    if p == q and u == v:
        return Verdict(Status.REACHABLE, _witness(vass, start, ()), method="empty-run")

    everything = range(len(vass.transitions))
    fwd = _forward(vass, p, everything)
    if q not in fwd:
        return Verdict(Status.UNREACHABLE, evidence={"reason": "target state unreachable in the control graph"},
                       method="parikh")
    bwd = _backward(vass, q, everything)
    kept = [i for i in everything
            if vass.transitions[i].src in fwd and vass.transitions[i].tgt in bwd]
    # parallel copies of one transition are interchangeable
    reps, seen = [], set()
    for i in kept:
        t = vass.transitions[i]
        key = (t.src, t.tgt, t.vec)
        if key not in seen:
            seen.add(key)
            reps.append(i)

    states = sorted({p, q} | {vass.transitions[i].src for i in reps}
                    | {vass.transitions[i].tgt for i in reps})
    delta = vec_sub(v, u)
    stats = {"columns": len(reps), "rows": len(states) + vass.d}

    def edges_of(js):
        return [(vass.transitions[reps[j]].src, vass.transitions[reps[j]].tgt) for j in js]

    def finish(counts_by_rep):
        counts = {reps[j]: n for j, n in counts_by_rep.items() if n}
        steps = euler_path(vass, counts, p)
        configs = replay(vass, Run(start, tuple(steps)))
        assert configs[-1] == Configuration(q, v), "reconstructed run misses the target"
        assert flow_balanced(vass, counts, p, q) and effect_of(vass, counts) == delta
        stats["run_length"] = len(steps)
        return Verdict(Status.REACHABLE, _witness(vass, start, steps), method="parikh", stats=stats)

    comp = strongly_connected(states, edges_of(range(len(reps))))
    src_c = [comp[vass.transitions[i].src] for i in reps]
    tgt_c = [comp[vass.transitions[i].tgt] for i in reps]
    chains = list(_component_paths(comp[p], comp[q], src_c, tgt_c))
    stats["chains"] = len(chains)
    stats["chains_pruned"] = 0
    stats["particulars"] = 0
    supports = []
    for comps, crossing in chains:
        inner = [j for j in range(len(reps)) if src_c[j] == tgt_c[j] and src_c[j] in comps]
        chain_states = [s for s in states if comp[s] in comps]
        rows, rhs = [], []
        for s in chain_states:
            row = [(vass.transitions[reps[j]].tgt == s) - (vass.transitions[reps[j]].src == s)
                   for j in inner]
            fixed = sum((vass.transitions[reps[j]].tgt == s) - (vass.transitions[reps[j]].src == s)
                        for j in crossing)
            rows.append(row)
            rhs.append((s == q) - (s == p) - fixed)
        for k in range(vass.d):
            rows.append([vass.transitions[reps[j]].vec[k] for j in inner])
            rhs.append(delta[k] - sum(vass.transitions[reps[j]].vec[k] for j in crossing))
        system = DioSystem(rows, rhs, cols=len(inner))
        if not (integer_feasible(system) and rational_feasible(system)):
            stats["chains_pruned"] += 1
            continue
        base = edges_of(crossing)

        def connected(x, base=base, inner=inner) -> bool:
            es = base + edges_of([inner[j] for j, n in enumerate(x) if n])
            if not es:
                return False
            reach = _component(es, p)
            return all(a in reach for a, _ in es)

        def lift(x, crossing=crossing, inner=inner):
            counts = {j: 1 for j in crossing}
            for j, n in zip(inner, x):
                if n:
                    counts[j] = n
            return counts

        # short zero-sum combinations (opposite loops, say) prune the particular search
        small = hilbert_basis(system, budget, max_size=2)
        particulars = []
        for m in iter_particulars(system, budget, small):
            stats["particulars"] += 1
            if connected(m):
                return finish(lift(m))
            particulars.append(m)
        if not particulars:
            continue
        periods = hilbert_basis(system, budget)
        stats["periods"] = stats.get("periods", 0) + len(periods)
        sub_edges = lambda x, inner=inner: edges_of([inner[j] for j, n in enumerate(x) if n])
        for m in particulars:
            chosen = _largest_connected_extension(m, periods, lambda x, m=m: sub_edges(x), p,
                                                  fixed=base)
            if chosen is not None:
                x = list(m)
                for h in chosen:
                    x = [a + b for a, b in zip(x, h)]
                return finish(lift(x))
            supports.append(sorted(reps[j] for j in crossing)
                            + sorted(reps[inner[j]] for j, n in enumerate(m) if n))
    if not supports:
        return Verdict(Status.UNREACHABLE,
                       evidence={"reason": "flow and effect equations have no natural solution",
                                 "supports": []},
                       method="parikh", stats=stats)
    return Verdict(Status.UNREACHABLE,
                   evidence={"reason": "no solution has a connected support through the source state",
                             "supports": [sorted(set(s)) for s in supports]},
                   method="parikh", stats=stats)


def _component_paths(start, goal, src_c, tgt_c):
    """Paths through the component DAG from ``start`` to ``goal``.

    Yields ``(components, crossing)`` where ``crossing`` lists the indices of
    the component-changing transitions taken, each exactly once: a run leaves
    every component it enters for good.
    """
    succ = defaultdict(list)
    for j, (a, b) in enumerate(zip(src_c, tgt_c)):
        if a != b:
            succ[a].append(j)
    alive = {goal}
    changed = True
    while changed:
        changed = False
        for j, (a, b) in enumerate(zip(src_c, tgt_c)):
            if a != b and b in alive and a not in alive:
                alive.add(a)
                changed = True
    if start not in alive:
        return
    stack = [(start, (start,), ())]
    while stack:
        c, comps, crossing = stack.pop()
        if c == goal:
            yield frozenset(comps), crossing
            continue
        for j in succ[c]:
            if tgt_c[j] in alive:
                stack.append((tgt_c[j], comps + (tgt_c[j],), crossing + (j,)))


def strongly_connected(states, edges) -> dict:
    """Map each state to the index of its strongly connected component."""
    succ = defaultdict(list)
    pred = defaultdict(list)
    for a, b in edges:
        succ[a].append(b)
        pred[b].append(a)
    order, seen = [], set()
    for root in states:
        if root in seen:
            continue
        seen.add(root)
        stack = [(root, iter(succ[root]))]
        while stack:
            node, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                stack.pop()
                order.append(node)
            elif nxt not in seen:
                seen.add(nxt)
                stack.append((nxt, iter(succ[nxt])))
    comp = {}
    for root in reversed(order):
        if root in comp:
            continue
        label = len(set(comp.values()))
        comp[root] = label
        todo = [root]
        while todo:
            node = todo.pop()
            for prev in pred[node]:
                if prev not in comp:
                    comp[prev] = label
                    todo.append(prev)
    return comp


def _largest_connected_extension(m, periods, edges_of, p, fixed=()):
    """Greatest set of periods that stays in the component of ``p``.

    Valid period selections are closed under union, so dropping periods that
    leave the component until nothing changes yields the largest one; the
    particular works iff its own edges lie inside the final component.
    """
    base = list(fixed) + edges_of(m)
    chosen = list(periods)
    while True:
        es = list(base)
        for h in chosen:
            es.extend(edges_of(h))
        comp = _component(es, p)
        keep = [h for h in chosen if all(a in comp for a, _ in edges_of(h))]
        if len(keep) == len(chosen):
            break
        chosen = keep
    if not all(a in comp and b in comp for a, b in base):
        return None
    if not base and not chosen:
        return None
    return chosen


# ---------------------------------------------------------------------------
# affine systems


def _lift_reduced(vass, red, res, p, u, q, v, stats, method) -> Verdict:
    """Map a reduced-system verdict back to the source system."""
    if not res.reachable:
        return Verdict(res.status, evidence=res.evidence, reason=res.reason, method=method, stats=stats)
    reduced_steps = res.witness.run.steps
    steps = original_steps(red, reduced_steps)
    start = Configuration(p, tuple(u))
    configs = replay(vass, Run(start, tuple(steps)))
    assert configs[-1] == Configuration(q, tuple(v)), "lifted run misses the target"
    stats["reduced_run"] = list(reduced_steps)
    stats["reduced_states"] = len(red.inner.states)
    stats["reduced_transitions"] = len(red.inner.transitions)
    return Verdict(Status.REACHABLE, _witness(vass, start, steps), method=method, stats=stats)


def reach_from_origin(vass: AffineVass, monoid, p: str, u, q: str, v,
                      elements: Optional[Sequence[int]] = None) -> Verdict:
    """Finite-monoid reachability through the from-origin system.

    ``p(u) ->w q(v)`` iff ``v = M(w) u + w(0)``, and the from-origin system
    has a run ``(q, I)(0) -> (p, M(w))(w(0))`` reading ``w`` backwards.  So
    one identity-matrix query per monoid element ``A`` decides the question:
    ``(q, I)(0) ->* (p, A)(v - A u)``.  ``elements`` restricts the elements
    the suffix products may take.
    """
    u, v = tuple(u), tuple(v)
    system, origin = from_origin_system(vass, monoid, root=q, elements=elements)
    start = pair_id(q, 0)
    zero = (0,) * vass.d
    ks = sorted(set(range(len(monoid))) if elements is None else set(elements))
    tried = []
    stats = {"monoid_size": len(monoid), "origin_states": len(system.states),
             "origin_transitions": len(system.transitions)}
    for k in ks:
        end = pair_id(p, k)
        if end not in system.states:
            continue
        a = monoid.elements[k]
        res = reach_zvass(system, start, zero, end, vec_sub(v, mat_vec(a, u)))
        tried.append(k)
        if res.unknown:
            stats["element"] = k
            return Verdict(Status.UNKNOWN, reason=res.reason, method="from-origin", stats=stats)
        if res.reachable:
            steps = [origin[i] for i in reversed(res.witness.run.steps)]
            begin = Configuration(p, u)
            configs = replay(vass, Run(begin, tuple(steps)))
            assert configs[-1] == Configuration(q, v), "lifted run misses the target"
            stats.update(res.stats)
            stats["element"] = k
            stats["elements_tried"] = len(tried)
            return Verdict(Status.REACHABLE, _witness(vass, begin, steps), method="from-origin",
                           stats=stats)
    stats["elements_tried"] = len(tried)
    return Verdict(Status.UNREACHABLE,
                   evidence={"reason": "no monoid element admits a from-origin run",
                             "elements": tried},
                   method="from-origin", stats=stats)


def reach_affine(vass: AffineVass, p: str, u, q: str, v, caps: Optional[MonoidCaps] = None,
                 oracle: Optional[Bounds] = None, depth: int = 8,
                 route: str = "origin") -> Verdict:
    """Dispatch on the transition monoid and decide ``p(u) ->* q(v)`` where possible.

    Finite monoids go through the from-origin system (``route="origin"``) or
    the full four-stage reduced system (``route="reduced"``).  ``oracle``
    enables a bounded search when no exact procedure applies.
    """
    if route not in ("origin", "reduced"):
        raise ValueError(f"unknown route {route!r}")
    u, v = tuple(u), tuple(v)
    if vass.is_zvass():
        return reach_zvass(vass, p, u, q, v)
    from . import c1  # c1 builds on this module
    if c1.is_c1(vass):
        return c1.decide_c1(c1.normalize_c1(vass), p, u, q, v, depth)
    fin = decide_finiteness(vass.matrices, caps, vass.d)
    stats = {"monoid_status": fin.status.value, "monoid_size": len(fin.monoid)}
    if fin.status is Finiteness.FINITE:
        stats["monoid_norm"] = fin.monoid.norm
        if route == "origin":
            res = reach_from_origin(vass, fin.monoid, p, u, q, v)
            res.stats.update(stats)
            return res
        red = reduce_afmp(vass, p, q, monoid=fin.monoid, prune=True)
        res = reach_zvass(red.inner, red.start, u + (0,) * vass.d, red.end, (0,) * vass.d + v)
        stats.update(res.stats)
        return _lift_reduced(vass, red, res, p, u, q, v, stats, "finite-monoid")
    reason = ("monoid is infinite and outside the all-ones class"
              if fin.status is Finiteness.INFINITE else "monoid closure exceeded its cap")
    if fin.witness is not None:
        stats["monoid_witness"] = list(fin.witness)
    if oracle is not None:
        found = bfs_reach(vass, Configuration(p, u), Configuration(q, v), oracle)
        stats["oracle_visited"] = found.stats.visited
        if found.found:
            return Verdict(Status.REACHABLE, _witness(vass, Configuration(p, u), found.run.steps),
                           method="oracle", stats=stats)
        stats["oracle_pruned"] = found.stats.pruned
    return Verdict(Status.UNKNOWN, reason=reason, method="none", stats=stats)


# ---------------------------------------------------------------------------
# reset systems


def _support(a) -> frozenset:
    return frozenset(i for i in range(len(a)) if a[i][i])


def maximal_chains(elements) -> list:
    """Maximal descending chains of diagonal supports starting at the identity (index 0).

    Each chain is a list of element indices; successors are the supports
    covered by the current one, visited in element order.
    """
    sup = [_support(a) for a in elements]
    n = len(elements)
    below = {i: [j for j in range(n) if sup[j] < sup[i]] for i in range(n)}
    covers = {i: [j for j in below[i] if not any(sup[j] < sup[k] for k in below[i])]
              for i in range(n)}
    chains = []

    def walk(chain):
        nxt = covers[chain[-1]]
        if not nxt:
            chains.append(list(chain))
            return
        for j in nxt:
            walk(chain + [j])

    walk([0])
    return chains


def reach_reset(vass: AffineVass, p: str, u, q: str, v, route: str = "origin") -> Verdict:
    """Reset systems: try the reduction restricted to each maximal chain of supports.

    A run's suffix matrices only shrink, so they lie on one descending
    chain of at most ``d + 1`` supports.
    """
    if route not in ("origin", "reduced"):
        raise ValueError(f"unknown route {route!r}")
    for i, t in enumerate(vass.transitions):
        if not classify_matrix(t.mat).reset:
            raise NotReset(f"transition {i} does not carry a reset matrix")
    u, v = tuple(u), tuple(v)
    monoid = generate_monoid(vass.matrices, MonoidCaps(max_count=2 ** vass.d + 1), vass.d)
    assert monoid.finite
    chains = maximal_chains(monoid.elements)
    tried = []
    for chain in chains:
        if route == "origin":
            res = reach_from_origin(vass, monoid, p, u, q, v, elements=chain)
        else:
            red = reduce_afmp(vass, p, q, monoid=monoid, elements=chain)
            res = reach_zvass(red.inner, red.start, u + (0,) * vass.d, red.end, (0,) * vass.d + v)
        if res.unknown:
            return Verdict(Status.UNKNOWN, reason=res.reason, method="reset-chain",
                           stats={"monoid_size": len(monoid)})
        if res.reachable:
            stats = {"chain": [sorted(_support(monoid.elements[k])) for k in chain],
                     "chains_tried": len(tried) + 1, "monoid_size": len(monoid)}
            if route == "origin":
                res.stats.update(stats)
                res.method = "reset-chain"
                return res
            return _lift_reduced(vass, red, res, p, u, q, v, stats, "reset-chain")
        tried.append([sorted(_support(monoid.elements[k])) for k in chain])
    return Verdict(Status.UNREACHABLE, evidence={"reason": "no chain of supports admits a run",
                                                 "chains": tried},
                   method="reset-chain", stats={"monoid_size": len(monoid)})
