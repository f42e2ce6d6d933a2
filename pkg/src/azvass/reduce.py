"""Reduction of finite-monoid affine Z-VASS to plain Z-VASS, and cover/reach translations.

The reduced system simulates a path of the source backwards on its last ``d``
counters while tracking the matrix of the suffix read so far in its control
state, then multiplies the stored matrix into the first ``d`` counters.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .core import (AffineVass, Configuration, Query, Transition, VassError, block_diag,
                   fresh_state, identity, mat_mul, mat_norm, mat_vec, unit_vector,
                   vec_scale, zero_vector)
from .monoid import Finiteness, MatrixMonoid, MonoidCaps, decide_finiteness


class InfiniteMonoid(VassError):
    def __init__(self, witness=None):
        super().__init__("the transition monoid is infinite")
        self.witness = witness


class UnknownFiniteness(VassError):
    def __init__(self, witness=None):
        super().__init__("monoid closure exceeded its cap; finiteness undetermined")
        self.witness = witness


class Stage(enum.Enum):
    SIMUL = "simul"
    END = "end"
    MULT = "mult"
    FINAL = "final"


@dataclass(frozen=True)
class StateLabel:
    kind: str                   # "plain", "pair" or "marked"
    state: str
    element: Optional[int] = None


def pair_id(q: str, k: int) -> str:
    return f"{q}@{k}"


def marked_id(q: str, k: int) -> str:
    return f"{q}@{k}*"


@dataclass
class ReducedVass:
    inner: AffineVass
    start: str
    end: str
    stages: tuple                # Stage per transition of ``inner``
    labels: dict                 # state id -> StateLabel
    origin: tuple                # source transition index per SIMUL transition, else None
    monoid: MatrixMonoid
    source: AffineVass
    elements: tuple = ()         # monoid element indices used

    def start_config(self, u) -> Configuration:
        return Configuration(self.start, tuple(u) + zero_vector(self.source.d))

    def end_config(self, v) -> Configuration:
        return Configuration(self.end, zero_vector(self.source.d) + tuple(v))

    def stage_of(self, idx: int) -> Stage:
        return self.stages[idx]


def require_finite_monoid(vass: AffineVass, caps: Optional[MonoidCaps] = None) -> MatrixMonoid:
    verdict = decide_finiteness(vass.matrices, caps, vass.d)
    if verdict.status is Finiteness.INFINITE:
        raise InfiniteMonoid(verdict.witness)
    if verdict.status is Finiteness.UNKNOWN:
        raise UnknownFiniteness(verdict.witness)
    return verdict.monoid


def _check_monoid(vass: AffineVass, monoid: MatrixMonoid):
    if not monoid.finite:
        raise InfiniteMonoid(monoid.witness)
    for t in vass.transitions:
        if t.mat not in monoid:
            raise VassError("monoid does not contain every transition matrix")


def reduce_from_origin(vass: AffineVass, monoid: MatrixMonoid) -> AffineVass:
    """The identity-matrix system on ``Q x M`` that runs source paths backwards.

    A transition ``t`` and element ``A`` give
    ``((tgt t, A), I, A b(t), (src t, A M(t)))``.
    """
    return from_origin_system(vass, monoid)[0]


def from_origin_system(vass: AffineVass, monoid: MatrixMonoid, root: Optional[str] = None,
                       elements: Optional[Sequence[int]] = None):
    """``(system, origin)`` for :func:`reduce_from_origin`, optionally trimmed.

    With ``root`` only pairs reachable from ``(root, I)`` are kept; with
    ``elements`` only pairs over those monoid element indices.  ``origin[i]``
    is the source transition that transition ``i`` simulates.
    """
    _check_monoid(vass, monoid)
    d = vass.d
    ident = identity(d)
    allowed = set(range(len(monoid))) if elements is None else set(elements)
    live = None if root is None else _reachable_elements(vass, monoid, root)

    def keep(s, k):
        return k in allowed and (live is None or (s, k) in live)

    states = [pair_id(s, k) for k in sorted(allowed) for s in vass.states if keep(s, k)]
    trans, origin = [], []
    for k in sorted(allowed):
        a = monoid.elements[k]
        for ti, t in enumerate(vass.transitions):
            k2 = monoid.index_of(mat_mul(a, t.mat))
            if keep(t.tgt, k) and keep(t.src, k2):
                trans.append(Transition(pair_id(t.tgt, k), pair_id(t.src, k2), ident,
                                        mat_vec(a, t.vec)))
                origin.append(ti)
    return AffineVass(d, tuple(states), tuple(trans)), tuple(origin)


def _reachable_elements(vass: AffineVass, monoid: MatrixMonoid, q: str) -> set:
    """Pairs reachable from ``(q, I)`` in the backward simulation graph."""
    seen = {(q, 0)}
    todo = [(q, 0)]
    while todo:
        s, k = todo.pop()
        a = monoid.elements[k]
        for t in vass.transitions:
            if t.tgt != s:
                continue
            nxt = (t.src, monoid.index_of(mat_mul(a, t.mat)))
            if nxt not in seen:
                seen.add(nxt)
                todo.append(nxt)
    return seen


def reduce_afmp(vass: AffineVass, p: str, q: str, monoid: Optional[MatrixMonoid] = None,
                elements: Optional[Sequence[int]] = None, prune: bool = False,
                caps: Optional[MonoidCaps] = None) -> ReducedVass:
    """Build ``V''`` of dimension ``2d`` such that ``p(u) ->* q(v)`` in ``vass``
    iff ``(q, I)(u, 0) ->* p(0, v)`` in ``V''``.

    ``elements`` restricts the construction to a subset of monoid element
    indices (it must contain the identity, index 0); ``prune`` keeps only the
    pairs reachable from the start pair.
    """
    if monoid is None:
        monoid = require_finite_monoid(vass, caps)
    _check_monoid(vass, monoid)
    if p not in vass.states or q not in vass.states:
        raise VassError("query state not declared")
    d = vass.d
    ident2 = identity(2 * d)
    zero = zero_vector(d)
    allowed = sorted(set(range(len(monoid))) if elements is None else set(elements))
    if 0 not in allowed:
        raise VassError("element subset must contain the identity")
    allowed_set = set(allowed)
    live = None
    if prune:
        live = _reachable_elements(vass, monoid, q)

    def keep(s, k):
        return k in allowed_set and (live is None or (s, k) in live)

    labels = {}
    states = []

    def add_state(sid, label):
        if sid in labels:
            raise VassError(f"state identifier clash on {sid!r}")
        labels[sid] = label
        states.append(sid)

    for s in vass.states:
        add_state(s, StateLabel("plain", s))
    pairs = [(s, k) for k in allowed for s in vass.states if keep(s, k)]
    for s, k in pairs:
        add_state(pair_id(s, k), StateLabel("pair", s, k))
    for s, k in pairs:
        add_state(marked_id(s, k), StateLabel("marked", s, k))

    trans, stages, origin = [], [], []

    def emit(src, tgt, vec, stage, orig=None):
        trans.append(Transition(src, tgt, ident2, vec))
        stages.append(stage)
        origin.append(orig)

    for k in allowed:
        a = monoid.elements[k]
        for ti, t in enumerate(vass.transitions):
            k2 = monoid.index_of(mat_mul(a, t.mat))
            if not (keep(t.tgt, k) and keep(t.src, k2)):
                continue
            emit(pair_id(t.tgt, k), pair_id(t.src, k2), zero + mat_vec(a, t.vec), Stage.SIMUL, ti)
    for s, k in pairs:
        emit(pair_id(s, k), marked_id(s, k), zero + zero, Stage.END)
    for s, k in pairs:
        a = monoid.elements[k]
        for i in range(d):
            e = unit_vector(d, i)
            col = mat_vec(a, e)
            emit(marked_id(s, k), marked_id(s, k), vec_scale(-1, e) + col, Stage.MULT)
            emit(marked_id(s, k), marked_id(s, k), e + vec_scale(-1, col), Stage.MULT)
    for s, k in pairs:
        emit(marked_id(s, k), s, zero + zero, Stage.FINAL)

    inner = AffineVass(2 * d, tuple(states), tuple(trans))
    red = ReducedVass(inner, pair_id(q, 0), p, tuple(stages), labels, tuple(origin),
                      monoid, vass, tuple(allowed))
    check_size_bounds(red)
    return red


def check_size_bounds(red: ReducedVass):
    """Assert the state, transition and norm bounds of the reduction."""
    src = red.source
    m = len(red.monoid)
    nq, nt = len(src.states), len(src.transitions)
    inner = red.inner
    assert len(inner.states) <= 3 * m * nq, "state bound violated"
    assert len(inner.transitions) <= 4 * max(1, src.d) * m * (nq + nt), "transition bound violated"
    # with ||T|| = 0 the unit moves of the multiplication stage still have norm 1
    assert inner.norm() <= red.monoid.norm * max(1, src.norm()), "norm bound violated"
    assert inner.is_zvass(), "reduced system has a non-identity matrix"


def stage_sequence_ok(red: ReducedVass, steps: Sequence[int]) -> bool:
    """Steps follow the stage order simul* end mult* final."""
    order = {Stage.SIMUL: 0, Stage.END: 1, Stage.MULT: 2, Stage.FINAL: 3}
    seq = [order[red.stages[i]] for i in steps]
    if seq != sorted(seq):
        return False
    return seq.count(1) <= 1 and seq.count(3) <= 1


def original_steps(red: ReducedVass, steps: Sequence[int]) -> list:
    """Source-system path read off the simulation prefix of a reduced run.

    The reduced run walks the source path backwards, so the simulation
    transitions are reversed.
    """
    sim = [red.origin[i] for i in steps if red.stages[i] is Stage.SIMUL]
    return list(reversed(sim))


# ---------------------------------------------------------------------------
# coverability and reachability


def cover_to_reach(vass: AffineVass, p: str, u, q: str, v):
    """Reachability instance equivalent to covering ``q(v)`` from ``p(u)``.

    Adds a sink with an edge from ``q`` and a decrement loop per counter.
    """
    d = vass.d
    sink = fresh_state(set(vass.states), "q_f")
    trans = list(vass.transitions)
    trans.append(Transition(q, sink, identity(d), zero_vector(d)))
    for i in range(d):
        trans.append(Transition(sink, sink, identity(d), vec_scale(-1, unit_vector(d, i))))
    v2 = AffineVass(d, vass.states + (sink,), tuple(trans))
    query = Query("reach", Configuration(p, tuple(u)), Configuration(sink, tuple(v)))
    return v2, query


def reach_to_cover(vass: AffineVass, p: str, u, q: str, v):
    """Coverability instance equivalent to reaching ``q(v)`` from ``p(u)``.

    Counters are mirrored with opposite signs, so covering ``(v, -v)``
    forces equality.
    """
    trans = tuple(Transition(t.src, t.tgt, block_diag(t.mat, t.mat), t.vec + vec_scale(-1, t.vec))
                  for t in vass.transitions)
    v2 = AffineVass(2 * vass.d, vass.states, trans)
    u, v = tuple(u), tuple(v)
    query = Query("cover", Configuration(p, u + vec_scale(-1, u)),
                  Configuration(q, v + vec_scale(-1, v)))
    return v2, query
