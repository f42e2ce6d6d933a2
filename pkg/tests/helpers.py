"""Shared fixtures, random instance generators and brute-force oracles for the tests."""

from __future__ import annotations

import itertools
import random

from azvass.core import AffineVass, Configuration, Transition, identity, vec_add
from azvass.gen.lba import Lba, Move

COPY = ((1, 0), (1, 0))          # (x, y) -> (x, x)
TRANSFER = ((1, 1), (0, 0))      # (x, y) -> (x + y, 0)
J2 = ((1, 1), (1, 1))


def copy_transfer_system() -> AffineVass:
    """``p --copy--> q --transfer--> p``: from ``p(1,1)`` the values at ``q`` are ``(2^n, 2^n)``."""
    return AffineVass.build(2, ["p", "q"], [("p", "q", COPY, None), ("q", "p", TRANSFER, None)])


def all_ones_plane() -> AffineVass:
    """Unit increments and decrements plus an all-ones loop on one state."""
    return AffineVass.build(2, ["p"], [
        ("p", "p", None, (1, 0)), ("p", "p", None, (0, 1)),
        ("p", "p", None, (-1, 0)), ("p", "p", None, (0, -1)),
        ("p", "p", J2, None),
    ])


def all_ones_cycle() -> AffineVass:
    """``p --J--> q --0--> p``: an infinite monoid outside every finite class."""
    return AffineVass.build(2, ["p", "q"], [("p", "q", J2, None),
                                            ("q", "p", ((0, 0), (0, 0)), None)])


def mul_edge_system() -> AffineVass:
    """States p, q; an all-ones edge p -> q and a loop adding e1 at p."""
    return AffineVass.build(2, ["p", "q"], [("p", "p", None, (1, 0)), ("p", "q", J2, None)])


# ---------------------------------------------------------------------------
# matrix families


def reset_matrix(rng: random.Random, d: int, keep: float = 0.6):
    flags = [rng.random() < keep for _ in range(d)]
    return tuple(tuple(int(i == j and flags[i]) for j in range(d)) for i in range(d))


def permutation_matrix(rng: random.Random, d: int):
    perm = list(range(d))
    rng.shuffle(perm)
    return tuple(tuple(int(perm[i] == j) for j in range(d)) for i in range(d))


def transfer_matrix(rng: random.Random, d: int):
    """Exactly one 1 per column."""
    rows = [[0] * d for _ in range(d)]
    for j in range(d):
        rows[rng.randrange(d)][j] = 1
    return tuple(map(tuple, rows))


def copy_matrix(rng: random.Random, d: int):
    """Exactly one 1 per row."""
    return tuple(tuple(int(j == c) for j in range(d)) for c in (rng.randrange(d) for _ in range(d)))


def copyless_matrix(rng: random.Random, d: int):
    """At most one 1 per column."""
    rows = [[0] * d for _ in range(d)]
    for j in range(d):
        i = rng.randrange(d + 1)
        if i < d:
            rows[i][j] = 1
    return tuple(map(tuple, rows))


def all_01_matrices(d: int):
    for bits in itertools.product((0, 1), repeat=d * d):
        yield tuple(tuple(bits[i * d:(i + 1) * d]) for i in range(d))


# ---------------------------------------------------------------------------
# random systems


def _states(rng, max_states):
    return [f"s{k}" for k in range(rng.randint(1, max_states))]


def random_vector(rng, d, bound):
    return tuple(rng.randint(-bound, bound) for _ in range(d))


def random_zvass(rng: random.Random, max_d=3, max_states=3, max_trans=5, entry=2):
    d = rng.randint(1, max_d)
    qs = _states(rng, max_states)
    ts = [Transition(rng.choice(qs), rng.choice(qs), identity(d), random_vector(rng, d, entry))
          for _ in range(rng.randint(1, max_trans))]
    return AffineVass(d, tuple(qs), tuple(ts))


def random_reset(rng: random.Random, max_d=4, max_states=3, max_trans=4, entry=2):
    d = rng.randint(1, max_d)
    qs = _states(rng, max_states)
    ts = [Transition(rng.choice(qs), rng.choice(qs),
                     reset_matrix(rng, d) if rng.random() < 0.6 else identity(d),
                     random_vector(rng, d, entry))
          for _ in range(rng.randint(1, max_trans))]
    return AffineVass(d, tuple(qs), tuple(ts))


def random_afmp(rng: random.Random, max_d=3, max_states=3, max_trans=4, entry=1):
    """Reset or permutation matrices, so the monoid is finite."""
    d = rng.randint(1, max_d)
    qs = _states(rng, max_states)
    ts = []
    for _ in range(rng.randint(1, max_trans)):
        r = rng.random()
        mat = (reset_matrix(rng, d) if r < 0.4 else permutation_matrix(rng, d) if r < 0.8
               else identity(d))
        ts.append(Transition(rng.choice(qs), rng.choice(qs), mat, random_vector(rng, d, entry)))
    return AffineVass(d, tuple(qs), tuple(ts))


def random_c1(rng: random.Random, max_states=2, max_trans=4, entry=2):
    """Dimension 2, identity or all-ones matrices (at least one all-ones edge)."""
    d = 2
    qs = _states(rng, max_states)
    ts = [Transition(rng.choice(qs), rng.choice(qs), J2, (0, 0))]
    for _ in range(rng.randint(1, max_trans - 1)):
        if rng.random() < 0.25:
            ts.append(Transition(rng.choice(qs), rng.choice(qs), J2, (0, 0)))
        else:
            ts.append(Transition(rng.choice(qs), rng.choice(qs), identity(d),
                                 random_vector(rng, d, entry)))
    rng.shuffle(ts)
    return AffineVass(d, tuple(qs), tuple(ts))


def random_walk(rng: random.Random, vass: AffineVass, start: Configuration, max_len: int):
    """Follow random outgoing transitions; returns (steps, final configuration)."""
    conf, steps = start, []
    for _ in range(rng.randint(0, max_len)):
        out = vass.outgoing(conf.state)
        if not out:
            break
        i = rng.choice(out)
        steps.append(i)
        conf = Configuration(vass.transitions[i].tgt, vass.transitions[i].apply(conf.values))
    return steps, conf


def random_query(rng: random.Random, vass: AffineVass, bound=3, walk=0.5, max_len=5):
    """Source and target; with probability ``walk`` the target is reached by a random run."""
    p = rng.choice(vass.states)
    u = random_vector(rng, vass.d, bound)
    if rng.random() < walk:
        _, c = random_walk(rng, vass, Configuration(p, u), max_len)
        return p, u, c.state, c.values
    return p, u, rng.choice(vass.states), random_vector(rng, vass.d, bound)


# ---------------------------------------------------------------------------
# brute-force oracles


def reachable_within(vass: AffineVass, source: Configuration, target: Configuration,
                     length: int) -> bool:
    """Whether some run of length at most ``length`` (no value bound) reaches ``target``."""
    frontier = {source}
    seen = {source}
    if source == target:
        return True
    for _ in range(length):
        nxt = set()
        for s, x in frontier:
            for t in vass.transitions:
                if t.src == s:
                    c = Configuration(t.tgt, t.apply(x))
                    if c == target:
                        return True
                    if c not in seen:
                        seen.add(c)
                        nxt.add(c)
        frontier = nxt
    return False


def zvass_reachable_within(vass: AffineVass, source: Configuration, target: Configuration,
                           length: int) -> bool:
    """Exhaustive search over all runs of length at most ``length`` of a Z-VASS."""
    frontier = {source}
    if source == target:
        return True
    for _ in range(length):
        nxt = set()
        for s, x in frontier:
            for t in vass.transitions:
                if t.src == s:
                    c = Configuration(t.tgt, vec_add(x, t.vec))
                    if c == target:
                        return True
                    nxt.add(c)
        frontier = nxt
    return False


def box_minimal(A, c, side, nonzero=False):
    """Minimal solutions of ``A x = c`` over ``[0, side]^k``; ``nonzero`` drops x = 0."""
    k = len(A[0])
    sols = [x for x in itertools.product(range(side + 1), repeat=k)
            if all(sum(a * xi for a, xi in zip(row, x)) == ci for row, ci in zip(A, c))]
    if nonzero:
        sols = [x for x in sols if any(x)]
    sols_set = set(sols)

    def below(x):
        return any(y != x and all(a <= b for a, b in zip(y, x)) for y in sols_set)
    return {x for x in sols if not below(x)}


# ---------------------------------------------------------------------------
# machines


R, L = Move.RIGHT, Move.LEFT

LBAS = {
    # accepts immediately
    "accept-all": Lba(("q", "rej"), ("a", "b"), ("a", "b"), {}, "q", "q", "rej"),
    # accepts iff the first letter is a
    "first-a": Lba(("q0", "acc", "rej"), ("a", "b"), ("a", "b"),
                   {("q0", "a"): ("acc", "a", R), ("q0", "b"): ("rej", "b", R)},
                   "q0", "acc", "rej"),
    # flips the first letter, accepts iff the second letter is b
    "second-b-rewrite": Lba(("q0", "q1", "q2", "acc", "rej"), ("a", "b"), ("a", "b"),
                            {("q0", "a"): ("q1", "b", R), ("q0", "b"): ("q1", "a", R),
                             ("q1", "b"): ("q2", "b", L), ("q1", "a"): ("rej", "a", L),
                             ("q2", "a"): ("acc", "a", R), ("q2", "b"): ("acc", "b", R)},
                            "q0", "acc", "rej"),
    # bounces between the two cells forever unless the first letter is b
    "ping-pong": Lba(("q0", "q1", "acc", "rej"), ("a", "b"), ("a", "b"),
                     {("q0", "a"): ("q1", "a", R), ("q1", "a"): ("q0", "a", L),
                      ("q1", "b"): ("q0", "b", L), ("q0", "b"): ("acc", "b", R)},
                     "q0", "acc", "rej"),
}
