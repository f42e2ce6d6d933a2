"""Linear bounded automaton membership as reachability in a permutation Z-VASS.

Counter ``x[i, a]`` is nonzero exactly when tape cell ``i`` holds ``a``, and
``y`` stays equal to the sum of all ``x``.  A simulated step reading ``a``
and writing ``b`` at cell ``i`` swaps ``x[i, a]`` with ``x[i, b]`` and adds
one to ``x[i, b]`` and ``y``.  A step that guesses the wrong letter leaves two
nonzero counters at cell ``i`` for good, which the final gadget detects: it
drains one letter per cell together with ``y`` and must end on zero.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

from ..core import (AffineVass, Configuration, Query, Transition, VassError, identity,
                    unit_vector, vec_add, vec_scale, zero_vector)


class LbaError(VassError):
    pass


class Move(enum.Enum):
    LEFT = "L"
    RIGHT = "R"


@dataclass(frozen=True)
class Lba:
    """Deterministic LBA; ``delta`` maps ``(state, letter)`` to ``(state, letter, Move)``."""
    states: tuple
    input_alphabet: tuple
    tape_alphabet: tuple
    delta: dict = field(hash=False)
    initial: str = ""
    accept: str = ""
    reject: str = ""

    def __post_init__(self):
        if self.accept == self.reject:
            raise LbaError("accepting and rejecting states coincide")
        for s in (self.initial, self.accept, self.reject):
            if s not in self.states:
                raise LbaError(f"state {s!r} not declared")
        if not set(self.input_alphabet) <= set(self.tape_alphabet):
            raise LbaError("input alphabet is not contained in the tape alphabet")
        for (p, a), (q, b, move) in self.delta.items():
            if p not in self.states or q not in self.states:
                raise LbaError(f"transition on undeclared state {p!r} or {q!r}")
            if a not in self.tape_alphabet or b not in self.tape_alphabet:
                raise LbaError(f"transition on letter outside the tape alphabet: {a!r} or {b!r}")
            if not isinstance(move, Move):
                raise LbaError(f"bad head move {move!r}")

    def check_word(self, word: str):
        if not word:
            raise LbaError("the input word must be nonempty")
        bad = [c for c in word if c not in self.input_alphabet]
        if bad:
            raise LbaError(f"letter {bad[0]!r} is not in the input alphabet")


@dataclass
class LbaLayout:
    """Counter indices and state names of a generated system."""
    n: int
    letters: tuple

    def x(self, i: int, a: str) -> int:
        """Counter of cell ``i`` (1-based) holding letter ``a``."""
        return (i - 1) * len(self.letters) + self.letters.index(a)

    @property
    def y(self) -> int:
        return self.n * len(self.letters)

    @property
    def d(self) -> int:
        return self.n * len(self.letters) + 1

    @staticmethod
    def control(p: str, i: int) -> str:
        return f"r.{p}.{i}"

    @staticmethod
    def check(a: str, i: int) -> str:
        return f"g.{a}.{i}"

    ACCEPT = "r_acc"


def _swap(d: int, i: int, j: int):
    rows = [list(r) for r in identity(d)]
    rows[i], rows[j] = rows[j], rows[i]
    return tuple(tuple(r) for r in rows)


def gen_lba(lba: Lba, word: str):
    """``(system, query, layout)`` with query ``r_{q_ini,1}(u) ->* r_acc(0)``."""
    lba.check_word(word)
    n = len(word)
    lay = LbaLayout(n, tuple(lba.tape_alphabet))
    d = lay.d
    ident = identity(d)
    states = [lay.control(p, i) for p in lba.states for i in range(1, n + 1)]
    states += [lay.check(a, i) for a in lay.letters for i in range(1, n + 1)]
    states.append(lay.ACCEPT)
    trans = []
    for (p, a), (q, b, move) in lba.delta.items():
        for i in range(1, n + 1):
            j = i + 1 if move is Move.RIGHT else i - 1
            if not 1 <= j <= n:
                continue
            vec = vec_add(unit_vector(d, lay.x(i, b)), unit_vector(d, lay.y))
            trans.append(Transition(lay.control(p, i), lay.control(q, j),
                                    _swap(d, lay.x(i, a), lay.x(i, b)), vec))
    zero = zero_vector(d)
    for i in range(1, n + 1):
        for a in lay.letters:
            trans.append(Transition(lay.control(lba.accept, i), lay.check(a, 1), ident, zero))
    for i in range(1, n + 1):
        for a in lay.letters:
            drain = vec_scale(-1, vec_add(unit_vector(d, lay.x(i, a)), unit_vector(d, lay.y)))
            trans.append(Transition(lay.check(a, i), lay.check(a, i), ident, drain))
            if i < n:
                for b in lay.letters:
                    trans.append(Transition(lay.check(a, i), lay.check(b, i + 1), ident, zero))
            else:
                trans.append(Transition(lay.check(a, i), lay.ACCEPT, ident, zero))
    vass = AffineVass(d, tuple(states), tuple(trans))
    u = [0] * d
    for i, c in enumerate(word, start=1):
        u[lay.x(i, c)] = 1
    u[lay.y] = n
    query = Query("reach", Configuration(lay.control(lba.initial, 1), tuple(u)),
                  Configuration(lay.ACCEPT, zero))
    return vass, query, lay


def tape_invariant(lay: LbaLayout, values) -> bool:
    """``y`` equals the sum of the cell counters."""
    return values[lay.y] == sum(values[:lay.y])


class Outcome(enum.Enum):
    ACCEPT = "accept"
    REJECT = "reject"


def simulate_lba(lba: Lba, word: str) -> Outcome:
    """Direct simulation; stuck, looping, falling off the tape or rejecting all reject."""
    lba.check_word(word)
    state, head, tape = lba.initial, 0, tuple(word)
    seen = set()
    while True:
        if state == lba.accept:
            return Outcome.ACCEPT
        if state == lba.reject:
            return Outcome.REJECT
        conf = (state, head, tape)
        if conf in seen:
            return Outcome.REJECT
        seen.add(conf)
        step: Optional[tuple] = lba.delta.get((state, tape[head]))
        if step is None:
            return Outcome.REJECT
        q, b, move = step
        tape = tape[:head] + (b,) + tape[head + 1:]
        head += 1 if move is Move.RIGHT else -1
        if not 0 <= head < len(tape):
            return Outcome.REJECT
        state = q
