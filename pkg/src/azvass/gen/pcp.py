"""Post correspondence over {0, 1} as reachability in a transfer + copy Z-VASS.

Counters 1 and 2 hold the top and bottom words read as binary numbers
behind a leading 1; counter 3 is scratch.  Appending bit ``b`` to counter 1
copies it into the scratch counter and transfers the scratch back with
``+b``, taking ``(x, y, 0)`` to ``(2x + b, y, 0)``.  The final state drains
both counters together, so it reaches zero iff they are equal.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Optional

from ..core import AffineVass, Configuration, Query, Transition, VassError, identity

COPY = {0: ((1, 0, 0), (0, 1, 0), (1, 0, 0)),
        1: ((1, 0, 0), (0, 1, 0), (0, 1, 0))}
TRANSFER = {0: ((1, 0, 1), (0, 1, 0), (0, 0, 0)),
            1: ((1, 0, 0), (0, 1, 1), (0, 0, 0))}


class PcpError(VassError):
    pass


@dataclass(frozen=True)
class PcpInstance:
    tiles: tuple   # pairs (top, bottom) of bit strings

    def __post_init__(self):
        if not self.tiles:
            raise PcpError("at least one tile is required")
        for k, (top, bottom) in enumerate(self.tiles, start=1):
            for w in (top, bottom):
                if not w or set(w) - {"0", "1"}:
                    raise PcpError(f"tile {k}: {w!r} is not a nonempty bit string")

    def words(self, seq) -> tuple:
        """Top and bottom concatenations for a 1-based tile sequence."""
        return ("".join(self.tiles[k - 1][0] for k in seq),
                "".join(self.tiles[k - 1][1] for k in seq))


START, HUB, SELECT, FINAL = "s0", "hub", "sel", "s_f"


def bit_gadget(counter: int, bit: int):
    """Copy then transfer transitions appending ``bit`` to ``counter`` (0 or 1)."""
    vec = [0, 0, 0]
    vec[counter] = bit
    return (COPY[counter], (0, 0, 0)), (TRANSFER[counter], tuple(vec))


def gen_pcp(inst: PcpInstance):
    """``(system, query)`` with query ``s0(0,0,0) ->* s_f(0,0,0)``."""
    ident = identity(3)
    states = [START, HUB, SELECT, FINAL]
    trans = [Transition(START, HUB, ident, (1, 1, 0))]
    for k, (top, bottom) in enumerate(inst.tiles, start=1):
        steps = []
        for counter, word in ((0, top), (1, bottom)):
            for bit in word:
                steps.extend(bit_gadget(counter, int(bit)))
        cur = HUB
        for j, (mat, vec) in enumerate(steps):
            if j == len(steps) - 1:
                nxt = SELECT
            else:
                nxt = f"t{k}.{j + 1}"
                states.append(nxt)
            trans.append(Transition(cur, nxt, mat, vec))
            cur = nxt
    trans.append(Transition(SELECT, HUB, ident, (0, 0, 0)))
    trans.append(Transition(SELECT, FINAL, ident, (0, 0, 0)))
    trans.append(Transition(FINAL, FINAL, ident, (-1, -1, 0)))
    vass = AffineVass(3, tuple(states), tuple(trans))
    query = Query("reach", Configuration(START, (0, 0, 0)), Configuration(FINAL, (0, 0, 0)))
    return vass, query


def solve_pcp_bounded(inst: PcpInstance, max_tiles: int) -> Optional[tuple]:
    """Shortest solution (1-based tile indices) of length at most ``max_tiles``, if any.

    Breadth-first over the unmatched overhang; a sequence is kept only while
    one side is a prefix of the other.
    """
    if max_tiles < 1:
        raise ValueError("max_tiles must be positive")
    queue = deque([((), "", "")])
    while queue:
        seq, top, bottom = queue.popleft()
        if len(seq) == max_tiles:
            continue
        for k, (a, b) in enumerate(inst.tiles, start=1):
            t, u = top + a, bottom + b
            if not (t.startswith(u) or u.startswith(t)):
                continue
            if t == u:
                return seq + (k,)
            n = min(len(t), len(u))
            queue.append((seq + (k,), t[n:], u[n:]))
    return None
