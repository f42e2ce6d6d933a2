"""Matrix monoid closure and finiteness.

For nonnegative generators the closure is capped by the Weber-Seidl bounds on
the cardinality and norm of a finite monoid, so breaching a cap proves the
monoid infinite.  Generators with negative entries only get a user cap, and a
breach there is reported as unknown.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, field
from math import isqrt
from typing import Optional, Sequence

from .core import Matrix, identity, mat_mul, mat_norm


class NotNonnegative(ValueError):
    pass


class Status(enum.Enum):
    FINITE = "finite"
    CAP_EXCEEDED = "cap-exceeded"


@dataclass(frozen=True)
class MonoidCaps:
    max_count: int = 10_000
    max_norm: int = 10 ** 6

    def __post_init__(self):
        if self.max_count <= 0 or self.max_norm <= 0:
            raise ValueError("caps must be positive")


@dataclass
class MatrixMonoid:
    dim: int
    elements: list                    # BFS order, identity first
    words: list                       # words[i]: generator indices with M(word) = elements[i]
    status: Status
    witness: Optional[tuple] = None   # generator word whose product broke a cap
    witness_matrix: Optional[Matrix] = None
    index: dict = field(default_factory=dict, repr=False)

    @property
    def finite(self) -> bool:
        return self.status is Status.FINITE

    @property
    def norm(self) -> int:
        return max(mat_norm(a) for a in self.elements)

    def __len__(self):
        return len(self.elements)

    def __contains__(self, a):
        return a in self.index

    def index_of(self, a: Matrix) -> int:
        return self.index[a]


@dataclass(frozen=True)
class MonoidBounds:
    count_bound: int
    norm_bound: int


def _ceil_sqrt(n: int) -> int:
    r = isqrt(n)
    return r if r * r == n else r + 1


def ws91_bounds(generators: Sequence[Matrix], dim: Optional[int] = None) -> MonoidBounds:
    """Cardinality and norm bounds for a finite monoid of nonnegative matrices.

    ``|<G>| <= ||G||^(d^2 (d-1)) 5^(d^3/2) d^(d^3) d^2`` and
    ``||<G>|| <= ||G||^(d-1) 5^(d/2) d^d``.  The half-integer powers of 5 are
    evaluated as the rounded-up integer square root of the squared bound.
    ``||G||`` is taken as at least 1 since the identity always belongs to the
    monoid.
    """
    gens = list(generators)
    if dim is None:
        if not gens:
            raise ValueError("dimension required for an empty generator set")
        dim = len(gens[0])
    for g in gens:
        if any(x < 0 for row in g for x in row):
            raise NotNonnegative("generator has a negative entry")
    d = dim
    g = max([1] + [mat_norm(a) for a in gens])
    norm_sq = g ** (2 * (d - 1)) * 5 ** d * d ** (2 * d)
    count_sq = g ** (2 * d * d * (d - 1)) * 5 ** (d ** 3) * d ** (2 * d ** 3) * d ** 4
    return MonoidBounds(max(1, _ceil_sqrt(count_sq)), max(1, _ceil_sqrt(norm_sq)))


def generate_monoid(generators: Sequence[Matrix], caps: MonoidCaps = MonoidCaps(),
                    dim: Optional[int] = None) -> MatrixMonoid:
    """Breadth-first closure of ``generators`` under multiplication.

    The element reached from ``M(w)`` through generator ``t`` is
    ``t . M(w)``, matching ``M(w t) = M(t) M(w)``.
    """
    gens = list(generators)
    if dim is None:
        if not gens:
            raise ValueError("dimension required for an empty generator set")
        dim = len(gens[0])
    ident = identity(dim)
    elements = [ident]
    words = [()]
    index = {ident: 0}
    queue = deque([0])
    while queue:
        k = queue.popleft()
        for gi, g in enumerate(gens):
            prod = mat_mul(g, elements[k])
            if prod in index:
                continue
            word = words[k] + (gi,)
            if mat_norm(prod) > caps.max_norm or len(elements) >= caps.max_count:
                return MatrixMonoid(dim, elements, words, Status.CAP_EXCEEDED,
                                    witness=word, witness_matrix=prod, index=index)
            index[prod] = len(elements)
            elements.append(prod)
            words.append(word)
            queue.append(index[prod])
    return MatrixMonoid(dim, elements, words, Status.FINITE, index=index)


class Finiteness(enum.Enum):
    FINITE = "finite"
    INFINITE = "infinite"
    UNKNOWN = "unknown"


@dataclass
class FinitenessVerdict:
    status: Finiteness
    monoid: MatrixMonoid
    caps: MonoidCaps
    bounds: Optional[MonoidBounds] = None

    @property
    def witness(self):
        return self.monoid.witness


def decide_finiteness(generators: Sequence[Matrix], user_cap: Optional[MonoidCaps] = None,
                      dim: Optional[int] = None) -> FinitenessVerdict:
    gens = list(generators)
    if dim is None:
        dim = len(gens[0]) if gens else 0
    nonneg = all(x >= 0 for g in gens for row in g for x in row)
    if nonneg:
        bounds = ws91_bounds(gens, dim)
        caps = MonoidCaps(bounds.count_bound, bounds.norm_bound)
        if user_cap is not None:
            # a smaller user cap can only turn a proof of infiniteness into "unknown"
            caps = MonoidCaps(min(caps.max_count, user_cap.max_count),
                              min(caps.max_norm, user_cap.max_norm))
        mon = generate_monoid(gens, caps, dim)
        if mon.finite:
            return FinitenessVerdict(Finiteness.FINITE, mon, caps, bounds)
        # the breach proves infiniteness only if the cap it hit is the true bound
        if mat_norm(mon.witness_matrix) > caps.max_norm:
            sound = caps.max_norm == bounds.norm_bound
        else:
            sound = caps.max_count == bounds.count_bound
        return FinitenessVerdict(Finiteness.INFINITE if sound else Finiteness.UNKNOWN,
                                 mon, caps, bounds)
    caps = user_cap or MonoidCaps()
    mon = generate_monoid(gens, caps, dim)
    return FinitenessVerdict(Finiteness.FINITE if mon.finite else Finiteness.UNKNOWN, mon, caps)
