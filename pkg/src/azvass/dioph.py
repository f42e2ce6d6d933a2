"""Minimal natural solutions of linear Diophantine systems.

``minimal_solutions`` runs the Contejean-Devie completion procedure on the
homogenised system ``A x - c x0 = 0``.  Minimal solutions with ``x0 = 1`` are
the particular solutions of ``A x = c`` and those with ``x0 = 0`` form the
Hilbert basis of ``A x = 0``; every solution is one particular plus an
N-combination of basis vectors.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Callable, Iterable, Optional, Sequence

from .upset import UPSet, numerical_semigroup


class SearchLimit(RuntimeError):
    """The completion procedure exceeded its frontier budget."""


@dataclass(frozen=True)
class DioSystem:
    A: tuple   # rows x cols
    c: tuple   # length rows
    cols: int

    def __init__(self, A: Iterable[Iterable[int]], c: Iterable[int], cols: Optional[int] = None):
        rows = tuple(tuple(int(x) for x in r) for r in A)
        rhs = tuple(int(x) for x in c)
        if cols is None:
            if not rows:
                raise ValueError("column count needed for a system without rows")
            cols = len(rows[0])
        if len(rhs) != len(rows) or any(len(r) != cols for r in rows):
            raise ValueError("inconsistent system shape")
        object.__setattr__(self, "A", rows)
        object.__setattr__(self, "c", rhs)
        object.__setattr__(self, "cols", cols)

    @property
    def rows(self) -> int:
        return len(self.A)

    def column(self, j: int) -> tuple:
        return tuple(r[j] for r in self.A)

    def evaluate(self, x: Sequence[int]) -> tuple:
        return tuple(sum(a * xi for a, xi in zip(r, x)) for r in self.A)

    def solves(self, x: Sequence[int]) -> bool:
        return all(xi >= 0 for xi in x) and self.evaluate(x) == self.c

    def solves_homogeneous(self, x: Sequence[int]) -> bool:
        return all(xi >= 0 for xi in x) and all(v == 0 for v in self.evaluate(x))


@dataclass(frozen=True)
class SolutionBasis:
    particulars: tuple
    periods: tuple

    def contains(self, sys: DioSystem, x: Sequence[int]) -> bool:
        return sys.solves(x)


def _leq(a, b) -> bool:
    return all(x <= y for x, y in zip(a, b))


def iter_completion(columns: list, starts: Iterable[int], allowed: Sequence[int],
                    caps: Optional[Sequence[Optional[int]]] = None,
                    budget: int = 2_000_000, blockers: Sequence[tuple] = (),
                    max_size: Optional[int] = None,
                    admissible: Optional[Callable[[tuple], bool]] = None):
    """Contejean-Devie search over the columns' images.

    Explores sums of unit vectors starting from ``starts`` and only ever adds
    directions from ``allowed``; a vector ``p`` grows along ``e_j`` only when
    ``<A p, A e_j> < 0``.  ``caps[j]`` bounds coordinate ``j``.  Yields the
    minimal solutions of ``A x = 0`` reached, in order of increasing size.
    Vectors above any of ``blockers`` are discarded like vectors above a
    found solution; ``max_size`` stops the search after that many levels.
    ``admissible`` filters candidate vectors; it must be downward closed so
    that every admissible minimal solution stays reachable.
    """
    n = len(columns)
    m = len(columns[0]) if columns else 0
    zero = (0,) * m
    found = []
    frontier = {}
    for j in starts:
        e = tuple(int(i == j) for i in range(n))
        if admissible is None or admissible(e):
            frontier[e] = columns[j]
    allowed = list(allowed)
    blockers = [b for b in blockers if any(b)]
    spent = 0
    size = 1
    while frontier:
        nxt = {}
        hits = sorted(p for p, ap in frontier.items() if ap == zero)
        for h in hits:
            found.append(h)
            yield h
        hit_set = set(hits)
        for p, ap in frontier.items():
            if p in hit_set:
                continue
            for j in allowed:
                col = columns[j]
                if sum(x * y for x, y in zip(ap, col)) >= 0:
                    continue
                if caps is not None and caps[j] is not None and p[j] >= caps[j]:
                    continue
                q = p[:j] + (p[j] + 1,) + p[j + 1:]
                if q in nxt:
                    continue
                if any(_leq(s, q) for s in found) or any(_leq(b, q) for b in blockers):
                    continue
                if admissible is not None and not admissible(q):
                    continue
                nxt[q] = tuple(x + y for x, y in zip(ap, col))
                spent += 1
                if spent > budget:
                    raise SearchLimit("Contejean-Devie frontier budget exhausted")
        frontier = nxt
        size += 1
        if max_size is not None and size > max_size:
            return


def iter_particulars(sys: DioSystem, budget: int = 2_000_000, blockers: Sequence[tuple] = (),
                     admissible: Optional[Callable[[tuple], bool]] = None):
    """Minimal solutions of ``A x = c`` over N, smallest first.

    ``blockers`` may hold any nonzero solutions of ``A x = 0``: a particular
    above one of them is not minimal, so they prune the search safely.
    ``admissible`` (on length-k vectors) restricts the search to a downward
    closed family.
    """
    k = sys.cols
    if sys.rows == 0:
        yield (0,) * k
        return
    columns = [sys.column(j) for j in range(k)] + [tuple(-x for x in sys.c)]
    # every ancestor of a minimal solution with x0 = 1 also has x0 = 1
    caps = [None] * k + [1]
    blocks = [tuple(b) + (0,) for b in blockers]
    adm = None if admissible is None else (lambda x: admissible(x[:k]))
    for s in iter_completion(columns, [k], range(k), caps, budget, blocks, admissible=adm):
        yield s[:k]


def particular_solutions(sys: DioSystem, budget: int = 2_000_000) -> list:
    """Minimal solutions of ``A x = c`` over N."""
    return list(iter_particulars(sys, budget))


def hilbert_basis(sys: DioSystem, budget: int = 2_000_000, max_size: Optional[int] = None,
                  columns_used: Optional[Sequence[int]] = None,
                  admissible: Optional[Callable[[tuple], bool]] = None) -> list:
    """Minimal nonzero solutions of ``A x = 0`` over N.

    With ``max_size`` only the elements with at most that coordinate sum;
    ``columns_used`` and ``admissible`` restrict the search to a downward
    closed family of supports.
    """
    k = sys.cols
    used = list(range(k)) if columns_used is None else list(columns_used)
    if sys.rows == 0:
        return [tuple(int(i == j) for i in range(k)) for j in used]
    columns = [sys.column(j) for j in range(k)]
    return list(iter_completion(columns, used, used, None, budget, max_size=max_size,
                                admissible=admissible))


def minimal_solutions(sys: DioSystem, budget: int = 2_000_000) -> SolutionBasis:
    periods = hilbert_basis(sys, budget)
    if sys.rows == 0:
        return SolutionBasis(((0,) * sys.cols,), tuple(periods))
    # a vector above a period is never a minimal particular
    return SolutionBasis(tuple(iter_particulars(sys, budget, periods)), tuple(periods))


def ch16_bound(sys: DioSystem) -> int:
    """``((k + 1) max_j ||A_j|| + ||c|| + 1) ^ m`` for a system with m rows, k columns."""
    col_norm = max((abs(x) for r in sys.A for x in r), default=0)
    c_norm = max((abs(x) for x in sys.c), default=0)
    return ((sys.cols + 1) * col_norm + c_norm + 1) ** sys.rows


def feasible(sys: DioSystem) -> bool:
    if sys.rows == 0:
        return True
    parts = particular_solutions(sys)
    bound = ch16_bound(sys)
    for p in parts:
        assert max(p, default=0) <= bound, "particular solution exceeds the size bound"
    return bool(parts)


def integer_feasible(sys: DioSystem) -> bool:
    """Whether ``A x = c`` has a solution with integer (possibly negative) ``x``.

    Integer column operations bring ``A`` to echelon form; ``c`` then lies
    in the column lattice iff forward substitution stays integral.
    """
    cols = [list(sys.column(j)) for j in range(sys.cols)]
    pivots = []
    free = cols
    for r in range(sys.rows):
        live = [col for col in free if col[r] != 0]
        rest = [col for col in free if col[r] == 0]
        while len(live) > 1:
            live.sort(key=lambda col: abs(col[r]))
            head = live[0]
            nxt = [head]
            for col in live[1:]:
                f = col[r] // head[r]
                col = [a - f * b for a, b in zip(col, head)]
                (nxt if col[r] != 0 else rest).append(col)
            live = nxt
        if live:
            pivots.append((r, live[0]))
        free = rest
    res = list(sys.c)
    for r, col in pivots:
        if res[r] % col[r]:
            return False
        f = res[r] // col[r]
        res = [a - f * b for a, b in zip(res, col)]
    return not any(res)


def rational_feasible(sys: DioSystem) -> bool:
    """Whether ``A x = c`` has a solution with rational ``x >= 0``.

    Exact phase-one simplex over fractions with Bland's rule, so a negative
    answer is a proof that no natural solution exists either.
    """
    m, k = sys.rows, sys.cols
    if m == 0:
        return True
    # tableau rows [A | I | c] with c made nonnegative; artificials are basic
    tab = []
    for i in range(m):
        sign = -1 if sys.c[i] < 0 else 1
        row = [Fraction(sign * a) for a in sys.A[i]]
        row += [Fraction(int(i == j)) for j in range(m)]
        row.append(Fraction(sign * sys.c[i]))
        tab.append(row)
    basis = [k + i for i in range(m)]
    n = k + m
    # objective: minimise the sum of artificials, i.e. reduced costs of -sum(rows)
    cost = [Fraction(0)] * (n + 1)
    for row in tab:
        for j in range(n + 1):
            cost[j] -= row[j]
    for i in range(m):
        cost[k + i] += 1
    while True:
        enter = next((j for j in range(n) if cost[j] < 0), None)
        if enter is None:
            break
        best, leave = None, None
        for i, row in enumerate(tab):
            if row[enter] > 0:
                ratio = row[n] / row[enter]
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    best, leave = ratio, i
        if leave is None:           # unbounded below cannot happen in phase one
            break
        piv = tab[leave][enter]
        tab[leave] = [x / piv for x in tab[leave]]
        for i, row in enumerate(tab):
            if i != leave and row[enter] != 0:
                f = row[enter]
                tab[i] = [a - f * b for a, b in zip(row, tab[leave])]
        f = cost[enter]
        cost = [a - f * b for a, b in zip(cost, tab[leave])]
        basis[leave] = enter
    return cost[n] == 0


def project_to_int(basis: SolutionBasis, weights: Sequence[int]) -> UPSet:
    """Exact image ``{<weights, x> : x a solution}`` as an ultimately periodic set."""
    gens = sorted({sum(w * x for w, x in zip(weights, h)) for h in basis.periods} - {0})
    if not gens:
        shape = UPSet.finite([0])
    elif gens[0] > 0:
        shape = numerical_semigroup(gens)
    elif gens[-1] < 0:
        shape = numerical_semigroup([-g for g in gens]).negate()
    else:
        g = 0
        for x in gens:
            g = gcd(g, x)
        shape = UPSet.line(0, g)
    result = UPSet.empty()
    for off in sorted({sum(w * x for w, x in zip(weights, m)) for m in basis.particulars}):
        result = result.union(shape.add_constant(off))
    return result
