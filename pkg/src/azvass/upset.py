"""Exact ultimately periodic subsets of Z.

A set is stored as a finite window ``[lo, hi]`` with its members listed
explicitly, a periodic pattern that decides membership above ``hi`` and a
second one below ``lo``.  Every constructor normalizes, so two sets are equal
exactly when their fields are equal.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd
from typing import Iterable, Optional


def _lcm(a: int, b: int) -> int:
    return a * b // gcd(a, b)


def _min_period(period: int, residues: frozenset):
    """Smallest period describing the same periodic set."""
    if not residues:
        return 1, frozenset()
    for p in range(1, period + 1):
        if period % p:
            continue
        if all(((r + p) % period) in residues for r in residues):
            return p, frozenset(r % p for r in residues)
    return period, residues


def _in_tail(n: int, tail) -> bool:
    p, res = tail
    return n % p in res


@dataclass(frozen=True)
class UPSet:
    lo: int
    hi: int
    mid: frozenset
    up: tuple     # (period, residues) deciding membership above hi
    down: tuple   # (period, residues) deciding membership below lo

    # -- construction -----------------------------------------------------

    @classmethod
    def make(cls, lo: int, hi: int, mid: Iterable[int], up=(1, frozenset()),
             down=(1, frozenset())) -> "UPSet":
        up = _min_period(up[0], frozenset(r % up[0] for r in up[1]))
        down = _min_period(down[0], frozenset(r % down[0] for r in down[1]))
        members = {n for n in mid if lo <= n <= hi}
        if lo > hi + 1:
            raise ValueError("window bounds cross")
        while hi >= lo and (hi in members) == _in_tail(hi, up):
            members.discard(hi)
            hi -= 1
        while lo <= hi and (lo in members) == _in_tail(lo, down):
            members.discard(lo)
            lo += 1
        if lo > hi:
            if up == down:
                lo, hi = 0, -1
            else:
                # slide the empty window to the lowest position where the tails still meet
                while _in_tail(lo - 1, up) == _in_tail(lo - 1, down):
                    lo -= 1
                hi = lo - 1
        return cls(lo, hi, frozenset(members), up, down)

    @classmethod
    def empty(cls) -> "UPSet":
        return cls.make(0, -1, ())

    @classmethod
    def integers(cls) -> "UPSet":
        return cls.line(0, 1)

    @classmethod
    def finite(cls, points: Iterable[int]) -> "UPSet":
        pts = set(points)
        if not pts:
            return cls.empty()
        return cls.make(min(pts), max(pts), pts)

    @classmethod
    def ray(cls, base: int, period: int, direction: int = 1) -> "UPSet":
        """``base + period N`` (direction +1) or ``base - period N`` (direction -1)."""
        if period <= 0:
            raise ValueError("period must be positive")
        tail = (period, frozenset([base % period]))
        if direction > 0:
            return cls.make(base, base - 1, (), up=tail)
        return cls.make(base + 1, base, (), down=tail)

    @classmethod
    def line(cls, base: int, period: int) -> "UPSet":
        if period <= 0:
            raise ValueError("period must be positive")
        tail = (period, frozenset([base % period]))
        return cls.make(0, -1, (), up=tail, down=tail)

    # -- queries ----------------------------------------------------------

    def member(self, n: int) -> bool:
        if n > self.hi:
            return _in_tail(n, self.up)
        if n < self.lo:
            return _in_tail(n, self.down)
        return n in self.mid

    __contains__ = member

    def is_empty(self) -> bool:
        return not self.mid and not self.up[1] and not self.down[1]

    def is_finite(self) -> bool:
        return not self.up[1] and not self.down[1]

    def elements_in(self, lo: int, hi: int) -> set:
        return {n for n in range(lo, hi + 1) if self.member(n)}

    def some_element(self) -> Optional[int]:
        """A member of the set (closest to the window), or ``None`` if empty."""
        if self.mid:
            return min(self.mid)
        p, res = self.up
        if res:
            n = self.hi + 1
            while n % p not in res:
                n += 1
            return n
        q, res = self.down
        if res:
            n = self.lo - 1
            while n % q not in res:
                n -= 1
            return n
        return None

    def decompose(self):
        """``(points, rays, lines)`` whose union is the set.

        Rays are ``(base, period, direction)`` and lines ``(base, period)``.
        Residue classes shared by both tails become lines.
        """
        p, up = self.up
        q, down = self.down
        period = _lcm(p, q)
        lines, rays = [], []
        covered = set()
        for r in range(period):
            if (r % p) not in up or (r % q) not in down:
                continue
            # the class is a whole line only if the window has no gap in it
            first = self.lo + (r - self.lo) % period
            if all(n in self.mid for n in range(first, self.hi + 1, period)):
                lines.append((r, period))
                covered.add(r)
        # tails restricted to residues not already on a line
        start = self.hi + 1
        for n in range(start, start + period):
            if (n % p) in up and (n % period) not in covered:
                rays.append((n, period, 1))
        end = self.lo - 1
        for n in range(end, end - period, -1):
            if (n % q) in down and (n % period) not in covered:
                rays.append((n, period, -1))
        points = sorted(n for n in self.mid if n % period not in covered)
        return points, rays, lines

    # -- combinators ------------------------------------------------------

    def _combine(self, other: "UPSet", op) -> "UPSet":
        up_p = _lcm(self.up[0], other.up[0])
        down_p = _lcm(self.down[0], other.down[0])
        up = (up_p, frozenset(r for r in range(up_p)
                              if op(_in_tail(r, self.up), _in_tail(r, other.up))))
        down = (down_p, frozenset(r for r in range(down_p)
                                  if op(_in_tail(r, self.down), _in_tail(r, other.down))))
        lo = min(self.lo, other.lo)
        hi = max(self.hi, other.hi, lo - 1)
        mid = [n for n in range(lo, hi + 1) if op(self.member(n), other.member(n))]
        return UPSet.make(lo, hi, mid, up, down)

    def union(self, other: "UPSet") -> "UPSet":
        return self._combine(other, lambda a, b: a or b)

    def intersection(self, other: "UPSet") -> "UPSet":
        return self._combine(other, lambda a, b: a and b)

    def difference(self, other: "UPSet") -> "UPSet":
        return self._combine(other, lambda a, b: a and not b)

    def complement(self) -> "UPSet":
        return UPSet.integers().difference(self)

    def negate(self) -> "UPSet":
        p, up = self.up
        q, down = self.down
        return UPSet.make(-self.hi, -self.lo, (-n for n in self.mid),
                          up=(q, frozenset((-r) % q for r in down)),
                          down=(p, frozenset((-r) % p for r in up)))

    def add_constant(self, c: int) -> "UPSet":
        p, up = self.up
        q, down = self.down
        return UPSet.make(self.lo + c, self.hi + c, (n + c for n in self.mid),
                          up=(p, frozenset((r + c) % p for r in up)),
                          down=(q, frozenset((r + c) % q for r in down)))

    def scale(self, k: int) -> "UPSet":
        """``{k n : n in self}`` for ``k >= 0``."""
        if k < 0:
            raise ValueError("scale factor must be non-negative")
        if k == 0:
            return UPSet.empty() if self.is_empty() else UPSet.finite([0])
        p, up = self.up
        q, down = self.down
        return UPSet.make(k * self.lo, k * self.hi + k - 1, (k * n for n in self.mid),
                          up=(k * p, frozenset(k * r for r in up)),
                          down=(k * q, frozenset(k * r for r in down)))

    def minkowski_sum(self, other: "UPSet") -> "UPSet":
        if self.is_empty() or other.is_empty():
            return UPSet.empty()
        a_atoms = _atoms(self)
        b_atoms = _atoms(other)
        result = UPSet.empty()
        points = set()
        for a in a_atoms:
            for b in b_atoms:
                s = _atom_sum(a, b)
                if s[0] == "point":
                    points.add(s[1])
                else:
                    result = result.union(_atom_set(s))
        return result.union(UPSet.finite(points))

    def is_subset(self, other: "UPSet") -> bool:
        return self.difference(other).is_empty()

    def equal(self, other: "UPSet") -> bool:
        return self == other

    def intersect_nonempty(self, other: "UPSet") -> Optional[int]:
        return self.intersection(other).some_element()

    def __str__(self):
        points, rays, lines = self.decompose()
        parts = [str(n) for n in points]
        parts += [f"{b}{'+' if d > 0 else '-'}{p}N" for b, p, d in rays]
        parts += [f"{b}+{p}Z" for b, p in lines]
        return "{" + ", ".join(parts) + "}"


def intersect_nonempty(a: UPSet, b: UPSet) -> Optional[int]:
    return a.intersect_nonempty(b)


def _atoms(s: UPSet) -> list:
    points, rays, lines = s.decompose()
    atoms = [("point", n) for n in points]
    atoms += [("ray", b, p, d) for b, p, d in rays]
    atoms += [("line", b, p) for b, p in lines]
    return atoms


def _atom_sum(a, b):
    if a[0] == "point" and b[0] == "point":
        return ("point", a[1] + b[1])
    if a[0] == "point" or b[0] == "point":
        pt, other = (a, b) if a[0] == "point" else (b, a)
        return (other[0], other[1] + pt[1]) + tuple(other[2:])
    base = a[1] + b[1]
    g = gcd(a[2], b[2])
    if a[0] == "ray" and b[0] == "ray" and a[3] == b[3]:
        return ("semigroup", base, a[2], b[2], a[3])
    return ("line", base, g)


def _atom_set(atom) -> UPSet:
    kind = atom[0]
    if kind == "ray":
        return UPSet.ray(atom[1], atom[2], atom[3])
    if kind == "line":
        return UPSet.line(atom[1], atom[2])
    _, base, p1, p2, direction = atom
    s = numerical_semigroup([p1, p2])
    if direction < 0:
        s = s.negate()
    return s.add_constant(base)


def numerical_semigroup(gens: Iterable[int]) -> UPSet:
    """The additive submonoid of N generated by positive integers ``gens``."""
    gs = sorted(set(gens))
    if not gs:
        return UPSet.finite([0])
    if gs[0] <= 0:
        raise ValueError("generators must be positive")
    g = 0
    for x in gs:
        g = gcd(g, x)
    red = [x // g for x in gs]
    smallest = red[0]
    reach = [True]
    run = 1
    n = 0
    # once `smallest` consecutive values are reachable, everything above is
    while run < smallest:
        n += 1
        ok = any(n >= x and reach[n - x] for x in red)
        reach.append(ok)
        run = run + 1 if ok else 0
    threshold = n - smallest + 1
    points = [g * k for k in range(threshold) if reach[k]]
    return UPSet.make(0, g * threshold - 1, points,
                      up=(g, frozenset([0])))
