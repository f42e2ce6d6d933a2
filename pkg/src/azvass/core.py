"""Affine Z-VASS data model, operational semantics and a bounded search oracle.

Matrices are tuples of row tuples and vectors are tuples of Python ints, so
every value is exact and hashable.  Transitions are identified by their index
in declaration order; runs store those indices.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

Matrix = tuple  # tuple[tuple[int, ...], ...], row-major
Vector = tuple  # tuple[int, ...]


class VassError(Exception):
    """Base class for structural errors in systems, runs and queries."""


class DimensionError(VassError):
    pass


class StateMismatch(VassError):
    pass


class InvalidStep(VassError):
    """A run step does not start where the previous step ended."""

    def __init__(self, index: int, message: str):
        super().__init__(f"step {index}: {message}")
        self.index = index


# ---------------------------------------------------------------------------
# matrix and vector helpers


def identity(d: int) -> Matrix:
    return tuple(tuple(int(i == j) for j in range(d)) for i in range(d))


def zero_matrix(d: int) -> Matrix:
    return tuple((0,) * d for _ in range(d))


def zero_vector(d: int) -> Vector:
    return (0,) * d


def unit_vector(d: int, i: int) -> Vector:
    return tuple(int(j == i) for j in range(d))


def ones_matrix(d: int) -> Matrix:
    return tuple((1,) * d for _ in range(d))


def as_matrix(rows: Iterable[Iterable[int]]) -> Matrix:
    m = tuple(tuple(int(x) for x in row) for row in rows)
    if any(len(row) != len(m) for row in m):
        raise DimensionError("matrix is not square")
    return m


def as_vector(entries: Iterable[int]) -> Vector:
    return tuple(int(x) for x in entries)


def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    if len(a) != len(b):
        raise DimensionError(f"cannot multiply {len(a)}x{len(a)} by {len(b)}x{len(b)}")
    cols = list(zip(*b)) if b else []
    return tuple(tuple(sum(x * y for x, y in zip(row, col)) for col in cols) for row in a)


def mat_vec(a: Matrix, v: Vector) -> Vector:
    if len(a) != len(v):
        raise DimensionError(f"matrix of dim {len(a)} applied to vector of dim {len(v)}")
    return tuple(sum(x * y for x, y in zip(row, v)) for row in a)


def vec_add(u: Vector, v: Vector) -> Vector:
    if len(u) != len(v):
        raise DimensionError("vector dimensions differ")
    return tuple(x + y for x, y in zip(u, v))


def vec_sub(u: Vector, v: Vector) -> Vector:
    if len(u) != len(v):
        raise DimensionError("vector dimensions differ")
    return tuple(x - y for x, y in zip(u, v))


def vec_scale(c: int, v: Vector) -> Vector:
    return tuple(c * x for x in v)


def mat_power(a: Matrix, n: int) -> Matrix:
    result = identity(len(a))
    base = a
    while n:
        if n & 1:
            result = mat_mul(result, base)
        base = mat_mul(base, base)
        n >>= 1
    return result


def block_diag(a: Matrix, b: Matrix) -> Matrix:
    da, db = len(a), len(b)
    rows = [tuple(row) + (0,) * db for row in a]
    rows += [(0,) * da + tuple(row) for row in b]
    return tuple(rows)


def vec_norm(v: Vector) -> int:
    """Max-norm of a vector (0 for the empty vector)."""
    return max((abs(x) for x in v), default=0)


def mat_norm(a: Matrix) -> int:
    """Max over columns of the column max-norm, i.e. the largest |entry|."""
    return max((abs(x) for row in a for x in row), default=0)


def is_identity(a: Matrix) -> bool:
    return a == identity(len(a))


# ---------------------------------------------------------------------------
# systems


@dataclass(frozen=True)
class Transition:
    src: str
    tgt: str
    mat: Matrix
    vec: Vector

    @property
    def dim(self) -> int:
        return len(self.vec)

    def apply(self, values: Vector) -> Vector:
        return vec_add(mat_vec(self.mat, values), self.vec)


@dataclass(frozen=True)
class AffineVass:
    """An affine Z-VASS ``(d, Q, T)``; states keep their declaration order."""

    d: int
    states: tuple
    transitions: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "transitions", tuple(self.transitions))
        if self.d < 0:
            raise DimensionError("dimension must be non-negative")
        if len(set(self.states)) != len(self.states):
            raise VassError("duplicate state identifiers")
        known = set(self.states)
        for i, t in enumerate(self.transitions):
            if t.src not in known or t.tgt not in known:
                raise VassError(f"transition {i} uses an undeclared state")
            if len(t.mat) != self.d or any(len(r) != self.d for r in t.mat):
                raise DimensionError(f"transition {i}: matrix is not {self.d}x{self.d}")
            if len(t.vec) != self.d:
                raise DimensionError(f"transition {i}: vector has dimension {len(t.vec)}")

    @classmethod
    def build(cls, d: int, states: Iterable[str], transitions: Iterable[tuple]) -> "AffineVass":
        """Convenience constructor: transitions given as ``(src, tgt, mat|None, vec|None)``."""
        ts = []
        for src, tgt, mat, vec in transitions:
            ts.append(
                Transition(
                    src,
                    tgt,
                    identity(d) if mat is None else as_matrix(mat),
                    zero_vector(d) if vec is None else as_vector(vec),
                )
            )
        return cls(d, tuple(states), tuple(ts))

    @property
    def matrices(self) -> list:
        """Distinct transition matrices, in first-occurrence order."""
        seen = {}
        for t in self.transitions:
            seen.setdefault(t.mat, None)
        return list(seen)

    def is_zvass(self) -> bool:
        ident = identity(self.d)
        return all(t.mat == ident for t in self.transitions)

    def norm(self) -> int:
        """||T||: the largest max-norm over all transition vectors and matrices."""
        return max(
            (max(vec_norm(t.vec), mat_norm(t.mat)) for t in self.transitions),
            default=0,
        )

    def outgoing(self, state: str) -> list:
        return [i for i, t in enumerate(self.transitions) if t.src == state]


class Configuration(NamedTuple):
    state: str
    values: Vector

    def __str__(self):
        return f"{self.state}({', '.join(map(str, self.values))})"


@dataclass(frozen=True)
class Run:
    start: Configuration
    steps: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))

    def __len__(self):
        return len(self.steps)


# ---------------------------------------------------------------------------
# semantics


def apply_transition(t: Transition, c: Configuration) -> Configuration:
    if c.state != t.src:
        raise StateMismatch(f"transition leaves {t.src!r} but configuration is in {c.state!r}")
    if len(c.values) != t.dim:
        raise DimensionError(f"configuration has dimension {len(c.values)}, transition {t.dim}")
    return Configuration(t.tgt, t.apply(c.values))


def word_effect(word: Sequence[Transition], u: Vector):
    """Return ``(M(w), w(u))`` for a word of transitions, path or not.

    ``M(w t) = M(t) . M(w)`` and ``w t(u) = M(t) . w(u) + b(t)``.
    """
    d = len(u)
    m = identity(d)
    v = tuple(u)
    for t in word:
        if t.dim != d:
            raise DimensionError("transition dimension differs from the vector")
        m = mat_mul(t.mat, m)
        v = t.apply(v)
    return m, v


def replay(vass: AffineVass, run: Run) -> list:
    """Configurations visited by ``run``; raises :class:`InvalidStep` on the first bad step."""
    if len(run.start.values) != vass.d:
        raise DimensionError("start configuration has the wrong dimension")
    if run.start.state not in vass.states:
        raise VassError(f"unknown state {run.start.state!r}")
    configs = [run.start]
    for i, idx in enumerate(run.steps):
        if not 0 <= idx < len(vass.transitions):
            raise InvalidStep(i, f"no transition with index {idx}")
        t = vass.transitions[idx]
        if t.src != configs[-1].state:
            raise InvalidStep(i, f"transition {idx} leaves {t.src!r}, run is in {configs[-1].state!r}")
        configs.append(Configuration(t.tgt, t.apply(configs[-1].values)))
    return configs


def first_invalid_step(vass: AffineVass, run: Run):
    """Index of the first invalid step of ``run``, or ``None`` when it replays."""
    try:
        replay(vass, run)
    except InvalidStep as exc:
        return exc.index
    return None


def run_reaches(vass: AffineVass, run: Run, target: Configuration) -> bool:
    try:
        return replay(vass, run)[-1] == target
    except VassError:
        return False


# ---------------------------------------------------------------------------
# classification and size


@dataclass(frozen=True)
class MatrixClassSet:
    reset: bool = False
    permutation: bool = False
    transfer: bool = False
    copyless: bool = False
    copy: bool = False
    identity: bool = False

    FLAGS = ("reset", "permutation", "transfer", "copyless", "copy", "identity")

    def __and__(self, other: "MatrixClassSet") -> "MatrixClassSet":
        return MatrixClassSet(**{f: getattr(self, f) and getattr(other, f) for f in self.FLAGS})

    def names(self) -> list:
        return [f for f in self.FLAGS if getattr(self, f)]


ALL_CLASSES = MatrixClassSet(*([True] * 6))


def classify_matrix(a: Matrix) -> MatrixClassSet:
    d = len(a)
    if any(x not in (0, 1) for row in a for x in row):
        return MatrixClassSet()
    row_ones = [sum(row) for row in a]
    col_ones = [sum(a[i][j] for i in range(d)) for j in range(d)]
    off_diag = any(a[i][j] for i in range(d) for j in range(d) if i != j)
    return MatrixClassSet(
        reset=not off_diag,
        permutation=all(r == 1 for r in row_ones) and all(c == 1 for c in col_ones),
        transfer=all(c == 1 for c in col_ones),
        copyless=all(c <= 1 for c in col_ones),
        copy=all(r == 1 for r in row_ones),
        identity=a == identity(d),
    )


def classify_vass(vass: AffineVass) -> MatrixClassSet:
    result = ALL_CLASSES
    for t in vass.transitions:
        result = result & classify_matrix(t.mat)
    return result


def vass_size(vass: AffineVass) -> int:
    """|V| = d + |Q| + (d^2 + d) |T| max(1, ceil(log2(||T|| + 1)))."""
    n = vass.norm()
    # ceil(log2(n + 1)) is the bit length of n for every n >= 0
    bits = max(1, n.bit_length())
    return vass.d + len(vass.states) + (vass.d ** 2 + vass.d) * len(vass.transitions) * bits


# ---------------------------------------------------------------------------
# bounded breadth-first oracle


@dataclass(frozen=True)
class Bounds:
    max_steps: int = 20
    max_abs_value: int = 64
    max_visited: int = 200_000

    def __post_init__(self):
        if min(self.max_steps, self.max_abs_value, self.max_visited) <= 0:
            raise ValueError("bounds must be positive")


@dataclass
class SearchStats:
    visited: int = 0
    pruned: int = 0
    depth: int = 0
    truncated: bool = False


@dataclass
class Found:
    run: Run
    stats: SearchStats = field(default_factory=SearchStats)

    found = True


@dataclass
class Exhausted:
    """No run within the bounds; ``stats.pruned``/``truncated`` say whether bounds bit."""

    stats: SearchStats

    found = False


def explore(vass: AffineVass, start: Configuration, bounds: Bounds, target=None):
    """Breadth-first exploration from ``start`` within ``bounds``.

    Returns ``(parents, stats, hit)`` where ``parents`` maps every visited
    configuration to ``(previous configuration, transition index)`` and
    ``hit`` is ``target`` if it was reached.
    """
    stats = SearchStats()
    parents = {start: None}
    frontier = [start]
    out = {s: [] for s in vass.states}
    for i, t in enumerate(vass.transitions):
        out[t.src].append(i)
    if target is not None and start == target:
        stats.visited = 1
        return parents, stats, target
    for depth in range(1, bounds.max_steps + 1):
        nxt = []
        for conf in frontier:
            for i in out[conf.state]:
                t = vass.transitions[i]
                values = t.apply(conf.values)
                if any(abs(x) > bounds.max_abs_value for x in values):
                    stats.pruned += 1
                    continue
                c = Configuration(t.tgt, values)
                if c in parents:
                    continue
                if len(parents) >= bounds.max_visited:
                    stats.truncated = True
                    continue
                parents[c] = (conf, i)
                nxt.append(c)
                if target is not None and c == target:
                    stats.visited = len(parents)
                    stats.depth = depth
                    return parents, stats, c
        if not nxt:
            break
        stats.depth = depth
        frontier = nxt
    stats.visited = len(parents)
    return parents, stats, None


def _trace(parents, conf) -> list:
    steps = []
    while parents[conf] is not None:
        conf, idx = parents[conf]
        steps.append(idx)
    steps.reverse()
    return steps


def bfs_reach(vass: AffineVass, source: Configuration, target: Configuration,
              bounds: Bounds = Bounds()):
    """Semi-decision oracle: ``Found(run)`` or ``Exhausted(stats)`` within ``bounds``."""
    if len(source.values) != vass.d or len(target.values) != vass.d:
        raise DimensionError("configuration dimension differs from the system")
    parents, stats, hit = explore(vass, source, bounds, target)
    if hit is None:
        return Exhausted(stats)
    return Found(Run(source, tuple(_trace(parents, hit))), stats)


def reachable_configurations(vass: AffineVass, source: Configuration, bounds: Bounds) -> set:
    """All configurations reachable from ``source`` by runs respecting ``bounds``."""
    parents, _, _ = explore(vass, source, bounds)
    return set(parents)


@dataclass(frozen=True)
class Query:
    """``source ->* target`` (kind "reach") or ``source ->* target' >= target`` (kind "cover")."""

    kind: str
    source: Configuration
    target: Configuration

    def __post_init__(self):
        if self.kind not in ("reach", "cover"):
            raise ValueError(f"unknown query kind {self.kind!r}")


def fresh_state(taken, base: str) -> str:
    """``base`` or ``base_<n>`` for the first ``n`` not already in ``taken``."""
    if base not in taken:
        return base
    n = 1
    while f"{base}_{n}" in taken:
        n += 1
    return f"{base}_{n}"
