"""Diophantine polynomials compiled to monogenic affine Z-VASS.

A counter program guesses a valuation, evaluates every monomial with
transfer / remove / square / multiply macros and accumulates the signed
results in one counter.  The only non-identity update is the squaring step
``z <- z + 2y + 1``; all squaring macros share one matrix
``A = I + sum_j 2 E[z_j, y_j]`` whose vector selects the active ``z_j``.
Zero tests are not instructions of the target model: a tested counter is
simply never touched again, and the final reachability query asks for the
all-zero vector.

The squaring loop applies the ``z`` update before incrementing ``y``, so
after ``n`` iterations ``z = 0 + 1 + 3 + ... + (2n - 1) = n^2``.
"""

from __future__ import annotations

import ast
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

from ..core import (AffineVass, Configuration, Query, Run, Transition, VassError, identity,
                    replay, unit_vector, vec_add, zero_vector)


class PolyError(VassError):
    pass


class PolyParseError(PolyError):
    def __init__(self, offset: int, message: str):
        """``offset`` is 0-based; the reported column is 1-based."""
        super().__init__(f"column {offset + 1}: {message}")
        self.col = offset + 1


class ProgramError(PolyError):
    pass


# ---------------------------------------------------------------------------
# polynomials


@dataclass(frozen=True)
class Polynomial:
    nvars: int
    monomials: tuple   # (coefficient, exponent tuple), merged, nonzero, sorted

    @classmethod
    def from_terms(cls, nvars: int, terms) -> "Polynomial":
        acc = {}
        for c, e in terms:
            e = tuple(e) + (0,) * (nvars - len(e))
            if any(x < 0 for x in e):
                raise PolyError("negative exponent")
            acc[e] = acc.get(e, 0) + c
        mons = tuple(sorted(((c, e) for e, c in acc.items() if c),
                            key=lambda m: (-sum(m[1]), tuple(-x for x in m[1]))))
        if not mons:
            mons = ((0, (0,) * nvars),)
        return cls(nvars, mons)

    def evaluate(self, xs: Sequence[int]) -> int:
        total = 0
        for c, e in self.monomials:
            term = c
            for x, k in zip(xs, e):
                term *= x ** k
            total += term
        return total

    @property
    def degree(self) -> int:
        return max(sum(e) for _, e in self.monomials)

    def __str__(self):
        parts = []
        for c, e in self.monomials:
            factors = [f"x{i + 1}" + (f"^{k}" if k > 1 else "") for i, k in enumerate(e) if k]
            mag = abs(c)
            body = "*".join(([str(mag)] if mag != 1 or not factors else []) + factors)
            sign = "-" if c < 0 else "+"
            parts.append((sign, body))
        out = ("-" if parts[0][0] == "-" else "") + parts[0][1]
        for sign, body in parts[1:]:
            out += f" {sign} {body}"
        return out


def _poly_mul(a: dict, b: dict) -> dict:
    out = {}
    for ea, ca in a.items():
        for eb, cb in b.items():
            e = tuple(x + y for x, y in zip(ea, eb))
            out[e] = out.get(e, 0) + ca * cb
    return out


def _poly_add(a: dict, b: dict, sign: int = 1) -> dict:
    out = dict(a)
    for e, c in b.items():
        out[e] = out.get(e, 0) + sign * c
    return out


def parse_polynomial(text: str) -> Polynomial:
    """Integer coefficients, variables ``x<k>`` (k >= 1), ``+ - * ^``, parentheses."""
    if "**" in text:
        raise PolyParseError(text.index("**"), "use '^' for powers")
    # '^' becomes '**' for Python's expression grammar; keep a map back to input columns
    src, cols = [], []
    for i, ch in enumerate(text):
        if ch == "^":
            src.append("**")
            cols += [i, i]
        else:
            src.append(ch)
            cols.append(i)
    source = "".join(src)
    cols.append(len(text))

    lead = len(source) - len(source.lstrip())

    def col(node) -> int:
        return cols[min(getattr(node, "col_offset", 0) + lead, len(cols) - 1)]

    if not source.strip():
        raise PolyParseError(0, "empty polynomial")
    try:
        tree = ast.parse(source.strip(), mode="eval")
    except SyntaxError as exc:
        if not exc.offset:
            # the parser gives no position when the input ends too early
            raise PolyParseError(len(text.rstrip()), "unexpected end of input") from None
        off = exc.offset - 1 + lead
        msg = exc.msg if exc.msg != "invalid syntax" else "syntax error"
        raise PolyParseError(cols[min(off, len(cols) - 1)], msg) from None
    names = sorted((node for node in ast.walk(tree) if isinstance(node, ast.Name)),
                   key=lambda node: node.col_offset)
    nvars = 0
    for node in names:
        n = node.id
        if len(n) < 2 or n[0] != "x" or not n[1:].isdigit() or int(n[1:]) < 1:
            raise PolyParseError(col(node), f"unknown variable {n!r}; expected x1, x2, ...")
        nvars = max(nvars, int(n[1:]))
    nvars = max(nvars, 1)
    zero = (0,) * nvars

    def conv(node) -> dict:
        if isinstance(node, ast.Constant) and isinstance(node.value, int) \
                and not isinstance(node.value, bool):
            return {zero: node.value}
        if isinstance(node, ast.Name):
            k = int(node.id[1:]) - 1
            return {tuple(int(i == k) for i in range(nvars)): 1}
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            inner = conv(node.operand)
            return {e: -c for e, c in inner.items()} if isinstance(node.op, ast.USub) else inner
        if isinstance(node, ast.BinOp):
            if isinstance(node.op, ast.Add):
                return _poly_add(conv(node.left), conv(node.right))
            if isinstance(node.op, ast.Sub):
                return _poly_add(conv(node.left), conv(node.right), -1)
            if isinstance(node.op, ast.Mult):
                return _poly_mul(conv(node.left), conv(node.right))
            if isinstance(node.op, ast.Pow):
                exp = node.right
                if not (isinstance(exp, ast.Constant) and isinstance(exp.value, int)
                        and exp.value >= 0):
                    raise PolyParseError(col(exp),
                                         "exponent must be a non-negative integer")
                base = conv(node.left)
                out = {zero: 1}
                for _ in range(exp.value):
                    out = _poly_mul(out, base)
                return out
        raise PolyParseError(col(node), "unsupported expression")

    terms = conv(tree.body)
    return Polynomial.from_terms(nvars, [(c, e) for e, c in terms.items()])


# ---------------------------------------------------------------------------
# counter programs


@dataclass(frozen=True)
class Add:
    counter: int
    const: int
    tag: str = ""


@dataclass(frozen=True)
class AffineStep:
    """``z <- z + 2y + 1`` through the shared matrix."""
    z: int
    y: int
    tag: str = ""


@dataclass(frozen=True)
class ZeroTest:
    counter: int
    tag: str = ""


@dataclass(frozen=True)
class Loop:
    """Body repeated any number of times.

    The canonical schedule runs it ``value(guard) // step`` times, or
    ``valuation[var]`` times for initialization loops.
    """
    body: tuple
    guard: Optional[int] = None
    step: int = 1
    var: Optional[int] = None
    tag: str = ""


Instruction = Union[Add, AffineStep, ZeroTest, Loop]


@dataclass
class CounterProgram:
    counters: list                 # counter names
    body: list                     # top-level instructions
    squares: list                  # (z, y) per squaring macro, in order
    groups: dict                   # variable index -> copy counters
    result: int                    # accumulator counter
    polynomial: Optional[Polynomial] = None
    macros: dict = field(default_factory=dict)   # macro kind -> number of invocations

    @property
    def dim(self) -> int:
        return len(self.counters)


class _Builder:
    def __init__(self):
        self.counters = []
        self.body = []
        self.squares = []
        self.macros = {"transfer": 0, "remove": 0, "square": 0, "mult": 0, "const-mult": 0}

    def new(self, name: str) -> int:
        self.counters.append(name)
        return len(self.counters) - 1

    def _move(self, kind: str, src: int, dsts: Sequence[int], sign: int, tag: str):
        self.macros[kind] += 1
        tag = tag or f"{kind}#{self.macros[kind]}"
        body = (Add(src, -1, tag),) + tuple(Add(t, sign, tag) for t in dsts)
        self.body.append(Loop(body, guard=src, tag=tag))
        self.body.append(ZeroTest(src, tag))

    def transfer(self, src: int, dsts: Sequence[int], tag: str = ""):
        """``dst += src`` for every ``dst``; ``src = 0``."""
        self._move("transfer", src, dsts, 1, tag)

    def remove(self, src: int, dsts: Sequence[int], tag: str = ""):
        """``dst -= src`` for every ``dst``; ``src = 0``."""
        self._move("remove", src, dsts, -1, tag)

    def square(self, sa: int, sb: int, t: int):
        """``t += s^2`` from two copies ``sa``, ``sb`` of ``s``; both end at 0."""
        self.macros["square"] += 1
        tag = f"square#{self.macros['square']}"
        x, y, z = (self.new(f"{tag}.{n}") for n in "xyz")
        self.squares.append((z, y))
        self.transfer(sa, [x], tag)
        body = (Add(x, -1, tag), AffineStep(z, y, tag), Add(y, 1, tag))
        self.body.append(Loop(body, guard=x, tag=tag))
        self.body.append(ZeroTest(x, tag))
        self.transfer(z, [t], tag)
        self.remove(sb, [y], tag)
        self.body.append(ZeroTest(y, tag))

    def mult(self, s: Sequence[int], s2: Sequence[int], t: int):
        """``t += s * s'`` from three copies of each operand, via ``2mn = (m+n)^2 - m^2 - n^2``."""
        self.macros["mult"] += 1
        tag = f"mult#{self.macros['mult']}"
        sq1, sq2 = self.new(f"{tag}.x"), self.new(f"{tag}.y")
        self.square(s[0], s[1], sq1)
        self.square(s2[0], s2[1], sq2)
        za, zb = self.new(f"{tag}.z'a"), self.new(f"{tag}.z'b")
        self.transfer(s[2], [za, zb], tag)
        self.transfer(s2[2], [za, zb], tag)
        z = self.new(f"{tag}.z")
        self.square(za, zb, z)
        self.remove(sq1, [z], tag)
        self.remove(sq2, [z], tag)
        self.body.append(Loop((Add(z, -2, tag), Add(t, 1, tag)), guard=z, step=2, tag=tag))
        self.body.append(ZeroTest(z, tag))

    def const_mult(self, s: int, c: int, t: int):
        """``t += c * s``; ``s = 0``."""
        self.macros["const-mult"] += 1
        tag = f"const-mult#{self.macros['const-mult']}"
        self.body.append(Loop((Add(s, -1, tag), Add(t, c, tag)), guard=s, tag=tag))
        self.body.append(ZeroTest(s, tag))


def _split(exps: tuple):
    """``("square", half)`` or ``("mult", left, right)`` for a monomial of degree >= 2."""
    if all(e % 2 == 0 for e in exps):
        return ("square", tuple(e // 2 for e in exps))
    flat = [i for i, e in enumerate(exps) for _ in range(e)]
    half = len(flat) // 2
    left = [0] * len(exps)
    for i in flat[:half]:
        left[i] += 1
    right = tuple(e - l for e, l in zip(exps, left))
    return ("mult", tuple(left), right)


def compile_poly(poly: Polynomial) -> CounterProgram:
    """Counter program reaching the all-zero vector iff ``poly`` has a root in ``N^k``.

    Every distinct sub-monomial is evaluated once and fanned out into as many
    copies as it has consumers: two per squaring, three per multiplication
    operand, one per use as a top-level monomial.  Programs always contain
    at least one squaring step, so lowering yields exactly one non-identity
    matrix.
    """
    k = poly.nvars
    uses = {}
    plan = {}

    def visit(e):
        if e in plan or sum(e) <= 1:
            return
        plan[e] = _split(e)
        for child in plan[e][1:]:
            visit(child)

    for c, e in poly.monomials:
        if sum(e) >= 1:
            uses[e] = uses.get(e, 0) + 1
            visit(e)
    # consumers of each node, largest monomials first so every count is final when read
    for e in sorted(plan, key=lambda e: -sum(e)):
        kind = plan[e][0]
        for child in plan[e][1:]:
            uses[child] = uses.get(child, 0) + (2 if kind == "square" else 3)
    b = _Builder()
    pools = {}
    groups = {}
    for i in range(k):
        unit = tuple(int(j == i) for j in range(k))
        n = uses.get(unit, 0)
        if not n:
            continue
        copies = [b.new(f"x{i + 1}_{j + 1}") for j in range(n)]
        groups[i] = tuple(copies)
        pools[unit] = list(copies)
        b.body.append(Loop(tuple(Add(c, 1, "init") for c in copies), var=i, tag="init"))
    for e in sorted(plan, key=lambda e: (sum(e), e)):
        val = b.new("m[" + ",".join(map(str, e)) + "]")
        step = plan[e]
        if step[0] == "square":
            src = pools[step[1]]
            b.square(src.pop(), src.pop(), val)
        else:
            left, right = pools[step[1]], pools[step[2]]
            b.mult([left.pop() for _ in range(3)], [right.pop() for _ in range(3)], val)
        n = uses[e]
        if n == 1:
            pools[e] = [val]
        else:
            copies = [b.new(f"m[{','.join(map(str, e))}]_{j + 1}") for j in range(n)]
            b.transfer(val, copies, "fan-out")
            pools[e] = copies
    if not b.squares:
        # a linear polynomial needs no squaring; square a counter that stays 0 so the
        # output still carries the shared matrix and keeps the single-matrix shape
        pa, pb, ps = b.new("pad.a"), b.new("pad.b"), b.new("pad.square")
        b.square(pa, pb, ps)
        b.body.append(ZeroTest(ps, "pad"))
    acc = b.new("acc")
    for c, e in poly.monomials:
        if sum(e) == 0:
            if c:
                b.body.append(Add(acc, c, "constant"))
            continue
        s = pools[e].pop()
        mag = abs(c)
        if mag != 1:
            t = b.new(f"coef{len(b.counters)}")
            b.const_mult(s, mag, t)
            s = t
        (b.transfer if c > 0 else b.remove)(s, [acc], "accumulate")
    b.body.append(ZeroTest(acc, "result"))
    assert all(not p for p in pools.values()), "unconsumed copies"
    cp = CounterProgram(b.counters, b.body, b.squares, groups, acc, poly,
                        {m: n for m, n in b.macros.items() if n})
    check_program(cp)
    return cp


def _flatten(body):
    for ins in body:
        if isinstance(ins, Loop):
            for inner in ins.body:
                if isinstance(inner, (Loop, ZeroTest)):
                    raise ProgramError("loop bodies may only hold additive and squaring steps")
                yield inner
        else:
            yield ins


def check_program(cp: CounterProgram):
    """Every counter is zero-tested exactly once and untouched afterwards.

    The shared squaring matrix also moves every other ``z_j`` by ``2 y_j``;
    that is allowed because ``y_j`` is itself zero-tested.
    """
    tested = set()
    registered = set(cp.squares)
    for ins in _flatten(cp.body):
        if isinstance(ins, ZeroTest):
            if ins.counter in tested:
                raise ProgramError(f"counter {cp.counters[ins.counter]} tested twice")
            tested.add(ins.counter)
        elif isinstance(ins, Add):
            if ins.counter in tested:
                raise ProgramError(f"counter {cp.counters[ins.counter]} modified after its test")
        elif isinstance(ins, AffineStep):
            if (ins.z, ins.y) not in registered:
                raise ProgramError("squaring step on an unregistered (z, y) pair")
            if ins.z in tested or ins.y in tested:
                raise ProgramError("squaring step on a tested counter")
    missing = set(range(cp.dim)) - tested
    if missing:
        raise ProgramError("counters never tested: "
                           + ", ".join(cp.counters[i] for i in sorted(missing)))


# ---------------------------------------------------------------------------
# simulation


@dataclass
class IRResult:
    values: tuple
    loop_counts: dict      # top-level loop position -> iterations
    tested: dict           # counter -> value when its test was passed

    @property
    def all_zero(self) -> bool:
        return all(v == 0 for v in self.values)

    @property
    def tests_pass(self) -> bool:
        return all(v == 0 for v in self.tested.values())


def _affine(cp: CounterProgram, values: list, z: int):
    for zj, yj in cp.squares:
        values[zj] += 2 * values[yj]
    values[z] += 1


def run_ir_bounded(cp: CounterProgram, valuation: Sequence[int],
                   counts: Optional[dict] = None, max_iterations: int = 10 ** 6) -> IRResult:
    """Execute the program with the shared-matrix semantics.

    Loop iteration counts come from ``counts`` (top-level position ->
    iterations) when given, otherwise from the canonical schedule driven by
    ``valuation``.
    """
    values = [0] * cp.dim
    used = {}
    tested = {}
    for pos, ins in enumerate(cp.body):
        if isinstance(ins, Add):
            values[ins.counter] += ins.const
        elif isinstance(ins, AffineStep):
            _affine(cp, values, ins.z)
        elif isinstance(ins, ZeroTest):
            tested[ins.counter] = values[ins.counter]
        else:
            if counts is not None and pos in counts:
                n = counts[pos]
            elif ins.var is not None:
                n = valuation[ins.var]
            else:
                n = max(0, values[ins.guard] // ins.step)
            if n < 0 or n > max_iterations:
                raise ProgramError(f"loop at position {pos}: iteration count {n} out of range")
            used[pos] = n
            for _ in range(n):
                for inner in ins.body:
                    if isinstance(inner, Add):
                        values[inner.counter] += inner.const
                    else:
                        _affine(cp, values, inner.z)
    return IRResult(tuple(values), used, tested)


# ---------------------------------------------------------------------------
# lowering


@dataclass
class LoweredProgram:
    vass: AffineVass
    query: Query
    matrix: tuple                  # the shared squaring matrix
    test_points: dict              # counter -> control state where it is tested
    plan: list                     # ("edge", index) | ("loop", position, indices)
    program: CounterProgram

    def canonical_run(self, valuation: Sequence[int]) -> Run:
        """The run following the canonical loop schedule for ``valuation``."""
        sim = run_ir_bounded(self.program, valuation)
        steps = []
        for item in self.plan:
            if item[0] == "edge":
                steps.append(item[1])
            else:
                steps.extend(list(item[2]) * sim.loop_counts[item[1]])
        return Run(self.query.source, tuple(steps))


def shared_matrix(cp: CounterProgram):
    d = cp.dim
    rows = [list(r) for r in identity(d)]
    for z, y in cp.squares:
        rows[z][y] += 2
    return tuple(tuple(r) for r in rows)


def lower_ir(cp: CounterProgram) -> LoweredProgram:
    """Control-flow system for ``cp`` with query ``L0(0) ->* end(0)``."""
    check_program(cp)
    d = cp.dim
    ident = identity(d)
    a = shared_matrix(cp)
    states = ["L0"]
    trans = []
    plan = []
    tests = {}

    def fresh() -> str:
        states.append(f"L{len(states)}")
        return states[-1]

    cur = "L0"
    at_head = False
    pending = None

    def emit(src, tgt, mat, vec) -> int:
        trans.append(Transition(src, tgt, mat, vec))
        return len(trans) - 1

    def leave(force: bool) -> str:
        """Flush pending additions; move off a loop head if ``force``."""
        nonlocal cur, at_head, pending
        if pending is not None or (force and at_head):
            nxt = fresh()
            plan.append(("edge", emit(cur, nxt, ident, pending or zero_vector(d))))
            cur, at_head, pending = nxt, False, None
        return cur

    for pos, ins in enumerate(cp.body):
        if isinstance(ins, Add):
            pending = vec_add(pending or zero_vector(d), vec_scale_unit(d, ins.counter, ins.const))
        elif isinstance(ins, AffineStep):
            leave(True)
            nxt = fresh()
            plan.append(("edge", emit(cur, nxt, a, unit_vector(d, ins.z))))
            cur = nxt
        elif isinstance(ins, ZeroTest):
            tests[ins.counter] = leave(True)
        else:
            leave(True)
            if cur in tests.values():
                # a test point must be passed once, so it cannot serve as a loop head
                nxt = fresh()
                plan.append(("edge", emit(cur, nxt, ident, zero_vector(d))))
                cur = nxt
            head = cur
            steps = []
            vec = None
            for inner in ins.body:
                if isinstance(inner, Add):
                    vec = vec_add(vec or zero_vector(d), vec_scale_unit(d, inner.counter, inner.const))
                else:
                    if vec is not None:
                        steps.append((ident, vec))
                        vec = None
                    steps.append((a, unit_vector(d, inner.z)))
            if vec is not None:
                steps.append((ident, vec))
            idx = []
            src = head
            for j, (mat, v) in enumerate(steps):
                tgt = head if j == len(steps) - 1 else fresh()
                idx.append(emit(src, tgt, mat, v))
                src = tgt
            plan.append(("loop", pos, tuple(idx)))
            at_head = True
    leave(True)
    end = cur
    vass = AffineVass(d, tuple(states), tuple(trans))
    query = Query("reach", Configuration("L0", zero_vector(d)), Configuration(end, zero_vector(d)))
    return LoweredProgram(vass, query, a, tests, plan, cp)


def vec_scale_unit(d: int, i: int, c: int):
    v = [0] * d
    v[i] = c
    return tuple(v)


def non_identity_matrices(vass: AffineVass) -> set:
    ident = identity(vass.d)
    return {t.mat for t in vass.transitions if t.mat != ident}


# ---------------------------------------------------------------------------
# audit


@dataclass
class AuditReport:
    ok: bool
    violations: list

    def __bool__(self):
        return self.ok


def zero_test_audit(low: LoweredProgram, run: Run) -> AuditReport:
    """Replay ``run`` and check each tested counter is zero at its test point and stays zero."""
    configs = replay(low.vass, run)
    problems = []
    for counter, state in sorted(low.test_points.items()):
        name = low.program.counters[counter]
        hits = [k for k, c in enumerate(configs) if c.state == state]
        if len(hits) != 1:
            problems.append(f"{name}: test point {state} visited {len(hits)} times")
            continue
        k = hits[0]
        if configs[k].values[counter] != 0:
            problems.append(f"{name}: value {configs[k].values[counter]} at its test")
            continue
        for j in range(k + 1, len(configs)):
            if configs[j].values[counter] != 0:
                problems.append(f"{name}: changed to {configs[j].values[counter]} after its test")
                break
    return AuditReport(not problems, problems)
