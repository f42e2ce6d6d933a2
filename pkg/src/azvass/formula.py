"""Existential linear-arithmetic formulas for reachability, in SMT-LIB 2 syntax.

The formula ``phi(u, v)`` is satisfiable with the counters fixed to ``u`` and
``v`` iff ``p(u) ->* q(v)``.  Identity-matrix systems are encoded directly;
systems with a finite monoid are encoded through their reduced system.

Each transition gets a natural unknown ``x`` counting its uses, constrained
by flow balance and the effect equation.  Connectivity of the support is
expressed either with one distance unknown ``z`` per state (every visited
state other than the source is entered by a used transition from a state one
step closer to the source) or as an explicit disjunction over connected
supports.

Formulas are plain nested lists (s-expressions); :func:`to_smtlib`,
:func:`parse_smtlib` and :func:`evaluate` work on that representation.
"""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .core import AffineVass, VassError, zero_vector
from .monoid import MonoidCaps
from .reduce import reduce_afmp, require_finite_monoid

SExpr = object   # int | str | list


class FormulaError(VassError):
    pass


class SmtParseError(FormulaError):
    def __init__(self, pos: int, message: str):
        super().__init__(f"offset {pos}: {message}")
        self.pos = pos


@dataclass
class ReachFormula:
    """Declared integer constants plus a list of assertions (implicitly conjoined)."""
    dim: int
    source: str
    target: str
    consts: list                       # every declared constant, u/v first
    assertions: list
    inner: Optional[AffineVass] = None   # the identity-matrix system that was encoded
    start: Optional[str] = None
    end: Optional[str] = None
    encoding: str = "supports"
    comments: list = field(default_factory=list)
    reduced: bool = False                # counters of ``inner`` are (source, target) blocks

    @property
    def u_names(self) -> list:
        return [f"u_{i}" for i in range(self.dim)]

    @property
    def v_names(self) -> list:
        return [f"v_{i}" for i in range(self.dim)]

    def body(self) -> list:
        return ["and"] + list(self.assertions)

    def with_query(self, u, v) -> list:
        """Assertions pinning the counters to a concrete query."""
        pins = [["=", n, int(a)] for n, a in zip(self.u_names, u)]
        pins += [["=", n, int(b)] for n, b in zip(self.v_names, v)]
        return pins

    def holds(self, assignment: dict) -> bool:
        return all(evaluate(a, assignment) for a in self.assertions)


# ---------------------------------------------------------------------------
# building blocks


def _sum(terms: list) -> SExpr:
    terms = [t for t in terms if t != 0]
    if not terms:
        return 0
    if len(terms) == 1:
        return terms[0]
    return ["+"] + terms


def _scaled(c: int, name: str) -> SExpr:
    if c == 1:
        return name
    return ["*", c, name]


def _and(items: list) -> SExpr:
    if not items:
        return "true"
    if len(items) == 1:
        return items[0]
    return ["and"] + items


def _or(items: list) -> SExpr:
    if not items:
        return "false"
    if len(items) == 1:
        return items[0]
    return ["or"] + items


def _x(i: int) -> str:
    return f"x_{i}"


def _z(k: int) -> str:
    return f"z_{k}"


def _core_constraints(inner: AffineVass, start: str, end: str, d: int, lift) -> list:
    """Non-negativity, flow balance and the effect equation over ``x``.

    ``lift(k)`` gives the expression ``target - source`` for inner counter ``k``.
    """
    out = []
    n = len(inner.transitions)
    for i in range(n):
        out.append([">=", _x(i), 0])
    for s in inner.states:
        inflow = [_x(i) for i, t in enumerate(inner.transitions) if t.tgt == s]
        outflow = [_x(i) for i, t in enumerate(inner.transitions) if t.src == s]
        rhs = (s == end) - (s == start)
        out.append(["=", ["-", _sum(inflow), _sum(outflow)], rhs])
    for k in range(inner.d):
        eff = _sum([_scaled(t.vec[k], _x(i)) for i, t in enumerate(inner.transitions) if t.vec[k]])
        out.append(["=", eff, lift(k)])
    return out


def _distance_constraints(inner: AffineVass, start: str) -> list:
    """``z`` is positive exactly on visited states and decreases towards ``start``."""
    out = []
    index = {s: k for k, s in enumerate(inner.states)}
    for s in inner.states:
        k = index[s]
        incoming = [(i, t) for i, t in enumerate(inner.transitions) if t.tgt == s]
        if s == start:
            out.append(["=", _z(k), 1])
            continue
        out.append([">=", _z(k), 0])
        entered = [">=", _sum([_x(i) for i, _ in incoming]), 1] if incoming else "false"
        options = [["and", [">=", _x(i), 1], [">=", _z(index[t.src]), 1],
                    ["=", _z(k), ["+", _z(index[t.src]), 1]]]
                   for i, t in incoming if t.src != s]
        out.append(["=>", entered, _or(options)])
        out.append(["=>", ["not", entered], ["=", _z(k), 0]])
    return out


def _support_constraints(inner: AffineVass, start: str, end: str, max_supports: int) -> list:
    from .c1 import connected_supports   # c1 depends on the solver, which this module must not
    n = len(inner.transitions)
    disjuncts = []
    if start == end:
        disjuncts.append(_and([["=", _x(i), 0] for i in range(n)]))
    for sup in connected_supports(inner, range(n), start, end):
        if len(disjuncts) >= max_supports:
            raise FormulaError(f"more than {max_supports} connected supports; "
                               "use the distance encoding")
        chosen = set(sup)
        disjuncts.append(_and([[">=", _x(i), 1] if i in chosen else ["=", _x(i), 0]
                               for i in range(n)]))
    return [_or(disjuncts)]


# ---------------------------------------------------------------------------
# export


def export_formula(vass: AffineVass, p: str, q: str, encoding: str = "supports",
                   caps: Optional[MonoidCaps] = None, max_supports: int = 10_000) -> ReachFormula:
    """Formula ``phi(u_0..u_{d-1}, v_0..v_{d-1})`` for ``p(u) ->* q(v)``.

    Raises :class:`~azvass.reduce.InfiniteMonoid` (or ``UnknownFiniteness``)
    when the monoid is not known to be finite.
    """
    if encoding not in ("distance", "supports"):
        raise FormulaError(f"unknown encoding {encoding!r}")
    if p not in vass.states or q not in vass.states:
        raise FormulaError("query state not declared")
    d = vass.d
    u = [f"u_{i}" for i in range(d)]
    v = [f"v_{i}" for i in range(d)]
    comments = []
    if vass.is_zvass():
        inner, start, end = vass, p, q

        def lift(k):
            return ["-", v[k], u[k]]
        comments.append("identity matrices: encoded directly")
    else:
        monoid = require_finite_monoid(vass, caps)
        red = reduce_afmp(vass, p, q, monoid=monoid, prune=True)
        inner, start, end = red.inner, red.start, red.end

        def lift(k):
            # reduced run goes from (u, 0) to (0, v)
            return ["-", 0, u[k]] if k < d else v[k - d]
        comments.append(f"finite monoid of {len(monoid)} elements: encoded through the "
                        f"reduced system ({len(inner.states)} states, "
                        f"{len(inner.transitions)} transitions)")
    assertions = _core_constraints(inner, start, end, d, lift)
    consts = u + v + [_x(i) for i in range(len(inner.transitions))]
    if encoding == "distance":
        assertions += _distance_constraints(inner, start)
        consts += [_z(k) for k in range(len(inner.states))]
    else:
        assertions += _support_constraints(inner, start, end, max_supports)
    return ReachFormula(d, p, q, consts, assertions, inner, start, end, encoding, comments,
                        reduced=not vass.is_zvass())


def witness_assignment(formula: ReachFormula, u, v, counts: dict) -> dict:
    """Assignment satisfying ``formula`` built from transition counts on the encoded system.

    Distances are breadth-first distances from the start state over the
    support, shifted by one.
    """
    inner = formula.inner
    assignment = {}
    for name, a in zip(formula.u_names, u):
        assignment[name] = int(a)
    for name, b in zip(formula.v_names, v):
        assignment[name] = int(b)
    for i in range(len(inner.transitions)):
        assignment[_x(i)] = int(counts.get(i, 0))
    if formula.encoding == "distance":
        dist = {formula.start: 1}
        queue = deque([formula.start])
        while queue:
            s = queue.popleft()
            for i, t in enumerate(inner.transitions):
                if t.src == s and counts.get(i, 0) > 0 and t.tgt not in dist:
                    dist[t.tgt] = dist[s] + 1
                    queue.append(t.tgt)
        for k, s in enumerate(inner.states):
            assignment[_z(k)] = dist.get(s, 0)
    return assignment


def solve_assignment(formula: ReachFormula, u, v) -> Optional[dict]:
    """A satisfying assignment for a concrete query, found with the Z-VASS solver."""
    from .solver import reach_zvass
    d = formula.dim
    u, v = tuple(u), tuple(v)
    if formula.reduced:
        src, tgt = u + zero_vector(d), zero_vector(d) + v
    else:
        src, tgt = u, v
    res = reach_zvass(formula.inner, formula.start, src, formula.end, tgt)
    if not res.reachable:
        return None
    return witness_assignment(formula, u, v, res.witness.counts)


# ---------------------------------------------------------------------------
# concrete syntax


def _atom(a) -> str:
    if isinstance(a, bool):
        return "true" if a else "false"
    if isinstance(a, int):
        return str(a) if a >= 0 else f"(- {-a})"
    return str(a)


def sexpr_to_str(e: SExpr) -> str:
    if isinstance(e, list):
        return "(" + " ".join(sexpr_to_str(x) for x in e) + ")"
    return _atom(e)


def to_smtlib(formula: ReachFormula, query=None, check_sat: bool = True) -> str:
    """SMT-LIB 2 script: logic, one ``Int`` constant per unknown, one assertion per constraint.

    ``query`` is an optional ``(u, v)`` pair pinning the counters.
    """
    lines = [f"; reachability {formula.source}(u) ->* {formula.target}(v), dimension {formula.dim}",
             f"; connectivity encoding: {formula.encoding}"]
    lines += [f"; {c}" for c in formula.comments]
    lines.append("(set-logic LIA)")
    for name in formula.consts:
        lines.append(f"(declare-fun {name} () Int)")
    for a in formula.assertions:
        lines.append(f"(assert {sexpr_to_str(a)})")
    if query is not None:
        for a in formula.with_query(*query):
            lines.append(f"(assert {sexpr_to_str(a)})")
    if check_sat:
        lines.append("(check-sat)")
    return "\n".join(lines) + "\n"


_TOKEN = re.compile(r"\s+|;[^\n]*|\(|\)|[^\s()]+")


def _tokens(text: str):
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        tok = m.group(0)
        if not tok.isspace() and not tok.startswith(";"):
            yield pos, tok
        pos = m.end()


def parse_sexprs(text: str) -> list:
    """All top-level s-expressions in ``text``; integer literals become ints."""
    stack = [[]]
    opened = []
    for pos, tok in _tokens(text):
        if tok == "(":
            stack.append([])
            opened.append(pos)
        elif tok == ")":
            if len(stack) == 1:
                raise SmtParseError(pos, "unbalanced ')'")
            done = stack.pop()
            opened.pop()
            if len(done) == 2 and done[0] == "-" and isinstance(done[1], int):
                done = -done[1]   # negative literal
            stack[-1].append(done)
        elif re.fullmatch(r"\d+", tok):
            stack[-1].append(int(tok))
        else:
            stack[-1].append(tok)
    if len(stack) != 1:
        raise SmtParseError(opened[-1], "unclosed '('")
    return stack[0]


def parse_smtlib(text: str) -> tuple:
    """``(declared constant names, assertions)`` of a script in the subset emitted here."""
    consts, assertions = [], []
    for cmd in parse_sexprs(text):
        if not isinstance(cmd, list) or not cmd:
            raise FormulaError(f"unexpected top-level item {cmd!r}")
        head = cmd[0]
        if head == "declare-fun":
            if len(cmd) != 4 or cmd[2] != [] or cmd[3] != "Int":
                raise FormulaError(f"unsupported declaration {sexpr_to_str(cmd)}")
            consts.append(cmd[1])
        elif head == "declare-const":
            if len(cmd) != 3 or cmd[2] != "Int":
                raise FormulaError(f"unsupported declaration {sexpr_to_str(cmd)}")
            consts.append(cmd[1])
        elif head == "assert":
            if len(cmd) != 2:
                raise FormulaError("assert takes one argument")
            assertions.append(cmd[1])
        elif head in ("set-logic", "check-sat", "set-info", "set-option", "exit", "get-model"):
            continue
        else:
            raise FormulaError(f"unsupported command {head!r}")
    return consts, assertions


# ---------------------------------------------------------------------------
# evaluation


def evaluate(e: SExpr, env: dict):
    """Value of a term (int) or formula (bool) under ``env``."""
    if isinstance(e, bool):
        return e
    if isinstance(e, int):
        return e
    if isinstance(e, str):
        if e == "true":
            return True
        if e == "false":
            return False
        if e not in env:
            raise FormulaError(f"unassigned constant {e!r}")
        return env[e]
    if not e:
        raise FormulaError("empty application")
    op, args = e[0], e[1:]
    if op == "and":
        return all(evaluate(a, env) for a in args)
    if op == "or":
        return any(evaluate(a, env) for a in args)
    if op == "not":
        return not evaluate(args[0], env)
    if op == "=>":
        return (not evaluate(args[0], env)) or evaluate(args[1], env)
    vals = [evaluate(a, env) for a in args]
    if op == "+":
        return sum(vals)
    if op == "-":
        return -vals[0] if len(vals) == 1 else vals[0] - sum(vals[1:])
    if op == "*":
        out = 1
        for x in vals:
            out *= x
        return out
    if op == "=":
        return all(a == vals[0] for a in vals[1:])
    compare = {"<=": lambda a, b: a <= b, ">=": lambda a, b: a >= b,
               "<": lambda a, b: a < b, ">": lambda a, b: a > b}
    if op in compare:
        return all(compare[op](a, b) for a, b in zip(vals, vals[1:]))
    raise FormulaError(f"unsupported operator {op!r}")


def evaluate_script(text: str, env: dict) -> bool:
    """Conjunction of the assertions of an SMT-LIB script under ``env``."""
    _, assertions = parse_smtlib(text)
    return all(evaluate(a, env) for a in assertions)
