"""Command-line interface.

Exit codes: 0 when every query was decided, 2 when some answer is Unknown,
1 on input or usage errors.
"""

from __future__ import annotations

import argparse
import enum
import json
import sys
from dataclasses import dataclass, field
from typing import Optional, Sequence

from . import __version__
from .c1 import is_c1
from .core import (AffineVass, Bounds, Configuration, Query, Run, VassError, bfs_reach,
                   classify_matrix, classify_vass, is_identity, replay)
from .formula import FormulaError, export_formula, to_smtlib
from .gen.lba import gen_lba
from .gen.pcp import gen_pcp
from .gen.poly import PolyError, compile_poly, lower_ir, parse_polynomial
from .instance import (InstanceFile, ParseError, parse_instance, parse_lba, parse_pcp,
                       serialize_instance, serialize_reduced)
from .monoid import Finiteness, MonoidCaps, decide_finiteness
from .reduce import InfiniteMonoid, UnknownFiniteness, cover_to_reach, reduce_afmp
from .solver import Status, Verdict, reach_affine, reach_reset

EXIT_OK, EXIT_ERROR, EXIT_UNKNOWN = 0, 1, 2
DEFAULT_DEPTH = 8
DEFAULT_MAX_MONOID = MonoidCaps().max_count


class UsageError(Exception):
    pass


def jsonable(x):
    """Plain JSON data for verdict statistics and evidence."""
    if isinstance(x, enum.Enum):
        return x.value
    if isinstance(x, dict):
        return {str(jsonable(k)) if not isinstance(k, str) else k: jsonable(v)
                for k, v in x.items()}
    if isinstance(x, (set, frozenset)):
        return sorted((jsonable(v) for v in x), key=repr)
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, (str, int, float, bool)) or x is None:
        return x
    return str(x)


def _conf(c: Configuration) -> dict:
    return {"state": c.state, "values": list(c.values)}


@dataclass
class Caps:
    max_steps: Optional[int]
    max_abs: Optional[int]
    max_monoid: int
    depth: int

    def oracle(self, force: bool = False) -> Optional[Bounds]:
        if not force and self.max_steps is None and self.max_abs is None:
            return None
        base = Bounds()
        return Bounds(self.max_steps or base.max_steps, self.max_abs or base.max_abs_value)

    def as_dict(self) -> dict:
        return {"max_steps": self.max_steps, "max_abs": self.max_abs,
                "max_monoid": self.max_monoid, "depth": self.depth}


@dataclass
class QueryResult:
    query: Query
    verdict: Status
    method: str = ""
    witness: Optional[list] = None
    run: Optional[list] = None
    reason: Optional[str] = None
    evidence: Optional[dict] = None
    stats: dict = field(default_factory=dict)

    def as_dict(self, with_run: bool) -> dict:
        out = {"kind": self.query.kind, "source": _conf(self.query.source),
               "target": _conf(self.query.target), "verdict": self.verdict.value,
               "method": self.method, "witness": self.witness, "reason": self.reason,
               "evidence": jsonable(self.evidence), "stats": jsonable(self.stats)}
        if with_run:
            out["run"] = None if self.run is None else [_conf(c) for c in self.run]
        return out


# ---------------------------------------------------------------------------
# query pipeline


def _decide(vass: AffineVass, q: Query, caps: Caps) -> Verdict:
    p, u, t, v = q.source.state, q.source.values, q.target.state, q.target.values
    if vass.transitions and all(classify_matrix(tr.mat).reset for tr in vass.transitions) \
            and not vass.is_zvass():
        return reach_reset(vass, p, u, t, v)
    return reach_affine(vass, p, u, t, v, caps=MonoidCaps(max_count=caps.max_monoid),
                        oracle=caps.oracle(), depth=caps.depth)


def run_query(vass: AffineVass, q: Query, caps: Caps) -> QueryResult:
    """Decide one query; a cover witness is the run prefix that covers the target."""
    if q.kind == "cover":
        ext, rq = cover_to_reach(vass, q.source.state, q.source.values,
                                 q.target.state, q.target.values)
        res = _decide(ext, rq, caps)
    else:
        res = _decide(vass, q, caps)
    out = QueryResult(q, res.status, res.method, reason=res.reason, evidence=res.evidence,
                      stats=res.stats)
    if res.reachable:
        steps = list(res.witness.run.steps)
        if q.kind == "cover":
            steps = steps[:next(i for i, s in enumerate(steps) if s >= len(vass.transitions))]
        run = replay(vass, Run(q.source, tuple(steps)))
        final = run[-1]
        assert final.state == q.target.state
        if q.kind == "cover":
            assert all(a >= b for a, b in zip(final.values, q.target.values))
        else:
            assert final == q.target
        out.witness = steps
        out.run = run
    return out


def run_oracle(vass: AffineVass, q: Query, bounds: Bounds) -> QueryResult:
    """Bounded search only; Unreachable is reported when the search saw everything."""
    if q.kind == "cover":
        ext, rq = cover_to_reach(vass, q.source.state, q.source.values,
                                 q.target.state, q.target.values)
    else:
        ext, rq = vass, q
    res = bfs_reach(ext, rq.source, rq.target, bounds)
    st = res.stats
    stats = {"visited": st.visited, "pruned": st.pruned, "depth": st.depth,
             "truncated": st.truncated}
    if res.found:
        steps = list(res.run.steps)
        if q.kind == "cover":
            steps = steps[:next(i for i, s in enumerate(steps) if s >= len(vass.transitions))]
        run = replay(vass, Run(q.source, tuple(steps)))
        return QueryResult(q, Status.REACHABLE, "oracle", steps, run, stats=stats)
    if not st.truncated and st.pruned == 0 and st.depth < bounds.max_steps:
        return QueryResult(q, Status.UNREACHABLE, "oracle",
                           evidence={"reason": "the reachable set is finite and was exhausted"},
                           stats=stats)
    return QueryResult(q, Status.UNKNOWN, "oracle", reason="no run within the search bounds",
                       stats=stats)


# ---------------------------------------------------------------------------
# output


def _document(command: str, inst: InstanceFile, caps: Caps, results, with_run: bool) -> dict:
    vass = inst.system
    return {"tool": "azvass", "version": __version__, "command": command,
            "system": {"dimension": vass.d, "states": len(vass.states),
                       "transitions": len(vass.transitions)},
            "caps": caps.as_dict(),
            "queries": [r.as_dict(with_run) for r in results],
            "exit_code": _exit_for(results)}


def _exit_for(results) -> int:
    return EXIT_UNKNOWN if any(r.verdict is Status.UNKNOWN for r in results) else EXIT_OK


def _fmt_conf(c: Configuration) -> str:
    return f"{c.state}({', '.join(str(x) for x in c.values)})"


def _human(results, with_run: bool) -> str:
    out = []
    for i, r in enumerate(results, start=1):
        arrow = "->*" if r.query.kind == "reach" else "->* >="
        line = (f"query {i}: {r.query.kind} {_fmt_conf(r.query.source)} {arrow} "
                f"{_fmt_conf(r.query.target)}: {r.verdict.value}")
        if r.method:
            line += f" [{r.method}]"
        out.append(line)
        if r.verdict is Status.UNKNOWN and r.reason:
            out.append(f"  reason: {r.reason}")
        if r.verdict is Status.UNREACHABLE and r.evidence:
            out.append(f"  evidence: {r.evidence.get('reason', '')}")
        if r.witness is not None:
            out.append(f"  witness ({len(r.witness)} steps): "
                       + (" ".join(str(s) for s in r.witness) or "empty run"))
            if with_run:
                for c in r.run:
                    out.append(f"    {_fmt_conf(c)}")
    return "\n".join(out) + "\n"


def _emit(args, doc: dict, text: str):
    if args.format == "json":
        sys.stdout.write(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    else:
        sys.stdout.write(text)


def _write(args, text: str):
    if getattr(args, "output", None):
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# subcommands


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path) as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc


def _caps(args) -> Caps:
    for name in ("max_steps", "max_abs", "max_monoid", "depth"):
        val = getattr(args, name)
        if val is not None and val <= 0:
            raise UsageError(f"--{name.replace('_', '-')} must be positive")
    return Caps(args.max_steps, args.max_abs, args.max_monoid or DEFAULT_MAX_MONOID,
                args.depth or DEFAULT_DEPTH)


def cmd_check(args) -> int:
    inst = parse_instance(_read(args.file))
    caps = _caps(args)
    results = [run_query(inst.system, q, caps) for q in inst.queries]
    _emit(args, _document("check", inst, caps, results, args.witness),
          _human(results, args.witness) if results else "no queries\n")
    return _exit_for(results)


def cmd_oracle(args) -> int:
    inst = parse_instance(_read(args.file))
    caps = _caps(args)
    bounds = caps.oracle(force=True)
    results = [run_oracle(inst.system, q, bounds) for q in inst.queries]
    _emit(args, _document("oracle", inst, caps, results, args.witness),
          _human(results, args.witness) if results else "no queries\n")
    return _exit_for(results)


def cmd_classify(args) -> int:
    inst = parse_instance(_read(args.file))
    vass = inst.system
    per = [classify_matrix(t.mat).names() for t in vass.transitions]
    distinct = {t.mat for t in vass.transitions if not is_identity(t.mat)}
    doc = {"tool": "azvass", "version": __version__, "command": "classify",
           "dimension": vass.d, "states": len(vass.states),
           "transitions": len(vass.transitions),
           "classes": classify_vass(vass).names(), "per_transition": per,
           "zvass": vass.is_zvass(), "all_ones_class": is_c1(vass),
           "non_identity_matrices": len(distinct), "norm": vass.norm()}
    lines = [f"dimension {vass.d}, {len(vass.states)} states, {len(vass.transitions)} transitions",
             "system classes: " + (", ".join(doc["classes"]) or "none"),
             f"identity matrices only: {'yes' if doc['zvass'] else 'no'}",
             f"all-ones class: {'yes' if doc['all_ones_class'] else 'no'}",
             f"distinct non-identity matrices: {len(distinct)}"]
    for i, names in enumerate(per):
        lines.append(f"  transition {i}: {', '.join(names) or 'general'}")
    _emit(args, doc, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_monoid(args) -> int:
    inst = parse_instance(_read(args.file))
    caps = _caps(args)
    vass = inst.system
    fin = decide_finiteness(vass.matrices, MonoidCaps(max_count=caps.max_monoid), vass.d)
    doc = {"tool": "azvass", "version": __version__, "command": "monoid",
           "status": fin.status.value, "generators": len(vass.matrices),
           "elements_generated": len(fin.monoid),
           "caps": {"max_count": fin.caps.max_count, "max_norm": fin.caps.max_norm},
           "size": len(fin.monoid) if fin.status is Finiteness.FINITE else None,
           "norm": fin.monoid.norm if fin.status is Finiteness.FINITE else None,
           "witness": list(fin.witness) if fin.witness is not None else None,
           "bounds": None if fin.bounds is None else
           {"count": fin.bounds.count_bound, "norm": fin.bounds.norm_bound}}
    lines = [f"monoid: {fin.status.value}"]
    if fin.status is Finiteness.FINITE:
        lines.append(f"  size {doc['size']}, norm {doc['norm']}")
    else:
        lines.append(f"  {len(fin.monoid)} elements generated before a cap was hit")
        if fin.witness is not None:
            lines.append("  witness word (generator indices): "
                         + " ".join(str(i) for i in fin.witness))
    _emit(args, doc, "\n".join(lines) + "\n")
    return EXIT_UNKNOWN if fin.status is Finiteness.UNKNOWN else EXIT_OK


def cmd_reduce(args) -> int:
    inst = parse_instance(_read(args.file))
    caps = _caps(args)
    reach = [q for q in inst.queries if q.kind == "reach"]
    if not reach:
        raise UsageError("reduce needs a reach query to fix the source and target states")
    if not 0 <= args.query < len(reach):
        raise UsageError(f"--query must be between 0 and {len(reach) - 1}")
    q = reach[args.query]
    try:
        red = reduce_afmp(inst.system, q.source.state, q.target.state,
                          caps=MonoidCaps(max_count=caps.max_monoid), prune=args.prune)
    except UnknownFiniteness:
        sys.stderr.write("azvass: monoid closure exceeded its cap; cannot reduce\n")
        return EXIT_UNKNOWN
    text = serialize_reduced(red, q.source.values, q.target.values,
                             comments=[f"reduction of {args.file}"])
    _write(args, text)
    return EXIT_OK


def cmd_formula(args) -> int:
    inst = parse_instance(_read(args.file))
    caps = _caps(args)
    reach = [q for q in inst.queries if q.kind == "reach"]
    if not reach:
        raise UsageError("formula needs a reach query to fix the source and target states")
    if not 0 <= args.query < len(reach):
        raise UsageError(f"--query must be between 0 and {len(reach) - 1}")
    q = reach[args.query]
    try:
        f = export_formula(inst.system, q.source.state, q.target.state, encoding=args.encoding,
                           caps=MonoidCaps(max_count=caps.max_monoid))
    except UnknownFiniteness:
        sys.stderr.write("azvass: monoid closure exceeded its cap; no formula\n")
        return EXIT_UNKNOWN
    pin = None if args.free else (q.source.values, q.target.values)
    _write(args, to_smtlib(f, pin))
    return EXIT_OK


def cmd_gen_lba(args) -> int:
    lf = parse_lba(_read(args.file))
    word = args.word
    if word is None:
        if len(lf.words) != 1:
            raise UsageError("give --word, or exactly one 'word' line in the input")
        word = lf.words[0]
    vass, query, lay = gen_lba(lf.lba, word)
    comments = (f"generated from the machine in {args.file} on input {word!r}",
                f"counter x(i,a) = (i-1)*{len(lay.letters)} + index of a in "
                f"{''.join(lay.letters)}; counter {lay.y} is y",
                "runs keep y equal to the sum of the cell counters")
    _write(args, serialize_instance(InstanceFile(vass, [query], comments)))
    return EXIT_OK


def cmd_gen_pcp(args) -> int:
    inst = parse_pcp(_read(args.file))
    vass, query = gen_pcp(inst)
    comments = (f"generated from the tiles in {args.file}",
                "tiles: " + ", ".join(f"({a}, {b})" for a, b in inst.tiles),
                "counters: top word, bottom word, scratch")
    _write(args, serialize_instance(InstanceFile(vass, [query], comments)))
    return EXIT_OK


def cmd_compile_poly(args) -> int:
    poly = parse_polynomial(args.polynomial)
    low = lower_ir(compile_poly(poly))
    comments = (f"generated from the polynomial {poly}",
                f"{low.vass.d} counters; the query holds iff the polynomial has a natural root")
    _write(args, serialize_instance(InstanceFile(low.vass, [low.query], comments)))
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--max-steps", type=int, help="oracle run length bound")
    common.add_argument("--max-abs", type=int, help="oracle bound on counter magnitudes")
    common.add_argument("--max-monoid", type=int,
                        help=f"cap on generated monoid elements (default {DEFAULT_MAX_MONOID})")
    common.add_argument("--depth", type=int,
                        help=f"multiplication levels for the all-ones class "
                             f"(default {DEFAULT_DEPTH})")
    common.add_argument("--format", choices=("human", "json"), default="human")
    common.add_argument("--witness", action="store_true",
                        help="print the configurations along each witness run")

    parser = argparse.ArgumentParser(prog="azvass",
                                     description="Reachability for affine integer VASS.")
    parser.add_argument("--version", action="version", version=f"azvass {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text, file_arg=True):
        p = sub.add_parser(name, parents=[common], help=help_text)
        if file_arg:
            p.add_argument("file", help="input file, or - for standard input")
        p.set_defaults(func=func)
        return p

    add("check", cmd_check, "decide the queries of an instance")
    add("oracle", cmd_oracle, "bounded breadth-first search only")
    add("classify", cmd_classify, "matrix classes of the transitions")
    add("monoid", cmd_monoid, "decide finiteness of the transition monoid")
    p = add("reduce", cmd_reduce, "emit the reduced identity-matrix instance")
    p.add_argument("--query", type=int, default=0, help="index among the reach queries")
    p.add_argument("--prune", action="store_true", help="keep only reachable state pairs")
    p.add_argument("-o", "--output")
    p = add("formula", cmd_formula, "emit an SMT-LIB reachability formula")
    p.add_argument("--query", type=int, default=0, help="index among the reach queries")
    p.add_argument("--encoding", choices=("supports", "distance"), default="supports")
    p.add_argument("--free", action="store_true",
                   help="leave the source and target counters unconstrained")
    p.add_argument("-o", "--output")
    p = add("gen-lba", cmd_gen_lba, "instance from an LBA and an input word")
    p.add_argument("--word")
    p.add_argument("-o", "--output")
    p = add("gen-pcp", cmd_gen_pcp, "instance from a PCP tile set")
    p.add_argument("-o", "--output")
    p = add("compile-poly", cmd_compile_poly, "single-matrix instance from a polynomial",
            file_arg=False)
    p.add_argument("polynomial", help='for example "x1^2 - 4"')
    p.add_argument("-o", "--output")
    return parser


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:      # argparse reports usage errors with status 2
        return EXIT_OK if exc.code == 0 else EXIT_ERROR
    try:
        return args.func(args)
    except (ParseError, UsageError, PolyError, FormulaError, InfiniteMonoid, VassError) as exc:
        sys.stderr.write(f"azvass: {exc}\n")
        return EXIT_ERROR


def main() -> None:
    sys.exit(run())
