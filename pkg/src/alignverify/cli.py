"""Command-line front end.

Exit codes: 0 holds / accepted, 1 fails / rejected, 2 usage or input error,
3 inconclusive (a budget ran out).
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

from . import __version__
from .annotation import (Annotation, AnnotationError, check_vcs, extend_full, format_annotation,
                         gen_vcs, parse_annotation)
from .assertion import DEFAULT_DOMAIN, TRUE, Domain, parse_formula
from .assertion.bounded import Witness
from .automaton import (CutsetError, aut_of, cfg_of, check_cutset, format_trace,
                        satisfies_bounded, segments, to_dot)
from .extract import (ExtractionError, extract_cawhile, extract_floyd, extract_lockstep,
                      extract_lockstep_seq, extract_seqprod)
from .lang import LabelError, ParseError, format_program, label_list, parse
from .logic import SexpError, check_derivation, format_derivation, parse_derivation
from .product import (ProductError, build_product, check_adequacy, hole, parse_kind,
                      rel_satisfies_bounded)
from .semantics import Store, run
from .verdict import EXIT_CODES, FAILS, HOLDS, INCONCLUSIVE, Verdict

DEFAULT_MAX_STEPS = 10000


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# Reports


def _jsonable(x):
    if isinstance(x, (str, int, float, bool)) or x is None:
        return x
    if isinstance(x, Domain):
        return str(x)
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return str(x)


def witness_text(w) -> str:
    """Render a witness: an assignment, a store pair, a trace or a pair of traces."""
    if w is None:
        return ""
    if isinstance(w, Witness):
        return str(w)
    if isinstance(w, Store):
        return f"[{w.format()}]"
    if isinstance(w, list):
        return format_trace(w)
    if isinstance(w, tuple) and len(w) == 2:
        a, b = w
        if isinstance(a, list) and isinstance(b, list):
            return f"left trace: {format_trace(a)}\nright trace: {format_trace(b)}"
        if isinstance(a, tuple) and isinstance(b, tuple):
            return (f"initial: {witness_text(a[0])} | {witness_text(a[1])}; "
                    f"final: {witness_text(b[0])} | {witness_text(b[1])}")
        return f"{witness_text(a)} -> {witness_text(b)}"
    return str(w)


def emit_report(r: dict, fmt: str = "text") -> str:
    """``text`` is for people; ``json`` is a stable key/value record
    (keys: command, config, status, detail, witness, bounds, lines, seconds)."""
    if fmt == "json":
        return json.dumps(_jsonable(r), sort_keys=True, indent=2) + "\n"
    out = list(r.get("lines", []))
    if r.get("witness"):
        out.append("witness: " + r["witness"])
    bounds = ", ".join(f"{k} {v}" for k, v in r.get("bounds", {}).items())
    res = f"RESULT: {r['status']}" + (f" ({bounds})" if bounds else "")
    if r.get("detail"):
        res += f": {r['detail']}"
    out.append(res)
    return "\n".join(out) + "\n"


def _report(cmd, args, status, detail="", witness=None, bounds=None, lines=()):
    return {"command": cmd, "config": {k: v for k, v in vars(args).items() if k != "func"},
            "status": status, "detail": detail, "witness": witness_text(witness),
            "bounds": bounds or {}, "lines": list(lines)}


def _from_verdict(cmd, args, v: Verdict, lines=()):
    return _report(cmd, args, v.status, v.detail, v.witness, v.bounds, lines)


# ---------------------------------------------------------------------------
# Inputs


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _program(path: str):
    return parse(_read(path))


def _formula(text: str, mode: str):
    """A formula given inline or as the name of a file holding it."""
    if os.path.isfile(text):
        text = _read(text)
    return parse_formula(text.strip(), mode)


def _guards(text: str | None):
    if not text:
        return TRUE, TRUE
    parts = text.split(",")
    if len(parts) != 2:
        raise UsageError("--guards takes two files (or formulas) separated by a comma")
    return _formula(parts[0], "relational"), _formula(parts[1], "relational")


def _inputs(text: str | None, relational: bool):
    if not text:
        return None
    keys = []
    for name in text.split(","):
        name = name.strip()
        if relational:
            keys.append(("R", name[:-1]) if name.endswith("'") else ("L", name))
        else:
            keys.append(("", name))
    return keys


def _automaton(args):
    """The program automaton, or the requested product of two programs."""
    a = aut_of(_program(args.left))
    if not getattr(args, "right", None):
        return a, False
    b = aut_of(_program(args.right))
    lam, rho = _guards(getattr(args, "guards", None))
    spec = parse_kind(getattr(args, "kind", None) or "seq", a, b, lam, rho)
    return build_product(a, b, spec), True


def _annotation(args, a, relational) -> Annotation:
    an = parse_annotation(_read(args.ann), "relational" if relational else "unary")
    return an


def _domain(args, an: Annotation | None = None) -> Domain:
    if getattr(args, "domain", None):
        return Domain.parse(args.domain)
    if an is not None and an.domain is not None:
        return an.domain
    return DEFAULT_DOMAIN


# ---------------------------------------------------------------------------
# Subcommands


def cmd_parse(args):
    p = _program(args.file)
    lines = [format_program(p).rstrip(), "labels: " + " ".join(map(str, label_list(p.body)))]
    return _report("parse", args, HOLDS, lines=lines)


def cmd_run(args):
    p = _program(args.file)
    s0 = Store({k: int(v) for k, v in (kv.split("=") for kv in args.store.split(",") if kv)}
               if args.store else {})
    out = run(p, s0, args.max_steps)
    lines = [f"final: [{s.format()}] after {n} steps" for s, n in out.finals.items()]
    bounds = {"max-steps": args.max_steps}
    if out.diverged:
        return _report("run", args, INCONCLUSIVE, "step budget exhausted", bounds=bounds,
                       lines=lines)
    return _report("run", args, HOLDS, bounds=bounds, lines=lines)


def cmd_cfg(args):
    a = aut_of(_program(args.file))
    g = cfg_of(a)
    if args.dot:
        return _report("cfg", args, HOLDS, lines=[to_dot(g).rstrip()])
    lines = [f"{x} -> {y}" for x, y in sorted(g.edges)]
    if args.cutset:
        pts = {int(x) for x in args.cutset.split(",")} | {a.init, a.fin}
        try:
            check_cutset(g, pts, a.fin)
        except CutsetError as exc:
            return _report("cfg", args, FAILS, str(exc),
                           " -> ".join(map(str, exc.cycle or [])))
        lines += ["segment: " + " -> ".join(map(str, s)) for s in segments(a, pts, g)]
    return _report("cfg", args, HOLDS, lines=lines)


def cmd_product(args):
    prod, _ = _automaton(args)
    g = cfg_of(prod, _domain(args))
    g = g.restrict(g.reachable())
    if args.dot:
        return _report("product", args, HOLDS, lines=[to_dot(g, prod.name).rstrip()])
    lines = [f"init {prod.init}  fin {prod.fin}  points {len(g.vertices)}"]
    lines += [f"{x} -> {y}" for x, y in sorted(g.edges, key=str)]
    return _report("product", args, HOLDS, lines=lines)


def cmd_adequacy(args):
    prod, _ = _automaton(args)
    pre = _formula(args.pre, "relational")
    v = check_adequacy(prod, pre, _domain(args), args.max_len, _inputs(args.inputs, True))
    return _from_verdict("adequacy", args, v)


def cmd_vcgen(args):
    a, rel = _automaton(args)
    an = _annotation(args, a, rel)
    lines = [str(vc) for vc in gen_vcs(a, an, dom=_domain(args, an))]
    return _report("vcgen", args, HOLDS, f"{len(lines)} VCs", lines=lines)


def cmd_check(args):
    a, rel = _automaton(args)
    an = _annotation(args, a, rel)
    dom = _domain(args, an)
    rep = check_vcs(a, an, args.mode, dom, args.max_steps, _inputs(args.inputs, rel))
    lines = [f"{r.verdict.status}: {r.vc}" for r in rep.results
             if args.verbose or r.verdict.status != HOLDS]
    return _from_verdict("check", args, rep.verdict, lines)


def cmd_extend(args):
    a, rel = _automaton(args)
    an = _annotation(args, a, rel)
    dom = _domain(args, an)
    try:
        full = extend_full(a, an, dom)
    except AnnotationError as exc:
        return _report("extend", args, FAILS, str(exc), bounds={"domain": dom})
    text = format_annotation(full)
    if args.output:
        Path(args.output).write_text(text)
        lines = [f"wrote {args.output}"]
    else:
        lines = [text.rstrip()]
    return _report("extend", args, HOLDS, bounds={"domain": dom}, lines=lines)


def cmd_verify(args):
    a = aut_of(_program(args.file))
    v = satisfies_bounded(a, _formula(args.pre, "unary"), _formula(args.post, "unary"),
                          _domain(args), args.max_steps, _inputs(args.inputs, False))
    return _from_verdict("verify", args, v)


def cmd_verify_rel(args):
    a, b = aut_of(_program(args.left)), aut_of(_program(args.right))
    v = rel_satisfies_bounded(a, b, _formula(args.pre, "relational"),
                              _formula(args.post, "relational"), _domain(args), args.max_steps,
                              _inputs(args.inputs, True))
    return _from_verdict("verify-rel", args, v)


def cmd_extract(args):
    th = args.theorem
    p = _program(args.left)
    p2 = _program(args.right) if args.right else None
    if th != "floyd" and p2 is None:
        raise UsageError(f"--theorem {th} needs two programs")
    an = parse_annotation(_read(args.ann), "unary" if th == "floyd" else "relational")
    dom = _domain(args, an)
    try:
        if th == "floyd":
            d = extract_floyd(p, an, dom)
        elif th == "seqprod":
            d = extract_seqprod(p, p2, an, dom)
        elif th == "lockstep":
            d = extract_lockstep(p, p2, an, dom, relaxed=args.relaxed)
        elif th == "lockstep-seq":
            if not args.hole:
                raise UsageError("--theorem lockstep-seq needs --hole BEG,END")
            beg, end = (int(x) for x in args.hole.split(","))
            b, b2 = hole(p.body, beg, end, p.fin), hole(p2.body, beg, end, p2.fin)
            d = extract_lockstep_seq(p, p2, b, b2, beg, end, an, dom)
        else:
            if args.beg is None:
                raise UsageError("--theorem cawhile needs --beg N")
            lam, rho = _guards(args.guards)
            d = extract_cawhile(p, p2, args.beg, lam, rho, an, dom)
    except ExtractionError as exc:
        return _report("extract", args, FAILS, f"refused: {exc}", bounds={"domain": dom})
    text = format_derivation(d) + "\n"
    if args.output:
        Path(args.output).write_text(text)
        lines = [f"wrote {args.output} ({d.size()} nodes, root rule {d.rule})"]
    else:
        lines = [text.rstrip()]
    return _report("extract", args, HOLDS, bounds={"domain": dom}, lines=lines)


def cmd_check_deriv(args):
    d = parse_derivation(_read(args.file))
    dom = Domain.parse(args.domain) if args.domain else None
    res = check_derivation(d, dom)
    bounds = {"domain": dom or d.domain or DEFAULT_DOMAIN}
    if res:
        return _report("check-deriv", args, HOLDS, f"accepted ({d.size()} nodes)", bounds=bounds)
    return _report("check-deriv", args, FAILS, str(res), res.witness, bounds)


# ---------------------------------------------------------------------------
# Argument parsing


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="alignverify",
                                 description="Bounded relational verification of while programs.")
    ap.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--domain", help="integer range lo..hi (default -8..8)")
    common.add_argument("--max-steps", type=int, default=DEFAULT_MAX_STEPS)
    common.add_argument("--inputs", help="variables that range over the domain; the rest start at 0")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.set_defaults(func=func)
        return p

    def pair(p, right_required=False):
        p.add_argument("left", metavar="LEFT.imp")
        p.add_argument("right", metavar="RIGHT.imp", nargs=None if right_required else "?")
        p.add_argument("--kind", default="seq",
                       help="seq|elck|olck|lckctl|ilv|dov|lo|ro|sameexcept:BEG,END|caloop:BEG")
        p.add_argument("--guards", help="L.frm,R.frm for caloop")

    p = add("parse", cmd_parse, "parse and label a program")
    p.add_argument("file")
    p = add("run", cmd_run, "run a program from a store")
    p.add_argument("file")
    p.add_argument("--store", default="", help="e.g. x=4,y=0")
    p = add("cfg", cmd_cfg, "control-flow graph and segments")
    p.add_argument("file")
    p.add_argument("--cutset", help="cutpoints besides init and fin, e.g. 3")
    p.add_argument("--dot", action="store_true")
    p = add("product", cmd_product, "build a product automaton")
    pair(p, True)
    p.add_argument("--dot", action="store_true")
    p = add("adequacy", cmd_adequacy, "bounded adequacy of a product")
    pair(p, True)
    p.add_argument("--pre", required=True)
    p.add_argument("--max-len", type=int, default=200)
    for name, func, help_ in (("vcgen", cmd_vcgen, "list verification conditions"),
                              ("check", cmd_check, "check an annotation"),
                              ("extend", cmd_extend, "extend an annotation to all points")):
        p = add(name, func, help_)
        pair(p)
        p.add_argument("--ann", required=True)
        if name == "check":
            p.add_argument("--mode", choices=("enum", "reach"), default="enum")
            p.add_argument("-v", "--verbose", action="store_true")
        if name == "extend":
            p.add_argument("-o", "--output")
    p = add("verify", cmd_verify, "bounded check of {pre} c {post}")
    p.add_argument("file")
    p.add_argument("--pre", required=True)
    p.add_argument("--post", required=True)
    p = add("verify-rel", cmd_verify_rel, "bounded check of c|c' : <pre><post>")
    p.add_argument("left")
    p.add_argument("right")
    p.add_argument("--pre", required=True)
    p.add_argument("--post", required=True)
    p = add("extract", cmd_extract, "derivation from a valid annotation")
    p.add_argument("left", metavar="LEFT.imp")
    p.add_argument("right", metavar="RIGHT.imp", nargs="?")
    p.add_argument("--theorem", required=True,
                   choices=("floyd", "seqprod", "lockstep", "lockstep-seq", "cawhile"))
    p.add_argument("--ann", required=True)
    p.add_argument("--hole", help="BEG,END for lockstep-seq")
    p.add_argument("--beg", type=int, help="loop label for cawhile")
    p.add_argument("--guards", help="L.frm,R.frm for cawhile")
    p.add_argument("--relaxed", action="store_true", help="allow assignment against skip")
    p.add_argument("-o", "--output")
    p = add("check-deriv", cmd_check_deriv, "check a derivation file")
    p.add_argument("file")
    return ap


def _glue_values(argv: list[str]) -> list[str]:
    # argparse would take a value like -2..2 for an option
    out, i = [], 0
    while i < len(argv):
        a = argv[i]
        if a in ("--domain", "--store") and i + 1 < len(argv) and argv[i + 1].startswith("-"):
            out.append(f"{a}={argv[i + 1]}")
            i += 2
            continue
        out.append(a)
        i += 1
    return out


def main(argv: list[str] | None = None) -> int:
    ap = _parser()
    argv = _glue_values(sys.argv[1:] if argv is None else list(argv))
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    t0 = time.perf_counter()
    try:
        r = args.func(args)
    except (UsageError, ParseError, LabelError, AnnotationError, SexpError, ProductError,
            CutsetError, ValueError) as exc:
        print(f"alignverify {args.command}: error: {exc}", file=sys.stderr)
        return 2
    r["seconds"] = round(time.perf_counter() - t0, 3)
    sys.stdout.write(emit_report(r, args.format))
    return EXIT_CODES[r["status"]]


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
