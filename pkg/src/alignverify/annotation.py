"""Annotations of automata, verification conditions and their bounded checking.

An annotation maps control points to formulas.  A *full* annotation covers
every control point; points it does not list are annotated ``false``.  A
*listed* annotation covers exactly the points it lists, which must form a
cutset.
"""
from __future__ import annotations

import os
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

from .assertion import (DEFAULT_DOMAIN, FALSE, LEFT, TRUE, Domain, Ext, Formula,
                        Key, conj, format_formula, free_keys, implies_bounded, models,
                        normalize, parse_formula)
from .assertion.bounded import Table, Witness
from .assertion.formula import eval_expr_vec, holds_vec, subst
from .automaton import (CFG, Automaton, Ctrl, Edge, _order_key, cfg_of, check_cutset, explore,
                        seg_paths, seg_rel, segments, trace_to)
from .lang import format_expr
from .verdict import FAILS, HOLDS, INCONCLUSIVE, Verdict, combine


class AnnotationError(ValueError):
    pass


@dataclass
class Annotation:
    at: dict
    pre: Formula
    post: Formula
    full: bool = True
    domain: Domain | None = None

    def __call__(self, n: Ctrl) -> Formula:
        if n in self.at:
            return self.at[n]
        if self.full:
            return FALSE
        raise KeyError(f"{n} is not a cutpoint of this annotation")

    def points(self, a: Automaton) -> list[Ctrl]:
        return list(a.ctrl) if self.full else sorted(self.at, key=_order_key)

    def with_ends(self, a: Automaton) -> "Annotation":
        """Set ``init`` and ``fin`` to the spec, checking agreement with listed entries."""
        at = dict(self.at)
        for n, f, what in ((a.init, self.pre, "pre"), (a.fin, self.post, "post")):
            if n in at and normalize(at[n]) != normalize(f):
                raise AnnotationError(f"annotation at {n} differs from the {what}condition")
            at[n] = f
        return Annotation(at, self.pre, self.post, self.full, self.domain)

    def check_wellformed(self, a: Automaton) -> None:
        if normalize(self(a.init)) != normalize(self.pre):
            raise AnnotationError("annotation at the initial point must be the precondition")
        if normalize(self(a.fin)) != normalize(self.post):
            raise AnnotationError("annotation at the final point must be the postcondition")
        unknown = [n for n in self.at if n not in set(a.ctrl)]
        if unknown:
            raise AnnotationError(f"not control points of the automaton: {unknown}")


# ---------------------------------------------------------------------------
# Verification conditions


def _point_text(n) -> str:
    return ",".join(map(str, n)) if isinstance(n, tuple) else str(n)


def _update_text(update) -> str:
    from .assertion.syntax import var_text
    from .lang import Var
    parts = [f"{var_text(Var(k[1], k[0]))} := {format_expr(e, var_text)}" for k, e in update]
    return "[" + ", ".join(parts) + "]" if parts else ""


@dataclass
class Rendered:
    """One implication ``antecedent ⇒ consequent`` making up a VC."""

    antecedent: Formula
    consequent: Formula
    schema: str
    edges: tuple[Edge, ...] = ()


@dataclass
class VC:
    segment: tuple
    pre: Formula
    post: Formula
    kind: str
    rendered: list[Rendered] = field(default_factory=list)

    def __str__(self) -> str:
        path = " -> ".join(_point_text(n) for n in self.segment)
        forms = "; ".join(r.schema for r in self.rendered) or "(no path)"
        return f"[{path}] {self.kind}: {forms}"


_TAGS = {"skip": "Skip", "assign": "Assign", "then": "IfTrue", "else": "IfFalse",
         "while-enter": "WhileTrue", "while-exit": "WhileFalse",
         "choice-left": "ChoiceLeft", "choice-right": "ChoiceRight"}


def row_tag(kind: str) -> str:
    """Table-row tag of an edge kind, e.g. ``WhileFalse`` or ``AssignLeft``."""
    side, _, k = kind.rpartition(":")
    if side == "left":
        return _TAGS[k] + "Left"
    if side == "right":
        return _TAGS[k] + "Right"
    if side == "joint":
        a, b = k.split("|")
        return _TAGS[a] + "Both" if a == b else f"{_TAGS[a]}|{_TAGS[b]}"
    return _TAGS[k]


def _schema(vs, edges: Sequence[Edge]) -> str:
    ante = [f"an({_point_text(vs[0])})"]
    for e in edges:
        if e.guard != TRUE:
            ante.append(format_formula(e.guard) if len(edges) == 1 else
                        f"{format_formula(e.guard)}@{_point_text(e.src)}")
    cons = f"an({_point_text(vs[-1])})"
    if len(edges) == 1:
        cons += _update_text(edges[0].update)
    elif any(e.update for e in edges):
        cons += "[path]"
    return " && ".join(ante) + " -> " + cons


def gen_vcs(a: Automaton, an: Annotation, g: CFG | None = None,
            dom: Domain = DEFAULT_DOMAIN) -> list[VC]:
    """One VC per segment of the annotation's cutset, with its rendered forms."""
    points = an.points(a)
    if an.full:
        g = g or cfg_of(a, dom)
        segs = sorted(g.edges, key=lambda e: (_order_key(e[0]), _order_key(e[1])))
    else:
        segs = segments(a, points, g, dom)
    out = []
    for vs in segs:
        pre, post = an(vs[0]), an(vs[-1])
        rendered = []
        for guard, mapping, edges in seg_paths(a, vs):
            rendered.append(Rendered(conj(pre, guard), subst(post, mapping),
                                     _schema(vs, edges), tuple(edges)))
        kind = (row_tag(rendered[0].edges[0].kind) if len(vs) == 2 and len(rendered) == 1
                else "Path")
        out.append(VC(tuple(vs), pre, post, kind, rendered))
    return out


@dataclass
class VCResult:
    vc: VC
    verdict: Verdict


@dataclass
class CheckReport:
    mode: str
    results: list[VCResult]
    verdict: Verdict

    @property
    def status(self) -> str:
        return self.verdict.status

    def failures(self) -> list[VCResult]:
        return [r for r in self.results if r.verdict.status != HOLDS]


def _vc_keys(vc: VC) -> list[Key]:
    ks = set(free_keys(vc.pre))
    for r in vc.rendered:
        ks |= free_keys(r.antecedent) | free_keys(r.consequent)
    return sorted(ks)


def check_vc(a: Automaton, vc: VC, dom: Domain, method: str = "symbolic") -> Verdict:
    """Bounded check of one VC.

    ``symbolic`` evaluates the rendered implications column-wise over all
    pre-states in ``dom``; ``step`` enumerates the same pre-states and runs the
    concrete transition relation along the segment.
    """
    bounds = {"domain": dom}
    if normalize(vc.pre) == FALSE:
        return Verdict(HOLDS, None, "vacuous", bounds)
    if method == "symbolic":
        for r in vc.rendered:
            imp = implies_bounded(r.antecedent, r.consequent, dom)
            if not imp:
                return Verdict(FAILS, imp.witness, r.schema, bounds)
        return Verdict(HOLDS, None, "", bounds)
    keys = _vc_keys(vc)
    for t in models(vc.pre, dom, keys):
        for row in t.rows(keys):
            s = a.state_of_row(row)
            for u in seg_rel(a, vc.segment, s):
                if not a.holds(vc.post, u):
                    return Verdict(FAILS, Witness(row), "post-image leaves the annotation",
                                   bounds)
    return Verdict(HOLDS, None, "", bounds)


def check_vcs(a: Automaton, an: Annotation, mode: str = "enum", dom: Domain = DEFAULT_DOMAIN,
              max_steps: int = 10000, inputs: Iterable[Key] | None = None,
              method: str = "symbolic") -> CheckReport:
    """Check an annotation.

    ``enum``: every VC over all states in ``dom`` (valid over ``dom``).
    ``reach``: every cutpoint state reached within ``max_steps`` from a
    precondition state satisfies its annotation; a necessary condition only.
    """
    an.check_wellformed(a)
    if mode == "enum":
        vcs = gen_vcs(a, an, dom=dom)
        threads = max(1, int(os.environ.get("ALIGN_VERIFY_THREADS", "1")))
        if threads > 1 and len(vcs) > 1:
            with ThreadPoolExecutor(threads) as pool:
                verdicts = list(pool.map(lambda vc: check_vc(a, vc, dom, method), vcs))
        else:
            verdicts = [check_vc(a, vc, dom, method) for vc in vcs]
        results = [VCResult(vc, v) for vc, v in zip(vcs, verdicts)]
        st = combine(r.verdict for r in results)
        bad = next((r for r in results if r.verdict.status != HOLDS), None)
        detail = f"{len(results)} VCs" if bad is None else f"VC {bad.vc} fails"
        return CheckReport(mode, results, Verdict(st, bad.verdict.witness if bad else None,
                                                  detail, {"domain": dom}))
    if mode == "reach":
        return CheckReport(mode, [], reach_check(a, an, dom, max_steps, inputs))
    raise ValueError(f"unknown mode {mode!r}")


def reach_check(a: Automaton, an: Annotation, dom: Domain = DEFAULT_DOMAIN,
                max_steps: int = 10000, inputs: Iterable[Key] | None = None) -> Verdict:
    bounds = {"domain": dom, "max-steps": max_steps, "check": "necessary condition only"}
    cut = set(an.points(a))
    hit = False
    for s0 in a.initial_states(an.pre, dom, inputs):
        parent, exhausted = explore(a, s0, max_steps)
        hit |= exhausted
        for q in parent:
            if q[0] in cut and not a.holds(an(q[0]), q[1]):
                return Verdict(FAILS, trace_to(parent, q),
                               f"reached {_point_text(q[0])} outside its annotation", bounds)
    if hit:
        return Verdict(INCONCLUSIVE, None, "step budget exhausted", bounds)
    return Verdict(HOLDS, None, "", bounds)


# ---------------------------------------------------------------------------
# Extension to a full annotation


def _footprint(a: Automaton, an: Annotation) -> list[Key]:
    ks = set(a.footprint)
    for f in an.at.values():
        ks |= free_keys(f)
    return sorted(ks | free_keys(an.pre) | free_keys(an.post))


def _unique_rows(t: Table, keys: Sequence[Key]) -> set[tuple[int, ...]]:
    if t.n == 0:
        return set()
    arr = np.stack([t.cols.get(k, np.zeros(t.n, dtype=np.int64)) for k in keys], axis=1)
    return set(map(tuple, np.unique(arr, axis=0).tolist()))


def _image(e: Edge, t: Table, keys: Sequence[Key]) -> Table:
    mask = holds_vec(e.guard, t.cols, t.n)
    t = t.filter(mask)
    cols = dict(t.cols)
    for k, ex in e.update:
        cols[k] = eval_expr_vec(ex, t.cols, t.n)
    return Table({k: cols.get(k, np.zeros(t.n, dtype=np.int64)) for k in keys}, t.n)


def extend_full(a: Automaton, an: Annotation, dom: Domain = DEFAULT_DOMAIN,
                check: bool = True) -> Annotation:
    """Fill every non-cutpoint with the set of states reachable there from the
    annotated cutpoints along cutpoint-free paths (joins take the union).

    Cutpoint annotations are kept; new annotations are extensional.
    """
    if check:
        rep = check_vcs(a, an, "enum", dom)
        if rep.status != HOLDS:
            raise AnnotationError(f"annotation is not valid over {dom}: {rep.verdict.detail}")
    if an.full:
        return an
    g = cfg_of(a, dom)
    cut = set(an.points(a))
    check_cutset(g, cut, a.fin)
    keys = _footprint(a, an)
    rest = [n for n in a.ctrl if n not in cut]
    # topological order of the cutpoint-free subgraph (acyclic for a cutset)
    indeg = {n: 0 for n in rest}
    for x, y in g.edges:
        if x in indeg and y in indeg:
            indeg[y] += 1
    order, todo = [], sorted((n for n in rest if indeg[n] == 0), key=_order_key)
    while todo:
        n = todo.pop(0)
        order.append(n)
        for m in g.successors(n):
            if m in indeg:
                indeg[m] -= 1
                if indeg[m] == 0:
                    todo.append(m)
    sets: dict[Ctrl, set] = {n: set() for n in rest}

    def source(n) -> Iterator[Table]:
        if n in cut:
            yield from models(an(n), dom, keys)
        else:
            rows = sorted(sets[n])
            if rows:
                arr = np.array(rows, dtype=np.int64).reshape(len(rows), len(keys))
                yield Table({k: arr[:, i] for i, k in enumerate(keys)}, len(rows))

    for n in [c for c in a.ctrl if c in cut] + order:
        for t in source(n):
            for e in a.edges(n):
                if e.dst in sets:
                    sets[e.dst] |= _unique_rows(_image(e, t, keys), keys)
    at = dict(an.at)
    for n in rest:
        at[n] = Ext(tuple(keys), frozenset(sets[n])) if sets[n] else FALSE
    return Annotation(at, an.pre, an.post, True, dom)


def reachable_annotation(a: Automaton, pre: Formula, post: Formula, dom: Domain = DEFAULT_DOMAIN,
                         max_steps: int = 10000, inputs: Iterable[Key] | None = None,
                         keys: Iterable[Key] | None = None) -> Annotation:
    """The full annotation by reachable states: each point other than init and fin
    gets the (extensional) set of states reached there from ``pre``-states in ``dom``."""
    keys = sorted(set(keys) if keys is not None else set(a.footprint))
    reached: dict[Ctrl, set] = {n: set() for n in a.ctrl}
    for s0 in a.initial_states(pre, dom, inputs):
        parent, exhausted = explore(a, s0, max_steps)
        if exhausted:
            raise AnnotationError(f"step budget exhausted from {s0}")
        for n, st in parent:
            reached[n].add(_row(st, keys, a.pair))
    at = {}
    for n in a.ctrl:
        if n == a.init:
            at[n] = pre
        elif n == a.fin:
            at[n] = post
        else:
            at[n] = Ext(tuple(keys), frozenset(reached[n])) if reached[n] else FALSE
    return Annotation(at, pre, post, True, dom)


def _row(st, keys, pair):
    if pair:
        s, t = st
        return tuple((s if k[0] == LEFT else t)[k[1]] for k in keys)
    return tuple(st[k[1]] for k in keys)


# ---------------------------------------------------------------------------
# Annotation files

_HEADER = re.compile(r"^\s*(pre|post|domain|cutset)\s*:(.*)$")


def parse_point(text: str):
    text = text.strip()
    if text.startswith("("):
        if not text.endswith(")"):
            raise AnnotationError(f"bad control point {text!r}")
        parts = [p.strip() for p in text[1:-1].split(",")]
        return tuple(int(p) if re.fullmatch(r"-?\d+", p) else p for p in parts)
    if re.fullmatch(r"-?\d+", text):
        return int(text)
    raise AnnotationError(f"bad control point {text!r}")


def parse_annotation(source: str, mode: str | None = None) -> Annotation:
    """Read a ``.ann`` file.

    Lines are ``pre: F``, ``post: F``, optionally ``domain: lo..hi`` and
    ``cutset: full|listed``, and ``point : F`` entries; a line starting with
    whitespace continues the previous one.  Without ``cutset`` the annotation
    is full (unlisted points are false).
    """
    logical: list[tuple[int, str]] = []
    for i, raw in enumerate(source.splitlines(), 1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        if raw[:1] in " \t" and logical:
            logical[-1] = (logical[-1][0], logical[-1][1] + " " + line.strip())
        else:
            logical.append((i, line))
    if mode is None:
        tuples = any(l.lstrip().startswith("(") for _, l in logical)
        mode = "relational" if tuples else "unary"
    pre = post = None
    dom = None
    full = True
    at = {}
    for lineno, line in logical:
        try:
            m = _HEADER.match(line)
            if m:
                key, val = m.group(1), m.group(2).strip()
                if key == "pre":
                    pre = parse_formula(val, mode)
                elif key == "post":
                    post = parse_formula(val, mode)
                elif key == "domain":
                    dom = Domain.parse(val)
                elif val in ("full", "listed"):
                    full = val == "full"
                else:
                    raise AnnotationError("cutset must be 'full' or 'listed'")
                continue
            if line.lstrip().startswith("("):
                close = line.index(")")
                pt, rest = line[:close + 1], line[close + 1:].lstrip()
                if not rest.startswith(":"):
                    raise AnnotationError("expected ':' after the control point")
                f = rest[1:]
            else:
                pt, _, f = line.partition(":")
            n = parse_point(pt)
            if n in at:
                raise AnnotationError(f"point {pt.strip()} annotated twice")
            at[n] = parse_formula(f.strip(), mode)
        except (ValueError, IndexError) as exc:
            raise AnnotationError(f"line {lineno}: {exc}") from None
    if pre is None or post is None:
        raise AnnotationError("an annotation needs 'pre:' and 'post:' lines")
    return Annotation(at, pre, post, full, dom)


def format_annotation(an: Annotation) -> str:
    lines = [f"pre: {format_formula(an.pre)}", f"post: {format_formula(an.post)}"]
    if an.domain is not None:
        lines.append(f"domain: {an.domain}")
    lines.append(f"cutset: {'full' if an.full else 'listed'}")
    for n in sorted(an.at, key=_order_key):
        pt = f"({_point_text(n)})" if isinstance(n, tuple) else str(n)
        lines.append(f"{pt} : {format_formula(an.at[n])}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Judgments read off a full annotation of a program


def associated_judgments(p, an: Annotation) -> list:
    """Hoare judgments associated with a full annotation of ``aut(p)``.

    For each subprogram ``b`` with exit ``m``: ``b : {an(lab b)}{an(m)}``; for a
    then-branch or loop body of a test ``e`` at ``n``: ``{an(n) && e}{an(m)}``;
    for an else-branch ``{an(n) && !e}{an(m)}``; for a choice branch
    ``{an(n)}{an(m)}``; for a loop at ``n``: ``{an(n)}{an(n) && !e}``; for an
    assignment ``x := e``: ``{an(m)[x := e]}{an(m)}``.
    """
    from .assertion import Neg, subst_u, test
    from .lang import Assign, Choice, If, Seq, While, lab
    from .logic import Judgment

    out: list = []

    def add(j):
        if j.key() not in seen:
            seen.add(j.key())
            out.append(j)

    seen: set = set()

    def walk(b, m, parent, role):
        add(Judgment(b, an(lab(b)), an(m)))
        if role in ("then", "body"):
            add(Judgment(b, conj(an(parent.label), test(parent.cond)), an(m)))
        elif role == "else":
            add(Judgment(b, conj(an(parent.label), Neg(test(parent.cond))), an(m)))
        elif role == "branch":
            add(Judgment(b, an(parent.label), an(m)))
        if isinstance(b, Seq):
            walk(b.first, lab(b.second), b, "first")
            walk(b.second, m, b, "second")
        elif isinstance(b, If):
            walk(b.then, m, b, "then")
            walk(b.orelse, m, b, "else")
        elif isinstance(b, While):
            add(Judgment(b, an(b.label), conj(an(b.label), Neg(test(b.cond)))))
            walk(b.body, b.label, b, "body")
        elif isinstance(b, Choice):
            walk(b.left, m, b, "branch")
            walk(b.right, m, b, "branch")
        elif isinstance(b, Assign):
            add(Judgment(b, subst_u(an(m), b.var, b.expr), an(m)))

    walk(p.body, p.fin, None, None)
    return out
