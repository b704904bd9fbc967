"""Judgments, derivations and the derivation checker.

Unary judgments ``c : {P}{Q}`` and relational judgments ``c | c2 : <R><S>``.
A derivation is a tree of rule instances; ``check_derivation`` matches every
node against its rule schema (formulas compared after normalization, command
labels ignored) and discharges side implications by bounded enumeration.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator

from .assertion import (DEFAULT_DOMAIN, LEFT, PLAIN, RIGHT, Domain, Formula, Key, Neg, conj,
                        disj, encode_plus, format_formula, free_keys, implies_bounded, left,
                        models, normalize, parse_formula, right, subst_r, subst_u, test)
from .assertion.formula import ArityError, arity, bagree, holds_r, holds_u
from .lang import (Assign, Choice, Command, If, Seq, Skip, While, command_vars, dot,
                   erase_labels, format_command, parse_command)
from .semantics import Store, run_command
from .verdict import FAILS, HOLDS, INCONCLUSIVE, Verdict

UNARY_RULES = ("Skip", "Ass", "Seq", "If", "Wh", "Choice", "Conseq")
LOCKSTEP_RULES = ("dSkip", "dAss", "dSeq", "dIf", "dWh", "rConseq")
ONE_SIDE_RULES = ("AssSkip", "SkipSkip", "SeqSkip", "IfSkip", "WhSkip",
                  "SkipAss", "SkipSeq", "SkipIf", "SkipWh",
                  "AssSkipAxiom-left", "AssSkipAxiom-right")
RULES = UNARY_RULES + LOCKSTEP_RULES + ("SeqProd",) + ONE_SIDE_RULES + ("caWhile",)


@dataclass(frozen=True)
class Judgment:
    cmd: Command
    pre: Formula
    post: Formula
    cmd2: Command | None = None

    @property
    def relational(self) -> bool:
        return self.cmd2 is not None

    def key(self, labels: bool = True):
        """Identity up to formula normalization (and labels, if ``labels`` is false)."""
        c, c2 = self.cmd, self.cmd2
        if not labels:
            c = erase_labels(c)
            c2 = erase_labels(c2) if c2 is not None else None
        return (c, c2, normalize(self.pre), normalize(self.post))

    def __str__(self) -> str:
        if self.relational:
            return (f"{format_command(self.cmd)} | {format_command(self.cmd2)} : "
                    f"<{format_formula(self.pre)}> <{format_formula(self.post)}>")
        return f"{format_command(self.cmd)} : {{{format_formula(self.pre)}}} {{{format_formula(self.post)}}}"


@dataclass
class Derivation:
    rule: str
    conclusion: Judgment
    premises: list["Derivation"] = field(default_factory=list)
    side: list[tuple[Formula, Formula]] = field(default_factory=list)
    params: dict[str, Formula] = field(default_factory=dict)
    domain: Domain | None = None

    def nodes(self, path: tuple[int, ...] = ()) -> Iterator[tuple[tuple[int, ...], "Derivation"]]:
        yield path, self
        for i, p in enumerate(self.premises):
            yield from p.nodes(path + (i,))

    def size(self) -> int:
        return sum(1 for _ in self.nodes())

    def rules_used(self) -> list[str]:
        return [d.rule for _, d in self.nodes()]


def used_judgments(d: Derivation) -> set[Judgment]:
    return {n.conclusion for _, n in d.nodes()}


# ---------------------------------------------------------------------------
# The kernel


class Reject(Exception):
    def __init__(self, reason: str, witness=None):
        super().__init__(reason)
        self.reason = reason
        self.witness = witness


@dataclass
class KernelResult:
    accepted: bool
    path: tuple[int, ...] = ()
    rule: str = ""
    reason: str = ""
    witness: object = None

    def __bool__(self) -> bool:
        return self.accepted

    def __str__(self) -> str:
        if self.accepted:
            return "accepted"
        where = "root" if not self.path else "root." + ".".join(map(str, self.path))
        return f"rejected at {where} ({self.rule}): {self.reason}"


def _same(f: Formula, g: Formula) -> bool:
    return normalize(f) == normalize(g)


def _want(ok: bool, what: str):
    if not ok:
        raise Reject(what)


def _want_f(got: Formula, expected: Formula, what: str):
    if not _same(got, expected):
        raise Reject(f"{what}: expected {format_formula(expected)}, found {format_formula(got)}")


def _cmd(c: Command, cls, what: str):
    if not isinstance(c, cls):
        raise Reject(f"{what} must be {cls.__name__.lower()}, found {format_command(c)}")


def _same_cmd(c: Command, d: Command, what: str):
    if erase_labels(c) != erase_labels(d):
        raise Reject(f"{what}: expected {format_command(d, False)}, found {format_command(c, False)}")


def _sig(d: Derivation, premises: int, side: int):
    if len(d.premises) != premises:
        raise Reject(f"expects {premises} premise(s), found {len(d.premises)}")
    if len(d.side) != side:
        missing = "missing side condition" if len(d.side) < side else "unexpected side condition"
        raise Reject(f"{missing}: expects {side}, found {len(d.side)}")


def _kind(j: Judgment, relational: bool, what: str):
    if j.relational != relational:
        raise Reject(f"{what} must be a {'relational' if relational else 'unary'} judgment")


def _tests(c: Command, c2: Command) -> tuple[Formula, Formula, Formula]:
    return left(c.cond), right(c2.cond), bagree(c.cond, c2.cond)


def _structure(d: Derivation) -> list[tuple[Formula, Formula, str]]:
    """Check the node's shape; return the implications it relies on."""
    r, j = d.rule, d.conclusion
    if r not in RULES:
        raise Reject(f"unknown rule {r!r}")
    rel = r not in UNARY_RULES
    _kind(j, rel, "conclusion")
    if d.params and r != "caWhile":
        raise Reject("only caWhile takes parameters")
    for p in d.premises:
        want_rel = r != "SeqProd" and rel
        _kind(p.conclusion, want_rel, "premise")
    try:
        for f in (j.pre, j.post):
            a = arity(f)
            if a not in (None, "relational" if rel else "unary"):
                raise Reject(f"formula {format_formula(f)} has the wrong arity")
    except ArityError as exc:
        raise Reject(str(exc)) from None
    c, c2, P, Q = j.cmd, j.cmd2, j.pre, j.post
    prem = [p.conclusion for p in d.premises]

    if r in ("Skip", "dSkip", "SkipSkip"):
        _sig(d, 0, 0)
        _cmd(c, Skip, "command")
        if rel:
            _cmd(c2, Skip, "right command")
        _want_f(P, Q, "precondition of the skip axiom")
        return []
    if r == "Ass":
        _sig(d, 0, 0)
        _cmd(c, Assign, "command")
        _want_f(P, subst_u(Q, c.var, c.expr), "precondition of the assignment axiom")
        return []
    if r == "dAss":
        _sig(d, 0, 0)
        _cmd(c, Assign, "left command")
        _cmd(c2, Assign, "right command")
        _want_f(P, subst_r(Q, c.var, c.expr, c2.var, c2.expr), "precondition of dAss")
        return []
    if r in ("AssSkip", "AssSkipAxiom-left"):
        _sig(d, 0, 0)
        _cmd(c, Assign, "left command")
        _cmd(c2, Skip, "right command")
        _want_f(P, subst_r(Q, c.var, c.expr), f"precondition of {r}")
        return []
    if r in ("SkipAss", "AssSkipAxiom-right"):
        _sig(d, 0, 0)
        _cmd(c, Skip, "left command")
        _cmd(c2, Assign, "right command")
        _want_f(P, subst_r(Q, None, None, c2.var, c2.expr), f"precondition of {r}")
        return []
    if r in ("Seq", "dSeq", "SeqSkip", "SkipSeq"):
        _sig(d, 2, 0)
        p1, p2 = prem
        if r in ("Seq", "dSeq", "SeqSkip"):
            _cmd(c, Seq, "left command" if rel else "command")
            _same_cmd(p1.cmd, c.first, "first premise command")
            _same_cmd(p2.cmd, c.second, "second premise command")
        if r in ("dSeq", "SkipSeq"):
            _cmd(c2, Seq, "right command")
            _same_cmd(p1.cmd2, c2.first, "first premise right command")
            _same_cmd(p2.cmd2, c2.second, "second premise right command")
        if r == "SeqSkip":
            _cmd(c2, Skip, "right command")
            _cmd(p1.cmd2, Skip, "first premise right command")
            _cmd(p2.cmd2, Skip, "second premise right command")
        if r == "SkipSeq":
            _cmd(c, Skip, "left command")
            _cmd(p1.cmd, Skip, "first premise left command")
            _cmd(p2.cmd, Skip, "second premise left command")
        _want_f(p1.pre, P, "first premise precondition")
        _want_f(p2.pre, p1.post, "intermediate assertion")
        _want_f(p2.post, Q, "second premise postcondition")
        return []
    if r in ("If", "IfSkip", "SkipIf"):
        _sig(d, 2, 0)
        p1, p2 = prem
        if r == "SkipIf":
            _cmd(c, Skip, "left command")
            _cmd(c2, If, "right command")
            branch, e = c2, right(c2.cond)
            for p in prem:
                _cmd(p.cmd, Skip, "premise left command")
        else:
            _cmd(c, If, "command" if not rel else "left command")
            branch = c
            e = test(c.cond) if not rel else left(c.cond)
            if rel:
                _cmd(c2, Skip, "right command")
                for p in prem:
                    _cmd(p.cmd2, Skip, "premise right command")
        pick = (lambda p: p.cmd2) if r == "SkipIf" else (lambda p: p.cmd)
        _same_cmd(pick(p1), branch.then, "first premise command")
        _same_cmd(pick(p2), branch.orelse, "second premise command")
        _want_f(p1.pre, conj(P, e), "first premise precondition")
        _want_f(p2.pre, conj(P, Neg(e)), "second premise precondition")
        _want_f(p1.post, Q, "first premise postcondition")
        _want_f(p2.post, Q, "second premise postcondition")
        return []
    if r == "dIf":
        _sig(d, 2, 1)
        _cmd(c, If, "left command")
        _cmd(c2, If, "right command")
        le, re_, agree = _tests(c, c2)
        p1, p2 = prem
        _same_cmd(p1.cmd, c.then, "first premise left command")
        _same_cmd(p1.cmd2, c2.then, "first premise right command")
        _same_cmd(p2.cmd, c.orelse, "second premise left command")
        _same_cmd(p2.cmd2, c2.orelse, "second premise right command")
        _want_f(p1.pre, conj(P, le, re_), "first premise precondition")
        _want_f(p2.pre, conj(P, Neg(le), Neg(re_)), "second premise precondition")
        _want_f(p1.post, Q, "first premise postcondition")
        _want_f(p2.post, Q, "second premise postcondition")
        _want_f(d.side[0][0], P, "side condition antecedent")
        _want_f(d.side[0][1], agree, "side condition consequent")
        return [(P, agree, "side condition")]
    if r in ("Wh", "WhSkip", "SkipWh"):
        _sig(d, 1, 0)
        (p1,) = prem
        if r == "SkipWh":
            _cmd(c, Skip, "left command")
            _cmd(c2, While, "right command")
            _cmd(p1.cmd, Skip, "premise left command")
            loop, e = c2, right(c2.cond)
            _same_cmd(p1.cmd2, loop.body, "premise right command")
        else:
            _cmd(c, While, "command" if not rel else "left command")
            loop = c
            e = test(c.cond) if not rel else left(c.cond)
            _same_cmd(p1.cmd, loop.body, "premise command")
            if rel:
                _cmd(c2, Skip, "right command")
                _cmd(p1.cmd2, Skip, "premise right command")
        _want_f(p1.pre, conj(P, e), "premise precondition")
        _want_f(p1.post, P, "premise postcondition (invariant)")
        _want_f(Q, conj(P, Neg(e)), "postcondition")
        return []
    if r == "dWh":
        _sig(d, 1, 1)
        _cmd(c, While, "left command")
        _cmd(c2, While, "right command")
        le, re_, agree = _tests(c, c2)
        (p1,) = prem
        _same_cmd(p1.cmd, c.body, "premise left command")
        _same_cmd(p1.cmd2, c2.body, "premise right command")
        _want_f(p1.pre, conj(P, le, re_), "premise precondition")
        _want_f(p1.post, P, "premise postcondition (invariant)")
        _want_f(Q, conj(P, Neg(le), Neg(re_)), "postcondition")
        _want_f(d.side[0][0], P, "side condition antecedent")
        _want_f(d.side[0][1], agree, "side condition consequent")
        return [(P, agree, "side condition")]
    if r == "Choice":
        _sig(d, 2, 0)
        _cmd(c, Choice, "command")
        p1, p2 = prem
        _same_cmd(p1.cmd, c.left, "first premise command")
        _same_cmd(p2.cmd, c.right, "second premise command")
        for p in prem:
            _want_f(p.pre, P, "premise precondition")
            _want_f(p.post, Q, "premise postcondition")
        return []
    if r in ("Conseq", "rConseq"):
        _sig(d, 1, 2)
        (p1,) = prem
        _same_cmd(p1.cmd, c, "premise command")
        if rel:
            _same_cmd(p1.cmd2, c2, "premise right command")
        (a1, b1), (a2, b2) = d.side
        _want_f(a1, P, "first side condition antecedent")
        _want_f(b1, p1.pre, "first side condition consequent")
        _want_f(a2, p1.post, "second side condition antecedent")
        _want_f(b2, Q, "second side condition consequent")
        return [(P, p1.pre, "precondition strengthening"),
                (p1.post, Q, "postcondition weakening")]
    if r == "SeqProd":
        _sig(d, 1, 0)
        (p1,) = prem
        _same_cmd(p1.cmd, Seq(c, dot(c2)), "premise command (left; dotted right)")
        _want_f(p1.pre, encode_plus(P), "premise precondition")
        _want_f(p1.post, encode_plus(Q), "premise postcondition")
        return []
    if r == "caWhile":
        if set(d.params) != {"lam", "rho"}:
            raise Reject("caWhile needs the parameters lam and rho")
        if len(d.premises) != 3:
            raise Reject(f"expects 3 premises, found {len(d.premises)}")
        if len(d.side) != 1:
            raise Reject("premise 4 (the side condition) is missing" if not d.side
                         else "premise 4 must be a single implication")
        _cmd(c, While, "left command")
        _cmd(c2, While, "right command")
        lam, rho = d.params["lam"], d.params["rho"]
        le, re_, agree = _tests(c, c2)
        p1, p2, p3 = prem
        _same_cmd(p1.cmd, c.body, "premise 1 left command")
        _same_cmd(p1.cmd2, c2.body, "premise 1 right command")
        _same_cmd(p2.cmd, c.body, "premise 2 left command")
        _cmd(p2.cmd2, Skip, "premise 2 right command")
        _cmd(p3.cmd, Skip, "premise 3 left command")
        _same_cmd(p3.cmd2, c2.body, "premise 3 right command")
        _want_f(p1.pre, conj(P, le, re_, Neg(lam), Neg(rho)), "premise 1 precondition")
        _want_f(p2.pre, conj(P, lam, le), "premise 2 precondition")
        _want_f(p3.pre, conj(P, rho, re_), "premise 3 precondition")
        for i, p in enumerate(prem, 1):
            _want_f(p.post, P, f"premise {i} postcondition (invariant)")
        _want_f(Q, conj(P, Neg(le), Neg(re_)), "postcondition")
        cover = disj(agree, conj(lam, le), conj(rho, re_))
        _want_f(d.side[0][0], P, "premise 4 antecedent")
        _want_f(d.side[0][1], cover, "premise 4 consequent")
        return [(P, cover, "premise 4")]
    raise Reject(f"no schema for {r}")  # pragma: no cover


def check_derivation(d: Derivation, dom: Domain | None = None) -> KernelResult:
    """Accept ``d`` or name the first offending node (preorder).

    Shapes are checked for the whole tree before any implication is
    enumerated.  Implications use ``dom`` when given, else the node's own
    domain, else the default.
    """
    pending = []
    for path, node in d.nodes():
        try:
            for a, b, what in _structure(node):
                pending.append((path, node, a, b, what))
        except Reject as exc:
            return KernelResult(False, path, node.rule, exc.reason)
    for path, node, a, b, what in pending:
        over = dom or node.domain or DEFAULT_DOMAIN
        imp = implies_bounded(a, b, over)
        if not imp:
            return KernelResult(False, path, node.rule,
                                f"{what} fails over {over}: {format_formula(a)} does not imply "
                                f"{format_formula(b)}", imp.witness)
    return KernelResult(True)


# ---------------------------------------------------------------------------
# Bounded semantics of judgments


def _enum_stores(pre: Formula, keys: list[Key], dom: Domain, inputs):
    from .lang import IntLit
    from .assertion.formula import subst
    vary = keys if inputs is None else [k for k in keys if k in set(inputs)]
    fixed = [k for k in keys if k not in set(vary)]
    p = subst(pre, {k: IntLit(0) for k in fixed}) if fixed else pre
    for t in models(p, dom, vary):
        yield from t.rows(vary)


def sem_judg_bounded(j: Judgment, dom: Domain = DEFAULT_DOMAIN, max_steps: int = 10000,
                     inputs: Iterable[Key] | None = None) -> Verdict:
    """Bounded check of ``|= j``: every terminated run from a ``dom`` state
    satisfying the precondition ends in the postcondition."""
    bounds = {"domain": dom, "max-steps": max_steps}
    cut = False
    if not j.relational:
        keys = sorted({(PLAIN, x) for x in command_vars(j.cmd)} | free_keys(j.pre))
        for row in _enum_stores(j.pre, keys, dom, inputs):
            s = Store({k[1]: v for k, v in row.items()})
            out = run_command(j.cmd, s, max_steps)
            cut |= out.diverged
            for u in out.finals:
                if not holds_u(j.post, u):
                    return Verdict(FAILS, (s, u), "a run ends outside the postcondition", bounds)
    else:
        keys = sorted({(LEFT, x) for x in command_vars(j.cmd)}
                      | {(RIGHT, x) for x in command_vars(j.cmd2)} | free_keys(j.pre))
        runs: dict = {}

        def finals(c, s):
            if (c, s) not in runs:
                runs[c, s] = run_command(c, s, max_steps)
            return runs[c, s]

        for row in _enum_stores(j.pre, keys, dom, inputs):
            s = Store({k[1]: v for k, v in row.items() if k[0] == LEFT})
            t = Store({k[1]: v for k, v in row.items() if k[0] == RIGHT})
            o1, o2 = finals(j.cmd, s), finals(j.cmd2, t)
            cut |= o1.diverged or o2.diverged
            for u in o1.finals:
                for v in o2.finals:
                    if not holds_r(j.post, u, v):
                        return Verdict(FAILS, ((s, t), (u, v)),
                                       "related runs end outside the postcondition", bounds)
    if cut:
        return Verdict(INCONCLUSIVE, None, "step budget exhausted", bounds)
    return Verdict(HOLDS, None, "", bounds)


# ---------------------------------------------------------------------------
# Derivation files
#
#   (rule NAME (domain LO HI)
#     (concl (hl "CMD" "PRE" "POST"))          or (rel "CMD" "CMD2" "PRE" "POST")
#     (side ("A" "B") ...)
#     (params (lam "F") (rho "F"))
#     (premises (rule ...) ...))

_SEXP_TOKEN = re.compile(r'\s*(?:(\()|(\))|"((?:[^"\\]|\\.)*)"|([^\s()"]+))')


class SexpError(ValueError):
    pass


def read_sexp(text: str):
    pos, stack, out = 0, [[]], None
    text = text.rstrip()
    while pos < len(text):
        m = _SEXP_TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise SexpError(f"unreadable text at offset {pos}")
        pos = m.end()
        if m.group(1):
            stack.append([])
        elif m.group(2):
            if len(stack) == 1:
                raise SexpError(f"unbalanced ')' at offset {pos - 1}")
            done = stack.pop()
            stack[-1].append(done)
        elif m.group(3) is not None:
            stack[-1].append(("str", re.sub(r"\\(.)", r"\1", m.group(3))))
        else:
            stack[-1].append(m.group(4))
    if len(stack) != 1 or len(stack[0]) != 1:
        raise SexpError("expected exactly one balanced expression")
    out = stack[0][0]
    return out


def _q(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def format_derivation(d: Derivation, indent: int = 0) -> str:
    pad = "  " * indent
    j = d.conclusion
    fmt_c = format_command
    if j.relational:
        concl = (f"(rel {_q(fmt_c(j.cmd))} {_q(fmt_c(j.cmd2))} "
                 f"{_q(format_formula(j.pre))} {_q(format_formula(j.post))})")
    else:
        concl = f"(hl {_q(fmt_c(j.cmd))} {_q(format_formula(j.pre))} {_q(format_formula(j.post))})"
    lines = [f"{pad}(rule {d.rule}"]
    if d.domain is not None:
        lines.append(f"{pad}  (domain {d.domain.lo} {d.domain.hi})")
    lines.append(f"{pad}  (concl {concl})")
    if d.side:
        sides = " ".join(f"({_q(format_formula(a))} {_q(format_formula(b))})" for a, b in d.side)
        lines.append(f"{pad}  (side {sides})")
    if d.params:
        ps = " ".join(f"({k} {_q(format_formula(v))})" for k, v in sorted(d.params.items()))
        lines.append(f"{pad}  (params {ps})")
    if d.premises:
        lines.append(f"{pad}  (premises")
        lines.extend(format_derivation(p, indent + 2) for p in d.premises)
        lines[-1] += ")"
    lines[-1] += ")"
    return "\n".join(lines)


def _s(x, what: str) -> str:
    if not (isinstance(x, tuple) and x[0] == "str"):
        raise SexpError(f"{what} must be a quoted string")
    return x[1]


def _from_sexp(x) -> Derivation:
    if not (isinstance(x, list) and len(x) >= 2 and x[0] == "rule" and isinstance(x[1], str)):
        raise SexpError("expected (rule NAME ...)")
    d = Derivation(x[1], None)  # type: ignore[arg-type]
    mode = "unary"
    fields = {f[0]: f[1:] for f in x[2:] if isinstance(f, list) and f and isinstance(f[0], str)}
    if len(fields) != len(x) - 2:
        raise SexpError(f"malformed field in rule {x[1]}")
    if "concl" not in fields or len(fields["concl"]) != 1:
        raise SexpError(f"rule {x[1]} needs one (concl ...)")
    c = fields["concl"][0]
    if c[0] == "hl" and len(c) == 4:
        cmd = parse_command(_s(c[1], "command"), True, unique=False)
        d.conclusion = Judgment(cmd, parse_formula(_s(c[2], "pre"), "unary"),
                                parse_formula(_s(c[3], "post"), "unary"))
    elif c[0] == "rel" and len(c) == 5:
        mode = "relational"
        d.conclusion = Judgment(parse_command(_s(c[1], "command"), True, unique=False),
                                parse_formula(_s(c[3], "pre"), mode),
                                parse_formula(_s(c[4], "post"), mode),
                                parse_command(_s(c[2], "command"), True, unique=False))
    else:
        raise SexpError("concl must be (hl CMD PRE POST) or (rel CMD CMD2 PRE POST)")
    if "domain" in fields:
        lo, hi = fields["domain"]
        d.domain = Domain(int(lo), int(hi))
    for pair in fields.get("side", []):
        d.side.append((parse_formula(_s(pair[0], "side"), mode),
                       parse_formula(_s(pair[1], "side"), mode)))
    for p in fields.get("params", []):
        d.params[p[0]] = parse_formula(_s(p[1], "parameter"), mode)
    d.premises = [_from_sexp(p) for p in fields.get("premises", [])]
    return d


def parse_derivation(text: str) -> Derivation:
    return _from_sexp(read_sexp(text))
