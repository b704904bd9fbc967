"""Derivations read off valid full annotations.

Each ``extract_*`` function takes programs, a product description where
relevant, and a full annotation; it checks the theorem's hypotheses in the
order structure, test agreement, validity, and then builds a derivation whose
judgments are the ones associated with the annotation.  ``family_*`` build
those associated judgment sets independently so that ``audit`` can compare.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from .annotation import Annotation, AnnotationError, associated_judgments, check_vcs, gen_vcs
from .assertion import (DEFAULT_DOMAIN, Domain, Formula, Neg, conj, disj, encode_plus,
                        format_formula, implies_bounded, left, normalize, right, subst_r,
                        subst_u, test)
from .assertion.formula import bagree
from .automaton import Automaton, aut_of
from .lang import (Assign, Choice, Command, If, Program, Seq, Skip, While, choice_free, dot,
                   format_command, lab, labs, replace, same_ctl, same_except_violation, sub,
                   subcommands)
from .logic import Derivation, Judgment
from .product import LCK, LO, RO, ProductSpec, build_product
from .verdict import HOLDS


class ExtractionError(ValueError):
    """The theorem's hypotheses fail; the message names which one."""


Ann = Callable[[int], Formula]


def _validate(a: Automaton, an: Annotation, dom: Domain) -> None:
    if not an.full:
        raise ExtractionError("validity: the annotation must be full")
    try:
        rep = check_vcs(a, an, "enum", dom)
    except AnnotationError as exc:
        raise ExtractionError(f"structure: {exc}") from None
    if rep.status != HOLDS:
        bad = rep.failures()[0]
        raise ExtractionError(f"validity: VC {bad.vc} fails over {dom} "
                              f"(witness {bad.verdict.witness})")


def _agree(pre: Formula, e, e2, n, dom: Domain, what: str = "test agreement") -> None:
    imp = implies_bounded(pre, bagree(e, e2), dom)
    if not imp:
        raise ExtractionError(f"{what}: at branch point {n} the tests need not agree "
                              f"(witness {imp.witness})")


def _conseq(d: Derivation, pre: Formula, post: Formula, dom: Domain) -> Derivation:
    """Wrap ``d`` to conclude ``pre``/``post`` for the same commands."""
    j = d.conclusion
    rule = "rConseq" if j.relational else "Conseq"
    return Derivation(rule, Judgment(j.cmd, pre, post, j.cmd2), [d],
                      [(pre, j.pre), (j.post, post)], domain=dom)


# ---------------------------------------------------------------------------
# One-program regions: plain HL, or one side against skip


@dataclass
class _Mode:
    name: str  # "hl", "lo" or "ro"
    skip: int = 0

    def judgment(self, b: Command, pre: Formula, post: Formula) -> Judgment:
        if self.name == "hl":
            return Judgment(b, pre, post)
        if self.name == "lo":
            return Judgment(b, pre, post, Skip(self.skip))
        return Judgment(Skip(self.skip), pre, post, b)

    def test(self, e) -> Formula:
        return {"hl": test, "lo": left, "ro": right}[self.name](e)

    def assign_pre(self, post: Formula, b: Assign) -> Formula:
        if self.name == "hl":
            return subst_u(post, b.var, b.expr)
        if self.name == "lo":
            return subst_r(post, b.var, b.expr)
        return subst_r(post, None, None, b.var, b.expr)

    def rule(self, kind: str) -> str:
        names = {"hl": {"Skip": "Skip", "Assign": "Ass", "Seq": "Seq", "If": "If",
                        "While": "Wh", "Choice": "Choice"},
                 "lo": {"Skip": "SkipSkip", "Assign": "AssSkip", "Seq": "SeqSkip",
                        "If": "IfSkip", "While": "WhSkip"},
                 "ro": {"Skip": "SkipSkip", "Assign": "SkipAss", "Seq": "SkipSeq",
                        "If": "SkipIf", "While": "SkipWh"}}[self.name]
        if kind not in names:
            raise ExtractionError(f"structure: no one-side rule for {kind.lower()}")
        return names[kind]


def _region(b: Command, m: int, an: Ann, mode: _Mode, dom: Domain) -> Derivation:
    """Derive ``b : {an(lab b)}{an(m)}`` (or the one-sided analogue), where ``m``
    is the exit label of ``b``."""
    n = lab(b)
    J = mode.judgment
    if isinstance(b, Skip):
        ax = Derivation(mode.rule("Skip"), J(b, an(m), an(m)), domain=dom)
        return _conseq(ax, an(n), an(m), dom)
    if isinstance(b, Assign):
        ax = Derivation(mode.rule("Assign"), J(b, mode.assign_pre(an(m), b), an(m)), domain=dom)
        return _conseq(ax, an(n), an(m), dom)
    if isinstance(b, Seq):
        d1 = _region(b.first, lab(b.second), an, mode, dom)
        d2 = _region(b.second, m, an, mode, dom)
        return Derivation(mode.rule("Seq"), J(b, an(lab(b.first)), an(m)), [d1, d2], domain=dom)
    if isinstance(b, If):
        e = mode.test(b.cond)
        d1 = _conseq(_region(b.then, m, an, mode, dom), conj(an(n), e), an(m), dom)
        d2 = _conseq(_region(b.orelse, m, an, mode, dom), conj(an(n), Neg(e)), an(m), dom)
        return Derivation(mode.rule("If"), J(b, an(n), an(m)), [d1, d2], domain=dom)
    if isinstance(b, While):
        e = mode.test(b.cond)
        body = _conseq(_region(b.body, n, an, mode, dom), conj(an(n), e), an(n), dom)
        wh = Derivation(mode.rule("While"), J(b, an(n), conj(an(n), Neg(e))), [body], domain=dom)
        return _conseq(wh, an(n), an(m), dom)
    # choice
    mode.rule("Choice")
    ds = [_conseq(_region(x, m, an, mode, dom), an(n), an(m), dom) for x in (b.left, b.right)]
    return Derivation("Choice", J(b, an(n), an(m)), ds, domain=dom)


def extract_floyd(p: Program, an: Annotation, dom: Domain = DEFAULT_DOMAIN) -> Derivation:
    """HL derivation of ``c : {pre}{post}`` from a valid full annotation of ``aut(p)``."""
    a = aut_of(p)
    _validate(a, an, dom)
    return _region(p.body, p.fin, an, _Mode("hl"), dom)


# ---------------------------------------------------------------------------
# Sequential product


def _seq_hole(c: Command, d: Command, fin: int, fin2: int, an_l: Ann, an_r: Ann,
              pre: Formula, post: Formula, dom: Domain) -> Derivation:
    """``c | d : <pre><post>`` by SeqProd; ``an_l``/``an_r`` give the relational
    annotation along the left run (its exit included) and the right run."""
    hl = _Mode("hl")
    d1 = _region(c, fin, lambda n: encode_plus(an_l(n)), hl, dom)
    d2 = _region(dot(d), fin2, lambda n: encode_plus(an_r(n)), hl, dom)
    mid = d1.conclusion.post
    seq = Derivation("Seq", Judgment(Seq(c, dot(d)), d1.conclusion.pre, d2.conclusion.post),
                     [d1, d2], domain=dom)
    assert normalize(mid) == normalize(d2.conclusion.pre)
    return Derivation("SeqProd", Judgment(c, pre, post, d), [seq], domain=dom)


def extract_seqprod(p: Program, p2: Program, an: Annotation,
                    dom: Domain = DEFAULT_DOMAIN) -> Derivation:
    """Derivation ending in SeqProd from a valid full annotation of the sequential product."""
    a, b = aut_of(p), aut_of(p2)
    prod = build_product(a, b, ProductSpec("seq"))
    _validate(prod, an, dom)
    init2 = p2.init
    return _seq_hole(p.body, p2.body, p.fin, p2.fin,
                     lambda n: an((n, init2)), lambda n: an((p.fin, n)),
                     an.pre, an.post, dom)


# ---------------------------------------------------------------------------
# Lockstep with hooks for a hole and a conditionally aligned loop


@dataclass
class _Lockstep:
    an: Annotation
    pt: Callable[[int], object]
    dom: Domain
    relaxed: bool = False
    hole: tuple | None = None  # (b, b2, handler)
    caloop: tuple | None = None  # (beg, handler)

    def A(self, n: int) -> Formula:
        return self.an(self.pt(n))

    def derive(self, b: Command, b2: Command, m: int) -> Derivation:
        if self.hole and b == self.hole[0] and b2 == self.hole[1]:
            return self.hole[2](m)
        A, dom = self.A, self.dom
        n = lab(b)
        J = lambda pre, post: Judgment(b, pre, post, b2)
        kinds = (type(b), type(b2))
        if kinds == (Skip, Skip):
            return _conseq(Derivation("dSkip", J(A(m), A(m)), domain=dom), A(n), A(m), dom)
        if kinds == (Assign, Assign):
            ax = Derivation("dAss", J(subst_r(A(m), b.var, b.expr, b2.var, b2.expr), A(m)),
                            domain=dom)
            return _conseq(ax, A(n), A(m), dom)
        if self.relaxed and kinds == (Assign, Skip):
            ax = Derivation("AssSkipAxiom-left", J(subst_r(A(m), b.var, b.expr), A(m)), domain=dom)
            return _conseq(ax, A(n), A(m), dom)
        if self.relaxed and kinds == (Skip, Assign):
            ax = Derivation("AssSkipAxiom-right", J(subst_r(A(m), None, None, b2.var, b2.expr),
                                                    A(m)), domain=dom)
            return _conseq(ax, A(n), A(m), dom)
        if kinds == (Seq, Seq):
            if lab(b.second) != lab(b2.second):
                raise ExtractionError(f"structure: sequences at {n} are not aligned")
            d1 = self.derive(b.first, b2.first, lab(b.second))
            d2 = self.derive(b.second, b2.second, m)
            return Derivation("dSeq", J(d1.conclusion.pre, A(m)), [d1, d2], domain=dom)
        if kinds == (If, If):
            le, re_ = left(b.cond), right(b2.cond)
            d1 = _conseq(self.derive(b.then, b2.then, m), conj(A(n), le, re_), A(m), dom)
            d2 = _conseq(self.derive(b.orelse, b2.orelse, m), conj(A(n), Neg(le), Neg(re_)),
                         A(m), dom)
            return Derivation("dIf", J(A(n), A(m)), [d1, d2],
                              [(A(n), bagree(b.cond, b2.cond))], domain=dom)
        if kinds == (While, While):
            if self.caloop and n == self.caloop[0]:
                return self.caloop[1](b, b2, m)
            le, re_ = left(b.cond), right(b2.cond)
            body = _conseq(self.derive(b.body, b2.body, n), conj(A(n), le, re_), A(n), dom)
            wh = Derivation("dWh", J(A(n), conj(A(n), Neg(le), Neg(re_))), [body],
                            [(A(n), bagree(b.cond, b2.cond))], domain=dom)
            return _conseq(wh, A(n), A(m), dom)
        raise ExtractionError(f"structure: commands at {n} do not correspond "
                              f"({format_command(b)} vs {format_command(b2)})")


def _branch_points(c: Command, skip: set[int] = frozenset()):
    for d in subcommands(c):
        if isinstance(d, (If, While)) and d.label not in skip:
            yield d


def _check_agreement(c: Command, c2: Command, A: Callable[[int], Formula], dom: Domain,
                     skip: set[int] = frozenset(), what: str = "test agreement") -> None:
    for d in _branch_points(c, skip):
        _agree(A(d.label), d.cond, sub(d.label, c2).cond, d.label, dom, what)


def extract_lockstep(p: Program, p2: Program, an: Annotation, dom: Domain = DEFAULT_DOMAIN,
                     relaxed: bool = False) -> Derivation:
    """Derivation with the diagonal rules from a valid full annotation of the
    lockstep-control product of two same-control, choice-free programs."""
    c, c2 = p.body, p2.body
    if p.fin != p2.fin:
        raise ExtractionError("structure: the programs must share the exit label")
    if not same_ctl(c, c2, p.fin, relaxed):
        raise ExtractionError("structure: the programs do not have the same control")
    if not (choice_free(c) and choice_free(c2)):
        raise ExtractionError("structure: the programs must be choice-free")
    pt = lambda n: (n, n)
    _check_agreement(c, c2, lambda n: an(pt(n)), dom)
    prod = build_product(aut_of(p), aut_of(p2), ProductSpec("lckctl"))
    _validate(prod, an, dom)
    return _Lockstep(an, pt, dom, relaxed).derive(c, c2, p.fin)


def extract_lockstep_seq(p: Program, p2: Program, b: Command, b2: Command, beg: int, end: int,
                         an: Annotation, dom: Domain = DEFAULT_DOMAIN) -> Derivation:
    """Lockstep for the contexts, SeqProd for the holes ``b | b2``."""
    c, c2, fin = p.body, p2.body, p.fin
    if p.fin != p2.fin:
        raise ExtractionError("structure: the programs must share the exit label")
    bad = same_except_violation(c, c2, b, b2, beg, end, fin)
    if bad:
        raise ExtractionError(f"structure: same-except condition fails, {bad}")
    if not (choice_free(c) and choice_free(c2)):
        raise ExtractionError("structure: the programs must be choice-free")
    pt = lambda n: (beg, beg, LO) if n == beg else (n, n, LCK)
    inside = set(labs(b)) | set(labs(b2))
    _check_agreement(replace(c, b, Skip(beg)), replace(c2, b2, Skip(beg)),
                     lambda n: an(pt(n)), dom, inside)
    prod = build_product(aut_of(p), aut_of(p2),
                         ProductSpec("sameexcept", b=b, b2=b2, beg=beg, end=end))
    _validate(prod, an, dom)
    lb, lb2 = set(labs(b)), set(labs(b2))

    def hole(m: int) -> Derivation:
        an_l = lambda n: an((n, beg, LO)) if n in lb and n != end else an((end, beg, RO))
        an_r = lambda n: an((end, n, RO)) if n in lb2 and n != end else an((end, end, LCK))
        return _seq_hole(b, b2, end, end, an_l, an_r, an(pt(beg)), an(pt(end)), dom)

    return _Lockstep(an, pt, dom, hole=(b, b2, hole)).derive(c, c2, fin)


def extract_cawhile(p: Program, p2: Program, beg: int, lam: Formula, rho: Formula,
                    an: Annotation, dom: Domain = DEFAULT_DOMAIN) -> Derivation:
    """Lockstep, one-side rules and a single caWhile at ``beg``."""
    c, c2, fin = p.body, p2.body, p.fin
    if p.fin != p2.fin:
        raise ExtractionError("structure: the programs must share the exit label")
    if not same_ctl(c, c2, fin):
        raise ExtractionError("structure: the programs do not have the same control")
    if not (choice_free(c) and choice_free(c2)):
        raise ExtractionError("structure: the programs must be choice-free")
    if beg not in labs(c) or not isinstance(sub(beg, c), While):
        raise ExtractionError(f"structure: the command at {beg} must be a loop")
    pt = lambda n: (n, n, LCK)
    A = lambda n: an(pt(n))
    _check_agreement(c, c2, A, dom, {beg}, "hypothesis (a), test agreement")
    w, w2 = sub(beg, c), sub(beg, c2)
    le, re_ = left(w.cond), right(w2.cond)
    cover = disj(bagree(w.cond, w2.cond), conj(lam, le), conj(rho, re_))
    imp = implies_bounded(A(beg), cover, dom)
    if not imp:
        raise ExtractionError(f"hypothesis (b): at {beg} neither the tests agree nor a guard "
                              f"selects a side (witness {imp.witness})")
    prod = build_product(aut_of(p), aut_of(p2), ProductSpec("caloop", beg=beg, lam=lam, rho=rho))
    _validate(prod, an, dom)
    ls = _Lockstep(an, pt, dom)

    def loop(b: While, b2: While, m: int) -> Derivation:
        Q = A(beg)
        p1 = _conseq(ls.derive(b.body, b2.body, beg), conj(Q, le, re_, Neg(lam), Neg(rho)),
                     Q, dom)
        lo = lambda n: Q if n == beg else an((n, beg, LO))
        ro = lambda n: Q if n == beg else an((beg, n, RO))
        p2_ = _conseq(_region(b.body, beg, lo, _Mode("lo", beg), dom), conj(Q, lam, le), Q, dom)
        p3 = _conseq(_region(b2.body, beg, ro, _Mode("ro", beg), dom), conj(Q, rho, re_), Q, dom)
        cw = Derivation("caWhile", Judgment(b, Q, conj(Q, Neg(le), Neg(re_)), b2), [p1, p2_, p3],
                        [(Q, cover)], {"lam": lam, "rho": rho}, dom)
        return _conseq(cw, Q, A(m), dom)

    ls.caloop = (beg, loop)
    return ls.derive(c, c2, fin)


# ---------------------------------------------------------------------------
# Associated judgments and the audit


@dataclass
class Family:
    judgments: set = field(default_factory=set)
    vcs: set = field(default_factory=set)

    def add(self, j: Judgment) -> None:
        self.judgments.add(j.key(labels=False))

    def __contains__(self, j: Judgment) -> bool:
        return j.key(labels=False) in self.judgments

    def add_vcs(self, a: Automaton, an: Annotation, dom: Domain,
                enc: Callable[[Formula], Formula] = lambda f: f) -> None:
        for vc in gen_vcs(a, an, dom=dom):
            for r in vc.rendered:
                self.vcs.add((normalize(enc(r.antecedent)), normalize(enc(r.consequent))))

    def is_vc(self, a: Formula, b: Formula) -> bool:
        na, nb = normalize(a), normalize(b)
        return na == nb or (na, nb) in self.vcs


def _exits(c: Command, fin: int):
    """Every subprogram of ``c`` with its exit label, parent and role."""
    out = []

    def walk(b, m, parent, role):
        out.append((b, m, parent, role))
        if isinstance(b, Seq):
            walk(b.first, lab(b.second), b, "first")
            walk(b.second, m, b, "second")
        elif isinstance(b, If):
            walk(b.then, m, b, "then")
            walk(b.orelse, m, b, "else")
        elif isinstance(b, While):
            walk(b.body, b.label, b, "body")
        elif isinstance(b, Choice):
            walk(b.left, m, b, "branch")
            walk(b.right, m, b, "branch")

    walk(c, fin, None, None)
    return out


def _unary_family(fam: Family, c: Command, fin: int, an: Ann, mode: _Mode) -> None:
    J = mode.judgment
    for b, m, parent, role in _exits(c, fin):
        fam.add(J(b, an(lab(b)), an(m)))
        if role in ("then", "body"):
            fam.add(J(b, conj(an(parent.label), mode.test(parent.cond)), an(m)))
        elif role == "else":
            fam.add(J(b, conj(an(parent.label), Neg(mode.test(parent.cond))), an(m)))
        elif role == "branch":
            fam.add(J(b, an(parent.label), an(m)))
        if isinstance(b, While):
            fam.add(J(b, an(b.label), conj(an(b.label), Neg(mode.test(b.cond)))))
        if isinstance(b, Assign):
            fam.add(J(b, mode.assign_pre(an(m), b), an(m)))


def family_floyd(p: Program, an: Annotation, dom: Domain = DEFAULT_DOMAIN) -> Family:
    fam = Family()
    for j in associated_judgments(p, an):
        fam.add(j)
    fam.add_vcs(aut_of(p), an, dom)
    return fam


def _seq_family(fam: Family, c: Command, d: Command, fin: int, fin2: int, an_l: Ann, an_r: Ann,
                pre: Formula, post: Formula) -> None:
    hl = _Mode("hl")
    _unary_family(fam, c, fin, lambda n: encode_plus(an_l(n)), hl)
    _unary_family(fam, dot(d), fin2, lambda n: encode_plus(an_r(n)), hl)
    fam.add(Judgment(Seq(c, dot(d)), encode_plus(pre), encode_plus(post)))
    fam.add(Judgment(c, pre, post, d))


def family_seqprod(p: Program, p2: Program, an: Annotation,
                   dom: Domain = DEFAULT_DOMAIN) -> Family:
    fam = Family()
    _seq_family(fam, p.body, p2.body, p.fin, p2.fin, lambda n: an((n, p2.init)),
                lambda n: an((p.fin, n)), an.pre, an.post)
    prod = build_product(aut_of(p), aut_of(p2), ProductSpec("seq"))
    fam.add_vcs(prod, an, dom, encode_plus)
    return fam


def _lockstep_family(fam: Family, b: Command, b2: Command, m: int, A: Ann,
                     hole: tuple | None = None, parent=None, parent2=None,
                     role: str | None = None) -> None:
    J = lambda pre, post: Judgment(b, pre, post, b2)
    fam.add(J(A(lab(b)), A(m)))
    if isinstance(parent, (If, While)):
        le, re_ = left(parent.cond), right(parent2.cond)
        if role in ("then", "body"):
            fam.add(J(conj(A(parent.label), le, re_), A(m)))
        elif role == "else":
            fam.add(J(conj(A(parent.label), Neg(le), Neg(re_)), A(m)))
    if hole is not None and (b, b2) == hole or type(b) is not type(b2):
        return
    rec = lambda x, x2, exit_, r: _lockstep_family(fam, x, x2, exit_, A, hole, b, b2, r)
    if isinstance(b, Seq):
        rec(b.first, b2.first, lab(b.second), "first")
        rec(b.second, b2.second, m, "second")
    elif isinstance(b, If):
        rec(b.then, b2.then, m, "then")
        rec(b.orelse, b2.orelse, m, "else")
    elif isinstance(b, While):
        fam.add(J(A(b.label), conj(A(b.label), Neg(left(b.cond)), Neg(right(b2.cond)))))
        rec(b.body, b2.body, b.label, "body")
    elif isinstance(b, Assign):
        fam.add(J(subst_r(A(m), b.var, b.expr, b2.var, b2.expr), A(m)))


def family_lockstep(p: Program, p2: Program, an: Annotation,
                    dom: Domain = DEFAULT_DOMAIN) -> Family:
    fam = Family()
    _lockstep_family(fam, p.body, p2.body, p.fin, lambda n: an((n, n)))
    prod = build_product(aut_of(p), aut_of(p2), ProductSpec("lckctl"))
    fam.add_vcs(prod, an, dom)
    return fam


def family_lockstep_seq(p: Program, p2: Program, b: Command, b2: Command, beg: int, end: int,
                        an: Annotation, dom: Domain = DEFAULT_DOMAIN) -> Family:
    fam = Family()
    pt = lambda n: (beg, beg, LO) if n == beg else (n, n, LCK)
    _lockstep_family(fam, p.body, p2.body, p.fin, lambda n: an(pt(n)), hole=(b, b2))
    lb, lb2 = set(labs(b)), set(labs(b2))
    _seq_family(fam, b, b2, end, end,
                lambda n: an((n, beg, LO)) if n in lb and n != end else an((end, beg, RO)),
                lambda n: an((end, n, RO)) if n in lb2 and n != end else an((end, end, LCK)),
                an(pt(beg)), an(pt(end)))
    prod = build_product(aut_of(p), aut_of(p2),
                         ProductSpec("sameexcept", b=b, b2=b2, beg=beg, end=end))
    fam.add_vcs(prod, an, dom)
    fam.add_vcs(prod, an, dom, encode_plus)
    return fam


def family_cawhile(p: Program, p2: Program, beg: int, lam: Formula, rho: Formula,
                   an: Annotation, dom: Domain = DEFAULT_DOMAIN) -> Family:
    fam = Family()
    A = lambda n: an((n, n, LCK))
    c, c2 = p.body, p2.body
    _lockstep_family(fam, c, c2, p.fin, A)
    w, w2 = sub(beg, c), sub(beg, c2)
    Q, le, re_ = A(beg), left(w.cond), right(w2.cond)
    fam.add(Judgment(w.body, conj(Q, le, re_, Neg(lam), Neg(rho)), Q, w2.body))
    fam.add(Judgment(w.body, conj(Q, lam, le), Q, Skip(beg)))
    fam.add(Judgment(Skip(beg), conj(Q, rho, re_), Q, w2.body))
    lo = lambda n: Q if n == beg else an((n, beg, LO))
    ro = lambda n: Q if n == beg else an((beg, n, RO))
    _unary_family(fam, w.body, beg, lo, _Mode("lo", beg))
    _unary_family(fam, w2.body, beg, ro, _Mode("ro", beg))
    prod = build_product(aut_of(p), aut_of(p2), ProductSpec("caloop", beg=beg, lam=lam, rho=rho))
    fam.add_vcs(prod, an, dom)
    return fam


_AXIOMS = {"Skip", "Ass", "dSkip", "dAss", "SkipSkip", "AssSkip", "SkipAss",
           "AssSkipAxiom-left", "AssSkipAxiom-right"}


def audit(d: Derivation, fam: Family) -> list[str]:
    """Judgments of ``d`` outside the family, and consequence steps whose
    implications are not VC instances.  Empty when the audit passes.

    An axiom instance directly under a consequence step is glue: it is allowed
    when that step's implications are VC instances.
    """
    problems = []

    def walk(node: Derivation, path: tuple, parent: Derivation | None):
        where = "root" if not path else "root." + ".".join(map(str, path))
        glue = node.rule in _AXIOMS and parent is not None and parent.rule in ("Conseq", "rConseq")
        if node.conclusion not in fam and not glue:
            problems.append(f"{where}: {node.conclusion} is not an associated judgment")
        if node.rule in ("Conseq", "rConseq"):
            for a, b in node.side:
                if not fam.is_vc(a, b):
                    problems.append(f"{where}: {format_formula(a)} => {format_formula(b)} "
                                    f"is not a VC instance")
        for i, p in enumerate(node.premises):
            walk(p, path + (i,), node)

    walk(d, (), None)
    return problems
