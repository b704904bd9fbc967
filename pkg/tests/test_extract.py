import pytest

from alignverify.annotation import Annotation
from alignverify.assertion import FALSE, Domain, bagree, implies_bounded, normalize
from alignverify.extract import (ExtractionError, audit, extract_cawhile, extract_floyd,
                                 extract_lockstep, extract_lockstep_seq, extract_seqprod,
                                 family_cawhile, family_floyd, family_lockstep,
                                 family_seqprod)
from alignverify.lang import sub
from alignverify.logic import LOCKSTEP_RULES, ONE_SIDE_RULES, UNARY_RULES, check_derivation

from corpus import FLOYD, LOCKSTEP, LOCKSTEP_SEQ, SEQPROD, U, ann, holes, prog, sec7

DEFAULT = Domain(-8, 8)


@pytest.mark.parametrize("label,left,a", FLOYD, ids=[x[0] for x in FLOYD])
def test_floyd_instances(label, left, a):
    p, an = prog(left), ann(a, "unary")
    d = extract_floyd(p, an, an.domain or DEFAULT)
    assert check_derivation(d).accepted
    assert set(d.rules_used()) <= set(UNARY_RULES)
    assert audit(d, family_floyd(p, an, an.domain or DEFAULT)) == []


@pytest.mark.parametrize("label,left,right,a", SEQPROD, ids=[x[0] for x in SEQPROD])
def test_seqprod_instances(label, left, right, a):
    p, p2, an = prog(left), prog(right), ann(a)
    d = extract_seqprod(p, p2, an, an.domain or DEFAULT)
    assert d.rule == "SeqProd"
    assert d.rules_used().count("SeqProd") == 1
    assert check_derivation(d).accepted
    assert audit(d, family_seqprod(p, p2, an, an.domain or DEFAULT)) == []


@pytest.mark.parametrize("label,left,right,a", LOCKSTEP, ids=[x[0] for x in LOCKSTEP])
def test_lockstep_instances(label, left, right, a):
    p, p2, an = prog(left), prog(right), ann(a)
    d = extract_lockstep(p, p2, an, an.domain or DEFAULT)
    assert check_derivation(d).accepted
    # lockstep proofs stay inside the relational lockstep rules
    assert set(d.rules_used()) <= set(LOCKSTEP_RULES)
    assert audit(d, family_lockstep(p, p2, an, an.domain or DEFAULT)) == []


@pytest.mark.parametrize("label,left,right,beg,end,a", LOCKSTEP_SEQ,
                         ids=[x[0] for x in LOCKSTEP_SEQ])
def test_lockstep_with_hole_instances(label, left, right, beg, end, a):
    p, p2, b, b2 = holes(left, right, beg, end)
    an = ann(a)
    d = extract_lockstep_seq(p, p2, b, b2, beg, end, an, an.domain or DEFAULT)
    assert check_derivation(d).accepted
    assert d.rules_used().count("SeqProd") == 1
    assert set(d.rules_used()) <= set(LOCKSTEP_RULES) | set(UNARY_RULES) | \
        set(ONE_SIDE_RULES) | {"SeqProd"}


def test_whole_program_hole_gives_seqprod_root():
    p, p2, b, b2 = holes("incr", "incr", 1, 0)
    an = ann("incr_hole")
    d = extract_lockstep_seq(p, p2, b, b2, 1, 0, an)
    assert d.rule == "SeqProd"


def test_lockstep_refuses_when_tests_may_disagree():
    with pytest.raises(ExtractionError, match="^test agreement: at branch point 5"):
        extract_lockstep(prog("c4"), prog("c5"), ann("c4c5_lockstep"))


def test_lockstep_refuses_triple_keyed_annotation_as_structure():
    c4, c5, lam, rho, s7 = sec7()
    with pytest.raises(ExtractionError, match="^structure"):
        extract_lockstep(c4, c5, s7)


def test_refusal_order_structure_first():
    # an annotation that is both mis-shaped and invalid is refused for its shape
    bad = Annotation({(1, 1): FALSE, (99, 99): FALSE}, FALSE, FALSE)
    with pytest.raises(ExtractionError, match="^structure"):
        extract_lockstep(prog("c0"), prog("c0"), bad)


def test_invalid_annotation_refused_for_validity():
    an = ann("c0_floyd", "unary")
    broken = Annotation(dict(an.at), an.pre, an.post, an.full, an.domain)
    broken.at[4] = U("y >= 0")
    with pytest.raises(ExtractionError, match="^validity"):
        extract_floyd(prog("c0"), broken, DEFAULT)


def test_cawhile_on_sec7():
    c4, c5, lam, rho, s7 = sec7()
    d = extract_cawhile(c4, c5, 4, lam, rho, s7)
    assert check_derivation(d).accepted
    assert audit(d, family_cawhile(c4, c5, 4, lam, rho, s7)) == []
    assert d.rules_used().count("caWhile") == 1


def test_cawhile_with_false_guards_degenerates_to_lockstep():
    c0 = prog("c0")
    lk = ann("c0_lockstep")
    an = Annotation({(n, m, "lck"): f for (n, m), f in lk.at.items()}, lk.pre, lk.post)
    d = extract_cawhile(c0, c0, 3, FALSE, FALSE, an)
    assert check_derivation(d).accepted
    assert audit(d, family_cawhile(c0, c0, 3, FALSE, FALSE, an)) == []
    node = next(n for _, n in d.nodes() if n.rule == "caWhile")
    _, lo, ro = node.premises
    assert normalize(lo.conclusion.pre) == FALSE
    assert normalize(ro.conclusion.pre) == FALSE
    [(inv, cover)] = node.side
    loop = sub(3, c0.body)
    both = bagree(loop.cond, loop.cond)
    dom = Domain(-3, 3)
    assert implies_bounded(cover, both, dom).holds and implies_bounded(both, cover, dom).holds


def test_audit_flags_foreign_judgments():
    p, an = prog("c0"), ann("c0_floyd", "unary")
    d = extract_floyd(p, an, DEFAULT)
    other = ann("incr_floyd", "unary")
    fam = family_floyd(prog("incr"), other, DEFAULT)
    assert audit(d, fam)
