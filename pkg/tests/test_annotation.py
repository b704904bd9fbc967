import pytest

from alignverify.annotation import (Annotation, AnnotationError, associated_judgments,
                                    check_vc, check_vcs, extend_full, format_annotation,
                                    gen_vcs, parse_annotation, row_tag)
from alignverify.assertion import (FALSE, Domain, Ext, Neg, conj, implies_bounded, normalize,
                                   parse_formula, subst_u)
from alignverify.assertion import test as truth_of
from alignverify.automaton import aut_of, seg_rel
from alignverify.lang import parse, parse_expr, sub
from alignverify.logic import Judgment
from alignverify.product import ProductSpec, build_product
from alignverify.semantics import Store

from corpus import ann, prog, sec7

U = parse_formula
C0 = prog("c0")
A0 = aut_of(C0)


def floyd_c0():
    return Annotation({1: U("x >= 0"), 2: U("y = x && x >= 0"), 3: U("y >= 0"),
                       4: U("y > 0"), 5: U("y > 0")}, U("x >= 0"), U("y = 0")).with_ends(A0)


def test_row_tags():
    assert row_tag("while-exit") == "WhileFalse"
    assert row_tag("assign") == "Assign"
    assert row_tag("left:then") == "IfTrueLeft"
    assert row_tag("joint:assign|assign") == "AssignBoth"
    assert row_tag("joint:assign|skip") == "Assign|Skip"


def test_full_annotation_vcs_follow_edges():
    vcs = gen_vcs(A0, floyd_c0())
    assert [vc.segment for vc in vcs] == [(1, 2), (2, 3), (3, 4), (3, 6), (4, 5), (5, 3)]
    text = [str(vc) for vc in vcs]
    assert text[0] == "[1 -> 2] Assign: an(1) -> an(2)[y := x]"
    assert text[3] == "[3 -> 6] WhileFalse: an(3) && !truth(y != 0) -> an(6)"
    assert check_vcs(A0, floyd_c0()).verdict.holds


def test_listed_annotation_vcs_follow_segments():
    an = Annotation({3: U("y >= 0")}, U("x >= 0"), U("y = 0"), full=False).with_ends(A0)
    vcs = gen_vcs(A0, an)
    assert sorted(vc.segment for vc in vcs) == [(1, 2, 3), (3, 4, 5, 3), (3, 6)]
    assert check_vcs(A0, an).verdict.holds


def test_unlisted_point_of_full_annotation_is_false():
    an = Annotation({1: U("true")}, U("true"), U("true"))
    assert an(4) == FALSE
    listed = Annotation({1: U("true")}, U("true"), U("true"), full=False)
    with pytest.raises(KeyError):
        listed(4)


def test_false_at_fin_fails_with_witness():
    an = Annotation({3: U("true")}, U("true"), FALSE, full=False).with_ends(A0)
    rep = check_vcs(A0, an, dom=Domain(-3, 3))
    assert rep.verdict.fails
    [bad] = rep.failures()
    assert bad.vc.segment == (3, 6)
    assert bad.verdict.witness is not None


def test_wellformedness():
    an = Annotation({1: U("x > 5")}, U("x >= 0"), U("y = 0"))
    with pytest.raises(AnnotationError):
        an.with_ends(A0)
    with pytest.raises(AnnotationError):
        check_vcs(A0, Annotation({99: U("true")}, U("true"), U("true")).with_ends(A0))


def test_step_method_agrees_with_symbolic_rendering():
    for an in (floyd_c0(), Annotation({3: U("y >= 0 && z > 0")}, U("x >= 0"), U("z > 0"),
                                      full=False).with_ends(A0)):
        for vc in gen_vcs(A0, an):
            a = check_vc(A0, vc, Domain(-3, 3), "symbolic").status
            b = check_vc(A0, vc, Domain(-3, 3), "step").status
            assert a == b, str(vc)
    c4, c5, lam, rho, s7 = sec7()
    p = build_product(aut_of(c4), aut_of(c5), ProductSpec("caloop", beg=4, lam=lam, rho=rho))
    for vc in gen_vcs(p, s7)[:8]:
        assert check_vc(p, vc, Domain(-2, 2), "symbolic").status == \
            check_vc(p, vc, Domain(-2, 2), "step").status


def test_broken_vc_found_by_both_methods():
    an = Annotation({3: U("y > 0")}, U("x >= 0"), U("y = 0"), full=False).with_ends(A0)
    bad = [vc for vc in gen_vcs(A0, an) if vc.segment == (1, 2, 3)][0]
    assert check_vc(A0, bad, Domain(-3, 3)).fails
    assert check_vc(A0, bad, Domain(-3, 3), "step").fails


def test_extend_full_keeps_full_annotations():
    an = floyd_c0()
    assert extend_full(A0, an, Domain(-3, 3)) is an


def test_extend_full_from_cutset():
    dom = Domain(0, 4)
    part = Annotation({3: U("y >= 0")}, U("x >= 0"), U("y = 0"), full=False).with_ends(A0)
    ex = extend_full(A0, part, dom)
    assert ex.full
    assert normalize(ex(3)) == normalize(part(3))
    for n in (2, 4, 5):
        assert isinstance(ex(n), Ext)
    assert check_vcs(A0, ex, dom=dom).verdict.holds
    # the states at 2 are the images of the precondition under y := x
    rows = {dict(zip(ex(2).keys, r))[("", "y")] for r in ex(2).rows}
    assert rows == set(range(0, 5))


def test_extend_full_gives_false_to_unreachable_points():
    p = parse("fin 0\n1: if 0 = 1 then 2: x := 1 else 3: skip fi")
    a = aut_of(p)
    part = Annotation({}, U("true"), U("true"), full=False).with_ends(a)
    ex = extend_full(a, part, Domain(-2, 2))
    assert ex(2) == FALSE
    assert ex(3) != FALSE


def test_extend_full_rejects_invalid_cutset_annotation():
    part = Annotation({3: U("y > 0")}, U("x >= 0"), U("y = 0"), full=False).with_ends(A0)
    with pytest.raises(AnnotationError):
        extend_full(A0, part, Domain(0, 3))


def test_enum_valid_implies_reach_valid():
    # symbolic annotations valid over the domain are also met by every bounded run
    cases = [(A0, floyd_c0(), Domain(0, 4), None)]
    c4, c5, lam, rho, s7 = sec7()
    p = build_product(aut_of(c4), aut_of(c5), ProductSpec("caloop", beg=4, lam=lam, rho=rho))
    cases.append((p, s7, Domain(4, 7), [("L", "x"), ("R", "x")]))
    lk = ann("c0_lockstep")
    cases.append((build_product(A0, A0, ProductSpec("lckctl")), lk, Domain(0, 4),
                  [("L", "x"), ("R", "x")]))
    for a, an, dom, inputs in cases:
        if check_vcs(a, an, "enum", dom).verdict.holds:
            assert check_vcs(a, an, "reach", dom, inputs=inputs).verdict.holds


def test_reach_check_is_labelled_necessary_only():
    v = check_vcs(A0, floyd_c0(), "reach", Domain(0, 3)).verdict
    assert v.bounds["check"] == "necessary condition only"


def test_associated_judgments_of_factorial():
    an = Annotation({n: U(f"p{n} = 0") for n in range(1, 6)} | {6: U("p6 = 0")},
                    U("p1 = 0"), U("p6 = 0"))
    js = associated_judgments(C0, an)
    keys = {j.key() for j in js}
    z1 = sub(2, C0.body)
    assert Judgment(z1, an(2), an(3)).key() in keys
    loop = sub(3, C0.body)
    cond = truth_of(loop.cond)
    assert Judgment(loop, an(3), conj(an(3), Neg(cond))).key() in keys
    zz = sub(4, C0.body)
    assert Judgment(zz, subst_u(an(5), "z", parse_expr("z * y")), an(5)).key() in keys
    body = loop.body
    assert Judgment(body, conj(an(3), cond), an(3)).key() in keys


def test_annotation_file_round_trip():
    an = ann("sec7")
    assert an.full
    back = parse_annotation(format_annotation(an))
    assert set(back.at) == set(an.at)
    for n in an.at:
        assert normalize(back(n)) == normalize(an(n))


def test_annotation_file_errors():
    with pytest.raises(Exception):
        parse_annotation("pre: x = 0\n3 x > 0\n")
    listed = parse_annotation("cutset: listed\npre: x >= 0\npost: y = 0\n3 : y >= 0\n")
    assert not listed.full
    assert implies_bounded(listed(3), U("y >= 0")).holds


def test_segment_relation_matches_rendered_vc_on_a_store():
    s = Store(x=3, y=2, z=1)
    [t] = seg_rel(A0, [3, 4, 5, 3], s)
    assert t["z"] == 2 and t["y"] == 1
