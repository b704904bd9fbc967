import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from alignverify.lang import (Assign, Choice, If, LabelError, ParseError, Seq, Skip, While,
                              cfg_successors, choice_free, command_vars, dot, elab,
                              erase_labels, format_command, format_program, fsuc, kind, lab,
                              label_list, labs, parse, parse_command, parse_expr, replace,
                              same_ctl, same_except_violation, sub)
from alignverify.product import hole

from corpus import PROGRAMS, prog


def test_auto_labels_are_preorder():
    p = parse("fin 9\nif x > 0 then y := 1 else while y < 3 do y := y + 1 od fi")
    assert label_list(p.body) == [1, 2, 3, 4]
    assert p.fin == 9


def test_explicit_labels_kept():
    c = parse_command("7: x := 1; 3: skip")
    assert label_list(c) == [7, 3]
    assert lab(c) == 7


def test_duplicate_label_rejected():
    with pytest.raises(ParseError, match="duplicate label"):
        parse("1: skip; 1: skip")
    # derivation files may repeat labels
    c = parse_command("1: skip; 1: skip", unique=False)
    assert isinstance(c, Seq)


def test_parse_errors_carry_position():
    with pytest.raises(ParseError) as e:
        parse("x := ")
    assert e.value.line == 1


def test_sub_and_labs():
    c0 = prog("c0").body
    assert isinstance(sub(3, c0), While)
    assert labs(sub(3, c0)) == {3, 4, 5}
    with pytest.raises(LabelError):
        sub(42, c0)


def test_fsuc_factorial():
    c0 = prog("c0").body
    assert [fsuc(n, c0, 6) for n in (1, 2, 3, 4, 5)] == [2, 3, 6, 5, 3]


def test_fsuc_if_example():
    c = parse_command("1: if x > 0 then 2: x := x - 1; 3: y := x else 4: skip fi")
    assert fsuc(2, c, 5) == 3
    assert fsuc(1, c, 5) == fsuc(3, c, 5) == fsuc(4, c, 5) == 5


def test_elab_and_successors():
    c0 = prog("c0").body
    assert elab(sub(3, c0), c0, 6) == 6
    assert elab(sub(4, c0), c0, 6) == 5
    assert cfg_successors(3, c0, 6) == (4, 6)
    assert cfg_successors(5, c0, 6) == (3,)
    assert kind(sub(3, c0)) == "While"


def test_command_vars_and_dot():
    c0 = prog("c0").body
    assert command_vars(c0) == {"x", "y", "z"}
    d = dot(c0)
    assert command_vars(d) == {"x'", "y'", "z'"}
    assert label_list(d) == label_list(c0)


def test_erase_labels_equates_relabelled_copies():
    a, b = prog("c0").body, prog("c0_relabelled").body
    assert a != b
    assert erase_labels(a) == erase_labels(b)


def test_choice_free():
    assert choice_free(prog("c0").body)
    assert not choice_free(prog("choice_ok").body)


def test_same_ctl():
    c0 = prog("c0").body
    assert same_ctl(c0, c0)
    other = parse_command("1: y := x + 1; 2: z := 2; 3: while y > 0 do 4: z := z + y; 5: y := y - 1 od")
    assert same_ctl(c0, other)
    # different branching structure
    assert not same_ctl(prog("sec6_left").body, prog("sec6_right").body)
    assert not same_ctl(c0, parse_command("1: y := x; 2: z := 1; 3: skip"))


def test_same_except_accepts_if_example():
    l, r = prog("sec6_left"), prog("sec6_right")
    b, b2 = hole(l.body, 2, 0, l.fin), hole(r.body, 2, 0, r.fin)
    assert same_except_violation(l.body, r.body, b, b2, 2, 0, 0) is None
    filled = replace(l.body, b, Skip(2))
    assert label_list(filled) == [1, 2, 4]


def test_same_except_clauses():
    l, r = prog("sec6_left"), prog("sec6_right")
    b, b2 = hole(l.body, 2, 0, l.fin), hole(r.body, 2, 0, r.fin)
    assert "entry" in same_except_violation(l.body, r.body, b, b2, 3, 0, 0)
    assert "exit" in same_except_violation(l.body, r.body, b, b2, 2, 5, 0)
    c0 = prog("c0").body
    assert "context" in same_except_violation(c0, r.body, b, b2, 2, 0, 0)
    # holes whose contexts differ in control
    x, y = parse_command("1: x := 1; 2: skip"), parse_command("1: x := 1; 2: skip; 3: skip")
    v = same_except_violation(x, y, sub(1, x), sub(1, y), 1, 2, 0)
    assert v is not None


def test_program_round_trip_on_corpus():
    for name in PROGRAMS:
        p = prog(name)
        assert parse(format_program(p)) == p


def test_expr_precedence():
    e = parse_expr("1 + 2 * x - 3")
    assert format_command(Assign(1, "y", e)) == "1: y := 1 + 2 * x - 3"


# random well-formed commands
_exprs = st.recursive(
    st.one_of(st.integers(0, 9).map(str), st.sampled_from(["x", "y", "z"])),
    lambda inner: st.tuples(inner, st.sampled_from(["+", "-", "*"]), inner).map(
        lambda t: f"({t[0]} {t[1]} {t[2]})"),
    max_leaves=4)
_conds = st.tuples(_exprs, st.sampled_from(["<", "<=", "=", "!=", ">"]), _exprs).map(
    lambda t: f"{t[0]} {t[1]} {t[2]}")


def _cmds():
    base = st.one_of(st.just("skip"),
                     st.tuples(st.sampled_from(["x", "y", "z"]), _exprs).map(lambda t: f"{t[0]} := {t[1]}"))
    return st.recursive(base, lambda inner: st.one_of(
        st.tuples(inner, inner).map(lambda t: f"{t[0]}; {t[1]}"),
        st.tuples(_conds, inner, inner).map(lambda t: f"if {t[0]} then {t[1]} else {t[2]} fi"),
        st.tuples(_conds, inner).map(lambda t: f"while {t[0]} do {t[1]} od"),
        st.tuples(inner, inner).map(lambda t: f"choice {t[0]} or {t[1]} end"),
    ), max_leaves=6)


@settings(max_examples=150, deadline=None)
@given(_cmds())
def test_parse_format_round_trip(src):
    p = parse(src)
    q = parse(format_program(p))
    assert q == p
    assert sorted(label_list(p.body)) == list(range(1, len(label_list(p.body)) + 1))
    for n in label_list(p.body):
        assert fsuc(n, p.body, p.fin) in set(label_list(p.body)) | {p.fin}
    assert isinstance(p.body, (Skip, Assign, Seq, If, While, Choice))
