import pytest

from alignverify.assertion import Domain, parse_formula
from alignverify.automaton import (CutsetError, aut_of, cfg_of, check_cutset, explore,
                                   satisfies_bounded, seg_paths, seg_rel, segments, to_dot,
                                   trace_to, traces_correspond)
from alignverify.lang import parse
from alignverify.semantics import Store, run

from corpus import PROGRAMS, prog

U = parse_formula


def test_edge_kinds_of_factorial():
    a = aut_of(prog("c0"))
    kinds = {(e.src, e.dst): e.kind for e in a.all_edges()}
    assert kinds[(1, 2)] == "assign"
    assert kinds[(3, 4)] == "while-enter"
    assert kinds[(3, 6)] == "while-exit"
    assert kinds[(5, 3)] == "assign"
    assert a.init == 1 and a.fin == 6


def test_choice_and_if_edges():
    a = aut_of(parse("if x > 0 then y := 1 else choice y := 2 or y := 3 end fi"))
    kinds = sorted(e.kind for e in a.all_edges())
    assert kinds.count("then") == 1 and kinds.count("else") == 1
    assert "choice-left" in kinds and "choice-right" in kinds


def test_fin_has_no_successor():
    a = aut_of(prog("c0"))
    assert a.succ(a.fin, Store(x=1, y=0, z=1)) == []


def test_automaton_runs_agree_with_semantics():
    a = aut_of(prog("c0"))
    for n in range(5):
        s = Store(x=n, y=0, z=0)
        parent, exhausted = explore(a, s, 1000)
        finals = {q[1] for q in parent if q[0] == a.fin}
        assert not exhausted
        assert finals == set(run(prog("c0"), s, 1000).finals)


def test_cutset_checks():
    a = aut_of(prog("c0"))
    g = cfg_of(a)
    check_cutset(g, {1, 3, 6}, 6)
    with pytest.raises(CutsetError) as e:
        check_cutset(g, {1, 6}, 6)
    assert e.value.cycle[0] == e.value.cycle[-1]
    with pytest.raises(CutsetError):
        segments(a, {1, 6})


def test_segment_relation():
    a = aut_of(prog("c0"))
    assert seg_rel(a, [3, 4, 5, 3], Store(x=0, y=2, z=1)) == [Store(x=0, y=1, z=2)]
    assert seg_rel(a, [3, 6], Store(x=0, y=2, z=1)) == []
    [(guard, update, edges)] = seg_paths(a, [3, 4, 5, 3])
    assert len(edges) == 3
    assert dict(update)


def test_bounded_hoare_checks():
    a = aut_of(prog("c0"))
    bad = satisfies_bounded(a, U("x = 3"), U("z = 5"))
    assert bad.fails
    assert bad.witness[-1][0] == a.fin
    assert satisfies_bounded(a, U("x = 4"), U("z = 24"), Domain(4, 4)).holds
    # non-terminating starts make the check inconclusive when nothing fails
    v = satisfies_bounded(a, U("x = -1"), U("true"), Domain(-1, 1), max_steps=100)
    assert v.status == "inconclusive"


def test_trace_reconstruction():
    a = aut_of(prog("incr"))
    s = Store(x=1)
    parent, _ = explore(a, s, 100)
    end = next(q for q in parent if q[0] == a.fin)
    tr = trace_to(parent, end)
    assert tr[0] == (a.init, s) and tr[-1] == end


def test_dot_output():
    txt = to_dot(cfg_of(aut_of(prog("c0"))))
    assert txt.startswith("digraph")
    assert "5 -> 3;" in txt


def test_traces_correspond_small():
    for name in PROGRAMS:
        ok, why = traces_correspond(prog(name), Store(), 300)
        assert ok, (name, why)
