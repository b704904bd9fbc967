import pytest

from alignverify.assertion import Domain, Neg, conj, implies_bounded, normalize
from alignverify.automaton import aut_of, cfg_of, explore, trace_to
from alignverify.lang import parse
from alignverify.product import (LCK, LO, RO, ProductError, ProductSpec, build_product,
                                 check_adequacy, cover, hole, parse_kind, project_left,
                                 project_right, rel_satisfies_bounded, terminated_traces)
from alignverify.semantics import Store

from corpus import R, prog, sec7

C0 = aut_of(prog("c0"))


def reachable_edges(p):
    g = cfg_of(p)
    return set(g.restrict(g.reachable()).edges)


def test_sequential_product_runs_left_then_right():
    p = build_product(C0, C0, ProductSpec("seq"))
    edges = reachable_edges(p)
    left = {((n, 1), (m, 1)) for n, m in cfg_of(C0).edges}
    right = {((6, n), (6, m)) for n, m in cfg_of(C0).edges}
    assert edges == left | right
    kinds = {e.kind for e in p.all_edges() if e.src == (6, 3)}
    assert kinds == {"right:while-enter", "right:while-exit"}


def test_conditionally_aligned_loop_edges():
    lam, rho = R("left(y mod 2 = 0)"), R("right(y mod 3 = 0)")
    p = build_product(C0, C0, ProductSpec("caloop", beg=3, lam=lam, rho=rho))
    edges = reachable_edges(p)
    assert ((3, 3, LCK), (4, 3, LO)) in edges
    assert ((3, 3, LCK), (3, 4, RO)) in edges
    assert ((3, 3, LCK), (4, 4, LCK)) in edges
    assert ((3, 3, LCK), (6, 6, LCK)) in edges
    assert ((5, 3, LO), (3, 3, LCK)) in edges
    assert ((3, 5, RO), (3, 3, LCK)) in edges
    assert len(edges) == 12
    guards = {e.dst: e.guard for e in p.edges((3, 3, LCK))}
    # the left-only entry is guarded by the left condition and the left loop test
    g = guards[(4, 3, LO)]
    assert implies_bounded(g, conj(lam, R("left(y != 0)")), Domain(-4, 4)).holds
    assert implies_bounded(conj(lam, R("left(y != 0)")), g, Domain(-4, 4)).holds
    # the joint entry needs both conditions to be off
    g = guards[(4, 4, LCK)]
    assert implies_bounded(g, conj(Neg(lam), Neg(rho)), Domain(-4, 4)).holds


def test_caloop_needs_a_loop_and_same_control():
    with pytest.raises(ProductError, match="not a loop"):
        build_product(C0, C0, ProductSpec("caloop", beg=2))
    with pytest.raises(ProductError, match="sameCtl"):
        build_product(aut_of(prog("sec6_left")), aut_of(prog("sec6_right")),
                      ProductSpec("caloop", beg=1))


def test_only_lockstep_deadlocks_on_uneven_loops():
    p = build_product(C0, C0, ProductSpec("olck"))
    s = (Store(x=2, y=0, z=0), Store(x=3, y=0, z=0))
    parent, _ = explore(p, s, 100)
    assert not any(q[0] == p.fin for q in parent)
    stuck = [q for q in parent if q[0] != p.fin and not p.succ(*q)]
    assert stuck


def test_cnd_with_diagonal_joint_set_is_lockstep_control():
    diag = frozenset((n, n) for n in C0.ctrl)
    a = build_product(C0, C0, ProductSpec("cnd", J=diag))
    b = build_product(C0, C0, ProductSpec("lckctl"))
    assert cfg_of(a).edges == cfg_of(b).edges
    for q in a.ctrl:
        ea = [(e.dst, normalize(e.guard)) for e in a.edges(q)]
        eb = [(e.dst, normalize(e.guard)) for e in b.edges(q)]
        assert ea == eb


def test_lockstep_control_requires_equal_control_sets():
    with pytest.raises(ProductError):
        build_product(aut_of(prog("sec6_left")), aut_of(prog("sec6_right")),
                      ProductSpec("lckctl"))


def test_dovetail_alternates():
    a = aut_of(parse("1: x := x + 1; 2: x := x + 1"))
    p = build_product(a, a, ProductSpec("dov"))
    s = (Store(x=0), Store(x=0))
    parent, _ = explore(p, s, 50)
    end = next(q for q in parent if q[0] == p.fin)
    sides = []
    tr = trace_to(parent, end)
    for q, r in zip(tr, tr[1:]):
        sides.append("L" if q[0][0] != r[0][0] else "R")
    assert sides == ["L", "R", "L", "R"]


def test_projections_recover_component_traces():
    a = aut_of(prog("c0"))
    p = build_product(a, a, ProductSpec("seq"))
    s, t = Store(x=2, y=0, z=0), Store(x=1, y=0, z=0)
    [tau], _ = terminated_traces(a, s, 100)
    [tau2], _ = terminated_traces(a, t, 100)
    path = cover(p, tau, tau2)
    assert path is not None
    assert project_left(path) == tau
    assert project_right(path) == tau2


def test_adequacy():
    pre = R("x = x'")
    assert check_adequacy(build_product(C0, C0, ProductSpec("seq")), pre, Domain(0, 3)).holds
    assert check_adequacy(build_product(C0, C0, ProductSpec("elck")), R("true"), Domain(0, 3)).holds
    v = check_adequacy(build_product(C0, C0, ProductSpec("olck")), R("x = 2 && x' = 3"), Domain(0, 4))
    assert v.fails
    tau, tau2 = v.witness
    assert len(tau) != len(tau2)


def test_same_except_product():
    l, r = prog("sec6_left"), prog("sec6_right")
    a, b = aut_of(l), aut_of(r)
    spec = parse_kind("sameexcept:2,0", a, b)
    assert spec.b == hole(l.body, 2, 0, l.fin)
    p = build_product(a, b, spec)
    edges = reachable_edges(p)
    assert ((1, 1, LCK), (2, 2, LO)) in edges
    assert ((1, 1, LCK), (4, 4, LCK)) in edges
    assert ((0, 2, RO), (0, 0, LCK)) in edges
    assert check_adequacy(p, R("x = x' && y = y'"), Domain(-2, 2)).holds


def test_parse_kind_errors():
    with pytest.raises(ValueError):
        parse_kind("seq:3", C0, C0)
    with pytest.raises(ValueError):
        ProductSpec("nope")


def test_relational_check_on_sec7_pair():
    c4, c5, lam, rho, an = sec7()
    v = rel_satisfies_bounded(aut_of(c4), aut_of(c5), an.pre, an.post, Domain(4, 6),
                              inputs=[("L", "x"), ("R", "x")])
    assert v.holds
