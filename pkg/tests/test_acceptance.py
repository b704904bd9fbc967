"""One test per headline acceptance criterion."""
import itertools
import random
import time

import pytest

from alignverify.annotation import check_vcs
from alignverify.assertion import (LEFT, PLAIN, RIGHT, Cmp, Domain, Iff, Neg, conj, disj,
                                   encode_plus, holds_r, holds_u, normalize, subst,
                                   subst_r, valid_bounded)
from alignverify.automaton import aut_of, cfg_of, satisfies_bounded, segments, step_correspondence
from alignverify.extract import (ExtractionError, audit, extract_cawhile, extract_floyd,
                                 extract_lockstep, extract_lockstep_seq, extract_seqprod,
                                 family_floyd, family_lockstep, family_lockstep_seq,
                                 family_seqprod)
from alignverify.lang import (BinOp, IntLit, Var, command_vars, dot_expr, evaluate,
                              format_command, fsuc, label_list, map_vars, parse,
                              parse_command)
from alignverify.logic import check_derivation, sem_judg_bounded
from alignverify.product import (ProductSpec, build_product, check_adequacy, parse_kind,
                                 rel_satisfies_bounded)
from alignverify.semantics import Store

from corpus import (FLOYD, LOCKSTEP, LOCKSTEP_SEQ, PROGRAMS, SEQPROD, R, ann, holes,
                    oracle_domain, prog, sec7, sem_oracle)
from mutation import mutate

DEFAULT = Domain(-8, 8)
X_INPUTS = [(LEFT, "x"), (RIGHT, "x")]


def test_factorial_labels_cfg_and_segments():
    t = time.perf_counter()
    c0 = prog("c0")
    assert label_list(c0.body) == [1, 2, 3, 4, 5]
    assert format_command(c0.body).startswith("1: y := x; 2: z := 1; 3: while")
    g = cfg_of(aut_of(c0))
    assert set(g.edges) == {(1, 2), (2, 3), (3, 4), (3, 6), (4, 5), (5, 3)}
    assert set(segments(aut_of(c0), {1, 3, 6})) == {(1, 2, 3), (3, 4, 5, 3), (3, 6)}
    assert time.perf_counter() - t < 1.0


def test_fsuc_golden_values():
    c0 = prog("c0")
    assert fsuc(3, c0.body, 6) == 6
    assert fsuc(5, c0.body, 6) == 3
    c = parse_command("1: if x > 0 then 2: x := x - 1; 3: y := x else 4: skip fi")
    assert fsuc(2, c, 5) == 3
    assert fsuc(1, c, 5) == fsuc(3, c, 5) == fsuc(4, c, 5) == 5


def test_command_and_automaton_traces_correspond():
    t = time.perf_counter()
    for name in PROGRAMS:
        p = prog(name)
        vs = sorted(command_vars(p.body))
        starts = [Store(dict(zip(vs, v))) for v in itertools.product(range(-3, 4), repeat=len(vs))]
        ok, why = step_correspondence(p, starts, 2000)
        assert ok, f"{name}: {why}"
    assert time.perf_counter() - t < 60


def test_semantic_examples():
    agree = R("agree(x, x)")
    nd = aut_of(parse("choice x := x + 1 or x := x + 2 end"))
    v = rel_satisfies_bounded(nd, nd, agree, agree)
    assert v.fails and v.witness is not None
    (s, t), (u, w) = v.witness
    assert s["x"] == t["x"] and u["x"] != w["x"]

    ok = aut_of(parse("choice y := 0 or y := 1 end; x := x + 1"))
    assert rel_satisfies_bounded(ok, ok, agree, agree).holds

    mono = aut_of(prog("mono"))
    assert rel_satisfies_bounded(mono, mono, R("x <= x'"), R("y <= y'"), Domain(-4, 4)).holds


# (left, right, product kind, pre, post, domain, inputs)
PRODUCT_CASES = [
    ("c0", "c0", "seq", "x = x'", "z = z'", Domain(0, 4), X_INPUTS),
    ("c0", "c0", "elck", "x = x'", "z = z'", Domain(0, 4), X_INPUTS),
    ("c0", "c0", "lckctl", "x = x'", "z = z'", Domain(0, 4), X_INPUTS),
    ("mono", "mono", "seq", "x <= x'", "y <= y'", Domain(-4, 4), None),
    ("choice_bad", "choice_bad", "seq", "x = x'", "x = x'", Domain(-3, 3), None),
    ("choice_ok", "choice_ok", "seq", "x = x'", "x = x'", Domain(-3, 3), None),
    ("sec6_left", "sec6_right", "sameexcept:2,0", "x = x' && y = y'", "x = x'",
     Domain(-3, 3), None),
]


def test_product_verdict_matches_relational_verdict():
    agreeing = 0
    seen = set()
    for left, right, kind, pre, post, dom, inputs in PRODUCT_CASES:
        a, b = aut_of(prog(left)), aut_of(prog(right))
        p = build_product(a, b, parse_kind(kind, a, b))
        assert check_adequacy(p, R(pre), dom, inputs=inputs).holds, (left, right, kind)
        pv = satisfies_bounded(p, R(pre), R(post), dom, inputs=inputs)
        rv = rel_satisfies_bounded(a, b, R(pre), R(post), dom, inputs=inputs)
        assert pv.status == rv.status, (left, right, kind, pv, rv)
        agreeing += 1
        seen.add(rv.status)
    c4, c5, lam, rho, an = sec7()
    a, b = aut_of(c4), aut_of(c5)
    p = build_product(a, b, ProductSpec("caloop", beg=4, lam=lam, rho=rho))
    dom = Domain(4, 8)
    assert check_adequacy(p, an.pre, dom, inputs=X_INPUTS).holds
    pv = satisfies_bounded(p, an.pre, an.post, dom, inputs=X_INPUTS)
    rv = rel_satisfies_bounded(a, b, an.pre, an.post, dom, inputs=X_INPUTS)
    assert pv.status == rv.status
    agreeing += 1
    assert agreeing >= 5
    assert seen == {"holds", "fails"}


def test_conditionally_aligned_loop_end_to_end():
    t = time.perf_counter()
    c4, c5, lam, rho, an = sec7()
    p = build_product(aut_of(c4), aut_of(c5), ProductSpec("caloop", beg=4, lam=lam, rho=rho))
    assert check_vcs(p, an, "enum", DEFAULT).verdict.holds
    assert check_vcs(p, an, "reach", Domain(4, 8), inputs=X_INPUTS).verdict.holds
    d = extract_cawhile(c4, c5, 4, lam, rho, an)
    assert "caWhile" in d.rules_used()
    assert check_derivation(d).accepted
    j = d.conclusion
    assert normalize(j.pre) == normalize(R("agree(x, x) && left(x > 3)"))
    assert normalize(j.post) == normalize(R("z > z'"))
    assert sem_judg_bounded(j, Domain(4, 8), inputs=X_INPUTS).holds
    assert time.perf_counter() - t < 120


def _accept(d, fam, left, an):
    r = check_derivation(d)
    assert r.accepted, str(r)
    problems = audit(d, fam)
    assert not problems, problems
    v = sem_oracle(d.conclusion, oracle_domain(left, an))
    assert v.holds, str(v)


def test_extraction_suites():
    assert len(FLOYD) >= 3 and len(SEQPROD) >= 3 and len(LOCKSTEP) >= 3 and len(LOCKSTEP_SEQ) >= 3
    for _, left, a in FLOYD:
        p, an = prog(left), ann(a, "unary")
        dom = an.domain or DEFAULT
        _accept(extract_floyd(p, an, dom), family_floyd(p, an, dom), left, an)
    for _, left, right, a in SEQPROD:
        p, p2, an = prog(left), prog(right), ann(a)
        dom = an.domain or DEFAULT
        _accept(extract_seqprod(p, p2, an, dom), family_seqprod(p, p2, an, dom), left, an)
    for _, left, right, a in LOCKSTEP:
        p, p2, an = prog(left), prog(right), ann(a)
        dom = an.domain or DEFAULT
        _accept(extract_lockstep(p, p2, an, dom), family_lockstep(p, p2, an, dom), left, an)
    for _, left, right, beg, end, a in LOCKSTEP_SEQ:
        p, p2, b, b2 = holes(left, right, beg, end)
        an = ann(a)
        dom = an.domain or DEFAULT
        _accept(extract_lockstep_seq(p, p2, b, b2, beg, end, an, dom),
                family_lockstep_seq(p, p2, b, b2, beg, end, an, dom), left, an)
    # the factorial lockstep instance carries the agree(y,y) and agree(z,z) invariant
    inv = ann("c0_lockstep")
    assert normalize(inv((3, 3))) == normalize(R("agree(y, y) && agree(z, z)"))
    assert ("if-example", "sec6_left", "sec6_right", 2, 0, "sec6") in LOCKSTEP_SEQ


def _accepted_derivations():
    out = []
    for _, left, a in FLOYD:
        p, an = prog(left), ann(a, "unary")
        out.append(extract_floyd(p, an, an.domain or DEFAULT))
    for _, left, right, a in SEQPROD:
        an = ann(a)
        out.append(extract_seqprod(prog(left), prog(right), an, an.domain or DEFAULT))
    for _, left, right, a in LOCKSTEP:
        an = ann(a)
        out.append(extract_lockstep(prog(left), prog(right), an, an.domain or DEFAULT))
    for _, left, right, beg, end, a in LOCKSTEP_SEQ:
        p, p2, b, b2 = holes(left, right, beg, end)
        an = ann(a)
        out.append(extract_lockstep_seq(p, p2, b, b2, beg, end, an, an.domain or DEFAULT))
    c4, c5, lam, rho, an = sec7()
    out.append(extract_cawhile(c4, c5, 4, lam, rho, an))
    return out


def test_negative_controls():
    ds = _accepted_derivations()
    rng = random.Random(20240)
    for _ in range(100):
        d = rng.choice(ds)
        path, m = mutate(d, rng)
        r = check_derivation(m)
        assert not r.accepted or m.conclusion != d.conclusion, (path, m.rule)

    c4, c5 = prog("c4"), prog("c5")
    with pytest.raises(ExtractionError, match="branch point 5"):
        extract_lockstep(c4, c5, ann("c4c5_lockstep"))

    c0 = aut_of(prog("c0"))
    v = check_adequacy(build_product(c0, c0, ProductSpec("olck")), R("x = 2 && x' = 3"),
                       Domain(0, 4))
    assert v.fails
    tau, tau2 = v.witness
    assert tau[-1][0] == c0.fin and tau2[-1][0] == c0.fin


# expression and formula generators for the substitution property
_VARS = ("x", "y")


def _expr(rng, depth=2):
    if depth == 0 or rng.random() < 0.35:
        return IntLit(rng.randint(-2, 2)) if rng.random() < 0.3 else Var(rng.choice(_VARS))
    op = rng.choice("+-*")
    return BinOp(op, _expr(rng, depth - 1), _expr(rng, depth - 1))


def _side(e, side):
    return map_vars(e, lambda v: Var(v.name, side))


def _rel(rng, depth=2):
    if depth == 0 or rng.random() < 0.3:
        op = rng.choice(("=", "!=", "<", "<=", ">", ">="))
        return Cmp(op, _side(_expr(rng, 1), rng.choice((LEFT, RIGHT))),
                   _side(_expr(rng, 1), rng.choice((LEFT, RIGHT))))
    k = rng.random()
    if k < 0.2:
        return Neg(_rel(rng, depth - 1))
    if k < 0.6:
        return conj(_rel(rng, depth - 1), _rel(rng, depth - 1))
    return disj(_rel(rng, depth - 1), _rel(rng, depth - 1))


def test_substitution_commutes_with_sum_encoding():
    rng = random.Random(2)
    dom = Domain(-3, 3)
    for _ in range(200):
        r = _rel(rng)
        x, x2 = rng.choice(_VARS), rng.choice(_VARS)
        e, e2 = _expr(rng), _expr(rng)
        lhs = encode_plus(subst_r(r, x, e, x2, e2))
        rhs = subst(encode_plus(r), {(PLAIN, x): e, (PLAIN, x2 + "'"): dot_expr(e2)})
        assert valid_bounded(Iff(lhs, rhs), dom).holds, (r, x, e, x2, e2)
    # spot check against the store-update reading of substitution
    for _ in range(20):
        r = _rel(rng)
        e, e2 = _expr(rng), _expr(rng)
        lhs = encode_plus(subst_r(r, "x", e, "y", e2))
        for vals in itertools.product(range(-3, 4), repeat=4):
            s = Store(x=vals[0], y=vals[1])
            t = Store(x=vals[2], y=vals[3])
            s2 = Store(dict(s, x=evaluate(e, s)))
            t2 = Store(dict(t, y=evaluate(e2, t)))
            merged = {"x": s["x"], "y": s["y"], "x'": t["x"], "y'": t["y"]}
            assert holds_u(lhs, merged) == holds_r(r, s2, t2)
