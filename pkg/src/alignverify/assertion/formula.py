"""Assertion formulas over one store (unary) or a pair of stores (relational).

Variables inside formulas are :class:`~alignverify.lang.Var` nodes whose
``side`` is ``""`` (unary), ``"L"`` (left store) or ``"R"`` (right store).
A formula never mixes plain and sided variables.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Mapping, Union

import numpy as np

from ..lang import BinOp, Expr, IntLit, Not, Var, _apply, evaluate, expr_vars, map_vars

Key = tuple[str, str]  # (side, name)

LEFT, RIGHT, PLAIN = "L", "R", ""


def key_of(v: Var) -> Key:
    return (v.side, v.name)


@dataclass(frozen=True)
class Const:
    value: bool


@dataclass(frozen=True)
class Cmp:
    op: str
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Truth:
    """The expression is nonzero."""

    expr: Expr


@dataclass(frozen=True)
class Neg:
    arg: "Formula"


@dataclass(frozen=True)
class And:
    args: tuple["Formula", ...]


@dataclass(frozen=True)
class Or:
    args: tuple["Formula", ...]


@dataclass(frozen=True)
class Implies:
    ante: "Formula"
    cons: "Formula"


@dataclass(frozen=True)
class Iff:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Ext:
    """An explicit finite set of (pairs of) stores, given as value rows over ``keys``.

    Variables not in ``keys`` are unconstrained.
    """

    keys: tuple[Key, ...]
    rows: frozenset[tuple[int, ...]]


@dataclass(frozen=True)
class Subst:
    """Semantic substitution: ``body`` read in the store updated by ``mapping``.

    Only built around bodies that cannot absorb a substitution syntactically.
    """

    body: "Formula"
    mapping: tuple[tuple[Key, Expr], ...]


Formula = Union[Const, Cmp, Truth, Neg, And, Or, Implies, Iff, Ext, Subst]

TRUE = Const(True)
FALSE = Const(False)

CMP_OPS = ("=", "!=", "<", "<=", ">", ">=")


class ArityError(ValueError):
    """A unary formula was used where a relational one is required, or vice versa."""


# ---------------------------------------------------------------------------
# Construction helpers


def tag(e: Expr, side: str) -> Expr:
    return map_vars(e, lambda v: Var(v.name, side))


def conj(*fs: Formula) -> Formula:
    fs = tuple(f for f in fs if f != TRUE)
    if not fs:
        return TRUE
    return fs[0] if len(fs) == 1 else And(fs)


def disj(*fs: Formula) -> Formula:
    fs = tuple(f for f in fs if f != FALSE)
    if not fs:
        return FALSE
    return fs[0] if len(fs) == 1 else Or(fs)


def test(e: Expr) -> Formula:
    """Unary truth of a program expression."""
    return Truth(e)


def left(e: Expr) -> Formula:
    return Truth(tag(e, LEFT))


def right(e: Expr) -> Formula:
    return Truth(tag(e, RIGHT))


def agree(e: Expr, e2: Expr) -> Formula:
    """Value agreement: ``e`` on the left store equals ``e2`` on the right store."""
    return Cmp("=", tag(e, LEFT), tag(e2, RIGHT))


def bagree(e: Expr, e2: Expr) -> Formula:
    """Truth-value agreement of ``e`` (left) and ``e2`` (right)."""
    return Iff(left(e), right(e2))


# ---------------------------------------------------------------------------
# Variables and arity


@lru_cache(maxsize=65536)
def free_keys(f: Formula) -> frozenset[Key]:
    if isinstance(f, Const):
        return frozenset()
    if isinstance(f, Cmp):
        return frozenset(key_of(v) for v in expr_vars(f.left) | expr_vars(f.right))
    if isinstance(f, Truth):
        return frozenset(key_of(v) for v in expr_vars(f.expr))
    if isinstance(f, Neg):
        return free_keys(f.arg)
    if isinstance(f, (And, Or)):
        return frozenset().union(*(free_keys(a) for a in f.args))
    if isinstance(f, Implies):
        return free_keys(f.ante) | free_keys(f.cons)
    if isinstance(f, Iff):
        return free_keys(f.left) | free_keys(f.right)
    if isinstance(f, Ext):
        return frozenset(f.keys)
    if isinstance(f, Subst):
        assigned = {k for k, _ in f.mapping}
        out = set(free_keys(f.body) - assigned)
        for _, e in f.mapping:
            out.update(key_of(v) for v in expr_vars(e))
        return frozenset(out)
    raise TypeError(f"not a formula: {f!r}")


def arity(f: Formula) -> str | None:
    """``"unary"``, ``"relational"``, or None for a closed formula."""
    sides = {k[0] for k in free_keys(f)}
    if not sides:
        return None
    if sides == {PLAIN}:
        return "unary"
    if PLAIN not in sides:
        return "relational"
    raise ArityError("formula mixes plain and left/right variables")


def check_arity(f: Formula, expected: str) -> None:
    a = arity(f)
    if a is not None and a != expected:
        raise ArityError(f"expected a {expected} formula, got a {a} one")


# ---------------------------------------------------------------------------
# Substitution and encoding


def _subst_expr(e: Expr, mapping: Mapping[Key, Expr]) -> Expr:
    return map_vars(e, lambda v: mapping.get(key_of(v), v))


def subst(f: Formula, mapping: Mapping[Key, Expr]) -> Formula:
    """Simultaneous substitution of expressions for variables (by key)."""
    if not mapping:
        return f
    if isinstance(f, Const):
        return f
    if isinstance(f, Cmp):
        return Cmp(f.op, _subst_expr(f.left, mapping), _subst_expr(f.right, mapping))
    if isinstance(f, Truth):
        return Truth(_subst_expr(f.expr, mapping))
    if isinstance(f, Neg):
        return Neg(subst(f.arg, mapping))
    if isinstance(f, And):
        return And(tuple(subst(a, mapping) for a in f.args))
    if isinstance(f, Or):
        return Or(tuple(subst(a, mapping) for a in f.args))
    if isinstance(f, Implies):
        return Implies(subst(f.ante, mapping), subst(f.cons, mapping))
    if isinstance(f, Iff):
        return Iff(subst(f.left, mapping), subst(f.right, mapping))
    if isinstance(f, Ext):
        m = tuple((k, mapping[k]) for k in f.keys if k in mapping)
        return Subst(f, m) if m else f
    if isinstance(f, Subst):
        inner = dict(f.mapping)
        body_keys = free_keys(f.body)
        merged = {k: _subst_expr(e, mapping) for k, e in inner.items()}
        for k, e in mapping.items():
            if k not in inner and k in body_keys:
                merged[k] = e
        return Subst(f.body, tuple(sorted(merged.items(), key=lambda kv: kv[0])))
    raise TypeError(f"not a formula: {f!r}")


def subst_u(p: Formula, x: str, e: Expr) -> Formula:
    """``P[x := e]`` for a unary formula."""
    return subst(p, {(PLAIN, x): e})


def subst_r(r: Formula, x: str | None = None, e: Expr | None = None,
            x2: str | None = None, e2: Expr | None = None) -> Formula:
    """``R[x|x2 := e|e2]``; either side may be omitted (one-sided substitution)."""
    mapping: dict[Key, Expr] = {}
    if x is not None:
        mapping[(LEFT, x)] = tag(e, LEFT)
    if x2 is not None:
        mapping[(RIGHT, x2)] = tag(e2, RIGHT)
    return subst(r, mapping)


def _plus_key(k: Key) -> Key:
    side, name = k
    if side == LEFT:
        return (PLAIN, name)
    if side == RIGHT:
        return (PLAIN, name + "'")
    raise ArityError("the sum encoding applies to relational formulas only")


def _plus_expr(e: Expr) -> Expr:
    return map_vars(e, lambda v: Var(_plus_key(key_of(v))[1]))


def encode_plus(r: Formula) -> Formula:
    """Encode a store relation as a predicate on the merged store ``s + t``.

    Left variables keep their names; right variables become their primed copies.
    """
    if isinstance(r, Const):
        return r
    if isinstance(r, Cmp):
        return Cmp(r.op, _plus_expr(r.left), _plus_expr(r.right))
    if isinstance(r, Truth):
        return Truth(_plus_expr(r.expr))
    if isinstance(r, Neg):
        return Neg(encode_plus(r.arg))
    if isinstance(r, And):
        return And(tuple(encode_plus(a) for a in r.args))
    if isinstance(r, Or):
        return Or(tuple(encode_plus(a) for a in r.args))
    if isinstance(r, Implies):
        return Implies(encode_plus(r.ante), encode_plus(r.cons))
    if isinstance(r, Iff):
        return Iff(encode_plus(r.left), encode_plus(r.right))
    if isinstance(r, Ext):
        return Ext(tuple(_plus_key(k) for k in r.keys), r.rows)
    if isinstance(r, Subst):
        return Subst(encode_plus(r.body),
                     tuple((_plus_key(k), _plus_expr(e)) for k, e in r.mapping))
    raise TypeError(f"not a formula: {r!r}")


# ---------------------------------------------------------------------------
# Normalization

_SWAP = {">": "<", ">=": "<="}
_NEGATE = {"=": "!=", "!=": "=", "<": ">=", "<=": ">", ">": "<=", ">=": "<"}
_LOGIC = {"and", "or"}


def _truth_to_formula(e: Expr) -> Formula:
    if isinstance(e, IntLit):
        return Const(e.value != 0)
    if isinstance(e, Not):
        return Neg(_truth_to_formula(e.operand))
    if isinstance(e, BinOp):
        if e.op in CMP_OPS:
            return Cmp(e.op, e.left, e.right)
        if e.op == "and":
            return And((_truth_to_formula(e.left), _truth_to_formula(e.right)))
        if e.op == "or":
            return Or((_truth_to_formula(e.left), _truth_to_formula(e.right)))
    return Cmp("!=", e, IntLit(0))


def _cmp(op: str, a: Expr, b: Expr) -> Formula:
    if not expr_vars(a) and not expr_vars(b):
        return Const(bool(evaluate(BinOp(op, a, b), {})))
    if op in _SWAP:
        op, a, b = _SWAP[op], b, a
    if op in ("=", "!=") and repr(b) < repr(a):
        a, b = b, a
    return Cmp(op, a, b)


def _sort_key(f: Formula) -> str:
    return repr(f)


def _junction(cls, args: Iterable[Formula]) -> Formula:
    unit, zero = (TRUE, FALSE) if cls is And else (FALSE, TRUE)
    flat: dict[Formula, None] = {}
    for a in args:
        if a == zero:
            return zero
        if a == unit:
            continue
        for b in (a.args if isinstance(a, cls) else (a,)):
            flat[b] = None
    items = sorted(flat, key=_sort_key)
    if not items:
        return unit
    return items[0] if len(items) == 1 else cls(tuple(items))


@lru_cache(maxsize=65536)
def normalize(f: Formula) -> Formula:
    """Canonical form used for syntactic comparison.

    Negations are pushed to atoms, implications and equivalences are expanded,
    conjunctions and disjunctions are flattened, deduplicated and sorted, and
    closed comparisons are folded.
    """
    return _norm(f, False)


def _norm(f: Formula, negated: bool) -> Formula:
    if isinstance(f, Const):
        return Const(f.value != negated)
    if isinstance(f, Truth):
        return _norm(_truth_to_formula(f.expr), negated)
    if isinstance(f, Cmp):
        op = _NEGATE[f.op] if negated else f.op
        return _cmp(op, f.left, f.right)
    if isinstance(f, Neg):
        return _norm(f.arg, not negated)
    if isinstance(f, (And, Or)):
        cls = f.__class__
        if negated:
            cls = Or if cls is And else And
        return _junction(cls, (_norm(a, negated) for a in f.args))
    if isinstance(f, Implies):
        return _norm(Or((Neg(f.ante), f.cons)), negated)
    if isinstance(f, Iff):
        return _norm(Or((And((f.left, f.right)), And((Neg(f.left), Neg(f.right))))), negated)
    if isinstance(f, Ext):
        if not f.rows:
            return Const(negated)
        if not f.keys:
            return Const(not negated)
        return Neg(f) if negated else f
    if isinstance(f, Subst):
        body = _norm(f.body, False)
        if isinstance(body, Const):
            g: Formula = body
        elif isinstance(body, Ext):
            g = Subst(body, f.mapping)
            return Neg(g) if negated else g
        else:
            g = _norm(subst(body, dict(f.mapping)), False)
        return _norm(g, True) if negated else g
    raise TypeError(f"not a formula: {f!r}")


def equivalent_syntax(f: Formula, g: Formula) -> bool:
    return normalize(f) == normalize(g)


# ---------------------------------------------------------------------------
# Vectorized evaluation over columns of candidate stores

Columns = Mapping[Key, np.ndarray]


def _col(cols: Columns, k: Key, n: int) -> np.ndarray:
    c = cols.get(k)
    return c if c is not None else np.zeros(n, dtype=np.int64)


def eval_expr_vec(e: Expr, cols: Columns, n: int) -> np.ndarray:
    if isinstance(e, Var):
        return _col(cols, key_of(e), n)
    if isinstance(e, IntLit):
        return np.full(n, e.value, dtype=np.int64)
    if isinstance(e, Not):
        return (eval_expr_vec(e.operand, cols, n) == 0).astype(np.int64)
    a = eval_expr_vec(e.left, cols, n)
    b = eval_expr_vec(e.right, cols, n)
    op = e.op
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if op == "mod":
        zero = b == 0
        return np.where(zero, 0, np.remainder(a, np.where(zero, 1, b)))
    if op == "=":
        return (a == b).astype(np.int64)
    if op == "!=":
        return (a != b).astype(np.int64)
    if op == "<":
        return (a < b).astype(np.int64)
    if op == "<=":
        return (a <= b).astype(np.int64)
    if op == ">":
        return (a > b).astype(np.int64)
    if op == ">=":
        return (a >= b).astype(np.int64)
    if op == "and":
        return ((a != 0) & (b != 0)).astype(np.int64)
    if op == "or":
        return ((a != 0) | (b != 0)).astype(np.int64)
    raise ValueError(op)


_CMP_FN = {"=": np.equal, "!=": np.not_equal, "<": np.less, "<=": np.less_equal,
           ">": np.greater, ">=": np.greater_equal}


def holds_vec(f: Formula, cols: Columns, n: int) -> np.ndarray:
    """Truth of ``f`` at each of the ``n`` rows described by ``cols``."""
    if isinstance(f, Const):
        return np.full(n, f.value, dtype=bool)
    if isinstance(f, Cmp):
        return _CMP_FN[f.op](eval_expr_vec(f.left, cols, n), eval_expr_vec(f.right, cols, n))
    if isinstance(f, Truth):
        return eval_expr_vec(f.expr, cols, n) != 0
    if isinstance(f, Neg):
        return ~holds_vec(f.arg, cols, n)
    if isinstance(f, And):
        out = np.ones(n, dtype=bool)
        for a in f.args:
            out &= holds_vec(a, cols, n)
        return out
    if isinstance(f, Or):
        out = np.zeros(n, dtype=bool)
        for a in f.args:
            out |= holds_vec(a, cols, n)
        return out
    if isinstance(f, Implies):
        return ~holds_vec(f.ante, cols, n) | holds_vec(f.cons, cols, n)
    if isinstance(f, Iff):
        return holds_vec(f.left, cols, n) == holds_vec(f.right, cols, n)
    if isinstance(f, Ext):
        if not f.keys:
            return np.full(n, bool(f.rows), dtype=bool)
        data = zip(*(_col(cols, k, n).tolist() for k in f.keys))
        return np.fromiter((r in f.rows for r in data), dtype=bool, count=n)
    if isinstance(f, Subst):
        updated = dict(cols)
        for k, e in f.mapping:
            updated[k] = eval_expr_vec(e, cols, n)
        return holds_vec(f.body, updated, n)
    raise TypeError(f"not a formula: {f!r}")


def _eval_k(e: Expr, look) -> int:
    if isinstance(e, Var):
        return look(key_of(e))
    if isinstance(e, IntLit):
        return e.value
    if isinstance(e, Not):
        return int(_eval_k(e.operand, look) == 0)
    return _apply(e.op, _eval_k(e.left, look), _eval_k(e.right, look))


def holds_scalar(f: Formula, look) -> bool:
    """Truth of ``f`` where ``look(key)`` gives each variable's value."""
    if isinstance(f, Const):
        return f.value
    if isinstance(f, Cmp):
            return bool(_apply(f.op, _eval_k(f.left, look), _eval_k(f.right, look)))
    if isinstance(f, Truth):
        return _eval_k(f.expr, look) != 0
    if isinstance(f, Neg):
        return not holds_scalar(f.arg, look)
    if isinstance(f, And):
        return all(holds_scalar(a, look) for a in f.args)
    if isinstance(f, Or):
        return any(holds_scalar(a, look) for a in f.args)
    if isinstance(f, Implies):
        return not holds_scalar(f.ante, look) or holds_scalar(f.cons, look)
    if isinstance(f, Iff):
        return holds_scalar(f.left, look) == holds_scalar(f.right, look)
    if isinstance(f, Ext):
        return tuple(look(k) for k in f.keys) in f.rows
    if isinstance(f, Subst):
        m = {k: _eval_k(e, look) for k, e in f.mapping}
        return holds_scalar(f.body, lambda k: m[k] if k in m else look(k))
    raise TypeError(f"not a formula: {f!r}")


def holds_u(p: Formula, s: Mapping[str, int]) -> bool:
    """``s |= P`` for a unary formula."""
    check_arity(p, "unary")
    return holds_scalar(p, lambda k: s.get(k[1], 0))


def holds_r(r: Formula, s: Mapping[str, int], t: Mapping[str, int]) -> bool:
    """``(s, t) |= R`` for a relational formula."""
    check_arity(r, "relational")
    return holds_scalar(r, lambda k: (s if k[0] == LEFT else t).get(k[1], 0))


def holds_pair(f: Formula, state) -> bool:
    """Truth of ``f`` at a unary store or a (left, right) store pair."""
    if isinstance(state, tuple):
        return holds_r(f, state[0], state[1])
    return holds_u(f, state)


def ext_from_states(keys: Iterable[Key], states: Iterable) -> Ext:
    """Build an extensional formula from stores or store pairs."""
    keys = tuple(sorted(keys))
    rows = set()
    for st in states:
        if isinstance(st, tuple):
            rows.add(tuple((st[0] if k[0] == LEFT else st[1]).get(k[1], 0) for k in keys))
        else:
            rows.add(tuple(st.get(k[1], 0) for k in keys))
    return Ext(keys, frozenset(rows))
