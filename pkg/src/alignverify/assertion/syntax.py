"""Concrete syntax for formulas.

Unary formulas name program variables directly (``x > 3 && z = 24``).
Relational formulas read unprimed identifiers as left-store variables and
primed ones as right-store variables (``x = x' && y > 3``).  Sugar:
``agree(e, e')``, ``bagree(e, e')``, ``left(e)``, ``right(e)``, ``truth(e)``,
extensional sets ``ext[x, y']{(1, 2), (3, 4)}`` and semantic substitution
``subst(F; x := e, y' := e2)``.  Comparisons may be chained: ``z > z' > 0``.
"""
from __future__ import annotations

from ..lang import (ExprParser, ParseError, Token, TokenStream, Var, _CMP_SYMS,
                    format_expr, tokenize)
from .formula import (FALSE, LEFT, RIGHT, TRUE, And, Cmp, Const, Ext, Formula,
                      Iff, Implies, Key, Neg, Or, Subst, Truth, agree, arity, bagree,
                      check_arity)

UNARY, RELATIONAL = "unary", "relational"


class FormulaParser:
    def __init__(self, ts: TokenStream, mode: str):
        if mode not in (UNARY, RELATIONAL):
            raise ValueError(f"unknown formula mode {mode!r}")
        self.ts = ts
        self.mode = mode

    # variable readers -----------------------------------------------------

    def _tok(self) -> Token:
        return self.ts.toks[self.ts.i - 1]

    def _free_var(self, name: str) -> Var:
        if self.mode == UNARY:
            return Var(name)
        base = name.rstrip("'")
        primes = len(name) - len(base)
        if primes > 1:
            self.ts.error(f"too many primes in {name}", self._tok())
        return Var(base, RIGHT if primes else LEFT)

    def _sided(self, side: str):
        def var(name: str) -> Var:
            base = name.rstrip("'")
            primes = len(name) - len(base)
            if side == LEFT and primes:
                self.ts.error(f"primed variable {name} in a left-store position", self._tok())
            if primes > 1:
                self.ts.error(f"too many primes in {name}", self._tok())
            return Var(base, side)
        return var

    def _need_relational(self, what: str):
        if self.mode != RELATIONAL:
            self.ts.error(f"{what}(...) is only meaningful in a relational formula",
                          self._tok())

    def _key(self) -> Key:
        t = self.ts.next()
        if t.kind != "ident":
            self.ts.error("expected a variable", t)
        v = self._free_var(t.text)
        return (v.side, v.name)

    # grammar ----------------------------------------------------------------

    def formula(self) -> Formula:
        f = self.iff()
        if self.ts.accept("->"):
            return Implies(f, self.formula())
        return f

    def iff(self) -> Formula:
        f = self.disj()
        if self.ts.accept("<->"):
            return Iff(f, self.disj())
        return f

    def disj(self) -> Formula:
        parts = [self.conj()]
        while self.ts.accept("||"):
            parts.append(self.conj())
        return parts[0] if len(parts) == 1 else Or(tuple(parts))

    def conj(self) -> Formula:
        parts = [self.neg()]
        while self.ts.accept("&&"):
            parts.append(self.neg())
        return parts[0] if len(parts) == 1 else And(tuple(parts))

    def neg(self) -> Formula:
        if self.ts.accept("!"):
            return Neg(self.neg())
        return self.primary()

    def primary(self) -> Formula:
        ts = self.ts
        t = ts.peek
        if ts.accept("true"):
            return TRUE
        if ts.accept("false"):
            return FALSE
        if t.kind == "ident" and ts.peek_at(1).text in ("(", "[") and t.text in _SUGAR:
            return _SUGAR[t.text](self)
        if ts.at("("):
            save = ts.i
            try:
                ts.next()
                f = self.formula()
                ts.expect(")")
                if not _continues_term(ts.peek):
                    return f
            except ParseError:
                pass
            ts.i = save
        return self.chain()

    def chain(self) -> Formula:
        ep = ExprParser(self.ts, self._free_var)
        terms = [ep.arith()]
        ops = []
        while self.ts.peek.kind == "sym" and self.ts.peek.text in _CMP_SYMS:
            ops.append(_CMP_SYMS[self.ts.next().text])
            terms.append(ep.arith())
        if not ops:
            return Truth(terms[0])
        cmps = tuple(Cmp(op, a, b) for op, a, b in zip(ops, terms, terms[1:]))
        return cmps[0] if len(cmps) == 1 else And(cmps)

    # sugar ------------------------------------------------------------------

    def _call_expr(self, var) -> object:
        return ExprParser(self.ts, var).expr()

    def p_agree(self, boolean: bool) -> Formula:
        self.ts.next()
        self._need_relational("bagree" if boolean else "agree")
        self.ts.expect("(")
        e = self._call_expr(self._sided(LEFT))
        self.ts.expect(",")
        e2 = self._call_expr(self._sided(RIGHT))
        self.ts.expect(")")
        e, e2 = _untag(e), _untag(e2)
        return bagree(e, e2) if boolean else agree(e, e2)

    def p_side(self, side: str) -> Formula:
        self.ts.next()
        self._need_relational("left" if side == LEFT else "right")
        self.ts.expect("(")
        e = self._call_expr(self._sided(side))
        self.ts.expect(")")
        return Truth(e)

    def p_truth(self) -> Formula:
        self.ts.next()
        self.ts.expect("(")
        e = self._call_expr(self._free_var)
        self.ts.expect(")")
        return Truth(e)

    def p_ext(self) -> Formula:
        ts = self.ts
        ts.next()
        ts.expect("[")
        keys: list[Key] = []
        if not ts.at("]"):
            keys.append(self._key())
            while ts.accept(","):
                keys.append(self._key())
        ts.expect("]")
        if len(set(keys)) != len(keys):
            ts.error("repeated variable in an extensional formula")
        ts.expect("{")
        rows = set()
        while ts.accept("("):
            row = []
            if not ts.at(")"):
                row.append(self._int())
                while ts.accept(","):
                    row.append(self._int())
            ts.expect(")")
            if len(row) != len(keys):
                ts.error(f"row of length {len(row)} for {len(keys)} variables")
            rows.add(tuple(row))
            if not ts.accept(","):
                break
        ts.expect("}")
        order = sorted(range(len(keys)), key=lambda i: keys[i])
        return Ext(tuple(keys[i] for i in order),
                   frozenset(tuple(r[i] for i in order) for r in rows))

    def _int(self) -> int:
        neg = self.ts.accept("-") is not None
        t = self.ts.next()
        if t.kind != "int":
            self.ts.error("expected an integer", t)
        return -int(t.text) if neg else int(t.text)

    def p_subst(self) -> Formula:
        ts = self.ts
        ts.next()
        ts.expect("(")
        body = self.formula()
        ts.expect(";")
        mapping = {}
        while True:
            k = self._key()
            ts.expect(":=")
            mapping[k] = self._call_expr(self._free_var)
            if not ts.accept(","):
                break
        ts.expect(")")
        return Subst(body, tuple(sorted(mapping.items(), key=lambda kv: kv[0])))


def _untag(e):
    from ..lang import map_vars
    return map_vars(e, lambda v: Var(v.name))


def _continues_term(t: Token) -> bool:
    return t.kind == "sym" and (t.text in _CMP_SYMS or t.text in ("+", "-", "*", "%")) \
        or t.kind == "kw" and t.text == "mod"


_SUGAR = {
    "agree": lambda p: p.p_agree(False),
    "bagree": lambda p: p.p_agree(True),
    "left": lambda p: p.p_side(LEFT),
    "right": lambda p: p.p_side(RIGHT),
    "truth": lambda p: p.p_truth(),
    "ext": lambda p: p.p_ext(),
    "subst": lambda p: p.p_subst(),
}


def parse_formula_tokens(ts: TokenStream, mode: str) -> Formula:
    return FormulaParser(ts, mode).formula()


def parse_formula(source: str, mode: str = UNARY) -> Formula:
    """Parse a formula; ``mode`` is ``"unary"`` or ``"relational"``."""
    ts = TokenStream(tokenize(source))
    f = parse_formula_tokens(ts, mode)
    if ts.peek.kind != "eof":
        ts.error(f"unexpected {ts.peek.text!r}")
    arity(f)
    if mode == UNARY:
        check_arity(f, UNARY)
    return f


# ---------------------------------------------------------------------------
# Printing


def var_text(v: Var) -> str:
    return v.name + "'" if v.side == RIGHT else v.name


def _key_text(k: Key) -> str:
    return var_text(Var(k[1], k[0]))


def _expr(e) -> str:
    return format_expr(e, var_text)


def format_formula(f: Formula) -> str:
    """Render a formula in the syntax accepted by :func:`parse_formula`."""
    return _fmt(f, 0)


# precedence: -> 1, <-> 2, || 3, && 4, ! 5, atoms 6
def _fmt(f: Formula, prec: int) -> str:
    if isinstance(f, Const):
        return "true" if f.value else "false"
    if isinstance(f, Cmp):
        s = f"{format_expr(f.left, var_text, 5)} {f.op} {format_expr(f.right, var_text, 5)}"
        return f"({s})" if prec > 4 else s
    if isinstance(f, Truth):
        sides = {v.side for v in _vars(f.expr)}
        if sides == {LEFT}:
            return f"left({format_expr(f.expr, lambda v: v.name)})"
        if sides == {RIGHT}:
            return f"right({format_expr(f.expr, lambda v: v.name)})"
        return f"truth({_expr(f.expr)})"
    if isinstance(f, Neg):
        return "!" + _fmt(f.arg, 6)
    if isinstance(f, And):
        if not f.args:
            return "true"
        s = " && ".join(_fmt(a, 5) for a in f.args)
        return f"({s})" if prec > 4 else s
    if isinstance(f, Or):
        if not f.args:
            return "false"
        s = " || ".join(_fmt(a, 4) for a in f.args)
        return f"({s})" if prec > 3 else s
    if isinstance(f, Implies):
        s = f"{_fmt(f.ante, 2)} -> {_fmt(f.cons, 1)}"
        return f"({s})" if prec > 1 else s
    if isinstance(f, Iff):
        s = f"{_fmt(f.left, 3)} <-> {_fmt(f.right, 3)}"
        return f"({s})" if prec > 2 else s
    if isinstance(f, Ext):
        keys = ", ".join(_key_text(k) for k in f.keys)
        rows = ", ".join("(" + ", ".join(map(str, r)) + ")" for r in sorted(f.rows))
        return f"ext[{keys}]{{{rows}}}"
    if isinstance(f, Subst):
        m = ", ".join(f"{_key_text(k)} := {_expr(e)}" for k, e in f.mapping)
        return f"subst({_fmt(f.body, 0)}; {m})"
    raise TypeError(f"not a formula: {f!r}")


def _vars(e):
    from ..lang import expr_vars
    return expr_vars(e)
