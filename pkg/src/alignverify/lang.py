"""Labelled imperative commands: syntax trees, parsing, printing and label functions.

Program text looks like::

    fin 6
    y := x; z := 1;
    while y != 0 do z := z * y; y := y - 1 od

Labels may be written explicitly (``3: while ...``). Unlabelled nodes are
numbered in preorder starting at 1, skipping labels already in use.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Iterator, Mapping, Union

# ---------------------------------------------------------------------------
# Expressions

ARITH_OPS = ("+", "-", "*", "mod")
CMP_OPS = ("=", "!=", "<", "<=", ">", ">=")
LOGIC_OPS = ("and", "or")
BINARY_OPS = ARITH_OPS + CMP_OPS + LOGIC_OPS


@dataclass(frozen=True)
class Var:
    name: str
    # "" for program variables; "L"/"R" only inside relational formulas
    side: str = ""


@dataclass(frozen=True)
class IntLit:
    value: int


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"

    def __post_init__(self):
        if self.op not in BINARY_OPS:
            raise ValueError(f"unknown operator {self.op!r}")


@dataclass(frozen=True)
class Not:
    operand: "Expr"


Expr = Union[Var, IntLit, BinOp, Not]


def _apply(op: str, a: int, b: int) -> int:
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if op == "mod":
        return a % b if b != 0 else 0
    if op == "=":
        return int(a == b)
    if op == "!=":
        return int(a != b)
    if op == "<":
        return int(a < b)
    if op == "<=":
        return int(a <= b)
    if op == ">":
        return int(a > b)
    if op == ">=":
        return int(a >= b)
    if op == "and":
        return int(a != 0 and b != 0)
    if op == "or":
        return int(a != 0 or b != 0)
    raise ValueError(op)


def evaluate(e: Expr, env: Mapping[str, int]) -> int:
    """Evaluate ``e`` in ``env``; variables missing from ``env`` read as 0.

    Evaluation is total: ``mod`` by zero yields 0, comparisons and the logical
    connectives yield 1 or 0.
    """
    if isinstance(e, Var):
        return env.get(e.name, 0)
    if isinstance(e, IntLit):
        return e.value
    if isinstance(e, BinOp):
        return _apply(e.op, evaluate(e.left, env), evaluate(e.right, env))
    if isinstance(e, Not):
        return int(evaluate(e.operand, env) == 0)
    raise TypeError(f"not an expression: {e!r}")


def expr_vars(e: Expr) -> frozenset[Var]:
    if isinstance(e, Var):
        return frozenset((e,))
    if isinstance(e, IntLit):
        return frozenset()
    if isinstance(e, BinOp):
        return expr_vars(e.left) | expr_vars(e.right)
    return expr_vars(e.operand)


def map_vars(e: Expr, fn: Callable[[Var], Expr]) -> Expr:
    """Rebuild ``e`` with every variable replaced by ``fn(var)``."""
    if isinstance(e, Var):
        return fn(e)
    if isinstance(e, IntLit):
        return e
    if isinstance(e, BinOp):
        return BinOp(e.op, map_vars(e.left, fn), map_vars(e.right, fn))
    return Not(map_vars(e.operand, fn))


def dot_name(name: str) -> str:
    return name + "'"


def dot_expr(e: Expr) -> Expr:
    return map_vars(e, lambda v: Var(dot_name(v.name)))


# ---------------------------------------------------------------------------
# Commands


@dataclass(frozen=True)
class Skip:
    label: int


@dataclass(frozen=True)
class Assign:
    label: int
    var: str
    expr: Expr


@dataclass(frozen=True)
class Seq:
    first: "Command"
    second: "Command"


@dataclass(frozen=True)
class Choice:
    label: int
    left: "Command"
    right: "Command"


@dataclass(frozen=True)
class If:
    label: int
    cond: Expr
    then: "Command"
    orelse: "Command"


@dataclass(frozen=True)
class While:
    label: int
    cond: Expr
    body: "Command"


Command = Union[Skip, Assign, Seq, Choice, If, While]


@dataclass(frozen=True)
class Program:
    """A main program ``body; skip^fin``."""

    body: Command
    fin: int = 0

    @property
    def init(self) -> int:
        return lab(self.body)


class LabelError(ValueError):
    """A label function was applied outside its domain."""


def lab(c: Command) -> int:
    while isinstance(c, Seq):
        c = c.first
    return c.label


def children(c: Command) -> tuple[Command, ...]:
    if isinstance(c, Seq):
        return (c.first, c.second)
    if isinstance(c, Choice):
        return (c.left, c.right)
    if isinstance(c, If):
        return (c.then, c.orelse)
    if isinstance(c, While):
        return (c.body,)
    return ()


def subcommands(c: Command) -> Iterator[Command]:
    """All subterms of ``c`` in preorder, including sequence nodes and ``c``."""
    yield c
    for d in children(c):
        yield from subcommands(d)


def label_list(c: Command) -> list[int]:
    return [d.label for d in subcommands(c) if not isinstance(d, Seq)]


def labs(c: Command) -> frozenset[int]:
    return frozenset(label_list(c))


def ok(c: Command) -> bool:
    ls = label_list(c)
    return len(ls) == len(set(ls)) and all(n >= 0 for n in ls)


def program_ok(p: Program) -> bool:
    return ok(p.body) and p.fin >= 0 and p.fin not in labs(p.body)


def sub(n: int, c: Command) -> Command:
    """The unique non-sequence subcommand of ``c`` labelled ``n``."""
    for d in subcommands(c):
        if not isinstance(d, Seq) and d.label == n:
            return d
    raise LabelError(f"label {n} does not occur in the command")


def fsuc(n: int, c: Command, f: int) -> int:
    """Following successor: where control goes once the command at ``n`` is done."""
    if isinstance(c, (Skip, Assign)):
        if c.label != n:
            raise LabelError(f"label {n} does not occur in the command")
        return f
    if isinstance(c, Seq):
        if n in labs(c.first):
            return fsuc(n, c.first, lab(c.second))
        return fsuc(n, c.second, f)
    if isinstance(c, While):
        if n == c.label:
            return f
        return fsuc(n, c.body, c.label)
    if isinstance(c, (If, Choice)):
        a, b = children(c)
        if n in labs(a):
            return fsuc(n, a, f)
        if n in labs(b):
            return fsuc(n, b, f)
        if n == c.label:
            return f
        raise LabelError(f"label {n} does not occur in the command")
    raise TypeError(f"not a command: {c!r}")


def is_subterm(b: Command, c: Command) -> bool:
    return any(d == b for d in subcommands(c))


def elab(b: Command, c: Command, fin: int) -> int:
    """Exit label of subcommand ``b`` within ``c; skip^fin``."""
    if not is_subterm(b, c):
        raise LabelError("not a subcommand")
    while isinstance(b, Seq):
        b = b.second
    return fsuc(b.label, c, fin)


def cfg_successors(n: int, c: Command, fin: int) -> tuple[int, ...]:
    """Control-flow successors of ``n`` in ``c; skip^fin``, read off the syntax."""
    b = sub(n, c)
    if isinstance(b, (Skip, Assign)):
        return (fsuc(n, c, fin),)
    if isinstance(b, (If, Choice)):
        x, y = children(b)
        return (lab(x), lab(y))
    if isinstance(b, While):
        return (lab(b.body), fsuc(n, c, fin))
    raise TypeError(b)


def kind(c: Command) -> str:
    return type(c).__name__


def choice_free(c: Command) -> bool:
    return not any(isinstance(d, Choice) for d in subcommands(c))


def command_vars(c: Command) -> frozenset[str]:
    """Names of all variables read or written anywhere in ``c``."""
    out: set[str] = set()
    for d in subcommands(c):
        if isinstance(d, Assign):
            out.add(d.var)
            out.update(v.name for v in expr_vars(d.expr))
        elif isinstance(d, (If, While)):
            out.update(v.name for v in expr_vars(d.cond))
    return frozenset(out)


def map_command(c: Command, var: Callable[[str], str], expr: Callable[[Expr], Expr]) -> Command:
    if isinstance(c, Skip):
        return c
    if isinstance(c, Assign):
        return Assign(c.label, var(c.var), expr(c.expr))
    if isinstance(c, Seq):
        return Seq(map_command(c.first, var, expr), map_command(c.second, var, expr))
    if isinstance(c, Choice):
        return Choice(c.label, map_command(c.left, var, expr), map_command(c.right, var, expr))
    if isinstance(c, If):
        return If(c.label, expr(c.cond), map_command(c.then, var, expr),
                  map_command(c.orelse, var, expr))
    return While(c.label, expr(c.cond), map_command(c.body, var, expr))


def dot(c: Command) -> Command:
    """Rename every variable ``x`` of ``c`` to ``x'``; labels are unchanged."""
    return map_command(c, dot_name, dot_expr)


def erase_labels(c: Command) -> Command:
    """The command with every label set to 0, for label-insensitive comparison."""
    if isinstance(c, Skip):
        return Skip(0)
    if isinstance(c, Assign):
        return Assign(0, c.var, c.expr)
    if isinstance(c, Seq):
        return Seq(erase_labels(c.first), erase_labels(c.second))
    if isinstance(c, Choice):
        return Choice(0, erase_labels(c.left), erase_labels(c.right))
    if isinstance(c, If):
        return If(0, c.cond, erase_labels(c.then), erase_labels(c.orelse))
    return While(0, c.cond, erase_labels(c.body))


def replace(c: Command, old: Command, new: Command) -> Command:
    """Replace the subterm ``old`` of ``c`` (compared by value) with ``new``."""
    if c == old:
        return new
    if isinstance(c, Seq):
        return Seq(replace(c.first, old, new), replace(c.second, old, new))
    if isinstance(c, Choice):
        return Choice(c.label, replace(c.left, old, new), replace(c.right, old, new))
    if isinstance(c, If):
        return If(c.label, c.cond, replace(c.then, old, new), replace(c.orelse, old, new))
    if isinstance(c, While):
        return While(c.label, c.cond, replace(c.body, old, new))
    return c


def same_ctl(c: Command, c2: Command, fin: int = 0, relaxed: bool = False) -> bool:
    """Same labels, same kind at every label, same control-flow successors.

    With ``relaxed`` an assignment may face a skip.
    """
    if labs(c) != labs(c2):
        return False
    for n in labs(c):
        a, b = sub(n, c), sub(n, c2)
        ka, kb = kind(a), kind(b)
        if ka != kb and not (relaxed and {ka, kb} == {"Assign", "Skip"}):
            return False
        if cfg_successors(n, c, fin) != cfg_successors(n, c2, fin):
            return False
    return True


def same_except_violation(c: Command, c2: Command, b: Command, b2: Command,
                          beg: int, end: int, fin: int) -> str | None:
    """Name the first failing clause of the same-except-hole condition, or None."""
    if not (is_subterm(b, c) and is_subterm(b2, c2)):
        return "context: b and b' must be subcommands of c and c'"
    if not (lab(b) == beg == lab(b2)):
        return "entry: lab(b) = lab(b') = beg"
    if labs(b) & labs(b2) != {beg}:
        return "labels: labs(b) and labs(b') must share exactly beg"
    if not (elab(b, c, fin) == end == elab(b2, c2, fin)):
        return "exit: elab(b) = elab(b') = end"
    hole, hole2 = replace(c, b, Skip(beg)), replace(c2, b2, Skip(beg))
    if not same_ctl(hole, hole2, fin):
        return "sameCtl: contexts filled with skip must have the same control"
    if not (choice_free(hole) and choice_free(hole2)):
        return "choice-free: contexts must be choice free"
    return None


# ---------------------------------------------------------------------------
# Lexing and parsing

KEYWORDS = {
    "skip", "if", "then", "else", "fi", "while", "do", "od", "choice", "or",
    "end", "mod", "and", "not", "fin", "true", "false",
}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+|\#[^\n]*)
  | (?P<nl>\n)
  | (?P<int>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*'*)
  | (?P<sym><->|->|:=|==|!=|<>|<=|>=|&&|\|\||[-+*%=<>();:,!\[\]{}|.])
    """,
    re.VERBOSE,
)


class ParseError(ValueError):
    def __init__(self, msg: str, line: int = 0, col: int = 0):
        super().__init__(f"{line}:{col}: {msg}" if line else msg)
        self.line, self.col = line, col


@dataclass(frozen=True)
class Token:
    kind: str  # int | ident | kw | sym | eof
    text: str
    line: int
    col: int


def tokenize(src: str) -> list[Token]:
    toks: list[Token] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(src):
        m = _TOKEN_RE.match(src, pos)
        if m is None:
            raise ParseError(f"unexpected character {src[pos]!r}", line, pos - line_start + 1)
        kind_ = m.lastgroup
        text = m.group()
        col = pos - line_start + 1
        if kind_ == "nl":
            line, line_start = line + 1, m.end()
        elif kind_ != "ws":
            if kind_ == "ident" and text in KEYWORDS:
                kind_ = "kw"
            toks.append(Token(kind_, text, line, col))
        pos = m.end()
    toks.append(Token("eof", "", line, pos - line_start + 1))
    return toks


_CMP_SYMS = {"=": "=", "==": "=", "!=": "!=", "<>": "!=", "<": "<", "<=": "<=",
             ">": ">", ">=": ">="}


class TokenStream:
    def __init__(self, toks: list[Token]):
        self.toks = toks
        self.i = 0

    @property
    def peek(self) -> Token:
        return self.toks[self.i]

    def peek_at(self, k: int) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def next(self) -> Token:
        t = self.toks[self.i]
        if t.kind != "eof":
            self.i += 1
        return t

    def at(self, *texts: str) -> bool:
        t = self.peek
        return t.kind in ("kw", "sym") and t.text in texts

    def accept(self, *texts: str) -> Token | None:
        if self.at(*texts):
            return self.next()
        return None

    def expect(self, text: str) -> Token:
        t = self.peek
        if not self.at(text):
            self.error(f"expected {text!r}, found {t.text or 'end of input'!r}")
        return self.next()

    def error(self, msg: str, tok: Token | None = None):
        tok = tok or self.peek
        raise ParseError(msg, tok.line, tok.col)


class ExprParser:
    """Recursive-descent parser for integer expressions."""

    def __init__(self, ts: TokenStream, var: Callable[[str], Var] = Var):
        self.ts = ts
        self.var = var

    def expr(self) -> Expr:
        return self.disj()

    def disj(self) -> Expr:
        e = self.conj()
        while self.ts.at("or") and not self._command_follows():
            self.ts.next()
            e = BinOp("or", e, self.conj())
        return e

    def _command_follows(self) -> bool:
        # `or` also separates the branches of a choice; it belongs to the
        # choice when a command starts right after it
        t1, t2 = self.ts.peek_at(1), self.ts.peek_at(2)
        if t1.kind == "kw" and t1.text in ("skip", "if", "while", "choice"):
            return True
        if t1.kind == "ident" and t2.text == ":=":
            return True
        if t1.kind == "int" and t2.text == ":":
            return True
        if t1.text == "(":
            t3 = self.ts.peek_at(3)
            return (t2.kind == "kw" and t2.text in ("skip", "if", "while", "choice")) \
                or (t2.kind == "ident" and t3.text == ":=") or (t2.kind == "int" and t3.text == ":")
        return False

    def conj(self) -> Expr:
        e = self.neg()
        while self.ts.accept("and"):
            e = BinOp("and", e, self.neg())
        return e

    def neg(self) -> Expr:
        if self.ts.accept("not"):
            return Not(self.neg())
        return self.comparison()

    def comparison(self) -> Expr:
        e = self.arith()
        t = self.ts.peek
        if t.kind == "sym" and t.text in _CMP_SYMS:
            self.ts.next()
            e = BinOp(_CMP_SYMS[t.text], e, self.arith())
        return e

    def arith(self) -> Expr:
        e = self.term()
        while self.ts.at("+", "-"):
            op = self.ts.next().text
            e = BinOp(op, e, self.term())
        return e

    def term(self) -> Expr:
        e = self.unary()
        while self.ts.at("*", "mod", "%"):
            op = "*" if self.ts.next().text == "*" else "mod"
            e = BinOp(op, e, self.unary())
        return e

    def unary(self) -> Expr:
        if self.ts.accept("-"):
            if self.ts.peek.kind == "int":
                return IntLit(-int(self.ts.next().text))
            return BinOp("-", IntLit(0), self.unary())
        return self.atom()

    def atom(self) -> Expr:
        t = self.ts.peek
        if t.kind == "int":
            self.ts.next()
            return IntLit(int(t.text))
        if t.kind == "ident":
            self.ts.next()
            return self.var(t.text)
        if self.ts.accept("("):
            e = self.expr()
            self.ts.expect(")")
            return e
        self.ts.error(f"expected an expression, found {t.text or 'end of input'!r}")


# Commands are parsed with ``None`` labels first and numbered afterwards.
_PENDING = None


class CommandParser:
    def __init__(self, ts: TokenStream, allow_primes: bool = False):
        self.ts = ts
        self.allow_primes = allow_primes
        self.exprs = ExprParser(ts, self._var)
        self.explicit: list[tuple[int, Token]] = []

    def _var(self, name: str) -> Var:
        if not self.allow_primes and name.endswith("'"):
            self.ts.error(f"program variables may not end in a prime: {name}",
                          self.ts.toks[self.ts.i - 1])
        return Var(name)

    def seq(self):
        c = self.single()
        if self.ts.accept(";"):
            return Seq(c, self.seq())
        return c

    def single(self):
        label = _PENDING
        if self.ts.peek.kind == "int" and self.ts.peek_at(1).text == ":":
            tok = self.ts.next()
            self.ts.next()
            label = int(tok.text)
            self.explicit.append((label, tok))
        elif self.ts.at("-") and self.ts.peek_at(1).kind == "int" and self.ts.peek_at(2).text == ":":
            self.ts.error("labels must be non-negative")
        t = self.ts.peek
        if self.ts.accept("skip"):
            return Skip(label)
        if self.ts.accept("if"):
            cond = self.exprs.expr()
            self.ts.expect("then")
            a = self.seq()
            self.ts.expect("else")
            b = self.seq()
            self.ts.expect("fi")
            return If(label, cond, a, b)
        if self.ts.accept("while"):
            cond = self.exprs.expr()
            self.ts.expect("do")
            body = self.seq()
            self.ts.expect("od")
            return While(label, cond, body)
        if self.ts.accept("choice"):
            a = self.seq()
            self.ts.expect("or")
            b = self.seq()
            self.ts.expect("end")
            return Choice(label, a, b)
        if self.ts.accept("("):
            if label is not _PENDING:
                self.ts.error("a label cannot be attached to a parenthesised sequence", t)
            c = self.seq()
            self.ts.expect(")")
            return c
        if t.kind == "ident":
            self.ts.next()
            name = self._var(t.text).name
            self.ts.expect(":=")
            return Assign(label, name, self.exprs.expr())
        self.ts.error(f"expected a command, found {t.text or 'end of input'!r}")


def _number(c, taken: set[int], counter: list[int]):
    def fresh() -> int:
        while counter[0] in taken:
            counter[0] += 1
        taken.add(counter[0])
        return counter[0]

    if isinstance(c, Seq):
        a = _number(c.first, taken, counter)
        return Seq(a, _number(c.second, taken, counter))
    n = c.label if c.label is not _PENDING else fresh()
    if isinstance(c, Skip):
        return Skip(n)
    if isinstance(c, Assign):
        return Assign(n, c.var, c.expr)
    if isinstance(c, Choice):
        a = _number(c.left, taken, counter)
        return Choice(n, a, _number(c.right, taken, counter))
    if isinstance(c, If):
        a = _number(c.then, taken, counter)
        return If(n, c.cond, a, _number(c.orelse, taken, counter))
    return While(n, c.cond, _number(c.body, taken, counter))


def _parse_command_tokens(ts: TokenStream, fin: int | None, allow_primes: bool,
                          unique: bool = True):
    cp = CommandParser(ts, allow_primes)
    raw = cp.seq()
    seen: dict[int, Token] = {}
    for n, tok in cp.explicit:
        if n in seen and unique:
            raise ParseError(f"duplicate label {n}", tok.line, tok.col)
        seen[n] = tok
    if fin is not None and fin in seen:
        tok = seen[fin]
        raise ParseError(f"label {fin} is reserved for the exit point", tok.line, tok.col)
    taken = set(seen) | ({fin} if fin is not None else set())
    return _number(raw, taken, [1])


def parse(source: str, allow_primes: bool = False) -> Program:
    """Parse a program file; ``fin N`` may appear as a header (default 0)."""
    ts = TokenStream(tokenize(source))
    fin = 0
    if ts.accept("fin"):
        t = ts.next()
        if t.kind != "int":
            ts.error("expected the exit label after 'fin'", t)
        fin = int(t.text)
    body = _parse_command_tokens(ts, fin, allow_primes)
    if ts.peek.kind != "eof":
        ts.error(f"unexpected {ts.peek.text!r}")
    return Program(body, fin)


def parse_command(source: str, allow_primes: bool = True, unique: bool = True) -> Command:
    """Parse a bare command; primed (dotted) variables are accepted.

    With ``unique=False`` explicit labels may repeat (as in ``c; dot(d)``).
    """
    ts = TokenStream(tokenize(source))
    c = _parse_command_tokens(ts, None, allow_primes, unique)
    if ts.peek.kind != "eof":
        ts.error(f"unexpected {ts.peek.text!r}")
    return c


def parse_expr(source: str, allow_primes: bool = True) -> Expr:
    ts = TokenStream(tokenize(source))
    e = ExprParser(ts).expr()
    if ts.peek.kind != "eof":
        ts.error(f"unexpected {ts.peek.text!r}")
    if not allow_primes and any(v.name.endswith("'") for v in expr_vars(e)):
        raise ParseError("primed variable in a program expression")
    return e


# ---------------------------------------------------------------------------
# Printing

_PREC = {"or": 1, "and": 2, "=": 4, "!=": 4, "<": 4, "<=": 4, ">": 4, ">=": 4,
         "+": 5, "-": 5, "*": 6, "mod": 6}


def format_expr(e: Expr, var: Callable[[Var], str] = lambda v: v.name, prec: int = 0) -> str:
    if isinstance(e, Var):
        return var(e)
    if isinstance(e, IntLit):
        s = str(e.value)
        return f"({s})" if e.value < 0 and prec > 5 else s
    if isinstance(e, Not):
        s = "not " + format_expr(e.operand, var, 3)
        return f"({s})" if prec > 3 else s
    p = _PREC[e.op]
    # comparisons do not chain; left-associative arithmetic needs the right side tighter
    lp = p + 1 if p == 4 else p
    s = f"{format_expr(e.left, var, lp)} {e.op} {format_expr(e.right, var, p + 1)}"
    return f"({s})" if p < prec else s


def format_command(c: Command, labels: bool = True, var: Callable[[Var], str] = lambda v: v.name) -> str:
    def lbl(n: int) -> str:
        return f"{n}: " if labels else ""

    def fmt(c: Command, in_seq: bool = False) -> str:
        if isinstance(c, Skip):
            return f"{lbl(c.label)}skip"
        if isinstance(c, Assign):
            return f"{lbl(c.label)}{var(Var(c.var))} := {format_expr(c.expr, var)}"
        if isinstance(c, Seq):
            # sequences nest to the right when parsed; a left-nested one needs parentheses
            first = fmt(c.first)
            if isinstance(c.first, Seq):
                first = f"({first})"
            s = f"{first}; {fmt(c.second)}"
            return s
        if isinstance(c, Choice):
            return f"{lbl(c.label)}choice {fmt(c.left)} or {fmt(c.right)} end"
        if isinstance(c, If):
            return (f"{lbl(c.label)}if {format_expr(c.cond, var)} then {fmt(c.then)} "
                    f"else {fmt(c.orelse)} fi")
        return f"{lbl(c.label)}while {format_expr(c.cond, var)} do {fmt(c.body)} od"

    return fmt(c)


def format_program(p: Program) -> str:
    return f"fin {p.fin}\n{format_command(p.body)}\n"
