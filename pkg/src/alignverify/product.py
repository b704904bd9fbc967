"""Product automata of two automata, trace projections and bounded adequacy checking.

Every product is described by the moves available at each of its control
points.  A move is a left step, a right step or a joint step, optionally
guarded by a relation on the current store pair, together with a map from the
component targets to the product target (None when the move is not allowed to
land there).  Both the concrete transition relation and the symbolic edges are
derived from the same moves.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product as cartesian
from typing import Callable, Iterable, Sequence

from .assertion import (DEFAULT_DOMAIN, LEFT, PLAIN, RIGHT, TRUE, Domain, Formula, Key, Neg,
                        conj, holds_r, tag)
from .assertion.formula import holds_scalar, subst
from .automaton import Automaton, Edge, explore
from .lang import (Command, Var, While, fsuc, lab, labs, same_ctl, same_except_violation,
                   sub)
from .semantics import Store
from .verdict import FAILS, HOLDS, INCONCLUSIVE, Verdict

LCK, LO, RO = "lck", "lo", "ro"
TAGS = (LCK, LO, RO)

KINDS = ("olck", "lo", "ro", "ilv", "elck", "seq", "cnd", "lckctl", "dov",
         "sameexcept", "caloop")


@dataclass(frozen=True)
class ProductSpec:
    """Which product to build.

    ``cnd`` takes ``L``, ``R``, ``J`` (sets of control pairs); ``sameexcept``
    takes the holes ``b``, ``b2`` and ``beg``, ``end``; ``caloop`` takes
    ``beg`` and the guards ``lam`` and ``rho``.
    """

    kind: str
    L: frozenset = frozenset()
    R: frozenset = frozenset()
    J: frozenset = frozenset()
    b: Command | None = None
    b2: Command | None = None
    beg: int | None = None
    end: int | None = None
    lam: Formula = field(default=TRUE)
    rho: Formula = field(default=TRUE)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown product kind {self.kind!r}")


class ProductError(ValueError):
    """A product precondition failed; the message names the clause."""


@dataclass(frozen=True)
class Move:
    side: str  # "L", "R" or "J"
    guard: Formula
    target: Callable


def _plain_to(side: str, f: Formula) -> Formula:
    from .assertion import free_keys
    return subst(f, {k: Var(k[1], side) for k in free_keys(f) if k[0] == PLAIN})


def _tag_update(update, side):
    return tuple(((side, k[1]), tag(e, side)) for k, e in update)


class Product(Automaton):
    def __init__(self, a: Automaton, b: Automaton, spec: ProductSpec, ctrl, init, fin, moves):
        self.left_aut, self.right_aut, self.spec = a, b, spec
        self._moves = moves
        super().__init__(ctrl, init, fin, True, (a.variables, b.variables),
                         self._product_succ, self._product_edges, name=spec.kind)

    @staticmethod
    def lt(p):
        return p[0]

    @staticmethod
    def rt(p):
        return p[1]

    def moves(self, p) -> list[Move]:
        return self._moves(p)

    def _product_succ(self, p, st):
        s, t = st
        n, n2 = p[0], p[1]
        out = []
        for mv in self._moves(p):
            if mv.guard != TRUE and not holds_scalar(
                    mv.guard, lambda k: (s if k[0] == LEFT else t).get(k[1], 0)):
                continue
            if mv.side == "L":
                cand = [(mv.target(m, n2), (s2, t)) for m, s2 in self.left_aut.succ(n, s)]
            elif mv.side == "R":
                cand = [(mv.target(n, m2), (s, t2)) for m2, t2 in self.right_aut.succ(n2, t)]
            else:
                cand = [(mv.target(m, m2), (s2, t2))
                        for (m, s2), (m2, t2) in cartesian(self.left_aut.succ(n, s),
                                                           self.right_aut.succ(n2, t))]
            for q in cand:
                if q[0] is not None and q not in out:
                    out.append(q)
        return out

    def _product_edges(self, p) -> list[Edge]:
        n, n2 = p[0], p[1]
        out: list[Edge] = []
        for mv in self._moves(p):
            if mv.side == "L":
                for e in self.left_aut.edges(n):
                    q = mv.target(e.dst, n2)
                    if q is not None:
                        out.append(Edge(p, q, conj(mv.guard, _plain_to(LEFT, e.guard)),
                                        _tag_update(e.update, LEFT), "left:" + e.kind))
            elif mv.side == "R":
                for e in self.right_aut.edges(n2):
                    q = mv.target(n, e.dst)
                    if q is not None:
                        out.append(Edge(p, q, conj(mv.guard, _plain_to(RIGHT, e.guard)),
                                        _tag_update(e.update, RIGHT), "right:" + e.kind))
            else:
                for e, e2 in cartesian(self.left_aut.edges(n), self.right_aut.edges(n2)):
                    q = mv.target(e.dst, e2.dst)
                    if q is not None:
                        out.append(Edge(p, q, conj(mv.guard, _plain_to(LEFT, e.guard),
                                                   _plain_to(RIGHT, e2.guard)),
                                        _tag_update(e.update, LEFT) + _tag_update(e2.update, RIGHT),
                                        f"joint:{e.kind}|{e2.kind}"))
        return out


def _pair(m, m2):
    return (m, m2)


def _untagged_moves(spec: ProductSpec, a: Automaton, b: Automaton):
    L = lambda: Move("L", TRUE, _pair)
    R = lambda: Move("R", TRUE, _pair)
    J = lambda: Move("J", TRUE, _pair)
    k = spec.kind

    def moves(p):
        n, n2 = p
        if k == "olck":
            return [J()]
        if k == "lo":
            return [L()]
        if k == "ro":
            return [R()]
        if k == "ilv":
            return [L(), R()]
        if k == "elck":
            return [J()] + ([R()] if n == a.fin else []) + ([L()] if n2 == b.fin else [])
        if k == "seq":
            return ([L()] if n2 == b.init else []) + ([R()] if n == a.fin else [])
        if k == "cnd":
            return (([L()] if p in spec.L else []) + ([R()] if p in spec.R else [])
                    + ([J()] if p in spec.J else []))
        if k == "lckctl":
            return [J()] if n == n2 else []
        raise AssertionError(k)
    return moves


def build_product(a: Automaton, b: Automaton, spec: ProductSpec) -> Product:
    """Build the product of ``a`` (left) and ``b`` (right) described by ``spec``."""
    k = spec.kind
    if k == "lckctl" and set(a.ctrl) != set(b.ctrl):
        raise ProductError("lockstep-control: the two control sets must coincide")
    if k in ("olck", "lo", "ro", "ilv", "elck", "seq", "cnd", "lckctl"):
        ctrl = [(n, n2) for n in a.ctrl for n2 in b.ctrl]
        return Product(a, b, spec, ctrl, (a.init, b.init), (a.fin, b.fin),
                       _untagged_moves(spec, a, b))
    if k == "dov":
        return _dovetail(a, b, spec)
    if k == "sameexcept":
        return _same_except(a, b, spec)
    return _caloop(a, b, spec)


def _dovetail(a, b, spec):
    def canon(m, m2, j):
        return (m, m2, 0 if m == a.fin or m2 == b.fin else j)

    def moves(p):
        n, n2, i = p
        out = []
        if i == 0:
            out.append(Move("L", TRUE, lambda m, m2: canon(m, m2, 1)))
        else:
            out.append(Move("R", TRUE, lambda m, m2: canon(m, m2, 0)))
        if n == a.fin:
            out.append(Move("R", TRUE, lambda m, m2: canon(m, m2, 0)))
        if n2 == b.fin:
            out.append(Move("L", TRUE, lambda m, m2: canon(m, m2, 0)))
        return out

    ctrl = [(n, n2, i) for n in a.ctrl for n2 in b.ctrl for i in (0, 1)]
    return Product(a, b, spec, ctrl, (a.init, b.init, 0), (a.fin, b.fin, 0), moves)


def _programs(a, b):
    pa, pb = getattr(a, "program", None), getattr(b, "program", None)
    if pa is None or pb is None:
        raise ProductError("this product is defined for program automata only")
    if pa.fin != pb.fin:
        raise ProductError("both programs must use the same final label")
    return pa, pb


def _same_except(a, b, spec):
    pa, pb = _programs(a, b)
    beg, end = spec.beg, spec.end
    bad = same_except_violation(pa.body, pb.body, spec.b, spec.b2, beg, end, pa.fin)
    if bad:
        raise ProductError(f"sameExcept fails: {bad}")
    hole_l, hole_r = labs(spec.b), labs(spec.b2)
    holes = hole_l | hole_r

    def lock(m, m2):
        if m != m2:
            return None
        return (beg, beg, LO) if m == beg else (m, m, LCK)

    def left_only(m, m2):
        return (end, beg, RO) if m == end else (m, beg, LO)

    def right_only(m, m2):
        return (end, end, LCK) if m2 == end else (end, m2, RO)

    def moves(p):
        n, n2, tg = p
        if tg == LCK and n == n2 and n not in holes:
            return [Move("J", TRUE, lock)]
        if tg == LO and n2 == beg and n in hole_l:
            return [Move("L", TRUE, left_only)]
        if tg == RO and n == end and n2 in hole_r:
            return [Move("R", TRUE, right_only)]
        return []

    ctrl = [(n, n2, t) for n in a.ctrl for n2 in b.ctrl for t in TAGS]
    # when the hole starts the program, execution begins in left-only mode
    init = (beg, beg, LO) if a.init == beg else (a.init, b.init, LCK)
    return Product(a, b, spec, ctrl, init, (a.fin, b.fin, LCK), moves)


def _caloop(a, b, spec):
    pa, pb = _programs(a, b)
    beg = spec.beg
    if not same_ctl(pa.body, pb.body, pa.fin):
        raise ProductError("conditionally aligned loops: sameCtl(c, c') fails")
    if beg not in labs(pa.body) or not isinstance(sub(beg, pa.body), While):
        raise ProductError(f"conditionally aligned loops: sub({beg}, c) is not a loop")
    w = sub(beg, pa.body)
    body, exit_ = lab(w.body), fsuc(beg, pa.body, pa.fin)
    inside = labs(w.body)
    lam, rho = spec.lam, spec.rho

    def diag(m, m2):
        return (m, m, LCK) if m == m2 else None

    def enter(m, m2):
        return (body, body, LCK) if m == body and m2 == body else None

    def leave(m, m2):
        return (exit_, exit_, LCK) if m == exit_ and m2 == exit_ else None

    def enter_left(m, m2):
        return (body, beg, LO) if m == body else None

    def enter_right(m, m2):
        return (beg, body, RO) if m2 == body else None

    def left_only(m, m2):
        return (beg, beg, LCK) if m == beg else (m, beg, LO)

    def right_only(m, m2):
        return (beg, beg, LCK) if m2 == beg else (beg, m2, RO)

    def moves(p):
        n, n2, tg = p
        if tg == LCK and n == n2 == beg:
            return [Move("J", conj(Neg(lam), Neg(rho)), enter), Move("J", TRUE, leave),
                    Move("L", lam, enter_left), Move("R", rho, enter_right)]
        if tg == LCK and n == n2:
            return [Move("J", TRUE, diag)]
        if tg == LO and n2 == beg and n in inside:
            return [Move("L", TRUE, left_only)]
        if tg == RO and n == beg and n2 in inside:
            return [Move("R", TRUE, right_only)]
        return []

    ctrl = [(n, n2, t) for n in a.ctrl for n2 in b.ctrl for t in TAGS]
    return Product(a, b, spec, ctrl, (a.init, b.init, LCK), (a.fin, b.fin, LCK), moves)


# ---------------------------------------------------------------------------
# Projections


def destutter(xs: Sequence) -> list:
    out = []
    for x in xs:
        if not out or out[-1] != x:
            out.append(x)
    return out


def project_left(tr: Sequence) -> list:
    return destutter([(q[0], st[0]) for q, st in tr])


def project_right(tr: Sequence) -> list:
    return destutter([(q[1], st[1]) for q, st in tr])


# ---------------------------------------------------------------------------
# Bounded adequacy and relational satisfaction


def _initial_pairs(a: Automaton, b: Automaton, pre: Formula, dom: Domain,
                   inputs: Iterable[Key] | None):
    from .automaton import Automaton as _A
    both = _A([], None, None, True, (a.variables, b.variables), None, None)
    return both.initial_states(pre, dom, inputs)


def terminated_traces(a: Automaton, s: Store, max_len: int):
    """Terminated initial traces of at most ``max_len`` states, and whether any was cut."""
    out, cut = [], False
    stack = [[(a.init, s)]]
    while stack:
        tr = stack.pop()
        q = tr[-1]
        if q[0] == a.fin:
            out.append(tr)
            continue
        nxt = a.succ(*q)
        if not nxt:
            continue
        if len(tr) >= max_len:
            cut = True
            continue
        for r in reversed(nxt):
            stack.append(tr + [r])
    return out, cut


def cover(prod: Product, tau: Sequence, tau2: Sequence):
    """A product trace projecting exactly onto ``tau`` and ``tau2``, or None."""
    start = (prod.init, (tau[0][1], tau2[0][1]))
    if (prod.lt(prod.init), tau[0][1]) != tau[0] or (prod.rt(prod.init), tau2[0][1]) != tau2[0]:
        return None
    last = (len(tau) - 1, len(tau2) - 1)
    seen = set()
    stack = [(start, 0, 0, None)]
    parents = {}
    while stack:
        q, i, j, par = stack.pop()
        if (q, i, j) in seen:
            continue
        seen.add((q, i, j))
        parents[(q, i, j)] = par
        if (i, j) == last:
            path, node = [], (q, i, j)
            while node is not None:
                path.append(node[0])
                node = parents[node]
            return path[::-1]
        for r in prod.succ(*q):
            lq, rq = (prod.lt(r[0]), r[1][0]), (prod.rt(r[0]), r[1][1])
            i2 = i if lq == tau[i] else (i + 1 if i + 1 < len(tau) and lq == tau[i + 1] else None)
            j2 = j if rq == tau2[j] else (j + 1 if j + 1 < len(tau2) and rq == tau2[j + 1] else None)
            if i2 is None or j2 is None:
                continue
            stack.append((r, i2, j2, (q, i, j)))
    return None


def check_adequacy(prod: Product, pre: Formula, dom: Domain = DEFAULT_DOMAIN,
                   max_len: int = 200, inputs: Iterable[Key] | None = None) -> Verdict:
    """Bounded ``pre``-adequacy: every pair of terminated initial traces (each of at
    most ``max_len`` states) from related stores is covered by a product trace."""
    a, b = prod.left_aut, prod.right_aut
    bounds = {"domain": dom, "max-len": max_len}
    cut_any = False
    cache_a, cache_b = {}, {}
    for s, t in _initial_pairs(a, b, pre, dom, inputs):
        if s not in cache_a:
            cache_a[s] = terminated_traces(a, s, max_len)
        if t not in cache_b:
            cache_b[t] = terminated_traces(b, t, max_len)
        (ts, cut1), (ts2, cut2) = cache_a[s], cache_b[t]
        cut_any |= cut1 or cut2
        for tau in ts:
            for tau2 in ts2:
                if cover(prod, tau, tau2) is None:
                    return Verdict(FAILS, (tau, tau2), "uncovered pair of terminated traces",
                                   bounds)
    if cut_any:
        return Verdict(INCONCLUSIVE, None, "some trace exceeded the length bound", bounds)
    return Verdict(HOLDS, None, "adequate on bounds", bounds)


def final_stores(a: Automaton, s: Store, max_steps: int):
    parent, exhausted = explore(a, s, max_steps)
    return [q[1] for q in parent if q[0] == a.fin], exhausted


def rel_satisfies_bounded(a: Automaton, b: Automaton, pre: Formula, post: Formula,
                          dom: Domain = DEFAULT_DOMAIN, max_steps: int = 10000,
                          inputs: Iterable[Key] | None = None) -> Verdict:
    """``a|b`` satisfies ``<pre><post>`` on all bounded runs from related ``dom`` stores."""
    bounds = {"domain": dom, "max-steps": max_steps}
    cache_a, cache_b = {}, {}
    hit = False
    for s, t in _initial_pairs(a, b, pre, dom, inputs):
        if s not in cache_a:
            cache_a[s] = final_stores(a, s, max_steps)
        if t not in cache_b:
            cache_b[t] = final_stores(b, t, max_steps)
        (fs, e1), (ft, e2) = cache_a[s], cache_b[t]
        hit |= e1 or e2
        for u in fs:
            for v in ft:
                if not holds_r(post, u, v):
                    return Verdict(FAILS, ((s, t), (u, v)),
                                   "related initial stores reach finals outside the postcondition",
                                   bounds)
    if hit:
        return Verdict(INCONCLUSIVE, None, "step budget exhausted", bounds)
    return Verdict(HOLDS, None, "", bounds)


def parse_kind(text: str, a: Automaton, b: Automaton, lam: Formula = TRUE,
               rho: Formula = TRUE) -> ProductSpec:
    """Read a ``--kind`` argument: ``seq``, ``lckctl``, ``caloop:BEG``,
    ``sameexcept:BEG,END`` (holes are the subcommands of each program spanning
    BEG up to END)."""
    name, _, arg = text.partition(":")
    if name == "caloop":
        return ProductSpec("caloop", beg=int(arg), lam=lam, rho=rho)
    if name == "sameexcept":
        beg, end = (int(x) for x in arg.split(","))
        return ProductSpec("sameexcept", b=hole(a.program.body, beg, end, a.program.fin),
                           b2=hole(b.program.body, beg, end, b.program.fin), beg=beg, end=end)
    if arg:
        raise ValueError(f"product kind {name!r} takes no argument")
    return ProductSpec(name)


def hole(c: Command, beg: int, end: int, fin: int) -> Command:
    """The subcommand of ``c`` entered at ``beg`` and left towards ``end``.

    Among the subcommands starting at ``beg`` this is the longest one that
    exits to ``end``.
    """
    from .lang import elab, subcommands
    found = None
    for d in subcommands(c):
        if lab(d) == beg and elab(d, c, fin) == end:
            if found is None or len(labs(d)) > len(labs(found)):
                found = d
    if found is None:
        raise ProductError(f"no subcommand runs from {beg} to {end}")
    return found
