"""Floyd automata: program automata, control-flow graphs, cutsets, segments and traces.

An automaton exposes two views of its transitions.  ``succ`` is the concrete
relation on states (control point, store).  ``edges`` lists guarded commands
``(src, dst, guard, update)`` describing the same relation symbolically; the
rendered verification conditions are read off these.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable, Hashable, Iterable, Iterator, Sequence

from .assertion import (DEFAULT_DOMAIN, PLAIN, TRUE, Domain, Formula, Key, Neg,
                        Truth, conj, holds_pair, is_satisfiable, models)
from .assertion.formula import LEFT, RIGHT, normalize
from .lang import (Assign, Choice, Command, Expr, If, Program, Seq, Skip, While,
                   command_vars, fsuc, lab, labs, program_ok, sub)
from .semantics import Config, Store, command_traces, step
from .verdict import FAILS, HOLDS, INCONCLUSIVE, Verdict

Ctrl = Hashable
State = Any  # a Store, or a (Store, Store) pair for products


@dataclass(frozen=True)
class Edge:
    """A guarded simultaneous assignment between two control points."""

    src: Ctrl
    dst: Ctrl
    guard: Formula
    update: tuple[tuple[Key, Expr], ...] = ()
    kind: str = ""  # e.g. "assign", "then", "while-exit", "lo", "joint"


class InvariantViolation(AssertionError):
    pass


class Automaton:
    """A control set with initial and final points and a transition relation on states."""

    # turned on by the test-suite to assert finality and non-stuttering on every step
    check_invariants = False

    def __init__(self, ctrl: Sequence[Ctrl], init: Ctrl, fin: Ctrl, pair: bool,
                 variables, succ: Callable[[Ctrl, State], list], edges: Callable[[Ctrl], list],
                 name: str = ""):
        self.ctrl = tuple(ctrl)
        self.init = init
        self.fin = fin
        self.pair = pair
        # unary: tuple of names; pair: (left names, right names)
        self.variables = variables
        self._succ = succ
        self._edges = edges
        self._edge_cache: dict[Ctrl, list[Edge]] = {}
        self.name = name

    def succ(self, n: Ctrl, s: State) -> list[tuple[Ctrl, State]]:
        out = self._succ(n, s)
        if self.check_invariants:
            if n == self.fin and out:
                raise InvariantViolation(f"final point {n} has a successor")
            if any(m == n for m, _ in out):
                raise InvariantViolation(f"stuttering step at {n}")
        return out

    def edges(self, n: Ctrl) -> list[Edge]:
        if n not in self._edge_cache:
            self._edge_cache[n] = self._edges(n)
        return self._edge_cache[n]

    def all_edges(self) -> Iterator[Edge]:
        for n in self.ctrl:
            yield from self.edges(n)

    @property
    def footprint(self) -> tuple[Key, ...]:
        if self.pair:
            left, right = self.variables
            return tuple([(LEFT, x) for x in left] + [(RIGHT, x) for x in right])
        return tuple((PLAIN, x) for x in self.variables)

    def state_of_row(self, row: dict[Key, int]) -> State:
        if self.pair:
            return (Store({k[1]: v for k, v in row.items() if k[0] == LEFT}),
                    Store({k[1]: v for k, v in row.items() if k[0] == RIGHT}))
        return Store({k[1]: v for k, v in row.items()})

    def holds(self, f: Formula, s: State) -> bool:
        return holds_pair(f, s)

    def initial_states(self, pre: Formula, dom: Domain = DEFAULT_DOMAIN,
                       inputs: Iterable[Key] | None = None) -> Iterator[State]:
        """States satisfying ``pre`` with the input variables ranging over ``dom``.

        Footprint variables outside ``inputs`` start at 0.
        """
        keys = self.footprint if inputs is None else tuple(inputs)
        fixed = [k for k in self.footprint if k not in set(keys)]
        from .assertion.formula import subst
        from .lang import IntLit
        p = subst(pre, {k: IntLit(0) for k in fixed})
        for t in models(p, dom, keys):
            for row in t.rows(keys):
                yield self.state_of_row(row)

    def __repr__(self) -> str:
        return f"Automaton({self.name or '?'}, {len(self.ctrl)} points)"


# ---------------------------------------------------------------------------
# Program automata


def aut_of(p: Program) -> Automaton:
    """The automaton of ``p.body; skip^fin``.

    A step of the command at ``n`` that lands on a non-negative label goes
    there; one that finishes the command (a negatively labelled skip) goes to
    the following successor of ``n``; a skip at ``n`` moves silently to it.
    """
    if not program_ok(p):
        raise ValueError("program labels are not unique and non-negative, or fin is in use")
    c, fin = p.body, p.fin
    table = {n: (sub(n, c), fsuc(n, c, fin)) for n in labs(c)}

    def succ(n: int, s: Store) -> list[tuple[int, Store]]:
        if n == fin:
            return []
        b, after = table[n]
        if isinstance(b, Skip):
            return [(after, s)]
        out = []
        for d, t in step(b, s):
            # assignment and loop exit finish the command; compare by shape, not by sign,
            # because a command labelled 0 finishes with skip^-0 = skip^0
            finished = isinstance(d, Skip) and isinstance(b, (Assign, While)) \
                and d.label == -b.label
            m = after if finished or lab(d) < 0 else lab(d)
            out.append((m, t))
        return out

    def edges(n: int) -> list[Edge]:
        if n == fin:
            return []
        b, after = table[n]
        if isinstance(b, Skip):
            return [Edge(n, after, TRUE, (), "skip")]
        if isinstance(b, Assign):
            return [Edge(n, after, TRUE, (((PLAIN, b.var), b.expr),), "assign")]
        if isinstance(b, If):
            return [Edge(n, lab(b.then), Truth(b.cond), (), "then"),
                    Edge(n, lab(b.orelse), Neg(Truth(b.cond)), (), "else")]
        if isinstance(b, While):
            return [Edge(n, lab(b.body), Truth(b.cond), (), "while-enter"),
                    Edge(n, after, Neg(Truth(b.cond)), (), "while-exit")]
        if isinstance(b, Choice):
            return [Edge(n, lab(b.left), TRUE, (), "choice-left"),
                    Edge(n, lab(b.right), TRUE, (), "choice-right")]
        raise TypeError(b)

    ctrl = sorted(labs(c)) + [fin]
    a = Automaton(ctrl, lab(c), fin, False, tuple(sorted(command_vars(c))), succ, edges)
    a.program = p
    return a


# ---------------------------------------------------------------------------
# Control-flow graphs


@dataclass
class CFG:
    vertices: tuple[Ctrl, ...]
    root: Ctrl
    edges: frozenset[tuple[Ctrl, Ctrl]]

    def successors(self, n: Ctrl) -> list[Ctrl]:
        return sorted((m for a, m in self.edges if a == n), key=_order_key)

    def reachable(self) -> set[Ctrl]:
        seen = {self.root}
        todo = [self.root]
        while todo:
            n = todo.pop()
            for m in self.successors(n):
                if m not in seen:
                    seen.add(m)
                    todo.append(m)
        return seen

    def restrict(self, keep: Iterable[Ctrl]) -> "CFG":
        keep = set(keep)
        return CFG(tuple(v for v in self.vertices if v in keep), self.root,
                   frozenset((a, b) for a, b in self.edges if a in keep and b in keep))


def _order_key(n: Ctrl):
    return (0, n, "") if isinstance(n, int) else (1, 0, repr(n))


def cfg_of(a: Automaton, dom: Domain = DEFAULT_DOMAIN) -> CFG:
    """CFG of ``a``.  Program automata use the syntactic successor table; for
    products an edge is present when its guard is satisfiable over ``dom``."""
    es = set()
    program = not a.pair
    for e in a.all_edges():
        if (e.src, e.dst) in es:
            continue
        if program or _satisfiable(e.guard, dom):
            es.add((e.src, e.dst))
    return CFG(a.ctrl, a.init, frozenset(es))


_SAT_CACHE: dict[tuple[Formula, Domain], bool] = {}


def _satisfiable(f: Formula, dom: Domain) -> bool:
    key = (normalize(f), dom)
    if key not in _SAT_CACHE:
        _SAT_CACHE[key] = is_satisfiable(key[0], dom)
    return _SAT_CACHE[key]


def to_dot(g: CFG, name: str = "cfg") -> str:
    def node(n):
        if isinstance(n, tuple):
            return '"' + ",".join(map(str, n)) + '"'
        return str(n) if isinstance(n, int) and n >= 0 else f'"{n}"'

    lines = [f"digraph {name} {{", f"  {node(g.root)} [shape=doublecircle];"]
    for a, b in sorted(g.edges, key=lambda e: (_order_key(e[0]), _order_key(e[1]))):
        lines.append(f"  {node(a)} -> {node(b)};")
    lines.append("}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Cutsets and segments


class CutsetError(ValueError):
    def __init__(self, msg: str, cycle: list | None = None):
        super().__init__(msg)
        self.cycle = cycle


def uncut_cycle(g: CFG, points: Iterable[Ctrl]) -> list | None:
    """A cycle of ``g`` avoiding ``points``, or None."""
    cut = set(points)
    rest = [v for v in g.vertices if v not in cut]
    color: dict[Ctrl, int] = {}
    succ = {v: [m for m in g.successors(v) if m not in cut] for v in rest}
    for start in sorted(rest, key=_order_key):
        if start in color:
            continue
        stack = [(start, iter(succ[start]))]
        path = [start]
        color[start] = 1
        while stack:
            v, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                color[v] = 2
                stack.pop()
                path.pop()
            elif color.get(nxt) == 1:
                cyc = path[path.index(nxt):]
                i = min(range(len(cyc)), key=lambda k: _order_key(cyc[k]))
                cyc = cyc[i:] + cyc[:i]
                return cyc + [cyc[0]]
            elif nxt not in color:
                color[nxt] = 1
                path.append(nxt)
                stack.append((nxt, iter(succ[nxt])))
    return None


def check_cutset(g: CFG, points: Iterable[Ctrl], fin: Ctrl) -> None:
    points = set(points)
    if g.root not in points:
        raise CutsetError(f"the initial point {g.root} must be a cutpoint")
    if fin not in points:
        raise CutsetError(f"the final point {fin} must be a cutpoint")
    cyc = uncut_cycle(g, points)
    if cyc is not None:
        raise CutsetError("cycle without a cutpoint: " + " -> ".join(map(str, cyc)), cyc)


def segments(a: Automaton, points: Iterable[Ctrl], g: CFG | None = None,
             dom: Domain = DEFAULT_DOMAIN) -> list[tuple[Ctrl, ...]]:
    """CFG paths of length > 1 between cutpoints with no interior cutpoint."""
    g = g or cfg_of(a, dom)
    points = set(points)
    check_cutset(g, points, a.fin)
    out: list[tuple[Ctrl, ...]] = []

    def walk(path):
        for m in g.successors(path[-1]):
            if m in points:
                out.append(tuple(path) + (m,))
            else:
                walk(path + [m])

    for k in sorted(points, key=_order_key):
        walk([k])
    return out


def seg_rel(a: Automaton, vs: Sequence[Ctrl], s: State) -> list[State]:
    """States reachable from ``(vs[0], s)`` along a trace whose control path is exactly ``vs``."""
    cur = [s]
    for n, m in zip(vs, vs[1:]):
        nxt = []
        for st in cur:
            for q, t in a.succ(n, st):
                if q == m and t not in nxt:
                    nxt.append(t)
        cur = nxt
        if not cur:
            break
    return cur


def seg_paths(a: Automaton, vs: Sequence[Ctrl]) -> list[tuple[Formula, dict[Key, Expr], list[Edge]]]:
    """Symbolic description of ``vs``: for each choice of edges along it, the path
    condition (over the start state) and the final values as expressions of the start state."""
    from .assertion.formula import _subst_expr, subst
    res = [(TRUE, {}, [])]
    for n, m in zip(vs, vs[1:]):
        nxt = []
        for guard, mapping, used in res:
            for e in a.edges(n):
                if e.dst != m:
                    continue
                g = conj(guard, subst(e.guard, mapping)) if mapping else conj(guard, e.guard)
                new = dict(mapping)
                for k, ex in e.update:
                    new[k] = _subst_expr(ex, mapping)
                nxt.append((g, new, used + [e]))
        res = nxt
    return res


# ---------------------------------------------------------------------------
# Traces and bounded satisfaction


def explore(a: Automaton, s0: State, max_steps: int, start: Ctrl | None = None):
    """Breadth-first search of the states reachable from ``(start, s0)``.

    Returns ``(parent, exhausted)`` where ``parent`` maps each visited state to
    its predecessor and ``exhausted`` tells whether some state at depth
    ``max_steps`` still had successors.
    """
    root = (a.init if start is None else start, s0)
    parent = {root: None}
    frontier = [root]
    depth = 0
    exhausted = False
    while frontier:
        nxt = []
        for q in frontier:
            for r in a.succ(*q):
                if r not in parent:
                    parent[r] = q
                    nxt.append(r)
        if nxt and depth == max_steps:
            exhausted = True
            break
        depth += 1
        frontier = nxt
    return parent, exhausted


def trace_to(parent: dict, q) -> list:
    out = []
    while q is not None:
        out.append(q)
        q = parent[q]
    return out[::-1]


def satisfies_bounded(a: Automaton, pre: Formula, post: Formula, dom: Domain = DEFAULT_DOMAIN,
                      max_steps: int = 10000, inputs: Iterable[Key] | None = None) -> Verdict:
    """Check ``{pre}{post}`` on all finite initial traces from ``pre``-states in ``dom``.

    Fails with a terminated trace ending outside ``post``; inconclusive when the
    step budget runs out somewhere (and nothing failed).
    """
    bounds = {"domain": dom, "max-steps": max_steps}
    budget_hit = False
    for s0 in a.initial_states(pre, dom, inputs):
        parent, exhausted = explore(a, s0, max_steps)
        budget_hit |= exhausted
        for q in parent:
            if q[0] == a.fin and not a.holds(post, q[1]):
                return Verdict(FAILS, trace_to(parent, q),
                               "terminated trace ends outside the postcondition", bounds)
    if budget_hit:
        return Verdict(INCONCLUSIVE, None, "step budget exhausted", bounds)
    return Verdict(HOLDS, None, "", bounds)


def format_trace(tr: Sequence) -> str:
    def st(s):
        if isinstance(s, tuple):
            return f"[{s[0].format()} | {s[1].format()}]"
        return f"[{s.format()}]"
    return " ; ".join(f"{q[0]}{st(q[1])}" for q in tr)


# ---------------------------------------------------------------------------
# Correspondence between command traces and automaton traces


def _administrative(prev: Command, cur: Command) -> bool:
    """The configuration right after an assignment or a loop exit."""
    hp, hc = _head(prev), _head(cur)
    return isinstance(hp, (Assign, While)) and isinstance(hc, Skip) and hc.label == -hp.label


def _head(c: Command) -> Command:
    while isinstance(c, Seq):
        c = c.first
    return c


def erase(tr: Sequence[Config]) -> list[tuple[int, Store]]:
    """Drop administrative configurations and read each remaining one as (label, store)."""
    out = []
    for i, k in enumerate(tr):
        if i and _administrative(tr[i - 1].cmd, k.cmd):
            continue
        out.append((lab(k.cmd), k.store))
    return out


def automaton_traces(a: Automaton, s0: State, max_len: int) -> Iterator[list]:
    stack = [[(a.init, s0)]]
    while stack:
        tr = stack.pop()
        nxt = a.succ(*tr[-1]) if len(tr) < max_len else []
        if not nxt:
            yield tr
            continue
        for q in reversed(nxt):
            stack.append(tr + [q])


def traces_correspond(p: Program, s0: Store, max_len: int) -> tuple[bool, str]:
    """Compare command traces of ``p.body; skip^fin`` with automaton traces from ``s0``.

    Administrative configurations are erased; remaining traces must match one
    to one in length, labels and stores.  Command traces are followed until
    their erased length reaches ``max_len``.
    """
    a = aut_of(p)
    cmd = Seq(p.body, Skip(p.fin))
    cmd_set = set()
    for tr in command_traces(cmd, s0, 4 * max_len + 2):
        e = erase(tr)[:max_len]
        cmd_set.add(tuple(e))
    aut_set = {tuple(t) for t in automaton_traces(a, s0, max_len)}
    # a command trace cut mid-way may erase to a strict prefix of an automaton trace
    if cmd_set == aut_set:
        return True, ""
    only_c = cmd_set - aut_set
    only_a = aut_set - cmd_set
    return False, f"{len(only_c)} command-only and {len(only_a)} automaton-only traces"


def step_correspondence(p: Program, starts: Iterable[Store], max_steps: int) -> tuple[bool, str]:
    """Check the one-step simulation underlying trace correspondence on every
    configuration reachable within ``max_steps`` from the given stores.

    For each non-administrative configuration ``<d; skip^fin, s>`` the erased
    successors (an administrative configuration is skipped past) must be exactly
    the automaton successors of ``(lab d, s)``.  Configurations shared between
    runs are checked once, at their smallest depth.
    """
    a = aut_of(p)
    cmd = Seq(p.body, Skip(p.fin))
    frontier = list(dict.fromkeys(Config(cmd, s) for s in starts))
    seen = set(frontier)
    depth = 0
    while frontier and depth <= max_steps:
        nxt = []
        for k in frontier:
            n = lab(k.cmd)
            got = []
            for k1 in step(*k):
                if _administrative(k.cmd, k1.cmd):
                    more = step(*k1)
                    if len(more) != 1:
                        return False, f"administrative configuration with {len(more)} successors"
                    k1 = more[0]
                got.append(k1)
            mine = sorted(((lab(k1.cmd), k1.store) for k1 in got), key=repr)
            theirs = sorted(a.succ(n, k.store), key=repr)
            if mine != theirs:
                return False, f"at label {n} from {k.store}: {mine} vs {theirs}"
            if not got and not (isinstance(k.cmd, Skip) and n == p.fin):
                return False, f"stuck command configuration at label {n}"
            for k1 in got:
                if k1 not in seen:
                    seen.add(k1)
                    nxt.append(k1)
        frontier = nxt
        depth += 1
    return True, f"{len(seen)} configurations"
