"""Stores, the small-step transition relation on configurations, and bounded runs."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, NamedTuple

from .lang import (Assign, Choice, Command, If, Program, Seq, Skip, While, evaluate)


class Store(Mapping[str, int]):
    """An immutable variable store; unmentioned variables read as 0.

    Two stores are equal when they agree on every variable, so an explicit
    ``x=0`` binding is the same store as no binding for ``x``.
    """

    __slots__ = ("_d", "_key")

    def __init__(self, bindings: Mapping[str, int] | Iterable[tuple[str, int]] = (), **kw: int):
        d = dict(bindings)
        d.update(kw)
        self._d = {k: int(v) for k, v in d.items()}
        self._key = frozenset((k, v) for k, v in self._d.items() if v != 0)

    def __getitem__(self, name: str) -> int:
        return self._d.get(name, 0)

    def __contains__(self, name: object) -> bool:
        return name in self._d

    def __iter__(self) -> Iterator[str]:
        return iter(self._d)

    def __len__(self) -> int:
        return len(self._d)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Store):
            return self._key == other._key
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self._key)

    def __repr__(self) -> str:
        return "Store(" + ", ".join(f"{k}={v}" for k, v in sorted(self._d.items())) + ")"

    def update(self, name: str, value: int) -> "Store":
        d = dict(self._d)
        d[name] = value
        return Store(d)

    def restrict(self, names: Iterable[str]) -> "Store":
        return Store({n: self[n] for n in names})

    def format(self, names: Iterable[str] | None = None) -> str:
        names = sorted(self._d) if names is None else list(names)
        return ", ".join(f"{n}={self[n]}" for n in names)


class Config(NamedTuple):
    cmd: Command
    store: Store


def step(cmd: Command, s: Store) -> list[Config]:
    """Successor configurations of ``<cmd, s>``; empty exactly for a lone skip."""
    if isinstance(cmd, Skip):
        return []
    if isinstance(cmd, Assign):
        return [Config(Skip(-cmd.label), s.update(cmd.var, evaluate(cmd.expr, s)))]
    if isinstance(cmd, Seq):
        if isinstance(cmd.first, Skip):
            return [Config(cmd.second, s)]
        return [Config(Seq(d, cmd.second), t) for d, t in step(cmd.first, s)]
    if isinstance(cmd, Choice):
        return [Config(cmd.left, s), Config(cmd.right, s)]
    if isinstance(cmd, If):
        return [Config(cmd.then if evaluate(cmd.cond, s) != 0 else cmd.orelse, s)]
    if isinstance(cmd, While):
        if evaluate(cmd.cond, s) != 0:
            return [Config(Seq(cmd.body, cmd), s)]
        return [Config(Skip(-cmd.label), s)]
    raise TypeError(f"not a command: {cmd!r}")


@dataclass
class RunOutcome:
    """Result of exhaustively running a command from one store.

    ``finals`` maps each terminal store to the fewest steps that reach it.
    ``diverged`` is set when some path was still running after ``max_steps``.
    """

    finals: dict[Store, int] = field(default_factory=dict)
    diverged: bool = False
    max_steps: int = 0

    @property
    def status(self) -> str:
        if not self.diverged:
            return "terminated"
        return "diverged" if not self.finals else "partial"

    @property
    def stores(self) -> list[Store]:
        return list(self.finals)


def run_command(cmd: Command, s0: Store, max_steps: int) -> RunOutcome:
    """Breadth-first exploration of every path from ``<cmd, s0>``."""
    out = RunOutcome(max_steps=max_steps)
    frontier = [Config(cmd, s0)]
    steps = 0
    while frontier:
        nxt: list[Config] = []
        for k in frontier:
            if isinstance(k.cmd, Skip):
                out.finals.setdefault(k.store, steps)
            else:
                nxt.extend(step(*k))
        if not nxt:
            break
        if steps == max_steps:
            out.diverged = True
            break
        steps += 1
        frontier = list(dict.fromkeys(nxt)) if len(nxt) > 1 else nxt
    return out


def run(p: Program, s0: Store, max_steps: int) -> RunOutcome:
    """Run ``p.body; skip^fin`` from ``s0``."""
    return run_command(Seq(p.body, Skip(p.fin)), s0, max_steps)


def command_traces(cmd: Command, s0: Store, max_len: int) -> Iterator[list[Config]]:
    """Every maximal trace from ``<cmd, s0>`` of at most ``max_len`` configurations."""
    stack: list[list[Config]] = [[Config(cmd, s0)]]
    while stack:
        tr = stack.pop()
        succ = step(*tr[-1]) if len(tr) < max_len else []
        if not succ:
            yield tr
            continue
        for k in reversed(succ):
            stack.append(tr + [k])
