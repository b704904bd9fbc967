"""Bounded model enumeration for formulas over an integer interval.

Satisfying assignments are built one variable at a time; each conjunct of the
(normalized) formula filters the table as soon as all its variables are bound,
so tightly constrained formulas never materialize the full cartesian space.
"""
from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

from .formula import (FALSE, LEFT, PLAIN, TRUE, And, Ext, Formula, Key, arity, free_keys,
                      holds_vec, normalize)

# rows per table chunk before the next column is multiplied in
CHUNK = int(os.environ.get("ALIGN_VERIFY_CHUNK", 1 << 20))


@dataclass(frozen=True)
class Domain:
    """Inclusive integer interval ``lo..hi`` that each variable ranges over."""

    lo: int = -8
    hi: int = 8

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"empty domain {self.lo}..{self.hi}")

    @property
    def size(self) -> int:
        return self.hi - self.lo + 1

    def values(self) -> np.ndarray:
        return np.arange(self.lo, self.hi + 1, dtype=np.int64)

    def __contains__(self, v: int) -> bool:
        return self.lo <= v <= self.hi

    def __iter__(self):
        return iter(range(self.lo, self.hi + 1))

    def __str__(self) -> str:
        return f"{self.lo}..{self.hi}"

    @classmethod
    def parse(cls, text: str) -> "Domain":
        lo, sep, hi = text.strip().partition("..")
        if not sep:
            raise ValueError(f"domain must look like lo..hi, got {text!r}")
        return cls(int(lo), int(hi))


DEFAULT_DOMAIN = Domain(-8, 8)


class Table:
    """A batch of rows: one int64 column per bound key."""

    __slots__ = ("cols", "n")

    def __init__(self, cols: dict[Key, np.ndarray], n: int):
        self.cols = cols
        self.n = n

    def filter(self, mask: np.ndarray) -> "Table":
        return Table({k: c[mask] for k, c in self.cols.items()}, int(mask.sum()))

    def slice(self, a: int, b: int) -> "Table":
        return Table({k: c[a:b] for k, c in self.cols.items()}, min(b, self.n) - a)

    def rows(self, keys: Iterable[Key] | None = None) -> Iterator[dict[Key, int]]:
        keys = list(self.cols) if keys is None else list(keys)
        data = [self.cols[k].tolist() if k in self.cols else [0] * self.n for k in keys]
        for vals in zip(*data):
            yield dict(zip(keys, vals))


def _conjuncts(f: Formula) -> tuple[Formula, ...]:
    f = normalize(f)
    return f.args if isinstance(f, And) else (f,)


def models(f: Formula, dom: Domain = DEFAULT_DOMAIN, keys: Iterable[Key] = (),
           chunk: int = CHUNK) -> Iterator[Table]:
    """Yield batches of all assignments over ``keys`` ∪ free vars of ``f`` satisfying ``f``.

    Variables range over ``dom`` except those fixed by an extensional conjunct,
    which range over that set's rows (possibly outside ``dom``).
    """
    parts = _conjuncts(f)
    if FALSE in parts:
        return
    all_keys = sorted(set(keys) | free_keys(f))
    seeds = [p for p in parts if isinstance(p, Ext)]
    table = Table({}, 1)
    bound: list[Key] = []
    if seeds:
        seed = max(seeds, key=lambda e: (len(e.keys), -len(e.rows)))
        parts = tuple(p for p in parts if p is not seed)
        rows = sorted(seed.rows)
        arr = np.array(rows, dtype=np.int64).reshape(len(rows), len(seed.keys))
        table = Table({k: arr[:, i].copy() for i, k in enumerate(seed.keys)}, len(rows))
        bound = list(seed.keys)
        if table.n == 0:
            return
    rest = [k for k in all_keys if k not in bound]
    order = _order(rest, parts, set(bound))
    pos = {k: i for i, k in enumerate(order)}
    ready: list[list[Formula]] = [[] for _ in range(len(order) + 1)]
    for p in parts:
        ks = [pos[k] + 1 for k in free_keys(p) if k in pos]
        ready[max(ks, default=0)].append(p)
    for p in ready[0]:
        table = table.filter(holds_vec(p, table.cols, table.n))
    if table.n == 0:
        return
    yield from _extend(table, order, 0, ready, dom.values(), chunk)


def _order(keys: list[Key], parts: Iterable[Formula], bound: set[Key]) -> list[Key]:
    """Greedy variable order: bind first the variables that complete most conjuncts."""
    pending = [set(free_keys(p)) - bound for p in parts]
    left = list(keys)
    out: list[Key] = []
    while left:
        def score(k):
            done = sum(1 for s in pending if s and s <= {k})
            touch = sum(1 for s in pending if k in s)
            return (-done, -touch, k)
        k = min(left, key=score)
        out.append(k)
        left.remove(k)
        for s in pending:
            s.discard(k)
    return out


def _extend(table: Table, order: list[Key], i: int, ready, values: np.ndarray,
            chunk: int) -> Iterator[Table]:
    if i == len(order):
        yield table
        return
    d = len(values)
    step = max(1, chunk // d)
    for a in range(0, table.n, step):
        part = table.slice(a, a + step) if table.n > step else table
        n = part.n * d
        cols = {k: np.repeat(c, d) for k, c in part.cols.items()}
        cols[order[i]] = np.tile(values, part.n)
        t = Table(cols, n)
        for p in ready[i + 1]:
            t = t.filter(holds_vec(p, t.cols, t.n))
            if t.n == 0:
                break
        if t.n:
            yield from _extend(t, order, i + 1, ready, values, chunk)


def count_models(f: Formula, dom: Domain = DEFAULT_DOMAIN, keys: Iterable[Key] = ()) -> int:
    return sum(t.n for t in models(f, dom, keys))


def is_satisfiable(f: Formula, dom: Domain = DEFAULT_DOMAIN) -> bool:
    for _ in models(f, dom):
        return True
    return False


@dataclass
class Witness:
    """A counterexample assignment, split into left/right (or plain) stores."""

    values: dict[Key, int]

    @property
    def relational(self) -> bool:
        return any(k[0] != PLAIN for k in self.values)

    def stores(self):
        from ..semantics import Store
        if self.relational:
            s = Store({k[1]: v for k, v in self.values.items() if k[0] == LEFT})
            t = Store({k[1]: v for k, v in self.values.items() if k[0] != LEFT})
            return s, t
        return Store({k[1]: v for k, v in self.values.items()})

    def __str__(self) -> str:
        if self.relational:
            s, t = self.stores()
            return f"left: {s.format() or '-'} | right: {t.format() or '-'}"
        return self.stores().format() or "(all zero)"


@dataclass
class Implication:
    holds: bool
    witness: Witness | None = None
    domain: Domain = DEFAULT_DOMAIN

    def __bool__(self) -> bool:
        return self.holds


def implies_bounded(f: Formula, g: Formula, dom: Domain = DEFAULT_DOMAIN,
                    keys: Iterable[Key] = ()) -> Implication:
    """Decide ``f ⇒ g`` over every assignment in ``dom``; report a witness if not."""
    af, ag = arity(f), arity(g)
    if af and ag and af != ag:
        raise ValueError(f"implication between a {af} and a {ag} formula")
    ng = normalize(g)
    needed = sorted(set(keys) | free_keys(ng) | free_keys(f))
    for t in models(f, dom, needed):
        bad = ~holds_vec(ng, t.cols, t.n)
        if bad.any():
            i = int(np.argmax(bad))
            return Implication(False, Witness({k: int(t.cols[k][i]) for k in needed}), dom)
    return Implication(True, None, dom)


def valid_bounded(f: Formula, dom: Domain = DEFAULT_DOMAIN) -> Implication:
    return implies_bounded(TRUE, f, dom)

