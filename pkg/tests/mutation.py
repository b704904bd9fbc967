"""Random single-node mutations of derivations."""
import dataclasses
import random

from alignverify.assertion import Cmp, Neg, conj
from alignverify.lang import IntLit, Var
from alignverify.logic import RULES, Derivation, Judgment

# pairs of rule names whose schemas coincide, so swapping them is not a mutation
EQUIVALENT = [{"dSkip", "SkipSkip"}, {"AssSkip", "AssSkipAxiom-left"},
              {"SkipAss", "AssSkipAxiom-right"}]


def _alternatives(rule):
    same = next((g for g in EQUIVALENT if rule in g), {rule})
    return [r for r in RULES if r not in same]


def _poison(f, rng):
    if rng.random() < 0.5:
        return Neg(f)
    return conj(f, Cmp("=", Var("q"), IntLit(rng.randint(1, 5))))


def _mutate_node(d: Derivation, rng: random.Random) -> Derivation:
    ops = ["rule", "pre", "post"]
    if d.premises:
        ops.append("drop")
    if d.side:
        ops.append("side")
    op = rng.choice(ops)
    j = d.conclusion
    if op == "rule":
        return dataclasses.replace(d, rule=rng.choice(_alternatives(d.rule)))
    if op == "pre":
        return dataclasses.replace(d, conclusion=Judgment(j.cmd, _poison(j.pre, rng), j.post, j.cmd2))
    if op == "post":
        return dataclasses.replace(d, conclusion=Judgment(j.cmd, j.pre, _poison(j.post, rng), j.cmd2))
    if op == "drop":
        ps = list(d.premises)
        del ps[rng.randrange(len(ps))]
        return dataclasses.replace(d, premises=ps)
    side = list(d.side)
    i = rng.randrange(len(side))
    a, b = side[i]
    side[i] = (a, _poison(b, rng)) if rng.random() < 0.5 else (_poison(a, rng), b)
    return dataclasses.replace(d, side=side)


def _rebuild(d: Derivation, path, fn) -> Derivation:
    if not path:
        return fn(d)
    ps = list(d.premises)
    ps[path[0]] = _rebuild(ps[path[0]], path[1:], fn)
    return dataclasses.replace(d, premises=ps)


def mutate(d: Derivation, rng: random.Random):
    """Return (path, mutated derivation) for one random node of ``d``."""
    paths = [p for p, _ in d.nodes()]
    path = rng.choice(paths)
    return path, _rebuild(d, path, lambda n: _mutate_node(n, rng))
