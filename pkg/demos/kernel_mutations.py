"""Perturb an accepted derivation one node at a time and watch the kernel object.

Run from the repository root: python3 demos/kernel_mutations.py
"""
import dataclasses
import random
from pathlib import Path

from alignverify.annotation import parse_annotation
from alignverify.assertion import Neg
from alignverify.extract import extract_lockstep
from alignverify.lang import parse
from alignverify.logic import Judgment, check_derivation

CORPUS = Path(__file__).resolve().parents[1] / "corpus"
c0 = parse((CORPUS / "c0.imp").read_text())
d = extract_lockstep(c0, c0, parse_annotation((CORPUS / "c0_lockstep.ann").read_text()))
print("original:", check_derivation(d))

rng = random.Random(1)
nodes = list(d.nodes())


def rebuild(node, path, fn):
    if not path:
        return fn(node)
    ps = list(node.premises)
    ps[path[0]] = rebuild(ps[path[0]], path[1:], fn)
    return dataclasses.replace(node, premises=ps)


for _ in range(5):
    path, n = rng.choice(nodes)
    j = n.conclusion
    bad = rebuild(d, path, lambda m: dataclasses.replace(
        m, conclusion=Judgment(j.cmd, j.pre, Neg(j.post), j.cmd2)))
    print(f"negate post at {path}:", check_derivation(bad))
