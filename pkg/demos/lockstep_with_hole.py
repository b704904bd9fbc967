"""Two programs that agree except inside one subcommand.

The shared context runs in lockstep; the differing pieces are run one after
the other and proved with the sequential rule.

Run from the repository root: python3 demos/lockstep_with_hole.py
"""
from pathlib import Path

from alignverify.annotation import parse_annotation
from alignverify.lang import format_command, parse
from alignverify.logic import check_derivation, sem_judg_bounded
from alignverify.extract import extract_lockstep_seq
from alignverify.product import hole

CORPUS = Path(__file__).resolve().parents[1] / "corpus"
left = parse((CORPUS / "sec6_left.imp").read_text())
right = parse((CORPUS / "sec6_right.imp").read_text())
b, b2 = hole(left.body, 2, 0, left.fin), hole(right.body, 2, 0, right.fin)
print("left hole: ", format_command(b))
print("right hole:", format_command(b2))

an = parse_annotation((CORPUS / "sec6.ann").read_text())
d = extract_lockstep_seq(left, right, b, b2, 2, 0, an)
print("rules used:", sorted(set(d.rules_used())))
print("kernel:", check_derivation(d))
print("conclusion:", d.conclusion)
print("semantic check:", sem_judg_bounded(d.conclusion))
