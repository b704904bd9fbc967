"""Walk through a single program: labels, control flow, an annotation and its proof.

Run from the repository root: python3 demos/factorial_floyd.py
"""
from pathlib import Path

from alignverify.annotation import check_vcs, gen_vcs, parse_annotation
from alignverify.assertion import Domain
from alignverify.automaton import aut_of, cfg_of, segments
from alignverify.extract import audit, extract_floyd, family_floyd
from alignverify.lang import format_program, parse
from alignverify.logic import check_derivation, sem_judg_bounded

CORPUS = Path(__file__).resolve().parents[1] / "corpus"

p = parse((CORPUS / "c0.imp").read_text())
print("program, with labels filled in:")
print(format_program(p))

a = aut_of(p)
print("control-flow edges:", sorted(cfg_of(a).edges))
print("segments for cutpoints 1, 3, 6:", segments(a, {1, 3, 6}))

an = parse_annotation((CORPUS / "c0_floyd.ann").read_text(), "unary")
print("\nverification conditions:")
for vc in gen_vcs(a, an):
    print("  ", vc)
rep = check_vcs(a, an, dom=Domain(-8, 8))
print("annotation check:", rep.verdict)

d = extract_floyd(p, an, Domain(-8, 8))
print(f"\nextracted a derivation with {d.size()} nodes; root rule {d.rule}")
print("kernel:", check_derivation(d))
print("audit problems:", audit(d, family_floyd(p, an, Domain(-8, 8))) or "none")
print("semantic check of the conclusion:", sem_judg_bounded(d.conclusion, Domain(0, 6)))
