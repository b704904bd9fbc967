"""A loop pair whose iterations only line up under conditions.

The left loop may idle on odd w, the right one when w' is not a multiple of
three. The conditional product takes extra one-sided steps in those cases.

Run from the repository root: python3 demos/conditional_loops.py
"""
import time
from pathlib import Path

from alignverify.annotation import check_vcs, parse_annotation
from alignverify.assertion import Domain, parse_formula
from alignverify.automaton import aut_of
from alignverify.extract import ExtractionError, extract_cawhile, extract_lockstep
from alignverify.lang import format_program, parse
from alignverify.logic import check_derivation, format_derivation, sem_judg_bounded
from alignverify.product import ProductSpec, build_product

CORPUS = Path(__file__).resolve().parents[1] / "corpus"


def read(name):
    return (CORPUS / name).read_text()


t0 = time.perf_counter()
c4, c5 = parse(read("c4.imp")), parse(read("c5.imp"))
print(format_program(c4))
print(format_program(c5))
lam = parse_formula(read("sec7_lam.frm").strip(), "relational")
rho = parse_formula(read("sec7_rho.frm").strip(), "relational")
an = parse_annotation(read("sec7.ann"))

p = build_product(aut_of(c4), aut_of(c5), ProductSpec("caloop", beg=4, lam=lam, rho=rho))
rep = check_vcs(p, an, "enum", Domain(-8, 8))
print(f"{len(rep.results)} VCs:", rep.verdict)
inputs = [("L", "x"), ("R", "x")]
print("reachability check:", check_vcs(p, an, "reach", Domain(4, 8), inputs=inputs).verdict)

d = extract_cawhile(c4, c5, 4, lam, rho, an)
print(f"derivation: {d.size()} nodes, kernel says {check_derivation(d)}")
print("conclusion:", d.conclusion)
print("semantic check:", sem_judg_bounded(d.conclusion, Domain(4, 8), inputs=inputs))
print("\nfirst lines of the derivation file:")
print("\n".join(format_derivation(d).splitlines()[:6]))

# plain lockstep cannot handle this pair
try:
    extract_lockstep(c4, c5, parse_annotation(read("c4c5_lockstep.ann")))
except ExtractionError as e:
    print("\nlockstep extraction refused:", e)
print(f"\ntotal {time.perf_counter() - t0:.2f}s")
