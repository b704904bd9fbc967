"""Compare alignment products of the factorial program with itself.

Run from the repository root: python3 demos/products.py
"""
from pathlib import Path

from alignverify.assertion import Domain, parse_formula
from alignverify.automaton import aut_of, cfg_of, format_trace, satisfies_bounded
from alignverify.lang import parse
from alignverify.product import ProductSpec, build_product, check_adequacy, rel_satisfies_bounded

CORPUS = Path(__file__).resolve().parents[1] / "corpus"
a = aut_of(parse((CORPUS / "c0.imp").read_text()))
pre, post = parse_formula("x = x'", "relational"), parse_formula("z = z'", "relational")
dom = Domain(0, 4)
inputs = [("L", "x"), ("R", "x")]

print("relational check on the programs themselves:",
      rel_satisfies_bounded(a, a, pre, post, dom, inputs=inputs))
for kind in ("seq", "lckctl", "elck", "olck"):
    p = build_product(a, a, ProductSpec(kind))
    g = cfg_of(p)
    reach = g.restrict(g.reachable())
    print(f"\n{kind}: {len(reach.edges)} reachable edges")
    print("  adequate for x = x':", check_adequacy(p, pre, dom, inputs=inputs).status)
    print("  product satisfies the spec:", satisfies_bounded(p, pre, post, dom, inputs=inputs).status)

# running the loops in lockstep only cannot pair runs of different lengths
olck = build_product(a, a, ProductSpec("olck"))
v = check_adequacy(olck, parse_formula("x = 2 && x' = 3", "relational"), dom)
print("\nlockstep-only adequacy for x = 2 against x' = 3:", v.status)
tau, tau2 = v.witness
print("  uncovered left trace: ", format_trace(tau))
print("  uncovered right trace:", format_trace(tau2))
