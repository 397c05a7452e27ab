"""
Causal closure
==============

Growing a vertex set until it contains every non-trivial common ancestor
of its members. Z2 only causes A and Z4 only causes S1, so both stay out.
"""

from pathlib import Path

from confsel.cgio import read_cg
from confsel.graph import causal_closure, nontrivial_common_ancestors, relevant_pretreatment
from confsel.testkit import closure_bruteforce

g = read_cg(Path(__file__).resolve().parent.parent / "graphs" / "gc.cg").dag

print("common ancestors of S1, S2:", sorted(nontrivial_common_ancestors(g, "S1", "S2")))
print("common ancestors of A, Y:  ", sorted(nontrivial_common_ancestors(g, "A", "Y")))

h = {"S1", "S2", "A", "Y"}
print("closure (fixpoint):      ", sorted(causal_closure(g, h)))
print("closure (all supersets): ", sorted(closure_bruteforce(g, h)))
print("relevant pre-treatment:  ", sorted(relevant_pretreatment(g, {"S1", "S2"})))
