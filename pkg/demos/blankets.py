"""
Selecting confounders with Markov boundaries
============================================

X1 causes A, X2 causes Y, and X1 -> X2. Either covariate alone is a
sufficient adjustment set. Boundary-based rules find them with nothing
but conditional independence queries.
"""

import warnings
from pathlib import Path

from confsel.blanket import OUTCOME, TREATMENT, boundary_pointwise, combine, reduce_alternating
from confsel.cgio import read_cg
from confsel.dsep import DSepOracle
from confsel.sem import FisherZOracle, LinearSem, sample

doc = read_cg(Path(__file__).resolve().parent.parent / "graphs" / "gb.cg")
s = {"X1", "X2"}

# first with the graph as the oracle
o = DSepOracle(doc.dag)
for kind in (TREATMENT, OUTCOME):
    t = boundary_pointwise(o, kind, s)
    print(f"{kind:9s} boundary {sorted(t.boundary)}  tests={t.tests}")

# the intersection of the two boundaries loses both confounders
with warnings.catch_warnings(record=True) as caught:
    warnings.simplefilter("always")
    print("cap:", sorted(combine(o, "conjunctive", s)), "|", caught[0].message)
for rule in ("disjunctive", "ay", "ya"):
    print(f"{rule}:", sorted(combine(o, rule, s)))

# then from 20000 simulated rows and Fisher z tests
d = sample(LinearSem.from_document(doc), 20_000, seed=7)
fz = FisherZOracle(d, alpha=0.01)
print("from data, A first:", sorted(reduce_alternating(fz, "treatment_first", s)))
print("from data, Y first:", sorted(reduce_alternating(fz, "outcome_first", s)))
