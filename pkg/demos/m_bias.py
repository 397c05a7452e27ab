"""
M-bias: when adjusting for a pre-treatment covariate hurts
==========================================================

A and Y share no common cause, but a measured covariate L sits between
two hidden causes, one of A and one of Y. Conditioning on L opens the path
A <- U1 -> L <- U2 -> Y.
"""

from pathlib import Path

from confsel.adjustment import criterion_disjunctive, criterion_pretreatment
from confsel.cgio import read_cg
from confsel.dsep import ignorability_oracle
from confsel.sem import LinearSem, ate_standardization, sample

doc = read_cg(Path(__file__).resolve().parent.parent / "graphs" / "ga.cg")
g = doc.dag
print(g)

# the empty set already blocks every back-door path, {L} does not
print("empty set sufficient:", ignorability_oracle(g, set()))
print("{L} sufficient:      ", ignorability_oracle(g, {"L"}))

# keeping every pre-treatment covariate picks L; the disjunctive cause rule drops it
print("pretreatment ->", sorted(criterion_pretreatment(g, {"L"}).output_c))
print("disjunctive  ->", sorted(criterion_disjunctive(g, {"L"}).output_c))

# the bias shows up in data: the true effect is 1
m = LinearSem.from_document(doc)
d = sample(m, 20_000, seed=1)
print(f"adjust {{}}:  {ate_standardization(d, []):.3f}")
print(f"adjust {{L}}: {ate_standardization(d, ['L']):.3f}")
