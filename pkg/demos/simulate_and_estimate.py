"""
From a graph to an effect estimate
==================================

Simulate the two-confounder model many times, estimate the effect with
each minimal adjustment set, and compare the spread with the large-sample
standard error.
"""

from pathlib import Path

import numpy as np

from confsel.adjustment import enumerate_minimal_sufficient_sets
from confsel.cgio import read_cg
from confsel.sem import LinearSem, ate_standardization, exact_covariance, sample

doc = read_cg(Path(__file__).resolve().parent.parent / "graphs" / "gb.cg")
m = LinearSem.from_document(doc)
sets = enumerate_minimal_sufficient_sets(m.dag, {"X1", "X2"})
print("minimal sets:", [sorted(c) for c in sets])

sig = exact_covariance(m)
print("population covariance, order", sig.names)
print(np.round(sig.matrix, 3))

n, reps = 20_000, 50
for c in [*sets, frozenset()]:
    est = np.array([ate_standardization(sample(m, n, seed=r), c) for r in range(reps)])
    print(f"adjust {sorted(c)!s:10s} mean {est.mean():.4f}  sd {est.std(ddof=1):.4f}")
# adjusting for nothing leaves the back-door path A <- X1 -> X2 -> Y open
