"""
Randomized checks of the supporting inequalities.

The phase-window check compares the sampled Lipschitz ratio of
``exp(i Im z)`` with the quoted constant sqrt(2).  Sampling approaches 1
from below, which is the sharp constant, so that check reports a miss.  The
quoted value is still a valid upper bound, which the declared-bound check
confirms.
"""

from __future__ import annotations

from elliptic_picard import Nonlinearity, sample_lipschitz
from elliptic_picard.verify import run_lemma_suite

for r in run_lemma_suite(seed=0, trials=300):
    status = "ok " if r["pass"] else "MISS"
    print(f"{status} {r['check_name']:34s} trials={r['trials']:6d} max violation={r['max_violation']:.2e}")

print()
for n in (100, 1_000, 10_000, 100_000):
    print(f"phase(1) sampled constant with {n:6d} pairs: {sample_lipschitz(Nonlinearity.phase(1.0), n, 10.0):.6f}")
