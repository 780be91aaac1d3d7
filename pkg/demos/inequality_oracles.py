#!/usr/bin/env python3
# Sampled checks of the density inequalities used by the decay estimates.
#
# Usage:
#   python demos/inequality_oracles.py [samples]
#
# Each report gives the smallest sampled ratio of the two sides over a
# deterministic sample of [0, 2]^2 and the state pair where it occurs.
import sys

from dampedeuler import inequalities as iq
from dampedeuler.params import derive_gas_model

samples = int(sys.argv[1]) if len(sys.argv) > 1 else 10 ** 5

for gamma in (1.2, 1.5, 2.0, 3.0):
    model = derive_gas_model(gamma, 0.0)
    reports = [iq.check_lemma31(model, samples=samples), *iq.check_lemma32(model, samples=samples)]
    if gamma < 2.0:
        reports += list(iq.check_lemma33(model, samples=samples))
    print(f"gamma={gamma}")
    for r in reports:
        target = "-" if r.target_constant is None else f"{r.target_constant:.5f}"
        print(f"    {r.lemma_id:16s} inf={r.sampled_infimum:10.5f} target={target:>8s} "
              f"at (rho, rho_bar)=({r.witness[0]:.3g}, {r.witness[1]:.3g}) "
              f"{'PASS' if r.passed else 'FAIL'}")

# The pressure bound written with exponent gamma degenerates at the diagonal
model = derive_gas_model(1.5, 0.0)
_, om2 = iq.check_lemma33(model, samples=samples)
print(f"\nexponent-gamma form of the Omega2 bound: sampled infimum "
      f"{om2.extra['literal_exponent_infimum']:.3e} (tends to 0 near rho = rho_bar)")
