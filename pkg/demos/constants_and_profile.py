#!/usr/bin/env python3
# Derived constants and the Barenblatt reference for a few gas models.
#
# Usage:
#   python demos/constants_and_profile.py
#
# Prints the constants of each model, then follows one reference profile in
# time: its support edge, peak density and mass, and the PME residual order
# under step refinement.
import numpy as np

from dampedeuler import barenblatt as bb
from dampedeuler.params import derive_gas_model, rate_table

for gamma, nu in [(2.0, 0.0), (1.5, 0.7), (3.0, 0.5)]:
    model = derive_gas_model(gamma, nu)
    table = rate_table(model)
    print(f"gamma={gamma} nu={nu}: kappa={model.kappa:.6f} lambda={model.lam:.6f} "
          f"C1={model.c1:.6f} C2={model.c2:.6f}")
    print(f"    k={table.k:.6f} mu={table.mu:.6f} phi={table.phi:.6f} "
          f"mu_star={table.mu_star:.6f} omega={table.omega:.6f} "
          f"({'first' if table.first_branch else 'second'} branch)")

# One reference profile in time
model = derive_gas_model(2.0, 0.0)
prof = bb.calibrate(model, 1.0)
print(f"\nreference profile, M=1: A0={prof.a0:.6f} B0={prof.b0:.6f}")
print(f"{'t':>8} {'edge':>10} {'rho(0,t)':>12} {'mass':>18}")
for t in [0.0, 1.0, 10.0, 100.0, 1e3, 1e4]:
    print(f"{t:8g} {float(bb.support_edge(prof, t)):10.4f} {float(bb.density(prof, 0.0, t)):12.6f} "
          f"{bb.mass_integral(prof, t):18.15f}")

# Second-order consistency with the time-weighted PME
hs = np.array([1e-2, 5e-3, 2.5e-3])
res = [bb.pme_residual(prof, h, 1.0) for h in hs]
order = np.polyfit(np.log(hs), np.log(res), 1)[0]
print(f"\nPME residual at t=1 for h={hs.tolist()}: {['%.3e' % r for r in res]} -> order {order:.4f}")
