#!/usr/bin/env python3
# Damped Euler from box data, compared with the Barenblatt reference.
#
# Usage:
#   python demos/decay_rates.py [cells] [end_time]
#
# Runs the finite-volume solver (defaults: 1000 cells, T=1000, about ten
# seconds), fits log-log slopes of the distances to the reference over the
# last decade and compares them with the proven rates.
import sys

import numpy as np

from dampedeuler import barenblatt as bb
from dampedeuler.params import derive_gas_model, rate_table
from dampedeuler.rates import compare_to_theory, distance_table, fit_slope, weighted_estimate_monitor
from dampedeuler.solver import Grid1D, SolverConfig, required_half_width, simulate

cells = int(sys.argv[1]) if len(sys.argv) > 1 else 1000
T = float(sys.argv[2]) if len(sys.argv) > 2 else 1e3

model = derive_gas_model(2.0, 0.0)
prof = bb.calibrate(model, 1.0)
grid = Grid1D.symmetric(required_half_width(prof, T), cells)
times = np.concatenate([[0.0], np.geomspace(1.0, T, 31)])
config = SolverConfig(end_time=T, output_times=times, initial_data="box")

snaps, diag = simulate(model, grid, config, 1.0)
print(f"{diag.steps} steps, mass drift {diag.max_mass_drift:.2e}, min rho {diag.min_rho:.2e}, "
      f"max |u|+rho^theta {max(diag.max_w, -diag.min_z):.6f} (C_inv {diag.c_inv:.6f})")

table = rate_table(model)
series = distance_table(model, prof, snaps)
print(f"\n{'t':>10} {'L1':>12} {'int eta*':>12}")
for i in range(0, len(times), 5):
    print(f"{times[i]:10.3g} {series['l1_density'].values[i]:12.4e} "
          f"{series['eta_star_integral'].values[i]:12.4e}")

window = (T / 10.0, T)
fits = [fit_slope(series[q], window) for q in series]
print(f"\nslopes on [{window[0]:g}, {window[1]:g}]")
for row in compare_to_theory(fits, table):
    print(f"    {row['quantity']:22s} {row['slope']:9.4f} +- {row['stderr']:.4f}  "
          f"rate {row['theory_rate']:8.4f}  {row['verdict']}")

for name, rep in weighted_estimate_monitor(table, series).items():
    print(f"weighted {name}: sup {rep['sup']:.4e}, final-decade growth "
          f"{rep['final_decade_growth']:.2e} -> {rep['verdict']}")
