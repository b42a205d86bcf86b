# LATE-TIME AMPLITUDE OF THE s OCCUPATIONS vs LOSS RATE
#
# With the p-shell loss written per configuration, the surviving s-shell
# Rabi oscillation settles to an amplitude A(Gamma~) that interpolates
# between 1/4 (slow feed, in-phase filling) and 1/2 (projective limit).
# The reduced 8-component system at beta = 0 is solved exactly through its
# eigendecomposition, so this scan is cheap at any rate.

import numpy as np

from qdlab import DephasingParams, analytic_beta0, asymptotic_amplitude, measure_amplitude

# --- parameters
g = 0.5
grid = np.geomspace(0.05, 20.0, 15)   # Gamma~ = Gamma / 2g

period = np.pi / g
rows = []
print(f"{'Gamma~':>8} {'measured':>9} {'formula':>9} {'rel err':>9}")
for gamma_tilde in grid:
    Gamma = 2 * g * gamma_tilde
    t_min = 10.0 / Gamma + 50.0 * period
    times = np.arange(0.0, t_min + 3.0 * period + period / 400.0, period / 200.0)
    series = analytic_beta0(DephasingParams(g=g, Gamma=Gamma, beta=0.0), times)
    measured = measure_amplitude(series, "Xs0", t_min, period)
    formula = asymptotic_amplitude(gamma_tilde)
    rows.append((gamma_tilde, measured, formula))
    print(f"{gamma_tilde:>8.3f} {measured:>9.5f} {formula:>9.5f} {abs(measured / formula - 1):>9.2e}")

with open("amplitude_vs_rate.csv", "w") as fh:
    fh.write("gamma_tilde,amplitude,formula\n")
    for row in rows:
        fh.write(",".join(f"{x:.17g}" for x in row) + "\n")

print(f"\nlimits: A(0) = {asymptotic_amplitude(0.0):.4f}, "
      f"A(inf) -> {asymptotic_amplitude(1e9):.4f}")
print(f"{len(rows)} rates -> amplitude_vs_rate.csv")
