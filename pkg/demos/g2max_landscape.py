# MAXIMUM PHOTON AUTOCORRELATION OVER THE INITIAL-CONDITION WEDGE
#
# For a single-photon start, the maximum of g2(t) is swept over the wedge of
# admissible dot preparations, parametrized by the oscillation ability
# O = c_G + c_Xs and the charge C = f_h - f_e (balanced, I = 0).  The point:
# g2_max moves with O and is flat in C.  Charge only appears to matter if
# one walks the delta = 0 slice, where O and C are tied to each other.

import numpy as np

from qdlab import IntegratorConfig, SjcmParams, sweep_g2max
from qdlab.sjcm import grid_delta0_path, grid_fixed_o

# --- parameters
g = 0.5
d_c = 0.1            # charge step
o_values = (0.2, 0.5, 0.8)
periods = 20         # search horizon in Rabi periods

params = SjcmParams(g=g)
cfg = IntegratorConfig.rabi(g, periods=periods)

# --- fixed-O rows: g2_max must not move with C
print(f"{'O':>4} {'points':>7} {'g2_max mean':>12} {'spread over C':>14}")
rows = []
for o in o_values:
    points = sweep_g2max(grid_fixed_o(o, d_c), params, cfg)
    vals = np.array([p.g2_max for p in points])
    rows.extend(points)
    print(f"{o:>4.1f} {len(points):>7d} {vals.mean():>12.6f} {vals.max() - vals.min():>14.2e}")

# --- the delta = 0 slice, where C and O are locked together
path = sweep_g2max(grid_delta0_path(d_c), params, cfg)
rows.extend(path)
print("\ndelta = 0 slice (C and O no longer independent):")
print(f"{'C':>6} {'O':>6} {'g2_max':>9}")
for p in path[:: max(1, len(path) // 10)]:
    print(f"{p.C:>6.2f} {p.O:>6.2f} {p.g2_max:>9.4f}")

with open("g2max_landscape.csv", "w") as fh:
    fh.write("O,C,I,delta,g2_max\n")
    for p in rows:
        fh.write(f"{p.O:.17g},{p.C:.17g},{p.I:.17g},{p.delta:.17g},{p.g2_max:.17g}\n")
print(f"\n{len(rows)} sweep points -> g2max_landscape.csv")
