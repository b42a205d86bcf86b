# ONE LOSS PROCESS, TWO OPERATOR CONSTRUCTIONS
#
# The two-shell dot starts in the biexciton with an empty cavity; the p-shell
# pair is lost at rate Gamma while the s-shell pair Rabi-oscillates with the
# mode.  Writing the loss as the single pair operator h_p e_p or splitting it
# into its two configuration transitions changes exactly one cross term in
# the reduced equations of motion -- and with it the late-time amplitude of
# the s-shell occupations, although the p-shell decay itself is identical.

import numpy as np

from qdlab import (
    CONFIGURATION,
    SINGLE_PARTICLE,
    DephasingParams,
    IntegratorConfig,
    asymptotic_amplitude,
    evolve_dephasing,
    measure_amplitude,
)
from qdlab.cli import write_csv

# --- parameters
g = 0.5
gamma_tilde = 0.3            # loss rate in Rabi units, Gamma = 2 g Gamma~
Gamma = 2 * g * gamma_tilde
periods = 120                # long enough for the transient to clear

cfg = IntegratorConfig.rabi(g, periods=periods)
period = np.pi / g
t_min = 10.0 / Gamma + 50.0 * period

print(f"Gamma~ = {gamma_tilde}, measuring after t = {t_min:.0f} (3 periods window)\n")
print(f"{'variant':>16} {'n_e_p(t=1)':>11} {'late Xs0 amplitude':>19}")
for variant in (CONFIGURATION, SINGLE_PARTICLE):
    params = DephasingParams(g=g, Gamma=Gamma, beta=0.0, variant=variant)
    series = evolve_dephasing(params, cfg)
    write_csv(series, f"dephasing_{variant}.csv")
    k1 = np.searchsorted(series.times, 1.0)
    amp = measure_amplitude(series, "Xs0", t_min, period)
    print(f"{variant:>16} {series['n_e_p'][k1]:>11.6f} {amp:>19.5f}")

print(f"\nexp(-Gamma)             = {np.exp(-Gamma):.6f}  (both variants match)")
print(f"closed-form amplitude   = {asymptotic_amplitude(gamma_tilde):.5f}  (configuration)")
print(f"pair-operator amplitude = {0.5:.5f}  (rate independent)")
print("-> the p shell cannot tell the constructions apart; the s shell can.")
