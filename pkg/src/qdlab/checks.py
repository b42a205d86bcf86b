"""Cross-engine acceptance suite.

Every check pits independent routes to the same quantity against each other
at a fixed tolerance: hierarchy vs density matrix, reduced vs full Lindblad
evolution, trajectories vs closed forms.  The CLI `check` subcommand and the
acceptance tests both run these; all inputs are deterministic (seeded).

Cross-engine runs use fixed-step RK4 with one shared step so that both
engines apply the same polynomial of their generators; the observables then
agree to roundoff whenever the equations themselves are equivalent, which is
exactly what is under test.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import lindblad, sjcm
from .integrate import RK4_FIXED, IntegratorConfig
from .lindblad import CONFIGURATION, SINGLE_PARTICLE, DephasingParams
from .qstate import BasisSpec, transition_operator, pair_annihilator
from .sjcm import EXACT, HARTREE_FOCK, QdInitSpec, SjcmParams

__all__ = ["CheckResult", "run_all", "CHECKS"]

SEED = 20260814
G = 0.5
PERIOD = math.pi / G
GAMMA = 0.3 * 2 * G
BETA = 0.25 * 2 * G


@dataclass(frozen=True)
class CheckResult:
    index: int
    name: str
    passed: bool
    detail: str


def _result(index, name, passed, detail):
    return CheckResult(index, name, bool(passed), detail)


@lru_cache(maxsize=None)
def _rk4_cfg(periods: float = 20.0) -> IntegratorConfig:
    return IntegratorConfig.rabi(G, periods=periods, method=RK4_FIXED)


@lru_cache(maxsize=None)
def _fig1_spec() -> QdInitSpec:
    return QdInitSpec.from_occupations(0.3, 0.1, 0.0, (0.0, 1.0))


@lru_cache(maxsize=None)
def _random_specs(count: int = 20) -> tuple[QdInitSpec, ...]:
    """Valid incoherent specs with enough excitation that the mean photon
    number stays >= 0.5 (g2 divides by N^2; near-empty cavities would turn
    the comparison into a roundoff amplifier)."""
    rng = np.random.default_rng(SEED)
    specs = []
    while len(specs) < count:
        c = rng.dirichlet(np.ones(4))
        p = rng.dirichlet(np.ones(4))
        spec = QdInitSpec(c[0], c[1], c[2], c[3], tuple(p))
        n0 = sum(n * x for n, x in enumerate(spec.photon_dist))
        if n0 + spec.f_e >= 1.5:
            specs.append(spec)
    return tuple(specs)


@lru_cache(maxsize=None)
def _pair_runs():
    """(label, hierarchy series, density-matrix series) for the shared grid."""
    params = SjcmParams(g=G)
    cfg = _rk4_cfg()
    runs = [("fig1", sjcm.evolve_hierarchy(_fig1_spec(), params, cfg, EXACT),
             sjcm.oracle_evolve(_fig1_spec(), params, cfg))]
    for k, spec in enumerate(_random_specs()):
        runs.append((f"rand{k}", sjcm.evolve_hierarchy(spec, params, cfg, EXACT),
                     sjcm.oracle_evolve(spec, params, cfg)))
    return runs


@lru_cache(maxsize=None)
def _fig1_hf():
    return sjcm.evolve_hierarchy(_fig1_spec(), SjcmParams(g=G), _rk4_cfg(), HARTREE_FOCK)


def check_hierarchy_reference_equivalence() -> CheckResult:
    """Exact hierarchy and density-matrix engine agree on N(t) and g2(t)
    to 1e-8 over 20 Rabi periods, for the standard state and 20 random ones."""
    tol = 1e-8
    worst = 0.0
    worst_label = ""
    for label, hier, orac in _pair_runs():
        dev_n = float(np.abs(hier["N"] - orac["N"]).max())
        both = ~(np.isnan(hier["g2"]) | np.isnan(orac["g2"]))
        if not np.array_equal(np.isnan(hier["g2"]), np.isnan(orac["g2"])):
            return _result(1, "hierarchy-reference equivalence", False,
                           f"{label}: engines disagree on where g2 is defined")
        dev_g2 = float(np.abs(hier["g2"][both] - orac["g2"][both]).max())
        dev = max(dev_n, dev_g2)
        if dev > worst:
            worst, worst_label = dev, label
    return _result(1, "hierarchy-reference equivalence", worst < tol,
                   f"worst |dev| {worst:.3e} ({worst_label}) over 21 runs, tol {tol:g}")


def check_factorization_pitfall() -> CheckResult:
    """Hartree-Fock pins delta to zero while the exact correlation grows past
    0.01, and the photon numbers of the two modes visibly part ways."""
    _, exact, _ = _pair_runs()[0]
    hf = _fig1_hf()
    hf_delta = float(np.abs(hf["delta"]).max())
    exact_delta = float(np.abs(exact["delta"]).max())
    n_dev = float(np.abs(hf["N"] - exact["N"]).max())
    ok = hf_delta < 1e-10 and exact_delta > 0.01 and n_dev > 0.02
    return _result(2, "factorization pitfall", ok,
                   f"HF |delta| {hf_delta:.1e} (<1e-10), exact |delta| {exact_delta:.3f} "
                   f"(>0.01), N deviation {n_dev:.3f} (>0.02)")


def check_conservation() -> CheckResult:
    """Charge f_h - f_e and excitation N + f_e/h drift below 1e-10 along
    every trajectory of the equivalence grid (both engines plus HF)."""
    tol = 1e-10
    worst = 0.0
    series = [s for _, h, o in _pair_runs() for s in (h, o)] + [_fig1_hf()]
    for ser in series:
        for comb in (ser["C"], ser["N"] + ser["f_e"], ser["N"] + ser["f_h"]):
            worst = max(worst, float(np.abs(comb - comb[0]).max()))
    return _result(3, "conservation laws", worst < tol,
                   f"worst drift {worst:.3e} over {len(series)} trajectories, tol {tol:g}")


def check_g2max_charge_independence() -> CheckResult:
    """max g2 depends on the oscillation ability O but not on the charge C, and
    grows monotonically with O along the neutral line."""
    spread_tol = 1e-6
    details = []
    ok = True
    for o in (0.2, 0.5, 0.8):
        pts = sjcm.sweep_g2max(sjcm.grid_fixed_o(o, 0.02), SjcmParams(g=G))
        vals = np.array([p.g2_max for p in pts])
        spread = float(vals.max() - vals.min())
        ok &= spread < spread_tol
        details.append(f"O={o:g}: spread {spread:.2e} over {vals.size} C values")
    neutral = [QdInitSpec.from_oci(o, 0.0, 0.0, (0.0, 1.0)) for o in np.arange(0, 51) * 0.02]
    pts = sjcm.sweep_g2max(neutral, SjcmParams(g=G))
    vals = np.array([p.g2_max for p in pts])
    diffs = np.diff(vals)
    monotone = bool((diffs >= -1e-12).all())
    ok &= monotone
    details.append(f"neutral line monotone: {monotone} (min step {diffs.min():.2e})")
    return _result(4, "g2_max charge independence", ok, "; ".join(details))


def check_delta_edge_range() -> CheckResult:
    """On the balanced neutral edge the initial correlation spans the full
    admissible interval: delta = -1/4 at O = 0 and +1/4 at O = 1."""
    lo = QdInitSpec.from_oci(0.0, 0.0, 0.0, (0.0, 1.0)).delta
    hi = QdInitSpec.from_oci(1.0, 0.0, 0.0, (0.0, 1.0)).delta
    ok = abs(lo + 0.25) < 1e-12 and abs(hi - 0.25) < 1e-12
    return _result(5, "delta edge range", ok,
                   f"delta(O=0) = {lo:.15f}, delta(O=1) = {hi:.15f}, tol 1e-12")


def check_dissipator_identity() -> CheckResult:
    """The all-Gamma rate matrix over the two split transitions equals the
    single pair-operator dissipator, elementwise below 1e-12."""
    basis = BasisSpec(2, lindblad.DEPHASING_LABELS)
    split = lindblad.CollapseSpec(
        (("G", transition_operator(basis, "G", "Xp")),
         ("X", transition_operator(basis, "Xs", "XX"))),
        GAMMA * np.ones((2, 2)),
    )
    single = lindblad.CollapseSpec((("sp", pair_annihilator(basis, "p")),),
                                   np.array([[GAMMA]]))
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for _ in range(20):
        a = rng.standard_normal((basis.dim, basis.dim)) \
            + 1j * rng.standard_normal((basis.dim, basis.dim))
        rho = a @ a.conj().T
        rho /= rho.trace()
        worst = max(worst, float(np.abs(
            lindblad.dissipator(rho, split) - lindblad.dissipator(rho, single)
        ).max()))
    return _result(6, "dissipator identity", worst < 1e-12,
                   f"worst elementwise dev {worst:.3e} over 20 random states, tol 1e-12")


@lru_cache(maxsize=None)
def _dephasing_runs(variant: str, beta: float):
    params = DephasingParams(g=G, Gamma=GAMMA, beta=beta, variant=variant)
    cfg = _rk4_cfg()
    return lindblad.evolve_m(params, cfg), lindblad.evolve_dephasing(params, cfg)


def check_p_shell_decay() -> CheckResult:
    """n_e_p(t) = exp(-Gamma t) in both loss constructions, pure dephasing
    on or off: the p shell never notices how its loss is written."""
    tol = 1e-8
    worst = 0.0
    for variant in (CONFIGURATION, SINGLE_PARTICLE):
        for beta in (0.0, BETA):
            reduced, full = _dephasing_runs(variant, beta)
            ref = np.exp(-GAMMA * reduced.times)
            worst = max(worst,
                        float(np.abs(reduced["n_e_p"] - ref).max()),
                        float(np.abs(full["n_e_p"] - ref).max()))
    return _result(7, "p-shell decay independence", worst < tol,
                   f"worst |n_e_p - exp(-Gamma t)| {worst:.3e} over 8 runs, tol {tol:g}")


def check_reduced_full_equivalence() -> CheckResult:
    """The closed 8-component system reproduces the full density-matrix
    evolution component by component, in both variants."""
    tol = 1e-8
    cols = list(lindblad.R_COLUMNS) + ["n_e_s", "n_e_p", "n_ph"]
    worst = 0.0
    worst_label = ""
    for variant in (CONFIGURATION, SINGLE_PARTICLE):
        reduced, full = _dephasing_runs(variant, BETA)
        for col in cols:
            dev = float(np.abs(reduced[col] - full[col]).max())
            if dev > worst:
                worst, worst_label = dev, f"{variant}:{col}"
    return _result(8, "reduced vs full equivalence", worst < tol,
                   f"worst column dev {worst:.3e} ({worst_label}), tol {tol:g}")


def _measured_amplitude(variant: str, gamma_tilde: float) -> float:
    gamma = gamma_tilde * 2 * G
    t_min = 10.0 / gamma + 50.0 * PERIOD
    cfg = IntegratorConfig(t_span=(0.0, t_min + 3.0 * PERIOD), sample_every=PERIOD / 200.0)
    params = DephasingParams(g=G, Gamma=gamma, beta=0.0, variant=variant)
    series = lindblad.evolve_m(params, cfg)
    return lindblad.measure_amplitude(series, "Xs0", t_min, PERIOD)


def check_amplitude_formula() -> CheckResult:
    """Late-time s-occupation amplitude in the configuration variant follows
    A(Gamma~) within 1%, approaching 1/4 and 1/2 in the limits."""
    details = []
    ok = True
    for gt in (0.1, 0.3, 1.0, 3.0):
        measured = _measured_amplitude(CONFIGURATION, gt)
        formula = lindblad.asymptotic_amplitude(gt)
        rel = abs(measured - formula) / formula
        ok &= rel < 0.01
        details.append(f"G~={gt:g}: {measured:.5f} vs {formula:.5f} ({rel:.1e})")
    low = _measured_amplitude(CONFIGURATION, 0.05)
    high = _measured_amplitude(CONFIGURATION, 20.0)
    ok &= abs(low - 0.25) / 0.25 < 0.03
    ok &= abs(high - 0.5) / 0.5 < 0.01
    details.append(f"limits: {low:.5f} (1/4 within 3%), {high:.5f} (1/2 within 1%)")
    return _result(9, "asymptotic amplitude formula", ok, "; ".join(details))


def check_single_particle_amplitude() -> CheckResult:
    """The single-pair-operator loss leaves the s shell swinging at 1/2
    regardless of the loss rate."""
    details = []
    ok = True
    for gt in (0.05, 0.1, 0.3, 1.0, 3.0, 20.0):
        measured = _measured_amplitude(SINGLE_PARTICLE, gt)
        ok &= abs(measured - 0.5) <= 0.005
        details.append(f"G~={gt:g}: {measured:.5f}")
    return _result(10, "single-particle amplitude 1/2", ok,
                   "; ".join(details) + " (all 0.500 +- 0.005)")


def check_pumped_contrast() -> CheckResult:
    """With pump balancing loss (P = Gamma), the split-transition model
    settles to a stationary state while the pair-operator model keeps the
    full vacuum Rabi swing."""
    amps = {}
    for variant in (CONFIGURATION, SINGLE_PARTICLE):
        params = DephasingParams(g=G, Gamma=GAMMA, beta=0.0, P=GAMMA, variant=variant)
        _, amps[variant] = lindblad.pumped_scenario(params)
    ok = amps[CONFIGURATION] < 0.01 and abs(amps[SINGLE_PARTICLE] - 0.5) <= 0.005
    return _result(11, "pumped contrast", ok,
                   f"config amplitude {amps[CONFIGURATION]:.2e} (<0.01), "
                   f"sp amplitude {amps[SINGLE_PARTICLE]:.5f} (0.5 +- 0.005)")


def check_density_health() -> CheckResult:
    """Trace, hermiticity and positivity hold along a representative full
    density-matrix run; every other density run in this suite enforces the
    same gate sample by sample and would have aborted."""
    params = DephasingParams(g=G, Gamma=GAMMA, beta=BETA, variant=CONFIGURATION)
    series = lindblad.evolve_dephasing(params, _rk4_cfg(), track_health=True)
    trace = float(series["trace_err"].max())
    herm = float(series["herm_err"].max())
    eig = float(series["min_eig"].min())
    ok = trace < 1e-8 and herm < 1e-10 and eig >= -1e-8
    return _result(12, "density-matrix health", ok,
                   f"trace drift {trace:.1e} (<1e-8), hermiticity {herm:.1e} (<1e-10), "
                   f"min eigenvalue {eig:.1e} (>=-1e-8)")


def check_determinism() -> CheckResult:
    """Identical inputs give identical outputs: repeated fixed-step runs
    match to the byte and repeated sweeps to the bit."""
    from .cli import format_csv

    cfg = IntegratorConfig.rabi(G, periods=2.0, method=RK4_FIXED)
    params = SjcmParams(g=G)
    csv_a = format_csv(sjcm.evolve_hierarchy(_fig1_spec(), params, cfg))
    csv_b = format_csv(sjcm.evolve_hierarchy(_fig1_spec(), params, cfg))
    grid = sjcm.grid_fixed_o(0.5, 0.1)
    sweep_a = [p.g2_max for p in sjcm.sweep_g2max(grid, params)]
    sweep_b = [p.g2_max for p in sjcm.sweep_g2max(grid, params)]
    d_a = lindblad.dissipator(np.eye(12) / 12.0,
                              lindblad.build_dephasing_model(DephasingParams())[1])
    d_b = lindblad.dissipator(np.eye(12) / 12.0,
                              lindblad.build_dephasing_model(DephasingParams())[1])
    ok = csv_a == csv_b and sweep_a == sweep_b and np.array_equal(d_a, d_b)
    return _result(13, "determinism", ok,
                   f"fixed-step CSV bytes equal: {csv_a == csv_b}; "
                   f"sweep bit-identical: {sweep_a == sweep_b}")


CHECKS = (
    check_hierarchy_reference_equivalence,
    check_factorization_pitfall,
    check_conservation,
    check_g2max_charge_independence,
    check_delta_edge_range,
    check_dissipator_identity,
    check_p_shell_decay,
    check_reduced_full_equivalence,
    check_amplitude_formula,
    check_single_particle_amplitude,
    check_pumped_contrast,
    check_density_health,
    check_determinism,
)


def run_all() -> list[CheckResult]:
    results = []
    for fn in CHECKS:
        try:
            results.append(fn())
        except Exception as exc:  # a crashed check is a failed check
            index = len(results) + 1
            results.append(CheckResult(index, fn.__name__, False, f"raised {exc!r}"))
    return results
