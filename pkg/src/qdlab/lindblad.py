"""Dissipative dynamics of the two-shell dot (G, Xs, Xp, XX) in a cavity.

The von Neumann-Lindblad equation d_t rho = i[rho, H] + D(rho) is used with

    D(rho) = sum_ij gamma_ji (L_i rho L_j^dag
                              - 1/2 L_j^dag L_i rho - 1/2 rho L_j^dag L_i),

so a single collapse operator at rate Gamma decays its occupation at Gamma.
Off-diagonal rate matrices couple different collapse channels; the all-ones
rate matrix over {|G><Xp|, |Xs><XX|} reproduces the single-operator
dissipator of the p-shell pair h_p e_p exactly.

Two p-shell loss constructions are offered: "single_particle" keeps the one
pair operator h_p e_p, "configuration" splits it into the two transitions.
They differ in one cross term that feeds the s-shell coherence, which is
what the reduced 8-component equation of motion makes visible.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .integrate import IntegratorConfig, TimeSeries, integrate, eig_propagate
from .qstate import (
    BasisSpec,
    DensityMatrix,
    HealthError,
    Operator,
    pair_annihilator,
    tensor,
    validate_density,
)

__all__ = [
    "SINGLE_PARTICLE",
    "CONFIGURATION",
    "DEPHASING_LABELS",
    "R_COLUMNS",
    "CollapseSpec",
    "DephasingParams",
    "dissipator",
    "build_dephasing_model",
    "evolve_dephasing",
    "build_m",
    "evolve_m",
    "analytic_beta0",
    "asymptotic_amplitude",
    "measure_amplitude",
    "pumped_scenario",
]

SINGLE_PARTICLE = "single_particle"
CONFIGURATION = "configuration"

DEPHASING_LABELS = ("G", "Xs", "Xp", "XX")

# Reduced state of the first photon blocks: occupations X^n and the two
# photon-assisted coherences psi_X^n = Im rho[(n,XX),(n+1,Xp)] and
# psi_s^n = Im rho[(n,Xs),(n+1,G)], at the photon numbers reachable from
# the biexciton with an empty cavity.
R_COLUMNS = ("XX0", "psi_X0", "Xp1", "Xs0", "psi_s0", "G1", "Xp0", "G0")

LEAK_TOL = 1e-9
GAMMA_HERM_TOL = 1e-12
GAMMA_PSD_TOL = 1e-12


@dataclass(frozen=True)
class CollapseSpec:
    """Collapse operators with a hermitian, positive-semidefinite rate matrix.

    gamma[j, i] weights the channel pair (L_i ... L_j^dag); the diagonal
    holds the ordinary rates.  Non-PSD rate matrices do not define a
    completely positive evolution and are rejected unless force=True.
    """

    ops: tuple[tuple[str, Operator], ...]
    gamma: np.ndarray
    force: bool = False

    def __post_init__(self):
        ops = tuple((str(name), op) for name, op in self.ops)
        object.__setattr__(self, "ops", ops)
        g = np.atleast_2d(np.asarray(self.gamma, dtype=complex))
        if g.shape != (len(ops), len(ops)):
            raise ValueError(
                f"rate matrix shape {g.shape} does not match {len(ops)} collapse operators"
            )
        bases = {op.basis for _, op in ops}
        if len(bases) > 1:
            raise ValueError("collapse operators live on different bases")
        if ops:
            if np.abs(g - g.conj().T).max() > GAMMA_HERM_TOL:
                raise ValueError("rate matrix is not hermitian")
            min_eig = float(np.linalg.eigvalsh(g).min())
            if min_eig < -GAMMA_PSD_TOL:
                msg = f"rate matrix is not positive semidefinite (min eigenvalue {min_eig:.3e})"
                if self.force:
                    warnings.warn(msg, RuntimeWarning, stacklevel=3)
                else:
                    raise ValueError(msg)
        object.__setattr__(self, "gamma", g)

    @classmethod
    def diagonal(cls, channels) -> "CollapseSpec":
        """From (name, operator, rate) triples; zero-rate channels are dropped."""
        kept = [(name, op, rate) for name, op, rate in channels if rate > 0.0]
        ops = tuple((name, op) for name, op, _ in kept)
        return cls(ops, np.diag([rate for *_, rate in kept]).astype(complex))

    @property
    def basis(self) -> BasisSpec | None:
        return self.ops[0][1].basis if self.ops else None


def _compile_dissipator(spec: CollapseSpec):
    """Sandwich terms plus the single accumulated anticommutator matrix."""
    sandwich = []
    a_sum = None
    mats = [op.mat for _, op in spec.ops]
    for j, lj in enumerate(mats):
        for i, li in enumerate(mats):
            g = spec.gamma[j, i]
            if g == 0:
                continue
            sandwich.append((g, li, lj.conj().T))
            a = g * (lj.conj().T @ li)
            a_sum = a if a_sum is None else a_sum + a
    return sandwich, a_sum


def dissipator(rho, spec: CollapseSpec) -> np.ndarray:
    """D(rho) as a plain matrix (the derivative is traceless, not a state)."""
    if isinstance(rho, DensityMatrix):
        if spec.basis is not None and rho.basis != spec.basis:
            raise ValueError("density matrix and collapse operators live on different bases")
        rho = rho.mat
    rho = np.asarray(rho, dtype=complex)
    sandwich, a_sum = _compile_dissipator(spec)
    out = np.zeros_like(rho)
    for g, li, lj_dag in sandwich:
        out += g * (li @ rho @ lj_dag)
    if a_sum is not None:
        out -= 0.5 * (a_sum @ rho + rho @ a_sum)
    return out


@dataclass(frozen=True)
class DephasingParams:
    """Rates of the dissipative two-shell scenario.

    Gamma: p-shell pair loss, beta: s-shell pair loss, P: p-shell pair pump.
    With g = 1/2 all times and rates are in units of 2g.
    """

    g: float = 0.5
    Gamma: float = 0.3
    beta: float = 0.0
    P: float = 0.0
    variant: str = CONFIGURATION
    n_max: int = 2

    def __post_init__(self):
        if self.g <= 0:
            raise ValueError(f"coupling g must be positive, got {self.g}")
        for name in ("Gamma", "beta", "P"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0, got {getattr(self, name)}")
        if self.variant not in (SINGLE_PARTICLE, CONFIGURATION):
            raise ValueError(
                f"variant must be {SINGLE_PARTICLE!r} or {CONFIGURATION!r}, got {self.variant!r}"
            )
        if self.n_max < 1:
            raise ValueError(f"n_max must be >= 1, got {self.n_max}")

    @property
    def rabi_period(self) -> float:
        return math.pi / self.g

    @property
    def gamma_tilde(self) -> float:
        return self.Gamma / (2.0 * self.g)


def _conf_mat(pairs) -> np.ndarray:
    m = np.zeros((4, 4))
    for i, j in pairs:
        m[DEPHASING_LABELS.index(i), DEPHASING_LABELS.index(j)] = 1.0
    return m


def build_dephasing_model(params: DephasingParams) -> tuple[Operator, CollapseSpec]:
    """Hamiltonian and collapse channels on the two-shell basis.

    Only the s-shell pair couples to the cavity: H = -g (h_s e_s b^dag + h.c.).
    The p-shell loss (and pump) either stays one pair operator or is split
    per configuration, depending on params.variant.
    """
    basis = BasisSpec(params.n_max, DEPHASING_LABELS)
    b = np.diag(np.sqrt(np.arange(1, basis.n_photon, dtype=float)), 1)
    hs_es = _conf_mat((("G", "Xs"), ("Xp", "XX")))
    h = -params.g * (tensor(basis, b.T, hs_es).mat + tensor(basis, b, hs_es.T).mat)
    hamiltonian = Operator(basis, h)

    def conf_op(pairs) -> Operator:
        return tensor(basis, np.eye(basis.n_photon), _conf_mat(pairs))

    if params.variant == SINGLE_PARTICLE:
        channels = [
            ("p_loss", pair_annihilator(basis, "p"), params.Gamma),
            ("s_loss", pair_annihilator(basis, "s"), params.beta),
            ("p_pump", pair_annihilator(basis, "p").dag(), params.P),
        ]
    else:
        channels = [
            ("p_loss_G", conf_op((("G", "Xp"),)), params.Gamma),
            ("p_loss_X", conf_op((("Xs", "XX"),)), params.Gamma),
            ("s_loss_G", conf_op((("G", "Xs"),)), params.beta),
            ("s_loss_X", conf_op((("Xp", "XX"),)), params.beta),
            ("p_pump_G", conf_op((("Xp", "G"),)), params.P),
            ("p_pump_X", conf_op((("XX", "Xs"),)), params.P),
        ]
    return hamiltonian, CollapseSpec.diagonal(channels)


def evolve_dephasing(params: DephasingParams, cfg: IntegratorConfig | None = None,
                     track_health: bool = False) -> TimeSeries:
    """Full density-matrix evolution from the biexciton with an empty cavity.

    Emits the reduced components of R_COLUMNS plus the shell occupations
    n_e_s, n_e_p and the mean photon number.  Every sample is health-checked
    (trace, hermiticity, positivity) and the top photon level is watched for
    truncation leakage.
    """
    cfg = cfg or IntegratorConfig.rabi(params.g)
    hamiltonian, collapse = build_dephasing_model(params)
    basis = hamiltonian.basis
    h = hamiltonian.mat
    dim = basis.dim
    sandwich, a_sum = _compile_dissipator(collapse)
    rho0 = DensityMatrix.pure(basis, 0, "XX")

    def rhs(t, y):
        rho = y.reshape(dim, dim)
        d = 1j * (rho @ h - h @ rho)
        for g, li, lj_dag in sandwich:
            d += g * (li @ rho @ lj_dag)
        if a_sum is not None:
            d -= 0.5 * (a_sum @ rho + rho @ a_sum)
        return d.ravel()

    idx = basis.index
    comp = {
        "XX0": (idx(0, "XX"), idx(0, "XX")),
        "psi_X0": (idx(0, "XX"), idx(1, "Xp")),
        "Xp1": (idx(1, "Xp"), idx(1, "Xp")),
        "Xs0": (idx(0, "Xs"), idx(0, "Xs")),
        "psi_s0": (idx(0, "Xs"), idx(1, "G")),
        "G1": (idx(1, "G"), idx(1, "G")),
        "Xp0": (idx(0, "Xp"), idx(0, "Xp")),
        "G0": (idx(0, "G"), idx(0, "G")),
    }
    i_xs = DEPHASING_LABELS.index("Xs")
    i_xp = DEPHASING_LABELS.index("Xp")
    i_xx = DEPHASING_LABELS.index("XX")
    n_vec = np.arange(basis.n_photon, dtype=float)

    def observer(t, y):
        rho = y.reshape(dim, dim)
        report = validate_density(DensityMatrix(basis, rho))
        if not report.ok():
            raise HealthError("density-matrix health check failed", report, t)
        pops = np.diag(rho).real.reshape(basis.n_photon, 4)
        leak = pops[-1].sum()
        if leak > LEAK_TOL:
            raise RuntimeError(
                f"top photon level occupied at {leak:.3e} (t={t:.6g}); increase n_max"
            )
        out = {}
        for name, (r, c) in comp.items():
            val = rho[r, c]
            out[name] = val.imag if name.startswith("psi") else val.real
        out["n_e_s"] = pops[:, i_xs].sum() + pops[:, i_xx].sum()
        out["n_e_p"] = pops[:, i_xp].sum() + pops[:, i_xx].sum()
        out["n_ph"] = float(n_vec @ pops.sum(axis=1))
        if track_health:
            out["trace_err"] = report.trace_error
            out["herm_err"] = report.hermiticity_error
            out["min_eig"] = report.min_eigenvalue
        return out

    return integrate(rhs, rho0.mat.ravel(), cfg, observer=observer)


def build_m(params: DephasingParams) -> np.ndarray:
    """Closed 8-component equation of motion for the R_COLUMNS vector.

    The two p-loss constructions differ in exactly one entry: the feed of
    psi_X0 into psi_s0, which is Gamma for the single pair operator and
    absent for the split transitions.  The pump has no closed counterpart
    here; use evolve_dephasing for P > 0.
    """
    if params.P != 0:
        raise ValueError("build_m covers the unpumped model; use evolve_dephasing for P > 0")
    g, gam, beta = params.g, params.Gamma, params.beta
    feed = gam if params.variant == SINGLE_PARTICLE else 0.0
    return np.array([
        [-gam - beta,        2 * g,    0.0,   0.0,        0.0,  0.0,   0.0, 0.0],
        [-g,          -gam - beta / 2,   g,   0.0,        0.0,  0.0,   0.0, 0.0],
        [0.0,               -2 * g,   -gam,   0.0,        0.0,  0.0,   0.0, 0.0],
        [gam,                  0.0,    0.0, -beta,      2 * g,  0.0,   0.0, 0.0],
        [0.0,                 feed,    0.0,    -g,  -beta / 2,    g,   0.0, 0.0],
        [0.0,                  0.0,    gam,   0.0,     -2 * g,  0.0,   0.0, 0.0],
        [beta,                 0.0,    0.0,   0.0,        0.0,  0.0,  -gam, 0.0],
        [0.0,                  0.0,    0.0,  beta,        0.0,  0.0,   gam, 0.0],
    ])


def _reduced_columns(sol: dict) -> dict:
    """Occupation sums derivable from the reduced components."""
    return {
        "n_e_s": sol["XX0"] + sol["Xs0"],
        "n_e_p": sol["XX0"] + sol["Xp1"] + sol["Xp0"],
        "n_ph": sol["Xp1"] + sol["G1"],
    }


def evolve_m(params: DephasingParams, cfg: IntegratorConfig | None = None) -> TimeSeries:
    """Integrate the reduced 8-component system from the biexciton start."""
    cfg = cfg or IntegratorConfig.rabi(params.g)
    m = build_m(params)
    r0 = np.zeros(8)
    r0[0] = 1.0

    def observer(t, y):
        out = dict(zip(R_COLUMNS, y))
        out.update(_reduced_columns(out))
        return out

    return integrate(lambda t, y: m @ y, r0, cfg, observer=observer)


def analytic_beta0(params: DephasingParams, times) -> TimeSeries:
    """Exact beta = 0 solution of the reduced system via eigendecomposition.

    At beta = 0 the last two components decouple and stay zero, leaving the
    block-triangular 6x6 system [[W(Gamma), 0], [G, W(0)]].
    """
    if params.beta != 0:
        raise ValueError("analytic_beta0 requires beta = 0")
    if params.P != 0:
        raise ValueError("analytic_beta0 covers the unpumped model")
    m6 = build_m(params)[:6, :6]
    series = eig_propagate(m6, np.eye(6)[0], np.asarray(times, dtype=float),
                           names=list(R_COLUMNS[:6]))
    sol = {name: series[name] for name in R_COLUMNS[:6]}
    sol["Xp0"] = np.zeros_like(series.times)
    sol["G0"] = np.zeros_like(series.times)
    cols = dict(zip(R_COLUMNS, (sol[name] for name in R_COLUMNS)))
    cols.update(_reduced_columns(sol))
    return TimeSeries(series.times, cols)


def asymptotic_amplitude(gamma_tilde: float) -> float:
    """Late-time amplitude of the s-shell occupations at beta = 0, as a
    function of the loss rate in Rabi units (Gamma~ = Gamma / 2g).

    Interpolates between 1/4 (adiabatic limit, the feed populates the
    s-block in phase) and 1/2 (projective limit, full vacuum Rabi swing).
    """
    if gamma_tilde < 0:
        raise ValueError(f"gamma_tilde must be >= 0, got {gamma_tilde}")
    gt2 = gamma_tilde * gamma_tilde
    return 0.5 * math.sqrt((gt2 + 2.0) ** 2 + gt2) / (gt2 + 4.0)


def measure_amplitude(series: TimeSeries, column: str, t_min: float, period: float) -> float:
    """(max - min) / 2 of a column over the final three oscillation periods
    past t_min.  Requires the series to extend at least that far."""
    if period <= 0:
        raise ValueError(f"period must be positive, got {period}")
    t_end = float(series.times[-1])
    window = 3.0 * period
    # a sample grid may undershoot the window end by one stride; allow that
    if t_end - t_min < window - 0.02 * period:
        raise ValueError(
            f"series ends at t={t_end:g}, too short for a {window:g}-long window after t_min={t_min:g}"
        )
    start = max(t_min, t_end - window)
    mask = series.times >= start - 1e-9 * period
    vals = series[column][mask]
    return 0.5 * float(vals.max() - vals.min())


def pumped_scenario(params: DephasingParams, cfg: IntegratorConfig | None = None,
                    t_min: float | None = None) -> tuple[TimeSeries, float]:
    """Pumped p-shell run: full density-matrix evolution plus the late-window
    amplitude of the s-shell occupation n_e_s.

    The measurement window starts after the loss transient (10 / Gamma) plus
    50 Rabi periods and spans three periods.
    """
    if params.beta != 0:
        raise ValueError("pumped_scenario requires beta = 0")
    period = params.rabi_period
    if t_min is None:
        if params.Gamma <= 0:
            raise ValueError("t_min must be given explicitly when Gamma = 0")
        t_min = 10.0 / params.Gamma + 50.0 * period
    if cfg is None:
        cfg = IntegratorConfig(
            t_span=(0.0, t_min + 3.0 * period),
            sample_every=period / 200.0,
            dt=1e-3 * period,
        )
    series = evolve_dephasing(params, cfg)
    return series, measure_amplitude(series, "n_e_s", t_min, period)
