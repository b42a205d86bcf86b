"""Jaynes-Cummings dynamics of a single s-shell quantum dot in a cavity,
resolved by photon number.

Three interchangeable engines evolve the same initial data:

* an exact closed hierarchy in the photon-probability variables
  (p_n, f^e_n, f^h_n, psi_n, C^X_n),
* its Hartree-Fock truncation, which replaces the two-particle quantity
  C^X_n by f^e_n f^h_n / p_n and thereby pins the electron-hole
  correlation delta to zero,
* a density-matrix evolution in the four-configuration basis
  {G, Xs, +s, -s} (empty dot, bright exciton, lone hole, lone electron),
  which serves as the independent reference.

Energies are measured on resonance, so only the coupling g enters; time is
in units of 1/(2g) when g = 1/2 (the default), and the Rabi period is pi/g.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .integrate import IntegratorConfig, TimeSeries, integrate
from .qstate import BasisSpec, DensityMatrix, HealthError, validate_density

__all__ = [
    "SJCM_LABELS",
    "SjcmParams",
    "QdInitSpec",
    "SjcmHierarchyState",
    "SjcmObservables",
    "SweepPoint",
    "EXACT",
    "HARTREE_FOCK",
    "coeffs_from_oci",
    "oci_from_coeffs",
    "hierarchy_init",
    "hierarchy_rhs",
    "observables",
    "evolve_hierarchy",
    "oracle_evolve",
    "sweep_g2max",
    "grid_delta0_path",
    "grid_fixed_o",
    "grid_co_triangle",
]

# Configuration basis: empty dot, s exciton, lone hole (+), lone electron (-).
SJCM_LABELS = ("G", "Xs", "+s", "-s")

EXACT = "exact"
HARTREE_FOCK = "hartree_fock"

# Below this photon probability the Hartree-Fock ratio f^e f^h / p is
# replaced by zero instead of dividing by (near) nothing.
P_FLOOR = 1e-12

# g2 is undefined when the mean photon number is this small.
N_FLOOR = 1e-6

# Initially unoccupied top coherence must stay empty; beyond this it means
# the photon ladder was truncated too low.
LEAK_TOL = 1e-9


@dataclass(frozen=True)
class SjcmParams:
    """Model constants.  omega, eps_e, eps_h are carried for bookkeeping but
    drop out of the resonant interaction-picture dynamics."""

    g: float = 0.5
    n_max: int | None = None
    omega: float = 0.0
    eps_e: float = 0.0
    eps_h: float = 0.0

    def __post_init__(self):
        if self.g <= 0:
            raise ValueError(f"coupling g must be positive, got {self.g}")
        if self.n_max is not None and self.n_max < 1:
            raise ValueError(f"n_max must be >= 1, got {self.n_max}")

    @property
    def rabi_period(self) -> float:
        return math.pi / self.g


_COEFF_NAMES = ("c_G", "c_Xs", "c_+", "c_-")
_COEFF_TOL = 1e-12


def _check_coeffs(c_g, c_xs, c_plus, c_minus, context: str):
    coeffs = (c_g, c_xs, c_plus, c_minus)
    for name, c in zip(_COEFF_NAMES, coeffs):
        if not -_COEFF_TOL <= c <= 1.0 + _COEFF_TOL:
            raise ValueError(
                f"{context} puts configuration weight {name} = {c:.6g} outside [0, 1]"
            )
    total = sum(coeffs)
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"{context}: configuration weights sum to {total:.12g}, not 1")
    return tuple(min(1.0, max(0.0, c)) for c in coeffs)


def coeffs_from_oci(o: float, c: float, i: float) -> tuple[float, float, float, float]:
    """Configuration weights (c_G, c_Xs, c_+, c_-) from the oscillation
    ability O = c_G + c_Xs (the weight in the sector that Rabi-oscillates,
    equal to 1 - f_e - f_h + 2 C^X), the charge C = f_h - f_e and the
    inversion I = c_Xs - c_G.

    Admissible (O, C, I) are exactly those where all four weights land in
    [0, 1]: O in [0, 1], |I| <= O, |C| <= 1 - O.
    """
    c_g = 0.5 * (o - i)
    c_xs = 0.5 * (o + i)
    c_minus = 0.5 * (1.0 - o - c)
    c_plus = 0.5 * (1.0 - o + c)
    return _check_coeffs(c_g, c_xs, c_plus, c_minus, f"(O={o:g}, C={c:g}, I={i:g})")


def oci_from_coeffs(c_g: float, c_xs: float, c_plus: float, c_minus: float):
    """Inverse of :func:`coeffs_from_oci`."""
    return c_g + c_xs, c_plus - c_minus, c_xs - c_g


@dataclass(frozen=True)
class QdInitSpec:
    """Incoherent initial state: configuration weights times a photon
    distribution.  Build via :meth:`from_occupations` or :meth:`from_oci`."""

    c_g: float
    c_xs: float
    c_plus: float
    c_minus: float
    photon_dist: tuple[float, ...]

    def __post_init__(self):
        c_g, c_xs, c_plus, c_minus = _check_coeffs(
            self.c_g, self.c_xs, self.c_plus, self.c_minus, "initial state"
        )
        object.__setattr__(self, "c_g", c_g)
        object.__setattr__(self, "c_xs", c_xs)
        object.__setattr__(self, "c_plus", c_plus)
        object.__setattr__(self, "c_minus", c_minus)
        p = tuple(float(x) for x in self.photon_dist)
        if not p:
            raise ValueError("photon_dist must not be empty")
        if min(p) < -_COEFF_TOL:
            raise ValueError(f"photon_dist has negative entry {min(p):.6g}")
        if abs(sum(p) - 1.0) > 1e-9:
            raise ValueError(f"photon_dist sums to {sum(p):.12g}, not 1")
        object.__setattr__(self, "photon_dist", tuple(max(0.0, x) for x in p))

    @classmethod
    def from_occupations(cls, f_e: float, f_h: float, delta: float, photon_dist) -> "QdInitSpec":
        """From electron/hole occupations and the pair correlation
        delta = <e^dag e h^dag h> - f_e f_h."""
        c_xs = f_e * f_h + delta
        c_minus = f_e - c_xs
        c_plus = f_h - c_xs
        c_g = 1.0 - c_xs - c_minus - c_plus
        try:
            _check_coeffs(c_g, c_xs, c_plus, c_minus, "occupations")
        except ValueError as exc:
            lo = max(-f_e * f_h, -(1.0 - f_e) * (1.0 - f_h))
            hi = min(f_e, f_h) - f_e * f_h
            raise ValueError(
                f"inconsistent occupations (f_e={f_e:g}, f_h={f_h:g}, delta={delta:g}); "
                f"delta must lie in [{lo:.6g}, {hi:.6g}]: {exc}"
            ) from None
        return cls(c_g, c_xs, c_plus, c_minus, tuple(photon_dist))

    @classmethod
    def from_oci(cls, o: float, c: float, i: float, photon_dist) -> "QdInitSpec":
        c_g, c_xs, c_plus, c_minus = coeffs_from_oci(o, c, i)
        return cls(c_g, c_xs, c_plus, c_minus, tuple(photon_dist))

    @property
    def f_e(self) -> float:
        return self.c_xs + self.c_minus

    @property
    def f_h(self) -> float:
        return self.c_xs + self.c_plus

    @property
    def delta(self) -> float:
        return self.c_xs - self.f_e * self.f_h

    @property
    def oci(self) -> tuple[float, float, float]:
        return oci_from_coeffs(self.c_g, self.c_xs, self.c_plus, self.c_minus)

    @property
    def n_support(self) -> int:
        nz = [n for n, p in enumerate(self.photon_dist) if p > 0.0]
        return nz[-1] if nz else 0


@dataclass
class SjcmHierarchyState:
    """Photon-resolved occupations.  All arrays share the length n_max + 1;
    psi[n] is the photon-assisted polarization between |n+1, G> and |n, Xs>
    (the top entry is pinned to zero by the cutoff).  In Hartree-Fock mode
    c_x is not evolved; the factorized proxy replaces it inside the EoM."""

    p: np.ndarray
    f_e: np.ndarray
    f_h: np.ndarray
    psi: np.ndarray
    c_x: np.ndarray
    mode: str = EXACT

    def __post_init__(self):
        arrays = [np.asarray(a, dtype=float) for a in (self.p, self.f_e, self.f_h, self.psi, self.c_x)]
        if len({a.shape for a in arrays}) != 1 or arrays[0].ndim != 1:
            raise ValueError("hierarchy arrays must share one 1-D shape")
        self.p, self.f_e, self.f_h, self.psi, self.c_x = arrays
        if self.mode not in (EXACT, HARTREE_FOCK):
            raise ValueError(f"mode must be {EXACT!r} or {HARTREE_FOCK!r}, got {self.mode!r}")

    @property
    def n_levels(self) -> int:
        return self.p.size

    def pack(self) -> np.ndarray:
        return np.concatenate([self.p, self.f_e, self.f_h, self.psi, self.c_x])


def _resolve_levels(spec: QdInitSpec, params: SjcmParams) -> int:
    """Number of photon levels.  One above the initial support: a single
    recombination adds at most one photon, so the top coherence is exactly
    empty and pinning psi there is not an approximation."""
    needed = spec.n_support + 1
    n_max = params.n_max if params.n_max is not None else needed
    if n_max < needed:
        raise ValueError(
            f"n_max={n_max} too small for photon support up to n={spec.n_support}; "
            f"need at least {needed}"
        )
    return n_max + 1


def hierarchy_init(spec: QdInitSpec, params: SjcmParams | None = None,
                   mode: str = EXACT) -> SjcmHierarchyState:
    """Product initial state of the hierarchy for an incoherent spec."""
    params = params or SjcmParams()
    levels = _resolve_levels(spec, params)
    p = np.zeros(levels)
    # entries past the resolved levels are exactly zero (else _resolve_levels
    # would have raised), so trailing zeros in the input are safe to drop
    dist = spec.photon_dist[:levels]
    p[: len(dist)] = dist
    zero = np.zeros(levels)
    c_x = np.zeros(levels) if mode == HARTREE_FOCK else p * spec.c_xs
    return SjcmHierarchyState(p, p * spec.f_e, p * spec.f_h, zero.copy(), c_x, mode)


def _factorized_cx(p, f_e, f_h):
    safe = np.where(p > P_FLOOR, p, 1.0)
    return np.where(p > P_FLOOR, f_e * f_h / safe, 0.0)


def _derivs(arr: np.ndarray, g: float, root: np.ndarray, hartree_fock: bool) -> np.ndarray:
    """EoM right-hand side on stacked arrays of shape (..., 5, L).

    root[n] = sqrt(n+1).  The closure is exact: C^X_n couples back only
    through psi_n, so the five blocks are all there is.
    """
    p, f_e, f_h, psi, c_x = (arr[..., k, :] for k in range(5))
    cx = _factorized_cx(p, f_e, f_h) if hartree_fock else c_x
    drive = (2.0 * g) * root * psi
    out = np.empty_like(arr)
    out[..., 1, :] = -drive
    out[..., 2, :] = -drive
    out[..., 0, :] = -drive
    out[..., 0, 1:] += drive[..., :-1]
    out[..., 3, :] = 0.0
    gap = p - f_e - f_h
    out[..., 3, :-1] = -g * root[:-1] * (gap[..., 1:] + cx[..., 1:] - cx[..., :-1])
    out[..., 4, :] = 0.0 if hartree_fock else -drive
    return out


def hierarchy_rhs(state: SjcmHierarchyState, params: SjcmParams | None = None) -> SjcmHierarchyState:
    """Time derivative of a hierarchy state (same array layout)."""
    params = params or SjcmParams()
    arr = np.stack([state.p, state.f_e, state.f_h, state.psi, state.c_x])
    root = np.sqrt(np.arange(1, state.n_levels + 1, dtype=float))
    d = _derivs(arr, params.g, root, state.mode == HARTREE_FOCK)
    return SjcmHierarchyState(d[0], d[1], d[2], d[3], d[4], state.mode)


@dataclass(frozen=True)
class SjcmObservables:
    """Aggregate observables of one hierarchy or density-matrix state.
    g2 is NaN where the mean photon number is below the defined-ness floor;
    O is only resolvable by the density-matrix engine."""

    N: float
    g2: float
    f_e: float
    f_h: float
    C: float
    delta: float
    O: float = math.nan


def _aggregate(p, f_e_n, f_h_n, cx_sum, n_vec, n2_vec, hartree_fock: bool, o: float = math.nan):
    n_mean = float(p @ n_vec)
    num = float(p @ n2_vec)
    g2 = num / n_mean**2 if n_mean > N_FLOOR else math.nan
    f_e = float(np.sum(f_e_n))
    f_h = float(np.sum(f_h_n))
    # the factorization discards the two-particle correlation entirely
    delta = 0.0 if hartree_fock else float(cx_sum) - f_e * f_h
    return SjcmObservables(n_mean, g2, f_e, f_h, f_h - f_e, delta, o)


def observables(state: SjcmHierarchyState) -> SjcmObservables:
    n_vec = np.arange(state.n_levels, dtype=float)
    return _aggregate(
        state.p, state.f_e, state.f_h, state.c_x.sum(),
        n_vec, n_vec * (n_vec - 1.0), state.mode == HARTREE_FOCK,
    )


def _hierarchy_observer(levels: int, hartree_fock: bool):
    n_vec = np.arange(levels, dtype=float)
    n2_vec = n_vec * (n_vec - 1.0)

    def observer(t, y):
        arr = y.reshape(5, levels)
        obs = _aggregate(arr[0], arr[1], arr[2], arr[4].sum(), n_vec, n2_vec, hartree_fock)
        out = {
            "N": obs.N, "g2": obs.g2, "f_e": obs.f_e, "f_h": obs.f_h,
            "C": obs.C, "delta": obs.delta,
        }
        for n in range(levels):
            out[f"p{n}"] = arr[0, n]
        for n in range(levels - 1):
            out[f"psi{n}"] = arr[3, n]
        return out

    return observer


def evolve_hierarchy(spec: QdInitSpec, params: SjcmParams | None = None,
                     cfg: IntegratorConfig | None = None, mode: str = EXACT) -> TimeSeries:
    """Integrate the hierarchy (exact closure or Hartree-Fock truncation)."""
    params = params or SjcmParams()
    cfg = cfg or IntegratorConfig.rabi(params.g)
    state0 = hierarchy_init(spec, params, mode)
    levels = state0.n_levels
    root = np.sqrt(np.arange(1, levels + 1, dtype=float))
    hf = mode == HARTREE_FOCK
    g = params.g

    def rhs(t, y):
        return _derivs(y.reshape(5, levels), g, root, hf).ravel()

    return integrate(rhs, state0.pack(), cfg, observer=_hierarchy_observer(levels, hf))


def _oracle_health_gate(rho_mat, basis, t):
    report = validate_density(DensityMatrix(basis, rho_mat))
    if not report.ok():
        raise HealthError("density-matrix health check failed", report, t)


def oracle_evolve(spec: QdInitSpec, params: SjcmParams | None = None,
                  cfg: IntegratorConfig | None = None) -> TimeSeries:
    """Independent reference: von Neumann evolution of the full density
    matrix in the four-configuration basis, emitting the hierarchy's
    observables plus the oscillation ability O."""
    params = params or SjcmParams()
    cfg = cfg or IntegratorConfig.rabi(params.g)
    levels = _resolve_levels(spec, params)
    n_max = levels - 1
    basis = BasisSpec(n_max, SJCM_LABELS)
    rho0 = DensityMatrix.diagonal_mixture(
        basis, spec.photon_dist[:levels], (spec.c_g, spec.c_xs, spec.c_plus, spec.c_minus)
    )

    b = np.diag(np.sqrt(np.arange(1, levels, dtype=float)), 1)
    e_g_xs = np.zeros((4, 4))
    e_g_xs[0, 1] = 1.0
    h = -params.g * (np.kron(b.T, e_g_xs) + np.kron(b, e_g_xs.T))
    h = h.astype(complex)
    dim = basis.dim

    def rhs(t, y):
        rho = y.reshape(dim, dim)
        return (1j * (rho @ h - h @ rho)).ravel()

    i_g = basis.config_index("G")
    i_xs = basis.config_index("Xs")
    i_plus = basis.config_index("+s")
    i_minus = basis.config_index("-s")
    n_vec = np.arange(levels, dtype=float)
    n2_vec = n_vec * (n_vec - 1.0)
    top_xs = basis.index(n_max, "Xs")

    def observer(t, y):
        rho = y.reshape(dim, dim)
        _oracle_health_gate(rho, basis, t)
        if rho[top_xs, top_xs].real > LEAK_TOL:
            raise RuntimeError(
                f"top photon level carries exciton weight {rho[top_xs, top_xs].real:.3e} "
                f"at t={t:.6g}; increase n_max"
            )
        pops = np.diag(rho).real.reshape(levels, 4)
        p = pops.sum(axis=1)
        f_e_n = pops[:, i_xs] + pops[:, i_minus]
        f_h_n = pops[:, i_xs] + pops[:, i_plus]
        cx_sum = pops[:, i_xs].sum()
        o_val = pops[:, i_g].sum() + pops[:, i_xs].sum()
        obs = _aggregate(p, f_e_n, f_h_n, cx_sum, n_vec, n2_vec, False, o_val)
        out = {
            "N": obs.N, "g2": obs.g2, "f_e": obs.f_e, "f_h": obs.f_h,
            "C": obs.C, "delta": obs.delta, "O": obs.O,
        }
        for n in range(levels):
            out[f"p{n}"] = p[n]
        for n in range(levels - 1):
            out[f"psi{n}"] = rho[basis.index(n + 1, "G"), basis.index(n, "Xs")].imag
        return out

    return integrate(rhs, rho0.mat.ravel(), cfg, observer=observer)


@dataclass(frozen=True)
class SweepPoint:
    O: float
    C: float
    I: float
    delta: float
    g2_max: float


def _sweep_chunk(specs: list[QdInitSpec], params: SjcmParams, cfg: IntegratorConfig,
                 mode: str) -> np.ndarray:
    levels = max(_resolve_levels(s, params) for s in specs)
    shared = SjcmParams(g=params.g, n_max=levels - 1)
    states = [hierarchy_init(s, shared, mode) for s in specs]
    batch = np.stack([np.stack([st.p, st.f_e, st.f_h, st.psi, st.c_x]) for st in states])
    n_specs = batch.shape[0]
    root = np.sqrt(np.arange(1, levels + 1, dtype=float))
    hf = mode == HARTREE_FOCK
    g = params.g
    n_vec = np.arange(levels, dtype=float)
    n2_vec = n_vec * (n_vec - 1.0)
    g2_max = np.full(n_specs, -np.inf)

    def rhs(t, y):
        return _derivs(y.reshape(n_specs, 5, levels), g, root, hf).ravel()

    def observer(t, y):
        p = y.reshape(n_specs, 5, levels)[:, 0, :]
        n_mean = p @ n_vec
        num = p @ n2_vec
        with np.errstate(divide="ignore", invalid="ignore"):
            g2 = np.where(n_mean > N_FLOOR, num / n_mean**2, np.nan)
        np.fmax(g2_max, g2, out=g2_max)
        return {}

    integrate(rhs, batch.ravel(), cfg, observer=observer)
    return np.where(np.isfinite(g2_max), g2_max, np.nan)


def sweep_g2max(grid, params: SjcmParams | None = None, cfg: IntegratorConfig | None = None,
                horizon: float | None = None, mode: str = EXACT) -> list[SweepPoint]:
    """Maximum of g2(0)(t) over a finite horizon for every initial spec.

    The dynamics mixes incommensurate Rabi frequencies (quasi-periodic), so
    the default horizon of 20 Rabi periods bounds the search.  Points are
    independent; QDLAB_THREADS caps how many chunks run concurrently.
    """
    specs = list(grid)
    if not specs:
        return []
    params = params or SjcmParams()
    if cfg is None:
        periods = 20.0 if horizon is None else horizon / params.rabi_period
        cfg = IntegratorConfig.rabi(params.g, periods=periods)
    elif horizon is not None:
        cfg = cfg.resampled(t_span=(cfg.t_span[0], cfg.t_span[0] + horizon))

    raw = os.environ.get("QDLAB_THREADS", "1")
    try:
        threads = max(1, int(raw))
    except ValueError:
        raise ValueError(f"QDLAB_THREADS must be an integer, got {raw!r}") from None
    threads = min(threads, len(specs))

    bounds = np.linspace(0, len(specs), threads + 1).astype(int)
    chunks = [specs[a:b] for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
    if threads == 1:
        results = [_sweep_chunk(chunk, params, cfg, mode) for chunk in chunks]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda ch: _sweep_chunk(ch, params, cfg, mode), chunks))
    g2m = np.concatenate(results)
    points = []
    for s, gm in zip(specs, g2m):
        o, c, i = s.oci
        points.append(SweepPoint(o, c, i, s.delta, float(gm)))
    return points


def _c_range(c_max: float, d_c: float) -> np.ndarray:
    k = int(math.floor(c_max / d_c + 1e-9))
    return np.concatenate([-d_c * np.arange(k, 0, -1), d_c * np.arange(0, k + 1)])


def grid_delta0_path(d_c: float = 0.02, photon_dist=(0.0, 1.0)) -> list[QdInitSpec]:
    """Uncorrelated family f_e + f_h = 1, delta = 0, swept over the charge C."""
    return [
        QdInitSpec.from_occupations(0.5 * (1.0 - c), 0.5 * (1.0 + c), 0.0, photon_dist)
        for c in _c_range(1.0, d_c)
    ]


def grid_fixed_o(o: float, d_c: float = 0.02, photon_dist=(0.0, 1.0)) -> list[QdInitSpec]:
    """All admissible charges at fixed oscillation ability O, balanced (I = 0)."""
    return [
        QdInitSpec.from_oci(o, c, 0.0, photon_dist)
        for c in _c_range(1.0 - o, d_c)
    ]


def grid_co_triangle(d_o: float = 0.02, d_c: float = 0.02, photon_dist=(0.0, 1.0)) -> list[QdInitSpec]:
    """The full admissible (O, C) wedge at I = 0."""
    specs = []
    n_o = int(math.floor(1.0 / d_o + 1e-9))
    for k in range(n_o + 1):
        specs.extend(grid_fixed_o(k * d_o, d_c, photon_dist))
    return specs
