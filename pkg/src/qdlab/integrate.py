"""Time propagation: fixed-step RK4, adaptive Dormand-Prince RK45, and exact
propagation of linear systems through their eigendecomposition.

Complex state vectors are integrated as interleaved real pairs so both
steppers only ever see float64 arrays.  Fixed-step runs are reproducible to
the byte: the step sequence depends only on the configuration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

__all__ = [
    "IntegratorConfig",
    "TimeSeries",
    "IntegrationError",
    "integrate",
    "eig_propagate",
]

RK4_FIXED = "rk4_fixed"
RK45_ADAPTIVE = "rk45_adaptive"

# Step size floor for the adaptive controller; going below means the error
# estimate cannot be satisfied and the run must abort rather than stall.
MIN_ADAPTIVE_STEP = 1e-14


class IntegrationError(RuntimeError):
    """Raised when a propagation cannot continue (e.g. step underflow)."""


@dataclass(frozen=True)
class IntegratorConfig:
    t_span: tuple[float, float]
    method: str = RK45_ADAPTIVE
    dt: float = 1e-3            # fixed-step size (rk4_fixed)
    rtol: float = 1e-9          # local error tolerances (rk45_adaptive)
    atol: float = 1e-12
    sample_every: float = 0.1   # output stride

    def __post_init__(self):
        t0, t1 = self.t_span
        if not t1 > t0:
            raise ValueError(f"t_span must increase, got {self.t_span}")
        if self.method not in (RK4_FIXED, RK45_ADAPTIVE):
            raise ValueError(f"unknown method {self.method!r}")
        if self.dt <= 0 or self.rtol <= 0 or self.atol <= 0 or self.sample_every <= 0:
            raise ValueError("dt, rtol, atol and sample_every must all be positive")

    @classmethod
    def rabi(cls, g: float, periods: float = 20.0, samples_per_period: int = 200,
             method: str = RK45_ADAPTIVE, **kwargs) -> "IntegratorConfig":
        """Span and stride in units of the Rabi period pi/g.

        The fixed step defaults to one thousandth of a period.
        """
        if g <= 0:
            raise ValueError(f"coupling g must be positive, got {g}")
        period = math.pi / g
        kwargs.setdefault("dt", 1e-3 * period)
        kwargs.setdefault("sample_every", period / samples_per_period)
        return cls(t_span=(0.0, periods * period), method=method, **kwargs)

    def resampled(self, **kwargs) -> "IntegratorConfig":
        return replace(self, **kwargs)


@dataclass
class TimeSeries:
    """Sampled trajectories: a shared time axis plus named columns."""

    times: np.ndarray
    columns: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        if self.times.ndim != 1 or self.times.size == 0:
            raise ValueError("times must be a non-empty 1-D array")
        if not np.all(np.diff(self.times) > 0):
            raise ValueError("times must be strictly increasing")
        cols = {}
        for name, values in self.columns.items():
            v = np.asarray(values)
            if v.shape != self.times.shape:
                raise ValueError(
                    f"column {name!r} has length {v.shape}, times have {self.times.shape}"
                )
            cols[str(name)] = v
        self.columns = cols

    @property
    def names(self) -> list[str]:
        return list(self.columns)

    def __getitem__(self, name: str) -> np.ndarray:
        try:
            return self.columns[name]
        except KeyError:
            raise KeyError(f"no column {name!r}; have {self.names}") from None

    def __len__(self) -> int:
        return self.times.size


def _sample_times(cfg: IntegratorConfig) -> np.ndarray:
    t0, t1 = cfg.t_span
    span = t1 - t0
    n = int(math.floor(span / cfg.sample_every + 1e-9))
    ts = t0 + cfg.sample_every * np.arange(n + 1)
    if t1 - ts[-1] > 1e-9 * span:
        ts = np.append(ts, t1)
    return ts


def _rk4_step(rhs, t, y, h):
    k1 = rhs(t, y)
    k2 = rhs(t + 0.5 * h, y + 0.5 * h * k1)
    k3 = rhs(t + 0.5 * h, y + 0.5 * h * k2)
    k4 = rhs(t + h, y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


# Dormand-Prince 5(4) tableau.
_DP_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_DP_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
_DP_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_DP_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])


def _dp_step(rhs, t, y, h):
    """One Dormand-Prince trial step: 5th order result plus error estimate."""
    k = []
    for i in range(7):
        yi = y
        if i:
            yi = y + h * sum(a * ki for a, ki in zip(_DP_A[i], k))
        k.append(rhs(t + _DP_C[i] * h, yi))
    y5 = y + h * sum(b * ki for b, ki in zip(_DP_B5, k) if b)
    err = h * sum((b5 - b4) * ki for b5, b4, ki in zip(_DP_B5, _DP_B4, k))
    return y5, err


def integrate(rhs, y0, cfg: IntegratorConfig, observer=None, names=None) -> TimeSeries:
    """Propagate d_t y = rhs(t, y) over cfg.t_span, sampling every cfg.sample_every.

    Steps land exactly on the sample times; the adaptive controller's step
    suggestion survives the clipping.  If `observer(t, y) -> dict` is given,
    its keys become the output columns; otherwise the raw state components do
    (named y0..yN or by `names`).  Complex states are handled as interleaved
    real pairs and handed back to the observer in complex form.
    """
    y0 = np.atleast_1d(np.asarray(y0))
    is_complex = np.iscomplexobj(y0)
    if is_complex:
        y = np.ascontiguousarray(y0, dtype=complex).view(np.float64).copy()

        def f(t, yr):
            dy = np.asarray(rhs(t, yr.view(np.complex128)), dtype=complex)
            return np.ascontiguousarray(dy).view(np.float64)
    else:
        y = np.asarray(y0, dtype=float).copy()

        def f(t, yr):
            return np.asarray(rhs(t, yr), dtype=float)

    ts = _sample_times(cfg)
    rows = []
    col_names = None

    def record(t, yr):
        nonlocal col_names
        state = yr.view(np.complex128) if is_complex else yr
        if observer is not None:
            obs = observer(t, state)
            if col_names is None:
                col_names = list(obs)
            rows.append([obs[k] for k in col_names])
        else:
            rows.append(state.copy())

    record(ts[0], y)
    t = ts[0]
    h_ctrl = min(cfg.sample_every, (cfg.t_span[1] - cfg.t_span[0]) / 100.0)

    for t_next in ts[1:]:
        if cfg.method == RK4_FIXED:
            m = max(1, int(math.ceil((t_next - t) / cfg.dt - 1e-9)))
            h = (t_next - t) / m
            for i in range(m):
                y = _rk4_step(f, t + i * h, y, h)
            t = t_next
        else:
            while t < t_next - 1e-12 * cfg.sample_every:
                if h_ctrl < MIN_ADAPTIVE_STEP:
                    raise IntegrationError(
                        f"adaptive step underflow (dt={h_ctrl:.3e}) at t={t:.6g}; "
                        "the local error estimate cannot be met"
                    )
                h = min(h_ctrl, t_next - t)
                y_new, err = _dp_step(f, t, y, h)
                scale = cfg.atol + cfg.rtol * np.maximum(np.abs(y), np.abs(y_new))
                err_norm = math.sqrt(float(np.mean((err / scale) ** 2)))
                if err_norm <= 1.0:
                    t += h
                    y = y_new
                    grow = 5.0 if err_norm == 0.0 else min(5.0, 0.9 * err_norm ** -0.2)
                    # only let full (unclipped) steps enlarge the controller step
                    if h == h_ctrl:
                        h_ctrl = h * grow
                    else:
                        h_ctrl = max(h_ctrl, h * grow)
                else:
                    h_ctrl = h * max(0.2, 0.9 * err_norm ** -0.2)
        record(t_next, y)

    if observer is not None:
        data = np.asarray(rows)
        cols = {k: data[:, i] for i, k in enumerate(col_names)}
    else:
        data = np.asarray(rows)
        if names is None:
            names = [f"y{i}" for i in range(data.shape[1])]
        if len(names) != data.shape[1]:
            raise ValueError(f"{len(names)} names for {data.shape[1]} state components")
        cols = {k: data[:, i] for i, k in enumerate(names)}
    return TimeSeries(ts, cols)


# Eigenvector matrices with condition numbers beyond this are treated as
# numerically defective; the exact-propagation route is then unreliable.
EIG_COND_LIMIT = 1e12


def eig_propagate(m, r0, times, names=None) -> TimeSeries:
    """Propagate d_t r = M r exactly via the eigendecomposition of M.

    r(t) = T diag(exp(lambda t)) T^-1 r(0).  Raises if the eigenvector matrix
    is ill-conditioned (near-defective M); use the ODE integrator then.
    """
    m = np.asarray(m)
    r0 = np.atleast_1d(np.asarray(r0))
    times = np.asarray(times, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"M must be square, got shape {m.shape}")
    if r0.shape != (m.shape[0],):
        raise ValueError(f"r0 shape {r0.shape} does not match M {m.shape}")
    w, vec = np.linalg.eig(m)
    cond = np.linalg.cond(vec)
    if not cond < EIG_COND_LIMIT:
        raise ValueError(
            f"eigenvector matrix condition number {cond:.3e} exceeds {EIG_COND_LIMIT:.0e} "
            "(near-defective M); use the ODE integrator instead"
        )
    c = np.linalg.solve(vec, r0.astype(complex))
    sol = (vec @ (c[:, None] * np.exp(np.outer(w, times)))).T
    if not (np.iscomplexobj(m) or np.iscomplexobj(r0)):
        sol = sol.real
    if names is None:
        names = [f"r{i}" for i in range(m.shape[0])]
    if len(names) != m.shape[0]:
        raise ValueError(f"{len(names)} names for {m.shape[0]} components")
    return TimeSeries(times, {k: sol[:, i] for i, k in enumerate(names)})
