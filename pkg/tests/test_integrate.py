"""Integrator correctness: closed forms, order of accuracy, sampling, and
exact linear propagation."""

import math

import numpy as np
import pytest

from qdlab.integrate import (
    RK4_FIXED,
    RK45_ADAPTIVE,
    IntegrationError,
    IntegratorConfig,
    TimeSeries,
    eig_propagate,
    integrate,
)


def decay(t, y):
    return -y


@pytest.mark.parametrize("method", [RK4_FIXED, RK45_ADAPTIVE])
def test_exponential_decay(method):
    cfg = IntegratorConfig(t_span=(0.0, 1.0), method=method, dt=1e-3, sample_every=0.25)
    series = integrate(decay, [1.0], cfg)
    np.testing.assert_allclose(series["y0"], np.exp(-series.times), rtol=1e-8)


def test_harmonic_oscillator_period():
    def rhs(t, y):
        return np.array([y[1], -y[0]])

    cfg = IntegratorConfig(t_span=(0.0, 2 * math.pi), method=RK4_FIXED,
                           dt=1e-3, sample_every=math.pi / 2)
    series = integrate(rhs, [1.0, 0.0], cfg, names=["x", "v"])
    np.testing.assert_allclose(series["x"], np.cos(series.times), atol=1e-10)
    np.testing.assert_allclose(series["v"], -np.sin(series.times), atol=1e-10)

    cfg = cfg.resampled(method=RK45_ADAPTIVE, rtol=1e-11, atol=1e-13)
    series = integrate(rhs, [1.0, 0.0], cfg, names=["x", "v"])
    np.testing.assert_allclose(series["x"], np.cos(series.times), atol=1e-9)


def test_zero_rhs_is_exactly_constant():
    cfg = IntegratorConfig(t_span=(0.0, 10.0), method=RK4_FIXED, dt=0.1, sample_every=1.0)
    series = integrate(lambda t, y: np.zeros_like(y), [0.3, -1.7], cfg)
    np.testing.assert_array_equal(series["y0"], np.full(11, 0.3))
    np.testing.assert_array_equal(series["y1"], np.full(11, -1.7))


def test_rk4_fourth_order_convergence():
    """Halving dt should shrink the endpoint error by about 2^4."""
    def err(dt):
        cfg = IntegratorConfig(t_span=(0.0, 1.0), method=RK4_FIXED, dt=dt, sample_every=1.0)
        series = integrate(decay, [1.0], cfg)
        return abs(series["y0"][-1] - math.exp(-1.0))

    ratio = err(0.05) / err(0.025)
    assert ratio > 8.0


def test_complex_state_round_trip():
    """d_t y = i w y on a complex state, against the exact phase."""
    w = 2.0

    def rhs(t, y):
        return 1j * w * y

    cfg = IntegratorConfig(t_span=(0.0, 3.0), method=RK45_ADAPTIVE,
                           rtol=1e-11, atol=1e-13, sample_every=0.5)
    series = integrate(rhs, np.array([1.0 + 0.0j]), cfg)
    exact = np.exp(1j * w * series.times)
    assert np.iscomplexobj(series["y0"])
    np.testing.assert_allclose(series["y0"], exact, atol=1e-9)


def test_integrate_matches_eig_propagate():
    rng = np.random.default_rng(7)
    m = rng.normal(size=(5, 5))
    m -= np.diag(np.full(5, 2.0))  # push the spectrum left, keep it tame
    r0 = rng.normal(size=5)
    cfg = IntegratorConfig(t_span=(0.0, 2.0), rtol=1e-10, atol=1e-13, sample_every=0.2)
    names = [f"r{i}" for i in range(5)]
    ode = integrate(lambda t, y: m @ y, r0, cfg, names=names)
    exact = eig_propagate(m, r0, ode.times)
    for name in names:
        np.testing.assert_allclose(ode[name], exact[name], atol=1e-8)


def test_eig_propagate_rejects_defective_matrix():
    m = np.array([[0.0, 1.0], [0.0, 0.0]])  # Jordan block, no eigenbasis
    with pytest.raises(ValueError, match="ODE integrator"):
        eig_propagate(m, [1.0, 0.0], np.linspace(0, 1, 5))


def test_eig_propagate_validates_shapes():
    with pytest.raises(ValueError, match="square"):
        eig_propagate(np.zeros((2, 3)), [1.0, 0.0], [0.0, 1.0])
    with pytest.raises(ValueError, match="r0 shape"):
        eig_propagate(np.eye(2), [1.0, 0.0, 0.0], [0.0, 1.0])
    with pytest.raises(ValueError, match="names"):
        eig_propagate(np.eye(2), [1.0, 0.0], [0.0, 1.0], names=["a"])


def test_adaptive_step_underflow_aborts():
    """A rate too stiff for the step floor must raise, not spin."""
    cfg = IntegratorConfig(t_span=(0.0, 1.0), rtol=1e-12, atol=1e-14, sample_every=0.5)
    with pytest.raises(IntegrationError, match="underflow"):
        integrate(lambda t, y: -1e20 * y, [1.0], cfg)


def test_sampling_grid_covers_span():
    # stride divides the span: regular grid, endpoint included
    cfg = IntegratorConfig(t_span=(0.0, 1.0), method=RK4_FIXED, dt=0.01, sample_every=0.25)
    series = integrate(decay, [1.0], cfg)
    np.testing.assert_allclose(series.times, [0.0, 0.25, 0.5, 0.75, 1.0])
    # stride does not divide the span: the endpoint is appended
    cfg = IntegratorConfig(t_span=(0.0, 1.0), method=RK4_FIXED, dt=0.01, sample_every=0.4)
    series = integrate(decay, [1.0], cfg)
    np.testing.assert_allclose(series.times, [0.0, 0.4, 0.8, 1.0])


def test_observer_columns():
    cfg = IntegratorConfig(t_span=(0.0, 1.0), method=RK4_FIXED, dt=0.01, sample_every=0.5)
    series = integrate(decay, [1.0], cfg, observer=lambda t, y: {"twice": 2.0 * y[0]})
    assert series.names == ["twice"]
    np.testing.assert_allclose(series["twice"], 2.0 * np.exp(-series.times), rtol=1e-8)


def test_config_validation():
    with pytest.raises(ValueError, match="t_span must increase"):
        IntegratorConfig(t_span=(1.0, 0.0))
    with pytest.raises(ValueError, match="unknown method"):
        IntegratorConfig(t_span=(0.0, 1.0), method="euler")
    with pytest.raises(ValueError, match="positive"):
        IntegratorConfig(t_span=(0.0, 1.0), dt=-0.1)
    with pytest.raises(ValueError, match="coupling g"):
        IntegratorConfig.rabi(0.0)


def test_rabi_config_spans_periods():
    cfg = IntegratorConfig.rabi(0.5, periods=4.0, samples_per_period=100)
    period = math.pi / 0.5
    assert cfg.t_span == (0.0, 4.0 * period)
    assert cfg.sample_every == pytest.approx(period / 100)
    assert cfg.dt == pytest.approx(1e-3 * period)


def test_time_series_validation():
    with pytest.raises(ValueError, match="strictly increasing"):
        TimeSeries(np.array([0.0, 0.0, 1.0]))
    with pytest.raises(ValueError, match="column 'a'"):
        TimeSeries(np.array([0.0, 1.0]), {"a": np.zeros(3)})
    series = TimeSeries(np.array([0.0, 1.0]), {"a": np.zeros(2)})
    assert len(series) == 2
    with pytest.raises(KeyError, match="no column 'b'"):
        series["b"]


def test_names_length_checked():
    cfg = IntegratorConfig(t_span=(0.0, 1.0), method=RK4_FIXED, dt=0.1, sample_every=1.0)
    with pytest.raises(ValueError, match="names"):
        integrate(decay, [1.0, 2.0], cfg, names=["only_one"])
