"""Closed-form moment oracles and the stationary Langevin density."""

import math

import numpy as np
import pytest

from spectrwm import (
    HeatParams,
    LangevinTarget,
    ModelKind,
    ModelSpec,
    QuadraticTestFunction,
    build_grid,
    drift_nonlinear,
    eigenbasis,
    exp_time_integral,
    from_spectral,
    generator_residual,
    heat_covariance,
    heat_covariance_time_integral,
    heat_mean,
    laplacian_matvec,
    mode_variance,
    mode_variance_time_integral,
    ou_physical_second_moment,
    ou_second_moment_time_integral,
    semidiscrete_ou_moments,
    semidiscrete_ou_time_integrals,
    to_spectral,
)
from spectrwm.semidiscretization import FourierCoefficients

HEAT1 = ModelSpec(kind=ModelKind.HEAT, lam=1.0, sigma=1.0)


def test_mode_variance_closed_form_and_zero_decay_limit():
    assert mode_variance(1.0, 1.0) == pytest.approx((1.0 - math.exp(-2.0)) / 2.0, rel=1e-15)
    # decay -> 0 continues to the Brownian value t.
    assert mode_variance(0.0, 3.5) == 3.5
    np.testing.assert_allclose(
        mode_variance(np.array([0.0, 2.0]), 0.25),
        [0.25, (1.0 - math.exp(-1.0)) / 4.0],
        rtol=1e-14,
    )


def test_mode_variance_continuous_at_zero_decay():
    eps = 1e-9
    assert mode_variance(eps, 1.7) == pytest.approx(1.7, rel=1e-8)


def test_mode_variance_time_integral_closed_form():
    # integral of (1 - e^(-2 a t))/(2a): at a=1, T=1 this is 1/2 - (1 - e^-2)/4.
    want = 0.5 - (1.0 - math.exp(-2.0)) / 4.0
    assert mode_variance_time_integral(1.0, 1.0) == pytest.approx(want, rel=1e-14)
    # zero decay integrates the Brownian variance t to T^2/2.
    assert mode_variance_time_integral(0.0, 2.0) == pytest.approx(2.0, rel=1e-14)


def test_mode_variance_time_integral_matches_quadrature():
    ts = np.linspace(0.0, 0.8, 20001)
    for a in (0.3, 1.0, 7.0):
        num = np.trapezoid(mode_variance(a, ts), ts)
        assert mode_variance_time_integral(a, 0.8) == pytest.approx(num, rel=1e-8)


def test_exp_time_integral():
    assert exp_time_integral(-2.0, 1.0) == pytest.approx((1.0 - math.exp(-2.0)) / 2.0, rel=1e-15)
    assert exp_time_integral(0.0, 4.0) == 4.0
    np.testing.assert_allclose(
        exp_time_integral(np.array([0.0, 1.0]), 2.0),
        [2.0, math.expm1(2.0)],
        rtol=1e-14,
    )


def test_heat_params_validation():
    with pytest.raises(ValueError):
        HeatParams(truncation=0)
    with pytest.raises(ValueError):
        HeatParams(sigma=0.0)
    with pytest.raises(ValueError):
        HeatParams(lam=-1.0)


def test_heat_mean_single_mode_decay():
    # u0 = cos x decays as e^(-(1 + lam) t) under the damped heat equation.
    coeffs = FourierCoefficients(cos=np.array([math.sqrt(math.pi)]), sin=np.zeros(1))
    params = HeatParams(lam=1.0)
    x = np.linspace(0.0, 2.0 * math.pi, 7)
    np.testing.assert_allclose(
        heat_mean(0.7, x, coeffs, params), math.exp(-2.0 * 0.7) * np.cos(x), rtol=1e-12
    )


def test_heat_stationary_variance_is_quarter_coth_pi():
    # sigma=1, lam=1: C(x,x) at stationarity sums 1/(2(k^2+1)) over the
    # normalized modes, which telescopes to coth(pi)/4.
    params = HeatParams(lam=1.0, truncation=200_000)
    got = heat_covariance(60.0, 1.3, 1.3, params)
    want = math.cosh(math.pi) / math.sinh(math.pi) / 4.0
    assert got == pytest.approx(want, abs=2e-6)
    assert want == pytest.approx(0.25093546829933033, rel=1e-15)


def test_heat_covariance_truncation_tail_bound():
    params_small = HeatParams(lam=1.0, truncation=500)
    params_large = HeatParams(lam=1.0, truncation=2000)
    a = heat_covariance(2.0, 0.4, 0.4, params_small)
    b = heat_covariance(2.0, 0.4, 0.4, params_large)
    assert abs(a - b) < 1.0 / (math.pi * 500)


def test_heat_covariance_series_reference():
    # Independent slow summation of the same series, written without the
    # vectorized helpers.
    params = HeatParams(lam=0.5, truncation=400)
    t, x, y = 0.9, 0.7, 2.1
    total = mode_variance(params.lam, t) / (2.0 * math.pi)
    for k in range(1, 401):
        decay = k * k + params.lam
        term = mode_variance(decay, t) / math.pi
        total += term * (math.cos(k * x) * math.cos(k * y) + math.sin(k * x) * math.sin(k * y))
    assert heat_covariance(t, x, y, params) == pytest.approx(total, rel=1e-12)


def test_heat_covariance_time_integral_matches_quadrature():
    params = HeatParams(lam=1.0, truncation=300)
    ts = np.linspace(0.0, 1.0, 2001)
    vals = [heat_covariance(t, 0.5, 1.1, params) for t in ts]
    num = np.trapezoid(vals, ts)
    assert heat_covariance_time_integral(1.0, 0.5, 1.1, params) == pytest.approx(num, rel=1e-6)


def test_semidiscrete_ou_moments_zero_time():
    grid = build_grid(8)
    basis = eigenbasis(grid, HEAT1)
    ic = np.random.default_rng(0).normal(size=8)
    mean, variance = semidiscrete_ou_moments(0.0, grid, basis, 1.0, ic)
    np.testing.assert_allclose(mean, to_spectral(basis, ic), rtol=1e-14)
    assert not variance.any()


def test_semidiscrete_ou_moments_match_euler_maruyama():
    # Weak check against a fine-step EM integrator of the n=2 system.
    grid = build_grid(2)
    basis = eigenbasis(grid, HEAT1)
    ic = np.array([1.0, -0.5])
    horizon, dt, replicas = 0.5, 5e-4, 4000
    steps = int(round(horizon / dt))
    rng = np.random.default_rng(123)
    v = np.tile(ic, (replicas, 1))
    noise_scale = math.sqrt(dt) / math.sqrt(grid.dx)
    for _ in range(steps):
        drift = laplacian_matvec(grid, v) - v
        v = v + dt * drift + noise_scale * rng.standard_normal(v.shape)
    vhat = to_spectral(basis, v)
    mean, variance = semidiscrete_ou_moments(horizon, grid, basis, 1.0, ic)
    mean_err = np.abs(vhat.mean(axis=0) - mean)
    mean_stderr = vhat.std(axis=0, ddof=1) / math.sqrt(replicas)
    assert np.all(mean_err < 3.0 * mean_stderr + 2e-3)
    var_err = np.abs(vhat.var(axis=0, ddof=1) - variance)
    var_stderr = variance * math.sqrt(2.0 / (replicas - 1))
    assert np.all(var_err < 3.0 * var_stderr + 2e-3)


def test_ou_physical_second_moment_translation_invariant_from_zero_ic():
    # Zero IC plus translation-invariant noise: every grid point has the
    # same second moment, equal to the average mode variance over n.
    grid = build_grid(16)
    basis = eigenbasis(grid, HEAT1)
    mean, variance = semidiscrete_ou_moments(1.0, grid, basis, 1.0, np.zeros(16))
    second = ou_physical_second_moment(basis, mean, variance)
    np.testing.assert_allclose(second, second[0], rtol=1e-12)
    assert second[0] == pytest.approx(variance.sum() / grid.n, rel=1e-12)


def test_ou_second_moment_frozen_value():
    # n=16, lam=1, sigma=1, zero IC, T=1; value pinned by this oracle and
    # reproduced by the fixed-time Monte Carlo runs.
    grid = build_grid(16)
    basis = eigenbasis(grid, HEAT1)
    mean, variance = semidiscrete_ou_moments(1.0, grid, basis, 1.0, np.zeros(16))
    second = ou_physical_second_moment(basis, mean, variance)
    assert second[0] == pytest.approx(0.233994274, abs=5e-9)
    integ = ou_second_moment_time_integral(1.0, grid, basis, 1.0, np.zeros(16))
    assert integ[0] == pytest.approx(0.186706322, abs=5e-9)


def test_ou_second_moment_approaches_continuum():
    # Refining the grid drives the per-point stationary-ish moment toward
    # the continuum covariance diagonal.
    params = HeatParams(lam=1.0, truncation=100_000)
    continuum = heat_covariance(1.0, 0.0, 0.0, params)
    errs = []
    for n in (32, 64, 128):
        grid = build_grid(n)
        basis = eigenbasis(grid, HEAT1)
        mean, variance = semidiscrete_ou_moments(1.0, grid, basis, 1.0, np.zeros(n))
        errs.append(abs(ou_physical_second_moment(basis, mean, variance)[0] - continuum))
    assert errs[2] < errs[1] < errs[0]
    assert errs[2] < 5e-4


def test_ou_time_integral_cross_terms():
    # With a nonzero IC the mean-squared integrand couples mode pairs; check
    # against dense numerical integration of the exact mean trajectory.
    grid = build_grid(8)
    basis = eigenbasis(grid, HEAT1)
    ic = np.random.default_rng(5).normal(size=8)
    ts = np.linspace(0.0, 1.0, 4001)
    vhat0 = to_spectral(basis, ic)
    means = np.exp(np.outer(ts, basis.eigenvalues)) * vhat0
    mean_sq_num = np.trapezoid(from_spectral(basis, means) ** 2, ts, axis=0)
    variance_num = np.trapezoid(
        [(1.0 / grid.dx) * mode_variance(-basis.eigenvalues, t) for t in ts], ts, axis=0
    )
    want = mean_sq_num + variance_num @ basis.vectors**2
    got = ou_second_moment_time_integral(1.0, grid, basis, 1.0, ic)
    np.testing.assert_allclose(got, want, rtol=1e-6)


def test_ou_oracles_reject_nonlinear_models():
    grid = build_grid(4)
    model = ModelSpec(kind=ModelKind.BURGERS)
    basis = eigenbasis(grid, model)
    with pytest.raises(ValueError):
        semidiscrete_ou_moments(1.0, grid, basis, 1.0, np.zeros(4), model=model)
    with pytest.raises(ValueError):
        semidiscrete_ou_time_integrals(1.0, grid, basis, 1.0, np.zeros(4), model=model)


def test_langevin_target_drift_identity():
    # sigma^2/(2 dx) * grad log pi equals the model drift Lv - v^3 exactly.
    grid = build_grid(12)
    model = ModelSpec(kind=ModelKind.LANGEVIN, sigma=1.3)
    basis = eigenbasis(grid, model)
    target = LangevinTarget.for_model(model, grid, basis)
    v = np.random.default_rng(8).normal(size=12)
    drift = laplacian_matvec(grid, v) + drift_nonlinear(model, grid, v)
    np.testing.assert_allclose(
        model.sigma**2 / (2.0 * grid.dx) * target.grad_log_density(v), drift, rtol=1e-12
    )


def test_langevin_log_density_gradient_consistency():
    grid = build_grid(6)
    model = ModelSpec(kind=ModelKind.LANGEVIN)
    basis = eigenbasis(grid, model)
    target = LangevinTarget.for_model(model, grid, basis)
    v = np.random.default_rng(2).normal(size=6)
    grad = target.grad_log_density(v)
    eps = 1e-6
    for i in range(6):
        e = np.zeros(6)
        e[i] = eps
        fd = (target.log_density(v + e) - target.log_density(v - e)) / (2.0 * eps)
        assert fd == pytest.approx(grad[i], rel=1e-6, abs=1e-7)


def test_langevin_jump_log_ratios_exact():
    # The polynomial expansion agrees with direct density evaluation to
    # near machine precision for every mode and both signs.
    grid = build_grid(20)
    model = ModelSpec(kind=ModelKind.LANGEVIN)
    basis = eigenbasis(grid, model)
    target = LangevinTarget.for_model(model, grid, basis)
    rng = np.random.default_rng(17)
    h = math.sqrt(grid.dx)
    for _ in range(25):
        v = rng.normal(scale=0.6, size=20)
        up, down = target.jump_log_ratios(v, basis, h)
        base = target.log_density(v)
        for i in range(20):
            shift = h * basis.vectors[i]
            assert up[i] == pytest.approx(target.log_density(v + shift) - base, rel=1e-11, abs=1e-11)
            assert down[i] == pytest.approx(target.log_density(v - shift) - base, rel=1e-11, abs=1e-11)


def test_langevin_jump_log_ratios_batched():
    grid = build_grid(10)
    model = ModelSpec(kind=ModelKind.LANGEVIN)
    basis = eigenbasis(grid, model)
    target = LangevinTarget.for_model(model, grid, basis)
    batch = np.random.default_rng(4).normal(size=(7, 10))
    up, down = target.jump_log_ratios(batch, basis, 0.3)
    for r in range(7):
        u_r, d_r = target.jump_log_ratios(batch[r], basis, 0.3)
        np.testing.assert_allclose(up[r], u_r, rtol=1e-13, atol=1e-13)
        np.testing.assert_allclose(down[r], d_r, rtol=1e-13, atol=1e-13)


def test_langevin_target_requires_langevin_model():
    grid = build_grid(4)
    heat = ModelSpec(kind=ModelKind.HEAT)
    with pytest.raises(ValueError):
        LangevinTarget.for_model(heat, grid, eigenbasis(grid, heat))


def test_quadratic_test_function_derivatives():
    rng = np.random.default_rng(3)
    a = rng.normal(size=(5, 5))
    a = 0.5 * (a + a.T)
    b = rng.normal(size=5)
    f = QuadraticTestFunction(a=a, b=b)
    v = rng.normal(size=5)
    assert f(v) == pytest.approx(v @ a @ v + b @ v, rel=1e-14)
    eps = 1e-6
    for i in range(5):
        e = np.zeros(5)
        e[i] = eps
        fd = (f(v + e) - f(v - e)) / (2.0 * eps)
        assert fd == pytest.approx(f.gradient(v)[i], rel=1e-7, abs=1e-8)
    assert f.hessian_trace() == pytest.approx(2.0 * np.trace(a), rel=1e-14)


def test_quadratic_test_function_rejects_asymmetric():
    with pytest.raises(ValueError):
        QuadraticTestFunction(a=np.array([[0.0, 1.0], [0.0, 0.0]]), b=np.zeros(2))


def test_generator_residual_exact_zero_for_norm_squared_at_origin():
    # f(v) = |v|^2 at v=0: both generator sides equal n sigma^2 / dx exactly,
    # so the residual is pure floating-point cancellation.
    for sigma in (0.5, 1.0, 2.0):
        model = ModelSpec(kind=ModelKind.HEAT, lam=1.0, sigma=sigma)
        grid = build_grid(8)
        basis = eigenbasis(grid, model)
        f = QuadraticTestFunction(a=np.eye(8), b=np.zeros(8))
        res = generator_residual(f, np.zeros(8), model, grid, basis, 0.1)
        assert res < 1e-12 * (grid.n * sigma**2 / grid.dx)


def test_generator_residual_second_order_in_h():
    # Residuals shrink like h^2 as the jump size is refined.
    model = HEAT1
    grid = build_grid(8)
    basis = eigenbasis(grid, model)
    rng = np.random.default_rng(6)
    hs = np.array([0.2, 0.1, 0.05, 0.025])
    for _ in range(3):
        a = rng.normal(size=(8, 8))
        f = QuadraticTestFunction(a=0.5 * (a + a.T), b=rng.normal(size=8))
        v = rng.normal(size=8)
        res = np.array([generator_residual(f, v, model, grid, basis, h) for h in hs])
        slope = np.polyfit(np.log(hs), np.log(res), 1)[0]
        assert 1.8 < slope < 2.2


def test_generator_residual_scales_with_sigma():
    # The residual stays second order for light and heavy noise.
    grid = build_grid(8)
    rng = np.random.default_rng(7)
    a = rng.normal(size=(8, 8))
    f = QuadraticTestFunction(a=0.5 * (a + a.T), b=rng.normal(size=8))
    v = rng.normal(size=8)
    hs = np.array([0.1, 0.05, 0.025])
    for sigma in (0.5, 2.0):
        model = ModelSpec(kind=ModelKind.HEAT, lam=1.0, sigma=sigma)
        basis = eigenbasis(grid, model)
        res = np.array([generator_residual(f, v, model, grid, basis, h) for h in hs])
        slope = np.polyfit(np.log(hs), np.log(res), 1)[0]
        assert 1.7 < slope < 2.3
