"""Reference statistics the simulations are judged against.

Closed-form series for the damped stochastic heat equation on [0, 2*pi)
(mean, spatial covariance, and the covariance's time integral), exact
per-mode moments of the semi-discrete linear system, the quartic
stationary density targeted by the Langevin model, and a direct residual
comparing the jump-process generator with the drift-diffusion generator
on quadratic test functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from spectrwm.jump_kernel import Variant, academic_rates, make_state
from spectrwm.semidiscretization import (
    TWO_PI,
    FourierCoefficients,
    Grid,
    ModelKind,
    ModelSpec,
    SpectralBasis,
    drift_nonlinear,
    from_spectral,
    laplacian_matvec,
    to_spectral,
)


@dataclass(frozen=True)
class HeatParams:
    """Parameters of the damped stochastic heat equation on [0, 2*pi).

    lam is the damping coefficient, sigma the noise amplitude, and
    truncation the number of trigonometric modes kept in the series.
    The dropped variance tail is below sigma^2/(pi*truncation).
    """

    lam: float = 0.0
    sigma: float = 1.0
    truncation: int = 1000

    def __post_init__(self):
        if self.truncation < 1:
            raise ValueError("truncation must be at least 1")
        if self.sigma <= 0.0:
            raise ValueError("sigma must be positive")
        if self.lam < 0.0:
            raise ValueError("lam must be nonnegative")


def mode_variance(decay, t):
    """Variance (1 - e^(-2*decay*t)) / (2*decay) of a unit-noise scalar mode.

    Continued as t at decay = 0, where the mode is a Brownian motion.
    Accepts scalar or array decay.
    """
    decay = np.asarray(decay, dtype=float)
    safe = np.where(decay == 0.0, 1.0, decay)
    with np.errstate(invalid="ignore"):
        out = -np.expm1(-2.0 * decay * t) / (2.0 * safe)
    out = np.where(decay == 0.0, t, out)
    return float(out) if out.ndim == 0 else out


def mode_variance_time_integral(decay, horizon):
    """Integral of mode_variance(decay, t) over t in [0, horizon].

    Termwise closed form horizon/(2*decay) + expm1(-2*decay*horizon)/(4*decay^2),
    continued as horizon^2/2 at decay = 0.
    """
    decay = np.asarray(decay, dtype=float)
    safe = np.where(decay == 0.0, 1.0, decay)
    with np.errstate(invalid="ignore"):
        out = horizon / (2.0 * safe) + np.expm1(-2.0 * decay * horizon) / (4.0 * safe**2)
    out = np.where(decay == 0.0, 0.5 * horizon * horizon, out)
    return float(out) if out.ndim == 0 else out


def exp_time_integral(s, horizon):
    """Integral of e^(s*t) over t in [0, horizon]: expm1(s*horizon)/s, or horizon at s = 0."""
    s = np.asarray(s, dtype=float)
    safe = np.where(s == 0.0, 1.0, s)
    with np.errstate(invalid="ignore"):
        out = np.expm1(s * horizon) / safe
    out = np.where(s == 0.0, horizon, out)
    return float(out) if out.ndim == 0 else out


def heat_mean(t: float, x, coeffs: FourierCoefficients, params: HeatParams):
    """Mean field at time t: each wavenumber-k term decays by e^(-(k^2+lam)t)."""
    if t < 0.0:
        raise ValueError("time must be nonnegative")
    xv = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.full_like(xv, coeffs.c0 * math.exp(-params.lam * t) / math.sqrt(TWO_PI))
    kmax = min(params.truncation, coeffs.cos.size)
    if kmax > 0:
        k = np.arange(1, kmax + 1, dtype=float)
        decay = np.exp(-(k**2 + params.lam) * t)
        angles = np.outer(xv, k)
        out = out + (
            np.cos(angles) @ (decay * coeffs.cos[:kmax])
            + np.sin(angles) @ (decay * coeffs.sin[:kmax])
        ) / math.sqrt(math.pi)
    return float(out[0]) if np.ndim(x) == 0 else out


def heat_covariance(t: float, x: float, y: float, params: HeatParams) -> float:
    """Spatial covariance Cov(u(t,x), u(t,y)) started from a deterministic state.

    At lam = 0 the constant mode contributes the secular term sigma^2*t/(2*pi);
    every other mode saturates at its stationary variance.  Supports t = inf
    for lam > 0.
    """
    if t < 0.0:
        raise ValueError("time must be nonnegative")
    theta = float(x) - float(y)
    k = np.arange(1, params.truncation + 1, dtype=float)
    series = float(np.cos(k * theta) @ mode_variance(k**2 + params.lam, t))
    const = mode_variance(params.lam, t)
    return params.sigma**2 * (const / TWO_PI + series / math.pi)


def heat_covariance_time_integral(horizon: float, x: float, y: float, params: HeatParams) -> float:
    """Integral of heat_covariance over t in [0, horizon], integrated termwise.

    At lam = 0 the secular constant-mode term integrates to sigma^2*horizon^2/(4*pi).
    """
    if horizon < 0.0:
        raise ValueError("horizon must be nonnegative")
    theta = float(x) - float(y)
    k = np.arange(1, params.truncation + 1, dtype=float)
    series = float(np.cos(k * theta) @ mode_variance_time_integral(k**2 + params.lam, horizon))
    const = mode_variance_time_integral(params.lam, horizon)
    return params.sigma**2 * (const / TWO_PI + series / math.pi)


def _require_linear_drift(model: ModelSpec | None) -> None:
    if model is not None and model.kind is not ModelKind.HEAT:
        raise ValueError(
            "exact moments need a purely linear drift; the %s model has a nonlinear term"
            % model.kind.value
        )


def semidiscrete_ou_moments(
    t: float,
    grid: Grid,
    basis: SpectralBasis,
    sigma: float,
    ic: np.ndarray,
    model: ModelSpec | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Exact per-mode mean and variance of the noise-driven linear system.

    Mode i is an independent scalar diffusion with drift eigenvalue
    basis.eigenvalues[i] and noise variance sigma^2/dx per unit time, so
    mean_i(t) = e^(mu_i t) <ic, e_i> and the variance follows mode_variance.
    Only valid when the drift has no nonlinear part; passing a model with
    one raises ValueError.
    """
    _require_linear_drift(model)
    if t < 0.0:
        raise ValueError("time must be nonnegative")
    vhat0 = to_spectral(basis, np.asarray(ic, dtype=float))
    mean = np.exp(basis.eigenvalues * t) * vhat0
    variance = (sigma**2 / grid.dx) * mode_variance(-basis.eigenvalues, t)
    return mean, variance


def semidiscrete_ou_time_integrals(
    horizon: float,
    grid: Grid,
    basis: SpectralBasis,
    sigma: float,
    ic: np.ndarray,
    model: ModelSpec | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Per-mode integrals of mean(t)^2 and variance(t) over [0, horizon]."""
    _require_linear_drift(model)
    if horizon < 0.0:
        raise ValueError("horizon must be nonnegative")
    vhat0 = to_spectral(basis, np.asarray(ic, dtype=float))
    mean_sq = vhat0**2 * exp_time_integral(2.0 * basis.eigenvalues, horizon)
    variance = (sigma**2 / grid.dx) * mode_variance_time_integral(-basis.eigenvalues, horizon)
    return mean_sq, variance


def ou_physical_moments(
    basis: SpectralBasis, mean: np.ndarray, variance: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Grid-space mean and variance implied by per-mode moments."""
    return from_spectral(basis, mean), variance @ basis.vectors**2


def ou_physical_second_moment(
    basis: SpectralBasis, mean: np.ndarray, variance: np.ndarray
) -> np.ndarray:
    """E[v_j^2] at every grid point: squared physical mean plus physical variance."""
    mean_phys, var_phys = ou_physical_moments(basis, mean, variance)
    return mean_phys**2 + var_phys


def ou_second_moment_time_integral(
    horizon: float,
    grid: Grid,
    basis: SpectralBasis,
    sigma: float,
    ic: np.ndarray,
    model: ModelSpec | None = None,
) -> np.ndarray:
    """Integral of E[v_j(t)^2] over [0, horizon] at every grid point.

    The mean-squared part keeps the cross terms between modes: the
    integrand (sum_i mean_i(t) e_i(j))^2 integrates mode pairs (i, k)
    against exp_time_integral(mu_i + mu_k, horizon).
    """
    _require_linear_drift(model)
    if horizon < 0.0:
        raise ValueError("horizon must be nonnegative")
    vhat0 = to_spectral(basis, np.asarray(ic, dtype=float))
    mu = basis.eigenvalues
    weights = exp_time_integral(mu[:, None] + mu[None, :], horizon) * np.outer(vhat0, vhat0)
    mean_part = np.einsum("ij,ik,kj->j", basis.vectors, weights, basis.vectors)
    var_int = (sigma**2 / grid.dx) * mode_variance_time_integral(-mu, horizon)
    return mean_part + var_int @ basis.vectors**2


@dataclass(frozen=True)
class LangevinTarget:
    """Stationary density of the semi-discrete Langevin system.

    log pi(v) = -beta * (sum v_i^4 / 4 - v^T L v / 2) up to a constant,
    with L the discrete Laplacian and beta = 2*dx/sigma^2.  This is the
    unique invariant density of dv = (Lv - v^3) dt + sigma/sqrt(dx) dW:
    the drift equals (sigma^2/(2*dx)) * grad log pi exactly, which the
    stationarity tests lean on.
    """

    grid: Grid
    basis: SpectralBasis
    beta: float
    _p1: np.ndarray = field(init=False, repr=False, compare=False)
    _p2: np.ndarray = field(init=False, repr=False, compare=False)
    _p3: np.ndarray = field(init=False, repr=False, compare=False)
    _p4sum: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.beta <= 0.0:
            raise ValueError("beta must be positive")
        vectors = self.basis.vectors
        object.__setattr__(self, "_p1", vectors.T.copy())
        object.__setattr__(self, "_p2", (vectors**2).T.copy())
        object.__setattr__(self, "_p3", (vectors**3).T.copy())
        object.__setattr__(self, "_p4sum", (vectors**4).sum(axis=1))

    @classmethod
    def for_model(cls, model: ModelSpec, grid: Grid, basis: SpectralBasis) -> "LangevinTarget":
        if model.kind is not ModelKind.LANGEVIN:
            raise ValueError("stationary target is defined for the langevin model only")
        return cls(grid=grid, basis=basis, beta=2.0 * grid.dx / model.sigma**2)

    def log_density(self, v: np.ndarray):
        """log pi(v) up to an additive constant; batched over leading axes."""
        v = np.asarray(v, dtype=float)
        quartic = 0.25 * np.sum(v**4, axis=-1)
        quadratic = 0.5 * np.sum(v * laplacian_matvec(self.grid, v), axis=-1)
        return -self.beta * (quartic - quadratic)

    def grad_log_density(self, v: np.ndarray) -> np.ndarray:
        """Gradient beta * (Lv - v^3); proportional to the model drift."""
        v = np.asarray(v, dtype=float)
        return self.beta * (laplacian_matvec(self.grid, v) - v**3)

    def jump_log_ratios(self, v: np.ndarray, basis: SpectralBasis, h: float):
        """log pi(v + h e_i) - log pi(v) and the -h counterpart, every mode at once.

        Exact polynomial expansion of the quartic-plus-quadratic energy;
        batched over leading axes of v.
        """
        if basis is not self.basis:
            raise ValueError("target is bound to a different basis")
        v = np.asarray(v, dtype=float)
        mu = self.basis.eigenvalues
        v2 = v * v
        odd = (v2 * v) @ self._p1 - (v @ self._p1) * mu + h * h * (v @ self._p3)
        even = 1.5 * (v2 @ self._p2) - 0.5 * mu + 0.25 * h * h * self._p4sum
        du_odd = h * odd
        du_even = h * h * even
        return -self.beta * (du_even + du_odd), -self.beta * (du_even - du_odd)


@dataclass(frozen=True)
class QuadraticTestFunction:
    """f(v) = v^T a v + b . v with symmetric a and exact derivatives."""

    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        b = np.asarray(self.b, dtype=float)
        if b.ndim != 1 or a.shape != (b.size, b.size):
            raise ValueError("need an n x n matrix and a length-n vector")
        if not np.array_equal(a, a.T):
            raise ValueError("quadratic form matrix must be symmetric")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    def __call__(self, v: np.ndarray):
        v = np.asarray(v, dtype=float)
        return np.einsum("...i,ij,...j->...", v, self.a, v) + v @ self.b

    def gradient(self, v: np.ndarray) -> np.ndarray:
        return 2.0 * np.asarray(v, dtype=float) @ self.a + self.b

    def hessian_trace(self) -> float:
        return 2.0 * float(np.trace(self.a))


def generator_residual(
    f: QuadraticTestFunction,
    v: np.ndarray,
    model: ModelSpec,
    grid: Grid,
    basis: SpectralBasis,
    h: float,
) -> float:
    """Absolute gap between the jump-process and diffusion generators at v.

    The jump side sums the grid-space rates against f(v +/- h e_i) - f(v);
    the diffusion side is drift . grad f + (sigma^2/(2 dx)) tr D^2 f.
    Smooth in h with the leading mismatch of order h^2.
    """
    v = np.asarray(v, dtype=float)
    state = make_state(v, Variant.ACADEMIC, model, grid, basis)
    rates = academic_rates(state, model, grid, basis, h)
    fv = f(v)
    up = f(v + h * basis.vectors)
    down = f(v - h * basis.vectors)
    jump_side = float(rates.forward @ (up - fv) + rates.backward @ (down - fv))
    drift = from_spectral(basis, basis.eigenvalues * state.vhat) + drift_nonlinear(model, grid, v)
    sde_side = float(drift @ f.gradient(v)) + model.sigma**2 / (2.0 * grid.dx) * f.hessian_trace()
    return abs(jump_side - sde_side)
