"""Periodic grid, discrete Laplacian eigenbasis, and model drift terms.

Everything lives on a uniform grid of n points covering [0, 2*pi) with
periodic wrap-around.  The linear part of every model is diagonal in the
real trigonometric eigenbasis of the discrete Laplacian, so the basis is
built once and reused by the jump kernel, the baselines and the oracles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

TWO_PI = 2.0 * math.pi


class ModelKind(Enum):
    HEAT = "heat"
    LANGEVIN = "langevin"
    BURGERS = "burgers"
    KPZ = "kpz"


class Nonlinearity(Enum):
    """Spatial discretization of the quadratic term of Burgers and KPZ."""

    CENTRAL = "central"
    ONE_SIDED = "one-sided"


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on [0, 2*pi). Point j sits at j*dx."""

    n: int
    dx: float
    length: float = TWO_PI

    def points(self) -> np.ndarray:
        return np.arange(self.n) * self.dx


def build_grid(n: int) -> Grid:
    """Build the n-point periodic grid with spacing 2*pi/n.

    Raises ValueError for n < 2: a single point cannot carry the
    difference stencils used by the drift terms.
    """
    if not isinstance(n, (int, np.integer)) or isinstance(n, bool):
        raise ValueError("grid size n must be an integer, got %r" % (n,))
    if n < 2:
        raise ValueError("grid size n must be at least 2, got %d" % n)
    return Grid(n=int(n), dx=TWO_PI / n)


@dataclass(frozen=True)
class FourierCoefficients:
    """Coefficients of the series c0/sqrt(2*pi) + sum_k (a_k cos kx + b_k sin kx)/sqrt(pi)."""

    c0: float = 0.0
    cos: np.ndarray = field(default_factory=lambda: np.zeros(0))
    sin: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        object.__setattr__(self, "cos", np.asarray(self.cos, dtype=float))
        object.__setattr__(self, "sin", np.asarray(self.sin, dtype=float))
        if self.cos.shape != self.sin.shape:
            raise ValueError("cosine and sine coefficient arrays must have equal length")

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        """Evaluate the (normalized) trigonometric series at the points x."""
        x = np.asarray(x, dtype=float)
        out = np.full_like(x, self.c0 / math.sqrt(TWO_PI))
        for k in range(1, self.cos.size + 1):
            out = out + (self.cos[k - 1] * np.cos(k * x) + self.sin[k - 1] * np.sin(k * x)) / math.sqrt(math.pi)
        return out

    def truncated(self, n: int) -> "FourierCoefficients":
        """Drop every wavenumber above the Nyquist mode of an n-point grid."""
        kmax = n // 2 if n % 2 == 0 else (n - 1) // 2
        kmax = min(kmax, self.cos.size)
        return FourierCoefficients(self.c0, self.cos[:kmax].copy(), self.sin[:kmax].copy())


@dataclass(frozen=True)
class InitialCondition:
    """Named initial profile with an overall amplitude factor.

    Known names: trivial, bump, sinusoid, high_frequency, high_energy,
    fourier.  The fourier profile evaluates `coeffs` truncated at the
    grid Nyquist wavenumber.
    """

    name: str = "trivial"
    amplitude: float = 1.0
    coeffs: FourierCoefficients | None = None


_IC_NAMES = ("trivial", "bump", "sinusoid", "high_frequency", "high_energy", "fourier")


@dataclass(frozen=True)
class ModelSpec:
    """Model selection plus physical parameters.

    kind      which stochastic PDE is simulated
    sigma     noise amplitude
    lam       damping coefficient of the heat model, and the coefficient
              multiplying the squared gradient of the KPZ model
    nu        viscosity of the Burgers model
    nonlinearity  finite-difference stencil for Burgers/KPZ quadratic terms
    burgers_half_factor  include the conventional 1/2 in the Burgers flux
    """

    kind: ModelKind
    sigma: float = 1.0
    lam: float = 0.0
    nu: float = 1.0
    nonlinearity: Nonlinearity = Nonlinearity.CENTRAL
    initial_condition: InitialCondition = InitialCondition()
    burgers_half_factor: bool = False

    def __post_init__(self):
        if self.sigma <= 0.0:
            raise ValueError("sigma must be positive")
        if self.nu <= 0.0:
            raise ValueError("nu must be positive")
        if self.lam < 0.0:
            raise ValueError("lam must be nonnegative")
        if self.initial_condition.name not in _IC_NAMES:
            raise ValueError("unknown initial condition %r" % self.initial_condition.name)


@dataclass(frozen=True)
class SpectralBasis:
    """Real trigonometric eigenbasis of the model's linear operator.

    vectors[i] is the i-th orthonormal eigenvector on the grid and
    eigenvalues[i] the matching eigenvalue of the linear drift (discrete
    Laplacian shifted or scaled per model).  Modes are ordered by
    descending eigenvalue; for the degenerate cosine/sine pairs the
    cosine mode comes first.  wavenumbers[i] gives the integer
    wavenumber of mode i and families[i] one of "const", "cos", "sin".
    """

    eigenvalues: np.ndarray
    vectors: np.ndarray
    wavenumbers: np.ndarray
    families: tuple[str, ...]


def laplacian_matvec(grid: Grid, v: np.ndarray) -> np.ndarray:
    """Apply the periodic second-difference operator along the last axis."""
    v = np.asarray(v, dtype=float)
    if v.shape[-1] != grid.n:
        raise ValueError("state has %d components, grid has %d points" % (v.shape[-1], grid.n))
    return (np.roll(v, -1, axis=-1) - 2.0 * v + np.roll(v, 1, axis=-1)) / grid.dx**2


def laplacian_eigenvalues(grid: Grid) -> np.ndarray:
    """Eigenvalues of the periodic second-difference operator, mode-ordered."""
    k = _mode_wavenumbers(grid.n)
    return -(4.0 / grid.dx**2) * np.sin(math.pi * k / grid.n) ** 2


def _mode_wavenumbers(n: int) -> np.ndarray:
    ks = [0]
    for k in range(1, (n + 1) // 2):
        ks.extend((k, k))
    if n % 2 == 0:
        ks.append(n // 2)
    return np.array(ks, dtype=int)


def _mode_families(n: int) -> tuple[str, ...]:
    fams = ["const"]
    for _ in range(1, (n + 1) // 2):
        fams.extend(("cos", "sin"))
    if n % 2 == 0:
        fams.append("cos")
    return tuple(fams)


def linear_eigenvalue_shift(model: ModelSpec, lap_eigenvalues: np.ndarray) -> np.ndarray:
    """Map Laplacian eigenvalues to the eigenvalues of the model's linear drift."""
    if model.kind is ModelKind.HEAT:
        return lap_eigenvalues - model.lam
    if model.kind is ModelKind.BURGERS:
        return model.nu * lap_eigenvalues
    return lap_eigenvalues.copy()


def eigenbasis(grid: Grid, model: ModelSpec) -> SpectralBasis:
    """Orthonormal trigonometric eigenbasis with model-scaled eigenvalues.

    The constant mode comes first, then cosine/sine pairs of increasing
    wavenumber, then (for even n) the alternating-sign Nyquist mode.
    This ordering is descending in eigenvalue for every supported model.
    """
    n = grid.n
    x = grid.points()
    rows = [np.full(n, 1.0 / math.sqrt(n))]
    for k in range(1, (n + 1) // 2):
        rows.append(math.sqrt(2.0 / n) * np.cos(k * x))
        rows.append(math.sqrt(2.0 / n) * np.sin(k * x))
    if n % 2 == 0:
        rows.append(np.where(np.arange(n) % 2 == 0, 1.0, -1.0) / math.sqrt(n))
    vectors = np.vstack(rows)
    eigenvalues = linear_eigenvalue_shift(model, laplacian_eigenvalues(grid))
    return SpectralBasis(
        eigenvalues=eigenvalues,
        vectors=vectors,
        wavenumbers=_mode_wavenumbers(n),
        families=_mode_families(n),
    )


def to_spectral(basis: SpectralBasis, v: np.ndarray) -> np.ndarray:
    """Coefficients of v in the eigenbasis (acts on the last axis)."""
    return np.asarray(v, dtype=float) @ basis.vectors.T


def from_spectral(basis: SpectralBasis, coeffs: np.ndarray) -> np.ndarray:
    """Reassemble grid values from eigenbasis coefficients."""
    return np.asarray(coeffs, dtype=float) @ basis.vectors


def drift_nonlinear(model: ModelSpec, grid: Grid, v: np.ndarray) -> np.ndarray:
    """Nonlinear part of the drift, evaluated pointwise on the grid.

    Broadcasts over leading axes, so a batch of states of shape (r, n)
    yields a (r, n) array of drift values.
    """
    v = np.asarray(v, dtype=float)
    if v.shape[-1] != grid.n:
        raise ValueError("state has %d components, grid has %d points" % (v.shape[-1], grid.n))
    kind = model.kind
    if kind is ModelKind.HEAT:
        return np.zeros_like(v)
    if kind is ModelKind.LANGEVIN:
        return -(v**3)
    ahead = np.roll(v, -1, axis=-1)
    if kind is ModelKind.BURGERS:
        if model.nonlinearity is Nonlinearity.CENTRAL:
            behind = np.roll(v, 1, axis=-1)
            flux = -(ahead**2 - behind**2) / (2.0 * grid.dx)
            if model.burgers_half_factor:
                flux = 0.5 * flux
            return flux
        return -(ahead - v) * v / grid.dx
    if kind is ModelKind.KPZ:
        if model.nonlinearity is Nonlinearity.CENTRAL:
            behind = np.roll(v, 1, axis=-1)
            return model.lam * ((ahead - behind) / (2.0 * grid.dx)) ** 2
        return model.lam * ((ahead - v) / grid.dx) ** 2
    raise ValueError("unsupported model kind %r" % kind)


def initial_condition(model: ModelSpec, grid: Grid) -> np.ndarray:
    """Evaluate the model's named initial profile on the grid."""
    ic = model.initial_condition
    x = grid.points()
    if ic.name == "trivial":
        profile = np.zeros(grid.n)
    elif ic.name == "bump":
        profile = np.exp(-((x - math.pi) ** 2) / (2.0 * 0.25))
    elif ic.name == "sinusoid":
        profile = np.sin(x)
    elif ic.name == "high_frequency":
        profile = np.cos(x) + np.cos(5.0 * x) + np.cos(10.0 * x)
    elif ic.name == "high_energy":
        profile = 5.0 * np.sin(3.0 * x)
    elif ic.name == "fourier":
        if ic.coeffs is None:
            raise ValueError("fourier initial condition requires coefficients")
        profile = ic.coeffs.truncated(grid.n).evaluate(x)
    else:
        raise ValueError("unknown initial condition %r" % ic.name)
    return ic.amplitude * profile
