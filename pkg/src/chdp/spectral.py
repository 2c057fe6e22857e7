"""Spectral substrate on the unit circle.

Uniform periodic grids on [0, 1), real fields with cached Fourier
coefficients, spectral differentiation, the Helmholtz multiplier
1 - d^2/dx^2 and its inverse, inner products, off-grid series evaluation
(composition with circle maps), and Newton inversion of diffeomorphisms.

With period 1, integer mode m carries angular wavenumber 2*pi*m.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Grid",
    "PeriodicField",
    "Diffeo",
    "DegenerateJacobianError",
    "InversionError",
    "zero_field",
    "constant_field",
    "cosine_field",
    "sine_field",
    "field_from_function",
    "random_band_limited",
    "derivative",
    "helmholtz",
    "helmholtz_inverse",
    "dealias",
    "dealiased_product",
    "inner_l2",
    "inner_h1",
    "evaluate",
    "series_matrix",
    "apply_series_matrix",
    "compose",
    "invert_diffeo",
]


class DegenerateJacobianError(ValueError):
    """A circle map failed the orientation condition phi_x > 0."""


class InversionError(RuntimeError):
    """Newton iteration for a diffeomorphism inverse did not converge."""


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid with n samples x_j = j/n on [0, 1).

    n must be even and at least 16.  `dealias_cutoff` is the largest mode
    kept by the 2/3 rule, chosen so quadratic products of kept modes are
    alias-free after truncation (3*cutoff < n).
    """

    n: int

    def __post_init__(self):
        if self.n % 2 != 0:
            raise ValueError("grid size must be even")
        if self.n < 16:
            raise ValueError("grid size must be at least 16")
        points = np.arange(self.n) / self.n
        modes = np.arange(self.n // 2 + 1)
        omega = 2.0 * np.pi * modes.astype(float)
        cutoff = self.n // 3
        if 3 * cutoff >= self.n:
            cutoff -= 1
        for arr in (points, modes, omega):
            arr.setflags(write=False)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "modes", modes)
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "dealias_cutoff", cutoff)

    @property
    def spacing(self) -> float:
        return 1.0 / self.n


def _check_same_grid(a, b):
    if a.grid.n != b.grid.n:
        raise ValueError(f"grid mismatch: n={a.grid.n} vs n={b.grid.n}")


class PeriodicField:
    """Real-valued function on the circle, sampled at grid.points.

    Instances are immutable; the rfft spectrum is computed once on demand
    and cached.  Arithmetic (+, -, unary -, * by scalar or field) is
    pointwise in physical space and returns new fields.
    """

    __slots__ = ("grid", "_values", "_hat")

    def __init__(self, grid: Grid, values):
        values = np.asarray(values, dtype=float)
        if values.shape != (grid.n,):
            raise ValueError(f"expected shape ({grid.n},), got {values.shape}")
        if values.flags.writeable:
            values = values.copy()
            values.setflags(write=False)
        self.grid = grid
        self._values = values
        self._hat = None

    @classmethod
    def from_hat(cls, grid: Grid, hat) -> "PeriodicField":
        """Build a field from rfft coefficients (length n//2 + 1)."""
        hat = np.asarray(hat, dtype=complex)
        field = cls(grid, np.fft.irfft(hat, n=grid.n))
        hat = hat.copy()
        hat.setflags(write=False)
        field._hat = hat
        return field

    @property
    def values(self) -> np.ndarray:
        return self._values

    @property
    def hat(self) -> np.ndarray:
        if self._hat is None:
            hat = np.fft.rfft(self._values)
            hat.setflags(write=False)
            self._hat = hat
        return self._hat

    def mean(self) -> float:
        return float(self._values.mean())

    def __add__(self, other):
        if isinstance(other, PeriodicField):
            _check_same_grid(self, other)
            return PeriodicField(self.grid, self._values + other._values)
        return PeriodicField(self.grid, self._values + other)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, PeriodicField):
            _check_same_grid(self, other)
            return PeriodicField(self.grid, self._values - other._values)
        return PeriodicField(self.grid, self._values - other)

    def __rsub__(self, other):
        return PeriodicField(self.grid, other - self._values)

    def __neg__(self):
        return PeriodicField(self.grid, -self._values)

    def __mul__(self, other):
        if isinstance(other, PeriodicField):
            _check_same_grid(self, other)
            return PeriodicField(self.grid, self._values * other._values)
        return PeriodicField(self.grid, self._values * other)

    __rmul__ = __mul__

    def __repr__(self):
        return f"PeriodicField(n={self.grid.n}, mean={self.mean():.3g})"


def zero_field(grid: Grid) -> PeriodicField:
    return PeriodicField(grid, np.zeros(grid.n))


def constant_field(grid: Grid, c: float) -> PeriodicField:
    return PeriodicField(grid, np.full(grid.n, float(c)))


def cosine_field(grid: Grid, mode: int, amplitude: float = 1.0) -> PeriodicField:
    return PeriodicField(grid, amplitude * np.cos(2.0 * np.pi * mode * grid.points))


def sine_field(grid: Grid, mode: int, amplitude: float = 1.0) -> PeriodicField:
    return PeriodicField(grid, amplitude * np.sin(2.0 * np.pi * mode * grid.points))


def field_from_function(grid: Grid, fn) -> PeriodicField:
    return PeriodicField(grid, fn(grid.points))


def random_band_limited(grid: Grid, rng: np.random.Generator, max_mode: int,
                        scale: float = 1.0) -> PeriodicField:
    """Zero-mean random field with modes 1..max_mode and 1/m amplitude decay."""
    if max_mode > grid.n // 2 - 1:
        raise ValueError("max_mode exceeds grid resolution")
    x = grid.points
    values = np.zeros(grid.n)
    for m in range(1, max_mode + 1):
        a, b = rng.standard_normal(2) * (scale / m)
        values += a * np.cos(2.0 * np.pi * m * x) + b * np.sin(2.0 * np.pi * m * x)
    return PeriodicField(grid, values)


# ---------------------------------------------------------------------------
# Diagonal spectral operators
# ---------------------------------------------------------------------------

def derivative(f: PeriodicField) -> PeriodicField:
    """d/dx via the multiplier i*2*pi*k; the Nyquist mode is dropped."""
    hat = f.hat * (1j * f.grid.omega)
    hat[-1] = 0.0
    return PeriodicField.from_hat(f.grid, hat)


def helmholtz(f: PeriodicField) -> PeriodicField:
    """(1 - d^2/dx^2) f via the multiplier 1 + (2*pi*k)^2."""
    return PeriodicField.from_hat(f.grid, f.hat * (1.0 + f.grid.omega**2))


def helmholtz_inverse(f: PeriodicField) -> PeriodicField:
    """(1 - d^2/dx^2)^{-1} f via the multiplier 1/(1 + (2*pi*k)^2)."""
    return PeriodicField.from_hat(f.grid, f.hat / (1.0 + f.grid.omega**2))


def dealias(f: PeriodicField) -> PeriodicField:
    """Zero all modes above the grid's 2/3-rule cutoff."""
    hat = f.hat.copy()
    hat[f.grid.dealias_cutoff + 1:] = 0.0
    return PeriodicField.from_hat(f.grid, hat)


def dealiased_product(f: PeriodicField, g: PeriodicField) -> PeriodicField:
    """Pointwise product followed by 2/3-rule truncation.

    Exact for factors already band-limited to the dealias cutoff, since
    their true product has no content that aliases into the kept band.
    """
    return dealias(f * g)


# ---------------------------------------------------------------------------
# Inner products
# ---------------------------------------------------------------------------

def inner_l2(f: PeriodicField, g: PeriodicField) -> float:
    """Integral of f*g over one period.

    The uniform-grid average is the trapezoid rule for periodic data and
    is exact whenever the product is band-limited below the grid size.
    """
    _check_same_grid(f, g)
    return float(np.dot(f.values, g.values) / f.grid.n)


def inner_h1(f: PeriodicField, g: PeriodicField) -> float:
    """H^1 inner product: integral of f*g + f_x*g_x over one period."""
    _check_same_grid(f, g)
    return inner_l2(f, g) + inner_l2(derivative(f), derivative(g))


# ---------------------------------------------------------------------------
# Off-grid evaluation (composition with circle maps)
# ---------------------------------------------------------------------------

def series_matrix(grid: Grid, y, kmax: int | None = None) -> np.ndarray:
    """Matrix E with E[j, k] = exp(2*pi*i*k*y_j) for k = 0..kmax.

    Built by cumulative products of exp(2*pi*i*y), so one evaluation plan
    can be reused on several fields (`apply_series_matrix`).  Passing a
    smaller kmax is exact for fields whose modes above kmax vanish.
    """
    y = np.asarray(y, dtype=float)
    if kmax is None:
        kmax = grid.n // 2
    z = np.exp(2j * np.pi * y)
    mat = np.empty((y.size, kmax + 1), dtype=complex)
    mat[:, 0] = 1.0
    np.cumprod(np.broadcast_to(z[:, None], (y.size, kmax)), axis=1, out=mat[:, 1:])
    return mat


def apply_series_matrix(mat: np.ndarray, f: PeriodicField) -> np.ndarray:
    """Evaluate the truncated Fourier series of f at the points baked into mat."""
    n = f.grid.n
    weights = f.hat[: mat.shape[1]] / n
    weights = weights.copy()
    weights[1: n // 2] *= 2.0
    return (mat @ weights).real


def evaluate(f: PeriodicField, y) -> np.ndarray:
    """Truncated Fourier series of f evaluated at arbitrary points y."""
    return apply_series_matrix(series_matrix(f.grid, np.atleast_1d(y)), f)


class Diffeo:
    """Orientation-preserving circle map phi(x) = x + psi(x).

    psi is periodic, so phi(x + 1) = phi(x) + 1 by construction.  The
    Jacobian phi_x = 1 + psi_x is computed spectrally and cached; building
    a Diffeo whose Jacobian is not strictly positive raises
    DegenerateJacobianError.
    """

    __slots__ = ("grid", "displacement", "jacobian")

    def __init__(self, displacement: PeriodicField):
        jac = 1.0 + derivative(displacement)
        if jac.values.min() <= 0.0:
            raise DegenerateJacobianError(
                f"jacobian min {jac.values.min():.3e} is not positive")
        self.grid = displacement.grid
        self.displacement = displacement
        self.jacobian = jac

    @classmethod
    def identity(cls, grid: Grid) -> "Diffeo":
        return cls(zero_field(grid))

    @classmethod
    def shift(cls, grid: Grid, c: float) -> "Diffeo":
        return cls(constant_field(grid, c))

    @property
    def warped_points(self) -> np.ndarray:
        """phi evaluated at the grid points (not reduced mod 1)."""
        return self.grid.points + self.displacement.values

    def at(self, y) -> np.ndarray:
        """phi evaluated at arbitrary points."""
        y = np.atleast_1d(np.asarray(y, dtype=float))
        return y + evaluate(self.displacement, y)

    def __repr__(self):
        return (f"Diffeo(n={self.grid.n}, "
                f"min_jacobian={self.jacobian.values.min():.3g})")


def compose(f: PeriodicField, phi: Diffeo) -> PeriodicField:
    """f o phi: evaluate the series of f at the warped grid points."""
    _check_same_grid(f, phi)
    return PeriodicField(f.grid, evaluate(f, phi.warped_points))


def invert_diffeo(phi: Diffeo, tol: float = 1e-12, max_iter: int = 50) -> Diffeo:
    """Inverse circle map, found by Newton iteration per grid point.

    The initial guess interpolates the monotone sampled pairs
    (phi(x_k), x_k), extended by one period on both sides, so every target
    is bracketed.  Raises InversionError if Newton stalls within max_iter
    (a symptom of a near-degenerate Jacobian).
    """
    grid = phi.grid
    x = grid.points
    fx = phi.warped_points
    knots_x = np.concatenate([fx - 1.0, fx, fx + 1.0])
    knots_y = np.concatenate([x - 1.0, x, x + 1.0])
    y = np.interp(x, knots_x, knots_y)

    psi = phi.displacement
    psi_x = derivative(psi)
    for _ in range(max_iter):
        residual = y + evaluate(psi, y) - x
        if np.max(np.abs(residual)) < tol:
            break
        slope = 1.0 + evaluate(psi_x, y)
        y = y - residual / slope
    else:
        raise InversionError(
            f"diffeomorphism inversion did not reach {tol:g} in {max_iter} steps")
    return Diffeo(PeriodicField(grid, y - x))
