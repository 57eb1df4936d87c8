"""Conjugate grids, spectral fields, and the exact Fourier-space propagators.

Sign convention, shared package-wide:  fhat(xi) = integral of exp(-i xi v) f(v) dv.
A SpectralField samples fhat on the centered frequency grid of a GridSpec;
a MixedDistribution is the physical-space counterpart, a uniform-grid density
plus a finite list of weighted Dirac atoms.  Atoms are tracked symbolically
end to end and never pushed through the numerical inverse transform: the
fundamental solution of the central-difference family is purely atomic and
inverting Dirac combs numerically is meaningless.

All operations are pure (input -> new output) and thread-safe.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from scipy.special import erfc

from .errors import (
    GridTooSmallError,
    InvalidParameterError,
    ResampleError,
    SymmetryError,
)
from .kernels import BackgroundKernel, generator_symbol

Array = np.ndarray

GRID_ENV_VAR = "ROSENAU_GRID_N"
DEFAULT_GRID_N = 4096
LEAK_TOL = 1e-12


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class GridSpec:
    """Uniform velocity grid on [-L/2, L/2) with its conjugate frequency grid."""

    length: float
    points: int

    def __post_init__(self):
        if self.length <= 0:
            raise InvalidParameterError(f"grid length must be positive, got {self.length}")
        if self.points < 16 or not _is_power_of_two(self.points):
            raise InvalidParameterError(
                f"grid points must be a power of two >= 16, got {self.points}"
            )

    @property
    def dv(self) -> float:
        return self.length / self.points

    @property
    def dxi(self) -> float:
        return 2.0 * math.pi / self.length

    @property
    def nyquist(self) -> float:
        return math.pi / self.dv

    def v(self) -> Array:
        return self.dv * (np.arange(self.points) - self.points // 2)

    def xi(self) -> Array:
        return self.dxi * (np.arange(self.points) - self.points // 2)


def default_grid(sigma: float, t_max: float, n: Optional[int] = None,
                 m2: float = 1.0) -> GridSpec:
    """Grid sized so Gaussian tails at L/2 stay far below the leak tolerance.

    L = 40 sigma sqrt(1+t_max); N defaults to 4096 and may be overridden by
    the ROSENAU_GRID_N environment variable (power of two enforced).
    """
    if n is None:
        raw = os.environ.get(GRID_ENV_VAR)
        if raw is not None:
            try:
                n = int(raw)
            except ValueError:
                raise InvalidParameterError(f"{GRID_ENV_VAR}={raw!r} is not an integer")
        else:
            n = DEFAULT_GRID_N
    length = 40.0 * max(sigma, math.sqrt(m2)) * math.sqrt(1.0 + t_max)
    return GridSpec(length=length, points=n)


@dataclass(frozen=True)
class SpectralField:
    """Sampled Fourier transform on a GridSpec.

    ``analytic``, when present, evaluates the same transform at arbitrary
    frequencies; propagators compose it so that rescaling stays exact.
    """

    grid: GridSpec
    values: Array
    analytic: Optional[Callable[[Array], Array]] = None

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex)
        if vals.shape != (self.grid.points,):
            raise InvalidParameterError(
                f"values shape {vals.shape} does not match grid ({self.grid.points},)"
            )
        object.__setattr__(self, "values", vals)

    @property
    def mass(self) -> float:
        """Value at xi = 0 (total mass for probability data)."""
        return float(self.values[self.grid.points // 2].real)

    def at(self, xi) -> Array:
        """Evaluate at arbitrary frequencies, exactly when analytic, else by
        trigonometric refinement (see ``dilate``)."""
        if self.analytic is not None:
            return np.asarray(self.analytic(xi), dtype=complex)
        return _band_limited_eval(self, np.asarray(xi, dtype=float))


@dataclass(frozen=True)
class MixedDistribution:
    """Finite measure split into a uniform-grid density and weighted atoms."""

    grid: GridSpec
    density: Array
    atoms: Tuple[Tuple[float, float], ...] = ()

    def __post_init__(self):
        dens = np.asarray(self.density, dtype=float)
        if dens.shape != (self.grid.points,):
            raise InvalidParameterError(
                f"density shape {dens.shape} does not match grid ({self.grid.points},)"
            )
        object.__setattr__(self, "density", dens)
        half = self.grid.length / 2.0
        for loc, w in self.atoms:
            if not (-half <= loc < half):
                raise InvalidParameterError(
                    f"atom at {loc:g} outside the grid domain [-{half:g}, {half:g})"
                )
            if w < 0:
                raise InvalidParameterError(f"atom weight {w:g} is negative")

    @property
    def total_mass(self) -> float:
        return float(self.grid.dv * np.sum(self.density) + sum(w for _, w in self.atoms))


def field_from_symbol(grid: GridSpec, fn: Callable[[Array], Array]) -> SpectralField:
    """Sample an analytic transform on the grid, keeping the closure."""
    return SpectralField(grid=grid, values=np.asarray(fn(grid.xi()), dtype=complex), analytic=fn)


def delta_field(grid: GridSpec) -> SpectralField:
    """Transform of the unit Dirac mass at the origin (constant 1)."""
    return field_from_symbol(grid, lambda xi: np.ones_like(np.asarray(xi, dtype=float), dtype=complex))


def gaussian_field(grid: GridSpec, variance: float, mean: float = 0.0) -> SpectralField:
    """Transform of a normal density with the given mean and variance."""
    if variance < 0:
        raise InvalidParameterError("variance must be nonnegative")

    def fn(xi):
        x = np.asarray(xi, dtype=float)
        phase = np.exp(-1j * mean * x) if mean != 0.0 else 1.0
        return phase * np.exp(-0.5 * variance * x * x)

    return field_from_symbol(grid, fn)


def gaussian_reference(grid: GridSpec, sigma_sq: float) -> SpectralField:
    """Transform exp(-sigma_sq xi^2) of the time-one heat kernel profile."""
    return gaussian_field(grid, 2.0 * sigma_sq)


# ----------------------------------------------------------------------
# transforms
# ----------------------------------------------------------------------

def forward_transform(d: MixedDistribution) -> SpectralField:
    """Transform of the density by FFT plus the exact atomic sum."""
    grid = d.grid
    vals = grid.dv * np.fft.fftshift(np.fft.fft(np.fft.ifftshift(d.density.astype(complex))))
    if d.atoms:
        xi = grid.xi()
        for loc, w in d.atoms:
            vals = vals + w * np.exp(-1j * xi * loc)
    return SpectralField(grid=grid, values=vals)


def _hermitian_defect(values: Array) -> float:
    # bin 0 holds -Nyquist and has no positive partner; compare the rest
    flipped = np.conj(values[1:][::-1])
    return float(np.max(np.abs(values[1:] - flipped)))


def inverse_transform(f: SpectralField, atoms: Sequence[Tuple[float, float]] = (),
                      sym_tol: float = 1e-9) -> MixedDistribution:
    """Invert to a density after removing the declared atoms exactly.

    The caller supplies the atom list; their transforms are subtracted
    before the inverse FFT so only the absolutely continuous part is
    inverted numerically.  Raises SymmetryError when the remaining field
    is not Hermitian within ``sym_tol`` (relative to its peak).
    """
    grid = f.grid
    vals = f.values.copy()
    if atoms:
        xi = grid.xi()
        for loc, w in atoms:
            vals -= w * np.exp(-1j * xi * loc)
    scale = max(float(np.max(np.abs(vals))), 1e-300)
    defect = _hermitian_defect(vals)
    if defect > sym_tol * scale:
        raise SymmetryError(
            f"field is not Hermitian-symmetric (defect {defect:.3e}, scale {scale:.3e})"
        )
    dens = np.fft.ifftshift(np.fft.ifft(np.fft.fftshift(vals))) / grid.dv
    return MixedDistribution(grid=grid, density=dens.real, atoms=tuple(atoms))


# ----------------------------------------------------------------------
# propagators
# ----------------------------------------------------------------------

def _multiply(f: SpectralField, mult_fn: Callable[[Array], Array]) -> SpectralField:
    values = f.values * np.asarray(mult_fn(f.grid.xi()))
    analytic = None
    if f.analytic is not None:
        base = f.analytic
        analytic = lambda z: np.asarray(base(z), dtype=complex) * np.asarray(mult_fn(z))
    return SpectralField(grid=f.grid, values=values, analytic=analytic)


def heat_propagate(f: SpectralField, sigma_sq: float, t: float) -> SpectralField:
    """Multiply by the heat multiplier exp(-sigma_sq xi^2 t)."""
    if t < 0:
        raise InvalidParameterError(f"time must be nonnegative, got {t}")
    return _multiply(f, lambda xi: np.exp(-sigma_sq * np.asarray(xi) ** 2 * t))


def rosenau_propagate(f: SpectralField, kernel: BackgroundKernel, t: float) -> SpectralField:
    """Multiply by the kinetic multiplier exp(-A_eps(xi) t); its modulus is <= 1."""
    if t < 0:
        raise InvalidParameterError(f"time must be nonnegative, got {t}")
    return _multiply(f, lambda xi: np.exp(-generator_symbol(kernel, xi) * t))


def singular_split(kernel: BackgroundKernel, t: float,
                   grid: GridSpec) -> Tuple[SpectralField, float]:
    """Split the fundamental solution into its regular transform and atom weight.

    Returns (G1, w) with G1(xi) = exp(-mu (1-Mhat)) - exp(-mu) sampled on the
    grid and w = exp(-mu), mu = lam t / eps^2, so that G1 + w is exactly the
    kinetic multiplier.  The atom weight multiplies a Dirac mass at 0.
    """
    if t < 0:
        raise InvalidParameterError(f"time must be nonnegative, got {t}")
    mu = kernel.lam * t / kernel.epsilon**2
    w = math.exp(-mu)

    def g1(xi):
        return np.exp(-mu * np.asarray(kernel.one_minus_symbol(xi))) - w

    return field_from_symbol(grid, g1), w


def regularized_propagator(kernel: BackgroundKernel, t: float, grid: GridSpec) -> SpectralField:
    """Fundamental-solution transform with the singular part discarded.

    P_reg(xi, t) = exp(-mu (1-Mhat(xi))) - (1-Mhat(xi)) exp(-mu); adding back
    (1-Mhat) exp(-mu) recovers the kinetic multiplier pointwise.
    """
    if t < 0:
        raise InvalidParameterError(f"time must be nonnegative, got {t}")
    mu = kernel.lam * t / kernel.epsilon**2
    w = math.exp(-mu)

    def preg(xi):
        om = np.asarray(kernel.one_minus_symbol(xi))
        return np.exp(-mu * om) - om * w

    return field_from_symbol(grid, preg)


def regularized_solution(f: SpectralField, kernel: BackgroundKernel, t: float) -> SpectralField:
    """Solution obtained by convolving the initial datum with the regularized kernel."""
    if t < 0:
        raise InvalidParameterError(f"time must be nonnegative, got {t}")
    mu = kernel.lam * t / kernel.epsilon**2
    w = math.exp(-mu)

    def mult(xi):
        om = np.asarray(kernel.one_minus_symbol(xi))
        return np.exp(-mu * om) - om * w

    return _multiply(f, mult)


# ----------------------------------------------------------------------
# dilation (frequency-side rescaling)
# ----------------------------------------------------------------------

def _band_limited_eval(f: SpectralField, targets: Array, refine: int = 16) -> Array:
    """Evaluate a sampled transform off-grid by zero-padded FFT refinement.

    The density behind the field is supported in [-L/2, L/2), so the
    transform is band-limited; padding the physical support with zeros
    yields exact samples at spacing dxi/refine, and a local cubic fill-in
    covers arbitrary targets.
    """
    grid = f.grid
    if np.any(np.abs(targets) > grid.nyquist * (1.0 + 1e-12)):
        raise ResampleError("requested frequency outside the sampled band")
    n, m = grid.points, grid.points * refine
    dens = np.fft.ifftshift(np.fft.ifft(np.fft.fftshift(f.values)))
    padded = np.zeros(m, dtype=complex)
    lo = (m - n) // 2
    padded[lo:lo + n] = dens
    fine_vals = np.fft.fftshift(np.fft.fft(np.fft.ifftshift(padded)))
    fine_dxi = grid.dxi / refine
    fine_xi0 = -fine_dxi * (m // 2)
    # cubic Lagrange on the 4 refined samples around each target
    pos = (targets - fine_xi0) / fine_dxi
    i1 = np.clip(np.floor(pos).astype(int), 1, m - 3)
    s = pos - i1
    ym1, y0, y1, y2 = (fine_vals[i1 - 1], fine_vals[i1], fine_vals[i1 + 1], fine_vals[i1 + 2])
    out = (
        ym1 * (-s * (s - 1.0) * (s - 2.0) / 6.0)
        + y0 * ((s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0)
        + y1 * (-(s + 1.0) * s * (s - 2.0) / 2.0)
        + y2 * ((s + 1.0) * s * (s - 1.0) / 6.0)
    )
    return out


def dilate(f: SpectralField, factor: float) -> SpectralField:
    """Pure dilation of the frequency argument: result(xi) = f(factor * xi).

    Exact when the field carries an analytic evaluator; otherwise uses
    band-limited refinement.  Factors above 1 would need samples beyond
    the stored band and raise ResampleError.
    """
    if factor < 0:
        raise InvalidParameterError("dilation factor must be nonnegative")
    if f.analytic is not None:
        base = f.analytic
        return field_from_symbol(f.grid, lambda z: base(factor * np.asarray(z)))
    if factor > 1.0:
        raise ResampleError(f"dilation factor {factor} exceeds the sampled band")
    values = _band_limited_eval(f, factor * f.grid.xi())
    return SpectralField(grid=f.grid, values=values)


# ----------------------------------------------------------------------
# domain-size monitoring
# ----------------------------------------------------------------------

def mass_leak_estimate(grid: GridSpec, variance: float) -> float:
    """Gaussian-tail estimate of the mass beyond |v| = L/2 for the given variance."""
    if variance <= 0:
        return 0.0
    return float(erfc((grid.length / 2.0) / math.sqrt(2.0 * variance)))


def require_grid_contains(grid: GridSpec, variance: float, tol: float = LEAK_TOL,
                          context: str = "") -> None:
    """Abort with GridTooSmallError when the tail estimate exceeds ``tol``."""
    leak = mass_leak_estimate(grid, variance)
    if leak > tol:
        where = f" ({context})" if context else ""
        raise GridTooSmallError(
            f"estimated mass {leak:.3e} beyond |v| = {grid.length / 2:g} exceeds {tol:g}{where}"
        )


# ----------------------------------------------------------------------
# serialization
# ----------------------------------------------------------------------

def save_distribution(d: MixedDistribution, path: str, atoms_only: bool = False) -> None:
    """Text format: header "L N n_atoms", N density values, then atom pairs.

    ``atoms_only`` writes N = 0 and skips the density block, the compact
    form for purely atomic measures; the density must then be all zero.
    """
    if atoms_only and np.any(d.density != 0.0):
        raise InvalidParameterError("atoms_only requested but the density is not zero")
    with open(path, "w") as fh:
        n = 0 if atoms_only else d.grid.points
        fh.write(f"{d.grid.length:.17g} {n} {len(d.atoms)}\n")
        if not atoms_only:
            for x in d.density:
                fh.write(f"{x:.17g}\n")
        for loc, w in d.atoms:
            fh.write(f"{loc:.17g} {w:.17g}\n")


def load_distribution(path: str) -> MixedDistribution:
    with open(path) as fh:
        tokens = fh.read().split()
    if len(tokens) < 3:
        raise InvalidParameterError(f"{path}: truncated distribution file")
    length = float(tokens[0])
    points = int(tokens[1])
    n_atoms = int(tokens[2])
    need = 3 + points + 2 * n_atoms
    if len(tokens) != need:
        raise InvalidParameterError(
            f"{path}: expected {need} tokens for N={points}, n_atoms={n_atoms}, got {len(tokens)}"
        )
    density = np.array([float(x) for x in tokens[3:3 + points]])
    atoms = []
    for i in range(n_atoms):
        base = 3 + points + 2 * i
        atoms.append((float(tokens[base]), float(tokens[base + 1])))
    if points == 0:
        # atoms-only file: rebuild a minimal grid containing all atoms
        grid = GridSpec(length=length, points=16)
        density = np.zeros(16)
    else:
        grid = GridSpec(length, points)
    return MixedDistribution(grid=grid, density=density, atoms=tuple(atoms))
