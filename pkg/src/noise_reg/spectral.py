"""Physical <-> frequency space on a periodic box, Gevrey data and Sobolev norms.

Conventions
-----------
Grid points x_n = n dx, n = 0..N-1, dx = L / N. Angular frequencies
xi_k = 2 pi k / L (numpy FFT ordering), spacing dxi = 2 pi / L.

Mode coefficients are the unnormalised DFT c_k = sum_n u_n exp(-i x_n xi_k)
(``numpy.fft.fft``); the inverse carries the 1/N. Sobolev norms are the
Riemann sums sum_k <xi_k>^(2s) |c_k|^2 dxi, so for s = 0

    sum_k |c_k|^2 dxi = (2 pi / dx) sum_n |u_n|^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import ModelParams, ValidationError, japanese_bracket
from .moments import propagate


@dataclass(frozen=True)
class SpatialGrid:
    n_points: int = 4096
    length: float = 64.0

    def __post_init__(self):
        n = int(self.n_points)
        if n < 8 or n & (n - 1):
            raise ValidationError(f"n_points must be a power of two >= 8, got {self.n_points}")
        if not (math.isfinite(self.length) and self.length > 0):
            raise ValidationError(f"length must be positive, got {self.length}")

    @property
    def dx(self) -> float:
        return self.length / self.n_points

    @property
    def dxi(self) -> float:
        return 2.0 * math.pi / self.length

    @property
    def x(self) -> np.ndarray:
        return np.arange(self.n_points) * self.dx

    @property
    def xi(self) -> np.ndarray:
        return 2.0 * math.pi * np.fft.fftfreq(self.n_points, d=self.dx)

    @property
    def parseval_factor(self) -> float:
        """sum |c_k|^2 dxi divided by sum |u_n|^2."""
        return 2.0 * math.pi / self.dx


@dataclass(frozen=True)
class FieldSnapshot:
    grid: SpatialGrid
    u: np.ndarray
    v: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        for name in ("u", "v"):
            a = np.asarray(getattr(self, name), dtype=complex)
            if a.shape != (self.grid.n_points,):
                raise ValidationError(f"{name} must have {self.grid.n_points} samples, got shape {a.shape}")
            object.__setattr__(self, name, a)


@dataclass(frozen=True)
class ModeCoefficients:
    grid: SpatialGrid
    u_hat: np.ndarray
    v_hat: np.ndarray
    t: float = 0.0


def forward_transform(f: FieldSnapshot) -> ModeCoefficients:
    return ModeCoefficients(f.grid, np.fft.fft(f.u), np.fft.fft(f.v), f.t)


def backward_transform(c: ModeCoefficients) -> FieldSnapshot:
    return FieldSnapshot(c.grid, np.fft.ifft(c.u_hat), np.fft.ifft(c.v_hat), c.t)


@dataclass(frozen=True)
class GevreyDatum:
    s: float
    c: float = 1.0

    def __post_init__(self):
        if not self.s >= 1:
            raise ValidationError(f"Gevrey order must be >= 1, got {self.s}")
        if not self.c > 0:
            raise ValidationError(f"decay constant must be positive, got {self.c}")

    def profile(self, xi) -> np.ndarray:
        return np.exp(-self.c * np.abs(np.asarray(xi, dtype=float)) ** (1.0 / self.s))


def _symmetric_phases(n: int, rng: np.random.Generator) -> np.ndarray:
    """Phases with phi(-k) = -phi(k) and zero at k = 0 and Nyquist."""
    phi = np.zeros(n)
    half = n // 2
    phi[1:half] = rng.uniform(-math.pi, math.pi, half - 1)
    phi[half + 1:] = -phi[1:half][::-1]
    return phi


def synthesize_gevrey(
    datum: GevreyDatum,
    grid: SpatialGrid,
    phases: str = "zero",
    seed: int | None = None,
    v_datum: GevreyDatum | None = None,
) -> FieldSnapshot:
    """Field whose mode coefficients are e^{-c |xi|^(1/s)} times a phase.

    Phases are conjugate-symmetric, so the physical field is real up to
    rounding. ``v_datum`` (default: none, i.e. v = 0) gives the velocity datum
    the same construction with an independent phase draw.
    """
    if phases not in ("zero", "random"):
        raise ValidationError(f"phases must be 'zero' or 'random', got {phases!r}")
    rng = np.random.default_rng(seed)
    xi = grid.xi

    def coeffs(d):
        amp = d.profile(xi)
        if phases == "zero":
            return amp.astype(complex)
        return amp * np.exp(1j * _symmetric_phases(grid.n_points, rng))

    u_hat = coeffs(datum)
    v_hat = coeffs(v_datum) if v_datum is not None else np.zeros(grid.n_points, dtype=complex)
    return backward_transform(ModeCoefficients(grid, u_hat, v_hat))


def sobolev_weight(xi, s):
    return japanese_bracket(xi) ** (2.0 * s)


def sobolev_norm_sq(coeffs, s: float, grid: SpatialGrid) -> float:
    c = np.asarray(coeffs)
    if c.shape != (grid.n_points,):
        raise ValidationError("coefficient array does not match the grid")
    return float(np.sum(sobolev_weight(grid.xi, s) * np.abs(c) ** 2) * grid.dxi)


def initial_moments(phi0: FieldSnapshot, phi1: FieldSnapshot | None = None) -> np.ndarray:
    """Per-mode m(0) = (|phi0^|^2, Re(conj(phi0^) phi1^), |phi1^|^2), shape (N, 3).

    With a single snapshot, its ``u`` and ``v`` are the two data.
    """
    if phi1 is None:
        a, b = np.fft.fft(phi0.u), np.fft.fft(phi0.v)
    else:
        if phi1.grid != phi0.grid:
            raise ValidationError("phi0 and phi1 live on different grids")
        a, b = np.fft.fft(phi0.u), np.fft.fft(phi1.u)
    return np.stack([np.abs(a) ** 2, (np.conj(a) * b).real, np.abs(b) ** 2], axis=-1)


@dataclass(frozen=True)
class FieldMomentSeries:
    t: np.ndarray
    s: float
    norm_u_sq: np.ndarray  # E ||U(t)||^2_{H^s}
    norm_v_sq: np.ndarray  # E ||V(t)||^2_{H^(s-1/2)}
    initial_bracket: float  # ||phi0||^2_{H^s} + ||phi1||^2_{H^(s-1/2)}


def assemble_norms(m, xi, s: float, dxi: float):
    """(sum <xi>^2s m1 dxi, sum <xi>^(2s-1) m3 dxi) over the last-but-one axis."""
    jb = japanese_bracket(xi)
    w_u = jb ** (2.0 * s)
    w_v = jb ** (2.0 * s - 1.0)
    return (m[..., 0] * w_u).sum(axis=-1) * dxi, (m[..., 2] * w_v).sum(axis=-1) * dxi


def evolve_field_moments(
    phi0: FieldSnapshot,
    phi1: FieldSnapshot,
    params: ModelParams,
    s: float,
    t_grid,
) -> FieldMomentSeries:
    """Sobolev norms of the second moments of the whole field at each time."""
    if not params.sigma >= 0:
        raise ValidationError("sigma must be nonnegative")
    grid = phi0.grid
    m0 = initial_moments(phi0, phi1)
    xi = grid.xi
    ts = np.atleast_1d(np.asarray(t_grid, dtype=float))
    m = propagate(m0[None, :, :], xi[None, :], params.sigma, ts[:, None])
    nu, nv = assemble_norms(m, xi, s, grid.dxi)
    u0, v0 = assemble_norms(m0, xi, s, grid.dxi)
    return FieldMomentSeries(ts, float(s), nu, nv, float(u0 + v0))
