"""Discretization of the real line and the unitary Fourier transform.

The line is truncated to ``[-L, L)`` and sampled at ``N`` equispaced points
``x_j = -L + j*dx``.  Frequencies live on the dual grid ``xi_k = k*dxi`` for
``k = -N/2, ..., N/2 - 1`` with ``dxi = pi/L``, so that ``dx*dxi = 2*pi/N``
and every transform is an exact DFT.

Spectra use the unitary convention

    f_hat(xi) = (2*pi)**-0.5 * integral f(x) exp(-i x xi) dx,

discretized as ``coeffs[k] = dx/sqrt(2*pi) * sum_j f(x_j) exp(-i x_j xi_k)``.
Coefficient arrays are stored in centered order: index ``k + N/2`` holds bin
``k``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import GridMismatch, InvalidParameter

SCHEMA_VERSION = 1
SQRT_2PI = math.sqrt(2.0 * math.pi)


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid on ``[-L, L)`` with ``N`` samples and its frequency dual."""

    half_length: float
    num_samples: int

    def __post_init__(self):
        L, N = self.half_length, self.num_samples
        if not (isinstance(L, (int, float)) and math.isfinite(L) and L > 0):
            raise InvalidParameter(f"half_length must be positive, got {L!r}")
        if not isinstance(N, (int, np.integer)) or N < 8 or N & (N - 1):
            raise InvalidParameter(f"num_samples must be a power of two >= 8, got {N!r}")
        object.__setattr__(self, "half_length", float(L))
        object.__setattr__(self, "num_samples", int(N))

    @property
    def L(self) -> float:
        return self.half_length

    @property
    def N(self) -> int:
        return self.num_samples

    @property
    def dx(self) -> float:
        return 2.0 * self.half_length / self.num_samples

    @property
    def dxi(self) -> float:
        return math.pi / self.half_length

    @property
    def nyquist_bin(self) -> int:
        """Largest positive bin index, ``N/2 - 1``."""
        return self.num_samples // 2 - 1

    @cached_property
    def x(self) -> np.ndarray:
        return _readonly(-self.half_length + self.dx * np.arange(self.num_samples))

    @cached_property
    def bins(self) -> np.ndarray:
        n = self.num_samples
        return _readonly(np.arange(-n // 2, n // 2))

    @cached_property
    def xi(self) -> np.ndarray:
        return _readonly(self.dxi * self.bins)

    @cached_property
    def _phase(self) -> np.ndarray:
        # exp(i*L*xi_k) = (-1)**k, from the grid offset x_0 = -L
        return _readonly(np.where(self.bins % 2 == 0, 1.0, -1.0))

    def index_of_bin(self, k: int) -> int:
        if not -self.num_samples // 2 <= k < self.num_samples // 2:
            raise InvalidParameter(f"bin {k} outside [-N/2, N/2) for N={self.num_samples}")
        return int(k) + self.num_samples // 2

    def bin_of_frequency(self, sigma: float, tol: float = 1e-9) -> int | None:
        """Bin index ``m`` with ``sigma == m*dxi``, or None if off-grid."""
        m = sigma / self.dxi
        r = round(m)
        if abs(m - r) > tol * max(1.0, abs(m)):
            return None
        return int(r)

    def to_dict(self) -> dict:
        return {"L": self.half_length, "N": self.num_samples}

    @classmethod
    def from_dict(cls, d: dict) -> "GridSpec":
        return cls(float(d["L"]), int(d["N"]))


def tone_values(grid: GridSpec, m: int) -> np.ndarray:
    """Samples of ``exp(i*m*dxi*x)`` with the phase reduced in integers.

    ``x_j*m*dxi = -m*pi + 2*pi*(m*j mod N)/N``, which avoids the roundoff of
    evaluating ``exp`` at large arguments.
    """
    n = grid.num_samples
    j = np.arange(n, dtype=np.int64)
    return (-1.0) ** (int(m) % 2) * np.exp(2j * np.pi * ((int(m) * j) % n) / n)


def make_grid(L: float, N: int) -> GridSpec:
    return GridSpec(L, N)


def _check_same_grid(*grids: GridSpec) -> None:
    g0 = grids[0]
    for g in grids[1:]:
        if g != g0:
            raise GridMismatch(f"grids differ: {g0.to_dict()} vs {g.to_dict()}")


@dataclass(frozen=True, eq=False)
class SampledFunction:
    """Complex samples ``values[j] = f(x_j)`` on a grid."""

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=np.complex128)
        if v.shape != (self.grid.num_samples,):
            raise InvalidParameter(
                f"expected {self.grid.num_samples} samples, got shape {v.shape}")
        object.__setattr__(self, "values", _readonly(v))

    def __add__(self, other: "SampledFunction") -> "SampledFunction":
        _check_same_grid(self.grid, other.grid)
        return SampledFunction(self.grid, self.values + other.values)

    def __sub__(self, other: "SampledFunction") -> "SampledFunction":
        _check_same_grid(self.grid, other.grid)
        return SampledFunction(self.grid, self.values - other.values)

    def __neg__(self) -> "SampledFunction":
        return SampledFunction(self.grid, -self.values)

    def __mul__(self, c: complex) -> "SampledFunction":
        if isinstance(c, SampledFunction):
            return NotImplemented
        return SampledFunction(self.grid, complex(c) * self.values)

    __rmul__ = __mul__

    def conj(self) -> "SampledFunction":
        return SampledFunction(self.grid, self.values.conj())

    def spectrum(self) -> "SpectralFunction":
        return forward_fourier(self)

    def l2_norm(self) -> float:
        return math.sqrt(self.grid.dx) * float(np.linalg.norm(self.values))

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "grid": self.grid.to_dict(),
            "values": np.column_stack([self.values.real, self.values.imag]).tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SampledFunction":
        grid = GridSpec.from_dict(d["grid"])
        pairs = np.asarray(d["values"], dtype=float)
        if pairs.ndim != 2 or pairs.shape[1] != 2:
            raise InvalidParameter("values must be a list of [re, im] pairs")
        return cls(grid, pairs[:, 0] + 1j * pairs[:, 1])


@dataclass(frozen=True, eq=False)
class SpectralFunction:
    """Frequency samples ``coeffs[k + N/2] ~ f_hat(xi_k)``."""

    grid: GridSpec
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=np.complex128)
        if c.shape != (self.grid.num_samples,):
            raise InvalidParameter(
                f"expected {self.grid.num_samples} coefficients, got shape {c.shape}")
        object.__setattr__(self, "coeffs", _readonly(c))

    def at(self, k: int) -> complex:
        return complex(self.coeffs[self.grid.index_of_bin(k)])

    def energy(self) -> float:
        """``sum_k |coeffs[k]|**2 * dxi``; equals ``pairing(f, f)`` by Plancherel."""
        return float(np.sum(np.abs(self.coeffs) ** 2) * self.grid.dxi)


def forward_fourier(f: SampledFunction) -> SpectralFunction:
    g = f.grid
    c = np.fft.fftshift(np.fft.fft(f.values)) * g._phase
    return SpectralFunction(g, c * (g.dx / SQRT_2PI))


def inverse_fourier(F: SpectralFunction) -> SampledFunction:
    g = F.grid
    v = np.fft.ifft(np.fft.ifftshift(F.coeffs * g._phase))
    return SampledFunction(g, v * (g.dxi * g.num_samples / SQRT_2PI))


def l1_norm(f: SampledFunction) -> float:
    return f.grid.dx * float(np.sum(np.abs(f.values)))


def pairing(f: SampledFunction, g: SampledFunction) -> complex:
    """``<f, g> = integral f * conj(g) dx`` by the rectangle rule."""
    _check_same_grid(f.grid, g.grid)
    return complex(f.grid.dx * np.vdot(g.values, f.values))


def save_function(f: SampledFunction, path: str | Path) -> None:
    Path(path).write_text(json.dumps(f.to_dict()))


def load_function(path: str | Path) -> SampledFunction:
    return SampledFunction.from_dict(json.loads(Path(path).read_text()))


def interval_slice(grid: GridSpec, a: float, b: float) -> slice:
    """Indices ``j`` with ``a <= x_j < b``; sample ``j`` stands for the cell ``[x_j, x_j + dx)``."""
    if a < -grid.half_length - 1e-9 * grid.dx or b > grid.half_length + 1e-9 * grid.dx:
        raise InvalidParameter(f"interval [{a}, {b}] not inside [-L, L] with L={grid.half_length}")
    if not b > a:
        raise InvalidParameter(f"empty interval [{a}, {b}]")
    eps = 1e-9
    lo = max(0, math.ceil((a + grid.half_length) / grid.dx - eps))
    hi = min(grid.num_samples, math.ceil((b + grid.half_length) / grid.dx - eps))
    return slice(lo, hi)
