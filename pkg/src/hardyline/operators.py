"""Spectral-multiplier operators on grid functions.

Conventions on the zero bin: ``project_plus`` keeps bin 0 and
``project_minus`` drops it, while the Hilbert multiplier is
``-i*sign(xi)`` with ``sign(0) = 0``.  Hence ``H = -i(P+ - P-)`` holds
exactly only for mean-zero inputs.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import InvalidParameter, WraparoundRisk, WraparoundWarning
from .grid import (
    GridSpec, SampledFunction, SpectralFunction, _check_same_grid, forward_fourier,
    inverse_fourier, l1_norm, tone_values,
)

# fraction of total spectral energy tolerated in bins that a shift would wrap
WRAP_TOL = 1e-10


@dataclass(frozen=True)
class ModulationSymbol:
    """Inner function ``Theta(x) = exp(i*tau*x)`` with ``tau = tau_bins*dxi``."""

    tau_bins: int
    grid: GridSpec

    def __post_init__(self):
        k = self.tau_bins
        if int(k) != k or k < 1:
            raise InvalidParameter(f"tau_bins must be a positive integer, got {k!r}")
        if k >= self.grid.num_samples // 2:
            raise InvalidParameter(f"tau_bins={k} not below N/2={self.grid.num_samples // 2}")
        object.__setattr__(self, "tau_bins", int(k))

    @property
    def tau(self) -> float:
        return self.tau_bins * self.grid.dxi

    def samples(self) -> SampledFunction:
        return SampledFunction(self.grid, tone_values(self.grid, self.tau_bins))

    def conj_samples(self) -> SampledFunction:
        return SampledFunction(self.grid, tone_values(self.grid, -self.tau_bins))


def nearest_symbol(tau: float, grid: GridSpec) -> tuple[ModulationSymbol, float]:
    """Closest admissible symbol to a requested ``tau`` and its exact ``tau``."""
    k = max(1, round(tau / grid.dxi))
    sym = ModulationSymbol(k, grid)
    return sym, sym.tau


# -- spectral helpers -------------------------------------------------------

def apply_multiplier(f: SampledFunction, m: np.ndarray) -> SampledFunction:
    """Multiply the centered spectrum of ``f`` by ``m`` and transform back."""
    F = forward_fourier(f)
    return inverse_fourier(SpectralFunction(f.grid, F.coeffs * m))


def wrap_fraction(coeffs: np.ndarray, s: int) -> float:
    """Energy fraction in the ``|s|`` bins that a cyclic shift by ``s`` would wrap."""
    if s == 0:
        return 0.0
    total = float(np.sum(np.abs(coeffs) ** 2))
    if total == 0.0:
        return 0.0
    edge = coeffs[len(coeffs) - s:] if s > 0 else coeffs[:-s]
    return float(np.sum(np.abs(edge) ** 2)) / total


def shift_coeffs(coeffs: np.ndarray, s: int, on_wrap: str = "raise") -> np.ndarray:
    """Cyclic shift ``out[k] = coeffs[k - s]``, guarded against Nyquist wrap."""
    n = len(coeffs)
    if not abs(s) < n // 2:
        raise InvalidParameter(f"shift {s} must satisfy |s| < N/2 = {n // 2}")
    if on_wrap not in ("raise", "warn", "ignore"):
        raise InvalidParameter(f"on_wrap must be raise|warn|ignore, got {on_wrap!r}")
    if on_wrap != "ignore":
        frac = wrap_fraction(coeffs, s)
        if frac > WRAP_TOL:
            msg = f"shift by {s} bins wraps {frac:.3e} of the spectral energy across Nyquist"
            if on_wrap == "raise":
                raise WraparoundRisk(msg)
            warnings.warn(msg, WraparoundWarning, stacklevel=3)
    return np.roll(coeffs, s)


# -- operators --------------------------------------------------------------

def project_plus(f: SampledFunction) -> SampledFunction:
    """Szego projection onto bins ``k >= 0``."""
    return apply_multiplier(f, (f.grid.bins >= 0).astype(float))


def project_minus(f: SampledFunction) -> SampledFunction:
    """Projection onto bins ``k < 0``."""
    return apply_multiplier(f, (f.grid.bins < 0).astype(float))


def hilbert(f: SampledFunction) -> SampledFunction:
    """Hilbert transform, multiplier ``-i*sign(xi)``."""
    return apply_multiplier(f, -1j * np.sign(f.grid.bins))


def multiply(phi: SampledFunction, f: SampledFunction) -> SampledFunction:
    _check_same_grid(phi.grid, f.grid)
    return SampledFunction(f.grid, phi.values * f.values)


def modulate(f: SampledFunction, s: int, on_wrap: str = "raise") -> SampledFunction:
    """Multiply by ``exp(i*s*dxi*x)``, realized as an exact shift by ``s`` bins."""
    F = forward_fourier(f)
    return inverse_fourier(SpectralFunction(f.grid, shift_coeffs(F.coeffs, int(s), on_wrap)))


def _compress(symbol, f: SampledFunction, keep_plus: bool, on_wrap: str) -> SampledFunction:
    if isinstance(symbol, ModulationSymbol):
        _check_same_grid(symbol.grid, f.grid)
        c = shift_coeffs(forward_fourier(f).coeffs, -symbol.tau_bins, on_wrap)
        mask = f.grid.bins >= 0 if keep_plus else f.grid.bins < 0
        return inverse_fourier(SpectralFunction(f.grid, np.where(mask, c, 0.0)))
    if isinstance(symbol, SampledFunction):
        g = multiply(symbol, f)
        return project_plus(g) if keep_plus else project_minus(g)
    raise InvalidParameter(f"unsupported symbol type {type(symbol).__name__}")


def toeplitz_apply(symbol, f: SampledFunction, on_wrap: str = "raise") -> SampledFunction:
    """Toeplitz operator ``P+ M``.

    For a :class:`ModulationSymbol` ``Theta`` this is ``T_{conj Theta} f``,
    i.e. the spectrum of ``f`` shifted down by ``tau_bins`` and truncated to
    ``k >= 0``.  A :class:`SampledFunction` symbol is used as the multiplier
    itself: ``P+(symbol * f)``.
    """
    return _compress(symbol, f, True, on_wrap)


def hankel_apply(symbol, f: SampledFunction, on_wrap: str = "raise") -> SampledFunction:
    """Hankel operator ``P- M``; same symbol conventions as :func:`toeplitz_apply`."""
    return _compress(symbol, f, False, on_wrap)


def commutator_bH(b: SampledFunction, f: SampledFunction) -> SampledFunction:
    """``[b, H] f = b*Hf - H(b*f)``."""
    return multiply(b, hilbert(f)) - hilbert(multiply(b, f))


# -- smoothing --------------------------------------------------------------

def _smoothstep_part(t: np.ndarray) -> np.ndarray:
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos])
    return out


def cutoff(xi) -> np.ndarray:
    """Smooth bump: 1 on ``|xi| <= 1``, 0 on ``|xi| >= 2``, C-infinity between."""
    a = np.abs(np.asarray(xi, dtype=float))
    u = _smoothstep_part(2.0 - a)
    v = _smoothstep_part(a - 1.0)
    return u / (u + v)


def smooth_lowpass(f: SampledFunction, r: float) -> SampledFunction:
    """Multiplier ``cutoff(xi/r)``."""
    if not r > 0:
        raise InvalidParameter(f"r must be positive, got {r!r}")
    return apply_multiplier(f, cutoff(f.grid.xi / r))


def band_regularize(f: SampledFunction, R: float, eps: float) -> SampledFunction:
    """``T_R (Id - T_eps) f``, spectrum confined to ``eps <= |xi| <= 2R``."""
    if not 0 < eps < R:
        raise InvalidParameter(f"need 0 < eps < R, got eps={eps!r}, R={R!r}")
    m = cutoff(f.grid.xi / R) * (1.0 - cutoff(f.grid.xi / eps))
    return apply_multiplier(f, m)


@lru_cache(maxsize=None)
def cutoff_kernel_l1(L: float = 512.0, N: int = 2 ** 18) -> float:
    """``||F^{-1} cutoff||_{L1}`` by rectangle quadrature.

    ``|F^{-1} cutoff|`` has kinks at its zeros, so the rule needs a fine
    spatial step; the default ``dx = 1/256`` is converged to about 1e-8.
    """
    g = GridSpec(L, N)
    if 2.0 >= g.nyquist_bin * g.dxi:
        raise InvalidParameter("grid does not resolve the cutoff support |xi| < 2")
    return l1_norm(inverse_fourier(SpectralFunction(g, cutoff(g.xi))))


def lowpass_l1_bound() -> float:
    """Operator bound of ``smooth_lowpass`` on L1, uniform in ``r``.

    With the unitary transform, a multiplier ``m`` acts as convolution with
    ``(2*pi)**-0.5 * F^{-1} m``, so the bound is the kernel norm over
    ``sqrt(2*pi)``.
    """
    return cutoff_kernel_l1() / math.sqrt(2.0 * math.pi)
