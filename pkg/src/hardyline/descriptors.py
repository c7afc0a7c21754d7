"""JSON-friendly function descriptors and their synthesis on a grid.

A descriptor is a plain dict with a ``"kind"`` tag::

    {"kind": "pure_tone", "sigma": 0.39}          # or {"kind": "pure_tone", "bin": 8}
    {"kind": "gaussian_space", "center": 0.0, "width": 1.0}
    {"kind": "gaussian_band", "center": 0.39, "bandwidth": 0.02}
    {"kind": "cauchy_sq"}
    {"kind": "haar_profile", "interval": [0, 1]}
    {"kind": "tent_profile", "interval": [0, 1]}
    {"kind": "bump_profile", "interval": [0, 1]}
    {"kind": "random_band", "bins": [1, 9], "seed": 7, "envelope": "bump"}
    {"kind": "sign"}
    {"kind": "log_abs"}
    {"kind": "constant", "value": 1.0}
    {"kind": "sum", "terms": [...], "weights": [1.0, [0.0, -0.5]]}

Complex numbers are written either as plain numbers or as ``[re, im]`` pairs.
Frequencies must sit on the grid (integer multiples of ``dxi``).
"""
from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any

import numpy as np

from .errors import FrequencyOffGrid, InvalidParameter
from .grid import (
    GridSpec, SampledFunction, SpectralFunction, interval_slice, inverse_fourier, tone_values,
)

Descriptor = dict[str, Any]

KINDS = (
    "pure_tone", "gaussian_space", "gaussian_band", "cauchy_sq", "haar_profile",
    "tent_profile", "bump_profile", "random_band", "sign", "log_abs", "constant", "sum",
)


def as_complex(w) -> complex:
    if isinstance(w, (list, tuple)):
        if len(w) != 2:
            raise InvalidParameter(f"complex weight must be [re, im], got {w!r}")
        return complex(float(w[0]), float(w[1]))
    return complex(w)


def _tone_bin(d: Descriptor, grid: GridSpec) -> int:
    if "bin" in d:
        return int(d["bin"])
    m = grid.bin_of_frequency(float(d["sigma"]))
    if m is None:
        raise FrequencyOffGrid(
            f"frequency {d['sigma']} is not a multiple of dxi={grid.dxi}")
    return m


def _profile(kind: str, t: np.ndarray) -> np.ndarray:
    # t in [0, 1): position inside the interval
    if kind == "haar_profile":
        return np.where(t < 0.5, 1.0, -1.0)
    if kind == "tent_profile":
        return 1.0 - np.abs(2.0 * t - 1.0)
    if kind == "bump_profile":
        s = 2.0 * t - 1.0
        out = np.zeros_like(s)
        inside = np.abs(s) < 1
        out[inside] = np.exp(1.0 - 1.0 / (1.0 - s[inside] ** 2))
        return out
    raise InvalidParameter(f"unknown profile kind {kind!r}")


def profile_samples(kind: str, grid: GridSpec, a: float, b: float) -> np.ndarray:
    """Samples of a profile on ``[a, b)``, zero elsewhere."""
    sl = interval_slice(grid, a, b)
    out = np.zeros(grid.num_samples, dtype=np.complex128)
    t = (grid.x[sl] - a) / (b - a)
    out[sl] = _profile(kind, t)
    return out


def band_envelope(n: int, shape: str = "bump") -> np.ndarray:
    """Weights for ``n`` consecutive bins: flat, or a sin^2 bump vanishing past both ends."""
    if shape == "flat":
        return np.ones(n)
    if shape == "bump":
        return np.sin(np.pi * np.arange(1, n + 1) / (n + 1)) ** 2
    raise InvalidParameter(f"unknown envelope {shape!r}")


def random_band_coeffs(grid: GridSpec, lo: int, hi: int, rng: np.random.Generator,
                       envelope: str = "bump") -> np.ndarray:
    """Centered coefficient array with complex Gaussians on bins ``lo..hi``."""
    if lo > hi:
        raise InvalidParameter(f"empty bin range [{lo}, {hi}]")
    grid.index_of_bin(lo)
    grid.index_of_bin(hi)
    n = hi - lo + 1
    c = np.zeros(grid.num_samples, dtype=np.complex128)
    z = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    c[lo + grid.num_samples // 2: hi + 1 + grid.num_samples // 2] = band_envelope(n, envelope) * z
    return c


def synthesize(d: Descriptor, grid: GridSpec) -> SampledFunction:
    """Sample the described function on ``grid``."""
    return SampledFunction(grid, _values(d, grid))


def _values(d: Descriptor, grid: GridSpec) -> np.ndarray:
    kind = d.get("kind")
    x = grid.x
    if kind == "pure_tone":
        return tone_values(grid, _tone_bin(d, grid))
    if kind == "gaussian_space":
        c, w = float(d.get("center", 0.0)), float(d.get("width", 1.0))
        return np.exp(-((x - c) ** 2) / (2.0 * w * w)).astype(np.complex128)
    if kind == "gaussian_band":
        # defined through its spectrum, so the samples are exactly band-limited on the grid
        m = _tone_bin({"sigma": d["center"]}, grid)
        beta = float(d["bandwidth"])
        if beta <= 0:
            raise InvalidParameter("bandwidth must be positive")
        coeffs = np.exp(-((grid.xi - m * grid.dxi) ** 2) / (2.0 * beta * beta))
        return inverse_fourier(SpectralFunction(grid, coeffs)).values
    if kind == "cauchy_sq":
        return 1.0 / (x + 1j) ** 2
    if kind in ("haar_profile", "tent_profile", "bump_profile"):
        a, b = map(float, d["interval"])
        return profile_samples(kind, grid, a, b)
    if kind == "random_band":
        lo, hi = map(int, d["bins"])
        rng = np.random.default_rng(int(d["seed"]))
        coeffs = random_band_coeffs(grid, lo, hi, rng, d.get("envelope", "bump"))
        return inverse_fourier(SpectralFunction(grid, coeffs)).values
    if kind == "sign":
        # cell [x_j, x_j + dx) with x_j = 0 lies on the positive side
        return np.where(x >= 0, 1.0, -1.0).astype(np.complex128)
    if kind == "log_abs":
        out = np.empty(grid.num_samples, dtype=np.complex128)
        nz = x != 0
        out[nz] = np.log(np.abs(x[nz]))
        # cell average of log x over [0, dx)
        out[~nz] = math.log(grid.dx) - 1.0
        return out
    if kind == "constant":
        return np.full(grid.num_samples, as_complex(d.get("value", 1.0)))
    if kind == "sum":
        terms = d["terms"]
        weights = d.get("weights", [1.0] * len(terms))
        if len(weights) != len(terms):
            raise InvalidParameter("weights and terms differ in length")
        out = np.zeros(grid.num_samples, dtype=np.complex128)
        for w, t in zip(weights, terms):
            out += as_complex(w) * _values(t, grid)
        return out
    raise InvalidParameter(f"unknown descriptor kind {kind!r}")


def pure_tone(sigma: float | None = None, *, bin: int | None = None) -> Descriptor:
    if (sigma is None) == (bin is None):
        raise InvalidParameter("give exactly one of sigma or bin")
    return {"kind": "pure_tone", "bin": bin} if bin is not None else {"kind": "pure_tone", "sigma": sigma}


def cos_tone(*, bin: int) -> Descriptor:
    return {"kind": "sum", "terms": [pure_tone(bin=bin), pure_tone(bin=-bin)], "weights": [0.5, 0.5]}


def sin_tone(*, bin: int) -> Descriptor:
    return {"kind": "sum", "terms": [pure_tone(bin=bin), pure_tone(bin=-bin)],
            "weights": [[0.0, -0.5], [0.0, 0.5]]}


def linear_combination(terms: list[Descriptor], weights: list[complex]) -> Descriptor:
    return {"kind": "sum", "terms": list(terms),
            "weights": [[complex(w).real, complex(w).imag] for w in weights]}


def load_descriptor(path: str | Path) -> Descriptor:
    d = json.loads(Path(path).read_text())
    if not isinstance(d, dict) or d.get("kind") not in KINDS:
        raise InvalidParameter(f"{path}: not a function descriptor")
    return d
