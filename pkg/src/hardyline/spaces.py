"""Norms, subspaces, atoms and mean oscillation on the grid.

Discrete model of the subspaces attached to ``Theta = exp(i*tau*x)``,
``tau = k*dxi``, on analytic functions (spectrum in bins ``>= 0``):

* ``H1``         : bin 0 empty (zero mean),
* ``H1_Theta``   : bins 0 and ``k`` empty,
* ``K1_Theta``   : spectrum in bins ``1..k-1``,
* ``Theta H1``   : spectrum in bins ``k+1..N/2-1``.

All "mass" diagnostics are amplitude ratios ``||part of f_hat|| / ||f_hat||``
in the discrete l2 sense.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .descriptors import Descriptor, synthesize
from .errors import (
    BadNormalizer, DegenerateProfiles, IntervalTooSmall, InvalidParameter, NonzeroMeanWarning,
    NotInSubspace,
)
from .grid import (
    GridSpec, SampledFunction, SpectralFunction, _check_same_grid, forward_fourier,
    interval_slice, inverse_fourier, l1_norm, pairing,
)
from .operators import ModulationSymbol, hilbert

MEAN_TOL = 1e-10
SUBSPACE_TOL = 1e-10


def _spectral_fraction(coeffs: np.ndarray, mask: np.ndarray) -> float:
    total = float(np.linalg.norm(coeffs))
    if total == 0.0:
        return 0.0
    return float(np.linalg.norm(coeffs[mask])) / total


def h1_norm(f: SampledFunction, check_mean: bool = True) -> float:
    """``||f||_1 + ||Hf||_1``."""
    if check_mean:
        c = forward_fourier(f).coeffs
        frac = _spectral_fraction(c, f.grid.bins == 0)
        if frac > MEAN_TOL:
            warnings.warn(f"h1_norm of a function with bin-0 fraction {frac:.2e}",
                          NonzeroMeanWarning, stacklevel=2)
    return l1_norm(f) + l1_norm(hilbert(f))


# -- H1_Theta ---------------------------------------------------------------

def inner_pairing_with_theta(f: SampledFunction, theta: ModulationSymbol) -> complex:
    """``<f, Theta>``; equals ``sqrt(2*pi) * f_hat(tau)`` on the grid."""
    _check_same_grid(f.grid, theta.grid)
    return pairing(f, theta.samples())


def default_h0(theta: ModulationSymbol) -> SampledFunction:
    """Analytic normalizer with ``<h0, Theta> = 1``.

    Gaussian in frequency centered at bin ``k`` with width ``k/4`` bins,
    restricted to bins ``1..2k``.
    """
    g, k = theta.grid, theta.tau_bins
    bins = g.bins
    width = max(k / 4.0, 0.5)
    c = np.where((bins >= 1) & (bins <= 2 * k), np.exp(-0.5 * ((bins - k) / width) ** 2), 0.0)
    h = inverse_fourier(SpectralFunction(g, c))
    return h * (1.0 / inner_pairing_with_theta(h, theta))


def project_to_h1_theta(f: SampledFunction, theta: ModulationSymbol,
                        h0: SampledFunction | None = None) -> SampledFunction:
    """``f - <f, Theta> h0``, which annihilates ``Theta``."""
    if h0 is None:
        h0 = default_h0(theta)
    norm = inner_pairing_with_theta(h0, theta)
    if abs(norm - 1.0) > 1e-10:
        raise BadNormalizer(f"<h0, Theta> = {norm} differs from 1")
    return f - inner_pairing_with_theta(f, theta) * h0


@dataclass(frozen=True, eq=False)
class BandDecomposition:
    """``f = kernel_part + shifted_part`` (+ residual bins 0, k and negative bins)."""

    kernel_part: SampledFunction
    shifted_part: SampledFunction
    residual_mass: float
    tau_bins: int

    def reconstruct(self) -> SampledFunction:
        return self.kernel_part + self.shifted_part

    def norms(self) -> dict:
        h1_k = h1_norm(self.kernel_part, check_mean=False)
        h1_s = h1_norm(self.shifted_part, check_mean=False)
        h1_f = h1_norm(self.reconstruct(), check_mean=False)
        return {
            "h1": h1_f, "h1_kernel": h1_k, "h1_shifted": h1_s,
            "l1_kernel": l1_norm(self.kernel_part), "l1_shifted": l1_norm(self.shifted_part),
            "ratio": (h1_k + h1_s) / h1_f if h1_f > 0 else float("nan"),
        }

    def to_dict(self) -> dict:
        nyq = self.kernel_part.grid.nyquist_bin
        return {
            "kind": "band_decomposition",
            "tau_bins": self.tau_bins,
            "bins": {"kernel": [1, self.tau_bins - 1], "shifted": [self.tau_bins + 1, nyq]},
            "residual_mass": self.residual_mass,
            "kernel_part": self.kernel_part.to_dict(),
            "shifted_part": self.shifted_part.to_dict(),
        }


def band_decompose(f: SampledFunction, theta: ModulationSymbol,
                   tol: float = SUBSPACE_TOL) -> BandDecomposition:
    """Split an ``H1_Theta`` member into its ``K1_Theta`` and ``Theta H1`` parts."""
    _check_same_grid(f.grid, theta.grid)
    g, k = f.grid, theta.tau_bins
    c = forward_fourier(f).coeffs
    bins = g.bins
    checks = {
        "negative-bin": _spectral_fraction(c, bins < 0),
        "bin-0": _spectral_fraction(c, bins == 0),
        "bin-tau": _spectral_fraction(c, bins == k),
    }
    bad = {name: v for name, v in checks.items() if v > tol}
    if bad:
        raise NotInSubspace(
            "input not in H1_Theta: " + ", ".join(f"{n} fraction {v:.2e}" for n, v in bad.items()))
    low = (bins >= 1) & (bins < k)
    high = bins > k
    kernel = inverse_fourier(SpectralFunction(g, np.where(low, c, 0.0)))
    shifted = inverse_fourier(SpectralFunction(g, np.where(high, c, 0.0)))
    return BandDecomposition(kernel, shifted, _spectral_fraction(c, ~(low | high)), k)


# -- atoms ------------------------------------------------------------------

_PROFILE_ALIASES = {"haar": "haar_profile", "tent": "tent_profile", "bump": "bump_profile"}


@dataclass(frozen=True, eq=False)
class Atom:
    """Function supported on the grid-snapped interval ``[a, b)``.

    ``b - a`` equals the number of covered samples times ``dx``, which is the
    measure used for the size bound.
    """

    interval: tuple[float, float]
    function: SampledFunction
    meta: dict = field(default_factory=dict)

    @property
    def length(self) -> float:
        return self.interval[1] - self.interval[0]

    def indicator(self) -> SampledFunction:
        g = self.function.grid
        v = np.zeros(g.num_samples)
        v[_snapped_slice(g, self.interval)] = 1.0
        return SampledFunction(g, v)

    def invariants(self, b: SampledFunction | None = None) -> dict:
        """Residuals of the atom conditions (and the b-orthogonality, if given)."""
        v = self.function.values
        sl = _snapped_slice(self.function.grid, self.interval)
        outside = np.ones(len(v), dtype=bool)
        outside[sl] = False
        out = {
            "mean": abs(pairing(self.function, self.indicator())),
            "size": float(np.max(np.abs(v))) * self.length,
            "outside_support": float(np.max(np.abs(v[outside]), initial=0.0)),
        }
        if b is not None:
            out["b_pairing"] = abs(pairing(self.function, b))
            out["b_scale"] = self.function.l2_norm() * _restrict(b, sl).l2_norm()
        return out

    def to_dict(self) -> dict:
        d = self.function.to_dict()
        d.update(kind="atom", interval=list(self.interval), **self.meta)
        return d


def _snapped_slice(g: GridSpec, interval: tuple[float, float]) -> slice:
    a, b = interval
    lo = round((a + g.half_length) / g.dx)
    return slice(lo, lo + round((b - a) / g.dx))


def _restrict(f: SampledFunction, sl: slice) -> SampledFunction:
    v = np.zeros(f.grid.num_samples, dtype=np.complex128)
    v[sl] = f.values[sl]
    return SampledFunction(f.grid, v)


def _snap(grid: GridSpec, interval) -> tuple[slice, tuple[float, float]]:
    a, b = map(float, interval)
    if b - a < 4 * grid.dx:
        raise IntervalTooSmall(f"|I| = {b - a} below 4*dx = {4 * grid.dx}")
    sl = interval_slice(grid, a, b)
    n = sl.stop - sl.start
    if n < 4:
        raise IntervalTooSmall(f"interval covers only {n} samples")
    a0 = float(grid.x[sl.start])
    return sl, (a0, a0 + n * grid.dx)


def _profile_values(grid: GridSpec, interval, profile) -> np.ndarray:
    if isinstance(profile, str):
        profile = {"kind": _PROFILE_ALIASES.get(profile, profile)}
    if not isinstance(profile, dict):
        raise InvalidParameter(f"profile must be a kind name or descriptor, got {profile!r}")
    if profile.get("kind") in _PROFILE_ALIASES.values() and "interval" not in profile:
        profile = {**profile, "interval": list(interval)}
    return synthesize(profile, grid).values


def _finish_atom(grid: GridSpec, sl: slice, snapped, v: np.ndarray, meta: dict,
                 ref: float = 1.0) -> Atom:
    # ref: size of the raw profile, so roundoff-level remainders count as zero
    peak = float(np.max(np.abs(v)))
    if peak <= 1e-10 * ref:
        raise DegenerateProfiles("profile vanishes after the mean correction")
    v = v * ((1.0 / (snapped[1] - snapped[0])) / peak)
    return Atom(snapped, SampledFunction(grid, v), meta)


def make_atom(grid: GridSpec, interval, profile: str | Descriptor = "haar_profile") -> Atom:
    """Atom on ``interval`` shaped by ``profile``.

    The profile is restricted to the interval, its discrete mean removed, and
    the result rescaled so that ``max |a| = 1/|I|``.
    """
    sl, snapped = _snap(grid, interval)
    p = _profile_values(grid, snapped, profile)
    v = np.zeros(grid.num_samples, dtype=np.complex128)
    v[sl] = p[sl] - np.mean(p[sl])
    return _finish_atom(grid, sl, snapped, v, {"profile": profile}, float(np.max(np.abs(p[sl]))))


def make_b_atom(grid: GridSpec, interval, b: SampledFunction,
                profiles=("haar_profile", "tent_profile"), cond_max: float = 1e6) -> Atom:
    """Atom on ``interval`` that is also orthogonal to ``b``.

    Writes ``a = p1 - l1 * 1_I - l2 * p2`` and solves the 2x2 system making
    ``a`` mean-zero and ``<a, b> = 0``.  When ``b`` restricted to ``I`` is a
    multiple of a constant the two conditions coincide and only the mean is
    corrected.
    """
    _check_same_grid(grid, b.grid)
    sl, snapped = _snap(grid, interval)
    p1 = np.zeros(grid.num_samples, dtype=np.complex128)
    p2 = np.zeros(grid.num_samples, dtype=np.complex128)
    one = np.zeros(grid.num_samples, dtype=np.complex128)
    p1[sl] = _profile_values(grid, snapped, profiles[0])[sl]
    p2[sl] = _profile_values(grid, snapped, profiles[1])[sl]
    one[sl] = 1.0
    bv = b.values
    dx = grid.dx

    def integ(u):
        return dx * np.sum(u)

    def bpair(u):
        return dx * np.vdot(bv, u)

    A = np.array([[integ(one), integ(p2)], [bpair(one), bpair(p2)]])
    rhs = np.array([integ(p1), bpair(p1)])
    scale = np.linalg.norm(A, axis=1)
    meta = {"profiles": list(profiles)}
    mean_only = np.array([rhs[0] / A[0, 0], 0.0])

    if scale[1] <= 1e-14 * scale[0]:
        # b is orthogonal to the whole corrector space; p1 must already be
        if abs(rhs[1] - A[1] @ mean_only) > 1e-10 * max(scale[0], abs(rhs[1])):
            raise DegenerateProfiles("b annihilates 1_I and p2 but not p1")
        lam = mean_only
    else:
        An = A / scale[:, None]
        s = np.linalg.svd(An, compute_uv=False)
        if s[1] <= 1e-12 * s[0]:
            # constraints coincide (b constant on I)
            resid = abs(rhs[1] - A[1] @ mean_only)
            if resid > 1e-10 * (abs(rhs[1]) + scale[1] * abs(mean_only[0]) + 1e-300):
                raise DegenerateProfiles("rank-deficient system with inconsistent right side")
            lam = mean_only
        else:
            cond = s[0] / s[1]
            meta["condition"] = float(cond)
            if cond > cond_max:
                raise DegenerateProfiles(f"2x2 system condition number {cond:.3e} exceeds {cond_max:.0e}")
            lam = np.linalg.solve(A, rhs)
    v = p1 - lam[0] * one - lam[1] * p2
    return _finish_atom(grid, sl, snapped, v, meta, float(np.max(np.abs(p1))))


# -- BMO --------------------------------------------------------------------

@dataclass(frozen=True)
class BmoEstimate:
    value: float
    depth: int
    witness: tuple[float, float]
    level_max: tuple[float, ...]

    def to_dict(self) -> dict:
        return {"value": self.value, "depth": self.depth, "witness": list(self.witness),
                "level_max": list(self.level_max)}


def oscillation_on(psi: SampledFunction, interval) -> float:
    """``(1/|I|) * integral_I |psi - psi_I|`` over the samples in ``[a, b)``."""
    sl = interval_slice(psi.grid, *map(float, interval))
    v = psi.values[sl]
    if v.size == 0:
        raise InvalidParameter(f"interval {interval} contains no samples")
    return float(np.mean(np.abs(v - v.mean())))


def bmo_estimate(psi: SampledFunction, depth: int) -> BmoEstimate:
    """Largest mean oscillation over dyadic subintervals of ``[-L, L)`` down to ``depth``."""
    g = psi.grid
    if depth < 1 or 2 ** depth > g.num_samples:
        raise InvalidParameter(f"depth must satisfy 1 <= depth and 2**depth <= N, got {depth}")
    best, witness, per_level = -1.0, (-g.half_length, g.half_length), []
    for level in range(depth + 1):
        rows = psi.values.reshape(2 ** level, -1)
        osc = np.mean(np.abs(rows - rows.mean(axis=1, keepdims=True)), axis=1)
        i = int(np.argmax(osc))
        per_level.append(float(osc[i]))
        if osc[i] > best:
            width = 2.0 * g.half_length / 2 ** level
            best, witness = float(osc[i]), (-g.half_length + i * width, -g.half_length + (i + 1) * width)
    return BmoEstimate(best, depth, witness, tuple(per_level))


# -- diagnostics ------------------------------------------------------------

def membership_report(f: SampledFunction) -> dict:
    """Spectral and spatial diagnostics for judging truncation effects."""
    g = f.grid
    c = forward_fourier(f).coeffs
    tail = np.abs(g.x) > 0.9 * g.half_length
    total = float(np.linalg.norm(f.values))
    m = g.dx * np.sum(f.values)
    return {
        "grid": g.to_dict(),
        "negative_bin_fraction": _spectral_fraction(c, g.bins < 0),
        "positive_bin_fraction": _spectral_fraction(c, g.bins > 0),
        "bin0_fraction": _spectral_fraction(c, g.bins == 0),
        "boundary_tail_fraction": float(np.linalg.norm(f.values[tail])) / total if total else 0.0,
        "l1": l1_norm(f),
        "mean": [float(np.real(m)), float(np.imag(m))],
    }


def is_mean_zero(f: SampledFunction, tol: float = MEAN_TOL) -> bool:
    return _spectral_fraction(forward_fourier(f).coeffs, f.grid.bins == 0) <= tol


def bin_fraction(f: SampledFunction, k: int) -> float:
    return _spectral_fraction(forward_fourier(f).coeffs, f.grid.bins == k)


__all__ = [
    "Atom", "BandDecomposition", "BmoEstimate", "band_decompose", "bin_fraction", "bmo_estimate",
    "default_h0", "h1_norm", "inner_pairing_with_theta", "is_mean_zero", "make_atom",
    "make_b_atom", "membership_report", "oscillation_on", "project_to_h1_theta",
]
