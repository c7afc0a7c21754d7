"""Desk-scale experiments: operator-bound ladders, divergence ladders,
decomposition constants and the identity suite.

Ladders keep physical quantities fixed.  A ladder is a list of ``(L, N)``
rungs; the symbol ``tau = tau_bins * pi / L0`` and the family's frequency
band are specified on the first rung ``L0`` and rescaled to
``tau_bins * L/L0`` bins on later rungs, so every ``L/L0`` must be an
integer.

Parallel evaluation (``HARDYLINE_THREADS``) only changes scheduling: each
trial draws from its own generator seeded by ``(seed, trial)`` and results
are reduced in index order.
"""
from __future__ import annotations

import csv
import io
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable

import numpy as np

from . import operators as ops
from .descriptors import Descriptor, random_band_coeffs, synthesize
from .errors import EmptyFamily, InvalidParameter, PreconditionViolation
from .grid import (
    SCHEMA_VERSION, GridSpec, SampledFunction, SpectralFunction, forward_fourier, inverse_fourier,
    l1_norm, pairing,
)
from .operators import ModulationSymbol
from .spaces import (
    band_decompose, h1_norm, make_atom, project_to_h1_theta,
)

logger = logging.getLogger(__name__)

DISCARD_BELOW = 1e-8
CSV_COLUMNS = ("experiment", "L", "N", "k", "trial", "ratio", "sup_ratio", "flag")

Ladder = list[tuple[float, int]]


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get("HARDYLINE_THREADS", "1")))
    except ValueError:
        return 1


def _pmap(fn: Callable, items: Iterable, threads: int | None) -> list:
    items = list(items)
    threads = default_threads() if threads is None else threads
    if threads <= 1 or len(items) < 2:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def ladder_from_lengths(lengths: Iterable[float], samples_per_unit: int = 32) -> Ladder:
    """Rungs with a fixed spatial step ``1/samples_per_unit``."""
    out = []
    for L in lengths:
        n = 2 * L * samples_per_unit
        N = 1 << max(3, math.ceil(math.log2(n)))
        out.append((float(L), N))
    return out


def _rung_scales(ladder: Ladder) -> list[int]:
    if not ladder:
        raise InvalidParameter("empty ladder")
    L0 = ladder[0][0]
    scales = []
    for L, _ in ladder:
        s = L / L0
        if abs(s - round(s)) > 1e-12 or round(s) < 1:
            raise InvalidParameter(f"rung L={L} is not an integer multiple of the base L0={L0}")
        scales.append(int(round(s)))
    if any(b <= a for a, b in zip([l for l, _ in ladder], [l for l, _ in ladder][1:])):
        raise InvalidParameter("ladder rungs must be strictly increasing in L")
    return scales


# -- families ---------------------------------------------------------------

@dataclass(frozen=True)
class FamilySpec:
    """Deterministic random test family.

    ``bins`` is the inclusive spectral band on the base rung.  Bins 0 and
    ``tau_bins`` are cleared for spectrally generated members.
    """

    generator: str = "random_band"
    bins: tuple[int, int] = (1, 32)
    size: int = 200
    seed: int = 42
    envelope: str = "bump"

    def __post_init__(self):
        if self.generator not in ("random_band", "atoms", "tones", "mixed"):
            raise InvalidParameter(f"unknown generator {self.generator!r}")
        lo, hi = self.bins
        if not 0 <= lo <= hi:
            raise InvalidParameter(f"bad bin range {self.bins}")
        if self.size < 1:
            raise InvalidParameter("family size must be positive")
        object.__setattr__(self, "bins", (int(lo), int(hi)))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["bins"] = list(self.bins)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "FamilySpec":
        d = dict(d)
        if "bins" in d:
            d["bins"] = tuple(d["bins"])
        return cls(**d)


def trial_rng(seed: int, trial: int, stream: int = 0) -> np.random.Generator:
    return np.random.default_rng([int(seed), int(trial), int(stream)])


def member_coeffs(fam: FamilySpec, grid: GridSpec, k: int, scale: int, trial: int) -> np.ndarray:
    """Raw centered spectrum of one family member (before domain projection)."""
    rng = trial_rng(fam.seed, trial)
    gen = fam.generator
    if gen == "mixed":
        gen = ("random_band", "tones", "atoms")[trial % 3]
    lo, hi = max(1, fam.bins[0] * scale), fam.bins[1] * scale
    if gen == "random_band":
        c = random_band_coeffs(grid, lo, hi, rng, fam.envelope)
    elif gen == "tones":
        c = np.zeros(grid.num_samples, dtype=np.complex128)
        picks = rng.integers(lo, hi + 1, size=rng.integers(1, 5))
        for b in picks:
            c[grid.index_of_bin(int(b))] += rng.standard_normal() + 1j * rng.standard_normal()
    elif gen == "atoms":
        xi = rng.uniform(lo, hi) * grid.dxi
        length = min(2 * math.pi / xi, grid.half_length / 2)
        center = rng.uniform(-grid.half_length / 2, grid.half_length / 2)
        profile = ("haar_profile", "tent_profile", "bump_profile")[int(rng.integers(3))]
        atom = make_atom(grid, (center - length / 2, center + length / 2), profile)
        c = forward_fourier(atom.function).coeffs.copy()
    else:
        raise InvalidParameter(f"unknown generator {gen!r}")
    c[grid.index_of_bin(0)] = 0.0
    c[grid.index_of_bin(k)] = 0.0
    return c


# -- domains ----------------------------------------------------------------

def _analytic_mean_zero(c: np.ndarray, grid: GridSpec) -> np.ndarray:
    return np.where(grid.bins > 0, c, 0.0)


def project_domain(domain: str, c: np.ndarray, theta: ModulationSymbol) -> SampledFunction:
    """Map a raw spectrum into an operator's domain on ``theta.grid``."""
    g = theta.grid
    if domain == "h1":
        return inverse_fourier(SpectralFunction(g, _analytic_mean_zero(c, g)))
    if domain == "h1_theta":
        f = inverse_fourier(SpectralFunction(g, _analytic_mean_zero(c, g)))
        return project_to_h1_theta(f, theta)
    if domain == "h1_real":
        f = inverse_fourier(SpectralFunction(g, c))
        f = SampledFunction(g, f.values.real)
        cr = forward_fourier(f).coeffs.copy()
        cr[g.index_of_bin(0)] = 0.0
        return inverse_fourier(SpectralFunction(g, cr))
    raise InvalidParameter(f"unknown domain {domain!r}")


@dataclass(frozen=True)
class OperatorSpec:
    name: str
    domain: str
    output_norm: str
    apply: Callable[[SampledFunction, ModulationSymbol], SampledFunction]


def _out_norm(kind: str, f: SampledFunction) -> float:
    return h1_norm(f, check_mean=False) if kind == "h1" else l1_norm(f)


OPERATORS: dict[str, OperatorSpec] = {
    spec.name: spec for spec in (
        OperatorSpec("identity", "h1_theta", "h1", lambda f, th: f),
        OperatorSpec("toeplitz", "h1_theta", "h1", lambda f, th: ops.toeplitz_apply(th, f)),
        OperatorSpec("hankel", "h1_theta", "h1", lambda f, th: ops.hankel_apply(th, f)),
        OperatorSpec("multiply_conj", "h1_theta", "h1",
                     lambda f, th: ops.multiply(th.conj_samples(), f)),
        OperatorSpec("commutator", "h1_theta", "l1",
                     lambda f, th: ops.commutator_bH(th.conj_samples(), f)),
        OperatorSpec("project_plus", "h1_real", "h1", lambda f, th: ops.project_plus(f)),
    )
}


# -- bound estimation -------------------------------------------------------

@dataclass
class RungEstimate:
    L: float
    N: int
    k: int
    ratios: list[float]
    discarded: int
    random_sup: float
    best_trial: int
    refined_sup: float
    history: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class BoundEstimate:
    operator: str
    family: FamilySpec
    tau_bins: int
    rungs: list[RungEstimate]
    schema_version: int = SCHEMA_VERSION

    @property
    def sup_ratio(self) -> float:
        return max(r.refined_sup for r in self.rungs)

    @property
    def per_trial_ratios(self) -> list[float]:
        return self.rungs[0].ratios

    def ladder_entries(self) -> list[tuple[float, int, float]]:
        return [(r.L, r.N, r.refined_sup) for r in self.rungs]

    def rung_increases(self) -> list[float]:
        sups = [r.refined_sup for r in self.rungs]
        return [b / a - 1.0 for a, b in zip(sups, sups[1:])]

    def rung_spread(self) -> float:
        sups = [r.refined_sup for r in self.rungs]
        return max(sups) / min(sups) - 1.0

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "experiment": "bound",
            "operator": self.operator,
            "family": self.family.to_dict(),
            "tau_bins": self.tau_bins,
            "sup_ratio": self.sup_ratio,
            "rung_increases": self.rung_increases(),
            "rungs": [r.to_dict() for r in self.rungs],
        }

    def csv_rows(self, max_increase: float = 0.10) -> list[dict]:
        rows = []
        incs = [0.0] + self.rung_increases()
        for r, inc in zip(self.rungs, incs):
            flag = "stable" if inc <= max_increase else "unstable"
            for t, ratio in enumerate(r.ratios):
                rows.append(dict(experiment=f"bound:{self.operator}", L=r.L, N=r.N, k=r.k,
                                 trial=t, ratio=ratio, sup_ratio=r.refined_sup, flag=flag))
        return rows


RatioFn = Callable[[SampledFunction, ModulationSymbol], float]


def _operator_ratio(spec: OperatorSpec) -> RatioFn:
    def ratio(f: SampledFunction, theta: ModulationSymbol) -> float:
        return _out_norm(spec.output_norm, spec.apply(f, theta)) / h1_norm(f, check_mean=False)
    return ratio


def _evaluate(c, domain, ratio_fn, theta) -> float:
    f = project_domain(domain, c, theta)
    if h1_norm(f, check_mean=False) < DISCARD_BELOW:
        return float("nan")
    return float(ratio_fn(f, theta))


def _refine(c0: np.ndarray, r0: float, domain: str, ratio_fn: RatioFn, theta: ModulationSymbol,
            active: np.ndarray, steps: int, rng: np.random.Generator) -> tuple[float, list[dict]]:
    """Coordinate ascent on single spectral bins; only improvements are kept."""
    c = c0.copy()
    best = r0
    history = []
    g = theta.grid
    amp = float(np.sqrt(np.mean(np.abs(c[[g.index_of_bin(int(b)) for b in active]]) ** 2)))
    if amp == 0.0 or len(active) == 0:
        return best, history
    for step in range(steps):
        b = int(active[step % len(active)])
        i = g.index_of_bin(b)
        delta = 0.5 * amp * (rng.standard_normal() + 1j * rng.standard_normal())
        for sgn in (1.0, -1.0):
            trial = c.copy()
            trial[i] += sgn * delta
            r = _evaluate(trial, domain, ratio_fn, theta)
            if r > best:
                best, c = r, trial
                history.append({"step": step, "bin": b, "ratio": r})
                break
    return best, history


def _ladder_estimate(name: str, ratio_fn: RatioFn, domain: str, fam: FamilySpec,
                     ladder: Ladder, tau_bins: int, refine_steps: int,
                     threads: int | None) -> BoundEstimate:
    scales = _rung_scales(ladder)
    rungs = []
    for ri, ((L, N), s) in enumerate(zip(ladder, scales)):
        grid = GridSpec(L, N)
        k = tau_bins * s
        theta = ModulationSymbol(k, grid)
        if (fam.bins[1] * s + k) >= grid.num_samples // 2:
            raise InvalidParameter(f"family band plus tau exceeds Nyquist on rung L={L}")

        def run(trial: int, grid=grid, k=k, s=s, theta=theta):
            c = member_coeffs(fam, grid, k, s, trial)
            return c, _evaluate(c, domain, ratio_fn, theta)

        results = _pmap(run, range(fam.size), threads)
        ratios = [r for _, r in results]
        valid = [i for i, r in enumerate(ratios) if not math.isnan(r)]
        if not valid:
            raise EmptyFamily(f"all {fam.size} trials discarded on rung L={L}")
        best = max(valid, key=lambda i: ratios[i])
        active = np.array([b for b in range(max(1, fam.bins[0] * s), fam.bins[1] * s + 1) if b != k])
        refined, history = _refine(results[best][0], ratios[best], domain, ratio_fn, theta, active,
                                   refine_steps, trial_rng(fam.seed, ri, stream=1))
        logger.info("%s rung L=%g N=%d k=%d: random sup %.6g, refined %.6g",
                    name, L, N, k, ratios[best], refined)
        rungs.append(RungEstimate(L, N, k, ratios, fam.size - len(valid), ratios[best], best,
                                  refined, history))
    return BoundEstimate(name, fam, tau_bins, rungs)


def estimate_operator_bound(op: str, fam: FamilySpec, ladder: Ladder, tau_bins: int = 8,
                            refine_steps: int = 200, threads: int | None = None) -> BoundEstimate:
    """Lower-bound estimate of ``sup ||op f|| / ||f||_{H1}`` over a family, per rung."""
    if op not in OPERATORS:
        raise InvalidParameter(f"unknown operator {op!r}; choose from {sorted(OPERATORS)}")
    spec = OPERATORS[op]
    return _ladder_estimate(op, _operator_ratio(spec), spec.domain, fam, ladder, tau_bins,
                            refine_steps, threads)


def _decomposition_ratio(f: SampledFunction, theta: ModulationSymbol) -> float:
    return band_decompose(f, theta).norms()["ratio"]


def decomposition_constant(tau_bins: int, fam: FamilySpec, ladder: Ladder,
                           refine_steps: int = 0, threads: int | None = None) -> BoundEstimate:
    """``sup (||f1||_{H1} + ||f2||_{H1}) / ||f||_{H1}`` over an ``H1_Theta`` family."""
    return _ladder_estimate("decomposition", _decomposition_ratio, "h1_theta", fam, ladder,
                            tau_bins, refine_steps, threads)


# -- divergence ladder ------------------------------------------------------

@dataclass
class LadderReport:
    tau_bins: int
    descriptor: Descriptor
    zero_tau_bin: bool
    rungs: list[dict]
    monotone: bool
    slope: float
    max_increase: float
    spread: float
    schema_version: int = SCHEMA_VERSION

    @property
    def ratios(self) -> list[float]:
        return [r["ratio"] for r in self.rungs]

    def is_flat(self, tol: float = 0.10) -> bool:
        return self.spread <= tol

    def to_dict(self) -> dict:
        d = asdict(self)
        d["experiment"] = "diverge"
        return d

    def csv_rows(self) -> list[dict]:
        name = "diverge:zeroed" if self.zero_tau_bin else "diverge:mean"
        return [dict(experiment=name, L=r["L"], N=r["N"], k=r["k"], trial="", ratio=r["ratio"],
                     sup_ratio="", flag="increasing" if self.monotone else "not-increasing")
                for r in self.rungs]


def divergence_ladder(tau_bins: int, f: Descriptor, ladder: Ladder,
                      zero_tau_bin: bool = False) -> LadderReport:
    """Ratios ``||T_{conj Theta} f||_{H1} / ||f||_{H1}`` along a doubling ladder."""
    if len(ladder) < 4:
        raise PreconditionViolation("divergence ladder needs at least 4 rungs")
    Ls = [L for L, _ in ladder]
    if any(abs(b / a - 2.0) > 1e-12 for a, b in zip(Ls, Ls[1:])):
        raise PreconditionViolation("divergence ladder must double L at every rung")
    scales = _rung_scales(ladder)
    rungs = []
    for (L, N), s in zip(ladder, scales):
        grid = GridSpec(L, N)
        theta = ModulationSymbol(tau_bins * s, grid)
        fs = synthesize(f, grid)
        c = forward_fourier(fs).coeffs.copy()
        peak = float(np.max(np.abs(c)))
        at_tau = abs(c[grid.index_of_bin(theta.tau_bins)])
        if peak == 0.0 or at_tau < 1e-3 * peak:
            raise PreconditionViolation(
                f"|f_hat(tau)| = {at_tau:.3e} below 1e-3 of the spectral peak {peak:.3e} on rung L={L}")
        if zero_tau_bin:
            c[grid.index_of_bin(theta.tau_bins)] = 0.0
            fs = inverse_fourier(SpectralFunction(grid, c))
        h_in = h1_norm(fs, check_mean=False)
        h_out = h1_norm(ops.toeplitz_apply(theta, fs), check_mean=False)
        rungs.append({"L": L, "N": N, "k": theta.tau_bins, "h1_in": h_in, "h1_out": h_out,
                      "ratio": h_out / h_in})
    ratios = [r["ratio"] for r in rungs]
    incs = [b / a - 1.0 for a, b in zip(ratios, ratios[1:])]
    slope = float(np.polyfit(np.log(Ls), ratios, 1)[0])
    return LadderReport(tau_bins, f, zero_tau_bin, rungs,
                        monotone=all(i > 0 for i in incs), slope=slope,
                        max_increase=max(incs), spread=max(ratios) / min(ratios) - 1.0)


def janson_input(tau_bins: int, L0: float, bandwidth: float = 0.02) -> Descriptor:
    """Gaussian band centered at ``tau = tau_bins*pi/L0`` (mean-carrying after the shift)."""
    return {"kind": "gaussian_band", "center": tau_bins * math.pi / L0, "bandwidth": bandwidth}


# -- identity suite ---------------------------------------------------------

@dataclass
class IdentityCheck:
    name: str
    residual: float
    tol: float

    @property
    def passed(self) -> bool:
        return bool(self.residual <= self.tol)


@dataclass
class IdentityReport:
    grid: GridSpec
    tau_bins: int
    seed: int
    checks: list[IdentityCheck]
    schema_version: int = SCHEMA_VERSION

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "experiment": "identities",
            "grid": self.grid.to_dict(), "tau_bins": self.tau_bins, "seed": self.seed,
            "all_passed": self.all_passed,
            "checks": [{"name": c.name, "residual": c.residual, "tol": c.tol, "passed": c.passed}
                       for c in self.checks],
        }

    def csv_rows(self) -> list[dict]:
        return [dict(experiment=f"identity:{c.name}", L=self.grid.half_length, N=self.grid.num_samples,
                     k=self.tau_bins, trial="", ratio=c.residual, sup_ratio="",
                     flag="pass" if c.passed else "fail") for c in self.checks]


def _rel(a: SampledFunction, b: SampledFunction) -> float:
    den = max(a.l2_norm(), b.l2_norm())
    return (a - b).l2_norm() / den if den > 0 else 0.0


def _band(grid: GridSpec, rng: np.random.Generator, lo: int, hi: int) -> SampledFunction:
    return inverse_fourier(SpectralFunction(grid, random_band_coeffs(grid, lo, hi, rng, "flat")))


def identity_suite(grid: GridSpec, theta: ModulationSymbol, seed: int = 1, members: int = 50,
                   tol: float = 1e-10) -> IdentityReport:
    """Max relative residual of each algebraic identity over a fixed random family."""
    k = theta.tau_bins
    nyq = grid.nyquist_bin
    half = grid.num_samples // 2
    top = nyq - k - 1
    th = theta.samples()
    thc = theta.conj_samples()
    res: dict[str, float] = {}

    def record(name, value):
        res[name] = max(res.get(name, 0.0), float(value))

    for m in range(members):
        rng = trial_rng(seed, m)
        # generic full-band function, and a mean-zero version of it
        f = _band(grid, rng, -half, nyq)
        c = forward_fourier(f).coeffs.copy()
        c[half] = 0.0
        f0 = inverse_fourier(SpectralFunction(grid, c))
        g = _band(grid, rng, 1, top)                 # analytic, room for Theta g
        a = _band(grid, rng, 0, top)                 # analytic (bin 0 allowed)
        kmodel = _band(grid, rng, 1, k - 1)          # K1_Theta model
        conj_an = _band(grid, rng, -half + k, -1)    # conjugate-analytic, room for the shift
        h1t = _band(grid, rng, 1, top)               # H1_Theta model: clear bin k
        ch = forward_fourier(h1t).coeffs.copy()
        ch[half + k] = 0.0
        h1t = inverse_fourier(SpectralFunction(grid, ch))
        alpha, beta = complex(*rng.standard_normal(2)), complex(*rng.standard_normal(2))
        f2 = _band(grid, rng, -half, nyq)

        pp, pm = ops.project_plus(f), ops.project_minus(f)
        record("partition P+ + P- = Id", _rel(pp + pm, f))
        record("P+ idempotent", _rel(ops.project_plus(pp), pp))
        record("P- idempotent", _rel(ops.project_minus(pm), pm))
        record("H = -i(P+ - P-) on mean-zero",
               _rel(ops.hilbert(f0), -1j * (ops.project_plus(f0) - ops.project_minus(f0))))
        record("H(H f) = -f on mean-zero", _rel(ops.hilbert(ops.hilbert(f0)), -f0))
        lhs = pairing(ops.toeplitz_apply(theta, a), g)
        rhs = pairing(a, ops.multiply(th, g))
        record("adjoint <T f, g> = <f, Theta g>", abs(lhs - rhs) / (a.l2_norm() * g.l2_norm()))
        record("T(Theta g) = g", _rel(ops.toeplitz_apply(theta, ops.multiply(th, g)), g))
        record("T = 0 on K-model", ops.toeplitz_apply(theta, kmodel).l2_norm() / kmodel.l2_norm())
        record("Hankel complementarity T + Hk = conj(Theta) f",
               _rel(ops.toeplitz_apply(theta, a) + ops.hankel_apply(theta, a), ops.multiply(thc, a)))
        record("commutator vanishes on conjugate-analytic",
               ops.commutator_bH(thc, conj_an).l2_norm() / conj_an.l2_norm())
        record("commutator = -2i Hankel on H1_Theta",
               _rel(ops.commutator_bH(thc, h1t), -2j * ops.hankel_apply(theta, h1t)))
        en = forward_fourier(f).energy()
        record("Plancherel", abs(pairing(f, f).real - en) / en)
        for name, op in (("hilbert", ops.hilbert), ("project_plus", ops.project_plus),
                         ("toeplitz", lambda u: ops.toeplitz_apply(theta, u, on_wrap="ignore"))):
            record(f"linearity {name}", _rel(op(alpha * f + beta * f2), alpha * op(f) + beta * op(f2)))
    checks = [IdentityCheck(n, r, tol) for n, r in res.items()]
    return IdentityReport(grid, k, seed, checks)


# -- report emission --------------------------------------------------------

def rows_to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({c: r.get(c, "") for c in CSV_COLUMNS})
    return buf.getvalue()
