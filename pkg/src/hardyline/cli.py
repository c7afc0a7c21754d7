"""Command-line front end.

Exit codes: 0 success, 2 validation error, 3 wraparound guard (override
with ``--force``), 4 failed identity check.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
import warnings
from dataclasses import asdict, dataclass, fields
from pathlib import Path

from . import operators as ops
from .descriptors import KINDS, synthesize
from .errors import HardylineError, NonzeroMeanWarning, WraparoundRisk
from .experiments import (
    FamilySpec, decomposition_constant, divergence_ladder, estimate_operator_bound,
    identity_suite, janson_input, ladder_from_lengths, rows_to_csv,
)
from .grid import SCHEMA_VERSION, GridSpec, SampledFunction, l1_norm, save_function
from .operators import ModulationSymbol
from .spaces import band_decompose, bmo_estimate, h1_norm, make_atom, make_b_atom, membership_report

EXIT_OK, EXIT_INVALID, EXIT_GUARD, EXIT_ASSERT = 0, 2, 3, 4

log = logging.getLogger("hardyline")


@dataclass
class RunConfig:
    """Everything needed to reproduce a run."""

    L: float = 64.0
    N: int = 4096
    tau_bins: int = 8
    seed: int = 1
    trials: int = 200
    bins: tuple[int, int] = (1, 32)
    generator: str = "random_band"
    envelope: str = "bump"
    ladder: tuple[float, ...] = (64.0, 128.0, 256.0)
    samples_per_unit: int = 32
    refine_steps: int = 200
    bandwidth: float = 0.02
    zero_tau_bin: bool = False
    tol: float = 1e-10
    max_increase: float = 0.10
    flat_tol: float = 0.10
    op: str = "toeplitz"
    out_dir: str = "."
    schema_version: int = SCHEMA_VERSION

    def to_dict(self) -> dict:
        d = asdict(self)
        d["bins"], d["ladder"] = list(self.bins), list(self.ladder)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        d = dict(d)
        if "bins" in d:
            d["bins"] = tuple(d["bins"])
        if "ladder" in d:
            d["ladder"] = tuple(float(x) for x in d["ladder"])
        return cls(**d)

    def grid(self) -> GridSpec:
        return GridSpec(self.L, self.N)

    def family(self) -> FamilySpec:
        return FamilySpec(self.generator, self.bins, self.trials, self.seed, self.envelope)


# -- input ------------------------------------------------------------------

def read_input(path: str, grid: GridSpec) -> SampledFunction:
    """A descriptor is synthesized on ``grid``; a saved function keeps its own grid."""
    d = json.loads(Path(path).read_text())
    if isinstance(d, dict) and "values" in d:
        return SampledFunction.from_dict(d)
    if isinstance(d, dict) and d.get("kind") in KINDS:
        return synthesize(d, grid)
    raise ValueError(f"{path}: neither a function descriptor nor a saved function")


def _write_json(path: Path, obj) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True))


def _sidecar(path: Path) -> Path:
    return path.with_name(path.stem + ".report.json")


# -- commands ---------------------------------------------------------------

def _symbol(cfg: RunConfig, f: SampledFunction) -> ModulationSymbol:
    return ModulationSymbol(cfg.tau_bins, f.grid)


def cmd_apply(cfg: RunConfig, args) -> int:
    f = read_input(args.input, cfg.grid())
    on_wrap = "warn" if args.force else "raise"
    op = args.op
    if op == "toeplitz":
        out = ops.toeplitz_apply(_symbol(cfg, f), f, on_wrap)
    elif op == "hankel":
        out = ops.hankel_apply(_symbol(cfg, f), f, on_wrap)
    elif op == "hilbert":
        out = ops.hilbert(f)
    elif op == "project_plus":
        out = ops.project_plus(f)
    elif op == "project_minus":
        out = ops.project_minus(f)
    elif op == "modulate":
        out = ops.modulate(f, -cfg.tau_bins, on_wrap)
    elif op == "commutator":
        out = ops.commutator_bH(_symbol(cfg, f).conj_samples(), f)
    elif op == "lowpass":
        out = ops.smooth_lowpass(f, args.r)
    elif op == "band_regularize":
        out = ops.band_regularize(f, args.R, args.eps)
    else:  # argparse restricts choices
        raise ValueError(op)
    path = Path(args.output)
    path.parent.mkdir(parents=True, exist_ok=True)
    save_function(out, path)
    report = {"schema_version": SCHEMA_VERSION, "op": op, "config": cfg.to_dict(),
              "membership": membership_report(out)}
    _write_json(_sidecar(path), report)
    print(f"wrote {path} and {_sidecar(path)}")
    return EXIT_OK


def _emit(cfg: RunConfig, name: str, report: dict, rows: list[dict]) -> None:
    out = Path(cfg.out_dir)
    report = dict(report, config=cfg.to_dict())
    _write_json(out / f"{name}.json", report)
    (out / f"{name}.csv").write_text(rows_to_csv(rows))
    print(f"wrote {out / (name + '.json')} and {out / (name + '.csv')}")


def _verdict(label: str, ok: bool, detail: str) -> None:
    print(f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}")


def _ladder(cfg: RunConfig):
    return ladder_from_lengths(cfg.ladder, cfg.samples_per_unit)


def cmd_experiment(cfg: RunConfig, args) -> int:
    name = args.name
    if name == "identities":
        g = cfg.grid()
        rep = identity_suite(g, ModulationSymbol(cfg.tau_bins, g), cfg.seed, tol=cfg.tol)
        for c in rep.checks:
            _verdict(c.name, c.passed, f"residual {c.residual:.3e} (tol {c.tol:.0e})")
        _emit(cfg, "identities", rep.to_dict(), rep.csv_rows())
        return EXIT_OK if rep.all_passed else EXIT_ASSERT
    if name in ("bound", "decompose-const"):
        fam = cfg.family()
        if name == "bound":
            est = estimate_operator_bound(cfg.op, fam, _ladder(cfg), cfg.tau_bins, cfg.refine_steps)
        else:
            est = decomposition_constant(cfg.tau_bins, fam, _ladder(cfg), cfg.refine_steps)
        for r in est.rungs:
            print(f"L={r.L:g} N={r.N} k={r.k}: random sup {r.random_sup:.6f}, "
                  f"refined sup {r.refined_sup:.6f}, discarded {r.discarded}")
        incs = est.rung_increases()
        ok = all(i <= cfg.max_increase for i in incs)
        _verdict(f"{est.operator} sup ratio stable", ok,
                 "per-rung increases " + ", ".join(f"{i:+.2%}" for i in incs))
        _emit(cfg, name.replace("-", "_"), est.to_dict(), est.csv_rows(cfg.max_increase))
        return EXIT_OK
    if name == "diverge":
        lad = _ladder(cfg)
        f = janson_input(cfg.tau_bins, lad[0][0], cfg.bandwidth)
        rep = divergence_ladder(cfg.tau_bins, f, lad, zero_tau_bin=cfg.zero_tau_bin)
        for r in rep.rungs:
            print(f"L={r['L']:g} N={r['N']} k={r['k']}: ratio {r['ratio']:.6f}")
        if cfg.zero_tau_bin:
            _verdict("ratios flat", rep.is_flat(cfg.flat_tol), f"spread {rep.spread:.2%}")
        else:
            _verdict("ratios strictly increasing", rep.monotone, f"slope vs ln L {rep.slope:.4f}")
        _emit(cfg, "diverge", rep.to_dict(), rep.csv_rows())
        return EXIT_OK
    raise ValueError(name)


def cmd_norm(cfg: RunConfig, args) -> int:
    f = read_input(args.input, cfg.grid())
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NonzeroMeanWarning)
        h1 = h1_norm(f)
    bmo = bmo_estimate(f, args.depth)
    diag = membership_report(f)
    result = {"schema_version": SCHEMA_VERSION, "l1": l1_norm(f), "h1": h1,
              "bmo": bmo.to_dict(), "membership": diag}
    print(f"l1  = {result['l1']:.10g}")
    print(f"h1  = {h1:.10g}")
    print(f"bmo = {bmo.value:.10g} (depth {bmo.depth})")
    if diag["bin0_fraction"] > 1e-10:
        print(f"note: bin-0 fraction {diag['bin0_fraction']:.2e}; h1 value includes the mean")
    if args.output:
        _write_json(Path(args.output), result)
    return EXIT_OK


def cmd_decompose(cfg: RunConfig, args) -> int:
    f = read_input(args.input, cfg.grid())
    dec = band_decompose(f, _symbol(cfg, f))
    norms = dec.norms()
    print(json.dumps(norms, indent=2))
    if args.output:
        _write_json(Path(args.output), dict(dec.to_dict(), norms=norms, schema_version=SCHEMA_VERSION))
    return EXIT_OK


def cmd_make_atom(cfg: RunConfig, args) -> int:
    g = cfg.grid()
    if args.b:
        b = read_input(args.b, g)
        atom = make_b_atom(g, tuple(args.interval), b)
        inv = atom.invariants(b)
    else:
        atom = make_atom(g, tuple(args.interval), args.profile)
        inv = atom.invariants()
    print(json.dumps(inv, indent=2))
    path = Path(args.output)
    path.parent.mkdir(parents=True, exist_ok=True)
    save_function(atom.function, path)
    _write_json(_sidecar(path), {"schema_version": SCHEMA_VERSION, "interval": list(atom.interval),
                                 "meta": atom.meta, "invariants": inv})
    return EXIT_OK


# -- parser -----------------------------------------------------------------

def _csv_floats(s: str) -> tuple[float, ...]:
    return tuple(float(t) for t in s.split(",") if t.strip())


def _bins(s: str) -> tuple[int, int]:
    lo, hi = (int(t) for t in s.split(","))
    return lo, hi


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="RunConfig JSON; explicit flags override it")
    common.add_argument("--save-config", help="write the effective RunConfig here")
    common.add_argument("--L", type=float)
    common.add_argument("--N", type=int)
    common.add_argument("--tau-bins", dest="tau_bins", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--out-dir", dest="out_dir")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="hardyline", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("apply", parents=[common], help="apply an operator to a function")
    a.add_argument("--op", required=True, choices=[
        "toeplitz", "hankel", "hilbert", "project_plus", "project_minus", "modulate",
        "commutator", "lowpass", "band_regularize"])
    a.add_argument("--input", required=True)
    a.add_argument("--output", default="out.json")
    a.add_argument("--force", action="store_true", help="downgrade the wraparound guard to a warning")
    a.add_argument("--r", type=float, default=1.0, help="lowpass radius")
    a.add_argument("--R", type=float, default=4.0, help="band_regularize upper radius")
    a.add_argument("--eps", type=float, default=0.25, help="band_regularize lower radius")

    e = sub.add_parser("experiment", parents=[common], help="run an experiment")
    e.add_argument("name", choices=["identities", "bound", "diverge", "decompose-const"])
    e.add_argument("--op")
    e.add_argument("--trials", type=int)
    e.add_argument("--ladder", type=_csv_floats, help="comma-separated half-lengths L")
    e.add_argument("--bins", type=_bins, help="family band on the first rung, as lo,hi")
    e.add_argument("--generator", choices=["random_band", "atoms", "tones", "mixed"])
    e.add_argument("--refine-steps", dest="refine_steps", type=int)
    e.add_argument("--bandwidth", type=float)
    e.add_argument("--zero-tau-bin", dest="zero_tau_bin", action="store_true", default=None)
    e.add_argument("--tol", type=float)

    n = sub.add_parser("norm", parents=[common], help="print L1, H1 and BMO values")
    n.add_argument("--input", required=True)
    n.add_argument("--depth", type=int, default=8)
    n.add_argument("--output")

    d = sub.add_parser("decompose", parents=[common], help="split an H1_Theta member into bands")
    d.add_argument("--input", required=True)
    d.add_argument("--output")

    m = sub.add_parser("make-atom", parents=[common], help="generate an atom or b-atom")
    m.add_argument("--interval", type=float, nargs=2, required=True, metavar=("A", "B"))
    m.add_argument("--profile", default="haar_profile")
    m.add_argument("--b", help="function for a b-atom (descriptor or saved function)")
    m.add_argument("--output", default="atom.json")
    return p


_CONFIG_FLAGS = ("L", "N", "tau_bins", "seed", "out_dir", "op", "trials", "ladder", "bins",
                 "generator", "refine_steps", "bandwidth", "zero_tau_bin", "tol")


def resolve_config(args) -> RunConfig:
    base = RunConfig.from_dict(json.loads(Path(args.config).read_text())) if args.config else RunConfig()
    d = base.to_dict()
    for name in _CONFIG_FLAGS:
        v = getattr(args, name, None)
        if v is not None:
            d[name] = v
    cfg = RunConfig.from_dict(d)
    if args.save_config:
        _write_json(Path(args.save_config), cfg.to_dict())
    return cfg


COMMANDS = {"apply": cmd_apply, "experiment": cmd_experiment, "norm": cmd_norm,
            "decompose": cmd_decompose, "make-atom": cmd_make_atom}


def main(argv: list[str] | None = None) -> int:
    p = build_parser()
    try:
        args = p.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INVALID
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve_config(args)
        return COMMANDS[args.command](cfg, args)
    except WraparoundRisk as exc:
        print(f"error: {exc} (use --force to override)", file=sys.stderr)
        return EXIT_GUARD
    except (HardylineError, ValueError, TypeError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
