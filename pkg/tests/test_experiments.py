import csv
import io
import json
import math

import numpy as np
import pytest

from hardyline.descriptors import pure_tone
from hardyline.errors import EmptyFamily, InvalidParameter, PreconditionViolation
from hardyline.experiments import (
    CSV_COLUMNS, OPERATORS, FamilySpec, decomposition_constant, divergence_ladder,
    estimate_operator_bound, identity_suite, janson_input, ladder_from_lengths, member_coeffs,
    _operator_ratio, project_domain, rows_to_csv,
)
from hardyline.grid import GridSpec, forward_fourier
from hardyline.operators import ModulationSymbol
from hardyline.spaces import bin_fraction, h1_norm, is_mean_zero

SMALL = [(32.0, 2048), (64.0, 4096)]


def small_family(**kw):
    return FamilySpec(**{"size": 12, "seed": 5, "bins": (1, 16), **kw})


def test_ladder_from_lengths():
    assert ladder_from_lengths([64, 128, 256]) == [(64.0, 4096), (128.0, 8192), (256.0, 16384)]


def test_family_deterministic_and_in_domain():
    g = GridSpec(64, 4096)
    th = ModulationSymbol(8, g)
    for gen in ("random_band", "tones", "atoms", "mixed"):
        fam = small_family(generator=gen)
        a = member_coeffs(fam, g, 8, 1, 3)
        b = member_coeffs(fam, g, 8, 1, 3)
        assert np.array_equal(a, b)
        f = project_domain("h1_theta", a, th)
        c = forward_fourier(f).coeffs
        assert bin_fraction(f, 8) < 1e-12 and is_mean_zero(f)
        assert np.linalg.norm(c[g.bins < 0]) <= 1e-12 * np.linalg.norm(c)


def test_real_domain_is_real_and_mean_zero():
    g = GridSpec(64, 4096)
    th = ModulationSymbol(8, g)
    f = project_domain("h1_real", member_coeffs(small_family(), g, 8, 1, 0), th)
    assert np.max(np.abs(f.values.imag)) < 1e-15 and is_mean_zero(f)


def test_family_spec_validation():
    with pytest.raises(InvalidParameter):
        FamilySpec(generator="poisson")
    with pytest.raises(InvalidParameter):
        FamilySpec(bins=(5, 2))
    fam = small_family()
    assert FamilySpec.from_dict(json.loads(json.dumps(fam.to_dict()))) == fam


def test_identity_operator_is_exactly_one():
    est = estimate_operator_bound("identity", small_family(), SMALL, refine_steps=10)
    assert all(r == 1.0 for r in est.per_trial_ratios)
    assert est.sup_ratio == 1.0


def test_bound_invariants_and_determinism():
    a = estimate_operator_bound("toeplitz", small_family(), SMALL, refine_steps=20)
    b = estimate_operator_bound("toeplitz", small_family(), SMALL, refine_steps=20, threads=4)
    assert a.to_dict() == b.to_dict()
    for r in a.rungs:
        assert r.refined_sup >= r.random_sup >= max(r.ratios)
    assert a.sup_ratio == max(r.refined_sup for r in a.rungs)
    assert [e[:2] for e in a.ladder_entries()] == SMALL


def test_ratios_scale_invariant():
    g = GridSpec(64, 4096)
    th = ModulationSymbol(8, g)
    c = member_coeffs(small_family(), g, 8, 1, 2)
    for name, spec in OPERATORS.items():
        f = project_domain(spec.domain, c, th)
        scale = 3.7 if spec.domain == "h1_real" else 3.7 - 2j
        r1, r2 = _operator_ratio(spec)(f, th), _operator_ratio(spec)(scale * f, th)
        assert r2 == pytest.approx(r1, rel=1e-12), name


def test_all_operators_run_finite():
    for op in OPERATORS:
        est = estimate_operator_bound(op, small_family(), SMALL[:1], refine_steps=0)
        assert math.isfinite(est.sup_ratio) and est.sup_ratio > 0


def test_project_plus_bound_finite():
    est = estimate_operator_bound("project_plus", small_family(size=40), SMALL, refine_steps=0)
    assert est.sup_ratio < 2


def test_empty_family():
    fam = FamilySpec(generator="random_band", bins=(8, 8), size=3)
    with pytest.raises(EmptyFamily):
        estimate_operator_bound("toeplitz", fam, SMALL[:1], refine_steps=0)


def test_bad_ladders():
    with pytest.raises(InvalidParameter):
        estimate_operator_bound("toeplitz", small_family(), [(64.0, 4096), (96.0, 8192)])
    with pytest.raises(InvalidParameter):
        estimate_operator_bound("nope", small_family(), SMALL)
    with pytest.raises(InvalidParameter):
        estimate_operator_bound("toeplitz", FamilySpec(bins=(1, 2045)), SMALL)


def test_decomposition_constant_examples():
    low = small_family(bins=(1, 7))
    est = decomposition_constant(8, low, SMALL)
    assert est.sup_ratio == pytest.approx(1.0, abs=1e-12)
    tones = decomposition_constant(8, small_family(generator="tones"), SMALL)
    assert min(min(r.ratios) for r in tones.rungs) >= 1.0 - 1e-12


def test_divergence_preconditions():
    lad = ladder_from_lengths([64, 128, 256, 512])
    with pytest.raises(PreconditionViolation):
        divergence_ladder(8, pure_tone(bin=9), lad)
    with pytest.raises(PreconditionViolation):
        divergence_ladder(8, janson_input(8, 64), lad[:3])
    with pytest.raises(PreconditionViolation):
        divergence_ladder(8, janson_input(8, 64), ladder_from_lengths([64, 128, 512, 1024]))


def test_divergence_flags():
    lad = ladder_from_lengths([64, 128, 256, 512])
    mean = divergence_ladder(8, janson_input(8, 64), lad)
    zeroed = divergence_ladder(8, janson_input(8, 64), lad, zero_tau_bin=True)
    assert mean.monotone and mean.slope > 0
    assert not zeroed.monotone and zeroed.is_flat(0.10)
    assert [r["L"] for r in mean.rungs] == [64, 128, 256, 512]


def test_identity_suite_small_grid():
    g = GridSpec(16, 512)
    rep = identity_suite(g, ModulationSymbol(4, g), seed=3, members=5)
    assert rep.all_passed
    assert len(rep.checks) >= 12
    json.dumps(rep.to_dict())


def test_csv_columns():
    g = GridSpec(16, 512)
    rep = identity_suite(g, ModulationSymbol(4, g), seed=3, members=2)
    text = rows_to_csv(rep.csv_rows())
    rows = list(csv.reader(io.StringIO(text)))
    assert tuple(rows[0]) == CSV_COLUMNS
    assert all(r[-1] == "pass" for r in rows[1:])


def test_h1_of_members_nonzero():
    g = GridSpec(64, 4096)
    th = ModulationSymbol(8, g)
    for t in range(5):
        f = project_domain("h1_theta", member_coeffs(small_family(generator="atoms"), g, 8, 1, t), th)
        assert h1_norm(f) > 1e-8
