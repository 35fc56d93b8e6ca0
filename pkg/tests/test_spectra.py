"""Spectra: counting, cumulative mass, growth checker, Nystrom, catalog, JSON."""

import json
import math

import numpy as np
import pytest

import smallball as sb
from smallball.errors import (
    DomainError,
    NotPSDError,
    UnboundedCountError,
    UsageError,
    ValidationError,
)


def test_counting_exponential_direct():
    # lambda_n = e^-n, threshold e^-5.5: exactly n <= 5 exceed it
    spec = sb.catalog("explicit", values=np.exp(-np.arange(1.0, 21.0)))
    assert sb.counting(spec, math.exp(-5.5)) == 5


def test_counting_all_below():
    spec = sb.catalog("explicit", values=[1.0, 0.5])
    assert sb.counting(spec, 2.0) == 0


def test_counting_stretched_tail_inversion():
    # lambda_n = exp(-2*sqrt(pi*n)); at lam = exp(-2*sqrt(2*pi)) only n=1
    # satisfies 2*sqrt(pi*n) < 2*sqrt(2*pi)  (hand inversion: n < 2)
    spec = sb.catalog("stretched_exp", C=2.0, alpha=0.5, head=0)
    assert sb.counting(spec, math.exp(-2.0 * math.sqrt(2.0 * math.pi))) == 1


def test_counting_strictness_at_eigenvalue():
    spec = sb.catalog("explicit", values=[1.0, 0.5, 0.5])
    # strict '>' at a tie point
    assert sb.counting(spec, 0.5) == 1
    assert sb.counting(spec, 1.0) == 0


def test_counting_domain_and_floor_errors():
    spec = sb.catalog("power", exponent=2.0)
    with pytest.raises(DomainError):
        sb.counting(spec, 0.0)
    with pytest.raises(DomainError):
        sb.counting(spec, -1.0)
    with pytest.raises(UnboundedCountError) as exc:
        sb.counting(spec, 1e-200)
    assert exc.value.floor > 0


def test_counting_scale_property():
    spec = sb.catalog("explicit", values=[1.0, 0.7, 0.2, 0.05])
    for lam in (0.03, 0.1, 0.4, 0.9, 2.0):
        for c in (0.1, 3.0, 10.0):
            assert sb.counting(spec.scaled(c), c * lam) == sb.counting(spec, lam)


def test_cumulative_mass_small_cases():
    spec = sb.catalog("explicit", values=[1.0, 0.5])
    assert sb.cumulative_mass(spec, 0.7) == pytest.approx(1.2, abs=1e-15)
    assert sb.cumulative_mass(spec, 10.0) == pytest.approx(1.5, abs=1e-15)


def test_cumulative_mass_power_tail_vs_bruteforce():
    # oracle: direct sum of min(n^-2, lam) to 1e6 plus integral tail bracket
    spec = sb.catalog("power", exponent=2.0)
    got = sb.cumulative_mass(spec, 0.01)
    n = np.arange(1.0, 1_000_001.0)
    brute = float(np.minimum(1.0 / n**2, 0.01).sum())
    assert brute + 1.0 / 1_000_001.0 <= got <= brute + 1.0 / 1_000_000.0
    assert got == pytest.approx(0.19516633568, abs=1e-9)


def test_fubini_identity_explicit():
    # integral of the counting step function equals sum min(lambda_n, x);
    # oracle accumulates the exact piecewise-linear breakpoint integral
    rng = np.random.default_rng(7)
    for _ in range(10):
        vals = np.sort(rng.uniform(0.01, 2.0, size=8))[::-1]
        spec = sb.catalog("explicit", values=vals)
        for x in (0.005, 0.3, 1.0, 2.5):
            asc = np.sort(vals)
            pts = np.concatenate([[0.0], asc[asc < x], [x]])
            counts = [sb.counting(spec, 0.5 * (a + b)) for a, b in zip(pts[:-1], pts[1:])]
            integral = float(np.sum(np.diff(pts) * np.asarray(counts)))
            assert sb.cumulative_mass(spec, x) == pytest.approx(integral, abs=1e-10)


def test_fubini_identity_power_tail():
    spec = sb.catalog("power", exponent=1.5)
    n = np.arange(1.0, 2_000_001.0)
    for x in (0.001, 0.05):
        brute = float(np.minimum(n**-1.5, x).sum())
        tail_hi = 2.0 / math.sqrt(2_000_000.0)
        assert brute < sb.cumulative_mass(spec, x) < brute + tail_hi


def test_cumulative_mass_monotone_concave():
    spec = sb.catalog("brownian", truncate=50)
    xs = np.linspace(1e-4, 0.6, 60)
    vals = np.array([sb.cumulative_mass(spec, x) for x in xs])
    assert np.all(np.diff(vals) >= -1e-15)
    second = np.diff(vals, 2)
    assert np.all(second <= 1e-10)


def test_counting_monotone_nonincreasing():
    spec = sb.catalog("stretched_exp", C=1.0, alpha=1.0, head=3)
    lams = np.geomspace(1e-12, 1.0, 40)
    counts = [sb.counting(spec, l) for l in lams]
    assert all(a >= b for a, b in zip(counts, counts[1:]))


def test_counting_unbounded_for_infinite_spectra():
    for spec in (
        sb.catalog("power", exponent=2.0),
        sb.catalog("stretched_exp", C=2.0, alpha=0.5),
    ):
        counts = [sb.counting(spec, 10.0 ** (-k)) for k in (2, 6, 10, 14)]
        assert all(b > a for a, b in zip(counts, counts[1:]))
        assert counts[-1] > 50


def test_cumulative_mass_bounded_by_total():
    rng = np.random.default_rng(3)
    specs = [
        sb.catalog("power", exponent=1.7),
        sb.catalog("brownian", truncate=30),
        sb.catalog("explicit", values=np.sort(rng.uniform(0.01, 1.0, 12))[::-1]),
    ]
    for spec in specs:
        total = spec.total_mass()
        for x in np.geomspace(1e-8, 10.0, 25):
            assert sb.cumulative_mass(spec, float(x)) <= total * (1 + 1e-12)


def test_growth_condition_power_counting():
    # N(lam) = lam^(-1/2) gives M(x) = 2 sqrt(x), ratio h^(1/2) exactly
    cf = sb.CountingFunction(lambda lam: lam**-0.5, lam_max=1.0)
    chk = sb.check_growth_condition(cf, [4.0], [1e-2, 1e-3, 1e-4])
    for ratio in chk.ratios[4.0]:
        assert ratio == pytest.approx(2.0, rel=1e-6)
    assert chk.passed and chk.verdict == "PASS"


def test_growth_condition_log_counting():
    # N = ln(1/lam): M(x) = x (ln(1/x) + 1), ratio -> 2 for h = 2
    cf = sb.CountingFunction(lambda lam: math.log(1.0 / lam), lam_max=0.5)
    xs = [1e-3, 1e-4, 1e-5, 1e-6]
    chk = sb.check_growth_condition(cf, [2.0], xs)
    for x, ratio in zip(chk.x_grid, chk.ratios[2.0]):
        expect = 2.0 * (math.log(1.0 / x) + 1.0 - math.log(2.0)) / (math.log(1.0 / x) + 1.0)
        assert ratio == pytest.approx(expect, rel=1e-6)
    assert chk.passed


def test_growth_condition_finite_spectrum():
    spec = sb.catalog("explicit", values=[0.3] * 5)
    cf = sb.CountingFunction(spec)
    chk = sb.check_growth_condition(cf, [2.0], [0.01, 0.001])
    assert all(r == pytest.approx(2.0, rel=1e-12) for r in chk.ratios[2.0])
    assert chk.passed


def test_growth_condition_usage_errors():
    cf = sb.CountingFunction(lambda lam: 1.0, lam_max=1.0)
    with pytest.raises(UsageError):
        sb.check_growth_condition(cf, [], [0.1])
    with pytest.raises(UsageError):
        sb.check_growth_condition(cf, [0.5], [0.1])


def test_nystrom_brownian_oracle():
    spec = sb.nystrom_spectrum(sb.KernelSpec("brownian"), 200)
    n = np.arange(1, 6)
    exact = 1.0 / ((n - 0.5) ** 2 * np.pi**2)
    rel = np.abs(spec.head[:5] - exact) / exact
    assert np.all(rel <= 1e-4)
    assert spec.head.sum() == pytest.approx(0.5, abs=1e-6)


def test_nystrom_constant_kernel_rank_one():
    spec = sb.nystrom_spectrum(sb.KernelSpec("constant"), 64)
    assert spec.n_head == 1
    assert spec.head[0] == pytest.approx(1.0, rel=1e-12)


def test_nystrom_gauss_self_consistency():
    s200 = sb.nystrom_spectrum(sb.KernelSpec("gauss", C=1.0), 200)
    s400 = sb.nystrom_spectrum(sb.KernelSpec("gauss", C=1.0), 400)
    # well-resolved leading block agrees across grids; smaller eigenvalues
    # sit at the noise floor of eigensolves and are excluded
    k = 5
    rel = np.abs(s200.head[:k] - s400.head[:k]) / s400.head[:k]
    assert np.all(rel <= 1e-8)
    assert np.all(s200.head > 0)
    m = min(s200.n_head, 8)
    ratios = s200.head[1:m] / s200.head[: m - 1]
    assert all(b < a for a, b in zip(ratios, ratios[1:]))  # super-geometric decay


def test_nystrom_cauchy_counting_matches_elliptic_formula():
    # eigenvalue counts of the Cauchy-covariance operator follow
    # ln(1/lam)/(pi*K-ratio(C)); ties the eigensolver to the elliptic constant
    for C in (1.0, 0.5):
        spec = sb.nystrom_spectrum(sb.KernelSpec("cauchy", C=C), 240)
        ratio_const = sb.elliptic_K_ratio(C)
        for lam in (1e-8, 1e-10, 1e-12):
            emp = sb.counting(spec, lam)
            pred = math.log(1.0 / lam) / (math.pi * ratio_const)
            assert 0.8 <= emp / pred <= 1.2


def test_nystrom_spectral_convergence_smooth():
    a = sb.nystrom_spectrum(sb.KernelSpec("cauchy", C=1.0), 100)
    b = sb.nystrom_spectrum(sb.KernelSpec("cauchy", C=1.0), 200)
    assert np.abs(a.head[:5] - b.head[:5]).max() <= 1e-10


def test_nystrom_tabulated_validation():
    xs = np.linspace(0.0, 1.0, 8)
    K = np.outer(xs, xs + 1.0)  # not symmetric
    with pytest.raises(ValidationError):
        sb.KernelSpec("tabulated", table_nodes=xs, table_values=K)


def test_nystrom_not_psd():
    xs = np.linspace(0.0, 1.0, 16)
    K = np.cos(40.0 * np.subtract.outer(xs, xs)) - 0.9 * np.eye(16)  # indefinite
    spec = sb.KernelSpec("tabulated", table_nodes=xs, table_values=K)
    with pytest.raises(NotPSDError):
        sb.nystrom_spectrum(spec, 64)


def test_nystrom_weight_density():
    # doubling the weight doubles every eigenvalue
    base = sb.nystrom_spectrum(sb.KernelSpec("brownian"), 80)
    doubled = sb.nystrom_spectrum(
        sb.KernelSpec("brownian", weight=lambda x: 2.0 * np.ones_like(x)), 80
    )
    assert np.allclose(doubled.head[:10], 2.0 * base.head[:10], rtol=1e-12)


def test_catalog_brownian_head():
    spec = sb.catalog("brownian", truncate=3)
    expect = [4.0 / np.pi**2, 4.0 / (9.0 * np.pi**2), 4.0 / (25.0 * np.pi**2)]
    assert np.allclose(spec.head, expect, rtol=1e-15)
    assert spec.tail is not None


def test_catalog_stretched_head():
    spec = sb.catalog("stretched_exp", C=2.0, alpha=0.5, head=2)
    expect = [math.exp(-2.0 * math.sqrt(math.pi)), math.exp(-2.0 * math.sqrt(2.0 * math.pi))]
    assert np.allclose(spec.head, expect, rtol=1e-15)


def test_catalog_explicit_identity():
    spec = sb.catalog("explicit", values=[1.0, 0.5])
    assert list(spec.head) == [1.0, 0.5]
    assert spec.is_finite


def test_catalog_unknown_name():
    with pytest.raises(UsageError, match="brownian"):
        sb.catalog("nope")


def test_spectrum_validation():
    with pytest.raises(ValidationError):
        sb.Spectrum(np.array([0.5, 1.0]))  # increasing head
    with pytest.raises(ValidationError):
        sb.Spectrum(np.array([1.0, -0.5]))
    with pytest.raises(ValidationError):
        sb.Spectrum(np.array([]))  # nothing at all
    with pytest.raises(ValidationError):
        # head dips below the tail start: splice violated
        sb.Spectrum(np.array([1e-8]), sb.PowerTail(1.0, 2.0))


def test_total_mass_certified():
    spec = sb.catalog("power", exponent=2.0)
    assert spec.total_mass() == pytest.approx(np.pi**2 / 6.0, rel=1e-14)
    spec2 = sb.catalog("brownian", truncate=5000)
    assert spec2.total_mass() == pytest.approx(0.5, abs=1e-4)


def test_truncate_for():
    spec = sb.catalog("power", exponent=2.0)
    lams, n, mass = spec.truncate_for(1e-4)
    assert mass <= 1e-4
    assert spec.mass_after(n - 1) > 1e-4  # minimal N
    assert len(lams) == n


def test_json_round_trip():
    for spec in (
        sb.catalog("explicit", values=[1.0, 0.25]),
        sb.catalog("power", exponent=2.5, scale=0.7),
        sb.catalog("stretched_exp", C=2.0, alpha=0.5, head=2),
        sb.catalog("stretched_exp", C=1.0 / math.pi, alpha=1.0, scale=2.0, head=3),
    ):
        back = sb.spectrum_from_json(sb.spectrum_to_json(spec))
        assert np.array_equal(back.head, spec.head)
        assert type(back.tail) is type(spec.tail)
        if spec.tail is not None:
            assert sb.spectrum_to_json(back) == sb.spectrum_to_json(spec)


def test_json_kernel_spec():
    text = json.dumps(
        {"type": "kernel", "name": "brownian", "interval": [0.0, 1.0], "nodes": 64}
    )
    spec = sb.spectrum_from_json(text)
    assert spec.head[0] == pytest.approx(4.0 / np.pi**2, rel=1e-3)


def test_json_bad_type():
    with pytest.raises(UsageError):
        sb.spectrum_from_json('{"type": "mystery"}')
