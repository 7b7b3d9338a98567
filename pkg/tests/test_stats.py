import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mpsprep import dist
from mpsprep import mps as M
from mpsprep.encode import encode_irwin_hall
from mpsprep.stats import (
    DiscreteDistribution,
    DistanceReport,
    FitResult,
    ecdf,
    ks_statistic,
    ks_threshold,
    loglog_slope,
    pdf_cdf_distances,
)
from oracles import ks_double_loop


def test_discrete_distribution_validation():
    with pytest.raises(ValueError):
        DiscreteDistribution([0, 1], [0.5, 0.6])
    with pytest.raises(ValueError):
        DiscreteDistribution([1, 0], [0.5, 0.5])
    with pytest.raises(ValueError):
        DiscreteDistribution([0, 1], [1.5, -0.5])
    with pytest.raises(ValueError):
        DiscreteDistribution([], [])


def test_discrete_distribution_moments_and_cdf():
    d = DiscreteDistribution([0.0, 1.0, 2.0], [0.25, 0.5, 0.25])
    assert d.mean == pytest.approx(1.0)
    assert d.std == pytest.approx(np.sqrt(0.5))
    assert np.allclose(d.cdf([-1, 0, 0.5, 2, 3]), [0, 0.25, 0.25, 1, 1])


def test_from_amplitudes_normalizes():
    d = DiscreteDistribution.from_amplitudes([0, 1], [3.0, 4.0])
    assert np.allclose(d.p, [9 / 25, 16 / 25])


def test_ecdf():
    vals, c = ecdf([3, 1, 1, 2])
    assert np.array_equal(vals, [1, 2, 3]) and np.allclose(c, [0.5, 0.75, 1.0])
    with pytest.raises(ValueError):
        ecdf([])


def test_ks_identical_discrete_is_zero():
    d = DiscreteDistribution([0.0, 1.0, 2.0], [0.2, 0.3, 0.5])
    assert ks_statistic(d, d) == 0.0


def test_ks_single_sample_at_median():
    assert ks_statistic([0.0], dist.normal_cdf) == pytest.approx(0.5)


def test_ks_two_sided_jumps():
    # right limits alone would give 0.0 for the first case
    assert ks_statistic([0.0, 0.0], lambda x: np.ones_like(np.asarray(x, dtype=float))) == pytest.approx(1.0)
    assert ks_statistic([1.0], lambda x: np.full_like(np.asarray(x, dtype=float), 0.5)) == pytest.approx(0.5)


def test_ks_empty():
    with pytest.raises(ValueError):
        ks_statistic([], dist.normal_cdf)


def test_ks_discretized_irwin_hall_matches_double_loop():
    state, grid, _ = encode_irwin_hall(16, 14)
    d = DiscreteDistribution.from_amplitudes(grid.points(), M.to_statevector(state))
    sigma = np.sqrt(16 / 24)
    cdf = lambda x: dist.normal_cdf((np.asarray(x) - 8.0) / sigma)
    # the loop oracle is quadratic, so run it on the part of the support that carries the maximum
    fast = ks_statistic(d, cdf)
    x, p = d.x, d.p
    c = np.cumsum(p)
    k = int(np.argmax(np.maximum(np.abs(c - cdf(x)), np.abs(c - p - cdf(x)))))
    worst = ks_double_loop(x.tolist(), p.tolist(), lambda t: float(cdf(t)), max(0, k - 100), k + 100)
    assert fast == pytest.approx(worst, abs=1e-12)


def test_ks_discrete_vs_discrete_union_support():
    a = DiscreteDistribution([0.0, 2.0], [0.5, 0.5])
    b = DiscreteDistribution([1.0, 2.0], [0.5, 0.5])
    assert ks_statistic(a, b) == pytest.approx(0.5)
    samples = np.array([0.0, 0.0, 2.0, 2.0])
    assert ks_statistic(samples, a) == pytest.approx(0.0)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2 ** 31), size=st.integers(1, 40))
def test_ks_samples_against_brute_force(seed, size):
    rng = np.random.default_rng(seed)
    s = rng.normal(size=size)
    grid = np.sort(np.concatenate([s, s - 1e-12, s + 1e-12]))
    brute = max(abs(np.mean(s <= t) - dist.normal_cdf(t)) for t in grid)
    assert ks_statistic(s, dist.normal_cdf) == pytest.approx(brute, abs=1e-9)


def test_ks_threshold_values():
    assert ks_threshold(0.05, 450) == pytest.approx(0.0905, abs=5e-5)
    assert ks_threshold(0.05, 150) == pytest.approx(0.1568, abs=5e-5)
    assert ks_threshold(2 / np.e, 1) == pytest.approx(1.0, rel=1e-14)


@pytest.mark.parametrize("alpha,s", [(0.0, 10), (1.0, 10), (0.05, 0), (0.05, 2.5)])
def test_ks_threshold_invalid(alpha, s):
    with pytest.raises(ValueError):
        ks_threshold(alpha, s)


def test_ks_self_consistency_of_threshold():
    thr = ks_threshold(0.05, 10000)
    passes = 0
    for seed in range(200):
        s = np.random.default_rng(seed).normal(size=10000)
        passes += ks_statistic(s, dist.normal_cdf) < thr
    assert passes / 200 >= 0.95


def test_distance_report_basics():
    r16, r256 = pdf_cdf_distances(16), pdf_cdf_distances(256)
    assert r256.sup_pdf < r16.sup_pdf
    assert r16.n_points == 1601
    for r in (r16, r256):
        for f in ("sup_pdf", "l1_pdf", "sup_cdf", "l1_cdf", "ks"):
            assert getattr(r, f) >= 0
        assert r.ks <= 1


def test_distance_scales():
    std, nat = pdf_cdf_distances(32, "standardized"), pdf_cdf_distances(32, "natural")
    s = np.sqrt(32 / 12)
    assert nat.sup_pdf == pytest.approx(std.sup_pdf / s, rel=1e-12)
    assert nat.sup_cdf == pytest.approx(std.sup_cdf, rel=1e-12)
    assert nat.l1_pdf == pytest.approx(std.l1_pdf, rel=1e-12)
    assert nat.avg_cdf == pytest.approx(std.avg_cdf, rel=1e-12)
    with pytest.raises(ValueError):
        pdf_cdf_distances(32, "log")


def test_l1_stable_under_refinement():
    coarse, fine = pdf_cdf_distances(16), pdf_cdf_distances(16, points_per_unit=100)
    assert fine.l1_pdf == pytest.approx(coarse.l1_pdf, rel=0.01)
    assert fine.l1_cdf == pytest.approx(coarse.l1_cdf, rel=0.01)


def test_distance_report_serialization():
    r = pdf_cdf_distances(8)
    header = DistanceReport.csv_header().split(",")
    row = r.to_csv_row().split(",")
    assert len(header) == len(row) and header[0] == "n"
    assert json.loads(r.to_json())["n"] == 8
    assert float(row[header.index("sup_pdf")]) == r.sup_pdf


def test_loglog_slope_exact_power_laws():
    xs = [1, 2, 4, 8, 16]
    assert loglog_slope(xs, [x ** 2 for x in xs]).slope == pytest.approx(2.0, abs=1e-12)
    fit = loglog_slope(xs, [3.0 / x for x in xs])
    assert fit.slope == pytest.approx(-1.0, abs=1e-12)
    assert fit.intercept == pytest.approx(np.log(3.0), abs=1e-12)
    assert fit.r2 == pytest.approx(1.0)


@pytest.mark.parametrize("xs,ys", [([1, 2], [1, 2]), ([1, 2, 0], [1, 2, 3]), ([1, 2, 3], [1, -2, 3])])
def test_loglog_slope_invalid(xs, ys):
    with pytest.raises(ValueError):
        loglog_slope(xs, ys)


def test_fit_result_serialization():
    fit = loglog_slope([1, 2, 4], [1, 4, 16])
    assert fit.to_csv_row().split(",")[0] == format(fit.slope, ".17g")
    assert FitResult.csv_header().startswith("slope")
