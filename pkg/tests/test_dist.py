from fractions import Fraction
from math import comb, factorial

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mpsprep import dist
from oracles import irwin_hall_pdf_convolution, irwin_hall_pdf_sgn

# reference values from the alternating sum in 60-digit arithmetic
FROZEN_PDF = [
    (3, 1.5, 0.75),
    (4, 1.3, 0.3481666666666666962),
    (16, 8.0, 0.34224026135534072042),
    (16, 3.7, 0.00021910711088782990832),
    (16, 14.25, 3.3810385072939664252e-9),
    (64, 32.0, 0.17234171495202982457),
    (64, 20.5, 4.7815060802387454927e-7),
    (128, 30.0, 1.7446200740688359213e-27),
]
FROZEN_CDF = [
    (4, 1.3, 0.11765416666666668213),
    (16, 6.0, 0.041634640744904468449),
    (64, 40.0, 0.99975791349128009938),
]


@pytest.mark.parametrize("n,x,expected", FROZEN_PDF)
def test_pdf_frozen_values(n, x, expected):
    assert dist.irwin_hall_pdf(n, x) == pytest.approx(expected, rel=1e-13)


@pytest.mark.parametrize("n,x,expected", FROZEN_CDF)
def test_cdf_frozen_values(n, x, expected):
    assert dist.irwin_hall_cdf(n, x) == pytest.approx(expected, rel=1e-13)


@pytest.mark.parametrize("n,x,expected", [(1, 0.5, 1.0), (2, 1.0, 1.0), (2, 0.5, 0.5)])
def test_pdf_small_orders(n, x, expected):
    assert dist.irwin_hall_pdf(n, x) == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize("n,x,expected", [(8, 8.0, 1.0), (4, 2.0, 0.5), (2, 1.0, 0.5), (5, 0.0, 0.0)])
def test_cdf_landmarks(n, x, expected):
    assert dist.irwin_hall_cdf(n, x) == pytest.approx(expected, abs=1e-15)


def test_pdf_outside_support_is_zero():
    vals = dist.irwin_hall_pdf(8, np.array([-1.0, -1e-12, 8.0 + 1e-9, 20.0]))
    assert np.all(vals == 0.0)


def test_pdf_vectorized_matches_scalar():
    xs = np.linspace(0, 16, 37)
    vec = dist.irwin_hall_pdf(16, xs)
    assert vec.shape == xs.shape
    assert np.allclose(vec, [dist.irwin_hall_pdf(16, float(x)) for x in xs], rtol=0, atol=0)


@pytest.mark.parametrize("n", [3, 4, 6])
def test_pdf_against_numerical_convolution(n):
    xs = np.linspace(0.2, n - 0.2, 23)
    assert np.allclose(dist.irwin_hall_pdf(n, xs), irwin_hall_pdf_convolution(n, xs), atol=1e-6)


@settings(max_examples=40, deadline=None)
@given(n=st.integers(min_value=2, max_value=96), frac=st.fractions(min_value=0, max_value=1, max_denominator=64))
def test_pdf_matches_exact_rationals(n, frac):
    x = frac * n
    exact = float(irwin_hall_pdf_sgn(n, x))
    got = dist.irwin_hall_pdf(n, float(x))
    assert got == pytest.approx(exact, rel=1e-12, abs=1e-300)


@settings(max_examples=30, deadline=None)
@given(n=st.integers(min_value=1, max_value=200), x=st.floats(min_value=0, max_value=1))
def test_pdf_symmetry(n, x):
    x = x * n
    assert dist.irwin_hall_pdf(n, x) == pytest.approx(dist.irwin_hall_pdf(n, n - x), rel=1e-12, abs=1e-300)


@pytest.mark.parametrize("n", [1, 2, 7, 16, 64])
def test_pdf_integrates_to_one(n):
    x = np.linspace(0, n, 200 * n + 1)
    f = dist.irwin_hall_pdf(n, x)
    h = x[1] - x[0]
    assert h * (f.sum() - 0.5 * (f[0] + f[-1])) == pytest.approx(1.0, abs=1e-4)


def test_cdf_derivative_is_pdf():
    x = np.linspace(0.5, 15.5, 31)
    h = 1e-5
    deriv = (dist.irwin_hall_cdf(16, x + h) - dist.irwin_hall_cdf(16, x - h)) / (2 * h)
    assert np.allclose(deriv, dist.irwin_hall_pdf(16, x), atol=1e-8)


def test_cdf_monotone():
    c = dist.irwin_hall_cdf(32, np.linspace(-1, 33, 2001))
    assert np.all(np.diff(c) >= -1e-15)
    assert c[0] == 0.0 and c[-1] == 1.0


def test_exact_pdf_oracle_agrees():
    assert dist.irwin_hall_pdf_exact(5, Fraction(7, 3)) == pytest.approx(float(irwin_hall_pdf_sgn(5, Fraction(7, 3))), rel=1e-15)


@pytest.mark.parametrize("n", [1, 2, 4, 8])
def test_global_pieces_reproduce_pdf(n):
    pw = dist.irwin_hall_pieces(n)
    assert pw.n_pieces == n and pw.degree == n - 1
    x = np.linspace(0, n, 301)
    f = dist.irwin_hall_pdf(n, x)
    assert np.max(np.abs(pw(x) - f)) <= 1e-10 * f.max()


@pytest.mark.parametrize("n", [2, 4, 8, 16, 32, 64])
def test_local_pieces_reproduce_pdf_relative(n):
    pw = dist.irwin_hall_pieces(n, basis="local")
    x = np.linspace(0, n, 40 * n + 1)[1:-1]
    assert np.max(np.abs(pw(x) / dist.irwin_hall_pdf(n, x) - 1)) < 1e-10


def test_global_coefficients_are_rounded_exact_expansion():
    # piece j of (n-1)! f on [j, j+1) is sum_k<=j (-1)^k C(n,k) (x-k)^(n-1)
    n, j = 6, 3
    exact = [Fraction(0)] * n
    for k in range(j + 1):
        for i in range(n):
            exact[i] += (-1) ** k * comb(n, k) * comb(n - 1, i) * Fraction(-k) ** (n - 1 - i)
    exact = [c / factorial(n - 1) for c in exact]
    assert dist.irwin_hall_pieces(n).pieces[j] == tuple(float(c) for c in exact)


@pytest.mark.xfail(strict=True, reason="monomial coefficients of degree 15 cancel catastrophically in floating point")
def test_global_pieces_order_16_centre_to_1e10():
    pw = dist.irwin_hall_pieces(16)
    assert pw(8.0) == pytest.approx(dist.irwin_hall_pdf(16, 8.0), rel=1e-10)


def test_triangle_global_pieces():
    pw = dist.irwin_hall_pieces(2)
    assert pw.pieces == ((0.0, 1.0), (2.0, -1.0))
    assert pw.support_bits == 1


def test_local_pieces_relative_accuracy_large_order():
    pw = dist.irwin_hall_pieces(64, basis="local")
    x = np.linspace(0.25, 63.75, 253)
    exact = np.array([float(irwin_hall_pdf_sgn(64, Fraction(v))) for v in x])
    assert np.max(np.abs(pw(x) / exact - 1)) < 1e-13


def test_non_dyadic_piece_count_has_no_support_bits():
    pw = dist.irwin_hall_pieces(3)
    assert not pw.is_dyadic
    with pytest.raises(ValueError):
        pw.support_bits


@pytest.mark.parametrize("bad", [0, -3, 2.5])
def test_invalid_order(bad):
    with pytest.raises(ValueError):
        dist.IrwinHallSpec(bad)


def test_order_above_cap():
    with pytest.raises(ValueError):
        dist.IrwinHallSpec(dist.MAX_ORDER + 1)


def test_spec_moments():
    s = dist.IrwinHallSpec(12)
    assert s.mean == 6.0 and s.std == 1.0


def test_standardized_pdf_is_rescaled():
    n = 16
    sv = dist.StandardizedVariable(n)
    z = np.linspace(-3, 3, 13)
    assert np.allclose(dist.standardized_pdf(n, z), dist.irwin_hall_pdf(n, sv.to_x(z)) / sv.scale, rtol=1e-14)
    assert sv.half_width == pytest.approx(np.sqrt(48))


@pytest.mark.parametrize("n", [4, 8, 16])
def test_characteristic_function_oracle(n):
    z = np.linspace(-2.5, 2.5, 11)
    assert np.allclose(dist.cf_oracle_pdf(n, z), dist.standardized_pdf(n, z), atol=1e-7)


def test_pdf_error_shrinks_like_one_over_n():
    z = np.linspace(-3, 3, 601)
    errs = [np.max(np.abs(dist.standardized_pdf(n, z) - dist.normal_pdf(z))) for n in (8, 16, 32, 64)]
    ratios = np.array(errs[:-1]) / np.array(errs[1:])
    assert np.all((ratios > 1.8) & (ratios < 2.2))


def test_normal_reference_values():
    assert dist.normal_pdf(0.0) == pytest.approx(0.3989422804014327, rel=1e-15)
    assert dist.normal_cdf(1.0) == pytest.approx(0.8413447460685429, rel=1e-15)
