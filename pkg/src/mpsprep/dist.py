"""Irwin-Hall, standardized Irwin-Hall and standard normal distributions.

The Irwin-Hall pdf of order ``n`` is a degree ``n - 1`` piecewise polynomial on
the unit intervals ``[j, j + 1)``. The naive alternating-sum formula cancels
catastrophically once ``n`` exceeds ~20, so every piece is instead expanded
exactly with integer arithmetic in the *local* variable ``u = x - j`` and only
then rounded to floats. Local coefficients are well conditioned on the left
half of the support; the right half is obtained through ``f(x) = f(n - x)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial, isfinite, pi, sqrt

import numpy as np
from scipy.special import ndtr

__all__ = [
    "MAX_ORDER",
    "IrwinHallSpec",
    "StandardizedVariable",
    "PiecewisePolynomial",
    "irwin_hall_pdf",
    "irwin_hall_pdf_exact",
    "irwin_hall_cdf",
    "irwin_hall_pieces",
    "standardized_pdf",
    "standardized_cdf",
    "cf_oracle_pdf",
    "normal_pdf",
    "normal_cdf",
]

MAX_ORDER = 1024

_INV_SQRT_2PI = 1.0 / sqrt(2.0 * pi)


@dataclass(frozen=True)
class IrwinHallSpec:
    """Order of an Irwin-Hall distribution (sum of ``n`` iid U(0, 1))."""

    n: int
    max_order: int = MAX_ORDER

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"Irwin-Hall order must be a positive integer, got {self.n!r}")
        if self.n > self.max_order:
            raise ValueError(f"Irwin-Hall order {self.n} exceeds the configured maximum {self.max_order}")

    @property
    def mean(self) -> float:
        return self.n / 2.0

    @property
    def std(self) -> float:
        return sqrt(self.n / 12.0)


@dataclass(frozen=True)
class StandardizedVariable:
    """Affine map ``x -> sqrt(12/n) (x - n/2)`` taking X_n to Z_n."""

    n: int

    @property
    def scale(self) -> float:
        return sqrt(12.0 / self.n)

    @property
    def half_width(self) -> float:
        """Z_n is supported on ``[-half_width, half_width]``."""
        return sqrt(3.0 * self.n)

    def to_z(self, x):
        return self.scale * (np.asarray(x, dtype=float) - self.n / 2.0)

    def to_x(self, z):
        return self.n / 2.0 + np.asarray(z, dtype=float) / self.scale


@dataclass(frozen=True)
class PiecewisePolynomial:
    """Polynomial pieces on equal sub-intervals of ``[a, b]``.

    Piece ``l`` covers ``[a + l w, a + (l + 1) w)`` with ``w = (b - a) / count``
    (the last piece is closed) and evaluates ``sum_i c[i] * (x - origin_l)**i``.
    With ``origins=None`` every origin is zero, i.e. the coefficients are in the
    monomial basis of the global variable ``x``.
    """

    a: float
    b: float
    pieces: tuple
    origins: tuple | None = None
    _coeffs: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.b > self.a:
            raise ValueError("interval must satisfy b > a")
        count = len(self.pieces)
        if count < 1:
            raise ValueError("at least one piece is required")
        if self.origins is not None and len(self.origins) != count:
            raise ValueError("origins must have one entry per piece")
        degree = max(len(c) for c in self.pieces) - 1
        coeffs = np.zeros((count, degree + 1))
        for row, c in zip(coeffs, self.pieces):
            row[: len(c)] = [float(v) for v in c]
        object.__setattr__(self, "pieces", tuple(tuple(float(v) for v in c) for c in self.pieces))
        if self.origins is not None:
            object.__setattr__(self, "origins", tuple(float(o) for o in self.origins))
        object.__setattr__(self, "_coeffs", coeffs)

    @property
    def n_pieces(self) -> int:
        return len(self.pieces)

    @property
    def is_dyadic(self) -> bool:
        return self.n_pieces & (self.n_pieces - 1) == 0

    @property
    def support_bits(self) -> int:
        """``k`` such that there are ``2**k`` pieces."""
        if not self.is_dyadic:
            raise ValueError(f"{self.n_pieces} pieces is not a power of two")
        return self.n_pieces.bit_length() - 1

    @property
    def degree(self) -> int:
        return self._coeffs.shape[1] - 1

    @property
    def width(self) -> float:
        return (self.b - self.a) / self.n_pieces

    def origin(self, piece: int) -> float:
        return 0.0 if self.origins is None else self.origins[piece]

    def piece_index(self, x):
        x = np.asarray(x, dtype=float)
        idx = np.floor((x - self.a) / self.width).astype(int)
        return np.clip(idx, 0, self.n_pieces - 1)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        idx = self.piece_index(x)
        origins = np.zeros(self.n_pieces) if self.origins is None else np.asarray(self.origins)
        u = x - origins[idx]
        out = np.zeros_like(u)
        for i in range(self.degree, -1, -1):
            out = out * u + self._coeffs[idx, i]
        return out


def _order(spec) -> int:
    if isinstance(spec, IrwinHallSpec):
        return spec.n
    return IrwinHallSpec(spec).n


@lru_cache(maxsize=64)
def _local_integer_pieces(n: int) -> tuple:
    """Integer coefficients of ``(n-1)! f_{X_n}(j + u)`` for pieces j < ceil(n/2).

    Successive pieces differ by ``(-1)^j C(n, j) (x - j)^(n-1)``; moving the
    local origin by one is a Taylor shift, done with suffix sums.
    """
    deg = n - 1
    c = np.zeros(n, dtype=object)
    c[:] = 0
    c[deg] = 1
    rows = [tuple(int(v) for v in c)]
    for j in range(1, (n + 1) // 2):
        for i in range(deg):
            c[i:] = np.cumsum(c[i:][::-1])[::-1]
        c[deg] += (-1) ** j * comb(n, j)
        rows.append(tuple(int(v) for v in c))
    return tuple(rows)


@lru_cache(maxsize=64)
def _left_half_tables(n: int):
    """Float pdf and cdf coefficient tables for the left half of the support."""
    rows = _local_integer_pieces(n)
    fact = factorial(n - 1)
    pdf = np.array([[v / fact for v in row] for row in rows])
    cdf = np.zeros((len(rows), n + 1))
    mass = Fraction(0)
    for j, row in enumerate(rows):
        cdf[j, 0] = float(mass)
        for i, v in enumerate(row):
            cdf[j, i + 1] = Fraction(v, (i + 1) * fact).__float__()
        mass += sum(Fraction(v, i + 1) for i, v in enumerate(row)) / fact
    return pdf, cdf


def _horner(table: np.ndarray, idx: np.ndarray, u: np.ndarray) -> np.ndarray:
    out = np.zeros_like(u)
    for i in range(table.shape[1] - 1, -1, -1):
        out = out * u + table[idx, i]
    return out


def _fold(n: int, x: np.ndarray):
    # n - x is exact in floating point for x in [n/2, n]
    right = x > n / 2.0
    folded = np.where(right, n - x, x)
    folded = np.clip(folded, 0.0, None)
    idx = np.minimum(np.floor(folded).astype(int), (n + 1) // 2 - 1)
    return right, idx, folded - idx


def irwin_hall_pdf(spec, x):
    """Density of the Irwin-Hall distribution; zero outside ``[0, n]``.

    Accepts scalars or arrays; returns a float for scalar input.
    """
    n = _order(spec)
    xa = np.asarray(x, dtype=float)
    pdf, _ = _left_half_tables(n)
    _, idx, u = _fold(n, xa)
    out = _horner(pdf, idx, u)
    out = np.where((xa < 0) | (xa > n), 0.0, out)
    return float(out) if out.ndim == 0 else out


def irwin_hall_cdf(spec, x):
    """Distribution function from exact per-piece antiderivatives."""
    n = _order(spec)
    xa = np.asarray(x, dtype=float)
    _, cdf = _left_half_tables(n)
    right, idx, u = _fold(n, xa)
    val = _horner(cdf, idx, u)
    out = np.where(right, 1.0 - val, val)
    out = np.where(xa <= 0, 0.0, np.where(xa >= n, 1.0, out))
    return float(out) if out.ndim == 0 else out


def irwin_hall_pdf_exact(n: int, x) -> float:
    """Reference evaluation of the alternating sign-sum formula in exact rationals.

    ``x`` is converted exactly to a rational, so the only rounding is the final
    conversion to float. Slow; meant as an oracle.
    """
    n = _order(n)
    xq = Fraction(x)
    total = Fraction(0)
    for k in range(n + 1):
        d = xq - k
        sign = (d > 0) - (d < 0)
        if sign:
            total += (-1) ** k * comb(n, k) * d ** (n - 1) * sign
    return float(total / (2 * factorial(n - 1)))


def _global_piece(n: int, j: int) -> list[Fraction]:
    """Exact global-monomial coefficients of f_{X_n} on ``[j, j+1)``."""
    coeffs = [Fraction(0)] * n
    for k in range(j + 1):
        w = (-1) ** k * comb(n, k)
        # (x - k)^(n-1) = sum_i C(n-1, i) x^i (-k)^(n-1-i)
        for i in range(n):
            coeffs[i] += w * comb(n - 1, i) * (-k) ** (n - 1 - i)
    fact = factorial(n - 1)
    return [c / fact for c in coeffs]


def irwin_hall_pieces(spec, basis: str = "global") -> PiecewisePolynomial:
    """Irwin-Hall pdf as ``n`` polynomial pieces on ``[0, n]``.

    Parameters
    ----------
    spec : IrwinHallSpec or int
    basis : {"global", "local"}
        ``"global"`` gives coefficients in powers of ``x``, exact rationals
        rounded once. They lose roughly ``log10(n**(n-1) / (n-1)!)`` digits when
        evaluated, so they are only practical for small ``n``. ``"local"``
        expands each piece about its endpoint nearer the support boundary (``j``
        on the left half, ``j + 1`` on the right) and stays accurate to a few
        ulps, relative, for every supported order.
    """
    n = _order(spec)
    if basis == "global":
        return PiecewisePolynomial(0.0, float(n), tuple(tuple(_global_piece(n, j)) for j in range(n)))
    if basis != "local":
        raise ValueError(f"unknown basis {basis!r}")
    rows = _local_integer_pieces(n)
    fact = factorial(n - 1)
    pieces, origins = [], []
    for j in range(n):
        if j < len(rows):
            pieces.append([Fraction(v, fact) for v in rows[j]])
            origins.append(j)
        else:
            # right half anchored at the piece's right end: f(j + 1 + v) = g(-v)
            src = rows[n - 1 - j]
            pieces.append([Fraction(v * (-1) ** i, fact) for i, v in enumerate(src)])
            origins.append(j + 1)
    return PiecewisePolynomial(0.0, float(n), tuple(tuple(p) for p in pieces), origins=tuple(origins))


def standardized_pdf(n: int, z):
    """Density of ``Z_n = sqrt(12/n) (X_n - n/2)``."""
    s = sqrt(n / 12.0)
    return s * irwin_hall_pdf(n, n / 2.0 + np.asarray(z, dtype=float) * s)


def standardized_cdf(n: int, z):
    s = sqrt(n / 12.0)
    return irwin_hall_cdf(n, n / 2.0 + np.asarray(z, dtype=float) * s)


def cf_oracle_pdf(n: int, z, t_max: float = 200.0, steps: int = 200_000):
    """Density of Z_n by inverting its characteristic function.

    Integrates ``(1/pi) int_0^t_max cos(t z) (sin(c t) / (c t))**n dt`` with
    ``c = sqrt(3/n)`` using composite Simpson. Independent of the piecewise
    polynomial route, so it serves as its cross-check.
    """
    if not (isfinite(t_max) and t_max > 0):
        raise ValueError("t_max must be positive")
    if int(steps) != steps or steps < 100:
        raise ValueError("steps must be an integer >= 100")
    steps = int(steps) + (int(steps) % 2)
    t = np.linspace(0.0, t_max, steps + 1)
    c = sqrt(3.0 / n)
    # np.sinc(y) = sin(pi y) / (pi y)
    char = np.sinc(c * t / pi) ** n
    w = np.ones(steps + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    w *= (t_max / steps) / 3.0
    za = np.asarray(z, dtype=float)
    vals = np.cos(np.multiply.outer(za, t)) @ (w * char) / pi
    return float(vals) if np.ndim(vals) == 0 else vals


def normal_pdf(z):
    z = np.asarray(z, dtype=float)
    out = _INV_SQRT_2PI * np.exp(-0.5 * z * z)
    return float(out) if out.ndim == 0 else out


def normal_cdf(z):
    out = ndtr(np.asarray(z, dtype=float))
    return float(out) if np.ndim(out) == 0 else out
