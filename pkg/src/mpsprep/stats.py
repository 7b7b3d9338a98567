"""Distances between distributions, KS statistics and log-log fits."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields
from typing import Callable, Sequence

import numpy as np

from . import dist

__all__ = [
    "DiscreteDistribution",
    "DistanceReport",
    "FitResult",
    "ecdf",
    "ks_statistic",
    "ks_threshold",
    "pdf_cdf_distances",
    "loglog_slope",
]

PROB_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class DiscreteDistribution:
    """Probabilities ``p`` on ascending support points ``x``."""

    x: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        x = np.array(self.x, dtype=float).reshape(-1)
        p = np.array(self.p, dtype=float).reshape(-1)
        if x.size == 0:
            raise ValueError("empty distribution")
        if x.shape != p.shape:
            raise ValueError("x and p must have the same length")
        if np.any(np.diff(x) <= 0):
            raise ValueError("support points must be strictly ascending")
        if np.any(p < 0):
            raise ValueError("probabilities must be nonnegative")
        if abs(p.sum() - 1.0) > PROB_TOL:
            raise ValueError(f"probabilities sum to {p.sum()!r}, not 1")
        x.setflags(write=False)
        p.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "p", p)

    @classmethod
    def from_weights(cls, x, weights) -> "DiscreteDistribution":
        """Normalize nonnegative weights into a distribution."""
        w = np.asarray(weights, dtype=float)
        total = w.sum()
        if not total > 0:
            raise ValueError("weights must have a positive sum")
        return cls(x, w / total)

    @classmethod
    def from_amplitudes(cls, x, amplitudes) -> "DiscreteDistribution":
        """Born-rule distribution of a state vector with values ``x`` per basis state."""
        return cls.from_weights(x, np.abs(np.asarray(amplitudes)) ** 2)

    def cdf(self, t=None):
        """Cumulative probabilities at the support, or the step cdf at ``t``."""
        c = np.cumsum(self.p)
        if t is None:
            return c
        idx = np.searchsorted(self.x, np.asarray(t, dtype=float), side="right")
        return np.where(idx > 0, c[np.maximum(idx - 1, 0)], 0.0)

    @property
    def mean(self) -> float:
        return float(self.p @ self.x)

    @property
    def std(self) -> float:
        return float(np.sqrt(max(self.p @ (self.x - self.mean) ** 2, 0.0)))


def ecdf(samples: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
    """Distinct sorted sample values and the empirical cdf just after each."""
    s = np.sort(np.asarray(samples, dtype=float).reshape(-1))
    if s.size == 0:
        raise ValueError("empty sample")
    vals, counts = np.unique(s, return_counts=True)
    return vals, np.cumsum(counts) / s.size


def ks_statistic(data, target: Callable | DiscreteDistribution) -> float:
    """Kolmogorov-Smirnov distance ``sup_x |F_data(x) - F_target(x)|``.

    ``data`` is a 1-d array of samples or a :class:`DiscreteDistribution`.
    For a continuous ``target`` (a cdf callable) the step cdf of ``data`` is
    compared on both sides of every jump. For a discrete ``target`` both step
    functions are compared on the union of their support points, which gives
    the exact supremum.
    """
    if isinstance(data, DiscreteDistribution):
        x, c = data.x, data.cdf()
    else:
        x, c = ecdf(data)
    if isinstance(target, DiscreteDistribution):
        pts = np.union1d(x, target.x)
        idx = np.searchsorted(x, pts, side="right")
        f_data = np.where(idx > 0, c[np.maximum(idx - 1, 0)], 0.0)
        return float(np.max(np.abs(f_data - target.cdf(pts))))
    f = np.asarray(target(x), dtype=float)
    before = np.concatenate([[0.0], c[:-1]])
    return float(max(np.max(np.abs(c - f)), np.max(np.abs(before - f))))


def ks_threshold(alpha: float, s: int) -> float:
    """KS acceptance threshold ``sqrt(ln(2 / alpha) / s)``."""
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    if int(s) != s or s < 1:
        raise ValueError("sample count must be an integer >= 1")
    return float(np.sqrt(np.log(2.0 / alpha) / s))


@dataclass(frozen=True)
class DistanceReport:
    """Distances between an Irwin-Hall law and its normal limit.

    ``l1_*`` are trapezoid integrals of the absolute error over the grid and
    ``avg_*`` the same divided by the interval length. ``ks`` is the sup
    distance of the cdfs, which does not depend on the scale.
    """

    n: int
    scale: str
    n_points: int
    spacing: float
    sup_pdf: float
    l1_pdf: float
    avg_pdf: float
    sup_cdf: float
    l1_cdf: float
    avg_cdf: float
    ks: float

    @staticmethod
    def csv_header() -> str:
        return ",".join(f.name for f in fields(DistanceReport))

    def to_csv_row(self) -> str:
        return ",".join(_fmt(v) for v in asdict(self).values())

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _fmt(v) -> str:
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def _trapezoid(y: np.ndarray, h: float) -> float:
    return float(h * (y.sum() - 0.5 * (y[0] + y[-1])))


def pdf_cdf_distances(n: int, scale: str = "standardized", points_per_unit: int = 50) -> DistanceReport:
    """Compare the order-``n`` Irwin-Hall law with its normal limit.

    The standardized grid covers ``[-sqrt(3n), sqrt(3n)]`` with spacing
    ``sqrt(3) / (points_per_unit sqrt(n))``. With ``scale="natural"`` the same
    points are mapped to ``x = n/2 + z sqrt(n/12)`` and the pdfs of ``X_n`` and
    of ``N(n/2, n/12)`` are compared there instead.
    """
    if int(n) != n or n < 1:
        raise ValueError("n must be an integer >= 1")
    if scale not in ("standardized", "natural"):
        raise ValueError(f"unknown scale {scale!r}")
    n = int(n)
    m = 2 * points_per_unit * n  # intervals
    z = np.linspace(-np.sqrt(3 * n), np.sqrt(3 * n), m + 1)
    hz = 2 * np.sqrt(3 * n) / m
    epdf = np.abs(dist.standardized_pdf(n, z) - dist.normal_pdf(z))
    ecdf_ = np.abs(dist.standardized_cdf(n, z) - dist.normal_cdf(z))
    if scale == "natural":
        s = np.sqrt(n / 12.0)
        epdf, h = epdf / s, hz * s
    else:
        h = hz
    length = h * m
    l1p, l1c = _trapezoid(epdf, h), _trapezoid(ecdf_, h)
    sup_c = float(ecdf_.max())
    return DistanceReport(
        n=n,
        scale=scale,
        n_points=m + 1,
        spacing=float(h),
        sup_pdf=float(epdf.max()),
        l1_pdf=l1p,
        avg_pdf=l1p / length,
        sup_cdf=sup_c,
        l1_cdf=l1c,
        avg_cdf=l1c / length,
        ks=sup_c,
    )


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    r2: float
    n_points: int

    @staticmethod
    def csv_header() -> str:
        return "slope,intercept,r2,n_points"

    def to_csv_row(self) -> str:
        return ",".join(_fmt(v) for v in asdict(self).values())

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def loglog_slope(xs: Sequence[float], ys: Sequence[float]) -> FitResult:
    """Least-squares line through ``(log x, log y)``."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("xs and ys must be 1-d of equal length")
    if x.size < 3:
        raise ValueError("at least 3 points are needed")
    if np.any(~(x > 0)) or np.any(~(y > 0)):
        raise ValueError("log-log fit needs positive data")
    lx, ly = np.log(x), np.log(y)
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - float(resid @ resid) / ss_tot if ss_tot > 0 else 1.0
    return FitResult(float(slope), float(intercept), r2, int(x.size))
