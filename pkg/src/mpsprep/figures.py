"""Data series behind the convergence, discretization and depth figures.

Each ``figure_*`` function returns a list of :class:`Series`, one per CSV
file. Nothing is plotted here.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import circuit as C
from . import dist
from . import mps as M
from .encode import encode_irwin_hall
from .stats import DiscreteDistribution, ks_statistic, loglog_slope, pdf_cdf_distances

__all__ = [
    "Series",
    "FIGURES",
    "figure_2a",
    "figure_2b",
    "figure_3",
    "figure_4a",
    "figure_4b",
    "discretized_cdf_error",
    "ideal_normal_sigma",
    "prepared_distribution",
    "depth_sweep",
]

DEFAULT_ORDERS = (4, 8, 16, 32, 64, 128, 256)
CHUNK = 1 << 20


@dataclass
class Series:
    name: str
    columns: tuple
    rows: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for row in self.rows:
            w.writerow([format(v, ".17g") if isinstance(v, float) else v for v in row])
        return buf.getvalue()

    def write(self, directory: Path) -> Path:
        path = Path(directory) / f"{self.name}.csv"
        path.write_text(self.to_csv())
        return path

    def column(self, name: str) -> list:
        i = self.columns.index(name)
        return [r[i] for r in self.rows]


def _distance_series(name: str, ns: Sequence[int], keys: Sequence[str]) -> list[Series]:
    reports = [pdf_cdf_distances(n, scale="natural") for n in ns]
    data = Series(name, ("n",) + tuple(keys))
    data.rows = [(r.n,) + tuple(float(getattr(r, k)) for k in keys) for r in reports]
    fits = Series(f"{name}_fit", ("metric", "slope", "intercept", "r2", "n_points"))
    for k in keys:
        f = loglog_slope(list(ns), [getattr(r, k) for r in reports])
        fits.rows.append((k, f.slope, f.intercept, f.r2, f.n_points))
    return [data, fits]


def figure_2a(orders: Sequence[int] = DEFAULT_ORDERS) -> list[Series]:
    """pdf distance of ``X_n`` to its normal limit: max and average error."""
    return _distance_series("fig2a", orders, ("sup_pdf", "avg_pdf"))


def figure_2b(orders: Sequence[int] = DEFAULT_ORDERS) -> list[Series]:
    """cdf distance of ``X_n`` to its normal limit: max and average error."""
    return _distance_series("fig2b", orders, ("sup_cdf", "avg_cdf"))


def discretized_cdf_error(pdf, n_qubits: int, half_width: float, chunk: int = CHUNK) -> float:
    """``sup |F_disc - Phi|`` for probabilities proportional to ``pdf`` on a grid.

    The grid has ``2**n_qubits`` equally spaced points on
    ``[-half_width, half_width]``. Points are streamed in chunks, so memory
    stays bounded for large qubit counts.
    """
    size = 1 << n_qubits
    z_of = lambda lo, hi: -half_width + np.arange(lo, hi) * (2 * half_width / (size - 1))
    total = 0.0
    for lo in range(0, size, chunk):
        total += float(np.sum(pdf(z_of(lo, min(lo + chunk, size)))))
    running, worst = 0.0, 0.0
    for lo in range(0, size, chunk):
        z = z_of(lo, min(lo + chunk, size))
        c = running + np.cumsum(pdf(z)) / total
        before = np.concatenate([[running], c[:-1]])
        phi = dist.normal_cdf(z)
        worst = max(worst, float(np.max(np.abs(c - phi))), float(np.max(np.abs(before - phi))))
        running = float(c[-1])
    # beyond the last grid point the discrete cdf is 1
    return max(worst, float(1.0 - dist.normal_cdf(half_width)))


def figure_3(order: int = 16, qubits: Sequence[int] = tuple(range(2, 24)), half_width: float = 4 * np.sqrt(3)) -> list[Series]:
    """Discretized Irwin-Hall and discretized normal against the exact normal cdf."""
    s = Series("fig3", ("qubits", "irwin_hall", "normal"), meta={"order": order, "half_width": half_width})
    for nq in qubits:
        ih = discretized_cdf_error(lambda z: dist.standardized_pdf(order, z), nq, half_width)
        nm = discretized_cdf_error(dist.normal_pdf, nq, half_width)
        s.rows.append((int(nq), ih, nm))
    return [s]


def ideal_normal_sigma(order: int, amplitude_mode: str = "pdf") -> float:
    """Standard deviation of the normal law the measured state approximates.

    Amplitudes proportional to the pdf give probabilities proportional to its
    square, which narrows the width by ``sqrt(2)``.
    """
    var = order / 12.0
    return float(np.sqrt(var / 2.0 if amplitude_mode == "pdf" else var))


def prepared_distribution(vec: np.ndarray, grid) -> DiscreteDistribution:
    return DiscreteDistribution.from_amplitudes(grid.points(), vec)


def _normal_cdf(mu: float, sigma: float):
    return lambda x: dist.normal_cdf((np.asarray(x) - mu) / sigma)


def depth_sweep(order: int, n_qubits: int, depths: Sequence[int], amplitude_mode: str = "pdf") -> dict:
    """Infidelity and KS distance to the ideal normal for each depth.

    Returns a dict with ``depths``, ``infidelity``, ``ks`` and the floor
    ``ks_exact`` of the untruncated Irwin-Hall state.
    """
    depths = sorted(int(d) for d in depths)
    target, grid, _ = encode_irwin_hall(order, n_qubits, amplitude_mode=amplitude_mode)
    ref = _normal_cdf(order / 2.0, ideal_normal_sigma(order, amplitude_mode))
    exact = prepared_distribution(M.to_statevector(target), grid)
    res = C.extract_circuit(target, depths[-1])
    ks = []
    for d in depths:
        vec = C.simulate(C.Circuit(res.circuit.layers[:d], n_qubits))
        ks.append(ks_statistic(prepared_distribution(vec, grid), ref))
    return {
        "depths": depths,
        "infidelity": [float(res.infidelities[d - 1]) for d in depths],
        "ks": ks,
        "ks_exact": ks_statistic(exact, ref),
        "circuit": res.circuit,
    }


def figure_4a(orders: Sequence[int] = (8, 16), n_qubits: int = 14, depths: Sequence[int] = tuple(range(1, 17)),
              amplitude_mode: str = "pdf") -> list[Series]:
    """Infidelity and KS distance versus circuit depth."""
    data = Series("fig4a", ("order", "depth", "infidelity", "ks"), meta={"qubits": n_qubits})
    fits = Series("fig4a_fit", ("order", "slope", "intercept", "r2", "n_points"))
    for n in orders:
        sw = depth_sweep(n, n_qubits, depths, amplitude_mode)
        for d, inf, k in zip(sw["depths"], sw["infidelity"], sw["ks"]):
            data.rows.append((int(n), d, inf, k))
        sel = [(d, i) for d, i in zip(sw["depths"], sw["infidelity"]) if d >= 4]
        if len(sel) >= 3 and all(i > 0 for _, i in sel):
            f = loglog_slope([d for d, _ in sel], [i for _, i in sel])
            fits.rows.append((int(n), f.slope, f.intercept, f.r2, f.n_points))
    return [data, fits]


def figure_4b(orders: Sequence[int] = (8, 16, 32, 64), n_qubits: int = 14, depths: Sequence[int] = tuple(range(1, 11)),
              amplitude_mode: str = "pdf") -> list[Series]:
    """KS distance versus depth with the floor set by the Irwin-Hall law itself."""
    data = Series("fig4b", ("order", "depth", "ks", "ks_exact"), meta={"qubits": n_qubits})
    for n in orders:
        sw = depth_sweep(n, n_qubits, depths, amplitude_mode)
        for d, k in zip(sw["depths"], sw["ks"]):
            data.rows.append((int(n), d, k, sw["ks_exact"]))
    return [data]


FIGURES = {"2a": figure_2a, "2b": figure_2b, "3": figure_3, "4a": figure_4a, "4b": figure_4b}
