"""Exact MPS encodings of polynomials and dyadic piecewise polynomials.

A polynomial ``p(x) = sum_i a_i x**i`` on the grid ``x_k = a + k / h`` is an
MPS of bond dimension ``p + 1``. Writing ``x = t_1 + ... + t_N`` with
``t_1 = a + sigma_1 2**(N-1) / h`` and ``t_j = sigma_j 2**(N-j) / h``, the bond
after site ``j`` carries the shifted derivatives

    phi_s(T) = sum_{k >= s} a_k C(k, s) T**(k - s)

of the partial sum ``T``, and each site maps ``phi_alpha -> phi_beta`` with the
binomial weights ``C(alpha, beta) t**(alpha - beta)`` (``alpha >= beta``).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb, log2
from typing import Sequence

import numpy as np

from . import mps as M
from .dist import PiecewisePolynomial, irwin_hall_pdf, irwin_hall_pieces

__all__ = [
    "Grid",
    "EncodingRequest",
    "EncodingReport",
    "encode_polynomial",
    "restrict_to_region",
    "region_mps",
    "encode_piecewise",
    "encode_irwin_hall",
    "target_amplitudes",
]

AMPLITUDE_MODES = ("pdf", "sqrt_pdf")
SQRT_MODE_CAP = 20


@dataclass(frozen=True)
class Grid:
    """``2**N`` equally spaced points on ``[a, b]``, both ends included."""

    a: float
    b: float
    n_qubits: int

    def __post_init__(self):
        if not self.b > self.a:
            raise ValueError("grid needs b > a")
        if int(self.n_qubits) != self.n_qubits or self.n_qubits < 2:
            raise ValueError("grid needs at least 2 qubits")

    @property
    def size(self) -> int:
        return 2 ** self.n_qubits

    @property
    def h(self) -> float:
        """Inverse spacing, ``(2**N - 1) / (b - a)``."""
        return (self.size - 1) / (self.b - self.a)

    @property
    def spacing(self) -> float:
        return (self.b - self.a) / (self.size - 1)

    def x(self, k):
        """Grid point for index (or array of indices) ``k``."""
        return self.a + np.asarray(k, dtype=float) * self.spacing

    def points(self) -> np.ndarray:
        return self.x(np.arange(self.size))

    def index(self, bits) -> np.ndarray:
        """Big-endian integer index of bit rows (shape ``(..., N)``)."""
        bits = np.asarray(bits, dtype=np.int64)
        weights = 2 ** np.arange(self.n_qubits - 1, -1, -1, dtype=np.int64)
        return bits @ weights

    def site_weights(self) -> np.ndarray:
        """Contribution of bit ``sigma_i = 1`` to ``x``: ``2**(N - i) / h``."""
        return np.array([2.0 ** (self.n_qubits - 1 - i) for i in range(self.n_qubits)]) * self.spacing

    def to_dict(self) -> dict:
        return {"a": self.a, "b": self.b, "n_qubits": self.n_qubits}


@dataclass(frozen=True)
class EncodingRequest:
    function: PiecewisePolynomial
    grid: Grid
    amplitude_mode: str = "pdf"
    chi_max: int | None = None

    def __post_init__(self):
        if self.amplitude_mode not in AMPLITUDE_MODES:
            raise ValueError(f"amplitude_mode must be one of {AMPLITUDE_MODES}")
        f, g = self.function, self.grid
        if not f.is_dyadic:
            raise ValueError(f"{f.n_pieces} pieces is not a power of two")
        if f.support_bits > g.n_qubits:
            raise ValueError(f"{f.n_pieces} pieces need more than {g.n_qubits} qubits")
        if not (np.isclose(f.a, g.a) and np.isclose(f.b, g.b)):
            raise ValueError("piece layout must span the grid interval")
        if self.chi_max is not None and self.chi_max < 1:
            raise ValueError("chi_max must be >= 1")


@dataclass
class EncodingReport(M.TruncationReport):
    """Truncation report plus encoding diagnostics.

    ``raw_bond_dims`` are the bonds of the uncompressed sum over regions,
    ``scale`` the 2-norm before normalization and ``fidelity`` the squared
    overlap of the returned state with the untruncated one.
    """

    raw_bond_dims: list[int] = field(default_factory=list)
    exact_bond_dims: list[int] = field(default_factory=list)
    scale: float = 1.0
    fidelity: float = 1.0

    def to_dict(self) -> dict:
        d = super().to_dict()
        d.update(
            raw_bond_dims=[int(b) for b in self.raw_bond_dims],
            raw_max_bond=int(max(self.raw_bond_dims, default=1)),
            exact_bond_dims=[int(b) for b in self.exact_bond_dims],
            scale=float(self.scale),
            fidelity=float(self.fidelity),
        )
        return d


def _phi(coeffs: np.ndarray, t: float) -> np.ndarray:
    """Vector ``phi_s(t)`` for ``s = 0..p``."""
    p = len(coeffs) - 1
    return np.array([sum(coeffs[k] * comb(k, s) * t ** (k - s) for k in range(s, p + 1)) for s in range(p + 1)])


def _transfer(p: int, t: float) -> np.ndarray:
    m = np.zeros((p + 1, p + 1))
    for alpha in range(p + 1):
        for beta in range(alpha + 1):
            m[alpha, beta] = comb(alpha, beta) * t ** (alpha - beta)
    return m


def _polynomial_tensors(coeffs: Sequence[float], offset: float, weights: Sequence[float]) -> list:
    """Tensors whose contraction is ``p(offset + sum_j sigma_j w_j)``."""
    a = np.asarray(coeffs, dtype=float)
    p = len(a) - 1
    n = len(weights)
    if n == 1:
        vals = [np.polynomial.polynomial.polyval(offset + s * weights[0], a) for s in (0, 1)]
        return [np.array(vals).reshape(1, 2, 1)]
    ts = []
    first = np.stack([_phi(a, offset + s * weights[0]) for s in (0, 1)])
    ts.append(first.reshape(1, 2, p + 1))
    for w in weights[1:-1]:
        ts.append(np.stack([_transfer(p, 0.0), _transfer(p, w)], axis=1))
    last = np.stack([[w ** al for al in range(p + 1)] for w in (0.0, weights[-1])], axis=1)
    ts.append(last.reshape(p + 1, 2, 1))
    return ts


def encode_polynomial(coeffs: Sequence[float], grid: Grid) -> M.MPS:
    """MPS whose amplitudes are ``sum_i coeffs[i] * x_k**i`` (unnormalized)."""
    coeffs = list(coeffs)
    if not coeffs:
        raise ValueError("need at least one coefficient")
    p = len(coeffs) - 1
    if p + 1 > 2 ** (grid.n_qubits // 2):
        raise ValueError(
            f"degree {p} needs bond {p + 1}, more than the {2 ** (grid.n_qubits // 2)} "
            f"available mid-chain on {grid.n_qubits} qubits"
        )
    return M.MPS(tuple(_polynomial_tensors(coeffs, grid.a, grid.site_weights())))


def _region_bits(region: int, k: int) -> list[int]:
    return [(region >> (k - 1 - j)) & 1 for j in range(k)]


def restrict_to_region(state: M.MPS, region: int, support_bits: int) -> M.MPS:
    """Zero every amplitude whose top ``support_bits`` bits differ from ``region``.

    Done by clearing, on each of the first ``k`` sites, the physical slice that
    disagrees with the corresponding bit of ``region``.
    """
    k = int(support_bits)
    if not 0 <= k <= state.n_sites:
        raise ValueError(f"support_bits must be in [0, {state.n_sites}]")
    if not 0 <= region < 2 ** k:
        raise ValueError(f"region {region} out of range for {k} support bits")
    ts = [np.array(t) for t in state.tensors]
    for j, b in enumerate(_region_bits(region, k)):
        ts[j][:, 1 - b, :] = 0.0
    return M.MPS(tuple(ts))


def region_mps(function: PiecewisePolynomial, region: int, grid: Grid) -> M.MPS:
    """Piece ``region`` of ``function`` encoded on the whole grid, zero elsewhere.

    Equal to ``restrict_to_region(encode_polynomial(piece), region, k)``, but the
    ``k`` fixed leading sites are contracted first: they become one-hot
    bond-1 tensors, and the remaining sites encode the piece in powers of
    ``x - origin`` starting from the region's first grid point. This avoids
    expanding a high-degree polynomial far outside its own interval.
    """
    k = function.support_bits
    n = grid.n_qubits
    bits = _region_bits(region, k)
    ts = []
    for b in bits:
        t = np.zeros((1, 2, 1))
        t[0, b, 0] = 1.0
        ts.append(t)
    coeffs = function.pieces[region]
    start = grid.x(region * 2 ** (n - k)) - function.origin(region)
    if k == n:
        ts[-1] = ts[-1] * np.polynomial.polynomial.polyval(start, coeffs)
    else:
        ts.extend(_polynomial_tensors(coeffs, float(start), grid.site_weights()[k:]))
    return M.MPS(tuple(ts))


def _tree_sum(states: list, compress: bool) -> M.MPS:
    while len(states) > 1:
        nxt = []
        for i in range(0, len(states) - 1, 2):
            s = M.add(states[i], states[i + 1])
            nxt.append(M.compress(s) if compress else s)
        if len(states) % 2:
            nxt.append(states[-1])
        states = nxt
    return states[0]


def _raw_bonds(parts: list) -> list[int]:
    return [int(sum(b)) for b in zip(*(p.bond_dims for p in parts))]


def encode_piecewise(req: EncodingRequest, compress: bool = True) -> tuple[M.MPS, EncodingReport]:
    """Normalized MPS of a dyadic piecewise polynomial (or its square root).

    In ``"pdf"`` mode the amplitudes are proportional to ``f(x_k)``: each
    region is encoded, restricted to its own grid indices and the results are
    summed. With ``compress=True`` partial sums are recompressed (numerical
    zeros only), which keeps memory bounded for many high-degree pieces;
    ``compress=False`` returns the literal direct sum whose bonds are at most
    ``2**k (p + 1)``. ``"sqrt_pdf"`` evaluates ``sqrt(f(x_k))`` densely and
    decomposes it by SVD, so it is limited to ``N <= 20``.

    If ``chi_max`` is set the result is truncated and the report records the
    fidelity with the untruncated state.
    """
    f, grid = req.function, req.grid
    if req.amplitude_mode == "sqrt_pdf":
        if grid.n_qubits > SQRT_MODE_CAP:
            raise ValueError(f"sqrt_pdf mode is dense and limited to {SQRT_MODE_CAP} qubits")
        vals = f(grid.points())
        if np.any(vals < -1e-12 * np.max(np.abs(vals))):
            raise ValueError("sqrt_pdf mode needs a nonnegative function on the grid")
        state, _ = M.from_statevector(np.sqrt(np.clip(vals, 0.0, None)))
        raw = state.bond_dims
    else:
        parts = [region_mps(f, r, grid) for r in range(f.n_pieces)]
        raw = _raw_bonds(parts) if len(parts) > 1 else parts[0].bond_dims
        state = _tree_sum(parts, compress)
    nrm = M.norm(state)
    if nrm == 0:
        raise ValueError("function vanishes on every grid point")
    if compress:
        exact = M.normalize(M.compress(state))
    else:
        exact = M.normalize(state)
    report = EncodingReport(
        discarded=[0.0] * (grid.n_qubits - 1),
        max_bond=exact.max_bond,
        bond_dims=exact.bond_dims,
        raw_bond_dims=list(raw),
        exact_bond_dims=exact.bond_dims,
        scale=nrm,
    )
    if req.chi_max is None:
        return exact, report
    truncated, tr = M.truncate(exact, req.chi_max)
    report.discarded = tr.discarded
    report.max_bond = tr.max_bond
    report.bond_dims = tr.bond_dims
    report.fidelity = M.overlap(exact, truncated) ** 2
    return truncated, report


def encode_irwin_hall(
    n: int, n_qubits: int, chi_max: int | None = None, amplitude_mode: str = "pdf"
) -> tuple[M.MPS, Grid, EncodingReport]:
    """Normalized MPS of the order-``n`` Irwin-Hall pdf on ``[0, n]``.

    ``n`` must be a power of two so that the unit pieces are dyadic; the
    leading ``log2(n)`` qubits select the piece.
    """
    if int(n) != n or n < 2 or n & (n - 1):
        raise ValueError("order must be a power of two")
    k = int(log2(n))
    if k > n_qubits:
        raise ValueError(f"order {n} needs at least {k} qubits")
    grid = Grid(0.0, float(n), int(n_qubits))
    req = EncodingRequest(irwin_hall_pieces(n, basis="local"), grid, amplitude_mode, chi_max)
    state, report = encode_piecewise(req)
    return state, grid, report


def target_amplitudes(n: int, grid: Grid, amplitude_mode: str = "pdf") -> np.ndarray:
    """Dense normalized Irwin-Hall amplitudes evaluated pointwise (oracle)."""
    vals = irwin_hall_pdf(n, grid.points())
    if amplitude_mode == "sqrt_pdf":
        vals = np.sqrt(vals)
    return vals / np.linalg.norm(vals)
