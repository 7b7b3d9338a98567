"""Real open-boundary matrix product states.

Each tensor has legs ``(left bond, physical, right bond)``. Site ``i`` (0-based)
holds bit ``sigma_{i+1}`` of the big-endian basis index
``k = sum_i sigma_i 2**(N - i)``, so ``to_statevector`` returns amplitudes in
the usual integer order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "DENSE_CAP",
    "SVD_CUTOFF",
    "MPS",
    "TruncationReport",
    "svd",
    "product_state",
    "zero_state",
    "random_mps",
    "from_statevector",
    "canonicalize",
    "truncate",
    "compress",
    "normalize",
    "scale",
    "add",
    "overlap",
    "norm",
    "to_statevector",
    "amplitude",
    "schmidt_values",
    "entanglement_entropy",
    "sample",
    "to_json",
    "from_json",
]

DENSE_CAP = 24
SVD_CUTOFF = 1e-14
JSON_VERSION = 1


@dataclass(frozen=True, eq=False)
class MPS:
    """Immutable matrix product state.

    Attributes
    ----------
    tensors : tuple of ndarray
        Rank-3 real tensors with shape ``(chi_left, d, chi_right)``.
    form : {"none", "left", "right", "mixed"}
        Canonical form. ``"left"`` means every tensor but the last is a left
        isometry; ``"right"`` means every tensor but the first is a right
        isometry.
    center : int or None
        Orthogonality centre for ``"mixed"`` (also set for left/right).
    """

    tensors: tuple
    form: str = "none"
    center: int | None = None

    def __post_init__(self):
        ts = []
        for i, t in enumerate(self.tensors):
            a = np.array(t, dtype=float, copy=True)
            if a.ndim != 3:
                raise ValueError(f"tensor {i} must be rank 3, got shape {a.shape}")
            a.setflags(write=False)
            ts.append(a)
        if not ts:
            raise ValueError("an MPS needs at least one site")
        if ts[0].shape[0] != 1 or ts[-1].shape[2] != 1:
            raise ValueError("boundary bonds must have dimension 1")
        for i in range(len(ts) - 1):
            if ts[i].shape[2] != ts[i + 1].shape[0]:
                raise ValueError(f"bond mismatch between sites {i} and {i + 1}")
        if self.form not in ("none", "left", "right", "mixed"):
            raise ValueError(f"unknown canonical form {self.form!r}")
        object.__setattr__(self, "tensors", tuple(ts))
        if self.form == "left" and self.center is None:
            object.__setattr__(self, "center", len(ts) - 1)
        if self.form == "right" and self.center is None:
            object.__setattr__(self, "center", 0)

    @property
    def n_sites(self) -> int:
        return len(self.tensors)

    @property
    def phys_dim(self) -> int:
        return self.tensors[0].shape[1]

    @property
    def bond_dims(self) -> list[int]:
        """Interior bond dimensions, ``N - 1`` entries."""
        return [t.shape[2] for t in self.tensors[:-1]]

    @property
    def max_bond(self) -> int:
        return max(self.bond_dims, default=1)

    @property
    def canonical_form(self) -> str:
        return f"mixed:{self.center}" if self.form == "mixed" else self.form

    def __len__(self):
        return self.n_sites

    def __iter__(self):
        return iter(self.tensors)

    def __getitem__(self, i):
        return self.tensors[i]

    def __repr__(self):
        return f"MPS(n_sites={self.n_sites}, bonds={self.bond_dims}, form={self.canonical_form!r})"


@dataclass
class TruncationReport:
    """Outcome of an SVD truncation sweep.

    ``discarded[i]`` is the discarded weight at bond ``i`` (sum of squared
    discarded singular values of the normalized state), so ``1 - sum(discarded)``
    lower-bounds the fidelity with the input.
    """

    discarded: list[float] = field(default_factory=list)
    max_bond: int = 1
    bond_dims: list[int] = field(default_factory=list)

    @property
    def total_discarded(self) -> float:
        return float(sum(self.discarded))

    @property
    def fidelity_bound(self) -> float:
        return 1.0 - self.total_discarded

    def to_dict(self) -> dict:
        return {
            "discarded": [float(e) for e in self.discarded],
            "total_discarded": self.total_discarded,
            "fidelity_bound": self.fidelity_bound,
            "max_bond": int(self.max_bond),
            "bond_dims": [int(b) for b in self.bond_dims],
        }


def svd(m: np.ndarray):
    """Thin SVD with a fixed sign gauge.

    The largest-magnitude entry of every left singular vector is made positive
    (first occurrence on ties), with the matching right vector flipped too.
    """
    u, s, vt = np.linalg.svd(m, full_matrices=False)
    if u.size:
        pivot = np.argmax(np.abs(u), axis=0)
        signs = np.sign(u[pivot, np.arange(u.shape[1])])
        signs[signs == 0] = 1.0
        u = u * signs
        vt = vt * signs[:, None]
    return u, s, vt


def _check_finite(state: MPS):
    for i, t in enumerate(state.tensors):
        if not np.all(np.isfinite(t)):
            raise ValueError(f"tensor {i} contains NaN or Inf")


def _qr_pos(m: np.ndarray):
    q, r = np.linalg.qr(m)
    d = np.sign(np.diag(r))
    d[d == 0] = 1.0
    return q * d, r * d[:, None]


def product_state(vectors: Sequence[Sequence[float]] | Sequence[int]) -> MPS:
    """Product state from per-site vectors, or from a list of bits."""
    ts = []
    for v in vectors:
        if np.ndim(v) == 0:
            bit = int(v)
            v = [1.0, 0.0] if bit == 0 else [0.0, 1.0]
        ts.append(np.asarray(v, dtype=float).reshape(1, -1, 1))
    return MPS(tuple(ts))


def zero_state(n_sites: int) -> MPS:
    return product_state([0] * n_sites)


def random_mps(n_sites: int, chi: int, rng=None, d: int = 2) -> MPS:
    """Gaussian random MPS with bonds ``min(chi, d**i, d**(N-i))``."""
    rng = np.random.default_rng(rng)
    bonds = [1] + [min(chi, d ** i, d ** (n_sites - i)) for i in range(1, n_sites)] + [1]
    return MPS(tuple(rng.standard_normal((bonds[i], d, bonds[i + 1])) for i in range(n_sites)))


def _left_sweep(tensors: list, stop: int | None = None) -> list:
    """QR-sweep sites ``0..stop-1`` into left isometries (in place)."""
    n = len(tensors)
    stop = n - 1 if stop is None else stop
    for i in range(stop):
        a = tensors[i]
        q, r = _qr_pos(a.reshape(-1, a.shape[2]))
        tensors[i] = q.reshape(a.shape[0], a.shape[1], -1)
        tensors[i + 1] = np.tensordot(r, tensors[i + 1], axes=(1, 0))
    return tensors


def _right_sweep(tensors: list, stop: int = 0) -> list:
    """QR-sweep sites ``N-1..stop+1`` into right isometries (in place)."""
    for i in range(len(tensors) - 1, stop, -1):
        a = tensors[i]
        q, r = _qr_pos(a.reshape(a.shape[0], -1).T)
        tensors[i] = q.T.reshape(-1, a.shape[1], a.shape[2])
        tensors[i - 1] = np.tensordot(tensors[i - 1], r.T, axes=(2, 0))
    return tensors


def canonicalize(state: MPS, form: str = "left", center: int | None = None) -> MPS:
    """Bring ``state`` to left, right or mixed canonical form by QR sweeps.

    The norm ends up on the orthogonality centre (last site for ``"left"``,
    first for ``"right"``). Amplitudes are unchanged.
    """
    _check_finite(state)
    ts = [np.array(t) for t in state.tensors]
    n = len(ts)
    if form == "left":
        return MPS(tuple(_left_sweep(ts)), "left", n - 1)
    if form == "right":
        return MPS(tuple(_right_sweep(ts)), "right", 0)
    if form == "mixed":
        if center is None or not 0 <= center < n:
            raise ValueError("mixed form needs a centre site in range")
        _left_sweep(ts, center)
        _right_sweep(ts, center)
        return MPS(tuple(ts), "mixed", center)
    raise ValueError(f"unknown canonical form {form!r}")


def _svd_sweep(state: MPS, chi_max: int | None, cutoff: float, normalize: bool):
    """Left-canonicalize, then truncate right-to-left. Returns a right-canonical MPS."""
    ts = list(canonicalize(state, "left").tensors)
    total = float(np.sum(ts[-1] ** 2))
    discarded = [0.0] * (len(ts) - 1)
    for i in range(len(ts) - 1, 0, -1):
        a = ts[i]
        u, s, vt = svd(a.reshape(a.shape[0], -1))
        keep = int(np.sum(s > cutoff * s[0])) if s.size and s[0] > 0 else 1
        keep = max(1, keep)
        if chi_max is not None:
            keep = min(keep, chi_max)
        if total > 0:
            discarded[i - 1] = float(np.sum(s[keep:] ** 2) / total)
        ts[i] = vt[:keep].reshape(keep, a.shape[1], a.shape[2])
        ts[i - 1] = np.tensordot(ts[i - 1], u[:, :keep] * s[:keep], axes=(2, 0))
    if normalize:
        nrm = np.linalg.norm(ts[0])
        if nrm == 0:
            raise ValueError("cannot normalize the zero state")
        ts[0] = ts[0] / nrm
    out = MPS(tuple(ts), "right", 0)
    return out, TruncationReport(discarded, out.max_bond, out.bond_dims)


def truncate(state: MPS, chi_max: int, cutoff: float = SVD_CUTOFF) -> tuple[MPS, TruncationReport]:
    """Compress to bond dimension ``chi_max`` by one SVD sweep; output normalized.

    Singular values below ``cutoff * largest`` are always dropped.
    """
    if int(chi_max) != chi_max or chi_max < 1:
        raise ValueError("chi_max must be an integer >= 1")
    return _svd_sweep(state, int(chi_max), cutoff, normalize=True)


def compress(state: MPS, cutoff: float = SVD_CUTOFF) -> MPS:
    """Drop numerically-zero singular values without renormalizing."""
    return _svd_sweep(state, None, cutoff, normalize=False)[0]


def scale(state: MPS, factor: float) -> MPS:
    ts = list(state.tensors)
    c = state.center if state.center is not None else 0
    ts[c] = ts[c] * factor
    return MPS(tuple(ts), state.form, state.center)


def normalize(state: MPS) -> MPS:
    nrm = norm(state)
    if nrm == 0:
        raise ValueError("cannot normalize the zero state")
    return scale(state, 1.0 / nrm)


def add(a: MPS, b: MPS) -> MPS:
    """Direct sum of two MPS; interior bonds add up."""
    if a.n_sites != b.n_sites:
        raise ValueError(f"site counts differ: {a.n_sites} vs {b.n_sites}")
    if a.phys_dim != b.phys_dim:
        raise ValueError("physical dimensions differ")
    n = a.n_sites
    if n == 1:
        return MPS((a[0] + b[0],))
    ts = []
    for i, (x, y) in enumerate(zip(a, b)):
        if i == 0:
            ts.append(np.concatenate([x, y], axis=2))
        elif i == n - 1:
            ts.append(np.concatenate([x, y], axis=0))
        else:
            t = np.zeros((x.shape[0] + y.shape[0], x.shape[1], x.shape[2] + y.shape[2]))
            t[: x.shape[0], :, : x.shape[2]] = x
            t[x.shape[0]:, :, x.shape[2]:] = y
            ts.append(t)
    return MPS(tuple(ts))


def overlap(a: MPS, b: MPS) -> float:
    """``<a|b>`` by transfer-matrix contraction."""
    if a.n_sites != b.n_sites:
        raise ValueError(f"site counts differ: {a.n_sites} vs {b.n_sites}")
    env = np.ones((1, 1))
    for x, y in zip(a, b):
        env = np.einsum("ab,asc,bsd->cd", env, x, y, optimize=True)
    return float(env[0, 0])


def norm(state: MPS) -> float:
    if state.form in ("left", "right", "mixed"):
        return float(np.linalg.norm(state.tensors[state.center]))
    return float(np.sqrt(max(overlap(state, state), 0.0)))


def to_statevector(state: MPS, cap: int = DENSE_CAP) -> np.ndarray:
    """Dense amplitudes in big-endian order (site 0 is the most significant bit)."""
    if state.n_sites > cap:
        raise ValueError(f"{state.n_sites} sites exceeds the dense contraction cap of {cap}")
    v = np.ones((1, 1))
    for t in state:
        v = np.tensordot(v, t, axes=(1, 0)).reshape(-1, t.shape[2])
    return v.reshape(-1)


def amplitude(state: MPS, bits: Iterable[int]) -> float:
    """Single amplitude ``<bits|state>``."""
    v = np.ones(1)
    for t, s in zip(state, bits):
        v = v @ t[:, int(s), :]
    return float(v[0])


def schmidt_values(state: MPS, cut: int) -> np.ndarray:
    """Singular values across the bond between sites ``cut - 1`` and ``cut``."""
    if not 1 <= cut <= state.n_sites - 1:
        raise ValueError(f"cut must be in [1, {state.n_sites - 1}]")
    ts = [np.array(t) for t in state.tensors]
    _left_sweep(ts, cut)
    _right_sweep(ts, cut)
    centre = ts[cut]
    return np.linalg.svd(centre.reshape(centre.shape[0], -1), compute_uv=False)


def entanglement_entropy(state: MPS, cut: int) -> float:
    """Von Neumann entropy (natural log) of the first ``cut`` sites.

    Bounded by ``log(chi_cut)``.
    """
    nrm = norm(state)
    if abs(nrm - 1.0) > 1e-8:
        raise ValueError(f"state must be normalized (norm = {nrm!r})")
    lam2 = schmidt_values(state, cut) ** 2
    lam2 = lam2[lam2 > 0]
    return float(-np.sum(lam2 * np.log(lam2)))


def sample(state: MPS, shots: int, seed: int | None = None) -> np.ndarray:
    """Draw ``shots`` exact samples from ``|amplitude|**2``.

    Sequential conditional sampling on the right-canonical form: site ``i`` is
    drawn from its marginal given the bits already drawn. Returns an integer
    array of shape ``(shots, N)``. Same ``seed`` gives identical output.
    """
    if int(shots) != shots or shots <= 0:
        raise ValueError("shots must be a positive integer")
    shots = int(shots)
    rc = canonicalize(state, "right")
    nrm = np.linalg.norm(rc[0])
    if abs(nrm - 1.0) > 1e-8:
        raise ValueError(f"state must be normalized (norm = {nrm!r})")
    rng = np.random.default_rng(seed)
    out = np.empty((shots, rc.n_sites), dtype=np.int64)
    left = np.ones((shots, 1))
    for i, t in enumerate(rc):
        # branch[s, :, d] = left @ t[:, d, :]
        branch = np.einsum("sa,adb->sdb", left, t)
        probs = np.sum(branch ** 2, axis=2)
        probs /= probs.sum(axis=1, keepdims=True)
        r = rng.random(shots)
        bit = (r[:, None] >= np.cumsum(probs, axis=1)[:, :-1]).sum(axis=1)
        out[:, i] = bit
        chosen = branch[np.arange(shots), bit]
        left = chosen / np.linalg.norm(chosen, axis=1, keepdims=True)
    return out


def to_json(state: MPS) -> str:
    """Versioned JSON document; floats use shortest round-trip repr."""
    doc = {
        "version": JSON_VERSION,
        "n_sites": state.n_sites,
        "phys_dim": state.phys_dim,
        "canonical_form": state.canonical_form,
        "tensors": [[list(t.shape), t.reshape(-1).tolist()] for t in state],
    }
    return json.dumps(doc)


def from_json(text: str) -> MPS:
    doc = json.loads(text)
    if doc.get("version") != JSON_VERSION:
        raise ValueError(f"unsupported MPS document version {doc.get('version')!r}")
    tensors = tuple(np.asarray(vals, dtype=float).reshape(shape) for shape, vals in doc["tensors"])
    if len(tensors) != doc["n_sites"]:
        raise ValueError("n_sites does not match the number of tensors")
    form = doc.get("canonical_form", "none")
    center = None
    if form.startswith("mixed:"):
        form, center = "mixed", int(form.split(":", 1)[1])
    return MPS(tensors, form, center)


def from_statevector(
    vector: np.ndarray, chi_max: int | None = None, cutoff: float = SVD_CUTOFF
) -> tuple[MPS, TruncationReport]:
    """Successive-SVD decomposition of a dense ``2**N`` vector (left to right).

    Returns the (unnormalized) MPS and the discarded weights relative to the
    input norm.
    """
    v = np.asarray(vector, dtype=float).reshape(-1)
    n = int(round(np.log2(v.size)))
    if 2 ** n != v.size or n < 1:
        raise ValueError("vector length must be a power of two")
    total = float(v @ v)
    ts, discarded = [], []
    rest = v.reshape(1, -1)
    chi = 1
    for _ in range(n - 1):
        m = rest.reshape(chi * 2, -1)
        u, s, vt = svd(m)
        keep = max(1, int(np.sum(s > cutoff * s[0]))) if s.size and s[0] > 0 else 1
        if chi_max is not None:
            keep = min(keep, chi_max)
        discarded.append(float(np.sum(s[keep:] ** 2) / total) if total > 0 else 0.0)
        ts.append(u[:, :keep].reshape(chi, 2, keep))
        rest = s[:keep, None] * vt[:keep]
        chi = keep
    ts.append(rest.reshape(chi, 2, 1))
    out = MPS(tuple(ts), "left", n - 1)
    return out, TruncationReport(discarded, out.max_bond, out.bond_dims)
