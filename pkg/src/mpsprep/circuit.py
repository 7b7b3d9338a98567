"""Staircase circuits for matrix product states.

A layer holds ``N - 1`` real orthogonal two-qubit gates and one single-qubit
head rotation. Gate ``j`` acts on qubits ``(j, j + 1)`` with qubit ``j`` the
more significant bit of its 4x4 matrix. A layer is applied as

    gates[N-2], gates[N-3], ..., gates[0], head (on qubit 0)

and prepares any bond-2 MPS from ``|0...0>`` exactly. A circuit
``[U_1, ..., U_D]`` implements ``U_1 U_2 ... U_D``, so ``U_D`` acts first.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import mps as M

__all__ = [
    "CircuitLayer",
    "Circuit",
    "complete_orthonormal",
    "layer_from_chi2",
    "apply_layer",
    "apply_layer_adjoint",
    "apply_two_site",
    "extract_circuit",
    "ExtractionResult",
    "statevector_apply_layer",
    "simulate",
]

ORTHO_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class CircuitLayer:
    gates: tuple
    head: np.ndarray

    def __post_init__(self):
        gates = tuple(np.array(g, dtype=float) for g in self.gates)
        head = np.array(self.head, dtype=float)
        for g in gates:
            if g.shape != (4, 4):
                raise ValueError("two-qubit gates must be 4x4")
        if head.shape != (2, 2):
            raise ValueError("head rotation must be 2x2")
        for g in gates + (head,):
            g.setflags(write=False)
        object.__setattr__(self, "gates", gates)
        object.__setattr__(self, "head", head)

    @property
    def n_qubits(self) -> int:
        return len(self.gates) + 1

    def is_orthogonal(self, tol: float = ORTHO_TOL) -> bool:
        mats = self.gates + (self.head,)
        return all(np.max(np.abs(g.T @ g - np.eye(len(g)))) <= tol for g in mats)

    @classmethod
    def identity(cls, n_qubits: int) -> "CircuitLayer":
        return cls(tuple(np.eye(4) for _ in range(n_qubits - 1)), np.eye(2))


@dataclass(frozen=True, eq=False)
class Circuit:
    layers: tuple
    n_qubits: int

    def __post_init__(self):
        layers = tuple(self.layers)
        for layer in layers:
            if layer.n_qubits != self.n_qubits:
                raise ValueError("all layers must act on the same number of qubits")
        object.__setattr__(self, "layers", layers)

    @property
    def depth(self) -> int:
        return len(self.layers)

    def to_dict(self) -> dict:
        return {
            "version": 1,
            "n_qubits": self.n_qubits,
            "layers": [
                {"gates": [g.reshape(-1).tolist() for g in layer.gates], "head": layer.head.reshape(-1).tolist()}
                for layer in self.layers
            ],
        }

    def to_json(self, permutation: Sequence[int] | None = None) -> str:
        d = self.to_dict()
        d["permutation"] = list(range(self.n_qubits)) if permutation is None else [int(p) for p in permutation]
        return json.dumps(d)

    @classmethod
    def from_dict(cls, d: dict) -> "Circuit":
        if d.get("version") != 1:
            raise ValueError(f"unsupported circuit document version {d.get('version')!r}")
        layers = tuple(
            CircuitLayer(
                tuple(np.asarray(g, dtype=float).reshape(4, 4) for g in layer["gates"]),
                np.asarray(layer["head"], dtype=float).reshape(2, 2),
            )
            for layer in d["layers"]
        )
        return cls(layers, int(d["n_qubits"]))

    @classmethod
    def from_json(cls, text: str) -> "Circuit":
        return cls.from_dict(json.loads(text))


def complete_orthonormal(columns: np.ndarray, dim: int | None = None) -> np.ndarray:
    """Extend orthonormal columns to a real orthogonal matrix.

    Candidates are the standard basis vectors in order, orthogonalized by
    modified Gram-Schmidt (twice, for stability); near-dependent candidates
    are skipped. Deterministic.
    """
    cols = np.asarray(columns, dtype=float)
    if cols.ndim == 1:
        cols = cols[:, None]
    dim = cols.shape[0] if dim is None else dim
    basis = [c for c in cols.T]
    for e in np.eye(dim):
        if len(basis) == dim:
            break
        v = e.copy()
        for _ in range(2):
            for b in basis:
                v -= (b @ v) * b
        nv = np.linalg.norm(v)
        if nv > 1e-6:
            basis.append(v / nv)
    return np.stack(basis, axis=1)


def layer_from_chi2(state: M.MPS) -> CircuitLayer:
    """Layer that maps ``|0...0>`` to ``state`` (bond dimension <= 2).

    The state is brought to left-canonical form. The tensor on site ``j + 1``
    read as ``(chi_j * 2) x chi_{j+1}`` has orthonormal columns; it becomes the
    columns of gate ``j`` indexed by inputs ``|0, alpha>`` and is completed to
    a 4x4 orthogonal matrix. The first site's ``2 x chi_1`` tensor is completed
    into the head rotation.
    """
    if state.max_bond > 2:
        raise ValueError(f"layer_from_chi2 needs bond dimension <= 2, got {state.max_bond}")
    nrm = M.norm(state)
    if abs(nrm - 1.0) > 1e-8:
        raise ValueError(f"state must be normalized (norm = {nrm!r})")
    lc = M.canonicalize(state, "left")
    n = lc.n_sites
    gates = []
    for j in range(n - 1):
        t = lc[j + 1]
        chi_l, _, chi_r = t.shape
        iso = np.zeros((2, 2, chi_r))
        iso[:chi_l] = t
        gates.append(complete_orthonormal(iso.reshape(4, chi_r)))
    first = lc[0][0]
    head = complete_orthonormal(first)
    return CircuitLayer(tuple(gates), head)


def apply_two_site(state_tensors: list, i: int, gate: np.ndarray, cutoff: float, absorb: str) -> None:
    """Apply a 4x4 gate on sites ``(i, i+1)`` in place and split by SVD.

    ``absorb="right"`` keeps site ``i`` a left isometry (sweeping left to
    right), ``"left"`` keeps site ``i+1`` a right isometry.
    """
    a, b = state_tensors[i], state_tensors[i + 1]
    theta = np.tensordot(a, b, axes=(2, 0))  # (l, s, t, r)
    g = gate.reshape(2, 2, 2, 2)
    theta = np.einsum("uvst,lstr->luvr", g, theta)
    chi_l, chi_r = theta.shape[0], theta.shape[3]
    u, s, vt = M.svd(theta.reshape(chi_l * 2, 2 * chi_r))
    keep = max(1, int(np.sum(s > cutoff * s[0]))) if s.size and s[0] > 0 else 1
    u, s, vt = u[:, :keep], s[:keep], vt[:keep]
    if absorb == "right":
        state_tensors[i] = u.reshape(chi_l, 2, keep)
        state_tensors[i + 1] = (s[:, None] * vt).reshape(keep, 2, chi_r)
    else:
        state_tensors[i] = (u * s).reshape(chi_l, 2, keep)
        state_tensors[i + 1] = vt.reshape(keep, 2, chi_r)


def _check_layer(state: M.MPS, layer: CircuitLayer):
    if layer.n_qubits != state.n_sites:
        raise ValueError(f"layer acts on {layer.n_qubits} qubits, state has {state.n_sites}")


def apply_layer(state: M.MPS, layer: CircuitLayer, cutoff: float = M.SVD_CUTOFF) -> M.MPS:
    """``layer |state>`` on the MPS; only numerically-zero singular values are dropped."""
    _check_layer(state, layer)
    ts = list(M.canonicalize(state, "left").tensors)
    n = len(ts)
    for j in range(n - 2, -1, -1):
        apply_two_site(ts, j, layer.gates[j], cutoff, absorb="left")
    ts[0] = np.einsum("us,lsr->lur", layer.head, ts[0])
    return M.MPS(tuple(ts), "right", 0)


def apply_layer_adjoint(state: M.MPS, layer: CircuitLayer, cutoff: float = M.SVD_CUTOFF) -> M.MPS:
    """``layer^T |state>``: the disentangling step."""
    _check_layer(state, layer)
    ts = list(M.canonicalize(state, "right").tensors)
    n = len(ts)
    ts[0] = np.einsum("su,lsr->lur", layer.head, ts[0])
    for j in range(n - 1):
        apply_two_site(ts, j, layer.gates[j].T, cutoff, absorb="right")
    return M.MPS(tuple(ts), "left", n - 1)


@dataclass
class ExtractionResult:
    circuit: Circuit
    infidelities: list[float] = field(default_factory=list)
    residual: M.MPS | None = None

    def __iter__(self):
        # allows ``circuit, infidelities = extract_circuit(...)``
        return iter((self.circuit, self.infidelities))


def extract_circuit(target: M.MPS, layers: int, cutoff: float = M.SVD_CUTOFF) -> ExtractionResult:
    """Iteratively build ``layers`` staircase layers approximating ``target``.

    Each round truncates the current residual to bond dimension 2, builds the
    layer preparing that truncation, and disentangles the residual with the
    layer's transpose. Infidelity after round ``i`` is
    ``1 - |<0...0|psi_i>|``, which equals ``1 - |<target|U_1...U_i|0>|``.
    """
    if int(layers) != layers or layers < 1:
        raise ValueError("layers must be an integer >= 1")
    psi = M.normalize(target)
    built, infid = [], []
    for _ in range(int(layers)):
        approx, _ = M.truncate(psi, 2)
        layer = layer_from_chi2(approx)
        psi = apply_layer_adjoint(psi, layer, cutoff)
        built.append(layer)
        infid.append(1.0 - abs(M.amplitude(psi, [0] * psi.n_sites)))
    return ExtractionResult(Circuit(tuple(built), target.n_sites), infid, psi)


def _apply_matrix(vec: np.ndarray, mat: np.ndarray, qubits: Sequence[int], n: int) -> np.ndarray:
    """Apply a ``2**m`` square matrix to the listed qubits of a dense state."""
    m = len(qubits)
    psi = vec.reshape((2,) * n)
    psi = np.moveaxis(psi, list(qubits), list(range(m)))
    shape = psi.shape
    psi = (mat @ psi.reshape(2 ** m, -1)).reshape(shape)
    return np.moveaxis(psi, list(range(m)), list(qubits)).reshape(-1)


def statevector_apply_layer(vec: np.ndarray, layer: CircuitLayer, adjoint: bool = False) -> np.ndarray:
    n = layer.n_qubits
    if adjoint:
        vec = _apply_matrix(vec, layer.head.T, [0], n)
        for j in range(n - 1):
            vec = _apply_matrix(vec, layer.gates[j].T, [j, j + 1], n)
        return vec
    for j in range(n - 2, -1, -1):
        vec = _apply_matrix(vec, layer.gates[j], [j, j + 1], n)
    return _apply_matrix(vec, layer.head, [0], n)


def simulate(circuit, backend: str = "statevector", cap: int = M.DENSE_CAP, cutoff: float = M.SVD_CUTOFF):
    """Noiselessly run ``circuit`` on ``|0...0>``.

    ``circuit`` is a :class:`Circuit` or a compiled circuit. The statevector
    backend returns a dense vector in logical big-endian order; the MPS
    backend returns an :class:`~mpsprep.mps.MPS` (real circuits only).
    """
    from .compile import CompiledCircuit, simulate_compiled

    n = circuit.n_qubits
    if backend == "statevector":
        if n > cap:
            raise ValueError(f"{n} qubits exceeds the statevector cap of {cap}")
        if isinstance(circuit, CompiledCircuit):
            return simulate_compiled(circuit)
        vec = np.zeros(2 ** n)
        vec[0] = 1.0
        for layer in reversed(circuit.layers):
            vec = statevector_apply_layer(vec, layer)
        return vec
    if backend == "mps":
        if isinstance(circuit, CompiledCircuit):
            raise ValueError("the MPS backend is real-valued; simulate compiled circuits with the statevector backend")
        state = M.zero_state(n)
        for layer in reversed(circuit.layers):
            state = apply_layer(state, layer, cutoff)
        return state
    raise ValueError(f"unknown backend {backend!r}")
