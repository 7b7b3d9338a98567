"""Compilation of staircase circuits to single-qubit rotations and CX gates.

Every real orthogonal 4x4 gate becomes exactly two CX gates plus single-qubit
``ry``/``rz`` rotations. Gates with determinant -1 are written as an SO(4)
gate times a SWAP; the SWAP is never emitted but folded into a relabeling of
logical onto physical qubits, reported as ``final_permutation``.

Conventions: inside a two-qubit matrix the first listed qubit is the more
significant bit. ``rz(t) = diag(exp(-it/2), exp(it/2))`` and
``ry(t) = [[cos t/2, -sin t/2], [sin t/2, cos t/2]]``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

__all__ = [
    "Op",
    "O4Compilation",
    "CompiledCircuit",
    "kron_factor",
    "zyz_decompose",
    "compile_o4",
    "compile_circuit",
    "simulate_compiled",
    "ops_unitary",
]

ORTHO_TOL = 1e-8

# Columns form the magic basis; conjugation by it maps SO(4) onto SU(2) x SU(2).
MAGIC = np.array(
    [[1, 1j, 0, 0], [0, 0, 1j, 1], [0, 0, 1j, -1], [1, -1j, 0, 0]], dtype=complex
) / np.sqrt(2)
SWAP = np.eye(4)[[0, 2, 1, 3]]
# CX with control on the less significant qubit of the pair.
CX_LOW = np.array([[1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0]], dtype=float)
CX_HIGH = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=float)


def kron_factor(m: np.ndarray, tol: float = 1e-9) -> tuple[np.ndarray, np.ndarray]:
    """Split a 4x4 matrix into ``a (x) b``; raises if it is not a product."""
    r = np.asarray(m, dtype=complex).reshape(2, 2, 2, 2).transpose(0, 2, 1, 3).reshape(4, 4)
    u, s, vh = np.linalg.svd(r)
    if s[1] > tol * max(s[0], 1.0):
        raise ValueError("matrix is not a tensor product of single-qubit operators")
    a = (u[:, 0] * np.sqrt(s[0])).reshape(2, 2)
    b = (vh[0] * np.sqrt(s[0])).reshape(2, 2)
    return a, b


# MAGIC = CX_LOW (MAGIC_A (x) MAGIC_B)
MAGIC_A, MAGIC_B = kron_factor(CX_LOW @ MAGIC)


def rz(theta: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])


def ry(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def _wrap(theta: float) -> float:
    """Map an angle onto (-pi, pi]."""
    t = float(np.mod(theta + np.pi, 2 * np.pi) - np.pi)
    return np.pi if t == -np.pi else t


def zyz_decompose(u: np.ndarray) -> tuple[float, float, float, float]:
    """Euler angles with ``u = exp(i phase) rz(beta) ry(gamma) rz(delta)``.

    Returns ``(beta, gamma, delta, phase)``; all angles lie in (-pi, pi].
    """
    u = np.asarray(u, dtype=complex)
    det = np.linalg.det(u)
    if abs(abs(det) - 1.0) > 1e-8:
        raise ValueError("single-qubit gate is not unitary")
    w = u / np.sqrt(det)
    a, b = w[0, 0], w[1, 0]
    gamma = 2.0 * np.arctan2(abs(b), abs(a))
    s_plus = -2.0 * np.angle(a) if abs(a) > 1e-14 else 0.0  # beta + delta
    s_minus = 2.0 * np.angle(b) if abs(b) > 1e-14 else 0.0  # beta - delta
    beta, delta = _wrap(0.5 * (s_plus + s_minus)), _wrap(0.5 * (s_plus - s_minus))
    gamma = _wrap(gamma)
    r = rz(beta) @ ry(gamma) @ rz(delta)
    phase = _wrap(np.angle(np.vdot(r, u)))
    return beta, gamma, delta, phase


@dataclass(frozen=True)
class Op:
    """A native operation: ``rz``/``ry`` with an angle, or ``cx`` (control, target)."""

    name: str
    qubits: tuple
    angle: float | None = None

    def __post_init__(self):
        if self.name in ("rz", "ry"):
            if len(self.qubits) != 1 or self.angle is None:
                raise ValueError(f"{self.name} needs one qubit and an angle")
        elif self.name == "cx":
            if len(self.qubits) != 2 or self.qubits[0] == self.qubits[1]:
                raise ValueError("cx needs two distinct qubits")
        else:
            raise ValueError(f"unknown operation {self.name!r}")

    def matrix(self) -> np.ndarray:
        if self.name == "rz":
            return rz(self.angle)
        if self.name == "ry":
            return ry(self.angle)
        return CX_HIGH.astype(complex)


@dataclass(frozen=True)
class O4Compilation:
    """Native form of one orthogonal gate on local qubits ``0`` and ``1``.

    ``gate = exp(i phase) * ops_unitary(ops) @ (SWAP if swap else I)``.
    """

    ops: tuple
    swap: bool
    phase: float


def _o4_parts(gate: np.ndarray):
    """Local layers ``(pre, mid, post)`` with ``G' = post CX_LOW mid CX_LOW pre``.

    Each layer is a pair of 2x2 matrices (more significant qubit first).
    ``G'`` is ``gate`` or ``gate @ SWAP`` when ``det(gate) = -1``.
    """
    g = np.asarray(gate, dtype=float)
    if g.shape != (4, 4):
        raise ValueError("gate must be 4x4")
    if not np.all(np.isfinite(g)):
        raise ValueError("gate contains NaN or Inf")
    err = np.max(np.abs(g.T @ g - np.eye(4)))
    if err > ORTHO_TOL:
        raise ValueError(f"gate is not orthogonal (max |G^T G - I| = {err:.3g})")
    det = np.linalg.det(g)
    if abs(abs(det) - 1.0) > ORTHO_TOL:
        raise ValueError(f"|det| = {abs(det)!r} differs from 1")
    swap = det < 0
    if swap:
        g = g @ SWAP
    # G' = MAGIC^dagger (a (x) b) MAGIC = L^dagger CX (a (x) b) CX L, L = MAGIC_A (x) MAGIC_B
    a, b = kron_factor(MAGIC @ g @ MAGIC.conj().T)
    pre = (MAGIC_A, MAGIC_B)
    post = (MAGIC_A.conj().T, MAGIC_B.conj().T)
    return swap, pre, (a, b), post


def _rotation_ops(u: np.ndarray, qubit: int) -> tuple[list, float]:
    beta, gamma, delta, phase = zyz_decompose(u)
    ops = [Op("rz", (qubit,), delta), Op("ry", (qubit,), gamma), Op("rz", (qubit,), beta)]
    return ops, phase


def ops_unitary(ops: Sequence[Op], n_qubits: int) -> np.ndarray:
    """Dense unitary of a sequence of ops (first op acts first)."""
    dim = 2 ** n_qubits
    u = np.eye(dim, dtype=complex)
    for op in ops:
        u = np.stack([_apply(u[:, c], op.matrix(), op.qubits, n_qubits) for c in range(dim)], axis=1)
    return u


def compile_o4(gate: np.ndarray) -> O4Compilation:
    """Two-CX native form of a real orthogonal 4x4 gate.

    The SWAP factor of a determinant -1 gate is reported through the flag
    and is not part of ``ops``.
    """
    swap, pre, mid, post = _o4_parts(gate)
    ops, phase = [], 0.0
    for layer in (pre, mid, post):
        for q in (0, 1):
            rot, ph = _rotation_ops(layer[q], q)
            ops.extend(rot)
            phase += ph
        if layer is not post:
            ops.append(Op("cx", (1, 0)))
    return O4Compilation(tuple(ops), bool(swap), _wrap(phase))


@dataclass(frozen=True, eq=False)
class CompiledCircuit:
    """Native-gate circuit on physical qubits.

    Logical qubit ``i`` ends on physical qubit ``final_permutation[i]``. The
    unitary of the source circuit equals ``exp(i global_phase)`` times the
    ops' unitary followed by that relabeling.
    """

    n_qubits: int
    ops: tuple
    final_permutation: tuple = field(default=())
    global_phase: float = 0.0

    def __post_init__(self):
        perm = tuple(int(p) for p in self.final_permutation) or tuple(range(self.n_qubits))
        if sorted(perm) != list(range(self.n_qubits)):
            raise ValueError("final_permutation must be a permutation of the qubits")
        object.__setattr__(self, "final_permutation", perm)
        object.__setattr__(self, "ops", tuple(self.ops))

    @property
    def cx_count(self) -> int:
        return sum(op.name == "cx" for op in self.ops)

    def counts(self) -> dict:
        out: dict = {}
        for op in self.ops:
            out[op.name] = out.get(op.name, 0) + 1
        return out

    def to_qasm(self) -> str:
        n = self.n_qubits
        lines = ["OPENQASM 2.0;", 'include "qelib1.inc";', f"qreg q[{n}];", f"creg c[{n}];"]
        for op in self.ops:
            if op.name == "cx":
                lines.append(f"cx q[{op.qubits[0]}],q[{op.qubits[1]}];")
            else:
                lines.append(f"{op.name}({format(op.angle, '.17g')}) q[{op.qubits[0]}];")
        for i, p in enumerate(self.final_permutation):
            lines.append(f"measure q[{p}] -> c[{i}];")
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {
            "n_qubits": self.n_qubits,
            "global_phase": self.global_phase,
            "final_permutation": list(self.final_permutation),
            "ops": [[op.name, list(op.qubits), op.angle] for op in self.ops],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def compile_circuit(circuit) -> CompiledCircuit:
    """Compile a staircase :class:`~mpsprep.circuit.Circuit`.

    Adjacent single-qubit factors on the same wire are multiplied together
    before being emitted as one ZYZ triple, and each two-qubit gate costs
    exactly two CX.
    """
    n = circuit.n_qubits
    pos = list(range(n))  # logical -> physical
    pending: dict = {}
    ops: list = []
    phase = 0.0

    def push(q, u):
        pending[q] = u @ pending.get(q, np.eye(2, dtype=complex))

    def flush(q):
        nonlocal phase
        u = pending.pop(q, None)
        if u is not None:
            rot, ph = _rotation_ops(u, q)
            ops.extend(rot)
            phase += ph

    for layer in reversed(circuit.layers):
        for j in range(n - 2, -1, -1):
            swap, pre, mid, post = _o4_parts(layer.gates[j])
            if swap:
                pos[j], pos[j + 1] = pos[j + 1], pos[j]
            hi, lo = pos[j], pos[j + 1]
            for local in (pre, mid):
                push(hi, local[0])
                push(lo, local[1])
                flush(hi)
                flush(lo)
                ops.append(Op("cx", (lo, hi)))
            push(hi, post[0])
            push(lo, post[1])
        push(pos[0], np.asarray(layer.head, dtype=complex))
    for q in sorted(pending):
        flush(q)
    return CompiledCircuit(n, tuple(ops), tuple(pos), _wrap(phase))


def _apply(vec: np.ndarray, mat: np.ndarray, qubits: Sequence[int], n: int) -> np.ndarray:
    m = len(qubits)
    psi = np.moveaxis(vec.reshape((2,) * n), list(qubits), list(range(m)))
    shape = psi.shape
    psi = (mat @ psi.reshape(2 ** m, -1)).reshape(shape)
    return np.moveaxis(psi, list(range(m)), list(qubits)).reshape(-1)


def simulate_compiled(compiled: CompiledCircuit) -> np.ndarray:
    """Run ``compiled`` on ``|0...0>``; complex amplitudes in logical order.

    The global phase is restored, so for a compiled real circuit the result
    matches the source circuit's statevector.
    """
    n = compiled.n_qubits
    vec = np.zeros(2 ** n, dtype=complex)
    vec[0] = 1.0
    for op in compiled.ops:
        vec = _apply(vec, op.matrix(), op.qubits, n)
    vec *= np.exp(1j * compiled.global_phase)
    psi = vec.reshape((2,) * n).transpose(compiled.final_permutation)
    return psi.reshape(-1)
