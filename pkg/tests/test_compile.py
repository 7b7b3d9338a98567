import re

import numpy as np
import pytest
from scipy.stats import ortho_group, unitary_group

from mpsprep import circuit as C
from mpsprep.compile import (
    SWAP,
    CompiledCircuit,
    Op,
    compile_circuit,
    compile_o4,
    ops_unitary,
    simulate_compiled,
    zyz_decompose,
)
from mpsprep.encode import encode_irwin_hall
from oracles import kron_gate, kron_single


def reconstruct(comp):
    u = np.exp(1j * comp.phase) * ops_unitary(comp.ops, 2)
    return u @ SWAP if comp.swap else u


def random_circuit(n, d, rng):
    layers = []
    for _ in range(d):
        gates = tuple(ortho_group.rvs(4, random_state=rng) for _ in range(n - 1))
        layers.append(C.CircuitLayer(gates, ortho_group.rvs(2, random_state=rng)))
    return C.Circuit(tuple(layers), n)


def source_unitary(circ):
    n = circ.n_qubits
    u = np.eye(2 ** n)
    for layer in circ.layers:
        lu = kron_single(layer.head, 0, n)
        for j in range(n - 1):
            lu = lu @ kron_gate(layer.gates[j], j, n)
        u = u @ lu
    return u


def logical_unitary(comp):
    n = comp.n_qubits
    u = np.exp(1j * comp.global_phase) * ops_unitary(comp.ops, n)
    cols = u.T.reshape((-1,) + (2,) * n)
    cols = cols.transpose((0,) + tuple(p + 1 for p in comp.final_permutation))
    return cols.reshape(2 ** n, 2 ** n).T


def test_random_special_orthogonal_reconstruction(rng):
    worst = 0.0
    for _ in range(100):
        q, _ = np.linalg.qr(rng.normal(size=(4, 4)))
        if np.linalg.det(q) < 0:
            q[:, 0] *= -1
        comp = compile_o4(q)
        assert not comp.swap
        assert sum(op.name == "cx" for op in comp.ops) == 2
        worst = max(worst, np.linalg.norm(reconstruct(comp) - q, 2))
    assert worst <= 1e-9


def test_reflections_use_swap(rng):
    for _ in range(30):
        q = ortho_group.rvs(4, random_state=rng)
        if np.linalg.det(q) > 0:
            q = q @ SWAP
        comp = compile_o4(q)
        assert comp.swap
        assert np.linalg.norm(reconstruct(comp) - q, 2) <= 1e-9


def test_identity():
    comp = compile_o4(np.eye(4))
    assert sum(op.name == "cx" for op in comp.ops) == 2
    assert np.linalg.norm(reconstruct(comp) - np.eye(4), 2) <= 1e-10


def test_swap_gate():
    comp = compile_o4(SWAP)
    assert comp.swap
    residual = np.exp(1j * comp.phase) * ops_unitary(comp.ops, 2)
    assert np.allclose(residual, np.eye(4), atol=1e-10)


def test_decomposition_is_deterministic(rng):
    q = ortho_group.rvs(4, random_state=rng)
    assert compile_o4(q) == compile_o4(q)


def test_rejects_non_orthogonal(rng):
    with pytest.raises(ValueError):
        compile_o4(rng.normal(size=(4, 4)))
    with pytest.raises(ValueError):
        compile_o4(1.1 * np.eye(4))
    with pytest.raises(ValueError):
        compile_o4(np.eye(3))


def test_zyz_round_trip(rng):
    for _ in range(50):
        u = unitary_group.rvs(2, random_state=rng)
        beta, gamma, delta, phase = zyz_decompose(u)
        for a in (beta, gamma, delta, phase):
            assert -np.pi < a <= np.pi
        ops = [Op("rz", (0,), delta), Op("ry", (0,), gamma), Op("rz", (0,), beta)]
        assert np.allclose(np.exp(1j * phase) * ops_unitary(ops, 1), u, atol=1e-12)


def test_zyz_diagonal_and_antidiagonal():
    for u in (np.diag([1j, -1j]), np.array([[0, 1], [1, 0]], dtype=complex), np.eye(2)):
        beta, gamma, delta, phase = zyz_decompose(u)
        ops = [Op("rz", (0,), delta), Op("ry", (0,), gamma), Op("rz", (0,), beta)]
        assert np.allclose(np.exp(1j * phase) * ops_unitary(ops, 1), u, atol=1e-12)


@pytest.mark.parametrize("n,d", [(2, 1), (3, 2), (5, 2), (6, 3)])
def test_whole_circuit_unitary(n, d, rng):
    circ = random_circuit(n, d, rng)
    comp = compile_circuit(circ)
    assert np.linalg.norm(logical_unitary(comp) - source_unitary(circ), 2) <= 1e-9


@pytest.mark.parametrize("n,d", [(8, 2), (8, 3)])
def test_compiled_simulation_matches_source(n, d, rng):
    circ = random_circuit(n, d, rng)
    comp = compile_circuit(circ)
    assert np.max(np.abs(simulate_compiled(comp) - C.simulate(circ))) <= n * d * 1e-8
    assert np.allclose(C.simulate(comp), C.simulate(circ), atol=1e-10)


def test_mps_backend_rejects_compiled(rng):
    comp = compile_circuit(random_circuit(3, 1, rng))
    with pytest.raises(ValueError):
        C.simulate(comp, backend="mps")


@pytest.mark.parametrize("n", [10, 15, 20])
@pytest.mark.parametrize("d", [1, 2, 3])
def test_cx_count(n, d):
    circ = C.Circuit(tuple(C.CircuitLayer.identity(n) for _ in range(d)), n)
    assert compile_circuit(circ).cx_count == 2 * (n - 1) * d


def test_empty_circuit():
    comp = compile_circuit(C.Circuit((), 5))
    assert comp.cx_count == 0 and comp.final_permutation == (0, 1, 2, 3, 4)


def test_invalid_permutation():
    with pytest.raises(ValueError):
        CompiledCircuit(3, (), (0, 0, 1))


def test_invalid_ops():
    with pytest.raises(ValueError):
        Op("cx", (1, 1))
    with pytest.raises(ValueError):
        Op("rx", (0,), 0.1)


def _run_qasm(text):
    """Minimal OpenQASM 2.0 interpreter for the emitted subset."""
    n = int(re.search(r"qreg q\[(\d+)\];", text).group(1))
    vec = np.zeros(2 ** n, dtype=complex)
    vec[0] = 1.0
    meas = {}
    for line in text.splitlines():
        if m := re.fullmatch(r"(rz|ry)\(([^)]+)\) q\[(\d+)\];", line):
            t = float(m.group(2))
            if m.group(1) == "rz":
                g = np.diag([np.exp(-0.5j * t), np.exp(0.5j * t)])
            else:
                g = np.array([[np.cos(t / 2), -np.sin(t / 2)], [np.sin(t / 2), np.cos(t / 2)]])
            vec = kron_single(g, int(m.group(3)), n) @ vec
        elif m := re.fullmatch(r"cx q\[(\d+)\],q\[(\d+)\];", line):
            c, t = int(m.group(1)), int(m.group(2))
            idx = np.arange(2 ** n)
            flip = ((idx >> (n - 1 - c)) & 1).astype(bool)
            new = vec.copy()
            new[idx[flip]] = vec[idx[flip] ^ (1 << (n - 1 - t))]
            vec = new
        elif m := re.fullmatch(r"measure q\[(\d+)\] -> c\[(\d+)\];", line):
            meas[int(m.group(2))] = int(m.group(1))
    probs = np.abs(vec.reshape((2,) * n)) ** 2
    return probs.transpose([meas[i] for i in range(n)]).reshape(-1)


def test_qasm_export_reproduces_distribution():
    target, _, _ = encode_irwin_hall(8, 6)
    circ = C.extract_circuit(target, 2).circuit
    comp = compile_circuit(circ)
    text = comp.to_qasm()
    assert text.startswith("OPENQASM 2.0;")
    assert text.count("\ncx ") == 2 * 5 * 2
    assert text.count("measure") == 6
    assert np.allclose(_run_qasm(text), C.simulate(circ) ** 2, atol=1e-12)


def test_qasm_angles_round_trip(rng):
    comp = compile_circuit(random_circuit(3, 1, rng))
    angles = [float(a) for a in re.findall(r"r[yz]\(([^)]+)\)", comp.to_qasm())]
    assert angles == [op.angle for op in comp.ops if op.name != "cx"]
