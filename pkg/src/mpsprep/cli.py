"""Command-line entry point.

    mpsprep encode   --order 16 --qubits 20
    mpsprep circuit  --order 8 --qubits 10 --depth 2
    mpsprep simulate --circuit out/circuit.json
    mpsprep sample   --circuit out/circuit.json --shots 10000 --seed 1
    mpsprep figure   --id 4b

Settings may come from a JSON file (``--config``) whose keys are the long
option names with underscores; flags given on the command line win. Output
goes to ``--out``, else ``$MPSPREP_OUTPUT_DIR``, else the working directory.

Exit status is 0 on success, 2 for invalid input and 3 for failures during
the computation. Errors are reported as one JSON object on stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Sequence

import numpy as np

from . import circuit as C
from . import mps as M
from .compile import compile_circuit
from .encode import AMPLITUDE_MODES, Grid, encode_irwin_hall
from .figures import FIGURES

OUTPUT_ENV = "MPSPREP_OUTPUT_DIR"
EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 2, 3
BACKENDS = ("statevector", "mps")


class ConfigError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


@dataclass
class RunConfig:
    command: str = ""
    order: int | None = None
    qubits: int | None = None
    depth: int = 1
    chi_max: int | None = None
    amplitude_mode: str = "pdf"
    shots: int = 10000
    seed: int | None = 0
    backend: str = "statevector"
    out: str | None = None
    mps: str | None = None
    circuit: str | None = None
    id: str | None = None

    @property
    def out_dir(self) -> Path:
        return Path(self.out or os.environ.get(OUTPUT_ENV) or ".")

    def validate(self) -> None:
        """Check everything the command needs before anything is written."""
        cmd = self.command
        for name in ("order", "qubits", "depth", "chi_max", "shots", "seed"):
            v = getattr(self, name)
            if v is not None and (isinstance(v, bool) or int(v) != v):
                raise ConfigError(f"{name} must be an integer")
        if self.amplitude_mode not in AMPLITUDE_MODES:
            raise ConfigError(f"amplitude_mode must be one of {list(AMPLITUDE_MODES)}")
        if self.backend not in BACKENDS:
            raise ConfigError(f"backend must be one of {list(BACKENDS)}")
        if self.depth < 1:
            raise ConfigError("depth must be >= 1")
        if self.shots < 1:
            raise ConfigError("shots must be >= 1")
        if self.chi_max is not None and self.chi_max < 1:
            raise ConfigError("chi_max must be >= 1")
        needs_encoding = cmd == "encode" or (cmd == "circuit" and self.mps is None)
        if needs_encoding:
            if self.order is None or self.qubits is None:
                raise ConfigError("order and qubits are required")
            n = self.order
            if n < 2 or n & (n - 1):
                raise ConfigError("order must be a power of two")
            if self.qubits < 2:
                raise ConfigError("qubits must be >= 2")
            if n.bit_length() - 1 > self.qubits:
                raise ConfigError(f"order {n} needs at least {n.bit_length() - 1} qubits")
            if self.amplitude_mode == "sqrt_pdf" and self.qubits > 20:
                raise ConfigError("sqrt_pdf mode supports at most 20 qubits")
        if cmd == "circuit" and self.mps is not None:
            _require_file(self.mps, "mps")
        if cmd in ("simulate", "sample"):
            if self.circuit is None:
                raise ConfigError("circuit file is required")
            _require_file(self.circuit, "circuit")
        if cmd == "figure" and self.id not in FIGURES:
            raise ConfigError(f"unknown figure id {self.id!r}; choose from {sorted(FIGURES)}")


def _require_file(path: str, what: str) -> None:
    if not Path(path).is_file():
        raise ConfigError(f"{what} file not found: {path}")


def _load_circuit(path: str) -> tuple[C.Circuit, Grid | None]:
    try:
        doc = json.loads(Path(path).read_text())
        circ = C.Circuit.from_dict(doc)
    except (ValueError, KeyError, TypeError) as exc:
        raise ConfigError(f"cannot read circuit file {path}: {exc}") from exc
    grid = Grid(**doc["grid"]) if "grid" in doc else None
    return circ, grid


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def cmd_encode(cfg: RunConfig) -> list[Path]:
    state, grid, report = encode_irwin_hall(cfg.order, cfg.qubits, cfg.chi_max, cfg.amplitude_mode)
    out = cfg.out_dir
    out.mkdir(parents=True, exist_ok=True)
    doc = json.loads(M.to_json(state))
    doc["grid"] = grid.to_dict()
    (out / "mps.json").write_text(json.dumps(doc))
    rep = report.to_dict()
    rep.update(order=cfg.order, amplitude_mode=cfg.amplitude_mode, grid=grid.to_dict())
    _write_json(out / "report.json", rep)
    return [out / "mps.json", out / "report.json"]


def cmd_circuit(cfg: RunConfig) -> list[Path]:
    if cfg.mps is not None:
        try:
            doc = json.loads(Path(cfg.mps).read_text())
            target = M.from_json(json.dumps(doc))
        except (ValueError, KeyError) as exc:
            raise ConfigError(f"cannot read MPS file {cfg.mps}: {exc}") from exc
        grid = Grid(**doc["grid"]) if "grid" in doc else None
    else:
        target, grid, _ = encode_irwin_hall(cfg.order, cfg.qubits, cfg.chi_max, cfg.amplitude_mode)
    res = C.extract_circuit(target, cfg.depth)
    compiled = compile_circuit(res.circuit)
    out = cfg.out_dir
    out.mkdir(parents=True, exist_ok=True)
    doc = json.loads(res.circuit.to_json(compiled.final_permutation))
    if grid is not None:
        doc["grid"] = grid.to_dict()
    (out / "circuit.json").write_text(json.dumps(doc))
    (out / "circuit.qasm").write_text(compiled.to_qasm())
    _write_json(out / "extraction.json", {
        "depth": cfg.depth,
        "n_qubits": target.n_sites,
        "infidelities": [float(v) for v in res.infidelities],
        "cx_count": compiled.cx_count,
        "gate_counts": compiled.counts(),
        "final_permutation": list(compiled.final_permutation),
    })
    return [out / "circuit.json", out / "circuit.qasm", out / "extraction.json"]


def _check_cap(circ: C.Circuit, backend: str) -> None:
    if backend == "statevector" and circ.n_qubits > M.DENSE_CAP:
        raise ConfigError(f"{circ.n_qubits} qubits exceeds the statevector cap of {M.DENSE_CAP}")


def cmd_simulate(cfg: RunConfig) -> list[Path]:
    circ, grid = _load_circuit(cfg.circuit)
    _check_cap(circ, cfg.backend)
    out = cfg.out_dir
    if cfg.backend == "mps":
        state = C.simulate(circ, backend="mps")
        out.mkdir(parents=True, exist_ok=True)
        (out / "state.json").write_text(M.to_json(state))
        _write_json(out / "simulate.json", {"backend": "mps", "n_qubits": circ.n_qubits,
                                             "norm": M.norm(state), "bond_dims": state.bond_dims})
        return [out / "state.json", out / "simulate.json"]
    vec = C.simulate(circ, backend="statevector")
    out.mkdir(parents=True, exist_ok=True)
    xs = grid.points() if grid is not None else np.arange(vec.size, dtype=float)
    lines = ["index,x,amplitude,probability"]
    lines += [f"{k},{format(x, '.17g')},{format(a, '.17g')},{format(a * a, '.17g')}"
              for k, (x, a) in enumerate(zip(xs.tolist(), vec.tolist()))]
    (out / "amplitudes.csv").write_text("\n".join(lines) + "\n")
    _write_json(out / "simulate.json", {"backend": "statevector", "n_qubits": circ.n_qubits,
                                         "norm": float(np.linalg.norm(vec))})
    return [out / "amplitudes.csv", out / "simulate.json"]


def sample_bits(circ: C.Circuit, shots: int, seed: int | None, backend: str) -> np.ndarray:
    """``(shots, N)`` measured bits in logical big-endian order."""
    if backend == "mps":
        return M.sample(C.simulate(circ, backend="mps"), shots, seed)
    probs = C.simulate(circ, backend="statevector") ** 2
    probs /= probs.sum()
    idx = np.random.default_rng(seed).choice(probs.size, size=shots, p=probs)
    n = circ.n_qubits
    return (idx[:, None] >> np.arange(n - 1, -1, -1)) & 1


def cmd_sample(cfg: RunConfig) -> list[Path]:
    circ, grid = _load_circuit(cfg.circuit)
    _check_cap(circ, cfg.backend)
    bits = sample_bits(circ, cfg.shots, cfg.seed, cfg.backend)
    grid = grid or Grid(0.0, 1.0, circ.n_qubits)
    xs = grid.x(grid.index(bits))
    out = cfg.out_dir
    out.mkdir(parents=True, exist_ok=True)
    lines = ["shot,bits,x"]
    lines += [f"{i},{''.join(map(str, b))},{format(x, '.17g')}" for i, (b, x) in enumerate(zip(bits.tolist(), xs.tolist()))]
    (out / "samples.csv").write_text("\n".join(lines) + "\n")
    return [out / "samples.csv"]


def cmd_figure(cfg: RunConfig) -> list[Path]:
    kwargs = {}
    if cfg.id in ("4a", "4b"):
        kwargs["amplitude_mode"] = cfg.amplitude_mode
        if cfg.qubits is not None:
            kwargs["n_qubits"] = cfg.qubits
        if cfg.depth > 1:
            kwargs["depths"] = tuple(range(1, cfg.depth + 1))
    if cfg.id == "3" and cfg.qubits is not None:
        kwargs["qubits"] = tuple(range(2, cfg.qubits + 1))
    if cfg.id == "3" and cfg.order is not None:
        kwargs["order"] = cfg.order
    series = FIGURES[cfg.id](**kwargs)
    out = cfg.out_dir
    out.mkdir(parents=True, exist_ok=True)
    return [s.write(out) for s in series]


COMMANDS = {
    "encode": cmd_encode,
    "circuit": cmd_circuit,
    "simulate": cmd_simulate,
    "sample": cmd_sample,
    "figure": cmd_figure,
}


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="mpsprep", description="Normal-distribution state preparation via Irwin-Hall MPS circuits.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", type=str, help="JSON file with default settings")
        p.add_argument("--out", type=str, help=f"output directory (default: ${OUTPUT_ENV} or .)")

    p = sub.add_parser("encode", help="encode an Irwin-Hall pdf as an MPS")
    common(p)
    p.add_argument("--order", type=int)
    p.add_argument("--qubits", type=int)
    p.add_argument("--chi-max", type=int)
    p.add_argument("--amplitude-mode", choices=AMPLITUDE_MODES)

    p = sub.add_parser("circuit", help="extract and compile a staircase circuit")
    common(p)
    p.add_argument("--mps", type=str, help="MPS file from 'encode'; otherwise encode from --order/--qubits")
    p.add_argument("--order", type=int)
    p.add_argument("--qubits", type=int)
    p.add_argument("--depth", type=int)
    p.add_argument("--chi-max", type=int)
    p.add_argument("--amplitude-mode", choices=AMPLITUDE_MODES)

    p = sub.add_parser("simulate", help="noiseless simulation of a circuit file")
    common(p)
    p.add_argument("--circuit", type=str)
    p.add_argument("--backend", choices=BACKENDS)

    p = sub.add_parser("sample", help="draw measurement shots from a circuit file")
    common(p)
    p.add_argument("--circuit", type=str)
    p.add_argument("--shots", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--backend", choices=BACKENDS)

    p = sub.add_parser("figure", help="write the CSV series behind a figure")
    common(p)
    p.add_argument("--id", choices=sorted(FIGURES))
    p.add_argument("--order", type=int)
    p.add_argument("--qubits", type=int)
    p.add_argument("--depth", type=int, help="largest depth of the sweep")
    p.add_argument("--amplitude-mode", choices=AMPLITUDE_MODES)
    return ap


def make_config(args: argparse.Namespace) -> RunConfig:
    values: dict = {}
    if getattr(args, "config", None):
        path = Path(args.config)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        try:
            values = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}") from exc
        if not isinstance(values, dict):
            raise ConfigError("config file must hold a JSON object")
        known = {f.name for f in fields(RunConfig)} - {"command"}
        unknown = set(values) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    for key, val in vars(args).items():
        if key not in ("config", "command") and val is not None:
            values[key] = val
    cfg = RunConfig(command=args.command, **values)
    cfg.validate()
    return cfg


def _fail(code: int, exc: BaseException) -> int:
    err = {"error": "invalid_input" if code == EXIT_INVALID else "runtime_error",
           "type": type(exc).__name__, "message": str(exc)}
    print(json.dumps(err), file=sys.stderr)
    return code


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        cfg = make_config(args)
    except (ConfigError, TypeError, ValueError) as exc:
        return _fail(EXIT_INVALID, exc)
    try:
        paths = COMMANDS[cfg.command](cfg)
    except ConfigError as exc:
        return _fail(EXIT_INVALID, exc)
    except Exception as exc:  # numerics, I/O
        return _fail(EXIT_RUNTIME, exc)
    print(json.dumps({"command": cfg.command, "outputs": [str(p) for p in paths]}))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
