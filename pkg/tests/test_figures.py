import numpy as np
import pytest

from mpsprep import dist
from mpsprep.figures import (
    FIGURES,
    Series,
    depth_sweep,
    discretized_cdf_error,
    figure_2a,
    figure_2b,
    figure_3,
    ideal_normal_sigma,
)


def test_series_csv_is_deterministic(tmp_path):
    s = Series("demo", ("a", "b"), [(1, 0.1), (2, 1 / 3)])
    text = s.to_csv()
    assert text.splitlines() == ["a,b", "1,0.10000000000000001", "2,0.33333333333333331"]
    path = s.write(tmp_path)
    assert path.read_text() == text
    assert s.column("b") == [0.1, 1 / 3]


def test_figure_2_series_and_fits():
    a = figure_2a((4, 8, 16, 32))
    b = figure_2b((4, 8, 16, 32))
    assert [s.name for s in a] == ["fig2a", "fig2a_fit"]
    assert a[0].column("n") == [4, 8, 16, 32]
    assert all(r[1] < 0 for r in a[1].rows) and all(r[1] < 0 for r in b[1].rows)


def test_discretized_error_streaming_matches_dense():
    nq, hw = 12, 4 * np.sqrt(3)
    z = np.linspace(-hw, hw, 2 ** nq)
    p = dist.normal_pdf(z)
    c = np.cumsum(p / p.sum())
    before = np.concatenate([[0.0], c[:-1]])
    ref = max(np.abs(c - dist.normal_cdf(z)).max(), np.abs(before - dist.normal_cdf(z)).max())
    assert discretized_cdf_error(dist.normal_pdf, nq, hw, chunk=1000) == pytest.approx(ref, rel=1e-12)


def test_figure_3_small():
    rows = figure_3(qubits=(4, 6, 10))[0].rows
    assert [r[0] for r in rows] == [4, 6, 10]
    # few qubits: discretization dominates and both curves agree
    assert rows[0][1] == pytest.approx(rows[0][2], rel=1e-6)
    # many qubits: the Irwin-Hall error stays above the normal one
    assert rows[-1][1] > rows[-1][2]


def test_ideal_sigma():
    assert ideal_normal_sigma(24, "pdf") == pytest.approx(1.0)
    assert ideal_normal_sigma(12, "sqrt_pdf") == pytest.approx(1.0)


def test_depth_sweep_small():
    sw = depth_sweep(8, 8, (1, 2, 3))
    assert sw["depths"] == [1, 2, 3]
    assert all(b <= a + 1e-9 for a, b in zip(sw["infidelity"], sw["infidelity"][1:]))
    assert all(k >= 0 for k in sw["ks"]) and sw["ks_exact"] > 0


def test_figure_registry():
    assert sorted(FIGURES) == ["2a", "2b", "3", "4a", "4b"]
