"""Normal-distribution state preparation from Irwin-Hall matrix product states.

The pipeline approximates a normal pdf by the order-``n`` Irwin-Hall pdf,
encodes that piecewise polynomial exactly as an MPS, extracts a short
staircase circuit of two-qubit gates and compiles it to CX and rotations.
"""

from . import circuit, compile, dist, encode, figures, mps, stats
from .circuit import Circuit, CircuitLayer, extract_circuit, layer_from_chi2, simulate
from .compile import CompiledCircuit, compile_circuit, compile_o4
from .dist import IrwinHallSpec, irwin_hall_cdf, irwin_hall_pdf, irwin_hall_pieces
from .encode import Grid, encode_irwin_hall, encode_piecewise, encode_polynomial
from .mps import MPS
from .stats import DiscreteDistribution, ks_statistic, ks_threshold, loglog_slope, pdf_cdf_distances

__version__ = "0.1.0"
