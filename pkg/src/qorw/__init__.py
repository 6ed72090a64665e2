"""Quantized random walks on the line: spectral kernels, a lattice oracle and
coin-side simulation of the asymptotic position statistics."""

from .coin import (KrausChannel, amplitude_damping, apply_channel, compose_channels,
                   matrix_exponential, mixing_channel, partial_trace_first, rotation_unitary,
                   tensor_power, validate_cptp)
from .distribution import (Histogram, PositionDistribution, WalkerInit, asymptotic_moment,
                           asymptotic_pdf, init_kernel, moment, probabilities)
from .kernel import (WalkModel, acf_h, acf_h_unitary, builtin, classicality_test, kernel_at,
                     kernel_grid)
from .oracle import oracle_run, oracle_step

__version__ = "0.1.0"
