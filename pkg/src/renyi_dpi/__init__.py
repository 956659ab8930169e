"""Numerical toolkit for alpha-z Renyi relative entropies and the
data-processing inequality in finite dimensions."""

from .channels import KrausChannel, partial_trace_channel, random_channel, validate_cptp
from .divergences import (
    AlphaZParams,
    RegionClass,
    alpha_z,
    classify_region,
    dpi_gap,
    psi_functional,
    renyi_alpha,
    sandwiched,
    umegaki,
)
from .errors import InvalidInputError, InvalidParamsError, RenyiDPIError
from .states import random_density, regularize

__version__ = "0.1.0"
