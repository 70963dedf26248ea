"""Entanglement spread: spectra, local protocols, communication bounds and capacities."""

from .bounds import (
    SpreadInterval,
    dilution_cost_curve,
    spread_capacity_interval,
    thm1_lower_bound,
    thm2_bound,
)
from .capacity import (
    BipartiteUnitary,
    QuantumChannel,
    build_uf,
    channel_rates,
    entangling_power,
    optimize_rates,
    qrst_region_check,
)
from .errors import (
    CleanViolationError,
    DomainError,
    NormalizationError,
    PreconditionError,
    ShapeError,
    SizeError,
    SpreadError,
    UnknownResourceError,
    ValidityError,
)
from .protocols import new_session, run_superposed, step
from .spectra import (
    BipartiteState,
    SchmidtSpectrum,
    entanglement_moments,
    generalized_spread,
    renyi_entropy,
    schmidt_spectrum_of,
    smoothed_spread,
    smoothed_spread_bruteforce,
    spread,
    tensor_power,
    tensor_product,
)
from .states import NamedState, embezzle_fidelity, local_conversion_fidelity, spectrum_of_named

__version__ = "0.1.0"
