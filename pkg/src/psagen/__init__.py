"""Partial-secular master-equation generators with positivity certification.

Pipeline: decompose the system Hamiltonian into gap eigenoperators
(``spectral``), evaluate the bath's half-Fourier matrices (``bath``), assemble
the coarse-grained generator and its linearized form (``generator``), certify
complete positivity exactly or via critical coarse-graining times
(``positivity``), and integrate or cross-check trajectories against analytic
oracles (``dynamics``).  ``dipole`` wires the pipeline for the two reference
models; ``cli`` drives parameter sweeps to CSV/JSON.
"""

__version__ = "0.1.0"

from . import bath, dipole, dynamics, generator, positivity, spectral
from .errors import (
    ConfigurationError,
    IntegrationError,
    NonUniqueSteadyStateError,
    NotCompletelyPositiveError,
    PsagenError,
    QuadratureError,
    ValidationError,
)

__all__ = [
    "bath",
    "dipole",
    "dynamics",
    "generator",
    "positivity",
    "spectral",
    "PsagenError",
    "ValidationError",
    "ConfigurationError",
    "QuadratureError",
    "NotCompletelyPositiveError",
    "NonUniqueSteadyStateError",
    "IntegrationError",
    "__version__",
]
