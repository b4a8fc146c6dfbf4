"""Parametric multistage stochastic optimization toolkit.

Computes parametric value functions of multistage stochastic programs and
their gradients in the parameter by backward induction, regularizes
nondifferentiable costs through Moreau envelopes, optimizes the parameter
with projected first-order methods and cross-checks the result against an
SDDP baseline with statistical lower/upper bounds.  Ships a day-ahead
solar/battery commitment benchmark.
"""

__version__ = "0.1.0"

from .model import (  # noqa: F401
    AR1Weights,
    BatteryParams,
    CommitmentProfile,
    Instance,
    TariffSchedule,
)
from .scenario import NoiseModel  # noqa: F401
