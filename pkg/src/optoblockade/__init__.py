"""Single-photon optomechanical blockade of an atom trapped in a cavity.

Frequencies are angular throughout; one internal unit is 2*pi x 1 MHz, so a
rate quoted as "2*pi x 0.05 MHz" is passed as ``units.mhz(0.05)``.
"""

from optoblockade.errors import (
    BlockadeError,
    LosslessResonanceError,
    MixedStateError,
    NonConvergenceError,
    NumericError,
    ParameterDomainError,
    TruncationError,
    UndefinedCorrelationError,
)
from optoblockade.fockspace import ExpansionOrder, TruncatedBasis, build_basis, build_operators, mode_profile_operator
from optoblockade.models import (
    HamiltonianBlocks,
    JcParams,
    MotionParams,
    OmParams,
    build_jc_motion,
    build_jc_static,
    build_om,
    gm_of_x0,
)
from optoblockade.solver import SteadyAmplitudes, g2_zero, mean_photon, solve_finite_drive, solve_weak_drive

__version__ = "0.1.0"

__all__ = [
    "BlockadeError",
    "ExpansionOrder",
    "HamiltonianBlocks",
    "JcParams",
    "LosslessResonanceError",
    "MixedStateError",
    "MotionParams",
    "NonConvergenceError",
    "NumericError",
    "OmParams",
    "ParameterDomainError",
    "SteadyAmplitudes",
    "TruncatedBasis",
    "TruncationError",
    "UndefinedCorrelationError",
    "build_basis",
    "build_jc_motion",
    "build_jc_static",
    "build_om",
    "build_operators",
    "g2_zero",
    "gm_of_x0",
    "mean_photon",
    "mode_profile_operator",
    "solve_finite_drive",
    "solve_weak_drive",
]
