"""Tomography of a fixed qubit from the scattering of a probe qubit."""

from .scattering import (
    MeasurementSetup,
    channel_amplitudes,
    omega,
    probability_closed_form,
    probability_trace,
    reflection_coefficients,
    transmission_coefficients,
)
from .tomography import (
    DegenerateSchemeError,
    ReconstructionResult,
    SchemeMatrix,
    build_scheme,
    invert_scheme,
    reconstruct,
    strategy1_frame_scheme,
    strategy1_parallel_scheme,
    strategy2_scheme,
)

__version__ = "0.1.0"
