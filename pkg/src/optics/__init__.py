"""
Optics layer: Jones calculus for the Michelson-Faraday coders and the fiber.

Pure functions over immutable value types; safe to call from any thread.
"""

from .interferometer import (
    IDEAL_CENTRAL_CEILING,
    EndToEndField,
    FringeModel,
    InterferometerSpec,
    Port,
    TimeBinField,
    central_bin_probability,
    end_to_end_field,
    fiber_channel,
    fringe_model,
    fringe_origin,
    link_fringe,
    interferometer_transfer,
    phase_scan,
    scan_phases,
    visibility,
    wrap_phase,
    wrap_phases,
)
from .jones import (
    JonesMatrix,
    JonesVector,
    MirrorKind,
    arm_round_trip,
    faraday_mirror,
    mirror_matrix,
    random_birefringence,
)

__all__ = [
    "IDEAL_CENTRAL_CEILING",
    "EndToEndField",
    "FringeModel",
    "InterferometerSpec",
    "JonesMatrix",
    "JonesVector",
    "MirrorKind",
    "Port",
    "TimeBinField",
    "arm_round_trip",
    "central_bin_probability",
    "end_to_end_field",
    "faraday_mirror",
    "fiber_channel",
    "fringe_model",
    "fringe_origin",
    "link_fringe",
    "interferometer_transfer",
    "mirror_matrix",
    "phase_scan",
    "random_birefringence",
    "scan_phases",
    "visibility",
    "wrap_phase",
    "wrap_phases",
]
