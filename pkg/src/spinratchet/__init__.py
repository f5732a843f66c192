"""Simulator and analysis tools for swept-microwave optical DNP ratchets.

The package models a driven central electron spin coupled to nuclear spins,
walks the avoided-crossing cascade traversed by each microwave sweep, and
aggregates per-sweep transfer into bulk polarization buildup, sweep-rate
profiles, and profile fits.
"""

__version__ = "0.1.0"

from .buildup import (
    BuildupSeries,
    RateChainParams,
    bulk_profile,
    electron_polarization,
    injection_rate,
    simulate_buildup,
    small_time_injection_rate,
)
from .cascade import (
    LacCascade,
    LacEntry,
    analytic_crossings,
    analytic_gaps,
    build_hamiltonian,
    export_cascade_csv,
    locate_lacs,
    nuclear_frequencies,
    paper_gap_forms,
    tilt_angle,
)
from .errors import (
    DegenerateX,
    FitAmbiguous,
    FitDiverged,
    InsufficientSamples,
    InvalidDrive,
    InvalidSweep,
    NoCrossingInBandwidth,
    NoInteriorMaximum,
    SpinRatchetError,
    StepTooCoarse,
)
from .fitting import (
    DnpProfile,
    FitResult,
    fit_profile,
    read_profile_csv,
    regress_omega_opt,
    write_fit_json,
    write_profile_csv,
)
from .propagator import (
    NuclearPolarizationRecord,
    PropagationPolicy,
    board_labels,
    board_net_polarization,
    export_record_csv,
    galton_board_sweep,
    lz_reference_probability,
    propagate_sweep,
    sweep_unitary,
)
from .ratchet import (
    RatchetParams,
    buildup_rate,
    find_omega_opt,
    per_sweep_polarization,
    sweep_transition_matrix,
    total_polarization,
    tunneling_probability,
)
from .system import (
    DriveConfig,
    HyperfineCoupling,
    PhysicalConstants,
    SpinSystem,
    SweepConfig,
    ValidationReport,
    validate_system,
)

__all__ = [
    "BuildupSeries",
    "DegenerateX",
    "DnpProfile",
    "DriveConfig",
    "FitAmbiguous",
    "FitDiverged",
    "FitResult",
    "HyperfineCoupling",
    "InsufficientSamples",
    "InvalidDrive",
    "InvalidSweep",
    "LacCascade",
    "LacEntry",
    "NoCrossingInBandwidth",
    "NoInteriorMaximum",
    "NuclearPolarizationRecord",
    "PhysicalConstants",
    "PropagationPolicy",
    "RateChainParams",
    "RatchetParams",
    "SpinRatchetError",
    "SpinSystem",
    "StepTooCoarse",
    "SweepConfig",
    "ValidationReport",
    "analytic_crossings",
    "analytic_gaps",
    "board_labels",
    "board_net_polarization",
    "build_hamiltonian",
    "buildup_rate",
    "bulk_profile",
    "electron_polarization",
    "export_cascade_csv",
    "export_record_csv",
    "find_omega_opt",
    "fit_profile",
    "galton_board_sweep",
    "injection_rate",
    "locate_lacs",
    "lz_reference_probability",
    "nuclear_frequencies",
    "paper_gap_forms",
    "per_sweep_polarization",
    "propagate_sweep",
    "read_profile_csv",
    "regress_omega_opt",
    "simulate_buildup",
    "small_time_injection_rate",
    "sweep_transition_matrix",
    "sweep_unitary",
    "tilt_angle",
    "total_polarization",
    "tunneling_probability",
    "validate_system",
    "write_fit_json",
    "write_profile_csv",
]
