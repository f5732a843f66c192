"""Domain types, physical constants, unit conventions, and validation.

All frequencies are ordinary frequencies in Hz; convert angular quantities at
the boundary with :func:`hz_to_angular` / :func:`angular_to_hz`.  All types are
immutable value objects: invariants are enforced at construction so downstream
code never re-validates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import InvalidDrive, InvalidSweep

TWO_PI = 2.0 * math.pi

# CODATA-style defaults; the gyromagnetic ratios are for the NV electron spin
# and 13C in ordinary-frequency units.
DEFAULT_GAMMA_E = 28.024e9  # Hz/T
DEFAULT_GAMMA_N = 10.705e6  # Hz/T
DEFAULT_DELTA_ZFS = 2.87e9  # Hz


def hz_to_angular(f):
    return TWO_PI * f


def angular_to_hz(w):
    return w / TWO_PI


def _require_finite(name, value):
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value!r}")


@dataclass(frozen=True)
class PhysicalConstants:
    """Electron/nuclear gyromagnetic ratios and the zero-field splitting."""

    gamma_e: float = DEFAULT_GAMMA_E
    gamma_n: float = DEFAULT_GAMMA_N
    delta_zfs: float = DEFAULT_DELTA_ZFS

    def __post_init__(self):
        for name in ("gamma_e", "gamma_n", "delta_zfs"):
            _require_finite(name, getattr(self, name))
        if self.gamma_e <= 0 or self.gamma_n <= 0:
            raise ValueError("gyromagnetic ratios must be positive")
        # electron/nuclear ratio sanity: these species differ by >3 orders
        if self.gamma_e / self.gamma_n <= 2000:
            raise ValueError("gamma_e/gamma_n must exceed 2000")


@dataclass(frozen=True)
class HyperfineCoupling:
    """One nucleus: parallel (signed) and perpendicular (>= 0) components, Hz."""

    a_par: float
    a_perp: float

    def __post_init__(self):
        _require_finite("a_par", self.a_par)
        _require_finite("a_perp", self.a_perp)
        if self.a_perp < 0:
            raise ValueError("a_perp must be >= 0")


@dataclass(frozen=True)
class SpinSystem:
    """Electron plus N hyperfine-coupled spin-1/2 nuclei in a static field."""

    b0: float
    nuclei: tuple = ()
    constants: PhysicalConstants = field(default_factory=PhysicalConstants)
    exact_cap: int = 6  # largest N for exact propagation (dim 2*2^N)

    def __post_init__(self):
        _require_finite("b0", self.b0)
        if self.b0 <= 0:
            raise ValueError("b0 must be positive")
        object.__setattr__(self, "nuclei", tuple(self.nuclei))
        for nuc in self.nuclei:
            if not isinstance(nuc, HyperfineCoupling):
                raise TypeError("nuclei must be HyperfineCoupling instances")
        if self.exact_cap < 0:
            raise ValueError("exact_cap must be >= 0")

    @property
    def n_nuclei(self):
        return len(self.nuclei)

    @property
    def omega_n(self):
        """Bare nuclear Zeeman frequency gamma_n * B0 (Hz)."""
        return self.constants.gamma_n * self.b0

    @property
    def electron_transition(self):
        """Center of the driven m_s = 0 -> +1 transition, delta_zfs - gamma_e*B0 (Hz)."""
        return self.constants.delta_zfs - self.constants.gamma_e * self.b0


@dataclass(frozen=True)
class DriveConfig:
    """Optical and microwave drive powers with their linear conversion factors."""

    eta_e: float  # optical power, W
    eta_r: float  # microwave power, W
    c_e: float  # optical pumping conversion, Hz/W
    c_r: float  # Rabi conversion, Hz/W

    def __post_init__(self):
        for name in ("eta_e", "eta_r", "c_e", "c_r"):
            value = getattr(self, name)
            _require_finite(name, value)
            if value < 0:
                raise InvalidDrive(f"{name} must be >= 0, got {value}")

    @property
    def kappa_e(self):
        """Electron pumping rate c_e * eta_e (Hz)."""
        return self.c_e * self.eta_e

    @property
    def omega_e(self):
        """Electron Rabi frequency c_r * eta_r (Hz)."""
        return self.c_r * self.eta_r


@dataclass(frozen=True)
class SweepConfig:
    """Linear microwave chirp: repeated sweeps of bandwidth B about f0."""

    f0: float  # spectral center, Hz
    bandwidth: float  # sweep span B, Hz
    omega_r: float  # sweep repetition rate, sweeps/s
    duration: float  # total drive time T, s

    def __post_init__(self):
        for name in ("f0", "bandwidth", "omega_r", "duration"):
            _require_finite(name, getattr(self, name))
        if self.bandwidth <= 0:
            raise InvalidSweep("bandwidth must be positive")
        if self.omega_r <= 0:
            raise InvalidSweep("omega_r must be positive")
        if self.duration < 0:
            raise InvalidSweep("duration must be >= 0")

    def omega_mw(self, t):
        """Instantaneous frequency within one sweep, t in [0, 1/omega_r]."""
        return self.bandwidth * self.omega_r * t + self.f0 - self.bandwidth / 2.0

    @property
    def sweep_velocity(self):
        """Chirp rate B * omega_r (Hz/s)."""
        return self.bandwidth * self.omega_r

    @property
    def sweep_count(self):
        return self.duration * self.omega_r


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    errors: tuple = ()
    warnings: tuple = ()


def validate_system(system, drive, sweep):
    """Cross-check a (system, drive, sweep) triple beyond per-type invariants.

    Constructors already reject malformed individual objects; this adds the
    joint physics checks: the sequential-LZ picture needs B well above the
    largest gap (estimated as the Rabi frequency), and exact propagation is
    only available up to the configured nucleus cap.
    """
    errors = []
    warnings = []
    eps1_estimate = drive.omega_e  # largest anti-crossing gap ~ Rabi frequency
    if eps1_estimate > 0 and sweep.bandwidth <= 10.0 * eps1_estimate:
        warnings.append(
            "adiabatic-approximation suspect: bandwidth <= 10*eps1 "
            f"({sweep.bandwidth:.6g} Hz vs eps1 ~ {eps1_estimate:.6g} Hz)"
        )
    if system.n_nuclei > system.exact_cap:
        warnings.append(
            f"N = {system.n_nuclei} exceeds exact-propagation cap {system.exact_cap}; "
            "only analytic/Galton-board paths apply"
        )
    if sweep.f0 - sweep.bandwidth / 2.0 < 0:
        warnings.append("sweep window extends below 0 Hz")
    return ValidationReport(ok=not errors, errors=tuple(errors), warnings=tuple(warnings))
