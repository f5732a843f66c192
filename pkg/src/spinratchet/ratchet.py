"""Closed-form spin-ratchet model.

Per sweep, the electron drags nuclear population through the anti-crossing
cascade.  With T1 = tunneling at the eps1 crossings and T2 = tunneling at the
eps2 crossings, an initially unpolarized nuclear pair acquires population
difference 4*T1*(1-T1)*(1-T2) per sweep, and the buildup rate is

    Pdot(omega_r) = omega_r * [1 - exp(-kappa_e/omega_r)] * (1-T2)*4*T1*(1-T1)

with an optimum omega_opt between the adiabatic (omega_r -> 0) and diabatic
(omega_r -> inf) extremes.  The bracket is evaluated as 4*T1*(1-T1), never as
1-(2*T1-1)^2: the two are algebraically identical but the latter cancels
catastrophically when T1 is within ~1e-8 of 0 or 1, which produces spurious
flat spots in omega_opt searches.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import NoInteriorMaximum

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
TUNNELING_LAWS = ("paper", "standard")


@dataclass(frozen=True)
class RatchetParams:
    """Scalar inputs of the buildup-rate model."""

    kappa_e: float  # electron pumping rate c_e*eta_e, Hz
    eps1: float  # large gap, Hz
    eps2: float  # small gap, Hz
    bandwidth: float  # sweep span B, Hz
    duration: float = 20.0  # total drive time T, s

    def __post_init__(self):
        for name in ("kappa_e", "eps1", "eps2", "bandwidth", "duration"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise ValueError(f"{name} must be finite and >= 0, got {value!r}")
        if self.bandwidth == 0:
            raise ValueError("bandwidth must be positive")
        if self.eps2 > self.eps1:
            warnings.warn("eps2 > eps1: gap roles are swapped relative to the model")


def tunneling_probability(eps, omega_r, bandwidth, law="paper"):
    """Diabatic-passage probability at a gap of size eps.

    law="paper" uses exp(-eps^2/(omega_r*B)); law="standard" the textbook
    exp(-2*pi*(eps/2)^2/(B*omega_r)).  The exponents differ by pi/2.
    """
    if np.any(np.asarray(omega_r) <= 0) or bandwidth <= 0:
        raise ValueError("omega_r and bandwidth must be positive")
    eps = np.asarray(eps, dtype=float)
    exponent = eps * eps / (np.asarray(omega_r, dtype=float) * bandwidth)
    if law == "standard":
        exponent = exponent * (math.pi / 2.0)
    elif law != "paper":
        raise ValueError(f"unknown tunneling law {law!r}")
    return np.exp(-exponent)


def sweep_transition_matrix(t1, t2):
    """Row-stochastic nuclear transition matrix for one sweep.

    Index 0 is nuclear down, index 1 up: M[i, j] = P(i -> j).  t1 is the
    tunneling probability at the two nuclear-flip crossings, t2 at the two
    nuclear-preserving crossings, in the order the sweep encounters them.
    """
    for name, t in (("t1", t1), ("t2", t2)):
        if not 0.0 <= t <= 1.0:
            raise ValueError(f"{name} must lie in [0, 1], got {t!r}")
    p_dd = (1.0 - t2) + t2 * t1
    p_du = t2 * (1.0 - t1)
    p_ud = t2 * (1.0 - t1) + 2.0 * t1 * (1.0 - t1) * (1.0 - t2)
    p_uu = t1 * t2 + t1 * t1 * (1.0 - t2) + (1.0 - t1) ** 2 * (1.0 - t2)
    return np.array([[p_dd, p_du], [p_ud, p_uu]])


def per_sweep_polarization(t1, t2):
    """Population difference gained per sweep from an unpolarized pair.

    Equals (1-T2)*[1-(2*T1-1)^2] and the column difference of
    sweep_transition_matrix; evaluated in the cancellation-free form.
    """
    t1 = np.asarray(t1, dtype=float)
    t2 = np.asarray(t2, dtype=float)
    if np.any(t1 < 0) or np.any(t1 > 1) or np.any(t2 < 0) or np.any(t2 > 1):
        raise ValueError("t1, t2 must lie in [0, 1]")
    return 4.0 * t1 * (1.0 - t1) * (1.0 - t2)


def buildup_rate(omega_r, params, law="paper"):
    """Nuclear polarization buildup rate Pdot(omega_r) (1/s)."""
    omega_r = np.asarray(omega_r, dtype=float)
    if np.any(omega_r <= 0):
        raise ValueError("omega_r must be positive")
    t1 = tunneling_probability(params.eps1, omega_r, params.bandwidth, law)
    t2 = tunneling_probability(params.eps2, omega_r, params.bandwidth, law)
    pump = -np.expm1(-params.kappa_e / omega_r)
    return omega_r * pump * per_sweep_polarization(t1, t2)


def total_polarization(params, omega_r, law="paper"):
    """Accumulated polarization after duration T: buildup_rate * T (linear in T)."""
    return buildup_rate(omega_r, params, law) * params.duration


def find_omega_opt(params, window=(1.0, 1e6), law="paper", points_per_decade=256):
    """Global maximizer of buildup_rate on the window.

    Coarse log-spaced grid then golden-section refinement on log(omega); the
    model is smooth and unimodal in the valid regime, so derivative-free
    search is enough and avoids the exp(-a/omega) corner at 0.
    """
    lo, hi = window
    if not (0 < lo < hi):
        raise ValueError("window must satisfy 0 < lo < hi")
    decades = math.log10(hi / lo)
    n = max(int(round(points_per_decade * decades)) + 1, 8)
    grid = np.geomspace(lo, hi, n)
    values = buildup_rate(grid, params, law)
    imax = int(np.argmax(values))
    if imax == 0 or imax == n - 1:
        raise NoInteriorMaximum(
            f"buildup_rate maximum sits on the window boundary near {grid[imax]:.6g} Hz"
        )

    def f(logw):
        return -float(buildup_rate(math.exp(logw), params, law))

    a, b = math.log(grid[imax - 1]), math.log(grid[imax + 1])
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while d - c > 1e-12:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
    return math.exp(0.5 * (a + b))
