"""Three-rate compartment model: electron -> proximal shell -> bulk.

The electron pool is pumped at kappa_e and delivers at most
P_e_ss = 1 - exp(-kappa_e/omega_r) per sweep period; the proximal shell is
injected at Gamma = omega_r * per_sweep_polarization and exchanges with the
bulk at kappa_d, weighted by the pool-size ratio so that exchange conserves
total weighted polarization:

    dP_p/dt = Gamma*(P_e_ss - P_p) - kappa_d*(P_p - P_b) - P_p/T_1n
    dP_b/dt = kappa_d*(n_prox/n_bulk)*(P_p - P_b) - P_b/T_1n

kappa_d = inf is the merged-pool limit (P_p = P_b exactly, injection diluted
by n_prox/(n_prox + n_bulk)).  Integration is explicit RK4; the model is
contractive on [0, 1] so no clamping is ever applied.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cascade import analytic_gaps
from .errors import InsufficientSamples, StepTooCoarse
from .fitting import DnpProfile
from .ratchet import per_sweep_polarization, tunneling_probability

DEFAULT_T1N = 300.0  # s, nuclear relaxation
DEFAULT_POOL_RATIO = 100.0  # n_bulk / n_prox
DEFAULT_THERMAL_REF = 1e-5  # reference thermal polarization


@dataclass(frozen=True)
class RateChainParams:
    kappa_e: float  # electron pumping rate, 1/s
    omega_r: float  # sweep rate feeding P_e_ss, sweeps/s
    inj_rate: float  # proximal injection Gamma = omega_r * per-sweep polarization, 1/s
    kappa_d: float  # spin-diffusion exchange rate, 1/s (may be inf)
    t1n: float = DEFAULT_T1N
    n_prox: float = 1.0
    n_bulk: float = DEFAULT_POOL_RATIO

    def __post_init__(self):
        for name in ("kappa_e", "omega_r", "inj_rate", "kappa_d", "t1n", "n_prox", "n_bulk"):
            value = getattr(self, name)
            if math.isnan(value) or value < 0:
                raise ValueError(f"{name} must be >= 0, got {value!r}")
        if self.t1n <= 0:
            raise ValueError("t1n must be positive")
        if self.omega_r <= 0:
            raise ValueError("omega_r must be positive")
        if self.n_bulk < self.n_prox:
            raise ValueError("n_bulk must be >= n_prox")

    @property
    def p_e_ss(self):
        """Electron polarization reached within one sweep period."""
        return -math.expm1(-self.kappa_e / self.omega_r)


@dataclass(frozen=True)
class BuildupSeries:
    t: np.ndarray
    p_e: np.ndarray
    p_p: np.ndarray
    p_b: np.ndarray

    def __post_init__(self):
        for arr in (self.p_e, self.p_p, self.p_b):
            if np.any(arr < -1e-12) or np.any(arr > 1 + 1e-12):
                raise ValueError("compartment polarizations must lie in [0, 1]")


def electron_polarization(t, kappa_e):
    """Optically pumped electron polarization P_e(t) = 1 - exp(-t*kappa_e)."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("t must be >= 0")
    return -np.expm1(-t * kappa_e)


def _chain_rates(params):
    gam = params.inj_rate
    kd = params.kappa_d
    r1 = 1.0 / params.t1n
    np_nb = params.n_prox / params.n_bulk
    pe = params.p_e_ss
    if math.isinf(kd):
        dilution = params.n_prox / (params.n_prox + params.n_bulk)

        def deriv(pp, pb):
            d = gam * dilution * (pe - pp) - r1 * pp
            return d, d

    else:

        def deriv(pp, pb):
            dpp = gam * (pe - pp) - kd * (pp - pb) - r1 * pp
            dpb = kd * np_nb * (pp - pb) - r1 * pb
            return dpp, dpb

    return deriv


def _min_timescale(params):
    scales = [params.t1n]
    if params.inj_rate > 0:
        scales.append(1.0 / params.inj_rate)
    if params.kappa_d > 0 and not math.isinf(params.kappa_d):
        scales.append(1.0 / params.kappa_d)
    return min(scales)


def simulate_buildup(params, duration, dt):
    """Integrate the compartment chain from P = 0 with explicit RK4."""
    if duration <= 0 or dt <= 0:
        raise ValueError("duration and dt must be positive")
    if dt > _min_timescale(params) / 10.0:
        raise StepTooCoarse(
            f"dt = {dt:.3g} s exceeds min timescale / 10 = {_min_timescale(params) / 10:.3g} s"
        )
    nsteps = int(math.ceil(duration / dt))
    t = np.linspace(0.0, nsteps * dt, nsteps + 1)
    deriv = _chain_rates(params)
    pp = np.empty(nsteps + 1)
    pb = np.empty(nsteps + 1)
    pp[0] = pb[0] = 0.0
    x, y = 0.0, 0.0
    for i in range(nsteps):
        k1 = deriv(x, y)
        k2 = deriv(x + dt / 2 * k1[0], y + dt / 2 * k1[1])
        k3 = deriv(x + dt / 2 * k2[0], y + dt / 2 * k2[1])
        k4 = deriv(x + dt * k3[0], y + dt * k3[1])
        x += dt / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        y += dt / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        pp[i + 1], pb[i + 1] = x, y
    p_e = params.p_e_ss * -np.expm1(-params.kappa_e * t)
    return BuildupSeries(t=t, p_e=p_e, p_p=pp, p_b=pb)


def small_time_injection_rate(series, window=0.6, thermal_ref=None):
    """Least-squares slope of P_b(t) on [0, window] (polarization/s).

    With thermal_ref set, the slope is returned in %/s of that reference
    polarization instead.
    """
    mask = series.t <= window
    if int(mask.sum()) < 5:
        raise InsufficientSamples(f"need >= 5 samples in [0, {window}] s, got {int(mask.sum())}")
    ts = series.t[mask]
    ys = series.p_b[mask]
    design = np.vstack([ts, np.ones_like(ts)]).T
    coef, *_ = np.linalg.lstsq(design, ys, rcond=None)
    slope = float(coef[0])
    if thermal_ref is not None:
        return slope / thermal_ref * 100.0
    return slope


def injection_rate(system, drive, omega_r, bandwidth, law="paper"):
    """Gamma(omega_r) = omega_r * per-sweep polarization at the nucleus-0 gaps."""
    eps1, eps2 = analytic_gaps(system, drive, 0)
    t1 = tunneling_probability(eps1, omega_r, bandwidth, law)
    t2 = tunneling_probability(eps2, omega_r, bandwidth, law)
    return omega_r * per_sweep_polarization(t1, t2)


def bulk_profile(system, drive, sweep, omega_grid, chain, duration, law="paper"):
    """Bulk polarization P_b(duration) sampled over an omega_r grid.

    chain supplies (kappa_d, t1n, pool sizes); kappa_e comes from the drive and
    Gamma(omega_r) from the located gaps, mirroring RateChainParams per point.
    The grid integrates vectorized with a common stability-bounded step; the
    scalar route simulate_buildup is the per-point oracle.
    """
    omega_grid = np.asarray(omega_grid, dtype=float)
    if omega_grid.size < 1 or np.any(omega_grid <= 0):
        raise ValueError("omega_grid must contain positive rates")
    kappa_e = drive.kappa_e
    gam = np.asarray(injection_rate(system, drive, omega_grid, sweep.bandwidth, law))
    pe = -np.expm1(-kappa_e / omega_grid)
    kd = chain.kappa_d
    r1 = 1.0 / chain.t1n
    np_nb = chain.n_prox / chain.n_bulk

    rate_max = float(np.max(gam)) + r1
    if math.isinf(kd):
        dilution = chain.n_prox / (chain.n_prox + chain.n_bulk)

        def deriv(pp, pb):
            d = gam * dilution * (pe - pp) - r1 * pp
            return d, d

    else:
        rate_max += kd * (1.0 + np_nb)

        def deriv(pp, pb):
            dpp = gam * (pe - pp) - kd * (pp - pb) - r1 * pp
            dpb = kd * np_nb * (pp - pb) - r1 * pb
            return dpp, dpb

    nsteps = max(400, int(math.ceil(duration * rate_max * 12.0)))
    dt = duration / nsteps
    pp = np.zeros_like(omega_grid)
    pb = np.zeros_like(omega_grid)
    for _ in range(nsteps):
        k1 = deriv(pp, pb)
        k2 = deriv(pp + dt / 2 * k1[0], pb + dt / 2 * k1[1])
        k3 = deriv(pp + dt / 2 * k2[0], pb + dt / 2 * k2[1])
        k4 = deriv(pp + dt * k3[0], pb + dt * k3[1])
        pp = pp + dt / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        pb = pb + dt / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
    points = tuple((float(w), float(p)) for w, p in zip(omega_grid, pb))
    meta = {
        "eta_e": drive.eta_e,
        "eta_r": drive.eta_r,
        "bandwidth": sweep.bandwidth,
        "duration": duration,
    }
    return DnpProfile(points=points, meta=meta)
