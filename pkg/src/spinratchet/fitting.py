"""Profile fitting and the omega_opt power-scaling regression.

fit_profile minimizes damped Gauss-Newton residuals of the ratchet model
against a measured or simulated P(omega_r) profile.  Parameters are
log-reparameterized as theta = (log A, log kappa_e, log eps2, log(eps1-eps2)),
which enforces positivity and eps2 <= eps1 structurally.  Residuals are
scaled by 1/|signal| by default ("relative"): the electron-pumping factor
1 - exp(-kappa_e/omega) and the eps2 tunneling factor 1 - exp(-(eps2^2/B)/omega)
have identical functional form, and with peak-dominated (unweighted) residuals
their product collapses into a single effective scale, leaving eps2
unidentifiable in realistic noise; relative weighting keeps the tail
curvature that separates them (and matches multiplicative noise).  Pass
weighting="absolute" for plain least squares.
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateX, FitAmbiguous, FitDiverged, NoInteriorMaximum
from .ratchet import RatchetParams, find_omega_opt, total_polarization


@dataclass(frozen=True)
class DnpProfile:
    """A sampled P(omega_r) curve plus drive metadata."""

    points: tuple  # ((omega_r, signal), ...)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        pts = tuple((float(w), float(s)) for w, s in self.points)
        object.__setattr__(self, "points", pts)
        if len(pts) < 5:
            raise ValueError("profile needs >= 5 points")
        ws = [w for w, _ in pts]
        if any(b <= a for a, b in zip(ws, ws[1:])):
            raise ValueError("omega_r values must be strictly increasing")
        if not all(math.isfinite(s) for _, s in pts):
            raise ValueError("signals must be finite")

    @property
    def omega(self):
        return np.array([w for w, _ in self.points])

    @property
    def signal(self):
        return np.array([s for _, s in self.points])


@dataclass(frozen=True)
class FitResult:
    amplitude: float
    kappa_e_fit: float
    eps1_fit: float
    eps2_fit: float
    omega_opt: float
    residual_norm: float
    covariance: np.ndarray  # 4x4 over (amplitude, kappa_e, eps1, eps2)
    extrapolated: bool = False
    iterations: int = 0
    cost: float = float("nan")


def _theta_from(amplitude, kappa_e, eps1, eps2):
    dgap = max(eps1 - eps2, 1e-12 * max(eps1, 1.0))
    return np.log(np.array([amplitude, kappa_e, eps2, dgap]))


def _params_from_theta(theta, bandwidth, duration):
    a, kappa, eps2, dgap = np.exp(theta)
    return a, RatchetParams(
        kappa_e=kappa, eps1=eps2 + dgap, eps2=eps2, bandwidth=bandwidth, duration=duration
    )


def _heuristic_init(profile, bandwidth, duration):
    ws = profile.omega
    ys = profile.signal
    imax = int(np.argmax(ys))
    w_max = ws[imax]
    half = ys[imax] / 2.0
    rising = np.flatnonzero(ys[: imax + 1] >= half)
    kappa0 = ws[rising[0]] if rising.size else w_max / 10.0
    eps1 = math.sqrt(w_max * bandwidth)  # places T1 near the transfer sweet spot
    eps2 = eps1 / 3.0
    a0, params = _params_from_theta(
        _theta_from(1.0, kappa0, eps1, eps2), bandwidth, duration
    )
    peak_model = float(total_polarization(params, w_max))
    amp0 = ys[imax] / peak_model if peak_model > 0 else 1.0
    return _theta_from(max(amp0, 1e-300), kappa0, eps1, eps2)


def fit_profile(profile, init=None, law="paper", weighting="relative"):
    """Fit the ratchet model to a profile; see module docstring for weighting."""
    meta = profile.meta
    if "bandwidth" not in meta or "duration" not in meta:
        raise ValueError("profile.meta must provide 'bandwidth' and 'duration'")
    bandwidth = float(meta["bandwidth"])
    duration = float(meta["duration"])
    ws = profile.omega
    ys = profile.signal
    if weighting == "relative":
        wts = 1.0 / np.maximum(np.abs(ys), 1e-12 * np.max(np.abs(ys)))
    elif weighting == "absolute":
        wts = np.ones_like(ys)
    else:
        raise ValueError(f"unknown weighting {weighting!r}")

    def model(theta):
        a, params = _params_from_theta(theta, bandwidth, duration)
        return a * total_polarization(params, ws, law)

    def residuals(theta):
        return (ys - model(theta)) * wts

    if init is None:
        theta = _heuristic_init(profile, bandwidth, duration)
    else:
        theta = _theta_from(init.amplitude, init.kappa_e_fit, init.eps1_fit, init.eps2_fit)

    r = residuals(theta)
    cost = float(r @ r)
    if not math.isfinite(cost):
        raise FitDiverged(f"initial cost is {cost!r}")

    lam = 1e-3
    h = 1e-6
    jac = np.empty((len(ws), 4))
    iterations = 0
    for iterations in range(1, 501):
        for j in range(4):
            tp = theta.copy()
            tm = theta.copy()
            tp[j] += h
            tm[j] -= h
            jac[:, j] = (model(tp) - model(tm)) / (2.0 * h) * wts
        grad = jac.T @ r
        hess = jac.T @ jac
        accepted = False
        for _ in range(60):
            damped = hess + lam * np.diag(np.diag(hess)) + 1e-300 * np.eye(4)
            try:
                step = np.linalg.solve(damped, grad)
            except np.linalg.LinAlgError:
                lam *= 4.0
                continue
            theta_new = theta + step
            # exp(theta) overflows past ~709; such trials are rejected, not fatal
            if not np.all(np.isfinite(theta_new)) or np.max(theta_new) > 700.0:
                lam *= 4.0
                continue
            with np.errstate(over="ignore", invalid="ignore"):
                r_new = residuals(theta_new)
            cost_new = float(r_new @ r_new)
            if not math.isfinite(cost_new):
                lam *= 4.0
                continue
            if cost_new < cost:  # damped-step acceptance: cost never increases
                theta, r = theta_new, r_new
                lam = max(lam * 0.5, 1e-14)
                accepted = True
                break
            lam *= 4.0
        if not accepted:
            break
        rel_drop = (cost - cost_new) / cost if cost > 0 else 0.0
        cost = cost_new
        if rel_drop < 1e-10:
            break

    amplitude, params = _params_from_theta(theta, bandwidth, duration)
    dof = max(len(ws) - 4, 1)
    sigma2 = cost / dof
    try:
        cov_theta = sigma2 * np.linalg.inv(jac.T @ jac)
    except np.linalg.LinAlgError:
        cov_theta = np.full((4, 4), np.inf)
    # transform to physical (A, kappa_e, eps1, eps2) space
    a, kappa, eps2, dgap = np.exp(theta)
    gmat = np.zeros((4, 4))
    gmat[0, 0] = a
    gmat[1, 1] = kappa
    gmat[2, 2] = eps2  # eps1 = eps2 + dgap
    gmat[2, 3] = dgap
    gmat[3, 2] = eps2
    cov = gmat @ cov_theta @ gmat.T
    cond = np.linalg.cond(cov) if np.all(np.isfinite(cov)) else np.inf
    if cond > 1e10:
        warnings.warn(
            f"fit covariance condition number {cond:.3g} > 1e10; "
            "parameters are weakly determined",
            FitAmbiguous,
        )

    window = (float(ws[0]) / 100.0, float(ws[-1]) * 100.0)
    try:
        omega_opt = find_omega_opt(params, window=window, law=law)
        extrapolated = not (ws[0] <= omega_opt <= ws[-1])
    except NoInteriorMaximum:
        grid = np.geomspace(window[0], window[1], 512)
        vals = total_polarization(params, grid, law)
        omega_opt = float(grid[int(np.argmax(vals))])
        extrapolated = True

    raw_residual = ys - model(theta)
    return FitResult(
        amplitude=float(amplitude),
        kappa_e_fit=float(params.kappa_e),
        eps1_fit=float(params.eps1),
        eps2_fit=float(params.eps2),
        omega_opt=float(omega_opt),
        residual_norm=float(np.linalg.norm(raw_residual)),
        covariance=cov,
        extrapolated=extrapolated,
        iterations=iterations,
        cost=cost,
    )


def regress_omega_opt(points):
    """OLS of omega_opt against eta_e: {slope, intercept, r2, stderr_slope, n}."""
    pts = [(float(x), float(y)) for x, y in points]
    if len(pts) < 3:
        raise ValueError("need >= 3 points")
    xs = np.array([x for x, _ in pts])
    ys = np.array([y for _, y in pts])
    if np.ptp(xs) == 0:
        raise DegenerateX("all eta_e values are identical")
    design = np.vstack([xs, np.ones_like(xs)]).T
    coef, *_ = np.linalg.lstsq(design, ys, rcond=None)
    yhat = design @ coef
    ss_res = float(np.sum((ys - yhat) ** 2))
    ss_tot = float(np.sum((ys - ys.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    dof = max(len(pts) - 2, 1)
    sigma2 = ss_res / dof
    stderr = math.sqrt(sigma2 / float(np.sum((xs - xs.mean()) ** 2)))
    return {
        "slope": float(coef[0]),
        "intercept": float(coef[1]),
        "r2": r2,
        "stderr_slope": stderr,
        "n": len(pts),
    }


def read_profile_csv(path, meta=None):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header[:2] != ["omega_r_hz", "signal"]:
            raise ValueError(f"unexpected profile header {header!r}")
        points = [(float(row[0]), float(row[1])) for row in reader]
    return DnpProfile(points=tuple(points), meta=dict(meta or {}))


def write_profile_csv(profile, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["omega_r_hz", "signal"])
        for w, s in profile.points:
            writer.writerow([f"{w:.12g}", f"{s:.12g}"])


def fit_result_to_dict(result):
    return {
        "amplitude": result.amplitude,
        "kappa_e_fit": result.kappa_e_fit,
        "eps1_fit": result.eps1_fit,
        "eps2_fit": result.eps2_fit,
        "omega_opt": result.omega_opt,
        "residual_norm": result.residual_norm,
        "extrapolated": result.extrapolated,
        "iterations": result.iterations,
        "cost": result.cost,
        "covariance": [[float(v) for v in row] for row in result.covariance],
    }


def write_fit_json(result, path):
    with open(path, "w") as fh:
        json.dump(fit_result_to_dict(result), fh, indent=2, sort_keys=True)
        fh.write("\n")
