"""Exact swept-Hamiltonian propagation and the sequential-LZ Galton board.

The propagator is the numerical ground truth: density-matrix evolution under
piecewise-constant H(omega_mw(t)) with exact per-step exponentiation
U = exp(-i*H*dt) (H in the package's Hz-number convention, under which an
isolated two-level crossing reproduces exp(-2*pi*(eps/2)^2/velocity)).  The
chirp profile repeats identically every sweep, so the one-sweep unitary is
assembled once and reused; electron repolarization is applied at each sweep
start and preserves the nuclear reduced state exactly.

The Galton board is the stochastic counterpart: a walker on the level branches
crosses each located anti-crossing in sweep order, continuing diabatically
with probability T(gap) and transferring with 1 - T(gap).  Exact forward flow
and Monte Carlo (counter-based Philox, reproducible under any scheduling) are
both available.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .cascade import SX, SZ, P0, P1, _embed, analytic_crossings, build_hamiltonian, tilt_angle
from .errors import StepTooCoarse
from .ratchet import tunneling_probability

_EIGH_CHUNK = 2048  # bounds memory of the batched eigendecomposition


@dataclass(frozen=True)
class PropagationPolicy:
    steps_per_sweep: int = 1000
    reset_mode: str = "full"  # "full" or "partial"
    p_e: float = 1.0  # electron polarization fraction for partial resets
    sweeps: int = 1
    refine_near_lacs: bool = True  # 4x step density within +-20*gap of each LAC

    def __post_init__(self):
        if self.steps_per_sweep < 1:
            raise ValueError("steps_per_sweep must be >= 1")
        if self.reset_mode not in ("full", "partial"):
            raise ValueError("reset_mode must be 'full' or 'partial'")
        if not 0.0 <= self.p_e <= 1.0:
            raise ValueError("p_e must lie in [0, 1]")
        if self.sweeps < 1:
            raise ValueError("sweeps must be >= 1")


@dataclass(frozen=True)
class NuclearPolarizationRecord:
    """Per-sweep nuclear expectations, +-1 normalized.

    iz[s, j] is <sigma_z> of nucleus j after sweep s+1; iz_adapted[s, j] is the
    manifold-adapted bookkeeping <P0 x sigma_z + P1 x sigma_z'> which follows
    the tilted quantization axis in the m_s = +1 manifold.
    """

    iz: np.ndarray
    iz_adapted: np.ndarray
    policy: PropagationPolicy = field(repr=False, default=None)

    def __post_init__(self):
        if np.any(np.abs(self.iz) > 1 + 1e-9) or np.any(np.abs(self.iz_adapted) > 1 + 1e-9):
            raise ValueError("nuclear expectations must lie in [-1, 1]")


def _electron_reset_state(policy):
    if policy.reset_mode == "full":
        return P0.copy()
    # partial: polarized fraction p_e into m_s = 0, remainder maximally mixed
    return policy.p_e * P0 + (1.0 - policy.p_e) * 0.5 * np.eye(2, dtype=complex)


def _reset(rho, n_dim, rho_e):
    rho_n = rho[:n_dim, :n_dim] + rho[n_dim:, n_dim:]  # partial trace over electron
    return np.kron(rho_e, rho_n)


def _sweep_edges(system, drive, sweep, policy):
    """Omega_mw step edges for one sweep, refined near the anti-crossings."""
    lo = sweep.f0 - sweep.bandwidth / 2.0
    hi = sweep.f0 + sweep.bandwidth / 2.0
    base = np.linspace(lo, hi, policy.steps_per_sweep + 1)
    if not policy.refine_near_lacs or system.n_nuclei == 0:
        return base
    regions = []
    for entry in analytic_crossings(system, drive):
        if entry.gap <= 0:
            continue
        a, b = entry.location - 20.0 * entry.gap, entry.location + 20.0 * entry.gap
        if b >= lo and a <= hi:
            regions.append((a, b))
    if not regions:
        return base
    edges = [base[0]]
    for k in range(len(base) - 1):
        wa, wb = base[k], base[k + 1]
        if any(wb > a and wa < b for a, b in regions):
            edges.extend(np.linspace(wa, wb, 5)[1:])
        else:
            edges.append(wb)
    return np.asarray(edges)


def sweep_unitary(system, drive, sweep, policy):
    """One-sweep propagator in the electron (x) nuclear product basis.

    Piecewise-constant H(omega_mw(t)), each slice exponentiated exactly via
    eigendecomposition; slices within 20 gaps of a predicted crossing are
    subdivided 4x.
    """
    return _sweep_unitary(system, drive, sweep, policy)


def _sweep_unitary(system, drive, sweep, policy):
    edges = _sweep_edges(system, drive, sweep, policy)
    mids = 0.5 * (edges[:-1] + edges[1:])
    dts = np.diff(edges) / sweep.sweep_velocity  # seconds per step
    dim = 2 * 2**system.n_nuclei
    unitaries = np.empty((len(mids), dim, dim), dtype=complex)
    for start in range(0, len(mids), _EIGH_CHUNK):
        stop = min(start + _EIGH_CHUNK, len(mids))
        hs = np.stack([build_hamiltonian(system, drive, w) for w in mids[start:stop]])
        evals, vecs = np.linalg.eigh(hs)
        max_phase = np.max(np.abs(evals) * dts[start:stop, None])
        if max_phase > 0.5:
            raise StepTooCoarse(
                f"per-step phase {max_phase:.3f} rad exceeds 0.5; increase steps_per_sweep"
            )
        phases = np.exp(-1j * evals * dts[start:stop, None])
        unitaries[start:stop] = np.einsum("sij,sj,skj->sik", vecs, phases, vecs.conj())
    # ordered product U_{n-1}...U_0 by pairwise reduction
    while unitaries.shape[0] > 1:
        m = unitaries.shape[0]
        even = m - (m % 2)
        pairs = np.matmul(unitaries[1:even:2], unitaries[0:even:2])
        unitaries = np.concatenate([pairs, unitaries[even:]]) if m % 2 else pairs
    return unitaries[0]


def propagate_sweep(system, drive, sweep, policy, initial_nuclear=None):
    """Propagate `policy.sweeps` repetitions and record nuclear polarization.

    initial_nuclear: optional 2^N x 2^N nuclear density matrix (defaults to
    maximally mixed).  The electron is reset at each sweep start.
    """
    N = system.n_nuclei
    if N > system.exact_cap:
        raise ValueError(f"N = {N} exceeds exact-propagation cap {system.exact_cap}")
    n_dim = 2**N
    if initial_nuclear is None:
        rho_n = np.eye(n_dim, dtype=complex) / n_dim
    else:
        rho_n = np.asarray(initial_nuclear, dtype=complex)
        if rho_n.shape != (n_dim, n_dim):
            raise ValueError(f"initial_nuclear must be {n_dim}x{n_dim}")
        if abs(np.trace(rho_n).real - 1.0) > 1e-9:
            raise ValueError("initial_nuclear must have unit trace")

    u_sweep = _sweep_unitary(system, drive, sweep, policy)
    rho_e = _electron_reset_state(policy)
    rho = np.kron(rho_e, rho_n)

    id_e = np.eye(2, dtype=complex)
    iz_ops, adapted_ops = [], []
    for j in range(N):
        szj = _embed(N, j, SZ)
        alpha = tilt_angle(system, j)
        szpj = _embed(N, j, math.cos(alpha) * SZ + math.sin(alpha) * SX)
        iz_ops.append(np.kron(id_e, szj))
        adapted_ops.append(np.kron(P0, szj) + np.kron(P1, szpj))

    iz = np.empty((policy.sweeps, N))
    iz_adapted = np.empty((policy.sweeps, N))
    for s in range(policy.sweeps):
        rho = _reset(rho, n_dim, rho_e)
        rho = u_sweep @ rho @ u_sweep.conj().T
        trace = np.trace(rho).real
        if abs(trace - 1.0) > 1e-10:
            raise RuntimeError(f"trace drifted to {trace!r} at sweep {s}")
        for j in range(N):
            iz[s, j] = np.trace(rho @ iz_ops[j]).real
            iz_adapted[s, j] = np.trace(rho @ adapted_ops[j]).real
    return NuclearPolarizationRecord(iz=iz, iz_adapted=iz_adapted, policy=policy)


def lz_reference_probability(eps, sweep_velocity):
    """Textbook Landau-Zener diabatic-passage probability exp(-2*pi*(eps/2)^2/v)."""
    if sweep_velocity <= 0:
        raise ValueError("sweep_velocity must be positive")
    eps = np.asarray(eps, dtype=float)
    return np.exp(-2.0 * math.pi * (eps / 2.0) ** 2 / sweep_velocity)


def board_labels(n_nuclei):
    """Walker node labels: m_s = 0 configurations first, then tilted m_s = +1."""
    def bits(i):
        return "".join(
            "u" if (i >> (n_nuclei - 1 - k)) & 1 == 0 else "d" for k in range(n_nuclei)
        )

    plain = [bits(i) for i in range(2**n_nuclei)]
    return plain + [b + "'" for b in plain]


def galton_board_sweep(cascade, omega_r, bandwidth, initial, trials=None, seed=0, law="standard"):
    """Walk the anti-crossing cascade once; return the final branch distribution.

    initial: mapping label -> probability or an array over the node order of
    board_labels(N).  trials=None runs the exact forward-probability flow
    (no sampling noise); trials >= 1 runs that many Monte Carlo walkers.
    """
    entries = sorted(cascade, key=lambda e: e.location)
    if not entries:
        raise ValueError("cascade has no crossings")
    n_nuclei = len(entries[0].branch_label.replace("'", "").split(">")[0])
    labels = board_labels(n_nuclei)
    n_half = 2**n_nuclei
    if isinstance(initial, dict):
        p = np.zeros(2 * n_half)
        for key, val in initial.items():
            p[labels.index(key)] = val
    else:
        p = np.asarray(initial, dtype=float).copy()
        if p.shape != (2 * n_half,):
            raise ValueError(f"initial must have {2 * n_half} entries")
    if abs(p.sum() - 1.0) > 1e-9 or np.any(p < 0):
        raise ValueError("initial must be a probability distribution")

    hops = [
        (entry.i0, n_half + entry.i1, float(tunneling_probability(entry.gap, omega_r, bandwidth, law)))
        for entry in entries
    ]

    if trials is None:
        for a, b, t in hops:
            pa, pb = p[a], p[b]
            p[a] = t * pa + (1.0 - t) * pb
            p[b] = t * pb + (1.0 - t) * pa
        out = p
    else:
        if trials < 1:
            raise ValueError("trials must be >= 1")
        rng = np.random.Generator(np.random.Philox(seed))
        pos = rng.choice(2 * n_half, size=trials, p=p)
        for a, b, t in hops:
            u = rng.random(trials)
            at_a = pos == a
            at_b = pos == b
            hop = u < (1.0 - t)
            pos[at_a & hop] = b
            pos[at_b & hop] = a
        out = np.bincount(pos, minlength=2 * n_half) / trials
    return {label: out[i] for i, label in enumerate(labels)}


def board_net_polarization(distribution):
    """Net nuclear <sigma_z>-like polarization of a board distribution (N = 1)."""
    return (
        distribution["u"] + distribution["u'"] - distribution["d"] - distribution["d'"]
    )


def export_record_csv(record, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["sweep_index", "nucleus_index", "iz_expectation"])
        sweeps, n = record.iz.shape
        for s in range(sweeps):
            for j in range(n):
                writer.writerow([s, j, f"{record.iz[s, j]:.12g}"])
