"""Trajectory-level validation of dominance certificates: cone-invariance
probing of trajectory differences and convergence bookkeeping."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .cone import ConeLocation, make_cone, quad_form
from .errors import ConfigError
from .integrate import Trajectory, default_step, detect_convergence, integrate_batch
from .linalg import SymMatrix
from .sampling import SplitMix64, sample_cone_pairs

THREADS_ENV = "DOMINION_THREADS"


def thread_count():
    val = os.environ.get(THREADS_ENV)
    if val:
        try:
            return max(1, int(val))
        except ValueError:
            raise ConfigError(f"{THREADS_ENV} must be an integer, got {val!r}")
    return os.cpu_count() or 1


def certificate_cone(cert):
    """Block-diagonal cone matrix combining the slow and fast certificate
    blocks."""
    n_r, n_f = cert.n_r, cert.n_f
    P = np.zeros((n_r + n_f, n_r + n_f))
    P[:n_r, :n_r] = cert.P_r.a
    P[n_r:, n_r:] = cert.P_f.a
    return make_cone(SymMatrix(P))


def monotone_probe(sys, cert, n_pairs=100, t_final=9.0, seed=42,
                   n_samples=200, h=None, tol=1e-9):
    """Empirically check strong monotonicity: pairs with initial difference
    inside the certificate cone are integrated and their difference is
    classified at n_samples times t > 0.

    Boundary hits at t > 0 are warnings, not failures: numerical
    trajectories may graze the cone boundary within tolerance.
    """
    cone_spec = certificate_cone(cert)
    box = [sys.omega[name] for name in sys.names]
    rng = SplitMix64(seed)
    pairs = sample_cone_pairs(rng, box, cone_spec, n_pairs, strict_interior=False)
    h = default_step(sys) if h is None else h
    sample_times = [k * t_final / n_samples for k in range(1, n_samples + 1)]

    x0s = np.array([p for pair in pairs for p in pair])

    workers = thread_count()
    chunks = np.array_split(np.arange(len(x0s)), min(workers, len(pairs)))

    def run(idx):
        times, states = integrate_batch(sys, x0s[idx], (0.0, t_final), h,
                                        record_times=sample_times)
        return times, states

    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, chunks))
    else:
        results = [run(idx) for idx in chunks]
    times = results[0][0]
    states = np.concatenate([r[1] for r in results], axis=1)

    P = cone_spec.P.a
    interior = boundary = outside = 0
    worst_margin = -np.inf
    for k in range(len(pairs)):
        diff = states[:, 2 * k, :] - states[:, 2 * k + 1, :]
        mask = times > 0.0
        d = diff[mask]
        q = np.einsum("ij,jk,ik->i", d, P, d)
        nrm2 = np.einsum("ij,ij->i", d, d)
        ratio = np.where(nrm2 > 0, q / np.maximum(nrm2, 1e-300), 0.0)
        band = tol
        interior += int(np.sum(ratio < -band))
        boundary += int(np.sum(np.abs(ratio) <= band))
        outside += int(np.sum(ratio > band))
        worst_margin = max(worst_margin, float(ratio.max()))

    total = interior + boundary + outside
    return {
        "pairs": len(pairs),
        "samples_per_pair": n_samples,
        "seed": seed,
        "t_final": t_final,
        "step": h,
        "classification_tol": tol,
        "interior": interior,
        "boundary_warnings": boundary,
        "outside": outside,
        "total_classifications": total,
        "worst_quadform_margin": worst_margin,
        "all_interior": outside == 0 and boundary == 0,
        "passed": outside == 0 and boundary <= 0.01 * total,
    }


def convergence_report(trajectories, equilibria, tol=1e-3):
    """Per-trajectory convergence verdicts against a list of equilibria."""
    out = []
    for traj in trajectories:
        match = detect_convergence(traj, equilibria, tol)
        out.append({
            "initial_state": [float(v) for v in traj.states[0]],
            "final_state": [float(v) for v in traj.final_state],
            "converged": match is not None,
            "matched_equilibrium": None if match is None else [float(v) for v in match],
            "tol": tol,
        })
    return out


def batch_trajectories(sys, x0s, t_final, h=None):
    """Integrate several initial conditions on a shared grid and wrap each
    as a Trajectory."""
    h = default_step(sys) if h is None else h
    times, states = integrate_batch(sys, np.asarray(x0s, dtype=float),
                                    (0.0, t_final), h)
    return [Trajectory(times, states[:, i, :], sys.eps, meta={"h": h, "method": "rk4"})
            for i in range(states.shape[1])]
