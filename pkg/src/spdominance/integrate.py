"""Fixed-step integration of stiff two-time-scale ODEs.

Classical 4th-order Runge-Kutta with the step tied to the perturbation
parameter (default h = min(1e-3, eps/20)) so the fast transient is
resolved. Batches of trajectories share the stepping loop and evaluate the
right-hand side vectorized across the batch.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, NonFinite
from .systems import LinearSPSystem, NonlinearSPSystem, jacobians

STATE_NORM_LIMIT = 1e12
CSV_MAX_ROWS = 100_000


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # (n_samples, dim)
    eps: float
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("sample times must be strictly increasing")
        if not np.all(np.isfinite(self.states)):
            raise NonFinite("trajectory contains non-finite states")

    @property
    def final_state(self):
        return self.states[-1]


@dataclass
class VariationalTrajectory:
    base: Trajectory
    delta_states: np.ndarray  # same sampling grid as base


def default_step(sys):
    return min(1e-3, sys.eps / 20.0)


def make_rhs(sys):
    """Vectorized right-hand side: maps states of shape (..., dim) to
    derivatives of the same shape."""
    if isinstance(sys, LinearSPSystem):
        A, B, C, D = sys.fixed_blocks()
        M = np.block([[A, B], [C / sys.eps, D / sys.eps]])

        def rhs(s):
            return s @ M.T

        return rhs

    if not isinstance(sys, NonlinearSPSystem):
        raise TypeError(f"cannot integrate {type(sys).__name__}")
    f_fns = sys.compiled("f", sys.f)
    g_fns = sys.compiled("g", sys.g)
    inv_eps = 1.0 / sys.eps
    dim = sys.dim

    def rhs(s):
        cols = [s[..., i] for i in range(dim)]
        shape = s.shape[:-1]
        parts = [np.broadcast_to(np.asarray(fn(*cols), dtype=float), shape)
                 for fn in f_fns]
        parts += [np.broadcast_to(np.asarray(fn(*cols), dtype=float), shape) * inv_eps
                  for fn in g_fns]
        return np.stack(parts, axis=-1)

    return rhs


def _check_finite(y, t):
    if not np.all(np.isfinite(y)) or np.abs(y).max() > STATE_NORM_LIMIT:
        raise NonFinite(f"state escaped at t={t:.6g}")


def rk4_run(rhs, y0, t_span, h, record_times=None):
    """Core stepping loop. Samples every step plus the endpoint, or only the
    nearest steps to record_times when given. Returns (times, states)."""
    t0, t1 = float(t_span[0]), float(t_span[1])
    if h <= 0 or t1 <= t0:
        raise ValueError("need h > 0 and t1 > t0")
    y = np.array(y0, dtype=float)
    n_steps = int(np.ceil((t1 - t0) / h - 1e-12))

    if record_times is not None:
        record_idx = set(int(round((t - t0) / h)) for t in record_times)
    else:
        record_idx = None

    times = [t0]
    samples = [y.copy()]
    t = t0
    for k in range(n_steps):
        step = min(h, t1 - t)
        k1 = rhs(y)
        k2 = rhs(y + 0.5 * step * k1)
        k3 = rhs(y + 0.5 * step * k2)
        k4 = rhs(y + step * k3)
        y = y + (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t = t1 if k == n_steps - 1 else t0 + (k + 1) * h
        _check_finite(y, t)
        if record_idx is None or (k + 1) in record_idx or k == n_steps - 1:
            times.append(t)
            samples.append(y.copy())
    return np.array(times), np.array(samples)


def integrate(sys, x0, t_span, h=None):
    """Integrate one trajectory of a nonlinear or linear SP system."""
    h = default_step(sys) if h is None else h
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (sys.dim,):
        raise DimensionMismatch(f"initial state of shape {x0.shape}, expected ({sys.dim},)")
    times, states = rk4_run(make_rhs(sys), x0, t_span, h)
    return Trajectory(times=times, states=states, eps=sys.eps,
                      meta={"h": h, "method": "rk4"})


def integrate_batch(sys, x0s, t_span, h=None, record_times=None):
    """Integrate many trajectories at once; states come back with shape
    (n_samples, n_traj, dim)."""
    h = default_step(sys) if h is None else h
    x0s = np.atleast_2d(np.asarray(x0s, dtype=float))
    if x0s.shape[1] != sys.dim:
        raise DimensionMismatch(f"initial states of shape {x0s.shape}")
    return rk4_run(make_rhs(sys), x0s, t_span, h, record_times=record_times)


def make_variational_rhs(sys):
    """Joint right-hand side on (base, delta) pairs: the delta half is driven
    by the Jacobian blocks evaluated at the current base state."""
    base_rhs = make_rhs(sys)
    dim = sys.dim
    if isinstance(sys, LinearSPSystem):
        def rhs(s):
            return np.concatenate([base_rhs(s[..., :dim]), base_rhs(s[..., dim:])],
                                  axis=-1)
        return rhs

    jac = sys.jacobian_asts()
    order = ["A", "B", "C", "D"]
    entry_fns = {key: sys.compiled("jac_" + key,
                                   [e for row in jac[key] for e in row])
                 for key in order}
    n_r, n_f = sys.n_r, sys.n_f
    inv_eps = 1.0 / sys.eps

    def rhs(s):
        base = s[..., :dim]
        delta = s[..., dim:]
        cols = [base[..., i] for i in range(dim)]
        shape = base.shape[:-1]

        def block(key, rows, cols_n):
            fns = entry_fns[key]
            vals = [np.broadcast_to(np.asarray(fn(*cols), dtype=float), shape)
                    for fn in fns]
            return vals  # row-major list of length rows*cols_n

        A = block("A", n_r, n_r)
        B = block("B", n_r, n_f)
        C = block("C", n_f, n_r)
        D = block("D", n_f, n_f)
        dx = delta[..., :n_r]
        dz = delta[..., n_r:]
        out_x = [sum(A[i * n_r + j] * dx[..., j] for j in range(n_r))
                 + sum(B[i * n_f + j] * dz[..., j] for j in range(n_f))
                 for i in range(n_r)]
        out_z = [(sum(C[i * n_r + j] * dx[..., j] for j in range(n_r))
                  + sum(D[i * n_f + j] * dz[..., j] for j in range(n_f))) * inv_eps
                 for i in range(n_f)]
        ddelta = np.stack(out_x + out_z, axis=-1)
        return np.concatenate([base_rhs(base), ddelta], axis=-1)

    return rhs


def integrate_variational(sys, x0, delta0, t_span, h=None):
    """Jointly integrate a trajectory and the variation along it."""
    h = default_step(sys) if h is None else h
    x0 = np.asarray(x0, dtype=float)
    delta0 = np.asarray(delta0, dtype=float)
    if x0.shape != (sys.dim,) or delta0.shape != (sys.dim,):
        raise DimensionMismatch("x0 and delta0 must have the system dimension")
    y0 = np.concatenate([x0, delta0])
    times, states = rk4_run(make_variational_rhs(sys), y0, t_span, h)
    base = Trajectory(times=times, states=states[:, :sys.dim], eps=sys.eps,
                      meta={"h": h, "method": "rk4"})
    return VariationalTrajectory(base=base, delta_states=states[:, sys.dim:])


def find_equilibria(sys, search_box=None, grid_n=5, tol=1e-10,
                    max_iter=100, merge_radius=1e-6):
    """Damped Newton on (f, g) = 0 from a grid of seeds; the eps scaling does
    not move zeros. Returns deduplicated equilibria with residual <= tol."""
    if search_box is None:
        search_box = [sys.omega[name] for name in sys.names]
    axes = [np.linspace(lo, hi, max(2, grid_n)) for lo, hi in search_box]
    rhs_unscaled = _unscaled_map(sys)

    found = []
    for seed in itertools.product(*axes):
        point = np.array(seed, dtype=float)
        point = _newton(sys, rhs_unscaled, point, tol, max_iter)
        if point is None:
            continue
        if any(np.linalg.norm(point - q) <= merge_radius for q in found):
            continue
        found.append(point)
    found.sort(key=lambda p: tuple(p))
    return found


def _unscaled_map(sys):
    fns = sys.compiled("f", sys.f) + sys.compiled("g", sys.g)

    def fun(point):
        return np.array([fn(*point) for fn in fns], dtype=float)

    return fun


def _newton(sys, fun, point, tol, max_iter):
    res = fun(point)
    for _ in range(max_iter):
        nrm = np.linalg.norm(res)
        if nrm <= tol:
            return point
        A, B, C, D = jacobians(sys, point)
        J = np.block([[A, B], [C, D]]) if sys.n_f else A
        try:
            step = np.linalg.solve(J, res)
        except np.linalg.LinAlgError:
            return None
        alpha = 1.0
        for _ in range(30):
            cand = point - alpha * step
            res_new = fun(cand)
            if np.linalg.norm(res_new) < nrm:
                break
            alpha *= 0.5
        else:
            return None
        point, res = cand, res_new
    return point if np.linalg.norm(res) <= tol else None


def detect_convergence(traj, equilibria, tol=1e-3):
    """Match the trajectory's final state to an equilibrium: the final state
    must lie within tol of it and the final-quarter samples must vary by
    less than tol. Returns the matched equilibrium or None."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    final = traj.final_state
    tail = traj.states[3 * len(traj.states) // 4:]
    if np.abs(tail - final).max() > tol:
        return None
    for q in equilibria:
        if np.linalg.norm(final - np.asarray(q)) <= tol:
            return np.asarray(q)
    return None


def write_trajectory_csv(traj, path, n_r=None):
    """CSV with header t,x1,...,z...; decimated to at most 100k rows; values
    at full double precision."""
    m, dim = traj.states.shape
    if n_r is None:
        n_r = dim
    names = [f"x{i + 1}" for i in range(n_r)] + [f"z{j + 1}" for j in range(dim - n_r)]
    stride = max(1, int(np.ceil(m / CSV_MAX_ROWS)))
    idx = list(range(0, m, stride))
    if idx[-1] != m - 1:
        idx.append(m - 1)
    with open(path, "w") as fh:
        fh.write("t," + ",".join(names) + "\n")
        for i in idx:
            row = [f"{traj.times[i]:.17g}"] + [f"{v:.17g}" for v in traj.states[i]]
            fh.write(",".join(row) + "\n")
