"""System definitions: nonlinear two-time-scale systems over the expression
DSL, symbolic Jacobians, scalar-parameter Jacobian hulls, and the built-in
nonlinear-spring demo system."""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, field

import numpy as np

from .certify import MatrixPolytope
from .errors import (DimensionMismatch, NewtonFailure, NotScalarParameterized,
                     SingularDz)
from .expressions import (Const, compile_expr, diff_expr, evaluate, free_vars,
                          parse_expr)


def state_names(n_r, n_f):
    return [f"x{i + 1}" for i in range(n_r)] + [f"z{j + 1}" for j in range(n_f)]


@dataclass
class NonlinearSPSystem:
    """dx/dt = f(x, z), eps * dz/dt = g(x, z), on a box state-space omega.

    f and g entries are DSL expressions (strings or ASTs) over the variables
    x1..x{n_r}, z1..z{n_f}. omega maps each variable name to a finite
    (lo, hi) interval; its invariance is the caller's responsibility.
    """

    n_r: int
    n_f: int
    f: list
    g: list
    eps: float = 1.0
    omega: dict = field(default_factory=dict)

    def __post_init__(self):
        names = set(state_names(self.n_r, self.n_f))
        self.f = [parse_expr(e) if isinstance(e, str) else e for e in self.f]
        self.g = [parse_expr(e) if isinstance(e, str) else e for e in self.g]
        if len(self.f) != self.n_r or len(self.g) != self.n_f:
            raise DimensionMismatch(
                f"need {self.n_r} f entries and {self.n_f} g entries")
        for e in itertools.chain(self.f, self.g):
            unknown = free_vars(e) - names
            if unknown:
                raise ValueError(f"undeclared variable(s): {sorted(unknown)}")
        if not self.omega:
            self.omega = {name: (-1.0, 1.0) for name in names}
        for name in state_names(self.n_r, self.n_f):
            lo, hi = self.omega[name]
            if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
                raise ValueError(f"omega interval for {name} must be finite and nonempty")
        origin = {name: 0.0 for name in names}
        rhs0 = [evaluate(e, origin) for e in itertools.chain(self.f, self.g)]
        if max(abs(v) for v in rhs0) > 1e-12:
            warnings.warn("system does not vanish at the origin; "
                          "dominance theory assumes a shifted equilibrium there")
        self._jac_asts = None
        self._compiled = {}

    # -- symbolic machinery -------------------------------------------------

    @property
    def names(self):
        return state_names(self.n_r, self.n_f)

    @property
    def dim(self):
        return self.n_r + self.n_f

    def jacobian_asts(self):
        """Symbolic partials: dict of blocks 'A','B','C','D' -> 2-D lists."""
        if self._jac_asts is None:
            xs = self.names[:self.n_r]
            zs = self.names[self.n_r:]
            self._jac_asts = {
                "A": [[diff_expr(e, v) for v in xs] for e in self.f],
                "B": [[diff_expr(e, v) for v in zs] for e in self.f],
                "C": [[diff_expr(e, v) for v in xs] for e in self.g],
                "D": [[diff_expr(e, v) for v in zs] for e in self.g],
            }
        return self._jac_asts

    def compiled(self, key, asts):
        """Cache of compiled (vectorized) functions of the full state tuple."""
        if key not in self._compiled:
            names = self.names
            self._compiled[key] = [compile_expr(a, names) for a in asts]
        return self._compiled[key]

    def in_omega(self, point):
        point = np.asarray(point, dtype=float)
        return all(self.omega[name][0] <= v <= self.omega[name][1]
                   for name, v in zip(self.names, point))

    def omega_center(self):
        return np.array([(self.omega[n][0] + self.omega[n][1]) / 2 for n in self.names])


@dataclass
class LinearSPSystem:
    """dx/dt = A x + B z, eps * dz/dt = C x + D z. A and D may be matrix
    polytopes (vertex lists); B and C are fixed."""

    A: object
    B: np.ndarray
    C: np.ndarray
    D: object
    eps: float = 1.0
    omega: dict = None

    def __post_init__(self):
        if not isinstance(self.A, MatrixPolytope):
            self.A = MatrixPolytope([self.A])
        if not isinstance(self.D, MatrixPolytope):
            self.D = MatrixPolytope([self.D])
        self.B = np.atleast_2d(np.asarray(self.B, dtype=float))
        self.C = np.atleast_2d(np.asarray(self.C, dtype=float))
        n_r, n_f = self.A.n, self.D.n
        if self.B.shape != (n_r, n_f) or self.C.shape != (n_f, n_r):
            raise DimensionMismatch(
                f"B{self.B.shape} / C{self.C.shape} inconsistent with n_r={n_r}, n_f={n_f}")
        if self.omega is None:
            self.omega = {name: (-1.0, 1.0) for name in self.names}

    @property
    def n_r(self):
        return self.A.n

    @property
    def n_f(self):
        return self.D.n

    @property
    def dim(self):
        return self.n_r + self.n_f

    @property
    def names(self):
        return state_names(self.n_r, self.n_f)

    def fixed_blocks(self):
        if len(self.A.vertices) > 1 or len(self.D.vertices) > 1:
            raise ValueError("system has polytopic blocks; pick a vertex explicitly")
        return self.A.vertices[0], self.B, self.C, self.D.vertices[0]


def jacobians(sys, point):
    """Evaluate the four Jacobian blocks of (f, g) at a state point."""
    point = np.asarray(point, dtype=float)
    if point.shape != (sys.dim,):
        raise DimensionMismatch(f"point of shape {point.shape}, expected ({sys.dim},)")
    if not sys.in_omega(point):
        warnings.warn("Jacobian requested outside the declared state-space box")
    env = dict(zip(sys.names, point))
    blocks = []
    for key in ("A", "B", "C", "D"):
        rows = sys.jacobian_asts()[key]
        blocks.append(np.array([[float(evaluate(e, env)) for e in row] for row in rows])
                      .reshape(len(rows), len(rows[0]) if rows else 0))
    A, B, C, D = blocks
    A = A.reshape(sys.n_r, sys.n_r)
    B = B.reshape(sys.n_r, sys.n_f)
    C = C.reshape(sys.n_f, sys.n_r)
    D = D.reshape(sys.n_f, sys.n_f)
    return A, B, C, D


def _varying_entries(sys):
    """Positions of non-constant Jacobian entries, as (block, i, j, ast)."""
    out = []
    for key, rows in sys.jacobian_asts().items():
        for i, row in enumerate(rows):
            for j, e in enumerate(row):
                if free_vars(e):
                    out.append((key, i, j, e))
    return out


def sample_entry_range(sys, entry_ast, grid_n=1000):
    """Min/max of a Jacobian entry over a grid on omega. A sampled range is
    a heuristic, not a proven enclosure."""
    vars_used = sorted(free_vars(entry_ast))
    axes = [np.linspace(*sys.omega[v], max(2, int(round(grid_n ** (1 / len(vars_used))))))
            for v in vars_used]
    grids = np.meshgrid(*axes) if len(axes) > 1 else [axes[0]]
    env = {v: g.ravel() for v, g in zip(vars_used, grids)}
    vals = evaluate(entry_ast, env)
    return float(np.min(vals)), float(np.max(vals))


def scalar_hull(sys, nonlinearity_entry=None, bounds=None, grid_n=1000):
    """Two-vertex hull of reduced-model matrices A0 = A - B D^{-1} C when
    exactly one entry of the A block varies with the state.

    bounds is the [lo, hi] range of the varying entry; when omitted it is
    estimated by grid sampling over omega (heuristic, reported as a warning).
    """
    varying = _varying_entries(sys)
    if not varying:
        A, B, C, D = jacobians(sys, sys.omega_center())
        return MatrixPolytope([A - B @ np.linalg.inv(D) @ C])
    if len(varying) > 1:
        where = [(k, i, j) for k, i, j, _ in varying]
        raise NotScalarParameterized(f"multiple varying Jacobian entries: {where}")
    block, i, j, entry_ast = varying[0]
    if block != "A":
        raise NotScalarParameterized(
            f"varying entry sits in block {block}; the hull of A0 matrices "
            "is only affine in an entry of A")
    if nonlinearity_entry is not None and tuple(nonlinearity_entry) != (i, j):
        raise NotScalarParameterized(
            f"declared entry {tuple(nonlinearity_entry)} but entry ({i}, {j}) varies")
    if bounds is None:
        bounds = sample_entry_range(sys, entry_ast, grid_n)
        warnings.warn(f"entry bounds {bounds} obtained by grid sampling over "
                      "omega; sampled, not proven")
    lo, hi = bounds
    A, B, C, D = jacobians(sys, sys.omega_center())
    L0 = np.linalg.inv(D) @ C
    verts = []
    for val in (lo, hi):
        Av = A.copy()
        Av[i, j] = val
        verts.append(Av - B @ L0)
    return MatrixPolytope(verts)


def a_block_hull(sys, bounds=None, grid_n=1000):
    """Two-vertex hull of raw A blocks (not reduced) for the scalar case;
    companion to scalar_hull for the eps-threshold search."""
    varying = _varying_entries(sys)
    A, B, C, D = jacobians(sys, sys.omega_center())
    if not varying:
        return MatrixPolytope([A]), B, C, D
    if len(varying) > 1 or varying[0][0] != "A":
        raise NotScalarParameterized("A-block scalar parameterization required")
    _, i, j, entry_ast = varying[0]
    if bounds is None:
        bounds = sample_entry_range(sys, entry_ast, grid_n)
    verts = []
    for val in bounds:
        Av = A.copy()
        Av[i, j] = val
        verts.append(Av)
    return MatrixPolytope(verts), B, C, D


def solve_manifold(sys, x, z0=None, tol=1e-12, max_iter=100):
    """Solve g(x, z) = 0 for z by damped Newton (step halving on residual
    increase, up to 30 halvings)."""
    x = np.asarray(x, dtype=float)
    z = np.zeros(sys.n_f) if z0 is None else np.asarray(z0, dtype=float).copy()
    g_fns = sys.compiled("g", sys.g)
    d_fns = sys.compiled("D", [e for row in sys.jacobian_asts()["D"] for e in row])

    def g_at(z):
        args = list(x) + list(z)
        return np.array([fn(*args) for fn in g_fns], dtype=float)

    def D_at(z):
        args = list(x) + list(z)
        return np.array([fn(*args) for fn in d_fns], dtype=float).reshape(sys.n_f, sys.n_f)

    res = g_at(z)
    for _ in range(max_iter):
        nrm = np.linalg.norm(res)
        if nrm <= tol:
            return z
        D = D_at(z)
        if abs(np.linalg.det(D)) < 1e-14 * max(1.0, np.linalg.norm(D)) ** sys.n_f:
            raise SingularDz(f"fast Jacobian singular at z={z}")
        step = np.linalg.solve(D, res)
        alpha = 1.0
        for _ in range(30):
            z_new = z - alpha * step
            res_new = g_at(z_new)
            if np.linalg.norm(res_new) < nrm:
                break
            alpha *= 0.5
        else:
            raise NewtonFailure(f"no descent from z={z} (residual {nrm:.2e})")
        z, res = z_new, res_new
    if np.linalg.norm(res) <= tol:
        return z
    raise NewtonFailure(f"Newton did not reach tolerance; residual {np.linalg.norm(res):.2e}")


def reduced_manifold_slope(sys, x):
    """Slope dh/dx of the slow manifold z = h(x): -D^{-1} C evaluated at
    (x, h(x))."""
    x = np.asarray(x, dtype=float)
    z = solve_manifold(sys, x)
    _, _, C, D = jacobians(sys, np.concatenate([x, z]))
    if abs(np.linalg.det(D)) < 1e-14 * max(1.0, np.linalg.norm(D)) ** sys.n_f:
        raise SingularDz(f"fast Jacobian singular on the manifold at x={x}")
    return -np.linalg.solve(D, C)


# -- built-in demo system ---------------------------------------------------

def nonlinear_spring_system(eps=0.01, box=3.0):
    """Mass with a saturating spring force and a fast first-order filter on
    the velocity feedback: x1' = x2, x2' = 7 tanh(x1) - 5 x1 - 5 z,
    eps z' = x2 - z."""
    names = state_names(2, 1)
    return NonlinearSPSystem(
        n_r=2, n_f=1,
        f=["x2", "7*tanh(x1) - 5*x1 - 5*z1"],
        g=["x2 - z1"],
        eps=eps,
        omega={n: (-box, box) for n in names},
    )


def nonlinear_spring_certificate():
    """Verified rank-1 dominance certificate for the demo system."""
    from .certify import SPDominanceCertificate
    return SPDominanceCertificate(
        P_r=[[-5.1987, 3.6260], [3.6260, 6.1987]],
        P_f=[[1.0]],
        lambda_r=2.0, lambda_f=0.5,
        sigma_r=0.01, sigma_f=1.0,
        p=1,
    )


SPRING_SLOPE_BOUNDS = (-5.0, 2.0)  # range of d/dx1 [7 tanh(x1) - 5 x1]

SPRING_INITIAL_CONDITIONS = (
    (1.0, 1.0, 1.0),
    (-1.0, 2.0, 1.0),
    (-0.5, -2.0, 1.0),
    (-2.0, -0.5, 1.0),
    (0.25, 0.5, -1.0),
)
