"""Two-time-scale decoupling for linear singularly perturbed systems.

Solves the algebraic coupling equations for L and H by fixed-point
iteration (the time-invariant case), assembles the exact block-diagonalizing
transformation T, and bisects for a certified upper bound on the
perturbation parameter.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .certify import MatrixPolytope, block_conditions
from .errors import (DimensionMismatch, InfeasibleAtFloor, NoConvergence,
                     NonpositiveEps, SingularD)

CHANG_RESIDUAL_TOL = 1e-10
RCOND_MIN = 1e-12


@dataclass(frozen=True)
class ChangDecoupling:
    eps: float
    L: np.ndarray
    H: np.ndarray
    T: np.ndarray
    T_inv: np.ndarray
    slow_block: np.ndarray
    fast_block: np.ndarray


def _blocks(A, B, C, D):
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    C = np.atleast_2d(np.asarray(C, dtype=float))
    D = np.atleast_2d(np.asarray(D, dtype=float))
    n_r = A.shape[0]
    n_f = D.shape[0]
    if A.shape != (n_r, n_r) or B.shape != (n_r, n_f) \
            or C.shape != (n_f, n_r) or D.shape != (n_f, n_f):
        raise DimensionMismatch(
            f"inconsistent blocks: A{A.shape} B{B.shape} C{C.shape} D{D.shape}")
    return A, B, C, D


def _inv_checked(D):
    rcond = 1.0 / np.linalg.cond(D)
    if not np.isfinite(rcond) or rcond < RCOND_MIN:
        raise SingularD(f"fast block numerically singular (rcond={rcond:.2e})")
    return np.linalg.inv(D), rcond


def reduced_model(A, B, C, D):
    """Zero-perturbation quantities: L0 = D^{-1} C, H0 = B D^{-1},
    A0 = A - B L0 (the slow/reduced system matrix)."""
    A, B, C, D = _blocks(A, B, C, D)
    D_inv, _ = _inv_checked(D)
    L0 = D_inv @ C
    H0 = B @ D_inv
    A0 = A - B @ L0
    return L0, H0, A0


def chang_residuals(A, B, C, D, L, H, eps):
    """Frobenius norms of the two algebraic coupling equations."""
    r_l = np.linalg.norm(D @ L - C - eps * L @ (A - B @ L))
    r_h = np.linalg.norm(H @ D - B + eps * H @ L @ B - eps * (A - B @ L) @ H)
    return r_l, r_h


def solve_chang_lti(A, B, C, D, eps, tol=1e-12, max_iter=200):
    """Solve the time-invariant coupling equations for (L, H).

    Fixed-point iteration L <- D^{-1}(C + eps*L(A - B L)) from L = D^{-1}C,
    then the analogous iteration for H from H = B D^{-1}. Divergence (update
    norm growing for 5 consecutive iterations) signals that eps is too large
    for the contraction.
    """
    if eps <= 0:
        raise NonpositiveEps(f"eps must be positive, got {eps}")
    A, B, C, D = _blocks(A, B, C, D)
    D_inv, _ = _inv_checked(D)

    def iterate(x0, step, label):
        x = x0
        prev_update = np.inf
        growth = 0
        for _ in range(max_iter):
            x_new = step(x)
            update = np.linalg.norm(x_new - x)
            if not np.isfinite(update):
                raise NoConvergence(f"{label} iteration diverged (eps={eps})")
            if update <= tol:
                return x_new
            growth = growth + 1 if update > prev_update else 0
            if growth >= 5:
                raise NoConvergence(
                    f"{label} iteration diverging for 5 steps (eps={eps} too large)")
            prev_update = update
            x = x_new
        raise NoConvergence(f"{label} iteration did not converge in {max_iter} steps")

    L = iterate(D_inv @ C, lambda L: D_inv @ (C + eps * L @ (A - B @ L)), "L")
    H = iterate(B @ D_inv,
                lambda H: (B - eps * H @ L @ B + eps * (A - B @ L) @ H) @ D_inv, "H")

    r_l, r_h = chang_residuals(A, B, C, D, L, H, eps)
    scale = max(1.0, np.linalg.norm(C), np.linalg.norm(B))
    if max(r_l, r_h) > CHANG_RESIDUAL_TOL * scale:
        raise NoConvergence(
            f"coupling-equation residuals too large: {r_l:.2e}, {r_h:.2e}")
    return L, H


def build_decoupling(A, B, C, D, eps):
    """Assemble the block-diagonalizing transformation at the given eps."""
    A, B, C, D = _blocks(A, B, C, D)
    L, H = solve_chang_lti(A, B, C, D, eps)
    n_r, n_f = A.shape[0], D.shape[0]
    I_r, I_f = np.eye(n_r), np.eye(n_f)
    T = np.block([[I_r, eps * H], [-L, I_f - eps * L @ H]])
    # unit-determinant closed-form inverse
    T_inv = np.block([[I_r - eps * H @ L, -eps * H], [L, I_f]])
    return ChangDecoupling(eps=eps, L=L, H=H, T=T, T_inv=T_inv,
                           slow_block=A - B @ L,
                           fast_block=D / eps + L @ B)


def full_system_matrix(A, B, C, D, eps):
    """System matrix of the coupled dynamics in the original coordinates."""
    A, B, C, D = _blocks(A, B, C, D)
    return np.block([[A, B], [C / eps, D / eps]])


def epsilon_star(A_polytope, B, C, D_polytope, cert, eps_max=1.0,
                 bisect_steps=60, eps_floor=1e-12, check_points=16):
    """Bisect for the largest eps at which the proof-level block conditions
    are feasible at every (A, D) vertex pair.

    Bisection assumes feasibility is monotone below the first feasible
    point; since that is not guaranteed, feasibility is re-verified at
    check_points log-spaced eps values below the result, with a warning on
    any violation. The returned value is a certified lower bound on
    feasibility at the tested points.
    """
    if not isinstance(A_polytope, MatrixPolytope):
        A_polytope = MatrixPolytope([A_polytope])
    if not isinstance(D_polytope, MatrixPolytope):
        D_polytope = MatrixPolytope([D_polytope])
    B = np.atleast_2d(np.asarray(B, dtype=float))
    C = np.atleast_2d(np.asarray(C, dtype=float))

    def feasible(eps):
        for A in A_polytope.vertices:
            for D in D_polytope.vertices:
                try:
                    L, _ = solve_chang_lti(A, B, C, D, eps)
                except NoConvergence:
                    return False
                slow, fast = block_conditions(cert, A, B, L, D, eps)
                if not (slow.feasible and fast.feasible):
                    return False
        return True

    if feasible(eps_max):
        eps_hat = eps_max
    else:
        if not feasible(eps_floor):
            raise InfeasibleAtFloor(
                f"block conditions infeasible even at eps={eps_floor}")
        lo, hi = eps_floor, eps_max
        for _ in range(bisect_steps):
            mid = 0.5 * (lo + hi)
            if feasible(mid):
                lo = mid
            else:
                hi = mid
        eps_hat = lo

    for eps in np.geomspace(eps_floor, eps_hat, check_points):
        if not feasible(eps):
            warnings.warn(f"feasibility not monotone: violation at eps={eps:.3e} "
                          f"below eps_hat={eps_hat:.3e}", stacklevel=2)
    return float(eps_hat)
