"""Dense symmetric linear algebra for small matrices.

Eigenvalues are computed with cyclic Jacobi rotations: the matrices in this
package are small (a few dozen rows at most) and symmetric, where Jacobi is
unconditionally stable and needs no external solver.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

ASYMMETRY_WARN_THRESHOLD = 1e-8


class SymMatrix:
    """Real symmetric matrix. Input is symmetrized as (M + M^T)/2 on
    construction; asymmetry beyond a relative threshold triggers a warning
    (products like P*A + A^T*P are symmetric only up to roundoff)."""

    __slots__ = ("a",)

    def __init__(self, entries, asym_warn=ASYMMETRY_WARN_THRESHOLD):
        m = np.asarray(entries, dtype=float)
        if m.ndim == 0:
            m = m.reshape(1, 1)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {m.shape}")
        if m.shape[0] < 1:
            raise ValueError("matrix must be at least 1x1")
        scale = max(1.0, float(np.abs(m).max()))
        asym = float(np.abs(m - m.T).max()) / scale
        if asym > asym_warn:
            warnings.warn(f"symmetrizing matrix with relative asymmetry {asym:.3e}",
                          stacklevel=2)
        self.a = 0.5 * (m + m.T)
        self.a.flags.writeable = False

    @property
    def n(self):
        return self.a.shape[0]

    def __repr__(self):
        return f"SymMatrix({self.a.tolist()})"

    def __array__(self, dtype=None, copy=None):
        return np.array(self.a, dtype=dtype)


@dataclass(frozen=True)
class Inertia:
    neg: int
    zero: int
    pos: int

    def as_tuple(self):
        return (self.neg, self.zero, self.pos)


def _as_sym(s):
    return s if isinstance(s, SymMatrix) else SymMatrix(s)


def jacobi_eig(S, tol_factor=1e-14, max_sweeps=100):
    """Cyclic Jacobi eigen-decomposition of a SymMatrix.

    Returns (eigenvalues ascending, eigenvectors as columns). Converged when
    the off-diagonal Frobenius norm drops below tol_factor * ||S||_F.
    """
    S = _as_sym(S)
    a = S.a.copy()
    n = a.shape[0]
    v = np.eye(n)
    norm_s = np.linalg.norm(a)
    if n == 1 or norm_s == 0.0:
        return a.diagonal().copy(), v

    threshold = tol_factor * norm_s
    for _ in range(max_sweeps):
        off = np.linalg.norm(a - np.diag(a.diagonal()))
        if off <= threshold:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= threshold / (n * n):
                    continue
                theta = 0.5 * (a[q, q] - a[p, p]) / apq
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                if theta == 0.0:
                    t = 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                # rotate rows/columns p and q
                rp = a[p, :].copy()
                rq = a[q, :].copy()
                a[p, :] = c * rp - s * rq
                a[q, :] = s * rp + c * rq
                cp = a[:, p].copy()
                cq = a[:, q].copy()
                a[:, p] = c * cp - s * cq
                a[:, q] = s * cp + c * cq
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    vals = a.diagonal().copy()
    order = np.argsort(vals, kind="stable")
    return vals[order], v[:, order]


def sym_eigvals(S):
    """Eigenvalues of a symmetric matrix, ascending."""
    vals, _ = jacobi_eig(S)
    return vals


def inertia(S, zero_tol=None):
    """Counts of negative / zero / positive eigenvalues.

    zero_tol defaults to 1e-9 * max(1, spectral radius); the matrices handled
    here span magnitudes from 1e-2 to 1e1, so the tolerance tracks scale.
    """
    vals = sym_eigvals(S)
    if zero_tol is None:
        zero_tol = 1e-9 * max(1.0, float(np.abs(vals).max()))
    if zero_tol < 0:
        raise ValueError("zero_tol must be nonnegative")
    neg = int(np.sum(vals < -zero_tol))
    pos = int(np.sum(vals > zero_tol))
    return Inertia(neg=neg, zero=len(vals) - neg - pos, pos=pos)


def nsd_margin(S):
    """Largest eigenvalue of S. S is negative semidefinite iff the result
    is <= 0; a negative value is the strict feasibility margin."""
    return float(sym_eigvals(S)[-1])
