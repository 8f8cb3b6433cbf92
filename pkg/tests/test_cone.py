import numpy as np
import pytest

from spdominance.cone import ConeLocation, cone_locate, make_cone, quad_form
from spdominance.errors import DegenerateCone, DimensionMismatch, SingularP
from spdominance.linalg import SymMatrix, jacobi_eig, sym_eigvals

P_R = [[-5.1987, 3.6260], [3.6260, 6.1987]]


def test_make_cone_rank_one():
    assert make_cone(SymMatrix(np.diag([-1.0, 1.0]))).rank_k == 1


def test_make_cone_block_diag():
    P = np.zeros((3, 3))
    P[:2, :2] = P_R
    P[2, 2] = 1.0
    assert make_cone(SymMatrix(P)).rank_k == 1


def test_make_cone_singular_rejected():
    with pytest.raises(SingularP):
        make_cone(SymMatrix(np.diag([1.0, 0.0])))


def test_make_cone_rank_zero_admitted():
    assert make_cone(SymMatrix(np.eye(3))).rank_k == 0


def test_make_cone_negative_definite_rejected():
    with pytest.raises(DegenerateCone):
        make_cone(SymMatrix(-np.eye(2)))


def test_quad_form_examples():
    assert quad_form(SymMatrix(np.eye(2)), [3.0, 4.0]) == pytest.approx(25.0)
    assert quad_form(SymMatrix(np.diag([-1.0, 1.0])), [1.0, 1.0]) == pytest.approx(0.0)
    assert quad_form(SymMatrix(P_R), [1.0, 0.0]) == pytest.approx(-5.1987)


def test_quad_form_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        quad_form(SymMatrix(np.eye(2)), [1.0, 2.0, 3.0])


def test_cone_locate_examples():
    cone = make_cone(SymMatrix(np.diag([-1.0, 1.0])))
    assert cone_locate(cone, [1.0, 0.0]) is ConeLocation.INTERIOR
    assert cone_locate(cone, [0.0, 1.0]) is ConeLocation.OUTSIDE
    assert cone_locate(cone, [1.0, 1.0]) is ConeLocation.BOUNDARY


def test_cone_locate_zero_vector_is_boundary():
    cone = make_cone(SymMatrix(np.diag([-1.0, 1.0])))
    assert cone_locate(cone, [0.0, 0.0]) is ConeLocation.BOUNDARY


def test_cone_locate_symmetry_and_scale_invariance():
    cone = make_cone(SymMatrix(P_R))
    rng = np.random.default_rng(5)
    for _ in range(50):
        v = rng.standard_normal(2)
        loc = cone_locate(cone, v)
        assert cone_locate(cone, -v) is loc
        for alpha in (0.01, 3.0, -7.5):
            assert cone_locate(cone, alpha * v) is loc


def test_negative_eigenspace_inside_cone():
    P = np.zeros((3, 3))
    P[:2, :2] = P_R
    P[2, 2] = 1.0
    cone = make_cone(SymMatrix(P))
    vals, vecs = jacobi_eig(cone.P)
    neg_dirs = vecs[:, vals < 0]
    rng = np.random.default_rng(9)
    for _ in range(30):
        v = neg_dirs @ rng.standard_normal(neg_dirs.shape[1])
        assert cone_locate(cone, v) in (ConeLocation.INTERIOR, ConeLocation.BOUNDARY)


def test_quad_form_matches_eigenbasis_sum():
    S = SymMatrix(P_R)
    vals, vecs = jacobi_eig(S)
    rng = np.random.default_rng(13)
    for _ in range(20):
        v = rng.standard_normal(2)
        coeffs = vecs.T @ v
        expect = float(np.sum(vals * coeffs**2))
        assert quad_form(S, v) == pytest.approx(expect, rel=1e-12, abs=1e-12)


def test_cone_locate_uses_relative_band():
    cone = make_cone(SymMatrix(np.diag([-1.0, 1.0])))
    v = np.array([1.0, 1.0 - 1e-12])
    assert cone_locate(cone, v, tol=1e-9) is ConeLocation.BOUNDARY
    assert cone_locate(cone, v, tol=0.0) is ConeLocation.INTERIOR
