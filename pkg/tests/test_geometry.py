"""Cone/hull membership, simplex volume, ternary embedding, rescaled basis."""
import numpy as np
import pytest
import scipy.optimize

import simplexfactor as sf


# ---------------------------------------------------------------------------
# membership


def test_cone_membership_scaled_generator():
    u = sf.Matrix(np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]]))
    r = sf.cone_membership(u, np.array([2.0, 0.0, 0.0]))
    assert r is not None
    assert np.abs(r - np.array([2.0, 0.0])).max() <= 1e-8


def test_cone_membership_negative_point_absent():
    u = sf.Matrix(np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]]))
    assert sf.cone_membership(u, np.array([-1.0, 0.0, 0.0])) is None


def test_cone_membership_interior_against_nnls():
    rng = np.random.default_rng(0)
    gens = rng.uniform(0.1, 1.0, size=(5, 3))  # columns generate
    weights = rng.uniform(0.2, 2.0, size=3)
    point = gens @ weights
    r = sf.cone_membership(sf.Matrix(gens), point)
    assert r is not None
    oracle, _ = scipy.optimize.nnls(gens, point)
    assert np.abs(gens @ r - gens @ oracle).max() <= 1e-8
    assert np.abs(gens @ r - point).max() <= 1e-8


def test_hull_membership_vertex_and_midpoint():
    u = sf.Matrix(np.array([[1.0, 0.0, 0.2], [0.0, 1.0, 0.5], [0.0, 0.0, 0.3]]))
    r_vertex = sf.hull_membership(u, np.array([1.0, 0.0, 0.0]))
    assert np.abs(r_vertex - np.array([1.0, 0.0, 0.0])).max() <= 1e-8
    mid = np.array([0.5, 0.5, 0.0])
    r_mid = sf.hull_membership(u, mid)
    assert np.abs(r_mid - np.array([0.5, 0.5, 0.0])).max() <= 1e-8


def test_hull_membership_outside_absent():
    u = sf.Matrix(np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]]))
    outside = np.array([1.0 + 1e-2, 0.0, 0.0])
    assert sf.hull_membership(u, outside, tol=1e-6) is None


def test_hull_membership_implies_cone_membership():
    rng = np.random.default_rng(1)
    gens = rng.dirichlet(np.ones(4), size=3).T  # 4x3, columns are compositions
    lam = rng.dirichlet(np.ones(3))
    point = gens @ lam
    rh = sf.hull_membership(sf.Matrix(gens), point)
    rc = sf.cone_membership(sf.Matrix(gens), point)
    assert rh is not None and rc is not None
    assert np.abs(gens @ rh - gens @ rc).max() <= 1e-8


# ---------------------------------------------------------------------------
# simplex_volume_sq


def test_volume_identity_and_duplicates():
    assert sf.simplex_volume_sq(sf.Matrix(np.eye(3))) == pytest.approx(1.0, abs=1e-12)
    dup = np.array([[0.4, 0.6], [0.4, 0.6]])
    assert sf.simplex_volume_sq(sf.Matrix(dup)) == pytest.approx(0.0, abs=1e-12)


def test_volume_two_by_three_cofactor_oracle():
    g = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    got = sf.simplex_volume_sq(sf.Matrix(g))
    gram = g @ g.T
    # 2x2 cofactor expansion by hand
    oracle = gram[0, 0] * gram[1, 1] - gram[0, 1] * gram[1, 0]
    assert got == pytest.approx(oracle, abs=1e-12)
    assert got == pytest.approx(1.0, abs=1e-12)


def test_volume_permutation_and_transform_rules():
    rng = np.random.default_rng(2)
    g = rng.dirichlet(np.ones(4), size=3)
    v = sf.simplex_volume_sq(sf.Matrix(g))
    assert sf.simplex_volume_sq(sf.Matrix(g[[2, 0, 1]])) == pytest.approx(v, rel=1e-12)
    t = np.array([[0.8, 0.1, 0.1], [0.05, 0.9, 0.05], [0.2, 0.2, 0.6]])
    v_t = sf.simplex_volume_sq(sf.Matrix(t @ g))
    assert v_t == pytest.approx(np.linalg.det(t) ** 2 * v, rel=1e-9)


# ---------------------------------------------------------------------------
# average_contribution / rescaled basis


def test_average_contribution_reference_coefficients(time_budget):
    ref = sf.time_budget_reference()
    z = sf.average_contribution(sf.Matrix(np.asarray(ref["nmf"]["coeff"])))
    assert np.abs(np.asarray(z) - np.asarray(ref["average_contribution"])).max() <= 1e-3
    assert np.asarray(z).sum() == pytest.approx(1.0, abs=1e-6)


def test_average_contribution_trivial_cases():
    w = np.vstack([np.eye(3), np.eye(3)])
    z = sf.average_contribution(sf.CompositionMatrix(w))
    assert np.abs(np.asarray(z) - 1.0 / 3.0).max() <= 1e-12
    single = sf.average_contribution(sf.CompositionMatrix(np.array([[0.1, 0.2, 0.7]])))
    assert np.abs(np.asarray(single) - [0.1, 0.2, 0.7]).max() <= 1e-12


def test_rescaled_basis_identity():
    out = sf.rescaled_basis_matrix(np.eye(3), np.full(3, 1.0 / 3.0))
    assert np.abs(out - np.eye(3)).max() <= 1e-12


def test_rescaled_basis_reference_education_column(time_budget):
    ref = sf.time_budget_reference()
    g = np.asarray(ref["nmf"]["basis"])
    z = np.asarray(ref["average_contribution"])
    out = sf.rescaled_basis_matrix(g, z)
    col = list(time_budget.col_labels).index("educat.")
    assert out[2, col] > 0.9
    assert np.abs(out.sum(axis=0) - 1.0).max() <= 1e-12


def test_rescaled_basis_column_scale_invariance():
    rng = np.random.default_rng(3)
    g = rng.dirichlet(np.ones(4), size=3)
    z = rng.dirichlet(np.ones(3))
    base = sf.rescaled_basis_matrix(g, z)
    scaled = g.copy()
    scaled[:, 1] *= 7.0
    out = sf.rescaled_basis_matrix(scaled, z)
    assert np.abs(out - base).max() <= 1e-12


def test_rescaled_basis_zero_column_error():
    g = np.array([[0.5, 0.5, 0.0], [0.7, 0.3, 0.0], [0.2, 0.8, 0.0]])
    with pytest.raises(sf.ZeroColumnError):
        sf.rescaled_basis_matrix(g, np.full(3, 1.0 / 3.0))


# ---------------------------------------------------------------------------
# ternary points


def test_ternary_point_validation_and_planar():
    p = sf.TernaryPoint("v3", (0.0, 0.0, 1.0))
    x, y = p.planar
    assert x == pytest.approx(0.5, abs=1e-12)
    assert y == pytest.approx(np.sqrt(3) / 2, abs=1e-12)
    assert sf.TernaryPoint("v1", (1.0, 0.0, 0.0)).planar == (0.0, 0.0)
    assert sf.TernaryPoint("v2", (0.0, 1.0, 0.0)).planar == (1.0, 0.0)
    with pytest.raises(Exception):
        sf.TernaryPoint("bad", (0.5, 0.4, 0.4))


def test_ternary_projection_is_affine():
    a = sf.TernaryPoint("a", (0.5, 0.25, 0.25))
    b = sf.TernaryPoint("b", (0.0, 0.75, 0.25))
    mid = sf.TernaryPoint("m", (0.25, 0.5, 0.25))
    ax, ay = a.planar
    bx, by = b.planar
    mx, my = mid.planar
    assert mx == pytest.approx((ax + bx) / 2, abs=0)
    assert my == pytest.approx((ay + by) / 2, abs=0)


def test_rows_as_ternary_and_unsupported_k():
    w = sf.CompositionMatrix(np.array([[0.2, 0.3, 0.5], [1.0, 0.0, 0.0]]))
    pts = sf.rows_as_ternary(w, labels=("p", "q"))
    assert [p.label for p in pts] == ["p", "q"]
    with pytest.raises(sf.UnsupportedKError):
        sf.rows_as_ternary(sf.Matrix(np.array([[0.5, 0.5], [0.2, 0.8]])), ("a", "b"))
