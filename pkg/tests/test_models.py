"""Factorization types, conversions, transforms, equivalence comparison."""
import numpy as np
import pytest

import simplexfactor as sf


def _random_budget(rng, i, j, k):
    w = rng.dirichlet(np.ones(k), size=i)
    g = rng.dirichlet(np.ones(j), size=k)
    return sf.BudgetFactorization(sf.CompositionMatrix(w), sf.CompositionMatrix(g))


# ---------------------------------------------------------------------------
# type invariants


def test_nmf_factorization_requires_rank():
    m = np.array([[1.0, 2.0], [2.0, 4.0], [1.0, 1.0]])
    h = np.array([[1.0, 0.0, 1.0], [0.0, 1.0, 1.0]])
    sf.NmfFactorization(sf.Matrix(m), sf.Matrix(h))
    with pytest.raises(Exception):
        # coeff has rank 1
        sf.NmfFactorization(sf.Matrix(np.array([[1.0, 2.0], [2.0, 4.0]])), sf.Matrix(h))


def test_budget_factorization_reconstruct():
    b = sf.BudgetFactorization(
        sf.CompositionMatrix(np.array([[1.0, 0.0], [0.3, 0.7]])),
        sf.CompositionMatrix(np.array([[0.6, 0.4], [0.2, 0.8]])),
    )
    assert b.k == 2
    assert np.abs(b.reconstruct() - b.coeff.values @ b.basis.values).max() == 0.0


def test_transform_matrix_validation():
    sf.TransformMatrix(np.array([[0.9, 0.1], [0.2, 0.8]]), kind="row-stochastic")
    with pytest.raises(Exception):
        sf.TransformMatrix(np.array([[0.9, 0.2], [0.2, 0.8]]), kind="row-stochastic")
    with pytest.raises(Exception):
        sf.TransformMatrix(np.array([[1.0, 1.0], [1.0, 1.0]]))  # singular


def test_lca_class_mass_must_be_positive():
    with pytest.raises(sf.ZeroClassMassError):
        sf.LcaFactorization(
            sf.Matrix(np.array([[1.0, 0.5], [0.0, 0.5]])),
            np.array([1.0, 0.0]),
            sf.CompositionMatrix(np.array([[0.3, 0.7], [0.4, 0.6]])),
        )


# ---------------------------------------------------------------------------
# lba_to_lca / lca_to_lba


def test_lba_to_lca_identity_weights():
    b = sf.BudgetFactorization(
        sf.CompositionMatrix(np.eye(2)),
        sf.CompositionMatrix(np.array([[0.5, 0.5], [0.25, 0.75]])),
    )
    l = sf.lba_to_lca(b, sf.RowMassVector(np.array([0.5, 0.5])))
    assert np.abs(l.row_profile.values - np.eye(2)).max() <= 1e-12
    assert np.abs(np.asarray(l.class_mass) - 0.5).max() <= 1e-12
    assert np.abs(l.col_profile.values - b.basis.values).max() <= 1e-12


def test_lba_to_lca_row_sums_equal_masses():
    rng = np.random.default_rng(1)
    b = _random_budget(rng, 5, 4, 2)
    masses = rng.dirichlet(np.ones(5))
    l = sf.lba_to_lca(b, sf.RowMassVector(masses))
    psi = l.row_profile.values @ np.diag(l.class_mass) @ l.col_profile.values
    assert np.abs(psi.sum(axis=1) - masses).max() <= 1e-12


def test_lba_to_lca_direct_multiplication_oracle():
    rng = np.random.default_rng(2)
    b = _random_budget(rng, 5, 4, 3)
    masses = np.full(5, 0.2)
    l = sf.lba_to_lca(b, sf.RowMassVector(masses))
    lhs = l.row_profile.values @ np.diag(l.class_mass) @ l.col_profile.values
    rhs = np.diag(masses) @ b.coeff.values @ b.basis.values
    assert np.abs(lhs - rhs).max() <= 1e-12


def test_lba_to_lca_rejects_zero_mass():
    b = sf.BudgetFactorization(
        sf.CompositionMatrix(np.eye(2)),
        sf.CompositionMatrix(np.array([[0.6, 0.4], [0.2, 0.8]])),
    )
    with pytest.raises(sf.ZeroRowError):
        sf.lba_to_lca(b, sf.RowMassVector(np.array([1.0, 0.0])))


def test_lca_to_lba_round_trip():
    rng = np.random.default_rng(3)
    b = _random_budget(rng, 4, 3, 2)
    masses = rng.dirichlet(np.ones(4))
    l = sf.lba_to_lca(b, sf.RowMassVector(masses))
    b2, rm2 = sf.lca_to_lba(l)
    assert np.abs(b2.coeff.values - b.coeff.values).max() <= 1e-12
    assert np.abs(b2.basis.values - b.basis.values).max() <= 1e-12
    assert np.abs(np.asarray(rm2.masses) - masses).max() <= 1e-12


def test_lca_to_lba_identity_profile():
    l = sf.LcaFactorization(
        sf.Matrix(np.eye(2)),
        np.array([0.5, 0.5]),
        sf.CompositionMatrix(np.array([[0.5, 0.5], [0.25, 0.75]])),
    )
    b, rm = sf.lca_to_lba(l)
    assert np.abs(b.coeff.values - np.eye(2)).max() <= 1e-12
    assert np.abs(b.basis.values - l.col_profile.values).max() <= 1e-12


def test_lca_to_lba_constraint_summation_oracle():
    rng = np.random.default_rng(4)
    a = rng.uniform(0.1, 1.0, size=(4, 2))
    a /= a.sum(axis=0, keepdims=True)
    theta = rng.dirichlet(np.ones(2))
    bmat = rng.dirichlet(np.ones(3), size=2)
    l = sf.LcaFactorization(sf.Matrix(a), theta, sf.CompositionMatrix(bmat))
    b, rm = sf.lca_to_lba(l)
    assert np.abs(b.coeff.values.sum(axis=1) - 1.0).max() <= 1e-12
    assert np.abs(b.basis.values.sum(axis=1) - 1.0).max() <= 1e-12
    assert b.coeff.values.min() >= 0 and b.basis.values.min() >= 0


# ---------------------------------------------------------------------------
# nmf_to_lba / lba_to_nmf


def test_nmf_to_lba_identity_basis():
    n = sf.NmfFactorization(sf.Matrix(np.array([[2.0, 2.0], [1.0, 3.0]])), sf.Matrix(np.eye(2)))
    b, rm = sf.nmf_to_lba(n)
    assert np.allclose(rm.masses, [4.0, 4.0], atol=0)
    assert np.abs(b.basis.values - np.eye(2)).max() <= 1e-12
    assert np.abs(b.coeff.values - [[0.5, 0.5], [0.25, 0.75]]).max() <= 1e-12


def test_nmf_to_lba_scale_invariance():
    rng = np.random.default_rng(5)
    m = rng.uniform(0.1, 2.0, size=(4, 2))
    h = rng.uniform(0.1, 2.0, size=(2, 3))
    sigma = np.diag([2.0, 5.0])
    b1, _ = sf.nmf_to_lba(sf.NmfFactorization(sf.Matrix(m), sf.Matrix(h)))
    b2, _ = sf.nmf_to_lba(
        sf.NmfFactorization(sf.Matrix(m @ np.linalg.inv(sigma)), sf.Matrix(sigma @ h))
    )
    assert np.abs(b1.coeff.values - b2.coeff.values).max() <= 1e-12
    assert np.abs(b1.basis.values - b2.basis.values).max() <= 1e-12


def test_nmf_to_lba_reconstruction_oracle():
    rng = np.random.default_rng(6)
    m = rng.uniform(0.05, 1.5, size=(6, 3))
    h = rng.uniform(0.05, 1.5, size=(3, 4))
    b, rm = sf.nmf_to_lba(sf.NmfFactorization(sf.Matrix(m), sf.Matrix(h)))
    assert np.abs(rm.diagonal() @ b.reconstruct() - m @ h).max() <= 1e-12


def test_lba_to_nmf_unit_masses():
    rng = np.random.default_rng(7)
    b = _random_budget(rng, 3, 4, 2)
    n = sf.lba_to_nmf(b, sf.RowMassVector(np.ones(3)))
    assert np.abs(n.coeff.values - b.coeff.values).max() <= 1e-12
    assert np.abs(n.basis.values - b.basis.values).max() <= 1e-12


def test_lba_to_nmf_composition_round_trip():
    rng = np.random.default_rng(8)
    b = _random_budget(rng, 5, 4, 3)
    masses = rng.uniform(0.5, 2.0, size=5)
    n = sf.lba_to_nmf(b, sf.RowMassVector(masses))
    b2, rm2 = sf.nmf_to_lba(n)
    assert np.abs(b2.coeff.values - b.coeff.values).max() <= 1e-12
    assert np.abs(b2.basis.values - b.basis.values).max() <= 1e-12
    assert np.abs(np.asarray(rm2.masses) - masses).max() <= 1e-12


def test_budget_as_nmf_containment():
    rng = np.random.default_rng(9)
    b = _random_budget(rng, 4, 3, 2)
    n = sf.budget_as_nmf(b)
    assert isinstance(n, sf.NmfFactorization)
    assert np.abs(n.reconstruct() - b.reconstruct()).max() <= 1e-12


# ---------------------------------------------------------------------------
# apply_transform


def test_apply_transform_identity():
    rng = np.random.default_rng(10)
    b = _random_budget(rng, 4, 3, 2)
    out = sf.apply_transform(b, sf.TransformMatrix(np.eye(2), kind="row-stochastic"))
    assert np.abs(out.coeff.values - b.coeff.values).max() <= 1e-12
    assert np.abs(out.basis.values - b.basis.values).max() <= 1e-12


def test_apply_transform_swap():
    rng = np.random.default_rng(11)
    b = _random_budget(rng, 4, 3, 2)
    swap = np.array([[0.0, 1.0], [1.0, 0.0]])
    out = sf.apply_transform(b, sf.TransformMatrix(swap, kind="row-stochastic"))
    assert np.abs(out.basis.values - b.basis.values[::-1]).max() <= 1e-12
    assert np.abs(out.coeff.values - b.coeff.values[:, ::-1]).max() <= 1e-12
    assert np.abs(out.reconstruct() - b.reconstruct()).max() <= 1e-12


def test_apply_transform_interior_budget():
    rng = np.random.default_rng(12)
    w = rng.dirichlet((5.0, 5.0), size=6)
    g = np.array([[0.7, 0.2, 0.1], [0.1, 0.3, 0.6]])
    b = sf.BudgetFactorization(sf.CompositionMatrix(w), sf.CompositionMatrix(g))
    t = sf.TransformMatrix(np.array([[0.9, 0.1], [0.2, 0.8]]), kind="row-stochastic")
    out = sf.apply_transform(b, t)
    assert np.abs(out.reconstruct() - b.reconstruct()).max() <= 1e-12
    assert np.abs(out.coeff.values.sum(axis=1) - 1.0).max() <= 1e-12


def test_apply_transform_infeasible_raises():
    # identity rows in W leave no room for a non-permutation mix
    w = np.vstack([np.eye(2), [[0.5, 0.5]]])
    g = np.array([[0.7, 0.2, 0.1], [0.1, 0.3, 0.6]])
    b = sf.BudgetFactorization(sf.CompositionMatrix(w), sf.CompositionMatrix(g))
    t = sf.TransformMatrix(np.array([[0.9, 0.1], [0.2, 0.8]]), kind="row-stochastic")
    with pytest.raises(sf.InfeasibleTransformError):
        sf.apply_transform(b, t)


def test_apply_transform_budget_requires_row_stochastic_kind():
    rng = np.random.default_rng(13)
    b = _random_budget(rng, 4, 3, 2)
    with pytest.raises(Exception):
        sf.apply_transform(b, sf.TransformMatrix(np.array([[2.0, 0.0], [0.0, 1.0]])))


def test_apply_transform_nmf_general():
    rng = np.random.default_rng(14)
    m = rng.uniform(0.5, 1.5, size=(4, 2))
    h = rng.uniform(0.5, 1.5, size=(2, 3))
    n = sf.NmfFactorization(sf.Matrix(m), sf.Matrix(h))
    s = sf.TransformMatrix(np.diag([2.0, 0.5]))
    out = sf.apply_transform(n, s)
    assert np.abs(out.reconstruct() - n.reconstruct()).max() <= 1e-12


# ---------------------------------------------------------------------------
# equivalent


def test_equivalent_recovers_permutation_and_scale():
    rng = np.random.default_rng(15)
    m = rng.uniform(0.1, 1.0, size=(5, 3))
    h = rng.uniform(0.1, 1.0, size=(3, 4))
    n1 = sf.NmfFactorization(sf.Matrix(m), sf.Matrix(h))
    perm = [2, 0, 1]
    scale = np.array([2.0, 0.5, 3.0])
    h2 = (h * scale[:, None])[perm]
    m2 = (m / scale[None, :])[:, perm]
    n2 = sf.NmfFactorization(sf.Matrix(m2), sf.Matrix(h2))
    wit = sf.equivalent(n1, n2)
    assert wit is not None
    assert sorted(wit.perm) == [0, 1, 2]
    assert np.all(np.asarray(wit.scale) > 0)


def test_equivalent_rejects_interior_mixing():
    rng = np.random.default_rng(16)
    w = rng.dirichlet((5.0, 5.0), size=6)
    g = np.array([[0.7, 0.2, 0.1], [0.1, 0.3, 0.6]])
    b = sf.BudgetFactorization(sf.CompositionMatrix(w), sf.CompositionMatrix(g))
    t = sf.TransformMatrix(np.array([[0.9, 0.1], [0.2, 0.8]]), kind="row-stochastic")
    alt = sf.apply_transform(b, t)
    assert sf.equivalent(b, alt) is None


def test_equivalent_tolerates_small_noise():
    rng = np.random.default_rng(17)
    b = _random_budget(rng, 5, 4, 2)
    noisy_w = np.abs(b.coeff.values + rng.normal(0, 1e-9, size=(5, 2)))
    noisy_w /= noisy_w.sum(axis=1, keepdims=True)
    b2 = sf.BudgetFactorization(sf.CompositionMatrix(noisy_w), b.basis)
    wit = sf.equivalent(b, b2, tol=1e-6)
    assert wit is not None
