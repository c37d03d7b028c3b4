"""Separability, scattering checks, rank-2 extremes, uniqueness transfer."""
import numpy as np
import pytest

import simplexfactor as sf


# ---------------------------------------------------------------------------
# check_separability


def test_separability_vertex_rows_found():
    flag, witness = sf.check_separability(sf.Matrix(np.array([[1.0, 0.0], [0.0, 2.0], [0.5, 0.5]])))
    assert flag
    assert set(witness) == {0, 1}


def test_separability_interior_rows_rejected():
    rng = np.random.default_rng(0)
    m = rng.dirichlet((3.0, 3.0), size=6)
    flag, witness = sf.check_separability(sf.Matrix(m))
    assert not flag


def test_separability_with_noise():
    rng = np.random.default_rng(1)
    w = np.vstack([np.eye(3), rng.dirichlet(np.ones(3), size=5)])
    perm = rng.permutation(8)
    w = w[perm] + rng.uniform(0, 1e-6, size=(8, 3))
    flag, witness = sf.check_separability(sf.Matrix(w), tol=1e-4)
    assert flag
    expected = {int(np.where(perm == t)[0][0]) for t in range(3)}
    assert set(witness) == expected


# ---------------------------------------------------------------------------
# check_ssc


def test_ssc_orthant_holds():
    v = sf.check_ssc(sf.Matrix(np.eye(2)), samples=100, seed=0)
    assert v.status == "holds"


def test_ssc_ray_fails():
    eq = np.tile(np.array([[0.5], [0.5]]), (1, 6))
    v = sf.check_ssc(sf.Matrix(eq), samples=100, seed=0)
    assert v.status == "fails"
    assert v.certificate


def test_ssc_k3_scattered_holds():
    rng = np.random.default_rng(5)
    rows = []
    for t in (0.2, 0.5, 0.8):
        rows += [(t, 1 - t, 0.0), (0.0, t, 1 - t), (t, 0.0, 1 - t)]
    w = np.vstack([np.array(rows), rng.dirichlet(np.ones(3) * 2.0, size=12)])
    v = sf.check_ssc(sf.Matrix(w.T), samples=2000, seed=0)
    assert v.status == "holds"


def test_ssc_k4_undecided():
    m4 = np.vstack([np.eye(4), np.random.default_rng(0).dirichlet(np.ones(4), size=8)])
    v = sf.check_ssc(sf.Matrix(m4.T), samples=300, seed=0)
    assert v.status == "undecided"
    assert "ssc1" in v.certificate


def test_ssc_requires_k_at_least_two():
    with pytest.raises(sf.UnsupportedKError):
        sf.check_ssc(sf.Matrix(np.ones((1, 4))), samples=50, seed=0)


# ---------------------------------------------------------------------------
# k2_extremes


def test_k2_extremes_structure_random_interior():
    rng = np.random.default_rng(3)
    w = rng.dirichlet(np.ones(2) * 4.0, size=6)
    g = np.array([[0.7, 0.2, 0.1], [0.1, 0.3, 0.6]])
    b = sf.BudgetFactorization(sf.CompositionMatrix(w), sf.CompositionMatrix(g))
    inner, outer = sf.k2_extremes(b)
    assert np.abs(inner.reconstruct() - b.reconstruct()).max() <= 1e-12
    assert np.abs(outer.reconstruct() - b.reconstruct()).max() <= 1e-12
    # inner coefficients contain a permuted identity pair
    wi = inner.coeff.values
    hits = {tuple(np.round(row, 9)) for row in wi}
    assert (1.0, 0.0) in hits and (0.0, 1.0) in hits
    # each outer basis row has a zero where the other does not
    go = outer.basis.values
    z0 = np.flatnonzero(go[0] <= 1e-10)
    z1 = np.flatnonzero(go[1] <= 1e-10)
    assert len(z0) > 0 and len(z1) > 0
    assert set(z0.tolist()) != set(z1.tolist())


def test_k2_extremes_health_table(health_gender, hg_composition):
    comp, _ = hg_composition
    fit = sf.fit_lba_em(
        health_gender.counts, sf.LbaConfig(k=2, estimator="em", restarts=2, tol=1e-13, max_iter=20000)
    )
    inner, outer = sf.k2_extremes(fit.factorization)
    extremes = comp.values[[0, 4]]
    dev = min(
        np.abs(inner.basis.values - extremes).max(),
        np.abs(inner.basis.values[::-1] - extremes).max(),
    )
    assert dev <= 1e-5
    dev_outer = min(
        np.abs(outer.basis.values - np.eye(2)).max(),
        np.abs(outer.basis.values[::-1] - np.eye(2)).max(),
    )
    assert dev_outer <= 1e-8


def test_k2_corner_parameters_order():
    rng = np.random.default_rng(8)
    w = rng.dirichlet((4.0, 4.0), size=7)
    g = np.array([[0.6, 0.3, 0.1], [0.1, 0.2, 0.7]])
    b = sf.BudgetFactorization(sf.CompositionMatrix(w), sf.CompositionMatrix(g))
    (xi, yi), (xo, yo) = sf.k2_corner_parameters(b)
    # inner corners come from the coefficient range, outer from basis feasibility
    assert yi <= xi <= xo
    assert yo <= yi


def test_k2_extremes_requires_rank_two():
    rng = np.random.default_rng(9)
    b = sf.BudgetFactorization(
        sf.CompositionMatrix(rng.dirichlet(np.ones(3), size=5)),
        sf.CompositionMatrix(rng.dirichlet(np.ones(4), size=3)),
    )
    with pytest.raises(sf.UnsupportedKError):
        sf.k2_extremes(b)


# ---------------------------------------------------------------------------
# demonstrate_uniqueness_transfer


def test_transfer_interior_finds_alternatives():
    rng = np.random.default_rng(3)
    w = rng.dirichlet(np.ones(2) * 4.0, size=6)
    g = np.array([[0.7, 0.2, 0.1], [0.1, 0.3, 0.6]])
    b = sf.BudgetFactorization(sf.CompositionMatrix(w), sf.CompositionMatrix(g))
    rep = sf.demonstrate_uniqueness_transfer(b, trials=50, seed=0)
    assert rep.trials == 50
    assert rep.feasible_alternatives > 0
    assert rep.equivalent_alternatives == 0
    assert rep.max_product_deviation <= 1e-12


def test_transfer_separable_budget_admits_none():
    rng = np.random.default_rng(4)
    w = np.vstack([np.eye(2), rng.dirichlet((2.0, 2.0), size=5)])
    g = np.array([[0.7, 0.2, 0.1], [0.1, 0.3, 0.6]])
    b = sf.BudgetFactorization(sf.CompositionMatrix(w), sf.CompositionMatrix(g))
    rep = sf.demonstrate_uniqueness_transfer(b, trials=50, seed=0)
    assert rep.feasible_alternatives == 0


def test_identifiability_report_k2(hg_composition):
    comp, _ = hg_composition
    rng = np.random.default_rng(6)
    w = rng.dirichlet((4.0, 4.0), size=5)
    g = np.array([[0.8, 0.2], [0.25, 0.75]])
    b = sf.BudgetFactorization(sf.CompositionMatrix(w), sf.CompositionMatrix(g))
    rep = sf.identifiability_report(b.coeff.values, budget=b, samples=100, seed=0)
    assert rep.separable in (True, False)
    assert rep.ssc_status in ("holds", "fails", "undecided")
    assert rep.k2_inner is not None and rep.k2_outer is not None
