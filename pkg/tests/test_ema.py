"""Two-stage end-member estimation: SVD stage, simplex expansion, cleanup."""
import itertools

import numpy as np
import pytest

import simplexfactor as sf
from simplexfactor.ema import emma_stage1, expand_simplex_once


def _negativity(w):
    return float(np.abs(np.minimum(w, 0.0)).sum())


# ---------------------------------------------------------------------------
# emma_stage1


def test_stage1_exact_rank_input_passes_through():
    rng = np.random.default_rng(0)
    w = rng.dirichlet((2.0, 2.0), size=5)
    g = rng.dirichlet(np.ones(4), size=2)
    p = sf.CompositionMatrix(w @ g)
    out = emma_stage1(p, 2)
    assert np.abs(out.values - p.values).max() <= 1e-9


def test_stage1_full_rank_is_identity(er_composition):
    comp, _ = er_composition
    out = emma_stage1(comp, 3)
    assert np.abs(out.values - comp.values).max() <= 1e-9


def test_stage1_education_table_validity(er_composition):
    comp, _ = er_composition
    out = emma_stage1(comp, 2)
    assert out.values.min() >= 0
    assert np.abs(out.values.sum(axis=1) - 1.0).max() <= 1e-12
    # the constrained correction cannot beat the unconstrained truncation
    l, r = sf.svd_truncate(sf.Matrix(comp.values), 2)
    d_unconstrained = np.linalg.norm(comp.values - l.values @ r.values)
    d_stage1 = np.linalg.norm(comp.values - out.values)
    assert d_stage1 >= d_unconstrained - 1e-12


def test_stage1_rank_out_of_range(er_composition):
    comp, _ = er_composition
    with pytest.raises(sf.RankOutOfRangeError):
        emma_stage1(comp, 9)


# ---------------------------------------------------------------------------
# emma_fit


def test_emma_recovers_separable_model():
    rng = np.random.default_rng(11)
    g = rng.dirichlet(np.ones(5), size=3)
    w = np.vstack([np.eye(3), rng.dirichlet(np.ones(3) * 1.5, size=9)])
    w = w[rng.permutation(12)]
    p = sf.CompositionMatrix(w @ g)
    r = sf.emma_fit(p, sf.EmmaConfig(k=3))
    basis = r.factorization.basis.values
    dev = min(np.abs(basis[list(q)] - g).max() for q in itertools.permutations(range(3)))
    assert dev <= 1e-6
    # exact-rank input, so the final fit must not lose ground to stage 1
    assert r.residual_norm <= r.diagnostics["stage1_residual"] + 1e-6


def test_emma_k2_health_table_finds_extreme_rows(hg_composition):
    comp, _ = hg_composition
    r = sf.emma_fit(comp, sf.EmmaConfig(k=2))
    basis = r.factorization.basis.values
    extremes = comp.values[[0, 4]]
    dev = min(
        np.abs(basis - extremes).max(),
        np.abs(basis[::-1] - extremes).max(),
    )
    assert dev <= 1e-6


def test_emma_k1_closed_form(er_composition):
    comp, _ = er_composition
    r = sf.emma_fit(comp, sf.EmmaConfig(k=1))
    assert np.abs(r.factorization.basis.values[0] - comp.values.mean(axis=0)).max() <= 1e-12
    assert np.abs(r.factorization.coeff.values - 1.0).max() <= 1e-12


def test_emma_constraints_and_negativity_trace(tb_composition):
    comp, _ = tb_composition
    r = sf.emma_fit(comp, sf.EmmaConfig(k=3))
    w = r.factorization.coeff.values
    g = r.factorization.basis.values
    assert w.min() >= 0 and g.min() >= 0
    assert np.abs(w.sum(axis=1) - 1.0).max() <= 1e-10
    assert np.abs(g.sum(axis=1) - 1.0).max() <= 1e-10
    trace = np.asarray(r.objective_trace)
    assert np.all(trace[1:] <= trace[:-1] + 1e-12)
    assert trace.min() >= 0
    assert r.diagnostics["final_negativity"] <= 1e-4
    assert r.diagnostics["expansions"] >= 1


def test_emma_deterministic(hg_composition):
    comp, _ = hg_composition
    a = sf.emma_fit(comp, sf.EmmaConfig(k=2))
    b = sf.emma_fit(comp, sf.EmmaConfig(k=2))
    assert np.array_equal(a.factorization.basis.values, b.factorization.basis.values)
    assert tuple(a.objective_trace) == tuple(b.objective_trace)


# ---------------------------------------------------------------------------
# expand_simplex_once


def test_expand_identity_when_nonnegative():
    w = np.array([[0.6, 0.4], [0.1, 0.9]])
    g = sf.CompositionMatrix(np.array([[0.8, 0.2], [0.3, 0.7]]))
    t, w2, g2 = expand_simplex_once(sf.Matrix(w), g, 0.1)
    assert np.abs(t.values - np.eye(2)).max() <= 1e-12
    assert np.abs(w2.values - w).max() <= 1e-12


def test_expand_reduces_negativity_toy():
    g = np.array([[0.8, 0.2], [0.3, 0.7]])
    w = np.array([[1.05, -0.05], [0.3, 0.7], [0.6, 0.4]])
    t, w2, g2 = expand_simplex_once(sf.Matrix(w), sf.CompositionMatrix(g), 0.1)
    before = _negativity(w)
    after = _negativity(w2.values)
    assert after < before
    assert np.abs(w2.values @ g2.values - w @ g).max() <= 1e-12
    assert np.abs(g2.values.sum(axis=1) - 1.0).max() <= 1e-12

    # exhaustive mixing grid brackets the single-step result
    best = before
    for x in np.arange(0.9, 1.3001, 0.01):
        for y in np.arange(-0.3, 0.1001, 0.01):
            tm = np.array([[x, 1.0 - x], [y, 1.0 - y]])
            if abs(np.linalg.det(tm)) < 1e-9:
                continue
            cand = _negativity(w @ np.linalg.inv(tm))
            best = min(best, cand)
    assert best <= after + 1e-12


def test_expand_repeated_application_monotone():
    g = np.array([[0.8, 0.2], [0.3, 0.7]])
    w = np.array([[1.08, -0.08], [-0.04, 1.04], [0.5, 0.5]])
    cur_w, cur_g = sf.Matrix(w), sf.CompositionMatrix(g)
    levels = [_negativity(cur_w.values)]
    for _ in range(40):
        _, cur_w, cur_g = expand_simplex_once(cur_w, cur_g, 0.05)
        levels.append(_negativity(cur_w.values))
    arr = np.asarray(levels)
    assert np.all(arr[1:] <= arr[:-1] + 1e-12)
    assert arr[-1] >= 0


def test_expand_rejects_bad_arguments():
    g = sf.CompositionMatrix(np.array([[0.8, 0.2], [0.3, 0.7]]))
    w = sf.Matrix(np.array([[0.5, 0.5]]))
    with pytest.raises(ValueError):
        expand_simplex_once(w, g, 0.0)
    with pytest.raises(ValueError):
        expand_simplex_once(sf.Matrix(np.array([[1.0]])), sf.CompositionMatrix(np.array([[1.0]])), 0.1)
