"""Two-stage estimation of a budget factorization from a composition
matrix: a reduced-rank stage followed by a simplex-expansion stage.

Stage 1 replaces the data with its best rank-k approximation, corrected
row by row onto the unit simplex.  Stage 2 seeds basis rows from fuzzy
cluster centers of the stage-1 rows, then repeatedly moves each basis
vertex away from the centroid of the others.  Every expansion is an
invertible row-stochastic transform applied to the pair, so the product
coeff @ basis is unchanged; a step is kept only when it reduces the total
negative coefficient mass.  Once the negativity target is reached the
overshoot of the last step is trimmed back, giving the smallest simplex
the achieved tolerance supports.  Basis rows may dip below zero while the
simplex grows; the final cleanup clips them and re-solves the
coefficients on the simplex.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy.optimize import minimize

from .errors import DegenerateFitError, RankOutOfRangeError
from .linalg import _simplex_ls_rows, fuzzy_cmeans, project_to_simplex, svd_truncate
from .matrices import CompositionMatrix, Matrix, values_of
from .models import BudgetFactorization, TransformMatrix
from .results import FLAG_EXPANSION_STALL, FitResult

Array = np.ndarray


@dataclass(frozen=True)
class EmmaConfig:
    k: int
    neg_tolerance: float = 1e-4
    expand_step: float = 0.01
    max_expand: int = 500
    fcm_seed: int = 0
    fuzzifier: float = 2.0

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be at least 1")
        if self.neg_tolerance < 0:
            raise ValueError("neg_tolerance must be nonnegative")
        if not (0.0 < self.expand_step <= 0.5):
            raise ValueError("expand_step must lie in (0, 0.5]")
        if self.max_expand < 0:
            raise ValueError("max_expand must be nonnegative")


def emma_stage1(p, k: int) -> CompositionMatrix:
    """Best rank-k approximation of ``p`` with rows corrected onto the
    simplex.

    The correction is the per-row constrained least-squares fix (the
    Euclidean projection), so rows of an approximation that is already a
    composition pass through unchanged.
    """
    comp = p if isinstance(p, CompositionMatrix) else CompositionMatrix.from_rows(values_of(p))
    a = comp.values
    i, j = a.shape
    if not (1 <= k <= min(i, j)):
        raise RankOutOfRangeError(f"rank {k} outside 1..{min(i, j)}")
    left, right = svd_truncate(Matrix(a), k)
    approx = left.values @ right.values
    return CompositionMatrix(project_to_simplex(approx))


def _negativity(w: Array) -> float:
    return float(-np.minimum(w, 0.0).sum())


def expand_simplex_once(
    w, g, step: float
) -> Tuple[TransformMatrix, Matrix, Matrix]:
    """One pass of vertex expansion over all basis rows.

    Each vertex is pushed away from the centroid of the other vertices by
    ``step``; the move is a row-stochastic transform T acting as
    basis <- T @ basis, coeff <- coeff @ T^-1, accepted only when total
    coefficient negativity strictly decreases.  Row sums of the basis stay
    exactly one but entries may go negative while the simplex grows.
    Returns the accumulated transform with the updated pair (the identity
    transform when no vertex move was accepted).
    """
    wv = np.array(values_of(w), dtype=float)
    gv = np.array(values_of(g), dtype=float)
    k = gv.shape[0]
    if k < 2:
        raise ValueError("expansion needs at least two basis rows")
    if not step > 0:
        raise ValueError("step must be positive")
    total = np.eye(k)
    neg = _negativity(wv)
    for r in range(k):
        t = np.eye(k)
        t[r, r] = 1.0 + step
        others = [c for c in range(k) if c != r]
        t[r, others] = -step / (k - 1)
        g_new = t @ gv
        # T = I + e_r u^T with u = step*(e_r - mean of others), so the
        # inverse is I - e_r u^T / (1 + step)
        u = t[r].copy()
        u[r] -= 1.0
        w_new = wv.copy()
        w_new -= np.outer(wv[:, r], u) / (1.0 + step)
        neg_new = _negativity(w_new)
        if neg_new < neg - 1e-15:
            wv, gv, neg = w_new, g_new, neg_new
            total = t @ total
    return TransformMatrix(total, kind="row-stochastic"), Matrix(wv), Matrix(gv)


def _trim_overshoot(w: Array, g: Array) -> Tuple[Array, Array]:
    """Shrink the expanded simplex onto the data without raising any
    coefficient above its current negativity.

    Expansion quantizes the final move and can drift sideways, so the
    simplex usually ends larger and tilted relative to the smallest one
    the reached tolerance supports.  Shrinking is posed over the inverse
    transform S: the basis maps to S^-1 @ basis, its volume scales by
    1/det(S), and the coefficients map to w @ S, so the smallest simplex
    maximizes det(S) subject to each coefficient staying above its
    starting floor (zero for entries that are already clean) and rows of
    S summing to one.  The constraints are linear in S and the objective
    is a polynomial with gradient det(S) S^-T, which sequential quadratic
    programming solves to near machine precision.  The product w @ g is
    preserved up to roundoff.
    """
    wv = w.copy()
    gv = g.copy()
    k = gv.shape[0]
    floor = np.minimum(wv, 0.0)
    coeff_jac = np.kron(wv, np.eye(k))
    rowsum_jac = np.kron(np.eye(k), np.ones((1, k)))

    def neg_det(x: Array) -> float:
        return -float(np.linalg.det(x.reshape(k, k)))

    def neg_det_grad(x: Array) -> Array:
        s = x.reshape(k, k)
        det = np.linalg.det(s)
        return (-det * np.linalg.inv(s).T).ravel()

    res = minimize(
        neg_det,
        np.eye(k).ravel(),
        jac=neg_det_grad,
        method="SLSQP",
        constraints=[
            {"type": "ineq",
             "fun": lambda x: (wv @ x.reshape(k, k) - floor).ravel(),
             "jac": lambda x: coeff_jac},
            {"type": "eq",
             "fun": lambda x: x.reshape(k, k).sum(axis=1) - 1.0,
             "jac": lambda x: rowsum_jac},
        ],
        options={"maxiter": 400, "ftol": 1e-14},
    )
    s = res.x.reshape(k, k)
    if not np.isfinite(s).all() or np.linalg.det(s) <= 1.0 - 1e-12:
        return wv, gv
    return wv @ s, np.linalg.solve(s, gv)


def _affine_ls_rows(targets: Array, basis: Array) -> Array:
    """Per-row least squares with coefficients summing to one, sign-free."""
    k = basis.shape[0]
    q = basis @ basis.T
    m = np.zeros((k + 1, k + 1))
    m[:k, :k] = 2.0 * q
    m[:k, k] = -1.0
    m[k, :k] = 1.0
    rhs = np.empty((k + 1, targets.shape[0]))
    rhs[:k] = 2.0 * (basis @ targets.T)
    rhs[k] = 1.0
    try:
        sol = np.linalg.solve(m, rhs)
    except np.linalg.LinAlgError:
        sol = np.linalg.lstsq(m, rhs, rcond=None)[0]
    return sol[:k].T


def emma_fit(p, cfg: EmmaConfig) -> FitResult:
    """Budget factorization by reduced rank plus simplex expansion.

    The objective trace records the coefficient negativity mass after each
    accepted expansion pass (non-increasing by construction).  The final
    coefficients are re-solved on the simplex against the expanded basis,
    and the residual is taken against the original data.
    """
    comp = p if isinstance(p, CompositionMatrix) else CompositionMatrix.from_rows(values_of(p))
    a = comp.values
    i, j = a.shape
    k = cfg.k
    if not (1 <= k <= min(i, j)):
        raise RankOutOfRangeError(f"rank {k} outside 1..{min(i, j)}")

    stage1 = emma_stage1(comp, k)
    s1 = stage1.values
    if k == 1:
        g = s1.mean(axis=0, keepdims=True)
        g = g / g.sum()
        w = np.ones((i, 1))
        fact = BudgetFactorization(CompositionMatrix(w), CompositionMatrix(g))
        res = a - fact.reconstruct()
        return FitResult(
            factorization=fact,
            residual=res,
            objective_trace=(0.0,),
            best_restart=0,
            seed_used=cfg.fcm_seed,
            diagnostics={"stage1_residual": float(np.linalg.norm(a - s1)), "expansions": 0},
        )

    g = None
    for attempt in range(5):
        centers = fuzzy_cmeans(s1, k, fuzzifier=cfg.fuzzifier, seed=cfg.fcm_seed + attempt).values
        if np.linalg.matrix_rank(centers, tol=1e-9) == k:
            g = np.array(centers)
            break
    if g is None:
        raise DegenerateFitError("cluster seeding produced linearly dependent basis rows")
    g = np.clip(g, 0.0, None)
    g /= g.sum(axis=1, keepdims=True)

    w = _affine_ls_rows(s1, g)
    neg_budget = cfg.neg_tolerance * i  # fraction of the total coefficient mass
    trace = [_negativity(w)]
    step = cfg.expand_step
    expansions = 0
    while trace[-1] > neg_budget and expansions < cfg.max_expand and step > 1e-8:
        transform, w_m, g_m = expand_simplex_once(w, g, step)
        expansions += 1
        if np.array_equal(transform.values, np.eye(k)):
            step *= 0.5
            continue
        w, g = w_m.values, g_m.values
        trace.append(_negativity(w))

    flags = ()
    if trace[-1] > neg_budget:
        flags = (FLAG_EXPANSION_STALL,)

    # the last accepted expansion overshoots by up to one step; trim back
    # without exceeding the negativity level the expansion reached
    w, g = _trim_overshoot(w, g)

    # basis rows can end slightly negative after expansion; clip, restore
    # row sums, then re-solve the coefficients on the simplex
    g = np.clip(g, 0.0, None)
    g /= g.sum(axis=1, keepdims=True)
    w_final = _simplex_ls_rows(s1, g)
    fact = BudgetFactorization(CompositionMatrix(w_final), CompositionMatrix(g))
    res = a - fact.reconstruct()
    return FitResult(
        factorization=fact,
        residual=res,
        objective_trace=trace,
        best_restart=0,
        seed_used=cfg.fcm_seed,
        flags=flags,
        diagnostics={
            "stage1_residual": float(np.linalg.norm(a - s1)),
            "expansions": expansions,
            "final_negativity": _negativity(w),
        },
    )
