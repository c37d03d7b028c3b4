"""Latent budget analysis: EM and constrained weighted least squares
estimation, plus identification of inner/outer extreme representations by
simulated-annealing search over row-stochastic transforms.

The fitted product coeff @ basis is an equivalence class; the extreme
search walks inside that class (product preserved) optimizing the
column-mass-weighted spread between basis rows.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .errors import RankOutOfRangeError
from .linalg import (
    _simplex_ls_rows,
    project_to_simplex,
    row_normalize,
    weighted_simplex_projection,
)
from .matrices import CompositionMatrix, values_of
from .models import BudgetFactorization, TransformMatrix, apply_transform
from .results import FLAG_NON_CONVERGENCE, FitResult

Array = np.ndarray

_ZERO_CLAMP = 1e-12


@dataclass(frozen=True)
class LbaConfig:
    k: int
    estimator: str = "em"
    weights: Optional[object] = None  # cwls only; per-cell nonnegative array
    max_iter: int = 2000
    tol: float = 1e-9
    restarts: int = 20
    seed: int = 0

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be at least 1")
        if self.estimator not in ("em", "cwls"):
            raise ValueError(f"unknown estimator {self.estimator!r}")
        if self.weights is not None:
            w = np.asarray(self.weights, dtype=float)
            if np.any(w < 0):
                raise ValueError("weights must be nonnegative")
            if self.estimator == "em":
                raise ValueError("per-cell weights apply to the cwls estimator only")
        if self.tol < 0:
            raise ValueError("tol must be nonnegative")


@dataclass(frozen=True)
class ExtremeSearchConfig:
    direction: str
    column_mass: object
    steps: int = 200_000
    proposal_scale: float = 0.05
    temperature: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.direction not in ("inner", "outer"):
            raise ValueError(f"direction must be 'inner' or 'outer', got {self.direction!r}")
        cm = np.asarray(self.column_mass, dtype=float).ravel()
        if np.any(cm <= 0):
            raise ValueError("column masses must be positive")
        if self.steps < 1:
            raise ValueError("steps must be at least 1")
        object.__setattr__(self, "column_mass", cm)


def seeded_budget_init(rng: np.random.Generator, i: int, j: int, k: int) -> Tuple[Array, Array]:
    """Row-normalized uniform starting factors.

    Shared by the latent-budget and latent-class EM solvers so identical
    seeds give identical starting points across modules.
    """
    w = rng.uniform(size=(i, k))
    w /= w.sum(axis=1, keepdims=True)
    g = rng.uniform(size=(k, j))
    g /= g.sum(axis=1, keepdims=True)
    return w, g


def _clamp_zeros(m: Array) -> Array:
    """Zero out entries below the absorbing threshold and renormalize rows."""
    m = np.where(m < _ZERO_CLAMP, 0.0, m)
    s = m.sum(axis=1, keepdims=True)
    s[s == 0] = 1.0
    return m / s


def _check_counts(x) -> Array:
    a = values_of(x)
    if np.any(a < 0):
        raise ValueError("counts must be nonnegative")
    if np.max(np.abs(a - np.rint(a))) > 1e-9:
        raise ValueError("the EM estimator requires integer counts")
    if np.any(a.sum(axis=1) <= 0):
        raise ValueError("every row must have a positive total")
    return np.rint(a)


def saturated_log_likelihood(counts) -> float:
    """Log-likelihood of the model fitting every cell proportion exactly."""
    a = values_of(counts)
    n = a.sum(axis=1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = a * np.log(a / n)
    return float(np.nansum(np.where(a > 0, terms, 0.0)))


def fit_lba_em(counts, cfg: LbaConfig) -> FitResult:
    """Maximum-likelihood budget fit of a count table by EM.

    The model is an independent multinomial per row with cell
    probabilities coeff @ basis.  The log-likelihood trace is
    non-decreasing; parameters that hit zero stay zero (absorbing), which
    the multi-restart default mitigates.
    """
    if cfg.estimator != "em":
        raise ValueError("cfg.estimator must be 'em'")
    a = _check_counts(counts)
    i, j = a.shape
    if not (1 <= cfg.k <= min(i, j)):
        raise RankOutOfRangeError(f"rank {cfg.k} outside 1..{min(i, j)}")
    n = a.sum(axis=1)
    best = None
    for r in range(cfg.restarts):
        rng = np.random.default_rng(cfg.seed + r)
        w, g = seeded_budget_init(rng, i, j, cfg.k)
        trace = []
        converged = False
        for _ in range(cfg.max_iter):
            pi = w @ g
            ll = float(np.sum(a * np.log(np.maximum(pi, 1e-300))))
            trace.append(ll)
            if len(trace) > 1 and abs(trace[-1] - trace[-2]) <= cfg.tol * max(1.0, abs(trace[-2])):
                converged = True
                break
            ratio = np.where(pi > 0, a / np.maximum(pi, 1e-300), 0.0)
            w_new = w * (ratio @ g.T) / n[:, None]
            g_new = g * (w.T @ ratio)
            w = _clamp_zeros(w_new)
            g = _clamp_zeros(g_new)
        pi = w @ g
        ll = float(np.sum(a * np.log(np.maximum(pi, 1e-300))))
        trace.append(ll)
        cand = (ll, r, w, g, tuple(trace), converged)
        if best is None or cand[0] > best[0]:
            best = cand
    ll, r, w, g, trace, converged = best
    fact = BudgetFactorization(CompositionMatrix(w), CompositionMatrix(g))
    recon = n[:, None] * (w @ g)
    flags = () if converged else (FLAG_NON_CONVERGENCE,)
    return FitResult(
        factorization=fact,
        residual=a - recon,
        objective_trace=trace,
        best_restart=r,
        seed_used=cfg.seed,
        flags=flags,
        diagnostics={
            "log_likelihood": ll,
            "saturated_log_likelihood": saturated_log_likelihood(a),
        },
    )


def _cwls_objective(p: Array, w: Array, g: Array, v: Optional[Array]) -> float:
    e = p - w @ g
    if v is None:
        return float((e * e).sum())
    return float((v * e * e).sum())


def fit_lba_cwls(p, cfg: LbaConfig) -> FitResult:
    """Least-squares budget fit of a composition matrix.

    Alternates exact blocks: every coefficient row by simplex least
    squares, then every basis row by an exact weighted projection, so the
    (weighted) squared residual never increases.
    """
    if cfg.estimator != "cwls":
        raise ValueError("cfg.estimator must be 'cwls'")
    comp = p if isinstance(p, CompositionMatrix) else CompositionMatrix.from_rows(values_of(p))
    a = comp.values
    i, j = a.shape
    if not (1 <= cfg.k <= min(i, j)):
        raise RankOutOfRangeError(f"rank {cfg.k} outside 1..{min(i, j)}")
    v = None if cfg.weights is None else np.broadcast_to(np.asarray(cfg.weights, dtype=float), a.shape)
    best = None
    for r in range(cfg.restarts):
        rng = np.random.default_rng(cfg.seed + r)
        w, g = seeded_budget_init(rng, i, j, cfg.k)
        trace = [_cwls_objective(a, w, g, v)]
        converged = False
        for _ in range(cfg.max_iter):
            w = _simplex_ls_rows(a, g, weights=v)
            for k in range(cfg.k):
                others = a - w @ g + np.outer(w[:, k], g[k])
                if v is None:
                    den = float((w[:, k] ** 2).sum())
                    if den <= 1e-300:
                        continue
                    target = (w[:, k] @ others) / den
                    g[k] = project_to_simplex(target)
                else:
                    den = v.T @ (w[:, k] ** 2)  # per-column quadratic weight
                    if den.max() <= 1e-300:
                        continue
                    num = (v * others).T @ w[:, k]
                    g[k] = weighted_simplex_projection(num / np.maximum(den, 1e-300), den)
            obj = _cwls_objective(a, w, g, v)
            trace.append(obj)
            if abs(trace[-2] - obj) <= cfg.tol * max(1.0, abs(trace[-2])):
                converged = True
                break
        cand = (trace[-1], r, w, g, tuple(trace), converged)
        if best is None or cand[0] < best[0]:
            best = cand
    obj, r, w, g, trace, converged = best
    w = _simplex_ls_rows(a, g, weights=v)
    trace = trace + (_cwls_objective(a, w, g, v),)
    gpos = np.clip(g, 0.0, None)
    fact = BudgetFactorization(CompositionMatrix(w), CompositionMatrix(gpos / gpos.sum(axis=1, keepdims=True)))
    flags = () if converged else (FLAG_NON_CONVERGENCE,)
    return FitResult(
        factorization=fact,
        residual=a - fact.reconstruct(),
        objective_trace=trace,
        best_restart=r,
        seed_used=cfg.seed,
        flags=flags,
    )


# ---------------------------------------------------------------------------
# extreme-solution identification


def chi_square_spread(g, column_mass) -> float:
    """Sum over basis-row pairs of the column-mass-weighted distances.

    Each pairwise term is sqrt(sum_j (g_kj - g_k'j)^2 / column_mass_j);
    zero exactly when all rows coincide.
    """
    gv = values_of(g)
    cm = np.asarray(column_mass, dtype=float).ravel()
    if np.any(cm <= 0):
        raise ValueError("column masses must be positive")
    k = gv.shape[0]
    total = 0.0
    for p in range(k):
        d = gv[p + 1 :] - gv[p]
        total += float(np.sqrt((d * d / cm).sum(axis=1)).sum())
    return total


def _feasible(w: Array, g: Array, t: Array, tol: float = 1e-13) -> Optional[Tuple[Array, Array]]:
    """Transformed pair (w @ t^-1, t @ g) if entrywise feasible, else None."""
    try:
        wt = np.linalg.solve(t.T, w.T).T
    except np.linalg.LinAlgError:
        return None
    if wt.min() < -tol:
        return None
    tg = t @ g
    if tg.min() < -tol:
        return None
    return wt, tg


def _spread_of_t(t: Array, g: Array, cm: Array) -> float:
    return chi_square_spread(t @ g, cm)


def _polish_extreme(
    t: Array, w: Array, g: Array, cm: Array, sign: float, sweeps: int = 60
) -> Array:
    """Deterministic coordinate refinement after the stochastic search.

    For each off-diagonal coordinate of T (the diagonal absorbs the row-sum
    constraint) the feasible segment is located by bisection and the
    objective is optimized over it: endpoints always, plus golden-section
    inside for the minimization direction, where each pairwise term is a
    norm of an affine function of the coordinate, hence convex.
    """
    k = t.shape[0]
    gold = (math.sqrt(5.0) - 1.0) / 2.0

    def score(tm: Array) -> float:
        return sign * _spread_of_t(tm, g, cm)

    def with_coord(base: Array, r: int, c: int, val: float) -> Array:
        out = base.copy()
        delta = val - out[r, c]
        out[r, c] = val
        out[r, r] -= delta
        return out

    cur = score(t)
    for _ in range(sweeps):
        improved = False
        for r in range(k):
            for c in range(k):
                if r == c:
                    continue
                t0 = t[r, c]
                # locate the feasible segment around t0 in this coordinate
                lo, hi = t0, t0
                for direction in (-1.0, 1.0):
                    span = 0.25
                    edge = t0
                    for _grow in range(60):
                        cand = t0 + direction * span
                        if _feasible(w, g, with_coord(t, r, c, cand)) is None:
                            break
                        edge = cand
                        span *= 2.0
                    far = t0 + direction * span
                    near = edge
                    for _bis in range(80):
                        mid = 0.5 * (near + far)
                        if _feasible(w, g, with_coord(t, r, c, mid)) is None:
                            far = mid
                        else:
                            near = mid
                    if direction < 0:
                        lo = near
                    else:
                        hi = near
                best_val, best_score = t0, cur
                for cand in (lo, hi):
                    s = score(with_coord(t, r, c, cand))
                    if s < best_score - 1e-15:
                        best_val, best_score = cand, s
                if sign > 0 and hi > lo:
                    # golden-section for the interior minimum
                    a_, b_ = lo, hi
                    x1 = b_ - gold * (b_ - a_)
                    x2 = a_ + gold * (b_ - a_)
                    f1 = score(with_coord(t, r, c, x1))
                    f2 = score(with_coord(t, r, c, x2))
                    for _gs in range(70):
                        if f1 <= f2:
                            b_, x2, f2 = x2, x1, f1
                            x1 = b_ - gold * (b_ - a_)
                            f1 = score(with_coord(t, r, c, x1))
                        else:
                            a_, x1, f1 = x1, x2, f2
                            x2 = a_ + gold * (b_ - a_)
                            f2 = score(with_coord(t, r, c, x2))
                    for cand in (0.5 * (a_ + b_), x1, x2):
                        if _feasible(w, g, with_coord(t, r, c, cand)) is None:
                            continue
                        s = score(with_coord(t, r, c, cand))
                        if s < best_score - 1e-15:
                            best_val, best_score = cand, s
                if best_val != t0:
                    t = with_coord(t, r, c, best_val)
                    cur = best_score
                    improved = True
        if not improved:
            break
    return t


def _refine_extreme(t0: Array, w: Array, g: Array, cm: Array, sign: float) -> Array:
    """Deterministic refinement of the best sampled transform.

    Extreme states sit on the nonnegativity boundary with several active
    constraints, where single-coordinate moves stall; an active-set
    solver over the off-diagonal coordinates can slide along that
    boundary instead. Several deterministic starts are tried, every
    result is pulled back to strict feasibility, and the most promising
    candidates are finished with coordinate search.
    """
    from scipy.optimize import minimize

    k = t0.shape[0]
    off = [(r, c) for r in range(k) for c in range(k) if r != c]

    def to_t(th: Array) -> Array:
        t = np.eye(k)
        for (r, c), val in zip(off, th):
            t[r, c] = val
        for r in range(k):
            t[r, r] = 1.0 - (t[r].sum() - t[r, r])
        return t

    def to_th(t: Array) -> Array:
        return np.array([t[r, c] for r, c in off])

    def objective(th: Array) -> float:
        return sign * _spread_of_t(to_t(th), g, cm)

    def constraints(th: Array) -> Array:
        t = to_t(th)
        tg = (t @ g).ravel()
        try:
            wt = np.linalg.solve(t.T, w.T).T.ravel()
        except np.linalg.LinAlgError:
            wt = np.full(w.size, -1.0)
        return np.concatenate([tg, wt, [abs(np.linalg.det(t)) - 1e-8]])

    starts = [to_th(t0), np.zeros(len(off))]
    if k == 3:
        # triangles through extreme fitted rows are strong inner starts
        try:
            from scipy.spatial import ConvexHull, QhullError

            corners = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, math.sqrt(3.0) / 2.0]])
            hull = ConvexHull(w @ corners)
            fit = w @ g
            for trio in itertools.combinations(hull.vertices.tolist(), 3):
                t = fit[list(trio), :] @ np.linalg.pinv(g)
                if abs(np.linalg.det(t)) < 1e-6:
                    continue
                starts.append(to_th(t / t.sum(axis=1, keepdims=True)))
        except QhullError:
            pass

    scored = []
    for th in starts:
        try:
            res = minimize(
                objective,
                th,
                method="SLSQP",
                constraints=[{"type": "ineq", "fun": constraints}],
                options={"maxiter": 300, "ftol": 1e-12},
            )
        except (ValueError, np.linalg.LinAlgError):
            continue
        t = to_t(res.x)
        if _feasible(w, g, t) is None:
            # pull back toward the known-feasible chain state
            lo, hi = 0.0, 1.0
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                if _feasible(w, g, t0 + mid * (t - t0)) is None:
                    hi = mid
                else:
                    lo = mid
            t = t0 + lo * (t - t0)
            if _feasible(w, g, t) is None:
                continue
        scored.append((sign * _spread_of_t(t, g, cm), t))
    scored.sort(key=lambda sv: sv[0])

    candidates = [_polish_extreme(t0, w, g, cm, sign)]
    for _, t in scored[:3]:
        candidates.append(_polish_extreme(t, w, g, cm, sign))
    best_t, best_v = None, math.inf
    for t in candidates:
        if _feasible(w, g, t) is None:
            continue
        v = sign * _spread_of_t(t, g, cm)
        if v < best_v - 1e-15:
            best_t, best_v = t, v
    return t0 if best_t is None else best_t


def extreme_solution(
    b: BudgetFactorization, cfg: ExtremeSearchConfig
) -> Tuple[BudgetFactorization, TransformMatrix, float]:
    """Identify the inner or outer extreme member of a fit's equivalence
    class.

    A Metropolis chain over row-stochastic transforms T perturbs one
    off-diagonal coordinate at a time (the diagonal keeps rows summing to
    one), rejects infeasible states, and anneals the temperature; the best
    feasible state is then refined by deterministic active-set and
    coordinate search. The product coeff @ basis is preserved throughout.
    """
    w = b.coeff.values.copy()
    g = b.basis.values.copy()
    k = b.k
    cm = np.asarray(cfg.column_mass, dtype=float).ravel()
    if cm.size != g.shape[1]:
        raise ValueError("column_mass length must match the basis column count")
    sign = 1.0 if cfg.direction == "inner" else -1.0
    rng = np.random.default_rng(cfg.seed)

    t = np.eye(k)
    cur = sign * _spread_of_t(t, g, cm)
    best_t = t.copy()
    best = cur
    temp = cfg.temperature
    if k > 1:
        offdiag = [(r, c) for r in range(k) for c in range(k) if r != c]
        for _ in range(cfg.steps):
            r_, c_ = offdiag[int(rng.integers(len(offdiag)))]
            delta = rng.normal(0.0, cfg.proposal_scale)
            cand = t.copy()
            cand[r_, c_] += delta
            cand[r_, r_] -= delta
            if _feasible(w, g, cand) is None:
                temp *= 0.999
                continue
            s = sign * _spread_of_t(cand, g, cm)
            if s <= cur or rng.uniform() < math.exp(-(s - cur) / max(temp, 1e-12)):
                t = cand
                cur = s
                if s < best:
                    best_t = cand.copy()
                    best = s
            temp *= 0.999
        best_t = _refine_extreme(best_t, w, g, cm, sign)

    transform = TransformMatrix(best_t, kind="row-stochastic")
    identified = apply_transform(b, transform)
    value = chi_square_spread(identified.basis.values, cm)
    return identified, transform, value
