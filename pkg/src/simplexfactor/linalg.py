"""Numerical primitives shared by every solver.

Normalizations, truncated SVD, least squares constrained to the unit
simplex (single and batched), nonnegative least squares, and fuzzy
c-means.  Everything here is deterministic: identical inputs and seeds
give identical outputs.
"""

from __future__ import annotations

from typing import Optional, Tuple

import numpy as np

from .errors import (
    DegenerateBasisError,
    NegativeEntryError,
    RankOutOfRangeError,
    ZeroMatrixError,
    ZeroRowError,
)
from .matrices import CompositionMatrix, JointProbMatrix, Matrix, RowMassVector, values_of

Array = np.ndarray

_EPS = 1e-12


# ---------------------------------------------------------------------------
# normalizations


def row_normalize(x) -> Tuple[CompositionMatrix, RowMassVector]:
    """Divide each row by its sum.

    Returns the row-stochastic matrix together with the row sums, so the
    original matrix is recovered (to rounding) as ``masses[:, None] * comp``.
    """
    a = values_of(x)
    if np.any(a < 0):
        raise NegativeEntryError("row_normalize requires nonnegative entries")
    sums = a.sum(axis=1)
    if np.any(sums <= 0):
        i = int(np.argmax(sums <= 0))
        raise ZeroRowError(f"row {i} sums to zero")
    return CompositionMatrix(a / sums[:, None]), RowMassVector(sums)


def total_normalize(x) -> JointProbMatrix:
    """Divide every entry by the grand total."""
    a = values_of(x)
    if np.any(a < 0):
        raise NegativeEntryError("total_normalize requires nonnegative entries")
    total = float(a.sum())
    if total <= 0:
        raise ZeroMatrixError("matrix grand total is zero")
    return JointProbMatrix(a / total)


# ---------------------------------------------------------------------------
# truncated SVD


def svd_truncate(x, k: int) -> Tuple[Matrix, Matrix]:
    """Best rank-k approximation, returned as (rows x k) @ (k x cols).

    The sign of each component is fixed so that the largest-magnitude entry
    of the right factor row is positive, making the output canonical.
    """
    a = values_of(x)
    if a.ndim != 2:
        raise ValueError("svd_truncate expects a 2-D matrix")
    if not (1 <= k <= min(a.shape)):
        raise RankOutOfRangeError(f"rank {k} outside 1..{min(a.shape)}")
    u, s, vt = np.linalg.svd(a, full_matrices=False)
    u = u[:, :k].copy()
    vt = vt[:k].copy()
    for r in range(k):
        j = int(np.argmax(np.abs(vt[r])))
        if vt[r, j] < 0:
            vt[r] = -vt[r]
            u[:, r] = -u[:, r]
    left = u * s[:k]
    return Matrix(left), Matrix(vt)


# ---------------------------------------------------------------------------
# simplex-constrained least squares


def project_to_simplex(v) -> Array:
    """Euclidean projection of each row of ``v`` onto the unit simplex.

    Sort-based exact algorithm; accepts a single vector or a stack of rows.
    """
    a = np.asarray(v, dtype=float)
    single = a.ndim == 1
    rows = np.atleast_2d(a)
    n, d = rows.shape
    srt = np.sort(rows, axis=1)[:, ::-1]
    css = np.cumsum(srt, axis=1) - 1.0
    idx = np.arange(1, d + 1)
    cond = srt - css / idx > 0
    rho = d - np.argmax(cond[:, ::-1], axis=1) - 1  # last True per row
    theta = css[np.arange(n), rho] / (rho + 1)
    out = np.clip(rows - theta[:, None], 0.0, None)
    return out[0] if single else out


def _face_system(Q: Array, q: Array, free: Array) -> Tuple[Array, float]:
    """Solve the equality-constrained problem with only ``free`` coordinates.

    Minimizes c'Qc - 2q'c subject to sum(c) = 1, c zero off the free set.
    Returns the free coefficients and the sum-constraint multiplier.
    """
    f = int(free.sum())
    m = np.zeros((f + 1, f + 1))
    m[:f, :f] = 2.0 * Q[np.ix_(free, free)]
    m[:f, f] = -1.0
    m[f, :f] = 1.0
    rhs = np.concatenate([2.0 * q[free], [1.0]])
    try:
        sol = np.linalg.solve(m, rhs)
    except np.linalg.LinAlgError:
        sol = np.linalg.lstsq(m, rhs, rcond=None)[0]
    return sol[:f], float(sol[f])


def simplex_kkt_residual(c, target, basis, weights=None) -> float:
    """Max KKT violation of ``c`` for least squares on the unit simplex.

    Zero (up to tolerance) certifies optimality: primal feasibility,
    stationarity on the support, and nonnegative multipliers off it.
    """
    b = values_of(basis)
    t = np.asarray(target, dtype=float)
    c = np.asarray(c, dtype=float)
    w = np.ones(b.shape[1]) if weights is None else np.asarray(weights, dtype=float)
    grad = 2.0 * ((c @ b - t) * w) @ b.T
    support = c > 1e-10
    if not support.any():
        support = c >= c.max()
    mu = float(np.mean(grad[support]))
    res = abs(float(c.sum()) - 1.0)
    res = max(res, float(max(0.0, -(c.min()))))
    res = max(res, float(np.max(np.abs(grad[support] - mu))))
    off = ~support
    if off.any():
        res = max(res, float(max(0.0, np.max(mu - grad[off]))))
    return res


def simplex_ls(target, basis, weights=None, max_pivots: Optional[int] = None) -> Array:
    """Least squares on the unit simplex.

    Minimizes ``sum_j weights_j (target_j - (c @ basis)_j)^2`` over
    coefficient vectors with ``c >= 0`` and ``sum(c) = 1``.  Solved by an
    active-set iteration started from the simplex projection of the
    equality-constrained solution; if the pivot budget (10k) is exhausted
    the exact face enumeration used by the batched solver takes over.
    """
    b = values_of(basis)
    t = np.asarray(target, dtype=float).ravel()
    k, j = b.shape
    if t.size != j:
        raise ValueError(f"target length {t.size} does not match basis columns {j}")
    w = np.ones(j) if weights is None else np.asarray(weights, dtype=float).ravel()
    if np.any(w < 0):
        raise NegativeEntryError("weights must be nonnegative")

    bw = b * w
    Q = bw @ b.T
    q = bw @ t
    scale = max(1.0, float(np.trace(Q)))
    if max_pivots is None:
        max_pivots = 10 * k

    if k == 1:
        return np.ones(1)

    # interior step: equality-constrained solution projected onto the simplex
    c0, _ = _face_system(Q, q, np.ones(k, dtype=bool))
    free = project_to_simplex(c0) > 0
    if not free.any():
        free[:] = True

    c = np.zeros(k)
    for _ in range(max_pivots):
        cf, mu = _face_system(Q, q, free)
        if cf.size and cf.min() < -1e-12:
            # drop the most negative coordinate and re-solve
            order = np.flatnonzero(free)
            free[order[int(np.argmin(cf))]] = False
            if not free.any():
                break
            continue
        c[:] = 0.0
        c[free] = np.clip(cf, 0.0, None)
        lam = 2.0 * (Q @ c - q) - mu
        blocked = ~free
        if not blocked.any() or lam[blocked].min() >= -1e-11 * scale:
            s = c.sum()
            if s > 0:
                c /= s
            if simplex_kkt_residual(c, t, b, w) <= 1e-9 * scale:
                return c
            break
        order = np.flatnonzero(blocked)
        free[order[int(np.argmin(lam[blocked]))]] = True
    # pivot budget exhausted or KKT check missed: exact enumeration
    out = _simplex_ls_rows(t[None, :], b, weights=w)[0]
    if simplex_kkt_residual(out, t, b, w) > 1e-9 * scale:
        if np.any(np.all(b == 0, axis=1)):
            raise DegenerateBasisError("zero basis row blocks the KKT optimality check")
    return out


def _simplex_ls_rows(targets, basis, weights=None) -> Array:
    """Simplex least squares for every row of ``targets`` at once.

    Enumerates the 2^k - 1 candidate supports, solves each bordered system
    for all rows simultaneously, and keeps the feasible candidate with the
    lowest objective.  Exact for the small k this package targets; the
    scalar ``simplex_ls`` is pinned to it by tests.

    ``weights`` may be absent, one vector shared by all rows, or a full
    per-row matrix matching ``targets``.
    """
    T = np.atleast_2d(np.asarray(targets, dtype=float))
    B = values_of(basis)
    n, j = T.shape
    k = B.shape[0]
    if k > 16:
        raise ValueError("batched enumeration is limited to 16 basis rows")
    if k == 1:
        return np.ones((n, 1))

    per_row = weights is not None and np.asarray(weights).ndim == 2
    if per_row:
        W = np.asarray(weights, dtype=float)
        Q = np.einsum("kj,nj,lj->nkl", B, W, B)
        q = np.einsum("nj,nj,kj->nk", T, W, B)
    else:
        w = np.ones(j) if weights is None else np.asarray(weights, dtype=float).ravel()
        bw = B * w
        Qs = bw @ B.T
        q = T @ bw.T
        Q = None

    best_obj = np.full(n, np.inf)
    best = np.zeros((n, k))
    rows_idx = np.arange(n)

    for mask in range(1, 1 << k):
        F = np.array([i for i in range(k) if mask >> i & 1])
        f = F.size
        rhs = np.empty((n, f + 1))
        rhs[:, :f] = 2.0 * q[:, F]
        rhs[:, f] = 1.0
        if per_row:
            M = np.zeros((n, f + 1, f + 1))
            M[:, :f, :f] = 2.0 * Q[np.ix_(rows_idx, F, F)]
            M[:, :f, f] = -1.0
            M[:, f, :f] = 1.0
            try:
                sol = np.linalg.solve(M, rhs[..., None])[..., 0]
            except np.linalg.LinAlgError:
                continue
            cf = sol[:, :f]
            obj = np.einsum("nf,nfg,ng->n", cf, Q[np.ix_(rows_idx, F, F)], cf) - 2.0 * np.einsum(
                "nf,nf->n", q[:, F], cf
            )
        else:
            M = np.zeros((f + 1, f + 1))
            M[:f, :f] = 2.0 * Qs[np.ix_(F, F)]
            M[:f, f] = -1.0
            M[f, :f] = 1.0
            try:
                Minv = np.linalg.inv(M)
            except np.linalg.LinAlgError:
                continue
            sol = rhs @ Minv.T
            cf = sol[:, :f]
            obj = np.einsum("nf,fg,ng->n", cf, Qs[np.ix_(F, F)], cf) - 2.0 * np.einsum(
                "nf,nf->n", q[:, F], cf
            )
        feas = cf.min(axis=1) >= -1e-12
        margin = 1e-15 * np.maximum(1.0, np.abs(obj))
        improve = feas & np.isfinite(obj) & (np.isinf(best_obj) | (obj < best_obj - margin))
        if improve.any():
            best_obj[improve] = obj[improve]
            block = np.zeros((int(improve.sum()), k))
            block[:, F] = cf[improve]
            best[improve] = block

    best = np.clip(best, 0.0, None)
    sums = best.sum(axis=1)
    good = sums > 0
    best[good] /= sums[good, None]
    if not good.all():
        best[~good] = 1.0 / k
    return best


def nonneg_ls(basis, target, max_iter: Optional[int] = None) -> Tuple[Array, float]:
    """Nonnegative least squares: min ||target - c @ basis|| with c >= 0.

    Lawson-Hanson active-set on the rows of ``basis`` as generators.
    Returns the coefficients and the residual 2-norm.
    """
    B = values_of(basis)
    t = np.asarray(target, dtype=float).ravel()
    k = B.shape[0]
    A = B.T  # columns are generators
    if max_iter is None:
        max_iter = 3 * k + 30
    passive = np.zeros(k, dtype=bool)
    c = np.zeros(k)
    scale = max(1.0, float(np.abs(A).max()) * max(1.0, float(np.abs(t).max())))
    for _ in range(max_iter):
        resid = t - c @ B
        grad = B @ resid
        grad[passive] = -np.inf
        i = int(np.argmax(grad))
        if grad[i] <= 1e-12 * scale:
            break
        passive[i] = True
        while True:
            sol, *_ = np.linalg.lstsq(A[:, passive], t, rcond=None)
            if sol.size == 0 or sol.min() > 0:
                c[:] = 0.0
                c[passive] = sol
                break
            full = np.zeros(k)
            full[passive] = sol
            neg = passive & (full <= 0)
            with np.errstate(divide="ignore", invalid="ignore"):
                ratios = np.where(neg, c / (c - full), np.inf)
            alpha = float(np.min(ratios[neg])) if neg.any() else 0.0
            c = c + alpha * (full - c)
            passive &= c > 1e-14
            c[~passive] = 0.0
            if not passive.any():
                break
        if not passive.any():
            break
    resid = t - c @ B
    return c, float(np.linalg.norm(resid))


def weighted_simplex_projection(point, weights) -> Array:
    """Minimize ``sum_j weights_j (c_j - point_j)^2`` over the unit simplex.

    Exact breakpoint scan on the piecewise-linear KKT condition.  Positive
    weights required; equal weights reduce to the Euclidean projection.
    """
    b = np.asarray(point, dtype=float).ravel()
    a = np.asarray(weights, dtype=float).ravel()
    if np.any(a <= 0):
        floor = max(a.max(), 0.0)
        if floor <= 0:
            return project_to_simplex(b)
        a = np.maximum(a, 1e-12 * floor)
    inv = 0.5 / a
    # c_j = max(0, b_j - mu * inv_j); find mu with sum(c) = 1
    thresh = b / inv
    order = np.argsort(thresh)[::-1]
    sb = 0.0
    si = 0.0
    mu = None
    for pos, idx in enumerate(order):
        sb += b[idx]
        si += inv[idx]
        cand = (sb - 1.0) / si
        nxt = thresh[order[pos + 1]] if pos + 1 < order.size else -np.inf
        if nxt <= cand <= thresh[idx]:
            mu = cand
            break
    if mu is None:
        mu = (b.sum() - 1.0) / inv.sum()
    return np.clip(b - mu * inv, 0.0, None)


# ---------------------------------------------------------------------------
# fuzzy c-means


def fuzzy_cmeans(
    data,
    k: int,
    fuzzifier: float = 2.0,
    seed: int = 0,
    max_iter: int = 500,
    tol: float = 1e-9,
) -> Matrix:
    """Fuzzy c-means cluster centers of the rows of ``data``.

    Memberships start from a seeded uniform draw; iteration alternates the
    standard center and membership updates until center movement falls
    below ``tol``.  A cluster whose fuzzy mass collapses to zero is
    re-seeded at the row worst served by the current centers.  Centers are
    convex combinations of data rows throughout.
    """
    rows = values_of(data)
    n, j = rows.shape
    if not (1 <= k <= n):
        raise ValueError(f"cluster count {k} outside 1..{n}")
    if not fuzzifier > 1.0:
        raise ValueError("fuzzifier must exceed 1")
    rng = np.random.default_rng(seed)
    u = rng.uniform(size=(n, k))
    u /= u.sum(axis=1, keepdims=True)
    centers = np.zeros((k, j))
    power = 2.0 / (fuzzifier - 1.0)
    for _ in range(max_iter):
        um = u**fuzzifier
        mass = um.sum(axis=0)
        dead = mass <= n * 1e-15
        centers_new = np.zeros_like(centers)
        alive = ~dead
        centers_new[alive] = (um[:, alive].T @ rows) / mass[alive, None]
        if dead.any():
            if alive.any():
                d2 = ((rows[:, None, :] - centers_new[None, alive, :]) ** 2).sum(axis=2)
                served = d2.min(axis=1)
            else:
                served = (rows**2).sum(axis=1)
            # distinct worst-served rows, one per collapsed cluster
            order = np.argsort(-served, kind="stable")
            centers_new[dead] = rows[order[: int(dead.sum())]]
        move = float(np.max(np.abs(centers_new - centers)))
        centers = centers_new
        d2 = ((rows[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        exact = d2 <= 1e-30
        u = np.zeros((n, k))
        hit = exact.any(axis=1)
        if hit.any():
            first = np.argmax(exact[hit], axis=1)
            u[np.flatnonzero(hit), first] = 1.0
        rest = ~hit
        if rest.any():
            inv = d2[rest] ** (-power / 2.0) if power != 2.0 else 1.0 / d2[rest]
            u[rest] = inv / inv.sum(axis=1, keepdims=True)
        if move < tol:
            break
    return Matrix(centers)
