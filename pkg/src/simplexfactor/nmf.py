"""Nonnegative matrix factorization solvers.

Three fitting routes: plain Frobenius NMF by multiplicative updates,
minimum-volume NMF (Frobenius fit plus a logdet penalty on the basis Gram
matrix, with row-stochastic coefficients), and separable NMF by successive
projection.  All routes are monotone in their stated objective and
deterministic for a fixed seed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .errors import RankDeficientSelectionError, RankOutOfRangeError
from .linalg import _simplex_ls_rows
from .matrices import Matrix, values_of
from .models import NmfFactorization
from .results import FLAG_NON_CONVERGENCE, FLAG_SINGULAR_GRAM, FitResult

Array = np.ndarray


@dataclass(frozen=True)
class NmfConfig:
    k: int
    objective: str = "frobenius"
    lam: Optional[float] = None  # minvol only; None = relative balancing rule
    delta: float = 1e-8
    max_iter: int = 2000
    tol: float = 1e-9
    restarts: int = 20
    seed: int = 0
    row_stochastic_coeff: bool = False

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be at least 1")
        if self.objective not in ("frobenius", "minvol"):
            raise ValueError(f"unknown objective {self.objective!r}")
        if self.objective == "frobenius":
            if self.lam not in (None, 0, 0.0):
                raise ValueError("lam must be 0 for the frobenius objective")
            if self.row_stochastic_coeff:
                raise ValueError("row-stochastic coefficients require the minvol objective")
        else:
            if self.lam is not None and self.lam <= 0:
                raise ValueError("lam must be positive for the minvol objective")
        if self.delta <= 0:
            raise ValueError("delta must be positive")


def _check_input(x, k: int) -> Array:
    a = values_of(x)
    if np.any(a < 0):
        raise ValueError("data must be nonnegative")
    if not (1 <= k <= min(a.shape)):
        raise RankOutOfRangeError(f"rank {k} outside 1..{min(a.shape)}")
    return a


def _init_pair(rng: np.random.Generator, x: Array, k: int, row_stochastic: bool) -> Tuple[Array, Array]:
    """Seeded uniform factors followed by one normalization pass."""
    i, j = x.shape
    w = rng.uniform(size=(i, k))
    h = rng.uniform(size=(k, j))
    if row_stochastic:
        w /= w.sum(axis=1, keepdims=True)
        h *= x.sum() / max((w @ h).sum(), 1e-300)
    else:
        h /= h.sum(axis=1, keepdims=True)
        w *= x.sum() / max((w @ h).sum(), 1e-300)
    return w, h


def _logdet_gram(h: Array, delta: float) -> Tuple[float, bool]:
    gram = h @ h.T + delta * np.eye(h.shape[0])
    sign, logabs = np.linalg.slogdet(gram)
    singular = sign <= 0 or logabs < np.log(1e-300)
    return float(logabs), singular


def fit_frobenius(x, cfg: NmfConfig) -> FitResult:
    """Plain NMF minimizing ||x - coeff @ basis||_F^2 by multiplicative
    updates; best of ``cfg.restarts`` seeded starts."""
    a = _check_input(x, cfg.k)
    best = None
    for r in range(cfg.restarts):
        rng = np.random.default_rng(cfg.seed + r)
        w, h = _init_pair(rng, a, cfg.k, row_stochastic=False)
        trace = [float(((a - w @ h) ** 2).sum())]
        converged = False
        for _ in range(cfg.max_iter):
            wh = w @ h
            w *= (a @ h.T) / np.maximum(wh @ h.T, 1e-300)
            wh = w @ h
            h *= (w.T @ a) / np.maximum(w.T @ wh, 1e-300)
            obj = float(((a - w @ h) ** 2).sum())
            trace.append(obj)
            prev = trace[-2]
            if abs(prev - obj) <= cfg.tol * max(1.0, abs(prev)):
                converged = True
                break
        cand = (trace[-1], r, w, h, tuple(trace), converged)
        if best is None or cand[0] < best[0]:
            best = cand
    obj, r, w, h, trace, converged = best
    # exact zeros keep the rank check honest on degenerate corners
    w = np.clip(w, 0.0, None)
    h = np.clip(h, 0.0, None)
    flags = () if converged else (FLAG_NON_CONVERGENCE,)
    return FitResult(
        factorization=NmfFactorization(Matrix(w), Matrix(h)),
        residual=a - w @ h,
        objective_trace=trace,
        best_restart=r,
        seed_used=cfg.seed,
        flags=flags,
    )


def _minvol_objective(a: Array, w: Array, h: Array, lam: float, delta: float) -> Tuple[float, bool]:
    logdet, singular = _logdet_gram(h, delta)
    return float(((a - w @ h) ** 2).sum()) + lam * logdet, singular


def fit_minvol(x, cfg: NmfConfig) -> FitResult:
    """Minimum-volume NMF: Frobenius misfit plus lam * logdet(HH' + delta I),
    coefficients constrained to the unit simplex row by row.

    Alternates an exact per-row simplex least-squares update of the
    coefficients with a projected-gradient basis update accepted only when
    the regularized objective decreases (backtracking halves the step up
    to 30 times), so the objective trace is non-increasing.
    """
    if cfg.objective != "minvol" or not cfg.row_stochastic_coeff:
        raise ValueError("fit_minvol requires objective='minvol' and row_stochastic_coeff=True")
    a = _check_input(x, cfg.k)
    best = None
    lam = None if cfg.lam is None else float(cfg.lam)
    for r in range(cfg.restarts):
        rng = np.random.default_rng(cfg.seed + r)
        w, h = _init_pair(rng, a, cfg.k, row_stochastic=True)
        if lam is None:
            # balance the two objective terms once, on the first
            # initialization, so every restart optimizes the same objective
            logdet0, _ = _logdet_gram(h, cfg.delta)
            lam = 0.01 * float(((a - w @ h) ** 2).sum()) / max(abs(logdet0), 1e-12)
        w = _simplex_ls_rows(a, h)
        obj, singular = _minvol_objective(a, w, h, lam, cfg.delta)
        trace = [obj]
        saw_singular = singular
        step = None
        converged = False
        for _ in range(cfg.max_iter):
            grad = 2.0 * w.T @ (w @ h - a)
            gram = h @ h.T + cfg.delta * np.eye(cfg.k)
            try:
                grad += 2.0 * lam * np.linalg.solve(gram, h)
            except np.linalg.LinAlgError:
                saw_singular = True
            if step is None:
                gn = float(np.linalg.norm(grad))
                step = 0.01 * float(np.linalg.norm(h)) / max(gn, 1e-300)
            accepted = False
            for _half in range(30):
                h_try = np.clip(h - step * grad, 0.0, None)
                w_try = _simplex_ls_rows(a, h_try)
                obj_try, singular = _minvol_objective(a, w_try, h_try, lam, cfg.delta)
                if obj_try <= obj:
                    h, w, = h_try, w_try
                    saw_singular |= singular
                    accepted = obj_try < obj
                    obj = obj_try
                    step *= 1.2
                    break
                step *= 0.5
            trace.append(obj)
            prev = trace[-2]
            if abs(prev - obj) <= cfg.tol * max(1.0, abs(prev)):
                converged = True
                break
            if not accepted:
                converged = True
                break
        cand = (obj, r, w, h, tuple(trace), converged, saw_singular, lam)
        if best is None or cand[0] < best[0]:
            best = cand
    obj, r, w, h, trace, converged, saw_singular, lam = best
    flags = []
    if not converged:
        flags.append(FLAG_NON_CONVERGENCE)
    if saw_singular:
        flags.append(FLAG_SINGULAR_GRAM)
    return FitResult(
        factorization=NmfFactorization(Matrix(w), Matrix(h)),
        residual=a - w @ h,
        objective_trace=trace,
        best_restart=r,
        seed_used=cfg.seed,
        flags=tuple(flags),
        diagnostics={"lambda": lam},
    )


def fit_separable(x, k: int) -> FitResult:
    """Separable NMF: pick k data rows by successive projection, then fit
    convex coefficients against them.

    Each round selects the row with the largest residual norm (ties go to
    the lowest index) and projects the residual matrix onto its orthogonal
    complement.  On separable data the picks are the generating vertices.
    """
    a = _check_input(x, k)
    resid = a.astype(float, copy=True)
    scale = float(np.linalg.norm(a))
    picked = []
    for _ in range(k):
        norms = (resid**2).sum(axis=1)
        i = int(np.argmax(norms))
        if norms[i] <= (1e-12 * max(scale, 1e-300)) ** 2:
            raise RankDeficientSelectionError(
                f"residual vanished after {len(picked)} of {k} selections"
            )
        picked.append(i)
        v = resid[i] / np.sqrt(norms[i])
        resid -= np.outer(resid @ v, v)
    basis = a[picked].copy()
    coeff = _simplex_ls_rows(a, basis)
    recon = coeff @ basis
    return FitResult(
        factorization=NmfFactorization(Matrix(coeff), Matrix(basis)),
        residual=a - recon,
        objective_trace=(float(((a - recon) ** 2).sum()),),
        best_restart=0,
        seed_used=0,
        diagnostics={"selected": tuple(picked)},
    )
