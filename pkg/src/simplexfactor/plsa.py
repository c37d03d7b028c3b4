"""Probabilistic latent semantic analysis of a count table by tempered
EM, in two parameterizations.

The asymmetric form estimates row-conditional mixtures (a budget pair);
at tempering power 1 its update is the classical EM for the latent budget
model, computed with the same operations so runs from a shared seed move
in lockstep with the budget solver.  The symmetric form estimates the
latent-class triple (row profiles, class masses, column profiles) for the
joint table.  Tempering raises each component's contribution to the power
beta inside the responsibility step only; beta = 1 recovers plain EM.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import RankOutOfRangeError
from .lba import _clamp_zeros, seeded_budget_init
from .matrices import CompositionMatrix, Matrix, values_of
from .models import BudgetFactorization, LcaFactorization
from .results import FLAG_NON_CONVERGENCE, FitResult

Array = np.ndarray


@dataclass(frozen=True)
class PlsaConfig:
    k: int
    beta: float = 1.0
    form: str = "asymmetric"
    max_iter: int = 2000
    tol: float = 1e-9
    restarts: int = 20
    seed: int = 0

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be at least 1")
        if not (0.0 < self.beta <= 1.0):
            raise ValueError("beta must lie in (0, 1]")
        if self.form not in ("asymmetric", "symmetric"):
            raise ValueError(f"unknown form {self.form!r}")
        if self.tol < 0:
            raise ValueError("tol must be nonnegative")


def _check_counts(x) -> Array:
    a = np.asarray(values_of(x), dtype=float)
    if a.ndim != 2:
        raise ValueError("counts must be a 2-D table")
    if np.any(a < 0):
        raise ValueError("counts must be nonnegative")
    if np.any(a.sum(axis=1) <= 0):
        raise ValueError("every row must have a positive total")
    return a


def tempered_estep(params: LcaFactorization, counts, beta: float) -> Array:
    """Responsibilities of each latent class for each cell.

    Component contributions a_ik * theta_k * b_kj are raised to ``beta``
    and normalized over classes.  Cells where every contribution is zero
    get the uniform responsibility 1/k, which keeps downstream updates
    finite; such cells carry no mass in a sensible model.
    """
    if not (0.0 < beta <= 1.0):
        raise ValueError("beta must lie in (0, 1]")
    a = params.row_profile.values
    theta = params.class_mass
    b = params.col_profile.values
    contrib = a[:, None, :] * (theta[None, None, :] * b.T[None, :, :])
    if beta != 1.0:
        contrib = contrib**beta
    den = contrib.sum(axis=2, keepdims=True)
    k = a.shape[1]
    with np.errstate(invalid="ignore", divide="ignore"):
        resp = contrib / den
    resp = np.where(den > 0, resp, 1.0 / k)
    return resp


def _asym_em_step(a: Array, n: Array, w: Array, g: Array, beta: float):
    """One tempered EM update of the row-conditional pair."""
    if beta == 1.0:
        pi = w @ g
        ratio = np.where(pi > 0, a / np.maximum(pi, 1e-300), 0.0)
        w_new = w * (ratio @ g.T) / n[:, None]
        g_new = g * (w.T @ ratio)
    else:
        contrib = (w[:, None, :] * g.T[None, :, :]) ** beta
        den = contrib.sum(axis=2, keepdims=True)
        with np.errstate(invalid="ignore", divide="ignore"):
            resp = contrib / den
        resp = np.where(den > 0, resp, 1.0 / w.shape[1])
        weighted = a[:, :, None] * resp
        w_new = weighted.sum(axis=1) / n[:, None]
        g_new = weighted.sum(axis=0).T
    return _clamp_zeros(w_new), _clamp_zeros(g_new)


def _fit_asymmetric(a: Array, cfg: PlsaConfig) -> FitResult:
    i, j = a.shape
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
            w, g = _asym_em_step(a, n, w, g, cfg.beta)
        pi = w @ g
        ll = float(np.sum(a * np.log(np.maximum(pi, 1e-300))))
        trace.append(ll)
        cand = (ll, r, w, g, tuple(trace), converged)
        if best is None or cand[0] > best[0]:
            best = cand
    ll, r, w, g, trace, converged = best
    fact = BudgetFactorization(CompositionMatrix(w), CompositionMatrix(g))
    flags = () if converged else (FLAG_NON_CONVERGENCE,)
    return FitResult(
        factorization=fact,
        residual=a - n[:, None] * (w @ g),
        objective_trace=trace,
        best_restart=r,
        seed_used=cfg.seed,
        flags=flags,
        diagnostics={"log_likelihood": ll, "beta": cfg.beta},
    )


def _sym_params_from_budget(w: Array, g: Array, d: Array):
    """Latent-class triple equivalent to a budget pair under row masses d."""
    dw = d[:, None] * w
    theta = dw.sum(axis=0)
    theta = np.maximum(theta, 1e-300)
    av = dw / theta
    return av, theta / theta.sum(), g


def _fit_symmetric(a: Array, cfg: PlsaConfig) -> FitResult:
    i, j = a.shape
    total = a.sum()
    y = a / total
    d = y.sum(axis=1)
    best = None
    for r in range(cfg.restarts):
        rng = np.random.default_rng(cfg.seed + r)
        w0, g0 = seeded_budget_init(rng, i, j, cfg.k)
        av, theta, b = _sym_params_from_budget(w0, g0, d)
        trace = []
        converged = False
        for _ in range(cfg.max_iter):
            psi = (av * theta) @ b
            ll = float(np.sum(a * np.log(np.maximum(psi, 1e-300))))
            trace.append(ll)
            if len(trace) > 1 and abs(trace[-1] - trace[-2]) <= cfg.tol * max(1.0, abs(trace[-2])):
                converged = True
                break
            contrib = av[:, None, :] * (theta[None, None, :] * b.T[None, :, :])
            if cfg.beta != 1.0:
                contrib = contrib**cfg.beta
            den = contrib.sum(axis=2, keepdims=True)
            with np.errstate(invalid="ignore", divide="ignore"):
                resp = contrib / den
            resp = np.where(den > 0, resp, 1.0 / cfg.k)
            q = y[:, :, None] * resp
            theta_new = q.sum(axis=(0, 1))
            theta_new = np.maximum(theta_new, 1e-300)
            av = q.sum(axis=1) / theta_new
            b = q.sum(axis=0).T / theta_new[:, None]
            b = _clamp_zeros(b)
            av = _clamp_zeros(av.T).T  # columns of the row profile sum to one
            theta = theta_new / theta_new.sum()
        psi = (av * theta) @ b
        ll = float(np.sum(a * np.log(np.maximum(psi, 1e-300))))
        trace.append(ll)
        cand = (ll, r, av, theta, b, tuple(trace), converged)
        if best is None or cand[0] > best[0]:
            best = cand
    ll, r, av, theta, b, trace, converged = best
    fact = LcaFactorization(Matrix(av), theta, CompositionMatrix(b))
    flags = () if converged else (FLAG_NON_CONVERGENCE,)
    return FitResult(
        factorization=fact,
        residual=a - total * ((av * theta) @ b),
        objective_trace=trace,
        best_restart=r,
        seed_used=cfg.seed,
        flags=flags,
        diagnostics={"log_likelihood": ll, "beta": cfg.beta},
    )


def fit_plsa(counts, cfg: PlsaConfig) -> FitResult:
    """Tempered EM fit of a count table.

    The asymmetric form returns a budget factorization of the
    row-conditional table; the symmetric form returns the latent-class
    triple for the joint table.  Restart r draws its start from seed + r;
    the best restart by final log-likelihood wins, ties to the lower
    restart index.  The trace records the untempered log-likelihood, which
    is non-decreasing only at beta = 1.
    """
    a = _check_counts(counts)
    if not (1 <= cfg.k <= min(a.shape)):
        raise RankOutOfRangeError(f"rank {cfg.k} outside 1..{min(a.shape)}")
    if cfg.form == "asymmetric":
        return _fit_asymmetric(a, cfg)
    return _fit_symmetric(a, cfg)
