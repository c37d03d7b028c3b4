"""Factorization value types, exact conversions between them, invertible
reparametrizations, and equivalence-class comparison.

Three equivalent families are covered: plain nonnegative factorizations
(coeff @ basis), budget factorizations (row-stochastic coeff and basis),
and latent-class factorizations (column-stochastic row profile, positive
class masses summing to one, row-stochastic column profile).  The
conversions are constructive and exact up to rounding: a budget pair plus
row masses is the same object as a nonnegative pair, and rescaling a
budget pair by the row masses of the joint table gives the latent-class
form.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np

from .errors import (
    InfeasibleTransformError,
    NegativeEntryError,
    ZeroClassMassError,
    ZeroRowBasisError,
    ZeroRowError,
    ZeroRowProductError,
)
from .matrices import (
    CompositionMatrix,
    Matrix,
    RowMassVector,
    mass_values,
    values_of,
)

Array = np.ndarray

_RANK_TOL = 1e-9
_FEAS_TOL = 1e-12


def _numerical_rank(a: Array) -> int:
    s = np.linalg.svd(a, compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > _RANK_TOL * s[0]))


def _as_composition(x) -> CompositionMatrix:
    if isinstance(x, CompositionMatrix):
        return x
    return CompositionMatrix(values_of(x))


@dataclass(frozen=True, eq=False)
class NmfFactorization:
    """Nonnegative pair (coeff I x K, basis K x J) with both factors of full
    rank K at tolerance 1e-9."""

    coeff: Matrix
    basis: Matrix

    def __post_init__(self):
        c = self.coeff if isinstance(self.coeff, Matrix) else Matrix(values_of(self.coeff))
        b = self.basis if isinstance(self.basis, Matrix) else Matrix(values_of(self.basis))
        if c.cols != b.rows:
            raise ValueError(f"coeff has {c.cols} columns but basis has {b.rows} rows")
        if np.any(c.values < 0) or np.any(b.values < 0):
            raise NegativeEntryError("factors must be nonnegative")
        k = c.cols
        if _numerical_rank(c.values) < k or _numerical_rank(b.values) < k:
            raise ValueError(f"both factors must have numerical rank {k}")
        object.__setattr__(self, "coeff", c)
        object.__setattr__(self, "basis", b)

    @property
    def k(self) -> int:
        return self.coeff.cols

    def reconstruct(self) -> Array:
        return self.coeff.values @ self.basis.values


@dataclass(frozen=True, eq=False)
class BudgetFactorization:
    """Budget pair: both factors row-stochastic, product row-stochastic."""

    coeff: CompositionMatrix
    basis: CompositionMatrix

    def __post_init__(self):
        w = _as_composition(self.coeff)
        g = _as_composition(self.basis)
        if w.cols != g.rows:
            raise ValueError(f"coeff has {w.cols} columns but basis has {g.rows} rows")
        k = w.cols
        if _numerical_rank(w.values) < k or _numerical_rank(g.values) < k:
            raise ValueError(f"both factors must have numerical rank {k}")
        object.__setattr__(self, "coeff", w)
        object.__setattr__(self, "basis", g)

    @property
    def k(self) -> int:
        return self.coeff.cols

    def reconstruct(self) -> Array:
        return self.coeff.values @ self.basis.values


@dataclass(frozen=True, eq=False)
class LcaFactorization:
    """Latent-class triple (row profile, class masses, column profile).

    The row profile is column-stochastic, the class-mass vector is positive
    and sums to one, the column profile is row-stochastic; the product
    row_profile @ diag(class_mass) @ col_profile is a joint probability
    table.
    """

    row_profile: Matrix
    class_mass: Array
    col_profile: CompositionMatrix

    def __post_init__(self):
        a = self.row_profile if isinstance(self.row_profile, Matrix) else Matrix(values_of(self.row_profile))
        theta = np.asarray(self.class_mass, dtype=float).ravel()
        b = _as_composition(self.col_profile)
        if np.any(a.values < 0):
            raise NegativeEntryError("row profile must be nonnegative")
        if a.cols != theta.size or theta.size != b.rows:
            raise ValueError("row profile, class masses and column profile disagree on the class count")
        col_sums = a.values.sum(axis=0)
        if np.max(np.abs(col_sums - 1.0)) > _FEAS_TOL:
            raise ValueError("row profile columns must sum to 1 within 1e-12")
        if np.any(theta <= 0):
            raise ZeroClassMassError("class masses must be positive")
        if abs(float(theta.sum()) - 1.0) > _FEAS_TOL:
            raise ValueError("class masses must sum to 1 within 1e-12")
        theta = theta.copy()
        theta.setflags(write=False)
        object.__setattr__(self, "row_profile", a)
        object.__setattr__(self, "class_mass", theta)
        object.__setattr__(self, "col_profile", b)

    @property
    def k(self) -> int:
        return self.class_mass.size

    def reconstruct(self) -> Array:
        return (self.row_profile.values * self.class_mass) @ self.col_profile.values


@dataclass(frozen=True, eq=False)
class TransformMatrix:
    """Invertible K x K reparametrization; the row-stochastic kind (rows sum
    to one) is the only kind budget factorizations admit."""

    t: Matrix
    kind: str = "general"

    def __post_init__(self):
        t = self.t if isinstance(self.t, Matrix) else Matrix(values_of(self.t))
        if t.rows != t.cols:
            raise ValueError("transform must be square")
        if self.kind not in ("general", "row-stochastic"):
            raise ValueError(f"unknown transform kind {self.kind!r}")
        cond = np.linalg.cond(t.values)
        if not np.isfinite(cond):
            raise ValueError("transform must be invertible")
        if self.kind == "row-stochastic":
            if np.max(np.abs(t.values.sum(axis=1) - 1.0)) > _FEAS_TOL:
                raise ValueError("row-stochastic transform rows must sum to 1 within 1e-12")
        object.__setattr__(self, "t", t)

    @property
    def k(self) -> int:
        return self.t.rows

    @property
    def values(self) -> Array:
        return self.t.values

    def inverse_values(self) -> Array:
        return np.linalg.inv(self.t.values)


@dataclass(frozen=True, eq=False)
class EquivalenceWitness:
    """Permutation and positive diagonal scaling mapping one factorization
    onto another: basis2[k] = scale[k] * basis1[perm[k]]."""

    perm: Tuple[int, ...]
    scale: Array

    def __post_init__(self):
        perm = tuple(int(i) for i in self.perm)
        scale = np.asarray(self.scale, dtype=float).ravel()
        if sorted(perm) != list(range(len(perm))):
            raise ValueError("perm must be a permutation of 0..K-1")
        if scale.size != len(perm) or np.any(scale <= 0):
            raise ValueError("scale must be a positive vector of length K")
        scale = scale.copy()
        scale.setflags(write=False)
        object.__setattr__(self, "perm", perm)
        object.__setattr__(self, "scale", scale)


# ---------------------------------------------------------------------------
# conversions


def lba_to_lca(b: BudgetFactorization, row_mass) -> LcaFactorization:
    """Rescale a budget pair by joint-table row masses into latent-class form.

    ``row_mass`` holds the row sums of the joint table (positive, summing
    to one).  The returned triple reconstructs diag(row_mass) @ W @ G.
    """
    d = mass_values(row_mass)
    w = b.coeff.values
    if d.size != w.shape[0]:
        raise ValueError("row_mass length must match the coefficient row count")
    if np.any(d <= 0):
        raise ZeroRowError("row masses must be positive")
    if abs(float(d.sum()) - 1.0) > 1e-8:
        raise ValueError("row masses must sum to 1")
    dw = d[:, None] * w
    theta = dw.sum(axis=0)
    if np.any(theta <= 0):
        raise ZeroClassMassError("a latent class received zero mass")
    a = dw / theta
    theta = theta / theta.sum()
    return LcaFactorization(Matrix(a), theta, b.basis)


def lca_to_lba(l: LcaFactorization) -> Tuple[BudgetFactorization, RowMassVector]:
    """Invert :func:`lba_to_lca`: row-normalize the latent-class mixing part.

    Returns the budget pair together with the row masses of the joint
    table, so the round trip is exact.
    """
    at = l.row_profile.values * l.class_mass
    s = at.sum(axis=1)
    if np.any(s <= 0):
        raise ZeroRowError("a row of the joint table has zero mass")
    w = at / s[:, None]
    return BudgetFactorization(CompositionMatrix(w), l.col_profile), RowMassVector(s)


def nmf_to_lba(n: NmfFactorization) -> Tuple[BudgetFactorization, RowMassVector]:
    """Row-normalize a nonnegative pair into budget form.

    The basis rows are divided by their sums and the coefficients absorb
    them, then each coefficient row is divided by the product row mass;
    the masses are returned so the original pair can be rebuilt.
    """
    m = n.coeff.values
    h = n.basis.values
    h_sums = h.sum(axis=1)
    if np.any(h_sums <= 0):
        raise ZeroRowBasisError("a basis row sums to zero")
    phi_mass = m @ h_sums
    if np.any(phi_mass <= 0):
        raise ZeroRowProductError("a row of the reconstructed product sums to zero")
    g = h / h_sums[:, None]
    w = (m * h_sums) / phi_mass[:, None]
    return (
        BudgetFactorization(CompositionMatrix(w), CompositionMatrix(g)),
        RowMassVector(phi_mass),
    )


def lba_to_nmf(b: BudgetFactorization, row_mass) -> NmfFactorization:
    """Scale a budget pair back to raw units: coeff rows times row masses."""
    d = mass_values(row_mass)
    w = b.coeff.values
    if d.size != w.shape[0]:
        raise ValueError("row_mass length must match the coefficient row count")
    if np.any(d <= 0):
        raise ZeroRowError("row masses must be positive")
    return NmfFactorization(Matrix(d[:, None] * w), Matrix(b.basis.values.copy()))


def budget_as_nmf(b: BudgetFactorization) -> NmfFactorization:
    """Reinterpret a budget pair as a plain nonnegative pair (unit masses)."""
    return NmfFactorization(Matrix(b.coeff.values.copy()), Matrix(b.basis.values.copy()))


# ---------------------------------------------------------------------------
# transformation and equivalence


def apply_transform(
    f: Union[NmfFactorization, BudgetFactorization], t: TransformMatrix
) -> Union[NmfFactorization, BudgetFactorization]:
    """Reparametrize ``f`` as (coeff @ T^-1, T @ basis).

    The product is unchanged; feasibility (nonnegativity, and for budget
    factorizations the unit row sums) is checked on the result rather than
    restricting T up front.  Entries below -1e-12 raise
    InfeasibleTransformError; negative rounding dust above that threshold
    is clipped to zero.
    """
    budget = isinstance(f, BudgetFactorization)
    if budget and t.kind != "row-stochastic":
        raise ValueError("budget factorizations require a row-stochastic transform")
    tv = t.t.values
    if tv.shape[0] != f.k:
        raise ValueError(f"transform size {tv.shape[0]} does not match k={f.k}")
    new_coeff = np.linalg.solve(tv.T, f.coeff.values.T).T
    new_basis = tv @ f.basis.values
    worst = min(float(new_coeff.min()), float(new_basis.min()))
    if worst < -_FEAS_TOL:
        raise InfeasibleTransformError(f"transform drives an entry to {worst:.3e}")
    new_coeff = np.clip(new_coeff, 0.0, None)
    new_basis = np.clip(new_basis, 0.0, None)
    if budget:
        new_coeff /= new_coeff.sum(axis=1, keepdims=True)
        new_basis /= new_basis.sum(axis=1, keepdims=True)
        return BudgetFactorization(CompositionMatrix(new_coeff), CompositionMatrix(new_basis))
    return NmfFactorization(Matrix(new_coeff), Matrix(new_basis))


def _first_significant(row: Array) -> int:
    cap = np.abs(row).max()
    idx = np.flatnonzero(np.abs(row) > 1e-12 * max(cap, 1e-300))
    return int(idx[0])


def _witness_candidates(h1: Array, h2: Array, k: int):
    if k <= 8:
        yield from itertools.permutations(range(k))
        return
    # assignment on cosine distance between basis rows
    from scipy.optimize import linear_sum_assignment

    n1 = h1 / np.maximum(np.linalg.norm(h1, axis=1, keepdims=True), 1e-300)
    n2 = h2 / np.maximum(np.linalg.norm(h2, axis=1, keepdims=True), 1e-300)
    cost = 1.0 - n1 @ n2.T  # cost[a, b]: row a of h1 vs row b of h2
    rows, cols = linear_sum_assignment(cost)
    perm = np.empty(k, dtype=int)
    perm[cols] = rows
    yield tuple(int(i) for i in perm)


def equivalent(f1, f2, tol: float = 1e-8) -> Optional[EquivalenceWitness]:
    """Search for a permutation and positive scaling mapping f1 onto f2.

    Returns a witness with ``basis2[k] = scale[k] * basis1[perm[k]]`` and
    the matching inverse scaling on the coefficients, or None when no
    candidate fits within ``tol``.  For budget factorizations the scaling
    is pinned to the identity.  Permutations are enumerated exactly for
    K <= 8 and located by assignment on basis-row cosine distance above.
    """
    if type(f1) is not type(f2):
        raise ValueError("factorizations must be of the same kind")
    budget = isinstance(f1, BudgetFactorization)
    h1, h2 = f1.basis.values, f2.basis.values
    m1, m2 = f1.coeff.values, f2.coeff.values
    if h1.shape != h2.shape or m1.shape != m2.shape:
        raise ValueError("factorizations must share dimensions")
    k = f1.k
    for perm in _witness_candidates(h1, h2, k):
        sig = np.ones(k)
        ok = True
        for a in range(k):
            src = h1[perm[a]]
            if not budget:
                j = _first_significant(src)
                s = h2[a, j] / src[j]
                if not (np.isfinite(s) and s > 0):
                    ok = False
                    break
                sig[a] = s
            if np.max(np.abs(h2[a] - sig[a] * src)) > tol:
                ok = False
                break
            if np.max(np.abs(m2[:, a] - m1[:, perm[a]] / sig[a])) > tol:
                ok = False
                break
        if ok:
            return EquivalenceWitness(tuple(perm), sig)
    return None
