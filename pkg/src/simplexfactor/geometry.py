"""Geometry of compositions: ternary coordinates, cone and hull
membership, simplex volume, and the rescaling that turns basis rows into
column profiles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import UnsupportedKError, ZeroColumnError
from .linalg import nonneg_ls, simplex_ls
from .matrices import values_of

Array = np.ndarray

_SQRT3_2 = math.sqrt(3.0) / 2.0


@dataclass(frozen=True)
class TernaryPoint:
    """A labeled three-part composition with its planar embedding.

    The embedding sends (1,0,0) to (0,0), (0,1,0) to (1,0) and (0,0,1)
    to (1/2, sqrt(3)/2), the vertices of an equilateral triangle.
    """

    label: str
    coords: Tuple[float, float, float]

    def __post_init__(self):
        c = tuple(float(v) for v in self.coords)
        if len(c) != 3:
            raise UnsupportedKError("ternary points need exactly three parts")
        if any(v < -1e-12 for v in c):
            raise ValueError("ternary coordinates must be nonnegative")
        c = tuple(max(v, 0.0) for v in c)
        if abs(sum(c) - 1.0) > 1e-10:
            raise ValueError("ternary coordinates must sum to one")
        object.__setattr__(self, "coords", c)

    @property
    def planar(self) -> Tuple[float, float]:
        _, c2, c3 = self.coords
        return (c2 + 0.5 * c3, _SQRT3_2 * c3)


def cone_membership(u, point, tol: float = 1e-8) -> Optional[Array]:
    """Nonnegative weights expressing ``point`` over the columns of ``u``,
    or None when the point lies outside the cone at the given tolerance."""
    basis = values_of(u)
    x = np.asarray(values_of(point), dtype=float).ravel()
    if basis.shape[0] != x.size:
        raise ValueError("point dimension must match the column length")
    coeffs, _ = nonneg_ls(basis.T, x)
    if np.max(np.abs(basis @ coeffs - x)) <= tol:
        return coeffs
    return None


def hull_membership(u, point, tol: float = 1e-8) -> Optional[Array]:
    """Convex weights expressing ``point`` over the columns of ``u``, or
    None when the point lies outside their hull at the given tolerance."""
    basis = values_of(u)
    x = np.asarray(values_of(point), dtype=float).ravel()
    if basis.shape[0] != x.size:
        raise ValueError("point dimension must match the column length")
    coeffs = simplex_ls(x, basis.T)
    if np.max(np.abs(basis @ coeffs - x)) <= tol:
        return coeffs
    return None


def simplex_volume_sq(g) -> float:
    """Squared content of the parallelepiped spanned by the basis rows,
    det(G G^T); zero exactly when the rows are linearly dependent."""
    gv = values_of(g)
    return float(np.linalg.det(gv @ gv.T))


def average_contribution(w) -> Array:
    """Column means of the coefficients; sums to one for budget rows."""
    return values_of(w).mean(axis=0)


def rescaled_basis_matrix(g, z) -> Array:
    """Column profiles of the basis under average contributions ``z``.

    Each basis column is weighted by z and normalized, giving for every
    observed column the distribution over latent components.  A column
    with zero weighted mass has no profile and raises.
    """
    gv = values_of(g)
    zv = np.asarray(values_of(z), dtype=float).ravel()
    if zv.size != gv.shape[0]:
        raise ValueError("weight length must match the basis row count")
    if np.any(zv < 0):
        raise ValueError("weights must be nonnegative")
    weighted = zv[:, None] * gv
    totals = weighted.sum(axis=0)
    bad = np.flatnonzero(totals <= 0)
    if bad.size:
        raise ZeroColumnError(f"column {int(bad[0])} has zero weighted mass")
    return weighted / totals


def rescaled_basis(g, z, labels: Optional[Sequence[str]] = None) -> List[TernaryPoint]:
    """Ternary points of the column profiles, for three components."""
    profiles = rescaled_basis_matrix(g, z)
    if profiles.shape[0] != 3:
        raise UnsupportedKError("ternary display needs exactly three components")
    j = profiles.shape[1]
    if labels is None:
        labels = [f"col{c + 1}" for c in range(j)]
    if len(labels) != j:
        raise ValueError("label count must match the column count")
    return [TernaryPoint(labels[c], tuple(profiles[:, c])) for c in range(j)]


def rows_as_ternary(w, labels: Optional[Sequence[str]] = None) -> List[TernaryPoint]:
    """Ternary points of coefficient rows, for three components."""
    a = values_of(w)
    if a.shape[1] != 3:
        raise UnsupportedKError("ternary display needs exactly three components")
    if labels is None:
        labels = [f"row{r + 1}" for r in range(a.shape[0])]
    if len(labels) != a.shape[0]:
        raise ValueError("label count must match the row count")
    return [TernaryPoint(labels[r], tuple(a[r])) for r in range(a.shape[0])]
