"""Validated matrix value types shared by every solver.

Each wrapper holds a read-only float64 array in ``values`` and enforces the
invariant its name promises: nonnegativity, unit row sums, or unit grand
total.  Solvers work on raw arrays internally and package results through
these types at the boundary, so a constructed object is always consistent.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import NegativeEntryError, ZeroMatrixError, ZeroRowError

Array = np.ndarray

# Unit-sum checks are exact to 1e-12 once data has passed through one of the
# normalization routines; raw user files carry print rounding and get the
# looser ingestion tolerance before being renormalized.
UNIT_SUM_TOL = 1e-12
INGEST_SUM_TOL = 1e-8


def values_of(x) -> Array:
    """Return the underlying 2-D float array of a wrapper or array-like."""
    a = getattr(x, "values", x)
    return np.asarray(a, dtype=float)


def _frozen_copy(a: Array) -> Array:
    out = np.array(a, dtype=float, copy=True, order="C")
    out.setflags(write=False)
    return out


def _check_shape(a: Array) -> None:
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise ValueError(f"expected a 2-D matrix with at least one row and one column, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix entries must be finite")


@dataclass(frozen=True, eq=False)
class Matrix:
    """Dense finite float64 matrix, at least 1x1."""

    values: Array

    def __post_init__(self):
        a = values_of(self.values)
        _check_shape(a)
        object.__setattr__(self, "values", _frozen_copy(a))

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def cols(self) -> int:
        return self.values.shape[1]

    @property
    def shape(self):
        return self.values.shape


@dataclass(frozen=True, eq=False)
class CompositionMatrix:
    """Nonnegative matrix whose rows each sum to one within 1e-12."""

    values: Array

    def __post_init__(self):
        a = values_of(self.values)
        _check_shape(a)
        if np.any(a < 0):
            raise NegativeEntryError("composition entries must be nonnegative")
        sums = a.sum(axis=1)
        bad = np.abs(sums - 1.0) > UNIT_SUM_TOL
        if np.any(bad):
            i = int(np.argmax(np.abs(sums - 1.0)))
            raise ValueError(f"row {i} sums to {sums[i]!r}, expected 1 within {UNIT_SUM_TOL}")
        object.__setattr__(self, "values", _frozen_copy(a))

    @classmethod
    def from_rows(cls, values, tol: float = INGEST_SUM_TOL) -> "CompositionMatrix":
        """Accept rows within ``tol`` of unit sum and renormalize them exactly."""
        a = values_of(values)
        _check_shape(a)
        if np.any(a < 0):
            raise NegativeEntryError("composition entries must be nonnegative")
        sums = a.sum(axis=1)
        off = np.abs(sums - 1.0)
        if np.any(off > tol):
            i = int(np.argmax(off))
            raise ValueError(f"row {i} sums to {sums[i]!r}, outside the ingestion tolerance {tol}")
        return cls(a / sums[:, None])

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def cols(self) -> int:
        return self.values.shape[1]

    @property
    def shape(self):
        return self.values.shape


@dataclass(frozen=True, eq=False)
class JointProbMatrix:
    """Nonnegative matrix whose entries sum to one within 1e-12."""

    values: Array

    def __post_init__(self):
        a = values_of(self.values)
        _check_shape(a)
        if np.any(a < 0):
            raise NegativeEntryError("joint probability entries must be nonnegative")
        total = float(a.sum())
        if abs(total - 1.0) > UNIT_SUM_TOL:
            raise ValueError(f"grand total is {total!r}, expected 1 within {UNIT_SUM_TOL}")
        object.__setattr__(self, "values", _frozen_copy(a))

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def cols(self) -> int:
        return self.values.shape[1]

    @property
    def shape(self):
        return self.values.shape

    def row_masses(self) -> "RowMassVector":
        return RowMassVector(self.values.sum(axis=1))


@dataclass(frozen=True, eq=False)
class RowMassVector:
    """Nonnegative per-row masses; the diagonal of a row-sum operator."""

    masses: Array

    def __post_init__(self):
        m = np.asarray(getattr(self.masses, "masses", self.masses), dtype=float)
        if m.ndim != 1 or m.size < 1:
            raise ValueError(f"expected a 1-D mass vector, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ValueError("masses must be finite")
        if np.any(m < 0):
            raise NegativeEntryError("masses must be nonnegative")
        object.__setattr__(self, "masses", _frozen_copy(m))

    def __len__(self) -> int:
        return self.masses.size

    def diagonal(self) -> Array:
        """The masses as a dense diagonal matrix."""
        return np.diag(self.masses)


def mass_values(m) -> Array:
    """Return the underlying 1-D array of a RowMassVector or array-like."""
    a = getattr(m, "masses", m)
    return np.asarray(a, dtype=float)
