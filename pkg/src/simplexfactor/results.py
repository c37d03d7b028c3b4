"""Common result container for every solver."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Tuple

import numpy as np

from .matrices import values_of

Array = np.ndarray

# Non-fatal conditions solvers report instead of raising.
FLAG_NON_CONVERGENCE = "non-convergence"
FLAG_SINGULAR_GRAM = "singular-gram"
FLAG_EXPANSION_STALL = "expansion-stall"


@dataclass(frozen=True, eq=False)
class FitResult:
    """A fitted factorization plus the evidence behind it.

    ``residual`` is data minus reconstruction on the scale the solver was
    given.  ``objective_trace`` is the per-iteration objective of the
    winning restart; monotone solvers guarantee its direction.
    """

    factorization: object
    residual: Array
    objective_trace: Tuple[float, ...]
    best_restart: int
    seed_used: int
    flags: Tuple[str, ...] = ()
    diagnostics: Mapping = field(default_factory=dict)

    def __post_init__(self):
        r = np.asarray(self.residual, dtype=float)
        r = r.copy()
        r.setflags(write=False)
        object.__setattr__(self, "residual", r)
        object.__setattr__(self, "objective_trace", tuple(float(v) for v in self.objective_trace))
        object.__setattr__(self, "flags", tuple(self.flags))

    @property
    def residual_norm(self) -> float:
        """Frobenius norm of the residual."""
        return float(np.linalg.norm(self.residual))

    @property
    def objective(self) -> float:
        return self.objective_trace[-1] if self.objective_trace else float("nan")


def per_column_r2(data, reconstruction) -> Array:
    """Per-column coefficient of determination of a reconstruction.

    1 - SSE_j / SST_j with SST around the column mean; a constant column
    reproduced exactly scores 1, otherwise a constant column scores 0.
    """
    x = values_of(data)
    r = values_of(reconstruction)
    err = ((x - r) ** 2).sum(axis=0)
    tot = ((x - x.mean(axis=0)) ** 2).sum(axis=0)
    out = np.empty(x.shape[1])
    zero = tot <= 0
    out[~zero] = 1.0 - err[~zero] / tot[~zero]
    out[zero] = np.where(err[zero] <= 1e-30, 1.0, 0.0)
    return out
