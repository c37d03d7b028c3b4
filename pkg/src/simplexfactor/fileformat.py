"""Plain-text serialization of factorizations.

A file holds one factorization: a fixed magic line, scalar header fields,
optional label blocks, then named matrix and vector blocks.  Numbers are
written with 17 significant digits so binary64 values survive a write and
read unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from .errors import ParseError
from .matrices import CompositionMatrix, Matrix, RowMassVector
from .models import BudgetFactorization, LcaFactorization, NmfFactorization

MAGIC = "simplexfactor-factorization v1"

Factorization = Union[BudgetFactorization, NmfFactorization, LcaFactorization]


@dataclass(frozen=True)
class LoadedFactorization:
    kind: str  # budget | nmf | lca
    factorization: Factorization
    seed: int
    row_labels: Optional[Tuple[str, ...]] = None
    col_labels: Optional[Tuple[str, ...]] = None
    row_masses: Optional[RowMassVector] = None


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def _matrix_block(name: str, a: np.ndarray) -> list:
    lines = [f"matrix {name} {a.shape[0]} {a.shape[1]}"]
    for row in a:
        lines.append(" ".join(_fmt(v) for v in row))
    return lines


def _vector_block(name: str, v: np.ndarray) -> list:
    return [f"vector {name} {v.size}", " ".join(_fmt(x) for x in v)]


def _label_block(which: str, labels: Sequence[str]) -> list:
    return [f"labels {which} {len(labels)}"] + [str(x) for x in labels]


def write_factorization(
    path,
    factorization: Factorization,
    seed: int = 0,
    row_labels: Optional[Sequence[str]] = None,
    col_labels: Optional[Sequence[str]] = None,
    row_masses: Optional[RowMassVector] = None,
) -> None:
    """Serialize a factorization with optional labels and row masses."""
    if isinstance(factorization, BudgetFactorization):
        kind = "budget"
        coeff = factorization.coeff.values
        basis = factorization.basis.values
        i, k = coeff.shape
        j = basis.shape[1]
    elif isinstance(factorization, NmfFactorization):
        kind = "nmf"
        coeff = factorization.coeff.values
        basis = factorization.basis.values
        i, k = coeff.shape
        j = basis.shape[1]
    elif isinstance(factorization, LcaFactorization):
        kind = "lca"
        coeff = factorization.row_profile.values
        basis = factorization.col_profile.values
        i, k = coeff.shape
        j = basis.shape[1]
    else:
        raise TypeError(f"cannot serialize {type(factorization).__name__}")

    lines = [MAGIC, f"kind {kind}", f"rows {i}", f"cols {j}", f"k {k}", f"seed {int(seed)}"]
    if row_labels is not None:
        if len(row_labels) != i:
            raise ValueError("row label count must match the coefficient rows")
        lines += _label_block("rows", row_labels)
    if col_labels is not None:
        if len(col_labels) != j:
            raise ValueError("column label count must match the basis columns")
        lines += _label_block("cols", col_labels)
    if kind == "lca":
        lines += _matrix_block("row_profile", coeff)
        lines += _vector_block("class_mass", factorization.class_mass)
        lines += _matrix_block("col_profile", basis)
    else:
        lines += _matrix_block("coeff", coeff)
        lines += _matrix_block("basis", basis)
    if row_masses is not None:
        if kind == "lca":
            raise ValueError("row masses are implicit in the latent-class form")
        lines += _vector_block("row_masses", np.asarray(row_masses.masses))
    lines.append("end")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


class _Reader:
    def __init__(self, lines):
        self.lines = lines
        self.pos = 0

    def next(self) -> str:
        if self.pos >= len(self.lines):
            raise ParseError("unexpected end of file", row=len(self.lines))
        line = self.lines[self.pos]
        self.pos += 1
        return line

    def peek(self) -> Optional[str]:
        return self.lines[self.pos] if self.pos < len(self.lines) else None


def _parse_floats(line: str, n: int, lineno: int) -> np.ndarray:
    parts = line.split()
    if len(parts) != n:
        raise ParseError(f"expected {n} values, found {len(parts)}", row=lineno)
    try:
        return np.array([float(p) for p in parts])
    except ValueError:
        raise ParseError("non-numeric value in block", row=lineno) from None


def read_factorization(path) -> LoadedFactorization:
    """Parse a factorization file; inverse of write_factorization."""
    text = Path(path).read_text(encoding="utf-8")
    lines = text.splitlines()
    rd = _Reader(lines)
    if rd.next().strip() != MAGIC:
        raise ParseError("unrecognized file header", row=1)

    header = {}
    for field in ("kind", "rows", "cols", "k", "seed"):
        line = rd.next().strip()
        parts = line.split(None, 1)
        if len(parts) != 2 or parts[0] != field:
            raise ParseError(f"expected header field {field!r}", row=rd.pos)
        header[field] = parts[1]
    kind = header["kind"]
    if kind not in ("budget", "nmf", "lca"):
        raise ParseError(f"unknown kind {kind!r}", row=3)
    try:
        i, j, k, seed = (int(header[f]) for f in ("rows", "cols", "k", "seed"))
    except ValueError:
        raise ParseError("non-integer header field", row=6) from None

    row_labels = col_labels = None
    matrices = {}
    vectors = {}
    while True:
        line = rd.next().strip()
        if line == "end":
            break
        parts = line.split()
        if parts[0] == "labels" and len(parts) == 3:
            which, count = parts[1], int(parts[2])
            labels = tuple(rd.next() for _ in range(count))
            if which == "rows":
                row_labels = labels
            elif which == "cols":
                col_labels = labels
            else:
                raise ParseError(f"unknown label block {which!r}", row=rd.pos)
        elif parts[0] == "matrix" and len(parts) == 4:
            name, r, c = parts[1], int(parts[2]), int(parts[3])
            block = np.empty((r, c))
            for rr in range(r):
                block[rr] = _parse_floats(rd.next(), c, rd.pos)
            matrices[name] = block
        elif parts[0] == "vector" and len(parts) == 3:
            name, n = parts[1], int(parts[2])
            vectors[name] = _parse_floats(rd.next(), n, rd.pos)
        else:
            raise ParseError(f"unrecognized block line {line!r}", row=rd.pos)

    def need_matrix(name: str, shape) -> np.ndarray:
        if name not in matrices:
            raise ParseError(f"missing matrix block {name!r}", row=rd.pos)
        m = matrices[name]
        if m.shape != shape:
            raise ParseError(
                f"matrix {name!r} has shape {m.shape}, expected {shape}", row=rd.pos
            )
        return m

    if kind == "budget":
        fact: Factorization = BudgetFactorization(
            CompositionMatrix(need_matrix("coeff", (i, k))),
            CompositionMatrix(need_matrix("basis", (k, j))),
        )
    elif kind == "nmf":
        fact = NmfFactorization(
            Matrix(need_matrix("coeff", (i, k))),
            Matrix(need_matrix("basis", (k, j))),
        )
    else:
        if "class_mass" not in vectors:
            raise ParseError("missing vector block 'class_mass'", row=rd.pos)
        fact = LcaFactorization(
            Matrix(need_matrix("row_profile", (i, k))),
            vectors["class_mass"],
            CompositionMatrix(need_matrix("col_profile", (k, j))),
        )
    masses = None
    if "row_masses" in vectors:
        masses = RowMassVector(vectors["row_masses"])
    return LoadedFactorization(
        kind=kind,
        factorization=fact,
        seed=seed,
        row_labels=row_labels,
        col_labels=col_labels,
        row_masses=masses,
    )
