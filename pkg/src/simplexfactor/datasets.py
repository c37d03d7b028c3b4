"""Bundled example tables and a strict CSV loader.

Three classic contingency tables ship with the package: self-assessed
health by gender and education by readership class, both from Greenacre
(2017), "Correspondence Analysis in Practice" (Exhibits 16.1 and 3.1),
and a Dutch time-budget table from the national time-use surveys of
1975, 1980 and 1985, minutes per week over 18 activities for gender by
age by survey-year groups.  Published three-component estimates for the time-budget table
are included for comparison runs.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Tuple

import numpy as np

from .errors import NegativeEntryError, ParseError, RaggedRowError
from .matrices import Matrix

__all__ = [
    "Dataset",
    "dataset_names",
    "load_dataset",
    "load_csv",
    "time_budget_reference",
]


@dataclass(frozen=True)
class Dataset:
    name: str
    row_labels: Tuple[str, ...]
    col_labels: Tuple[str, ...]
    counts: Matrix
    provenance: str

    def __post_init__(self):
        if len(self.row_labels) != self.counts.rows:
            raise ValueError("row label count must match the table")
        if len(self.col_labels) != self.counts.cols:
            raise ValueError("column label count must match the table")


_HEALTH_ROWS = ("very good", "good", "regular", "bad", "very bad")
_HEALTH_COLS = ("male", "female")
_HEALTH = [
    [448, 369],
    [1789, 1753],
    [636, 859],
    [177, 237],
    [39, 64],
]

_EDUCATION_ROWS = ("E1", "E2", "E3", "E4", "E5")
_EDUCATION_COLS = ("C1", "C2", "C3")
_EDUCATION = [
    [5, 7, 2],
    [18, 46, 20],
    [19, 29, 39],
    [12, 40, 49],
    [3, 7, 16],
]

_TIME_ROWS = (
    "M1275", "M1280", "M1285", "M2575", "M2580", "M2585",
    "M3575", "M3580", "M3585", "M5075", "M5080", "M5085",
    "M6575", "M6580", "M6585", "F1275", "F1280", "F1285",
    "F2575", "F2580", "F2585", "F3575", "F3580", "F3585",
    "F5075", "F5080", "F5085", "F6575", "F6580", "F6585",
)

_TIME_COLS = (
    "paidwork", "dom.work", "caring", "shopping", "per.need", "eating",
    "sleeping", "educat.", "particip", "soc.cont", "goingout", "sports",
    "gardening", "outside", "tv-radio", "reading", "relaxing", "other",
)

_TIME = [
    [901, 87, 33, 120, 289, 508, 3737, 1447, 128, 515, 490, 419, 111, 48, 752, 272, 78, 146],
    [769, 157, 28, 138, 294, 528, 3765, 1455, 101, 505, 396, 436, 102, 41, 815, 256, 56, 240],
    [707, 155, 15, 127, 316, 527, 3744, 1537, 92, 449, 441, 485, 100, 64, 860, 188, 73, 200],
    [2180, 250, 194, 152, 293, 623, 3380, 124, 129, 609, 382, 269, 173, 69, 700, 366, 64, 124],
    [1992, 269, 206, 157, 316, 649, 3403, 245, 126, 649, 321, 279, 213, 35, 671, 318, 58, 172],
    [1899, 341, 184, 183, 302, 605, 3397, 208, 143, 599, 391, 271, 231, 67, 812, 243, 57, 148],
    [1901, 249, 99, 173, 351, 660, 3463, 56, 195, 671, 360, 206, 259, 88, 785, 316, 59, 188],
    [2008, 289, 128, 157, 339, 709, 3445, 90, 156, 593, 240, 280, 238, 45, 804, 343, 44, 170],
    [2093, 331, 136, 185, 332, 650, 3347, 85, 148, 479, 336, 291, 268, 64, 812, 319, 58, 146],
    [1708, 244, 51, 227, 350, 709, 3560, 18, 122, 603, 237, 209, 256, 116, 921, 468, 79, 203],
    [1357, 337, 54, 221, 364, 744, 3569, 58, 207, 704, 279, 299, 288, 76, 862, 413, 57, 190],
    [1206, 450, 25, 230, 352, 686, 3533, 46, 272, 554, 264, 316, 309, 112, 1012, 467, 68, 174],
    [176, 617, 124, 273, 365, 763, 3801, 10, 159, 811, 213, 297, 366, 86, 1161, 477, 157, 223],
    [71, 563, 27, 251, 392, 767, 3871, 43, 192, 671, 220, 403, 312, 117, 1198, 660, 92, 230],
    [95, 636, 38, 264, 383, 707, 3694, 54, 214, 619, 274, 476, 308, 178, 1233, 578, 104, 225],
    [723, 494, 135, 208, 359, 536, 3744, 1163, 125, 592, 364, 348, 90, 32, 594, 292, 73, 208],
    [665, 460, 99, 200, 377, 513, 3777, 1321, 88, 557, 400, 370, 76, 32, 581, 257, 74, 234],
    [564, 397, 86, 223, 387, 495, 3821, 1436, 80, 527, 396, 352, 86, 41, 702, 207, 63, 214],
    [439, 1342, 635, 347, 311, 593, 3526, 77, 85, 780, 316, 306, 149, 41, 547, 300, 88, 199],
    [471, 1338, 673, 336, 339, 607, 3532, 115, 115, 776, 270, 352, 131, 32, 497, 275, 54, 167],
    [704, 1147, 651, 336, 337, 572, 3447, 120, 115, 736, 303, 368, 145, 44, 565, 265, 63, 164],
    [299, 1567, 296, 372, 325, 664, 3567, 104, 133, 694, 225, 335, 198, 37, 622, 356, 76, 207],
    [375, 1605, 309, 347, 346, 633, 3554, 98, 143, 689, 229, 440, 154, 34, 576, 311, 63, 174],
    [412, 1529, 308, 373, 351, 656, 3444, 68, 196, 699, 277, 453, 170, 45, 582, 307, 59, 153],
    [151, 1600, 83, 376, 367, 601, 3673, 27, 195, 758, 255, 323, 197, 53, 710, 478, 78, 154],
    [153, 1558, 84, 335, 368, 613, 3701, 30, 179, 810, 212, 504, 190, 41, 644, 390, 53, 212],
    [233, 1487, 82, 352, 385, 595, 3566, 40, 195, 721, 268, 545, 217, 76, 708, 377, 64, 170],
    [11, 1319, 78, 384, 372, 635, 3849, 6, 108, 929, 219, 297, 169, 37, 888, 485, 63, 230],
    [6, 1409, 154, 292, 453, 665, 3713, 21, 124, 796, 187, 482, 191, 39, 860, 404, 67, 216],
    [19, 1318, 44, 320, 366, 615, 3675, 23, 139, 749, 202, 579, 169, 52, 1076, 460, 69, 204],
]


def _builders() -> Dict[str, Dataset]:
    return {
        "health-gender": Dataset(
            name="health-gender",
            row_labels=_HEALTH_ROWS,
            col_labels=_HEALTH_COLS,
            counts=Matrix(np.array(_HEALTH, dtype=float)),
            provenance=(
                "Self-assessed health by gender; Greenacre (2017), "
                "Correspondence Analysis in Practice, Exhibit 16.1"
            ),
        ),
        "education-readership": Dataset(
            name="education-readership",
            row_labels=_EDUCATION_ROWS,
            col_labels=_EDUCATION_COLS,
            counts=Matrix(np.array(_EDUCATION, dtype=float)),
            provenance=(
                "Education group (E1 some primary .. E5 some tertiary) by "
                "readership class (C1 glance, C2 fairly thorough, C3 very "
                "thorough); Greenacre (2017), Correspondence Analysis in "
                "Practice, Exhibit 3.1"
            ),
        ),
        "time-budget": Dataset(
            name="time-budget",
            row_labels=_TIME_ROWS,
            col_labels=_TIME_COLS,
            counts=Matrix(np.array(_TIME, dtype=float)),
            provenance=(
                "Minutes per week over 18 activities for gender x age x "
                "survey-year groups in the Netherlands (M1275 = male, 12-24, "
                "1975); Dutch national time-use surveys 1975/1980/1985"
            ),
        ),
    }


def dataset_names() -> Tuple[str, ...]:
    return tuple(sorted(_builders()))


def load_dataset(name: str) -> Dataset:
    table = _builders()
    if name not in table:
        known = ", ".join(sorted(table))
        raise KeyError(f"unknown dataset {name!r}; bundled: {known}")
    return table[name]


# ---------------------------------------------------------------------------
# published reference estimates for the time-budget table, K = 3
# (rounded to three decimals in the original report)

_REF_LBA_COEFF = [
    [0.000, 0.172, 0.829], [0.057, 0.107, 0.836], [0.049, 0.064, 0.887],
    [0.000, 0.990, 0.011], [0.035, 0.886, 0.079], [0.081, 0.849, 0.070],
    [0.091, 0.892, 0.018], [0.068, 0.923, 0.008], [0.050, 0.958, 0.000],
    [0.156, 0.817, 0.027], [0.275, 0.656, 0.069], [0.345, 0.590, 0.065],
    [0.703, 0.150, 0.147], [0.704, 0.097, 0.199], [0.711, 0.106, 0.183],
    [0.243, 0.120, 0.637], [0.210, 0.061, 0.730], [0.191, 0.000, 0.810],
    [0.834, 0.172, 0.000], [0.819, 0.178, 0.003], [0.695, 0.296, 0.010],
    [0.926, 0.083, 0.000], [0.916, 0.102, 0.000], [0.891, 0.137, 0.000],
    [0.990, 0.025, 0.000], [0.980, 0.024, 0.000], [0.930, 0.072, 0.000],
    [0.959, 0.000, 0.045], [0.978, 0.004, 0.034], [0.945, 0.000, 0.056],
]

_REF_LBA_BASIS = [
    [0.002, 0.212, 0.063], [0.146, 0.017, 0.005], [0.024, 0.016, 0.005],
    [0.036, 0.016, 0.013], [0.037, 0.032, 0.033], [0.064, 0.067, 0.050],
    [0.361, 0.336, 0.382], [0.000, 0.006, 0.171], [0.016, 0.016, 0.009],
    [0.077, 0.058, 0.047], [0.022, 0.032, 0.044], [0.043, 0.024, 0.042],
    [0.020, 0.025, 0.008], [0.006, 0.007, 0.005], [0.077, 0.079, 0.077],
    [0.042, 0.034, 0.023], [0.008, 0.006, 0.007], [0.020, 0.016, 0.022],
]

_REF_EMA_COEFF = [
    [0.000, 0.156, 0.844], [0.049, 0.095, 0.856], [0.038, 0.049, 0.913],
    [0.004, 0.975, 0.021], [0.035, 0.873, 0.091], [0.078, 0.838, 0.084],
    [0.093, 0.874, 0.033], [0.074, 0.903, 0.023], [0.049, 0.949, 0.002],
    [0.158, 0.795, 0.047], [0.265, 0.643, 0.092], [0.328, 0.581, 0.091],
    [0.658, 0.159, 0.183], [0.656, 0.109, 0.235], [0.669, 0.107, 0.224],
    [0.227, 0.114, 0.659], [0.194, 0.054, 0.751], [0.183, 0.000, 0.817],
    [0.798, 0.180, 0.022], [0.783, 0.184, 0.033], [0.666, 0.298, 0.036],
    [0.878, 0.096, 0.027], [0.869, 0.119, 0.013], [0.867, 0.133, 0.000],
    [0.928, 0.048, 0.024], [0.917, 0.043, 0.040], [0.881, 0.079, 0.040],
    [0.886, 0.023, 0.090], [0.916, 0.005, 0.079], [0.885, 0.013, 0.101],
]

_REF_EMA_BASIS = [
    [0.000, 0.215, 0.064], [0.152, 0.016, 0.004], [0.025, 0.016, 0.000],
    [0.037, 0.016, 0.013], [0.037, 0.032, 0.033], [0.064, 0.067, 0.050],
    [0.358, 0.336, 0.381], [0.000, 0.004, 0.167], [0.016, 0.016, 0.009],
    [0.078, 0.058, 0.048], [0.021, 0.032, 0.044], [0.042, 0.023, 0.042],
    [0.020, 0.025, 0.009], [0.006, 0.007, 0.005], [0.076, 0.079, 0.078],
    [0.042, 0.034, 0.024], [0.007, 0.006, 0.007], [0.019, 0.016, 0.022],
]

_REF_NMF_COEFF = [
    [0.000, 0.163, 0.837], [0.056, 0.101, 0.843], [0.048, 0.059, 0.892],
    [0.000, 0.954, 0.046], [0.035, 0.854, 0.111], [0.081, 0.819, 0.100],
    [0.090, 0.859, 0.051], [0.069, 0.889, 0.042], [0.049, 0.925, 0.025],
    [0.154, 0.787, 0.058], [0.272, 0.633, 0.094], [0.341, 0.571, 0.088],
    [0.695, 0.151, 0.154], [0.696, 0.099, 0.205], [0.702, 0.108, 0.190],
    [0.241, 0.117, 0.642], [0.208, 0.059, 0.733], [0.189, 0.000, 0.811],
    [0.823, 0.177, 0.000], [0.813, 0.184, 0.003], [0.689, 0.296, 0.015],
    [0.910, 0.090, 0.000], [0.895, 0.105, 0.000], [0.863, 0.137, 0.000],
    [0.969, 0.031, 0.000], [0.967, 0.033, 0.000], [0.919, 0.081, 0.000],
    [0.950, 0.005, 0.045], [0.968, 0.000, 0.032], [0.934, 0.009, 0.057],
]

_REF_NMF_BASIS = [
    [0.000, 0.218, 0.063], [0.147, 0.017, 0.004], [0.024, 0.016, 0.000],
    [0.036, 0.017, 0.013], [0.037, 0.032, 0.033], [0.064, 0.068, 0.050],
    [0.363, 0.335, 0.381], [0.000, 0.000, 0.169], [0.016, 0.016, 0.009],
    [0.077, 0.059, 0.047], [0.022, 0.032, 0.044], [0.043, 0.023, 0.042],
    [0.020, 0.026, 0.008], [0.006, 0.008, 0.005], [0.077, 0.079, 0.078],
    [0.042, 0.034, 0.024], [0.008, 0.006, 0.007], [0.020, 0.015, 0.022],
]

_REF_K1_BASIS = [
    0.080, 0.078, 0.017, 0.025, 0.035, 0.062, 0.358, 0.033, 0.015,
    0.066, 0.030, 0.036, 0.019, 0.006, 0.078, 0.036, 0.007, 0.019,
]

_REF_AVERAGE = (0.488, 0.310, 0.203)


def time_budget_reference() -> Dict[str, object]:
    """Published K = 3 estimates for the time-budget table.

    Values are rounded to three decimals as reported; component order is
    the published one (domestic work, paid work, education).  Keys:
    "lba", "ema" and "nmf" each map to {"coeff": 30 x 3, "basis": 3 x 18}
    arrays (basis rows are components, matching fitted layout), "k1_basis"
    is the single-component basis and "average_contribution" the mean
    coefficient row.
    """
    out: Dict[str, object] = {
        "k1_basis": np.array(_REF_K1_BASIS),
        "average_contribution": np.array(_REF_AVERAGE),
    }
    for key, coeff, basis in (
        ("lba", _REF_LBA_COEFF, _REF_LBA_BASIS),
        ("ema", _REF_EMA_COEFF, _REF_EMA_BASIS),
        ("nmf", _REF_NMF_COEFF, _REF_NMF_BASIS),
    ):
        out[key] = {"coeff": np.array(coeff), "basis": np.array(basis).T}
    return out


# ---------------------------------------------------------------------------
# CSV ingestion


def load_csv(path) -> Dataset:
    """Read a labeled nonnegative table from a comma-separated file.

    Layout: one header line (corner cell then column labels), then one
    line per row starting with its label.  Decimal points, not commas;
    any parse problem reports the 1-based row and column of the offender.
    """
    p = Path(path)
    text = p.read_text(encoding="utf-8")
    lines = [ln for ln in text.splitlines() if ln.strip() != ""]
    if len(lines) < 2:
        raise ParseError("need a header line and at least one data row", row=1, col=1)
    header = [c.strip() for c in lines[0].split(",")]
    if len(header) < 2:
        raise ParseError("header must name at least one column", row=1, col=1)
    col_labels = tuple(header[1:])
    width = len(col_labels)
    row_labels = []
    rows = []
    for r, line in enumerate(lines[1:], start=2):
        cells = [c.strip() for c in line.split(",")]
        if len(cells) != width + 1:
            raise RaggedRowError(
                f"row {r} has {len(cells) - 1} data cells, expected {width}",
                row=r,
                col=len(cells),
            )
        row_labels.append(cells[0])
        parsed = []
        for c, cell in enumerate(cells[1:], start=2):
            try:
                value = float(cell)
            except ValueError:
                raise ParseError(f"cell {cell!r} is not a number", row=r, col=c) from None
            if not np.isfinite(value):
                raise ParseError(f"cell {cell!r} is not finite", row=r, col=c)
            if value < 0:
                raise NegativeEntryError(f"negative value {value} at row {r}, column {c}")
            parsed.append(value)
        rows.append(parsed)
    return Dataset(
        name=p.stem,
        row_labels=tuple(row_labels),
        col_labels=col_labels,
        counts=Matrix(np.array(rows, dtype=float)),
        provenance=f"loaded from {p.name}",
    )
