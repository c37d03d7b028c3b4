"""Command-line driver.

Subcommands: fit, convert, diagnose, plot, datasets.  A run is fully
deterministic for fixed seeds; every artifact is a plain text, SVG or
factorization file in the chosen output directory.  Failures write a
machine-readable error record and exit nonzero.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import linear_sum_assignment

from . import __version__
from .datasets import Dataset, dataset_names, load_csv, load_dataset, time_budget_reference
from .ema import EmmaConfig, emma_fit
from .errors import ParseError, SimplexFactorError, UnsupportedKError
from .fileformat import LoadedFactorization, read_factorization, write_factorization
from .geometry import TernaryPoint, average_contribution, rescaled_basis, rows_as_ternary
from .identifiability import IdentReport, identifiability_report
from .lba import ExtremeSearchConfig, LbaConfig, extreme_solution, fit_lba_cwls, fit_lba_em
from .linalg import row_normalize
from .matrices import CompositionMatrix, Matrix, RowMassVector
from .models import (
    BudgetFactorization,
    LcaFactorization,
    NmfFactorization,
    lba_to_lca,
    lba_to_nmf,
    lca_to_lba,
    nmf_to_lba,
)
from .nmf import NmfConfig, fit_frobenius, fit_minvol
from .plsa import PlsaConfig, fit_plsa
from .results import FitResult, per_column_r2
from .ternary_svg import emit_ternary_svg

_MODELS = ("nmf", "lba", "ema", "plsa", "lca")
_IDENTIFY = ("none", "inner", "outer")


@dataclass
class RunConfig:
    data: str
    model: str
    k: int
    objective: Optional[str] = None
    lam: Optional[float] = None
    beta: Optional[float] = None
    estimator: Optional[str] = None
    identify: str = "none"
    restarts: Optional[int] = None
    seed: int = 0
    out: str = "simplexfactor-out"

    def validate(self) -> None:
        if self.model not in _MODELS:
            raise ValueError(f"unknown model {self.model!r}")
        if self.k < 1:
            raise ValueError("k must be at least 1")
        if self.identify not in _IDENTIFY:
            raise ValueError(f"identify must be one of {_IDENTIFY}")
        if self.objective is not None and self.model != "nmf":
            raise ValueError("--objective applies to the nmf model only")
        if self.lam is not None and not (self.model == "nmf" and self.objective == "minvol"):
            raise ValueError("--lambda applies to nmf with the minvol objective only")
        if self.beta is not None and self.model not in ("plsa", "lca"):
            raise ValueError("--beta applies to the plsa and lca models only")
        if self.estimator is not None and self.model != "lba":
            raise ValueError("--estimator applies to the lba model only")
        if self.restarts is not None and self.restarts < 1:
            raise ValueError("restarts must be at least 1")


def _default_seed() -> int:
    raw = os.environ.get("SIMPLEXFACTOR_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise ValueError(f"SIMPLEXFACTOR_SEED must be an integer, got {raw!r}") from None


def _read_config_file(path: str) -> dict:
    """key = value lines; '#' starts a comment; keys mirror RunConfig."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"expected key = value, got {raw!r}", row=lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        if key == "lambda":
            key = "lam"
        out[key] = value
    return out


_INT_KEYS = {"k", "restarts", "seed"}
_FLOAT_KEYS = {"lam", "beta"}


def _merge_config(args: argparse.Namespace) -> RunConfig:
    values = {}
    if getattr(args, "config", None):
        raw = _read_config_file(args.config)
        known = {f.name for f in fields(RunConfig)}
        for key, val in raw.items():
            if key not in known:
                raise ValueError(f"unknown config key {key!r}")
            if key in _INT_KEYS:
                values[key] = int(val)
            elif key in _FLOAT_KEYS:
                values[key] = float(val)
            else:
                values[key] = val
    for f in fields(RunConfig):
        flag = getattr(args, f.name, None)
        if flag is not None:
            values[f.name] = flag
    if "seed" not in values:
        values["seed"] = _default_seed()
    if "data" not in values or "model" not in values or "k" not in values:
        raise ValueError("data, model and k are required (flags or config file)")
    cfg = RunConfig(**values)
    cfg.validate()
    return cfg


# ---------------------------------------------------------------------------
# fit plumbing


def _load_table(name_or_path: str) -> Dataset:
    if name_or_path in dataset_names():
        return load_dataset(name_or_path)
    return load_csv(name_or_path)


def _dispatch_fit(ds: Dataset, cfg: RunConfig) -> Tuple[FitResult, str]:
    """Run the configured solver; returns the result and the data scale
    ('counts' or 'composition') the residual refers to."""
    counts = ds.counts.values
    restarts = cfg.restarts if cfg.restarts is not None else 20
    if cfg.model == "nmf":
        objective = cfg.objective or "frobenius"
        if objective == "minvol":
            comp, _ = row_normalize(ds.counts)
            ncfg = NmfConfig(
                k=cfg.k,
                objective="minvol",
                lam=cfg.lam,
                restarts=restarts,
                seed=cfg.seed,
                row_stochastic_coeff=True,
            )
            return fit_minvol(Matrix(comp.values), ncfg), "composition"
        ncfg = NmfConfig(k=cfg.k, objective="frobenius", restarts=restarts, seed=cfg.seed)
        return fit_frobenius(ds.counts, ncfg), "counts"
    if cfg.model == "lba":
        estimator = cfg.estimator or "em"
        lcfg = LbaConfig(k=cfg.k, estimator=estimator, restarts=restarts, seed=cfg.seed)
        if estimator == "em":
            return fit_lba_em(ds.counts, lcfg), "counts"
        comp, _ = row_normalize(ds.counts)
        return fit_lba_cwls(comp, lcfg), "composition"
    if cfg.model == "ema":
        comp, _ = row_normalize(ds.counts)
        ecfg = EmmaConfig(k=cfg.k, fcm_seed=cfg.seed)
        return emma_fit(comp, ecfg), "composition"
    form = "asymmetric" if cfg.model == "plsa" else "symmetric"
    pcfg = PlsaConfig(
        k=cfg.k,
        beta=cfg.beta if cfg.beta is not None else 1.0,
        form=form,
        restarts=restarts,
        seed=cfg.seed,
    )
    return fit_plsa(ds.counts, pcfg), "counts"


def _budget_view(
    fact, counts: np.ndarray
) -> Tuple[Optional[BudgetFactorization], Optional[RowMassVector]]:
    """Budget representation of a fit plus row masses, when derivable."""
    if isinstance(fact, BudgetFactorization):
        total = counts.sum()
        masses = RowMassVector(counts.sum(axis=1) / total)
        return fact, masses
    if isinstance(fact, LcaFactorization):
        return lca_to_lba(fact)
    if isinstance(fact, NmfFactorization):
        try:
            budget, masses = nmf_to_lba(fact)
        except SimplexFactorError:
            return None, None
        return budget, masses
    return None, None


def _align_permutation(fitted_basis: np.ndarray, ref_basis: np.ndarray) -> Tuple[int, ...]:
    """Assignment of fitted components to reference ones by total cosine
    similarity of basis rows."""
    fn = fitted_basis / np.maximum(np.linalg.norm(fitted_basis, axis=1, keepdims=True), 1e-300)
    rn = ref_basis / np.maximum(np.linalg.norm(ref_basis, axis=1, keepdims=True), 1e-300)
    cost = -(rn @ fn.T)  # rows: reference slots, cols: fitted components
    _, cols = linear_sum_assignment(cost)
    return tuple(int(c) for c in cols)


def _permute_budget(b: BudgetFactorization, perm: Sequence[int]) -> BudgetFactorization:
    idx = list(perm)
    return BudgetFactorization(
        CompositionMatrix(b.coeff.values[:, idx]),
        CompositionMatrix(b.basis.values[idx, :]),
    )


def _format_ident(report: IdentReport) -> str:
    lines = [
        f"separable {'yes' if report.separable else 'no'}",
        "witness_rows " + (" ".join(str(r) for r in report.witness) if report.witness else "-"),
        f"ssc {report.ssc_status}",
        f"ssc_certificate {report.ssc_certificate}",
    ]
    if report.k2_inner is not None:
        lines.append(f"k2_inner_xy {report.k2_inner[0]:.12g} {report.k2_inner[1]:.12g}")
        lines.append(f"k2_outer_xy {report.k2_outer[0]:.12g} {report.k2_outer[1]:.12g}")
    if report.notes:
        lines.append(f"notes {report.notes}")
    return "\n".join(lines) + "\n"


def _write_residual_summary(path: Path, ds: Dataset, result: FitResult, scale: str) -> None:
    res = result.residual
    lines = [
        f"scale {scale}",
        f"objective {result.objective:.12g}",
        f"residual_frobenius {result.residual_norm:.12g}",
        f"best_restart {result.best_restart}",
        f"seed {result.seed_used}",
        f"iterations {len(result.objective_trace)}",
        "flags " + (",".join(result.flags) if result.flags else "-"),
    ]
    recon_key = "counts" if scale == "counts" else "composition"
    data = ds.counts.values
    if scale == "composition":
        data = data / data.sum(axis=1, keepdims=True)
    r2 = per_column_r2(data, data - res)
    lines.append(f"per_column_r2 ({recon_key} scale)")
    for label, value in zip(ds.col_labels, r2):
        lines.append(f"  {label} {value:.6f}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _reference_key(model: str, objective: Optional[str]) -> Optional[str]:
    if model == "nmf":
        # the published values are on the row-profile scale
        return "nmf" if objective == "minvol" else None
    if model in ("lba", "ema"):
        return model
    return None


def _cmd_fit(args: argparse.Namespace) -> int:
    cfg = _merge_config(args)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    ds = _load_table(cfg.data)
    result, scale = _dispatch_fit(ds, cfg)
    fact = result.factorization
    budget, masses = _budget_view(fact, ds.counts.values)

    transform_note = None
    if cfg.identify != "none":
        if budget is None:
            raise UnsupportedKError("identification needs a budget-representable fit")
        col_mass = ds.counts.values.sum(axis=0) / ds.counts.values.sum()
        xcfg = ExtremeSearchConfig(direction=cfg.identify, column_mass=col_mass, seed=cfg.seed)
        budget, transform, value = extreme_solution(budget, xcfg)
        transform_note = f"extreme {cfg.identify} objective {value:.12g}"
        fact = budget

    alignment_note = None
    ref_key = _reference_key(cfg.model, cfg.objective)
    if cfg.data == "time-budget" and cfg.k == 3 and ref_key is not None and budget is not None:
        ref = time_budget_reference()[ref_key]
        perm = _align_permutation(budget.basis.values, ref["basis"])
        budget = _permute_budget(budget, perm)
        fact = budget
        dev_c = float(np.max(np.abs(budget.coeff.values - ref["coeff"])))
        dev_b = float(np.max(np.abs(budget.basis.values - ref["basis"])))
        alignment_note = (
            f"reference {ref_key}\npermutation " + " ".join(str(p) for p in perm) +
            f"\nmax_abs_coeff_deviation {dev_c:.6f}\nmax_abs_basis_deviation {dev_b:.6f}"
        )

    write_factorization(
        out / "factorization.fct",
        fact,
        seed=cfg.seed,
        row_labels=ds.row_labels,
        col_labels=ds.col_labels,
        row_masses=masses if isinstance(fact, BudgetFactorization) else None,
    )
    _write_residual_summary(out / "residual.txt", ds, result, scale)

    coeff = fact.coeff.values if not isinstance(fact, LcaFactorization) else fact.row_profile.values
    report = identifiability_report(
        coeff,
        budget=budget if budget is not None and budget.k == 2 else None,
        seed=cfg.seed,
    )
    (out / "identifiability.txt").write_text(_format_ident(report), encoding="utf-8")

    notes = []
    if transform_note:
        notes.append(transform_note)
    if alignment_note:
        notes.append(alignment_note)
    if notes:
        (out / "alignment.txt").write_text("\n".join(notes) + "\n", encoding="utf-8")

    if budget is not None and budget.k == 3:
        _write_plots(out, budget, ds.row_labels, ds.col_labels)
    print(f"fit complete: model {cfg.model} k {cfg.k} -> {out}")
    return 0


def _write_plots(out: Path, budget: BudgetFactorization, row_labels, col_labels) -> None:
    z = average_contribution(budget.coeff)
    points = rows_as_ternary(budget.coeff, labels=list(row_labels))
    points.append(TernaryPoint("average", tuple(z)))
    emit_ternary_svg(points, out / "rows.svg", corner_labels=("k1", "k2", "k3"))
    cols = rescaled_basis(budget.basis, z, labels=list(col_labels))
    emit_ternary_svg(cols, out / "columns.svg", corner_labels=("k1", "k2", "k3"))


# ---------------------------------------------------------------------------
# remaining subcommands


def _cmd_convert(args: argparse.Namespace) -> int:
    loaded = read_factorization(args.src)
    target = args.to
    fact = loaded.factorization
    masses = loaded.row_masses
    if loaded.kind == "budget":
        budget = fact
    elif loaded.kind == "nmf":
        budget, masses = nmf_to_lba(fact)
    else:
        budget, masses = lca_to_lba(fact)

    out_masses = masses
    if target == "lba":
        converted = budget
    elif target == "lca":
        if masses is None:
            raise ValueError("conversion to the latent-class form needs row masses")
        converted = lba_to_lca(budget, masses)
        out_masses = None
    elif target == "nmf":
        if loaded.kind == "nmf":
            converted = fact
        elif masses is None:
            raise ValueError("conversion to the unconstrained form needs row masses")
        else:
            converted = lba_to_nmf(budget, masses)
    else:
        raise ValueError(f"unknown target {target!r}")
    write_factorization(
        args.out,
        converted,
        seed=loaded.seed,
        row_labels=loaded.row_labels,
        col_labels=loaded.col_labels,
        row_masses=out_masses if not isinstance(converted, LcaFactorization) else None,
    )
    print(f"converted {loaded.kind} -> {target}: {args.out}")
    return 0


def _cmd_diagnose(args: argparse.Namespace) -> int:
    loaded = read_factorization(args.fct)
    fact = loaded.factorization
    if loaded.kind == "lca":
        budget, _ = lca_to_lba(fact)
        coeff = budget.coeff.values
    elif loaded.kind == "nmf":
        coeff = fact.coeff.values
        try:
            budget, _ = nmf_to_lba(fact)
        except SimplexFactorError:
            budget = None
    else:
        budget = fact
        coeff = fact.coeff.values
    report = identifiability_report(coeff, budget=budget, seed=args.seed)
    text = _format_ident(report)
    sys.stdout.write(text)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    return 0


def _cmd_plot(args: argparse.Namespace) -> int:
    loaded = read_factorization(args.fct)
    fact = loaded.factorization
    if loaded.kind == "budget":
        budget = fact
    elif loaded.kind == "nmf":
        budget, _ = nmf_to_lba(fact)
    else:
        budget, _ = lca_to_lba(fact)
    if budget.k != 3:
        raise UnsupportedKError("ternary plots need exactly three components")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    i = budget.coeff.rows
    j = budget.basis.cols
    row_labels = loaded.row_labels or tuple(f"row{r + 1}" for r in range(i))
    col_labels = loaded.col_labels or tuple(f"col{c + 1}" for c in range(j))
    _write_plots(out, budget, row_labels, col_labels)
    print(f"plots written to {out}")
    return 0


def _cmd_datasets(_args: argparse.Namespace) -> int:
    for name in dataset_names():
        ds = load_dataset(name)
        print(f"{name}: {ds.counts.rows} x {ds.counts.cols} -- {ds.provenance}")
    return 0


# ---------------------------------------------------------------------------
# argument parsing


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="simplexfactor",
        description="Budget, latent-class and nonnegative factorizations of compositional tables",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    fit = sub.add_parser("fit", help="fit a model and write artifacts")
    fit.add_argument("--data", help="bundled dataset name or CSV path")
    fit.add_argument("--model", choices=_MODELS)
    fit.add_argument("--k", type=int)
    fit.add_argument("--objective", choices=("frobenius", "minvol"))
    fit.add_argument("--lambda", dest="lam", type=float)
    fit.add_argument("--beta", type=float)
    fit.add_argument("--estimator", choices=("em", "cwls"))
    fit.add_argument("--identify", choices=_IDENTIFY)
    fit.add_argument("--restarts", type=int)
    fit.add_argument("--seed", type=int)
    fit.add_argument("--out")
    fit.add_argument("--config", help="key = value file; flags override")
    fit.set_defaults(func=_cmd_fit)

    convert = sub.add_parser("convert", help="convert between factorization forms")
    convert.add_argument("--from", dest="src", required=True)
    convert.add_argument("--to", choices=("nmf", "lba", "lca"), required=True)
    convert.add_argument("--out", required=True)
    convert.set_defaults(func=_cmd_convert)

    diagnose = sub.add_parser("diagnose", help="identifiability report for a saved fit")
    diagnose.add_argument("--fct", required=True)
    diagnose.add_argument("--out")
    diagnose.add_argument("--seed", type=int, default=0)
    diagnose.set_defaults(func=_cmd_diagnose)

    plot = sub.add_parser("plot", help="ternary plots for a saved three-component fit")
    plot.add_argument("--fct", required=True)
    plot.add_argument("--out", required=True)
    plot.set_defaults(func=_cmd_plot)

    datasets = sub.add_parser("datasets", help="list bundled datasets")
    datasets.set_defaults(func=_cmd_datasets)
    return parser


def _error_record(exc: Exception) -> dict:
    return {"error": type(exc).__name__, "message": str(exc)}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (SimplexFactorError, ValueError, KeyError, OSError) as exc:
        record = _error_record(exc)
        out = getattr(args, "out", None)
        if out:
            try:
                path = Path(out)
                if path.suffix:
                    path = path.parent
                path.mkdir(parents=True, exist_ok=True)
                (path / "error.json").write_text(
                    json.dumps(record, sort_keys=True) + "\n", encoding="utf-8"
                )
            except OSError:
                pass
        print(json.dumps(record, sort_keys=True), file=sys.stderr)
        return 2


def run(cfg: RunConfig) -> int:
    """Programmatic entry point mirroring the fit subcommand."""
    cfg.validate()
    ns = argparse.Namespace(config=None)
    for f in fields(RunConfig):
        setattr(ns, f.name, getattr(cfg, f.name))
    try:
        return _cmd_fit(ns)
    except (SimplexFactorError, ValueError, KeyError, OSError) as exc:
        record = _error_record(exc)
        out = Path(cfg.out)
        try:
            out.mkdir(parents=True, exist_ok=True)
            (out / "error.json").write_text(
                json.dumps(record, sort_keys=True) + "\n", encoding="utf-8"
            )
        except OSError:
            pass
        print(json.dumps(record, sort_keys=True), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
