"""Full two-model comparison runs and their rendered artifacts.

summary.json is the canonical output; every CSV table and SVG figure is
derived from it, so each rendered cell traces back to a summary field. A
rerun with the same config and inputs reproduces summary.json and the CSVs
byte for byte (timestamps are opt-in for exactly that reason).
"""

from __future__ import annotations

import csv
import dataclasses
import datetime
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import svg
from ._version import __version__
from .baseline import fit_logistic, score_cohort
from .calibration import expected_calibration_error, reliability_curve
from .cohort import ColumnSchema, Cohort, Role, check_disjoint, parse_cohort, prevalence
from .curves import pr_curve, roc_curve
from .dca import DEFAULT_DCA_GRID, dca_curve
from .errors import AllUndefined, DiagevalError, InputError
from .inference import bootstrap_ci, delong_compare, delong_interval
from .thresholds import (
    DEFAULT_SWEEP_GRID,
    best_f1_operating_point,
    confusion_at,
    metrics_from,
    threshold_sweep,
)

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class BootstrapConfig:
    n: int = 1000
    seed: int = 42
    method: str = "bca"
    workers: int = 1


@dataclass(frozen=True)
class CalibrationConfig:
    bins: int = 10
    binning: str = "equal_width"


@dataclass(frozen=True)
class BaselineConfig:
    """Request to fit the clinical logistic baseline and score it as a model."""

    train_path: str
    name: str = "who_siri"
    predictors: tuple[str, ...] = ("pct_normal", "siri")
    ridge: float = 0.0
    allow_overlap: bool = False


@dataclass(frozen=True)
class RunConfig:
    input_path: str
    schema: ColumnSchema
    models: tuple[str, ...] = ()
    baseline: BaselineConfig | None = None
    sweep_grid: tuple[float, ...] = DEFAULT_SWEEP_GRID
    bootstrap: BootstrapConfig = field(default_factory=BootstrapConfig)
    calibration: CalibrationConfig = field(default_factory=CalibrationConfig)
    dca_grid: tuple[float, ...] = DEFAULT_DCA_GRID
    dca_bands: bool = False
    delong_mode: str | None = None
    out_dir: str = "."
    include_timestamp: bool = False

    def __post_init__(self):
        if not self.models and self.baseline is None:
            raise InputError("config needs at least one model or a baseline request")

    def model_names(self) -> tuple[str, ...]:
        names = tuple(self.models)
        if self.baseline is not None:
            names = names + (self.baseline.name,)
        return names

    def to_dict(self) -> dict:
        return {
            "input_path": self.input_path,
            "schema": {
                "case_id": self.schema.case_id,
                "label": self.schema.label,
                "scores": list(self.schema.scores),
                "pct_normal": self.schema.pct_normal,
                "siri": self.schema.siri,
                "neutrophils": self.schema.neutrophils,
                "monocytes": self.schema.monocytes,
                "lymphocytes": self.schema.lymphocytes,
            },
            "models": list(self.models),
            "baseline": None
            if self.baseline is None
            else {
                "train_path": self.baseline.train_path,
                "name": self.baseline.name,
                "predictors": list(self.baseline.predictors),
                "ridge": self.baseline.ridge,
                "allow_overlap": self.baseline.allow_overlap,
            },
            "sweep_grid": list(self.sweep_grid),
            "bootstrap": {
                "n": self.bootstrap.n,
                "seed": self.bootstrap.seed,
                "method": self.bootstrap.method,
                "workers": self.bootstrap.workers,
            },
            "calibration": {
                "bins": self.calibration.bins,
                "binning": self.calibration.binning,
            },
            "dca_grid": list(self.dca_grid),
            "dca_bands": self.dca_bands,
            "delong_mode": self.delong_mode,
            "out_dir": self.out_dir,
        }


def load_run_config(path: str | Path) -> RunConfig:
    """Build a RunConfig from a TOML file (see README for the key layout)."""
    try:
        import tomllib  # Python >= 3.11
    except ModuleNotFoundError:  # pragma: no cover - depends on interpreter
        import tomli as tomllib

    raw = tomllib.loads(Path(path).read_text(encoding="utf-8"))
    schema_raw = raw.get("schema", {})
    schema = ColumnSchema(
        case_id=schema_raw.get("case_id", "case_id"),
        label=schema_raw.get("label", "label"),
        scores=tuple(raw.get("models", [])),
        pct_normal=schema_raw.get("pct_normal"),
        siri=schema_raw.get("siri"),
        neutrophils=schema_raw.get("neutrophils"),
        monocytes=schema_raw.get("monocytes"),
        lymphocytes=schema_raw.get("lymphocytes"),
    )
    baseline = None
    if "baseline" in raw:
        b = raw["baseline"]
        baseline = BaselineConfig(
            train_path=b["train"],
            name=b.get("name", "who_siri"),
            predictors=tuple(b.get("predictors", ("pct_normal", "siri"))),
            ridge=float(b.get("ridge", 0.0)),
            allow_overlap=bool(b.get("allow_overlap", False)),
        )
    boot = raw.get("bootstrap", {})
    calib = raw.get("calibration", {})
    dca_raw = raw.get("dca", {})
    return RunConfig(
        input_path=raw["input"],
        schema=schema,
        models=tuple(raw.get("models", [])),
        baseline=baseline,
        sweep_grid=tuple(raw.get("sweep_grid", DEFAULT_SWEEP_GRID)),
        bootstrap=BootstrapConfig(
            n=int(boot.get("n", 1000)),
            seed=int(boot.get("seed", 42)),
            method=boot.get("method", "bca"),
            workers=int(boot.get("workers", 1)),
        ),
        calibration=CalibrationConfig(
            bins=int(calib.get("bins", 10)),
            binning=calib.get("binning", "equal_width"),
        ),
        dca_grid=tuple(dca_raw.get("grid", DEFAULT_DCA_GRID)),
        dca_bands=bool(dca_raw.get("bands", False)),
        delong_mode=raw.get("delong_mode"),
        out_dir=raw.get("out_dir", "."),
        include_timestamp=bool(raw.get("include_timestamp", False)),
    )


def _run_stage(stage: str, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except DiagevalError as err:
        raise err.with_stage(stage)


def _metrics_dict(m) -> dict:
    return {
        "sensitivity": m.sensitivity,
        "specificity": m.specificity,
        "ppv": m.ppv,
        "npv": m.npv,
        "f1": m.f1,
        "accuracy": m.accuracy,
        "flagged_fraction": m.flagged_fraction,
    }


def _counts_dict(c) -> dict:
    return {"tp": c.tp, "fp": c.fp, "tn": c.tn, "fn": c.fn, "threshold": c.threshold}


def _analyze_model(name: str, cohort: Cohort, config: RunConfig) -> dict:
    scores, labels, _ = cohort.score_column(name)
    sub = cohort.subset_with_score(name)
    boot = config.bootstrap

    roc = roc_curve(scores, labels)
    pr = pr_curve(scores, labels)

    def roc_auc_stat(c: Cohort) -> float:
        s, y, _ = c.score_column(name)
        return roc_curve(s, y).area

    def pr_auc_stat(c: Cohort) -> float:
        s, y, _ = c.score_column(name)
        return pr_curve(s, y).area

    roc_ci = bootstrap_ci(
        sub, roc_auc_stat, boot.n, boot.seed, boot.method, workers=boot.workers
    )
    pr_ci = bootstrap_ci(
        sub, pr_auc_stat, boot.n, boot.seed, boot.method, workers=boot.workers
    )
    sweep = threshold_sweep(scores, labels, config.sweep_grid)
    try:
        best = best_f1_operating_point(sweep)
        best_dict = {
            "threshold": best.threshold,
            "counts": _counts_dict(best.counts),
            "metrics": _metrics_dict(best.metrics),
        }
    except AllUndefined:
        best_dict = None
    confusion_t0 = confusion_at(scores, labels, 0.0)
    bins = reliability_curve(
        scores, labels, binning=config.calibration.binning, n_bins=config.calibration.bins
    )
    dca = dca_curve(
        scores,
        labels,
        config.dca_grid,
        bootstrap=(boot.n, boot.seed) if config.dca_bands else None,
    )

    n_pos = int(np.sum(labels == 1))
    return {
        "name": name,
        "n_cases": int(scores.size),
        "n_positive": n_pos,
        "prevalence": n_pos / scores.size,
        "roc_auc": roc_ci.to_dict(),
        "roc_auc_delong": delong_interval(scores, labels).to_dict(),
        "pr_auc": pr_ci.to_dict(),
        "roc_points": [[p.x, p.y, p.threshold] for p in roc.points],
        "pr_points": [[p.x, p.y, p.threshold] for p in pr.points],
        "sweep": [
            {
                "threshold": row.threshold,
                "counts": _counts_dict(row.counts),
                "metrics": _metrics_dict(row.metrics),
            }
            for row in sweep
        ],
        "best_f1": best_dict,
        "confusion_t0": _counts_dict(confusion_t0),
        "metrics_t0": _metrics_dict(metrics_from(confusion_t0)),
        "calibration": {
            "binning": config.calibration.binning,
            "n_bins": config.calibration.bins,
            "bins": [
                {
                    "lo": b.lo,
                    "hi": b.hi,
                    "n": b.n,
                    "mean_predicted": b.mean_predicted,
                    "observed_frequency": b.observed_frequency,
                }
                for b in bins
            ],
            "ece": expected_calibration_error(bins),
        },
        "dca": dca.to_dict(),
    }


def _pairwise(cohort: Cohort, names: tuple[str, str], mode: str) -> dict:
    name_a, name_b = names
    if mode == "paired":
        rows = [
            (c.scores[name_a], c.scores[name_b], c.label)
            for c in cohort.cases
            if name_a in c.scores and name_b in c.scores
        ]
        if not rows:
            raise InputError(f"no cases carry both {name_a!r} and {name_b!r}")
        a, b, y = map(np.asarray, zip(*rows))
        result = delong_compare(a, b, y, mode="paired")
        n_pairs = len(rows)
    else:
        a, ya, _ = cohort.score_column(name_a)
        b, yb, _ = cohort.score_column(name_b)
        result = delong_compare(a, b, ya, mode="unpaired", labels_b=yb)
        n_pairs = None
    payload = result.to_dict()
    payload.update(
        {
            "model_a": name_a,
            "model_b": name_b,
            "difference": result.auc_a - result.auc_b,
            "n_pairs": n_pairs,
        }
    )
    return payload


def run_comparison(config: RunConfig) -> dict:
    """Run the full pipeline and write summary.json, tables, and figures.

    Returns the summary dict (the exact content of summary.json).
    """
    cohort = _run_stage(
        "parse", parse_cohort, config.input_path, config.schema, Role.EVALUATE
    )

    baseline_section = None
    if config.baseline is not None:
        bl = config.baseline
        # training files carry features and labels; score columns are an
        # evaluation-side concern
        train_schema = dataclasses.replace(config.schema, scores=())
        train = _run_stage("baseline", parse_cohort, bl.train_path, train_schema, Role.TRAIN)
        overlap = check_disjoint(train, cohort)
        if overlap and not bl.allow_overlap:
            raise InputError(
                f"train/evaluate cohorts share {len(overlap)} case ids "
                f"(first: {overlap[0]!r}); refusing to leak"
            ).with_stage("baseline")
        fit = _run_stage("baseline", fit_logistic, train, bl.predictors, ridge=bl.ridge)
        scored = score_cohort(fit, cohort, skip_missing=True)
        skipped = [cid for cid in cohort.case_ids if cid not in scored]
        cohort = cohort.with_score(bl.name, scored)
        baseline_section = {
            "name": bl.name,
            "fit": fit.to_dict(),
            "n_scored": len(scored),
            "skipped_case_ids": skipped,
            "train_overlap": list(overlap),
        }

    names = config.model_names()
    with ThreadPoolExecutor(max_workers=min(4, len(names))) as pool:
        futures = [
            pool.submit(_run_stage, f"model:{name}", _analyze_model, name, cohort, config)
            for name in names
        ]
        model_sections = [f.result() for f in futures]

    pairwise = None
    if config.delong_mode is not None:
        if len(names) != 2:
            raise InputError(
                f"the DeLong comparison needs exactly two models, got {len(names)}"
            ).with_stage("pairwise")
        pairwise = _run_stage(
            "pairwise", _pairwise, cohort, (names[0], names[1]), config.delong_mode
        )

    summary = {
        "schema_version": SCHEMA_VERSION,
        "tool": {"name": "diageval", "version": __version__},
        "config": config.to_dict(),
        "cohort": {
            "path": config.input_path,
            "n_cases": len(cohort),
            "n_positive": int(cohort.labels.sum()),
            "prevalence": prevalence(cohort),
        },
        "baseline": baseline_section,
        "models": model_sections,
        "pairwise": pairwise,
    }
    if config.include_timestamp:
        summary["generated_at"] = datetime.datetime.now(datetime.timezone.utc).isoformat()

    _write_outputs(summary, Path(config.out_dir))
    return summary


# ---------------------------------------------------------------------------
# Rendering: paper-style formatting rules


def _fmt2(v) -> str:
    return "--" if v is None else f"{v:.2f}"


def _fmt3(v) -> str:
    return "--" if v is None else f"{v:.3f}"


def _fmt_pct1(v) -> str:
    return "--" if v is None else f"{100.0 * v:.1f}%"


def _fmt_ci(est: dict) -> str:
    return f"{est['point']:.3f} [{est['lo']:.3f}, {est['hi']:.3f}]"


def _fmt_p(p: float) -> str:
    return "p<0.001" if p < 0.001 else f"p={p:.3f}"


def _fmt_threshold(t: float) -> str:
    return f"{t:g}"


def render_tables(summary: dict) -> dict[str, list[list[str]]]:
    """Format the four report tables from summary fields.

    Conventions follow the source tables: AUCs and specificity-style rates
    to 3 decimals, sensitivity and F1 to 2, flagged percentage to 1 decimal,
    undefined metrics rendered "--".
    """
    overall = [
        [
            "model",
            "n",
            "roc_auc_95ci",
            "pr_auc_95ci",
            "sensitivity_t0",
            "specificity_t0",
            "f1_t0",
        ]
    ]
    thresholds_tbl = [
        [
            "model",
            "threshold",
            "sensitivity",
            "specificity",
            "ppv",
            "npv",
            "f1",
            "flagged_pct",
        ]
    ]
    confusion = [["model", "tp", "fp", "tn", "fn", "threshold"]]
    auc_tbl = [["model", "roc_auc", "ci_bootstrap", "ci_delong"]]

    for model in summary["models"]:
        t0 = model["metrics_t0"]
        overall.append(
            [
                model["name"],
                str(model["n_cases"]),
                _fmt_ci(model["roc_auc"]),
                _fmt_ci(model["pr_auc"]),
                _fmt2(t0["sensitivity"]),
                _fmt3(t0["specificity"]),
                _fmt2(t0["f1"]),
            ]
        )
        for row in model["sweep"]:
            m = row["metrics"]
            thresholds_tbl.append(
                [
                    model["name"],
                    _fmt_threshold(row["threshold"]),
                    _fmt2(m["sensitivity"]),
                    _fmt3(m["specificity"]),
                    _fmt3(m["ppv"]),
                    _fmt3(m["npv"]),
                    _fmt2(m["f1"]),
                    _fmt_pct1(m["flagged_fraction"]),
                ]
            )
        c = model["confusion_t0"]
        confusion.append(
            [
                model["name"],
                str(c["tp"]),
                str(c["fp"]),
                str(c["tn"]),
                str(c["fn"]),
                _fmt_threshold(c["threshold"]),
            ]
        )
        auc_tbl.append(
            [
                model["name"],
                f"{model['roc_auc']['point']:.3f}",
                f"[{model['roc_auc']['lo']:.3f}, {model['roc_auc']['hi']:.3f}]",
                f"[{model['roc_auc_delong']['lo']:.3f}, {model['roc_auc_delong']['hi']:.3f}]",
            ]
        )

    if summary.get("pairwise"):
        pw = summary["pairwise"]
        auc_tbl.append(
            [
                f"difference ({pw['model_a']} - {pw['model_b']})",
                _fmt3(pw["difference"]),
                f"z={pw['z']:.3f}",
                _fmt_p(pw["p_two_sided"]),
            ]
        )

    return {
        "table_overall": overall,
        "table_thresholds": thresholds_tbl,
        "table_confusion": confusion,
        "table_auc": auc_tbl,
    }


def _write_csv(path: Path, rows: list[list[str]]) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        csv.writer(fh).writerows(rows)


def _write_outputs(summary: dict, out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    out_dir.joinpath("summary.json").write_text(
        json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    for name, rows in render_tables(summary).items():
        _write_csv(out_dir / f"{name}.csv", rows)

    for model in summary["models"]:
        name = model["name"]
        _write_csv(
            out_dir / f"{name}_roc.csv",
            [["fpr", "tpr", "threshold"]]
            + [[repr(v) for v in p] for p in model["roc_points"]],
        )
        _write_csv(
            out_dir / f"{name}_pr.csv",
            [["recall", "precision", "threshold"]]
            + [[repr(v) for v in p] for p in model["pr_points"]],
        )
        _write_csv(
            out_dir / f"{name}_calibration.csv",
            [["lo", "hi", "n", "mean_predicted", "observed_frequency"]]
            + [
                [
                    repr(b["lo"]),
                    repr(b["hi"]),
                    str(b["n"]),
                    "" if b["mean_predicted"] is None else repr(b["mean_predicted"]),
                    ""
                    if b["observed_frequency"] is None
                    else repr(b["observed_frequency"]),
                ]
                for b in model["calibration"]["bins"]
            ],
        )
        dca = model["dca"]
        dca_rows = [["threshold", "model_nb", "treat_all_nb", "treat_none_nb", "band_lo", "band_hi"]]
        for i, t in enumerate(dca["thresholds"]):
            band = ("", "") if dca["bands"] is None else tuple(map(repr, dca["bands"][i]))
            dca_rows.append(
                [repr(t), repr(dca["model_nb"][i]), repr(dca["treat_all_nb"][i]), "0.0", *band]
            )
        _write_csv(out_dir / f"{name}_dca.csv", dca_rows)

        _write_figures(out_dir, model)


class _Point:
    __slots__ = ("x", "y", "threshold")

    def __init__(self, x, y, threshold):
        self.x, self.y, self.threshold = x, y, threshold


class _Curve:
    def __init__(self, d: dict):
        self.thresholds = tuple(d["thresholds"])
        self.model_nb = tuple(d["model_nb"])
        self.treat_all_nb = tuple(d["treat_all_nb"])
        self.bands = None if d["bands"] is None else tuple(tuple(b) for b in d["bands"])


class _Bin:
    def __init__(self, d: dict):
        self.lo, self.hi, self.n = d["lo"], d["hi"], d["n"]
        self.mean_predicted = d["mean_predicted"]
        self.observed_frequency = d["observed_frequency"]


def _write_figures(out_dir: Path, model: dict) -> None:
    name = model["name"]
    roc_points = [_Point(*p) for p in model["roc_points"]]
    pr_points = [_Point(*p) for p in model["pr_points"]]
    out_dir.joinpath(f"{name}_roc.svg").write_text(
        svg.roc_chart(roc_points, title=f"ROC: {name}"), encoding="utf-8"
    )
    out_dir.joinpath(f"{name}_pr.svg").write_text(
        svg.pr_chart(pr_points, model["prevalence"], title=f"PR: {name}"),
        encoding="utf-8",
    )
    bins = [_Bin(b) for b in model["calibration"]["bins"]]
    out_dir.joinpath(f"{name}_calibration.svg").write_text(
        svg.reliability_chart(bins, title=f"Reliability: {name}"), encoding="utf-8"
    )
    out_dir.joinpath(f"{name}_dca.svg").write_text(
        svg.dca_chart(_Curve(model["dca"]), title=f"Decision curves: {name}"),
        encoding="utf-8",
    )
