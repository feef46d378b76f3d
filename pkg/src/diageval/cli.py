"""Command-line interface.

Exit codes: 0 success, 2 input error, 3 statistical degeneracy, 4 internal
error.
"""

from __future__ import annotations

import csv
import functools
import json
import sys
from pathlib import Path

import click

from ._version import __version__
from .baseline import fit_logistic, save_fit
from .calibration import expected_calibration_error, reliability_curve
from .cohort import ColumnSchema, Role, parse_cohort, write_cohort
from .curves import pr_curve, roc_curve
from .dca import dca_curve
from .errors import DegenerateDataError, DiagevalError, InputError
from .inference import bootstrap_ci, delong_compare
from .report import (
    BaselineConfig,
    BootstrapConfig,
    CalibrationConfig,
    RunConfig,
    load_run_config,
    run_comparison,
)
from .svg import dca_chart, pr_chart, reliability_chart, roc_chart
from .synth import (
    BinormalSpec,
    CalibratedSpec,
    DemoSpec,
    generate_binormal,
    generate_calibrated,
    generate_clinical,
    generate_demo,
)
from .thresholds import threshold_sweep


def handle_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except InputError as err:
            click.echo(f"error: {err}", err=True)
            sys.exit(2)
        except DegenerateDataError as err:
            click.echo(f"error: {err}", err=True)
            sys.exit(3)
        except DiagevalError as err:
            click.echo(f"internal error: {err}", err=True)
            sys.exit(4)
        except (click.ClickException, click.exceptions.Exit, SystemExit):
            raise
        except Exception as err:  # anything unclassified is an internal error
            click.echo(f"internal error: {type(err).__name__}: {err}", err=True)
            sys.exit(4)

    return wrapper


def parse_grid(text: str) -> tuple[float, ...]:
    """Parse "start:stop:step" (inclusive) or a comma-separated list."""
    if ":" in text:
        try:
            start, stop, step = (float(v) for v in text.split(":"))
        except ValueError:
            raise InputError(f"bad grid {text!r}; expected start:stop:step") from None
        if step <= 0 or stop < start:
            raise InputError(f"bad grid {text!r}; need step > 0 and stop >= start")
        count = int(round((stop - start) / step)) + 1
        return tuple(round(start + i * step, 12) for i in range(count))
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise InputError(f"bad grid {text!r}") from None


def schema_options(fn):
    options = [
        click.option("--case-id-col", default="case_id", show_default=True),
        click.option("--label-col", default="label", show_default=True),
        click.option("--pct-normal-col", default=None),
        click.option("--siri-col", default=None),
        click.option("--neut-col", default=None),
        click.option("--mono-col", default=None),
        click.option("--lymph-col", default=None),
    ]
    for option in reversed(options):
        fn = option(fn)
    return fn


def build_schema(case_id_col, label_col, pct_normal_col, siri_col, neut_col,
                 mono_col, lymph_col, score_cols=()):
    return ColumnSchema(
        case_id=case_id_col,
        label=label_col,
        scores=tuple(score_cols),
        pct_normal=pct_normal_col,
        siri=siri_col,
        neutrophils=neut_col,
        monocytes=mono_col,
        lymphocytes=lymph_col,
    )


@click.group()
@click.version_option(version=__version__, prog_name="diageval")
def main():
    """Evaluate and compare binary diagnostic classifiers."""


@main.command("fit-baseline")
@click.option("--train", "train_path", required=True, type=click.Path(exists=True))
@schema_options
@click.option("--predictor", "predictors", multiple=True, default=("pct_normal", "siri"),
              show_default=True)
@click.option("--ridge", default=0.0, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path())
@handle_errors
def fit_baseline_cmd(train_path, predictors, ridge, out_path, **schema_kw):
    """Fit the clinical logistic baseline and write fit.json."""
    schema = build_schema(**schema_kw)
    cohort = parse_cohort(train_path, schema, Role.TRAIN)
    fit = fit_logistic(cohort, predictors, ridge=ridge)
    save_fit(fit, out_path)
    click.echo(f"wrote {out_path} ({fit.n_iterations} iterations, "
               f"deviance {fit.final_deviance:.6g})")


@main.command("sweep")
@click.option("--input", "input_path", required=True, type=click.Path(exists=True))
@schema_options
@click.option("--score-col", required=True)
@click.option("--grid", default="0:0.5:0.1", show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path())
@handle_errors
def sweep_cmd(input_path, score_col, grid, out_path, **schema_kw):
    """Threshold sweep for one score column."""
    schema = build_schema(score_cols=[score_col], **schema_kw)
    cohort = parse_cohort(input_path, schema)
    scores, labels, _ = cohort.score_column(score_col)
    rows = threshold_sweep(scores, labels, parse_grid(grid))
    with open(out_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["threshold", "sensitivity", "specificity", "ppv", "npv", "f1",
             "accuracy", "flagged_pct", "tp", "fp", "tn", "fn"]
        )
        for row in rows:
            m, c = row.metrics, row.counts

            def cell(v, scale=1.0):
                return "" if v is None else repr(v * scale)

            writer.writerow(
                [repr(row.threshold), cell(m.sensitivity), cell(m.specificity),
                 cell(m.ppv), cell(m.npv), cell(m.f1), cell(m.accuracy),
                 cell(m.flagged_fraction, 100.0), c.tp, c.fp, c.tn, c.fn]
            )
    click.echo(f"wrote {out_path} ({len(rows)} thresholds)")


@main.command("curves")
@click.option("--input", "input_path", required=True, type=click.Path(exists=True))
@schema_options
@click.option("--score-col", required=True)
@click.option("--out-prefix", default="", show_default=True)
@handle_errors
def curves_cmd(input_path, score_col, out_prefix, **schema_kw):
    """Write ROC and PR points (CSV) and figures (SVG)."""
    schema = build_schema(score_cols=[score_col], **schema_kw)
    cohort = parse_cohort(input_path, schema)
    scores, labels, _ = cohort.score_column(score_col)
    roc = roc_curve(scores, labels)
    pr = pr_curve(scores, labels)
    prev = float((labels == 1).mean())
    for kind, series in (("roc", roc), ("pr", pr)):
        path = Path(f"{out_prefix}{kind}.csv")
        with path.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["x", "y", "threshold"])
            writer.writerows([repr(p.x), repr(p.y), repr(p.threshold)]
                             for p in series.points)
    Path(f"{out_prefix}roc.svg").write_text(
        roc_chart(roc.points, title=f"ROC: {score_col}"), encoding="utf-8")
    Path(f"{out_prefix}pr.svg").write_text(
        pr_chart(pr.points, prev, title=f"PR: {score_col}"), encoding="utf-8")
    click.echo(f"ROC AUC {roc.area:.6f}, PR AUC {pr.area:.6f}; "
               f"wrote {out_prefix}{{roc,pr}}.{{csv,svg}}")


@main.command("compare")
@click.option("--input", "input_path", required=True, type=click.Path(exists=True))
@schema_options
@click.option("--score-col", "score_cols", multiple=True, required=True)
@click.option("--mode", type=click.Choice(["paired", "unpaired"]), required=True)
@click.option("--replicates", default=1000, show_default=True)
@click.option("--seed", default=42, show_default=True)
@click.option("--ci", "ci_method", type=click.Choice(["bca", "percentile"]),
              default="bca", show_default=True)
@click.option("--out", "out_path", default=None, type=click.Path())
@handle_errors
def compare_cmd(input_path, score_cols, mode, replicates, seed, ci_method,
                out_path, **schema_kw):
    """DeLong comparison of two score columns plus bootstrap AUC intervals."""
    if len(score_cols) != 2:
        raise InputError("compare needs exactly two --score-col options")
    schema = build_schema(score_cols=score_cols, **schema_kw)
    cohort = parse_cohort(input_path, schema)
    name_a, name_b = score_cols

    sections = {}
    for name in score_cols:
        sub = cohort.subset_with_score(name)

        def stat(c, _name=name):
            s, y, _ = c.score_column(_name)
            return roc_curve(s, y).area

        sections[name] = bootstrap_ci(
            sub, stat, replicates, seed, ci_method
        ).to_dict()

    if mode == "paired":
        rows = [(c.scores[name_a], c.scores[name_b], c.label)
                for c in cohort.cases
                if name_a in c.scores and name_b in c.scores]
        if not rows:
            raise InputError(f"no cases carry both {name_a!r} and {name_b!r}")
        a, b, y = zip(*rows)
        result = delong_compare(a, b, y, mode="paired")
    else:
        a, ya, _ = cohort.score_column(name_a)
        b, yb, _ = cohort.score_column(name_b)
        result = delong_compare(a, b, ya, mode="unpaired", labels_b=yb)

    payload = {
        "models": {name: sections[name] for name in score_cols},
        "delong": result.to_dict(),
        "difference": result.auc_a - result.auc_b,
        "replicates": replicates,
        "seed": seed,
        "ci_method": ci_method,
    }
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if out_path:
        Path(out_path).write_text(text, encoding="utf-8")
        click.echo(f"wrote {out_path}")
    else:
        click.echo(text, nl=False)


@main.command("calibrate")
@click.option("--input", "input_path", required=True, type=click.Path(exists=True))
@schema_options
@click.option("--score-col", required=True)
@click.option("--bins", default=10, show_default=True)
@click.option("--binning", type=click.Choice(["equal", "quantile"]), default="equal",
              show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--svg", "svg_path", default=None, type=click.Path())
@handle_errors
def calibrate_cmd(input_path, score_col, bins, binning, out_path, svg_path, **schema_kw):
    """Reliability curve and expected calibration error."""
    schema = build_schema(score_cols=[score_col], **schema_kw)
    cohort = parse_cohort(input_path, schema)
    scores, labels, _ = cohort.score_column(score_col)
    strategy = "equal_width" if binning == "equal" else "quantile"
    curve = reliability_curve(scores, labels, binning=strategy, n_bins=bins)
    ece = expected_calibration_error(curve)
    with open(out_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["lo", "hi", "n", "mean_predicted", "observed_frequency"])
        for b in curve:
            writer.writerow(
                [repr(b.lo), repr(b.hi), b.n,
                 "" if b.mean_predicted is None else repr(b.mean_predicted),
                 "" if b.observed_frequency is None else repr(b.observed_frequency)]
            )
    if svg_path:
        Path(svg_path).write_text(
            reliability_chart(curve, title=f"Reliability: {score_col}"),
            encoding="utf-8")
    click.echo(f"ECE {ece:.6f}; wrote {out_path}")


@main.command("dca")
@click.option("--input", "input_path", required=True, type=click.Path(exists=True))
@schema_options
@click.option("--score-col", required=True)
@click.option("--grid", default="0.01:0.5:0.01", show_default=True)
@click.option("--replicates", default=0, show_default=True,
              help="bootstrap replicates for bands; 0 disables bands")
@click.option("--seed", default=42, show_default=True)
@click.option("--band-method", type=click.Choice(["percentile", "bca"]),
              default="percentile", show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--svg", "svg_path", default=None, type=click.Path())
@handle_errors
def dca_cmd(input_path, score_col, grid, replicates, seed, band_method, out_path,
            svg_path, **schema_kw):
    """Decision curve analysis with optional bootstrap bands."""
    schema = build_schema(score_cols=[score_col], **schema_kw)
    cohort = parse_cohort(input_path, schema)
    scores, labels, _ = cohort.score_column(score_col)
    curve = dca_curve(
        scores, labels, parse_grid(grid),
        bootstrap=(replicates, seed) if replicates else None,
        band_method=band_method,
    )
    with open(out_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["threshold", "model_nb", "treat_all_nb", "treat_none_nb",
                         "band_lo", "band_hi"])
        for i, t in enumerate(curve.thresholds):
            band = ("", "") if curve.bands is None else tuple(map(repr, curve.bands[i]))
            writer.writerow([repr(t), repr(curve.model_nb[i]),
                             repr(curve.treat_all_nb[i]), "0.0", *band])
    if svg_path:
        Path(svg_path).write_text(
            dca_chart(curve, title=f"Decision curves: {score_col}"), encoding="utf-8")
    click.echo(f"wrote {out_path} ({len(curve.thresholds)} thresholds)")


@main.group("synth")
def synth_group():
    """Generate synthetic cohorts with known properties."""


def _write_synth(cohort, out_path, schema):
    write_cohort(cohort, out_path, schema)
    click.echo(f"wrote {out_path} ({len(cohort)} cases)")


@synth_group.command("binormal")
@click.option("--n-pos", required=True, type=int)
@click.option("--n-neg", required=True, type=int)
@click.option("--mu-pos", required=True, type=float)
@click.option("--mu-neg", required=True, type=float)
@click.option("--sigma-pos", default=1.0, show_default=True)
@click.option("--sigma-neg", default=1.0, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--score-name", default="score", show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path())
@handle_errors
def synth_binormal(n_pos, n_neg, mu_pos, mu_neg, sigma_pos, sigma_neg, seed,
                   score_name, out_path):
    """Binormal scores with closed-form true AUC."""
    spec = BinormalSpec(n_pos=n_pos, n_neg=n_neg, mu_pos=mu_pos, mu_neg=mu_neg,
                        sigma_pos=sigma_pos, sigma_neg=sigma_neg, seed=seed,
                        score_name=score_name)
    cohort = generate_binormal(spec)
    click.echo(f"true AUC {spec.true_auc:.6f}")
    _write_synth(cohort, out_path, ColumnSchema(scores=(score_name,)))


@synth_group.command("calibrated")
@click.option("--n", required=True, type=int)
@click.option("--distribution", type=click.Choice(["uniform", "beta", "constant"]),
              default="uniform", show_default=True)
@click.option("--beta-a", default=1.0, show_default=True)
@click.option("--beta-b", default=1.0, show_default=True)
@click.option("--value", default=0.5, show_default=True,
              help="score used by the constant distribution")
@click.option("--seed", default=0, show_default=True)
@click.option("--score-name", default="score", show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path())
@handle_errors
def synth_calibrated(n, distribution, beta_a, beta_b, value, seed, score_name, out_path):
    """Scores whose labels are Bernoulli(score): perfectly calibrated."""
    cohort = generate_calibrated(CalibratedSpec(
        n=n, distribution=distribution, beta_a=beta_a, beta_b=beta_b, value=value,
        seed=seed, score_name=score_name))
    _write_synth(cohort, out_path, ColumnSchema(scores=(score_name,)))


@synth_group.command("clinical")
@click.option("--n", required=True, type=int)
@click.option("--betas", required=True,
              help="intercept,pct_normal,siri e.g. -4,0.5,-0.8")
@click.option("--seed", default=0, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path())
@handle_errors
def synth_clinical(n, betas, seed, out_path):
    """Clinical features with labels from a known logistic model."""
    try:
        b0, b1, b2 = (float(v) for v in betas.split(","))
    except ValueError:
        raise InputError(f"bad --betas {betas!r}; expected three numbers") from None
    cohort = generate_clinical(n, (b0, b1, b2), seed=seed)
    schema = ColumnSchema(pct_normal="pct_normal", neutrophils="neutrophils",
                          monocytes="monocytes", lymphocytes="lymphocytes")
    _write_synth(cohort, out_path, schema)


@synth_group.command("demo")
@click.option("--seed", default=7, show_default=True)
@click.option("--n", default=600, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path())
@handle_errors
def synth_demo(seed, n, out_path):
    """Two-model demo cohort with clinical features."""
    spec = DemoSpec(n=n, seed=seed)
    cohort = generate_demo(spec)
    schema = ColumnSchema(
        scores=(spec.model_a, spec.model_b), pct_normal="pct_normal",
        neutrophils="neutrophils", monocytes="monocytes", lymphocytes="lymphocytes")
    _write_synth(cohort, out_path, schema)


@main.command("report")
@click.option("--config", "config_path", default=None, type=click.Path(exists=True))
@click.option("--input", "input_path", default=None, type=click.Path(exists=True))
@schema_options
@click.option("--score-col", "score_cols", multiple=True)
@click.option("--train", "train_path", default=None, type=click.Path(exists=True),
              help="fit the clinical baseline on this cohort and score it")
@click.option("--baseline-name", default="who_siri", show_default=True)
@click.option("--mode", "delong_mode", type=click.Choice(["paired", "unpaired"]),
              default=None)
@click.option("--replicates", default=1000, show_default=True)
@click.option("--seed", default=42, show_default=True)
@click.option("--ci", "ci_method", type=click.Choice(["bca", "percentile"]),
              default="bca", show_default=True)
@click.option("--bins", default=10, show_default=True)
@click.option("--binning", type=click.Choice(["equal", "quantile"]), default="equal",
              show_default=True)
@click.option("--sweep-grid", default="0:0.5:0.1", show_default=True)
@click.option("--dca-grid", default="0.01:0.5:0.01", show_default=True)
@click.option("--dca-bands/--no-dca-bands", default=False, show_default=True)
@click.option("--out-dir", envvar="DIAGEVAL_OUT_DIR", default=".", show_default=True)
@handle_errors
def report_cmd(config_path, input_path, score_cols, train_path, baseline_name,
               delong_mode, replicates, seed, ci_method, bins, binning, sweep_grid,
               dca_grid, dca_bands, out_dir, **schema_kw):
    """Run the full comparison pipeline and write all artifacts."""
    if config_path is not None:
        config = load_run_config(config_path)
    else:
        if input_path is None:
            raise InputError("either --config or --input is required")
        if not score_cols and train_path is None:
            raise InputError("need at least one --score-col or a --train baseline")
        baseline = None
        if train_path is not None:
            baseline = BaselineConfig(train_path=train_path, name=baseline_name)
        config = RunConfig(
            input_path=input_path,
            schema=build_schema(score_cols=score_cols, **schema_kw),
            models=tuple(score_cols),
            baseline=baseline,
            sweep_grid=parse_grid(sweep_grid),
            bootstrap=BootstrapConfig(n=replicates, seed=seed, method=ci_method),
            calibration=CalibrationConfig(
                bins=bins, binning="equal_width" if binning == "equal" else "quantile"),
            dca_grid=parse_grid(dca_grid),
            dca_bands=dca_bands,
            delong_mode=delong_mode,
            out_dir=out_dir,
        )
    summary = run_comparison(config)
    names = ", ".join(m["name"] for m in summary["models"])
    click.echo(f"wrote {Path(config.out_dir) / 'summary.json'} (models: {names})")


if __name__ == "__main__":
    main()
