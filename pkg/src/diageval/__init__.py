"""diageval: evaluation and comparison of binary diagnostic classifiers.

Covers cohort ingestion, the WHO(+SIRI)-style clinical logistic baseline,
threshold metrics, ROC/PR curves, DeLong and bootstrap inference,
calibration, decision curve analysis, synthetic verification cohorts, and
publication-style report rendering.
"""

from ._version import __version__
from .baseline import (
    LogisticFit,
    MorphologyClass,
    compute_siri,
    fit_logistic,
    predict_proba,
    who_strict_flag,
)
from .calibration import ReliabilityBin, expected_calibration_error, reliability_curve
from .cohort import (
    BloodPanel,
    CaseRecord,
    Cohort,
    ColumnSchema,
    Role,
    check_disjoint,
    parse_cohort,
    prevalence,
    write_cohort,
)
from .curves import CurveKind, CurvePoint, CurveSeries, auc, pr_curve, roc_curve
from .dca import NetBenefitCurve, dca_curve, net_benefit, treat_all_net_benefit
from .inference import (
    DeLongResult,
    IntervalEstimate,
    bootstrap_ci,
    delong_compare,
    delong_interval,
    delong_variance,
)
from .report import (
    BaselineConfig,
    BootstrapConfig,
    CalibrationConfig,
    RunConfig,
    load_run_config,
    render_tables,
    run_comparison,
)
from .synth import (
    BinormalSpec,
    CalibratedSpec,
    DemoSpec,
    UniformRange,
    generate_binormal,
    generate_calibrated,
    generate_clinical,
    generate_demo,
)
from .thresholds import (
    ConfusionCounts,
    MetricBundle,
    SweepRow,
    best_f1_operating_point,
    confusion_at,
    metrics_from,
    threshold_sweep,
)

__all__ = [
    "__version__",
    "BloodPanel",
    "CaseRecord",
    "Cohort",
    "ColumnSchema",
    "Role",
    "parse_cohort",
    "write_cohort",
    "prevalence",
    "check_disjoint",
    "LogisticFit",
    "MorphologyClass",
    "compute_siri",
    "who_strict_flag",
    "fit_logistic",
    "predict_proba",
    "ConfusionCounts",
    "MetricBundle",
    "SweepRow",
    "confusion_at",
    "metrics_from",
    "threshold_sweep",
    "best_f1_operating_point",
    "CurveKind",
    "CurvePoint",
    "CurveSeries",
    "roc_curve",
    "auc",
    "pr_curve",
    "IntervalEstimate",
    "DeLongResult",
    "bootstrap_ci",
    "delong_variance",
    "delong_interval",
    "delong_compare",
    "ReliabilityBin",
    "reliability_curve",
    "expected_calibration_error",
    "NetBenefitCurve",
    "net_benefit",
    "treat_all_net_benefit",
    "dca_curve",
    "BinormalSpec",
    "CalibratedSpec",
    "DemoSpec",
    "UniformRange",
    "generate_binormal",
    "generate_calibrated",
    "generate_clinical",
    "generate_demo",
    "RunConfig",
    "BootstrapConfig",
    "CalibrationConfig",
    "BaselineConfig",
    "run_comparison",
    "render_tables",
    "load_run_config",
]
