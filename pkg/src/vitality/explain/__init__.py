"""Attribution, surrogate explanation, and report generation."""

from .oracle import conditional_expectation, ensemble_expectation, shapley_brute
from .report import (
    BUNDLE_VERSION,
    build_bundle,
    default_notices,
    generate_report,
    load_bundle,
    validate_bundle,
    write_bundle,
    write_report,
)
from .surrogate import (
    ClusterExplanation,
    CviExplanation,
    SectorExplanation,
    explain_clusters,
    explain_cvi,
    spearman,
)
from .treeshap import LOCAL_ACCURACY_TOL, ShapMatrix, tree_shap, violin_payload

__all__ = [
    "BUNDLE_VERSION",
    "LOCAL_ACCURACY_TOL",
    "ClusterExplanation",
    "CviExplanation",
    "SectorExplanation",
    "ShapMatrix",
    "build_bundle",
    "conditional_expectation",
    "default_notices",
    "ensemble_expectation",
    "explain_clusters",
    "explain_cvi",
    "generate_report",
    "load_bundle",
    "shapley_brute",
    "spearman",
    "tree_shap",
    "validate_bundle",
    "violin_payload",
    "write_bundle",
    "write_report",
]
