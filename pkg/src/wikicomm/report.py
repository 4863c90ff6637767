"""Regression report rendering: aligned coefficient tables and JSON bundles."""

from __future__ import annotations

from typing import Mapping, Optional, Sequence

from .stats import INTERCEPT, FTestResult, OlsFit

__all__ = [
    "significance_stars",
    "render_coefficient_table",
    "fit_to_dict",
    "f_test_to_dict",
    "REFERENCE_SNAPSHOT_ANCHORS",
]

# Full-scale reference statistics for a February 2021 English-Wikipedia
# snapshot (1625 reconstructed networks filtered to 997). Desk-scale runs
# cannot reproduce them; they are kept only to sanity-check full crawls.
REFERENCE_SNAPSHOT_ANCHORS: dict[str, object] = {
    "networks_before_filtering": 1625,
    "networks_after_filtering": 997,
    "fa_ga_pearson_r": 0.92,
    "variables": {
        "quality": {"mean": 1.172, "sd": 1.684, "median": 0.652},
        "fraction": {"mean": 0.512, "sd": 0.173, "median": 0.503},
        "determinism": {"mean": 0.761, "sd": 0.093, "median": 0.782},
        "degeneracy": {"mean": 0.265, "sd": 0.139, "median": 0.238},
        "strength": {"mean": 30.094, "sd": 39.185, "median": 17.143},
        "members": {"mean": 136.39, "sd": 249.98, "median": 61.0},
    },
    "model_1": {"r_squared": 0.231, "f": 59.66, "df": [5, 991]},
    "model_2": {"r_squared": 0.231, "f": 74.6, "df": [4, 992]},
    "model_3": {"r_squared": 0.23, "f": 98.65, "df": [3, 993]},
}


def significance_stars(p_value: float) -> str:
    """``***`` for p <= .001, ``*`` for p <= .05, empty otherwise."""
    if p_value != p_value:  # NaN
        return ""
    if p_value <= 0.001:
        return "***"
    if p_value <= 0.05:
        return "*"
    return ""


def _cell(fit: OlsFit, name: str) -> str:
    if name != INTERCEPT and name not in fit.predictors:
        return ""
    b = fit.coefficients[name]
    se = fit.standard_errors[name]
    stars = significance_stars(fit.p_values[name])
    return f"{b:.3f}{stars} ({se:.3f})"


def render_coefficient_table(
    fits: Sequence[OlsFit],
    model_names: Sequence[str],
    labels: Optional[Mapping[str, str]] = None,
) -> str:
    """Render fitted models side by side: coefficient (SE) with stars, R², N, F.

    Predictor rows follow their first appearance across the fits; the
    intercept row comes last before the summary block.
    """
    if len(fits) != len(model_names):
        raise ValueError("one name per fitted model is required")
    labels = dict(labels or {})
    rows: list[str] = []
    for fit in fits:
        for name in fit.predictors:
            if name not in rows:
                rows.append(name)

    header = ["Predictor"] + list(model_names)
    table: list[list[str]] = [header]
    for name in rows:
        table.append([labels.get(name, name)] + [_cell(fit, name) for fit in fits])
    table.append([labels.get(INTERCEPT, "Constant")] + [_cell(fit, INTERCEPT) for fit in fits])
    table.append(["R^2"] + [f"{fit.r_squared:.3f}" for fit in fits])
    table.append(["N"] + [str(fit.n) for fit in fits])
    table.append(
        ["F (df1, df2)"]
        + [
            f"{fit.f_statistic:.2f} ({fit.f_df[0]}, {fit.f_df[1]}){significance_stars(fit.f_p_value)}"
            for fit in fits
        ]
    )

    widths = [max(len(row[i]) for row in table) for i in range(len(header))]
    lines = []
    for idx, row in enumerate(table):
        cells = [row[0].ljust(widths[0])] + [
            row[i].rjust(widths[i]) for i in range(1, len(row))
        ]
        lines.append("  ".join(cells).rstrip())
        if idx == 0:
            lines.append("-" * (sum(widths) + 2 * (len(widths) - 1)))
    lines.append("-" * (sum(widths) + 2 * (len(widths) - 1)))
    lines.append("Note: coefficients with standard errors in parentheses; *** p<=.001, * p<=.05")
    return "\n".join(lines) + "\n"


def fit_to_dict(fit: OlsFit) -> dict:
    """JSON-ready summary of a fit."""
    names = [INTERCEPT, *fit.predictors]
    return {
        "response": fit.response,
        "predictors": list(fit.predictors),
        "coefficients": {n: fit.coefficients[n] for n in names},
        "standard_errors": {n: fit.standard_errors[n] for n in names},
        "p_values": {n: fit.p_values[n] for n in names},
        "r_squared": fit.r_squared,
        "f_statistic": fit.f_statistic,
        "f_df": list(fit.f_df),
        "f_p_value": fit.f_p_value,
        "rss": fit.rss,
        "n": fit.n,
    }


def f_test_to_dict(result: FTestResult) -> dict:
    return {
        "f_value": result.f_value,
        "df1": result.df1,
        "df2": result.df2,
        "p_value": result.p_value,
    }
