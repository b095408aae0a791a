"""Column bindings for the known sweep CSV layouts.

Each preset maps one subcommand's CSV schema to a PlotSpec: which
column is x, which columns split the rows into lines, and where the
sampled values and their error bars live when the sweep has them.
"""

from __future__ import annotations

import os

from .spec import PlotSpec, SchemaError

_SE_SUM = "sum spectral efficiency (bit/s/Hz)"
_SE_AVG = "average spectral efficiency (bit/s/Hz)"

_PRESETS = {
    "fig1": dict(
        x_column="instant",
        line_column="sum_se_bits_per_hz",
        series_columns=(
            "model", "kappa_rad", "alpha", "velocity_kmh", "pilot_length",
        ),
        x_label="time instant",
        y_label=_SE_SUM,
    ),
    "fig2": dict(
        x_column="m_aps",
        line_column="avg_se_cf_bits_per_hz",
        marker_column="avg_se_mc_bits_per_hz",
        error_column="avg_se_mc_stderr_bits_per_hz",
        series_columns=("alpha",),
        x_label="access points",
        y_label=_SE_AVG,
    ),
    "fig3": dict(
        x_column="l_elements",
        line_column="sum_se_bits_per_hz",
        series_columns=("surface", "alpha", "kappa_rad"),
        x_label="surface elements",
        y_label=_SE_SUM,
    ),
    "table1": dict(
        x_column="velocity_kmh",
        line_column="first_zero_instant",
        series_columns=(),
        x_label="speed (km/h)",
        y_label="first zero of the aging correlation (instants)",
    ),
}

PRESET_NAMES = tuple(sorted(_PRESETS))


def preset_spec(name: str, csv_path: str, out_path=None) -> PlotSpec:
    """PlotSpec for a known CSV layout; out defaults beside the CSV."""
    if name not in _PRESETS:
        raise SchemaError(
            f"unknown preset '{name}' (choose from {', '.join(PRESET_NAMES)})"
        )
    if out_path is None:
        out_path = os.path.splitext(csv_path)[0] + ".png"
    return PlotSpec(csv_path=csv_path, out_path=out_path, **_PRESETS[name])
