"""Deterministic matplotlib rendering of extracted series.

Style is pinned in code (sizes, fonts, colors, no timestamps in the
image metadata), so rendering the same CSV twice yields byte-identical
files. The figure is built from the parsed series unchanged; the
returned result exposes the values actually handed to the drawing
artists so callers can check the round trip.
"""

from __future__ import annotations

from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg", force=True)

import matplotlib.pyplot as plt  # noqa: E402  backend must be set first

from .spec import PlotSpec, extract_series  # noqa: E402

_COLORS = (
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
)
_LINESTYLES = ("-", "--", "-.", ":")

_RC = {
    "figure.figsize": (7.2, 4.8),
    "figure.dpi": 100,
    "savefig.dpi": 100,
    "font.family": "DejaVu Sans",
    "font.size": 10.0,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "grid.linewidth": 0.6,
    "legend.fontsize": 9.0,
    "lines.linewidth": 1.6,
    "lines.markersize": 5.0,
}


@dataclass(frozen=True)
class RenderedSeries:
    """Point values read back from the artists of one series."""

    label: str
    x: tuple
    line_y: tuple
    marker_y: tuple
    marker_err: tuple


@dataclass(frozen=True)
class RenderResult:
    out_path: str
    series: tuple  # of RenderedSeries


def render(spec: PlotSpec) -> RenderResult:
    """Draw the spec's series to its output file.

    One line per series group; sampled values, when bound, appear as
    markers with error bars in the line's color. Returns the values
    extracted back out of the figure's artists.
    """
    groups = extract_series(spec)
    rendered = []
    with plt.rc_context(_RC):
        fig, ax = plt.subplots()
        try:
            for i, group in enumerate(groups):
                color = _COLORS[i % len(_COLORS)]
                style = _LINESTYLES[(i // len(_COLORS)) % len(_LINESTYLES)]
                line, = ax.plot(
                    group.x, group.line_y, color=color, linestyle=style,
                    label=group.label or None,
                )
                marker_y, marker_err = (), ()
                if group.marker_y:
                    err = group.marker_err if group.marker_err else None
                    container = ax.errorbar(
                        group.x, group.marker_y, yerr=err, color=color,
                        linestyle="none", marker="o", capsize=3.0,
                        label="_nolegend_",
                    )
                    marker_y = tuple(
                        float(v) for v in container[0].get_ydata()
                    )
                    marker_err = tuple(group.marker_err)
                rendered.append(RenderedSeries(
                    label=group.label,
                    x=tuple(float(v) for v in line.get_xdata()),
                    line_y=tuple(float(v) for v in line.get_ydata()),
                    marker_y=marker_y,
                    marker_err=marker_err,
                ))
            if spec.x_label:
                ax.set_xlabel(spec.x_label)
            if spec.y_label:
                ax.set_ylabel(spec.y_label)
            if spec.title:
                ax.set_title(spec.title)
            if any(g.label for g in groups):
                ax.legend(loc="best")
            fig.savefig(
                spec.out_path, format="png",
                metadata={"Software": None},
            )
        finally:
            plt.close(fig)
    return RenderResult(out_path=spec.out_path, series=tuple(rendered))
