"""Plot specification and CSV-to-series extraction.

This module is the data path of the renderer: it validates a PlotSpec
against a CSV header, groups rows into series, and parses the numeric
columns. Nothing here touches matplotlib, so the schema rules can be
tested without a drawing backend. Plots are pure views: rows are never
recomputed, filtered, or reordered, and every parsed value comes
straight from a CSV cell.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field, fields


class SchemaError(ValueError):
    """The CSV or the plot spec does not match the expected schema."""


@dataclass(frozen=True)
class PlotSpec:
    """Binding between a sweep CSV and one rendered line plot.

    series_columns group rows into lines; line_column is the y value of
    each line. marker_column, when set, adds sampled points as markers
    on top of the line, with error_column as their error-bar half
    widths.
    """

    csv_path: str
    x_column: str
    out_path: str
    line_column: str
    series_columns: tuple = ()
    marker_column: str | None = None
    error_column: str | None = None
    x_label: str = ""
    y_label: str = ""
    title: str = ""

    def referenced_columns(self) -> list:
        cols = [self.x_column, self.line_column, *self.series_columns]
        if self.marker_column:
            cols.append(self.marker_column)
        if self.error_column:
            cols.append(self.error_column)
        return cols

    @classmethod
    def from_json(cls, path) -> "PlotSpec":
        try:
            with open(path, "r", encoding="utf-8") as fh:
                data = json.load(fh)
        except OSError as exc:
            raise SchemaError(f"cannot read spec file: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise SchemaError(f"spec file is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise SchemaError("spec file must contain a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise SchemaError(f"unknown spec keys: {', '.join(unknown)}")
        for name in ("csv_path", "x_column", "out_path", "line_column"):
            if name not in data:
                raise SchemaError(f"spec is missing required key '{name}'")
        if "series_columns" in data:
            raw = data["series_columns"]
            if not isinstance(raw, list):
                raise SchemaError("series_columns must be a list")
            data["series_columns"] = tuple(str(c) for c in raw)
        return cls(**data)


@dataclass
class Series:
    """One plotted line: raw group key plus parsed point values."""

    key: tuple  # raw (column, value) pairs identifying the group
    label: str
    x: list = field(default_factory=list)
    line_y: list = field(default_factory=list)
    marker_y: list = field(default_factory=list)
    marker_err: list = field(default_factory=list)


def read_table(path):
    """CSV as (header, rows of dicts); empty tables are schema errors."""
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            header = reader.fieldnames
            rows = list(reader)
    except OSError as exc:
        raise SchemaError(f"cannot read CSV: {exc}") from exc
    if not header:
        raise SchemaError("CSV has no header row")
    if not rows:
        raise SchemaError("CSV has no data rows")
    return list(header), rows


def _parse_cell(row: dict, column: str, index: int) -> float:
    cell = row[column]
    try:
        return float(cell)
    except (TypeError, ValueError):
        raise SchemaError(
            f"column '{column}' has a non-numeric value {cell!r} "
            f"in data row {index + 1}"
        ) from None


def extract_series(spec: PlotSpec) -> list:
    """Group the CSV into plottable series, preserving row order.

    Raises SchemaError naming the first missing column, and for cells
    that do not parse as numbers in any referenced numeric column.
    """
    header, rows = read_table(spec.csv_path)
    for column in spec.referenced_columns():
        if column not in header:
            raise SchemaError(f"CSV is missing column '{column}'")
    series: dict = {}
    for index, row in enumerate(rows):
        key = tuple((c, row[c]) for c in spec.series_columns)
        group = series.get(key)
        if group is None:
            label = ", ".join(f"{c}={v}" for c, v in key)
            group = series[key] = Series(key=key, label=label)
        group.x.append(_parse_cell(row, spec.x_column, index))
        group.line_y.append(_parse_cell(row, spec.line_column, index))
        if spec.marker_column:
            group.marker_y.append(
                _parse_cell(row, spec.marker_column, index)
            )
        if spec.error_column:
            group.marker_err.append(
                _parse_cell(row, spec.error_column, index)
            )
    return list(series.values())
