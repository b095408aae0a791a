"""Schema rules: spec loading, column checks, cell parsing."""

import json

import pytest

from starcf_figures.spec import PlotSpec, SchemaError, extract_series, read_table

FIG2_HEADER = (
    "schema_version,experiment,seed,config_hash,m_aps,alpha,n_seeds,trials,"
    "avg_se_cf_bits_per_hz,avg_se_mc_bits_per_hz,avg_se_mc_stderr_bits_per_hz"
)


def fig2_csv(tmp_path, rows):
    path = tmp_path / "fig2.csv"
    path.write_text(FIG2_HEADER + "\n" + "\n".join(rows) + ("\n" if rows else ""))
    return str(path)


def fig2_rows():
    rows = []
    for alpha in ("1.0", "6.0"):
        for i, m in enumerate(("5", "10", "20", "30")):
            cf = f"{2.0 + i + (alpha == '6.0')}"
            mc = f"{2.1 + i + (alpha == '6.0')}"
            rows.append(f"1,fig2,0,abc123,{m},{alpha},5,2000,{cf},{mc},0.05")
    return rows


def fig2_spec(tmp_path, **overrides):
    kw = dict(
        x_column="m_aps",
        out_path=str(tmp_path / "fig2.png"),
        line_column="avg_se_cf_bits_per_hz",
        marker_column="avg_se_mc_bits_per_hz",
        error_column="avg_se_mc_stderr_bits_per_hz",
        series_columns=("alpha",),
    )
    kw.update(overrides)
    if "csv_path" not in kw:
        kw["csv_path"] = fig2_csv(tmp_path, fig2_rows())
    return PlotSpec(**kw)


class TestExtraction:
    def test_groups_and_points(self, tmp_path):
        series = extract_series(fig2_spec(tmp_path))
        assert len(series) == 2
        assert [s.label for s in series] == ["alpha=1.0", "alpha=6.0"]
        for s in series:
            assert s.x == [5.0, 10.0, 20.0, 30.0]
            assert len(s.line_y) == 4
            assert len(s.marker_y) == 4
            assert s.marker_err == [0.05] * 4

    def test_row_order_preserved(self, tmp_path):
        # descending x must stay descending: rendering never reorders
        rows = [
            f"1,fig2,0,abc,{m},1.0,5,2000,{y},{y},0.01"
            for m, y in (("30", "3.5"), ("10", "2.5"), ("5", "2.0"))
        ]
        spec = fig2_spec(tmp_path, csv_path=fig2_csv(tmp_path, rows))
        series = extract_series(spec)
        assert series[0].x == [30.0, 10.0, 5.0]
        assert series[0].line_y == [3.5, 2.5, 2.0]

    def test_missing_column_named(self, tmp_path):
        spec = fig2_spec(tmp_path, x_column="n_aps")
        with pytest.raises(SchemaError, match="'n_aps'"):
            extract_series(spec)

    def test_missing_series_column_named(self, tmp_path):
        spec = fig2_spec(tmp_path, series_columns=("alpha", "kappa_rad"))
        with pytest.raises(SchemaError, match="'kappa_rad'"):
            extract_series(spec)

    def test_empty_table_rejected(self, tmp_path):
        spec = fig2_spec(tmp_path, csv_path=fig2_csv(tmp_path, []))
        with pytest.raises(SchemaError, match="no data rows"):
            extract_series(spec)

    def test_non_numeric_cell_names_column_and_row(self, tmp_path):
        rows = fig2_rows()
        rows[2] = rows[2].replace("4.0,", "oops,", 1)
        spec = fig2_spec(tmp_path, csv_path=fig2_csv(tmp_path, rows))
        with pytest.raises(SchemaError,
                           match="'avg_se_cf_bits_per_hz'.*row 3"):
            extract_series(spec)

    def test_empty_cell_rejected(self, tmp_path):
        rows = fig2_rows()
        rows[0] = rows[0].rsplit(",", 1)[0] + ","
        spec = fig2_spec(tmp_path, csv_path=fig2_csv(tmp_path, rows))
        with pytest.raises(SchemaError,
                           match="'avg_se_mc_stderr_bits_per_hz'"):
            extract_series(spec)

    def test_no_header(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("")
        with pytest.raises(SchemaError, match="header"):
            read_table(str(path))


class TestSpecFile:
    def test_round_trip(self, tmp_path):
        data = dict(
            csv_path="d.csv", x_column="m_aps", out_path="d.png",
            line_column="avg_se_cf_bits_per_hz",
            series_columns=["alpha"],
            marker_column="avg_se_mc_bits_per_hz",
            error_column="avg_se_mc_stderr_bits_per_hz",
            x_label="access points", y_label="rate",
        )
        path = tmp_path / "spec.json"
        path.write_text(json.dumps(data))
        spec = PlotSpec.from_json(str(path))
        assert spec.series_columns == ("alpha",)
        assert spec.marker_column == "avg_se_mc_bits_per_hz"
        assert spec.referenced_columns() == [
            "m_aps", "avg_se_cf_bits_per_hz", "alpha",
            "avg_se_mc_bits_per_hz", "avg_se_mc_stderr_bits_per_hz",
        ]

    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "spec.json"
        path.write_text(json.dumps({
            "csv_path": "d.csv", "x_column": "x", "out_path": "d.png",
            "line_column": "y", "colour": "red",
        }))
        with pytest.raises(SchemaError, match="colour"):
            PlotSpec.from_json(str(path))

    def test_missing_required_key(self, tmp_path):
        path = tmp_path / "spec.json"
        path.write_text(json.dumps({"csv_path": "d.csv"}))
        with pytest.raises(SchemaError, match="x_column"):
            PlotSpec.from_json(str(path))

    def test_malformed_json(self, tmp_path):
        path = tmp_path / "spec.json"
        path.write_text("{nope")
        with pytest.raises(SchemaError, match="JSON"):
            PlotSpec.from_json(str(path))
