"""CLI forms, exit codes, and the optional end-to-end pipe."""

import json
import shutil
import subprocess

import pytest

from starcf_figures.cli import main

FIG2_HEADER = (
    "schema_version,experiment,seed,config_hash,m_aps,alpha,n_seeds,trials,"
    "avg_se_cf_bits_per_hz,avg_se_mc_bits_per_hz,avg_se_mc_stderr_bits_per_hz"
)


def write_fig2(tmp_path):
    rows = [
        f"1,fig2,0,abc,{m},1.0,5,2000,{y},{y},0.01"
        for m, y in (("5", "2.0"), ("10", "2.5"), ("20", "3.1"))
    ]
    path = tmp_path / "fig2.csv"
    path.write_text(FIG2_HEADER + "\n" + "\n".join(rows) + "\n")
    return path


class TestForms:
    def test_preset_form_default_out(self, tmp_path, capsys):
        csv_path = write_fig2(tmp_path)
        assert main([str(csv_path), "fig2"]) == 0
        out = tmp_path / "fig2.png"
        assert out.exists()
        assert capsys.readouterr().out.strip() == str(out)

    def test_preset_form_explicit_out(self, tmp_path):
        csv_path = write_fig2(tmp_path)
        out = tmp_path / "custom.png"
        assert main([str(csv_path), "fig2", "--out", str(out)]) == 0
        assert out.exists()

    def test_spec_form(self, tmp_path):
        csv_path = write_fig2(tmp_path)
        out = tmp_path / "via_spec.png"
        spec_path = tmp_path / "spec.json"
        spec_path.write_text(json.dumps(dict(
            csv_path=str(csv_path), x_column="m_aps", out_path=str(out),
            line_column="avg_se_cf_bits_per_hz", series_columns=["alpha"],
            x_label="access points", y_label="rate",
        )))
        assert main(["--spec", str(spec_path)]) == 0
        assert out.exists()


class TestErrors:
    def test_unknown_preset(self, tmp_path):
        assert main([str(write_fig2(tmp_path)), "fig9"]) == 1

    def test_missing_csv_file(self, tmp_path):
        assert main([str(tmp_path / "nope.csv"), "fig2"]) == 1

    def test_csv_without_preset(self, tmp_path):
        assert main([str(write_fig2(tmp_path))]) == 1

    def test_spec_and_positional_conflict(self, tmp_path):
        csv_path = write_fig2(tmp_path)
        spec_path = tmp_path / "s.json"
        spec_path.write_text("{}")
        assert main(["--spec", str(spec_path), str(csv_path), "fig2"]) == 1

    def test_schema_error_exit(self, tmp_path):
        # fig3 preset over a fig2 CSV: column mismatch
        assert main([str(write_fig2(tmp_path)), "fig3"]) == 1


@pytest.mark.skipif(shutil.which("starcf") is None,
                    reason="producer CLI not installed")
class TestEndToEnd:
    def test_render_real_sweep(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps(dict(
            m_aps=2, n_antennas=2, k_users=2, k_reflection=1,
            k_transmission=1, l_elements=4, l_horizontal=2, l_vertical=2,
            pilot_length=2, block_length=20, seed=3,
            experiments={"fig3": {
                "l_list": [4], "alphas": [1.0], "kappas": [0.3927],
            }},
        )))
        csv_path = tmp_path / "fig3.csv"
        proc = subprocess.run(
            ["starcf", "fig3", "--config", str(cfg), "--out", str(csv_path),
             "--seeds-per-point", "1"],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0, proc.stderr
        assert main([str(csv_path), "fig3"]) == 0
        assert (tmp_path / "fig3.png").exists()
