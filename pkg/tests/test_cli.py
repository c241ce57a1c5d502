import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from excitonqd.cli import FIGURE_PRESETS, main, read_config_file
from excitonqd.collective import ModelParams
from excitonqd.spectra import n3_resonant_energies


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


class TestOutputs:
    def test_pulse(self, capsys):
        code, out, _ = run(["pulse", "--n", "2", "--w", "0.1", "--a", "0.04", "--phi", "0"], capsys)
        assert code == 0
        (row,) = rows(out)
        assert row["frame"] == "laboratory" and row["found"] == "true"
        assert float(row["tau_star"]) == pytest.approx(32.2067, abs=1e-3)
        assert float(row["t_seconds"]) == pytest.approx(7.571e-15, rel=1e-3)

    def test_eig_lists_closed_form_energies(self, capsys):
        code, out, _ = run(["eig", "--n", "3", "--w", "0.1", "--a", "0.04", "--detuning", "0"], capsys)
        assert code == 0
        energies = [float(r["energy"]) for r in rows(out)]
        expected = sorted(n3_resonant_energies(ModelParams(n_dots=3, w=0.1, a_amp=0.04)))
        np.testing.assert_allclose(energies, expected, rtol=1e-10)

    def test_eig_lower_block(self, capsys):
        code, out, _ = run(["eig", "--n", "3", "--j", "0.5"], capsys)
        assert code == 0 and len(rows(out)) == 2

    def test_evolve_csv_schema(self, capsys):
        code, out, _ = run(["evolve", "--n", "3", "--tau-max", "5", "--samples", "6"], capsys)
        assert code == 0
        lines = out.splitlines()
        assert lines[0] == "tau,t_seconds,p_target,p_m_0,p_m_1,p_m_2,p_m_3"
        assert len(lines) == 7
        # 12 significant digits in scientific notation
        assert lines[2].split(",")[0] == "1.00000000000e+00"

    def test_evolve_both_frames(self, capsys):
        _, out, _ = run(["evolve", "--frame", "both", "--tau-max", "5", "--samples", "3"], capsys)
        assert out.splitlines()[0].startswith("tau,t_seconds,p_target_laboratory,p_target_rotating,p_m_0")

    def test_evolve_methods_agree(self, capsys):
        args = ["evolve", "--tau-max", "20", "--samples", "5", "--format", "json"]
        _, eigen, _ = run(args, capsys)
        _, rk4, _ = run(args + ["--method", "rk4"], capsys)
        a = np.array(json.loads(eigen)["rows"])
        b = np.array(json.loads(rk4)["rows"])
        np.testing.assert_allclose(a, b, atol=1e-9)

    def test_json_metadata_echoes_config(self, capsys):
        _, out, _ = run(["evolve", "--w", "0.2", "--tau-max", "3", "--samples", "4", "--format", "json"], capsys)
        doc = json.loads(out)
        assert doc["metadata"]["config"]["w"] == 0.2
        assert doc["columns"][:3] == ["tau", "t_seconds", "p_target"]
        assert len(doc["rows"]) == 4

    def test_scan_grid(self, capsys):
        code, out, _ = run(["scan", "--a-list", "0.04,0.02", "--w-list", "0.1,0.05", "--tau-max", "1e4"], capsys)
        assert code == 0
        table = rows(out)
        assert [(float(r["a"]), float(r["w"])) for r in table] == [(0.04, 0.1), (0.04, 0.05), (0.02, 0.1), (0.02, 0.05)]

    def test_scan_parallel_matches_serial(self, tmp_path, capsys):
        base = ["scan", "--a-list", "0.04,0.02,0.01", "--tau-max", "1e4"]
        main(base + ["--out", str(tmp_path / "serial.csv")])
        main(base + ["--workers", "2", "--out", str(tmp_path / "parallel.csv")])
        capsys.readouterr()
        assert (tmp_path / "serial.csv").read_bytes() == (tmp_path / "parallel.csv").read_bytes()

    def test_oracle_check(self, capsys):
        code, out, _ = run(["oracle-check", "--n", "2"], capsys)
        assert code == 0
        values = {r["quantity"]: float(r["value"]) for r in rows(out)}
        assert values["dynamics_deviation"] < 1e-6

    def test_figure_preset(self, tmp_path, capsys):
        out = tmp_path / "fig1a.json"
        code, _, err = run(["figure", "fig1a", "--format", "json", "--out", str(out)], capsys)
        assert code == 0 and "fig1a laboratory" in err
        doc = json.loads(out.read_text())
        pulse = doc["metadata"]["pulse"]["laboratory"]
        assert pulse["found"] and pulse["peak_prob"] >= 0.99
        assert doc["columns"][2:4] == ["p_target_laboratory", "p_target_rotating"]
        assert len(doc["rows"]) == 20001

    def test_deterministic(self, tmp_path, capsys):
        for name in ("a.csv", "b.csv"):
            main(["figure", "fig3a", "--samples", "501", "--out", str(tmp_path / name)])
        capsys.readouterr()
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


class TestConfig:
    def test_file_and_flag_precedence(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("# Bell run\nn = 2\nw = 0.3\ntau-max = 4\nsamples = 3\nformat = json\n")
        _, out, _ = run(["evolve", "--config", str(cfg), "--w", "0.2"], capsys)
        meta = json.loads(out)["metadata"]["config"]
        assert meta["w"] == 0.2 and meta["tau_max"] == 4.0 and meta["samples"] == 3

    def test_parse(self, tmp_path):
        cfg = tmp_path / "c.cfg"
        cfg.write_text("a = 0.01  # weak drive\n\nframe = rotating\n")
        assert read_config_file(cfg) == {"a": 0.01, "frame": "rotating"}

    @pytest.mark.parametrize("text", ["bogus = 1\n", "n 2\n", "w = abc\n", "frame = sideways\n"])
    def test_bad_config_is_usage_error(self, tmp_path, capsys, text):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text(text)
        code, _, err = run(["evolve", "--config", str(cfg)], capsys)
        assert code == 2 and "error" in err


class TestExitCodes:
    @pytest.mark.parametrize(
        "argv",
        [
            ["figure", "fig9z"],
            ["pulse", "--threshold", "1.2"],
            ["evolve", "--dtau", "0"],
            ["evolve", "--n", "7"],
            ["evolve", "--frame", "sideways"],
            ["nonsense"],
            [],
        ],
    )
    def test_usage(self, argv, capsys):
        assert run(argv, capsys)[0] == 2

    def test_accuracy_failure(self, capsys):
        code, _, err = run(["evolve", "--method", "rk4", "--dtau", "2", "--a", "0.5", "--tau-max", "200"], capsys)
        assert code == 3 and "accuracy" in err

    def test_module_entry_point(self):
        proc = subprocess.run(
            [sys.executable, "-m", "excitonqd", "pulse", "--tau-max", "100"],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0
        assert proc.stdout.startswith("n,w,a,frame,tau_star")
        proc = subprocess.run([sys.executable, "-m", "excitonqd", "figure", "nope"], capture_output=True)
        assert proc.returncode == 2


def test_all_presets_defined():
    assert sorted(FIGURE_PRESETS) == [f"fig1{c}" for c in "abcd"] + [f"fig2{c}" for c in "abc"] + [
        f"fig3{c}" for c in "abcd"
    ]
