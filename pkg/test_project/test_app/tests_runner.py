import json
import math
import os

import pytest

from decolab import __version__, run_scenario
from decolab.cli import main
from decolab.config import load_config, parse_config
from decolab.exceptions import ConfigError
from decolab.runner import SUMMARY_FILE, output_directory, run_file
from test_app.utils import SCENARIOS, CurveFiles, read_csv, scenario_document


def read_summary(out_dir):
    with open(os.path.join(out_dir, SUMMARY_FILE), encoding="utf-8") as fp:
        return json.load(fp)


class TestRunScenario:
    @pytest.mark.parametrize("kind", sorted(SCENARIOS))
    def test_outputs_ok(self, kind, scenario_file, tmp_path):
        out_dir = str(tmp_path / "out")
        summary = run_file(scenario_file(kind), out_dir)

        assert sorted(os.listdir(out_dir)) == sorted(
            [str(CurveFiles.for_kind(kind)), SUMMARY_FILE]
        )
        rows = read_csv(os.path.join(out_dir, str(CurveFiles.for_kind(kind))))
        assert rows[0][0] == "t"
        assert len(rows) == SCENARIOS[kind]["time_grid"]["n_points"] + 1
        assert read_summary(out_dir)["kind"] == summary["kind"] == kind

    def test_modes_summary_ok(self, scenario_file, tmp_path):
        summary = run_file(scenario_file("modes"), str(tmp_path))

        assert summary["gamma_eff"] == pytest.approx(2.0)
        assert summary["t_R"] == pytest.approx(1.0)
        assert summary["t_D"] == pytest.approx(0.5)
        assert (summary["n_slow"], summary["n_fast"]) == (1, 1)

    def test_modes_curve_ok(self, scenario_file, tmp_path):
        run_file(scenario_file("modes"), str(tmp_path))

        rows = read_csv(tmp_path / "curve.csv")
        assert rows[0] == ["t", "F"]
        assert float(rows[1][1]) == 2.0
        t, value = map(float, rows[11])
        assert value == pytest.approx(math.exp(-t) + math.exp(-3 * t))

    def test_friedrichs_summary_ok(self, scenario_file, tmp_path):
        summary = run_file(scenario_file("friedrichs"), str(tmp_path))

        gamma0 = math.pi * 0.01
        assert summary["gamma0"] == pytest.approx(gamma0, rel=1e-3)
        assert summary["fitted_gamma0"] == pytest.approx(gamma0, rel=0.1)
        assert summary["t_R"] == pytest.approx(1 / summary["gamma0"])

    def test_omnes_summary_ok(self, scenario_file, tmp_path):
        summary = run_file(scenario_file("omnes"), str(tmp_path))

        assert summary["gamma_eff"] == pytest.approx(1.0)
        assert summary["t_D"] == pytest.approx(1.0)
        assert summary["t_R"] == pytest.approx(100.0)
        assert summary["fitted_gamma_eff"] == pytest.approx(1.0, rel=0.05)
        assert summary["max_closed_form_error"] < 1e-8

    def test_basis_summary_ok(self, scenario_file, tmp_path):
        summary = run_file(scenario_file("basis"), str(tmp_path))

        assert summary["gamma_eff"] == pytest.approx(0.255, abs=1e-3)
        assert summary["t_D"] == pytest.approx(3.92, rel=1e-2)
        assert summary["basis_distance_at_3t_D"] < 0.05

    def test_khalfin_summary_ok(self, scenario_file, tmp_path):
        summary = run_file(scenario_file("khalfin"), str(tmp_path))

        assert summary["t_R"] == pytest.approx(50.0)
        assert summary["t_D"] == pytest.approx(1.0)
        assert summary["slow_set"] == [0]
        assert 0 < summary["crossover_time"] < summary["t_R"]

    def test_khalfin_no_crossover_ok(self, scenario_file, tmp_path, caplog):
        path = scenario_file("khalfin", params={"horizon": 1.0})
        summary = run_file(path, str(tmp_path))

        assert summary["crossover_time"] is None
        assert "No crossover" in caplog.text
        assert read_summary(str(tmp_path))["crossover_time"] is None

    def test_same_poles_same_times_ok(self, scenario_file, tmp_path):
        poles = {"z0": [1.0, -0.02], "z1": [3.0, -1.0]}
        basis = run_file(scenario_file("basis", params=poles), str(tmp_path / "b"))
        khalfin = run_file(
            scenario_file("khalfin", params=poles), str(tmp_path / "k")
        )

        assert basis["t_R"] == pytest.approx(khalfin["t_R"])
        assert khalfin["decay_times"][0] == pytest.approx(basis["t_R"])
        assert khalfin["t_D"] == pytest.approx(1.0)

    def test_bipart_summary_ok(self, scenario_file, tmp_path):
        summary = run_file(scenario_file("bipart"), str(tmp_path))

        assert summary["commutator_norm"] <= 1e-10
        assert summary["cross_independence"] <= 1e-12
        for index in (1, 2):
            assert summary["fitted_gamma0_part%d" % index] == pytest.approx(
                summary["gamma0_part%d" % index], rel=0.1
            )
        assert summary["window_empty"] is True
        assert summary["window_start"] == summary["t_R1"]

    def test_bipart_open_band_ok(self, scenario_file, tmp_path):
        document = scenario_document("bipart")
        document["params"]["part2"]["form_factor"]["support"] = [6.0]
        closed = run_file(scenario_file("bipart"), str(tmp_path / "closed"))
        open_band = run_file(scenario_file(document=document), str(tmp_path / "open"))

        for key in ("gamma0_part1", "gamma0_part2", "t_R1", "t_R2"):
            assert open_band[key] == pytest.approx(closed[key])

    def test_deterministic_ok(self, scenario_file, tmp_path):
        path = scenario_file("khalfin")
        first, second = tmp_path / "first", tmp_path / "second"
        run_file(path, str(first))
        run_file(path, str(second))

        for name in os.listdir(first):
            assert (first / name).read_bytes() == (second / name).read_bytes()

    def test_rerun_overwrites_ok(self, scenario_file, tmp_path):
        out_dir = str(tmp_path / "out")
        run_file(scenario_file("modes"), out_dir)
        before = read_summary(out_dir)
        run_file(scenario_file("modes"), out_dir)

        assert read_summary(out_dir) == before
        assert not [n for n in os.listdir(tmp_path) if n.startswith(".decolab-")]

    def test_write_failure_error(self, scenario_file, tmp_path, mocker):
        mocker.patch("decolab.runner.write_json", side_effect=OSError("Disk full"))
        out_dir = tmp_path / "out"

        with pytest.raises(OSError):
            run_file(scenario_file("modes"), str(out_dir))
        assert not out_dir.exists()
        assert os.listdir(tmp_path) == ["modes.json"]

    def test_run_scenario_ok(self, tmp_path):
        cfg = parse_config(json.dumps(scenario_document("modes")))

        assert run_scenario(cfg, str(tmp_path))["t_R"] == pytest.approx(1.0)


class TestOutputDirectory:
    def test_out_precedence_ok(self, scenario_file, tmp_path):
        cfg = load_config(scenario_file("modes", output_dir="from-file"))

        assert output_directory(cfg, "from-cli") == "from-cli"
        assert output_directory(cfg) == "from-file"

    def test_output_dir_setting_ok(self, scenario_file, tmp_path, override_settings):
        override_settings(OUTPUT_DIR=str(tmp_path / "default"))

        run_file(scenario_file("modes"))
        assert (tmp_path / "default" / SUMMARY_FILE).exists()

    def test_load_config_error(self, scenario_file):
        with pytest.raises(ConfigError):
            load_config(scenario_file(raw="[1, 2]"))


class TestCli:
    def test_run_ok(self, scenario_file, tmp_path, capsys):
        out_dir = tmp_path / "out"
        exit_code = main(["run", scenario_file("modes"), "--out", str(out_dir)])

        assert exit_code == 0
        assert json.loads(capsys.readouterr().out)["t_D"] == pytest.approx(0.5)
        assert (out_dir / "curve.csv").exists()

    def test_run_quiet_ok(self, scenario_file, tmp_path, capsys):
        argv = ["run", scenario_file("modes"), "--out", str(tmp_path), "--quiet"]

        assert main(argv) == 0
        assert capsys.readouterr().out == ""

    def test_out_over_scenario_dir_ok(self, scenario_file, tmp_path):
        path = scenario_file("modes", output_dir=str(tmp_path / "ignored"))

        assert main(["run", path, "--out", str(tmp_path / "used"), "--quiet"]) == 0
        assert (tmp_path / "used" / SUMMARY_FILE).exists()
        assert not (tmp_path / "ignored").exists()

    def test_malformed_json_error(self, scenario_file, tmp_path, capsys):
        out_dir = tmp_path / "out"
        exit_code = main(["run", scenario_file(raw="{"), "--out", str(out_dir)])

        assert exit_code == 2
        assert not out_dir.exists()
        payload = json.loads(capsys.readouterr().err)
        assert payload["title"] == "Validation error."
        assert "line 1 column 2" in payload["detail"][0]
        assert payload["scenario"].endswith("scenario.json")

    def test_invalid_params_error(self, scenario_file, tmp_path, capsys):
        path = scenario_file("omnes", params={"gamma0": -0.01})

        assert main(["run", path, "--out", str(tmp_path / "out")]) == 2
        payload = json.loads(capsys.readouterr().err)
        assert payload["invalid_params"] == [
            {"name": "params.gamma0", "reason": ["Decay rates must be nonnegative."]}
        ]

    def test_numerical_error(self, scenario_file, tmp_path, capsys):
        modes = [{"a0": 1.0, "gamma": 1.0}, {"a0": -1.0, "gamma": 2.0}]
        path = scenario_file("modes", params={"modes": modes})

        assert main(["run", path, "--out", str(tmp_path / "out")]) == 3
        assert not (tmp_path / "out").exists()
        title = json.loads(capsys.readouterr().err)["title"]
        assert title == "Effective rate is undefined for zero total amplitude."

    def test_write_failure_error(self, scenario_file, tmp_path, mocker, capsys):
        mocker.patch("decolab.runner.write_csv", side_effect=OSError("Disk full"))

        exit_code = main(["run", scenario_file("modes"), "--out", str(tmp_path / "o")])
        assert exit_code == 4
        assert not (tmp_path / "o").exists()
        assert json.loads(capsys.readouterr().err)["detail"] == ["Disk full"]

    def test_missing_file_error(self, tmp_path):
        assert main(["run", str(tmp_path / "missing.json")]) == 4

    def test_validate_ok(self, scenario_file, capsys):
        path = scenario_file("bipart")

        assert main(["validate", path]) == 0
        assert capsys.readouterr().out.strip() == "%s: OK" % path

    def test_validate_error(self, scenario_file, capsys):
        document = scenario_document("bipart")
        document["params"]["part2"]["form_factor"]["support"] = [3.0, 24.0]

        assert main(["validate", scenario_file(document=document)]) == 2
        payload = json.loads(capsys.readouterr().out)
        assert [d["name"] for d in payload["invalid_params"]] == [
            "params.non_field_errors"
        ]

    def test_version_ok(self, capsys):
        assert main(["version"]) == 0
        assert capsys.readouterr().out.strip() == "decolab %s" % __version__

    def test_unknown_command_error(self):
        with pytest.raises(SystemExit) as e:
            main(["simulate"])
        assert e.value.code == 2
