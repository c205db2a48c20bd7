"""CLI contract tests: exit codes, artifacts, reproducibility."""

import json
from pathlib import Path

import pytest

from trackstation.calibration import data_dir
from trackstation.cli import main

SCENARIOS = data_dir() / "scenarios"


def run_cli(*argv: str) -> int:
    return main(list(argv))


class TestBenchCommand:
    def test_throughput_all_paper_configs(self, tmp_path, capsys):
        code = run_cli(
            "bench", "throughput", "--all-paper-configs", "--output-dir", str(tmp_path)
        )
        assert code == 0
        table = (tmp_path / "tables.txt").read_text()
        assert table.count("ID ") == 8
        assert (tmp_path / "manifest.json").exists()
        out = capsys.readouterr().out
        assert "Throughput" in out

    def test_latency_all_paper_configs(self, tmp_path):
        code = run_cli(
            "bench", "latency", "--all-paper-configs", "--output-dir", str(tmp_path)
        )
        assert code == 0
        assert "Latency" in (tmp_path / "tables.txt").read_text()

    def test_range_single_mode_summary(self, tmp_path):
        code = run_cli(
            "bench", "range", "--mode", "FU4", "--output-dir", str(tmp_path)
        )
        assert code == 0
        table = (tmp_path / "tables.txt").read_text()
        assert "range FU4 @ 1200" in table
        row = next(l for l in table.splitlines() if l.startswith("range FU4"))
        furthest = float(row.split()[4])
        assert abs(furthest - 60.84) / 60.84 < 0.10
        logs = list((tmp_path / "logs").glob("*.nmea"))
        assert len(logs) == 2
        geo = list((tmp_path / "geojson").glob("*.geojson"))
        assert len(geo) == 1

    def test_range_with_custom_scenario_file(self, tmp_path):
        scenario = tmp_path / "walk.yaml"
        scenario.write_text(
            "mode: FU3\nbaud: 9600\nmax_distance_m: 20.0\nstep_m: 1.0\n"
            "scenario_id: custom-walk\n"
        )
        code = run_cli(
            "bench", "range", "--config", str(scenario), "--output-dir", str(tmp_path / "o")
        )
        assert code == 0
        assert "custom-walk" in (tmp_path / "o" / "tables.txt").read_text()

    def test_missing_config_file_is_exit_2(self, tmp_path):
        code = run_cli(
            "bench",
            "throughput",
            "--config",
            str(tmp_path / "nope.yaml"),
            "--output-dir",
            str(tmp_path),
        )
        assert code == 2

    def test_unmatched_row_filter_is_exit_2(self, tmp_path):
        code = run_cli(
            "bench", "range", "--mode", "FU2", "--baud", "115200",
            "--output-dir", str(tmp_path),
        )
        assert code == 2

    def test_reproducible_outputs(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        for out in (a, b):
            assert (
                run_cli(
                    "bench", "range", "--all-paper-configs",
                    "--seed", "7", "--output-dir", str(out),
                )
                == 0
            )
        assert (a / "tables.txt").read_bytes() == (b / "tables.txt").read_bytes()
        for geo_a in sorted((a / "geojson").glob("*.geojson")):
            geo_b = b / "geojson" / geo_a.name
            assert geo_a.read_bytes() == geo_b.read_bytes()

    def test_writes_only_inside_output_dir(self, tmp_path, monkeypatch):
        workdir = tmp_path / "cwd"
        workdir.mkdir()
        monkeypatch.chdir(workdir)
        out = tmp_path / "out"
        assert run_cli("bench", "latency", "--mode", "FU3", "--baud", "9600",
                       "--output-dir", str(out)) == 0
        assert list(workdir.iterdir()) == []


class TestDataDirOverride:
    def test_env_var_redirects_calibration(self, tmp_path, monkeypatch):
        import shutil

        from trackstation.calibration import load_calibration

        alt = tmp_path / "data"
        shutil.copytree(data_dir(), alt)
        text = (alt / "calibration.yaml").read_text()
        (alt / "calibration.yaml").write_text(
            text.replace("version: 1", "version: 99")
        )
        monkeypatch.setenv("TRACKSTATION_DATA", str(alt))
        assert load_calibration().version == 99


class TestTrackCommand:
    def test_stationary_headless_converges(self, tmp_path):
        code = run_cli(
            "track",
            "--scenario", str(SCENARIOS / "stationary_track.yaml"),
            "--output-dir", str(tmp_path),
        )
        assert code == 0
        trace = (tmp_path / "pointing_trace.csv").read_text().strip().splitlines()
        final_error = float(trace[-1].split(",")[1])
        assert final_error < 1.0
        assert (tmp_path / "fixes.geojson").exists()
        assert (tmp_path / "sessions" / "stationary-track.jsonl").exists()

    def test_missing_scenario_is_exit_2(self, tmp_path):
        code = run_cli(
            "track", "--scenario", str(tmp_path / "none.yaml"),
            "--output-dir", str(tmp_path),
        )
        assert code == 2


class TestReplayCommand:
    @pytest.fixture()
    def journal(self, tmp_path) -> Path:
        out = tmp_path / "run"
        assert (
            run_cli(
                "track",
                "--scenario", str(SCENARIOS / "stationary_track.yaml"),
                "--output-dir", str(out),
            )
            == 0
        )
        return out / "sessions" / "stationary-track.jsonl"

    def test_replay_matches_run_summary(self, journal, capsys):
        run_summary = (journal.parent.parent / "summary.txt").read_text()
        capsys.readouterr()
        assert run_cli("replay", str(journal)) == 0
        assert capsys.readouterr().out == run_summary

    def test_truncated_tail_warns_but_succeeds(self, journal, capsys):
        with open(journal, "a", encoding="utf-8") as fh:
            fh.write('{"type":"stats","time":"2024-0')
        assert run_cli("replay", str(journal)) == 0
        assert "truncated" in capsys.readouterr().err

    def test_empty_journal_is_fresh_state(self, tmp_path, capsys):
        path = tmp_path / "empty.jsonl"
        path.write_text("")
        assert run_cli("replay", str(path)) == 0
        out = capsys.readouterr().out
        assert "sent/ok/lost:   0/0/0" in out

    def test_corrupt_journal_is_exit_1(self, journal):
        lines = journal.read_text().splitlines()
        lines[1] = "garbage"
        journal.write_text("\n".join(lines) + "\n")
        assert run_cli("replay", str(journal)) == 1
