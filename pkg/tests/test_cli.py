"""End-to-end command-line behavior and exit codes."""

import json

import pytest

from palmland.cli import EXIT_ERROR, EXIT_OK, EXIT_VIOLATIONS, main
from palmland.metrics import trace_header

USER_TRACE = (
    "t,chest_x,chest_y,chest_z,chest_qw,chest_qx,chest_qy,chest_qz,"
    "palm_x,palm_y,palm_z,palm_qw,palm_qx,palm_qy,palm_qz\n"
    "0.0,0.0,0.0,1.25,1.0,0.0,0.0,0.0,0.6,0.0,1.1,1.0,0.0,0.0,0.0\n"
    "8.0,0.0,0.0,1.25,1.0,0.0,0.0,0.0,0.6,0.0,1.1,1.0,0.0,0.0,0.0\n"
)


def run_cli(argv):
    return main(argv)


class TestScenarios:
    def test_list(self, capsys):
        assert run_cli(["scenarios", "list"]) == EXIT_OK
        names = capsys.readouterr().out.split()
        assert names == ["approach_static", "switching", "walking_user"]


class TestRun:
    def test_ideal_run_lands_and_writes_trace(self, tmp_path, capsys):
        out = tmp_path / "trace.csv"
        code = run_cli(["run", "approach_static", "--mode", "ideal",
                        "--out", str(out)])
        assert code == EXIT_OK
        report = json.loads(capsys.readouterr().out)
        assert report["landed"] is True
        assert report["rmse_m"] == 0.0
        lines = out.read_text().splitlines()
        assert lines[0] == trace_header()
        assert len(lines) == report["rows"] + 1

    def test_byte_identical_reruns(self, tmp_path, capsys):
        a = tmp_path / "a.csv"
        b = tmp_path / "b.csv"
        for path in (a, b):
            assert run_cli(["run", "switching", "--mode", "ideal",
                            "--out", str(path)]) == EXIT_OK
        capsys.readouterr()
        assert a.read_bytes() == b.read_bytes()

    def test_duration_override(self, tmp_path, capsys):
        code = run_cli(["run", "approach_static", "--mode", "ideal",
                        "--duration-override", "0.5"])
        assert code == EXIT_OK
        report = json.loads(capsys.readouterr().out)
        assert report["landed"] is False
        assert report["rows"] == 50

    def test_unknown_scenario(self, capsys):
        assert run_cli(["run", "missing_scenario"]) == EXIT_ERROR
        assert "error:" in capsys.readouterr().err

    def test_scenario_from_file(self, tmp_path, capsys):
        scn = {
            "duration_s": 1.0,
            "user": {"chest_xy": [0.0, 0.0]},
            "drone_start_xy": [2.0, 0.0],
            "events": [],
        }
        p = tmp_path / "mine.json"
        p.write_text(json.dumps(scn))
        assert run_cli(["run", str(p), "--mode", "ideal"]) == EXIT_OK
        capsys.readouterr()

    def test_bad_config_names_field(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"planner": {"warp_factor": 9}}))
        code = run_cli(["run", "approach_static", "--config", str(cfg)])
        assert code == EXIT_ERROR
        assert "warp_factor" in capsys.readouterr().err

    def test_out_of_range_config_rejected(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"planner": {"weber_gain": 0.5}}))
        code = run_cli(["run", "approach_static", "--config", str(cfg)])
        assert code == EXIT_ERROR
        assert "weber_gain" in capsys.readouterr().err

    def test_bad_mode_rejected_by_argparse(self, capsys):
        with pytest.raises(SystemExit):
            run_cli(["run", "approach_static", "--mode", "warp"])
        capsys.readouterr()


class TestAudit:
    def make_run(self, tmp_path, capsys):
        out = tmp_path / "trace.csv"
        run_cli(["run", "approach_static", "--mode", "ideal",
                 "--out", str(out)])
        capsys.readouterr()
        return out

    def test_clean_trace_passes(self, tmp_path, capsys):
        out = self.make_run(tmp_path, capsys)
        assert run_cli(["audit", str(out)]) == EXIT_OK
        report = json.loads(capsys.readouterr().out)
        assert report["disk_violations"] == 0

    def test_violating_trace_fails(self, tmp_path, capsys):
        out = self.make_run(tmp_path, capsys)
        lines = out.read_text().splitlines()
        idx = next(i for i, ln in enumerate(lines) if ",FLIGHT," in ln)
        parts = lines[idx].split(",")
        parts[18] = "2.5"  # doctor the commanded speed over the cap
        lines[idx] = ",".join(parts)
        doctored = tmp_path / "doctored.csv"
        doctored.write_text("\n".join(lines) + "\n")
        assert run_cli(["audit", str(doctored)]) == EXIT_VIOLATIONS
        report = json.loads(capsys.readouterr().out)
        assert report["speed_violations"] == 1

    def test_malformed_trace(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("nope\n")
        assert run_cli(["audit", str(bad)]) == EXIT_ERROR
        assert "bad header" in capsys.readouterr().err

    def test_missing_file(self, capsys):
        assert run_cli(["audit", "/does/not/exist.csv"]) == EXIT_ERROR
        assert "error:" in capsys.readouterr().err


class TestReplay:
    def test_replay_user_trace(self, tmp_path, capsys):
        trace = tmp_path / "user.csv"
        trace.write_text(USER_TRACE)
        out = tmp_path / "run.csv"
        code = run_cli(["replay", str(trace), "--mode", "ideal",
                        "--out", str(out)])
        assert code == EXIT_OK
        report = json.loads(capsys.readouterr().out)
        assert report["landed"] is True
        assert out.exists()

    def test_replay_missing_file(self, capsys):
        assert run_cli(["replay", "/does/not/exist.csv"]) == EXIT_ERROR
        assert "error:" in capsys.readouterr().err

    def test_replay_duration_override(self, tmp_path, capsys):
        trace = tmp_path / "user.csv"
        trace.write_text(USER_TRACE)
        code = run_cli(["replay", str(trace), "--mode", "ideal",
                        "--duration-override", "0.3"])
        assert code == EXIT_OK
        report = json.loads(capsys.readouterr().out)
        assert report["rows"] == 30


class TestServeArgs:
    def test_bad_bind(self, capsys):
        assert run_cli(["serve", "--bind", "nonsense"]) == EXIT_ERROR
        assert "--bind" in capsys.readouterr().err

    def test_bad_time_scale(self, capsys):
        assert run_cli(["serve", "--time-scale", "0"]) == EXIT_ERROR
        assert "--time-scale" in capsys.readouterr().err
