"""End-to-end tests for the rm-sieve command line."""

import json
import math

import pandas as pd
import pytest

from rmsieve.algebra.galois import field_spec
from rmsieve.cli import EXIT_CHECK_FAILED, EXIT_OK, EXIT_USAGE, main
from rmsieve.reports.audit import RunJournal
from rmsieve.reports.store import write_measurement
from rmsieve.sensing.frame import FrameSpec, column


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    return tmp_path


@pytest.fixture
def tone_file(workdir):
    fs = FrameSpec(field_spec(3), 1)
    return write_measurement(2.0 * column(fs, 5), workdir / "tone.txt")


def _config(workdir, text, name="run.cfg"):
    path = workdir / name
    path.write_text(text)
    return str(path)


class TestConstruct:
    def test_writes_dump(self, workdir):
        assert main(["construct", "--m", "3", "--r", "1"]) == EXIT_OK
        lines = (workdir / "out" / "dg_m3_r1.txt").read_text().splitlines()
        assert len(lines) == 65

    def test_dense_export(self, workdir):
        assert main(["construct", "--m", "3", "--r", "0", "--dense", "--out", "mats"]) == EXIT_OK
        header = (workdir / "mats" / "phi_m3_r0.txt").read_text().splitlines()[0]
        assert header == "8 8"

    def test_even_m_is_usage_error(self, workdir):
        assert main(["construct", "--m", "4", "--r", "0"]) == EXIT_USAGE

    def test_level_out_of_range(self, workdir):
        assert main(["construct", "--m", "3", "--r", "2"]) == EXIT_USAGE


class TestVerify:
    def test_passes_and_writes_report(self, workdir, capsys):
        assert main(["verify", "--m", "3", "--r", "1", "--out", "reports"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "[PASS] gauss_sum" in out
        assert "Summary: 5/5 checks passed" in out
        report = json.loads((workdir / "reports" / "verify_m3_r1.json").read_text())
        assert report["passed"] is True

    def test_failure_exit_code(self, workdir, monkeypatch):
        import rmsieve.cli as cli_mod
        from rmsieve.engine.workflow import CheckStep, Router, StepOutput, StepResult

        class Broken(CheckStep):
            def execute(self, ctx):
                return StepOutput(StepResult.FAIL, "broken")

        def router():
            r = Router()
            r.register("verify", [Broken()])
            return r

        monkeypatch.setattr(cli_mod, "default_router", router)
        assert main(["verify", "--m", "3", "--r", "0"]) == EXIT_CHECK_FAILED


class TestDetect:
    def test_present(self, tone_file, capsys):
        code = main([
            "detect", "--m", "3", "--r", "1", "--measurement", str(tone_file),
            "--delta", "5", "--alpha-min", "2",
        ])
        assert code == EXIT_OK
        report = json.loads(capsys.readouterr().out)
        assert report["magnitude"] == pytest.approx(4 / math.sqrt(8))
        assert report["threshold"] == pytest.approx(4 / (2 * math.sqrt(8)))
        assert report["present"] is True

    def test_absent_with_explicit_threshold(self, tone_file, capsys):
        code = main([
            "detect", "--m", "3", "--r", "1", "--measurement", str(tone_file),
            "--delta", "6", "--threshold", "1.0",
        ])
        assert code == EXIT_OK
        assert json.loads(capsys.readouterr().out)["present"] is False

    def test_without_threshold(self, tone_file, capsys):
        main(["detect", "--m", "3", "--r", "1", "--measurement", str(tone_file), "--delta", "5"])
        report = json.loads(capsys.readouterr().out)
        assert "present" not in report
        assert report["residual_bound"] > 0

    def test_wrong_length_file(self, workdir):
        path = write_measurement([1.0, 2.0], workdir / "short.txt")
        code = main(["detect", "--m", "3", "--r", "1", "--measurement", str(path), "--delta", "0"])
        assert code == EXIT_USAGE

    def test_masked_label_out_of_range(self, tone_file):
        code = main([
            "detect", "--m", "3", "--r", "1", "--measurement", str(tone_file), "--delta", "64",
        ])
        assert code == EXIT_USAGE


class TestRecover:
    def test_measurement_mode(self, workdir, tone_file):
        code = main([
            "recover", "--measurement", str(tone_file), "--m", "3", "--r", "1", "--k", "1",
            "--out", "rec",
        ])
        assert code == EXIT_OK
        report = json.loads((workdir / "rec" / "reconstruction.json").read_text())
        assert report["support"] == [5]
        assert report["values"][0][0] == pytest.approx(2.0)
        assert "timings" not in report
        evidence = pd.read_csv(workdir / "rec" / "evidence.csv")
        assert len(evidence) == 64

    def test_timings_flag(self, workdir, tone_file):
        main([
            "recover", "--measurement", str(tone_file), "--m", "3", "--r", "1", "--timings",
        ])
        report = json.loads((workdir / "out" / "reconstruction.json").read_text())
        assert set(report["timings"]) == {"evidence_s", "regress_s"}

    def test_measurement_mode_needs_frame(self, tone_file):
        with pytest.raises(SystemExit) as exc:
            main(["recover", "--measurement", str(tone_file)])
        assert exc.value.code == EXIT_USAGE

    def test_sweep_is_reproducible(self, workdir):
        cfg = _config(workdir, "m = 3\nr = 0\nk_values = 1, 2\ntrials = 5\nsigma_m = 0.01\n")
        assert main(["recover", "--config", cfg, "--out", "a"]) == EXIT_OK
        assert main(["recover", "--config", cfg, "--out", "b", "--threads", "3"]) == EXIT_OK
        for name in ("recovery.csv", "recovery.json"):
            assert (workdir / "a" / name).read_bytes() == (workdir / "b" / name).read_bytes()
        table = pd.read_csv(workdir / "a" / "recovery.csv")
        assert table.columns.tolist()[:3] == ["m", "r", "k"]
        assert table["k"].tolist() == [1, 2]

    def test_output_key_in_config(self, workdir):
        cfg = _config(workdir, "m = 3\nr = 0\ntrials = 2\noutput = from_config\n")
        assert main(["recover", "--config", cfg]) == EXIT_OK
        assert (workdir / "from_config" / "recovery.csv").exists()

    def test_bad_config(self, workdir):
        cfg = _config(workdir, "m = 3\nflavour = 1\n")
        assert main(["recover", "--config", cfg]) == EXIT_USAGE


class TestExperiments:
    def test_noise(self, workdir):
        cfg = _config(
            workdir, "m = 3\nr = 1\nsigma_d = 0.5\nsigma_m = 0, 0.1\nnoise_trials = 20\n"
        )
        assert main(["noise", "--config", cfg]) == EXIT_OK
        table = pd.read_csv(workdir / "out" / "noise.csv")
        assert len(table) == 2
        assert table["pred_var"].tolist() == pytest.approx([2.0, 2.01])

    def test_strip(self, workdir):
        cfg = _config(workdir, "m = 3\nr = 1\nk_values = 2\ntrials = 5\nepsilon = 0.3, 0.6\n")
        assert main(["strip", "--config", cfg]) == EXIT_OK
        table = pd.read_csv(workdir / "out" / "strip.csv")
        assert table.columns.tolist() == ["statistic", "epsilon", "exceed_freq", "paper_bound"]
        assert len(table) == 6

    def test_tail(self, workdir):
        cfg = _config(workdir, "m = 3\nr = 1\nk_values = 2\ntrials = 5\ndelta_prime = 0.5\n")
        assert main(["tail", "--config", cfg]) == EXIT_OK
        report = json.loads((workdir / "out" / "tail.json").read_text())
        assert report["k"] == 2
        assert report["delta_prime"] == 0.5


class TestJournal:
    def test_command_events(self, workdir):
        main(["construct", "--m", "3", "--r", "0"])
        run_id = RunJournal.current_run()
        events = RunJournal.read_events(run_id)
        assert [e["event"] for e in events] == ["command_started", "command_finished"]
        assert events[1]["exit_code"] == EXIT_OK
        assert (events[0]["m"], events[0]["r"]) == (3, 0)

    def test_sweep_journals_cells_with_config_context(self, workdir):
        cfg = _config(workdir, "m = 3\nr = 0\nk_values = 1, 2\ntrials = 2\nmaster_seed = 9\n")
        assert main(["recover", "--config", cfg, "--threads", "2"]) == EXIT_OK
        events = RunJournal.read_events(RunJournal.current_run())
        cells = [e for e in events if e["event"] == "cell_finished"]
        assert [c["k"] for c in cells] == [1, 2]
        assert cells[0]["success_rate"] == 1.0
        assert (cells[0]["m"], cells[0]["master_seed"], cells[0]["threads"]) == (3, 9, 2)

    def test_verify_seed_is_journaled(self, workdir):
        main(["verify", "--m", "3", "--r", "0", "--seed", "4"])
        events = RunJournal.read_events(RunJournal.current_run())
        assert events[0]["master_seed"] == 4

    def test_version(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["--version"])
        assert exc.value.code == 0
        assert "rm-sieve" in capsys.readouterr().out
