"""
End-to-end tests of the command-line entry point.
"""

import csv
import json
import re
import signal
from pathlib import Path
from unittest.mock import patch

import pytest

import main
from core.hardy_engine import CSV_COLUMNS, InequalityReport, Verdict

PROJECT_ROOT = Path(__file__).parent.parent
BUNDLED_RUNS = PROJECT_ROOT / "config" / "runs"

SMALL_RUN = {
    "statement": "thm2.1",
    "group": "heisenberg",
    "domain": {"halfspace": {"nu": [0, 0, 1], "d": 0}},
    "seed": 5,
    "beta": [-0.5, 1.0],
    "u": [
        {"kind": "bump", "center": [0.0, 0.0, 1.0], "widths": [0.5, 0.5, 0.5]},
        {"random": {"count": 2, "box": [[-1.0, 1.0], [-1.0, 1.0], [0.2, 2.0]]}},
    ],
    "rule": {"kind": "gauss", "nodes": 12},
}


def write_json(path, data):
    path.write_text(json.dumps(data))
    return str(path)


def read_rows(path):
    with open(path, newline="") as f:
        return list(csv.reader(f))


@pytest.mark.priority1
@pytest.mark.integration
class TestVerifyCommand:
    """``verify`` runs, exit codes and output files."""

    def test_verify_writes_reports(self, temp_dir):
        config = write_json(temp_dir / "small.json", SMALL_RUN)
        out = temp_dir / "out"

        code = main.main(["verify", config, "--output-dir", str(out)])

        assert code == main.EXIT_OK
        rows = read_rows(out / "small.csv")
        assert tuple(rows[0]) == CSV_COLUMNS
        assert len(rows) == 1 + 3 * 2
        assert {row[-1] for row in rows[1:]} == {"holds"}
        assert [row[2] for row in rows[1:3]] == ["-0.5", "1"]
        data = json.loads((out / "small.json").read_text())
        assert data["metadata"]["seed"] == 5
        assert len(data["reports"]) == 6
        assert (out / "small.md").exists()

    def test_verify_is_deterministic(self, temp_dir):
        config = write_json(temp_dir / "small.json", SMALL_RUN)

        assert main.main(["verify", config, "--output-dir", str(temp_dir / "a")]) == main.EXIT_OK
        assert main.main(["verify", config, "--output-dir", str(temp_dir / "b")]) == main.EXIT_OK

        for name in ("small.csv", "small.json"):
            assert (temp_dir / "a" / name).read_bytes() == (temp_dir / "b" / name).read_bytes()

    def test_output_paths_from_config(self, temp_dir):
        body = dict(SMALL_RUN, output={
            "csv": str(temp_dir / "named" / "rows.csv"),
            "json": str(temp_dir / "named" / "rows.json"),
        })
        config = write_json(temp_dir / "named.json", body)

        assert main.main(["verify", config]) == main.EXIT_OK
        assert (temp_dir / "named" / "rows.csv").exists()
        assert (temp_dir / "named" / "rows.json").exists()

    def test_empty_function_list_writes_header_only(self, temp_dir):
        config = write_json(temp_dir / "empty.json", dict(SMALL_RUN, u=[]))

        assert main.main(["verify", config, "--output-dir", str(temp_dir)]) == main.EXIT_OK
        assert read_rows(temp_dir / "empty.csv") == [list(CSV_COLUMNS)]

    def test_positive_beta_on_convex_domain_is_rejected(self, temp_dir, capsys):
        body = {
            "statement": "thm3.1",
            "group": "heisenberg",
            "domain": {"polytope": {"square_prism": {"n": 3, "axes": [0, 1], "center": [0, 0, 0], "half_side": 1}}},
            "beta": 0.5,
            "u": [{"center": [0.0, 0.0, 0.0], "widths": [0.5, 0.5, 0.5]}],
        }
        config = write_json(temp_dir / "bad.json", body)

        code = main.main(["verify", config, "--output-dir", str(temp_dir / "out")])

        assert code == main.EXIT_INVALID
        error = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
        assert error["error"] == "HypothesisError"
        assert "beta < 0" in error["message"]
        assert not (temp_dir / "out").exists()

    def test_malformed_config(self, temp_dir, capsys):
        config = temp_dir / "broken.json"
        config.write_text("{")

        assert main.main(["verify", str(config)]) == main.EXIT_INVALID
        assert "ValidationError" in capsys.readouterr().err

    def test_violation_exit_code(self, temp_dir):
        violated = InequalityReport(
            statement="thm2.1", group="heisenberg", lhs=1.0, rhs_terms={}, rhs_total=2.0,
            slack=-1.0, err_est=0.0, verdict=Verdict.VIOLATED, beta=-0.5,
        )
        config = write_json(temp_dir / "small.json", SMALL_RUN)

        with patch("main.evaluate", return_value=violated):
            code = main.main(["verify", config, "--output-dir", str(temp_dir)])

        assert code == main.EXIT_VIOLATED
        assert read_rows(temp_dir / "small.csv")[1][-1] == "violated-beyond-tolerance"

    def test_bad_settings_file(self, temp_dir):
        config = write_json(temp_dir / "small.json", SMALL_RUN)

        code = main.main(["--config", str(temp_dir / "missing.yaml"), "verify", config])

        assert code == main.EXIT_INVALID


@pytest.mark.priority2
@pytest.mark.integration
class TestSweepAndProbeCommands:
    """``sweep`` and ``probe``."""

    def test_sweep_statement(self, temp_dir, capsys):
        out = temp_dir / "sweep.csv"

        code = main.main(["sweep", "--statement", "thm2.1", "--beta-range=-1:0:0.25", "--output", str(out)])

        assert code == main.EXIT_OK
        assert read_rows(out)[0] == ["beta", "objective"]
        assert len(read_rows(out)) == 1 + 5
        printed = re.search(r"argmax beta = (\S+),", capsys.readouterr().out)
        assert float(printed.group(1)) == pytest.approx(-0.5, abs=1e-6)

    def test_sweep_from_run_config(self, temp_dir):
        out = temp_dir / "sweep.csv"
        config = str(BUNDLED_RUNS / "square_prism_convex.json")

        code = main.main(["sweep", config, "--beta-range=-1:0:0.5", "--output", str(out)])

        assert code == main.EXIT_OK
        values = [float(row[1]) for row in read_rows(out)[1:]]
        assert values[1] == pytest.approx(0.25)

    def test_sweep_needs_statement(self, temp_dir):
        assert main.main(["sweep", "--output", str(temp_dir / "s.csv")]) == main.EXIT_INVALID

    def test_sweep_lp_needs_exponent(self, temp_dir):
        code = main.main(["sweep", "--statement", "thm2.6", "--output", str(temp_dir / "s.csv")])
        assert code == main.EXIT_INVALID

    def test_probe_bundled_family(self, temp_dir, capsys):
        out = temp_dir / "probe.csv"

        code = main.main(["probe", str(BUNDLED_RUNS / "euclidean_probes.json"), "--output", str(out)])

        assert code == main.EXIT_OK
        rows = read_rows(out)
        assert rows[0] == ["index", "kind", "alpha", "quotient", "err_est"]
        assert [row[1] for row in rows[1:]] == ["probe"] * 4 + ["bump"]
        assert float(rows[1][2]) == 0.51
        assert rows[5][2] == ""
        assert "member #0" in capsys.readouterr().out

    def test_probe_needs_family(self):
        assert main.main(["probe"]) == main.EXIT_INVALID


@pytest.mark.priority2
@pytest.mark.unit
class TestCatalogCommands:
    """``list-statements`` and ``emit-example-configs``."""

    def test_list_statements(self, capsys):
        assert main.main(["list-statements"]) == main.EXIT_OK
        out = capsys.readouterr().out
        assert "thm2.1" in out and "Theorem 3.2" in out

    def test_list_statements_json(self, capsys):
        assert main.main(["list-statements", "--json"]) == main.EXIT_OK
        catalog = json.loads(capsys.readouterr().out)
        assert [entry["id"] for entry in catalog][:2] == ["thm2.1", "cor-step2"]
        assert len(catalog) == 9

    def test_emit_example_configs(self, temp_dir):
        target = temp_dir / "examples"

        assert main.main(["emit-example-configs", str(target)]) == main.EXIT_OK

        bundled = sorted(p.name for p in BUNDLED_RUNS.glob("*.json"))
        assert sorted(p.name for p in target.glob("*.json")) == bundled

    def test_emitted_configs_parse(self, temp_dir, mock_settings):
        from utils.validators import load_run_config

        target = temp_dir / "examples"
        main.main(["emit-example-configs", str(target)])

        config = load_run_config(target / "heisenberg_cor25.json", mock_settings)
        assert config.row_count == 22

    def test_unknown_command_exits(self):
        with pytest.raises(SystemExit):
            main.main(["frobnicate"])


@pytest.mark.priority3
@pytest.mark.unit
class TestSignalHandling:
    """Interrupts map to exit status 130."""

    def test_signal_handler_raises_keyboard_interrupt(self):
        with pytest.raises(KeyboardInterrupt):
            main.signal_handler(signal.SIGTERM, None)

    def test_interrupt_exit_code(self, capsys):
        with patch("main.run_list_statements", side_effect=KeyboardInterrupt):
            assert main.main(["list-statements"]) == main.EXIT_INTERRUPTED
        assert "Interrupted" in capsys.readouterr().err

    def test_sigterm_handler_installed(self):
        with patch("main.signal.signal") as mock_signal:
            main.setup_signal_handlers()
        mock_signal.assert_called_once_with(signal.SIGTERM, main.signal_handler)
