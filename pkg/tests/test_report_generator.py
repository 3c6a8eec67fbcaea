"""
Tests for the CSV, JSON and markdown writers.
"""

import csv
import json

import pytest

from core.hardy_engine import CSV_COLUMNS, InequalityReport, Verdict
from core.report_generator import ReportGenerator


def make_report(statement="thm2.1", slack=0.5, beta=-0.5, p=None, verdict=Verdict.HOLDS):
    return InequalityReport(
        statement=statement,
        group="heisenberg",
        lhs=1.5,
        rhs_terms={"C1_term": 0.75, "derivative_term": 0.25},
        rhs_total=1.0,
        slack=slack,
        err_est=1e-12,
        verdict=verdict,
        beta=beta,
        p=p,
        coefficients={"C1": 0.25},
        quadrature={"kind": "gauss", "nodes": 12},
    )


@pytest.fixture
def generator(mock_settings):
    return ReportGenerator(mock_settings)


@pytest.mark.priority1
@pytest.mark.unit
class TestCsvOutput:
    """Report tables."""

    def test_header_and_rows(self, generator, temp_dir):
        path = generator.write_csv([make_report(), make_report("cor2.3", beta=None)], temp_dir / "r.csv")
        with open(path, newline="") as f:
            rows = list(csv.reader(f))
        assert tuple(rows[0]) == CSV_COLUMNS
        assert rows[1] == ["thm2.1", "heisenberg", "-0.5", "", "1.5", "1", "0.5", "9.9999999999999998e-13", "holds"]
        assert rows[2][2] == ""

    def test_empty_report_list_writes_header_only(self, generator, temp_dir):
        path = generator.write_csv([], temp_dir / "nested" / "empty.csv")
        assert open(path).read() == ",".join(CSV_COLUMNS) + "\n"

    def test_round_trip_precision(self, generator, temp_dir):
        report = make_report(slack=0.1 + 0.2)
        path = generator.write_csv([report], temp_dir / "r.csv")
        with open(path, newline="") as f:
            row = list(csv.DictReader(f))[0]
        assert float(row["slack"]) == report.slack

    def test_default_path(self, generator, mock_settings):
        assert str(generator.default_path("run", ".csv")) == f"{mock_settings.report_output_path}/run.csv"

    def test_sweep_csv(self, generator, temp_dir):
        path = generator.write_sweep_csv([(-0.5, 0.25), (0.0, 0.0)], temp_dir / "sweep.csv")
        assert open(path).read().splitlines() == ["beta,objective", "-0.5,0.25", "0,0"]

    def test_probe_csv(self, generator, temp_dir):
        rows = [
            {"index": 0, "kind": "probe", "alpha": 0.75, "quotient": 0.5, "err_est": 1e-10},
            {"index": 1, "quotient": 2.0, "err_est": 0.0},
        ]
        lines = open(generator.write_probe_csv(rows, temp_dir / "probe.csv")).read().splitlines()
        assert lines[0] == "index,kind,alpha,quotient,err_est"
        assert lines[1].startswith("0,probe,0.75,0.5,")
        assert lines[2] == "1,,,2,0"


@pytest.mark.priority1
@pytest.mark.unit
class TestJsonOutput:
    """JSON mirror with term breakdown."""

    def test_payload(self, generator, temp_dir):
        reports = [make_report(), make_report(slack=-1.0, verdict=Verdict.VIOLATED)]
        path = generator.write_json(reports, temp_dir / "r.json", metadata={"seed": 3})
        data = json.loads(open(path).read())
        assert data["metadata"] == {"seed": 3}
        assert data["summary"]["rows"] == 2
        assert data["summary"]["violations"] == 1
        assert data["reports"][0]["rhs_terms"] == {"C1_term": 0.75, "derivative_term": 0.25}

    def test_reports_reload(self, generator, temp_dir):
        report = make_report(statement="thm2.6", p=3.0)
        path = generator.write_json([report], temp_dir / "r.json")
        restored = InequalityReport.from_dict(json.loads(open(path).read())["reports"][0])
        assert restored == report

    def test_deterministic_bytes(self, generator, temp_dir):
        reports = [make_report(), make_report("cor2.4", beta=None)]
        first = open(generator.write_json(reports, temp_dir / "a.json")).read()
        second = open(generator.write_json(reports, temp_dir / "b.json")).read()
        assert first == second


@pytest.mark.priority2
@pytest.mark.unit
class TestSummary:
    """Aggregates and the markdown digest."""

    def test_summarize(self):
        summary = ReportGenerator.summarize([
            make_report(slack=0.2),
            make_report("thm3.1", slack=-0.3, verdict=Verdict.VIOLATED),
        ])
        assert summary["min_slack"] == -0.3
        assert summary["by_statement"]["thm2.1"] == {"holds": 1, "violated-beyond-tolerance": 0}
        assert summary["by_statement"]["thm3.1"]["violated-beyond-tolerance"] == 1

    def test_summarize_empty(self):
        assert ReportGenerator.summarize([]) == {
            "rows": 0, "violations": 0, "min_slack": None, "by_statement": {},
        }

    def test_markdown(self, generator, temp_dir):
        path = generator.write_markdown_summary([make_report(slack=0.125)], temp_dir / "summary.md")
        text = open(path).read()
        assert "Carnot Hardy Verifier v0.1.0" in text
        assert "| thm2.1 | 1 | 0 | 0.125 |" in text
