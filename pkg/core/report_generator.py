"""
Report Generator for Carnot Hardy Verifier
Writes verification reports, sweep tables and probe tables as CSV, JSON and markdown.
"""

import csv
import json
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Union

from config.settings import Settings
from core.hardy_engine import CSV_COLUMNS, InequalityReport, Verdict

PathLike = Union[str, Path]


class ReportGenerator:
    """Deterministic writers for every table the CLI produces."""

    def __init__(self, settings: Settings):
        """Initialize report generator."""
        self.settings = settings
        self.logger = logging.getLogger(__name__)
        self.report_dir = Path(self.settings.report_output_path)
        self.float_format = self.settings.float_format

    def default_path(self, stem: str, suffix: str) -> Path:
        """``<report_output_path>/<stem><suffix>``."""
        return self.report_dir / f"{stem}{suffix}"

    def _prepare(self, path: PathLike) -> Path:
        out = Path(path)
        out.parent.mkdir(parents=True, exist_ok=True)
        return out

    def _fmt(self, value: Optional[float]) -> str:
        return "" if value is None else format(float(value), self.float_format)

    def _write_rows(self, path: PathLike, header: Sequence[str], rows: Iterable[Sequence[str]]) -> str:
        out = self._prepare(path)
        with open(out, "w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rows)
        return str(out)

    def write_csv(self, reports: Sequence[InequalityReport], path: PathLike) -> str:
        """Report table in the fixed column order, one row per report."""
        out = self._write_rows(path, CSV_COLUMNS, (r.csv_row(self.float_format) for r in reports))
        self.logger.info(f"Wrote {len(reports)} report rows to {out}")
        return out

    def write_json(
        self,
        reports: Sequence[InequalityReport],
        path: PathLike,
        metadata: Optional[Dict[str, Any]] = None,
    ) -> str:
        """JSON mirror of the CSV with the per-term breakdown."""
        out = self._prepare(path)
        payload = {
            "metadata": metadata or {},
            "summary": self.summarize(reports),
            "reports": [r.to_dict() for r in reports],
        }
        with open(out, "w", encoding="utf-8") as f:
            json.dump(payload, f, indent=2, sort_keys=True)
            f.write("\n")
        self.logger.info(f"Wrote JSON report to {out}")
        return str(out)

    def write_sweep_csv(self, rows: Sequence[Sequence[float]], path: PathLike) -> str:
        """Plot-ready ``beta,objective`` pairs."""
        out = self._write_rows(
            path, ("beta", "objective"), ([self._fmt(b), self._fmt(v)] for b, v in rows)
        )
        self.logger.info(f"Wrote {len(rows)} sweep points to {out}")
        return out

    def write_probe_csv(self, rows: Sequence[Dict[str, Any]], path: PathLike) -> str:
        """``index,kind,alpha,quotient,err_est`` per family member."""
        out = self._write_rows(
            path,
            ("index", "kind", "alpha", "quotient", "err_est"),
            (
                [
                    str(row["index"]),
                    str(row.get("kind", "")),
                    self._fmt(row.get("alpha")),
                    self._fmt(row["quotient"]),
                    self._fmt(row["err_est"]),
                ]
                for row in rows
            ),
        )
        self.logger.info(f"Wrote {len(rows)} probe rows to {out}")
        return out

    @staticmethod
    def summarize(reports: Sequence[InequalityReport]) -> Dict[str, Any]:
        by_statement: Dict[str, Dict[str, int]] = {}
        for r in reports:
            counts = by_statement.setdefault(r.statement, {v.value: 0 for v in Verdict})
            counts[r.verdict.value] += 1
        worst = min((r.slack for r in reports), default=None)
        return {
            "rows": len(reports),
            "violations": sum(1 for r in reports if r.verdict is Verdict.VIOLATED),
            "min_slack": worst,
            "by_statement": by_statement,
        }

    def write_markdown_summary(
        self, reports: Sequence[InequalityReport], path: PathLike, title: str = "Hardy Verification"
    ) -> str:
        """Short human-readable digest of a verification run."""
        summary = self.summarize(reports)
        lines: List[str] = [
            f"# 📊 {title}",
            "",
            f"**System**: {self.settings.app_name} v{self.settings.app_version}  ",
            f"**Rows**: {summary['rows']}  ",
            f"**Violations**: {summary['violations']}",
            "",
            "| statement | holds | violated | min slack |",
            "|---|---|---|---|",
        ]
        for statement, counts in summary["by_statement"].items():
            min_slack = min(r.slack for r in reports if r.statement == statement)
            lines.append(
                f"| {statement} | {counts[Verdict.HOLDS.value]} "
                f"| {counts[Verdict.VIOLATED.value]} | {min_slack:.6g} |"
            )
        out = self._prepare(path)
        out.write_text("\n".join(lines) + "\n", encoding="utf-8")
        self.logger.info(f"Wrote summary to {out}")
        return str(out)
