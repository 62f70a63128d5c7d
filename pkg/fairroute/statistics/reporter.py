"""Experiment summaries: per-cell means over seeds"""

import json
import logging
import time
from dataclasses import asdict, dataclass
from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..data.writers import ResultRow
from ..errors import WritingError

logger = logging.getLogger(__name__)

# (column in the results file, row label in the tables)
SUMMARY_METRICS: List[Tuple[str, str]] = [
    ("provider_fairness", "Provider fairness (variance)"),
    ("customer_fairness", "Customer fairness (variance)"),
    ("total_utility", "Total utility"),
    ("total_distance", "Total distance (m)"),
]


class ReportFormat(Enum):
    """Supported report output formats"""
    CONSOLE = "console"
    JSON = "json"
    CSV = "csv"
    MARKDOWN = "markdown"


REPORT_EXTENSIONS = {
    ReportFormat.CONSOLE: ".txt",
    ReportFormat.JSON: ".json",
    ReportFormat.CSV: ".csv",
    ReportFormat.MARKDOWN: ".md",
}


@dataclass(frozen=True)
class CellSummary:
    """Arithmetic means of one (scenario, algorithm, provider count) cell"""

    scenario: str
    algo: str
    providers: int
    runs: int
    total_utility: float
    provider_fairness: float
    customer_fairness: float
    total_distance: float

    def value(self, metric: str) -> float:
        return getattr(self, metric)


def summarize(rows: Sequence[ResultRow]) -> List[CellSummary]:
    """Group result rows into cells and average every metric over seeds

    Cells come out sorted by (scenario, algo, providers).
    """
    groups: Dict[Tuple[str, str, int], List[ResultRow]] = {}
    for row in rows:
        groups.setdefault((row.scenario, row.algo, row.providers), []).append(row)

    cells = []
    for (scenario, algo, providers), members in sorted(groups.items()):
        means = {
            metric: float(np.mean([getattr(row, metric) for row in members]))
            for metric, _ in SUMMARY_METRICS
        }
        cells.append(CellSummary(scenario=scenario, algo=algo, providers=providers, runs=len(members), **means))
    return cells


class ExperimentReporter:
    """Renders experiment cells in a metric-by-algorithm, provider-count-column layout"""

    def __init__(self, algorithm_order: Optional[Sequence[str]] = None):
        self.algorithm_order = list(algorithm_order or [])
        self.total_processing_time = 0.0
        self.session_start_time: Optional[float] = None

    def start_session(self) -> None:
        """Start a reporting session"""
        self.session_start_time = time.time()
        logger.debug("Reporting session started")

    def end_session(self) -> None:
        """End a reporting session"""
        if self.session_start_time:
            self.total_processing_time = time.time() - self.session_start_time
            logger.debug(f"Reporting session ended: {self.total_processing_time:.2f}s")

    def generate_report(
        self,
        rows: Sequence[ResultRow],
        format: ReportFormat = ReportFormat.CONSOLE,
        failures: Sequence[str] = ()
    ) -> str:
        """Summary of result rows in the requested format

        Args:
            rows: Per-seed results
            format: Output format
            failures: Descriptions of cells that failed

        Returns:
            Formatted report string
        """
        cells = summarize(rows)
        if format == ReportFormat.CONSOLE:
            return self._generate_console_report(cells, failures)
        elif format == ReportFormat.JSON:
            return self._generate_json_report(cells, failures)
        elif format == ReportFormat.MARKDOWN:
            return self._generate_markdown_report(cells, failures)
        elif format == ReportFormat.CSV:
            return self._generate_csv_report(cells)
        else:
            raise ValueError(f"Unsupported report format: {format}")

    # Layout helpers

    def _ordered_algorithms(self, cells: Sequence[CellSummary]) -> List[str]:
        present = {cell.algo for cell in cells}
        ordered = [name for name in self.algorithm_order if name in present]
        return ordered + sorted(present - set(ordered))

    @staticmethod
    def _grid(cells: Sequence[CellSummary]) -> Dict[str, Dict[Tuple[str, int], CellSummary]]:
        """scenario -> (algo, providers) -> cell"""
        grid: Dict[str, Dict[Tuple[str, int], CellSummary]] = {}
        for cell in cells:
            grid.setdefault(cell.scenario, {})[(cell.algo, cell.providers)] = cell
        return grid

    @staticmethod
    def _format_number(value: float) -> str:
        return f"{value:,.2f}"

    def _metric_table(
        self,
        cells: Dict[Tuple[str, int], CellSummary],
        metric: str
    ) -> Tuple[List[str], List[List[str]]]:
        counts = sorted({providers for _, providers in cells})
        header = ["Algorithm"] + [f"{count} providers" for count in counts]
        body = []
        for algo in self._ordered_algorithms(list(cells.values())):
            row = [algo]
            for count in counts:
                cell = cells.get((algo, count))
                row.append(self._format_number(cell.value(metric)) if cell else "-")
            body.append(row)
        return header, body

    # Console format

    def _generate_console_report(self, cells: Sequence[CellSummary], failures: Sequence[str]) -> str:
        lines = [
            "=" * 72,
            "Experiment Summary (means over seeds)",
            "=" * 72,
        ]

        for scenario, grid in self._grid(cells).items():
            lines.extend(["", f"Scenario: {scenario}"])
            for metric, label in SUMMARY_METRICS:
                header, body = self._metric_table(grid, metric)
                widths = [max(len(r[i]) for r in [header] + body) for i in range(len(header))]
                lines.extend(["", f"  {label}"])
                lines.append("  " + "  ".join(h.ljust(w) if i == 0 else h.rjust(w) for i, (h, w) in enumerate(zip(header, widths))))
                lines.append("  " + "  ".join("-" * w for w in widths))
                for row in body:
                    lines.append("  " + "  ".join(v.ljust(w) if i == 0 else v.rjust(w) for i, (v, w) in enumerate(zip(row, widths))))

        if not cells:
            lines.extend(["", "No successful runs."])

        if failures:
            lines.extend(["", f"Failed cells ({len(failures)}):"])
            lines.extend(f"  - {failure}" for failure in failures)

        if self.total_processing_time > 0:
            lines.extend(["", f"Session Time: {self.total_processing_time:.2f} seconds"])

        lines.append("=" * 72)
        return '\n'.join(lines)

    # JSON format

    def _generate_json_report(self, cells: Sequence[CellSummary], failures: Sequence[str]) -> str:
        report = {
            "cells": [asdict(cell) for cell in cells],
            "failures": list(failures),
            "total_cells": len(cells),
        }
        return json.dumps(report, indent=2)

    # Markdown format

    def _generate_markdown_report(self, cells: Sequence[CellSummary], failures: Sequence[str]) -> str:
        lines = ["# Experiment Summary", "", "Means over seeds for every algorithm and provider count."]

        for scenario, grid in self._grid(cells).items():
            lines.extend(["", f"## {scenario}"])
            for metric, label in SUMMARY_METRICS:
                header, body = self._metric_table(grid, metric)
                lines.extend([
                    "",
                    f"### {label}",
                    "",
                    "| " + " | ".join(header) + " |",
                    "|" + "|".join("---" for _ in header) + "|",
                ])
                lines.extend("| " + " | ".join(row) + " |" for row in body)

        if failures:
            lines.extend(["", "## Failed Cells", ""])
            lines.extend(f"- {failure}" for failure in failures)

        return '\n'.join(lines)

    # CSV format

    def _generate_csv_report(self, cells: Sequence[CellSummary]) -> str:
        """One line per cell; floats keep full precision"""
        columns = ["scenario", "algo", "providers", "runs"] + [metric for metric, _ in SUMMARY_METRICS]
        lines = [",".join(columns)]
        for cell in cells:
            values = asdict(cell)
            lines.append(",".join(repr(v) if isinstance(v, float) else str(v) for v in (values[c] for c in columns)))
        return '\n'.join(lines)

    def save_report(self, report_content: str, output_path: str) -> None:
        """Save report to file

        Raises:
            WritingError: If the file cannot be written
        """
        try:
            Path(output_path).parent.mkdir(parents=True, exist_ok=True)
            with open(output_path, 'w', encoding='utf-8') as f:
                f.write(report_content)
                if not report_content.endswith('\n'):
                    f.write('\n')
            logger.info(f"Report saved to {output_path}")
        except OSError as e:
            logger.error(f"Failed to save report to {output_path}: {e}")
            raise WritingError(f"Failed to save report to {output_path}: {e}") from e

    def save_summaries(
        self,
        rows: Sequence[ResultRow],
        directory: str,
        failures: Sequence[str] = (),
        formats: Sequence[ReportFormat] = (ReportFormat.MARKDOWN, ReportFormat.CSV, ReportFormat.JSON)
    ) -> List[str]:
        """Write ``summary.<ext>`` for each format into a directory

        Returns:
            Paths written
        """
        written = []
        for report_format in formats:
            path = str(Path(directory) / f"summary{REPORT_EXTENSIONS[report_format]}")
            self.save_report(self.generate_report(rows, report_format, failures), path)
            written.append(path)
        return written
