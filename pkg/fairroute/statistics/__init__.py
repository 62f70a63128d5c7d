"""Experiment summaries and report rendering"""

from .reporter import CellSummary, ExperimentReporter, ReportFormat, summarize

__all__ = ["CellSummary", "ExperimentReporter", "ReportFormat", "summarize"]
