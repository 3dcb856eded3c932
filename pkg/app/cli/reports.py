"""
Report container and its CSV, JSON and PDF renderings.
"""

import json
import logging
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone
from io import BytesIO
from typing import Optional

import pandas as pd
from fpdf import FPDF

from app import constants
from app.errors import UsageError

logger = logging.getLogger(__name__)


@dataclass
class PriceReport:
    """A result table plus the metadata every command attaches to it."""

    command: str
    table: pd.DataFrame
    measure: Optional[str] = None
    outside_hypotheses: bool = False
    metadata: dict = field(default_factory=dict)

    def header(self) -> dict:
        header = {"command": self.command, "outside_hypotheses": self.outside_hypotheses}
        if self.measure:
            header["measure"] = self.measure
        header.update(self.metadata)
        return header

    def to_csv(self) -> str:
        return self.table.to_csv(index=False, float_format=constants.CSV_FLOAT_FORMAT)

    def to_json(self) -> str:
        rows = json.loads(self.table.to_json(orient="records", double_precision=12))
        return json.dumps(dict(self.header(), rows=rows), indent=2) + "\n"


def _format_cell(value) -> str:
    if isinstance(value, float):
        return constants.CSV_FLOAT_FORMAT % value
    return str(value)


def generate_pdf(report: PriceReport) -> BytesIO:
    """Render the report header and table into an in-memory PDF."""
    pdf = FPDF()
    pdf.set_auto_page_break(auto=True, margin=15)
    pdf.add_page()

    pdf.set_font("Arial", "B", 16)
    pdf.cell(200, 10, txt=f"Indifference pricing report: {report.command}", ln=True, align="C")
    pdf.set_font("Arial", "", 12)
    generated = datetime.now(timezone.utc).isoformat()
    pdf.cell(200, 10, txt=f"Generated on: {generated}", ln=True, align="C")

    pdf.ln(10)
    pdf.set_font("Arial", "B", 14)
    pdf.cell(200, 10, txt="Run details", ln=True)
    pdf.set_font("Arial", "", 12)
    details = "\n".join(f"{key}: {value}" for key, value in report.header().items())
    pdf.multi_cell(0, 10, txt=details)

    if report.outside_hypotheses:
        pdf.set_text_color(200, 0, 0)
        pdf.multi_cell(
            0, 10,
            txt="Calls have unbounded pay-offs; the expansion is reported outside its assumptions.",
        )
        pdf.set_text_color(0, 0, 0)

    pdf.ln(5)
    pdf.set_font("Arial", "B", 14)
    pdf.cell(200, 10, txt="Results", ln=True)
    columns = list(report.table.columns)
    width = 190.0 / max(len(columns), 1)
    pdf.set_font("Arial", "B", 7)
    for column in columns:
        pdf.cell(width, 6, txt=str(column)[:18], border=1)
    pdf.ln()
    pdf.set_font("Arial", "", 7)
    for row in report.table.itertuples(index=False):
        for value in row:
            pdf.cell(width, 6, txt=_format_cell(value)[:18], border=1)
        pdf.ln()

    pdf_buffer = BytesIO()
    pdf_buffer.write(pdf.output(dest="S").encode("latin1"))
    pdf_buffer.seek(0)
    return pdf_buffer


def write_report(report: PriceReport, fmt: str = "csv", out: Optional[str] = None) -> None:
    """Write to `out`, or to stdout for the text formats."""
    if fmt == "pdf":
        if not out:
            raise UsageError("--format pdf needs --out")
        with open(out, "wb") as pdf_file:
            pdf_file.write(generate_pdf(report).getvalue())
        logger.info("Wrote PDF report to %s", out)
        return

    text = report.to_json() if fmt == "json" else report.to_csv()
    if out:
        with open(out, "w", encoding="utf-8", newline="") as out_file:
            out_file.write(text)
        logger.info("Wrote %s report to %s", fmt, out)
    else:
        sys.stdout.write(text)


def write_surface(frame: pd.DataFrame, out: str) -> None:
    """CSV dump of PIDE value and hedge surfaces, one block per solve."""
    frame.to_csv(out, index=False, float_format=constants.CSV_FLOAT_FORMAT)
    logger.info("Wrote %d surface rows to %s", len(frame), out)
