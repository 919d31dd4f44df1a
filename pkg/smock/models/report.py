"""Report models - CSV rows, metadata and plot series.

Every command produces one ``Report``. Each numeric column is written with
a companion ``<name>_err`` column (0 for exact quantities, blank when the
value itself is missing), followed by free-text columns. Metadata lines
come first, prefixed with ``#`` and sorted by key, so identical inputs give
byte-identical output.
"""

import csv
import io
import math
from pathlib import Path
from typing import Dict, List, Optional

from pydantic import BaseModel, Field


def format_number(value: Optional[float]) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, int):
        return str(value)
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return repr(float(value))


class ReportRow(BaseModel):
    index: float
    values: Dict[str, Optional[float]] = Field(default_factory=dict)
    errors: Dict[str, float] = Field(default_factory=dict)
    text: Dict[str, str] = Field(default_factory=dict)


class Report(BaseModel):
    command: str
    index_name: str = "k"
    value_columns: List[str] = Field(default_factory=list)
    text_columns: List[str] = Field(default_factory=list)
    rows: List[ReportRow] = Field(default_factory=list)
    metadata: Dict[str, str] = Field(default_factory=dict)

    def add(self, index: float, values=None, errors=None, text=None) -> ReportRow:
        row = ReportRow(index=index, values=values or {}, errors=errors or {}, text=text or {})
        for name in row.values:
            if name not in self.value_columns:
                self.value_columns.append(name)
        for name in row.text:
            if name not in self.text_columns:
                self.text_columns.append(name)
        self.rows.append(row)
        return row

    def column(self, name: str) -> List[Optional[float]]:
        return [r.values.get(name) for r in self.rows]

    def header(self) -> List[str]:
        cols = ["command", self.index_name]
        for name in self.value_columns:
            cols += [name, f"{name}_err"]
        return cols + self.text_columns

    def to_csv(self) -> str:
        buf = io.StringIO()
        for key in sorted(self.metadata):
            buf.write(f"# {key}={self.metadata[key]}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.header())
        for row in self.rows:
            line = [self.command, format_number(_as_index(row.index))]
            for name in self.value_columns:
                value = row.values.get(name)
                error = None if value is None else row.errors.get(name, 0.0)
                line += [format_number(value), format_number(error)]
            line += [row.text.get(name, "") for name in self.text_columns]
            writer.writerow(line)
        return buf.getvalue()

    def write_plot_series(self, directory: Path) -> List[Path]:
        """One ``<command>_<column>.dat`` file per numeric column: index, value, error."""
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        written = []
        stem = self.command.replace("-", "_")
        for name in self.value_columns:
            path = directory / f"{stem}_{name}.dat"
            lines = [f"# {self.index_name} {name} {name}_err"]
            for row in self.rows:
                value = row.values.get(name)
                if value is None:
                    continue
                lines.append(
                    f"{format_number(_as_index(row.index))} {format_number(value)} "
                    f"{format_number(row.errors.get(name, 0.0))}"
                )
            path.write_text("\n".join(lines) + "\n")
            written.append(path)
        return written


def _as_index(index: float):
    return int(index) if float(index).is_integer() else index
