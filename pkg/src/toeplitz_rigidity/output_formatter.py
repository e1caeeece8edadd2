"""
Output formatter for toeplitz_rigidity.

Reports are plain dicts and lists; this module turns them into JSON, YAML, CSV
or text with a fixed number format so that identical inputs give byte-identical
files. Complex numbers become ``{"re": ..., "im": ...}`` objects, floats use
the shortest round-trip representation in JSON and ``%.17g`` in CSV.
"""

import csv
import io
import json
import logging
import math
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional, TextIO, Union

import numpy as np
import yaml
from rich.console import Console
from rich.table import Table

logger = logging.getLogger(__name__)

console = Console(stderr=True)


class OutputFormat(Enum):
    """Output format options."""
    TEXT = "text"
    JSON = "json"
    YAML = "yaml"
    CSV = "csv"


def to_serializable(obj: Any) -> Any:
    """Recursively convert numbers and containers into JSON-ready values."""
    if isinstance(obj, dict):
        return {str(k): to_serializable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_serializable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_serializable(v) for v in obj.tolist()]
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, Path):
        return str(obj)
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (float, np.floating)):
        return _finite_float(float(obj))
    if isinstance(obj, (complex, np.complexfloating)):
        value = complex(obj)
        return {"re": _finite_float(value.real), "im": _finite_float(value.imag)}
    if hasattr(obj, "to_dict"):
        return to_serializable(obj.to_dict())
    return obj


def _finite_float(value: float) -> Union[float, str]:
    # JSON has no inf/nan literals
    if math.isfinite(value):
        return value
    return str(value)


def format_number(value: Any) -> str:
    """CSV cell text for a number."""
    if isinstance(value, bool):
        return str(value)
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, (float, np.floating)):
        return "%.17g" % float(value)
    if isinstance(value, (complex, np.complexfloating)):
        value = complex(value)
        return "%.17g%+.17gj" % (value.real, value.imag)
    return str(value)


class OutputFormatter:
    """Handles formatting of report data in various formats."""

    def __init__(self, format: Union[str, OutputFormat] = OutputFormat.JSON):
        """
        Initialize an output formatter.

        Args:
            format: Output format (text, json, yaml, csv)
        """
        if isinstance(format, str):
            try:
                self.format = OutputFormat(format.lower())
            except ValueError:
                logger.warning(f"Unknown format '{format}', using json")
                self.format = OutputFormat.JSON
        else:
            self.format = format

    def format_data(self, data: Any) -> str:
        """
        Format data according to the selected output format.

        Args:
            data: Data to format (dict, list, or other serializable object)

        Returns:
            Formatted string
        """
        if self.format == OutputFormat.JSON:
            return json.dumps(to_serializable(data), indent=2) + "\n"
        if self.format == OutputFormat.YAML:
            return yaml.safe_dump(to_serializable(data), default_flow_style=False, sort_keys=False)
        if self.format == OutputFormat.CSV:
            return self._format_as_csv(data)
        return self._format_as_text(to_serializable(data))

    def _format_as_text(self, data: Any, indent: int = 0) -> str:
        pad = " " * indent
        if isinstance(data, dict):
            lines = []
            for key, value in data.items():
                if isinstance(value, (dict, list)):
                    lines.append(f"{pad}{key}:")
                    lines.append(self._format_as_text(value, indent + 2))
                else:
                    lines.append(f"{pad}{key}: {value}")
            return "\n".join(lines)
        if isinstance(data, list):
            return "\n".join(
                self._format_as_text(item, indent) if isinstance(item, (dict, list)) else f"{pad}- {item}"
                for item in data
            )
        return f"{pad}{data}"

    def _format_as_csv(self, data: Any) -> str:
        """Format a list of row dicts (or a dict holding ``rows``) as CSV."""
        if isinstance(data, dict) and isinstance(data.get("rows"), list):
            data = data["rows"]
        if not (isinstance(data, list) and all(isinstance(item, dict) for item in data)):
            logger.warning("Cannot format non-tabular data as CSV, falling back to JSON")
            return json.dumps(to_serializable(data), indent=2) + "\n"
        if not data:
            return ""

        fieldnames: List[str] = []
        for item in data:
            for key in item:
                if key not in fieldnames:
                    fieldnames.append(key)

        output = io.StringIO()
        writer = csv.DictWriter(output, fieldnames=fieldnames, lineterminator="\n")
        writer.writeheader()
        for item in data:
            writer.writerow({k: format_number(v) for k, v in item.items()})
        return output.getvalue()


def format_output(data: Any, format: str = "json", file: Optional[TextIO] = None) -> str:
    """
    Format and optionally write data to a stream.

    Args:
        data: Data to format
        format: Output format (text, json, yaml, csv)
        file: File-like object to write to (optional)

    Returns:
        Formatted string
    """
    formatted = OutputFormatter(format).format_data(data)
    if file:
        file.write(formatted)
    return formatted


def infer_format(output_file: str) -> str:
    ext = Path(output_file).suffix.lower()
    if ext in (".yml", ".yaml"):
        return "yaml"
    if ext == ".csv":
        return "csv"
    if ext in (".txt", ".text"):
        return "text"
    return "json"


def save_output(data: Any, output_file: str, format: Optional[str] = None) -> bool:
    """
    Save formatted data to a file.

    Args:
        data: Data to format and save
        output_file: Path to output file
        format: Output format; inferred from the file extension when None

    Returns:
        True if successful, False otherwise
    """
    format = format or infer_format(output_file)
    try:
        Path(output_file).parent.mkdir(parents=True, exist_ok=True)
        with open(output_file, "w", newline="") as f:
            f.write(OutputFormatter(format).format_data(data))
        logger.info(f"Output saved to {output_file} in {format} format")
        return True
    except OSError as e:
        logger.error(f"Error saving output to {output_file}: {e}")
        return False


def print_summary(title: str, rows: List[Dict[str, Any]]) -> None:
    """Render a short human summary table on stderr."""
    if not rows:
        return
    columns: List[str] = []
    for row in rows:
        for key in row:
            if key not in columns:
                columns.append(key)
    table = Table(title=title)
    for column in columns:
        table.add_column(str(column), justify="left" if column in ("check", "verdict") else "right")
    for row in rows:
        cells = [row.get(c, "") for c in columns]
        table.add_row(*(v if isinstance(v, str) else format_number(v) for v in cells))
    console.print(table)
