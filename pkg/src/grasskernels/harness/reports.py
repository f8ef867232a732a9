"""Deterministic plain-text reports.

Reports are key=value oriented with bracketed section headers, carry no
timestamps or machine identifiers, and render every float with 17
significant digits, so rerunning an experiment with the same resolved
configuration reproduces the report byte for byte.
"""

import os

FORMAT_VERSION = 1


def format_float(value):
    """Render a float with enough digits to round-trip exactly."""
    return f"{float(value):.17g}"


def format_value(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format_float(value)
    return str(value)


class ReportBuilder:
    """Accumulates sections and renders the final text."""

    def __init__(self, generator):
        self._lines = [f"format_version={FORMAT_VERSION}",
                       f"generator={generator}"]

    def add_section(self, kind, items, label=None):
        """Append a `[kind]` or `[kind "label"]` section of key=value rows."""
        header = f"[{kind}]" if label is None else f'[{kind} "{label}"]'
        self._lines.append("")
        self._lines.append(header)
        for key, value in items:
            self._lines.append(f"{key}={format_value(value)}")

    def add_table(self, label, headers, rows):
        """Append a fixed-width table section for human readers."""
        cells = [list(headers)] + [[str(c) for c in row] for row in rows]
        widths = [max(len(row[i]) for row in cells)
                  for i in range(len(headers))]
        self._lines.append("")
        self._lines.append(f'[table "{label}"]')
        for row in cells:
            rendered = "  ".join(cell.ljust(width)
                                 for cell, width in zip(row, widths))
            self._lines.append(rendered.rstrip())

    def render(self):
        return "\n".join(self._lines) + "\n"


def write_text(path, text):
    """Write text with unix newlines, creating parent directories."""
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(text)
