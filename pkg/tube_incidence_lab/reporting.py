from tube_incidence_lab import __version__
from xml.sax.saxutils import escape
import csv
import math
import os

"""This module contains the methods that write the artifacts of a run:
CSV tables that open with a provenance comment, self-contained SVG
log-log charts, and key: value text reports."""


# The size of a chart in pixels, and its margin.
CHART_WIDTH = 480
CHART_HEIGHT = 360
CHART_MARGIN = 48


def provenance_line(seed, digest):
    """Returns the provenance comment written at the top of every CSV."""
    return f"# tube_incidence_lab {__version__} seed={seed} " \
        f"config_sha256={digest}"


def _format_cell(value):
    if isinstance(value, float):
        return repr(value)
    if value is None:
        return ""
    return str(value)


def write_csv(path, columns, rows, seed, digest):
    """Writes a CSV file with a provenance line, a header row naming
    every column, and the rows sorted by their first column.

    Args:
        path: The output path; parent directories are created.
        columns: A sequence of column names.
        rows: An iterable of sequences with one value per column.
        seed: The seed of the run.
        digest: The SHA-256 digest of the configuration file.

    Raises:
        ValueError: If a row's length does not match the columns.
    """
    rows = [list(row) for row in rows]
    for row in rows:
        if len(row) != len(columns):
            raise ValueError(
                f"Row {row} does not have {len(columns)} columns.")
    rows.sort(key=lambda row: row[0])
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w", newline="") as csv_file:
        csv_file.write(provenance_line(seed, digest) + "\n")
        writer = csv.writer(csv_file, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_format_cell(value) for value in row])


def read_csv(path):
    """Returns the provenance line, the header, and the rows of a CSV
    file written by write_csv, with every value as a string."""
    with open(path, newline="") as csv_file:
        provenance = csv_file.readline().rstrip("\n")
        reader = csv.reader(csv_file)
        header = next(reader)
        return provenance, header, [row for row in reader]


def format_report(report):
    """Returns the lines "key: value" of a report dict, in key order.
    Namedtuples and tuples of namedtuples are written inline."""
    lines = []
    for key in sorted(report):
        value = report[key]
        if isinstance(value, float):
            value = f"{value:.6g}"
        lines.append(f"{key}: {value}")
    return "\n".join(lines) + "\n"


def write_report(path, report):
    """Writes format_report(report) to the given path."""
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w") as report_file:
        report_file.write(format_report(report))


def loglog_svg(title, points, fit=None, x_label="X", y_label="Y"):
    """Returns an SVG document plotting the given positive (X, Y) points
    on log2 axes, joined by a line, with an optional fitted slope line
    and annotation.

    Args:
        title: The chart title.
        points: A sequence of (X, Y) pairs with X, Y > 0.
        fit: An optional (slope, intercept) pair in log2 coordinates.
        x_label: The label of the horizontal axis.
        y_label: The label of the vertical axis.

    Returns:
        A string.
    """
    points = sorted((math.log2(x), math.log2(y)) for x, y in points
                    if x > 0 and y > 0)
    width, height, margin = CHART_WIDTH, CHART_HEIGHT, CHART_MARGIN
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2}" y="{margin / 2}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="14">{escape(title)}</text>',
        f'<line x1="{margin}" y1="{height - margin}" x2="{width - margin}" '
        f'y2="{height - margin}" stroke="black"/>',
        f'<line x1="{margin}" y1="{margin}" x2="{margin}" '
        f'y2="{height - margin}" stroke="black"/>',
        f'<text x="{width / 2}" y="{height - 12}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12">log2 {escape(x_label)}'
        f'</text>',
        f'<text x="14" y="{height / 2}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12" transform="rotate(-90 14 '
        f'{height / 2})">log2 {escape(y_label)}</text>',
    ]
    if points:
        xs = [x for x, _ in points]
        ys = [y for _, y in points]
        x_lo, x_hi = min(xs), max(xs)
        y_lo, y_hi = min(ys), max(ys)
        if fit is not None:
            y_lo = min(y_lo, fit[0] * x_lo + fit[1], fit[0] * x_hi + fit[1])
            y_hi = max(y_hi, fit[0] * x_lo + fit[1], fit[0] * x_hi + fit[1])
        x_span = (x_hi - x_lo) or 1.0
        y_span = (y_hi - y_lo) or 1.0

        def px(x):
            return margin + (x - x_lo) / x_span * (width - 2 * margin)

        def py(y):
            return height - margin - (y - y_lo) / y_span * \
                (height - 2 * margin)

        path = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in points)
        parts.append(f'<polyline points="{path}" fill="none" '
                     f'stroke="steelblue" stroke-width="2"/>')
        for x, y in points:
            parts.append(f'<circle cx="{px(x):.2f}" cy="{py(y):.2f}" r="3" '
                         f'fill="steelblue"/>')
        if fit is not None:
            slope, intercept = fit
            parts.append(
                f'<line x1="{px(x_lo):.2f}" y1="{py(slope * x_lo + intercept):.2f}" '
                f'x2="{px(x_hi):.2f}" y2="{py(slope * x_hi + intercept):.2f}" '
                f'stroke="firebrick" stroke-dasharray="6 4"/>')
            parts.append(
                f'<text x="{width - margin}" y="{margin + 16}" '
                f'text-anchor="end" font-family="sans-serif" font-size="12" '
                f'fill="firebrick">slope {slope:.3f}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def write_svg(path, title, points, fit=None, x_label="X", y_label="Y"):
    """Writes loglog_svg(...) to the given path."""
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w") as svg_file:
        svg_file.write(loglog_svg(title, points, fit, x_label, y_label))
