from tube_incidence_lab import __version__
from tube_incidence_lab.reporting import format_report
from tube_incidence_lab.reporting import loglog_svg
from tube_incidence_lab.reporting import provenance_line
from tube_incidence_lab.reporting import read_csv
from tube_incidence_lab.reporting import write_csv
from tube_incidence_lab.reporting import write_report
from tube_incidence_lab.reporting import write_svg
import os
import tempfile
import unittest

"""A test module for reporting.py."""


class TestCSV(unittest.TestCase):
    """A class for testing write_csv and read_csv."""

    def setUp(self):
        """Set up a temporary directory."""
        directory = tempfile.TemporaryDirectory()
        self.addCleanup(directory.cleanup)
        self.directory = directory.name

    def test_provenance_line(self):
        """Test the provenance comment."""
        self.assertEqual(provenance_line(7, "abc"),
                         f"# tube_incidence_lab {__version__} seed=7 "
                         f"config_sha256=abc")

    def test_write_csv(self):
        """Test that rows are sorted by their first column and written
        under the provenance line and header."""
        path = os.path.join(self.directory, "out", "table.csv")
        write_csv(path, ["e", "ratio", "note"],
                  [(8, 0.5, None), (4, 1.25, "small")], 3, "ff")
        provenance, header, rows = read_csv(path)
        self.assertEqual(provenance, provenance_line(3, "ff"))
        self.assertEqual(header, ["e", "ratio", "note"])
        self.assertEqual(rows, [["4", "1.25", "small"], ["8", "0.5", ""]])

    def test_row_length(self):
        """Test that rows of the wrong length are rejected."""
        path = os.path.join(self.directory, "table.csv")
        with self.assertRaises(ValueError):
            write_csv(path, ["a", "b"], [(1,)], 0, "ff")
        self.assertFalse(os.path.exists(path))


class TestReports(unittest.TestCase):
    """A class for testing format_report and write_report."""

    def test_format_report(self):
        """Test that keys are sorted and floats are shortened."""
        text = format_report({"b": 1 / 3, "a": 2, "c": (1, 2)})
        self.assertEqual(text, "a: 2\nb: 0.333333\nc: (1, 2)\n")

    def test_write_report(self):
        """Test that the report file holds the formatted report."""
        directory = tempfile.TemporaryDirectory()
        self.addCleanup(directory.cleanup)
        path = os.path.join(directory.name, "nested", "report.txt")
        write_report(path, {"ok": True})
        with open(path) as report_file:
            self.assertEqual(report_file.read(), "ok: True\n")


class TestSVG(unittest.TestCase):
    """A class for testing loglog_svg and write_svg."""

    def test_points_and_fit(self):
        """Test that every positive point is drawn with the fit line and
        that the title is escaped."""
        svg = loglog_svg("a < b", [(2, 4), (4, 16), (8, 64), (0, 1)],
                         fit=(2.0, 0.0))
        self.assertTrue(svg.startswith("<svg"))
        self.assertTrue(svg.rstrip().endswith("</svg>"))
        self.assertEqual(svg.count("<circle"), 3)
        self.assertIn("a &lt; b", svg)
        self.assertIn("slope 2.000", svg)

    def test_no_points(self):
        """Test that an empty chart has axes only."""
        svg = loglog_svg("empty", [])
        self.assertNotIn("<polyline", svg)
        self.assertEqual(svg.count("<line"), 2)

    def test_write_svg(self):
        """Test that the chart is written to the given path."""
        directory = tempfile.TemporaryDirectory()
        self.addCleanup(directory.cleanup)
        path = os.path.join(directory.name, "chart.svg")
        write_svg(path, "chart", [(1, 1), (2, 2)])
        with open(path) as svg_file:
            self.assertEqual(svg_file.read(), loglog_svg("chart",
                                                         [(1, 1), (2, 2)]))


if __name__ == "__main__":
    unittest.main()
