from tube_incidence_lab.constants import DEFAULT_OUTPUT_DIR
from tube_incidence_lab.constants import OUTPUT_DIR_ENV_VAR
from tube_incidence_lab.settings import SettingsError
from tube_incidence_lab.settings import output_dir
from tube_incidence_lab.settings import read_config
from unittest.mock import patch
import hashlib
import os
import tempfile
import unittest

"""A test module for settings.py."""


class TestReadConfig(unittest.TestCase):
    """A class for testing read_config and LabSettings."""

    def setUp(self):
        """Set up a temporary directory."""
        directory = tempfile.TemporaryDirectory()
        self.addCleanup(directory.cleanup)
        self.directory = directory.name

    def write_config(self, text):
        """Write a configuration file and return its path."""
        path = os.path.join(self.directory, "lab.conf")
        with open(path, "w") as config_file:
            config_file.write(text)
        return path

    def test_missing_empty_and_malformed(self):
        """Test that missing, empty, and malformed files raise
        SettingsError."""
        with self.assertRaises(SettingsError):
            read_config(os.path.join(self.directory, "missing.conf"))
        with self.assertRaises(SettingsError):
            read_config(self.write_config(""))
        with self.assertRaises(SettingsError):
            read_config(self.write_config("seed = 3\n"))

    def test_values_and_fallback(self):
        """Test that keys fall back to the shared section and then to
        the default."""
        path = self.write_config(
            "[lab]\nseed = 9\nthreads = 2\n\n"
            "[st-scan]\nseed = 4\ne = 6..8\ns = 1/2\n")
        settings = read_config(path)
        self.assertEqual(settings.get_int("st-scan", "seed"), 4)
        self.assertEqual(settings.get_int("st-scan", "threads"), 2)
        self.assertEqual(settings.get_int("energy", "seed"), 9)
        self.assertEqual(settings.get("st-scan", "s"), "1/2")
        self.assertEqual(settings.get_int_list("st-scan", "e"), [6, 7, 8])
        self.assertIsNone(settings.get("st-scan", "curve"))
        self.assertEqual(settings.get_int("st-scan", "retries", 5), 5)
        self.assertTrue(settings.has_section("energy"))

    def test_digest(self):
        """Test that the digest is the SHA-256 of the file's bytes."""
        text = "[gen]\ne = 8\n"
        settings = read_config(self.write_config(text))
        self.assertEqual(settings.digest,
                         hashlib.sha256(text.encode("utf-8")).hexdigest())

    def test_bad_values(self):
        """Test that unparseable integers raise SettingsError."""
        settings = read_config(self.write_config(
            "[gen]\ne = eight\nlist = 1,x\n"))
        with self.assertRaises(SettingsError):
            settings.get_int("gen", "e")
        with self.assertRaises(SettingsError):
            settings.get_int_list("gen", "list")

    def test_booleans(self):
        """Test that configparser boolean spellings are parsed and that
        other values raise SettingsError."""
        settings = read_config(self.write_config(
            "[augment]\nlog_loss = no\nmode = rigid\n"))
        self.assertFalse(settings.get_boolean("augment", "log_loss"))
        self.assertTrue(settings.get_boolean("augment", "missing", True))
        with self.assertRaises(SettingsError):
            settings.get_boolean("augment", "mode")

    def test_comma_list(self):
        """Test that comma-separated lists are parsed."""
        settings = read_config(self.write_config("[l6]\nk = 4, 5,6\n"))
        self.assertEqual(settings.get_int_list("l6", "k"), [4, 5, 6])


class TestOutputDir(unittest.TestCase):
    """A class for testing output_dir."""

    def test_precedence(self):
        """Test that the requested directory beats the environment
        override, which beats the default."""
        with patch.dict(os.environ, {OUTPUT_DIR_ENV_VAR: "from_env"}):
            self.assertEqual(output_dir("requested"), "requested")
            self.assertEqual(output_dir(), "from_env")
        environment = {k: v for k, v in os.environ.items()
                       if k != OUTPUT_DIR_ENV_VAR}
        with patch.dict(os.environ, environment, clear=True):
            self.assertEqual(output_dir(), DEFAULT_OUTPUT_DIR)


if __name__ == "__main__":
    unittest.main()
