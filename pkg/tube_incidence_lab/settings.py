from tube_incidence_lab.constants import DEFAULT_OUTPUT_DIR
from tube_incidence_lab.constants import OUTPUT_DIR_ENV_VAR
import configparser
import hashlib
import os

"""This module contains the methods that read the configuration of a
run. Configuration is read from a single INI file; the only environment
variable consulted is the output-directory override."""


# The name of the section holding keys shared by every subcommand.
SHARED_SECTION = "lab"


class SettingsError(Exception):
    """The base class for exceptions in this module."""


class LabSettings(object):
    """The parsed configuration of a run.

    Attributes:
        path: The path to the configuration file, or None.
        parser: A ConfigParser holding the file's contents.
        digest: The SHA-256 hex digest of the file's bytes, or of the
                empty string if no file was given.

    Typical Usage Example:

        settings = read_config("config/st_scan.conf")
        seed = settings.get_int("st-scan", "seed", default=0)
    """

    def __init__(self, path, parser, digest):
        self.path = path
        self.parser = parser
        self.digest = digest

    def has_section(self, section):
        """Returns whether the given section, or the shared section,
        holds any keys."""
        return (
            self.parser.has_section(section) or
            self.parser.has_section(SHARED_SECTION))

    def get(self, section, key, default=None):
        """Returns the string value of the key in the given section,
        falling back to the shared section and then to the default."""
        for name in (section, SHARED_SECTION):
            if self.parser.has_option(name, key):
                value = self.parser.get(name, key).strip()
                if value:
                    return value
        return default

    def get_int(self, section, key, default=None):
        """Returns the integer value of the key, or the default.

        Raises:
            SettingsError: If the stored value is not an integer.
        """
        value = self.get(section, key)
        if value is None:
            return default
        try:
            return int(value)
        except ValueError:
            raise SettingsError(
                f"Key {key} in section [{section}] is not an integer: "
                f"{value}.")

    def get_boolean(self, section, key, default=None):
        """Returns the boolean value of the key, or the default. Accepts
        the spellings of configparser, such as yes, no, true, and 0.

        Raises:
            SettingsError: If the stored value is not a boolean.
        """
        value = self.get(section, key)
        if value is None:
            return default
        try:
            return self.parser.BOOLEAN_STATES[value.lower()]
        except KeyError:
            raise SettingsError(
                f"Key {key} in section [{section}] is not a boolean: "
                f"{value}.")

    def get_int_list(self, section, key, default=None):
        """Returns a list of integers from a comma-separated value, or a
        range written as "lo..hi" (inclusive), or the default.

        Raises:
            SettingsError: If the stored value cannot be parsed.
        """
        value = self.get(section, key)
        if value is None:
            return default
        try:
            if ".." in value:
                lower, upper = value.split("..")
                return list(range(int(lower), int(upper) + 1))
            return [int(part) for part in value.split(",") if part.strip()]
        except ValueError:
            raise SettingsError(
                f"Key {key} in section [{section}] is not a list of "
                f"integers: {value}.")


def read_config(path):
    """Returns the LabSettings stored in the file at the given path. If
    the path is None, returns empty settings.

    Args:
        path: A string path to an INI file, or None.

    Returns:
        A LabSettings object.

    Raises:
        SettingsError: If the file does not exist, cannot be parsed, or
                       holds no sections.
    """
    parser = configparser.ConfigParser()
    if path is None:
        return LabSettings(None, parser, hashlib.sha256(b"").hexdigest())
    if not os.path.isfile(path):
        raise SettingsError(f"Configuration file {path} does not exist.")
    with open(path, "rb") as config_file:
        raw = config_file.read()
    try:
        parser.read_string(raw.decode("utf-8"), source=path)
    except (configparser.Error, UnicodeDecodeError) as e:
        raise SettingsError(
            f"Configuration file {path} could not be parsed. Details: {e}")
    if not parser.sections():
        raise SettingsError(f"Configuration file {path} has no sections.")
    return LabSettings(path, parser, hashlib.sha256(raw).hexdigest())


def output_dir(requested=None):
    """Returns the output directory: the requested one if given, else
    the environment override, else the default."""
    if requested:
        return requested
    override = os.environ.get(OUTPUT_DIR_ENV_VAR, "").strip()
    if override:
        return override
    return DEFAULT_OUTPUT_DIR
