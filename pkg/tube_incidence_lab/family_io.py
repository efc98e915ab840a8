from fractions import Fraction
from tube_incidence_lab.constants import FamilyKind
from tube_incidence_lab.grid_core import Family
from tube_incidence_lab.grid_core import GridError
from tube_incidence_lab.grid_core import Scale
import os

"""This module contains methods that read and write families in the
text format

    #kind=<squares|tubes|intervals> e=<e> T=<T> c=<num>/<den>
    i0,j0
    i1,j1
    ...

with one element per line as comma-separated indices."""


# The keys expected in a header, in order.
HEADER_KEYS = ("kind", "e", "T", "c")


class FamilyIOError(Exception):
    """The base class for exceptions in this module."""

    def __init__(self, message, path=None, line_number=None):
        if path is not None:
            location = f"{path}" if line_number is None else \
                f"{path}:{line_number}"
            message = f"{location}: {message}"
        super().__init__(message)


def format_header(family):
    """Returns the header line of the given family, without a trailing
    newline."""
    c = family.thickness
    return (
        f"#kind={family.kind} e={family.scale.delta_exp} "
        f"T={family.scale.block_exp} c={c.numerator}/{c.denominator}")


def parse_header(line):
    """Returns the scale, kind, and thickness stored in a header line.

    Args:
        line: A string of the form
              "#kind=<kind> e=<e> T=<T> c=<num>/<den>".

    Returns:
        A tuple (Scale, kind, Fraction).

    Raises:
        FamilyIOError: If the header is malformed.
    """
    line = line.strip()
    if not line.startswith("#"):
        raise FamilyIOError(f"Header {line!r} does not start with '#'.")
    tokens = line[1:].split()
    if len(tokens) != len(HEADER_KEYS):
        raise FamilyIOError(
            f"Header {line!r} does not have {len(HEADER_KEYS)} fields.")
    values = dict()
    for expected_key, token in zip(HEADER_KEYS, tokens):
        key, separator, value = token.partition("=")
        if not separator or key != expected_key:
            raise FamilyIOError(
                f"Header token {token!r} is not of the form "
                f"{expected_key}=<value>.")
        values[key] = value
    kind = values["kind"]
    if kind not in FamilyKind.ALL:
        raise FamilyIOError(f"Header kind {kind!r} is not recognized.")
    try:
        scale = Scale(int(values["e"]), int(values["T"]))
    except (TypeError, ValueError) as e:
        raise FamilyIOError(f"Header scale is invalid. Details: {e}")
    numerator, separator, denominator = values["c"].partition("/")
    try:
        thickness = Fraction(int(numerator), int(denominator))
    except (ValueError, ZeroDivisionError):
        raise FamilyIOError(
            f"Header thickness {values['c']!r} is not of the form "
            f"<num>/<den>.")
    if not separator or thickness <= 0:
        raise FamilyIOError(
            f"Header thickness {values['c']!r} is not a positive fraction.")
    return scale, kind, thickness


def write_family(path, family):
    """Writes the family to the file at the given path, creating parent
    directories as needed.

    Args:
        path: A string path.
        family: A Family.

    Returns:
        None.

    Raises:
        TypeError: If family is not a Family.
    """
    if not isinstance(family, Family):
        raise TypeError(f"Family {family} is not a Family.")
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w") as family_file:
        family_file.write(format_header(family) + "\n")
        for element in family:
            family_file.write(",".join(str(x) for x in element) + "\n")


def read_family(path):
    """Returns the family stored in the file at the given path.

    Args:
        path: A string path.

    Returns:
        A Family.

    Raises:
        FamilyIOError: If the file does not exist or is malformed.
    """
    if not os.path.isfile(path):
        raise FamilyIOError("File does not exist.", path=path)
    with open(path) as family_file:
        lines = family_file.read().splitlines()
    if not lines:
        raise FamilyIOError("File is empty.", path=path)
    try:
        scale, kind, thickness = parse_header(lines[0])
    except FamilyIOError as e:
        raise FamilyIOError(str(e), path=path, line_number=1)
    width = 1 if kind == FamilyKind.INTERVALS else 2
    elements = []
    for line_number, line in enumerate(lines[1:], start=2):
        line = line.strip()
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != width:
            raise FamilyIOError(
                f"Line {line!r} does not have {width} indices.",
                path=path, line_number=line_number)
        try:
            elements.append(tuple(int(part) for part in parts))
        except ValueError:
            raise FamilyIOError(
                f"Line {line!r} is not a list of integers.",
                path=path, line_number=line_number)
    try:
        return Family(scale, kind, elements, thickness)
    except (GridError, ValueError) as e:
        raise FamilyIOError(str(e), path=path)
