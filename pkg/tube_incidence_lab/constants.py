from enum import Enum
from fractions import Fraction

"""This module contains constants referenced by the application."""


class FamilyKind(object):
    """Names of the kinds of families stored in a Family."""

    INTERVALS = "intervals"
    SQUARES = "squares"
    TUBES = "tubes"

    ALL = (INTERVALS, SQUARES, TUBES)


class LabExitCodes(Enum):
    """Exit codes for the possible outcomes of a subcommand."""

    OK = 0
    CHECK_FAILED = 1
    INVALID_INPUT = 2
    BUDGET_EXCEEDED = 3


class Subcommand(object):
    """Names of the subcommands accepted by the command-line runner."""

    GEN = "gen"
    CHECK = "check"
    INCIDENCE = "incidence"
    ST_SCAN = "st-scan"
    DECOMPOSE = "decompose"
    UNIFORMIZE = "uniformize"
    AUGMENT = "augment"
    TWO_ENDS = "two-ends"
    HIGHLOW = "highlow"
    ENERGY = "energy"
    L6 = "l6"
    SHARPNESS = "sharpness"


# The default thickness factor c of a tube, in units of δ.
DEFAULT_THICKNESS = Fraction(1)
# The ambient dimension of each family kind.
AMBIENT_DIMENSION = {
    FamilyKind.INTERVALS: 1,
    FamilyKind.SQUARES: 2,
    FamilyKind.TUBES: 2,
}
# The largest delta exponent for which richness is counted on a dense grid.
DENSE_RICHNESS_MAX_EXP = 12
# The largest delta exponent accepted by the Fourier split.
HIGHLOW_MAX_EXP = 12
# The number of tubes swept per vectorized batch.
TUBE_BATCH_SIZE = 256
# The largest number of triples enumerated by the energy computation.
ENERGY_MAX_TRIPLES = 10 ** 8
# The number of candidates drawn per accepted element before rejection
# sampling gives up.
FROSTMAN_ATTEMPTS_PER_ELEMENT = 64
# The implicit constant of the augmentation postconditions.
DEFAULT_AUGMENT_CONSTANT = 4
# The default number of resampling attempts of an augmentation.
DEFAULT_RETRIES = 5
# The default constant of the heavy-ball search.
DEFAULT_HEAVY_BALL_CONSTANT = Fraction(1, 8)
# The exponent coefficient κ in the two-ends allowance δ^{-κε³}.
DEFAULT_TWO_ENDS_EXPONENT = 5
# The relative tolerance used when comparing floating ratios to bounds.
RELATIVE_TOLERANCE = 1e-9
# The name of the environment variable overriding the output directory.
OUTPUT_DIR_ENV_VAR = "TUBE_LAB_OUTPUT_DIR"
# The default output directory.
DEFAULT_OUTPUT_DIR = "lab_output"
