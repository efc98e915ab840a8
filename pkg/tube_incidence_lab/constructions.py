from collections import namedtuple
from fractions import Fraction
from tube_incidence_lab.constants import FamilyKind
from tube_incidence_lab.grid_core import Family
from tube_incidence_lab.grid_core import Scale
from tube_incidence_lab.incidence_engine import richness_map
from tube_incidence_lab.incidence_engine import st_ratio
from tube_incidence_lab.set_tools import check_delta_set
from tube_incidence_lab.set_tools import check_katz_tao
from tube_incidence_lab.set_tools import generate_ad_regular
from tube_incidence_lab.set_tools import generate_binary_ad_regular
from tube_incidence_lab.utils import ComputeBudgetError
from tube_incidence_lab.utils import as_fraction
from tube_incidence_lab.utils import dyadic_values
from tube_incidence_lab.utils import validate_positive_int
from tube_incidence_lab.utils import validate_seed
import math
import numpy as np

"""This module contains the explicit sharpness configurations: bushes
rooted on a sparse row of squares, the train track, and random families
that saturate the area bound.

Every construction validates its output with the set checkers and the
richness map and attaches the verdicts to its report."""


class ConstructionError(Exception):
    """The base class for exceptions in this module."""


class ConstructionBudgetError(ConstructionError, ComputeBudgetError):
    """Raised when a construction would exceed the tube budget."""


# The largest number of tubes a construction generates.
MAX_TUBES = 1 << 22

# A generated tube family. The report is a dict of named verdicts and
# measurements; squares and directions are the Families it was built
# from, or None.
Construction = namedtuple(
    "Construction", "tubes report squares directions")

# One row of the bush richness table: the number of squares with
# richness in [r, 2r) against δ^-2 r^-(s+1)/s.
BushRow = namedtuple("BushRow", "r squares expected ratio")


def _validate_delta_exp(e):
    validate_positive_int(e, "Delta exponent")
    if e < 2:
        raise ValueError(f"Delta exponent {e} is less than 2.")


def direction_family(delta_exp, s, seed):
    """Returns an AD-regular (δ,s)-set of slope indices of size
    2^floor(es), built with the smallest block size T dividing e that
    makes s·T integral, or with binary pruning when there is none."""
    s = Fraction(s)
    for block_exp in range(1, delta_exp + 1):
        if delta_exp % block_exp == 0 and (s * block_exp).denominator == 1:
            return generate_ad_regular(Scale(delta_exp, block_exp), s, seed)
    return generate_binary_ad_regular(delta_exp, s, seed)


def bush_example(e, s, seed=0):
    """Returns bushes rooted at a (δ,1-s)-set of 2^(e-floor(es)) squares
    on the bottom row, one tube per root and direction of an AD-regular
    (δ,s)-set Λ of slopes.

    Each tube is the grid tube whose line passes below the root center
    by less than δ. Coinciding snapped tubes are merged and the merge
    count is reported.

    Args:
        e: The delta exponent.
        s: A number in [1/2, 1).
        seed: A nonnegative integer.

    Returns:
        A Construction.
    """
    _validate_delta_exp(e)
    validate_seed(seed)
    s = as_fraction(s, "Exponent s")
    if not Fraction(1, 2) <= s < 1:
        raise ValueError(f"Exponent s {s} is not in [1/2, 1).")
    scale = Scale(e, 1)
    size = scale.size
    keep_exp = math.floor(s * e)
    Lambda = direction_family(e, s, seed)
    roots = generate_binary_ad_regular(e, Fraction(e - keep_exp, e),
                                       seed + 1)
    cols = roots.array[:, 0]
    col, a = np.meshgrid(cols, Lambda.array[:, 0], indexing="ij")
    col, a = col.reshape(-1), a.reshape(-1)
    b = (size - a * (2 * col + 1)) // (2 * size)
    generated = np.stack([a, b], axis=1)
    tubes = Family(scale, FamilyKind.TUBES, generated)
    squares = Family(scale, FamilyKind.SQUARES,
                     np.stack([cols, np.zeros_like(cols)], axis=1))
    richness = richness_map(tubes)
    root_counts = richness.lookup(cols, np.zeros_like(cols))
    histogram = richness.histogram()
    bins = dict(zip(histogram.bins, histogram.counts))
    exponent = float((s + 1) / s)
    table = []
    for r in dyadic_values(2, max(2, (1 << keep_exp) // 4)):
        expected = size ** 2 * r ** -exponent
        found = bins.get(r, 0)
        table.append(BushRow(r, found, expected, found / expected))
    report = {
        "roots": len(squares),
        "directions": len(Lambda),
        "tubes": len(tubes),
        "snap_merges": len(generated) - len(tubes),
        "min_root_richness": int(root_counts.min()),
        "direction_constant": check_delta_set(Lambda, s, 1).achieved_constant,
        "root_constant": check_delta_set(
            roots, Fraction(e - keep_exp, e), 1).achieved_constant,
        "richness_table": tuple(table),
        "st_ratio": st_ratio(tubes).max_ratio,
    }
    return Construction(tubes, report, squares, Lambda)


def train_track(e):
    """Returns 2^(e/2) bushes of 2^(e/2) tubes each. Bush i passes
    through the δ x δ^(1/2) rectangle centered at height i·δ^(1/2) on
    the vertical line x = 1/2; its slopes are a·δ for a < 2^(e/2).

    The tubes form a (δ,1)-Katz-Tao set while their direction set
    concentrates in one δ^(1/2)-interval, and about 1/δ squares reach
    richness 2^(e/2).

    Raises:
        ConstructionError: If e is odd.
    """
    _validate_delta_exp(e)
    if e % 2:
        raise ConstructionError(f"Delta exponent {e} is odd.")
    scale = Scale(e, 1)
    side = 1 << (e // 2)
    a, i = np.meshgrid(np.arange(side, dtype=np.int64),
                       np.arange(side, dtype=np.int64), indexing="ij")
    a, i = a.reshape(-1), i.reshape(-1)
    b = i * side - a // 2
    tubes = Family(scale, FamilyKind.TUBES, np.stack([a, b], axis=1))
    directions = Family(scale, FamilyKind.INTERVALS,
                        np.arange(side, dtype=np.int64))
    counts = richness_map(tubes).nonzero()[2]
    rich = int(((counts >= side // 4) & (counts <= 4 * side)).sum())
    report = {
        "bushes": side,
        "tubes": len(tubes),
        "tube_check": check_katz_tao(tubes, 1, 4),
        "direction_check": check_delta_set(directions, Fraction(1, 2), 1),
        "rich_squares": rich,
        "st_ratio": st_ratio(tubes).max_ratio,
    }
    return Construction(tubes, report, None, directions)


def area_saturation(e, s, t, seed=0):
    """Returns a random family with 2^floor(et) tubes in each direction
    of an AD-regular (δ,s)-set, intercepts drawn uniformly among those
    meeting the unit square, and reports the fraction of grid squares
    with richness at least max(1, r̄/2), r̄ the mean richness.

    The area argument applies when t > 1 - s, where the mean richness is
    of order δ^(1-s-t); the report flags whether it does.

    Args:
        e: The delta exponent.
        s: A number in (0, 1].
        t: A number in [0, 1].
        seed: A nonnegative integer.

    Returns:
        A Construction.

    Raises:
        ConstructionBudgetError: If the family would exceed MAX_TUBES.
    """
    _validate_delta_exp(e)
    validate_seed(seed)
    s = as_fraction(s, "Exponent s")
    t = as_fraction(t, "Exponent t")
    if not 0 < s <= 1:
        raise ValueError(f"Exponent s {s} is not in (0, 1].")
    if not 0 <= t <= 1:
        raise ValueError(f"Exponent t {t} is not in [0, 1].")
    scale = Scale(e, 1)
    size = scale.size
    Lambda = direction_family(e, s, seed)
    per_direction = 1 << math.floor(t * e)
    if per_direction * len(Lambda) > MAX_TUBES:
        raise ConstructionBudgetError(
            f"{per_direction * len(Lambda)} tubes exceed the budget "
            f"{MAX_TUBES}; lower e.")
    rng = np.random.default_rng(seed)
    parts = []
    for a in Lambda.array[:, 0]:
        # Intercepts in [-a, 2^e) give every tube meeting the unit square.
        b = rng.choice(size + int(a), size=per_direction, replace=False) - a
        parts.append(np.stack([np.full(per_direction, a), b], axis=1))
    tubes = Family(scale, FamilyKind.TUBES, np.concatenate(parts))
    richness = richness_map(tubes)
    counts = richness.nonzero()[2]
    mean = richness.total / size ** 2
    threshold = max(1.0, mean / 2)
    report = {
        "directions": len(Lambda),
        "tubes_per_direction": per_direction,
        "tubes": len(tubes),
        "mean_richness": mean,
        "predicted_richness": 2.0 ** (e * float(s + t - 1)),
        "threshold": threshold,
        "covered_fraction": float((counts >= threshold).sum()) / size ** 2,
        "above_critical_t": t > 1 - s,
        "direction_constant": check_delta_set(Lambda, s, 1).achieved_constant,
    }
    return Construction(tubes, report, None, Lambda)
