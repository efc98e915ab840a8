from collections import namedtuple
from fractions import Fraction
from tube_incidence_lab.constants import FamilyKind
from tube_incidence_lab.constants import RELATIVE_TOLERANCE
from tube_incidence_lab.grid_core import Family
from tube_incidence_lab.set_tools import SetToolsError
from tube_incidence_lab.set_tools import ToleranceProfile
from tube_incidence_lab.set_tools import branching
from tube_incidence_lab.set_tools import cell_ratio_report
from tube_incidence_lab.set_tools import group_rows
from tube_incidence_lab.utils import CheckFailedError
from tube_incidence_lab.utils import as_fraction
from tube_incidence_lab.utils import parallel_map
import math
import numpy as np

"""This module contains the Lipschitz multiscale decompositions: the
lower-convex-hull decomposition of a nondecreasing Lipschitz function,
the good-interval partition built from it, and its application to the
branching profile of a uniform family.

Functions are sampled on the grid k/n, k = 0..n, and every inequality
returned to the caller has been checked in exact rational arithmetic."""


# The number of grid points per block level when a branching profile is
# interpolated for decompose_family.
POINTS_PER_LEVEL = 128


class MultiscaleError(Exception):
    """The base class for exceptions in this module."""


class GoodIntervalCheckError(MultiscaleError, CheckFailedError):
    """Raised when a good-interval postcondition does not hold."""


class LipschitzFn(object):
    """A nondecreasing C-Lipschitz function on [0, 1], sampled on the
    grid k/n.

    Attributes:
        n: The grid size.
        values: A tuple of n + 1 Fractions f(k/n).
        lipschitz: The Lipschitz constant C, a Fraction.

    Typical Usage Example:

        f = LipschitzFn(4, [0, 0, Fraction(1, 4), Fraction(1, 2), 1])
        decomposition = lip_decompose(f, Fraction(1))
    """

    def __init__(self, n, values, lipschitz=1):
        """Validates and stores the samples.

        Raises:
            MultiscaleError: If the samples are decreasing, negative at
                             0, or increase faster than C/n.
            TypeError: If one or more inputs has an unexpected type.
            ValueError: If n or C is out of range.
        """
        if isinstance(n, bool) or not isinstance(n, int):
            raise TypeError(f"Grid size {n} is not an integer.")
        if n < 1:
            raise ValueError(f"Grid size {n} is not positive.")
        lipschitz = as_fraction(lipschitz, "Lipschitz constant")
        if lipschitz <= 0:
            raise ValueError(
                f"Lipschitz constant {lipschitz} is not positive.")
        values = tuple(as_fraction(v, "Sample") for v in values)
        if len(values) != n + 1:
            raise MultiscaleError(
                f"Expected {n + 1} samples, received {len(values)}.")
        if values[0] < 0:
            raise MultiscaleError(f"f(0) = {values[0]} is negative.")
        step = lipschitz / n
        for k in range(n):
            increment = values[k + 1] - values[k]
            if not 0 <= increment <= step:
                raise MultiscaleError(
                    f"Increment {increment} at k={k} is not in "
                    f"[0, {step}].")
        self.n = n
        self.values = values
        self.lipschitz = lipschitz

    @classmethod
    def from_samples(cls, values, n, lipschitz=1):
        """Returns the function whose increments are those of the given
        samples clamped into [0, C/n], starting from max(values[0], 0).
        Used for float-derived samples."""
        lipschitz = as_fraction(lipschitz, "Lipschitz constant")
        raw = [Fraction(v) for v in values]
        step = lipschitz / n
        clamped = [max(raw[0], Fraction(0))]
        for k in range(1, len(raw)):
            increment = min(max(raw[k] - raw[k - 1], Fraction(0)), step)
            clamped.append(clamped[-1] + increment)
        return cls(n, clamped, lipschitz)

    def at(self, k):
        """Returns f(k/n)."""
        return self.values[k]

    def __repr__(self):
        return f"LipschitzFn(n={self.n}, lipschitz={self.lipschitz})"


# The output of lip_decompose. Vertices are grid indices of the
# breakpoints a_j = k/n; slopes are the σ_j; tau is the hull sampling
# step and slack the 2Cτ allowance of the lower bound.
LipDecomposition = namedtuple(
    "LipDecomposition", "vertices breakpoints slopes tau slack")

# The output of good_intervals. Vertices are the grid indices of the
# breakpoints A_l.
ScalePartition = namedtuple(
    "ScalePartition",
    "breakpoints slopes tolerance_used vertices decomposition")

# One level of a decompose_family report.
LevelReport = namedtuple(
    "LevelReport",
    "start_level end_level slope dimension parents max_constant "
    "nominal_constant min_children max_children expected_children")

# The output of decompose_family.
FamilyDecomposition = namedtuple(
    "FamilyDecomposition",
    "partition levels profile growth_ok top_slope_ok")


def _validate_function(f):
    if not isinstance(f, LipschitzFn):
        raise TypeError(f"Function {f} is not a LipschitzFn.")


def _lower_hull(f, indices):
    """Returns the vertices of the lower convex hull of the points
    (k, f(k/n)), k in indices, with collinear points removed."""
    hull = []
    for k in indices:
        while len(hull) >= 2:
            k1, k2 = hull[-2], hull[-1]
            cross = ((f.at(k2) - f.at(k1)) * (k - k1) -
                     (f.at(k) - f.at(k1)) * (k2 - k1))
            if cross >= 0:
                hull.pop()
            else:
                break
        hull.append(k)
    return hull


def _slope(f, k1, k2):
    return (f.at(k2) - f.at(k1)) * f.n / (k2 - k1)


def lip_decompose(f, eps, min_gap=None, align=1):
    """Decomposes [0, 1] into intervals [a_j, a_{j+1}] with slopes σ_j
    such that f stays above its piecewise-linear minorant.

    The function is sampled every h grid points, h the smallest multiple
    of align with h/n >= max(ε/(4C), min_gap); if the final gap is
    shorter than h, the last interior sample is dropped. The
    decomposition is the lower convex hull of these samples, so that:
    (i) a_{j+1} - a_j >= τ = h/n and 0 <= σ_1 < σ_2 < ... <= C;
    (ii) Σ σ_j (a_{j+1} - a_j) telescopes exactly at hull vertices;
    (iii) f(x) >= f(a_j) + σ_j (x - a_j) - 2Cτ on every grid x of
    [a_j, a_{j+1}]. Item (iii) is checked before returning.

    Args:
        f: A LipschitzFn.
        eps: A positive number.
        min_gap: An optional lower bound on the interval lengths.
        align: A positive integer; every breakpoint is a multiple of
               align grid points (or n).

    Returns:
        A LipDecomposition.

    Raises:
        MultiscaleError: If the grid is too coarse for eps, or if the
                         sampling step exceeds n.
        GoodIntervalCheckError: If item (iii) fails.
        TypeError: If one or more inputs has an unexpected type.
        ValueError: If one or more inputs is out of range.
    """
    _validate_function(f)
    eps = as_fraction(eps, "Epsilon")
    if eps <= 0:
        raise ValueError(f"Epsilon {eps} is not positive.")
    if isinstance(align, bool) or not isinstance(align, int):
        raise TypeError(f"Alignment {align} is not an integer.")
    if align < 1:
        raise ValueError(f"Alignment {align} is not positive.")
    n, C = f.n, f.lipschitz
    if Fraction(1, n) > eps / (4 * C):
        raise MultiscaleError(
            f"Grid spacing 1/{n} exceeds eps/(4C) = {eps / (4 * C)}; the "
            f"grid is too coarse.")
    target = n * eps / (4 * C)
    if min_gap is not None:
        target = max(target, n * as_fraction(min_gap, "Minimum gap"))
    step = align * max(1, math.ceil(target / align))
    if step > n:
        raise MultiscaleError(
            f"Sampling step {step} exceeds the grid size {n}.")
    indices = list(range(0, n, step))
    if n - indices[-1] < step and len(indices) > 1:
        indices.pop()
    indices.append(n)
    vertices = _lower_hull(f, indices)
    slopes = tuple(_slope(f, k1, k2) for k1, k2 in zip(vertices, vertices[1:]))
    tau = Fraction(step, n)
    slack = 2 * C * tau
    for j, (k1, k2) in enumerate(zip(vertices, vertices[1:])):
        for k in range(k1, k2 + 1):
            minorant = f.at(k1) + slopes[j] * Fraction(k - k1, n)
            if f.at(k) < minorant - slack:
                raise GoodIntervalCheckError(
                    f"Hull lower bound fails at x={k}/{n} on piece {j}.")
    breakpoints = tuple(Fraction(k, n) for k in vertices)
    return LipDecomposition(tuple(vertices), breakpoints, slopes, tau, slack)


def _slope_class(slope, eps, classes):
    """Returns the index k of the slope class [εk, ε(k+1)); the top
    class includes its right endpoint and everything above it."""
    return min(math.floor(slope / eps), classes - 1)


def _runs(decomposition, eps, classes):
    """Groups consecutive hull pieces of equal slope class into runs.
    Returns a list of (first_vertex, last_vertex, class, length)."""
    runs = []
    vertices = decomposition.vertices
    for j, slope in enumerate(decomposition.slopes):
        k = _slope_class(slope, eps, classes)
        if runs and runs[-1][2] == k:
            first, _, _, _ = runs[-1]
            runs[-1] = (first, vertices[j + 1], k, None)
        else:
            runs.append((vertices[j], vertices[j + 1], k, None))
    return [(a, b, k, b - a) for a, b, k, _ in runs]


def _merge_runs(runs, eps):
    """Returns the anchors and the (first run, last run) span merged into
    each, in order of position.

    The longest unassigned run becomes the next anchor and absorbs the
    contiguous unassigned runs on either side that are shorter than ε²
    times its length. This repeats until every run is assigned. Ties go
    to the leftmost run."""
    threshold = eps * eps
    owner = [None] * len(runs)
    spans = dict()
    for anchor in sorted(range(len(runs)), key=lambda i: (-runs[i][3], i)):
        if owner[anchor] is not None:
            continue
        owner[anchor] = anchor
        bound = threshold * runs[anchor][3]
        first = last = anchor
        while (first > 0 and owner[first - 1] is None and
               runs[first - 1][3] < bound):
            first = first - 1
            owner[first] = anchor
        while (last < len(runs) - 1 and owner[last + 1] is None and
               runs[last + 1][3] < bound):
            last = last + 1
            owner[last] = anchor
        spans[anchor] = (first, last)
    return [(a, spans[a][0], spans[a][1]) for a in sorted(spans)]


def _check_partition(f, vertices, slopes, eps, eps0, slack):
    n = f.n
    min_length = eps0 / eps
    for l, (k1, k2) in enumerate(zip(vertices, vertices[1:])):
        length = Fraction(k2 - k1, n)
        if length < min_length:
            raise GoodIntervalCheckError(
                f"Interval {l} has length {length} below eps0/eps = "
                f"{min_length}.")
        t = slopes[l]
        for k in range(k1, k2 + 1):
            lower = (f.at(k1) + t * Fraction(k - k1, n) - eps * length -
                     slack)
            if f.at(k) < lower:
                raise GoodIntervalCheckError(
                    f"Lower bound fails at x={k}/{n} on interval {l}.")
        if f.at(k2) > f.at(k1) + (t + 3 * eps) * length:
            raise GoodIntervalCheckError(
                f"Growth bound fails on interval {l}: f rises by "
                f"{f.at(k2) - f.at(k1)} over length {length}.")
    if slopes[0] > f.at(n) - f.at(0) + eps:
        raise GoodIntervalCheckError(
            f"First slope {slopes[0]} exceeds f(1) - f(0) + eps = "
            f"{f.at(n) - f.at(0) + eps}.")
    for t1, t2 in zip(slopes, slopes[1:]):
        if not t1 < t2:
            raise GoodIntervalCheckError(
                f"Slopes {t1} and {t2} are not strictly increasing.")


def good_intervals(f, eps, eps0=None, align=1):
    """Partitions [0, 1] into intervals [A_l, A_{l+1}] with slopes
    0 <= t_1 < ... < t_L such that, on every interval,
    (a) A_{l+1} - A_l >= ε₀/ε;
    (b) f(x) >= f(A_l) + t_l (x - A_l) - ε (A_{l+1} - A_l) - 2Cτ;
    (c) f(A_{l+1}) <= f(A_l) + (t_l + 3ε)(A_{l+1} - A_l);
    and (d) t_1 <= f(1) - f(0) + ε. Every condition is checked in exact
    arithmetic before the partition is returned.

    The hull pieces of lip_decompose are sorted into slope classes
    [εk, ε(k+1)) and grouped into maximal runs; the runs are merged
    around anchors as described in _merge_runs, and each merged
    interval takes the lower endpoint of its anchor's class as slope.

    Args:
        f: A LipschitzFn with Lipschitz constant at most 1.
        eps: A number in (0, 1/2).
        eps0: An optional override of ε₀ = ε^(2/ε); the value used is
              clamped below by 4/n.
        align: Breakpoints fall on multiples of align grid points.

    Returns:
        A ScalePartition.

    Raises:
        GoodIntervalCheckError: If a postcondition fails.
        MultiscaleError: If the grid is too coarse for eps.
        TypeError: If one or more inputs has an unexpected type.
        ValueError: If one or more inputs is out of range.
    """
    _validate_function(f)
    eps = as_fraction(eps, "Epsilon")
    if not 0 < eps < Fraction(1, 2):
        raise ValueError(f"Epsilon {eps} is not in (0, 1/2).")
    if f.lipschitz > 1:
        raise ValueError(
            f"Lipschitz constant {f.lipschitz} is greater than 1.")
    try:
        tolerance = ToleranceProfile.for_grid(eps, f.n, eps0=eps0)
    except SetToolsError as e:
        raise MultiscaleError(str(e))
    decomposition = lip_decompose(
        f, tolerance.eps0, min_gap=tolerance.psi, align=align)
    classes = math.floor(1 / eps)
    runs = _runs(decomposition, eps, classes)
    vertices, slopes = [0], []
    for anchor, first, last in _merge_runs(runs, eps):
        vertices.append(runs[last][1])
        slopes.append(eps * runs[anchor][2])
    vertices[0] = runs[0][0]
    _check_partition(f, vertices, slopes, eps, tolerance.eps0,
                     decomposition.slack)
    breakpoints = tuple(Fraction(k, f.n) for k in vertices)
    return ScalePartition(breakpoints, tuple(slopes), tolerance,
                          tuple(vertices), decomposition)


def _direction_family(F):
    """Returns the family used to build the branching profile: F itself
    for intervals and squares, and the slope directions for tubes."""
    if F.kind != FamilyKind.TUBES:
        return F
    slopes = np.minimum(F.array[:, 0], F.scale.size - 1)
    return Family(F.scale, FamilyKind.INTERVALS, slopes)


def _level_report(F, start, end, slope):
    """Returns the worst child-set constant over the parents at block
    level start, each parent's children at level end rescaled to a unit
    cell."""
    e, T = F.scale.delta_exp, F.scale.block_exp
    d = F.ambient_dimension
    children, _, _ = group_rows(F.array >> (e - end * T))
    depth = (end - start) * T
    parents, parent_of_child, counts = group_rows(children >> depth)
    local = children - (parents[parent_of_child] << depth)
    s = float(slope) * d
    worst = 0.0
    for p in range(len(parents)):
        ratio, _, _ = cell_ratio_report(local[parent_of_child == p], depth, s)
        worst = max(worst, ratio)
    expected = 2.0 ** (depth * s)
    return worst, int(counts.min()), int(counts.max()), expected, \
        len(parents)


def decompose_family(F, eps, threads=1):
    """Applies good_intervals to the branching profile of a uniform
    family and reports, for each interval [A_l, A_{l+1}], how well the
    children of every parent at scale δ^{A_l} form a
    (δ^{A_{l+1}-A_l}, t_l, C_l)-set.

    The profile sample at level j is f(j/m) = β(j)/(m·d), interpolated
    linearly onto POINTS_PER_LEVEL grid points per level, so that the
    breakpoints fall on block levels.

    Args:
        F: A nonempty, exactly uniform Family. Tube families are
           decomposed through their slope directions.
        eps: A number in (0, 1/2).
        threads: The number of worker threads used per level.

    Returns:
        A FamilyDecomposition with the partition, a LevelReport per
        interval, the profile, and the outcomes of the growth check
        (β rises by at most (t_l + 3ε)·len per interval, measured on
        the unclamped profile) and the top-slope check
        t_1 <= log_{1/δ}|F|/d + ε.

    Raises:
        MultiscaleError: If F is not uniform.
        GoodIntervalCheckError: If a postcondition fails.
    """
    if not isinstance(F, Family):
        raise TypeError(f"Family {F} is not a Family.")
    family = _direction_family(F)
    try:
        profile = branching(family)
    except SetToolsError as e:
        raise MultiscaleError(str(e))
    m, d = family.scale.levels, family.ambient_dimension
    q = POINTS_PER_LEVEL
    coarse = [value / (m * d) for value in profile.values]
    samples = []
    for k in range(m * q + 1):
        j, r = divmod(k, q)
        if j == m:
            samples.append(coarse[m])
        else:
            samples.append(coarse[j] + (coarse[j + 1] - coarse[j]) * r / q)
    f = LipschitzFn.from_samples(samples, m * q)
    partition = good_intervals(f, eps, align=q)
    levels = [k // q for k in partition.vertices]

    def report(index):
        start, end = levels[index], levels[index + 1]
        worst, low, high, expected, parents = _level_report(
            family, start, end, partition.slopes[index])
        depth_exp = (end - start) * family.scale.block_exp
        nominal = 2.0 ** (depth_exp * float(3 * partition.tolerance_used.eps))
        return LevelReport(start, end, partition.slopes[index], d, parents,
                           worst, nominal, low, high, expected)

    reports = parallel_map(report, range(len(levels) - 1), threads=threads)
    growth_ok = True
    for index, (start, end) in enumerate(zip(levels, levels[1:])):
        rise = float(coarse[end] - coarse[start])
        allowed = float((partition.slopes[index] + 3 * as_fraction(eps)) *
                        Fraction(end - start, m))
        growth_ok = growth_ok and rise <= allowed * (1 + RELATIVE_TOLERANCE)
    top = math.log2(len(family)) / (family.scale.delta_exp * d)
    top_slope_ok = float(partition.slopes[0]) <= \
        top + float(as_fraction(eps)) + RELATIVE_TOLERANCE
    return FamilyDecomposition(partition, reports, profile, growth_ok,
                               top_slope_ok)
