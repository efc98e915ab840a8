from collections import namedtuple
from fractions import Fraction
from tube_incidence_lab.constants import DEFAULT_THICKNESS
from tube_incidence_lab.constants import DEFAULT_TWO_ENDS_EXPONENT
from tube_incidence_lab.constants import FamilyKind
from tube_incidence_lab.constants import RELATIVE_TOLERANCE
from tube_incidence_lab.grid_core import Family
from tube_incidence_lab.grid_core import Scale
from tube_incidence_lab.grid_core import covering_number
from tube_incidence_lab.grid_core import incident_row_range
from tube_incidence_lab.multiscale import LipschitzFn
from tube_incidence_lab.multiscale import MultiscaleError
from tube_incidence_lab.multiscale import POINTS_PER_LEVEL
from tube_incidence_lab.multiscale import good_intervals
from tube_incidence_lab.set_tools import check_delta_set
from tube_incidence_lab.set_tools import generate_ad_regular
from tube_incidence_lab.set_tools import group_rows
from tube_incidence_lab.utils import CheckFailedError
from tube_incidence_lab.utils import as_fraction
from tube_incidence_lab.utils import parallel_map
import math
import numpy as np

"""This module contains the two-ends predicate, the covering-number
lower bound, the two-ends refinement of a tube/square system, and the
dichotomy audit of a system of (δ,s)-bushes.

Balls are Chebyshev balls |q - p|_∞ < ρ centered at the elements
themselves; a Euclidean ball of radius ρ lies in one of these, and one
of these lies in a Euclidean ball of radius 2ρ."""


# The default constant of the mass and density postconditions of
# two_ends_refine.
DEFAULT_REFINE_CONSTANT = 16


class TwoEndsError(Exception):
    """The base class for exceptions in this module."""


class TwoEndsCheckError(TwoEndsError, CheckFailedError):
    """Raised when a refinement postcondition does not hold."""


# The output of is_two_ends. The witness is the worst ball.
TwoEndsReport = namedtuple(
    "TwoEndsReport", "ok worst_rho_exp worst_center worst_ratio")

# The output of covering_lower_check. Table rows are
# (rho_exp, covering number, ratio to ρ^-s); slack_exponent is the
# smallest x with |P|_ρ >= ρ^-s δ^x at every ρ.
CoveringReport = namedtuple(
    "CoveringReport", "min_ratio worst_rho_exp slack_exponent table")

# The number of incident pairs after one refinement stage, with both
# sides of the double-count identity.
StageReport = namedtuple("StageReport", "name pairs square_side tube_side")

# The output of two_ends_refine.
RefineResult = namedtuple(
    "RefineResult",
    "rho_tilde_exp system segment_ids stages partition scale_fallback "
    "two_ends_constant mass_ratio mass_constant density_constant "
    "scale_ok degenerate")

# The output of dichotomy_audit.
AuditReport = namedtuple(
    "AuditReport",
    "item item1_ratio item1_tolerance item1_holds item2_delta_exp "
    "item2_fraction item2_holds hypothesis_constant richness "
    "richness_spread")


class TubeSquareSystem(object):
    """A set of squares P with, for each p, a family T_p of tubes
    meeting p, stored as the incident pairs (p, T).

    Attributes:
        scale: The Scale of the squares and tubes.
        thickness: The tube thickness factor c.
        pairs: A read-only integer array of rows (col, row, a, b),
               sorted and deduplicated.

    Typical Usage Example:

        system = spread_bush_system(Scale(8, 2), Fraction(1, 2), 0)
        square_side, tube_side = system.double_count()
    """

    def __init__(self, scale, pairs, thickness=DEFAULT_THICKNESS):
        """Validates and stores the incident pairs.

        Raises:
            TwoEndsError: If a tube does not meet its square.
        """
        if not isinstance(scale, Scale):
            raise TypeError(f"Scale {scale} is not a Scale.")
        pairs = np.asarray(pairs, dtype=np.int64)
        if pairs.size == 0:
            pairs = np.zeros((0, 4), dtype=np.int64)
        if pairs.ndim != 2 or pairs.shape[1] != 4:
            raise TwoEndsError("Pairs must be rows (col, row, a, b).")
        if len(pairs):
            pairs = np.unique(pairs, axis=0)
            Family(scale, FamilyKind.SQUARES, pairs[:, :2])
            Family(scale, FamilyKind.TUBES, pairs[:, 2:], thickness)
            lo, hi = incident_row_range(
                scale.size, pairs[:, 2], pairs[:, 3],
                as_fraction(thickness), pairs[:, 0])
            bad = (pairs[:, 1] < lo) | (pairs[:, 1] > hi)
            if bad.any():
                row = tuple(int(x) for x in pairs[np.argmax(bad)])
                raise TwoEndsError(
                    f"Tube {row[2:]} does not meet square {row[:2]}.")
        pairs.setflags(write=False)
        self.scale = scale
        self.thickness = as_fraction(thickness)
        self.pairs = pairs

    @classmethod
    def from_tube_sets(cls, scale, tube_sets, thickness=DEFAULT_THICKNESS):
        """Returns the system with the given dict mapping square index
        tuples to tube Families."""
        rows = []
        for (col, row), tubes in tube_sets.items():
            for a, b in tubes:
                rows.append((col, row, a, b))
        return cls(scale, rows, thickness)

    def __len__(self):
        return len(self.pairs)

    def with_pairs(self, pairs):
        return TubeSquareSystem(self.scale, pairs, self.thickness)

    def squares(self):
        """Returns P as a square Family."""
        return Family(self.scale, FamilyKind.SQUARES, self.pairs[:, :2])

    def tubes(self):
        """Returns the union of the T_p as a tube Family."""
        return Family(self.scale, FamilyKind.TUBES, self.pairs[:, 2:],
                      self.thickness)

    def tube_set(self, p):
        """Returns T_p for a square index tuple p."""
        mask = (self.pairs[:, 0] == p[0]) & (self.pairs[:, 1] == p[1])
        return Family(self.scale, FamilyKind.TUBES, self.pairs[mask, 2:],
                      self.thickness)

    def squares_along(self, T):
        """Returns P_T = {p : T in T_p} for a tube index tuple T."""
        mask = (self.pairs[:, 2] == T[0]) & (self.pairs[:, 3] == T[1])
        return Family(self.scale, FamilyKind.SQUARES, self.pairs[mask, :2])

    def double_count(self):
        """Returns (Σ_p |T_p|, Σ_T |P_T|), each computed by grouping the
        pairs on its own side."""
        if not len(self):
            return 0, 0
        _, square_ids, _ = group_rows(self.pairs[:, :2])
        _, tube_ids, _ = group_rows(self.pairs[:, 2:])
        square_side = sum(int(n) for n in np.bincount(square_ids))
        tube_side = sum(int(n) for n in np.bincount(tube_ids))
        return square_side, tube_side


def _validate_eps(eps):
    eps = as_fraction(eps, "Epsilon")
    if not 0 < eps < 1:
        raise ValueError(f"Epsilon {eps} is not in (0, 1).")
    return eps


def _ball_ratios(points, delta_exp, base_exp, eps, kappa):
    """Returns the worst (ratio, rho_exp, center) over Chebyshev balls
    of radius 2^-k, base_exp < k < e, centered at the points, where
    ratio = |B ∩ points| / ((ρ/ρ_0)^ε (ρ_0/δ)^(κε³) |points|) and
    ρ_0 = 2^-base_exp."""
    eps, kappa = float(eps), float(kappa)
    n = len(points)
    distance = np.abs(points[:, None, :] - points[None, :, :]).max(axis=2)
    best = (0.0, None, None)
    for k in range(base_exp + 1, delta_exp):
        counts = (distance < (1 << (delta_exp - k))).sum(axis=1)
        allowance = 2.0 ** (-(k - base_exp) * eps +
                            (delta_exp - base_exp) * kappa * eps ** 3)
        worst = int(np.argmax(counts))
        ratio = counts[worst] / (allowance * n)
        if ratio > best[0]:
            best = (float(ratio), k, tuple(int(x) for x in points[worst]))
    return best


def is_two_ends(P_T, eps, c=1, kappa=DEFAULT_TWO_ENDS_EXPONENT):
    """Checks whether the squares of P_T are ε-two-ends:
    |P_T ∩ B_ρ| <= c·ρ^ε·δ^(-κε³)·|P_T| for every dyadic ρ in (δ, 1)
    and every ball B_ρ centered at an element.

    Args:
        P_T: A nonempty square Family.
        eps: A number in (0, 1).
        c: A positive constant.
        kappa: The exponent coefficient κ.

    Returns:
        A TwoEndsReport.

    Raises:
        TwoEndsError: If P_T is empty or not a square family.
    """
    if not isinstance(P_T, Family):
        raise TypeError(f"Family {P_T} is not a Family.")
    if P_T.kind != FamilyKind.SQUARES:
        raise TwoEndsError(f"Family of kind {P_T.kind} is not a square "
                           f"family.")
    if not len(P_T):
        raise TwoEndsError("Cannot check an empty family.")
    eps = _validate_eps(eps)
    c = float(as_fraction(c, "Constant"))
    ratio, rho_exp, center = _ball_ratios(
        P_T.array, P_T.scale.delta_exp, 0, eps, kappa)
    return TwoEndsReport(ratio <= c * (1 + RELATIVE_TOLERANCE), rho_exp,
                         center, ratio)


def covering_lower_check(P, s, eps):
    """Compares the covering numbers |P|_ρ to ρ^-s at every dyadic ρ.

    Args:
        P: A nonempty Family.
        s: A positive number.
        eps: The ε of the expected δ^(O(ε)) slack, reported alongside.

    Returns:
        A CoveringReport. The slack exponent divided by eps is the
        constant in the O(ε).
    """
    if not isinstance(P, Family):
        raise TypeError(f"Family {P} is not a Family.")
    if not len(P):
        raise TwoEndsError("Cannot check an empty family.")
    s = float(as_fraction(s, "Exponent s"))
    _validate_eps(eps)
    e = P.scale.delta_exp
    table = []
    for rho_exp in range(e + 1):
        count = covering_number(P, rho_exp)
        table.append((rho_exp, count, count / 2.0 ** (rho_exp * s)))
    worst = min(table, key=lambda row: (row[2], row[0]))
    slack = max(0.0, max((k * s - math.log2(n)) / e for k, n, _ in table))
    return CoveringReport(worst[2], worst[0], slack, tuple(table))


def _stage(name, pairs, scale, thickness):
    # Rebuilding the system revalidates the incidence of every pair.
    system = TubeSquareSystem(scale, pairs, thickness)
    square_side, tube_side = system.double_count()
    return StageReport(name, len(pairs), square_side, tube_side)


def _check_hypotheses(system, eps):
    """Checks that every T_p is exactly uniform in direction with a
    common profile, and that Σ|T_p| >= δ^(-2ε)|∪T_p|."""
    pairs = system.pairs
    e, T = system.scale.delta_exp, system.scale.block_exp
    _, square_ids, sizes = group_rows(pairs[:, :2])
    if len(set(sizes.tolist())) != 1:
        raise TwoEndsError("The tube families T_p have different sizes.")
    slopes = np.minimum(pairs[:, 2], system.scale.size - 1)
    for level in range(system.scale.levels + 1):
        cells = np.stack(
            [square_ids, slopes >> (e - level * T)], axis=1)
        _, _, counts = group_rows(cells)
        if len(set(counts.tolist())) != 1:
            raise TwoEndsError(
                f"The tube families T_p are not uniform with a common "
                f"profile at level {level}.")
    union = len(group_rows(pairs[:, 2:])[0])
    if len(pairs) < 2.0 ** (2 * e * float(eps)) * union:
        raise TwoEndsError(
            f"Σ|T_p| = {len(pairs)} is below δ^(-2ε)|∪T_p| = "
            f"{2.0 ** (2 * e * float(eps)) * union:.1f}.")


def _regularize(pairs):
    """Discards pairs whose square or tube has degree below half the
    average degree on its side, until nothing changes."""
    while len(pairs):
        _, square_ids, square_degree = group_rows(pairs[:, :2])
        _, tube_ids, tube_degree = group_rows(pairs[:, 2:])
        keep = ((2 * square_degree[square_ids] * len(square_degree) >=
                 len(pairs)) &
                (2 * tube_degree[tube_ids] * len(tube_degree) >=
                 len(pairs)))
        if keep.all():
            break
        pairs = pairs[keep]
    return pairs


def _covering_profile(pairs, e):
    """Returns the mean over tubes of log2 of the number of columns of
    width 2^-k met by the squares of each tube, divided by e, for
    k = 0..e."""
    _, tube_ids, _ = group_rows(pairs[:, 2:])
    n_tubes = int(tube_ids.max()) + 1
    profile = []
    for k in range(e + 1):
        cells = np.stack([tube_ids, pairs[:, 0] >> (e - k)], axis=1)
        unique, _, _ = group_rows(cells)
        per_tube = np.bincount(unique[:, 0], minlength=n_tubes)
        profile.append(float(np.log2(per_tube).mean()) / e)
    return profile


def _select_scale(pairs, e, eps):
    """Returns (k̃, partition, fallback): ρ̃ = 2^-k̃ is δ^b for the first
    breakpoint b of the good-interval partition of the covering profile
    whose slope is at least ε."""
    q = POINTS_PER_LEVEL
    coarse = [Fraction(v) for v in _covering_profile(pairs, e)]
    samples = []
    for k in range(e * q + 1):
        j, r = divmod(k, q)
        samples.append(coarse[e] if j == e else
                       coarse[j] + (coarse[j + 1] - coarse[j]) * r / q)
    f = LipschitzFn.from_samples(samples, e * q)
    partition = good_intervals(f, eps, align=q)
    for vertex, slope in zip(partition.vertices, partition.slopes):
        if slope >= eps:
            return vertex // q, partition, False
    return 0, partition, True


def _segment_ids(pairs, e, k_tilde):
    """Returns the segment id of every pair: pairs share a segment when
    their squares lie in the same ρ̃-cell Q and their tubes agree in
    direction to δ/ρ̃ and in height, to δ, at the left edge of Q."""
    size = 1 << e
    shift = e - k_tilde
    cell_col, cell_row = pairs[:, 0] >> shift, pairs[:, 1] >> shift
    left_edge = cell_col << shift
    height = (pairs[:, 2] * left_edge + pairs[:, 3] * size) // size
    keys = np.stack(
        [cell_col, cell_row, pairs[:, 2] >> k_tilde, height], axis=1)
    return group_rows(keys)[1]


def _segment_checks(pairs, segment_ids, e, k_tilde, eps, kappa, threads):
    """Returns the two-ends ratio of every segment, relative to ρ̃."""
    order = np.argsort(segment_ids, kind="stable")
    bounds = np.flatnonzero(np.diff(segment_ids[order])) + 1
    groups = np.split(order, bounds)

    def ratio(group):
        return _ball_ratios(pairs[group, :2], e, k_tilde, eps, kappa)[0]

    ratios = parallel_map(ratio, groups, threads=threads)
    return groups, np.array(ratios)


def two_ends_refine(system, eps, c=1, kappa=DEFAULT_TWO_ENDS_EXPONENT,
                    constant=DEFAULT_REFINE_CONSTANT, threads=1):
    """Refines a tube/square system to a system of ρ̃-segments that are
    two-ends relative to ρ̃.

    The stages are: (1) the bipartite degrees are regularized by
    discarding vertices below half the average degree until stable;
    (2) the covering profile of the squares along each tube is
    decomposed into good intervals and ρ̃ = δ^b is taken at the first
    breakpoint b whose slope is at least ε; (3) tubes are cut into
    segments in the ρ̃-cells, and segments failing
    |P_U ∩ B_ρ'| <= c (ρ'/ρ̃)^ε (ρ̃/δ)^(κε³) |P_U| for ρ' in (δ, ρ̃) are
    discarded. Every stage revalidates the incidence of its pairs and
    reports both sides of the double count.

    The postconditions checked are: every surviving segment is two-ends
    relative to ρ̃; the surviving share of pairs is at least
    (δ/ρ̃)^(ε³)/constant; max_U |P_U| <= constant · mean_U |P_U|; and
    ρ̃ >= δ^(1-ε).

    Args:
        system: A TubeSquareSystem whose T_p are exactly uniform in
                direction with a common profile, and with
                Σ|T_p| >= δ^(-2ε)|∪T_p|.
        eps: A number in (0, 1/2).
        c: The two-ends constant.
        kappa: The exponent coefficient κ.
        constant: The constant of the mass and density postconditions.
        threads: The number of worker threads for the segment checks.

    Returns:
        A RefineResult.

    Raises:
        TwoEndsError: If a hypothesis fails or nothing survives.
        TwoEndsCheckError: If a postcondition fails.
    """
    if not isinstance(system, TubeSquareSystem):
        raise TypeError(f"System {system} is not a TubeSquareSystem.")
    eps = _validate_eps(eps)
    c = float(as_fraction(c, "Constant"))
    constant = float(as_fraction(constant, "Constant"))
    scale, thickness = system.scale, system.thickness
    e = scale.delta_exp
    if not len(system):
        raise TwoEndsError("Cannot refine an empty system.")
    stages = [_stage("input", system.pairs, scale, thickness)]
    n_squares = len(group_rows(system.pairs[:, :2])[0])
    n_tubes = len(group_rows(system.pairs[:, 2:])[0])
    if n_squares <= 1 or n_tubes <= 1:
        ids = np.arange(len(system))
        return RefineResult(0, system, ids, stages, None, False, 0.0, 1.0,
                            1.0, 1.0, True, True)
    _check_hypotheses(system, eps)
    pairs = _regularize(np.array(system.pairs))
    if not len(pairs):
        raise TwoEndsError("Degree regularization discarded every pair.")
    stages.append(_stage("regularized", pairs, scale, thickness))
    try:
        k_tilde, partition, fallback = _select_scale(pairs, e, eps)
    except MultiscaleError as err:
        raise TwoEndsError(f"Scale selection failed. Details: {err}")
    segment_ids = _segment_ids(pairs, e, k_tilde)
    groups, ratios = _segment_checks(
        pairs, segment_ids, e, k_tilde, eps, kappa, threads)
    keep = np.zeros(len(pairs), dtype=bool)
    for group, ratio in zip(groups, ratios):
        if ratio <= c * (1 + RELATIVE_TOLERANCE):
            keep[group] = True
    if not keep.any():
        raise TwoEndsError(
            f"No segment at scale 2^-{k_tilde} is two-ends; the best ratio "
            f"is {ratios.min():.3f}.")
    survivors = pairs[keep]
    stages.append(_stage("two-ends segments", survivors, scale, thickness))
    _, survivor_ids = np.unique(segment_ids[keep], return_inverse=True)
    survivor_ids = survivor_ids.reshape(-1)
    # |P_U| counts the distinct squares of each segment U.
    square_segment, _, _ = group_rows(
        np.stack([survivors[:, 0], survivors[:, 1], survivor_ids], axis=1))
    segment_sizes = np.bincount(square_segment[:, 2])
    two_ends_constant = float(ratios[
        np.array([keep[g[0]] for g in groups])].max())
    mass_ratio = len(survivors) / len(system)
    mass_constant = mass_ratio * 2.0 ** ((e - k_tilde) * float(eps) ** 3)
    density_constant = float(segment_sizes.max() / segment_sizes.mean())
    scale_ok = k_tilde <= (1 - float(eps)) * e + RELATIVE_TOLERANCE
    failures = []
    if mass_constant * constant < 1:
        failures.append(f"mass constant {mass_constant:.4f}")
    if density_constant > constant:
        failures.append(f"density constant {density_constant:.4f}")
    if not scale_ok:
        failures.append(f"scale 2^-{k_tilde} below δ^(1-ε)")
    if failures:
        raise TwoEndsCheckError(
            f"Refinement postconditions failed: {', '.join(failures)}.")
    return RefineResult(
        k_tilde, TubeSquareSystem(scale, survivors, thickness),
        survivor_ids, stages, partition, fallback, two_ends_constant,
        mass_ratio, mass_constant, density_constant, scale_ok, False)


def spread_bush_system(scale, s, seed, column_step=4,
                       thickness=DEFAULT_THICKNESS):
    """Returns the system of bushes rooted at every square of every
    column_step-th column. Every bush has one tube per direction of a
    common AD-regular (δ,s)-set Λ, snapped to the grid tube whose line
    passes below the root center by less than δ.

    Args:
        scale: A Scale with s·T integral.
        s: A number in (0, 1].
        seed: A nonnegative integer.
        column_step: The spacing of the root columns.
        thickness: The tube thickness factor c.

    Returns:
        A TubeSquareSystem.
    """
    if isinstance(column_step, bool) or not isinstance(column_step, int):
        raise TypeError(f"Column step {column_step} is not an integer.")
    if column_step < 1:
        raise ValueError(f"Column step {column_step} is not positive.")
    directions = generate_ad_regular(scale, s, seed).array[:, 0]
    size = scale.size
    cols = np.arange(0, size, column_step, dtype=np.int64)
    rows = np.arange(size, dtype=np.int64)
    col, row, a = np.meshgrid(cols, rows, directions, indexing="ij")
    col, row, a = col.reshape(-1), row.reshape(-1), a.reshape(-1)
    # The line through the root center, rounded down.
    b = (2 * size * row + size - a * (2 * col + 1)) // (2 * size)
    return TubeSquareSystem(
        scale, np.stack([col, row, a, b], axis=1), thickness)


def dichotomy_audit(system, s, eps, eta, C=None):
    """Audits which of two alternatives a system of (δ,s)-bushes
    satisfies: (1) |P| <= δ^(s-ε-η) |T̄|²/r², or (2) some dyadic
    Δ >= δ^(1-√ε) carries Δ-squares Q with
    |P ∩ Q| >= (Δ/δ)^(2-s+ε^(1/4)) δ^(ε+η) covering at least a
    δ^(ε+η)-fraction of P.

    The direction sets of the T_p are checked against
    check_delta_set(s, C), and their largest constant is reported;
    violations are reported and the audit runs anyway. The richness r
    is the largest |T_p|.

    Returns:
        An AuditReport; item is 1, 2, "both", or "neither".

    Raises:
        TwoEndsError: If the system is empty.
    """
    if not isinstance(system, TubeSquareSystem):
        raise TypeError(f"System {system} is not a TubeSquareSystem.")
    if not len(system):
        raise TwoEndsError("Cannot audit an empty system.")
    s = as_fraction(s, "Exponent s")
    if not 0 < s <= 1:
        raise ValueError(f"Exponent s {s} is not in (0, 1].")
    eps = _validate_eps(eps)
    eta = as_fraction(eta, "Eta")
    e, size = system.scale.delta_exp, system.scale.size
    loss = float(eps + eta)
    pairs = system.pairs
    squares, square_ids, sizes = group_rows(pairs[:, :2])
    order = np.argsort(square_ids, kind="stable")
    bounds = np.flatnonzero(np.diff(square_ids[order])) + 1
    constants = dict()
    for group in np.split(order, bounds):
        slopes = np.minimum(pairs[group, 2], size - 1)
        key = np.unique(slopes).tobytes()
        if key not in constants:
            directions = Family(system.scale, FamilyKind.INTERVALS, slopes)
            constants[key] = check_delta_set(
                directions, s, 1 if C is None else C).achieved_constant
    hypothesis_constant = max(constants.values())
    r = int(sizes.max())
    union = len(group_rows(pairs[:, 2:])[0])
    item1_ratio = len(squares) * r ** 2 * 2.0 ** (e * float(s)) / union ** 2
    item1_tolerance = 2.0 ** (e * loss)
    item1_holds = item1_ratio <= item1_tolerance
    exponent = 2 - float(s) + float(eps) ** 0.25
    item2_delta_exp, item2_fraction = None, 0.0
    for k in range(0, math.floor((1 - math.sqrt(float(eps))) * e) + 1):
        _, _, counts = group_rows(squares >> (e - k))
        threshold = 2.0 ** ((e - k) * exponent - e * loss)
        fraction = counts[counts >= threshold].sum() / len(squares)
        if fraction >= 2.0 ** (-e * loss):
            item2_delta_exp, item2_fraction = k, float(fraction)
            break
    item2_holds = item2_delta_exp is not None
    if item1_holds and item2_holds:
        item = "both"
    elif item1_holds:
        item = 1
    elif item2_holds:
        item = 2
    else:
        item = "neither"
    return AuditReport(
        item, item1_ratio, item1_tolerance, item1_holds, item2_delta_exp,
        item2_fraction, item2_holds, hypothesis_constant, r,
        float(sizes.max() / sizes.min()))
