from collections import namedtuple
from fractions import Fraction
from tube_incidence_lab.constants import FROSTMAN_ATTEMPTS_PER_ELEMENT
from tube_incidence_lab.constants import FamilyKind
from tube_incidence_lab.constants import RELATIVE_TOLERANCE
from tube_incidence_lab.grid_core import Family
from tube_incidence_lab.grid_core import Scale
from tube_incidence_lab.grid_core import covering_number
from tube_incidence_lab.grid_core import epsilon_for_block_exp
from tube_incidence_lab.utils import ComputeBudgetError
from tube_incidence_lab.utils import as_fraction
from tube_incidence_lab.utils import derived_seed
from tube_incidence_lab.utils import dyadic_class
from tube_incidence_lab.utils import validate_seed
import math
import numpy as np

"""This module contains checkers and generators for (δ,s,C)-sets,
Katz-Tao sets, and uniform sets, the uniform-extraction and partition
procedures, and branching profiles.

Checkers quantify over dyadic cells: for every k in [0, e] and every
cell of side 2^-k containing an element, the number of elements in the
cell is compared to the bound. A ball B(x, r) centered at an element is
covered by at most 2^d such cells of side r, so the constants differ
from the ball formulation by at most a factor 4 in the plane."""


# The quantifier stated on every SetReport.
CELL_QUANTIFIER = "dyadic cells of side 2^-k containing an element, k=0..e"


class SetToolsError(Exception):
    """The base class for exceptions in this module."""


class FrostmanBudgetError(SetToolsError, ComputeBudgetError):
    """Raised when rejection sampling exhausts its candidate budget."""


# The outcome of a non-concentration check.
SetReport = namedtuple(
    "SetReport",
    "ok worst_center worst_radius_exp achieved_constant quantifier")

# The outcome of a uniformity check. Level is the first block level with
# unequal child counts, or None.
UniformityReport = namedtuple("UniformityReport", "ok level counts")

# The output of extract_uniform.
UniformSubset = namedtuple("UniformSubset", "family ratio guaranteed_ratio")

# The output of partition_uniform.
UniformPartition = namedtuple("UniformPartition", "parts bound within_bound")

# The largest ratio of nonzero parent counts and the exponent at which it
# occurs.
SpreadReport = namedtuple("SpreadReport", "max_ratio rho_exp")

# The per-level outcome of coarsened_set_check.
CoarseLevelReport = namedtuple(
    "CoarseLevelReport", "level set_report size size_floor size_ok")


class BranchingProfile(namedtuple(
        "BranchingProfile", "values block_exp dimension counts")):
    """The branching function β(j) = log2|F|_{2^-jT} / T of a family.

    Attributes:
        values: A tuple of Fractions β(0), ..., β(m).
        block_exp: The block size T.
        dimension: The ambient dimension d bounding each increment.
        counts: The covering numbers at the block scales.
    """

    __slots__ = ()

    @property
    def levels(self):
        return len(self.values) - 1

    def normalized(self):
        """Returns the values rescaled to [0, 1] x [0, 1]: the sample
        f(j/m) = β(j) / (m·d)."""
        scale = self.levels * self.dimension
        return tuple(value / scale for value in self.values)


class ToleranceProfile(namedtuple(
        "ToleranceProfile",
        "eps eps0 upsilon eta implicit_constant eps0_nominal")):
    """The tolerance knobs ε, ε₀, υ, η and the implicit constant.

    Attributes:
        eps: ε.
        eps0: The ε₀ used in computations, after clamping.
        upsilon: υ, the size of arbitrarily small losses δ^-υ.
        eta: η, the non-concentration loss exponent.
        implicit_constant: The constant hidden in ≲ bounds.
        eps0_nominal: The unclamped value ε^(2/ε), or the user value.
    """

    __slots__ = ()

    @classmethod
    def for_grid(cls, eps, grid_size, eps0=None, upsilon=Fraction(1, 100),
                 eta=Fraction(1, 100), implicit_constant=1):
        """Returns the profile for a function sampled on a grid of the
        given size, clamping ε₀ from below by 4/n.

        Raises:
            SetToolsError: If the clamped ε₀ exceeds ε.
        """
        eps = as_fraction(eps, "Epsilon")
        if eps <= 0:
            raise ValueError(f"Epsilon {eps} is not positive.")
        if eps0 is None:
            exponent = Fraction(2) / eps
            if exponent.denominator == 1:
                nominal = eps ** exponent.numerator
            else:
                nominal = Fraction(float(eps) ** float(exponent))
        else:
            nominal = as_fraction(eps0, "Epsilon zero")
            if nominal <= 0:
                raise ValueError(f"Epsilon zero {nominal} is not positive.")
        floor = Fraction(4, grid_size)
        used = max(nominal, floor)
        if used > eps:
            raise SetToolsError(
                f"Epsilon zero {used} exceeds epsilon {eps} on a grid of "
                f"size {grid_size}.")
        return cls(eps, used, as_fraction(upsilon, "Upsilon"),
                   as_fraction(eta, "Eta"),
                   as_fraction(implicit_constant, "Implicit constant"),
                   nominal)

    @property
    def eps0_clamped(self):
        return self.eps0 != self.eps0_nominal

    @property
    def phi(self):
        """φ(ε) = 3ε, the slack of the upper slope bound."""
        return 3 * self.eps

    @property
    def psi(self):
        """ψ(ε) = ε₀ / ε, the minimal interval length."""
        return self.eps0 / self.eps


def _validate_family(F):
    if not isinstance(F, Family):
        raise TypeError(f"Family {F} is not a Family.")


def _validate_exponent(s, dimension):
    s = as_fraction(s, "Exponent s")
    if not 0 < s <= dimension:
        raise ValueError(f"Exponent s {s} is not in (0, {dimension}].")
    return s


def group_rows(array):
    """Returns the distinct rows of an integer array, the index of each
    row's group, and the size of each group."""
    if not len(array):
        return array, np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
    unique, inverse, counts = np.unique(
        array, axis=0, return_inverse=True, return_counts=True)
    return unique, inverse.reshape(-1), counts


def row_keys(array, delta_exp):
    """Returns one integer key per row of an index array whose entries
    lie in [-2^e, 2^e]; equal rows have equal keys."""
    offset = 1 << (delta_exp + 1)
    base = 1 << (delta_exp + 2)
    keys = np.zeros(len(array), dtype=np.int64)
    for column in range(array.shape[1]):
        keys = keys * base + (array[:, column] + offset)
    return keys


def cell_ratio_report(array, delta_exp, s, katz_tao=False):
    """Returns the largest normalized cell count of an index array over
    all dyadic cells of side 2^-k, k = 0..e, containing an element.

    For a (δ,s,C)-set check the normalized count is
    |A ∩ Q| / (r^s |A|); for a Katz-Tao check it is |A ∩ Q| / (r/δ)^s,
    with r = 2^-k. An exponent s = 0 is accepted.

    Args:
        array: An integer array of shape (n, width), n >= 1.
        delta_exp: The exponent e of δ.
        s: A nonnegative number.
        katz_tao: Whether to normalize as a Katz-Tao check.

    Returns:
        A tuple (achieved_constant, worst_center, worst_radius_exp).
    """
    s = float(s)
    total = len(array)
    best = (-1.0, None, None)
    for k in range(delta_exp + 1):
        parents = array >> (delta_exp - k)
        unique, inverse, counts = group_rows(parents)
        if katz_tao:
            normalizer = 2.0 ** ((delta_exp - k) * s)
        else:
            normalizer = total * 2.0 ** (-k * s)
        worst = int(np.argmax(counts))
        ratio = counts[worst] / normalizer
        if ratio > best[0]:
            center = array[int(np.argmax(inverse == worst))]
            best = (float(ratio), tuple(int(x) for x in center), k)
    return best


def _check(F, s, constant, katz_tao):
    _validate_family(F)
    s = _validate_exponent(s, F.ambient_dimension)
    constant = as_fraction(constant, "Constant")
    if constant <= 0:
        raise ValueError(f"Constant {constant} is not positive.")
    if not len(F):
        raise SetToolsError("Cannot check an empty family.")
    achieved, center, radius_exp = cell_ratio_report(
        F.array, F.scale.delta_exp, s, katz_tao=katz_tao)
    ok = achieved <= float(constant) * (1 + RELATIVE_TOLERANCE)
    return SetReport(ok, center, radius_exp, achieved, CELL_QUANTIFIER)


def check_delta_set(F, s, C):
    """Checks whether F is a (δ,s,C)-set: |F ∩ Q| <= C r^s |F| for every
    dyadic cell Q of side r >= δ containing an element.

    Args:
        F: A nonempty Family.
        s: A number in (0, d], d the ambient dimension.
        C: A positive number.

    Returns:
        A SetReport.

    Raises:
        SetToolsError: If F is empty.
        TypeError: If one or more inputs has an unexpected type.
        ValueError: If s or C is out of range.
    """
    return _check(F, s, C, katz_tao=False)


def check_katz_tao(F, s, K):
    """Checks whether F is a (δ,s,K)-Katz-Tao set:
    |F ∩ Q| <= K (r/δ)^s for every dyadic cell Q of side r >= δ
    containing an element.

    Args:
        F: A nonempty Family.
        s: A number in (0, d], d the ambient dimension.
        K: A positive number.

    Returns:
        A SetReport.

    Raises:
        SetToolsError: If F is empty.
        TypeError: If one or more inputs has an unexpected type.
        ValueError: If s or K is out of range.
    """
    return _check(F, s, K, katz_tao=True)


def _child_offsets(block_exp, kind):
    side = 1 << block_exp
    if kind == FamilyKind.INTERVALS:
        return np.arange(side, dtype=np.int64).reshape(-1, 1)
    cols, rows = np.divmod(np.arange(side * side, dtype=np.int64), side)
    return np.stack([cols, rows], axis=1)


def generate_ad_regular(scale, s, seed, kind=FamilyKind.INTERVALS):
    """Returns a Cantor-type family that keeps 2^(sT) randomly chosen
    children of every cell at every block level.

    Args:
        scale: A Scale.
        s: A number in (0, d] with s·T an integer.
        seed: A nonnegative integer.
        kind: FamilyKind.INTERVALS or FamilyKind.SQUARES.

    Returns:
        A Family of size 2^(es).

    Raises:
        SetToolsError: If s·T is not an integer.
        TypeError: If one or more inputs has an unexpected type.
        ValueError: If s or kind is out of range.
    """
    if not isinstance(scale, Scale):
        raise TypeError(f"Scale {scale} is not a Scale.")
    if kind not in (FamilyKind.INTERVALS, FamilyKind.SQUARES):
        raise ValueError(f"Kind {kind} is not intervals or squares.")
    validate_seed(seed)
    dimension = 1 if kind == FamilyKind.INTERVALS else 2
    s = _validate_exponent(s, dimension)
    keep_exp = s * scale.block_exp
    if keep_exp.denominator != 1:
        raise SetToolsError(
            f"s·T = {keep_exp} is not an integer; choose a block size T "
            f"with s·T integral.")
    keep = 1 << int(keep_exp)
    offsets = _child_offsets(scale.block_exp, kind)
    rng = np.random.default_rng(seed)
    cells = np.zeros((1, dimension), dtype=np.int64)
    for _ in range(scale.levels):
        choice = np.argsort(rng.random((len(cells), len(offsets))), axis=1)
        chosen = offsets[choice[:, :keep]]
        cells = (cells[:, None, :] << scale.block_exp) + chosen
        cells = cells.reshape(-1, dimension)
    return Family(scale, kind, cells)


def generate_binary_ad_regular(delta_exp, s, seed):
    """Returns an AD-regular set of δ-intervals for any s in [0, 1]. At
    binary level j the tree keeps both children if floor(s·j) exceeds
    floor(s·(j-1)), and one random child otherwise.

    Args:
        delta_exp: The exponent e >= 2.
        s: A number in [0, 1].
        seed: A nonnegative integer.

    Returns:
        A Family of 2^floor(es) intervals at Scale(e, 1).

    Raises:
        TypeError: If one or more inputs has an unexpected type.
        ValueError: If s is out of range.
    """
    scale = Scale(delta_exp, 1)
    validate_seed(seed)
    s = as_fraction(s, "Exponent s")
    if not 0 <= s <= 1:
        raise ValueError(f"Exponent s {s} is not in [0, 1].")
    rng = np.random.default_rng(seed)
    cells = np.zeros(1, dtype=np.int64)
    for level in range(1, delta_exp + 1):
        if math.floor(s * level) > math.floor(s * (level - 1)):
            cells = np.concatenate([2 * cells, 2 * cells + 1])
        else:
            cells = 2 * cells + rng.integers(0, 2, size=len(cells))
    return Family(scale, FamilyKind.INTERVALS, cells)


def generate_random_frostman(scale, s, seed, K, kind=FamilyKind.INTERVALS):
    """Returns a random (δ,s,2K)-Katz-Tao family of size about K·2^(es),
    built by rejection sampling: candidates are visited in random order
    and accepted while every dyadic cell containing them stays within
    2K (r/δ)^s elements.

    Args:
        scale: A Scale.
        s: A number in (0, d].
        seed: A nonnegative integer.
        K: A number >= 1.
        kind: FamilyKind.INTERVALS or FamilyKind.SQUARES.

    Returns:
        A Family.

    Raises:
        FrostmanBudgetError: If fewer than half of the target elements
                             are accepted within the candidate budget.
        TypeError: If one or more inputs has an unexpected type.
        ValueError: If s, K, or kind is out of range.
    """
    if not isinstance(scale, Scale):
        raise TypeError(f"Scale {scale} is not a Scale.")
    if kind not in (FamilyKind.INTERVALS, FamilyKind.SQUARES):
        raise ValueError(f"Kind {kind} is not intervals or squares.")
    validate_seed(seed)
    dimension = 1 if kind == FamilyKind.INTERVALS else 2
    s = _validate_exponent(s, dimension)
    K = as_fraction(K, "K")
    if K < 1:
        raise ValueError(f"K {K} is less than 1.")
    e = scale.delta_exp
    total = 1 << (dimension * e)
    target = min(total, max(1, math.floor(float(K) * 2.0 ** (e * float(s)))))
    budget = min(total, FROSTMAN_ATTEMPTS_PER_ELEMENT * target)
    caps = [2 * float(K) * 2.0 ** ((e - k) * float(s)) for k in range(e + 1)]
    rng = np.random.default_rng(seed)
    if total <= 1 << 22:
        candidates = rng.permutation(total)[:budget]
    else:
        candidates = rng.choice(total, size=budget, replace=False)
    level_counts = [dict() for _ in range(e + 1)]
    accepted = []
    for candidate in candidates:
        if dimension == 1:
            index = (int(candidate),)
        else:
            index = tuple(int(x) for x in divmod(int(candidate), 1 << e))
        cells = [tuple(x >> (e - k) for x in index) for k in range(e + 1)]
        if all(level_counts[k].get(cells[k], 0) + 1 <= caps[k]
               for k in range(e + 1)):
            for k in range(e + 1):
                level_counts[k][cells[k]] = \
                    level_counts[k].get(cells[k], 0) + 1
            accepted.append(index)
            if len(accepted) == target:
                break
    if 2 * len(accepted) < target:
        raise FrostmanBudgetError(
            f"Accepted {len(accepted)} of {target} elements within "
            f"{budget} candidates.")
    return Family(scale, kind, accepted)


def is_uniform(F):
    """Returns whether every nonempty cell at each block level 2^-jT,
    j = 0..m, contains the same number of elements of F.

    Args:
        F: A Family.

    Returns:
        A UniformityReport.
    """
    _validate_family(F)
    for level in range(F.scale.levels + 1):
        _, counts = F.parent_counts(F.scale.level_exp(level))
        distinct = sorted(set(int(c) for c in counts))
        if len(distinct) > 1:
            return UniformityReport(False, level, tuple(distinct))
    return UniformityReport(True, None, ())


def _require_uniform(F):
    report = is_uniform(F)
    if not report.ok:
        raise SetToolsError(
            f"Family is not uniform: level {report.level} has child counts "
            f"{report.counts}.")


def _trim_level(array, e, T, level, rng):
    """Trims the children at block level + 1 of the cells at the given
    block level of an index array. Cells are bucketed by the dyadic
    class of their child count. The class retaining the most elements is
    kept, and each kept cell is trimmed to the class minimum by a seeded
    random choice of children. Returns the kept rows and the number of
    classes."""
    children, child_of_element, child_mass = group_rows(
        array >> (e - (level + 1) * T))
    _, cell_of_child, child_counts = group_rows(children >> T)
    cell_mass = np.bincount(cell_of_child, weights=child_mass)
    classes = np.array([dyadic_class(int(c)) for c in child_counts])
    distinct_classes = sorted(set(classes.tolist()))
    best_class, best_mass, best_min = None, -1, None
    for k in distinct_classes:
        in_class = classes == k
        minimum = int(child_counts[in_class].min())
        # Trimming a cell to the minimum keeps about that share of its mass.
        mass = minimum * float(np.sum(
            cell_mass[in_class] / child_counts[in_class]))
        if mass > best_mass:
            best_class, best_mass, best_min = k, mass, minimum
    keys = rng.random(len(children))
    order = np.lexsort((keys, cell_of_child))
    sorted_cells = cell_of_child[order]
    starts = np.searchsorted(sorted_cells, sorted_cells, side="left")
    rank = np.empty(len(children), dtype=np.int64)
    rank[order] = np.arange(len(children)) - starts
    keep_child = (classes[cell_of_child] == best_class) & (rank < best_min)
    return array[keep_child[child_of_element]], len(distinct_classes)


def extract_uniform(F, seed):
    """Returns an exactly uniform subfamily of F.

    Levels are processed from coarse to fine. At level j, the level-j
    cells are bucketed by the dyadic class of their number of children;
    the class that retains the most elements after trimming is kept, and
    every kept cell is trimmed to the class minimum by a seeded random
    choice of children. Trimming a finer level can empty a child of a
    coarser cell, so the coarse-to-fine sweep is repeated until nothing
    is dropped, which leaves every level uniform.

    The guaranteed ratio is prod_j (2·#classes_j)^-1, with the classes
    counted by a sweep from the finest level up. That sweep keeps every
    surviving subtree at equal size, so it always meets the guarantee;
    its subfamily is returned instead when the coarse-to-fine one falls
    short.

    Args:
        F: A nonempty Family.
        seed: A nonnegative integer.

    Returns:
        A UniformSubset with the family, the retained ratio, and the
        guaranteed ratio.

    Raises:
        SetToolsError: If F is empty.
        TypeError: If one or more inputs has an unexpected type.
    """
    _validate_family(F)
    validate_seed(seed)
    if not len(F):
        raise SetToolsError("Cannot extract from an empty family.")
    e, T, levels = F.scale.delta_exp, F.scale.block_exp, F.scale.levels
    array = F.array
    sweep = 0
    while True:
        sweep = sweep + 1
        size = len(array)
        for level in range(levels):
            rng = np.random.default_rng(derived_seed(seed, sweep, level))
            array, _ = _trim_level(array, e, T, level, rng)
        if len(array) == size:
            break
    bottom_up = F.array
    guaranteed = Fraction(1)
    for level in range(levels - 1, -1, -1):
        rng = np.random.default_rng(derived_seed(seed, level))
        bottom_up, n_classes = _trim_level(bottom_up, e, T, level, rng)
        guaranteed = guaranteed / (2 * n_classes)
    if Fraction(len(array), len(F)) < guaranteed:
        array = bottom_up
    family = F.with_elements(array)
    return UniformSubset(
        family, Fraction(len(family), len(F)), guaranteed)


def _rank_within_cells(units, shift):
    """Returns, for every distinct unit, its rank among the units of the
    same cell of the coarser scale (units >> shift)."""
    _, cell_ids, _ = group_rows(units >> shift)
    order = np.lexsort((np.arange(len(units)), cell_ids))
    sorted_ids = cell_ids[order]
    starts = np.searchsorted(sorted_ids, sorted_ids, side="left")
    rank = np.empty(len(units), dtype=np.int64)
    rank[order] = np.arange(len(units)) - starts
    return rank


def partition_katz_tao(F, s):
    """Partitions a uniform family into parts S_i that each satisfy
    |S_i ∩ Q| <= 2^(2T) (r/δ)^s for every dyadic cell Q of side r.

    The tree is scanned from the bottom. Starting from units equal to
    single elements at scale ρ' = δ, the first block scale ρ whose
    cells hold M > (ρ/ρ')^s units is selected; the units of every such
    cell are split into ceil(M / floor((ρ/ρ')^s)) groups by rank, and
    the scan continues with ρ-cells as units. A part is a choice of one
    group at every selected scale. The number of parts is at most
    K·2^m, K the Katz-Tao constant of F at the block scales.

    Args:
        F: A nonempty, exactly uniform Family.
        s: A number in (0, d].

    Returns:
        A list of Families partitioning F.

    Raises:
        SetToolsError: If F is empty or not uniform.
        TypeError: If one or more inputs has an unexpected type.
        ValueError: If s is out of range.
    """
    _validate_family(F)
    s = _validate_exponent(s, F.ambient_dimension)
    if not len(F):
        raise SetToolsError("Cannot partition an empty family.")
    _require_uniform(F)
    e, T, m = F.scale.delta_exp, F.scale.block_exp, F.scale.levels
    # sizes[l] is the number of elements in a cell l block levels above δ.
    sizes = [len(F) // covering_number(F, e - l * T) for l in range(m + 1)]
    array = F.array
    labels = []
    unit_level = 0
    for level in range(1, m + 1):
        ratio = 2.0 ** ((level - unit_level) * T * float(s))
        units_per_cell = sizes[level] // sizes[unit_level]
        if units_per_cell <= ratio * (1 + RELATIVE_TOLERANCE):
            continue
        cap = max(1, math.floor(ratio + RELATIVE_TOLERANCE))
        units, unit_of_element, _ = group_rows(array >> (unit_level * T))
        rank = _rank_within_cells(units, (level - unit_level) * T)
        labels.append((rank // cap)[unit_of_element])
        unit_level = level
    if not labels:
        return [F]
    _, part_of_element, _ = group_rows(np.stack(labels, axis=1))
    parts = []
    for part in range(int(part_of_element.max()) + 1):
        parts.append(F.with_elements(array[part_of_element == part]))
    return parts


def partition_uniform(F, seed):
    """Partitions F into exactly uniform parts by extracting uniform
    subfamilies from the remainder until nothing is left.

    Args:
        F: A Family.
        seed: A nonnegative integer.

    Returns:
        A UniformPartition with the parts, the bound 2^(e·ε_T)·e on
        their number, and whether the bound holds.

    Raises:
        TypeError: If one or more inputs has an unexpected type.
    """
    _validate_family(F)
    validate_seed(seed)
    e = F.scale.delta_exp
    parts = []
    remainder = F
    while len(remainder):
        subset = extract_uniform(remainder, derived_seed(seed, len(parts)))
        parts.append(subset.family)
        taken = np.isin(row_keys(remainder.array, e),
                        row_keys(subset.family.array, e))
        remainder = remainder.with_elements(remainder.array[~taken])
    bound = 2.0 ** (e * epsilon_for_block_exp(F.scale.block_exp)) * e
    return UniformPartition(parts, bound, len(parts) <= bound)


def branching(F):
    """Returns the branching profile β(j) = log2|F|_{2^-jT} / T of a
    uniform family.

    Args:
        F: A nonempty, exactly uniform Family.

    Returns:
        A BranchingProfile whose increments lie in [0, d].

    Raises:
        SetToolsError: If F is empty or not uniform.
    """
    _validate_family(F)
    if not len(F):
        raise SetToolsError("An empty family has no branching profile.")
    _require_uniform(F)
    T, d = F.scale.block_exp, F.ambient_dimension
    counts = tuple(covering_number(F, F.scale.level_exp(j))
                   for j in range(F.scale.levels + 1))
    values = [Fraction(0)]
    for j in range(1, len(counts)):
        step = Fraction(math.log2(counts[j] / counts[j - 1])) / T
        values.append(values[-1] + min(max(step, Fraction(0)), Fraction(d)))
    return BranchingProfile(tuple(values), T, d, counts)


def parent_count_spread(F):
    """Returns the largest ratio max/min of nonzero parent counts over
    every dyadic ρ = 2^-k, k = 0..e, not only the block scales."""
    _validate_family(F)
    if not len(F):
        raise SetToolsError("An empty family has no parent counts.")
    best = SpreadReport(1.0, 0)
    for rho_exp in range(F.scale.delta_exp + 1):
        _, counts = F.parent_counts(rho_exp)
        ratio = counts.max() / counts.min()
        if ratio > best.max_ratio:
            best = SpreadReport(float(ratio), rho_exp)
    return best


def coarsened_set_check(F, s, C1):
    """Checks that the coarsened families of a uniform (δ,s,C1)-set stay
    non-concentrated: at every block scale ρ = 2^-jT >= 2^-e with
    jT >= 2, F_ρ passes check_delta_set(s, 2^(4T)·C1) and
    |F_ρ| >= ρ^-s / (C1·2^(2T)).

    Returns:
        A tuple (ok, list of CoarseLevelReport).
    """
    _validate_family(F)
    s = _validate_exponent(s, F.ambient_dimension)
    C1 = as_fraction(C1, "C1")
    T = F.scale.block_exp
    reports = []
    for level in range(1, F.scale.levels + 1):
        rho_exp = F.scale.level_exp(level)
        if rho_exp < 2:
            continue
        coarse = F.coarsen(level)
        set_report = check_delta_set(coarse, s, (1 << (4 * T)) * C1)
        floor = 2.0 ** (rho_exp * float(s)) / (float(C1) * (1 << (2 * T)))
        reports.append(CoarseLevelReport(
            level, set_report, len(coarse), floor, len(coarse) >= floor))
    ok = all(r.set_report.ok and r.size_ok for r in reports)
    return ok, reports
