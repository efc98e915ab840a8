from collections import namedtuple
from tube_incidence_lab.constants import DEFAULT_AUGMENT_CONSTANT
from tube_incidence_lab.constants import DEFAULT_RETRIES
from tube_incidence_lab.constants import DEFAULT_THICKNESS
from tube_incidence_lab.constants import FamilyKind
from tube_incidence_lab.grid_core import Family
from tube_incidence_lab.grid_core import Scale
from tube_incidence_lab.set_tools import check_katz_tao
from tube_incidence_lab.set_tools import is_uniform
from tube_incidence_lab.utils import CheckFailedError
from tube_incidence_lab.utils import as_fraction
from tube_incidence_lab.utils import derived_seed
from tube_incidence_lab.utils import validate_positive_int
from tube_incidence_lab.utils import validate_seed
import math
import numpy as np

"""This module contains the random augmentations that inflate a
Katz-Tao set to full size: unions of random translates of an interval
set, and direction shifts followed by shared intercept translates of a
structured tube family.

Translates and shifts act cyclically on the index range [0, 2^e). A
direction shift moves every tube of one direction to another slope
index, a shear of the slope chart rather than a rotation; the
non-concentration checks only use translation invariance, which the
shear preserves."""


class AugmentError(Exception):
    """The base class for exceptions in this module."""


class AugmentRetriesError(AugmentError, CheckFailedError):
    """Raised when every attempt of an augmentation fails a
    postcondition."""


# The postconditions of one attempt. Allowance is δ^-υ, or log2(1/δ) in
# log-loss mode; measured_constant is the smallest c for which the
# Katz-Tao check would pass.
AugmentChecks = namedtuple(
    "AugmentChecks",
    "size_ok katz_tao_ok multiplicity_ok size lower upper allowance "
    "katz_tao_constant measured_constant max_multiplicity "
    "multiplicity_bound")

# The output of augment_translates.
TranslateResult = namedtuple(
    "TranslateResult", "family translates attempts checks")

# The output of augment_rigid. Checks hold the direction-set checks and
# the worst fiber checks.
RigidResult = namedtuple(
    "RigidResult",
    "family shifts translates attempts direction_checks fiber_checks "
    "max_multiplicity multiplicity_bound")


class DirectionalTubeFamily(object):
    """A tube family organized by direction: a set of slope indices and,
    for each, the fiber of intercept indices of its tubes.

    Attributes:
        scale: The Scale of the tubes.
        directions: A sorted tuple of slope indices in [0, 2^e).
        fibers: A dict mapping each direction to a sorted tuple of
                intercept indices in [0, 2^e).

    Typical Usage Example:

        seed_family = DirectionalTubeFamily(Scale(8), (0,), {0: (0,)})
        tubes = seed_family.tubes()
    """

    def __init__(self, scale, directions, fibers):
        if not isinstance(scale, Scale):
            raise TypeError(f"Scale {scale} is not a Scale.")
        size = scale.size
        directions = tuple(sorted(set(int(a) for a in directions)))
        if not directions:
            raise AugmentError("A directional family needs a direction.")
        cleaned = dict()
        for a in directions:
            if not 0 <= a < size:
                raise ValueError(f"Direction {a} is not in [0, {size}).")
            fiber = tuple(sorted(set(int(b) for b in fibers.get(a, ()))))
            if not fiber:
                raise AugmentError(f"Direction {a} has an empty fiber.")
            if not all(0 <= b < size for b in fiber):
                raise ValueError(
                    f"Fiber of direction {a} has an intercept outside "
                    f"[0, {size}).")
            cleaned[a] = fiber
        self.scale = scale
        self.directions = directions
        self.fibers = cleaned

    @classmethod
    def from_family(cls, family):
        """Returns the directional view of a tube Family.

        Raises:
            AugmentError: If the family does not hold tubes.
            ValueError: If a slope index is 2^e or an intercept index is
                        negative.
        """
        if not isinstance(family, Family):
            raise TypeError(f"Family {family} is not a Family.")
        if family.kind != FamilyKind.TUBES:
            raise AugmentError(f"Family of {family.kind} does not hold tubes.")
        fibers = dict()
        for a, b in family.elements:
            fibers.setdefault(a, []).append(b)
        return cls(family.scale, fibers, fibers)

    def __len__(self):
        return sum(len(fiber) for fiber in self.fibers.values())

    def __eq__(self, other):
        if not isinstance(other, DirectionalTubeFamily):
            return NotImplemented
        return self.scale == other.scale and self.fibers == other.fibers

    def direction_family(self):
        """Returns the directions as an interval Family."""
        return Family(self.scale, FamilyKind.INTERVALS, self.directions)

    def fiber_family(self, direction):
        """Returns the fiber of a direction as an interval Family."""
        return Family(self.scale, FamilyKind.INTERVALS,
                      self.fibers[direction])

    def tubes(self, thickness=DEFAULT_THICKNESS):
        """Returns the flattened tube Family."""
        elements = [(a, b) for a in self.directions for b in self.fibers[a]]
        return Family(self.scale, FamilyKind.TUBES, elements, thickness)


def _allowance(delta_exp, upsilon, log_loss):
    if log_loss:
        return float(delta_exp)
    return 2.0 ** (delta_exp * float(upsilon))


def _validate_parameters(s, K, upsilon, retries, constant, name):
    s = as_fraction(s, "Exponent s")
    if not 0 < s <= 1:
        raise ValueError(f"Exponent s {s} is not in (0, 1].")
    K = as_fraction(K, name)
    if K < 1:
        raise ValueError(f"{name} {K} is less than 1.")
    upsilon = as_fraction(upsilon, "Upsilon")
    if upsilon < 0:
        raise ValueError(f"Upsilon {upsilon} is negative.")
    validate_positive_int(retries, "Retries")
    constant = as_fraction(constant, "Constant")
    if constant <= 0:
        raise ValueError(f"Constant {constant} is not positive.")
    return s, K, upsilon, constant


def _require_hypotheses(F, s, K, label):
    uniformity = is_uniform(F)
    if not uniformity.ok:
        raise AugmentError(
            f"{label} is not uniform: level {uniformity.level} has child "
            f"counts {uniformity.counts}.")
    report = check_katz_tao(F, s, K)
    if not report.ok:
        raise AugmentError(
            f"{label} is not a Katz-Tao set with constant {K}: achieved "
            f"{report.achieved_constant}.")


def _random_offsets(rng, count, size):
    """Returns count distinct offsets in [0, size), sorted; a single
    offset is always 0."""
    count = min(count, size)
    if count == 1:
        return np.zeros(1, dtype=np.int64)
    return np.sort(rng.choice(size, size=count, replace=False))


def _set_checks(F, s, K, allowance, constant, max_multiplicity,
                multiplicity_bound, upper=None):
    """Returns the AugmentChecks of an augmented interval family with
    target size K·δ^-s."""
    e = F.scale.delta_exp
    target = float(K) * 2.0 ** (e * float(s))
    upper = target if upper is None else upper
    lower = target / (float(constant) * allowance)
    katz_tao_constant = float(constant) * float(K) * allowance
    report = check_katz_tao(F, s, katz_tao_constant)
    measured = report.achieved_constant / (float(K) * allowance)
    return AugmentChecks(
        lower <= len(F) <= upper, report.ok,
        max_multiplicity <= multiplicity_bound, len(F), lower, upper,
        allowance, katz_tao_constant, measured, max_multiplicity,
        multiplicity_bound)


def _failed(checks):
    names = []
    for name, ok in (("(a) size window", checks.size_ok),
                     ("(b) Katz-Tao bound", checks.katz_tao_ok),
                     ("(c) multiplicity", checks.multiplicity_ok)):
        if not ok:
            names.append(name)
    return names


def augment_translates(S, s, K, upsilon, seed, retries=DEFAULT_RETRIES,
                       constant=DEFAULT_AUGMENT_CONSTANT, log_loss=False):
    """Returns the union A of N ~ Kδ^-s/|S| random translates of an
    interval set S, with N = max(1, floor(Kδ^-s/|S|)).

    Every attempt is checked for (a) Kδ^-s >= |A| >= Kδ^-s/(c·δ^-υ);
    (b) A is a (δ,s,c·K·δ^-υ)-Katz-Tao set; (c) no δ-interval is covered
    by more than δ^-υ translates. In log-loss mode δ^-υ is replaced by
    log2(1/δ). Failed attempts are resampled with seeds derived from the
    master seed and the attempt number.

    Args:
        S: A uniform (δ,s,K)-Katz-Tao interval Family.
        s: A number in (0, 1].
        K: A number >= 1.
        upsilon: A nonnegative number.
        seed: A nonnegative integer.
        retries: The number of attempts.
        constant: The implicit constant c.
        log_loss: Whether to use the logarithmic allowance.

    Returns:
        A TranslateResult.

    Raises:
        AugmentError: If S fails the hypotheses.
        AugmentRetriesError: If every attempt fails a postcondition.
        TypeError: If one or more inputs has an unexpected type.
        ValueError: If one or more inputs is out of range.
    """
    if not isinstance(S, Family):
        raise TypeError(f"Family {S} is not a Family.")
    if S.kind != FamilyKind.INTERVALS:
        raise AugmentError(f"Family of kind {S.kind} is not an interval "
                           f"family.")
    validate_seed(seed)
    s, K, upsilon, constant = _validate_parameters(
        s, K, upsilon, retries, constant, "K")
    if not len(S):
        raise AugmentError("Cannot augment an empty family.")
    _require_hypotheses(S, s, K, "Input set")
    e, size = S.scale.delta_exp, S.scale.size
    allowance = _allowance(e, upsilon, log_loss)
    count = max(1, math.floor(float(K) * 2.0 ** (e * float(s)) / len(S)))
    elements = S.array[:, 0]
    checks = None
    for attempt in range(retries):
        rng = np.random.default_rng(derived_seed(seed, attempt))
        translates = _random_offsets(rng, count, size)
        shifted = (elements[:, None] + translates[None, :]) % size
        values, multiplicity = np.unique(shifted, return_counts=True)
        A = S.with_elements(values)
        checks = _set_checks(A, s, K, allowance, constant,
                             int(multiplicity.max()), allowance)
        if not _failed(checks):
            return TranslateResult(A, tuple(int(t) for t in translates),
                                   attempt + 1, checks)
    raise AugmentRetriesError(
        f"All {retries} attempts failed; the last failed "
        f"{', '.join(_failed(checks))}.")


def augment_rigid(T, s, K1, K2, upsilon, seed, retries=DEFAULT_RETRIES,
                  constant=DEFAULT_AUGMENT_CONSTANT, log_loss=False):
    """Inflates a directional tube family by random direction shifts
    followed by intercept translates shared by every direction.

    With N1 = max(1, floor(K1·δ^-s/|Λ|)) shifts and
    N2 = max(1, floor(K2·δ^-(1-s)/max|T_θ|)) translates, every tube
    (θ, b) yields the tubes (θ + σ, b + τ) mod 2^e. Fibers landing on
    the same direction are merged. Every attempt is checked for the size
    window and Katz-Tao bound of the new direction set (exponent s,
    constant c·K1·δ^-υ) and of every new fiber (exponent 1 - s,
    constant c·K2·δ^-υ), and for a per-tube multiplicity of at most
    c·δ^-υ.

    Args:
        T: A DirectionalTubeFamily whose directions are a uniform
           (δ,s,K1)-Katz-Tao set and whose fibers are uniform
           (δ,1-s,K2)-Katz-Tao sets.
        s: A number in (0, 1).
        K1: A number >= 1.
        K2: A number >= 1.
        upsilon: A nonnegative number.
        seed: A nonnegative integer.
        retries: The number of attempts.
        constant: The implicit constant c.
        log_loss: Whether to use the logarithmic allowance.

    Returns:
        A RigidResult.

    Raises:
        AugmentError: If T fails the hypotheses.
        AugmentRetriesError: If every attempt fails a postcondition.
    """
    if not isinstance(T, DirectionalTubeFamily):
        raise TypeError(f"Family {T} is not a DirectionalTubeFamily.")
    validate_seed(seed)
    s, K1, upsilon, constant = _validate_parameters(
        s, K1, upsilon, retries, constant, "K1")
    if s == 1:
        raise ValueError("Exponent s 1 leaves no room for fibers.")
    K2 = as_fraction(K2, "K2")
    if K2 < 1:
        raise ValueError(f"K2 {K2} is less than 1.")
    _require_hypotheses(T.direction_family(), s, K1, "Direction set")
    for a in T.directions:
        _require_hypotheses(T.fiber_family(a), 1 - s, K2, f"Fiber {a}")
    e, size = T.scale.delta_exp, T.scale.size
    allowance = _allowance(e, upsilon, log_loss)
    multiplicity_bound = float(constant) * allowance
    n_shifts = max(1, math.floor(
        float(K1) * 2.0 ** (e * float(s)) / len(T.directions)))
    largest_fiber = max(len(fiber) for fiber in T.fibers.values())
    n_translates = max(1, math.floor(
        float(K2) * 2.0 ** (e * float(1 - s)) / largest_fiber))
    tubes = T.tubes().array
    fiber_ceiling = float(constant) * allowance * float(K2) * \
        2.0 ** (e * float(1 - s))
    direction_checks = fiber_checks = None
    multiplicity = 0
    for attempt in range(retries):
        rng = np.random.default_rng(derived_seed(seed, attempt))
        shifts = _random_offsets(rng, n_shifts, size)
        translates = _random_offsets(rng, n_translates, size)
        slopes = (tubes[:, 0, None, None] + shifts[None, :, None]) % size
        intercepts = (tubes[:, 1, None, None] +
                      translates[None, None, :]) % size
        slopes, intercepts = np.broadcast_arrays(slopes, intercepts)
        keys = slopes.reshape(-1) * size + intercepts.reshape(-1)
        values, counts = np.unique(keys, return_counts=True)
        multiplicity = int(counts.max())
        new_slopes, new_intercepts = np.divmod(values, size)
        directions = np.unique(new_slopes)
        fibers = {int(a): new_intercepts[new_slopes == a] for a in directions}
        augmented = DirectionalTubeFamily(T.scale, directions, fibers)
        direction_multiplicity = int(np.unique(
            (T.direction_family().array[:, 0, None] + shifts[None, :]) % size,
            return_counts=True)[1].max())
        direction_checks = _set_checks(
            augmented.direction_family(), s, K1, allowance, constant,
            direction_multiplicity, multiplicity_bound)
        all_fiber_checks = [
            _set_checks(augmented.fiber_family(a), 1 - s, K2, allowance,
                        constant, multiplicity, multiplicity_bound,
                        upper=fiber_ceiling)
            for a in augmented.directions]
        # Report the first failure, or else the worst fiber.
        fiber_checks = next(
            (checks for checks in all_fiber_checks if _failed(checks)),
            max(all_fiber_checks, key=lambda c: c.measured_constant))
        if not _failed(direction_checks) and not _failed(fiber_checks):
            return RigidResult(
                augmented, tuple(int(x) for x in shifts),
                tuple(int(x) for x in translates), attempt + 1,
                direction_checks, fiber_checks, multiplicity,
                multiplicity_bound)
    failed = [f"directions {name}" for name in _failed(direction_checks)]
    failed += [f"fibers {name}" for name in _failed(fiber_checks)]
    raise AugmentRetriesError(
        f"All {retries} attempts failed; the last failed "
        f"{', '.join(failed)}.")


def maximal_configuration(delta_exp, s, seed, K1=1, K2=1, upsilon=0,
                          retries=DEFAULT_RETRIES,
                          constant=DEFAULT_AUGMENT_CONSTANT, log_loss=True):
    """Returns the augmentation of the configuration with one direction
    and one tube, a random configuration with about δ^-s directions
    and δ^-(1-s) tubes per direction."""
    scale = Scale(delta_exp, 1)
    seed_family = DirectionalTubeFamily(scale, (0,), {0: (0,)})
    return augment_rigid(seed_family, s, K1, K2, upsilon, seed,
                         retries=retries, constant=constant,
                         log_loss=log_loss)
