from collections import namedtuple
from numpy.polynomial import Polynomial
from scipy import stats
from tube_incidence_lab.constants import ENERGY_MAX_TRIPLES
from tube_incidence_lab.grid_core import Scale
from tube_incidence_lab.set_tools import generate_binary_ad_regular
from tube_incidence_lab.set_tools import generate_random_frostman
from tube_incidence_lab.utils import ComputeBudgetError
from tube_incidence_lab.utils import as_fraction
from tube_incidence_lab.utils import validate_seed
import math
import numpy as np
import scipy.fft

"""This module contains the additive energy of δ-separated sets on
curves and the Fourier moments of Frostman measures on curves.

Points are planar coordinates in [0, 1]², expressed in units of δ when
binned. Curves are graphs x ↦ (x, γ(x)) over x in [0, 1]."""


class EnergyError(Exception):
    """The base class for exceptions in this module."""


class EnergyBudgetError(EnergyError, ComputeBudgetError):
    """Raised when a triple enumeration exceeds the compute budget."""


class CurvatureError(EnergyError):
    """Raised when a curve has a vanishing second derivative."""


PARABOLA = "parabola"
CIRCLE = "circle"
CANTOR = "cantor"
FROSTMAN = "frostman"

# The number of sample points used to bound |γ''| from below.
CURVATURE_SAMPLES = 1025
# The number of triples summed per vectorized chunk.
TRIPLE_CHUNK = 1 << 22
# The number of ball centers handled per vectorized chunk.
CENTER_CHUNK = 256

FrostmanReport = namedtuple(
    "FrostmanReport", "ok constant worst_radius_exp worst_center bound")

EnergyReport = namedtuple("EnergyReport", "lower upper triples cell_side")

MomentReport = namedtuple(
    "MomentReport",
    "moment p sup parseval_lhs parseval_rhs parseval_error")

FitResult = namedtuple(
    "FitResult", "slope intercept residual slope_stderr points")


class Curve(namedtuple("Curve", "name coefficients")):
    """A curved graph x ↦ (x, γ(x)) on [0, 1].

    The built-in curves are the parabola γ(x) = x² and the circle arc
    γ(x) = 1 - sqrt(1 - x²/2), which stays in [0, 1] with |γ''| >= 1/2.
    A polynomial curve is given by its coefficients in increasing degree.

    Attributes:
        name: PARABOLA, CIRCLE, or "polynomial".
        coefficients: A tuple of floats for a polynomial curve, else None.

    Typical Usage Example:

        curve = Curve.from_spec("0,0,1")
        y = curve.evaluate(np.linspace(0, 1, 5))
    """

    __slots__ = ()

    @classmethod
    def from_spec(cls, spec):
        """Returns a Curve from a built-in name or a comma-separated
        list of polynomial coefficients, checking the curvature
        condition.

        Raises:
            CurvatureError: If min |γ''| on [0, 1] is not positive.
            ValueError: If the spec cannot be parsed.
        """
        if isinstance(spec, Curve):
            return spec
        if not isinstance(spec, str):
            raise TypeError(f"Curve {spec} is not a string.")
        spec = spec.strip().lower()
        if spec in (PARABOLA, CIRCLE):
            return cls(spec, None)
        try:
            coefficients = tuple(float(x) for x in spec.split(","))
        except ValueError:
            raise ValueError(
                f"Curve {spec} is not a built-in curve or a list of "
                f"polynomial coefficients.")
        curve = cls("polynomial", coefficients)
        if curve.min_curvature() <= 0:
            raise CurvatureError(
                f"Polynomial {coefficients} has min |γ''| = 0 on [0, 1].")
        return curve

    def evaluate(self, x):
        x = np.asarray(x, dtype=np.float64)
        if self.name == PARABOLA:
            return x * x
        if self.name == CIRCLE:
            return 1 - np.sqrt(1 - x * x / 2)
        return Polynomial(self.coefficients)(x)

    def min_curvature(self):
        """Returns min |γ''| over a fine sample of [0, 1]."""
        x = np.linspace(0, 1, CURVATURE_SAMPLES)
        if self.name == PARABOLA:
            return 2.0
        if self.name == CIRCLE:
            return float(np.min(np.abs(0.5 * (1 - x * x / 2) ** -1.5)))
        second = Polynomial(self.coefficients).deriv(2)
        return float(np.min(np.abs(second(x))))


# A δ-separated set of points on a curve.
CurveSet = namedtuple("CurveSet", "curve points delta_exp s frostman")

# A gridded measure: masses[i, j] is the mass of the cell
# [i/R, (i+1)/R) x [j/R, (j+1)/R).
GridMeasure = namedtuple("GridMeasure", "resolution masses total")


def frostman_ball_check(points, e, s, C=4):
    """Checks |S ∩ B(y, r)| <= C (r/δ)^s for every point y of S and
    every dyadic r = 2^-k, k = 0..e, using open Euclidean balls.

    Args:
        points: An array of shape (n, 2).
        e: The delta exponent.
        s: The exponent.
        C: The constant.

    Returns:
        A FrostmanReport.
    """
    s = float(as_fraction(s, "Exponent s"))
    points = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    radii = 2.0 ** -np.arange(e + 1, dtype=np.float64)
    bounds = (radii * 2.0 ** e) ** s
    worst = (0.0, None, None)
    for start in range(0, len(points), CENTER_CHUNK):
        centers = points[start:start + CENTER_CHUNK]
        distances = np.sqrt(np.square(
            centers[:, None, :] - points[None, :, :]).sum(axis=2))
        counts = (distances[:, :, None] < radii[None, None, :]).sum(axis=1)
        ratios = counts / bounds[None, :]
        i, k = np.unravel_index(np.argmax(ratios), ratios.shape)
        if ratios[i, k] > worst[0]:
            worst = (float(ratios[i, k]), int(k), tuple(centers[i]))
    constant, k, center = worst
    return FrostmanReport(constant <= float(C) * (1 + 1e-9), constant, k,
                          center, float(C))


def sample_curve_set(curve, e, s, seed=0, kind=CANTOR):
    """Returns a δ-separated set of points on the curve, δ = 2^-e, whose
    parameters form a Cantor or random Frostman set of exponent s.

    Args:
        curve: A Curve or a curve spec string.
        e: The delta exponent.
        s: A number in [0, 1].
        seed: A nonnegative integer.
        kind: CANTOR or FROSTMAN.

    Returns:
        A CurveSet with the Frostman report attached.

    Raises:
        CurvatureError: If a polynomial curve is flat somewhere.
        ValueError: If kind is unknown.
    """
    curve = Curve.from_spec(curve)
    validate_seed(seed)
    s = as_fraction(s, "Exponent s")
    if kind == CANTOR:
        parameters = generate_binary_ad_regular(e, s, seed).array[:, 0]
    elif kind == FROSTMAN:
        if s == 0:
            raise ValueError("Exponent s 0 is not positive.")
        parameters = generate_random_frostman(
            Scale(e, 1), s, seed, 1).array[:, 0]
    else:
        raise ValueError(f"Kind {kind} is not {CANTOR} or {FROSTMAN}.")
    x = np.sort(parameters).astype(np.float64) / 2.0 ** e
    points = np.stack([x, curve.evaluate(x)], axis=1)
    return CurveSet(curve, points, e, s, frostman_ball_check(points, e, s))


def _cell_counts(keys_and_counts):
    keys = np.concatenate([k for k, _ in keys_and_counts])
    counts = np.concatenate([c for _, c in keys_and_counts])
    unique, inverse = np.unique(keys, return_inverse=True)
    totals = np.zeros(len(unique), dtype=np.int64)
    np.add.at(totals, inverse.reshape(-1), counts)
    return unique, totals


def energy3(S, c=1):
    """Brackets the sixfold energy |{(s1..s6): |s1+s2+s3-s4-s5-s6| <~ cδ}|
    by binning all triple sums into cells of side cδ.

    Args:
        S: A CurveSet.
        c: The positive cell side in units of δ.

    Returns:
        An EnergyReport with lower = Σ n(cell)² and upper = Σ n(cell)
        times the count over its 3 x 3 neighbourhood.

    Raises:
        EnergyBudgetError: If |S|³ exceeds the triple budget.
    """
    if not isinstance(S, CurveSet):
        raise TypeError(f"Curve set {S} is not a CurveSet.")
    c = float(as_fraction(c, "Cell side"))
    if c <= 0:
        raise ValueError(f"Cell side {c} is not positive.")
    n = len(S.points)
    triples = n ** 3
    if triples > ENERGY_MAX_TRIPLES:
        raise EnergyBudgetError(
            f"{triples} triples exceed the budget {ENERGY_MAX_TRIPLES}; "
            f"lower e or s.")
    if not n:
        return EnergyReport(0, 0, 0, c)
    units = S.points * 2.0 ** S.delta_exp / c
    # Triple sums of points in [0, 1]² lie in [0, 3 / (cδ)]².
    width = int(math.ceil(3 * 2.0 ** S.delta_exp / c)) + 4
    pairs = (units[:, None, :] + units[None, :, :]).reshape(-1, 2)
    step = max(1, TRIPLE_CHUNK // len(pairs))
    partial = []
    for start in range(0, n, step):
        sums = units[start:start + step, None, :] + pairs[None, :, :]
        cells = np.floor(sums.reshape(-1, 2)).astype(np.int64) + 1
        keys = cells[:, 0] * width + cells[:, 1]
        partial.append(np.unique(keys, return_counts=True))
    keys, counts = _cell_counts(partial)
    lower = int(np.dot(counts, counts))
    neighbourhood = np.zeros_like(counts)
    for dx in (-1, 0, 1):
        for dy in (-1, 0, 1):
            shifted = keys + dx * width + dy
            position = np.searchsorted(keys, shifted)
            position = np.minimum(position, len(keys) - 1)
            found = keys[position] == shifted
            neighbourhood[found] += counts[position[found]]
    upper = int(np.dot(counts, neighbourhood))
    return EnergyReport(lower, upper, triples, c)


def cantor_measure(curve, e, s, R, seed=0):
    """Returns the gridded Frostman measure of a Cantor set of exponent
    s on the curve: equal mass 2^-floor(es) on each surviving δ-interval
    of parameters, placed in the grid cell of side 1/R containing the
    curve point.

    Args:
        curve: A Curve or a curve spec string.
        e: The delta exponent of the Cantor construction.
        s: A number in [0, 1].
        R: The grid resolution, a power of two.
        seed: A nonnegative integer.

    Returns:
        A GridMeasure of total mass 1.
    """
    _validate_resolution(R)
    S = sample_curve_set(curve, e, s, seed, CANTOR)
    cells = np.clip(np.floor(S.points * R).astype(np.int64), 0, R - 1)
    masses = np.zeros((R, R))
    np.add.at(masses, (cells[:, 0], cells[:, 1]), 1.0 / len(S.points))
    return GridMeasure(R, masses, float(masses.sum()))


def point_measure(R, points, weights=None):
    """Returns the gridded measure of point masses at the given points."""
    _validate_resolution(R)
    points = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    weights = np.ones(len(points)) if weights is None else \
        np.asarray(weights, dtype=np.float64)
    cells = np.clip(np.floor(points * R).astype(np.int64), 0, R - 1)
    masses = np.zeros((R, R))
    np.add.at(masses, (cells[:, 0], cells[:, 1]), weights)
    return GridMeasure(R, masses, float(masses.sum()))


def _validate_resolution(R):
    if isinstance(R, bool) or not isinstance(R, int):
        raise TypeError(f"Resolution {R} is not an integer.")
    if R < 1 or R & (R - 1):
        raise ValueError(f"Resolution {R} is not a power of two.")


def mu_hat_moments(mu, R, p):
    """Returns Σ_k |μ̂(k)|^p over the integer frequencies k in
    [-R/2, R/2)², with μ̂(k) = Σ_cells m·e^(-2πi k·x) at cell corners x.

    Args:
        mu: A GridMeasure.
        R: The resolution, equal to mu.resolution.
        p: 4 or 6, or any positive number.

    Returns:
        A MomentReport with sup = |μ̂(0)| = total mass and the two sides
        of Parseval's identity Σ|μ̂|² = R²·Σ m².

    Raises:
        EnergyError: If the resolutions differ.
    """
    if not isinstance(mu, GridMeasure):
        raise TypeError(f"Measure {mu} is not a GridMeasure.")
    _validate_resolution(R)
    if mu.resolution != R:
        raise EnergyError(
            f"Measure resolution {mu.resolution} does not match R {R}.")
    p = float(as_fraction(p, "Exponent p"))
    if p <= 0:
        raise ValueError(f"Exponent p {p} is not positive.")
    modulus = np.abs(scipy.fft.fft2(mu.masses)).reshape(-1)
    moment = math.fsum(modulus ** p)
    lhs = math.fsum(modulus ** 2)
    rhs = R * R * math.fsum(np.square(mu.masses).reshape(-1))
    error = abs(lhs - rhs) / rhs if rhs else abs(lhs)
    return MomentReport(moment, p, float(modulus[0]), lhs, rhs, error)


def exponent_fit(table):
    """Fits log2 Y = slope·log2 X + intercept by least squares.

    Args:
        table: An iterable of at least two (X, Y) pairs of positive
               numbers with distinct X.

    Returns:
        A FitResult; residual is the root mean square of the log2
        residuals and slope_stderr the standard error of the slope.
    """
    table = sorted((float(x), float(y)) for x, y in table)
    if len(table) < 2:
        raise EnergyError(f"Table of {len(table)} points is too short.")
    if any(x <= 0 or y <= 0 for x, y in table):
        raise ValueError("Table values are not all positive.")
    log_x = np.log2([x for x, _ in table])
    log_y = np.log2([y for _, y in table])
    if np.ptp(log_x) == 0:
        raise EnergyError("Table X values are all equal.")
    fit = stats.linregress(log_x, log_y)
    residuals = log_y - (fit.slope * log_x + fit.intercept)
    return FitResult(float(fit.slope), float(fit.intercept),
                     float(np.sqrt(np.mean(np.square(residuals)))),
                     float(fit.stderr), len(table))


def reference_exponents(s):
    """Returns the proved and conjectured L⁶ exponents of R for
    Frostman measures of exponent s on curves: 2 - 2s - s/4 and
    2 - 3s."""
    s = float(as_fraction(s, "Exponent s"))
    return 2 - 2 * s - s / 4, 2 - 3 * s
