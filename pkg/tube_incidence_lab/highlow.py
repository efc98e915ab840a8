from collections import namedtuple
from fractions import Fraction
from tube_incidence_lab.constants import DEFAULT_HEAVY_BALL_CONSTANT
from tube_incidence_lab.constants import FamilyKind
from tube_incidence_lab.constants import HIGHLOW_MAX_EXP
from tube_incidence_lab.constants import TUBE_BATCH_SIZE
from tube_incidence_lab.grid_core import Family
from tube_incidence_lab.grid_core import incident_row_range
from tube_incidence_lab.incidence_engine import richness_map
from tube_incidence_lab.utils import ComputeBudgetError
from tube_incidence_lab.utils import as_fraction
from tube_incidence_lab.utils import parallel_map
import math
import numpy as np
import scipy.fft

"""This module contains the high-low frequency split of the tube sum
function f = Σ_T φ_T and the heavy-ball scale search.

Grid functions are arrays indexed [col, row] over the 2^e x 2^e grid of
square centers. Frequencies are integers in [-2^(e-1), 2^(e-1)), one
cycle per unit length."""


class HighLowError(Exception):
    """The base class for exceptions in this module."""


class HighLowBudgetError(HighLowError, ComputeBudgetError):
    """Raised when a grid is too large for the Fourier split."""


# The output of fourier_split. Norms are integrals over [0, 1]², that is
# sums of squared samples times δ². The cross term is 2<f_low, f_high>.
SplitResult = namedtuple(
    "SplitResult",
    "f f_low f_high high_energy low_sup high_ratio total_energy "
    "low_energy cross_term reconstruction_error")

# One row of a heavy_ball_scale table.
HeavyBallRow = namedtuple(
    "HeavyBallRow", "delta_tilde_exp radius threshold fraction")

# The output of heavy_ball_scale. The witnesses are the heavy squares at
# the selected scale.
HeavyBallResult = namedtuple(
    "HeavyBallResult",
    "delta_tilde_exp fraction witnesses table hypothesis_holds "
    "hypothesis_ratio squares")


def _validate_tubes(T):
    if not isinstance(T, Family):
        raise TypeError(f"Tube family {T} is not a Family.")
    if T.kind != FamilyKind.TUBES:
        raise HighLowError(f"Family of kind {T.kind} is not a tube family.")


def _validate_beta(beta):
    beta = as_fraction(beta, "Beta")
    if not 0 < beta < 1:
        raise ValueError(f"Beta {beta} is not in (0, 1).")
    return beta


def _require_budget(scale):
    if scale.delta_exp > HIGHLOW_MAX_EXP:
        raise HighLowBudgetError(
            f"Delta exponent {scale.delta_exp} exceeds the Fourier split "
            f"cap {HIGHLOW_MAX_EXP}; lower e.")


def tube_sum_function(T):
    """Returns f = Σ_T φ_T sampled at square centers, where φ_T equals 1
    within vertical distance (c + 1)δ of the tube's line and falls to 0
    along a raised cosine over a further (c + 1)δ. A square meeting T
    has its center within (c + 1)δ of the line, so φ_T >= 1_T on the
    grid.

    Args:
        T: A tube Family with e <= 12.

    Returns:
        A float array of shape (2^e, 2^e).

    Raises:
        HighLowBudgetError: If e exceeds the cap.
    """
    _validate_tubes(T)
    _require_budget(T.scale)
    size = T.scale.size
    plateau = float(T.thickness) + 1
    reach = int(math.ceil(2 * plateau)) + 1
    f = np.zeros(size * size)
    cols = np.arange(size, dtype=np.float64)[None, :, None]
    window = np.arange(-reach, reach + 1, dtype=np.int64)[None, None, :]
    for start in range(0, len(T), TUBE_BATCH_SIZE):
        tubes = T.array[start:start + TUBE_BATCH_SIZE].astype(np.float64)
        a, b = tubes[:, 0, None, None], tubes[:, 1, None, None]
        # The line's height at each column center, in row-center units.
        height = a * (cols + 0.5) / size + b - 0.5
        rows = np.floor(height).astype(np.int64) + window
        distance = np.abs(rows - height)
        fall = np.clip((distance - plateau) / plateau, 0.0, 1.0)
        values = np.cos(0.5 * np.pi * fall) ** 2
        col_index = np.broadcast_to(
            np.arange(size, dtype=np.int64)[None, :, None], rows.shape)
        valid = (rows >= 0) & (rows < size) & (values > 0)
        f += np.bincount(col_index[valid] * size + rows[valid],
                         weights=values[valid], minlength=size * size)
    return f.reshape(size, size)


def _radial_cutoff(size, radius):
    """Returns ψ on the frequency lattice: 1 on |ξ| <= radius, 0 on
    |ξ| >= 2·radius, and a raised cosine in between."""
    frequencies = scipy.fft.fftfreq(size, d=1.0 / size)
    xi = np.hypot(frequencies[:, None], frequencies[None, :])
    fall = np.clip((xi - radius) / radius, 0.0, 1.0)
    return np.cos(0.5 * np.pi * fall) ** 2


def fourier_split(T, beta, threads=1):
    """Splits the tube sum function into low and high frequency parts
    with a radial cutoff between δ^(-1+β/2) and 2δ^(-1+β/2), and
    reports ‖f_high‖₂², ‖f_low‖∞, and ‖f_high‖₂²/(δ^(1-β)|T|).

    Args:
        T: A tube Family with e <= 12.
        beta: A number in (0, 1).
        threads: The number of FFT workers.

    Returns:
        A SplitResult.

    Raises:
        HighLowBudgetError: If e exceeds the cap.
    """
    _validate_tubes(T)
    beta = _validate_beta(beta)
    _require_budget(T.scale)
    size = T.scale.size
    cell = 1.0 / size ** 2
    f = tube_sum_function(T)
    if not len(T):
        zeros = np.zeros_like(f)
        return SplitResult(f, zeros, zeros.copy(), 0.0, 0.0, 0.0, 0.0, 0.0,
                           0.0, 0.0)
    radius = size ** (1 - float(beta) / 2)
    psi = _radial_cutoff(size, radius)
    spectrum = scipy.fft.fft2(f, workers=threads)
    f_low = scipy.fft.ifft2(spectrum * psi, workers=threads).real
    f_high = scipy.fft.ifft2(spectrum * (1 - psi), workers=threads).real
    high_energy = float(np.square(f_high).sum() * cell)
    low_energy = float(np.square(f_low).sum() * cell)
    total_energy = float(np.square(f).sum() * cell)
    cross = float(2 * (f_low * f_high).sum() * cell)
    normalizer = (1.0 / size) ** (1 - float(beta)) * len(T)
    return SplitResult(
        f, f_low, f_high, high_energy, float(np.abs(f_low).max()),
        high_energy / normalizer, total_energy, low_energy, cross,
        float(np.abs(f_low + f_high - f).max()))


def _tubes_meeting_boxes(T, centers, radius):
    """Returns, for every center, the number of tubes meeting the
    Chebyshev box of the given radius around it. Tube slopes are
    nonnegative, so a tube meets the box iff its lowest row at the
    box's first column is at most the box's top row and its highest
    row at the box's last column is at least the box's bottom row."""
    size = T.scale.size
    col_lo = np.clip(centers[:, 0] - radius, 0, size - 1)[:, None]
    col_hi = np.clip(centers[:, 0] + radius, 0, size - 1)[:, None]
    row_lo = (centers[:, 1] - radius)[:, None]
    row_hi = (centers[:, 1] + radius)[:, None]
    a, b = T.array[None, :, 0], T.array[None, :, 1]
    low, _ = incident_row_range(size, a, b, T.thickness, col_lo)
    _, high = incident_row_range(size, a, b, T.thickness, col_hi)
    return ((low <= row_hi) & (high >= row_lo)).sum(axis=1)


def heavy_ball_scale(T, r0, beta, upsilon,
                     c=DEFAULT_HEAVY_BALL_CONSTANT, threads=1):
    """Searches the dyadic scales δ̃ = 2^-k in [δ^(1-β/2), 1], from the
    smallest up, for the first at which at least half of the squares of
    richness >= r0 see at least c·r0·δ̃/δ tubes meeting the box of
    radius δ̃·δ^-υ around them.

    The hypothesis |P_r0| >= δ^(-2-β)/r0 is checked and reported; the
    search runs either way.

    Args:
        T: A tube Family.
        r0: A positive integer.
        beta: A number in (0, 1).
        upsilon: A nonnegative number.
        c: The constant of the tube count.
        threads: The number of worker threads over candidate scales.

    Returns:
        A HeavyBallResult; delta_tilde_exp is None if no scale works.
    """
    _validate_tubes(T)
    if isinstance(r0, bool) or not isinstance(r0, int):
        raise TypeError(f"Richness {r0} is not an integer.")
    if r0 < 1:
        raise ValueError(f"Richness {r0} is less than 1.")
    beta = _validate_beta(beta)
    upsilon = as_fraction(upsilon, "Upsilon")
    if upsilon < 0:
        raise ValueError(f"Upsilon {upsilon} is negative.")
    c = float(as_fraction(c, "Constant"))
    e = T.scale.delta_exp
    cols, rows, counts = richness_map(T, threads=threads).nonzero()
    heavy = counts >= r0
    centers = np.stack([cols[heavy], rows[heavy]], axis=1)
    hypothesis_ratio = len(centers) * r0 / 2.0 ** (e * (2 + float(beta)))
    finest = math.floor((1 - Fraction(beta) / 2) * e)
    candidates = list(range(finest, -1, -1))

    def evaluate(k):
        radius = int(math.floor(2.0 ** (e - k) * 2.0 ** (e * float(upsilon))))
        threshold = c * r0 * 2.0 ** (e - k)
        if not len(centers):
            return HeavyBallRow(k, radius, threshold, 0.0), \
                np.zeros(0, dtype=bool)
        seen = _tubes_meeting_boxes(T, centers, radius)
        reached = seen >= threshold
        return HeavyBallRow(k, radius, threshold, float(reached.mean())), \
            reached

    results = parallel_map(evaluate, candidates, threads=threads)
    table = tuple(row for row, _ in results)
    squares = Family(T.scale, FamilyKind.SQUARES, centers)
    for row, reached in results:
        if row.fraction >= 0.5:
            return HeavyBallResult(
                row.delta_tilde_exp, row.fraction,
                squares.with_elements(centers[reached]), table,
                hypothesis_ratio >= 1, hypothesis_ratio, squares)
    return HeavyBallResult(None, 0.0, squares.with_elements([]), table,
                           hypothesis_ratio >= 1, hypothesis_ratio, squares)
