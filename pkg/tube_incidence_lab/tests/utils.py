from tube_incidence_lab.constants import FamilyKind
from tube_incidence_lab.grid_core import Family
from tube_incidence_lab.grid_core import Square
from tube_incidence_lab.grid_core import incident
import itertools
import numpy as np


def random_tubes(scale, count, seed, thickness=1):
    """Return a tube Family of at most count random tubes whose strips
    meet the unit square."""
    rng = np.random.default_rng(seed)
    size = scale.size
    slopes = rng.integers(0, size + 1, size=count)
    intercepts = rng.integers(0, size, size=count) - \
        rng.integers(0, 2, size=count) * slopes // 2
    return Family(scale, FamilyKind.TUBES,
                  np.stack([slopes, intercepts], axis=1), thickness)


def random_squares(scale, count, seed):
    """Return a square Family of at most count random squares."""
    rng = np.random.default_rng(seed)
    return Family(scale, FamilyKind.SQUARES,
                  rng.integers(0, scale.size, size=(count, 2)))


def brute_force_richness(T):
    """Return a dict mapping every square met by a tube of T to the
    number of tubes meeting it, by testing every square against every
    tube."""
    size = T.scale.size
    counts = dict()
    tubes = T.tubes()
    for col, row in itertools.product(range(size), range(size)):
        p = Square(T.scale, col, row)
        count = sum(1 for tube in tubes if incident(p, tube))
        if count:
            counts[(col, row)] = count
    return counts


def triple_sum_multiplicities(points, cell_side=1.0):
    """Return the number of ordered triples of points whose sum falls in
    each grid cell of the given side, for points in integer-friendly
    units."""
    cells = dict()
    for p, q, r in itertools.product(points, repeat=3):
        key = tuple(int(np.floor((p[i] + q[i] + r[i]) / cell_side))
                    for i in range(2))
        cells[key] = cells.get(key, 0) + 1
    return cells


def two_point_moment(R, h, p):
    """Return Σ_k |1 + e^(-2πi k·h)|^p over k in [-R/2, R/2)², the
    moment of two unit point masses at 0 and h, by direct summation."""
    frequencies = np.arange(-R // 2, R // 2)
    total = 0.0
    for k1 in frequencies:
        for k2 in frequencies:
            phase = -2 * np.pi * (k1 * h[0] + k2 * h[1])
            total += abs(1 + np.exp(1j * phase)) ** p
    return total
