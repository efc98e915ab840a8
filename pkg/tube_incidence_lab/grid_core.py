from collections import namedtuple
from fractions import Fraction
from tube_incidence_lab.constants import AMBIENT_DIMENSION
from tube_incidence_lab.constants import DEFAULT_THICKNESS
from tube_incidence_lab.constants import FamilyKind
from tube_incidence_lab.utils import as_fraction
import math
import numpy as np

"""This module contains the dyadic grid model: scales, squares, tubes,
the point-line duality, the exact incidence predicate, and covering
numbers.

A square (col, row) is [col·δ, (col+1)·δ] × [row·δ, (row+1)·δ] with
δ = 2^-e. A tube (a_idx, b_idx) is the c·δ-neighborhood of the line
y = a·x + b with a = a_idx·δ and b = b_idx·δ, for x in [0, 1]. All
incidence decisions are made in integers at resolution 2^-2e."""


class GridError(Exception):
    """The base class for exceptions in this module."""


class Scale(namedtuple("Scale", "delta_exp block_exp")):
    """A dyadic resolution δ = 2^-e with uniformity block size T.

    Attributes:
        delta_exp: The exponent e.
        block_exp: The block size T, which divides e. The uniformity
                   levels are the scales 2^-jT for j = 0..m, m = e / T.
    """

    __slots__ = ()

    def __new__(cls, delta_exp, block_exp=1):
        for name, value in (("Delta exponent", delta_exp),
                            ("Block exponent", block_exp)):
            if isinstance(value, bool) or not isinstance(value, int):
                raise TypeError(f"{name} {value} is not an integer.")
        if delta_exp < 2:
            raise ValueError(f"Delta exponent {delta_exp} is less than 2.")
        if block_exp < 1:
            raise ValueError(f"Block exponent {block_exp} is not positive.")
        if delta_exp % block_exp:
            raise ValueError(
                f"Block exponent {block_exp} does not divide delta exponent "
                f"{delta_exp}.")
        return super().__new__(cls, delta_exp, block_exp)

    @property
    def levels(self):
        """The number m = e / T of block levels below the unit scale."""
        return self.delta_exp // self.block_exp

    @property
    def size(self):
        """The number 2^e of δ-intervals in [0, 1)."""
        return 1 << self.delta_exp

    @property
    def delta(self):
        """δ as an exact Fraction."""
        return Fraction(1, self.size)

    def level_exp(self, level):
        """Returns the exponent jT of the block scale at the given level.

        Raises:
            GridError: If the level is not in [0, m].
        """
        if isinstance(level, bool) or not isinstance(level, int):
            raise TypeError(f"Level {level} is not an integer.")
        if not 0 <= level <= self.levels:
            raise GridError(
                f"Level {level} is not in [0, {self.levels}].")
        return level * self.block_exp


def epsilon_for_block_exp(block_exp):
    """Returns the ε corresponding to the block size T, the solution of
    log2(2T) / T = ε."""
    if isinstance(block_exp, bool) or not isinstance(block_exp, int):
        raise TypeError(f"Block exponent {block_exp} is not an integer.")
    if block_exp < 1:
        raise ValueError(f"Block exponent {block_exp} is not positive.")
    return math.log2(2 * block_exp) / block_exp


def block_exp_for_epsilon(eps):
    """Returns the smallest block size T with log2(2T) / T <= ε.

    Args:
        eps: A number in (0, 1].

    Returns:
        A positive integer.

    Raises:
        ValueError: If eps is not in (0, 1].
    """
    eps = float(as_fraction(eps, "Epsilon"))
    if not 0 < eps <= 1:
        raise ValueError(f"Epsilon {eps} is not in (0, 1].")
    block_exp = 1
    while epsilon_for_block_exp(block_exp) > eps:
        block_exp = block_exp + 1
    return block_exp


def _validate_thickness(thickness):
    thickness = as_fraction(thickness, "Thickness")
    if thickness <= 0:
        raise ValueError(f"Thickness {thickness} is not positive.")
    return thickness


def _min_slope_plus_intercept(thickness):
    """Returns the least integer value of a_idx + b_idx for which the
    strip of a tube of the given thickness meets the unit square."""
    return math.floor(-thickness) + 1


class Square(namedtuple("Square", "scale col row")):
    """A δ-square of the grid, indexed by column and row."""

    __slots__ = ()

    def __new__(cls, scale, col, row):
        if not isinstance(scale, Scale):
            raise TypeError(f"Scale {scale} is not a Scale.")
        size = scale.size
        if not (0 <= col < size and 0 <= row < size):
            raise ValueError(
                f"Square ({col}, {row}) is outside the grid of size {size}.")
        return super().__new__(cls, scale, int(col), int(row))

    @property
    def index(self):
        return (self.col, self.row)


class Tube(namedtuple("Tube", "scale slope_idx intercept_idx thickness")):
    """A δ-tube: the c·δ-neighborhood of the line with slope a_idx·δ and
    intercept b_idx·δ, restricted to x in [0, 1]."""

    __slots__ = ()

    def __new__(cls, scale, slope_idx, intercept_idx,
                thickness=DEFAULT_THICKNESS):
        if not isinstance(scale, Scale):
            raise TypeError(f"Scale {scale} is not a Scale.")
        thickness = _validate_thickness(thickness)
        size = scale.size
        if not 0 <= slope_idx <= size:
            raise ValueError(
                f"Slope index {slope_idx} is not in [0, {size}].")
        if not -size <= intercept_idx < size:
            raise ValueError(
                f"Intercept index {intercept_idx} is not in [{-size}, "
                f"{size}).")
        if slope_idx + intercept_idx < _min_slope_plus_intercept(thickness):
            raise ValueError(
                f"Tube ({slope_idx}, {intercept_idx}) does not meet the unit "
                f"square.")
        return super().__new__(
            cls, scale, int(slope_idx), int(intercept_idx), thickness)

    @property
    def index(self):
        return (self.slope_idx, self.intercept_idx)


# A dyadic cell of side 2^-rho_exp, identified by its index tuple.
Cell = namedtuple("Cell", "rho_exp index")


def incident_row_range(size, slope_idx, intercept_idx, thickness, cols):
    """Returns the inclusive range of rows met by a tube in each of the
    given columns, before clipping to the grid.

    The tube meets square (col, row) iff the closed interval
    [a·x0 + b - cδ, a·x1 + b + cδ], x0 = col·δ, x1 = (col + 1)·δ, and
    the row interval [row·δ, (row + 1)·δ) overlap as half-open
    intervals. Every quantity is scaled by q·2^2e, where c = p / q.

    Args:
        size: The grid size 2^e.
        slope_idx: An integer or an integer array of slope indices.
        intercept_idx: An integer or an integer array of intercepts.
        thickness: A Fraction c.
        cols: An integer or an integer array of columns.

    Returns:
        A pair (row_lo, row_hi) of integers or integer arrays.
    """
    p, q = thickness.numerator, thickness.denominator
    lower = q * (slope_idx * cols + intercept_idx * size) - p * size
    upper = q * (slope_idx * (cols + 1) + intercept_idx * size) + p * size
    unit = q * size
    row_lo = lower // unit
    row_hi = -((-upper) // unit) - 1
    return row_lo, row_hi


def incident(p, T):
    """Returns whether the square p meets the tube T.

    Args:
        p: A Square.
        T: A Tube.

    Returns:
        A boolean.

    Raises:
        GridError: If the square and tube have different scales.
        TypeError: If one or more inputs has an unexpected type.
    """
    if not isinstance(p, Square):
        raise TypeError(f"Square {p} is not a Square.")
    if not isinstance(T, Tube):
        raise TypeError(f"Tube {T} is not a Tube.")
    if p.scale.delta_exp != T.scale.delta_exp:
        raise GridError(
            f"Square scale {p.scale} does not match tube scale {T.scale}.")
    row_lo, row_hi = incident_row_range(
        p.scale.size, T.slope_idx, T.intercept_idx, T.thickness, p.col)
    return row_lo <= p.row <= row_hi


class Family(object):
    """A deduplicated, lexicographically sorted family of squares, tubes,
    or δ-intervals at a common scale.

    Elements are index tuples: (i,) for intervals, (col, row) for
    squares, and (slope_idx, intercept_idx) for tubes. They are stored
    as an integer array of shape (n, width).

    Attributes:
        scale: The Scale shared by every element.
        kind: One of FamilyKind.ALL.
        thickness: The tube thickness factor c (reported for every kind).

    Typical Usage Example:

        scale = Scale(8, 2)
        family = Family(scale, FamilyKind.SQUARES, [(3, 5), (3, 5), (0, 1)])
        assert len(family) == 2
        coarse = covering_number(family, 4)
    """

    def __init__(self, scale, kind, elements, thickness=DEFAULT_THICKNESS):
        """Validates and stores the elements.

        Args:
            scale: A Scale.
            kind: One of FamilyKind.ALL.
            elements: An iterable of index tuples (or integers, for
                      intervals), or an integer array of shape
                      (n, width).
            thickness: The tube thickness factor c.

        Returns:
            None.

        Raises:
            GridError: If an element is out of range for the kind.
            TypeError: If one or more inputs has an unexpected type.
            ValueError: If the kind is unknown.
        """
        if not isinstance(scale, Scale):
            raise TypeError(f"Scale {scale} is not a Scale.")
        if kind not in FamilyKind.ALL:
            raise ValueError(f"Kind {kind} is not one of {FamilyKind.ALL}.")
        self.scale = scale
        self.kind = kind
        self.thickness = _validate_thickness(thickness)
        width = self.index_width
        array = np.asarray(
            elements if isinstance(elements, np.ndarray) else list(elements),
            dtype=np.int64)
        if array.size == 0:
            array = np.zeros((0, width), dtype=np.int64)
        elif array.ndim == 1 and width == 1:
            array = array.reshape(-1, 1)
        if array.ndim != 2 or array.shape[1] != width:
            raise GridError(
                f"Elements of a {kind} family must have {width} indices.")
        self._validate(array)
        if len(array):
            array = np.unique(array, axis=0)
        array.setflags(write=False)
        self._array = array
        self._members = None

    def _validate(self, array):
        if not len(array):
            return
        size = self.scale.size
        if self.kind == FamilyKind.TUBES:
            slopes, intercepts = array[:, 0], array[:, 1]
            bad = (
                (slopes < 0) | (slopes > size) |
                (intercepts < -size) | (intercepts >= size) |
                (slopes + intercepts <
                 _min_slope_plus_intercept(self.thickness)))
        else:
            bad = ((array < 0) | (array >= size)).any(axis=1)
        if bad.any():
            element = tuple(int(x) for x in array[np.argmax(bad)])
            raise GridError(
                f"Element {element} is out of range for a {self.kind} "
                f"family at scale {self.scale}.")

    @property
    def index_width(self):
        return 1 if self.kind == FamilyKind.INTERVALS else 2

    @property
    def ambient_dimension(self):
        return AMBIENT_DIMENSION[self.kind]

    @property
    def array(self):
        """The read-only integer array of shape (n, width)."""
        return self._array

    @property
    def elements(self):
        """The elements as a tuple of index tuples."""
        return tuple(tuple(int(x) for x in row) for row in self._array)

    def __len__(self):
        return len(self._array)

    def __iter__(self):
        for row in self._array:
            yield tuple(int(x) for x in row)

    def __contains__(self, index):
        if self._members is None:
            self._members = set(self)
        if isinstance(index, (Square, Tube)):
            index = index.index
        elif not isinstance(index, tuple):
            index = (index,)
        return tuple(index) in self._members

    def __eq__(self, other):
        if not isinstance(other, Family):
            return NotImplemented
        return (
            self.scale == other.scale and self.kind == other.kind and
            self.thickness == other.thickness and
            np.array_equal(self._array, other._array))

    def __hash__(self):
        return hash((self.scale, self.kind, self.thickness,
                     self._array.tobytes()))

    def __repr__(self):
        return (
            f"Family(scale={tuple(self.scale)}, kind={self.kind}, "
            f"size={len(self)}, thickness={self.thickness})")

    def with_elements(self, elements):
        """Returns a family of the same scale, kind, and thickness with
        the given elements."""
        return Family(self.scale, self.kind, elements, self.thickness)

    def with_scale(self, scale):
        """Returns the same elements reinterpreted at a scale with the
        same delta exponent but a different block size."""
        if scale.delta_exp != self.scale.delta_exp:
            raise GridError(
                f"Scale {scale} does not have delta exponent "
                f"{self.scale.delta_exp}.")
        return Family(scale, self.kind, self._array, self.thickness)

    def restrict(self, predicate):
        """Returns the subfamily of elements for which the predicate of
        an index tuple is true."""
        return self.with_elements([x for x in self if predicate(x)])

    def parents(self, rho_exp):
        """Returns the array of ρ-parent indices of every element, for
        ρ = 2^-rho_exp, in element order.

        Raises:
            GridError: If rho_exp is not in [0, e].
        """
        if not 0 <= rho_exp <= self.scale.delta_exp:
            raise GridError(
                f"Exponent {rho_exp} is not in [0, {self.scale.delta_exp}].")
        return self._array >> (self.scale.delta_exp - rho_exp)

    def parent_counts(self, rho_exp):
        """Returns the distinct ρ-parents and the number of elements in
        each, as a pair of arrays."""
        if not len(self):
            return np.zeros((0, self.index_width), dtype=np.int64), \
                np.zeros(0, dtype=np.int64)
        return np.unique(self.parents(rho_exp), axis=0, return_counts=True)

    def coarsen(self, level):
        """Returns the family of level-j parents as a family at scale
        2^-jT with the same block size.

        Raises:
            GridError: If the coarse scale is finer than δ or coarser
                       than 2^-2.
        """
        rho_exp = self.scale.level_exp(level)
        if rho_exp < 2:
            raise GridError(
                f"Level {level} gives a scale 2^-{rho_exp} that is too "
                f"coarse to coarsen to.")
        scale = Scale(rho_exp, self.scale.block_exp)
        parents = self.parents(rho_exp)
        if self.kind == FamilyKind.TUBES:
            # Parent slope indices may reach the chart endpoint 2^rho_exp.
            parents = parents.copy()
            parents[:, 0] = np.minimum(parents[:, 0], scale.size)
        return Family(scale, self.kind, parents, self.thickness)

    def squares(self):
        """Returns the elements as a list of Square objects."""
        if self.kind != FamilyKind.SQUARES:
            raise GridError(f"A {self.kind} family holds no squares.")
        return [Square(self.scale, col, row) for col, row in self]

    def tubes(self):
        """Returns the elements as a list of Tube objects."""
        if self.kind != FamilyKind.TUBES:
            raise GridError(f"A {self.kind} family holds no tubes.")
        return [Tube(self.scale, a, b, self.thickness) for a, b in self]

    @classmethod
    def from_squares(cls, scale, squares):
        return cls(scale, FamilyKind.SQUARES, [p.index for p in squares])

    @classmethod
    def from_tubes(cls, scale, tubes, thickness=DEFAULT_THICKNESS):
        return cls(scale, FamilyKind.TUBES, [T.index for T in tubes],
                   thickness)


def covering_number(F, rho_exp):
    """Returns the number of distinct ρ-parents containing an element of
    the family, for ρ = 2^-rho_exp. For tubes, parents are the ρ-tubes
    under the dual map.

    Args:
        F: A Family.
        rho_exp: An integer in [0, e].

    Returns:
        A nonnegative integer.

    Raises:
        GridError: If rho_exp is out of range.
        TypeError: If F is not a Family.
    """
    if not isinstance(F, Family):
        raise TypeError(f"Family {F} is not a Family.")
    if not len(F):
        return 0
    return len(F.parent_counts(rho_exp)[1])


def dual(obj):
    """Returns the dual of a Square, Tube, or Family: square (i, j)
    corresponds to the tube with slope index i and intercept index j.

    Raises:
        GridError: If a tube's indices fall outside the square range.
        TypeError: If the input has an unexpected type.
    """
    if isinstance(obj, Square):
        return Tube(obj.scale, obj.col, obj.row)
    if isinstance(obj, Tube):
        size = obj.scale.size
        if not (obj.slope_idx < size and obj.intercept_idx >= 0):
            raise GridError(f"Tube {obj.index} has no dual square.")
        return Square(obj.scale, obj.slope_idx, obj.intercept_idx)
    if isinstance(obj, Family):
        if obj.kind == FamilyKind.SQUARES:
            return Family(obj.scale, FamilyKind.TUBES, obj.array,
                          obj.thickness)
        if obj.kind == FamilyKind.TUBES:
            array = obj.array
            size = obj.scale.size
            if len(array) and ((array[:, 0] >= size).any() or
                               (array[:, 1] < 0).any()):
                raise GridError("Tube family has tubes with no dual square.")
            return Family(obj.scale, FamilyKind.SQUARES, array,
                          obj.thickness)
        raise GridError("An interval family has no dual.")
    raise TypeError(f"Object {obj} is not a Square, Tube, or Family.")


def parent(p, level):
    """Returns the level-j dyadic ancestor of a square, as a Cell of
    side 2^-jT.

    Raises:
        GridError: If the level is not in [0, m].
    """
    if not isinstance(p, Square):
        raise TypeError(f"Square {p} is not a Square.")
    rho_exp = p.scale.level_exp(level)
    shift = p.scale.delta_exp - rho_exp
    return Cell(rho_exp, (p.col >> shift, p.row >> shift))


def children(P, cell):
    """Returns the subfamily of elements of P contained in the given
    Cell."""
    if not isinstance(P, Family):
        raise TypeError(f"Family {P} is not a Family.")
    if not isinstance(cell, Cell):
        raise TypeError(f"Cell {cell} is not a Cell.")
    if len(cell.index) != P.index_width:
        raise GridError(f"Cell {cell} does not match a {P.kind} family.")
    if not len(P):
        return P
    mask = (P.parents(cell.rho_exp) == np.asarray(cell.index)).all(axis=1)
    return P.with_elements(P.array[mask])
