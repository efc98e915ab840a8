from fractions import Fraction
from hypothesis import given
from hypothesis import settings
from hypothesis import strategies
from tube_incidence_lab.constants import FamilyKind
from tube_incidence_lab.grid_core import Cell
from tube_incidence_lab.grid_core import Family
from tube_incidence_lab.grid_core import GridError
from tube_incidence_lab.grid_core import Scale
from tube_incidence_lab.grid_core import Square
from tube_incidence_lab.grid_core import Tube
from tube_incidence_lab.grid_core import block_exp_for_epsilon
from tube_incidence_lab.grid_core import children
from tube_incidence_lab.grid_core import covering_number
from tube_incidence_lab.grid_core import dual
from tube_incidence_lab.grid_core import epsilon_for_block_exp
from tube_incidence_lab.grid_core import incident
from tube_incidence_lab.grid_core import parent
import unittest

"""A test module for grid_core.py."""


class TestScale(unittest.TestCase):
    """A class for testing Scale and the ε/T helpers."""

    def test_bad_input_types(self):
        """Test that an error is raised if an exponent is not an
        integer."""
        arg_sets = [(8.0, 1), (8, "2"), (True, 1)]
        for arg_set in arg_sets:
            with self.assertRaises(TypeError):
                Scale(*arg_set)

    def test_bad_values(self):
        """Test that an error is raised for a small e, a nonpositive T,
        or a T that does not divide e."""
        arg_sets = [(1, 1), (8, 0), (8, 3)]
        for arg_set in arg_sets:
            with self.assertRaises(ValueError):
                Scale(*arg_set)

    def test_properties(self):
        """Test the derived properties of a scale."""
        scale = Scale(8, 2)
        self.assertEqual(scale.levels, 4)
        self.assertEqual(scale.size, 256)
        self.assertEqual(scale.delta, Fraction(1, 256))
        self.assertEqual(scale.level_exp(3), 6)
        with self.assertRaises(GridError):
            scale.level_exp(5)

    def test_epsilon_helpers(self):
        """Test that log2(2T)/T = ε and that the inverse picks the
        smallest T."""
        self.assertEqual(epsilon_for_block_exp(1), 1.0)
        self.assertEqual(epsilon_for_block_exp(4), 0.75)
        self.assertEqual(block_exp_for_epsilon(1), 1)
        self.assertEqual(block_exp_for_epsilon(0.5), 8)
        with self.assertRaises(ValueError):
            block_exp_for_epsilon(0)


class TestSquaresAndTubes(unittest.TestCase):
    """A class for testing Square, Tube, and incident."""

    def setUp(self):
        """Set up test data."""
        self.scale = Scale(3, 1)

    def test_square_range(self):
        """Test that squares outside the grid are rejected."""
        for col, row in ((-1, 0), (0, 8), (8, 8)):
            with self.assertRaises(ValueError):
                Square(self.scale, col, row)

    def test_tube_range(self):
        """Test that tubes with indices out of range, or whose strip
        misses the unit square, are rejected."""
        arg_sets = [(9, 0), (-1, 0), (0, 8), (0, -9), (2, -3)]
        for arg_set in arg_sets:
            with self.assertRaises(ValueError):
                Tube(self.scale, *arg_set)
        with self.assertRaises(ValueError):
            Tube(self.scale, 0, 0, thickness=0)

    def test_horizontal_tube(self):
        """Test that the tube y = 3δ of thickness δ meets exactly rows 2
        and 3 in every column."""
        T = Tube(self.scale, 0, 3)
        for col in range(8):
            met = [row for row in range(8)
                   if incident(Square(self.scale, col, row), T)]
            self.assertEqual(met, [2, 3])

    def test_diagonal_tube(self):
        """Test that the diagonal tube meets the diagonal squares and
        their neighbours only."""
        T = Tube(self.scale, 8, 0)
        for col in range(8):
            met = [row for row in range(8)
                   if incident(Square(self.scale, col, row), T)]
            self.assertEqual(met, [r for r in (col - 1, col, col + 1)
                                   if 0 <= r < 8])

    def test_scale_mismatch(self):
        """Test that an error is raised for mismatched scales."""
        with self.assertRaises(GridError):
            incident(Square(Scale(4, 1), 0, 0), Tube(self.scale, 0, 0))
        with self.assertRaises(TypeError):
            incident((0, 0), Tube(self.scale, 0, 0))

    def test_dual(self):
        """Test the point-line duality and its range."""
        p = Square(self.scale, 2, 5)
        self.assertEqual(dual(p), Tube(self.scale, 2, 5))
        self.assertEqual(dual(dual(p)), p)
        with self.assertRaises(GridError):
            dual(Tube(self.scale, 8, 0))
        with self.assertRaises(GridError):
            dual(Tube(self.scale, 4, -1))


class TestFamily(unittest.TestCase):
    """A class for testing Family and the dyadic helpers."""

    def setUp(self):
        """Set up test data."""
        self.scale = Scale(4, 2)

    def test_deduplication_and_membership(self):
        """Test that elements are deduplicated, sorted, and queryable."""
        family = Family(self.scale, FamilyKind.SQUARES,
                        [(3, 5), (3, 5), (0, 1)])
        self.assertEqual(len(family), 2)
        self.assertEqual(family.elements, ((0, 1), (3, 5)))
        self.assertIn((3, 5), family)
        self.assertIn(Square(self.scale, 0, 1), family)
        self.assertNotIn((5, 3), family)

    def test_interval_family(self):
        """Test that interval families accept plain integers."""
        family = Family(self.scale, FamilyKind.INTERVALS, [4, 1, 4])
        self.assertEqual(family.elements, ((1,), (4,)))
        self.assertIn(4, family)
        self.assertEqual(family.ambient_dimension, 1)

    def test_bad_elements(self):
        """Test that out-of-range or malformed elements are rejected."""
        with self.assertRaises(GridError):
            Family(self.scale, FamilyKind.SQUARES, [(16, 0)])
        with self.assertRaises(GridError):
            Family(self.scale, FamilyKind.SQUARES, [(1, 2, 3)])
        with self.assertRaises(GridError):
            Family(self.scale, FamilyKind.TUBES, [(2, -3)])
        with self.assertRaises(ValueError):
            Family(self.scale, "points", [])

    def test_equality(self):
        """Test that families compare by scale, kind, and elements."""
        a = Family(self.scale, FamilyKind.SQUARES, [(1, 1), (2, 2)])
        b = Family(self.scale, FamilyKind.SQUARES, [(2, 2), (1, 1)])
        self.assertEqual(a, b)
        self.assertEqual(hash(a), hash(b))
        self.assertNotEqual(a, a.with_scale(Scale(4, 1)))
        self.assertNotEqual(a, dual(a))

    def test_parent_and_children(self):
        """Test the level-j ancestor of a square and the children of a
        cell."""
        p = Square(self.scale, 13, 6)
        self.assertEqual(parent(p, 1), Cell(2, (3, 1)))
        self.assertEqual(parent(p, 0), Cell(0, (0, 0)))
        family = Family(self.scale, FamilyKind.SQUARES,
                        [(13, 6), (12, 7), (0, 0)])
        self.assertEqual(children(family, Cell(2, (3, 1))).elements,
                         ((12, 7), (13, 6)))
        with self.assertRaises(GridError):
            parent(p, 3)

    def test_covering_number(self):
        """Test covering numbers at every dyadic scale."""
        family = Family(self.scale, FamilyKind.SQUARES,
                        [(0, 0), (1, 1), (15, 15)])
        self.assertEqual(covering_number(family, 0), 1)
        self.assertEqual(covering_number(family, 1), 2)
        self.assertEqual(covering_number(family, 4), 3)
        empty = family.with_elements([])
        self.assertEqual(covering_number(empty, 2), 0)
        with self.assertRaises(GridError):
            covering_number(family, 5)

    def test_coarsen(self):
        """Test that coarsening returns the level-j parents at the coarse
        scale."""
        family = Family(Scale(4, 2), FamilyKind.INTERVALS, [0, 1, 5, 15])
        coarse = family.coarsen(1)
        self.assertEqual(coarse.scale, Scale(2, 2))
        self.assertEqual(coarse.elements, ((0,), (1,), (3,)))

    def test_typed_elements(self):
        """Test the conversions to Square and Tube objects."""
        squares = Family(self.scale, FamilyKind.SQUARES, [(1, 2)])
        self.assertEqual(squares.squares(), [Square(self.scale, 1, 2)])
        tubes = Family(self.scale, FamilyKind.TUBES, [(3, -1)])
        self.assertEqual(tubes.tubes(), [Tube(self.scale, 3, -1)])
        self.assertEqual(Family.from_tubes(self.scale, tubes.tubes()), tubes)
        with self.assertRaises(GridError):
            squares.tubes()

    @settings(max_examples=50, deadline=None)
    @given(strategies.lists(
        strategies.tuples(strategies.integers(0, 15),
                          strategies.integers(0, 15)), max_size=30))
    def test_restrict(self, elements):
        """Test that restrict keeps exactly the elements satisfying the
        predicate."""
        family = Family(self.scale, FamilyKind.SQUARES, elements)
        kept = family.restrict(lambda x: x[0] <= x[1])
        self.assertEqual(set(kept.elements),
                         {x for x in set(elements) if x[0] <= x[1]})


if __name__ == "__main__":
    unittest.main()
