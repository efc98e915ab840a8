from fractions import Fraction
from tube_incidence_lab.constants import FamilyKind
from tube_incidence_lab.grid_core import Family
from tube_incidence_lab.grid_core import Scale
from tube_incidence_lab.two_ends import TubeSquareSystem
from tube_incidence_lab.two_ends import TwoEndsError
from tube_incidence_lab.two_ends import covering_lower_check
from tube_incidence_lab.two_ends import dichotomy_audit
from tube_incidence_lab.two_ends import is_two_ends
from tube_incidence_lab.two_ends import spread_bush_system
from tube_incidence_lab.two_ends import two_ends_refine
import unittest

"""A test module for two_ends.py."""


def horizontal_pairs(b, cols, rows):
    """Return the pairs of the horizontal tube (0, b) with the squares
    in the given columns and rows."""
    return [(col, row, 0, b) for col in cols for row in rows]


class TestTubeSquareSystem(unittest.TestCase):
    """A class for testing TubeSquareSystem."""

    def setUp(self):
        """Set up test data."""
        self.scale = Scale(3, 1)

    def test_incidence_is_validated(self):
        """Test that a tube must meet its square."""
        with self.assertRaises(TwoEndsError):
            TubeSquareSystem(self.scale, [(0, 0, 0, 3)])
        with self.assertRaises(TwoEndsError):
            TubeSquareSystem(self.scale, [(0, 0, 0)])
        with self.assertRaises(TypeError):
            TubeSquareSystem(3, [(0, 3, 0, 3)])

    def test_views(self):
        """Test the squares, tubes, and the sets on each side."""
        system = TubeSquareSystem.from_tube_sets(self.scale, {
            (0, 3): [(0, 3), (0, 4)],
            (1, 3): [(0, 3)],
        })
        self.assertEqual(len(system), 3)
        self.assertEqual(system.squares().elements, ((0, 3), (1, 3)))
        self.assertEqual(system.tubes().elements, ((0, 3), (0, 4)))
        self.assertEqual(system.tube_set((0, 3)).elements,
                         ((0, 3), (0, 4)))
        self.assertEqual(system.squares_along((0, 3)).elements,
                         ((0, 3), (1, 3)))
        self.assertEqual(system.double_count(), (3, 3))

    def test_double_count_matches_views(self):
        """Test that each side of the double count is the sum of the set
        sizes on that side, and that both count the pairs."""
        pairs = (horizontal_pairs(3, range(8), [3]) +
                 horizontal_pairs(5, range(4), [5]) + [(0, 3, 0, 4)])
        system = TubeSquareSystem(self.scale, pairs + pairs[:3])
        square_side = sum(len(system.tube_set(p))
                          for p in system.squares().elements)
        tube_side = sum(len(system.squares_along(T))
                        for T in system.tubes().elements)
        self.assertEqual(system.double_count(), (square_side, tube_side))
        self.assertEqual(system.double_count(), (13, 13))

    def test_empty(self):
        """Test that an empty system has no incidences."""
        system = TubeSquareSystem(self.scale, [])
        self.assertEqual(len(system), 0)
        self.assertEqual(system.double_count(), (0, 0))


class TestTwoEnds(unittest.TestCase):
    """A class for testing is_two_ends and covering_lower_check."""

    def setUp(self):
        """Set up test data."""
        self.scale = Scale(8, 1)

    def test_singleton(self):
        """Test that a single square is ε-two-ends exactly when
        2^((e-1)ε - eκε³) <= c."""
        single = Family(self.scale, FamilyKind.SQUARES, [(5, 5)])
        report = is_two_ends(single, Fraction(1, 4))
        self.assertFalse(report.ok)
        self.assertEqual(report.worst_rho_exp, 7)
        self.assertEqual(report.worst_center, (5, 5))
        self.assertAlmostEqual(report.worst_ratio, 2.0 ** 1.125)
        self.assertTrue(is_two_ends(single, Fraction(1, 4), c=4).ok)

    def test_spread_row(self):
        """Test that a full row of squares is two-ends."""
        row = Family(self.scale, FamilyKind.SQUARES,
                     [(col, 0) for col in range(256)])
        self.assertTrue(is_two_ends(row, Fraction(1, 4)).ok)

    def test_bad_inputs(self):
        """Test that empty families, tube families, and bad ε are
        rejected."""
        squares = Family(self.scale, FamilyKind.SQUARES, [])
        with self.assertRaises(TwoEndsError):
            is_two_ends(squares, Fraction(1, 4))
        tubes = Family(self.scale, FamilyKind.TUBES, [(0, 0)])
        with self.assertRaises(TwoEndsError):
            is_two_ends(tubes, Fraction(1, 4))
        single = Family(self.scale, FamilyKind.SQUARES, [(0, 0)])
        with self.assertRaises(ValueError):
            is_two_ends(single, 1)

    def test_covering_lower_check(self):
        """Test the covering table of a full grid and of one square."""
        full = Family(Scale(3, 1), FamilyKind.SQUARES,
                      [(c, r) for c in range(8) for r in range(8)])
        report = covering_lower_check(full, 2, Fraction(1, 4))
        self.assertEqual(report.min_ratio, 1.0)
        self.assertEqual(report.worst_rho_exp, 0)
        self.assertEqual(report.slack_exponent, 0.0)
        self.assertEqual([row[1] for row in report.table], [1, 4, 16, 64])
        single = full.with_elements([(2, 2)])
        report = covering_lower_check(single, 1, Fraction(1, 4))
        self.assertEqual(report.min_ratio, 0.125)
        self.assertEqual(report.worst_rho_exp, 3)
        self.assertEqual(report.slack_exponent, 1.0)


class TestTwoEndsRefine(unittest.TestCase):
    """A class for testing two_ends_refine."""

    def setUp(self):
        """Set up test data."""
        self.scale = Scale(4, 1)
        self.eps = Fraction(1, 16)

    def test_clustered_segment_is_discarded(self):
        """Test that two spread tubes survive at ρ̃ = 1 and a tube whose
        squares crowd into half the square is discarded."""
        pairs = (horizontal_pairs(3, range(16), [3]) +
                 horizontal_pairs(10, range(16), [10]) +
                 horizontal_pairs(6, range(8), [5, 6]))
        system = TubeSquareSystem(self.scale, pairs)
        result = two_ends_refine(system, self.eps, threads=2)
        self.assertEqual(result.rho_tilde_exp, 0)
        self.assertFalse(result.scale_fallback)
        self.assertFalse(result.degenerate)
        self.assertTrue(result.scale_ok)
        self.assertEqual([stage.name for stage in result.stages],
                         ["input", "regularized", "two-ends segments"])
        self.assertEqual([stage.pairs for stage in result.stages],
                         [48, 48, 32])
        for stage in result.stages:
            self.assertEqual(stage.square_side, stage.tube_side)
        self.assertEqual(result.system.tubes().elements, ((0, 3), (0, 10)))
        self.assertAlmostEqual(result.mass_ratio, 2 / 3)
        self.assertEqual(result.density_constant, 1.0)
        self.assertLess(result.two_ends_constant, 1.0)

    def test_low_degree_tube_is_regularized(self):
        """Test that a tube with few squares is dropped by the degree
        regularization."""
        pairs = (horizontal_pairs(3, range(16), [3]) +
                 horizontal_pairs(10, range(16), [10]) +
                 horizontal_pairs(6, range(2), [6]))
        result = two_ends_refine(TubeSquareSystem(self.scale, pairs),
                                 self.eps)
        self.assertEqual([stage.pairs for stage in result.stages],
                         [34, 32, 32])

    def test_scale_above_delta(self):
        """Test that tubes whose squares fill only half the columns are
        segmented at ρ̃ = 1/2."""
        pairs = (horizontal_pairs(6, range(8), [5, 6]) +
                 horizontal_pairs(12, range(8), [11, 12]))
        result = two_ends_refine(TubeSquareSystem(self.scale, pairs),
                                 self.eps)
        self.assertEqual(result.rho_tilde_exp, 1)
        self.assertEqual(len(result.system), 32)
        self.assertEqual(result.partition.slopes, (0, Fraction(15, 16)))
        self.assertTrue(result.scale_ok)

    def test_degenerate(self):
        """Test that a system with one square is returned unchanged."""
        system = TubeSquareSystem.from_tube_sets(
            self.scale, {(0, 3): [(0, 3), (0, 4), (1, 3)]})
        result = two_ends_refine(system, self.eps)
        self.assertTrue(result.degenerate)
        self.assertEqual(result.rho_tilde_exp, 0)
        self.assertIs(result.system, system)

    def test_hypotheses(self):
        """Test that unequal tube families and too few incidences are
        rejected."""
        unequal = TubeSquareSystem.from_tube_sets(self.scale, {
            (0, 3): [(0, 3), (0, 4)],
            (1, 3): [(0, 3)],
        })
        with self.assertRaises(TwoEndsError):
            two_ends_refine(unequal, self.eps)
        sparse = TubeSquareSystem(self.scale, [(0, 3, 0, 3), (0, 4, 0, 4)])
        with self.assertRaises(TwoEndsError):
            two_ends_refine(sparse, Fraction(1, 4))
        with self.assertRaises(TwoEndsError):
            two_ends_refine(TubeSquareSystem(self.scale, []), self.eps)
        with self.assertRaises(TypeError):
            two_ends_refine(unequal.pairs, self.eps)


class TestBushSystems(unittest.TestCase):
    """A class for testing spread_bush_system and dichotomy_audit."""

    def test_spread_bush_system(self):
        """Test that every root carries one tube per direction."""
        system = spread_bush_system(Scale(6, 2), Fraction(1, 2), seed=3)
        self.assertEqual(len(system.squares()), 16 * 64)
        self.assertEqual(len(system), 16 * 64 * 8)
        self.assertEqual(len(system.tube_set((4, 10))), 8)
        self.assertEqual(system.double_count(), (8192, 8192))
        with self.assertRaises(ValueError):
            spread_bush_system(Scale(6, 2), Fraction(1, 2), 0, column_step=0)
        with self.assertRaises(TypeError):
            spread_bush_system(Scale(6, 2), Fraction(1, 2), 0,
                               column_step=True)

    def test_audit_of_bushes(self):
        """Test that the audit reports a consistent outcome."""
        system = spread_bush_system(Scale(6, 2), Fraction(1, 2), seed=3)
        report = dichotomy_audit(system, Fraction(1, 2), Fraction(1, 4),
                                 Fraction(1, 100))
        self.assertIn(report.item, (1, 2, "both", "neither"))
        self.assertEqual(report.item1_holds,
                         report.item1_ratio <= report.item1_tolerance)
        self.assertEqual(report.item2_holds,
                         report.item2_delta_exp is not None)
        self.assertEqual(report.richness, 8)
        self.assertEqual(report.richness_spread, 1.0)

    def test_audit_of_one_pair(self):
        """Test the audit of a single square and tube."""
        system = TubeSquareSystem(Scale(4, 1), [(0, 3, 0, 3)])
        report = dichotomy_audit(system, Fraction(1, 2), Fraction(1, 4),
                                 Fraction(1, 4))
        self.assertEqual(report.item, 1)
        self.assertAlmostEqual(report.item1_ratio, 4.0)
        self.assertAlmostEqual(report.item1_tolerance, 4.0)
        self.assertIsNone(report.item2_delta_exp)
        self.assertAlmostEqual(report.hypothesis_constant, 4.0)
        with self.assertRaises(TwoEndsError):
            dichotomy_audit(system.with_pairs([]), Fraction(1, 2),
                            Fraction(1, 4), Fraction(1, 4))


if __name__ == "__main__":
    unittest.main()
