from fractions import Fraction
from hypothesis import given
from hypothesis import settings
from hypothesis import strategies
from tube_incidence_lab.constants import FamilyKind
from tube_incidence_lab.grid_core import Family
from tube_incidence_lab.grid_core import Scale
from tube_incidence_lab.multiscale import LipschitzFn
from tube_incidence_lab.multiscale import MultiscaleError
from tube_incidence_lab.multiscale import _merge_runs
from tube_incidence_lab.multiscale import decompose_family
from tube_incidence_lab.multiscale import good_intervals
from tube_incidence_lab.multiscale import lip_decompose
from tube_incidence_lab.set_tools import generate_ad_regular
import unittest

"""A test module for multiscale.py."""


def kinked(n):
    """Return the function that is 0 on [0, 1/2] and has slope 1 on
    [1/2, 1], sampled on the grid k/n."""
    return LipschitzFn(
        n, [max(Fraction(0), Fraction(k, n) - Fraction(1, 2))
            for k in range(n + 1)])


class TestLipschitzFn(unittest.TestCase):
    """A class for testing LipschitzFn."""

    def test_bad_input_types(self):
        """Test that an error is raised for a non-integer grid size."""
        with self.assertRaises(TypeError):
            LipschitzFn(2.0, [0, 0, 0])

    def test_bad_samples(self):
        """Test that samples that are decreasing, negative at 0, too
        steep, or of the wrong number are rejected."""
        arg_sets = [
            (2, [0, Fraction(1, 2), Fraction(1, 4)]),
            (2, [-1, -1, -1]),
            (2, [0, 1, 1]),
            (2, [0, 0]),
        ]
        for arg_set in arg_sets:
            with self.assertRaises(MultiscaleError):
                LipschitzFn(*arg_set)
        with self.assertRaises(ValueError):
            LipschitzFn(0, [0])

    def test_from_samples(self):
        """Test that float samples are clamped into a valid function."""
        f = LipschitzFn.from_samples([0.0, 0.75, 0.5, 1.0], 3)
        self.assertEqual(f.values, (0, Fraction(1, 3), Fraction(1, 3),
                                    Fraction(2, 3)))


class TestLipDecompose(unittest.TestCase):
    """A class for testing lip_decompose."""

    def test_linear_function(self):
        """Test that a linear function is a single piece."""
        f = LipschitzFn(64, [Fraction(k, 128) for k in range(65)])
        decomposition = lip_decompose(f, Fraction(1, 4))
        self.assertEqual(decomposition.vertices, (0, 64))
        self.assertEqual(decomposition.slopes, (Fraction(1, 2),))
        self.assertEqual(decomposition.tau, Fraction(1, 16))

    def test_kinked_function(self):
        """Test that the kink is found with increasing slopes."""
        decomposition = lip_decompose(kinked(64), Fraction(1, 4))
        self.assertEqual(decomposition.vertices, (0, 32, 64))
        self.assertEqual(decomposition.breakpoints,
                         (0, Fraction(1, 2), 1))
        self.assertEqual(decomposition.slopes, (0, 1))

    def test_coarse_grid(self):
        """Test that an error is raised when 1/n exceeds ε/(4C)."""
        with self.assertRaises(MultiscaleError):
            lip_decompose(kinked(8), Fraction(1, 4))
        with self.assertRaises(ValueError):
            lip_decompose(kinked(64), 0)


class TestGoodIntervals(unittest.TestCase):
    """A class for testing good_intervals."""

    def test_kinked_function(self):
        """Test the partition of a function with one kink."""
        partition = good_intervals(kinked(64), Fraction(1, 4))
        self.assertEqual(partition.breakpoints, (0, Fraction(1, 2), 1))
        self.assertEqual(partition.slopes, (0, Fraction(3, 4)))
        self.assertEqual(partition.tolerance_used.eps0, Fraction(1, 16))
        self.assertTrue(partition.tolerance_used.eps0_clamped)

    def test_merge_longest_first(self):
        """Test that runs are merged around the longest unassigned run,
        then the next longest, and that short runs are absorbed only
        into a neighbouring anchor."""
        arg_sets = (
            ([1000, 200, 600, 2000], [(0, 0, 1), (2, 2, 2), (3, 3, 3)]),
            ([10, 100, 1], [(1, 0, 2)]),
            ([100, 5, 1000], [(2, 0, 2)]),
            ([40, 40], [(0, 0, 0), (1, 1, 1)]),
        )
        for lengths, expected in arg_sets:
            with self.subTest(lengths=lengths):
                runs, start = [], 0
                for k, length in enumerate(lengths):
                    runs.append((start, start + length, k, length))
                    start = start + length
                self.assertEqual(_merge_runs(runs, Fraction(1, 2)),
                                 expected)

    def test_bad_epsilon(self):
        """Test that ε must lie in (0, 1/2)."""
        for eps in (0, Fraction(1, 2), 1):
            with self.assertRaises(ValueError):
                good_intervals(kinked(64), eps)

    @settings(max_examples=60, deadline=None)
    @given(strategies.lists(strategies.integers(0, 4), min_size=64,
                            max_size=64),
           strategies.sampled_from([Fraction(1, 4), Fraction(1, 3)]))
    def test_postconditions(self, increments, eps):
        """Test the length, growth, and slope conditions on random
        nondecreasing 1-Lipschitz functions."""
        n = 64
        values = [Fraction(0)]
        for increment in increments:
            values.append(values[-1] + Fraction(increment, 4 * n))
        f = LipschitzFn(n, values)
        partition = good_intervals(f, eps)
        vertices = partition.vertices
        slopes = partition.slopes
        self.assertEqual(vertices[0], 0)
        self.assertEqual(vertices[-1], n)
        self.assertEqual(len(slopes), len(vertices) - 1)
        eps0 = partition.tolerance_used.eps0
        for l, (k1, k2) in enumerate(zip(vertices, vertices[1:])):
            length = Fraction(k2 - k1, n)
            self.assertGreaterEqual(length, eps0 / eps)
            self.assertLessEqual(values[k2] - values[k1],
                                 (slopes[l] + 3 * eps) * length)
        self.assertEqual(list(slopes), sorted(set(slopes)))
        self.assertLessEqual(slopes[0], values[n] - values[0] + eps)


class TestDecomposeFamily(unittest.TestCase):
    """A class for testing decompose_family."""

    def test_ad_regular(self):
        """Test that an AD-regular set is a single level of slope s."""
        F = generate_ad_regular(Scale(8, 2), Fraction(1, 2), seed=4)
        result = decompose_family(F, Fraction(1, 4))
        self.assertEqual(len(result.levels), 1)
        level = result.levels[0]
        self.assertEqual((level.start_level, level.end_level), (0, 4))
        self.assertEqual(level.slope, Fraction(1, 2))
        self.assertEqual(level.parents, 1)
        self.assertEqual((level.min_children, level.max_children), (16, 16))
        self.assertLessEqual(level.max_constant, 2.0)
        self.assertTrue(result.growth_ok)
        self.assertTrue(result.top_slope_ok)

    def test_two_phase_family(self):
        """Test that a family with no branching followed by full
        branching splits into two levels."""
        F = Family(Scale(8, 2), FamilyKind.INTERVALS, range(16))
        result = decompose_family(F, Fraction(1, 4), threads=2)
        self.assertEqual([(r.start_level, r.end_level)
                          for r in result.levels], [(0, 2), (2, 4)])
        self.assertEqual([r.slope for r in result.levels],
                         [0, Fraction(3, 4)])
        self.assertEqual(result.levels[0].max_children, 1)
        self.assertEqual(result.levels[1].max_children, 16)
        self.assertTrue(result.growth_ok)
        self.assertTrue(result.top_slope_ok)

    def test_non_uniform(self):
        """Test that an error is raised for a non-uniform family."""
        F = Family(Scale(4, 1), FamilyKind.INTERVALS, [0, 1, 2])
        with self.assertRaises(MultiscaleError):
            decompose_family(F, Fraction(1, 4))
        with self.assertRaises(TypeError):
            decompose_family([0, 1], Fraction(1, 4))


if __name__ == "__main__":
    unittest.main()
