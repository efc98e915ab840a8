from fractions import Fraction
from hypothesis import given
from hypothesis import settings
from hypothesis import strategies
from tube_incidence_lab.constants import FamilyKind
from tube_incidence_lab.grid_core import Family
from tube_incidence_lab.grid_core import Scale
from tube_incidence_lab.set_tools import SetToolsError
from tube_incidence_lab.set_tools import ToleranceProfile
from tube_incidence_lab.set_tools import branching
from tube_incidence_lab.set_tools import check_delta_set
from tube_incidence_lab.set_tools import check_katz_tao
from tube_incidence_lab.set_tools import coarsened_set_check
from tube_incidence_lab.set_tools import extract_uniform
from tube_incidence_lab.set_tools import generate_ad_regular
from tube_incidence_lab.set_tools import generate_binary_ad_regular
from tube_incidence_lab.set_tools import generate_random_frostman
from tube_incidence_lab.set_tools import is_uniform
from tube_incidence_lab.set_tools import parent_count_spread
from tube_incidence_lab.set_tools import partition_katz_tao
from tube_incidence_lab.set_tools import partition_uniform
import unittest

"""A test module for set_tools.py."""


def intervals(scale, elements):
    """Return an interval Family with the given elements."""
    return Family(scale, FamilyKind.INTERVALS, elements)


class TestCheckers(unittest.TestCase):
    """A class for testing check_delta_set and check_katz_tao."""

    def setUp(self):
        """Set up test data."""
        self.scale = Scale(4, 1)
        self.full = intervals(self.scale, range(16))

    def test_bad_inputs(self):
        """Test that bad inputs raise the documented errors."""
        with self.assertRaises(TypeError):
            check_delta_set([1, 2], Fraction(1, 2), 1)
        arg_sets = [(self.full, 2, 1), (self.full, 0, 1),
                    (self.full, Fraction(1, 2), 0)]
        for arg_set in arg_sets:
            with self.assertRaises(ValueError):
                check_delta_set(*arg_set)
        with self.assertRaises(SetToolsError):
            check_katz_tao(self.full.with_elements([]), Fraction(1, 2), 1)

    def test_full_interval_set(self):
        """Test that every δ-interval of [0, 1] forms a (δ,1,1)-set."""
        report = check_delta_set(self.full, 1, 1)
        self.assertTrue(report.ok)
        self.assertAlmostEqual(report.achieved_constant, 1.0)
        self.assertFalse(check_delta_set(self.full, 1, 0.99).ok)

    def test_single_element(self):
        """Test that a single element is a (δ,s,K)-Katz-Tao set with
        K = 1 but a (δ,s,C)-set only for C >= δ^-s."""
        single = intervals(self.scale, [5])
        report = check_delta_set(single, Fraction(1, 2), 1)
        self.assertFalse(report.ok)
        self.assertAlmostEqual(report.achieved_constant, 4.0)
        self.assertEqual(report.worst_radius_exp, 4)
        self.assertEqual(report.worst_center, (5,))
        self.assertTrue(check_delta_set(single, Fraction(1, 2), 4).ok)
        self.assertTrue(check_katz_tao(single, Fraction(1, 2), 1).ok)

    def test_concentrated_set(self):
        """Test that a set packed into one short interval fails the
        (δ,1/2,C)-check for moderate C."""
        packed = intervals(Scale(8, 1), range(16))
        report = check_delta_set(packed, Fraction(1, 2), 2)
        self.assertFalse(report.ok)
        self.assertAlmostEqual(report.achieved_constant, 4.0)
        self.assertEqual(report.worst_radius_exp, 4)


class TestGenerators(unittest.TestCase):
    """A class for testing the set generators."""

    def test_ad_regular(self):
        """Test the size, uniformity, and branching of a Cantor set."""
        F = generate_ad_regular(Scale(8, 2), Fraction(1, 2), seed=3)
        self.assertEqual(len(F), 16)
        self.assertTrue(is_uniform(F).ok)
        self.assertTrue(check_delta_set(F, Fraction(1, 2), 2).ok)
        profile = branching(F)
        self.assertEqual(profile.values,
                         (0, Fraction(1, 2), 1, Fraction(3, 2), 2))
        self.assertEqual(profile.counts, (1, 2, 4, 8, 16))
        self.assertEqual(profile.normalized()[-1], Fraction(1, 2))

    def test_ad_regular_squares(self):
        """Test that square Cantor sets keep 2^(sT) children per cell."""
        F = generate_ad_regular(Scale(4, 2), 1, seed=0,
                                kind=FamilyKind.SQUARES)
        self.assertEqual(len(F), 16)
        self.assertEqual(F.kind, FamilyKind.SQUARES)
        self.assertTrue(is_uniform(F).ok)

    def test_ad_regular_errors(self):
        """Test that a non-integral s·T and bad kinds are rejected."""
        with self.assertRaises(SetToolsError):
            generate_ad_regular(Scale(8, 2), Fraction(1, 4), seed=0)
        with self.assertRaises(ValueError):
            generate_ad_regular(Scale(8, 2), Fraction(1, 2), seed=0,
                                kind=FamilyKind.TUBES)
        with self.assertRaises(TypeError):
            generate_ad_regular((8, 2), Fraction(1, 2), seed=0)

    def test_ad_regular_is_deterministic(self):
        """Test that equal seeds give equal sets."""
        a = generate_ad_regular(Scale(8, 2), Fraction(1, 2), seed=11)
        b = generate_ad_regular(Scale(8, 2), Fraction(1, 2), seed=11)
        self.assertEqual(a, b)

    def test_binary_ad_regular(self):
        """Test the sizes of binary Cantor sets at the extremes and in
        between."""
        self.assertEqual(len(generate_binary_ad_regular(8, 0, 1)), 1)
        self.assertEqual(len(generate_binary_ad_regular(8, 1, 1)), 256)
        F = generate_binary_ad_regular(9, Fraction(1, 3), 1)
        self.assertEqual(len(F), 8)
        self.assertTrue(check_delta_set(F, Fraction(1, 3), 4).ok)
        with self.assertRaises(ValueError):
            generate_binary_ad_regular(8, Fraction(3, 2), 1)

    def test_random_frostman(self):
        """Test that rejection sampling returns a (δ,s,2K)-Katz-Tao set
        of at least half the target size."""
        F = generate_random_frostman(Scale(8, 1), Fraction(1, 2), 5, 1)
        self.assertTrue(8 <= len(F) <= 16)
        self.assertTrue(check_katz_tao(F, Fraction(1, 2), 2).ok)
        squares = generate_random_frostman(
            Scale(5, 1), 1, 5, 2, kind=FamilyKind.SQUARES)
        self.assertTrue(check_katz_tao(squares, 1, 4).ok)
        with self.assertRaises(ValueError):
            generate_random_frostman(Scale(8, 1), Fraction(1, 2), 5, 0)


class TestUniformity(unittest.TestCase):
    """A class for testing uniformity, extraction, and partitions."""

    def test_is_uniform(self):
        """Test that the first level with unequal counts is reported."""
        report = is_uniform(intervals(Scale(2, 1), [0, 1, 2]))
        self.assertFalse(report.ok)
        self.assertEqual(report.level, 1)
        self.assertEqual(report.counts, (1, 2))

    def test_extract_uniform_example(self):
        """Test extraction from a small two-level tree."""
        F = intervals(Scale(2, 1), [0, 1, 2])
        subset = extract_uniform(F, seed=0)
        self.assertEqual(subset.family.elements, ((0,), (1,)))
        self.assertEqual(subset.ratio, Fraction(2, 3))
        self.assertEqual(subset.guaranteed_ratio, Fraction(1, 8))

    def test_extract_uniform_coarse_first(self):
        """Test that the coarse level is trimmed before the fine one.

        The cells [0, 16) and [32, 48) hold one 4-cell each and outweigh
        [16, 32), which holds four single elements. Starting from the
        finest level would keep the single elements instead."""
        F = intervals(Scale(6, 2), [0, 1, 2, 3, 16, 20, 24, 28, 32])
        subset = extract_uniform(F, seed=3)
        self.assertEqual(subset.family.elements, ((0,), (1,), (2,), (3,)))
        self.assertEqual(subset.ratio, Fraction(4, 9))
        self.assertEqual(subset.guaranteed_ratio, Fraction(1, 32))

    @settings(max_examples=40, deadline=None)
    @given(strategies.sets(strategies.integers(0, 63), min_size=1),
           strategies.sampled_from([1, 2, 3]),
           strategies.integers(0, 1000))
    def test_extract_uniform_property(self, elements, block_exp, seed):
        """Test that the extracted subfamily is uniform, contained in
        the input, and at least as large as the guaranteed share."""
        F = intervals(Scale(6, block_exp), sorted(elements))
        subset = extract_uniform(F, seed)
        self.assertTrue(is_uniform(subset.family).ok)
        self.assertTrue(set(subset.family.elements) <= set(F.elements))
        self.assertGreaterEqual(subset.ratio, subset.guaranteed_ratio)

    @settings(max_examples=25, deadline=None)
    @given(strategies.sets(strategies.integers(0, 63), min_size=1),
           strategies.integers(0, 1000))
    def test_partition_uniform(self, elements, seed):
        """Test that the parts are uniform and partition the family."""
        F = intervals(Scale(6, 2), sorted(elements))
        partition = partition_uniform(F, seed)
        union = []
        for part in partition.parts:
            self.assertTrue(is_uniform(part).ok)
            union.extend(part.elements)
        self.assertEqual(sorted(union), list(F.elements))

    def test_partition_katz_tao(self):
        """Test that the parts of the full grid are single elements and
        that an AD-regular set is left whole."""
        full = intervals(Scale(4, 1), range(16))
        parts = partition_katz_tao(full, Fraction(1, 2))
        self.assertEqual(len(parts), 16)
        for part in parts:
            self.assertTrue(check_katz_tao(part, Fraction(1, 2), 4).ok)
        F = generate_ad_regular(Scale(8, 2), Fraction(1, 2), seed=1)
        self.assertEqual(partition_katz_tao(F, Fraction(1, 2)), [F])
        with self.assertRaises(SetToolsError):
            partition_katz_tao(intervals(Scale(2, 1), [0, 1, 2]), 1)

    def test_branching_requires_uniform(self):
        """Test that a branching profile needs a uniform family."""
        with self.assertRaises(SetToolsError):
            branching(intervals(Scale(2, 1), [0, 1, 2]))

    def test_parent_count_spread(self):
        """Test the spread of parent counts."""
        full = intervals(Scale(4, 1), range(16))
        self.assertEqual(parent_count_spread(full).max_ratio, 1.0)
        skewed = intervals(Scale(2, 1), [0, 1, 2])
        self.assertEqual(tuple(parent_count_spread(skewed)), (2.0, 1))

    def test_coarsened_set_check(self):
        """Test that the coarsenings of a Cantor set pass."""
        F = generate_ad_regular(Scale(8, 2), Fraction(1, 2), seed=2)
        ok, reports = coarsened_set_check(F, Fraction(1, 2), 1)
        self.assertTrue(ok)
        self.assertEqual([r.level for r in reports], [1, 2, 3, 4])
        self.assertEqual([r.size for r in reports], [2, 4, 8, 16])


class TestToleranceProfile(unittest.TestCase):
    """A class for testing ToleranceProfile."""

    def test_clamp(self):
        """Test that ε₀ is clamped from below by 4/n."""
        profile = ToleranceProfile.for_grid(Fraction(1, 4), 128)
        self.assertEqual(profile.eps0_nominal, Fraction(1, 4 ** 8))
        self.assertEqual(profile.eps0, Fraction(1, 32))
        self.assertTrue(profile.eps0_clamped)
        self.assertEqual(profile.phi, Fraction(3, 4))
        self.assertEqual(profile.psi, Fraction(1, 8))

    def test_user_value(self):
        """Test that a large user ε₀ is kept."""
        profile = ToleranceProfile.for_grid(Fraction(1, 4), 128,
                                            eps0=Fraction(1, 8))
        self.assertEqual(profile.eps0, Fraction(1, 8))
        self.assertFalse(profile.eps0_clamped)

    def test_grid_too_coarse(self):
        """Test that an error is raised when the clamp exceeds ε."""
        with self.assertRaises(SetToolsError):
            ToleranceProfile.for_grid(Fraction(1, 4), 8)
        with self.assertRaises(ValueError):
            ToleranceProfile.for_grid(0, 128)


if __name__ == "__main__":
    unittest.main()
