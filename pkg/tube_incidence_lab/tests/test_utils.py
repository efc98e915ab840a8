from fractions import Fraction
from hypothesis import given
from hypothesis import settings
from hypothesis import strategies
from tube_incidence_lab.utils import as_fraction
from tube_incidence_lab.utils import derived_seed
from tube_incidence_lab.utils import dyadic_class
from tube_incidence_lab.utils import dyadic_floor_exp
from tube_incidence_lab.utils import dyadic_values
from tube_incidence_lab.utils import parallel_map
from tube_incidence_lab.utils import validate_positive_int
from tube_incidence_lab.utils import validate_seed
import unittest

"""A test module for utils.py."""


class TestAsFraction(unittest.TestCase):
    """A class for testing as_fraction."""

    def test_bad_input_types(self):
        """Test that an error is raised if the value is not a number."""
        for value in (True, None, [1], dict()):
            with self.assertRaises(TypeError):
                as_fraction(value)

    def test_bad_values(self):
        """Test that an error is raised for non-finite floats and
        unparseable strings."""
        for value in (float("inf"), float("nan"), "three", "1/0"):
            with self.assertRaises(ValueError):
                as_fraction(value)

    def test_conversions(self):
        """Test that floats convert through their decimal form and that
        strings and integers convert exactly."""
        self.assertEqual(as_fraction(0.1), Fraction(1, 10))
        self.assertEqual(as_fraction("3/4"), Fraction(3, 4))
        self.assertEqual(as_fraction(" 0.75 "), Fraction(3, 4))
        self.assertEqual(as_fraction(2), Fraction(2))
        self.assertEqual(as_fraction(Fraction(1, 3)), Fraction(1, 3))


class TestValidators(unittest.TestCase):
    """A class for testing validate_positive_int and validate_seed."""

    def test_validate_positive_int(self):
        """Test that only positive integers are accepted."""
        validate_positive_int(3, "Value")
        for value in (1.0, "1", True):
            with self.assertRaises(TypeError):
                validate_positive_int(value, "Value")
        for value in (0, -2):
            with self.assertRaises(ValueError):
                validate_positive_int(value, "Value")

    def test_validate_seed(self):
        """Test that only nonnegative integers are accepted as seeds."""
        validate_seed(0)
        with self.assertRaises(TypeError):
            validate_seed(1.5)
        with self.assertRaises(ValueError):
            validate_seed(-1)


class TestDerivedSeed(unittest.TestCase):
    """A class for testing derived_seed."""

    def test_deterministic(self):
        """Test that the derived seed depends only on its inputs."""
        self.assertEqual(derived_seed(7, 1, 2), derived_seed(7, 1, 2))
        self.assertEqual(derived_seed(7), 7)

    def test_distinct_attempts(self):
        """Test that consecutive attempts get distinct seeds."""
        seeds = {derived_seed(11, attempt) for attempt in range(100)}
        self.assertEqual(len(seeds), 100)

    @settings(max_examples=50)
    @given(strategies.integers(0, 2 ** 64), strategies.integers(0, 1000))
    def test_range(self, master, key):
        """Test that derived seeds lie in [0, 2^63)."""
        self.assertTrue(0 <= derived_seed(master, key) < 2 ** 63)


class TestDyadicHelpers(unittest.TestCase):
    """A class for testing the dyadic helpers."""

    def test_dyadic_floor_exp(self):
        """Test the largest k with 2^k <= value."""
        self.assertEqual(dyadic_floor_exp(1), 0)
        self.assertEqual(dyadic_floor_exp(7), 2)
        self.assertEqual(dyadic_floor_exp(8), 3)
        self.assertEqual(dyadic_floor_exp(Fraction(1, 3)), -2)
        self.assertEqual(dyadic_floor_exp(Fraction(1, 4)), -2)
        with self.assertRaises(ValueError):
            dyadic_floor_exp(0)

    @settings(max_examples=100)
    @given(strategies.integers(1, 10 ** 9))
    def test_dyadic_class(self, count):
        """Test that 2^k <= count < 2^(k+1)."""
        k = dyadic_class(count)
        self.assertTrue(2 ** k <= count < 2 ** (k + 1))

    def test_dyadic_values(self):
        """Test the powers of two in a closed range."""
        self.assertEqual(dyadic_values(2, 16), [2, 4, 8, 16])
        self.assertEqual(dyadic_values(3, 15), [4, 8])
        self.assertEqual(dyadic_values(5, 7), [])


class TestParallelMap(unittest.TestCase):
    """A class for testing parallel_map."""

    def test_order_is_preserved(self):
        """Test that results follow the order of the items for any
        number of threads."""
        items = list(range(50))
        expected = [x * x for x in items]
        for threads in (1, 2, 8):
            self.assertEqual(
                parallel_map(lambda x: x * x, items, threads=threads),
                expected)

    def test_bad_threads(self):
        """Test that an error is raised for a bad thread count."""
        with self.assertRaises(TypeError):
            parallel_map(abs, [1], threads=1.5)
        with self.assertRaises(ValueError):
            parallel_map(abs, [1], threads=0)


if __name__ == "__main__":
    unittest.main()
