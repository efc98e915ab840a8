from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from numbers import Rational
import math

"""This module contains utility methods."""


class CheckFailedError(Exception):
    """Raised when a machine-checked postcondition does not hold."""


class ComputeBudgetError(Exception):
    """Raised when a documented compute or memory cap is exceeded."""


def as_fraction(value, name="Value"):
    """Returns the given number as an exact Fraction.

    Floats are converted through their shortest decimal representation,
    so that 0.1 becomes 1/10 rather than its binary expansion. Strings of
    the form "3/4" or "0.75" are accepted.

    Args:
        value: An int, Fraction, float, or string.
        name: The name of the value, used in error messages.

    Returns:
        A Fraction.

    Raises:
        TypeError: If the value has an unexpected type.
        ValueError: If the value is not finite or cannot be parsed.
    """
    if isinstance(value, bool):
        raise TypeError(f"{name} {value} is not a number.")
    if isinstance(value, Rational):
        return Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"{name} {value} is not finite.")
        return Fraction(repr(value))
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError):
            raise ValueError(f"{name} {value} is not a rational number.")
    raise TypeError(f"{name} {value} is not a number.")


def validate_positive_int(value, name):
    """Raises an error if the given value is not a positive integer."""
    if isinstance(value, bool) or not isinstance(value, int):
        raise TypeError(f"{name} {value} is not an integer.")
    if value < 1:
        raise ValueError(f"{name} {value} is not positive.")


def validate_seed(seed):
    """Raises an error if the given seed is not a nonnegative integer."""
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise TypeError(f"Seed {seed} is not an integer.")
    if seed < 0:
        raise ValueError(f"Seed {seed} is negative.")


def derived_seed(master_seed, *keys):
    """Returns a seed derived deterministically from a master seed and
    a sequence of nonnegative integer keys, such as an attempt number.

    Args:
        master_seed: A nonnegative integer.
        keys: Nonnegative integers.

    Returns:
        A nonnegative integer below 2**63.

    Raises:
        TypeError: If one or more inputs has an unexpected type.
        ValueError: If one or more inputs is negative.
    """
    validate_seed(master_seed)
    seed = master_seed
    for key in keys:
        validate_seed(key)
        # SplitMix64 finalizer applied to the running state.
        seed = (seed + 0x9E3779B97F4A7C15 * (key + 1)) % (1 << 64)
        seed = ((seed ^ (seed >> 30)) * 0xBF58476D1CE4E5B9) % (1 << 64)
        seed = ((seed ^ (seed >> 27)) * 0x94D049BB133111EB) % (1 << 64)
        seed = seed ^ (seed >> 31)
    return seed % (1 << 63)


def dyadic_floor_exp(value):
    """Returns the largest integer k with 2**k <= value, for a positive
    number value."""
    if value <= 0:
        raise ValueError(f"Value {value} is not positive.")
    if isinstance(value, int):
        return value.bit_length() - 1
    value = Fraction(value)
    k = value.numerator.bit_length() - value.denominator.bit_length()
    while Fraction(2) ** k > value:
        k = k - 1
    while Fraction(2) ** (k + 1) <= value:
        k = k + 1
    return k


def dyadic_class(count):
    """Returns the dyadic class k of a positive integer count, i.e.,
    the k with 2**k <= count < 2**(k + 1)."""
    if count < 1:
        raise ValueError(f"Count {count} is not positive.")
    return count.bit_length() - 1


def dyadic_values(lower, upper):
    """Returns the powers of two r with lower <= r <= upper, in
    increasing order."""
    values = []
    r = 1
    while r < lower:
        r = r * 2
    while r <= upper:
        values.append(r)
        r = r * 2
    return values


def parallel_map(function, items, threads=1):
    """Applies the function to every item and returns the results in
    the order of the items.

    Args:
        function: A callable of one argument.
        items: An iterable of arguments.
        threads: The number of worker threads. A value of 1 runs the
                 calls sequentially in the calling thread.

    Returns:
        A list of results.

    Raises:
        TypeError: If threads is not an integer.
        ValueError: If threads is not positive.
    """
    validate_positive_int(threads, "Threads")
    items = list(items)
    if threads == 1 or len(items) <= 1:
        return [function(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as executor:
        return list(executor.map(function, items))
