from collections import namedtuple
from tube_incidence_lab.constants import DENSE_RICHNESS_MAX_EXP
from tube_incidence_lab.constants import FamilyKind
from tube_incidence_lab.constants import TUBE_BATCH_SIZE
from tube_incidence_lab.grid_core import Family
from tube_incidence_lab.grid_core import incident_row_range
from tube_incidence_lab.set_tools import row_keys
from tube_incidence_lab.utils import CheckFailedError
from tube_incidence_lab.utils import as_fraction
from tube_incidence_lab.utils import parallel_map
import math
import numpy as np
import threading

"""This module contains the richness computation, r-rich square sets,
incidence counts, Szemerédi-Trotter ratios, and the dyadic pigeonhole
splitter for disjoint tube collections.

A square has richness ~r if its count lies in [r, 2r) and richness
≳r if its count is at least r."""


class IncidenceError(Exception):
    """The base class for exceptions in this module."""


class PigeonholeCheckError(IncidenceError, CheckFailedError):
    """Raised when a pigeonhole postcondition does not hold."""


class Representation(object):
    """Names of the storage layouts of a RichnessMap."""

    DENSE = "dense"
    SPARSE = "sparse"

    ALL = (DENSE, SPARSE)


# Dyadic bins r = 1, 2, 4, ... and the number of squares with count in
# [r, 2r) for each.
RichnessHistogram = namedtuple("RichnessHistogram", "bins counts")

# The output of rich_squares: squares with count in [r, 2r), squares
# with count at least r, and the histogram of the whole map.
RichSquares = namedtuple("RichSquares", "around at_least histogram")

# The output of incidence_count.
IncidenceReport = namedtuple(
    "IncidenceReport", "count ratio trivial_bound within_trivial_bound")

# One row of an st_ratio table.
STRow = namedtuple("STRow", "r squares ratio")

# The output of st_ratio. The ST constant is max_r |P_r| r³ δ²; the
# small-family flag marks |T| < 1/δ.
STReport = namedtuple(
    "STReport", "max_ratio argmax_r table st_constant small_family")

# The output of pigeonhole_split. Choices maps each square of P_r to
# its own dyadic M_p.
PigeonholeResult = namedtuple(
    "PigeonholeResult", "M squares loss rich_squares choices")


class RichnessMap(object):
    """The exact number of tubes of a family meeting every square.

    Attributes:
        scale: The Scale of the tube family.
        representation: Representation.DENSE or Representation.SPARSE.

    Typical Usage Example:

        richness = richness_map(tubes)
        cols, rows, counts = richness.nonzero()
        histogram = richness.histogram()
    """

    def __init__(self, scale, representation, dense=None, keys=None,
                 counts=None):
        self.scale = scale
        self.representation = representation
        self._dense = dense
        self._keys = keys
        self._counts = counts

    def nonzero(self):
        """Returns the columns, rows, and counts of every square with a
        positive count, sorted by (col, row)."""
        size = self.scale.size
        if self.representation == Representation.DENSE:
            cols, rows = np.nonzero(self._dense)
            return cols, rows, self._dense[cols, rows]
        cols, rows = np.divmod(self._keys, size)
        return cols, rows, self._counts

    def lookup(self, cols, rows):
        """Returns the counts of the given squares."""
        cols = np.asarray(cols, dtype=np.int64)
        rows = np.asarray(rows, dtype=np.int64)
        if self.representation == Representation.DENSE:
            return self._dense[cols, rows]
        keys = cols * self.scale.size + rows
        if not len(self._keys):
            return np.zeros(len(keys), dtype=np.int64)
        position = np.minimum(
            np.searchsorted(self._keys, keys), len(self._keys) - 1)
        hit = self._keys[position] == keys
        return np.where(hit, self._counts[position], 0)

    def count(self, col, row):
        return int(self.lookup([col], [row])[0])

    @property
    def support_size(self):
        return len(self.nonzero()[2])

    @property
    def total(self):
        """The total number of incidences."""
        return int(self.nonzero()[2].sum())

    def histogram(self):
        """Returns the RichnessHistogram of the positive counts."""
        counts = self.nonzero()[2]
        if not len(counts):
            return RichnessHistogram((), ())
        classes = np.floor(np.log2(counts)).astype(np.int64)
        # Guard against rounding at exact powers of two.
        classes = np.where((1 << (classes + 1)) <= counts, classes + 1,
                           classes)
        classes = np.where((1 << classes) > counts, classes - 1, classes)
        tally = np.bincount(classes)
        bins = tuple(1 << k for k in range(len(tally)))
        return RichnessHistogram(bins, tuple(int(c) for c in tally))


def _validate_tubes(T):
    if not isinstance(T, Family):
        raise TypeError(f"Tube family {T} is not a Family.")
    if T.kind != FamilyKind.TUBES:
        raise IncidenceError(f"Family of kind {T.kind} is not a tube family.")


def _row_ranges(T, batch):
    """Returns (cols, lo, hi) for every column met by a batch of tubes,
    with rows clipped to the grid."""
    size = T.scale.size
    tubes = T.array[batch]
    cols = np.arange(size, dtype=np.int64)[None, :]
    lo, hi = incident_row_range(
        size, tubes[:, 0:1], tubes[:, 1:2], T.thickness, cols)
    lo = np.maximum(lo, 0)
    hi = np.minimum(hi, size - 1)
    valid = lo <= hi
    cols = np.broadcast_to(cols, lo.shape)
    return cols[valid], lo[valid], hi[valid]


def _batches(indices):
    for start in range(0, len(indices), TUBE_BATCH_SIZE):
        yield indices[start:start + TUBE_BATCH_SIZE]


def _dense_sweep(T, indices, diff, lock):
    """Adds the row intervals of the given tubes to a shared difference
    array. Only the additions hold the lock."""
    for batch in _batches(indices):
        cols, lo, hi = _row_ranges(T, batch)
        with lock:
            np.add.at(diff, (cols, lo), 1)
            np.add.at(diff, (cols, hi + 1), -1)


def _sparse_partial(T, indices):
    size = T.scale.size
    all_keys = []
    for batch in _batches(indices):
        cols, lo, hi = _row_ranges(T, batch)
        lengths = hi - lo + 1
        starts = np.repeat(np.cumsum(lengths) - lengths, lengths)
        rows = np.repeat(lo, lengths) + np.arange(lengths.sum()) - starts
        all_keys.append(np.repeat(cols, lengths) * size + rows)
    if not all_keys:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
    return np.unique(np.concatenate(all_keys), return_counts=True)


def richness_map(T, threads=1, representation=None):
    """Returns the exact number of tubes of T meeting each square.

    Every tube is swept across all columns; the rows it meets in each
    column form one interval, recorded as a +1/-1 pair in a difference
    array and summed by a cumulative sum. Each thread sweeps its own
    share of tubes. On the dense grid all threads add into one shared
    difference array under a lock; in the sparse layout each thread
    keeps its own keys and counts, merged by integer addition.

    Args:
        T: A tube Family.
        threads: The number of worker threads.
        representation: Representation.DENSE, Representation.SPARSE, or
                        None to use a dense grid for e <= 12.

    Returns:
        A RichnessMap.

    Raises:
        IncidenceError: If T is not a tube family.
        TypeError: If one or more inputs has an unexpected type.
        ValueError: If the representation is unknown.
    """
    _validate_tubes(T)
    if representation is None:
        representation = Representation.DENSE \
            if T.scale.delta_exp <= DENSE_RICHNESS_MAX_EXP \
            else Representation.SPARSE
    if representation not in Representation.ALL:
        raise ValueError(
            f"Representation {representation} is not one of "
            f"{Representation.ALL}.")
    chunks = [chunk for chunk in np.array_split(
        np.arange(len(T)), max(1, min(threads, len(T)))) if len(chunk)]
    size = T.scale.size
    if representation == Representation.DENSE:
        diff = np.zeros((size, size + 1), dtype=np.int64)
        lock = threading.Lock()
        parallel_map(lambda chunk: _dense_sweep(T, chunk, diff, lock),
                     chunks, threads=threads)
        dense = np.cumsum(diff, axis=1)[:, :size]
        return RichnessMap(T.scale, representation, dense=dense)
    partials = parallel_map(
        lambda chunk: _sparse_partial(T, chunk), chunks, threads=threads)
    if not partials:
        empty = np.zeros(0, dtype=np.int64)
        return RichnessMap(T.scale, representation, keys=empty, counts=empty)
    keys = np.concatenate([keys for keys, _ in partials])
    counts = np.concatenate([counts for _, counts in partials])
    unique, inverse = np.unique(keys, return_inverse=True)
    merged = np.zeros(len(unique), dtype=np.int64)
    np.add.at(merged, inverse.reshape(-1), counts)
    return RichnessMap(T.scale, representation, keys=unique, counts=merged)


def _square_family(scale, cols, rows):
    return Family(scale, FamilyKind.SQUARES, np.stack([cols, rows], axis=1))


def rich_squares(T, r, threads=1):
    """Returns the squares of richness ~r and ≳r.

    Args:
        T: A tube Family.
        r: A positive integer.
        threads: The number of worker threads.

    Returns:
        A RichSquares with the family of squares with count in [r, 2r),
        the family with count >= r, and the histogram of the map.

    Raises:
        IncidenceError: If T is not a tube family.
        TypeError: If r is not an integer.
        ValueError: If r < 1.
    """
    if isinstance(r, bool) or not isinstance(r, int):
        raise TypeError(f"Richness {r} is not an integer.")
    if r < 1:
        raise ValueError(f"Richness {r} is less than 1.")
    richness = richness_map(T, threads=threads)
    cols, rows, counts = richness.nonzero()
    around = (counts >= r) & (counts < 2 * r)
    at_least = counts >= r
    return RichSquares(
        _square_family(T.scale, cols[around], rows[around]),
        _square_family(T.scale, cols[at_least], rows[at_least]),
        richness.histogram())


def incidence_count(P, T, threads=1):
    """Returns the number of incident pairs (p, T) with p in P and T in
    the tube family, with its ratio to (|P||T|)^(2/3) and the trivial
    bound δ^(-1/3) (|P||T|)^(2/3).

    Raises:
        IncidenceError: If the kinds or scales of the families do not
                        match.
    """
    if not isinstance(P, Family):
        raise TypeError(f"Square family {P} is not a Family.")
    if P.kind != FamilyKind.SQUARES:
        raise IncidenceError(f"Family of kind {P.kind} is not a square "
                             f"family.")
    _validate_tubes(T)
    if P.scale.delta_exp != T.scale.delta_exp:
        raise IncidenceError(
            f"Square scale {P.scale} does not match tube scale {T.scale}.")
    if not len(P) or not len(T):
        return IncidenceReport(0, 0.0, 0.0, True)
    richness = richness_map(T, threads=threads)
    count = int(richness.lookup(P.array[:, 0], P.array[:, 1]).sum())
    product = float(len(P) * len(T))
    trivial = 2.0 ** (T.scale.delta_exp / 3) * product ** (2 / 3)
    return IncidenceReport(
        count, count / product ** (2 / 3), trivial, count <= trivial)


def _dyadic_table(T, threads, normalizer):
    """Returns rows (r, |P_r|, |P_r|·r³/normalizer) for every dyadic r
    with a nonempty bin."""
    histogram = richness_map(T, threads=threads).histogram()
    return [STRow(r, n, n * r ** 3 / normalizer)
            for r, n in zip(histogram.bins, histogram.counts) if n]


def st_ratio(T, threads=1):
    """Returns the empirical Szemerédi-Trotter ratio
    max_r |P_r(T)|·r³/|T|² over dyadic r, with its argmax and table.

    The report also carries the ST constant max_r |P_r|·r³·δ² and
    flags families smaller than 1/δ, which lie outside the regime of
    the incidence bound.

    Returns:
        An STReport.
    """
    _validate_tubes(T)
    size = T.scale.size
    if not len(T):
        return STReport(0.0, None, (), 0.0, True)
    table = _dyadic_table(T, threads, float(len(T)) ** 2)
    best = max(table, key=lambda row: (row.ratio, -row.r))
    st_constant = max(row.squares * row.r ** 3 for row in table) / size ** 2
    return STReport(best.ratio, best.r, tuple(table), st_constant,
                    len(T) < size)


def katz_tao_st_ratio(T, K1, K2, threads=1):
    """Returns max_r |P_r(T)|·r³ / (δ^-1 (K1·K2)² |T|), the Katz-Tao
    form of the incidence bound, with its argmax and table."""
    _validate_tubes(T)
    K1 = float(as_fraction(K1, "K1"))
    K2 = float(as_fraction(K2, "K2"))
    if K1 <= 0 or K2 <= 0:
        raise ValueError(f"Constants {K1}, {K2} are not positive.")
    if not len(T):
        return 0.0, None, ()
    normalizer = T.scale.size * (K1 * K2) ** 2 * len(T)
    table = _dyadic_table(T, threads, normalizer)
    best = max(table, key=lambda row: (row.ratio, -row.r))
    return best.ratio, best.r, tuple(table)


def _validate_parts(parts):
    if not parts:
        raise IncidenceError("No tube families were given.")
    for part in parts:
        _validate_tubes(part)
    scale, thickness = parts[0].scale, parts[0].thickness
    for part in parts[1:]:
        if part.scale.delta_exp != scale.delta_exp or \
                part.thickness != thickness:
            raise IncidenceError("Tube families have different scales.")
    keys = np.concatenate(
        [row_keys(part.array, scale.delta_exp) for part in parts])
    if len(np.unique(keys)) != len(keys):
        raise IncidenceError("Tube families are not pairwise disjoint.")


def pigeonhole_split(parts, r, threads=1):
    """Selects a dyadic M and a large set P of squares of richness ~r in
    the union of disjoint tube families such that every p in P has
    richness ≳r/M with respect to at least M/L of the families, L the
    logarithmic loss 2·max(e, ceil(log2 r) + 1).

    Each square p picks the smallest dyadic M_p with
    #{i : rich_i(p) >= r/M_p} >= M_p/L; the most common choice wins,
    ties going to the smaller M. Both postconditions, |P| >= |P_r|/L and
    the per-square family count, are checked before returning.

    Args:
        parts: A list of pairwise disjoint tube Families at one scale.
        r: A positive integer.
        threads: The number of worker threads.

    Returns:
        A PigeonholeResult.

    Raises:
        IncidenceError: If the families are not disjoint or P_r is
                        empty.
        PigeonholeCheckError: If a postcondition fails.
    """
    if isinstance(r, bool) or not isinstance(r, int):
        raise TypeError(f"Richness {r} is not an integer.")
    if r < 1:
        raise ValueError(f"Richness {r} is less than 1.")
    parts = list(parts)
    _validate_parts(parts)
    union = parts[0].with_elements(
        np.concatenate([part.array for part in parts]))
    P_r = rich_squares(union, r, threads=threads).around
    if not len(P_r):
        raise IncidenceError(f"No square has richness in [{r}, {2 * r}).")
    cols, rows = P_r.array[:, 0], P_r.array[:, 1]
    rich = np.stack([richness_map(part, threads=threads).lookup(cols, rows)
                     for part in parts], axis=1)
    top = max(0, math.ceil(math.log2(r)))
    loss = 2 * max(union.scale.delta_exp, top + 1)
    candidates = [1 << k for k in range(top + 1)]
    choices = np.zeros(len(P_r), dtype=np.int64)
    for index in range(len(P_r)):
        for M in candidates:
            families = int((rich[index] * M >= r).sum())
            if families * loss >= M:
                choices[index] = M
                break
    if not choices.all():
        raise PigeonholeCheckError(
            "Some square has no dyadic M with enough rich families.")
    values, counts = np.unique(choices, return_counts=True)
    M = int(values[np.argmax(counts)])
    selected = choices == M
    P = P_r.with_elements(P_r.array[selected])
    if len(P) * loss < len(P_r):
        raise PigeonholeCheckError(
            f"Selected {len(P)} of {len(P_r)} squares, fewer than 1/{loss}.")
    families = (rich[selected] * M >= r).sum(axis=1)
    if (families * loss < M).any():
        raise PigeonholeCheckError(
            f"Some selected square is rich in fewer than {M}/{loss} "
            f"families.")
    choice_map = {tuple(int(x) for x in p): int(m)
                  for p, m in zip(P_r.array, choices)}
    return PigeonholeResult(M, P, loss, P_r, choice_map)
