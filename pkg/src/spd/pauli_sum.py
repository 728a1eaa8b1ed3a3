"""Sorted sparse sums of Pauli strings, ``O = sum_P a_P P``.

Storage is structure-of-arrays: a ``(N, 2 * n_words)`` uint64 matrix of packed
bitstrings (x words then z words, most significant word first) and a length-N
coefficient vector.  Rows are strictly increasing in lexicographic order, so
the Z-type strings (x = 0) form a contiguous prefix.

Every entry is kept in Hermitian-canonical gauge, i.e. the stored phase is
``popcount(z & x) mod 4`` and the coefficient multiplies a Hermitian Pauli
string.  The phase column is therefore a function of the bits and is derived
on demand rather than stored.
"""

from __future__ import annotations

from typing import Iterable, Iterator, Mapping

import numpy as np

from . import kernels
from .pauli_algebra import (
    InvalidArgumentsError,
    PauliTerm,
    int_from_words,
    words_from_int,
)

__all__ = ["DEFAULT_MAX_TERMS", "PauliSum", "TermLimitError", "n_words_for"]

DEFAULT_MAX_TERMS = 2**31


class TermLimitError(RuntimeError):
    """The number of stored terms exceeded the configured guard."""

    def __init__(self, n_terms: int, limit: int):
        super().__init__(f"term count {n_terms} exceeds limit {limit}")
        self.n_terms = n_terms
        self.limit = limit


def n_words_for(n: int) -> int:
    return (n + 63) // 64


def _coeff_dtype(values) -> np.dtype:
    arr = np.asarray(values)
    if arr.dtype.kind == "c" and np.any(arr.imag != 0):
        return np.dtype(np.complex128)
    return np.dtype(np.float64)


class PauliSum:
    """Sorted, duplicate-free sum of Hermitian-canonical Pauli strings.

    Instances are treated as immutable: every operation returns a new sum.
    Construct with :meth:`from_terms`, :meth:`from_labels` or :meth:`empty`.
    """

    __slots__ = ("n", "n_words", "rows", "coeffs")

    def __init__(self, n: int, rows: np.ndarray, coeffs: np.ndarray):
        self.n = int(n)
        self.n_words = n_words_for(self.n)
        self.rows = np.ascontiguousarray(rows, dtype=np.uint64).reshape(-1, 2 * self.n_words)
        self.coeffs = np.ascontiguousarray(coeffs)
        if self.coeffs.dtype not in (np.float64, np.complex128):
            self.coeffs = self.coeffs.astype(_coeff_dtype(self.coeffs))
        if len(self.rows) != len(self.coeffs):
            raise InvalidArgumentsError("rows and coefficients differ in length")

    # ------------------------------------------------------------ construction

    @classmethod
    def empty(cls, n: int, dtype=np.float64) -> PauliSum:
        return cls(n, np.zeros((0, 2 * n_words_for(n)), dtype=np.uint64), np.zeros(0, dtype=dtype))

    @classmethod
    def from_terms(cls, n: int, terms: Iterable[PauliTerm], dtype=None) -> PauliSum:
        """Canonicalize, sort and combine arbitrary terms (duplicates are summed in order)."""
        terms = [t.canonical() for t in terms]
        for t in terms:
            if t.n != n:
                raise InvalidArgumentsError(f"term on {t.n} sites in a {n}-site sum")
        coeffs = np.array([t.coeff for t in terms], dtype=np.complex128)
        dtype = np.dtype(dtype) if dtype is not None else _coeff_dtype(coeffs)
        if dtype.kind != "c":
            if np.any(coeffs.imag != 0):
                raise InvalidArgumentsError("complex coefficients in a real-valued sum")
            coeffs = coeffs.real.copy()
        rows = cls._rows_for(n, terms)
        r, c = kernels.active().sort_unique(rows, coeffs.astype(dtype))
        return cls(n, r, c)

    @classmethod
    def from_labels(cls, labels: Mapping[str, complex], dtype=None) -> PauliSum:
        """E.g. ``PauliSum.from_labels({"ZZI": 0.5, "IXI": 1.4})`` (site 0 first)."""
        terms = [PauliTerm.from_label(lab, c) for lab, c in labels.items()]
        if not terms:
            raise InvalidArgumentsError("from_labels needs at least one label")
        return cls.from_terms(terms[0].n, terms, dtype)

    @staticmethod
    def _rows_for(n: int, terms: list[PauliTerm]) -> np.ndarray:
        w = n_words_for(n)
        rows = np.zeros((len(terms), 2 * w), dtype=np.uint64)
        for i, t in enumerate(terms):
            rows[i, :w] = words_from_int(t.x_bits, w)
            rows[i, w:] = words_from_int(t.z_bits, w)
        return rows

    def key_row(self, key: tuple[int, int] | PauliTerm) -> np.ndarray:
        """Packed row for a ``(x_bits, z_bits)`` key or a term."""
        if isinstance(key, PauliTerm):
            if key.n != self.n:
                raise InvalidArgumentsError(f"term on {key.n} sites, sum on {self.n}")
            key = key.key
        x, z = key
        return np.concatenate([words_from_int(x, self.n_words), words_from_int(z, self.n_words)])

    # ------------------------------------------------------------ access

    def __len__(self) -> int:
        return len(self.coeffs)

    @property
    def dtype(self) -> np.dtype:
        return self.coeffs.dtype

    @property
    def phases(self) -> np.ndarray:
        """Canonical phase exponents, ``popcount(z & x) mod 4`` per entry."""
        w = self.n_words
        return (np.bitwise_count(self.rows[:, :w] & self.rows[:, w:]).sum(axis=1) & 3).astype(np.uint8)

    def x_bits(self, i: int) -> int:
        return int_from_words(self.rows[i, : self.n_words])

    def z_bits(self, i: int) -> int:
        return int_from_words(self.rows[i, self.n_words :])

    def term(self, i: int) -> PauliTerm:
        z, x = self.z_bits(i), self.x_bits(i)
        c = self.coeffs[i]
        return PauliTerm(self.n, z, x, (z & x).bit_count(), complex(c) if self.dtype.kind == "c" else float(c))

    def terms(self) -> Iterator[PauliTerm]:
        for i in range(len(self)):
            yield self.term(i)

    def to_dict(self) -> dict[str, complex]:
        return {t.label: t.coeff for t in self.terms()}

    def __repr__(self) -> str:
        head = ", ".join(f"{t.coeff:+.6g}*{t.label}" for t in list(self.terms())[:6])
        more = ", ..." if len(self) > 6 else ""
        return f"PauliSum(n={self.n}, N={len(self)}: {head}{more})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, PauliSum):
            return NotImplemented
        return (
            self.n == other.n
            and self.rows.shape == other.rows.shape
            and np.array_equal(self.rows, other.rows)
            and np.array_equal(self.coeffs, other.coeffs)
        )

    __hash__ = None

    # ------------------------------------------------------------ search

    def find(self, key: tuple[int, int] | PauliTerm) -> tuple[int, bool]:
        """Binary search: ``(index, True)`` if present, else ``(insertion index, False)``."""
        row = self.key_row(key)[None, :]
        idx, found = kernels.active().search(self.rows, row)
        return int(idx[0]), bool(found[0])

    def count_terms(self) -> int:
        return len(self)

    def count_ztype(self) -> int:
        """Number of Z-type entries; they are the sorted prefix with x = 0."""
        if len(self) == 0:
            return 0
        probe = np.zeros((1, 2 * self.n_words), dtype=np.uint64)
        probe[0, self.n_words - 1] = 1  # smallest key with a nonzero x word
        idx, _ = kernels.active().search(self.rows, probe)
        return int(idx[0])

    # ------------------------------------------------------------ arithmetic

    def _same_n(self, other: PauliSum) -> None:
        if self.n != other.n:
            raise InvalidArgumentsError(f"site-count mismatch: {self.n} vs {other.n}")

    def merge_add(
        self, batch: PauliSum | Iterable[PauliTerm], max_terms: int = DEFAULT_MAX_TERMS
    ) -> PauliSum:
        """Coefficient-wise sum with ``batch``; exact zeros are dropped.

        Duplicates inside an unsorted term batch are combined in input order,
        then each key receives ``self + batch``.
        """
        k = kernels.active()
        if isinstance(batch, PauliSum):
            self._same_n(batch)
            b_rows, b_coeffs = batch.rows, batch.coeffs
        else:
            b = list(batch)
            if not b:
                return self
            bs = PauliSum.from_terms(self.n, b)
            b_rows, b_coeffs = bs.rows, bs.coeffs
        dtype = np.result_type(self.coeffs, b_coeffs)
        rows, coeffs = k.merge(
            self.rows, self.coeffs.astype(dtype, copy=False), b_rows, b_coeffs.astype(dtype, copy=False), 0.0
        )
        if len(coeffs) > max_terms:
            raise TermLimitError(len(coeffs), max_terms)
        return PauliSum(self.n, rows, coeffs)

    def __add__(self, other: PauliSum) -> PauliSum:
        return self.merge_add(other)

    def __neg__(self) -> PauliSum:
        return PauliSum(self.n, self.rows, -self.coeffs)

    def __sub__(self, other: PauliSum) -> PauliSum:
        return self.merge_add(-other)

    def scale(self, factor: float) -> PauliSum:
        if factor == 0:
            return PauliSum.empty(self.n, self.dtype)
        return PauliSum(self.n, self.rows, self.coeffs * factor)

    def astype(self, dtype) -> PauliSum:
        dtype = np.dtype(dtype)
        if dtype.kind != "c" and self.dtype.kind == "c":
            if np.any(self.coeffs.imag != 0):
                raise InvalidArgumentsError("cannot drop nonzero imaginary parts")
            return PauliSum(self.n, self.rows, self.coeffs.real.copy())
        return PauliSum(self.n, self.rows, self.coeffs.astype(dtype))

    # ------------------------------------------------------------ truncation

    def truncate_threshold(self, delta: float) -> PauliSum:
        """Drop entries with ``|a| < delta``; ``delta = 0`` is the identity."""
        if delta < 0:
            raise InvalidArgumentsError("threshold must be non-negative")
        if delta == 0:
            return self
        keep = np.abs(self.coeffs) >= delta
        if keep.all():
            return self
        return PauliSum(self.n, self.rows[keep], self.coeffs[keep])

    def x_weights(self) -> np.ndarray:
        return np.bitwise_count(self.rows[:, : self.n_words]).sum(axis=1, dtype=np.int64)

    def weights(self) -> np.ndarray:
        w = self.n_words
        return np.bitwise_count(self.rows[:, :w] | self.rows[:, w:]).sum(axis=1, dtype=np.int64)

    def truncate_xweight(self, max_xweight: int) -> PauliSum:
        """Drop entries with more than ``max_xweight`` X/Y factors."""
        if max_xweight < 0:
            raise InvalidArgumentsError("X-weight cutoff must be non-negative")
        keep = self.x_weights() <= max_xweight
        if keep.all():
            return self
        return PauliSum(self.n, self.rows[keep], self.coeffs[keep])

    # ------------------------------------------------------------ reductions

    def overlap(self, other: PauliSum) -> complex:
        """``Tr[self† other] / 2**n``; searches the smaller sum's keys in the larger."""
        self._same_n(other)
        k = kernels.active()
        if len(self) <= len(other):
            idx, found = k.search(other.rows, self.rows)
            a = self.coeffs[found]
            b = other.coeffs[idx[found]]
        else:
            idx, found = k.search(self.rows, other.rows)
            a = self.coeffs[idx[found]]
            b = other.coeffs[found]
        return complex(np.sum(np.conj(a) * b))

    def norm2(self) -> float:
        """Squared Frobenius norm ``Tr[O† O] / 2**n``."""
        return float(np.sum(np.abs(self.coeffs) ** 2))

    def expectation_zero(self) -> float:
        """``<0...0| O |0...0>``: the sum of the Z-type coefficients."""
        nz = self.count_ztype()
        return float(np.real(np.sum(self.coeffs[:nz])))

    def weight_spectrum(self) -> dict[int, float]:
        """``{m: F_m}`` with ``F_m`` the squared-coefficient mass at Pauli weight ``m``."""
        if len(self) == 0:
            return {}
        w = self.weights()
        f = np.bincount(w, weights=np.abs(self.coeffs) ** 2)
        present = np.bincount(w) > 0
        return {int(m): float(f[m]) for m in np.flatnonzero(present)}

    # ------------------------------------------------------------ diagnostics

    def check_invariants(self) -> None:
        """Raise ``AssertionError`` if sortedness, uniqueness or nonzero-ness fails."""
        if len(self) > 1:
            a, b = self.rows[:-1], self.rows[1:]
            diff = a != b
            assert np.all(diff.any(axis=1)), "duplicate rows"
            first = diff.argmax(axis=1)
            i = np.arange(len(first))
            assert np.all(a[i, first] < b[i, first]), "rows not strictly increasing"
        assert np.all(self.coeffs != 0), "zero coefficient stored"
        mask = words_from_int((1 << self.n) - 1, self.n_words)
        assert not np.any(self.rows[:, : self.n_words] & ~mask), "x bits beyond site count"
        assert not np.any(self.rows[:, self.n_words :] & ~mask), "z bits beyond site count"

    def nbytes(self) -> int:
        return self.rows.nbytes + self.coeffs.nbytes
