"""Single Pauli strings in the symplectic (z, x) bit representation.

A term stands for ``coeff * (-i)**phase * prod_k Z_k**z_k X_k**x_k``.  Bit ``k``
of ``z_bits``/``x_bits`` refers to site ``k``; site 0 is printed leftmost.
Bitstrings are plain Python integers here; :mod:`spd.pauli_sum` packs them into
64-bit words.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable, Mapping

import numpy as np

__all__ = [
    "InvalidArgumentsError",
    "PauliTerm",
    "anticommutes",
    "canonical_phase",
    "compare",
    "multiply",
    "product_parity",
    "term_key",
    "weight",
    "x_weight",
    "words_from_int",
    "int_from_words",
]

_LETTERS = {"I": (0, 0), "X": (0, 1), "Y": (1, 1), "Z": (1, 0)}
_SYMBOLS = {(0, 0): "I", (0, 1): "X", (1, 1): "Y", (1, 0): "Z"}

# (-i)**k for k = 0..3
_MINUS_I_POW = (1, -1j, -1, 1j)


class InvalidArgumentsError(ValueError):
    """Raised when operands are incompatible (e.g. different site counts)."""


def _popcount(v: int) -> int:
    return v.bit_count()


def canonical_phase(z_bits: int, x_bits: int) -> int:
    """Phase exponent that makes ``(-i)**phase Z**z X**x`` Hermitian.

    Every site carrying both bits contributes ``Z X = iY``, so one factor of
    ``-i`` per such site restores ``Y``.
    """
    return _popcount(z_bits & x_bits) & 3


def product_parity(z_a: int, x_a: int, z_b: int, x_b: int) -> int:
    """Reordering sign exponent for ``A * B`` in the Z-before-X normal order.

    ``Z^za X^xa Z^zb X^xb = (-1)**(xa . zb) Z^(za^zb) X^(xa^xb)`` because
    ``X Z = -Z X`` on every site where both factors meet.
    """
    return _popcount(x_a & z_b) & 1


@dataclass(frozen=True, slots=True)
class PauliTerm:
    """One weighted Pauli string.

    Parameters
    ----------
    n : int
        Number of sites.
    z_bits, x_bits : int
        Bitstrings; bit ``k`` set means a Z (resp. X) factor on site ``k``.
    phase : int
        Exponent of the ``(-i)`` prefactor, taken mod 4.
    coeff : complex
        Scalar weight.
    """

    n: int
    z_bits: int
    x_bits: int
    phase: int = 0
    coeff: complex = 1.0

    def __post_init__(self):
        if self.n <= 0:
            raise InvalidArgumentsError(f"site count must be positive, got {self.n}")
        limit = 1 << self.n
        if not (0 <= self.z_bits < limit and 0 <= self.x_bits < limit):
            raise InvalidArgumentsError("bitstrings exceed the site count")
        object.__setattr__(self, "phase", int(self.phase) & 3)

    @classmethod
    def from_label(cls, label: str, coeff: complex = 1.0) -> PauliTerm:
        """Hermitian-canonical term from a string such as ``"XIYZ"`` (site 0 first)."""
        z = x = 0
        for k, ch in enumerate(label.upper()):
            try:
                zk, xk = _LETTERS[ch]
            except KeyError:
                raise InvalidArgumentsError(f"bad Pauli letter {ch!r} in {label!r}") from None
            z |= zk << k
            x |= xk << k
        return cls(len(label), z, x, canonical_phase(z, x), coeff)

    @classmethod
    def from_sites(cls, n: int, ops: Mapping[int, str], coeff: complex = 1.0) -> PauliTerm:
        """Hermitian-canonical term from a ``{site: letter}`` mapping."""
        z = x = 0
        for site, ch in ops.items():
            if not 0 <= site < n:
                raise InvalidArgumentsError(f"site {site} outside 0..{n - 1}")
            zk, xk = _LETTERS[ch.upper()]
            z |= zk << site
            x |= xk << site
        return cls(n, z, x, canonical_phase(z, x), coeff)

    @classmethod
    def identity(cls, n: int, coeff: complex = 1.0) -> PauliTerm:
        return cls(n, 0, 0, 0, coeff)

    @property
    def key(self) -> tuple[int, int]:
        return (self.x_bits, self.z_bits)

    @property
    def label(self) -> str:
        return "".join(
            _SYMBOLS[((self.z_bits >> k) & 1, (self.x_bits >> k) & 1)] for k in range(self.n)
        )

    def canonical(self) -> PauliTerm:
        """Same operator with the residual phase folded into ``coeff``."""
        cp = canonical_phase(self.z_bits, self.x_bits)
        if cp == self.phase:
            return self
        factor = _MINUS_I_POW[(self.phase - cp) & 3]
        return replace(self, phase=cp, coeff=self.coeff * factor)

    def hermitian_coeff(self) -> complex:
        """Coefficient in front of the Hermitian Pauli string with this key."""
        return self.canonical().coeff

    def with_coeff(self, coeff: complex) -> PauliTerm:
        return replace(self, coeff=coeff)

    def __str__(self) -> str:
        c = complex(self.hermitian_coeff())
        return f"({c.real:+.17g}{c.imag:+.17g}j) {self.label}"


def _check_pair(a: PauliTerm, b: PauliTerm) -> None:
    if a.n != b.n:
        raise InvalidArgumentsError(f"site-count mismatch: {a.n} vs {b.n}")


def multiply(a: PauliTerm, b: PauliTerm) -> PauliTerm:
    """Operator product ``a * b``."""
    _check_pair(a, b)
    parity = product_parity(a.z_bits, a.x_bits, b.z_bits, b.x_bits)
    return PauliTerm(
        a.n,
        a.z_bits ^ b.z_bits,
        a.x_bits ^ b.x_bits,
        (a.phase + b.phase + 2 * parity) & 3,
        a.coeff * b.coeff,
    )


def anticommutes(a: PauliTerm, b: PauliTerm) -> bool:
    _check_pair(a, b)
    return bool((_popcount(a.z_bits & b.x_bits) ^ _popcount(a.x_bits & b.z_bits)) & 1)


def weight(a: PauliTerm) -> int:
    """Number of non-identity factors."""
    return _popcount(a.z_bits | a.x_bits)


def x_weight(a: PauliTerm) -> int:
    """Number of X or Y factors."""
    return _popcount(a.x_bits)


def term_key(a: PauliTerm) -> tuple[int, int]:
    return a.key


def compare(a: tuple[int, int], b: tuple[int, int]) -> int:
    """Three-way comparison of term keys: x bits first, then z bits.

    Returns -1, 0 or 1.  Higher site indices are more significant, which is
    the same order as comparing the packed words most-significant first.
    """
    return (a > b) - (a < b)


def words_from_int(bits: int, n_words: int) -> np.ndarray:
    """Pack a bitstring into ``n_words`` uint64 words, most significant first."""
    mask = (1 << 64) - 1
    return np.array(
        [(bits >> (64 * w)) & mask for w in reversed(range(n_words))], dtype=np.uint64
    )


def int_from_words(words: Iterable[int]) -> int:
    out = 0
    for w in words:
        out = (out << 64) | int(w)
    return out
