"""Hamiltonians and conserved densities for the benchmark spin models.

Sites are 0-based internally and laid out row-major over the lattice extents.
Chain positions ``j`` in the public builders are 1-based, matching the usual
physics labelling of the conserved densities ``q_j``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import prod

from .pauli_algebra import InvalidArgumentsError, PauliTerm
from .pauli_sum import PauliSum

__all__ = [
    "FIELD_X",
    "FIELD_Z",
    "H_CRITICAL_2D",
    "H_CRITICAL_3D",
    "Hamiltonian",
    "LatticeSpec",
    "build_tfim",
    "build_tilted_ising",
    "build_xx_ladder",
    "central_site",
    "ladder_density",
    "ladder_site",
    "local_energy",
    "tfim_symmetrized_sequence",
]

FIELD_X = 1.4
# Both the Hamiltonian and the local energy use 0.9045: with it the squared norm
# of a bulk density is 0.25 + 0.25 + 1.96 + 0.9045**2 = 3.27812025.
FIELD_Z = 0.9045

H_CRITICAL_2D = 3.04438
H_CRITICAL_3D = 5.158136


@dataclass(frozen=True)
class Hamiltonian:
    """``H = sum_j c_j H_j`` with real ``c_j`` and distinct unit Pauli strings ``H_j``.

    The order of ``terms`` is the gate order of a first-order Trotter step.
    """

    n: int
    terms: tuple[tuple[float, PauliTerm], ...]

    def __post_init__(self):
        seen = set()
        for c, t in self.terms:
            if t.n != self.n:
                raise InvalidArgumentsError("term size differs from Hamiltonian size")
            if c == 0 or isinstance(c, complex):
                raise InvalidArgumentsError("coefficients must be real and nonzero")
            if t.key in seen:
                raise InvalidArgumentsError(f"duplicate term {t.label}")
            seen.add(t.key)

    def __len__(self) -> int:
        return len(self.terms)

    def as_sum(self) -> PauliSum:
        return PauliSum.from_terms(self.n, [t.with_coeff(c) for c, t in self.terms])


@dataclass(frozen=True)
class LatticeSpec:
    """Open-boundary hypercubic lattice with row-major site indexing."""

    dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        object.__setattr__(self, "dims", dims)
        if not 1 <= len(dims) <= 3:
            raise InvalidArgumentsError("lattice must have 1, 2 or 3 dimensions")
        if any(d < 1 for d in dims):
            raise InvalidArgumentsError("lattice extents must be >= 1")

    @property
    def n(self) -> int:
        return prod(self.dims)

    def index(self, coord: tuple[int, ...]) -> int:
        i = 0
        for c, d in zip(coord, self.dims):
            i = i * d + c
        return i

    def bonds(self) -> list[tuple[int, int]]:
        """Nearest-neighbour pairs ``(i, k)`` with ``i < k``, sorted lexicographically."""
        out = []
        for coord in itertools.product(*(range(d) for d in self.dims)):
            i = self.index(coord)
            for axis, d in enumerate(self.dims):
                if coord[axis] + 1 < d:
                    nb = list(coord)
                    nb[axis] += 1
                    out.append((i, self.index(tuple(nb))))
        return sorted(out)


def _check_odd_chain(L: int, what: str) -> None:
    if L < 3 or L % 2 == 0:
        raise InvalidArgumentsError(f"{what} needs an odd length L >= 3, got {L}")


def build_tilted_ising(L: int) -> Hamiltonian:
    """``sum_j Z_j Z_{j+1} + sum_j (1.4 X_j + 0.9045 Z_j)``, open chain.

    Emission order: ZZ bonds, then X fields, then Z fields.
    """
    _check_odd_chain(L, "tilted-field Ising chain")
    terms = [(1.0, PauliTerm.from_sites(L, {j: "Z", j + 1: "Z"})) for j in range(L - 1)]
    terms += [(FIELD_X, PauliTerm.from_sites(L, {j: "X"})) for j in range(L)]
    terms += [(FIELD_Z, PauliTerm.from_sites(L, {j: "Z"})) for j in range(L)]
    return Hamiltonian(L, tuple(terms))


def local_energy(j: int, L: int) -> PauliSum:
    """``q_j = Z_{j-1}Z_j/2 + Z_jZ_{j+1}/2 + 1.4 X_j + 0.9045 Z_j`` (1-based ``j``).

    Half-bonds leaving the chain are dropped, so ``sum_j q_j == H``.
    """
    if not 1 <= j <= L:
        raise InvalidArgumentsError(f"site {j} outside 1..{L}")
    s = j - 1
    terms = []
    if s > 0:
        terms.append(PauliTerm.from_sites(L, {s - 1: "Z", s: "Z"}, 0.5))
    if s < L - 1:
        terms.append(PauliTerm.from_sites(L, {s: "Z", s + 1: "Z"}, 0.5))
    terms.append(PauliTerm.from_sites(L, {s: "X"}, FIELD_X))
    terms.append(PauliTerm.from_sites(L, {s: "Z"}, FIELD_Z))
    return PauliSum.from_terms(L, terms)


def ladder_site(j: int, leg: int) -> int:
    """0-based site of rung ``j`` (1-based) and ``leg`` in {1, 2}."""
    return 2 * (j - 1) + (leg - 1)


def build_xx_ladder(L: int) -> Hamiltonian:
    """``1/4 sum (XX + YY)`` over legs and rungs of a two-leg ladder, ``n = 2L``.

    Bonds are emitted in lexicographic site order, XX before YY on each bond.
    """
    _check_odd_chain(L, "XX ladder")
    n = 2 * L
    bonds = []
    for j in range(1, L + 1):
        bonds.append((ladder_site(j, 1), ladder_site(j, 2)))
        if j < L:
            for leg in (1, 2):
                bonds.append((ladder_site(j, leg), ladder_site(j + 1, leg)))
    terms = []
    for a, b in sorted(bonds):
        terms.append((0.25, PauliTerm.from_sites(n, {a: "X", b: "X"})))
        terms.append((0.25, PauliTerm.from_sites(n, {a: "Y", b: "Y"})))
    return Hamiltonian(n, tuple(terms))


def ladder_density(j: int, L: int) -> PauliSum:
    """``q_j = (Z_{j,1} + Z_{j,2}) / 2``."""
    if not 1 <= j <= L:
        raise InvalidArgumentsError(f"rung {j} outside 1..{L}")
    n = 2 * L
    return PauliSum.from_terms(
        n,
        [
            PauliTerm.from_sites(n, {ladder_site(j, 1): "Z"}, 0.5),
            PauliTerm.from_sites(n, {ladder_site(j, 2): "Z"}, 0.5),
        ],
    )


def build_tfim(lattice: LatticeSpec, h: float) -> Hamiltonian:
    """``-sum_<jk> X_j X_k - h sum_j Z_j``: bonds in lexicographic order, then fields.

    Fields are omitted when ``h == 0``.
    """
    n = lattice.n
    terms = [(-1.0, PauliTerm.from_sites(n, {i: "X", k: "X"})) for i, k in lattice.bonds()]
    if h != 0:
        terms += [(-float(h), PauliTerm.from_sites(n, {i: "Z"})) for i in range(n)]
    return Hamiltonian(n, tuple(terms))


def tfim_symmetrized_sequence(lattice: LatticeSpec, h: float) -> list[tuple[float, PauliTerm]]:
    """Second-order step ``e^{i h dt/2 sum Z} e^{i dt sum XX} e^{i h dt/2 sum Z}`` as factors."""
    n = lattice.n
    half = [(-float(h) / 2, PauliTerm.from_sites(n, {i: "Z"})) for i in range(n)] if h else []
    bonds = [(-1.0, PauliTerm.from_sites(n, {i: "X", k: "X"})) for i, k in lattice.bonds()]
    return half + bonds + half


def central_site(lattice: LatticeSpec) -> int:
    """0-based index of the middle site; every extent must be odd."""
    if any(d % 2 == 0 for d in lattice.dims):
        raise InvalidArgumentsError(f"no central site for even extents {lattice.dims}")
    return lattice.index(tuple(d // 2 for d in lattice.dims))
