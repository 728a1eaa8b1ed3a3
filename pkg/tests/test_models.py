import numpy as np
import pytest

from spd.models import (
    H_CRITICAL_2D,
    LatticeSpec,
    build_tfim,
    build_tilted_ising,
    build_xx_ladder,
    central_site,
    ladder_density,
    ladder_site,
    local_energy,
    tfim_symmetrized_sequence,
)
from spd.oracle import dense
from spd.pauli_algebra import InvalidArgumentsError
from spd.pauli_sum import PauliSum


def test_tilted_ising_terms():
    H = build_tilted_ising(5)
    labels = [t.label for _, t in H.terms]
    assert labels[:4] == ["ZZIII", "IZZII", "IIZZI", "IIIZZ"]
    assert labels[4] == "XIIII"
    assert labels[9] == "ZIIII"
    assert len(H) == 4 + 5 + 5


def test_local_energies_sum_to_hamiltonian():
    L = 7
    total = PauliSum.empty(L)
    for j in range(1, L + 1):
        total = total + local_energy(j, L)
    diff = total - build_tilted_ising(L).as_sum()
    assert np.abs(diff.coeffs).max(initial=0) <= 1e-15


def test_bulk_density_norm():
    assert local_energy(4, 7).norm2() == pytest.approx(3.27812025, abs=1e-12)
    # boundary densities carry a single half-bond
    assert local_energy(1, 7).norm2() == pytest.approx(3.27812025 - 0.25, abs=1e-12)


def test_ladder_geometry():
    L = 3
    H = build_xx_ladder(L)
    assert H.n == 6
    # 3 rungs + 2*2 legs, XX and YY each
    assert len(H) == 2 * (3 + 4)
    assert ladder_site(2, 2) == 3
    dens = sum((ladder_density(j, L) for j in range(1, L + 1)), PauliSum.empty(6))
    z_total = PauliSum.from_labels({lab: 0.5 for lab in ("ZIIIII", "IZIIII", "IIZIII", "IIIZII", "IIIIZI", "IIIIIZ")})
    assert dens == z_total


def test_ladder_conserves_density():
    L = 3
    h = dense(build_xx_ladder(L).as_sum())
    m = sum(dense(ladder_density(j, L)) for j in range(1, L + 1))
    assert np.abs(h @ m - m @ h).max() < 1e-12


def test_tfim_bonds():
    lat = LatticeSpec((3, 3))
    assert len(lat.bonds()) == 12
    H = build_tfim(lat, H_CRITICAL_2D)
    assert len(H) == 12 + 9
    assert H.terms[0][0] == -1.0
    assert H.terms[-1][0] == -H_CRITICAL_2D
    assert len(build_tfim(lat, 0.0)) == 12
    assert central_site(lat) == 4
    assert central_site(LatticeSpec((5, 5))) == 12
    assert central_site(LatticeSpec((3, 3, 3))) == 13


def test_symmetrized_sequence_layout():
    lat = LatticeSpec((2, 2))
    seq = tfim_symmetrized_sequence(lat, 2.0)
    assert len(seq) == 4 + 4 + 4
    assert seq[0][0] == -1.0 and seq[0][1].label == "ZIII"
    assert seq[4][1].label == "XXII"


def test_invalid_models():
    with pytest.raises(InvalidArgumentsError):
        build_tilted_ising(4)
    with pytest.raises(InvalidArgumentsError):
        central_site(LatticeSpec((4, 5)))
    with pytest.raises(InvalidArgumentsError):
        LatticeSpec((2, 2, 2, 2))
    with pytest.raises(InvalidArgumentsError):
        local_energy(0, 5)
