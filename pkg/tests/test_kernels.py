"""Backend-level checks: every backend against the dense oracle and against each other."""

import numpy as np
import pytest

from spd import kernels
from spd.evolution import PauliRotation, apply_rotation, trotter_step
from spd.models import build_tilted_ising, build_xx_ladder, ladder_density, local_energy
from spd.oracle import dense, rotation_matrix
from spd.pauli_algebra import PauliTerm
from spd.pauli_sum import PauliSum

BOTH = len(kernels.available()) == 2


def _bits(rng, n):
    return int.from_bytes(rng.bytes((n + 7) // 8), "little") & ((1 << n) - 1)


def _random_sum(rng, n, k, complex_coeffs=False):
    terms = []
    for _ in range(k):
        z, x = _bits(rng, n), _bits(rng, n)
        c = rng.normal() + (1j * rng.normal() if complex_coeffs else 0)
        terms.append(PauliTerm(n, z, x, (z & x).bit_count(), c))
    return PauliSum.from_terms(n, terms)


def _random_axis(rng, n):
    while True:
        z, x = _bits(rng, n), _bits(rng, n)
        if z or x:
            return PauliTerm(n, z, x, (z & x).bit_count(), 1.0)


@pytest.mark.parametrize("complex_coeffs", [False, True])
def test_rotation_matches_dense(backend, rng, complex_coeffs):
    n = 5
    for _ in range(30):
        s = _random_sum(rng, n, 25, complex_coeffs)
        rot = PauliRotation(_random_axis(rng, n), float(rng.uniform(-3, 3)))
        u = rotation_matrix(rot)
        got = apply_rotation(s, rot)
        want = u.conj().T @ dense(s) @ u
        assert np.abs(dense(got) - want).max() <= 1e-13
        got.check_invariants()


def test_rotation_threshold_is_strict(backend):
    # A coefficient equal to delta survives; one just below is dropped.
    theta = 0.5
    s = PauliSum.from_labels({"X": 1.0})
    rot = PauliRotation(PauliTerm.from_label("Z"), theta)
    out = apply_rotation(s, rot, delta=np.sin(theta))
    assert set(out.to_dict()) == {"X", "Y"}
    out = apply_rotation(s, rot, delta=np.nextafter(np.sin(theta), 2))
    assert out.to_dict() == {"X": np.cos(theta)}


def test_rotation_by_zero_angle_is_identity(backend, rng):
    s = _random_sum(rng, 4, 10)
    rot = PauliRotation(_random_axis(rng, 4), 0.0)
    assert apply_rotation(s, rot) is s


def test_high_weight_axis(backend, rng):
    # Axes flipping many bits exercise the general sort path of the merge.
    n = 70
    s = _random_sum(rng, n, 400)
    axis = PauliTerm(n, (1 << 70) - 1, (1 << 69) - 1 - (1 << 5), ((1 << 69) - 1 - (1 << 5)).bit_count() & 3, 1.0)
    axis = axis.canonical()
    out = apply_rotation(s, PauliRotation(axis, 0.7))
    out.check_invariants()
    back = apply_rotation(out, PauliRotation(axis, -0.7))
    diff = back - s
    assert np.abs(diff.coeffs).max() <= 1e-12


@pytest.mark.skipif(not BOTH, reason="compiled kernels not built")
@pytest.mark.parametrize(
    "model",
    ["tilted_ising", "xx_ladder"],
)
def test_backends_bit_identical(model):
    if model == "tilted_ising":
        H, q = build_tilted_ising(11), local_energy(6, 11)
    else:
        H, q = build_xx_ladder(7), ladder_density(4, 7)
    out = {}
    for name in kernels.available():
        with kernels.use(name):
            s = q
            for _ in range(30):
                s = trotter_step(s, H, 0.05, 2.0**-14)
            out[name] = s
    a, b = out.values()
    assert a == b


@pytest.mark.skipif(not BOTH, reason="compiled kernels not built")
def test_backends_bit_identical_complex(rng):
    n = 70
    s = _random_sum(rng, n, 3000, complex_coeffs=True)
    rots = [PauliRotation(_random_axis(rng, n), float(rng.uniform(-2, 2))) for _ in range(6)]
    out = []
    for name in kernels.available():
        with kernels.use(name):
            t = s
            for r in rots:
                t = apply_rotation(t, r, 1e-3)
            out.append(t)
    assert out[0] == out[1]


@pytest.mark.parametrize("threads", [2, 8])
def test_threads_do_not_change_results(backend, threads):
    H, q = build_tilted_ising(11), local_energy(6, 11)
    s1 = s8 = q
    for _ in range(20):
        s1 = trotter_step(s1, H, 0.05, 2.0**-13, threads=1)
        s8 = trotter_step(s8, H, 0.05, 2.0**-13, threads=threads)
    assert s1 == s8


def test_merge_and_search_agree(backend, rng):
    k = kernels.active()
    a = _random_sum(rng, 9, 200)
    b = _random_sum(rng, 9, 200)
    rows, coeffs = k.merge(a.rows, a.coeffs, b.rows, b.coeffs, 0.0)
    merged = PauliSum(9, rows, coeffs)
    merged.check_invariants()
    idx, found = k.search(merged.rows, a.rows)
    assert found.all()
    assert np.array_equal(merged.rows[idx], a.rows)


def test_anticommute_mask(backend, rng):
    from spd.pauli_algebra import anticommutes

    k = kernels.active()
    s = _random_sum(rng, 6, 50)
    axis = _random_axis(rng, 6)
    mask = k.anticommute_mask(s.rows, PauliRotation(axis, 1.0).row, 1)
    want = [anticommutes(t, axis) for t in s.terms()]
    assert list(np.asarray(mask, dtype=bool)) == want


def test_set_backend_unknown():
    with pytest.raises(ValueError):
        kernels.load("fortran")
