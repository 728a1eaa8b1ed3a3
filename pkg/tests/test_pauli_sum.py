import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spd.oracle import dense
from spd.pauli_algebra import InvalidArgumentsError, PauliTerm
from spd.pauli_sum import PauliSum, TermLimitError


def random_bits(rng, n):
    return int.from_bytes(rng.bytes((n + 7) // 8), "little") & ((1 << n) - 1)


def random_sum(rng, n, k, complex_coeffs=False):
    terms = []
    for _ in range(k):
        z = random_bits(rng, n)
        x = random_bits(rng, n) if rng.random() < 0.7 else 0
        c = rng.normal() + (1j * rng.normal() if complex_coeffs else 0)
        terms.append(PauliTerm(n, z, x, (z & x).bit_count(), c))
    return PauliSum.from_terms(n, terms)


def test_from_terms_combines_and_sorts(backend):
    s = PauliSum.from_labels({"XI": 1.0, "ZZ": 2.0, "IY": -0.5})
    s = s + PauliSum.from_labels({"XI": 0.25, "IZ": 1.0})
    assert s.to_dict() == {"IZ": 1.0, "ZZ": 2.0, "XI": 1.25, "IY": -0.5}
    s.check_invariants()


def test_cancellation_drops_entry(backend):
    a = PauliSum.from_labels({"XY": 1.0, "ZI": 3.0})
    b = PauliSum.from_labels({"XY": -1.0})
    assert (a + b).to_dict() == {"ZI": 3.0}


def test_duplicates_in_term_batch(backend):
    s = PauliSum.from_terms(2, [PauliTerm.from_label("XX", 1.0), PauliTerm.from_label("XX", 2.0)])
    assert s.to_dict() == {"XX": 3.0}


def test_non_canonical_phase_is_folded(backend):
    # (-i) * Z X = Y, so phase 1 with coefficient 2 is the Hermitian Y with coefficient 2
    s = PauliSum.from_terms(1, [PauliTerm(1, 1, 1, 1, 2.0)])
    assert s.to_dict() == {"Y": 2.0}
    assert s.dtype == np.float64
    s2 = PauliSum.from_terms(1, [PauliTerm(1, 1, 0, 1, 2.0)])
    assert s2.to_dict() == {"Z": -2j}


def test_matches_dense(backend, rng):
    for n in (1, 3, 5):
        s = random_sum(rng, n, 20, complex_coeffs=True)
        ref = sum(dense(t) for t in s.terms())
        assert np.allclose(dense(s), ref)
        s.check_invariants()


def test_sorted_key_order(backend, rng):
    s = random_sum(rng, 70, 300)
    keys = [t.key for t in s.terms()]
    assert keys == sorted(keys)
    assert len(set(keys)) == len(keys)


def test_find(backend, rng):
    s = random_sum(rng, 6, 30)
    for i, t in enumerate(s.terms()):
        assert s.find(t) == (i, True)
    keys = {t.key for t in s.terms()}
    for x in range(64):
        for z in (0, 7, 63):
            if (x, z) not in keys:
                idx, found = s.find((x, z))
                assert not found
                assert sum(1 for k in keys if k < (x, z)) == idx


def test_count_ztype(backend, rng):
    s = random_sum(rng, 70, 400)
    assert s.count_ztype() == sum(1 for t in s.terms() if t.x_bits == 0)
    assert PauliSum.from_labels({"ZZ": 1.0, "IZ": 2.0}).count_ztype() == 2
    assert PauliSum.empty(3).count_ztype() == 0


def test_overlap_is_trace(backend, rng):
    n = 4
    a = random_sum(rng, n, 25, complex_coeffs=True)
    b = random_sum(rng, n, 25, complex_coeffs=True) + a.scale(0.5)
    want = np.trace(dense(a).conj().T @ dense(b)) / 2**n
    assert a.overlap(b) == pytest.approx(want, abs=1e-12)
    assert b.overlap(a) == pytest.approx(np.conj(want), abs=1e-12)
    assert a.norm2() == pytest.approx(a.overlap(a).real)


def test_expectation_zero(backend, rng):
    n = 4
    s = random_sum(rng, n, 40)
    assert s.expectation_zero() == pytest.approx(dense(s)[0, 0].real, abs=1e-12)


def test_truncations(backend):
    s = PauliSum.from_labels({"XXZ": 0.1, "ZZI": 1e-3, "XYY": 2.0, "IIX": -5e-4})
    assert s.truncate_threshold(1e-3).to_dict() == {"ZZI": 1e-3, "XXZ": 0.1, "XYY": 2.0}
    assert s.truncate_threshold(0) is s
    assert set(s.truncate_xweight(1).to_dict()) == {"ZZI", "IIX"}
    assert list(s.x_weights()) == [int(t.x_bits).bit_count() for t in s.terms()]
    with pytest.raises(InvalidArgumentsError):
        s.truncate_threshold(-1)


def test_weight_spectrum():
    s = PauliSum.from_labels({"ZII": 1.0, "XXI": 2.0, "ZYI": -1.0, "XYZ": 0.5})
    assert s.weight_spectrum() == {1: 1.0, 2: 5.0, 3: 0.25}


def test_term_limit(backend):
    a = PauliSum.from_labels({"XI": 1.0, "IX": 1.0})
    with pytest.raises(TermLimitError):
        a.merge_add(PauliSum.from_labels({"ZZ": 1.0}), max_terms=2)


def test_mismatched_sites():
    with pytest.raises(InvalidArgumentsError):
        PauliSum.from_labels({"X": 1.0}) + PauliSum.from_labels({"XX": 1.0})


def test_check_invariants_detects_disorder():
    s = PauliSum.from_labels({"XI": 1.0, "ZZ": 2.0})
    bad = PauliSum(2, s.rows[::-1].copy(), s.coeffs[::-1].copy())
    with pytest.raises(AssertionError):
        bad.check_invariants()


@given(st.dictionaries(st.text("IXYZ", min_size=3, max_size=3), st.floats(-4, 4).filter(lambda v: v != 0), min_size=1),
       st.dictionaries(st.text("IXYZ", min_size=3, max_size=3), st.floats(-4, 4).filter(lambda v: v != 0), min_size=1))
@settings(max_examples=100, deadline=None)
def test_addition_matches_dict_reference(a, b):
    got = (PauliSum.from_labels(a) + PauliSum.from_labels(b)).to_dict()
    want = {}
    for d in (a, b):
        for k, v in d.items():
            want[k] = want.get(k, 0.0) + v
    want = {k: v for k, v in want.items() if v != 0}
    assert got == want
