import io as _io

import numpy as np
import pytest

from spd.io import CheckpointError, load_checkpoint, read_text, save_checkpoint, write_text
from spd.models import build_tilted_ising, local_energy
from spd.evolution import trotter_step
from spd.pauli_algebra import PauliTerm
from spd.pauli_sum import PauliSum


@pytest.fixture
def evolved():
    H = build_tilted_ising(9)
    s = local_energy(5, 9)
    for _ in range(10):
        s = trotter_step(s, H, 0.05, 2.0**-12)
    return s


def test_checkpoint_roundtrip(tmp_path, evolved):
    p = tmp_path / "c.bin"
    save_checkpoint(p, evolved, step=10, time=0.5)
    s, meta = load_checkpoint(p)
    assert s == evolved
    assert (meta.n, meta.n_terms, meta.step, meta.time) == (9, len(evolved), 10, 0.5)


def test_checkpoint_complex_and_wide(tmp_path):
    n = 130
    s = PauliSum.from_terms(n, [PauliTerm(n, 1 << 129, 3, 0, 1 + 2j), PauliTerm(n, 5, 0, 0, -0.5j)])
    save_checkpoint(tmp_path / "c.bin", s)
    back, _ = load_checkpoint(tmp_path / "c.bin")
    assert back == s
    assert back.dtype == np.complex128


def test_checkpoint_detects_corruption(tmp_path, evolved):
    p = tmp_path / "c.bin"
    save_checkpoint(p, evolved)
    data = bytearray(p.read_bytes())
    data[100] ^= 0xFF
    p.write_bytes(bytes(data))
    with pytest.raises(CheckpointError, match="checksum"):
        load_checkpoint(p)
    p.write_bytes(b"NOTSPD" + bytes(60))
    with pytest.raises(CheckpointError):
        load_checkpoint(p)
    p.write_bytes(b"x")
    with pytest.raises(CheckpointError):
        load_checkpoint(p)


def test_text_roundtrip(evolved):
    buf = _io.StringIO()
    write_text(evolved, buf)
    buf.seek(0)
    assert read_text(buf) == evolved


def test_text_golden_lines():
    s = PauliSum.from_labels({"XY": 0.5, "ZI": -1.0})
    buf = _io.StringIO()
    write_text(s, buf)
    assert buf.getvalue().splitlines() == [
        "# n=2 N=2 dtype=float64",
        "-1.00000000000000000e+00 0 ZI",
        "+5.00000000000000000e-01 1 XY",
    ]
