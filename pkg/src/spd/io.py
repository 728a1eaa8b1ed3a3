"""Checkpoint and text formats for :class:`PauliSum`.

Binary checkpoint, all little-endian::

    magic     8s   b"SPDSUM\\r\\n"
    version   u32  1
    n         u32  site count
    N         u64  number of terms
    flags     u32  bit 0: complex coefficients; bit 1: x-before-z key order
    n_words   u32  64-bit words per bitstring
    step      u64  Trotter step the operator belongs to
    time      f64  physical time
    coeffs    N x f64 (real) or N x 2 x f64 (complex, re/im interleaved)
    phases    N x u8 (canonical phase exponents)
    rows      N x 2*n_words x u64 (x words then z words, most significant first)
    crc32     u32  over every preceding byte

The text export writes one term per line: coefficient, phase, Pauli string
with site 0 leftmost.
"""

from __future__ import annotations

import os
import struct
import zlib
from dataclasses import dataclass
from pathlib import Path
from typing import IO

import numpy as np

from .pauli_algebra import PauliTerm
from .pauli_sum import PauliSum, n_words_for

MAGIC = b"SPDSUM\r\n"
VERSION = 1
FLAG_COMPLEX = 1
FLAG_X_FIRST = 2
_HEADER = struct.Struct("<8sIIQIIQd")


class CheckpointError(ValueError):
    pass


@dataclass
class CheckpointMeta:
    n: int
    n_terms: int
    step: int
    time: float
    version: int = VERSION


def save_checkpoint(path: str | os.PathLike, s: PauliSum, step: int = 0, time: float = 0.0) -> None:
    """Write atomically (temp file + rename)."""
    path = Path(path)
    flags = FLAG_X_FIRST | (FLAG_COMPLEX if s.dtype.kind == "c" else 0)
    header = _HEADER.pack(MAGIC, VERSION, s.n, len(s), flags, s.n_words, int(step), float(time))
    coeffs = s.coeffs.astype("<c16" if s.dtype.kind == "c" else "<f8").tobytes()
    phases = s.phases.tobytes()
    rows = s.rows.astype("<u8").tobytes()
    crc = 0
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "wb") as fh:
        for chunk in (header, coeffs, phases, rows):
            fh.write(chunk)
            crc = zlib.crc32(chunk, crc)
        fh.write(struct.pack("<I", crc))
    os.replace(tmp, path)


def load_checkpoint(path: str | os.PathLike) -> tuple[PauliSum, CheckpointMeta]:
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size + 4:
        raise CheckpointError("file too short for a checkpoint")
    magic, version, n, N, flags, n_words, step, t = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise CheckpointError("bad magic bytes")
    if version != VERSION:
        raise CheckpointError(f"unsupported checkpoint version {version}")
    if not flags & FLAG_X_FIRST:
        raise CheckpointError("unknown key order")
    if n_words != n_words_for(n):
        raise CheckpointError("word count does not match site count")
    (crc,) = struct.unpack_from("<I", data, len(data) - 4)
    if zlib.crc32(data[:-4]) != crc:
        raise CheckpointError("checksum mismatch")
    is_complex = bool(flags & FLAG_COMPLEX)
    csize = 16 if is_complex else 8
    expected = _HEADER.size + N * (csize + 1 + 16 * n_words) + 4
    if len(data) != expected:
        raise CheckpointError(f"size {len(data)} != expected {expected}")
    off = _HEADER.size
    coeffs = np.frombuffer(data, "<c16" if is_complex else "<f8", N, off).astype(
        np.complex128 if is_complex else np.float64
    )
    off += N * csize
    phases = np.frombuffer(data, np.uint8, N, off)
    off += N
    rows = np.frombuffer(data, "<u8", N * 2 * n_words, off).astype(np.uint64).reshape(N, 2 * n_words)
    s = PauliSum(n, rows, coeffs)
    if not np.array_equal(s.phases, phases):
        raise CheckpointError("phase column is not in canonical gauge")
    try:
        s.check_invariants()
    except AssertionError as exc:
        raise CheckpointError(f"corrupt term arrays: {exc}") from None
    return s, CheckpointMeta(n, N, step, t, version)


def _fmt_coeff(c) -> str:
    if isinstance(c, complex):
        return f"{c.real:+.17e}{c.imag:+.17e}j"
    return f"{c:+.17e}"


def write_text(s: PauliSum, fh: IO[str]) -> None:
    fh.write(f"# n={s.n} N={len(s)} dtype={s.dtype.name}\n")
    for t in s.terms():
        fh.write(f"{_fmt_coeff(t.coeff)} {t.phase} {t.label}\n")


def read_text(fh: IO[str]) -> PauliSum:
    header = fh.readline().split()
    meta = dict(item.split("=", 1) for item in header[1:])
    n = int(meta["n"])
    dtype = np.dtype(meta.get("dtype", "float64"))
    terms = []
    for line in fh:
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        coeff, phase, label = line.split()
        t = PauliTerm.from_label(label, complex(coeff) if dtype.kind == "c" else float(coeff))
        if t.phase != int(phase):
            t = PauliTerm(t.n, t.z_bits, t.x_bits, int(phase), t.coeff)
        terms.append(t)
    return PauliSum.from_terms(n, terms, dtype)
