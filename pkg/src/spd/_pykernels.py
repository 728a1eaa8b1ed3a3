"""Pure numpy implementation of the sorted-array kernels.

Row layout for a term with ``W`` words per bitstring is ``[x_{W-1} .. x_0,
z_{W-1} .. z_0]`` so that plain lexicographic order on rows is the term-key
order.  All functions here have byte-for-byte identical results to the
compiled versions in ``_ckernels``; coefficient sums for one key are always a
left fold in input order.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"


def _void_view(rows: np.ndarray) -> np.ndarray:
    # big-endian words make memcmp order equal numeric row order
    w = rows.shape[1]
    return np.ascontiguousarray(rows.astype(">u8")).view(np.dtype((np.void, 8 * w))).ravel()


def lexsort_rows(rows: np.ndarray) -> np.ndarray:
    """Stable argsort of rows in lexicographic order."""
    if rows.shape[0] == 0:
        return np.zeros(0, dtype=np.intp)
    return np.lexsort(rows.T[::-1])


def search(sorted_rows: np.ndarray, queries: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Insertion indices (left) of ``queries`` in ``sorted_rows`` and a found mask."""
    if sorted_rows.shape[0] == 0:
        return np.zeros(len(queries), dtype=np.intp), np.zeros(len(queries), dtype=bool)
    hay = _void_view(sorted_rows)
    needles = _void_view(queries)
    idx = np.searchsorted(hay, needles, side="left")
    found = np.zeros(len(queries), dtype=bool)
    inside = idx < len(hay)
    found[inside] = hay[idx[inside]] == needles[inside]
    return idx.astype(np.intp), found


def _fold_sorted(rows: np.ndarray, coeffs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Combine adjacent equal rows by sequential left-fold addition."""
    m = rows.shape[0]
    if m == 0:
        return rows, coeffs
    start = np.ones(m, dtype=bool)
    start[1:] = np.any(rows[1:] != rows[:-1], axis=1)
    heads = np.flatnonzero(start)
    if len(heads) == m:
        return rows, coeffs
    gid = np.cumsum(start) - 1
    rank = np.arange(m) - heads[gid]
    acc = coeffs[heads].copy()
    for r in range(1, int(rank.max()) + 1):
        sel = rank == r
        acc[gid[sel]] = acc[gid[sel]] + coeffs[sel]
    return rows[heads], acc


def _keep(coeffs: np.ndarray, delta: float) -> np.ndarray:
    keep = coeffs != 0
    if delta > 0:
        keep &= np.abs(coeffs) >= delta
    return keep


def sort_unique(rows: np.ndarray, coeffs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Sort an unsorted batch, fold duplicates in input order and drop exact zeros."""
    order = lexsort_rows(rows)
    r, c = _fold_sorted(rows[order], coeffs[order])
    keep = c != 0
    return np.ascontiguousarray(r[keep]), c[keep]


def merge(
    rows_a: np.ndarray,
    coeffs_a: np.ndarray,
    rows_b: np.ndarray,
    coeffs_b: np.ndarray,
    delta: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Merge two sorted unique arrays; equal keys give ``a + b``.

    Entries whose result is exactly zero or has modulus below ``delta`` are dropped.
    """
    dtype = np.result_type(coeffs_a, coeffs_b)
    rows = np.concatenate([rows_a, rows_b])
    coeffs = np.concatenate([coeffs_a.astype(dtype, copy=False), coeffs_b.astype(dtype, copy=False)])
    order = lexsort_rows(rows)  # stable: the ``a`` entry precedes its ``b`` partner
    r, c = _fold_sorted(rows[order], coeffs[order])
    keep = _keep(c, delta)
    return np.ascontiguousarray(r[keep]), c[keep]


def _popcount_rows(a: np.ndarray) -> np.ndarray:
    return np.bitwise_count(a).sum(axis=1, dtype=np.int64)


def anticommute_mask(rows: np.ndarray, sigma: np.ndarray, threads: int = 1) -> np.ndarray:
    w = rows.shape[1] // 2
    sx, sz = sigma[:w], sigma[w:]
    cnt = _popcount_rows(rows[:, w:] & sx) + _popcount_rows(rows[:, :w] & sz)
    return (cnt & 1).astype(bool)


def _times_i_pow(values: np.ndarray, m: np.ndarray) -> np.ndarray:
    """Exact multiplication by ``i**m`` (m in 0..3)."""
    if values.dtype.kind != "c":
        if np.any(m & 1):
            raise ArithmeticError("imaginary coefficient produced in a real-valued sum")
        return np.where(m == 0, values, -values)
    re, im = values.real, values.imag
    out = np.empty_like(values)
    out.real = np.select([m == 0, m == 1, m == 2], [re, -im, -re], im)
    out.imag = np.select([m == 0, m == 1, m == 2], [im, re, -im], -re)
    return out


def rotate(
    rows: np.ndarray,
    coeffs: np.ndarray,
    sigma: np.ndarray,
    cos_t: float,
    sin_t: float,
    delta: float,
    threads: int = 1,
) -> tuple[np.ndarray, np.ndarray]:
    """Conjugate the sum by ``exp(-i theta sigma / 2)`` and threshold.

    ``sigma`` is a Hermitian-canonical row.  Anticommuting entries ``a P``
    become ``cos a P`` plus a candidate ``i sin a sigma.P`` brought back to
    canonical phase.
    """
    del threads
    w = rows.shape[1] // 2
    anti = anticommute_mask(rows, sigma)
    if not anti.any():
        keep = _keep(coeffs, delta)
        if keep.all():
            return rows, coeffs
        return np.ascontiguousarray(rows[keep]), coeffs[keep]
    new_coeffs = coeffs.copy()
    src = coeffs[anti]
    new_coeffs[anti] = src * cos_t

    p_rows = rows[anti]
    q_rows = p_rows ^ sigma
    sx, sz = sigma[:w], sigma[w:]
    phase_sigma = int(np.bitwise_count(sx & sz).sum()) & 3
    phase_p = _popcount_rows(p_rows[:, :w] & p_rows[:, w:])
    parity = _popcount_rows(p_rows[:, w:] & sx) & 1
    phase_q = _popcount_rows(q_rows[:, :w] & q_rows[:, w:])
    k = (phase_sigma + phase_p + 2 * parity - phase_q) & 3
    cand = _times_i_pow(src * sin_t, (1 - k) & 3)

    order = lexsort_rows(q_rows)
    return merge(rows, new_coeffs, np.ascontiguousarray(q_rows[order]), cand[order], delta)
