# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled sorted-array kernels.

Same contract as ``_pykernels``: rows are ``[x words, z words]`` with the most
significant word first, coefficient sums for one key are a left fold in input
order, and results do not depend on the thread count.
"""

import numpy as np
cimport numpy as cnp
from cython.parallel cimport prange
from libc.math cimport fabs, hypot
from libc.stdint cimport int64_t, uint8_t, uint64_t

cnp.import_array()

BACKEND = "cython"


cdef extern from "sortrows.hpp" nogil:
    int spd_cmp_rows(const uint64_t* a, const uint64_t* b, int w)
    int spd_popcount(uint64_t v)
    void spd_argsort_rows(const uint64_t* data, int64_t n, int w, int64_t* perm)
    void spd_merge_runs[T](uint64_t* rows, T* vals, uint64_t* trows, T* tvals,
                           const int64_t* bounds, int nruns, int w)

# Axes flipping at most this many key bits use the bucket-and-merge path for
# ordering candidates; others fall back to a comparison sort.
DEF MAX_RUN_BITS = 6


ctypedef fused coeff_t:
    double
    double complex


cdef inline double _mod(coeff_t v) noexcept nogil:
    if coeff_t is double:
        return fabs(v)
    else:
        return hypot(v.real, v.imag)


cdef inline bint _keep(coeff_t v, double delta) noexcept nogil:
    if coeff_t is double:
        if v == 0.0:
            return False
    else:
        if v.real == 0.0 and v.imag == 0.0:
            return False
    return delta <= 0.0 or _mod(v) >= delta


cdef inline double complex _ipow(double complex v, int m) noexcept nogil:
    # exact multiplication by i**m
    cdef double re = v.real, im = v.imag
    cdef double complex out = v
    cdef double* parts = <double*>&out
    if m == 1:
        parts[0] = -im
        parts[1] = re
    elif m == 2:
        parts[0] = -re
        parts[1] = -im
    elif m == 3:
        parts[0] = im
        parts[1] = -re
    return out


cdef inline void _copy_row(uint64_t* dst, const uint64_t* src, int w) noexcept nogil:
    cdef int k
    for k in range(w):
        dst[k] = src[k]


def lexsort_rows(uint64_t[:, ::1] rows):
    """Stable argsort of rows in lexicographic order."""
    cdef int64_t n = rows.shape[0]
    perm = np.empty(n, dtype=np.int64)
    cdef int64_t[::1] p = perm
    if n:
        with nogil:
            spd_argsort_rows(&rows[0, 0], n, <int>rows.shape[1], &p[0])
    return perm.astype(np.intp, copy=False)


def search(uint64_t[:, ::1] sorted_rows, uint64_t[:, ::1] queries):
    """Left insertion indices of ``queries`` in ``sorted_rows`` and a found mask."""
    cdef int64_t n = sorted_rows.shape[0], m = queries.shape[0], i, lo, hi, mid
    cdef int w = <int>queries.shape[1], c
    idx = np.zeros(m, dtype=np.intp)
    found = np.zeros(m, dtype=bool)
    cdef cnp.npy_intp[::1] iv = idx
    cdef uint8_t[::1] fv = found.view(np.uint8)
    if n == 0:
        return idx, found
    with nogil:
        for i in range(m):
            lo = 0
            hi = n
            while lo < hi:
                mid = (lo + hi) >> 1
                if spd_cmp_rows(&sorted_rows[mid, 0], &queries[i, 0], w) < 0:
                    lo = mid + 1
                else:
                    hi = mid
            iv[i] = lo
            if lo < n and spd_cmp_rows(&sorted_rows[lo, 0], &queries[i, 0], w) == 0:
                fv[i] = 1
    return idx, found


cdef _shrink(object arr, int64_t m):
    # in-place realloc; no other references exist yet
    if arr.ndim == 1:
        arr.resize((m,), refcheck=False)
    else:
        arr.resize((m, arr.shape[1]), refcheck=False)
    return arr


def sort_unique(uint64_t[:, ::1] rows, coeff_t[::1] coeffs):
    """Sort an unsorted batch, fold duplicates in input order, drop exact zeros."""
    cdef int64_t n = rows.shape[0], i, j, m = 0
    cdef int w = <int>rows.shape[1]
    cdef coeff_t acc
    out_rows = np.empty((n, w), dtype=np.uint64)
    out_c = np.empty(n, dtype=np.asarray(coeffs).dtype)
    if n == 0:
        return out_rows, out_c
    cdef uint64_t[:, ::1] orows = out_rows
    cdef coeff_t[::1] oc = out_c
    perm = np.empty(n, dtype=np.int64)
    cdef int64_t[::1] p = perm
    with nogil:
        spd_argsort_rows(&rows[0, 0], n, w, &p[0])
        i = 0
        while i < n:
            acc = coeffs[p[i]]
            j = i + 1
            while j < n and spd_cmp_rows(&rows[p[i], 0], &rows[p[j], 0], w) == 0:
                acc = acc + coeffs[p[j]]
                j += 1
            if _keep(acc, 0.0):
                _copy_row(&orows[m, 0], &rows[p[i], 0], w)
                oc[m] = acc
                m += 1
            i = j
    return _shrink(out_rows, m), _shrink(out_c, m)


cdef int64_t _merge_perm(
    uint64_t[:, ::1] ra, coeff_t[::1] ca,
    uint64_t[:, ::1] rb, coeff_t[::1] cb, int64_t[::1] perm,
    double delta,
    uint64_t[:, ::1] orows, coeff_t[::1] oc,
) noexcept nogil:
    # merge-join; ``rb`` is visited in ``perm`` order (identity if sorted)
    cdef int64_t na = ra.shape[0], nb = rb.shape[0], i = 0, j = 0, m = 0, pj = 0
    cdef int w = <int>ra.shape[1], c
    cdef bint direct = perm.shape[0] == 0
    cdef coeff_t v
    cdef const uint64_t* src
    while i < na or j < nb:
        if j >= nb:
            c = -1
        elif i >= na:
            c = 1
        else:
            pj = j if direct else perm[j]
            c = spd_cmp_rows(&ra[i, 0], &rb[pj, 0], w)
        if c < 0:
            v = ca[i]
            src = &ra[i, 0]
            i += 1
        elif c > 0:
            pj = j if direct else perm[j]
            v = cb[pj]
            src = &rb[pj, 0]
            j += 1
        else:
            v = ca[i] + cb[pj]
            src = &ra[i, 0]
            i += 1
            j += 1
        if _keep(v, delta):
            _copy_row(&orows[m, 0], src, w)
            oc[m] = v
            m += 1
    return m


def merge(uint64_t[:, ::1] rows_a, coeff_t[::1] coeffs_a,
          uint64_t[:, ::1] rows_b, coeff_t[::1] coeffs_b, double delta):
    """Merge two sorted unique arrays; equal keys give ``a + b``; threshold at ``delta``."""
    cdef int64_t na = rows_a.shape[0], nb = rows_b.shape[0], m
    cdef int w = <int>rows_a.shape[1]
    out_rows = np.empty((na + nb, w), dtype=np.uint64)
    out_c = np.empty(na + nb, dtype=np.asarray(coeffs_a).dtype)
    if na + nb == 0:
        return out_rows, out_c
    cdef int64_t[::1] perm = np.zeros(0, dtype=np.int64)
    cdef uint64_t[:, ::1] orows = out_rows
    cdef coeff_t[::1] oc = out_c
    m = _merge_perm(rows_a, coeffs_a, rows_b, coeffs_b, perm, delta, orows, oc)
    return _shrink(out_rows, m), _shrink(out_c, m)


def anticommute_mask(uint64_t[:, ::1] rows, uint64_t[::1] sigma, int threads=1):
    cdef int64_t n = rows.shape[0], i
    cdef int w = <int>rows.shape[1] // 2, k, cnt
    mask = np.zeros(n, dtype=bool)
    cdef uint8_t[::1] mv = mask.view(np.uint8)
    for i in prange(n, nogil=True, num_threads=threads, schedule="static"):
        cnt = 0
        for k in range(w):
            cnt = cnt + spd_popcount(rows[i, w + k] & sigma[k]) + spd_popcount(rows[i, k] & sigma[w + k])
        mv[i] = cnt & 1
    return mask


def rotate(uint64_t[:, ::1] rows, coeff_t[::1] coeffs, uint64_t[::1] sigma,
           double cos_t, double sin_t, double delta, int threads=1):
    """Conjugate by ``exp(-i theta sigma / 2)`` and drop entries below ``delta``.

    Candidates ``sigma.P`` are ordered without a comparison sort when sigma
    flips few key bits: XOR with a constant preserves order among rows that
    agree on the flipped bits, so bucketing by those bits yields at most
    ``2**r`` sorted runs, merged pairwise.
    """
    cdef int64_t n = rows.shape[0], i, b, nb = 0, m
    cdef int w2 = <int>rows.shape[1], w = w2 // 2, k, cnt, phase_sigma = 0, ph, mexp, bit
    cdef int r = 0, cls, nclass
    cdef bint bad = False
    cdef coeff_t a, v
    cdef uint64_t[:, ::1] orows
    cdef coeff_t[::1] oc
    cdef int64_t[::1] no_perm = np.zeros(0, dtype=np.int64)
    cdef int flip_word[MAX_RUN_BITS]
    cdef uint64_t flip_mask[MAX_RUN_BITS]
    dtype = np.asarray(coeffs).dtype

    anti_arr = np.empty(n, dtype=np.uint8)
    cdef uint8_t[::1] anti = anti_arr
    for i in prange(n, nogil=True, num_threads=threads, schedule="static"):
        cnt = 0
        for k in range(w):
            cnt = cnt + spd_popcount(rows[i, w + k] & sigma[k]) + spd_popcount(rows[i, k] & sigma[w + k])
        anti[i] = cnt & 1
    for i in range(n):
        nb += anti[i]

    if nb == 0:
        for i in range(n):
            if not _keep(coeffs[i], delta):
                break
        else:
            return np.asarray(rows), np.asarray(coeffs)
        out_rows = np.empty((n, w2), dtype=np.uint64)
        out_c = np.empty(n, dtype=dtype)
        orows = out_rows
        oc = out_c
        m = _merge_perm(rows, coeffs, rows[:0], coeffs[:0], no_perm, delta, orows, oc)
        return _shrink(out_rows, m), _shrink(out_c, m)

    for k in range(w2):
        cnt = spd_popcount(sigma[k])
        if r + cnt > MAX_RUN_BITS:
            r = MAX_RUN_BITS + 1
            break
        for bit in range(63, -1, -1):
            if (sigma[k] >> bit) & 1:
                flip_word[r] = k
                flip_mask[r] = (<uint64_t>1) << bit
                r += 1
    cdef bint runs = r <= MAX_RUN_BITS
    nclass = (1 << r) if runs else 1
    for k in range(w):
        phase_sigma += spd_popcount(sigma[k] & sigma[w + k])

    offsets_arr = np.zeros(nclass + 1, dtype=np.int64)
    cdef int64_t[::1] offsets = offsets_arr
    cdef int64_t[::1] fill = np.zeros(nclass, dtype=np.int64)
    new_c_arr = np.array(coeffs, copy=True)
    q_arr = np.empty((nb, w2), dtype=np.uint64)
    cand_arr = np.empty(nb, dtype=dtype)
    cdef coeff_t[::1] new_c = new_c_arr
    cdef uint64_t[:, ::1] q = q_arr
    cdef coeff_t[::1] cand = cand_arr
    with nogil:
        if runs:
            # class of each anticommuting row, stored as class + 1 in ``anti``
            for i in range(n):
                if anti[i]:
                    cls = 0
                    for k in range(r):
                        cls = (cls << 1) | ((rows[i, flip_word[k]] & flip_mask[k]) != 0)
                    anti[i] = <uint8_t>(cls + 1)
                    offsets[cls + 1] += 1
            for k in range(nclass):
                offsets[k + 1] += offsets[k]
                fill[k] = offsets[k]
        for i in range(n):
            if not anti[i]:
                continue
            if runs:
                b = fill[anti[i] - 1]
                fill[anti[i] - 1] += 1
            else:
                b = fill[0]
                fill[0] += 1
            a = coeffs[i]
            new_c[i] = a * cos_t
            # phase of sigma.P relative to its canonical gauge; the product
            # parity enters as 2 * popcount, so per-word sums agree mod 4
            ph = phase_sigma
            for k in range(w):
                ph = ph + spd_popcount(rows[i, k] & rows[i, w + k])
                ph = ph + 2 * (spd_popcount(rows[i, w + k] & sigma[k]) & 1)
                q[b, k] = rows[i, k] ^ sigma[k]
                q[b, w + k] = rows[i, w + k] ^ sigma[w + k]
            for k in range(w):
                ph = ph - spd_popcount(q[b, k] & q[b, w + k])
            mexp = (1 - ph) & 3
            v = a * sin_t
            if coeff_t is double:
                if mexp & 1:
                    bad = True
                elif mexp == 2:
                    v = -v
            else:
                v = _ipow(v, mexp)
            cand[b] = v
    if bad:
        raise ArithmeticError("imaginary coefficient produced in a real-valued sum")

    cdef int64_t[::1] perm
    cdef uint64_t[:, ::1] tq
    cdef coeff_t[::1] tc
    if runs:
        tq = np.empty((nb, w2), dtype=np.uint64)
        tc = np.empty(nb, dtype=dtype)
        with nogil:
            spd_merge_runs(&q[0, 0], &cand[0], &tq[0, 0], &tc[0], &offsets[0], nclass, w2)
        perm = no_perm
    else:
        perm = np.empty(nb, dtype=np.int64)
        with nogil:
            spd_argsort_rows(&q[0, 0], nb, w2, &perm[0])

    out_rows = np.empty((n + nb, w2), dtype=np.uint64)
    out_c = np.empty(n + nb, dtype=dtype)
    orows = out_rows
    oc = out_c
    m = _merge_perm(rows, new_c, q, cand, perm, delta, orows, oc)
    return _shrink(out_rows, m), _shrink(out_c, m)
