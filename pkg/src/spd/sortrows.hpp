// Row utilities for the Cython kernels: rows are fixed-width uint64 words,
// compared lexicographically (first word most significant).
#pragma once
#include <algorithm>
#include <cstdint>
#include <numeric>

static inline int spd_cmp_rows(const uint64_t* a, const uint64_t* b, int w) {
    for (int k = 0; k < w; ++k) {
        if (a[k] < b[k]) return -1;
        if (a[k] > b[k]) return 1;
    }
    return 0;
}

static inline int spd_popcount(uint64_t v) { return __builtin_popcountll(v); }

// Stable argsort of n rows of width w.
static inline void spd_argsort_rows(const uint64_t* data, int64_t n, int w, int64_t* perm) {
    std::iota(perm, perm + n, int64_t(0));
    if (w == 2) {
        std::stable_sort(perm, perm + n, [data](int64_t i, int64_t j) {
            const uint64_t* a = data + 2 * i;
            const uint64_t* b = data + 2 * j;
            return a[0] < b[0] || (a[0] == b[0] && a[1] < b[1]);
        });
    } else {
        std::stable_sort(perm, perm + n, [data, w](int64_t i, int64_t j) {
            return spd_cmp_rows(data + w * i, data + w * j, w) < 0;
        });
    }
}

#include <cstring>
#include <vector>

template <typename T>
static inline void spd_merge_two(const uint64_t* ra, const T* va, int64_t na,
                                 const uint64_t* rb, const T* vb, int64_t nb,
                                 uint64_t* ro, T* vo, int w) {
    int64_t i = 0, j = 0, k = 0;
    while (i < na && j < nb) {
        if (spd_cmp_rows(rb + j * w, ra + i * w, w) < 0) {
            std::memcpy(ro + k * w, rb + j * w, sizeof(uint64_t) * w);
            vo[k++] = vb[j++];
        } else {
            std::memcpy(ro + k * w, ra + i * w, sizeof(uint64_t) * w);
            vo[k++] = va[i++];
        }
    }
    if (i < na) {
        std::memcpy(ro + k * w, ra + i * w, sizeof(uint64_t) * w * (na - i));
        std::copy(va + i, va + na, vo + k);
        k += na - i;
    }
    if (j < nb) {
        std::memcpy(ro + k * w, rb + j * w, sizeof(uint64_t) * w * (nb - j));
        std::copy(vb + j, vb + nb, vo + k);
    }
}

// Merge consecutive sorted runs [bounds[r], bounds[r+1]) of (rows, vals) into
// one sorted sequence, in place; trows/tvals are scratch of the same size.
// Bottom-up pairwise merging: ceil(log2(nruns)) passes.
template <typename T>
static inline void spd_merge_runs(uint64_t* rows, T* vals, uint64_t* trows, T* tvals,
                                  const int64_t* bounds, int nruns, int w) {
    std::vector<int64_t> b;
    b.push_back(bounds[0]);
    for (int r = 0; r < nruns; ++r)
        if (bounds[r + 1] > b.back()) b.push_back(bounds[r + 1]);
    uint64_t* sr = rows;
    uint64_t* dr = trows;
    T* sv = vals;
    T* dv = tvals;
    while (b.size() > 2) {
        std::vector<int64_t> nb;
        nb.push_back(b[0]);
        size_t runs = b.size() - 1, r = 0;
        for (; r + 1 < runs; r += 2) {
            int64_t a0 = b[r], a1 = b[r + 1], a2 = b[r + 2];
            spd_merge_two(sr + a0 * w, sv + a0, a1 - a0, sr + a1 * w, sv + a1, a2 - a1,
                          dr + a0 * w, dv + a0, w);
            nb.push_back(a2);
        }
        if (r < runs) {
            int64_t a0 = b[r], a1 = b[r + 1];
            std::memcpy(dr + a0 * w, sr + a0 * w, sizeof(uint64_t) * w * (a1 - a0));
            std::copy(sv + a0, sv + a1, dv + a0);
            nb.push_back(a1);
        }
        std::swap(sr, dr);
        std::swap(sv, dv);
        b.swap(nb);
    }
    if (sr != rows) {
        int64_t n = b.back() - b.front();
        std::memcpy(rows + b.front() * w, sr + b.front() * w, sizeof(uint64_t) * w * n);
        std::copy(sv + b.front(), sv + b.back(), vals + b.front());
    }
}
