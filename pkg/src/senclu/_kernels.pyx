# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inference kernels; contract mirrors _kernels_py exactly.

The group-topic dot products arrive precomputed (BLAS does them better);
these loops fuse the prior weighting, rank-aware argmax, and the M-step
scatter accumulation that numpy cannot do in one pass.
"""

import numpy as np

cimport cython
cimport numpy as cnp

cnp.import_array()

BACKEND_NAME = "cython"


def e_step_chunk(
    double[:, ::1] sims,
    double[::1] inv_norms,
    double[:, ::1] priors,
    signed char[::1] ranks,
    cnp.int64_t[::1] sizes,
):
    cdef Py_ssize_t n_docs = sizes.shape[0]
    cdef Py_ssize_t k = sims.shape[1]
    out_arr = np.empty(sims.shape[0], dtype=np.int32)
    cdef int[::1] out = out_arr
    cdef Py_ssize_t di, gi, t, row, best_t, second_t
    cdef double score, best, second
    cdef signed char rank

    with nogil:
        row = 0
        for di in range(n_docs):
            rank = ranks[di]
            for gi in range(sizes[di]):
                best = -1e308
                second = -1e308
                best_t = 0
                second_t = 0
                for t in range(k):
                    score = sims[row, t] * inv_norms[t] * priors[di, t]
                    if score > best:
                        second = best
                        second_t = best_t
                        best = score
                        best_t = t
                    elif score > second:
                        second = score
                        second_t = t
                out[row] = <int> (best_t if rank == 1 else second_t)
                row += 1
    return out_arr


def accumulate_chunk(
    double[:, ::1] x,
    int[::1] assignments,
    cnp.int64_t[::1] sizes,
    Py_ssize_t k,
):
    cdef Py_ssize_t n_docs = sizes.shape[0]
    cdef Py_ssize_t dim = x.shape[1]
    sums_arr = np.zeros((k, dim), dtype=np.float64)
    counts_arr = np.zeros(k, dtype=np.int64)
    doc_topic_arr = np.zeros((n_docs, k), dtype=np.int64)
    cdef double[:, ::1] sums = sums_arr
    cdef cnp.int64_t[::1] counts = counts_arr
    cdef cnp.int64_t[:, ::1] doc_topic = doc_topic_arr
    cdef Py_ssize_t di, gi, j, row, t

    with nogil:
        row = 0
        for di in range(n_docs):
            for gi in range(sizes[di]):
                t = assignments[row]
                for j in range(dim):
                    sums[t, j] += x[row, j]
                counts[t] += 1
                doc_topic[di, t] += 1
                row += 1
    return sums_arr, counts_arr, doc_topic_arr
