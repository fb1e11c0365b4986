# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Daubechies-Lagarias kernel (see ``_pykernels`` for the reference).

Binary digits are consumed eight at a time: the 256 products
``T_{d1} ... T_{d8}`` are tabulated once per call, so each point needs
``depth // 8`` dense matrix-vector products plus a few banded ones for the
leftover digits, instead of ``depth`` banded products.
"""

import numpy as np
cimport numpy as cnp
from libc.stdlib cimport malloc, free
from libc.string cimport memcpy

cnp.import_array()

cdef enum:
    CHUNK = 8
    WORDS = 256


cdef void _matmul(const double* A, const double* B, double* C, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t i, j, k
    cdef double acc
    for i in range(n):
        for j in range(n):
            acc = 0.0
            for k in range(n):
                acc = acc + A[i * n + k] * B[k * n + j]
            C[i * n + j] = acc


cdef void _banded(const double* T, const double* a, double* b, Py_ssize_t n,
                  Py_ssize_t shift) noexcept nogil:
    # row j of T_d is nonzero only where 0 <= 2j - r + d <= L - 1
    cdef Py_ssize_t j, r, lo, hi
    cdef Py_ssize_t L = n + 1
    cdef double acc
    for j in range(n):
        lo = 2 * j + shift - L + 1
        if lo < 0:
            lo = 0
        hi = 2 * j + shift + 1
        if hi > n:
            hi = n
        acc = 0.0
        for r in range(lo, hi):
            acc = acc + T[j * n + r] * a[r]
        b[j] = acc


def dl_values(const double[:, ::1] T0, const double[:, ::1] T1, const double[::1] v0,
              const double[::1] t, int depth):
    cdef Py_ssize_t m = t.shape[0]
    cdef Py_ssize_t n = v0.shape[0]
    cdef Py_ssize_t nn = n * n
    cdef Py_ssize_t i, j, k, r, c, w, level, half
    cdef Py_ssize_t chunks = depth // CHUNK
    cdef double x, acc
    cdef const double* p0 = &T0[0, 0]
    cdef const double* p1 = &T1[0, 0]
    cdef const double* P
    cdef double* a
    cdef double* b
    cdef double* tmp
    out = np.empty((m, n), dtype=np.float64)
    cdef double[:, ::1] res = out

    cdef unsigned char* digits = <unsigned char*> malloc(depth * sizeof(unsigned char) + 1)
    cdef double* buf = <double*> malloc(2 * n * sizeof(double))
    # products for words of 1..CHUNK digits; level k occupies 2^k matrices
    cdef double* table = <double*> malloc(2 * WORDS * nn * sizeof(double))
    if digits == NULL or buf == NULL or table == NULL:
        free(digits)
        free(buf)
        free(table)
        raise MemoryError()

    with nogil:
        # level-1 words live at offset 2^1 - 2 = 0, level-k words at 2^k - 2
        memcpy(table, p0, nn * sizeof(double))
        memcpy(table + nn, p1, nn * sizeof(double))
        for level in range(2, CHUNK + 1):
            half = 1 << (level - 1)
            for w in range(2 * half):
                # leading digit first: T_{lead} @ product(remaining level-1 digits)
                _matmul(p1 if (w >> (level - 1)) else p0,
                        table + ((half - 2) + (w & (half - 1))) * nn,
                        table + ((2 * half - 2) + w) * nn, n)
        P = table + (WORDS - 2) * nn

        for i in range(m):
            x = t[i]
            for k in range(depth):
                x = 2.0 * x
                if x >= 1.0:
                    digits[k] = 1
                    x -= 1.0
                else:
                    digits[k] = 0
            a = buf
            b = buf + n
            for j in range(n):
                a[j] = v0[j]
            for k in range(depth - 1, chunks * CHUNK - 1, -1):
                _banded(p1 if digits[k] else p0, a, b, n, digits[k])
                tmp = a
                a = b
                b = tmp
            for c in range(chunks - 1, -1, -1):
                w = 0
                for k in range(c * CHUNK, c * CHUNK + CHUNK):
                    w = 2 * w + digits[k]
                for j in range(n):
                    acc = 0.0
                    for r in range(n):
                        acc = acc + P[w * nn + j * n + r] * a[r]
                    b[j] = acc
                tmp = a
                a = b
                b = tmp
            for j in range(n):
                res[i, j] = a[j]
    free(digits)
    free(buf)
    free(table)
    return out
