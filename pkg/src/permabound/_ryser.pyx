# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled Ryser kernel.

``ryser_range(at, start, stop)`` sums the signed Ryser terms for the column
subsets ``gray(k) = k ^ (k >> 1)`` with ``start <= k < stop``. ``at`` is the
*transposed* matrix, so column ``j`` of Z is the contiguous row ``at[j]``.
Summing over any partition of ``[0, 2**n)`` into ranges gives per(Z).

Row sums, products and the running total are kept in ``long double``: the
signed terms can exceed the permanent by orders of magnitude, and the wider
mantissa absorbs most of that cancellation.
"""

from libc.stdlib cimport malloc, free

cdef extern from *:
    """
    static inline int pb_ctz(unsigned long long x) { return __builtin_ctzll(x); }
    static inline int pb_popcount(unsigned long long x) { return __builtin_popcountll(x); }
    """
    int pb_ctz(unsigned long long x) nogil
    int pb_popcount(unsigned long long x) nogil


cdef int _ryser_range(const double[:, ::1] re_t, const double[:, ::1] im_t,
                      unsigned long long start, unsigned long long stop,
                      double *out_re, double *out_im) noexcept nogil:
    cdef Py_ssize_t n = re_t.shape[0]
    cdef Py_ssize_t i, j
    cdef long double *rs_re = <long double *> malloc(2 * n * sizeof(long double))
    cdef long double *rs_im
    cdef unsigned long long g = start ^ (start >> 1)
    cdef unsigned long long k
    cdef long double p_re, p_im, t_re, tot_re = 0.0, tot_im = 0.0
    cdef int odd
    if rs_re == NULL:
        return -1
    rs_im = rs_re + n
    for i in range(n):
        rs_re[i] = 0.0
        rs_im[i] = 0.0
    for j in range(n):
        if (g >> j) & 1:
            for i in range(n):
                rs_re[i] += re_t[j, i]
                rs_im[i] += im_t[j, i]
    # sign of the term is (-1)^(n - |S|)
    odd = (<int> n - pb_popcount(g)) & 1

    k = start
    while k < stop:
        if k != start:
            j = pb_ctz(k)
            g ^= 1ULL << j
            if (g >> j) & 1:
                for i in range(n):
                    rs_re[i] += re_t[j, i]
                    rs_im[i] += im_t[j, i]
            else:
                for i in range(n):
                    rs_re[i] -= re_t[j, i]
                    rs_im[i] -= im_t[j, i]
            odd ^= 1
        p_re = rs_re[0]
        p_im = rs_im[0]
        for i in range(1, n):
            t_re = p_re * rs_re[i] - p_im * rs_im[i]
            p_im = p_re * rs_im[i] + p_im * rs_re[i]
            p_re = t_re
        if odd:
            tot_re -= p_re
            tot_im -= p_im
        else:
            tot_re += p_re
            tot_im += p_im
        k += 1

    free(rs_re)
    out_re[0] = <double> tot_re
    out_im[0] = <double> tot_im
    return 0


def ryser_range(at, unsigned long long start, unsigned long long stop):
    """Partial Ryser sum over Gray-code indices ``[start, stop)``."""
    cdef const double[:, ::1] re_t = at.real.copy()
    cdef const double[:, ::1] im_t = at.imag.copy()
    cdef double out_re = 0.0, out_im = 0.0
    cdef int status
    if re_t.shape[0] == 0:
        raise ValueError("ryser_range needs n >= 1")
    if stop > (1ULL << re_t.shape[0]) or start > stop:
        raise ValueError("index range outside [0, 2**n)")
    with nogil:
        status = _ryser_range(re_t, im_t, start, stop, &out_re, &out_im)
    if status != 0:
        raise MemoryError()
    return complex(out_re, out_im)
