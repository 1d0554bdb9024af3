# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops. Must stay bit-compatible with _pykernels.py."""

from libc.math cimport log, sin, ldexp, fabs
from libc.stdint cimport uint64_t

DEF MAX_LIMBS = 16

cdef extern from *:
    int __builtin_clzll(unsigned long long) nogil

cdef double PI = 3.141592653589793


cdef inline double _limbs_to_double(const uint64_t* x, Py_ssize_t L) noexcept nogil:
    # correctly rounded x * 2**(-64 L): normalized 64-bit window plus a sticky bit
    cdef Py_ssize_t i = L - 1
    cdef Py_ssize_t j
    cdef int lz
    cdef uint64_t w, sticky = 0
    while i >= 0 and x[i] == 0:
        i -= 1
    if i < 0:
        return 0.0
    lz = __builtin_clzll(x[i])
    w = x[i] << lz
    if i > 0:
        if lz > 0:
            w |= x[i - 1] >> (64 - lz)
            sticky = x[i - 1] << lz
        else:
            sticky = x[i - 1]
        j = i - 2
        while sticky == 0 and j >= 0:
            sticky = x[j]
            j -= 1
    if sticky != 0:
        w |= 1
    return ldexp(<double>w, <int>(64 * i - lz - 64 * L))


def fill_orbit(const uint64_t[::1] alpha, uint64_t[::1] x, Py_ssize_t count,
               double[::1] frac_out, double[::1] dist_out):
    """Advance x by alpha (mod 1) ``count`` times, writing {x} and ||x||."""
    cdef Py_ssize_t L = alpha.shape[0]
    cdef Py_ssize_t n, j
    cdef uint64_t carry, s, t
    cdef uint64_t neg[MAX_LIMBS]
    if L > MAX_LIMBS or x.shape[0] != L:
        raise ValueError("bad limb count")
    if frac_out.shape[0] < count or dist_out.shape[0] < count:
        raise ValueError("output buffers too short")
    with nogil:
        for n in range(count):
            carry = 0
            for j in range(L):
                s = x[j] + alpha[j]
                t = s + carry
                carry = (s < x[j]) | (t < s)
                x[j] = t
            frac_out[n] = _limbs_to_double(&x[0], L)
            if x[L - 1] >> 63:
                carry = 1
                for j in range(L):
                    neg[j] = (~x[j]) + carry
                    carry = carry & (x[j] == 0)
                dist_out[n] = _limbs_to_double(neg, L)
            else:
                dist_out[n] = frac_out[n]


def eval_terms(int kind, const double[::1] frac, const double[::1] dist,
               double a, double b, double length, double two_e, double[::1] out):
    """Per-point summand values; kinds: 0 log-sudler, 1 log-diophantine, 2 sawtooth, 3 indicator."""
    cdef Py_ssize_t n, count = frac.shape[0]
    cdef double x
    if out.shape[0] < count or dist.shape[0] < count:
        raise ValueError("buffer size mismatch")
    with nogil:
        if kind == 0:
            for n in range(count):
                out[n] = log(2.0 * sin(PI * dist[n]))
        elif kind == 1:
            for n in range(count):
                out[n] = log(two_e * dist[n])
        elif kind == 2:
            for n in range(count):
                out[n] = frac[n] - 0.5
        elif kind == 3:
            for n in range(count):
                x = frac[n]
                if a <= x and x <= b:
                    out[n] = 1.0 - length
                else:
                    out[n] = 0.0 - length
        else:
            with gil:
                raise ValueError("unknown summand kind")


def compensated_prefix(const double[::1] terms, double[::1] out, double s, double c):
    """Neumaier running sum; out[i] = s + c after terms[0..i]. Returns the final (s, c)."""
    cdef Py_ssize_t n, count = terms.shape[0]
    cdef double t, u
    if out.shape[0] < count:
        raise ValueError("output buffer too short")
    with nogil:
        for n in range(count):
            t = terms[n]
            u = s + t
            if fabs(s) >= fabs(t):
                c += (s - u) + t
            else:
                c += (t - u) + s
            s = u
            out[n] = s + c
    return s, c
