# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Numerov recurrence with sign-change counting."""

from libc.math cimport fabs, log

cdef double _BIG = 1e100


cdef inline int _sign(double v) nogil:
    if v > 0:
        return 1
    if v < 0:
        return -1
    return 0


def numerov_shoot(double[::1] f, double h, Py_ssize_t start, Py_ssize_t stop, double p0, double p1):
    """Integrate psi'' = f psi from index ``start`` to ``stop`` (either direction).

    ``p0`` and ``p1`` are psi at ``start`` and the next index.  Returns
    ``(psi[stop - step], psi[stop], sign_changes, log_scale)`` where psi is
    known up to the factor ``exp(log_scale)``.
    """
    cdef Py_ssize_t step = 1 if stop > start else -1
    cdef Py_ssize_t i = start + step
    cdef double c = h * h / 12.0
    cdef double a_prev = 1.0 - c * f[start]
    cdef double a_cur = 1.0 - c * f[i]
    cdef double a_next, y_prev = p0, y_cur = p1, y_next
    cdef double log_scale = 0.0
    cdef long nodes = 0
    cdef int last = _sign(p0), s
    with nogil:
        s = _sign(p1)
        if s != 0:
            if last != 0 and s != last:
                nodes += 1
            last = s
        while i != stop:
            a_next = 1.0 - c * f[i + step]
            y_next = ((12.0 - 10.0 * a_cur) * y_cur - a_prev * y_prev) / a_next
            y_prev = y_cur
            y_cur = y_next
            a_prev = a_cur
            a_cur = a_next
            i += step
            s = _sign(y_cur)
            if s != 0:
                if last != 0 and s != last:
                    nodes += 1
                last = s
            if fabs(y_cur) > _BIG:
                y_cur /= _BIG
                y_prev /= _BIG
                log_scale += log(_BIG)
    return y_prev, y_cur, nodes, log_scale
