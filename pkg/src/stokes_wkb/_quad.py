"""Adaptive Gauss-Legendre quadrature on real parameter intervals.

The integrand may be real or complex.  ``integrate_ordered`` walks panels
strictly left to right and threads a caller-defined state through them,
which is how square-root branches are continued along a path.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

QUAD_TOL = 1e-10
_ORDER = 20
_MAX_DEPTH = 48


@lru_cache(maxsize=8)
def gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    nodes, weights = np.polynomial.legendre.leggauss(n)
    return nodes, weights


def _panel(f, a, b, state, n):
    x, w = gauss_legendre(n)
    half = 0.5 * (b - a)
    t = 0.5 * (a + b) + half * x
    vals, state = f(t, state)
    return half * np.dot(w, vals), state


def integrate_ordered(f, a: float, b: float, state=None, tol: float = QUAD_TOL, n: int = _ORDER):
    """Integrate ``f`` over [a, b] with ordered adaptive bisection.

    ``f(t, state) -> (values, new_state)`` receives nodes in increasing
    order.  Returns ``(value, abs_error_estimate, final_state)``.
    """
    if a == b:
        return 0.0, 0.0, state
    whole, _ = _panel(f, a, b, state, n)
    scale = max(1.0, abs(whole))
    length = b - a
    total = 0.0
    err_total = 0.0
    # explicit stack of (a, b, depth); right halves pushed first so that the
    # left half is always processed next
    stack = [(a, b, 0)]
    while stack:
        lo, hi, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        coarse, _ = _panel(f, lo, hi, state, n)
        left, s_left = _panel(f, lo, mid, state, n)
        right, s_right = _panel(f, mid, hi, s_left, n)
        fine = left + right
        err = abs(fine - coarse)
        budget = tol * scale * (hi - lo) / length
        if err <= budget or depth >= _MAX_DEPTH or err <= 1e-15 * abs(fine):
            total += fine
            err_total += err
            state = s_right
        else:
            stack.append((mid, hi, depth + 1))
            stack.append((lo, mid, depth + 1))
    return total, err_total, state


def integrate(f, a: float, b: float, tol: float = QUAD_TOL, n: int = _ORDER):
    """Stateless convenience wrapper: ``f(t) -> values``."""
    value, err, _ = integrate_ordered(lambda t, s: (f(t), s), a, b, None, tol, n)
    return value, err
