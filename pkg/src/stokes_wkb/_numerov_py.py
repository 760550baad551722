"""Pure-Python Numerov recurrence, used when the compiled kernel is absent."""

from __future__ import annotations

import math

_BIG = 1e100


def _sign(v: float) -> int:
    return (v > 0) - (v < 0)


def numerov_shoot(f, h: float, start: int, stop: int, p0: float, p1: float):
    """Integrate psi'' = f psi from index ``start`` to ``stop`` (either direction).

    ``p0`` and ``p1`` are psi at ``start`` and the next index.  Returns
    ``(psi[stop - step], psi[stop], sign_changes, log_scale)`` where psi is
    known up to the factor ``exp(log_scale)``.
    """
    step = 1 if stop > start else -1
    i = start + step
    c = h * h / 12.0
    f = f.tolist() if hasattr(f, "tolist") else list(f)
    a_prev = 1.0 - c * f[start]
    a_cur = 1.0 - c * f[i]
    y_prev, y_cur = float(p0), float(p1)
    log_scale = 0.0
    nodes = 0
    last = _sign(y_prev)
    s = _sign(y_cur)
    if s:
        if last and s != last:
            nodes += 1
        last = s
    while i != stop:
        a_next = 1.0 - c * f[i + step]
        y_next = ((12.0 - 10.0 * a_cur) * y_cur - a_prev * y_prev) / a_next
        y_prev, y_cur = y_cur, y_next
        a_prev, a_cur = a_cur, a_next
        i += step
        s = _sign(y_cur)
        if s:
            if last and s != last:
                nodes += 1
            last = s
        if abs(y_cur) > _BIG:
            y_cur /= _BIG
            y_prev /= _BIG
            log_scale += math.log(_BIG)
    return y_prev, y_cur, nodes, log_scale
