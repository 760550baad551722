"""Action integrals of sqrt(q~), closed-contour actions and the first chi term.

Branches of sqrt(q~) are continued along the ordered quadrature nodes of a
path: the first node takes the principal value (or a caller-given branch)
and every later node takes the sign closest to its predecessor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from ._quad import QUAD_TOL, gauss_legendre, integrate_ordered
from .errors import NonCanonicalPath, PathThroughPole
from .potentials import POLE_GUARD, PotentialSpec, _distance_to_poles, q_derivatives, real_well

R_CUT = 30.0


@dataclass(frozen=True)
class ActionValue:
    value: complex
    abs_error_estimate: float
    path_descriptor: tuple


def continue_sqrt(q: np.ndarray, prev: complex | None) -> tuple[np.ndarray, complex]:
    """Square roots of ``q`` (ordered samples) continued from ``prev``."""
    s = np.sqrt(q.astype(complex))
    out = np.empty_like(s)
    last = prev
    for i, v in enumerate(s):
        if last is not None and abs(v - last) > abs(v + last):
            v = -v
        out[i] = v
        last = v
    return out, last


def _smoothstep(u):
    return u * u * (3.0 - 2.0 * u), 6.0 * u * (1.0 - u)


def _check_segment(spec: PotentialSpec, a: complex, b: complex):
    t = np.linspace(0.0, 1.0, 257)
    d = _distance_to_poles(spec, a + (b - a) * t)
    if np.min(d) < POLE_GUARD:
        raise PathThroughPole(f"segment {a} -> {b} passes a pole", start=a, end=b)


def action_between(spec: PotentialSpec, E: float, x1: complex, x2: complex, path: str = "REAL_SEGMENT",
                   points: Sequence[complex] | None = None, branch: complex | None = None,
                   tol: float = QUAD_TOL) -> ActionValue:
    """Integral of sqrt(q~) from x1 to x2 along a segment or polyline.

    Each segment is parametrized with a smoothstep map whose derivative
    vanishes at both ends, which absorbs square-root zeros of q~ sitting at
    the vertices.  ``branch`` fixes the sign at ``x1`` (nearest root wins).
    """
    if path == "POLYLINE":
        verts = [complex(x1)] + [complex(p) for p in (points or [])] + [complex(x2)]
    elif path == "REAL_SEGMENT":
        verts = [complex(x1), complex(x2)]
    else:
        raise ValueError(f"unknown path kind {path!r}")
    if verts[0] == verts[-1] and len(verts) == 2:
        return ActionValue(0j, 0.0, tuple(verts))
    for a, b in zip(verts[:-1], verts[1:]):
        _check_segment(spec, a, b)
    total, err = 0j, 0.0
    state = branch
    for a, b in zip(verts[:-1], verts[1:]):
        if a == b:
            continue
        d = b - a

        def f(u, prev, a=a, d=d):
            tau, dtau = _smoothstep(u)
            s, last = continue_sqrt(spec.q(a + d * tau, E), prev)
            return s * d * dtau, last

        val, e, state = integrate_ordered(f, 0.0, 1.0, state, tol)
        total += val
        err += e
    return ActionValue(complex(total), float(err), tuple(verts))


def _real_sqrt_integral(spec: PotentialSpec, E: float, lo: float, hi: float, tol: float):
    """Integral of sqrt(-q~) over [lo, hi] where q~ < 0 strictly inside."""

    def f(u, s):
        tau, dtau = _smoothstep(u)
        x = lo + (hi - lo) * tau
        v = -np.real(spec.q(x, E))
        return np.sqrt(np.maximum(v, 0.0)) * (hi - lo) * dtau, s

    val, err, _ = integrate_ordered(f, 0.0, 1.0, None, tol)
    return val, err


def contour_action(spec: PotentialSpec, E: float, pair: tuple[float, float] | None = None,
                   tol: float = QUAD_TOL) -> ActionValue:
    """A(E) = 2 i lam times the integral of sqrt(-q~) between the real turning points.

    Oriented so that Im A > 0 and A increases with E.
    """
    lo, hi = pair if pair is not None else real_well(spec).turning_points(E)
    lo, hi = float(np.real(lo)), float(np.real(hi))
    val, err = _real_sqrt_integral(spec, E, lo, hi, tol)
    lam = spec.lam
    return ActionValue(complex(0.0, 2.0 * lam * val), 2.0 * lam * err, (lo, hi))


def contour_action_loop(spec: PotentialSpec, E: float, pair: tuple[float, float] | None = None,
                        points: int = 512, height: float | None = None) -> ActionValue:
    """The same quantity from -lam times a closed loop integral of sqrt(q~).

    The loop is an ellipse around the turning-point pair traversed
    counter-clockwise, with sqrt(q~) > 0 just right of the pair.  The
    trapezoidal rule converges geometrically on it; node counts double until
    two successive values agree.
    """
    lo, hi = pair if pair is not None else real_well(spec).turning_points(E)
    lo, hi = float(np.real(lo)), float(np.real(hi))
    c = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    # stay clear of poles and of the domain ends
    d = spec.domain
    room = min(hi - lo, 1.0)
    if math.isfinite(d.b):
        room = min(room, 0.5 * (d.b - hi))
    if math.isfinite(d.a):
        room = min(room, 0.5 * (lo - d.a))
    a_ax = half + 0.5 * room
    b_ax = height if height is not None else 0.5 * room
    prev_val = None
    n = points
    while True:
        theta = 2.0 * math.pi * np.arange(n) / n
        x = c + a_ax * np.cos(theta) + 1j * b_ax * np.sin(theta)
        dx = -a_ax * np.sin(theta) + 1j * b_ax * np.cos(theta)
        if np.min(_distance_to_poles(spec, x)) < POLE_GUARD:
            raise PathThroughPole("loop passes a pole")
        q = spec.q(x, E)
        s0 = np.sqrt(complex(q[0]))
        if s0.real < 0:
            s0 = -s0
        s, _ = continue_sqrt(q, s0)
        val = -spec.lam * np.sum(s * dx) * (2.0 * math.pi / n)
        if prev_val is not None and abs(val - prev_val) <= 1e-13 * max(1.0, abs(val)):
            return ActionValue(complex(val), float(abs(val - prev_val)), (lo, hi, "loop"))
        if n > 2 ** 20:
            return ActionValue(complex(val), float(abs(val - prev_val)), (lo, hi, "loop"))
        prev_val = val
        n *= 2


# ----- first-order chi term -----


@lru_cache(maxsize=4)
def _cumulative_matrix(n: int) -> np.ndarray:
    """Maps values at Gauss-Legendre nodes to integrals from -1 to each node."""
    x, _ = gauss_legendre(n)
    vand = np.polynomial.legendre.legvander(x, n - 1)
    eye = np.eye(n)
    integ = np.stack([np.polynomial.legendre.legint(eye[j], lbnd=-1.0) for j in range(n)], axis=1)
    vand_int = np.polynomial.legendre.legvander(x, n) @ integ
    return vand_int @ np.linalg.inv(vand)


def omega(spec: PotentialSpec, E: float, y: np.ndarray, sqrt_q: np.ndarray) -> np.ndarray:
    """The chi-series kernel built from q~, q~', q~'' and the Langer term."""
    d = q_derivatives(spec, E, y, orders=2)
    q, q1, q2 = d[0], d[1], d[2]
    s = sqrt_q
    delta = spec.delta(y)
    return delta / s - 0.25 * q2 / (s * q) + (5.0 / 16.0) * q1 * q1 / (s * q * q)


@dataclass(frozen=True)
class ChiValue:
    value: complex
    abs_error_estimate: float
    tail_length: float


def _panels(verts: list[complex], spec: PotentialSpec, scale: float) -> list[tuple[complex, complex]]:
    out = []
    for a, b in zip(verts[:-1], verts[1:]):
        z = a
        while abs(b - z) > 0:
            dist = float(_distance_to_poles(spec, np.array([z]))[0])
            step = min(scale * max(0.05, 0.25 * abs(z)), 0.5 * dist if math.isfinite(dist) else np.inf,
                       abs(b - z))
            step = max(step, 1e-6)
            nxt = z + (b - z) / abs(b - z) * step if abs(b - z) > step else b
            out.append((z, nxt))
            z = nxt
    return out


def _chi_sum(spec, E, verts, sigma, scale, limit, check=True, n=20):
    """One evaluation of the chi term on a given panel resolution."""
    lam = spec.lam
    nodes, weights = gauss_legendre(n)
    cmat = _cumulative_matrix(n)
    panels = _panels(verts, spec, scale)
    # walk from the anchor outward so that W(anchor) = 0
    prev = None
    w_start = 0j
    ys, ss, ws, dys = [], [], [], []
    for a, b in panels:
        y = 0.5 * (a + b) + 0.5 * (b - a) * nodes
        s, _ = continue_sqrt(spec.q(y, E), prev)
        # fix the overall sign on the first panel: Re(sigma W) must fall outward
        if prev is None:
            if (sigma * s[0] * (b - a)).real > 0:
                s = -s
        prev = s[-1]
        cum = 0.5 * (b - a) * (cmat @ s)
        ys.append(y)
        ss.append(s)
        ws.append(w_start + cum)
        dys.append(0.5 * (b - a) * weights)
        w_start = w_start + 0.5 * (b - a) * np.dot(weights, s)
    y = np.concatenate(ys)
    s = np.concatenate(ss)
    w = np.concatenate(ws)
    dy = np.concatenate(dys)
    re_w = np.real(sigma * w)
    if check and np.any(np.diff(re_w) > 1e-9 * max(1.0, float(np.max(np.abs(re_w))))):
        bad = int(np.argmax(np.diff(re_w)))
        raise NonCanonicalPath(f"Re(sigma W) increases outward near {y[bad]}", at=complex(y[bad]))
    # W(x) - W(y) with x the anchor
    if limit:
        integrand = omega(spec, E, y, s)
    else:
        with np.errstate(over="ignore", under="ignore"):
            expo = np.exp(2.0 * sigma * lam * w)
        integrand = omega(spec, E, y, s) * (1.0 - expo)
    # nodes run from the anchor outward; the chi integral runs inward
    value = (sigma / (2.0 * lam)) * np.sum(integrand * dy)
    return value, integrand, y


def _tail_vertices(verts: list[complex], spec: PotentialSpec, E: float, tol: float) -> list[complex]:
    """Extend the outer end geometrically along its last direction."""
    far, before = verts[-1], verts[-2]
    direction = (far - before) / abs(far - before)
    out = list(verts)
    r = abs(far)
    z = far
    for _ in range(60):
        nxt = z + direction * max(r, 1.0)
        with np.errstate(all="ignore"):
            qv = spec.q(np.array([nxt]), E)[0]
        if not np.isfinite(qv) or abs(qv) > 1e200:
            break
        out.append(nxt)
        z = nxt
        r = abs(z)
        # kernel size times path length estimates the remaining contribution
        d = q_derivatives(spec, E, np.array([z]), orders=2)
        sq = np.sqrt(complex(d[0][0]))
        om = abs(complex(omega(spec, E, np.array([z]), np.array([sq]))[0]))
        if om * r < tol:
            break
    return out


def chi_first_order(spec: PotentialSpec, E: float, path: Sequence[complex], sigma: int,
                    tol: float = 1e-10, extend_tail: bool = True,
                    anchor_at_infinity: bool = False, check_canonical: bool = True) -> ChiValue:
    """First term of the chi series along ``path``.

    ``path`` runs from the infinity side (first vertex, at distance about
    R_CUT) to the finite anchor (last vertex).  When ``extend_tail`` is set
    the outer end is continued along its last direction until the kernel is
    negligible, which matters for algebraically decaying kernels.  With
    ``anchor_at_infinity`` the anchor end is extended the same way and the
    exponential factor, which vanishes in that limit, is dropped; the value
    then depends on the path only through its homotopy class, so the
    monotonicity check may be switched off with ``check_canonical``.
    Raises NonCanonicalPath if Re(sigma W) is not monotone along the path.
    """
    if sigma not in (1, -1):
        raise ValueError("sigma must be +1 or -1")
    verts = [complex(p) for p in path][::-1]  # anchor first
    if len(verts) < 2:
        return ChiValue(0j, 0.0, 0.0)
    for a, b in zip(verts[:-1], verts[1:]):
        _check_segment(spec, a, b)
    if extend_tail:
        verts = _tail_vertices(verts, spec, E, tol)
        if anchor_at_infinity:
            verts = _tail_vertices(verts[::-1], spec, E, tol)[::-1]
    v1, _, _ = _chi_sum(spec, E, verts, sigma, 0.5, anchor_at_infinity, check_canonical)
    v2, _, _ = _chi_sum(spec, E, verts, sigma, 0.25, anchor_at_infinity, check_canonical)
    length = float(sum(abs(b - a) for a, b in zip(verts[:-1], verts[1:])))
    return ChiValue(complex(v2), float(abs(v2 - v1)), length)


def _flow(spec: PotentialSpec, E: float, start: complex, sigma: int, sign: int, s0: complex,
          r_cut: float, step: float, max_steps: int) -> list[complex]:
    """Follow the gradient of Re(sigma W); ``sign`` = -1 descends, +1 ascends."""

    def field(y, s_prev):
        s = np.sqrt(complex(spec.q(np.array([y]), E)[0]))
        if abs(s - s_prev) > abs(s + s_prev):
            s = -s
        g = np.conj(sigma * s)
        return sign * g / abs(g), s

    y, s = complex(start), s0
    pts = [y]
    for _ in range(max_steps):
        h = step * max(1.0, 0.1 * abs(y))
        k1, s1 = field(y, s)
        k2, _ = field(y + 0.5 * h * k1, s1)
        k3, _ = field(y + 0.5 * h * k2, s1)
        k4, s4 = field(y + h * k3, s1)
        y = y + h * (k1 + 2 * k2 + 2 * k3 + k4) / 6.0
        s = s4
        pts.append(y)
        with np.errstate(all="ignore"):
            qv = complex(spec.q(np.array([y]), E)[0])
        if abs(y - start) >= r_cut or not np.isfinite(qv) or abs(qv) > 1e12:
            break
        if float(_distance_to_poles(spec, np.array([y]))[0]) < 1e-3:
            raise NonCanonicalPath(f"gradient flow runs into a pole near {y}")
    return pts


def canonical_path(spec: PotentialSpec, E: float, through: complex, sigma: int, r_cut: float = R_CUT,
                   step: float = 0.01, max_steps: int = 20000) -> list[complex]:
    """Gradient-flow line of Re(sigma W) through ``through``.

    Returned from the end where Re(sigma W) falls to minus infinity to the
    end where it grows, so Re(sigma W) increases monotonically along it.
    """
    s0 = np.sqrt(complex(spec.q(np.array([through]), E)[0]))
    if abs(s0) < 1e-8:
        raise NonCanonicalPath("flow started on a turning point")
    down = _flow(spec, E, through, sigma, -1, s0, r_cut, step, max_steps)
    up = _flow(spec, E, through, sigma, +1, s0, r_cut, step, max_steps)
    return down[::-1] + up[1:]


def arc(center: complex, radius: float, start_angle: float, end_angle: float, points: int = 24) -> list[complex]:
    """Vertices of a circular arc, endpoints included."""
    t = np.linspace(start_angle, end_angle, points)
    return list(center + radius * np.exp(1j * t))


def crossing_path(left: complex, right: complex, r_far: float = R_CUT, radius: float = 0.3,
                  shift: complex = 0j) -> list[complex]:
    """Path from far right to far left on a horizontal line through a turning-point pair.

    Passes above ``right`` and below ``left`` on small semicircles, which is
    the homotopy class linking the sectors on either side of the well.
    """
    left, right = complex(left) + shift, complex(right) + shift
    y = right.imag
    pts = [complex(r_far, y), right + radius]
    pts += arc(right, radius, 0.0, math.pi)[1:]
    pts += [left + radius]
    pts += arc(left, radius, 0.0, -math.pi)[1:]
    pts += [complex(-r_far, y)]
    return pts
