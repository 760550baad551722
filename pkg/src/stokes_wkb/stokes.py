"""Stokes lines Re W = 0, the Stokes graph and its sectors.

W(x) is the integral of sqrt(q~) from the critical point a line starts
at.  Lines are traced with unit speed in x along the direction where W is
purely imaginary and increasing,

    dx/ds = i conj(s) / |s|,    s = sqrt(q~(x)),

with the sign of ``s`` continued from the previous direction.  A
Dormand-Prince 5(4) step advances the point and a Newton projection puts
every accepted vertex back on Re W = 0, so vertices carry exact W values up
to quadrature error.
"""

from __future__ import annotations

import hashlib
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.integrate import RK45
from shapely.affinity import translate
from shapely.geometry import LineString, Point, box
from shapely.ops import polygonize, unary_union

from ._quad import gauss_legendre
from .errors import SectorAmbiguous, TraceStalled
from .potentials import (CriticalPoint, Kind, PotentialSpec, _strip_index, classify_singularities,
                         find_turning_points, q_derivatives)

CAPTURE_RADIUS = 1e-4
LINE_TOL = 1e-6
MAX_ARC_LENGTH = 50.0
START_OFFSET = 1e-3
STEP_TOL = 1e-9
MIN_STEP = 1e-12
MAX_STEP = 0.1
CHORD_NODES = 8

_DP_A, _DP_B, _DP_C, _DP_E = RK45.A, RK45.B, RK45.C, RK45.E


class Terminal(str, Enum):
    CRITICAL_POINT = "CRITICAL_POINT"
    STRIP_BOUNDARY = "STRIP_BOUNDARY"
    MAX_LENGTH = "MAX_LENGTH"


@dataclass
class Polyline:
    points: list
    terminal: Terminal
    terminal_node: int | None = None
    start_node: int | None = None
    direction_index: int = 0
    w_values: list = field(default_factory=list)

    @property
    def arc_length(self) -> float:
        p = np.asarray(self.points, dtype=complex)
        return float(np.sum(np.abs(np.diff(p)))) if p.size > 1 else 0.0

    def to_json(self) -> dict:
        return {
            "start_node": self.start_node,
            "direction_index": self.direction_index,
            "terminal": self.terminal.value,
            "terminal_node": self.terminal_node,
            "points": [[z.real, z.imag] for z in self.points],
        }


@dataclass(frozen=True)
class Frame:
    """Rectangle the graph lives in: one period strip, cut off at a finite width.

    ``periodic`` names the coordinate ("im" or "re") along which the strip
    repeats; traces cross those sides freely and stop only at the others.
    """

    re_min: float
    re_max: float
    im_min: float
    im_max: float
    periodic: str | None = None
    scale: float = 1.0  # length unit: the order-1 frame has scale 1

    def contains(self, x: complex) -> bool:
        ok_re = self.periodic == "re" or self.re_min <= x.real <= self.re_max
        ok_im = self.periodic == "im" or self.im_min <= x.imag <= self.im_max
        return ok_re and ok_im

    def exit_point(self, a: complex, b: complex) -> complex:
        """Where the segment a -> b (a inside, b outside) leaves through a stopping side."""
        t = 1.0
        d = b - a
        sides = []
        if self.periodic != "re":
            sides.append((self.re_min, self.re_max, a.real, d.real))
        if self.periodic != "im":
            sides.append((self.im_min, self.im_max, a.imag, d.imag))
        for lo, hi, pa, pd in sides:
            if pd > 0 and pa + pd > hi:
                t = min(t, (hi - pa) / pd)
            elif pd < 0 and pa + pd < lo:
                t = min(t, (lo - pa) / pd)
        return a + max(t, 0.0) * d

    @property
    def period(self) -> float:
        return (self.im_max - self.im_min) if self.periodic == "im" else (self.re_max - self.re_min)

    def to_json(self) -> dict:
        return {"re_min": self.re_min, "re_max": self.re_max, "im_min": self.im_min, "im_max": self.im_max,
                "periodic": self.periodic, "scale": self.scale}


# ----- local geometry -----


def _sqrt_q(spec: PotentialSpec, E: float, x):
    return np.sqrt(spec.q(np.asarray(x, dtype=complex), E).astype(complex))


def emanation_directions(spec: PotentialSpec, E: float, start: CriticalPoint) -> list[float]:
    """Angles at which Stokes lines leave a simple turning point or simple pole."""
    if start.kind == Kind.TURNING_POINT:
        dq = complex(q_derivatives(spec, E, np.array([start.location]), orders=1)[1][0])
        base = (math.pi - np.angle(dq)) / 3.0
        return [float(base + 2.0 * math.pi * k / 3.0) for k in range(3)]
    if start.kind == Kind.SIMPLE_POLE:
        residue = _pole_residue(spec, E, start.location)
        return [float(math.pi - np.angle(residue))]
    raise ValueError(f"no Stokes lines emanate from a {start.kind.value}")


def _pole_residue(spec: PotentialSpec, E: float, p: complex, r: float = 1e-3, n: int = 32) -> complex:
    z = p + r * np.exp(2j * math.pi * np.arange(n) / n)
    return complex(np.mean(spec.q(z, E) * (z - p)))


def _direction(s: complex, ref: complex) -> complex:
    v = 1j * np.conj(s) / abs(s)
    return v if (v * np.conj(ref)).real >= 0 else -v


def _chord_w(spec: PotentialSpec, E: float, a: complex, b: complex, s_ref: complex) -> tuple[complex, complex]:
    """Integral of sqrt(q~) along the chord a -> b, branch continued from ``s_ref``."""
    x, w = gauss_legendre(CHORD_NODES)
    t = 0.5 * (x + 1.0)
    pts = a + (b - a) * t
    s = _sqrt_q(spec, E, pts)
    out = np.empty_like(s)
    last = s_ref
    for i, v in enumerate(s):
        if abs(v - last) > abs(v + last):
            v = -v
        out[i] = last = v
    sb = complex(_sqrt_q(spec, E, b))
    if abs(sb - last) > abs(sb + last):
        sb = -sb
    return complex(0.5 * (b - a) * np.dot(w, out)), sb


def _start_w(spec: PotentialSpec, E: float, c: complex, b: complex, sign_dir: complex) -> tuple[complex, complex]:
    """W from the critical point ``c`` to ``b`` with x = c + (b - c) t^2.

    The substitution removes the square-root endpoint behaviour of both a
    simple zero and a simple pole.  The branch is the one whose Stokes
    direction at ``b`` points along ``sign_dir``.
    """
    sb = complex(_sqrt_q(spec, E, b))
    if (_direction(sb, sign_dir) / (1j * np.conj(sb) / abs(sb))).real < 0:
        sb = -sb
    x, w = gauss_legendre(2 * CHORD_NODES)
    t = 0.5 * (x + 1.0)
    pts = c + (b - c) * t * t
    s = _sqrt_q(spec, E, pts)
    # continue backwards from b toward c
    out = np.empty_like(s)
    last = sb
    for i in range(s.size - 1, -1, -1):
        v = s[i]
        if abs(v - last) > abs(v + last):
            v = -v
        out[i] = last = v
    val = 0.5 * np.dot(w, out * 2.0 * (b - c) * t)
    return complex(val), sb


def _project(spec, E, a, b, w_a, s_a):
    """Move ``b`` across the line until Re W(b) = 0; returns (b, W(b), s(b))."""
    for _ in range(4):
        dw, s_b = _chord_w(spec, E, a, b, s_a)
        w_b = w_a + dw
        if abs(w_b.real) <= 1e-3 * LINE_TOL * max(abs(b - a), 1e-12) or abs(s_b) == 0:
            break
        b = b - w_b.real * np.conj(s_b) / abs(s_b) ** 2
    return b, w_b, s_b


def _land_on_edge(spec, E, frame: Frame, a, edge, w_a, s_a):
    """Slide the exit point along the frame side it hit until Re W = 0."""
    on_vertical = min(abs(edge.real - frame.re_min), abs(edge.real - frame.re_max)) <= \
        min(abs(edge.imag - frame.im_min), abs(edge.imag - frame.im_max))
    tangent = 1j if on_vertical else 1.0
    for _ in range(8):
        dw, s_e = _chord_w(spec, E, a, edge, s_a)
        w_e = w_a + dw
        slope = (s_e * tangent).real
        if abs(w_e.real) <= 1e-3 * LINE_TOL * abs(edge - a) or slope == 0:
            break
        edge = edge - tangent * (w_e.real / slope)
    return edge, w_e


def _dp_step(spec, E, x, h, ref):
    k = np.empty(7, dtype=complex)
    k[0] = _direction(complex(_sqrt_q(spec, E, x)), ref)
    for i in range(1, 6):
        xi = x + h * np.dot(_DP_A[i, :i], k[:i])
        k[i] = _direction(complex(_sqrt_q(spec, E, xi)), ref)
    x_new = x + h * np.dot(_DP_B, k[:6])
    k[6] = _direction(complex(_sqrt_q(spec, E, x_new)), ref)
    err = abs(h * np.dot(_DP_E, k))
    return x_new, err, k[6]


# ----- tracing -----


@dataclass(frozen=True)
class _Targets:
    points: np.ndarray  # locations, including period copies
    ids: np.ndarray  # node id of each location (copies share the id)
    spirals: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))  # rows that are higher poles


def trace_stokes_line(spec: PotentialSpec, E: float, start: CriticalPoint, direction_index: int,
                      frame: Frame | None = None, targets: _Targets | None = None,
                      start_id: int | None = None) -> Polyline:
    """Follow the Stokes line leaving ``start`` in emanation direction ``direction_index``.

    The trace stops within ``CAPTURE_RADIUS`` of a critical point in
    ``targets``, on leaving ``frame`` or after ``MAX_ARC_LENGTH`` frame units.
    """
    dirs = emanation_directions(spec, E, start)
    if not 0 <= direction_index < len(dirs):
        raise ValueError(f"direction_index must be below {len(dirs)}")
    if frame is None or targets is None:
        nodes, frame0, targets0 = _critical_points(spec, E)
        frame = frame or frame0
        targets = targets or targets0
    max_arc, max_step = MAX_ARC_LENGTH * frame.scale, MAX_STEP * frame.scale
    c = complex(start.location)
    if targets.points.size:
        others = np.abs(targets.points - c)
        others = others[others > 1e-9]
        near = float(np.min(others)) if others.size else 1.0
    else:
        near = 1.0
    rho = min(START_OFFSET, 0.01 * near)
    u = complex(np.exp(1j * dirs[direction_index]))
    x = c + rho * u
    w, s = _start_w(spec, E, c, x, u)
    for _ in range(6):
        if abs(w.real) <= 1e-3 * LINE_TOL * rho:
            break
        x = x - w.real * np.conj(s) / abs(s) ** 2
        w, s = _start_w(spec, E, c, x, u)
    pts, ws = [c, x], [0j, w]
    arc = abs(x - c)
    ref = _direction(s, u)
    h = rho
    stalls = 0
    while True:
        dist = np.abs(targets.points - x) if targets.points.size else np.array([np.inf])
        away = np.abs(targets.points - c) > 1e-9 if targets.points.size else np.array([True])
        hit = np.where((dist < CAPTURE_RADIUS) & (away | (arc > 10 * rho)))[0]
        if hit.size:
            j = int(hit[np.argmin(dist[hit])])
            pts.append(complex(targets.points[j]))
            ws.append(ws[-1])
            return Polyline(pts, Terminal.CRITICAL_POINT, int(targets.ids[j]), start_id, direction_index, ws)
        if arc >= max_arc:
            j = _spiral_target(pts, targets)
            if j is not None:
                pts.append(complex(targets.points[j]))
                ws.append(ws[-1])
                return Polyline(pts, Terminal.CRITICAL_POINT, int(targets.ids[j]), start_id, direction_index, ws)
            return Polyline(pts, Terminal.MAX_LENGTH, None, start_id, direction_index, ws)
        cand = dist[away] if np.any(away) else dist
        h_cap = min(max_step, 0.5 * float(np.min(cand)) if cand.size else max_step, max_arc - arc + 1e-12)
        h = min(h, h_cap)
        if h < MIN_STEP:
            raise TraceStalled("step size underflow", x=x, arc=arc)
        x_new, err, _ = _dp_step(spec, E, x, h, ref)
        if err > STEP_TOL and h > MIN_STEP:
            h *= max(0.2, 0.9 * (STEP_TOL / err) ** 0.2)
            stalls += 1
            if stalls > 200:
                raise TraceStalled("step rejected repeatedly", x=x, arc=arc)
            continue
        stalls = 0
        x_new, w_new, s_new = _project(spec, E, x, x_new, ws[-1], s)
        if not frame.contains(x_new):
            edge, w_edge = _land_on_edge(spec, E, frame, x, frame.exit_point(x, x_new), ws[-1], s)
            pts.append(edge)
            ws.append(w_edge)
            return Polyline(pts, Terminal.STRIP_BOUNDARY, None, start_id, direction_index, ws)
        arc += abs(x_new - x)
        pts.append(x_new)
        ws.append(w_new)
        ref = _direction(s_new, ref)
        x, s = x_new, s_new
        h *= min(5.0, max(0.2, 0.9 * (STEP_TOL / max(err, 1e-300)) ** 0.2))


def _spiral_target(pts: list, targets: _Targets) -> int | None:
    """Index of a double or higher pole the trace is winding into, if any."""
    if not targets.spirals.size:
        return None
    tail = np.asarray(pts[len(pts) // 2:], dtype=complex)
    end = tail[-1]
    j = int(targets.spirals[np.argmin(np.abs(targets.points[targets.spirals] - end))])
    rel = tail - targets.points[j]
    turns = abs(float(np.sum(np.angle(rel[1:] / rel[:-1])))) / (2.0 * math.pi)
    if turns < 2.0:
        return None
    # inward: the last full turn stays closer than the first one
    return j if np.max(np.abs(rel[-len(rel) // int(turns):])) < np.min(np.abs(rel[:len(rel) // int(turns)])) \
        else None


def line_residual(spec: PotentialSpec, E: float, line: Polyline) -> float:
    """Largest |Re W| / (line_tol * arc) over the vertices, by fresh chord quadrature.

    Values at most 1 mean the polyline meets its Re W = 0 bound.
    """
    pts = [complex(p) for p in line.points]
    if len(pts) < 3:
        return 0.0
    c, x1 = pts[0], pts[1]
    u = (x1 - c) / abs(x1 - c)
    w, s = _start_w(spec, E, c, x1, u)
    arc = abs(x1 - c)
    worst = abs(w.real) / (LINE_TOL * arc)
    last = len(pts) - 1 if line.terminal != Terminal.CRITICAL_POINT else len(pts) - 2
    for a, b in zip(pts[1:last], pts[2:last + 1]):
        dw, s = _chord_w(spec, E, a, b, s)
        w += dw
        arc += abs(b - a)
        worst = max(worst, abs(w.real) / (LINE_TOL * arc))
    return worst


# ----- the graph -----


@dataclass
class StokesGraph:
    nodes: list
    edges: list
    sectors: list
    frame: Frame
    anchors: list
    energy: float
    family: str
    params_hash: str
    strips: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "family": self.family,
            "params_hash": self.params_hash,
            "energy": self.energy,
            "frame": self.frame.to_json(),
            "nodes": [dict(n.to_json(), id=i) for i, n in enumerate(self.nodes)],
            "edges": [dict(e.to_json(), id=i) for i, e in enumerate(self.edges)],
            "anchors": [a.to_json() for a in self.anchors],
            "sectors": [dict(s) for s in self.sectors],
            "strips": [dict(s) for s in self.strips],
            "fingerprint": fingerprint(self),
        }


@dataclass(frozen=True)
class Anchor:
    """Representative point of an infinity point of the action inside the frame."""

    label: str
    location: complex

    def to_json(self) -> dict:
        return {"label": self.label, "location": [self.location.real, self.location.imag]}


def _period_shifts(spec: PotentialSpec, copies: int) -> list[complex]:
    per = spec.period
    if per is None:
        return [0j]
    return [k * per for k in range(-copies, copies + 1)]


def _leading_term(spec: PotentialSpec, E: float, probe, step: complex, samples: np.ndarray):
    """Exponent and coefficient of q~ ~ a * exp(k * t) along ``probe + step * t``."""
    with np.errstate(all="ignore"):
        q0 = spec.q(probe + samples, E)
        q1 = spec.q(probe + step + samples, E)
    k = int(round(float(np.median(np.log(np.abs(q1)) - np.log(np.abs(q0))) / abs(step))))
    return k, q0


def _anchors(spec: PotentialSpec, E: float, frame: Frame, poles: list) -> list[Anchor]:
    fd = spec.fdef
    out = []
    for c in poles:
        if c.kind in (Kind.DOUBLE_POLE, Kind.HIGHER_POLE):
            out.append(Anchor(f"pole@{c.location.real:.6g}{c.location.imag:+.6g}j", c.location))
    if fd.uvar == "x":
        r = 1e3
        with np.errstate(all="ignore"):
            n = int(round(math.log(abs(spec.q(np.array([2 * r + 0j]), E)[0]) /
                                   abs(spec.q(np.array([r + 0j]), E)[0])) / math.log(2.0)))
            a = complex(spec.q(np.array([r + 0j]), E)[0]) / r ** n
        half = 0.9 * min(frame.re_max, frame.im_max)
        grow = 0.5 * n + 1.0
        for k in range(n + 2):
            theta = (k * math.pi - 0.5 * np.angle(a)) / grow
            out.append(Anchor(f"inf{k}", half * complex(np.exp(1j * theta))))
        return out
    span = frame.period
    t = np.linspace(0.0, span, 16, endpoint=False)
    if fd.uvar == "exp":
        for side, re, label in ((1.0, frame.re_max, "right"), (-1.0, frame.re_min, "left")):
            probe = complex(side * 25.0, frame.im_min)
            grow, q0 = _leading_term(spec, E, probe, complex(side), 1j * t)
            k = int(side * grow)
            a = complex(np.mean(q0 * np.exp(-k * (probe + 1j * t))))
            x_re = re - side * 0.5
            out.extend(_periodic_anchors(k, np.angle(a), frame.im_min, span, lambda y: complex(x_re, y),
                                         f"{label}", shift=0.0))
        return out
    for side, im, label in ((1.0, frame.im_max, "top"), (-1.0, frame.im_min, "bottom")):
        probe = complex(frame.re_min, side * 25.0)
        k, q0 = _leading_term(spec, E, probe, complex(0.0, side), t)
        # along Im x -> side * inf the growth is exp(-i k_exp x) with k = side * k_exp
        kx = -side * k
        a = complex(np.mean(q0 * np.exp(-1j * kx * (probe + t))))
        y = im - side * 0.5
        out.extend(_periodic_anchors(kx, np.angle(a), frame.re_min, span, lambda xr: complex(xr, y),
                                     label, shift=math.pi))
    return out


def _periodic_anchors(k: int, arg_a: float, lo: float, span: float, place, label: str, shift: float):
    """Points where Re W of a * exp(k x) has its extremes, one per sector."""
    if k == 0:
        return [Anchor(label, place(lo + 0.5 * span))]
    out = []
    m_count = abs(k)
    for m in range(m_count):
        pos = (2.0 * math.pi * m + shift - arg_a) / k
        pos = lo + (pos - lo) % span
        out.append(Anchor(f"{label}{m}", place(pos)))
    return out


def default_frame(spec: PotentialSpec, finite: list[complex]) -> Frame:
    fd = spec.fdef
    if fd.uvar == "exp":
        re = [z.real for z in finite] or [0.0]
        return Frame(min(re) - 4.0, max(re) + 4.0, -math.pi, math.pi, "im")
    if fd.uvar == "expi":
        im = [abs(z.imag) for z in finite] or [0.0]
        top = max(3.0, max(im) + 2.0)
        return Frame(-math.pi, math.pi, -top, top, "re")
    reach = max([abs(z) for z in finite] or [1.0])
    half = max(3.0, 1.25 * reach + 1.0)
    return Frame(-half, half, -half, half, None, half / 3.0)


def _shift_frame(frame: Frame, offset: float) -> Frame:
    if frame.periodic == "im":
        return Frame(frame.re_min, frame.re_max, frame.im_min + offset, frame.im_max + offset, "im", frame.scale)
    if frame.periodic == "re":
        return Frame(frame.re_min + offset, frame.re_max + offset, frame.im_min, frame.im_max, "re", frame.scale)
    return frame


def _clear_frame(spec: PotentialSpec, E: float, frame: Frame, finite: list[complex], poles: list) -> Frame:
    """Offset the periodic strip so no critical point or anchor sits on a glued side."""
    if frame.periodic is None:
        return frame
    for j in (0, 1, -1, 2, -2, 3, -3, 4, -4, 5, -5, 6, -6, 7, -7, 8):
        cand = _shift_frame(frame, j * math.pi / 16.0)
        pts = list(finite) + [a.location for a in _anchors(spec, E, cand, poles)]
        if frame.periodic == "im":
            lo, vals = cand.im_min, [z.imag for z in pts]
        else:
            lo, vals = cand.re_min, [z.real for z in pts]
        gaps = [min((v - lo) % cand.period, (lo - v) % cand.period) for v in vals]
        if not gaps or min(gaps) > 0.15:
            return cand
    return frame


def _critical_points(spec: PotentialSpec, E: float):
    fd = spec.fdef
    tps = find_turning_points(spec, E)
    sings = [c for c in classify_singularities(spec) if c.kind != Kind.INFINITY_POINT]
    finite = [c.location for c in tps] + [c.location for c in sings]
    frame = _clear_frame(spec, E, default_frame(spec, finite), finite, sings)
    nodes = []
    for c in sorted(tps, key=lambda z: (round(_fold(spec, z.location, frame).real, 9),
                                        round(_fold(spec, z.location, frame).imag, 9))):
        z = _fold(spec, c.location, frame)
        nodes.append(CriticalPoint(z, c.kind, c.order, _strip_index(fd, z), c.real, c.label))
    for c in sings:
        z = _fold(spec, c.location, frame)
        nodes.append(CriticalPoint(z, c.kind, c.order, c.strip_index, c.real, c.label))
    infinity = [c for c in classify_singularities(spec) if c.kind == Kind.INFINITY_POINT]
    pts, ids, spirals = [], [], []
    for i, c in enumerate(nodes):
        for sh in _period_shifts(spec, 3):
            if c.kind in (Kind.DOUBLE_POLE, Kind.HIGHER_POLE):
                spirals.append(len(pts))
            pts.append(c.location + sh)
            ids.append(i)
    return nodes + infinity, frame, _Targets(np.array(pts, dtype=complex), np.array(ids, dtype=int),
                                             np.array(spirals, dtype=int))


def _fold(spec: PotentialSpec, z: complex, frame: Frame) -> complex:
    per = spec.period
    if per is None:
        return z
    if per.imag:
        k = math.floor((z.imag - frame.im_min) / per.imag)
        return z - k * per
    k = math.floor((z.real - frame.re_min) / per.real)
    return z - k * per


def fold_polyline(points, frame: Frame) -> list[list[complex]]:
    """Cut a trace at the glued sides and shift every piece into the frame."""
    pts = [complex(p) for p in points]
    if frame.periodic is None or not pts:
        return [pts]
    span = frame.period
    lo = frame.im_min if frame.periodic == "im" else frame.re_min

    def coord(z):
        return z.imag if frame.periodic == "im" else z.real

    def shifted(z, k):
        return z - k * span * (1j if frame.periodic == "im" else 1.0)

    def at_level(z, level):
        return complex(z.real, level) if frame.periodic == "im" else complex(level, z.imag)

    def index(z):
        return math.floor((coord(z) - lo) / span)

    pieces = []
    k = index(pts[0])
    cur = [shifted(pts[0], k)]
    for a, b in zip(pts[:-1], pts[1:]):
        kb = index(b)
        while kb != k:
            step = 1 if kb > k else -1
            level = lo + span * (k + (1 if step > 0 else 0))
            t = (level - coord(a)) / (coord(b) - coord(a))
            c = at_level(a + t * (b - a), level)
            cur.append(shifted(c, k))
            pieces.append(cur)
            k += step
            cur = [shifted(c, k)]
        cur.append(shifted(b, k))
    pieces.append(cur)
    return [p for p in pieces if len(p) > 1]


def _threads() -> int:
    import os
    try:
        return max(1, int(os.environ.get("STOKES_WKB_THREADS", "1")))
    except ValueError:
        return 1


def build_stokes_graph(spec: PotentialSpec, E: float, sectors: bool = True) -> StokesGraph:
    """Trace every line from every turning point and simple pole of the basic strip.

    Edges are ordered by start node id, then direction index.  With
    ``sectors`` the faces of the traced arrangement are glued across the
    periodic sides and each must hold exactly one anchor.
    """
    nodes, frame, targets = _critical_points(spec, E)
    jobs = [(i, d) for i, n in enumerate(nodes) if n.kind in (Kind.TURNING_POINT, Kind.SIMPLE_POLE)
            for d in range(len(emanation_directions(spec, E, n)))]

    def run(job):
        i, d = job
        return trace_stokes_line(spec, E, nodes[i], d, frame, targets, i)

    workers = min(_threads(), max(1, len(jobs)))
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            edges = list(pool.map(run, jobs))
    else:
        edges = [run(j) for j in jobs]
    poles = [n for n in nodes if n.kind in (Kind.DOUBLE_POLE, Kind.HIGHER_POLE, Kind.SIMPLE_POLE)]
    anchors = _anchors(spec, E, frame, poles)
    graph = StokesGraph(nodes, edges, [], frame, anchors, float(E), spec.family, spec.params_hash())
    if sectors:
        graph.sectors, graph.strips = detect_sectors(graph)
    return graph


def _pieces(graph: StokesGraph, edge: Polyline) -> list[LineString]:
    """Folded pieces of an edge with ends snapped onto node locations."""
    locs = [n.location for n in graph.nodes if n.kind != Kind.INFINITY_POINT]
    out = []
    for piece in fold_polyline(edge.points, graph.frame):
        for k in (0, -1):
            for z in locs:
                if abs(piece[k] - z) < 1e-9:
                    piece[k] = z
        out.append(LineString([(z.real, z.imag) for z in piece]))
    return out


def _distinct_edges(graph: StokesGraph) -> list[int]:
    """Edge ids with one representative for every line traced from both ends."""
    keep = []
    shapes = {}
    for i, e in enumerate(graph.edges):
        shapes[i] = unary_union(_pieces(graph, e))
    for i, e in enumerate(graph.edges):
        dup = False
        if e.terminal == Terminal.CRITICAL_POINT:
            for j in keep:
                f = graph.edges[j]
                if f.terminal == Terminal.CRITICAL_POINT and f.start_node == e.terminal_node and \
                        f.terminal_node == e.start_node and shapes[i].hausdorff_distance(shapes[j]) < 1e-3:
                    dup = True
                    break
        if not dup:
            keep.append(i)
    return keep


def detect_sectors(graph: StokesGraph) -> tuple[list[dict], list[dict]]:
    """Sectors (faces with one anchor) and anchor-free strips or rings."""
    frame = graph.frame
    rect = box(frame.re_min, frame.im_min, frame.re_max, frame.im_max)
    lines, owners = [rect.exterior], []
    for i in _distinct_edges(graph):
        for piece in _pieces(graph, graph.edges[i]):
            lines.append(piece)
            owners.append((i, piece))
    faces = [f for f in polygonize(unary_union(lines)) if f.area > 1e-10]
    faces.sort(key=lambda f: (round(f.representative_point().x, 6), round(f.representative_point().y, 6)))
    parent = list(range(len(faces)))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    if frame.periodic is not None:
        # glue faces that meet across the periodic sides
        if frame.periodic == "im":
            low = LineString([(frame.re_min, frame.im_min), (frame.re_max, frame.im_min)])
            shift = (0.0, frame.period)
        else:
            low = LineString([(frame.re_min, frame.im_min), (frame.re_min, frame.im_max)])
            shift = (frame.period, 0.0)
        high = LineString([(x + shift[0], y + shift[1]) for x, y in low.coords])
        touch_low = [f.boundary.intersection(low.buffer(1e-9)) for f in faces]
        touch_high = [f.boundary.intersection(high.buffer(1e-9)) for f in faces]
        for a, la in enumerate(touch_low):
            if la.length <= 1e-6:
                continue
            probe = translate(la, *shift).buffer(1e-9)
            for b, hb in enumerate(touch_high):
                if hb.length > 1e-6 and probe.intersection(hb).length > 1e-6:
                    ra, rb = find(a), find(b)
                    if ra != rb:
                        parent[max(ra, rb)] = min(ra, rb)
    groups: dict[int, list[int]] = {}
    for i in range(len(faces)):
        groups.setdefault(find(i), []).append(i)
    sectors, strips = [], []
    for root in sorted(groups):
        members = groups[root]
        inside = [a for a in graph.anchors if any(faces[m].contains(Point(a.location.real, a.location.imag))
                                                  for m in members)]
        bounding = sorted({i for i, geom in owners
                           if any(geom.intersection(faces[m].boundary.buffer(1e-9)).length > 1e-6
                                  for m in members)})
        if len(inside) == 1:
            sectors.append({"anchor": inside[0].label, "edges": bounding})
            continue
        if inside:
            raise SectorAmbiguous(f"face group holds {len(inside)} infinity points",
                                  anchors=[a.label for a in inside])
        # anchor-free faces are bands between infinity points when they reach
        # a cut side, and rings around a slit when they are closed
        ends = sorted({side for m in members for side in _cut_sides(faces[m], frame)})
        strips.append({"kind": "strip" if ends else "ring", "ends": ends, "edges": bounding})
    sectors.sort(key=lambda s: s["anchor"])
    strips.sort(key=lambda s: (s["kind"], s["ends"], s["edges"]))
    return sectors, strips


def _cut_sides(face, frame: Frame) -> list[str]:
    """Stopping sides of the frame that a face reaches."""
    sides = []
    if frame.periodic != "re":
        sides += [("re_min", LineString([(frame.re_min, frame.im_min), (frame.re_min, frame.im_max)])),
                  ("re_max", LineString([(frame.re_max, frame.im_min), (frame.re_max, frame.im_max)]))]
    if frame.periodic != "im":
        sides += [("im_min", LineString([(frame.re_min, frame.im_min), (frame.re_max, frame.im_min)])),
                  ("im_max", LineString([(frame.re_min, frame.im_max), (frame.re_max, frame.im_max)]))]
    return [name for name, seg in sides if face.boundary.intersection(seg.buffer(1e-9)).length > 1e-6]


def fingerprint(graph: StokesGraph) -> str:
    """Hash of the graph topology: node kinds, edge endpoints and sector boundaries."""
    doc = {
        "nodes": [n.kind.value for n in graph.nodes],
        "edges": sorted([e.start_node, e.direction_index, e.terminal.value,
                         -1 if e.terminal_node is None else e.terminal_node] for e in graph.edges),
        "sectors": sorted([s["anchor"], sorted(s["edges"])] for s in graph.sectors),
        "strips": sorted([s["kind"], s["ends"], sorted(s["edges"])] for s in graph.strips),
    }
    blob = json.dumps(doc, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


# ----- rendering -----

DEFAULT_STYLE = {
    "width": 640,
    "copies": 0,
    "line_color": "#1f4e9c",
    "node_color": "#000000",
    "pole_color": "#b22222",
    "cut_color": "#7a7a7a",
    "anchor_color": "#2e7d32",
    "font_size": 11,
}


def empty_graph(frame: Frame | None = None) -> StokesGraph:
    return StokesGraph([], [], [], frame or Frame(-3.0, 3.0, -3.0, 3.0), [], 0.0, "", "")


def _num(v: float) -> str:
    text = f"{v:.6f}".rstrip("0").rstrip(".")
    return "0" if text in ("-0", "") else text


def emit_svg(graph: StokesGraph, style: dict | None = None) -> str:
    """Deterministic SVG 1.1 rendering of a Stokes graph.

    Finite nodes become markers keyed by kind, every edge one path made of
    its folded pieces, anchors carry their sector labels and dashed cut
    markers join the real turning-point pair and hang off each pole.
    ``style["copies"]`` repeats the strip that many periods either way.
    """
    st = dict(DEFAULT_STYLE)
    st.update(style or {})
    f = graph.frame
    copies = int(st["copies"]) if f.periodic else 0
    span = f.period if f.periodic else 0.0
    shift = (1j if f.periodic == "im" else 1.0) * span
    re0, re1, im0, im1 = f.re_min, f.re_max, f.im_min, f.im_max
    if f.periodic == "im":
        im0, im1 = im0 - copies * span, im1 + copies * span
    elif f.periodic == "re":
        re0, re1 = re0 - copies * span, re1 + copies * span
    width = float(st["width"])
    k = width / (re1 - re0)
    height = k * (im1 - im0)
    unit = (re1 - re0) / 100.0

    def px(z: complex) -> str:
        return f"{_num((z.real - re0) * k)} {_num((im1 - z.imag) * k)}"

    out = ['<?xml version="1.0" encoding="UTF-8"?>',
           f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{_num(width)}" '
           f'height="{_num(height)}" viewBox="0 0 {_num(width)} {_num(height)}">',
           f'<rect class="frame" x="0" y="0" width="{_num(width)}" height="{_num(height)}" '
           'fill="none" stroke="#000000" stroke-width="1"/>']
    axes = []
    if re0 <= 0.0 <= re1:
        axes.append(f'M {px(complex(0.0, im0))} L {px(complex(0.0, im1))}')
    if im0 <= 0.0 <= im1:
        axes.append(f'M {px(complex(re0, 0.0))} L {px(complex(re1, 0.0))}')
    out.append(f'<path class="axes" d="{" ".join(axes)}" fill="none" stroke="#bbbbbb" stroke-width="0.5"/>')
    shifts = [j * shift for j in range(-copies, copies + 1)]
    for i, e in enumerate(graph.edges):
        pieces = fold_polyline(e.points, f)
        d = []
        for sh in shifts:
            for piece in pieces:
                d.append("M " + " L ".join(px(z + sh) for z in piece))
        out.append(f'<path class="stokes-line" id="edge{i}" d="{" ".join(d)}" fill="none" '
                   f'stroke="{st["line_color"]}" stroke-width="1.2"/>')
    real_tps = [n.location for n in graph.nodes if n.kind == Kind.TURNING_POINT and n.real]
    cuts = []
    if len(real_tps) == 2:
        for sh in shifts:
            cuts.append(f'M {px(real_tps[0] + sh)} L {px(real_tps[1] + sh)}')
    for n in graph.nodes:
        if n.kind in (Kind.SIMPLE_POLE, Kind.DOUBLE_POLE, Kind.HIGHER_POLE):
            for sh in shifts:
                cuts.append(f'M {px(n.location + sh)} L {px(n.location + sh - 4.0 * unit)}')
    if cuts:
        out.append(f'<path class="cut" d="{" ".join(cuts)}" fill="none" stroke="{st["cut_color"]}" '
                   'stroke-width="1" stroke-dasharray="4 3"/>')
    r = 4.0
    for i, n in enumerate(graph.nodes):
        if n.kind == Kind.INFINITY_POINT:
            continue
        for sh in shifts:
            x, y = px(n.location + sh).split()
            if n.kind == Kind.TURNING_POINT:
                out.append(f'<circle class="node turning-point" data-node="{i}" cx="{x}" cy="{y}" r="{_num(r)}" '
                           f'fill="{st["node_color"]}"/>')
            elif n.kind == Kind.SIMPLE_POLE:
                xf, yf = float(x), float(y)
                out.append(f'<path class="node simple-pole" data-node="{i}" d="M {_num(xf - r)} {_num(yf - r)} '
                           f'L {_num(xf + r)} {_num(yf + r)} M {_num(xf - r)} {_num(yf + r)} L {_num(xf + r)} '
                           f'{_num(yf - r)}" stroke="{st["pole_color"]}" stroke-width="1.5"/>')
            else:
                cls = "double-pole" if n.kind == Kind.DOUBLE_POLE else "higher-pole"
                out.append(f'<rect class="node {cls}" data-node="{i}" x="{_num(float(x) - r)}" '
                           f'y="{_num(float(y) - r)}" width="{_num(2 * r)}" height="{_num(2 * r)}" fill="none" '
                           f'stroke="{st["pole_color"]}" stroke-width="1.5"/>')
    labels = {s["anchor"]: s for s in graph.sectors}
    for a in graph.anchors:
        if labels and a.label not in labels:
            continue
        for sh in shifts:
            x, y = px(a.location + sh).split()
            out.append(f'<text class="sector-label" x="{x}" y="{y}" font-size="{st["font_size"]}" '
                       f'fill="{st["anchor_color"]}" text-anchor="middle">{a.label}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
