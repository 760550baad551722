"""Continuous phase of q~ along paths and across one period of exponential sums.

For q~ = sum_{n=l..k} q_n e^{n x} the factorization

    q~(x) = C e^{(k+l) x / 2} prod_j sinh((x - c_j) / 2)

turns into a product over every root c_j + 2 pi i n.  Truncating that
product symmetrically to 2N+1 period copies and summing the per-root
argument changes gives the bookkeeping value; direct unwrapping of q~ along
the same path gives the tracked value.  The truncation error of the
bookkeeping is an odd series in 1/(N + 1/2), which Richardson extrapolation
over N, 2N, 4N removes to high order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import NotConverged, ParamOutOfRange, RootTooClose
from .potentials import PotentialSpec, evaluate_q

PHASE_TOL = 1e-6
MAX_STEP_PHASE = 0.25
MAX_DEPTH = 60
LINEARITY = 0.1
PRESPLIT = 16
DEFAULT_ROOT_COPIES = 32
TWO_PI = 2.0 * math.pi


def _vertices(path) -> list[complex]:
    pts = getattr(path, "points", path)
    return [complex(p) for p in pts]


def _segment_phase(spec: PotentialSpec, E: float, a: complex, b: complex, qa: complex, qb: complex,
                   depth: int) -> float:
    m = 0.5 * (a + b)
    qm = evaluate_q(spec, E, m)
    if qm == 0:
        raise RootTooClose("q~ vanishes on the path", x=m)
    step = float(np.angle(qb / qa))
    # accept only where q~ is close to linear, so it cannot circle the origin
    bend = abs(qm - 0.5 * (qa + qb))
    if abs(step) < MAX_STEP_PHASE and bend <= LINEARITY * min(abs(qa), abs(qb), abs(qm)):
        return step
    if depth >= MAX_DEPTH:
        raise RootTooClose("phase tracking did not resolve near a root", start=a, end=b)
    return (_segment_phase(spec, E, a, m, qa, qm, depth + 1)
            + _segment_phase(spec, E, m, b, qm, qb, depth + 1))


def phase_along_path(spec: PotentialSpec, E: float, path) -> float:
    """Unwrapped argument of q~ at the end of ``path``.

    Tracking starts from the principal argument at the first vertex.  Each
    segment is split into ``PRESPLIT`` pieces, then bisected until
    consecutive samples differ by less than ``MAX_STEP_PHASE`` and q~ is
    nearly linear between them.
    """
    verts = _vertices(path)
    if not verts:
        raise ValueError("empty path")
    q0 = evaluate_q(spec, E, verts[0])
    if q0 == 0:
        raise RootTooClose("path starts on a root", x=verts[0])
    total = float(np.angle(q0))
    qa = q0
    for a, b in zip(verts[:-1], verts[1:]):
        if a == b:
            continue
        qb = evaluate_q(spec, E, b)
        if qb == 0:
            raise RootTooClose("path vertex on a root", x=b)
        knots = [a + (b - a) * j / PRESPLIT for j in range(1, PRESPLIT)] + [b]
        for u, v in zip([a] + knots[:-1], knots):
            qv = qb if v == b else evaluate_q(spec, E, v)
            if qv == 0:
                raise RootTooClose("q~ vanishes on the path", x=v)
            total += _segment_phase(spec, E, u, v, qa, qv, 0)
            qa = qv
    return total


# ----- product bookkeeping -----


@dataclass(frozen=True)
class ExponentialSum:
    """q~ as sum_{n=low..high} coeffs[n] e^{n x}, with its roots in the basic strip."""

    coeffs: dict
    low: int
    high: int
    roots: tuple

    @property
    def prefactor_exponent(self) -> float:
        return 0.5 * (self.high + self.low)


def exponential_sum(spec: PotentialSpec, E: float) -> ExponentialSum:
    fd = spec.fdef
    if fd.exp_sum is None or spec.has_delta or spec.extra_delta:
        raise ParamOutOfRange(f"{spec.family} is not a finite exponential sum in x")
    coeffs = {int(k): float(v) for k, v in fd.exp_sum(spec._internal).items()}
    coeffs[0] = coeffs.get(0, 0.0) - E
    nonzero = sorted(k for k, v in coeffs.items() if v != 0.0)
    low, high = nonzero[0], nonzero[-1]
    if high == low:
        raise ParamOutOfRange("exponential sum has a single term and no roots")
    poly = [coeffs.get(n, 0.0) for n in range(high, low - 1, -1)]
    roots = tuple(sorted((complex(np.log(complex(u))) for u in np.roots(poly)),
                         key=lambda z: (z.real, z.imag)))
    return ExponentialSum(coeffs, low, high, roots)


def product_phase_change(esum: ExponentialSum, path, copies: int) -> float:
    """Argument change of the truncated product along ``path``.

    Uses the prefactor e^{(k+l)x/2} and the roots c_j + 2 pi i n for
    |n| <= ``copies``.  Straight segments change arg(x - x_k) by the
    principal argument of the endpoint ratio.
    """
    verts = _vertices(path)
    shifts = TWO_PI * 1j * np.arange(-copies, copies + 1)
    lattice = (np.array(esum.roots)[:, None] + shifts[None, :]).ravel()
    total = 0.0
    for a, b in zip(verts[:-1], verts[1:]):
        total += esum.prefactor_exponent * (b - a).imag
        da, db = a - lattice, b - lattice
        if np.min(np.abs(da)) == 0 or np.min(np.abs(db)) == 0:
            raise RootTooClose("path vertex on a root", start=a, end=b)
        total += float(np.sum(np.angle(db / da)))
    return total


def richardson_odd(copies: Sequence[int], values: Sequence[float]) -> float:
    """Limit of values(N) assuming an expansion in odd powers of 1/(N + 1/2)."""
    h = np.array([1.0 / (n + 0.5) for n in copies])
    cols = [np.ones_like(h)] + [h ** (2 * j + 1) for j in range(len(copies) - 1)]
    return float(np.linalg.solve(np.column_stack(cols), np.asarray(values, float))[0])


@dataclass
class PhaseAudit:
    n_roots_used: int
    path_a: list
    path_b: list
    phase_a: float
    phase_b: float
    difference: float
    tracked_difference: float
    product_difference: float
    product_raw: float
    prefactor_exponent: float
    roots: list
    converged: bool
    raw_by_copies: dict = field(default_factory=dict)

    @property
    def agreement(self) -> float:
        return abs(self.tracked_difference - self.product_difference)

    def to_json(self) -> dict:
        def pair(z):
            return [z.real, z.imag]
        return {
            "n_roots_used": self.n_roots_used,
            "path_a": [pair(z) for z in self.path_a],
            "path_b": [pair(z) for z in self.path_b],
            "phase_a": self.phase_a,
            "phase_b": self.phase_b,
            "difference": self.difference,
            "tracked_difference": self.tracked_difference,
            "product_difference": self.product_difference,
            "product_raw": self.product_raw,
            "prefactor_exponent": self.prefactor_exponent,
            "roots": [pair(z) for z in self.roots],
            "converged": self.converged,
            "raw_by_copies": {str(k): v for k, v in sorted(self.raw_by_copies.items())},
        }


def strip_phase_difference(spec: PotentialSpec, E: float, x0_real: float, copies: int = DEFAULT_ROOT_COPIES,
                           tol: float = PHASE_TOL) -> PhaseAudit:
    """Phase change of q~ from x0 = x0_real + i pi down to x0 - 2 pi i.

    ``phase_a`` is the principal argument at the upper point and
    ``phase_b`` the tracked argument at the lower one, so ``difference``
    is the change picked up on the way down.  The bookkeeping value is
    extrapolated from ``copies``, 2 and 4 times ``copies`` root copies per
    side; it counts as converged when the extrapolations started at
    ``copies`` and twice ``copies`` agree within ``tol``.
    """
    if copies < 1:
        raise ValueError("copies must be positive")
    esum = exponential_sum(spec, E)
    top = complex(x0_real, math.pi)
    bottom = top - TWO_PI * 1j
    path = [top, complex(x0_real, 0.0), bottom]
    phase_a = float(np.angle(evaluate_q(spec, E, top)))
    phase_b = phase_along_path(spec, E, path)
    tracked = phase_b - phase_a

    levels = [copies * 2 ** j for j in range(4)]
    raw = {n: product_phase_change(esum, path, n) for n in levels}
    first = richardson_odd(levels[:3], [raw[n] for n in levels[:3]])
    second = richardson_odd(levels[1:], [raw[n] for n in levels[1:]])
    converged = abs(first - second) <= tol
    if not converged:
        raise NotConverged(f"root-copy extrapolations differ by {abs(first - second):.3g}",
                           first=first, second=second)
    return PhaseAudit(copies, [top], [bottom], phase_a, phase_b, tracked, tracked, first, raw[copies],
                      esum.prefactor_exponent, list(esum.roots), converged, raw)
