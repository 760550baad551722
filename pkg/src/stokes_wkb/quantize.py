"""Energy levels from the JWKB and SUSY-JWKB quantization conditions.

Both conditions have the shape  Im A(E) = target(m)  with A monotone on the
bound-state window, so every level is bracketed by a scan and then refined
with Brent's method.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np
from scipy import optimize

from ._quad import QUAD_TOL, integrate_ordered
from .actions import _smoothstep, contour_action
from .errors import NoBoundWindow
from .potentials import PotentialSpec, RealWell, real_well
from .spectrum import Level, Method, SpectrumResult

SOLVE_TOL = 1e-10


def _scan_grid(lo: float, hi: float, points: int) -> np.ndarray:
    """Energies clustered toward the window bottom (log-spaced offsets)."""
    span = hi - lo
    offsets = span * np.logspace(-12, 0, points)
    return lo + offsets


def solve_levels(action: Callable[[float], float], lo: float, hi: float, targets: list[float],
                 solve_tol: float = SOLVE_TOL, points: int = 96) -> tuple[list[tuple[int, float, float, int]], int]:
    """Solve action(E) = targets[i] for the monotone ``action`` on (lo, hi).

    ``hi`` may be infinite; the scan then doubles its span until the largest
    target is passed.  Returns ([(index, E, residual, evaluations)], omitted).
    """
    if not targets:
        return [], 0
    top = hi
    if not math.isfinite(hi):
        span = max(1.0, abs(lo))
        while action(lo + span) <= max(targets):
            span *= 2.0
            if span > 1e12:
                break
        top = lo + span
    # stay strictly inside a finite window: the action saturates at its top
    inner_top = top if not math.isfinite(hi) else hi - 1e-9 * max(1.0, abs(hi))
    grid = _scan_grid(lo, inner_top, points) if inner_top > lo else np.array([])
    values = np.array([action(e) for e in grid])
    out, omitted = [], 0
    for i, t in enumerate(targets):
        above = np.nonzero(values >= t)[0]
        if above.size == 0:
            omitted += 1
            continue
        j = int(above[0])
        if j == 0:
            a, b = lo, float(grid[0])
            fa = -t
        else:
            a, b = float(grid[j - 1]), float(grid[j])
            fa = values[j - 1] - t
        count = [0]

        def g(e, t=t):
            count[0] += 1
            return action(e) - t

        if fa == 0.0:
            e = a
        else:
            e = optimize.brentq(g, a, b, xtol=1e-15 * max(1.0, abs(a)), rtol=1e-15, maxiter=200)
        resid = abs(action(e) - t)
        if resid > solve_tol * max(1.0, abs(t)):
            # polish: the action is smooth, a secant step usually suffices
            e2 = optimize.newton(lambda x: action(x) - t, e, tol=1e-15, maxiter=20)
            if a <= e2 <= b and abs(action(e2) - t) < resid:
                e, resid = e2, abs(action(e2) - t)
        out.append((i, float(e), float(resid), count[0]))
    return out, omitted


def jwkb_action(spec: PotentialSpec, E: float, tol: float = QUAD_TOL) -> float:
    """Im A(E); zero at the window bottom."""
    well = real_well(spec)
    lo, hi = well.window()
    if E <= lo:
        return 0.0
    return contour_action(spec, E, well.turning_points(E), tol).value.imag


def wkb_spectrum(spec: PotentialSpec, m_max: int, offset: float = 0.0,
                 solve_tol: float = SOLVE_TOL) -> SpectrumResult:
    """Levels solving Im A(E) = (2(m + offset) + 1) pi for m = 0..m_max.

    ``offset`` = 1/2 gives the half-integer enumeration used when comparing
    against broken-supersymmetry spectra.
    """
    well = real_well(spec)
    lo, hi = well.window()
    targets = [(2.0 * (m + offset) + 1.0) * math.pi for m in range(m_max + 1)]
    sols, omitted = solve_levels(lambda e: jwkb_action(spec, e), lo, hi, targets, solve_tol)
    levels = [Level(i, e, r, n) for i, e, r, n in sols]
    notes = {"window": [lo, hi]}
    if offset:
        notes["offset"] = offset
    return SpectrumResult(Method.JWKB, spec.family, spec.params_hash(), levels, omitted, notes)


def _swkb_action(well: RealWell, lam: float, e: float, tol: float = QUAD_TOL) -> float:
    lo, _ = well.window()
    if e <= lo:
        return 0.0
    a, b = well.turning_points(e)

    def f(u, s):
        tau, dtau = _smoothstep(u)
        x = a + (b - a) * tau
        v = e - np.real(well.h(x))
        return np.sqrt(np.maximum(v, 0.0)) * (b - a) * dtau, s

    val, _, _ = integrate_ordered(f, 0.0, 1.0, None, tol)
    return 2.0 * lam * val


def swkb_spectrum(phi, m_max: int, solve_tol: float = SOLVE_TOL) -> SpectrumResult:
    """Levels from Im of the phi^2 action = 2 pi m, reported as E = E~ + eps0.

    ``phi`` needs ``phi(x)``, ``domain``, ``lam``, ``epsilon0``, ``family``.
    The m = 0 level exists only when phi has a real zero (min phi^2 = 0);
    otherwise enumeration starts at m = 1.
    """
    a, b = phi.domain
    well = RealWell(lambda x: np.real(phi.phi(np.asarray(x, dtype=float))) ** 2, a, b)
    try:
        lo, hi = well.window()
    except NoBoundWindow:
        raise NoBoundWindow(f"phi^2 of {phi.label} has no two-root window") from None
    levels = []
    zero_floor = 1e-12 * max(1.0, abs(hi) if math.isfinite(hi) else 1.0)
    start = 0 if lo <= zero_floor else 1
    if start == 0:
        levels.append(Level(0, float(lo + phi.epsilon0), 0.0, 0))
    ms = list(range(max(start, 1), m_max + 1))
    targets = [2.0 * math.pi * m for m in ms]
    sols, omitted = solve_levels(lambda e: _swkb_action(well, phi.lam, e), lo, hi, targets, solve_tol)
    for i, e, r, n in sols:
        levels.append(Level(ms[i], float(e + phi.epsilon0), r, n))
    notes = {"window_tilde": [lo, hi], "epsilon0": phi.epsilon0, "first_m": start}
    return SpectrumResult(Method.SWKB, phi.family_name, phi.params_hash(), levels, omitted, notes)
