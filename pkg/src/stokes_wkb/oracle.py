"""Grid eigenvalue oracle for -(1/lam^2) psi'' + V psi = E psi.

The oracle uses the bare potential V (never the Langer term) and shares no
code with the semiclassical quantizers.  Levels are isolated by counting
sign changes of shooting solutions (Sturm counting), pinned down by root
finding on a discrete Wronskian, and extrapolated over three grids.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import optimize

from .errors import EmptySpectrum, GridTooCoarse, NoBoundWindow
from .kernels import numerov_shoot
from .potentials import EndKind, PotentialSpec, RealWell, pole_lattice
from .spectrum import Level, Method, SpectrumResult

DECAY_TARGET = 36.0  # exp(-36) ~ 2e-16
MAX_BOX = 800.0
MAX_POINTS = 400_000


@dataclass(frozen=True)
class OracleProblem:
    """Everything the oracle needs: V on a real interval and lam."""

    V: Callable
    a: float
    b: float
    kind_a: EndKind
    kind_b: EndKind
    lam: float
    other_poles: tuple = ()

    @classmethod
    def from_spec(cls, spec: PotentialSpec) -> "OracleProblem":
        d = spec.domain
        return cls(spec.V, d.a, d.b, d.kind_a, d.kind_b, spec.lam, tuple(pole_lattice(spec, copies=1)))


def _laurent(V: Callable, p: float, direction: int, radius: float, points: int = 64) -> np.ndarray:
    """Laurent coefficients c_-3..c_1 of V(p + direction * t) in t."""
    theta = 2.0 * math.pi * np.arange(points) / points
    t = radius * np.exp(1j * theta)
    vals = V(p + direction * t)
    ks = np.arange(-3, 2)
    return np.array([np.mean(vals * np.exp(-1j * k * theta)).real / radius ** k for k in ks])


@dataclass
class _PoleStart:
    exponent: float
    a1: float
    a2: float

    def psi(self, t: float) -> float:
        return t ** self.exponent * (1.0 + self.a1 * t + self.a2 * t * t)


def _fill_overflow(v: np.ndarray) -> np.ndarray:
    """Replace inf/nan samples (exp overflow far out) by the nearest finite one."""
    bad = ~np.isfinite(v)
    if not bad.any():
        return v
    good = np.nonzero(~bad)[0]
    if good.size == 0:
        raise ValueError("potential is not finite anywhere on the grid")
    idx = np.arange(v.size)
    nearest = good[np.clip(np.searchsorted(good, idx), 0, good.size - 1)]
    below = good[np.clip(np.searchsorted(good, idx) - 1, 0, good.size - 1)]
    pick = np.where(np.abs(below - idx) < np.abs(nearest - idx), below, nearest)
    out = v.copy()
    out[bad] = v[pick[bad]]
    return out


class _Grid:
    def __init__(self, prob: OracleProblem, x_left: float, x_right: float, n: int, x_match: float,
                 left_pole: np.ndarray | None, right_pole: np.ndarray | None):
        self.prob = prob
        self.h = (x_right - x_left) / n
        self.n = n
        self.x = x_left + self.h * np.arange(n + 1)
        with np.errstate(all="ignore"):
            v = np.real(np.asarray(prob.V(self.x), dtype=complex))
        v = _fill_overflow(v)
        if left_pole is not None:
            v[0] = 0.0
        if right_pole is not None:
            v[-1] = 0.0
        self.lam2 = prob.lam ** 2
        self.v = v
        self.left_pole = left_pole
        self.right_pole = right_pole
        self.m = int(np.clip(round((x_match - x_left) / self.h), 3, n - 4))

    def _start(self, coeffs: np.ndarray, E: float) -> _PoleStart:
        lam2 = self.lam2
        big_l = lam2 * coeffs[1]
        r = lam2 * coeffs[2]
        f0 = lam2 * (coeffs[3] - E)
        s = 0.5 + math.sqrt(0.25 + max(big_l, 0.0))
        a1 = r / (2.0 * s)
        a2 = (r * a1 + f0) / (2.0 * (2.0 * s + 1.0))
        return _PoleStart(s, a1, a2)

    def shoot(self, E: float):
        """Return (normalized Wronskian, eigenvalue count below E)."""
        f = self.lam2 * (self.v - E)
        h, n, m = self.h, self.n, self.m
        if self.left_pole is not None:
            st = self._start(self.left_pole, E)
            l0, lp0, lp1 = 1, st.psi(h), st.psi(2 * h)
        else:
            l0, lp0, lp1 = 0, 0.0, 1.0
        if self.right_pole is not None:
            st = self._start(self.right_pole, E)
            r0, rp0, rp1 = n - 1, st.psi(h), st.psi(2 * h)
        else:
            r0, rp0, rp1 = n, 0.0, 1.0
        l_m, l_m1, n_left, _ = numerov_shoot(f, h, l0, m + 1, lp0, lp1)
        r_m1, r_m, n_right, _ = numerov_shoot(f, h, r0, m, rp0, rp1)
        if l_m * l_m1 < 0:
            n_left -= 1
        c = h * h / 12.0
        a_m = 1.0 - c * f[m]
        a_m1 = 1.0 - c * f[m + 1]
        norm_l = math.hypot(l_m, l_m1)
        norm_r = math.hypot(r_m, r_m1)
        k = a_m * a_m1 * (l_m * r_m1 - l_m1 * r_m) / (norm_l * norm_r)
        glue = 1 if k * l_m * r_m > 0 else 0
        return k, n_left + n_right + glue


def _side_extent(V: Callable, lam: float, x_turn: float, end: float, direction: int, E: float) -> float:
    """Distance from the turning point to where the tail is negligible."""
    finite = math.isfinite(end)
    acc = 0.0
    x = x_turn
    step = 0.01
    prev = 0.0
    while True:
        if finite:
            remaining = abs(end - x)
            if remaining < 1e-6:
                return end - direction * 1e-6
            xs = x + direction * np.linspace(step, min(200 * step, 0.5 * remaining), 200)
        else:
            xs = x + direction * step * np.arange(1, 201)
        with np.errstate(all="ignore"):
            vals = np.real(np.asarray(V(xs), dtype=complex))
        if not np.isfinite(vals).any():
            return x
        vals = _fill_overflow(vals)
        k = lam * np.sqrt(np.maximum(vals - E, 0.0))
        ks = np.concatenate([[prev], k])
        widths = np.abs(np.diff(np.concatenate([[x], xs])))
        cum = acc + np.cumsum(0.5 * (ks[:-1] + ks[1:]) * widths)
        ok = (cum >= DECAY_TARGET) & (vals > E)
        if np.any(ok):
            return float(xs[int(np.argmax(ok))])
        acc, x, prev = float(cum[-1]), float(xs[-1]), float(k[-1])
        if abs(x - x_turn) > MAX_BOX:
            return x
        if not finite:
            step = min(step * 1.5, 0.5)


class GridOracle:
    def __init__(self, prob: OracleProblem):
        self.prob = prob
        self.well = RealWell(lambda x: np.real(np.asarray(prob.V(np.asarray(x, dtype=float)), dtype=complex)),
                             prob.a, prob.b)
        self.v_min_x, self.v_min = self.well.minimum()

    def _pole_coeffs(self, p: float, direction: int) -> np.ndarray:
        others = [abs(z - p) for z in self.prob.other_poles if abs(z - p) > 1e-9]
        radius = 0.1 * min([1.0] + others)
        c = _laurent(self.prob.V, p, direction, radius)
        if abs(c[0]) > 1e-8 * max(1.0, abs(c[1])):
            return None  # higher-order pole: treated as a truncated end
        return c

    def build(self, E_top: float, refine: int = 0) -> _Grid:
        prob = self.prob
        lo, hi = self.well.window()
        e_box = min(E_top, hi - 1e-12 * max(1.0, abs(hi))) if math.isfinite(hi) else E_top
        x_lt, x_rt = self.well.turning_points(e_box)
        left_pole = right_pole = None
        if prob.kind_a in (EndKind.POLE2,) and math.isfinite(prob.a):
            left_pole = self._pole_coeffs(prob.a, +1)
        if prob.kind_b in (EndKind.POLE2,) and math.isfinite(prob.b):
            right_pole = self._pole_coeffs(prob.b, -1)
        x_left = prob.a if left_pole is not None else _side_extent(prob.V, prob.lam, x_lt, prob.a, -1, e_box)
        x_right = prob.b if right_pole is not None else _side_extent(prob.V, prob.lam, x_rt, prob.b, +1, e_box)
        k_max = prob.lam * math.sqrt(max(e_box - self.v_min, 1e-12))
        length = x_right - x_left
        h0 = min(0.02, 0.08 / k_max, length / 400.0) / 2 ** refine
        n = int(min(math.ceil(length / h0), MAX_POINTS))
        n += n % 2
        return _Grid(prob, x_left, x_right, n, self.v_min_x, left_pole, right_pole)

    @staticmethod
    def refined(grid: _Grid, factor: int) -> _Grid:
        return _Grid(grid.prob, float(grid.x[0]), float(grid.x[-1]), grid.n * factor,
                     float(grid.x[grid.m]), grid.left_pole, grid.right_pole)

    def energy_ceiling(self, count: int) -> tuple[float, int]:
        """An energy below which at least ``count`` levels lie (or all that exist)."""
        lo, hi = self.well.window()
        if math.isfinite(hi):
            e = lo + 0.5 * (hi - lo)
        else:
            e = lo + max(1.0, abs(lo))
        found = 0
        for _ in range(60):
            grid = self.build(e)
            found = grid.shoot(e)[1]
            if found >= count:
                return e, found
            if math.isfinite(hi):
                gap = hi - e
                if gap < 1e-7 * max(1.0, abs(hi)):
                    break
                e = hi - 0.25 * gap
            else:
                e = lo + 2.0 * (e - lo)
        return e, found

    def levels_on(self, grid: _Grid, count: int, e_top: float, brackets=None):
        """Eigenvalues 0..count-1 on one grid; returns (energies, brackets)."""
        lo = self.v_min
        cache: dict[float, tuple[float, int]] = {}

        def probe(e):
            if e not in cache:
                cache[e] = grid.shoot(e)
            return cache[e]

        out, used = [], []
        for m in range(count):
            if brackets is not None:
                e1, e2 = brackets[m]
                # widen a little: the level moves slightly between grids
                w = max(e2 - e1, 1e-9 * max(1.0, abs(e1)))
                e1, e2 = e1 - w, e2 + w
                if probe(e1)[1] > m or probe(e2)[1] < m + 1:
                    e1, e2 = lo, e_top
            else:
                e1, e2 = (out[-1] if out else lo), e_top
            # bisection until the bracket isolates level m
            for _ in range(200):
                n1, n2 = probe(e1)[1], probe(e2)[1]
                if n1 == m and n2 == m + 1:
                    break
                mid = 0.5 * (e1 + e2)
                if probe(mid)[1] <= m:
                    e1 = mid
                else:
                    e2 = mid
            k1, k2 = probe(e1)[0], probe(e2)[0]
            if k1 * k2 < 0:
                e = optimize.brentq(lambda x: grid.shoot(x)[0], e1, e2, xtol=1e-15, rtol=1e-15, maxiter=200)
            else:
                while e2 - e1 > 4e-16 * max(1.0, abs(e1)):
                    mid = 0.5 * (e1 + e2)
                    if probe(mid)[1] <= m:
                        e1 = mid
                    else:
                        e2 = mid
                e = 0.5 * (e1 + e2)
            out.append(e)
            used.append((e1, e2))
        return out, used


def oracle_spectrum(spec: PotentialSpec | OracleProblem, m_max: int, tol: float = 1e-9,
                    max_refine: int = 3) -> SpectrumResult:
    """Lowest ``m_max + 1`` eigenvalues with three-grid Richardson extrapolation.

    Raises GridTooCoarse when the extrapolations from (h, h/2) and (h/2, h/4)
    still disagree by more than ``tol * max(1, |E|)`` after ``max_refine``
    halvings of the base spacing.
    """
    prob = spec if isinstance(spec, OracleProblem) else OracleProblem.from_spec(spec)
    try:
        solver = GridOracle(prob)
    except NoBoundWindow:
        raise
    e_top, found = solver.energy_ceiling(m_max + 1)
    count = min(found, m_max + 1)
    family = getattr(spec, "family", "CUSTOM")
    phash = spec.params_hash() if isinstance(spec, PotentialSpec) else ""
    if count == 0:
        return SpectrumResult(Method.ORACLE, family, phash, [], omitted=m_max + 1)
    last = None
    for refine in range(max_refine + 1):
        g1 = solver.build(e_top, refine)
        e_h, br = solver.levels_on(g1, count, e_top)
        e_h2, br = solver.levels_on(solver.refined(g1, 2), count, e_top, br)
        e_h4, _ = solver.levels_on(solver.refined(g1, 4), count, e_top, br)
        r1 = [b + (b - a) / 15.0 for a, b in zip(e_h, e_h2)]
        r2 = [b + (b - a) / 15.0 for a, b in zip(e_h2, e_h4)]
        gaps = [abs(x - y) / max(1.0, abs(y)) for x, y in zip(r1, r2)]
        last = (r2, gaps, (e_h, e_h2, e_h4), g1.n)
        if max(gaps) <= tol:
            break
    else:
        raise GridTooCoarse(f"Richardson estimates disagree by {max(last[1]):.3e} > {tol:.1e}",
                            gaps=last[1])
    r2, gaps, raw, n = last
    levels = [Level(m, float(e), float(g), n) for m, (e, g) in enumerate(zip(r2, gaps))]
    notes = {"grid_points": n, "raw": [list(map(float, r)) for r in raw]}
    return SpectrumResult(Method.ORACLE, family, phash, levels, omitted=m_max + 1 - count, notes=notes)


# ----- comparisons -----


@dataclass(frozen=True)
class LevelDiff:
    m: int
    E_a: float
    E_b: float
    abs_diff: float
    rel_diff: float


@dataclass
class ComparisonReport:
    diffs: list[LevelDiff]
    max_abs_diff: float
    max_rel_diff: float
    tol: float
    verdict: str  # "MATCH" | "MISMATCH"

    def to_json(self) -> dict:
        return {
            "levels": [d.__dict__ for d in self.diffs],
            "max_abs_diff": self.max_abs_diff,
            "max_rel_diff": self.max_rel_diff,
            "tol": self.tol,
            "verdict": self.verdict,
        }


def compare_spectra(a: SpectrumResult, b: SpectrumResult, tol: float, align: str = "m") -> ComparisonReport:
    """Per-level differences aligned by ``m`` or by rank.

    The relative difference is ``|E_a - E_b| / max(1, |E_b|)``.
    """
    if not a.levels or not b.levels:
        raise EmptySpectrum("cannot compare an empty spectrum")
    if align == "m":
        bm = b.by_m()
        pairs = [(lv, bm[lv.m]) for lv in a.levels if lv.m in bm]
    elif align == "rank":
        pairs = list(zip(a.levels, b.levels))
    else:
        raise ValueError(f"unknown alignment {align!r}")
    if not pairs:
        raise EmptySpectrum("no common levels")
    diffs = []
    for la, lb in pairs:
        d = abs(la.E - lb.E)
        diffs.append(LevelDiff(la.m, la.E, lb.E, d, d / max(1.0, abs(lb.E))))
    max_abs = max(d.abs_diff for d in diffs)
    max_rel = max(d.rel_diff for d in diffs)
    return ComparisonReport(diffs, max_abs, max_rel, tol, "MATCH" if max_rel <= tol else "MISMATCH")
