"""Superpotential catalog, ground-state case classification and the
residue-at-infinity values that tie the SUSY-JWKB condition to the JWKB one.

Every superpotential is rebuilt from the Riccati identity
V = phi^2 - phi'/lam + eps0 and checked against the potential at build time,
so a wrong coefficient fails loudly instead of producing a wrong spectrum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

import numpy as np

from ._quad import gauss_legendre
from .actions import continue_sqrt
from .errors import (Indeterminate, NoBoundWindow, NoConstantShift, NotConverged, ParamOutOfRange,
                     RiccatiMismatch)
from .potentials import PotentialSpec, family_def, make_potential

RICCATI_TOL = 1e-10
RESIDUE_TOL = 1e-6
RADII = (10.0, 20.0, 40.0)
LOOP_POINTS = 2048


class Case(str, Enum):
    EXACT_1 = "EXACT_1"
    BROKEN_2 = "BROKEN_2"
    BROKEN_3 = "BROKEN_3"
    BROKEN_4 = "BROKEN_4"


class Shift(str, Enum):
    SHIFT_0 = "SHIFT_0"
    SHIFT_HALF = "SHIFT_HALF"
    SHIFT_ONE = "SHIFT_ONE"


class Variant(str, Enum):
    PLUS = "PLUS"
    MINUS = "MINUS"


SHIFT_OF_CASE = {Case.EXACT_1: Shift.SHIFT_0, Case.BROKEN_2: Shift.SHIFT_HALF,
                 Case.BROKEN_3: Shift.SHIFT_HALF, Case.BROKEN_4: Shift.SHIFT_ONE}
SHIFT_VALUE = {Shift.SHIFT_0: 0.0, Shift.SHIFT_HALF: 0.5, Shift.SHIFT_ONE: 1.0}

# catalog number -> potential family carrying the same V
FAMILY_OF = {1: "Q1", 2: "COULOMB", 3: "RADIAL_HARMONIC", 4: "Q4", 5: "Q5", 6: "Q6", 7: "Q7", 8: "Q8",
             9: "SCARF_TRIG", 10: "SCARF_HYP"}
# ground-state cases catalogued for each family
LISTED_CASES = {
    1: (Case.EXACT_1, Case.BROKEN_4),
    2: (Case.EXACT_1, Case.BROKEN_4),
    3: (Case.EXACT_1, Case.BROKEN_2, Case.BROKEN_3, Case.BROKEN_4),
    4: (Case.EXACT_1, Case.BROKEN_4),
    5: (Case.EXACT_1, Case.BROKEN_4),
    6: (Case.EXACT_1, Case.BROKEN_2, Case.BROKEN_3, Case.BROKEN_4),
    7: (Case.EXACT_1, Case.BROKEN_4),
    8: (Case.EXACT_1, Case.BROKEN_2, Case.BROKEN_3, Case.BROKEN_4),
    9: (Case.EXACT_1, Case.BROKEN_2, Case.BROKEN_3, Case.BROKEN_4),
    10: (Case.EXACT_1, Case.BROKEN_4),
}


@dataclass(frozen=True)
class Infinity:
    """A point of the basic strip where phi diverges (one sheet of the phi surface).

    ``kind`` is ``pole`` (phi ~ scale / (x - location)), ``exp`` (phi ~ scale e^x
    as Re x -> +inf) or ``linear`` (phi ~ scale x as x -> +inf).  ``side`` is
    ``left``/``right`` for real domain ends and ``off`` for points off the axis.
    """

    kind: str
    location: complex
    scale: complex
    side: str

    def approx_x(self, target: complex) -> complex:
        if self.kind == "pole":
            return self.location + self.scale / target
        if self.kind == "exp":
            return complex(np.log(target / self.scale))
        return target / self.scale

    def real_sign(self) -> float:
        """Sign of phi on the real axis inside the domain next to this end."""
        s = 1.0 if self.scale.real > 0 else -1.0
        if self.kind == "pole" and self.side == "right":
            return -s
        return s


@dataclass
class Superpotential:
    family: int
    listed_case: Case
    spec: PotentialSpec
    epsilon0: float
    shape: dict
    infinities: tuple[Infinity, ...]
    _phi: Callable = field(repr=False)
    _dphi: Callable = field(repr=False)

    @property
    def lam(self) -> float:
        return self.spec.lam

    @property
    def domain(self) -> tuple[float, float]:
        d = self.spec.domain
        return d.a, d.b

    @property
    def family_name(self) -> str:
        return self.spec.family

    @property
    def label(self) -> str:
        return f"phi{self.family}/{self.listed_case.value}"

    @property
    def sheets(self) -> int:
        return len(self.infinities)

    def params_hash(self) -> str:
        return f"{self.spec.params_hash()}-{self.family}{self.listed_case.value[-1]}"

    def phi(self, x):
        return self._phi(x)

    def dphi(self, x):
        """phi'(x); on the phi surface this is F2."""
        return self._dphi(x)

    def f1(self, x, variant: Variant = Variant.MINUS):
        """F1 for the chosen partner: MINUS -> phi' - delta/lam, PLUS -> -phi' - delta/lam.

        The radicand of the matching JWKB integral is phi^2 - F1/lam - E~.
        """
        sign = 1.0 if variant is Variant.MINUS else -1.0
        return sign * self._dphi(x) - self.spec.delta(x) / self.lam

    def to_json(self) -> dict:
        return {"family": self.family, "listed_case": self.listed_case.value, "spec": self.spec.to_json(),
                "epsilon0": self.epsilon0, "shape": {k: float(v) for k, v in sorted(self.shape.items())}}


# --------------------------------------------------------------------------------------------
# catalog


def _ell(lam: float, strength: float, scale: float) -> float:
    """|2l+1| from a pole strength written as l(l+1)/(scale*lam^2)."""
    disc = 1.0 + 4.0 * scale * lam * lam * strength
    if disc <= 0:
        raise ParamOutOfRange(f"pole strength {strength} has no real |2l+1|")
    return math.sqrt(disc)


def _sign(case: Case, flips: dict[Case, tuple[int, ...]]) -> tuple[int, ...]:
    if case not in flips:
        raise ParamOutOfRange(f"case {case.value} is not listed for this family")
    return flips[case]


def _build_1(p, lam, case):
    a, beta = abs(p["alpha"]), p["beta"]
    (s,) = _sign(case, {Case.EXACT_1: (1,), Case.BROKEN_4: (-1,)})
    c = beta / a - s / (2.0 * lam)

    def phi(x):
        return s * (a * np.exp(x) - c)

    def dphi(x):
        return s * a * np.exp(x)

    return phi, dphi, -c * c, {"c": c}, (Infinity("exp", 0j, s * a, "right"),)


def _build_2(p, lam, case):
    alpha, L = p["alpha"], _ell(lam, p["beta"], 1.0)
    (s,) = _sign(case, {Case.EXACT_1: (1,), Case.BROKEN_4: (-1,)})
    k = s * L + 1.0  # |2l+1| -> s |2l+1|
    if abs(k) < 1e-12:
        raise ParamOutOfRange("|2l+1| = 1 leaves no broken superpotential")
    g = lam * alpha / k

    def phi(x):
        return -k / (2.0 * lam * x) + g

    def dphi(x):
        return k / (2.0 * lam * x * x)

    return phi, dphi, -g * g, {"L": L, "k": k}, (Infinity("pole", 0j, -k / (2.0 * lam), "left"),)


def _build_3(p, lam, case):
    a, L = abs(p["alpha"]), _ell(lam, p["beta"], 1.0)
    sa, sl = _sign(case, {Case.EXACT_1: (1, 1), Case.BROKEN_2: (1, -1), Case.BROKEN_3: (-1, 1),
                          Case.BROKEN_4: (-1, -1)})
    k = sl * L + 1.0

    def phi(x):
        return sa * a * x - k / (2.0 * lam * x)

    def dphi(x):
        return sa * a + k / (2.0 * lam * x * x)

    eps0 = sa * a * (sl * L + 2.0) / lam
    infs = (Infinity("pole", 0j, -k / (2.0 * lam), "left"), Infinity("linear", 0j, sa * a, "right"))
    return phi, dphi, eps0, {"L": L, "k": k, "a": sa * a}, infs


def _tanh_pair(p, lam, case, flips):
    L = _ell(lam, p["alpha"] + p["beta"], 4.0)
    (s,) = _sign(case, flips)
    amp = (s * L - 1.0) / (4.0 * lam)
    if abs(amp) < 1e-14:
        raise ParamOutOfRange("vanishing tanh amplitude")
    return L, amp, p["alpha"] / amp


def _build_4(p, lam, case):
    L, A, B = _tanh_pair(p, lam, case, {Case.EXACT_1: (1,), Case.BROKEN_4: (-1,)})

    def phi(x):
        return A * np.tanh(0.5 * x) + B

    def dphi(x):
        return 0.5 * A / np.cosh(0.5 * x) ** 2

    return phi, dphi, -(A - B) ** 2, {"L": L, "A": A, "B": B}, (Infinity("pole", 1j * math.pi, 2.0 * A, "off"),)


def _build_5(p, lam, case):
    L, A, B = _tanh_pair(p, lam, case, {Case.EXACT_1: (-1,), Case.BROKEN_4: (1,)})

    def phi(x):
        return A / np.tanh(0.5 * x) + B

    def dphi(x):
        return -0.5 * A / np.sinh(0.5 * x) ** 2

    return phi, dphi, -(A - B) ** 2, {"L": L, "A": A, "B": B}, (Infinity("pole", 0j, 2.0 * A, "left"),)


def _build_6(p, lam, case):
    L, Lp = _ell(lam, p["alpha"], 4.0), _ell(lam, p["beta"], 4.0)
    s, sp = _sign(case, {Case.EXACT_1: (1, 1), Case.BROKEN_2: (-1, 1), Case.BROKEN_3: (1, -1),
                         Case.BROKEN_4: (-1, -1)})
    P = (s * L - 1.0) / (4.0 * lam)
    Q = (sp * Lp + 1.0) / (4.0 * lam)

    def phi(x):
        y = 0.5 * x
        return P * np.tanh(y) - Q / np.tanh(y)

    def dphi(x):
        y = 0.5 * x
        return 0.5 * P / np.cosh(y) ** 2 + 0.5 * Q / np.sinh(y) ** 2

    infs = (Infinity("pole", 0j, -2.0 * Q, "left"), Infinity("pole", 1j * math.pi, 2.0 * P, "off"))
    return phi, dphi, -(P - Q) ** 2, {"L": L, "Lp": Lp, "P": P, "Q": Q}, infs


def _build_7(p, lam, case):
    L = _ell(lam, p["alpha"], 4.0)
    (s,) = _sign(case, {Case.EXACT_1: (1,), Case.BROKEN_4: (-1,)})
    A = (s * L - 1.0) / (4.0 * lam)

    def phi(x):
        return -A * np.tan(0.5 * x)

    def dphi(x):
        return -0.5 * A / np.cos(0.5 * x) ** 2

    return phi, dphi, A * A, {"L": L, "A": A}, (Infinity("pole", complex(math.pi), 2.0 * A, "right"),)


def _build_8(p, lam, case):
    L, Lp = _ell(lam, p["alpha"], 4.0), _ell(lam, p["beta"], 4.0)
    s, sp = _sign(case, {Case.EXACT_1: (1, 1), Case.BROKEN_2: (-1, 1), Case.BROKEN_3: (1, -1),
                         Case.BROKEN_4: (-1, -1)})
    P = (s * L + 1.0) / (4.0 * lam)
    Q = (sp * Lp + 1.0) / (4.0 * lam)

    def phi(x):
        y = 0.5 * x
        return P * np.tan(y) - Q / np.tan(y)

    def dphi(x):
        y = 0.5 * x
        return 0.5 * P / np.cos(y) ** 2 + 0.5 * Q / np.sin(y) ** 2

    infs = (Infinity("pole", 0j, -2.0 * Q, "left"), Infinity("pole", complex(math.pi), -2.0 * P, "right"))
    return phi, dphi, (P + Q) ** 2, {"L": L, "Lp": Lp, "P": P, "Q": Q}, infs


def _build_9(p, lam, case):
    alpha, beta = p["alpha"], p["beta"]
    e1, e2 = _sign(case, {Case.EXACT_1: (1, 1), Case.BROKEN_2: (-1, 1), Case.BROKEN_3: (1, -1),
                          Case.BROKEN_4: (-1, -1)})
    r = 1.0 / (4.0 * lam * lam)
    if alpha - beta + r <= 0:
        raise ParamOutOfRange("alpha - beta + 1/(4 lam^2) must be positive")
    s1, s2 = e1 * math.sqrt(alpha + beta + r), e2 * math.sqrt(alpha - beta + r)
    A = 0.5 * (s1 + s2) + 1.0 / (2.0 * lam)
    B = 0.5 * (s1 - s2)

    def phi(x):
        return (A * np.sin(x) + B) / np.cos(x)

    def dphi(x):
        c = np.cos(x)
        return (A + B * np.sin(x)) / (c * c)

    infs = (Infinity("pole", complex(-0.5 * math.pi), B - A, "left"),
            Infinity("pole", complex(0.5 * math.pi), -(A + B), "right"))
    return phi, dphi, A * A, {"A": A, "B": B}, infs


def _build_10(p, lam, case):
    alpha, beta = p["alpha"], p["beta"]
    (s,) = _sign(case, {Case.EXACT_1: (1,), Case.BROKEN_4: (-1,)})
    w = s * np.sqrt(complex(alpha - 1.0 / (4.0 * lam * lam), beta))
    B, A = w.real, w.imag - 1.0 / (2.0 * lam)

    def phi(x):
        return (A * np.sinh(x) + B) / np.cosh(x)

    def dphi(x):
        c = np.cosh(x)
        return (A - B * np.sinh(x)) / (c * c)

    infs = (Infinity("pole", 0.5j * math.pi, complex(A, -B), "off"),
            Infinity("pole", -0.5j * math.pi, complex(A, B), "off"))
    return phi, dphi, -A * A, {"A": A, "B": B}, infs


_BUILDERS = {1: _build_1, 2: _build_2, 3: _build_3, 4: _build_4, 5: _build_5, 6: _build_6, 7: _build_7,
             8: _build_8, 9: _build_9, 10: _build_10}


def _sample_points(a: float, b: float, n: int = 41) -> np.ndarray:
    lo = a if math.isfinite(a) else -8.0
    hi = b if math.isfinite(b) else 8.0
    if math.isfinite(a) and math.isfinite(b):
        pad = 0.02 * (b - a)
    else:
        pad = 0.05
    return np.linspace(lo + pad if math.isfinite(a) else lo, hi - pad if math.isfinite(b) else hi, n)


def riccati_residual(sp: Superpotential) -> tuple[float, float]:
    """Largest relative deviation of phi^2 - phi'/lam + eps0 from V, and where."""
    a, b = sp.domain
    xs = _sample_points(a, b)
    phi = np.real(sp.phi(xs))
    built = phi * phi - np.real(sp.dphi(xs)) / sp.lam + sp.epsilon0
    target = np.real(np.asarray(sp.spec.V(xs), dtype=complex))
    dev = np.abs(built - target) / np.maximum(1.0, np.abs(target))
    i = int(np.argmax(dev))
    return float(dev[i]), float(xs[i])


def derivative_residual(sp: Superpotential) -> float:
    """Largest relative mismatch between dphi and a complex-step derivative of phi."""
    a, b = sp.domain
    xs = _sample_points(a, b)
    h = 1e-20
    numeric = np.imag(sp.phi(xs + 1j * h)) / h
    exact = np.real(sp.dphi(xs))
    return float(np.max(np.abs(numeric - exact) / np.maximum(1.0, np.abs(exact))))


def superpotential(family: int, case: Case | str, params: dict | PotentialSpec, lam: float | None = None
                   ) -> Superpotential:
    """Build and validate the listed superpotential of ``family`` for ``case``.

    ``params`` is either a PotentialSpec of the matching family or the
    potential parameters (then ``lam`` is required).
    """
    case = Case(case)
    if family not in _BUILDERS:
        raise ParamOutOfRange(f"no superpotential family {family}")
    if isinstance(params, PotentialSpec):
        spec = params
        if family_def(spec.family).potential is not family_def(FAMILY_OF[family]).potential:
            raise ParamOutOfRange(f"spec family {spec.family} does not carry phi{family}")
    else:
        if lam is None:
            raise ParamOutOfRange("lam is required with raw parameters")
        spec = make_potential(FAMILY_OF[family], params, lam)
    phi, dphi, eps0, shape, infs = _BUILDERS[family](dict(spec.internal_params), spec.lam, case)
    sp = Superpotential(family, case, spec, float(eps0), shape, infs, phi, dphi)
    dev, where = riccati_residual(sp)
    if not dev <= RICCATI_TOL:
        raise RiccatiMismatch(f"{sp.label}: phi^2 - phi'/lam + eps0 misses V by {dev:.3g} at x = {where:.6g}",
                              deviation=dev, x=where)
    d_dev = derivative_residual(sp)
    if not d_dev <= RICCATI_TOL:
        raise RiccatiMismatch(f"{sp.label}: F2 differs from phi' by {d_dev:.3g}", deviation=d_dev)
    return sp


def catalog(family: int, params: dict | PotentialSpec, lam: float | None = None
            ) -> dict[Case, Superpotential | Exception]:
    """All listed cases of ``family``; failing builds are returned as their error."""
    out: dict[Case, Superpotential | Exception] = {}
    for case in LISTED_CASES[family]:
        try:
            out[case] = superpotential(family, case, params, lam)
        except (RiccatiMismatch, ParamOutOfRange) as exc:
            out[case] = exc
    return out


# --------------------------------------------------------------------------------------------
# ground-state classification


def _interior_point(a: float, b: float) -> float:
    if math.isfinite(a) and math.isfinite(b):
        return 0.5 * (a + b)
    if math.isfinite(a):
        return a + 1.0
    if math.isfinite(b):
        return b - 1.0
    return 0.0


def _end_behaviour(sp: Superpotential, x0: float, end: float, direction: int) -> int:
    """+1 if lam * int_x0^end phi -> +inf, -1 if -> -inf; Indeterminate if it converges."""

    nodes, weights = gauss_legendre(32)
    if math.isfinite(end):
        gap = abs(end - x0)
        marks = [end - direction * gap * 2.0 ** -k for k in range(0, 31)]
    else:
        marks = [x0 + direction * 2.0 ** k for k in range(0, 9)]
    incs = []
    # each shell is smooth on its own scale, so one fixed Gauss rule per shell suffices
    for t0, t1 in zip(marks[:-1], marks[1:]):
        half = 0.5 * (t1 - t0)
        xs = 0.5 * (t0 + t1) + half * nodes
        with np.errstate(all="ignore"):
            incs.append(sp.lam * half * float(np.dot(weights, np.real(sp.phi(xs)))))
    tail = incs[-4:]
    signs = {int(np.sign(v)) for v in tail}
    ratios = [abs(tail[i + 1]) / abs(tail[i]) for i in range(len(tail) - 1) if tail[i] != 0]
    if len(signs) == 1 and 0 not in signs and ratios and min(ratios) >= 0.9:
        return signs.pop()
    if ratios and max(ratios) <= 0.75:
        raise Indeterminate(f"{sp.label}: int phi converges toward x = {end}")
    raise Indeterminate(f"{sp.label}: marginal growth of int phi toward x = {end}")


def ground_state_vanishes(sp: Superpotential) -> tuple[bool, bool]:
    """Whether exp(-lam int phi) vanishes at the (left, right) domain ends."""
    a, b = sp.domain
    x0 = _interior_point(a, b)
    left = _end_behaviour(sp, x0, a, -1)
    right = _end_behaviour(sp, x0, b, +1)
    return left > 0, right > 0


def classify_susy_case(sp: Superpotential) -> Case:
    """1: vanishes at both ends; 2: at the left end only; 3: at the right only; 4: at neither."""
    left, right = ground_state_vanishes(sp)
    if left and right:
        return Case.EXACT_1
    if left:
        return Case.BROKEN_2
    if right:
        return Case.BROKEN_3
    return Case.BROKEN_4


# --------------------------------------------------------------------------------------------
# residue at infinity


def _newton_inverse(sp: Superpotential, target: complex, x: complex) -> complex:
    for _ in range(50):
        with np.errstate(all="ignore"):
            g = sp.phi(x) - target
            d = sp.dphi(x)
        step = g / d
        x = x - step
        if abs(step) <= 1e-14 * max(1.0, abs(x)):
            break
    return complex(x)


def _sheet_loop(sp: Superpotential, inf: Infinity, radius: float, points: int) -> tuple[np.ndarray, np.ndarray]:
    """Preimage x(theta) of phi = radius e^{i theta}, theta in [theta0, theta0 + 2 pi)."""
    if inf.side in ("left", "right"):
        # start on the real axis inside the domain, where phi has a definite sign
        theta0 = 0.0 if inf.real_sign() > 0 else math.pi
    else:
        # start at the loop point closest to the real axis
        thetas = np.linspace(0.0, 2.0 * math.pi, 64, endpoint=False)
        guesses = [inf.approx_x(radius * np.exp(1j * t)) for t in thetas]
        theta0 = float(thetas[int(np.argmin([abs(g.imag) for g in guesses]))])
    thetas = theta0 + 2.0 * math.pi * np.arange(points) / points
    xs = np.empty(points, dtype=complex)
    x = inf.approx_x(radius * np.exp(1j * theta0))
    for j, t in enumerate(thetas):
        x = _newton_inverse(sp, radius * np.exp(1j * t), x)
        xs[j] = x
    return thetas, xs


def _reference_point(sp: Superpotential, e_tilde: float) -> float:
    """A real point right of the well where both radicands are positive."""
    a, b = sp.domain
    right = [inf for inf in sp.infinities if inf.side == "right"]
    if right:
        inf = right[0]
        return float(inf.approx_x(8.0 * math.sqrt(max(abs(e_tilde), 1.0)) * inf.real_sign()).real)
    # phi stays finite to the right: walk out until phi^2 - E~ is safely positive
    x = _interior_point(a, b)
    for _ in range(200):
        x = x + 0.5 if not math.isfinite(b) else 0.5 * (x + b)
        if np.real(sp.phi(x)) ** 2 - e_tilde > 0.25 * abs(e_tilde) + 1e-3 and x > 6.0:
            return x
    return x


def _branch_path(x_ref: complex, start: complex, inf: Infinity, height: float) -> np.ndarray:
    """Polyline from the reference point to the loop start along the upper half of K."""
    if inf.side == "left":
        corners = [x_ref, x_ref + 1j * height, start.real + 1j * height, start]
    elif inf.side == "right":
        corners = [x_ref, start]
    else:
        corners = [x_ref, complex(x_ref.real, start.imag), start]
    pts = [corners[0]]
    for p, q in zip(corners[:-1], corners[1:]):
        n = max(2, int(abs(q - p) / 0.01))
        pts.extend(p + (q - p) * np.linspace(0.0, 1.0, n + 1)[1:])
    return np.asarray(pts, dtype=complex)


def _track(values: np.ndarray, start: complex) -> np.ndarray:
    """Continue sqrt(values) from the branch value ``start`` at values[0]."""
    out, _ = continue_sqrt(np.asarray(values, dtype=complex), start)
    return out


def loop_integral(sp: Superpotential, inf: Infinity, f1: Callable, e_tilde: float, radius: float,
                  points: int = LOOP_POINTS, height: float = 0.25) -> complex:
    """Integral of [sqrt(phi^2 - F1/lam - E~) - sqrt(phi^2 - E~)] dphi/F2 on one sheet.

    The circle |phi| = radius is run clockwise in phi; branches are continued
    from a real point right of the well where both roots are positive.
    """
    lam = sp.lam
    thetas, xs = _sheet_loop(sp, inf, radius, points)
    x_ref = complex(_reference_point(sp, e_tilde))
    path = _branch_path(x_ref, xs[0], inf, height)

    def radicands(x):
        with np.errstate(all="ignore"):
            ph = sp.phi(x)
            return ph * ph - f1(x) / lam - e_tilde, ph * ph - e_tilde

    r1_path, r0_path = radicands(path)
    if not (r1_path[0].real > 0 and r0_path[0].real > 0):
        raise NotConverged(f"{sp.label}: radicands not positive at the reference point {x_ref.real:.6g}")
    s1 = _track(r1_path, np.sqrt(r1_path[0]))[-1]
    s0 = _track(r0_path, np.sqrt(r0_path[0]))[-1]
    r1, r0 = radicands(xs)
    root1 = _track(r1, s1)
    root0 = _track(r0, s0)
    # dphi / F2 = dx; trapezoid in theta on the closed (or periodic) loop
    dphi = 1j * radius * np.exp(1j * thetas)
    with np.errstate(all="ignore"):
        dx = dphi / sp.dphi(xs)
    integrand = (root1 - root0) * dx
    return -complex(np.sum(integrand) * (2.0 * math.pi / points))


def f_residue_at_infinity(sp: Superpotential, variant: Variant | str, e_tilde: float,
                          radii: tuple[float, ...] = RADII, tol: float = RESIDUE_TOL,
                          f1: Callable | None = None) -> complex:
    """Sheet average of the large-circle integrals for the PLUS or MINUS partner.

    Returns the value at the largest radius after checking the last two radii
    agree within ``tol``.  ``f1`` overrides the partner's F1 (for checks).
    """
    variant = Variant(variant)
    if f1 is None:
        def f1(x, _v=variant):
            return sp.f1(x, _v)
    vals = []
    for r in radii:
        total = sum(loop_integral(sp, inf, f1, e_tilde, r) for inf in sp.infinities)
        vals.append(total / len(sp.infinities))
    if len(vals) >= 2 and abs(vals[-1] - vals[-2]) > tol:
        raise NotConverged(f"{sp.label}: residue {vals[-2]} vs {vals[-1]} across radii {radii[-2:]}",
                           values=[complex(v) for v in vals])
    return complex(vals[-1])


def leading_coefficients(sp: Superpotential, radius: float = 40.0, points: int = LOOP_POINTS,
                         variant: Variant = Variant.MINUS) -> list[dict[str, complex]]:
    """Coefficients a, b, c of phi^0, phi^1, phi^2 in F1 and F2, one dict per sheet."""
    out = []
    for inf in sp.infinities:
        thetas, xs = _sheet_loop(sp, inf, radius, points)
        ph = radius * np.exp(1j * thetas)
        with np.errstate(all="ignore"):
            funcs = {"1": sp.f1(xs, variant), "2": sp.dphi(xs)}
        row = {}
        for tag, vals in funcs.items():
            for name, k in (("a", 0), ("b", 1), ("c", 2)):
                row[f"{name}{tag}"] = complex(np.mean(vals * ph ** (-k)))
        out.append(row)
    return out


# --------------------------------------------------------------------------------------------
# level shifts


@dataclass
class ShiftReport:
    shift: Shift
    max_rel_diff: float
    first_m: int
    pairs: list[tuple[int, float, float]]
    candidates: dict[str, float]

    def to_json(self) -> dict:
        return {"shift": self.shift.value, "max_rel_diff": self.max_rel_diff, "first_m": self.first_m,
                "pairs": [{"m": m, "swkb": a, "jwkb": b} for m, a, b in self.pairs],
                "candidates": self.candidates}


def verify_level_shift(spec: PotentialSpec, sp: Superpotential, m_max: int, tol: float = 1e-6) -> ShiftReport:
    """Fit E_swkb(m) = E_jwkb(m - s) for s in {0, 1/2, 1}; the smallest misfit wins."""
    from .quantize import swkb_spectrum, wkb_spectrum

    swkb = swkb_spectrum(sp, m_max)
    if not swkb.levels:
        raise NoConstantShift(f"{sp.label}: SWKB condition gives no levels")
    whole = wkb_spectrum(spec, m_max + 1).by_m()
    half = wkb_spectrum(spec, m_max, offset=0.5).by_m()
    cands: dict[str, float] = {}
    best = None
    for shift in Shift:
        s = SHIFT_VALUE[shift]
        pairs = []
        for lv in swkb.levels:
            if s == 0.5:
                ref = half.get(lv.m - 1)
            else:
                ref = whole.get(lv.m - int(s))
            if ref is not None:
                pairs.append((lv.m, lv.E, ref.E))
        if not pairs:
            continue
        err = max(abs(a - b) / max(1.0, abs(b)) for _, a, b in pairs)
        cands[shift.value] = err
        if best is None or err < best[1]:
            best = (shift, err, pairs)
    if best is None or best[1] > tol:
        raise NoConstantShift(f"{sp.label}: best misfit {None if best is None else best[1]:.3g}",
                              candidates=cands)
    return ShiftReport(best[0], best[1], swkb.notes.get("first_m", 0), best[2], cands)


__all__ = [
    "Case", "Shift", "Variant", "Infinity", "Superpotential", "ShiftReport", "FAMILY_OF", "LISTED_CASES",
    "SHIFT_OF_CASE", "superpotential", "catalog", "riccati_residual", "derivative_residual",
    "classify_susy_case", "ground_state_vanishes", "f_residue_at_infinity", "loop_integral",
    "leading_coefficients", "verify_level_shift", "NoBoundWindow",
]
