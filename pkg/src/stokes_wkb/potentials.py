"""Catalog of one-dimensional potentials and the corrected function q~.

For a catalog member with potential ``V`` and Langer term ``delta`` the
central object is

    q~(x, E, lam) = V(x) + delta(x) / lam**2 - E

evaluated at complex ``x``.  Every family is a rational function of one
"uniformizing" variable ``u`` (``u = x``, ``u = exp(x)`` or ``u = exp(i x)``),
which is what makes its complex roots computable from polynomial roots.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable, Mapping

import numpy as np
from scipy import optimize

from .errors import DegenerateRoot, NoBoundWindow, ParamOutOfRange, PoleHit, UnsupportedMap

ROOT_TOL = 1e-10
ROOT_MERGE_TOL = 1e-8
POLE_GUARD = 1e-8

TWO_PI = 2.0 * math.pi


class Kind(str, Enum):
    TURNING_POINT = "TURNING_POINT"
    SIMPLE_POLE = "SIMPLE_POLE"
    DOUBLE_POLE = "DOUBLE_POLE"
    HIGHER_POLE = "HIGHER_POLE"
    INFINITY_POINT = "INFINITY_POINT"


class EndKind(str, Enum):
    REGULAR = "regular"
    POLE2 = "second-order pole"
    HIGHER = "higher pole"
    INFINITY = "infinity"


@dataclass(frozen=True)
class CriticalPoint:
    location: complex
    kind: Kind
    order: int = 0
    strip_index: int = 0
    real: bool = False
    label: str = ""

    def to_json(self) -> dict:
        return {
            "location": [self.location.real, self.location.imag],
            "kind": self.kind.value,
            "order": self.order,
            "strip_index": self.strip_index,
            "real": self.real,
            "label": self.label,
        }


@dataclass(frozen=True)
class Domain:
    a: float
    b: float
    kind_a: EndKind
    kind_b: EndKind


# ----- family definitions -----


@dataclass(frozen=True)
class FamilyDef:
    name: str
    params: tuple[str, ...]
    defaults: Mapping[str, float]
    potential: Callable  # (x, p) -> V
    delta: Callable | None  # (x, p) -> delta, without the 1/lam**2
    check: Callable  # (p) -> list of violated inequalities
    domain: Callable  # (p) -> (a, b, kind_a, kind_b)
    uvar: str  # "x" | "exp" | "expi"
    denominator: Callable  # (u, p) -> D(u); q~(x(u)) D(u) is a polynomial in u
    degree: int
    poles: Callable  # (p) -> list of (location, order) in the basic strip
    exp_sum: Callable | None = None  # (p) -> {n: coefficient} of V
    exact: bool | None = None
    param_map: Callable | None = None  # alias parameter renaming

    @property
    def period(self) -> complex | None:
        if self.uvar == "exp":
            return TWO_PI * 1j
        if self.uvar == "expi":
            return complex(TWO_PI)
        return None


def _need(cond: bool, text: str, out: list):
    if not cond:
        out.append(text)


def _exp(x):
    return np.exp(x)


# Morse-type exponential sums -------------------------------------------------

def _morse_v(x, p):
    u = _exp(x)
    return p["alpha"] * u * u - 2.0 * p["beta"] * u


def _morse_check(p):
    out: list = []
    _need(p["alpha"] > 0, "alpha > 0", out)
    _need(p["beta"] > 0, "beta > 0", out)
    return out


def _q1_v(x, p):
    u = _exp(x)
    return p["alpha"] ** 2 * u * u - 2.0 * p["beta"] * u


def _q1_check(p):
    out: list = []
    _need(p["alpha"] != 0, "alpha != 0", out)
    _need(p["beta"] > 0, "beta > 0", out)
    return out


def _expwell_v(x, p):
    u = _exp(x)
    return p["alpha"] * u + p["gamma"] / u - 2.0 * p["beta"]


def _expwell_check(p):
    out: list = []
    for k in ("alpha", "beta", "gamma"):
        _need(p[k] > 0, f"{k} > 0", out)
    return out


def _cubic_v(x, p):
    u = _exp(x)
    a, bp, bm, g = p["alpha"], p["beta_plus"], p["beta_minus"], p["gamma"]
    return a * (u - bp) * (u - bm) * (u + g) - a * bp * bm * g


def _expwell2_v(x, p):
    u = _exp(x)
    a, bp, bm, g = p["alpha"], p["beta_plus"], p["beta_minus"], p["gamma"]
    return a * (u - bp) * (u - bm) * (1.0 / u + g) - a * bp * bm * g


def _cubic_check(p):
    out: list = []
    _need(p["alpha"] > 0, "alpha > 0", out)
    _need(p["beta_plus"] > p["beta_minus"] > 0, "beta_plus > beta_minus > 0", out)
    _need(p["gamma"] > 0, "gamma > 0", out)
    return out


def _cubic_sum(p):
    a, bp, bm, g = p["alpha"], p["beta_plus"], p["beta_minus"], p["gamma"]
    return {3: a, 2: a * (g - bp - bm), 1: a * (bp * bm - g * (bp + bm)), 0: 0.0}


def _expwell2_sum(p):
    a, bp, bm, g = p["alpha"], p["beta_plus"], p["beta_minus"], p["gamma"]
    return {2: a * g, 1: a * (1.0 - g * (bp + bm)), 0: -a * (bp + bm), -1: a * bp * bm}


# simple poles off the real axis (first hyperbolic family with a != pi) ---------

def _spp_v(x, p):
    return (p["alpha1"] * _exp(x) + p["beta1"]) / (np.cosh(x) - math.cos(p["a"]))


def _spp_check(p):
    out: list = []
    _need(p["alpha1"] > 0 > p["beta1"], "alpha1 > 0 > beta1", out)
    _need(0 < p["a"] < math.pi, "0 < a < pi", out)
    return out


# simple pole at the origin (first half-line hyperbolic family) -----------------

def _sinhpole_v(x, p):
    return (p["alpha1"] * _exp(x) + p["beta1"]) / np.sinh(x)


def _sinhpole_delta(x, p):
    return 0.25 / np.sinh(x) ** 2


def _sinhpole_check(p):
    out: list = []
    _need(p["beta1"] < 0, "beta1 < 0", out)
    _need(-p["beta1"] < p["alpha1"], "-beta1 < alpha1", out)
    return out


# algebraic families ------------------------------------------------------------

def _harm_v(x, p):
    return p["alpha"] ** 2 * x * x


def _coulomb_v(x, p):
    return -p["alpha"] / x + p["beta"] / (x * x)


def _inv_sq_delta(x, p):
    return 0.25 / (x * x)


def _coulomb_check(p):
    out: list = []
    _need(p["alpha"] > 0, "alpha > 0", out)
    _need(p["beta"] > 0, "beta > 0", out)
    return out


def _radial_v(x, p):
    return p["alpha"] ** 2 * x * x + p["beta"] / (x * x)


def _radial_check(p):
    out: list = []
    _need(p["alpha"] != 0, "alpha != 0", out)
    _need(p["beta"] > 0, "beta > 0", out)
    return out


def _invquartic_v(x, p):
    x2 = x * x
    return p["alpha"] / (x2 * x2) - p["beta"] / x2


def _invquartic_check(p):
    out: list = []
    _need(p["alpha"] > 0, "alpha > 0", out)
    _need(p["beta"] > 0, "beta > 0", out)
    return out


# hyperbolic catalog -------------------------------------------------------------

def _q4_v(x, p):
    return (p["alpha"] * _exp(x) - p["beta"]) / np.cosh(0.5 * x) ** 2


def _q4_delta(x, p):
    return -1.0 / (16.0 * np.cosh(0.5 * x) ** 2)


def _q4_check(p):
    out: list = []
    _need(p["beta"] > 0, "beta > 0", out)
    _need(-p["beta"] < 2.0 * p["alpha"], "-beta < 2 alpha", out)
    return out


def _q5_v(x, p):
    return (p["alpha"] * _exp(x) + p["beta"]) / np.sinh(0.5 * x) ** 2


def _sinh_half_delta(x, p):
    return 1.0 / (16.0 * np.sinh(0.5 * x) ** 2)


def _q5_check(p):
    a, b = p["alpha"], p["beta"]
    out: list = []
    _need(b > 0, "beta > 0", out)
    _need(a + b > 0, "alpha + beta > 0", out)
    _need(0 > 2 * a + b, "0 > 2 alpha + beta", out)
    return out


def _q6_v(x, p):
    return p["beta"] / np.sinh(0.5 * x) ** 2 - p["alpha"] / np.cosh(0.5 * x) ** 2


def _q6_delta(x, p):
    return 1.0 / (16.0 * np.sinh(0.5 * x) ** 2) - 1.0 / (16.0 * np.cosh(0.5 * x) ** 2)


def _q6_check(p):
    out: list = []
    _need(p["alpha"] > 0, "alpha > 0", out)
    _need(p["beta"] > 0, "beta > 0", out)
    return out


# trigonometric catalog ----------------------------------------------------------

def _q7_v(x, p):
    return p["alpha"] / np.cos(0.5 * x) ** 2


def _q7_delta(x, p):
    return 1.0 / (16.0 * np.cos(0.5 * x) ** 2)


def _q7_check(p):
    out: list = []
    _need(p["alpha"] > 0, "alpha > 0", out)
    return out


def _q8_v(x, p):
    return p["alpha"] / np.cos(0.5 * x) ** 2 + p["beta"] / np.sin(0.5 * x) ** 2


def _q8_delta(x, p):
    return 1.0 / (16.0 * np.cos(0.5 * x) ** 2) + 1.0 / (16.0 * np.sin(0.5 * x) ** 2)


def _v9_v(x, p):
    return (p["alpha"] + p["beta"] * np.sin(x)) / np.cos(x) ** 2


def _v9_delta(x, p):
    return 0.25 / np.cos(x) ** 2


def _v9_check(p):
    out: list = []
    _need(p["alpha"] > p["beta"] > 0, "alpha > beta > 0", out)
    return out


def _v10_v(x, p):
    return (p["alpha"] + p["beta"] * np.sinh(x)) / np.cosh(x) ** 2


def _v10_delta(x, p):
    return -0.25 / np.cosh(x) ** 2


def _v10_check(p):
    out: list = []
    _need(p["beta"] > 0, "beta > 0", out)
    return out


_INF = math.inf
_REAL_LINE = lambda p: (-_INF, _INF, EndKind.INFINITY, EndKind.INFINITY)  # noqa: E731
_HALF_LINE = lambda p: (0.0, _INF, EndKind.POLE2, EndKind.INFINITY)  # noqa: E731


def _def(name, params, potential, check, domain, uvar, denominator, degree, poles, **kw):
    defaults = kw.pop("defaults", {})
    return FamilyDef(name, tuple(params), defaults, potential, kw.pop("delta", None), check, domain,
                     uvar, denominator, degree, poles, **kw)


_ONE = lambda u, p: np.ones_like(u)  # noqa: E731
_NOPOLES = lambda p: []  # noqa: E731

_FAMILIES: dict[str, FamilyDef] = {}


def _register(fd: FamilyDef, *aliases: str):
    _FAMILIES[fd.name] = fd
    for alias in aliases:
        _FAMILIES[alias] = fd


_register(_def("MORSE", ["alpha", "beta"], _morse_v, _morse_check, _REAL_LINE, "exp", _ONE, 2, _NOPOLES,
               exp_sum=lambda p: {2: p["alpha"], 1: -2.0 * p["beta"], 0: 0.0}, exact=True))
_register(_def("Q1", ["alpha", "beta"], _q1_v, _q1_check, _REAL_LINE, "exp", _ONE, 2, _NOPOLES,
               exp_sum=lambda p: {2: p["alpha"] ** 2, 1: -2.0 * p["beta"], 0: 0.0}, exact=True))
_register(_def("EXP_WELL", ["alpha", "beta", "gamma"], _expwell_v, _expwell_check, _REAL_LINE, "exp",
               lambda u, p: u, 2, _NOPOLES,
               exp_sum=lambda p: {1: p["alpha"], 0: -2.0 * p["beta"], -1: p["gamma"]}, exact=False))
_register(_def("CUBIC_EXP", ["alpha", "beta_plus", "beta_minus", "gamma"], _cubic_v, _cubic_check,
               _REAL_LINE, "exp", _ONE, 3, _NOPOLES, exp_sum=_cubic_sum, exact=False))
_register(_def("EXP_WELL_2", ["alpha", "beta_plus", "beta_minus", "gamma"], _expwell2_v, _cubic_check,
               _REAL_LINE, "exp", lambda u, p: u, 3, _NOPOLES, exp_sum=_expwell2_sum, exact=False))
_register(_def("SIMPLE_POLE_PAIR", ["alpha1", "beta1", "a"], _spp_v, _spp_check, _REAL_LINE, "exp",
               lambda u, p: u * u - 2.0 * math.cos(p["a"]) * u + 1.0, 2,
               lambda p: [(1j * p["a"], 1), (-1j * p["a"], 1)], exact=False))
_register(_def("SINH_POLE", ["alpha1", "beta1"], _sinhpole_v, _sinhpole_check,
               lambda p: (0.0, _INF, EndKind.POLE2, EndKind.INFINITY), "exp",
               lambda u, p: (u * u - 1.0) ** 2, 4, lambda p: [(0j, 2), (1j * math.pi, 2)],
               delta=_sinhpole_delta, exact=False))
_register(_def("HARMONIC", ["alpha"], _harm_v, lambda p: [] if p["alpha"] != 0 else ["alpha != 0"],
               _REAL_LINE, "x", _ONE, 2, _NOPOLES, defaults={"alpha": 1.0}, exact=True))
_register(_def("COULOMB", ["alpha", "beta"], _coulomb_v, _coulomb_check, _HALF_LINE, "x",
               lambda u, p: u * u, 2, lambda p: [(0j, 2)], delta=_inv_sq_delta, exact=True), "Q2")
_register(_def("RADIAL_HARMONIC", ["alpha", "beta"], _radial_v, _radial_check, _HALF_LINE, "x",
               lambda u, p: u * u, 4, lambda p: [(0j, 2)], delta=_inv_sq_delta, exact=True), "Q3")
_register(_def("INVERSE_QUARTIC", ["alpha", "beta"], _invquartic_v, _invquartic_check,
               lambda p: (0.0, _INF, EndKind.HIGHER, EndKind.INFINITY), "x", lambda u, p: u ** 4, 4,
               lambda p: [(0j, 4)], exact=None))
_register(_def("Q4", ["alpha", "beta"], _q4_v, _q4_check, _REAL_LINE, "exp", lambda u, p: (u + 1.0) ** 2, 2,
               lambda p: [(1j * math.pi, 2)], delta=_q4_delta, exact=True), "ROSEN_MORSE")
_register(_def("Q5", ["alpha", "beta"], _q5_v, _q5_check, _HALF_LINE, "exp", lambda u, p: (u - 1.0) ** 2, 2,
               lambda p: [(0j, 2)], delta=_sinh_half_delta, exact=True))
_register(_def("Q6", ["alpha", "beta"], _q6_v, _q6_check, _HALF_LINE, "exp",
               lambda u, p: (u * u - 1.0) ** 2, 4, lambda p: [(0j, 2), (1j * math.pi, 2)],
               delta=_q6_delta, exact=True))
_register(_def("POSCHL_TELLER", ["beta", "beta_prime"], _q6_v, _q6_check, _HALF_LINE, "exp",
               lambda u, p: (u * u - 1.0) ** 2, 4, lambda p: [(0j, 2), (1j * math.pi, 2)],
               delta=_q6_delta, exact=True,
               param_map=lambda p: {"alpha": p["beta_prime"], "beta": p["beta"]}))
_register(_def("Q7", ["alpha"], _q7_v, _q7_check,
               lambda p: (-math.pi, math.pi, EndKind.POLE2, EndKind.POLE2), "expi", lambda u, p: (u + 1.0) ** 2, 2,
               lambda p: [(complex(math.pi), 2)], delta=_q7_delta, exact=True))
_register(_def("Q8", ["alpha", "beta"], _q8_v, _q6_check,
               lambda p: (0.0, math.pi, EndKind.POLE2, EndKind.POLE2), "expi",
               lambda u, p: (u * u - 1.0) ** 2, 4, lambda p: [(0j, 2), (complex(math.pi), 2)],
               delta=_q8_delta, exact=True))
_register(_def("SCARF_TRIG", ["alpha", "beta"], _v9_v, _v9_check,
               lambda p: (-0.5 * math.pi, 0.5 * math.pi, EndKind.POLE2, EndKind.POLE2), "expi",
               lambda u, p: (u * u + 1.0) ** 2, 4,
               lambda p: [(complex(0.5 * math.pi), 2), (complex(-0.5 * math.pi), 2)],
               delta=_v9_delta, exact=True), "V9")
_register(_def("SCARF_HYP", ["alpha", "beta"], _v10_v, _v10_check, _REAL_LINE, "exp",
               lambda u, p: (u * u + 1.0) ** 2, 4, lambda p: [(0.5j * math.pi, 2), (-0.5j * math.pi, 2)],
               delta=_v10_delta, exact=True), "V10")


def family_names() -> list[str]:
    return sorted(_FAMILIES)


def family_def(name: str) -> FamilyDef:
    try:
        return _FAMILIES[name.upper()]
    except KeyError:
        raise ParamOutOfRange(f"unknown family {name!r}") from None


# ----- spec -----


@dataclass(frozen=True)
class ExtraDelta:
    """Additional ``amplitude / sinh((x - center)/2)**2`` term added to q~."""

    amplitude: float
    center: float

    def __call__(self, x):
        return self.amplitude / np.sinh(0.5 * (x - self.center)) ** 2


@dataclass(frozen=True)
class PotentialSpec:
    family: str
    params: Mapping[str, float]
    lam: float
    extra_delta: tuple[ExtraDelta, ...] = ()
    _internal: Mapping[str, float] = field(default_factory=dict, compare=False, repr=False)

    @property
    def fdef(self) -> FamilyDef:
        return family_def(self.family)

    @property
    def internal_params(self) -> Mapping[str, float]:
        return self._internal

    @property
    def domain(self) -> Domain:
        a, b, ka, kb = self.fdef.domain(self._internal)
        return Domain(a, b, ka, kb)

    @property
    def period(self) -> complex | None:
        return self.fdef.period

    @property
    def has_delta(self) -> bool:
        return self.fdef.delta is not None or bool(self.extra_delta)

    def V(self, x):
        return self.fdef.potential(x, self._internal)

    def delta(self, x):
        fd = self.fdef
        out = fd.delta(x, self._internal) if fd.delta is not None else 0.0 * x
        for term in self.extra_delta:
            out = out + term(x) * self.lam ** 2
        return out

    def v_eff(self, x):
        """V + delta/lam**2 (the E-independent part of q~)."""
        return self.V(x) + self.delta(x) / self.lam ** 2

    def q(self, x, E: float):
        return self.v_eff(x) - E

    def to_json(self) -> dict:
        doc = {"family": self.family, "params": dict(sorted(self.params.items())), "lambda": self.lam}
        if self.extra_delta:
            doc["extra_delta"] = [{"amplitude": t.amplitude, "center": t.center} for t in self.extra_delta]
        return doc

    def params_hash(self) -> str:
        import hashlib

        blob = json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:12]


def make_potential(family: str, params: Mapping[str, float] | None = None, lam: float = 1.0,
                   extra_delta: Iterable[ExtraDelta | Mapping] = ()) -> PotentialSpec:
    """Build and validate a catalog member."""
    fd = family_def(family)
    given = dict(fd.defaults)
    given.update({k: float(v) for k, v in (params or {}).items()})
    missing = [k for k in fd.params if k not in given]
    if missing:
        raise ParamOutOfRange(f"{fd.name}: missing parameters {missing}")
    unknown = sorted(set(given) - set(fd.params))
    if unknown:
        raise ParamOutOfRange(f"{fd.name}: unknown parameters {unknown}")
    if not (lam > 0 and math.isfinite(lam)):
        raise ParamOutOfRange("lambda > 0 violated", inequality="lambda > 0")
    internal = fd.param_map(given) if fd.param_map else dict(given)
    violated = fd.check(internal)
    if violated:
        raise ParamOutOfRange(f"{fd.name}: violated {', '.join(violated)}", inequality=violated[0])
    extras = tuple(t if isinstance(t, ExtraDelta) else ExtraDelta(float(t["amplitude"]), float(t["center"]))
                   for t in extra_delta)
    spec = PotentialSpec(family.upper(), dict(sorted(given.items())), float(lam), extras, internal)
    # the computable bound-state condition: some E gives exactly two simple
    # real turning points with q~ < 0 between them
    try:
        real_well(spec).window()
    except NoBoundWindow as exc:
        raise ParamOutOfRange(f"{fd.name}: no bound-state window ({exc})",
                              inequality="two simple real turning points") from None
    return spec


def spec_from_json(doc: Mapping) -> PotentialSpec:
    return make_potential(doc["family"], doc.get("params", {}), doc.get("lambda", 1.0), doc.get("extra_delta", ()))


# ----- evaluation -----


def pole_lattice(spec: PotentialSpec, copies: int = 2) -> np.ndarray:
    """Poles of q~ in the basic strip and ``copies`` periods either side."""
    base = [complex(z) for z, _ in spec.fdef.poles(spec._internal)]
    for t in spec.extra_delta:
        base.append(complex(t.center))
    per = spec.period
    if per is None or not base:
        return np.array(base, dtype=complex)
    shifts = np.arange(-copies, copies + 1)
    return (np.array(base)[:, None] + per * shifts[None, :]).ravel()


def _distance_to_poles(spec: PotentialSpec, x) -> np.ndarray:
    poles = pole_lattice(spec)
    x = np.asarray(x, dtype=complex)
    if poles.size == 0:
        return np.full(x.shape, np.inf)
    per = spec.period
    if per is not None:
        # fold x into the basic strip before measuring
        if per.imag:
            k = np.round(x.imag / per.imag)
            x = x - 1j * per.imag * k
        else:
            k = np.round(x.real / per.real)
            x = x - per.real * k
    return np.min(np.abs(x[..., None] - poles), axis=-1)


def evaluate_q(spec: PotentialSpec, E: float, x) -> complex | np.ndarray:
    """q~(x, E, lam) at complex ``x`` (scalar or array)."""
    arr = np.asarray(x, dtype=complex)
    if np.any(_distance_to_poles(spec, arr) < POLE_GUARD):
        raise PoleHit(f"x within {POLE_GUARD} of a pole", x=x)
    out = spec.q(arr, E)
    return complex(out) if np.ndim(out) == 0 else out


def q_derivatives(spec: PotentialSpec, E: float, x, orders: int = 2, points: int = 24):
    """q~ and its first ``orders`` derivatives via Cauchy's formula.

    Returns an array of shape ``(orders + 1,) + x.shape``.
    """
    x = np.asarray(x, dtype=complex)
    dist = _distance_to_poles(spec, x)
    r = np.minimum(0.05, 0.25 * dist)
    theta = TWO_PI * np.arange(points) / points
    ring = np.exp(1j * theta)
    z = x[..., None] + r[..., None] * ring
    vals = spec.q(z, E)
    out = [spec.q(x, E)]
    for k in range(1, orders + 1):
        coeff = np.mean(vals * ring ** (-k), axis=-1) / r ** k
        out.append(math.factorial(k) * coeff)
    return np.array(out)


# ----- complex roots -----


def _u_of_x(fd: FamilyDef, x):
    if fd.uvar == "exp":
        return np.exp(x)
    if fd.uvar == "expi":
        return np.exp(1j * x)
    return x


def _x_of_u(fd: FamilyDef, u):
    if fd.uvar == "exp":
        return np.log(u)
    if fd.uvar == "expi":
        return -1j * np.log(u)
    return u


def numerator_coefficients(spec: PotentialSpec, E: float) -> np.ndarray:
    """Coefficients (highest power first) of P(u) = q~(x(u)) D(u).

    Obtained by sampling on a circle and a discrete Fourier transform, which
    is exact for a polynomial of the declared degree.
    """
    fd = spec.fdef
    deg = fd.degree + 2 * len(spec.extra_delta)
    n = 4 * (deg + 1)
    pole_u = np.abs(_u_of_x(fd, pole_lattice(spec, copies=0))) if fd.uvar != "x" else np.abs(pole_lattice(spec, 0))
    radius = 1.37
    for trial in (1.37, 0.71, 2.3, 0.43, 3.1):
        if pole_u.size == 0 or np.min(np.abs(pole_u - trial)) > 0.05:
            radius = trial
            break
    u = radius * np.exp(1j * TWO_PI * np.arange(n) / n)
    x = _x_of_u(fd, u)
    samples = spec.q(x, E) * fd.denominator(u, spec._internal)
    for t in spec.extra_delta:
        # clear the extra double pole at u0 = exp(center)
        u0 = np.exp(t.center)
        samples = samples * (u - u0) ** 2
    c = np.fft.fft(samples) / n / radius ** np.arange(n)
    c = c[: deg + 1]
    scale = np.max(np.abs(c))
    c[np.abs(c) < 1e-13 * scale] = 0.0
    while c.size > 1 and c[-1] == 0:
        c = c[:-1]
    return c[::-1]


def _polish(spec, E, x0, steps=30):
    x = complex(x0)
    for _ in range(steps):
        d = q_derivatives(spec, E, np.array([x]), orders=1)
        f, fp = complex(d[0][0]), complex(d[1][0])
        if fp == 0:
            break
        dx = f / fp
        x -= dx
        if abs(dx) < 1e-15 * max(1.0, abs(x)):
            break
    return x


def _strip_index(fd: FamilyDef, x: complex) -> int:
    if fd.uvar == "exp":
        return int(math.floor((x.imag + math.pi) / TWO_PI))
    if fd.uvar == "expi":
        return int(math.floor((x.real + math.pi) / TWO_PI))
    return 0


def find_turning_points(spec: PotentialSpec, E: float, strip=None) -> list[CriticalPoint]:
    """Simple roots of q~ in the basic strip (or the rectangle ``strip``).

    ``strip`` is ``(re_min, re_max, im_min, im_max)``.  The two real turning
    points bounding the classically allowed interval are flagged ``real``.
    """
    fd = spec.fdef
    coeffs = numerator_coefficients(spec, E)
    roots_u = np.roots(coeffs) if coeffs.size > 1 else np.array([])
    base = []
    for u in roots_u:
        if fd.uvar != "x" and abs(u) < 1e-14:
            continue
        x = complex(_x_of_u(fd, u))
        if fd.uvar != "x" and abs(u) > 1e14:
            continue
        base.append(x)
    per = spec.period
    cands = []
    if strip is None:
        cands = base
    else:
        re0, re1, im0, im1 = strip
        if per is None:
            cands = base
        else:
            span = (im1 - im0) if per.imag else (re1 - re0)
            kmax = int(span / abs(per)) + 2
            for x in base:
                for k in range(-kmax, kmax + 1):
                    cands.append(x + k * per)
        cands = [x for x in cands if re0 <= x.real <= re1 and im0 <= x.imag <= im1]
    pts = []
    for x in cands:
        x = _polish(spec, E, x)
        if np.isfinite(_distance_to_poles(spec, np.array([x]))[0]) and \
                _distance_to_poles(spec, np.array([x]))[0] < 10 * POLE_GUARD:
            continue
        val = abs(spec.q(np.array([x]), E)[0])
        scale = max(1.0, abs(E), float(np.max(np.abs(coeffs))))
        if val > ROOT_TOL * scale * 1e3:
            continue  # spurious root of the cleared numerator
        pts.append(x)
    pts.sort(key=lambda z: (round(z.real, 12), round(z.imag, 12)))
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            if abs(pts[i] - pts[j]) < ROOT_MERGE_TOL:
                raise DegenerateRoot(f"roots {pts[i]} and {pts[j]} coincide", E=E)
    real_pair = set()
    try:
        lo, hi = real_well(spec).turning_points(E)
        for target in (lo, hi):
            k = int(np.argmin([abs(z - target) for z in pts])) if pts else -1
            if k >= 0 and abs(pts[k] - target) < 1e-6:
                real_pair.add(k)
    except (NoBoundWindow, ValueError):
        pass
    return [CriticalPoint(z, Kind.TURNING_POINT, 1, _strip_index(fd, z), i in real_pair) for i, z in enumerate(pts)]


def _infinity_points(spec: PotentialSpec) -> list[CriticalPoint]:
    fd = spec.fdef
    out = []
    a, b, ka, kb = fd.domain(spec._internal)
    if fd.uvar == "x":
        out.append(CriticalPoint(complex(_INF, 0), Kind.INFINITY_POINT, 0, 0, False, "x->inf"))
    elif fd.uvar == "exp":
        out.append(CriticalPoint(complex(_INF, 0), Kind.INFINITY_POINT, 0, 0, False, "Re x->+inf"))
        out.append(CriticalPoint(complex(-_INF, 0), Kind.INFINITY_POINT, 0, 0, False, "Re x->-inf"))
    else:
        out.append(CriticalPoint(complex(0, _INF), Kind.INFINITY_POINT, 0, 0, False, "Im x->+inf"))
        out.append(CriticalPoint(complex(0, -_INF), Kind.INFINITY_POINT, 0, 0, False, "Im x->-inf"))
    return out


def classify_singularities(spec: PotentialSpec) -> list[CriticalPoint]:
    """Poles of q~ in the basic strip with their orders, plus infinity points."""
    fd = spec.fdef
    out = []
    items = list(fd.poles(spec._internal)) + [(complex(t.center), 2) for t in spec.extra_delta]
    for z, order in sorted(items, key=lambda zo: (zo[0].real, zo[0].imag)):
        kind = {1: Kind.SIMPLE_POLE, 2: Kind.DOUBLE_POLE}.get(order, Kind.HIGHER_POLE)
        out.append(CriticalPoint(complex(z), kind, order, _strip_index(fd, complex(z))))
    return out + _infinity_points(spec)


# ----- real-line well geometry -----


class RealWell:
    """Geometry of ``h(x) - e`` on a real interval for the quantizers.

    ``h`` is real on the open interval (a, b).  ``window()`` gives the energy
    range with exactly two simple real roots and ``h < e`` between them.
    """

    def __init__(self, h: Callable, a: float, b: float, samples: int = 6001):
        self.h = h
        self.a, self.b = a, b
        lo = a if math.isfinite(a) else -60.0
        hi = b if math.isfinite(b) else 60.0
        if math.isfinite(a) and math.isfinite(b):
            t = np.linspace(0.0, 1.0, samples)[1:-1]
            # cluster toward finite singular ends
            s = 0.5 - 0.5 * np.cos(math.pi * t)
            xs = lo + (hi - lo) * s
        elif math.isfinite(a):
            t = np.linspace(0.0, 1.0, samples)[1:]
            xs = lo + (hi - lo) * t ** 2
        elif math.isfinite(b):
            t = np.linspace(0.0, 1.0, samples)[1:]
            xs = hi - (hi - lo) * t[::-1] ** 2
        else:
            xs = np.linspace(lo, hi, samples)
        with np.errstate(all="ignore"):
            vals = np.real(np.asarray(h(xs), dtype=complex))
        ok = np.isfinite(vals)
        self.xs, self.vals = xs[ok], vals[ok]
        if self.xs.size < 3:
            raise NoBoundWindow("potential not finite on the sampling grid")
        self._window = None

    def _eval(self, x: float) -> float:
        return float(np.real(self.h(np.array([x], dtype=float))[0]))

    def minimum(self) -> tuple[float, float]:
        i = int(np.argmin(self.vals))
        if i == 0 or i == self.xs.size - 1:
            raise NoBoundWindow("potential minimum sits on the sampling boundary")
        res = optimize.minimize_scalar(self._eval, bracket=(self.xs[i - 1], self.xs[i], self.xs[i + 1]),
                                       tol=1e-14)
        x = float(res.x)
        if not (self.xs[i - 1] <= x <= self.xs[i + 1]):
            x = float(self.xs[i])
        return x, self._eval(x)

    def _barrier(self, i0: int, step: int) -> tuple[float, float | None]:
        """Highest level reached walking from the minimum; returns (level, x_of_barrier)."""
        v = self.vals
        i = i0
        n = v.size
        while 0 <= i + step < n and v[i + step] >= v[i]:
            i += step
        if 0 <= i + step < n:
            # genuine local maximum: refine
            j0, j1 = sorted((i - step, i + step))
            j0 = max(j0, 0)
            j1 = min(j1, n - 1)
            res = optimize.minimize_scalar(lambda x: -self._eval(x), bounds=(self.xs[j0], self.xs[j1]),
                                           method="bounded", options={"xatol": 1e-13})
            return -float(res.fun), float(res.x)
        # walked to the end of the sampling range: decide between a finite
        # limit and unbounded growth
        end = self.b if step > 0 else self.a
        if math.isfinite(end):
            return math.inf, None
        xe = float(self.xs[i])
        with np.errstate(all="ignore"):
            far = np.real(np.asarray(self.h(xe * 2.0 ** np.arange(1, 21)), dtype=complex))
        # inf/inf overflow gives nan and carries no information
        far = far[~np.isnan(far)]
        if far.size and (np.any(np.isposinf(far)) or far[-1] > v[i] + 1e3 * (1.0 + abs(v[i]))):
            return math.inf, None
        far = far[np.isfinite(far)]
        return float(max(np.max(far), v[i]) if far.size else v[i]), None

    def window(self) -> tuple[float, float]:
        if self._window is None:
            x0, v0 = self.minimum()
            i0 = int(np.argmin(self.vals))
            left, _ = self._barrier(i0, -1)
            right, _ = self._barrier(i0, +1)
            top = min(left, right)
            if not top > v0 + 1e-12 * max(1.0, abs(v0)):
                raise NoBoundWindow(f"empty window: min {v0}, barrier {top}")
            self._window = (v0, top, x0)
        v0, top, _ = self._window
        return v0, top

    @property
    def x_min(self) -> float:
        self.window()
        return self._window[2]

    def turning_points(self, e: float) -> tuple[float, float]:
        lo, hi = self.window()
        if not (lo < e < hi):
            raise NoBoundWindow(f"energy {e} outside window ({lo}, {hi})")
        x0 = self.x_min
        g = lambda x: self._eval(x) - e  # noqa: E731
        return self._root_side(g, x0, -1), self._root_side(g, x0, +1)

    def _root_side(self, g, x0: float, step: int) -> float:
        end = self.a if step < 0 else self.b
        xs = self.xs
        if step < 0:
            cand = xs[xs < x0][::-1]
        else:
            cand = xs[xs > x0]
        prev = x0
        for x in cand:
            if g(x) > 0:
                return optimize.brentq(g, min(prev, x), max(prev, x), xtol=1e-15, rtol=1e-15, maxiter=200)
            prev = x
        # extend beyond the sampling range toward an infinite end
        if not math.isfinite(end):
            x = prev
            width = 1.0
            for _ in range(200):
                nxt = x + step * width
                if g(nxt) > 0:
                    return optimize.brentq(g, min(x, nxt), max(x, nxt), xtol=1e-15, rtol=1e-15, maxiter=200)
                x, width = nxt, width * 1.5
        raise NoBoundWindow("turning point not bracketed")


def real_well(spec: PotentialSpec) -> RealWell:
    """Cached ``RealWell`` of ``V + delta/lam**2`` on the physical domain."""
    well = spec.__dict__.get("_well")
    if well is None:
        d = spec.domain
        with np.errstate(all="ignore"):
            well = RealWell(lambda x: np.real(spec.v_eff(np.asarray(x, dtype=float))), d.a, d.b)
        object.__setattr__(spec, "_well", well)
    return well


# ----- change of variable -----


class LangerMap(str, Enum):
    EXP_HALF = "EXP_HALF"  # exp(x/2) -> x
    EXP_FULL = "EXP_FULL"  # exp(x) -> x


def jacobian_term(map_id: LangerMap, y):
    """3/4 y''^2/y'^4 - 1/2 y'''/y'^3 written in the new variable."""
    # both maps are y = exp(k x): y' = k y, y'' = k^2 y, y''' = k^3 y,
    # which gives (3/4 - 1/2)/y^2 independently of k
    return 0.25 / (y * y)


def langer_transform(spec: PotentialSpec, map_id: LangerMap | str, energy: float | None = None) -> PotentialSpec:
    """Change variables y = exp(x/2) or y = exp(x) in q and return the new spec.

    The new potential is the exact transform of the Schrodinger equation,
    Schwarzian term included; the new family's own delta then restores the
    old action.  The free term produced by the map becomes the new energy
    and the old energy ends up in the new parameters, so the old energy must
    be fixed; by default the middle of the old bound-state window is used.
    """
    map_id = LangerMap(map_id)
    fam = spec.fdef.name
    if energy is None:
        lo, hi = real_well(spec).window()
        energy = 0.5 * (lo + hi) if math.isfinite(hi) else lo + 1.0
    lam = spec.lam
    p = spec._internal
    E = float(energy)
    if fam in ("MORSE", "Q1"):
        a = p["alpha"] if fam == "MORSE" else p["alpha"] ** 2
        b = p["beta"]
        if map_id is LangerMap.EXP_HALF:
            # 4 q / y^2 - 1/(4 lam^2 y^2) = 4a y^2 - 8b - (4E + 1/(4lam^2)) / y^2
            new_beta = -4.0 * E - 0.25 / lam ** 2
            return make_potential("RADIAL_HARMONIC", {"alpha": 2.0 * math.sqrt(a), "beta": new_beta}, lam)
        # q / y^2 - 1/(4 lam^2 y^2) = a - 2b / y - (E + 1/(4 lam^2)) / y^2
        new_beta = -E - 0.25 / lam ** 2
        return make_potential("COULOMB", {"alpha": 2.0 * b, "beta": new_beta}, lam)
    if fam == "EXP_WELL" and map_id is LangerMap.EXP_HALF:
        # 4 q / y^2 - 1/(4 lam^2 y^2) = 4 gamma / y^4 - (8 beta + 4E + 1/(4 lam^2)) / y^2 + 4 alpha
        new_beta = 8.0 * p["beta"] + 4.0 * E + 0.25 / lam ** 2
        return make_potential("INVERSE_QUARTIC", {"alpha": 4.0 * p["gamma"], "beta": new_beta}, lam)
    raise UnsupportedMap(f"{map_id.value} is not available for {fam}")


def langer_energy(spec: PotentialSpec, map_id: LangerMap | str) -> float:
    """The new energy (free term) produced by the map for ``spec``."""
    map_id = LangerMap(map_id)
    p = spec._internal
    fam = spec.fdef.name
    if fam in ("MORSE", "Q1"):
        return 8.0 * p["beta"] if map_id is LangerMap.EXP_HALF else -(p["alpha"] if fam == "MORSE" else p["alpha"] ** 2)
    if fam == "EXP_WELL" and map_id is LangerMap.EXP_HALF:
        return -4.0 * p["alpha"]
    raise UnsupportedMap(f"{map_id.value} is not available for {fam}")


def map_forward(map_id: LangerMap | str, x):
    map_id = LangerMap(map_id)
    return np.exp(0.5 * x) if map_id is LangerMap.EXP_HALF else np.exp(x)
