"""Reference parameter sets and the exact/not-exact verdict table.

Shared by the ``verdict-table`` command and the acceptance tests so both
audit the same potentials.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .actions import chi_first_order, crossing_path
from .oracle import compare_spectra, oracle_spectrum
from .potentials import PotentialSpec, make_potential, real_well
from .quantize import wkb_spectrum

EXACT_TOL = 1e-6
NOT_EXACT_TOL = 1e-3
CHI_THRESHOLD = 1e-4
EXACT_M_MAX = 5
NOT_EXACT_M_MAX = 3


@dataclass(frozen=True)
class Reference:
    family: str
    params: dict
    lam: float

    def spec(self) -> PotentialSpec:
        return make_potential(self.family, self.params, self.lam)


EXACT_CASES = [
    Reference("Q1", {"alpha": 1.0, "beta": 4.0}, 2.0), Reference("Q1", {"alpha": 1.5, "beta": 6.0}, 2.0),
    Reference("Q2", {"alpha": 2.0, "beta": 6.0}, 1.0), Reference("Q2", {"alpha": 4.0, "beta": 3.0}, 2.0),
    Reference("Q3", {"alpha": 1.0, "beta": 6.0}, 1.0), Reference("Q3", {"alpha": 0.5, "beta": 5.0}, 2.0),
    Reference("Q4", {"alpha": 1.0, "beta": 8.0}, 2.0), Reference("Q4", {"alpha": -1.0, "beta": 10.0}, 3.0),
    Reference("Q5", {"alpha": -2.0, "beta": 2.5}, 4.0), Reference("Q5", {"alpha": -3.0, "beta": 4.0}, 4.0),
    Reference("Q6", {"alpha": 30.0, "beta": 0.75}, 2.0), Reference("Q6", {"alpha": 12.0, "beta": 0.75}, 3.0),
    Reference("Q7", {"alpha": 1.5}, 1.0), Reference("Q7", {"alpha": 3.0}, 1.0),
    Reference("Q8", {"alpha": 1.5, "beta": 3.0}, 1.0), Reference("Q8", {"alpha": 5.0, "beta": 1.5}, 1.0),
    Reference("V9", {"alpha": 9.0, "beta": 3.0}, 1.0), Reference("V9", {"alpha": 11.0, "beta": 9.0}, 1.0),
    Reference("V10", {"alpha": -40.0, "beta": 2.0}, 1.0), Reference("V10", {"alpha": -10.0, "beta": 1.0}, 2.0),
]

NOT_EXACT_CASES = [
    Reference("EXP_WELL", {"alpha": 1.0, "beta": 3.0, "gamma": 1.0}, 2.0),
    Reference("CUBIC_EXP", {"alpha": 1.0, "beta_plus": 2.0, "beta_minus": 1.0, "gamma": 1.0}, 2.0),
    Reference("EXP_WELL_2", {"alpha": 1.0, "beta_plus": 2.0, "beta_minus": 1.0, "gamma": 1.0}, 2.0),
    Reference("SIMPLE_POLE_PAIR", {"alpha1": 1.0, "beta1": -3.0, "a": 1.0}, 2.0),
    Reference("SINH_POLE", {"alpha1": 6.0, "beta1": -5.0}, 2.0),
]

# chi is evaluated at E = 0 on a crossing path lifted one period up
CHI_CASE = Reference("EXP_WELL", {"alpha": 1.0, "beta": 1.25, "gamma": 1.0}, 1.0)


@dataclass
class Verdict:
    case: Reference
    expected: str
    verdict: str
    max_rel_diff: float
    levels: int
    params_hash: str

    @property
    def agrees(self) -> bool:
        return self.verdict == self.expected

    def to_json(self) -> dict:
        return {"family": self.case.family, "params": dict(sorted(self.case.params.items())),
                "lambda": self.case.lam, "params_hash": self.params_hash, "expected": self.expected,
                "verdict": self.verdict, "max_rel_diff": self.max_rel_diff, "levels": self.levels}


def audit(case: Reference, expected: str) -> Verdict:
    """JWKB against the grid oracle; EXACT when every level agrees within EXACT_TOL."""
    spec = case.spec()
    m_max = EXACT_M_MAX if expected == "EXACT" else NOT_EXACT_M_MAX
    report = compare_spectra(wkb_spectrum(spec, m_max), oracle_spectrum(spec, m_max), EXACT_TOL)
    if report.max_rel_diff <= EXACT_TOL:
        verdict = "EXACT"
    elif report.max_rel_diff >= NOT_EXACT_TOL:
        verdict = "NOT_EXACT"
    else:
        verdict = "UNDECIDED"
    return Verdict(case, expected, verdict, report.max_rel_diff, len(report.diffs), spec.params_hash())


def verdict_rows() -> list[tuple[Reference, str]]:
    return [(c, "EXACT") for c in EXACT_CASES] + [(c, "NOT_EXACT") for c in NOT_EXACT_CASES]


def expwell_chi() -> complex:
    """First-order chi for the reference EXP_WELL across its well, one period up."""
    spec = CHI_CASE.spec()
    lo, hi = real_well(spec).turning_points(0.0)
    path = crossing_path(lo, hi, shift=2j * math.pi)
    return chi_first_order(spec, 0.0, path, 1, anchor_at_infinity=True).value

# superpotential family number -> (potential parameters, lambda)
SUSY_CASES = {
    1: ({"alpha": 1.0, "beta": 4.0}, 2.0),
    2: ({"alpha": 2.0, "beta": 6.0}, 1.0),
    3: ({"alpha": 1.0, "beta": 6.0}, 1.0),
    4: ({"alpha": 1.0, "beta": 8.0}, 2.0),
    5: ({"alpha": -2.0, "beta": 2.5}, 4.0),
    6: ({"alpha": 30.0, "beta": 0.75}, 2.0),
    7: ({"alpha": 1.5}, 1.0),
    8: ({"alpha": 1.5, "beta": 3.0}, 1.0),
    9: ({"alpha": 9.0, "beta": 3.0}, 1.0),
    10: ({"alpha": -40.0, "beta": 2.0}, 1.0),
}

# families and potential parameters for the residue-at-infinity audit
RESIDUE_CASES = {
    1: {"alpha": 1.0, "beta": 4.0},
    3: {"alpha": 1.0, "beta": 6.0},
    9: {"alpha": 9.0, "beta": 3.0},
    10: {"alpha": -40.0, "beta": 2.0},
}


def residue_energy(sp) -> float:
    """A point 30% into the two-turning-point window of phi^2."""
    import numpy as np

    from .potentials import RealWell

    a, b = sp.domain
    lo, hi = RealWell(lambda x: np.real(sp.phi(np.asarray(x, dtype=float))) ** 2, a, b).window()
    top = hi if math.isfinite(hi) else lo + 10.0
    return lo + 0.3 * (top - lo)
