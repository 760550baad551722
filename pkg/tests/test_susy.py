import math

import numpy as np
import pytest

from stokes_wkb import suites, susy
from stokes_wkb.errors import RiccatiMismatch
from stokes_wkb.susy import (
    Case, Shift, Variant, catalog, classify_susy_case, f_residue_at_infinity, riccati_residual, superpotential,
    verify_level_shift,
)


@pytest.mark.parametrize("family", sorted(suites.SUSY_CASES))
def test_every_listed_case_reproduces_its_potential(family):
    params, lam = suites.SUSY_CASES[family]
    for case, sp in catalog(family, params, lam).items():
        assert not isinstance(sp, Exception), (family, case, sp)
        dev, _ = riccati_residual(sp)
        assert dev <= 1e-10


def test_family_one_ground_energy_closed_form():
    # eps0 = -(beta/|alpha| - 1/(2 lam))^2
    sp = superpotential(1, "EXACT_1", {"alpha": 1.0, "beta": 4.0}, 2.0)
    assert sp.epsilon0 == pytest.approx(-(4.0 - 0.25) ** 2, rel=1e-14)


def test_riccati_check_catches_a_transcription_error(monkeypatch):
    build = susy._BUILDERS[1]

    def off_by_a_tenth(p, lam, case):
        phi, dphi, eps0, shape, infs = build(p, lam, case)
        return phi, dphi, eps0 + 0.1, shape, infs

    monkeypatch.setitem(susy._BUILDERS, 1, off_by_a_tenth)
    with pytest.raises(RiccatiMismatch):
        superpotential(1, "EXACT_1", {"alpha": 1.0, "beta": 4.0}, 2.0)


@pytest.mark.parametrize("family, case, shift", [
    (1, Case.EXACT_1, Shift.SHIFT_0),
    (1, Case.BROKEN_4, Shift.SHIFT_ONE),
    (6, Case.BROKEN_2, Shift.SHIFT_HALF),
])
def test_level_shift_by_case(family, case, shift):
    params, lam = suites.SUSY_CASES[family]
    sp = superpotential(family, case, params, lam)
    assert classify_susy_case(sp) == case
    report = verify_level_shift(sp.spec, sp, 4)
    assert report.shift == shift
    assert report.max_rel_diff <= 1e-6


def test_vanishing_f1_gives_zero_residue():
    sp = superpotential(1, "EXACT_1", {"alpha": 1.0, "beta": 4.0}, 2.0)
    value = f_residue_at_infinity(sp, Variant.PLUS, suites.residue_energy(sp), f1=lambda x: np.zeros_like(x))
    assert abs(value) < 1e-12


@pytest.mark.parametrize("lam", [1.0, 2.0])
def test_family_nine_minus_residue(lam):
    sp = superpotential(9, "EXACT_1", {"alpha": 9.0, "beta": 3.0}, lam)
    value = f_residue_at_infinity(sp, Variant.MINUS, suites.residue_energy(sp))
    assert value == pytest.approx(1j * math.pi / lam, abs=1e-6)
