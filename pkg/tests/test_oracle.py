import math

import numpy as np
import pytest

from stokes_wkb.errors import EmptySpectrum, ParamOutOfRange
from stokes_wkb.oracle import OracleProblem, compare_spectra, oracle_spectrum
from stokes_wkb.potentials import EndKind, make_potential
from stokes_wkb.quantize import wkb_spectrum
from stokes_wkb.spectrum import Level, Method, SpectrumResult


def test_harmonic_oracle_closed_form():
    levels = oracle_spectrum(make_potential("HARMONIC", {}), 2).energies
    assert levels == pytest.approx([1.0, 3.0, 5.0], abs=1e-8)


def test_morse_oracle_closed_form():
    result = oracle_spectrum(make_potential("MORSE", {"alpha": 1.0, "beta": 1.0}, 2.0), 3)
    assert result.energies == pytest.approx([-0.5625, -0.0625], abs=1e-8)


def test_raw_grids_converge_monotonically_from_one_side():
    notes = oracle_spectrum(make_potential("MORSE", {"alpha": 1.0, "beta": 1.0}, 4.0), 2).notes
    coarse, mid, fine = (np.array(r) for r in notes["raw"])
    assert np.all(np.abs(fine - mid) < np.abs(mid - coarse))
    assert np.all(np.sign(mid - coarse) == np.sign(fine - mid))


def test_custom_problem_without_catalog_entry():
    # a shallow harmonic well passed as a bare callable: E0 = sqrt(1e-3)
    prob = OracleProblem(lambda x: 1e-3 * np.asarray(x) ** 2, -math.inf, math.inf, EndKind.INFINITY,
                         EndKind.INFINITY, 1.0)
    e0 = oracle_spectrum(prob, 0).energies[0]
    assert e0 == pytest.approx(math.sqrt(1e-3), rel=1e-8)


def test_equal_poschl_teller_strengths_have_no_well():
    # 1/sinh^2 - 1/cosh^2 > 0 everywhere
    with pytest.raises(ParamOutOfRange):
        make_potential("POSCHL_TELLER", {"beta": 1.0, "beta_prime": 1.0}, 1.0)


def test_poschl_teller_matches_jwkb():
    spec = make_potential("POSCHL_TELLER", {"beta": 1.0, "beta_prime": 6.0}, 1.0)
    report = compare_spectra(wkb_spectrum(spec, 3), oracle_spectrum(spec, 3), 1e-6)
    assert report.verdict == "MATCH"


def _result(energies):
    return SpectrumResult(Method.JWKB, "X", "h", [Level(m, e) for m, e in enumerate(energies)])


def test_identical_spectra_match():
    report = compare_spectra(_result([1.0, 2.0]), _result([1.0, 2.0]), 1e-12)
    assert report.max_abs_diff == 0.0
    assert report.verdict == "MATCH"


def test_verdict_is_mismatch_iff_a_rel_diff_exceeds_tol():
    report = compare_spectra(_result([1.0, 2.0 + 3e-6]), _result([1.0, 2.0]), 1e-6)
    assert report.verdict == "MISMATCH"
    assert report.max_rel_diff == pytest.approx(1.5e-6)


def test_rank_alignment():
    a = SpectrumResult(Method.SWKB, "X", "h", [Level(1, 3.0), Level(2, 5.0)])
    assert compare_spectra(a, _result([3.0, 5.0]), 1e-9, align="rank").verdict == "MATCH"


def test_empty_spectrum_is_rejected():
    with pytest.raises(EmptySpectrum):
        compare_spectra(_result([]), _result([1.0]), 1e-6)
