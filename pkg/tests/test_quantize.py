import math

import pytest
from hypothesis import given, settings, strategies as st

from stokes_wkb.potentials import make_potential
from stokes_wkb.quantize import solve_levels, swkb_spectrum, wkb_spectrum
from stokes_wkb.susy import superpotential


@settings(max_examples=15, deadline=None)
@given(st.floats(0.3, 3.0), st.floats(0.5, 4.0))
def test_harmonic_levels_closed_form(alpha, lam):
    levels = wkb_spectrum(make_potential("HARMONIC", {"alpha": alpha}, lam), 4).energies
    assert levels == pytest.approx([alpha * (2 * m + 1) / lam for m in range(5)], rel=1e-9)


@settings(max_examples=15, deadline=None)
@given(st.floats(0.3, 3.0), st.floats(0.5, 3.0), st.floats(1.0, 6.0))
def test_morse_levels_closed_form(alpha, beta, lam):
    # E_m = -(beta / sqrt(alpha) - (m + 1/2) / lam)^2 while the bracket stays positive
    spec = make_potential("MORSE", {"alpha": alpha, "beta": beta}, lam)
    depth = beta / math.sqrt(alpha)
    expected = [-(depth - (m + 0.5) / lam) ** 2 for m in range(6) if depth - (m + 0.5) / lam > 1e-3]
    got = wkb_spectrum(spec, len(expected) - 1).energies if expected else []
    assert got == pytest.approx(expected, rel=1e-8, abs=1e-9)


def test_finite_window_reports_omitted_levels():
    result = wkb_spectrum(make_potential("MORSE", {"alpha": 1.0, "beta": 1.0}, 2.0), 3)
    assert len(result.levels) == 2
    assert result.omitted == 2


def test_swkb_harmonic_levels():
    # phi = x on the line: E = 2m + 1 at lam = 1
    sp = superpotential(3, "EXACT_1", {"alpha": 1.0, "beta": 6.0}, 1.0)
    jwkb = wkb_spectrum(sp.spec, 4).energies
    assert swkb_spectrum(sp, 4).energies == pytest.approx(jwkb, rel=1e-9)


def test_solver_is_deterministic():
    spec = make_potential("V10", {"alpha": -40.0, "beta": 2.0})
    a = wkb_spectrum(spec, 5)
    b = wkb_spectrum(spec, 5)
    assert [(lv.m, lv.E, lv.residual) for lv in a.levels] == [(lv.m, lv.E, lv.residual) for lv in b.levels]


@settings(max_examples=25, deadline=None)
@given(st.lists(st.floats(0.1, 50.0), min_size=1, max_size=6, unique=True))
def test_solve_levels_inverts_a_monotone_action(targets):
    targets = sorted(targets)
    sols, omitted = solve_levels(lambda e: 10.0 * math.sqrt(e), 0.0, math.inf, targets)
    assert omitted == 0
    for i, e, _, _ in sols:
        assert e == pytest.approx((targets[i] / 10.0) ** 2, rel=1e-9)
