import math

import pytest
from hypothesis import given, settings, strategies as st

from stokes_wkb._quad import gauss_legendre, integrate
from stokes_wkb.actions import action_between, contour_action, contour_action_loop, crossing_path, chi_first_order
from stokes_wkb.errors import NonCanonicalPath
from stokes_wkb.potentials import make_potential, real_well


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 14))
def test_quadrature_is_exact_for_polynomials(k):
    value, _ = integrate(lambda t: t ** k, -1.0, 2.0)
    assert value == pytest.approx((2.0 ** (k + 1) - (-1.0) ** (k + 1)) / (k + 1), rel=1e-13)


def test_gauss_legendre_weights_sum_to_two():
    _, w = gauss_legendre(20)
    assert w.sum() == pytest.approx(2.0, abs=1e-14)


@settings(max_examples=20, deadline=None)
@given(st.floats(0.3, 3.0), st.floats(0.1, 10.0), st.floats(0.5, 4.0))
def test_harmonic_action_closed_form(alpha, energy, lam):
    # 2 lam * int sqrt(E - a^2 x^2) over the well = pi lam E / a
    spec = make_potential("HARMONIC", {"alpha": alpha}, lam)
    value = contour_action(spec, energy).value
    assert value.real == pytest.approx(0.0, abs=1e-12)
    assert value.imag == pytest.approx(math.pi * lam * energy / alpha, rel=1e-10)


@pytest.mark.parametrize("family, params, energy", [
    ("MORSE", {"alpha": 1.0, "beta": 1.0}, -0.4),
    ("EXP_WELL", {"alpha": 1.0, "beta": 3.0, "gamma": 1.0}, -3.0),
    ("V9", {"alpha": 9.0, "beta": 3.0}, 12.0),
])
def test_loop_and_real_segment_actions_agree(family, params, energy):
    spec = make_potential(family, params, 2.0)
    assert contour_action_loop(spec, energy).value == pytest.approx(contour_action(spec, energy).value, rel=1e-9)


def test_action_is_path_independent_between_turning_points():
    spec = make_potential("MORSE", {"alpha": 1.0, "beta": 1.0})
    lo, hi = real_well(spec).turning_points(-0.5)
    straight = action_between(spec, -0.5, lo, hi).value
    bent = action_between(spec, -0.5, lo, hi, path="POLYLINE", points=[0.5 * (lo + hi) + 0.3j]).value
    assert abs(bent) == pytest.approx(abs(straight), rel=1e-9)


def test_chi_is_sizeable_for_exp_well():
    spec = make_potential("EXP_WELL", {"alpha": 1.0, "beta": 1.25, "gamma": 1.0})
    lo, hi = real_well(spec).turning_points(0.0)
    path = crossing_path(lo, hi, shift=2j * math.pi)
    chi = chi_first_order(spec, 0.0, path, 1, anchor_at_infinity=True)
    assert abs(chi.value) > 1e-4
    assert chi.abs_error_estimate < 1e-8


def test_chi_rejects_non_canonical_paths():
    # out from the anchor at 2 to 4 and back to 3: Re W cannot be monotone
    spec = make_potential("HARMONIC", {})
    for sigma in (1, -1):
        with pytest.raises(NonCanonicalPath):
            chi_first_order(spec, 1.0, [3.0 + 0j, 4.0 + 0j, 2.0 + 0j], sigma, extend_tail=False)
