import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stokes_wkb.errors import ParamOutOfRange, UnsupportedMap
from stokes_wkb.potentials import (
    Kind, LangerMap, classify_singularities, evaluate_q, family_names, find_turning_points, langer_energy,
    langer_transform, make_potential, real_well, spec_from_json,
)
from stokes_wkb.quantize import wkb_spectrum

positive = st.floats(0.2, 5.0, allow_nan=False)


def test_catalog_lists_the_reference_families():
    names = set(family_names())
    for name in ("HARMONIC", "MORSE", "EXP_WELL", "CUBIC_EXP", "Q1", "Q4", "Q8", "V9", "V10", "POSCHL_TELLER"):
        assert name in names


@pytest.mark.parametrize("family, params", [
    ("MORSE", {"alpha": -1.0, "beta": 1.0}),
    ("EXP_WELL", {"alpha": 1.0, "beta": -1.0, "gamma": 1.0}),
    ("V9", {"alpha": 1.0, "beta": 3.0}),
    ("MORSE", {"alpha": 1.0, "beta": 1.0, "bogus": 2.0}),
])
def test_inadmissible_parameters_are_rejected(family, params):
    with pytest.raises(ParamOutOfRange):
        make_potential(family, params)


def test_lambda_must_be_positive():
    with pytest.raises(ParamOutOfRange):
        make_potential("HARMONIC", {}, 0.0)


@settings(max_examples=25, deadline=None)
@given(positive, positive, st.floats(0.3, 4.0))
def test_spec_json_round_trip(alpha, beta, lam):
    spec = make_potential("MORSE", {"alpha": alpha, "beta": beta}, lam)
    again = spec_from_json(spec.to_json())
    assert again.to_json() == spec.to_json()
    assert again.params_hash() == spec.params_hash()


@settings(max_examples=25, deadline=None)
@given(st.floats(0.3, 3.0), st.floats(0.1, 20.0))
def test_harmonic_turning_points_closed_form(alpha, energy):
    spec = make_potential("HARMONIC", {"alpha": alpha})
    tps = sorted((p.location for p in find_turning_points(spec, energy)), key=lambda z: z.real)
    edge = math.sqrt(energy) / alpha
    assert len(tps) == 2
    assert abs(tps[0] + edge) < 1e-9 * max(1.0, edge)
    assert abs(tps[1] - edge) < 1e-9 * max(1.0, edge)


@settings(max_examples=25, deadline=None)
@given(positive, positive, st.floats(0.05, 0.95))
def test_morse_real_turning_points_closed_form(alpha, beta, frac):
    # alpha u^2 - 2 beta u = E with u = e^x
    spec = make_potential("MORSE", {"alpha": alpha, "beta": beta})
    energy = -frac * beta * beta / alpha
    disc = math.sqrt(beta * beta + alpha * energy)
    expected = sorted(math.log((beta + s * disc) / alpha) for s in (-1, 1))
    lo, hi = real_well(spec).turning_points(energy)
    assert lo == pytest.approx(expected[0], abs=1e-9)
    assert hi == pytest.approx(expected[1], abs=1e-9)
    found = [p for p in find_turning_points(spec, energy) if p.real]
    assert sorted(p.location.real for p in found) == pytest.approx(expected, abs=1e-9)


def test_evaluate_q_matches_direct_formula():
    spec = make_potential("EXP_WELL", {"alpha": 1.0, "beta": 3.0, "gamma": 2.0}, 2.0)
    x = 0.3 + 0.7j
    direct = np.exp(x) + 2.0 * np.exp(-x) - 6.0 - (-1.5)
    assert evaluate_q(spec, -1.5, x) == pytest.approx(direct, rel=1e-14)


def test_delta_term_is_scaled_by_lambda_squared():
    spec = make_potential("V9", {"alpha": 9.0, "beta": 3.0}, 2.0)
    x = 0.4
    assert spec.v_eff(x) == pytest.approx(spec.V(x) + 0.25 / math.cos(x) ** 2 / 4.0, rel=1e-14)


def test_coulomb_has_a_double_pole_at_the_origin():
    spec = make_potential("COULOMB", {"alpha": 2.0, "beta": 1.0})
    poles = [p for p in classify_singularities(spec) if p.kind != Kind.INFINITY_POINT]
    assert [(p.location, p.kind) for p in poles] == [(0j, Kind.DOUBLE_POLE)]


def test_langer_maps_send_a_morse_level_to_the_free_term():
    # if E is a Morse level, the transformed problem has the map's free term as a level
    morse = make_potential("MORSE", {"alpha": 1.0, "beta": 1.0}, 2.0)
    ground = wkb_spectrum(morse, 0).levels[0].E
    for map_id in LangerMap:
        spec = langer_transform(morse, map_id, energy=ground)
        target = langer_energy(morse, map_id)
        levels = wkb_spectrum(spec, 3).energies
        assert min(abs(e - target) for e in levels) < 1e-8 * max(1.0, abs(target))


def test_langer_map_outside_its_families_is_unsupported():
    with pytest.raises(UnsupportedMap):
        langer_transform(make_potential("HARMONIC", {}), LangerMap.EXP_FULL)
