import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stokes_wkb.actions import arc
from stokes_wkb.errors import ParamOutOfRange, RootTooClose
from stokes_wkb.phase import (
    exponential_sum, phase_along_path, product_phase_change, richardson_odd, strip_phase_difference,
)
from stokes_wkb.potentials import make_potential

MORSE = make_potential("MORSE", {"alpha": 1.0, "beta": 1.0})


def test_positive_q_on_a_real_segment_has_no_phase():
    assert phase_along_path(make_potential("HARMONIC", {}), -1.0, [-3.0, 3.0]) == 0.0


def test_winding_around_a_simple_zero():
    loop = arc(1.0, 0.5, 0.0, 2.0 * math.pi, points=9)
    assert phase_along_path(make_potential("HARMONIC", {}), 1.0, loop) == pytest.approx(2.0 * math.pi, abs=1e-12)


def test_morse_segment_phase_is_stable_under_refinement():
    top = [complex(x, math.pi) for x in np.linspace(-2.0, 2.0, 3)]
    fine = [complex(x, math.pi) for x in np.linspace(-2.0, 2.0, 301)]
    assert phase_along_path(MORSE, -0.75, top) == pytest.approx(phase_along_path(MORSE, -0.75, fine), abs=1e-8)


def test_path_through_a_root_is_rejected():
    with pytest.raises(RootTooClose):
        phase_along_path(make_potential("HARMONIC", {}), 1.0, [0.0, 1.0])


@settings(max_examples=30, deadline=None)
@given(st.floats(-5.0, 5.0), st.floats(-5.0, 5.0), st.floats(-5.0, 5.0))
def test_richardson_removes_odd_powers(limit, c1, c3):
    copies = [8, 16, 32]
    values = [limit + c1 / (n + 0.5) + c3 / (n + 0.5) ** 3 for n in copies]
    assert richardson_odd(copies, values) == pytest.approx(limit, abs=1e-9)


def test_exponential_sum_roots_solve_q():
    esum = exponential_sum(MORSE, -0.75)
    for root in esum.roots:
        assert abs(MORSE.q(root, -0.75)) < 1e-12
    assert esum.prefactor_exponent == 1.0


def test_families_with_delta_are_not_exponential_sums():
    with pytest.raises(ParamOutOfRange):
        exponential_sum(make_potential("Q4", {"alpha": 1.0, "beta": 8.0}, 2.0), -3.0)


def test_truncation_gaps_shrink_monotonically():
    esum = exponential_sum(MORSE, -0.75)
    path = [complex(2.0, math.pi), 2.0, complex(2.0, -math.pi)]
    raw = [product_phase_change(esum, path, n) for n in (8, 16, 32, 64, 128)]
    gaps = [abs(a - b) for a, b in zip(raw, raw[1:])]
    assert all(g2 < g1 for g1, g2 in zip(gaps, gaps[1:]))


def test_morse_strip_difference():
    audit = strip_phase_difference(MORSE, -0.75, 2.0, copies=32)
    assert audit.converged
    assert audit.difference == pytest.approx(-4.0 * math.pi, abs=1e-6)
    assert audit.agreement <= 1e-6
    doc = audit.to_json()
    assert doc["n_roots_used"] == 32 and len(doc["roots"]) == 2


def test_morse_between_turning_points_picks_up_one_root_pair_less():
    assert strip_phase_difference(MORSE, -0.75, 0.0).difference == pytest.approx(-2.0 * math.pi, abs=1e-6)
