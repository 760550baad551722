import dataclasses
import math
import xml.dom.minidom

import pytest

from stokes_wkb.potentials import CriticalPoint, Kind, make_potential
from stokes_wkb.stokes import (
    Terminal, build_stokes_graph, emanation_directions, emit_svg, empty_graph, fingerprint, line_residual,
    trace_stokes_line,
)

HARMONIC = make_potential("HARMONIC", {})
MORSE = make_potential("MORSE", {"alpha": 1.0, "beta": 1.0}, 2.0)
EXP_WELL = make_potential("EXP_WELL", {"alpha": 1.0, "beta": 3.0, "gamma": 1.0}, 2.0)


@pytest.fixture(scope="module")
def harmonic_graph():
    return build_stokes_graph(HARMONIC, 1.0)


@pytest.fixture(scope="module")
def morse_graph():
    return build_stokes_graph(MORSE, -0.75)


def test_turning_point_directions_are_a_third_of_a_turn_apart():
    # W ~ (x - 1)^(3/2) near x = 1 with q' = 2: Re W = 0 at pi/3, pi, 5 pi/3
    tp = CriticalPoint(1.0 + 0j, Kind.TURNING_POINT, 1)
    angles = sorted(a % (2.0 * math.pi) for a in emanation_directions(HARMONIC, 1.0, tp))
    assert angles == pytest.approx([math.pi / 3.0, math.pi, 5.0 * math.pi / 3.0], abs=1e-9)


def test_harmonic_graph_shape(harmonic_graph):
    turning = [n for n in harmonic_graph.nodes if n.kind == Kind.TURNING_POINT]
    assert len(turning) == 2
    assert len(harmonic_graph.edges) == 6
    assert len(harmonic_graph.sectors) == 4


def test_morse_and_exp_well_sector_counts(morse_graph):
    assert len(morse_graph.sectors) == 3
    g = build_stokes_graph(EXP_WELL, -3.0)
    assert len(g.sectors) == 2
    assert len(g.strips) == 1


def test_every_line_meets_the_re_w_bound(harmonic_graph, morse_graph):
    for spec, energy, graph in ((HARMONIC, 1.0, harmonic_graph), (MORSE, -0.75, morse_graph)):
        for line in graph.edges:
            assert line_residual(spec, energy, line) <= 1.0


def test_retracing_a_connecting_line_returns_to_its_start(harmonic_graph):
    nodes = harmonic_graph.nodes
    forward = next(e for e in harmonic_graph.edges
                   if e.terminal == Terminal.CRITICAL_POINT and nodes[e.terminal_node].kind == Kind.TURNING_POINT)
    end = nodes[forward.terminal_node]
    back = None
    for k in range(3):
        line = trace_stokes_line(HARMONIC, 1.0, end, k)
        if line.terminal == Terminal.CRITICAL_POINT and abs(line.points[-1] - forward.points[0]) < 1e-5:
            back = line
    assert back is not None
    # the reversed retrace lies on the forward line's Re W = 0 curve within 10 line_tol
    reversed_back = dataclasses.replace(back, points=list(reversed(back.points)))
    assert line_residual(HARMONIC, 1.0, reversed_back) <= 10.0


def test_morse_fingerprint_is_lambda_invariant(morse_graph):
    prints = {fingerprint(build_stokes_graph(make_potential("MORSE", {"alpha": 1.0, "beta": 1.0}, lam), -0.75))
              for lam in (0.5, 1.0)}
    assert prints == {fingerprint(morse_graph)}


def test_graph_json_is_deterministic(morse_graph):
    again = build_stokes_graph(MORSE, -0.75)
    assert again.to_json() == morse_graph.to_json()


def test_harmonic_svg(harmonic_graph):
    svg = emit_svg(harmonic_graph)
    xml.dom.minidom.parseString(svg)
    assert svg.count('class="stokes-line"') == 6
    assert svg.count('class="node turning-point"') == 2
    assert svg == emit_svg(harmonic_graph)


def test_morse_svg_has_cut_markers_and_strip_copies(morse_graph):
    one = emit_svg(morse_graph)
    three = emit_svg(morse_graph, {"copies": 1})
    assert 'class="cut"' in one
    assert three.count('class="node turning-point"') == 3 * one.count('class="node turning-point"')


def test_empty_graph_svg_has_axes_only():
    svg = emit_svg(empty_graph())
    doc = xml.dom.minidom.parseString(svg)
    assert [p.getAttribute("class") for p in doc.getElementsByTagName("path")] == ["axes"]
    assert not doc.getElementsByTagName("circle")
