"""Error types raised by the toolkit.

Every error carries a stable ``code`` string so that reports and the CLI can
surface failures without depending on the exception class hierarchy.
"""

from __future__ import annotations


class StokesWKBError(Exception):
    """Base class. ``code`` is a stable machine-readable identifier."""

    code = "ERROR"

    def __init__(self, message: str = "", **details):
        super().__init__(message or self.code)
        self.details = details

    def __str__(self) -> str:
        base = super().__str__()
        return f"{self.code}: {base}"


def _make(code: str, doc: str) -> type:
    return type(code.title().replace("_", "") + "Error", (StokesWKBError,), {"code": code, "__doc__": doc})


ParamOutOfRange = _make("PARAM_OUT_OF_RANGE", "Parameters violate the family's admissible region.")
PoleHit = _make("POLE_HIT", "Evaluation point lies within pole_guard of a pole.")
DegenerateRoot = _make("DEGENERATE_ROOT", "Two roots closer than root_merge_tol.")
UnsupportedMap = _make("UNSUPPORTED_MAP", "Change of variable not available for this family.")
TraceStalled = _make("TRACE_STALLED", "Stokes-line step size underflowed.")
SectorAmbiguous = _make("SECTOR_AMBIGUOUS", "A face holds zero or several infinity points.")
PathThroughPole = _make("PATH_THROUGH_POLE", "Integration path passes too close to a pole.")
NonCanonicalPath = _make("NON_CANONICAL_PATH", "Re(sigma W) is not monotone along the path.")
NoBoundWindow = _make("NO_BOUND_WINDOW", "No energy with two simple real turning points.")
GridTooCoarse = _make("GRID_TOO_COARSE", "Richardson estimates on successive grids disagree.")
EmptySpectrum = _make("EMPTY_SPECTRUM", "A spectrum has no levels to compare.")
RiccatiMismatch = _make("RICCATI_MISMATCH", "Superpotential does not reproduce the potential.")
Indeterminate = _make("INDETERMINATE", "Endpoint behaviour of the ground-state ansatz is marginal.")
NotConverged = _make("NOT_CONVERGED", "Successive refinements disagree beyond tolerance.")
NoConstantShift = _make("NO_CONSTANT_SHIFT", "No constant enumeration offset fits both spectra.")
RootTooClose = _make("ROOT_TOO_CLOSE", "Path passes too close to a root or pole.")

__all__ = [
    "StokesWKBError",
    "ParamOutOfRange",
    "PoleHit",
    "DegenerateRoot",
    "UnsupportedMap",
    "TraceStalled",
    "SectorAmbiguous",
    "PathThroughPole",
    "NonCanonicalPath",
    "NoBoundWindow",
    "GridTooCoarse",
    "EmptySpectrum",
    "RiccatiMismatch",
    "Indeterminate",
    "NotConverged",
    "NoConstantShift",
    "RootTooClose",
]
