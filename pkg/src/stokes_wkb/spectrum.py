"""Spectrum records shared by the quantizers and the grid oracle."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum


class Method(str, Enum):
    JWKB = "JWKB"
    SWKB = "SWKB"
    ORACLE = "ORACLE"


@dataclass(frozen=True)
class Level:
    m: int
    E: float
    residual: float = 0.0
    iterations: int = 0


@dataclass
class SpectrumResult:
    method: Method
    family: str
    params_hash: str
    levels: list[Level] = field(default_factory=list)
    omitted: int = 0
    notes: dict = field(default_factory=dict)

    @property
    def energies(self) -> list[float]:
        return [lv.E for lv in self.levels]

    def by_m(self) -> dict[int, Level]:
        return {lv.m: lv for lv in self.levels}

    def to_json(self) -> dict:
        return {
            "method": self.method.value,
            "family": self.family,
            "params_hash": self.params_hash,
            "levels": [{"m": lv.m, "E": lv.E, "residual": lv.residual, "iterations": lv.iterations}
                       for lv in self.levels],
            "omitted": self.omitted,
            "notes": self.notes,
        }
