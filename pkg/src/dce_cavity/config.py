"""Scenario files: strict JSON schema for the command-line runner."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, model_validator

from .drive import DriveSpec
from .mode_solver import CavityGeometry, ModeIndex, PermittivityPair

TASKS = ("spectrum", "sweep", "evolve", "estimate")


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class GeometryConfig(_Strict):
    L: PositiveFloat = 1.0
    L_y: PositiveFloat = 1.0
    L_z: PositiveFloat = 1.0
    a: PositiveFloat

    @model_validator(mode="after")
    def _slab_inside(self):
        if not self.a < self.L:
            raise ValueError(f"slab thickness a={self.a} must be below L={self.L}")
        return self

    def build(self) -> CavityGeometry:
        return CavityGeometry(self.L, self.L_y, self.L_z, self.a)


class PermittivityConfig(_Strict):
    eps_I: PositiveFloat
    eps_II: PositiveFloat = 1.0

    def build(self) -> PermittivityPair:
        return PermittivityPair(self.eps_I, self.eps_II)


class ModeConfig(_Strict):
    n_x: int = Field(ge=0)
    n_y: int = Field(ge=0)
    n_z: int = Field(ge=0)
    pol: Literal["TE", "TM"]

    def build(self) -> ModeIndex:
        return ModeIndex(self.n_x, self.n_y, self.n_z, self.pol)


class DriveConfig(_Strict):
    xi: PositiveFloat = 1.0
    chi: float
    eps_II: PositiveFloat = 1.0
    delta: float = 0.0
    # None: resonant with the first listed mode, detuned by delta
    omega_drive: Optional[PositiveFloat] = None

    @model_validator(mode="after")
    def _positive_ratio(self):
        if not abs(self.chi) < self.xi:
            raise ValueError(f"|chi| < xi required, got xi={self.xi}, chi={self.chi}")
        return self

    def build(self, omega_drive: float) -> DriveSpec:
        return DriveSpec(self.xi, self.chi, omega_drive, self.eps_II, self.delta)


class NumericsConfig(_Strict):
    lowest: Optional[int] = Field(default=None, ge=1)
    a_over_L: Optional[list[PositiveFloat]] = None
    ratios: Optional[list[PositiveFloat]] = None
    gram: bool = False
    quadrature_points: Optional[int] = Field(default=None, ge=8)
    coupling_phases: Optional[list[float]] = None
    periods: Optional[int] = Field(default=None, ge=10)
    target_photons: Optional[PositiveFloat] = None
    deltas: Optional[list[float]] = None
    steps_per_period: int = Field(default=1024, ge=200)
    method: Literal["exact", "first_order"] = "exact"
    step_check: bool = False
    workers: int = Field(default=1, ge=1)


class EstimateConfig(_Strict):
    wavelength_cm: Optional[PositiveFloat] = None
    switching_time_ps: Optional[PositiveFloat] = None
    chi_over_epsII: PositiveFloat
    a_over_L: float = Field(ge=0)
    target_photons: float = Field(ge=0)
    eps_II: PositiveFloat = 1.0

    @model_validator(mode="after")
    def _one_scale(self):
        if (self.wavelength_cm is None) == (self.switching_time_ps is None):
            raise ValueError("give exactly one of wavelength_cm, switching_time_ps")
        return self


class ScenarioConfig(_Strict):
    name: str
    task: Literal["spectrum", "sweep", "evolve", "estimate"]
    description: str = ""
    acceptance: Optional[int] = None
    geometry: Optional[GeometryConfig] = None
    permittivities: Optional[PermittivityConfig] = None
    drive: Optional[DriveConfig] = None
    modes: list[ModeConfig] = []
    numerics: NumericsConfig = NumericsConfig()
    estimate: Optional[EstimateConfig] = None

    @model_validator(mode="after")
    def _task_fields(self):
        need = {
            "spectrum": ("geometry", "permittivities"),
            "sweep": ("geometry", "permittivities"),
            "evolve": ("geometry", "drive"),
            "estimate": ("estimate",),
        }[self.task]
        missing = [name for name in need if getattr(self, name) is None]
        if missing:
            raise ValueError(f"task {self.task!r} requires {', '.join(missing)}")
        n = self.numerics
        if self.task == "spectrum" and not self.modes and n.lowest is None:
            raise ValueError("spectrum needs modes or numerics.lowest")
        if self.task == "spectrum" and n.coupling_phases is not None and self.drive is None:
            raise ValueError("coupling_phases requires a drive")
        if self.task == "sweep" and not self.modes:
            raise ValueError("sweep needs at least one mode")
        if self.task == "evolve":
            if len(self.modes) != 1:
                raise ValueError("evolve needs exactly one mode")
            if (n.periods is None) == (n.target_photons is None):
                raise ValueError("evolve needs exactly one of numerics.periods, numerics.target_photons")
        return self


def load_config(path) -> ScenarioConfig:
    return ScenarioConfig.model_validate(json.loads(Path(path).read_text()))


def dump_config(config: ScenarioConfig) -> dict:
    return config.model_dump(mode="json", exclude_defaults=False)
