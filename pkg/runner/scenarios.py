"""
Scenario files: YAML validated into RunConfig.

    cfg = load_scenario("config/scenarios/four_particles.yaml")
    cfg.particles.to_system()

Every section is optional; a command checks for the sections it needs with
`cfg.require("flux", "blocks")`.
"""
import logging
import os
from typing import Literal, Optional

import numpy as np
import yaml
from pydantic import BaseModel, Field, ValidationError, model_validator

from montecarlo.laws import InitialLaw, LawKind
from solvers.flowmap import InitialData
from solvers.fronttrack import FluxTable, FrontList
from solvers.measures import Orientation
from solvers.sticky import ParticleSystem

logger = logging.getLogger(__name__)


class ScenarioError(Exception):
    """Malformed or missing scenario; the CLI exits with status 2."""


class Grid(BaseModel):
    lo: float
    hi: float
    n:  int = Field(default=101, ge=2)

    @model_validator(mode="after")
    def _ordered(self) -> "Grid":
        if not self.hi > self.lo:
            raise ValueError(f"grid needs hi > lo, got [{self.lo}, {self.hi}]")
        return self

    def points(self) -> list[float]:
        return np.linspace(self.lo, self.hi, self.n).tolist()


# =============================================================================
# SECTIONS
# =============================================================================

class ParticlesSection(BaseModel):
    masses:     list[float]
    positions:  list[float]
    velocities: list[float]
    far_field:  float = Field(default=0.0, description="Velocity left of the leftmost atom.")

    @model_validator(mode="after")
    def _lengths(self) -> "ParticlesSection":
        if not len(self.masses) == len(self.positions) == len(self.velocities):
            raise ValueError("masses, positions and velocities must have the same length")
        return self

    def to_system(self) -> ParticleSystem:
        return ParticleSystem.from_arrays(self.masses, self.positions, self.velocities)

    def to_initial_data(self) -> InitialData:
        return InitialData.from_particles(self.to_system(), self.far_field)


class FluxSection(BaseModel):
    kind:   Literal["burgers", "table"] = "burgers"
    n:      int = Field(default=2, ge=1)
    states: list[float] = Field(default_factory=list)
    values: list[float] = Field(default_factory=list)

    def to_table(self) -> FluxTable:
        if self.kind == "burgers":
            return FluxTable.burgers(self.n)
        return FluxTable(tuple(self.states), tuple(self.values))


class BlocksSection(BaseModel):
    breakpoints: list[float]
    states:      list[int] = Field(description="State indices, one more than breakpoints.")
    t_end:       float = Field(default=1.0, ge=0)
    sample_at:   list[float] = Field(default_factory=list)

    def to_front_list(self, flux: FluxTable) -> FrontList:
        return FrontList.from_blocks(flux, self.breakpoints, self.states)


class LawSection(BaseModel):
    kind:            LawKind
    domain:          Optional[tuple[float, float]] = None
    u_l:             float = 1.0
    u_r:             float = 0.0
    location_spread: float = Field(default=0.0, ge=0)
    states:          list[float] = Field(default_factory=list)
    transition:      list[list[float]] = Field(default_factory=list)
    rate:            float = 1.0
    initial:         Optional[list[float]] = None
    gap_range:       tuple[float, float] = (0.0, 0.0)
    drift:           float = 0.0
    start:           float = 0.0
    jump_mean:       float = 1.0
    grid_step:       float = 0.01
    variance:        float = 1.0

    def to_law(self, seed: int) -> InitialLaw:
        if self.kind is LawKind.RIEMANN:
            return InitialLaw.riemann(self.u_l, self.u_r, self.location_spread, seed)
        if self.kind is LawKind.BLOCKS:
            return InitialLaw.blocks(self.states, self.location_spread, self.gap_range, seed)
        domain = self.domain or (-1.0, 1.0)
        if self.kind is LawKind.MARKOV_CHAIN:
            return InitialLaw.markov_chain(self.states, self.transition, self.rate, domain, self.initial, seed)
        if self.kind is LawKind.SPECTRALLY_NEGATIVE:
            return InitialLaw.spectrally_negative(
                self.drift, self.rate, self.jump_mean, domain, self.grid_step, self.start, seed
            )
        return InitialLaw.brownian_potential(self.variance, self.grid_step, domain, seed)


class EnsembleSection(BaseModel):
    n:      int = Field(default=10_000, ge=1)
    t:      float = Field(default=0.0, ge=0)
    xs:     list[float] = Field(default_factory=lambda: [0.0])
    window: Optional[float] = Field(default=None, gt=0, description="None = domain / sqrt(n).")


class HierarchySection(BaseModel):
    order: Literal["first", "second", "both"] = "first"
    k:     int = 0
    pair:  Optional[tuple[int, int]] = None
    x:     float = 0.0
    t:     float = Field(default=0.2, gt=0)
    dt:    float = Field(default=0.1, gt=0)
    w:     float = Field(default=0.1, gt=0)
    eps:   Optional[float] = Field(default=None, gt=0)


class ContactsSection(BaseModel):
    t:       float = Field(default=1.0, gt=0)
    x_grid:  Grid
    paths:   int = Field(default=1, ge=1)
    bins:    int = Field(default=30, ge=1)


class GenPotSection(BaseModel):
    t:           float = Field(default=1.0, ge=0)
    x:           float = 0.0
    x_grid:      Grid = Field(default_factory=lambda: Grid(lo=-5.0, hi=5.0, n=101))
    orientation: Orientation = Orientation.TABLE


class FlowmapSection(BaseModel):
    y_grid: Grid = Field(default_factory=lambda: Grid(lo=-5.0, hi=7.0, n=121))


# =============================================================================
# RUN CONFIG
# =============================================================================

class RunConfig(BaseModel):
    name:        str = "scenario"
    description: str = ""
    seed:        Optional[int] = None
    tolerance:   Optional[float] = Field(default=None, ge=0)
    times:       list[float] = Field(default_factory=list)
    particles:   Optional[ParticlesSection] = None
    flux:        Optional[FluxSection] = None
    blocks:      Optional[BlocksSection] = None
    law:         Optional[LawSection] = None
    ensemble:    Optional[EnsembleSection] = None
    hierarchy:   Optional[HierarchySection] = None
    contacts:    Optional[ContactsSection] = None
    genpot:      Optional[GenPotSection] = None
    flowmap:     Optional[FlowmapSection] = None

    @model_validator(mode="after")
    def _times(self) -> "RunConfig":
        if any(t < 0 for t in self.times):
            raise ValueError("times must be >= 0")
        return self

    def require(self, *sections: str) -> None:
        missing = [s for s in sections if getattr(self, s) in (None, [])]
        if missing:
            raise ScenarioError(f"Scenario '{self.name}' is missing section(s): {', '.join(missing)}")

    def resolved_seed(self, override: Optional[int] = None) -> int:
        if override is not None:
            return override
        if self.seed is None:
            raise ScenarioError(f"Scenario '{self.name}' needs an explicit seed (or --seed)")
        return self.seed


def _format_validation(e: ValidationError) -> str:
    lines = []
    for err in e.errors():
        path = ".".join(str(p) for p in err["loc"]) or "<root>"
        lines.append(f"  {path}: {err['msg']}")
    return "\n".join(lines)


def parse_scenario(text: str, source: str = "<string>") -> RunConfig:
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        where = f" line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        raise ScenarioError(f"{source}:{where} invalid YAML: {getattr(e, 'problem', e)}") from e
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ScenarioError(f"{source}: top level must be a mapping, got {type(raw).__name__}")
    try:
        return RunConfig.model_validate(raw)
    except ValidationError as e:
        raise ScenarioError(f"{source}: invalid scenario\n{_format_validation(e)}") from e


def load_scenario(path: str) -> RunConfig:
    if not os.path.exists(path):
        raise ScenarioError(f"Scenario file not found: {path}")
    with open(path, encoding="utf-8") as f:
        cfg = parse_scenario(f.read(), path)
    logger.info("Loaded scenario '%s' from %s", cfg.name, path)
    return cfg
