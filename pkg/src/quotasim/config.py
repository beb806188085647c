"""Run configuration documents for the command-line front end.

Each subcommand reads one JSON document. Unknown fields are rejected.
"""

from __future__ import annotations

from typing import Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .analysis import SweepAxis, SweepSpec
from .population import BiasParams, PopulationConfig

Seed = Field(default=0, ge=0, le=2**64 - 1)


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class AxisConfig(_Strict):
    name: Literal["d_color", "d_shape", "f"]
    min: Optional[float] = None
    max: Optional[float] = None
    steps: Optional[int] = Field(default=None, ge=1)
    values: Optional[list[float]] = Field(default=None, min_length=1)

    @model_validator(mode="after")
    def _one_form(self):
        ranged = (self.min, self.max, self.steps)
        if self.values is not None:
            if any(v is not None for v in ranged):
                raise ValueError("give either values or min/max/steps, not both")
        elif any(v is None for v in ranged):
            raise ValueError("min, max and steps are all required when values is absent")
        return self

    def to_axis(self, name: Optional[str] = None) -> SweepAxis:
        name = name or self.name
        if self.values is not None:
            return SweepAxis(name, tuple(self.values))
        return SweepAxis.linspace(name, self.min, self.max, self.steps)


class RangeConfig(_Strict):
    min: Optional[float] = None
    max: Optional[float] = None
    steps: Optional[int] = Field(default=None, ge=1)
    values: Optional[list[float]] = Field(default=None, min_length=1)

    def to_values(self, name: str) -> tuple[float, ...]:
        return AxisConfig(name=name, **self.model_dump()).to_axis().values


class SimulateConfig(_Strict):
    n: int = Field(gt=0)
    f: float
    d_color: float = 0.0
    d_shape: float = 0.0
    k: float = Field(default=0.2, gt=0, lt=1)
    seed: int = Seed

    def population_config(self) -> PopulationConfig:
        return PopulationConfig(n=self.n, f=self.f, bias=BiasParams(self.d_color, self.d_shape), seed=self.seed)


class SweepConfig(_Strict):
    axes: list[AxisConfig] = Field(default_factory=list, max_length=2)
    d_color: float = -0.5
    d_shape: float = 0.0
    f: float = 0.2
    k: float = Field(default=0.2, gt=0, lt=1)
    n: int = Field(default=5000, gt=0)
    reps: int = Field(default=100, ge=1)
    master_seed: int = Seed

    def sweep_spec(self) -> SweepSpec:
        return SweepSpec(axes=tuple(a.to_axis() for a in self.axes), d_color=self.d_color,
                         d_shape=self.d_shape, f=self.f, k=self.k, n=self.n, reps=self.reps,
                         master_seed=self.master_seed)


class QualitySweepConfig(_Strict):
    f: float
    k: float = Field(default=0.2, gt=0, lt=1)
    d_color: RangeConfig
    d_shape_values: list[float] = Field(min_length=1)
    n: int = Field(default=10000, gt=0)
    reps: int = Field(default=100, ge=1)
    seed: int = Seed


class BoundaryConfig(_Strict):
    d_color: float
    f: float


class DatasetRunConfig(_Strict):
    spec: Optional[Union[str, dict]] = None
    fixture: Optional[Literal["trec", "wages", "citations", "compas"]] = None
    k: Optional[float] = Field(default=None, gt=0, lt=1)
    reps: int = Field(default=100, ge=1)
    seed: int = Seed

    @model_validator(mode="after")
    def _one_source(self):
        if (self.spec is None) == (self.fixture is None):
            raise ValueError("exactly one of 'spec' or 'fixture' is required")
        return self


COMMANDS = {
    "simulate": SimulateConfig,
    "sweep": SweepConfig,
    "quality-sweep": QualitySweepConfig,
    "boundary": BoundaryConfig,
    "dataset": DatasetRunConfig,
}

SEED_FIELDS = {"simulate": "seed", "sweep": "master_seed", "quality-sweep": "seed", "dataset": "seed"}


def describe_validation_error(exc: ValidationError) -> str:
    parts = []
    for err in exc.errors():
        loc = ".".join(str(p) for p in err["loc"]) or "<document>"
        parts.append(f"{loc}: {err['msg']}")
    return "; ".join(parts)
