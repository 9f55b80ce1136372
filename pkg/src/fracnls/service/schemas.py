"""Pydantic models: the JSON config schema and the service request/response
bodies.  The config file parsed by the CLI is exactly the JSON serialization
of RunConfigModel; unknown keys are rejected and numeric constraints are
enforced at parse time."""

from __future__ import annotations

from typing import Annotated, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ..regularization import (CoefficientSpec, Constant, Delta, DeltaPower,
                              ScalingLaw, SmoothProfile)


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class GridModel(StrictModel):
    L: float = Field(gt=0, description="domain length, box [0, L)")
    n: int = Field(ge=8, description="grid size, power of two")

    @field_validator("n")
    @classmethod
    def _power_of_two(cls, v: int) -> int:
        if v & (v - 1):
            raise ValueError("grid size must be a power of two")
        return v


class OrderModel(StrictModel):
    s: float = Field(gt=0, description="fractional power of the Laplacian")


class TimeModel(StrictModel):
    T: float = Field(gt=0)
    dt: float = Field(gt=0)
    snapshot_times: list[float] = Field(default_factory=list)
    diag_stride: int = Field(default=1, ge=1)
    allow_large_dt: bool = False
    integrator: Literal["strang", "lie"] = "strang"

    @model_validator(mode="after")
    def _check(self) -> "TimeModel":
        if self.dt > self.T:
            raise ValueError(f"dt = {self.dt} exceeds final time T = {self.T}")
        for t in self.snapshot_times:
            if t < 0 or t > self.T + 0.5 * self.dt:
                raise ValueError(f"snapshot time {t} outside [0, T]")
        return self


class ConstantTerm(StrictModel):
    type: Literal["constant"]
    value: float = Field(ge=0)


class DeltaTerm(StrictModel):
    type: Literal["delta"]
    location: float
    strength: float = Field(default=1.0, ge=0)


class DeltaPowerTerm(StrictModel):
    type: Literal["delta_power"]
    location: float
    exponent: int = Field(ge=2)
    strength: float = Field(default=1.0, ge=0)


class Sin2Term(StrictModel):
    """offset + amplitude * sin(pi * periods * x * 2 / L)^2, a smooth profile."""

    type: Literal["sin2"]
    offset: float = Field(default=0.0, ge=0)
    amplitude: float = Field(default=1.0, ge=0)
    periods: int = Field(default=1, ge=1)


class GaussianTerm(StrictModel):
    type: Literal["gaussian"]
    center: float
    width: float = Field(gt=0)
    amplitude: float = Field(ge=0)
    offset: float = Field(default=0.0, ge=0)


CoefficientTerm = Annotated[
    Union[ConstantTerm, DeltaTerm, DeltaPowerTerm, Sin2Term, GaussianTerm],
    Field(discriminator="type"),
]


class CoefficientModel(StrictModel):
    terms: list[CoefficientTerm] = Field(min_length=1)

    def to_spec(self, length: float) -> CoefficientSpec:
        out = []
        for t in self.terms:
            if isinstance(t, ConstantTerm):
                out.append(Constant(t.value))
            elif isinstance(t, DeltaTerm):
                out.append(Delta(t.location, t.strength))
            elif isinstance(t, DeltaPowerTerm):
                out.append(DeltaPower(t.location, t.exponent, t.strength))
            elif isinstance(t, Sin2Term):
                o, a, p = t.offset, t.amplitude, t.periods
                out.append(SmoothProfile(
                    lambda x, o=o, a=a, p=p: o + a * np.sin(2.0 * np.pi * p * x / length) ** 2,
                    label=f"sin2(offset={o:g},amplitude={a:g},periods={p})"))
            else:
                c, w, a, o = t.center, t.width, t.amplitude, t.offset
                out.append(SmoothProfile(
                    lambda x, c=c, w=w, a=a, o=o: o + a * np.exp(-((x - c) / w) ** 2),
                    label=f"gaussian(center={c:g},width={w:g})"))
        return CoefficientSpec(tuple(out))


class CoefficientsModel(StrictModel):
    V: CoefficientModel
    g: CoefficientModel


class InitialModel(StrictModel):
    preset: Optional[Literal["paper_bump", "smooth_bump"]] = None
    gaussian: Optional[GaussianTerm] = None

    @model_validator(mode="after")
    def _exactly_one(self) -> "InitialModel":
        if (self.preset is None) == (self.gaussian is None):
            raise ValueError("initial data needs exactly one of 'preset' or 'gaussian'")
        return self

    @property
    def label(self) -> str:
        return self.preset if self.preset else "gaussian"


class ScalingModel(StrictModel):
    kind: Literal["power", "log"] = "power"
    N0: Optional[float] = Field(default=None, gt=0)

    def to_law(self) -> ScalingLaw:
        return ScalingLaw(self.kind, self.N0)


class RegularizationModel(StrictModel):
    epsilon: Optional[float] = Field(default=None, gt=0, le=1)
    net: Optional[list[float]] = None
    scaling: ScalingModel = Field(default_factory=ScalingModel)

    @model_validator(mode="after")
    def _check(self) -> "RegularizationModel":
        if (self.epsilon is None) == (self.net is None):
            raise ValueError("regularization needs exactly one of 'epsilon' or 'net'")
        if self.net is not None:
            if len(self.net) < 1:
                raise ValueError("epsilon net must be nonempty")
            if any(not 0 < e <= 1 for e in self.net):
                raise ValueError("epsilon net values must lie in (0, 1]")
            if any(b >= a for a, b in zip(self.net, self.net[1:])):
                raise ValueError("epsilon net must be strictly decreasing")
            if 1.0 in self.net and self.scaling.kind != "power":
                raise ValueError("epsilon = 1.0 requires the power scaling law")
        if self.epsilon is not None and self.epsilon == 1.0 and self.scaling.kind != "power":
            raise ValueError("epsilon = 1.0 requires the power scaling law")
        return self


class OutputModel(StrictModel):
    dir: Optional[str] = None
    formats: list[Literal["csv"]] = Field(default_factory=lambda: ["csv"])


class PerturbationModel(StrictModel):
    """Uniqueness-study injection: eps^k times a bounded smooth profile."""

    k: float = Field(default=3.0, ge=0)
    target: Literal["data", "potential", "nonlinearity"] = "data"


class RunConfigModel(StrictModel):
    grid: GridModel
    order: OrderModel
    time: TimeModel
    coefficients: CoefficientsModel
    initial: InitialModel
    regularization: RegularizationModel
    output: OutputModel = Field(default_factory=OutputModel)
    perturbation: Optional[PerturbationModel] = None

    def canonical_echo(self) -> dict:
        return self.model_dump(mode="json")


class CaseOverridesModel(StrictModel):
    """Optional knobs for the case presets (net/grid/time stay preset-default
    when omitted)."""

    n: Optional[int] = None
    dt: Optional[float] = Field(default=None, gt=0)
    T: Optional[float] = Field(default=None, gt=0)
    net: Optional[list[float]] = None
    initial: Optional[Literal["paper_bump", "smooth_bump"]] = None
    diag_stride: int = Field(default=1, ge=1)

    @field_validator("n")
    @classmethod
    def _pow2(cls, v):
        if v is not None and (v < 8 or v & (v - 1)):
            raise ValueError("grid size must be a power of two >= 8")
        return v


# ---------------------------------------------------------------------------
# Request / response bodies

class RunRequest(StrictModel):
    config: RunConfigModel
    out_dir: str
    dealias: bool = False
    jobs: int = Field(default=1, ge=1)


class CaseRequest(StrictModel):
    label: Literal["case1", "case2", "case3", "case4"]
    out_dir: str
    overrides: Optional[CaseOverridesModel] = None
    dealias: bool = False
    jobs: int = Field(default=1, ge=1)


class ManifestResponse(StrictModel):
    out_dir: str
    manifest: dict
    warnings: list[str]


class SelftestCheck(StrictModel):
    name: str
    passed: bool
    detail: str


class SelftestResponse(StrictModel):
    passed: bool
    checks: list[SelftestCheck]
    seed: int = 0


class HealthResponse(StrictModel):
    status: str
    version: str
