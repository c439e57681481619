"""Suite configuration models.

A single JSON document configures every suite; unknown keys are
rejected so a typo cannot silently fall back to a default.  The JSON
schema of `SuiteConfig` is published at idfi/schema/suite_config.schema.json
and a test keeps the file in sync with the models.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Literal

import pydantic
from pydantic import BaseModel, ConfigDict, Field

from idfi.errors import ValidationError
from idfi.space_forms import SpaceForm


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class SpaceSpec(StrictModel):
    """Constant-curvature space selector."""

    kind: Literal["flat", "sphere", "hyperbolic"]
    dim: int = Field(ge=1, le=4)
    kappa: float = 0.0

    def build(self) -> SpaceForm:
        if self.kind == "flat":
            if self.kappa != 0.0:
                raise ValidationError("flat space requires kappa = 0")
            return SpaceForm.flat(self.dim)
        if self.kind == "sphere":
            if self.dim != 2:
                raise ValidationError("sphere support is limited to dim = 2")
            return SpaceForm.sphere(self.kappa)
        return SpaceForm.hyperbolic(self.dim, self.kappa)


class RadialCaseSpec(StrictModel):
    """A radially symmetric test function on a space form.

    The bump is centered at the base point and every tensor is evaluated
    there, where isotropy makes the boundary data frame-independent.
    """

    label: str
    space: SpaceSpec
    profile: Literal["bump", "constant"] = "bump"
    width: float = Field(default=1.0, gt=0)
    horizon: float = Field(default=0.5, gt=0)


class FlatCaseSpec(StrictModel):
    """A Gaussian-mixture test function on flat space.

    The actual means/precisions are drawn reproducibly from the run seed
    and the case label; the spec fixes only the shape of the draw.
    """

    label: str
    dim: int = Field(ge=1, le=3)
    components: int = Field(default=1, ge=1, le=3)
    horizon: float = Field(default=0.5, gt=0)


class Part1Params(StrictModel):
    gaussian_cases: int = Field(default=20, ge=1)
    invariance_cases: int = Field(default=50, ge=1)
    psd_cases: int = Field(default=1000, ge=1)
    gns_cases: int = Field(default=100, ge=1)
    beckner_cases: int = Field(default=50, ge=1)


class TensorizationParams(StrictModel):
    dims: list[int] = Field(default_factory=lambda: [3, 6, 10])
    functions_per_dim: int = Field(default=334, ge=1)

    @pydantic.field_validator("dims")
    @classmethod
    def _dims_ok(cls, v):
        if not v or any(d < 1 or d > 10 for d in v):
            raise ValueError("dims must be nonempty with entries in 1..10")
        return v


class RiccatiParams(StrictModel):
    pair_cases: int = Field(default=50, ge=1)
    scalar_draws: int = Field(default=50, ge=1)
    max_dim: int = Field(default=5, ge=1, le=5)


def _default_flat_cases() -> list[FlatCaseSpec]:
    out = []
    for dim, comps, horizon in [
        (1, 1, 0.5), (2, 1, 0.5), (3, 1, 0.3), (3, 1, 0.8),
        (1, 2, 0.5), (2, 2, 0.5), (3, 2, 0.3), (3, 2, 0.8),
        (2, 3, 0.5), (3, 3, 0.5),
    ]:
        out.append(FlatCaseSpec(label=f"g{comps}-{dim}d-T{horizon}",
                                dim=dim, components=comps, horizon=horizon))
    return out


class FlatLsiParams(StrictModel):
    cases: list[FlatCaseSpec] = Field(default_factory=_default_flat_cases)


def _h(n: int) -> SpaceSpec:
    return SpaceSpec(kind="hyperbolic", dim=n, kappa=-1.0)


def _s2() -> SpaceSpec:
    return SpaceSpec(kind="sphere", dim=2, kappa=1.0)


def _default_spaceform_cases() -> list[RadialCaseSpec]:
    return [
        RadialCaseSpec(label="s2-w0.8-T0.3", space=_s2(), width=0.8, horizon=0.3),
        RadialCaseSpec(label="s2-w1.2-T0.1", space=_s2(), width=1.2, horizon=0.1),
        RadialCaseSpec(label="h2-w0.9-T0.5", space=_h(2), width=0.9, horizon=0.5),
        RadialCaseSpec(label="h3-w0.8-T0.5", space=_h(3), width=0.8, horizon=0.5),
        RadialCaseSpec(label="h3-w1.5-T0.25", space=_h(3), width=1.5, horizon=0.25),
        RadialCaseSpec(label="h3-constant", space=_h(3), profile="constant",
                       horizon=0.4),
    ]


class SpaceformLsiParams(StrictModel):
    cases: list[RadialCaseSpec] = Field(default_factory=_default_spaceform_cases)


class HamiltonParams(StrictModel):
    flat_cases: int = Field(default=200, ge=1)
    curved_cases: int = Field(default=64, ge=1)
    unsupported_cases: int = Field(default=4, ge=0)


def _default_nge_cases() -> list[RadialCaseSpec]:
    return [
        RadialCaseSpec(label="h3-w0.8-T0.3", space=_h(3), width=0.8, horizon=0.3),
        RadialCaseSpec(label="h3-w1.2-T0.5", space=_h(3), width=1.2, horizon=0.5),
        RadialCaseSpec(label="h2-w0.9-T0.4", space=_h(2), width=0.9, horizon=0.4),
        RadialCaseSpec(label="h3-constant", space=_h(3), profile="constant",
                       horizon=0.4),
    ]


class NgeParams(StrictModel):
    cases: list[RadialCaseSpec] = Field(default_factory=_default_nge_cases)


class StochasticParams(StrictModel):
    chi_square_bins: int = Field(default=20, ge=2)


SUITE_CHOICES = (
    "part1", "tensorization", "riccati_core", "flat_local_lsi",
    "spaceform_lsi", "hamilton", "nge_curved", "stochastic_validation",
)


class SuiteConfig(StrictModel):
    """Top-level run configuration with published schema."""

    suite: str = "all"
    seed: int = Field(default=0, ge=0)
    horizon: float = Field(default=0.5, gt=0)
    step_size: float = Field(default=1e-3, gt=0)
    n_paths: int = Field(default=100_000, ge=100)
    quadrature_points: int = Field(default=40, ge=4)
    tolerance_scale: float = Field(default=1.0, gt=0)
    jobs: int = Field(default=1, ge=1, le=64)
    out_dir: str | None = None
    part1: Part1Params = Field(default_factory=Part1Params)
    tensorization: TensorizationParams = Field(default_factory=TensorizationParams)
    riccati_core: RiccatiParams = Field(default_factory=RiccatiParams)
    flat_local_lsi: FlatLsiParams = Field(default_factory=FlatLsiParams)
    spaceform_lsi: SpaceformLsiParams = Field(default_factory=SpaceformLsiParams)
    hamilton: HamiltonParams = Field(default_factory=HamiltonParams)
    nge_curved: NgeParams = Field(default_factory=NgeParams)
    stochastic_validation: StochasticParams = Field(default_factory=StochasticParams)

    @pydantic.field_validator("suite")
    @classmethod
    def _suite_ok(cls, v):
        if v != "all" and v not in SUITE_CHOICES:
            raise ValueError(f"unknown suite {v!r}; choices: all, "
                             + ", ".join(SUITE_CHOICES))
        return v


def default_config() -> SuiteConfig:
    return SuiteConfig()


def load_config(path: str | Path) -> SuiteConfig:
    """Parse and validate a JSON config file."""
    try:
        raw = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot read config {path}: {exc}") from exc
    try:
        return SuiteConfig.model_validate(raw)
    except pydantic.ValidationError as exc:
        raise ValidationError(f"invalid config {path}:\n{exc}") from exc


def schema_dict() -> dict:
    return SuiteConfig.model_json_schema()


def schema_path() -> Path:
    return Path(__file__).resolve().parent.parent / "schema" / "suite_config.schema.json"
