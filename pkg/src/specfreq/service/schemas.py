"""Pydantic request/response models for the HTTP service.

Frequencies cross the wire in radians inside ``[-pi, pi)``; the CLI is
responsible for translating its "multiples of pi" syntax before calling.
Series indices are 1-based everywhere, matching the library convention.
"""

from __future__ import annotations

from typing import Any, Literal

from pydantic import BaseModel, Field, model_validator

SCHEMA_VERSION = "specfreq/1"


class PanelPayload(BaseModel):
    """A panel, either as raw CSV text or as an explicit matrix."""

    csv: str | None = None
    values: list[list[float]] | None = None
    labels: list[str] | None = None
    has_header: bool | None = None

    @model_validator(mode="after")
    def _exactly_one_source(self):
        if (self.csv is None) == (self.values is None):
            raise ValueError("provide exactly one of 'csv' or 'values'")
        return self


class DifferenceSpec(BaseModel):
    kind: Literal["regular", "seasonal"]
    period: int = 1


class PairsSpec(BaseModel):
    """Which series pairs to test.

    ``all`` selects every off-diagonal pair, ``diagonal`` the auto-spectra,
    ``explicit`` the listed 1-based pairs, and ``blocks`` groups series by
    the label text before ``separator`` and selects cross-block pairs.
    """

    mode: Literal["all", "diagonal", "explicit", "blocks"] = "all"
    pairs: list[tuple[int, int]] | None = None
    separator: str = "_"

    @model_validator(mode="after")
    def _pairs_only_for_explicit(self):
        if self.mode == "explicit" and not self.pairs:
            raise ValueError("mode 'explicit' needs a non-empty 'pairs' list")
        if self.mode != "explicit" and self.pairs:
            raise ValueError("'pairs' is only valid with mode 'explicit'")
        return self


class FreqsSpec(BaseModel):
    """A discrete frequency set, an interval, or a seasonal preset."""

    preset: Literal["quarterly", "monthly"] | None = None
    values: list[float] | None = None
    interval: tuple[float, float] | None = None
    grid_points: int | None = None

    @model_validator(mode="after")
    def _exactly_one(self):
        chosen = sum(x is not None for x in (self.preset, self.values, self.interval))
        if chosen != 1:
            raise ValueError("specify exactly one of 'preset', 'values', or 'interval'")
        if self.grid_points is not None and self.interval is None:
            raise ValueError("'grid_points' is only valid with 'interval'")
        return self


class EstimateRequest(BaseModel):
    panel: PanelPayload
    difference: DifferenceSpec | None = None
    freqs: FreqsSpec = Field(default_factory=lambda: FreqsSpec(preset="quarterly"))
    l_n: int | None = None
    c: float = 0.5


class SpectrumRow(BaseModel):
    omega: float
    i: int
    j: int
    re: float
    im: float


class EstimateResponse(BaseModel):
    schema_version: str = Field(default=SCHEMA_VERSION, alias="schema")
    labels: list[str]
    l_n: int
    c: float
    n: int
    rows: list[SpectrumRow]

    model_config = {"populate_by_name": True}


class TestRequest(BaseModel):
    panel: PanelPayload
    difference: DifferenceSpec | None = None
    pairs: PairsSpec = Field(default_factory=PairsSpec)
    freqs: FreqsSpec = Field(default_factory=lambda: FreqsSpec(preset="quarterly"))
    alpha: float = 0.05
    B: int = 1000
    seed: int = 0
    l_n: int | None = None
    c: float = 0.5
    b_n: float | None = None


class ArgMax(BaseModel):
    i: int
    j: int
    label_i: str
    label_j: str
    omega: float


class TestResponse(BaseModel):
    schema_version: str = Field(default=SCHEMA_VERSION, alias="schema")
    statistic: float
    critical_value: float
    p_value: float
    alpha: float
    reject: bool
    B: int
    l_n: int
    c: float
    b_n: float
    seed: int
    arg_max: ArgMax

    model_config = {"populate_by_name": True}


class FdrRequest(BaseModel):
    panel: PanelPayload
    difference: DifferenceSpec | None = None
    pairs: PairsSpec = Field(default_factory=PairsSpec)
    freqs: FreqsSpec = Field(default_factory=lambda: FreqsSpec(preset="quarterly"))
    alpha: float = 0.05
    B: int = 1000
    seed: int = 0
    l_n: int | None = None
    c: float = 0.5
    b_n: float | None = None


class FdrRow(BaseModel):
    q: int
    label_i: str
    label_j: str
    statistic: float
    p_value: float
    v: float
    rejected: bool
    star: bool  # marks pairs NOT significant, for heat-map annotation


class PvalueMatrix(BaseModel):
    labels: list[str]
    p_values: list[list[float | None]]
    stars: list[list[bool | None]]


class FdrResponse(BaseModel):
    schema_version: str = Field(default=SCHEMA_VERSION, alias="schema")
    alpha: float
    Q: int
    t_hat: float
    fallback_used: bool
    B: int
    l_n: int | None
    c: float
    seed: int
    rows: list[FdrRow]
    matrix: PvalueMatrix | None = None

    model_config = {"populate_by_name": True}


class SimulateRequest(BaseModel):
    model: Literal["m1", "m2", "m3", "m4", "m5", "m6"]
    n: int
    p: int
    param: float
    reps: int
    experiment: Literal["size", "power", "fdr"] = "size"
    freqs: FreqsSpec = Field(default_factory=lambda: FreqsSpec(preset="quarterly"))
    alpha: float = 0.05
    B: int = 1000
    seed: int = 0
    l_n: int | None = None
    c: float = 0.5
    b_n: float | None = None
    burn_in: int = 200
    blocks: int = 10
    workers: int = 1


class SimulateResponse(BaseModel):
    schema_version: str = Field(default=SCHEMA_VERSION, alias="schema")
    experiment: str
    replications: int
    rejection_rate: float | None = None
    fdr: float | None = None
    power: float | None = None
    config: dict[str, Any]

    model_config = {"populate_by_name": True}


class HealthResponse(BaseModel):
    status: str = "ok"
    schema_version: str = Field(default=SCHEMA_VERSION, alias="schema")
    version: str

    model_config = {"populate_by_name": True}
