"""Request/response models for the HTTP service."""
from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, ConfigDict, Field

from .measures import DEFAULT_BUDGET


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class WitnessModel(_Strict):
    members: list[int]
    d: list[int]
    m: int


class RecordModel(_Strict):
    n: int
    k: int
    mode: str
    cardinality: int
    measure: str
    value: int
    lower: float
    upper: float
    within_band: bool
    approximate: bool
    witness: WitnessModel
    trial: int
    seed: int
    elapsed_ms: float


class MeasureRequest(_Strict):
    sequences: list[str] = Field(min_length=1)
    measure: Literal["c", "phi", "phitilde"] = "phi"
    k: int | None = None
    k_min: int | None = None
    k_max: int | None = None
    trials: int = 100_000  # estimator samples when approx is set
    seed: int = 0
    threads: int = 0
    budget: int = DEFAULT_BUDGET
    approx: bool = False


class MeasureResponse(_Strict):
    records: list[RecordModel]


class SampleRequest(_Strict):
    length: int
    size: int | None = None
    seeds: int | None = None
    seed: int = 0


class SampleResponse(_Strict):
    length: int
    mode: Literal["family", "generator"]
    cardinality: int
    seed: int
    sequences: list[str]


class McRequest(_Strict):
    length: int
    size: int | None = None
    seeds: int | None = None
    k: int | None = None
    k_min: int | None = None
    k_max: int | None = None
    trials: int = 100
    seed: int = 0
    threads: int = 0
    budget: int = DEFAULT_BUDGET
    approx: bool = False
    approx_samples: int = 100_000
    confidence: float = 0.05


class McResponse(_Strict):
    records: list[RecordModel]
    summary: dict


class BoundsRequest(_Strict):
    length: int
    k: int
    cardinality: int = 1
    which: Literal["family", "generator", "single"] = "family"


class BoundsResponse(_Strict):
    lower: float
    upper: float
    base: float
    which: str
    warnings: list[str]


class TailsRequest(_Strict):
    mode: Literal["exact", "closed", "integral", "hoeffding", "point"]
    n: int | None = None
    t: float | None = None
    c: float | None = None
    a: float | None = None


class TailsResponse(_Strict):
    value: float
    detail: dict[str, float] | None = None


class RkRequest(_Strict):
    length: int
    k: int
    seeds: int


class RkResponse(_Strict):
    r: int
    achievable: bool
    regime: int
    threshold: float
    m: int


class OracleRequest(_Strict):
    length: int
    size: int
    k: int
    trials: int | None = None
    seed: int = 0


class OracleResponse(_Strict):
    pmf: dict[int, float]
    empirical: dict[int, float] | None = None
    tv: float | None = None


class CollideRequest(_Strict):
    length: int
    seeds: int
    trials: int = 1000
    seed: int = 0


class CollideResponse(_Strict):
    length: int
    seeds: int
    trials: int
    seed: int
    formula: float
    empirical: float
