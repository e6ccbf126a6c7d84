"""Request and response bodies for the HTTP service."""

from __future__ import annotations

from typing import Literal, Union

from pydantic import BaseModel, ConfigDict, Field


class GeneratedDatasetSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["generated"] = "generated"
    name: Literal["circles", "quadrants", "bands"] = "circles"
    n: int = 200
    noise: float = 0.1
    seed: int = 0


class CsvDatasetSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["csv"]
    text: str
    label_col: str = "label"
    feature_cols: list[str] | None = None
    label_map: dict[str, int] | None = None


DatasetSpec = Union[GeneratedDatasetSpec, CsvDatasetSpec]


class CompileRequest(BaseModel):
    model_config = ConfigDict(populate_by_name=True, extra="forbid")

    features: int = 2
    hidden: int = 2
    bits: int = 1
    activation: str | list[float] = "square"
    first_layer_bias: bool = False
    last_bias_levels: tuple[float, float] = (-0.5, 0.0)
    dataset: DatasetSpec = Field(default_factory=GeneratedDatasetSpec)
    lam: float | None = Field(default=None, alias="lambda")
    path: Literal["auto", "structured", "generic"] = "auto"

    def to_config(self) -> dict:
        doc = self.model_dump(by_alias=True)
        return doc


class TrainRequest(CompileRequest):
    solver: Literal["exact", "sa", "remote"] = "exact"
    reads: int = 300
    seed: int = 0
    sweeps: int = 1000
    beta_range: tuple[float, float] | None = None
    schedule: dict | None = None
    max_vars: int = 28
    endpoint: str | None = None
    resolution: int = 41

    def to_config(self) -> dict:
        doc = super().to_config()
        if doc.get("schedule") is None:
            doc.pop("schedule", None)  # let the pipeline default apply
        return doc


class CompareRequest(TrainRequest):
    omega: float = 5.0
    runs: int = 10
    classical_seed: int = 0
    lr: float = 0.05
    steps: int = 3000


class ReduceRequest(BaseModel):
    model_config = ConfigDict(populate_by_name=True, extra="forbid")

    polynomial: str
    lam: float | None = Field(default=None, alias="lambda")
    verify: bool = True
    max_vars: int = 22


class DatasetGenRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: Literal["circles", "quadrants", "bands"] = "circles"
    n: int = 200
    noise: float = 0.1
    seed: int = 0


class SampleRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    qubo: dict
    num_reads: int = 300
    schedule: dict | None = None


class SampleRecord(BaseModel):
    assignment: list[int]
    energy: float
    occurrences: int = 1


class CompileResponse(BaseModel):
    model: dict
    counts: dict
    metadata: dict


class TrainResponse(BaseModel):
    model: dict
    samples: list[dict]
    metrics: dict
    boundary_csv: str | None
    metadata: dict


class ReduceResponse(BaseModel):
    model_text: str
    report: dict
    n_aux: int
    metadata: dict


class DatasetGenResponse(BaseModel):
    csv: str
    metadata: dict


class SampleResponse(BaseModel):
    samples: list[SampleRecord]


class HealthResponse(BaseModel):
    status: str
    version: str
