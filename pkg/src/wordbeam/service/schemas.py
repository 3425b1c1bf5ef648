"""Request/response models for the HTTP service.

The wire format for attack results matches the results-file format
exactly, so records can flow file -> service -> file without loss.
Provider paths are resolved on the service host; omitted paths fall
back to the bundled toy fixtures.
"""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, Field

from ..search import AttackConfig


class AttackSettings(BaseModel):
    """Search knobs; ``beam_size: null`` keeps the whole pool."""

    beam_size: int | None = 10
    top_n: int = 50
    sim_threshold: float = 0.5
    wsr_threshold: float = 1.0
    oov_token: str = "[oov]"
    space_mode: Literal["embedding", "mlm", "mixed"] = "mixed"
    require_final_sim: bool = False

    def to_core(self) -> AttackConfig:
        return AttackConfig(
            beam_size=self.beam_size,
            top_n=self.top_n,
            sim_threshold=self.sim_threshold,
            wsr_threshold=self.wsr_threshold,
            oov_token=self.oov_token,
            space_mode=self.space_mode,
            require_final_sim=self.require_final_sim,
        )


class ProviderPaths(BaseModel):
    """Server-side paths of the candidate/judging fixtures."""

    embedding_file: str | None = None
    stopword_file: str | None = None
    pos_lexicon: str | None = None
    mlm_table: str | None = None
    mlm_command: str | None = Field(
        default=None, description="line-protocol masked-LM command; overrides mlm_table"
    )


class ExampleIn(BaseModel):
    text: str
    label: int


class AttackRequest(BaseModel):
    text: str
    label: int
    victim: str | None = None
    labels: list[str] | None = None
    providers: ProviderPaths = ProviderPaths()
    settings: AttackSettings = AttackSettings()


class EvaluateRequest(BaseModel):
    examples: list[ExampleIn]
    victim: str | None = None
    labels: list[str] | None = None
    providers: ProviderPaths = ProviderPaths()
    settings: AttackSettings = AttackSettings()
    workers: int = 1


class ResultModel(BaseModel):
    """One attack outcome; identical shape to a results-file record."""

    status: str
    original: str
    adversarial: str | None = None
    gold_label: int
    original_pred: int | None = None
    adv_pred: int | None = None
    substitutions: list[tuple[int, str, str]] = []
    wsr: float | None = None
    similarity: float | None = None
    queries: int = 0
    iterations: int = 0
    error: str | None = None


class MetricsModel(BaseModel):
    attacked: int
    skipped: int
    errored: int
    successes: int
    asr: float | None = None
    mean_wsr: float | None = None
    mean_sim: float | None = None
    mean_queries: float | None = None


class EvaluateResponse(BaseModel):
    metrics: MetricsModel
    results: list[ResultModel]


class TransferRequest(BaseModel):
    results: list[ResultModel]
    victim: str
    labels: list[str] | None = None


class TransferResponse(BaseModel):
    accuracy: float
    successes: int


class ReportRequest(BaseModel):
    results: list[ResultModel]


class ReportResponse(BaseModel):
    metrics: MetricsModel


class AdvtrainRequest(BaseModel):
    results: list[ResultModel]


class AdvtrainRecord(BaseModel):
    text: str
    label: int


class AdvtrainResponse(BaseModel):
    records: list[AdvtrainRecord]
    count: int


class HealthResponse(BaseModel):
    status: str
    version: str
