"""FastAPI application exposing the attack engine.

The service owns the expensive state: fixture files are parsed once and
cached by path, while per-request subprocess providers (external
victims and masked LMs) are spawned and torn down inside the request.
Configuration mistakes surface as 400 responses, provider protocol
violations as 502.

Run with ``uvicorn wordbeam.service.app:app``.
"""

from __future__ import annotations

from contextlib import ExitStack, contextmanager
from functools import lru_cache
from typing import Iterator

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..config import fixture_path, parse_victim_spec
from ..errors import ConfigError, ProtocolError
from ..evaluate import (
    Dataset,
    MetricsReport,
    advtrain_records,
    evaluate,
    fold_metrics,
    record_to_result,
    result_to_record,
    transfer_evaluate,
)
from ..importance import load_stopwords
from ..search import Providers, beam_attack
from ..spaces import (
    HashedBowEncoder,
    SubprocessMaskedLM,
    load_embeddings,
    load_mlm_table,
    load_pos_lexicon,
)
from ..text import tokenize
from ..victim import LabelSet, VictimModel, load_lexicon_model, spawn_external_victim
from .schemas import (
    AdvtrainRecord,
    AdvtrainRequest,
    AdvtrainResponse,
    AttackRequest,
    EvaluateRequest,
    EvaluateResponse,
    HealthResponse,
    MetricsModel,
    ProviderPaths,
    ReportRequest,
    ReportResponse,
    ResultModel,
    TransferRequest,
    TransferResponse,
)


@lru_cache(maxsize=32)
def _embedding_space(path: str):
    return load_embeddings(path)


@lru_cache(maxsize=32)
def _stopwords(path: str):
    return load_stopwords(path)


@lru_cache(maxsize=32)
def _pos_tagger(path: str):
    return load_pos_lexicon(path)


@lru_cache(maxsize=32)
def _mlm_table(path: str):
    return load_mlm_table(path)


@lru_cache(maxsize=8)
def _lexicon_victim(path: str):
    return load_lexicon_model(path)


_ENCODER = HashedBowEncoder()


@contextmanager
def _open_victim(spec: str | None, labels: list[str] | None) -> Iterator[VictimModel]:
    """Yield a ready victim; external ones live for the request only.

    ``labels`` names the classes of an external victim (the line
    protocol carries none); lexicon victims bring their own.
    """
    if spec is None:
        spec = "lexicon:" + str(fixture_path("victim_toy.json"))
    kind, argument = parse_victim_spec(spec)
    if kind == "lexicon":
        yield _lexicon_victim(argument)
        return
    label_set = LabelSet(tuple(labels) if labels else ("positive", "negative"))
    victim = spawn_external_victim(argument, label_set)
    try:
        yield victim
    finally:
        victim.close()


@contextmanager
def _open_providers(paths: ProviderPaths) -> Iterator[Providers]:
    embedding = _embedding_space(paths.embedding_file or str(fixture_path("embeddings_toy.txt")))
    stopwords = _stopwords(paths.stopword_file or str(fixture_path("stopwords_en.txt")))
    tagger = _pos_tagger(paths.pos_lexicon or str(fixture_path("pos_lexicon_toy.tsv")))
    with ExitStack() as stack:
        if paths.mlm_command:
            mlm = stack.enter_context(SubprocessMaskedLM(paths.mlm_command))
        else:
            mlm = _mlm_table(paths.mlm_table or str(fixture_path("mlm_table_toy.tsv")))
        yield Providers(
            tagger=tagger,
            encoder=_ENCODER,
            stopwords=stopwords,
            embedding=embedding,
            mlm=mlm,
        )


def _metrics_model(report: MetricsReport) -> MetricsModel:
    return MetricsModel(
        attacked=report.attacked,
        skipped=report.skipped,
        errored=report.errored,
        successes=report.successes,
        asr=report.asr,
        mean_wsr=report.mean_wsr,
        mean_sim=report.mean_sim,
        mean_queries=report.mean_queries,
    )


def create_app() -> FastAPI:
    app = FastAPI(
        title="wordbeam",
        version=__version__,
        description="Word-substitution attacks against black-box text classifiers.",
    )

    @app.exception_handler(ConfigError)
    async def config_error(request: Request, exc: ConfigError) -> JSONResponse:
        return JSONResponse(
            status_code=400, content={"detail": {"kind": "config", "message": str(exc)}}
        )

    @app.exception_handler(ProtocolError)
    async def protocol_error(request: Request, exc: ProtocolError) -> JSONResponse:
        return JSONResponse(
            status_code=502, content={"detail": {"kind": "protocol", "message": str(exc)}}
        )

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(status="ok", version=__version__)

    @app.post("/attack", response_model=ResultModel)
    def attack(request: AttackRequest) -> ResultModel:
        with _open_victim(request.victim, request.labels) as model, _open_providers(
            request.providers
        ) as providers:
            result = beam_attack(
                tokenize(request.text),
                request.label,
                model,
                providers,
                request.settings.to_core(),
            )
        return ResultModel(**result_to_record(result))

    @app.post("/evaluate", response_model=EvaluateResponse)
    def evaluate_dataset(request: EvaluateRequest) -> EvaluateResponse:
        with _open_victim(request.victim, request.labels) as model, _open_providers(
            request.providers
        ) as providers:
            dataset = Dataset(
                examples=tuple((e.text, e.label) for e in request.examples),
                labels=model.labels,
            )
            metrics, results = evaluate(
                dataset, model, providers, request.settings.to_core(), workers=request.workers
            )
        return EvaluateResponse(
            metrics=_metrics_model(metrics),
            results=[ResultModel(**result_to_record(r)) for r in results],
        )

    @app.post("/transfer", response_model=TransferResponse)
    def transfer(request: TransferRequest) -> TransferResponse:
        results = [record_to_result(r.model_dump()) for r in request.results]
        successes = sum(1 for r in results if r.status == "success")
        if successes == 0:
            raise ConfigError("transfer evaluation needs at least one successful attack")
        with _open_victim(request.victim, request.labels) as model:
            accuracy = transfer_evaluate(results, model)
        return TransferResponse(accuracy=accuracy, successes=successes)

    @app.post("/report", response_model=ReportResponse)
    def report(request: ReportRequest) -> ReportResponse:
        results = [record_to_result(r.model_dump()) for r in request.results]
        return ReportResponse(metrics=_metrics_model(fold_metrics(results)))

    @app.post("/advtrain", response_model=AdvtrainResponse)
    def advtrain(request: AdvtrainRequest) -> AdvtrainResponse:
        results = [record_to_result(r.model_dump()) for r in request.results]
        records = [AdvtrainRecord(**record) for record in advtrain_records(results)]
        return AdvtrainResponse(records=records, count=len(records))

    return app


app = create_app()
