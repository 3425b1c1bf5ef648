"""Dataset-level evaluation, transfer measurement, and training export.

Attack results aggregate into a small report: success rate over the
examples the victim originally classified correctly, substitution rate
and similarity averaged over successes, query cost averaged over
attacked examples.  The per-example results round-trip through a
newline-delimited JSON file so the report can be re-derived later.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigError, ProtocolError
from .search import AttackConfig, AttackResult, Providers, beam_attack
from .text import Substitution, detokenize, tokenize
from .victim import LabelSet, VictimModel, predicted_label


@dataclass(frozen=True)
class Dataset:
    """Labeled raw strings to attack."""

    examples: tuple[tuple[str, int], ...]
    labels: LabelSet

    def __post_init__(self) -> None:
        if not self.examples:
            raise ConfigError("dataset is empty")
        for index, (_, label) in enumerate(self.examples):
            if not 0 <= label < len(self.labels):
                raise ConfigError(
                    f"dataset example {index} has label {label} outside the "
                    f"{len(self.labels)}-class label set"
                )

    def __len__(self) -> int:
        return len(self.examples)


def load_dataset(path: str | Path, labels: LabelSet) -> Dataset:
    """Read a dataset file: one ``{"text": ..., "label": ...}`` per line."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"dataset file not found: {path}")
    examples = []
    for line_no, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
            examples.append((str(record["text"]), int(record["label"])))
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"{path}:{line_no}: bad dataset record: {exc}") from exc
    return Dataset(examples=tuple(examples), labels=labels)


@dataclass(frozen=True)
class MetricsReport:
    attacked: int
    skipped: int
    errored: int
    successes: int
    asr: float | None
    mean_wsr: float | None
    mean_sim: float | None
    mean_queries: float | None


def fold_metrics(results: list[AttackResult]) -> MetricsReport:
    """Aggregate per-example results; a pure fold, recomputable anytime."""
    attacked = [r for r in results if r.status in ("success", "failure")]
    successes = [r for r in results if r.status == "success"]
    skipped = sum(1 for r in results if r.status == "skipped")
    errored = sum(1 for r in results if r.status == "error")

    def mean(values: list[float]) -> float | None:
        return sum(values) / len(values) if values else None

    return MetricsReport(
        attacked=len(attacked),
        skipped=skipped,
        errored=errored,
        successes=len(successes),
        asr=len(successes) / len(attacked) if attacked else None,
        mean_wsr=mean([r.wsr for r in successes if r.wsr is not None]),
        mean_sim=mean([r.similarity for r in successes if r.similarity is not None]),
        mean_queries=mean([float(r.queries) for r in attacked]),
    )


def evaluate(
    dataset: Dataset,
    model: VictimModel,
    providers: Providers,
    config: AttackConfig = AttackConfig(),
    workers: int = 1,
) -> tuple[MetricsReport, list[AttackResult]]:
    """Attack every dataset example and aggregate the outcomes.

    Results keep dataset order regardless of worker scheduling.
    Transport failures mark the affected example as errored and leave
    the rest of the run intact.
    """
    if workers < 1:
        raise ConfigError(f"worker count must be >= 1, got {workers}")

    def attack_one(example: tuple[str, int]) -> AttackResult:
        raw, gold_label = example
        text = tokenize(raw)
        try:
            return beam_attack(text, gold_label, model, providers, config)
        except ProtocolError as exc:
            return AttackResult(
                status="error",
                original=text,
                adversarial=None,
                gold_label=gold_label,
                original_pred=None,
                adv_pred=None,
                substitutions=(),
                wsr=None,
                similarity=None,
                queries=0,
                iterations=0,
                error=str(exc),
            )

    if workers == 1:
        results = [attack_one(example) for example in dataset.examples]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(attack_one, dataset.examples))
    return fold_metrics(results), results


def transfer_evaluate(results: list[AttackResult], other_model: VictimModel) -> float:
    """Accuracy of another victim on the successful adversarial texts.

    Lower accuracy means the adversarial examples transfer better.  The
    original victim always scores 0 by construction.
    """
    successes = [r for r in results if r.status == "success" and r.adversarial is not None]
    if not successes:
        raise ValueError("transfer evaluation needs at least one successful attack")
    probs = other_model.predict_proba([r.adversarial for r in successes])
    correct = sum(
        1 for r, p in zip(successes, probs) if predicted_label(p) == r.gold_label
    )
    return correct / len(successes)


def advtrain_records(results: list[AttackResult]) -> list[dict]:
    """Adversarial-training rows: each success paired with its gold label,
    so retraining teaches the true class on the perturbed input."""
    return [
        {"text": detokenize(r.adversarial), "label": r.gold_label}
        for r in results
        if r.status == "success" and r.adversarial is not None
    ]


def export_advtrain(results: list[AttackResult], out: str | Path) -> int:
    """Write adversarial-training records as JSON lines; returns the count."""
    records = advtrain_records(results)
    with open(out, "w", encoding="utf-8") as handle:
        for record in records:
            handle.write(json.dumps(record, ensure_ascii=False) + "\n")
    return len(records)


def result_to_record(result: AttackResult) -> dict:
    """Serialize one attack result; token sequences become detokenized
    strings, substitutions become ``[position, original, replacement]``
    triples."""
    return {
        "status": result.status,
        "original": detokenize(result.original),
        "adversarial": detokenize(result.adversarial) if result.adversarial else None,
        "gold_label": result.gold_label,
        "original_pred": result.original_pred,
        "adv_pred": result.adv_pred,
        "substitutions": [[s.position, s.original, s.replacement] for s in result.substitutions],
        "wsr": result.wsr,
        "similarity": result.similarity,
        "queries": result.queries,
        "iterations": result.iterations,
        "error": result.error,
    }


def record_to_result(record: dict) -> AttackResult:
    try:
        return AttackResult(
            status=str(record["status"]),
            original=tokenize(record["original"]),
            adversarial=tokenize(record["adversarial"]) if record.get("adversarial") else None,
            gold_label=int(record["gold_label"]),
            original_pred=record.get("original_pred"),
            adv_pred=record.get("adv_pred"),
            substitutions=tuple(
                Substitution(int(p), str(o), str(r)) for p, o, r in record.get("substitutions", [])
            ),
            wsr=record.get("wsr"),
            similarity=record.get("similarity"),
            queries=int(record.get("queries", 0)),
            iterations=int(record.get("iterations", 0)),
            error=record.get("error"),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad result record: {exc}") from exc


def save_results(results: list[AttackResult], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for result in results:
            handle.write(json.dumps(result_to_record(result), ensure_ascii=False) + "\n")


def load_results(path: str | Path) -> list[AttackResult]:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"results file not found: {path}")
    results = []
    for line in path.read_text(encoding="utf-8").splitlines():
        if line.strip():
            results.append(record_to_result(json.loads(line)))
    return results


_SUMMARY_ROWS = (
    ("attacked", "d"),
    ("skipped", "d"),
    ("errored", "d"),
    ("successes", "d"),
    ("asr", ".4f"),
    ("mean_wsr", ".4f"),
    ("mean_sim", ".4f"),
    ("mean_queries", ".1f"),
)


def format_summary(metrics: MetricsReport) -> str:
    """Aligned ``metric: value`` block for terminal output."""
    width = max(len(name) for name, _ in _SUMMARY_ROWS) + 1
    lines = []
    for name, spec in _SUMMARY_ROWS:
        value = getattr(metrics, name)
        rendered = "n/a" if value is None else format(value, spec)
        lines.append(f"{name + ':':<{width}} {rendered}")
    lines.append("# wsr and sim averaged over successes only; queries over attacked examples")
    return "\n".join(lines)
