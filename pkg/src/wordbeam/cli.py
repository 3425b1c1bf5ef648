"""Command-line client for the attack service.

Every subcommand talks HTTP to the FastAPI app: against a remote base
URL when ``--server`` is given, otherwise against an in-process
instance, so no separate server is needed for local runs.  The client
side owns file I/O (configs, datasets, results); the service side owns
all computation.

Exit codes: 0 on a completed run (even with failed attacks), 2 for
configuration problems, 3 for provider protocol violations.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any

import httpx

from .config import RunConfig, build_run_config, read_config_file, run_config_to_dict
from .errors import ConfigError, ProtocolError, WordbeamError
from .evaluate import MetricsReport, format_summary

_OVERRIDE_KEYS = (
    "dataset",
    "victim",
    "labels",
    "embedding_file",
    "stopword_file",
    "pos_lexicon",
    "mlm_table",
    "mlm_command",
    "out",
    "workers",
    "seed",
    "beam_size",
    "top_n",
    "sim_threshold",
    "wsr_threshold",
    "space_mode",
    "oov_token",
    "require_final_sim",
)


class ServiceClient:
    """Minimal JSON-over-HTTP client with error-kind mapping."""

    def __init__(self, server: str | None):
        if server:
            self._client = httpx.Client(base_url=server, timeout=600.0)
        else:
            # Sync in-process transport for the bundled app; keeps local
            # runs serverless while exercising the same HTTP surface.
            # starlette >= 1.3 warns about the httpx backing (a UserWarning
            # subclass), but its replacement is not installable here.
            import warnings

            with warnings.catch_warnings():
                warnings.simplefilter("ignore", UserWarning)
                from fastapi.testclient import TestClient

            from .service.app import create_app

            self._client = TestClient(create_app())

    def post(self, path: str, payload: dict[str, Any]) -> dict[str, Any]:
        try:
            response = self._client.post(path, json=payload)
        except httpx.HTTPError as exc:
            raise ProtocolError(f"service unreachable: {exc}") from exc
        if response.status_code >= 400:
            kind, message = self._error_parts(response)
            if kind == "protocol":
                raise ProtocolError(message)
            if response.status_code in (400, 422) or kind == "config":
                raise ConfigError(message)
            raise WordbeamError(message)
        return response.json()

    @staticmethod
    def _error_parts(response: httpx.Response) -> tuple[str, str]:
        try:
            detail = response.json().get("detail")
        except ValueError:
            detail = None
        if isinstance(detail, dict):
            return str(detail.get("kind", "")), str(detail.get("message", response.text))
        return "", response.text

    def close(self) -> None:
        self._client.close()


def _overrides_from_args(args: argparse.Namespace) -> dict[str, Any]:
    return {key: getattr(args, key, None) for key in _OVERRIDE_KEYS}


def _load_run_config(args: argparse.Namespace) -> RunConfig:
    file_values = read_config_file(args.config) if args.config else {}
    return build_run_config(file_values, _overrides_from_args(args))


def _read_json_lines(path: str | Path, what: str) -> list[dict]:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"{what} file not found: {path}")
    records = []
    for line_no, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}:{line_no}: bad JSON record: {exc}") from exc
        if not isinstance(record, dict):
            raise ConfigError(f"{path}:{line_no}: expected a JSON object")
        records.append(record)
    return records


def _read_dataset(path: Path) -> list[dict]:
    examples = []
    for record in _read_json_lines(path, "dataset"):
        if "text" not in record or "label" not in record:
            raise ConfigError(f"dataset records need 'text' and 'label' fields: {path}")
        examples.append({"text": str(record["text"]), "label": int(record["label"])})
    if not examples:
        raise ConfigError(f"dataset is empty: {path}")
    return examples


def _write_json_lines(records: list[dict], path: Path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for record in records:
            handle.write(json.dumps(record, ensure_ascii=False) + "\n")


def _print_metrics(metrics: dict[str, Any]) -> None:
    print(format_summary(MetricsReport(**metrics)))


def cmd_attack(args: argparse.Namespace) -> int:
    config = _load_run_config(args)
    examples = _read_dataset(config.dataset)
    flat = run_config_to_dict(config)
    payload = {
        "examples": examples,
        "victim": config.victim,
        "labels": list(config.labels),
        "providers": {
            "embedding_file": flat["embedding_file"],
            "stopword_file": flat["stopword_file"],
            "pos_lexicon": flat["pos_lexicon"],
            "mlm_table": flat["mlm_table"],
            "mlm_command": flat["mlm_command"],
        },
        "settings": {
            "beam_size": flat["beam_size"],
            "top_n": flat["top_n"],
            "sim_threshold": flat["sim_threshold"],
            "wsr_threshold": flat["wsr_threshold"],
            "oov_token": flat["oov_token"],
            "space_mode": flat["space_mode"],
            "require_final_sim": flat["require_final_sim"],
        },
        "workers": config.workers,
    }
    client = ServiceClient(args.server)
    try:
        response = client.post("/evaluate", payload)
    finally:
        client.close()
    _write_json_lines(response["results"], config.out)
    _print_metrics(response["metrics"])
    print(f"results: {config.out}")
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    records = _read_json_lines(args.results, "results")
    client = ServiceClient(args.server)
    try:
        response = client.post("/report", {"results": records})
    finally:
        client.close()
    _print_metrics(response["metrics"])
    return 0


def cmd_eval_transfer(args: argparse.Namespace) -> int:
    records = _read_json_lines(args.results, "results")
    payload: dict[str, Any] = {"results": records, "victim": args.victim}
    if args.labels:
        payload["labels"] = [part.strip() for part in args.labels.split(",") if part.strip()]
    client = ServiceClient(args.server)
    try:
        response = client.post("/transfer", payload)
    finally:
        client.close()
    print(f"successes: {response['successes']}")
    print(f"accuracy:  {response['accuracy']:.4f}")
    return 0


def cmd_export_advtrain(args: argparse.Namespace) -> int:
    records = _read_json_lines(args.results, "results")
    client = ServiceClient(args.server)
    try:
        response = client.post("/advtrain", {"results": records})
    finally:
        client.close()
    _write_json_lines(response["records"], Path(args.out))
    print(f"exported: {response['count']}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wordbeam",
        description="Word-substitution attacks against black-box text classifiers.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    attack = sub.add_parser("attack", help="attack a dataset and write results + summary")
    attack.add_argument("--config", help="flat key=value config file")
    attack.add_argument("--dataset", help="dataset JSONL path")
    attack.add_argument("--victim", help="victim spec: lexicon:<weights.json> | external:<command>")
    attack.add_argument("--labels", help="comma-separated class names for external victims")
    attack.add_argument("--embedding-file", dest="embedding_file", help="word vector file")
    attack.add_argument("--stopword-file", dest="stopword_file", help="stopword list")
    attack.add_argument("--pos-lexicon", dest="pos_lexicon", help="word<TAB>TAG lexicon")
    attack.add_argument("--mlm-table", dest="mlm_table", help="masked-LM proposal table")
    attack.add_argument("--mlm-command", dest="mlm_command", help="external masked-LM command")
    attack.add_argument("--out", help="results file to write (default results.jsonl)")
    attack.add_argument("--workers", help="parallel attack workers (default 1)")
    attack.add_argument("--seed", help="seed recorded for reproducibility (default 0)")
    attack.add_argument("--beam-size", dest="beam_size", help="survivors per iteration, or 'unbounded'")
    attack.add_argument("--top-n", dest="top_n", help="candidates per source per position")
    attack.add_argument("--sim-threshold", dest="sim_threshold", help="similarity floor (strict >)")
    attack.add_argument("--wsr-threshold", dest="wsr_threshold", help="substitution-rate bound; 1.0 disables")
    attack.add_argument(
        "--space-mode",
        dest="space_mode",
        choices=["embedding", "mlm", "mixed"],
        help="candidate sources to draw from",
    )
    attack.add_argument("--oov-token", dest="oov_token", help="importance placeholder token")
    attack.add_argument(
        "--require-final-sim",
        dest="require_final_sim",
        action=argparse.BooleanOptionalAction,
        default=None,
        help="also require the final text to clear the similarity floor",
    )
    attack.add_argument("--server", help="remote service base URL (default: in-process)")
    attack.set_defaults(func=cmd_attack)

    report = sub.add_parser("report", help="re-derive the metrics summary from a results file")
    report.add_argument("--results", required=True, help="results JSONL from 'attack'")
    report.add_argument("--server", help="remote service base URL")
    report.set_defaults(func=cmd_report)

    transfer = sub.add_parser(
        "eval-transfer", help="score another victim on the successful adversarial texts"
    )
    transfer.add_argument("--results", required=True, help="results JSONL from 'attack'")
    transfer.add_argument("--victim", required=True, help="second victim spec")
    transfer.add_argument("--labels", help="comma-separated class names for external victims")
    transfer.add_argument("--server", help="remote service base URL")
    transfer.set_defaults(func=cmd_eval_transfer)

    export = sub.add_parser(
        "export-advtrain", help="write adversarial-training records from a results file"
    )
    export.add_argument("--results", required=True, help="results JSONL from 'attack'")
    export.add_argument("--out", required=True, help="training records file to write")
    export.add_argument("--server", help="remote service base URL")
    export.set_defaults(func=cmd_export_advtrain)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ProtocolError as exc:
        print(f"protocol error: {exc}", file=sys.stderr)
        return 3
    except WordbeamError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
