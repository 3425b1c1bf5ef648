"""Run configuration: flat key=value files, overrides, provider wiring.

Precedence is flag > config file > default.  Every referenced path is
checked at load time.  Provider and victim paths default to the bundled
toy fixtures so a bare ``attack`` invocation runs the demo corpus.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from importlib import resources
from pathlib import Path
from typing import Any, Mapping

from .errors import ConfigError
from .search import AttackConfig

_BOOL_VALUES = {"true": True, "false": False, "1": True, "0": False, "yes": True, "no": False}


def fixture_path(name: str) -> Path:
    """Filesystem path of a bundled data file."""
    path = Path(str(resources.files("wordbeam").joinpath("data", name)))
    if not path.is_file():
        raise ConfigError(f"bundled fixture missing: {name}")
    return path


@dataclass(frozen=True)
class RunConfig:
    """Everything one evaluation run needs, fully resolved."""

    dataset: Path
    victim: str
    labels: tuple[str, ...]  # class names for external victims
    embedding_file: Path
    stopword_file: Path
    pos_lexicon: Path
    mlm_table: Path | None
    mlm_command: str | None
    out: Path
    workers: int
    seed: int
    attack: AttackConfig


# key -> (parser name, default factory); order defines documentation order
_KEYS = {
    "dataset": ("path", lambda: fixture_path("corpus_toy.jsonl")),
    "victim": ("str", lambda: "lexicon:" + str(fixture_path("victim_toy.json"))),
    "labels": ("labels", lambda: ("positive", "negative")),
    "embedding_file": ("path", lambda: fixture_path("embeddings_toy.txt")),
    "stopword_file": ("path", lambda: fixture_path("stopwords_en.txt")),
    "pos_lexicon": ("path", lambda: fixture_path("pos_lexicon_toy.tsv")),
    "mlm_table": ("path", lambda: fixture_path("mlm_table_toy.tsv")),
    "mlm_command": ("str", lambda: None),
    "out": ("outpath", lambda: Path("results.jsonl")),
    "workers": ("int", lambda: 1),
    "seed": ("int", lambda: 0),
    "beam_size": ("beam", lambda: 10),
    "top_n": ("int", lambda: 50),
    "sim_threshold": ("float", lambda: 0.5),
    "wsr_threshold": ("float", lambda: 1.0),
    "space_mode": ("str", lambda: "mixed"),
    "oov_token": ("str", lambda: "[oov]"),
    "require_final_sim": ("bool", lambda: False),
}


def _parse_value(key: str, kind: str, value: Any) -> Any:
    if value is None:
        return None
    try:
        if kind == "int":
            return int(value)
        if kind == "float":
            return float(value)
        if kind == "bool":
            if isinstance(value, bool):
                return value
            parsed = _BOOL_VALUES.get(str(value).strip().lower())
            if parsed is None:
                raise ValueError(f"expected a boolean, got {value!r}")
            return parsed
        if kind == "beam":
            if isinstance(value, str) and value.strip().lower() in ("unbounded", "inf"):
                return None
            return int(value)
        if kind == "labels":
            if isinstance(value, (tuple, list)):
                return tuple(str(v) for v in value)
            names = tuple(part.strip() for part in str(value).split(",") if part.strip())
            if len(names) < 2:
                raise ValueError(f"expected two or more comma-separated names, got {value!r}")
            return names
        if kind in ("path", "outpath"):
            return Path(str(value))
        return str(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for {key}: {exc}") from exc


def read_config_file(path: str | Path) -> dict[str, str]:
    """Parse a flat ``key = value`` file; unknown keys are rejected."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    values: dict[str, str] = {}
    for line_no, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"{path}:{line_no}: expected key = value")
        key, value = (part.strip() for part in stripped.split("=", 1))
        key = key.replace("-", "_")
        if key not in _KEYS:
            raise ConfigError(f"{path}:{line_no}: unknown config key {key!r}")
        values[key] = value
    return values


def build_run_config(
    file_values: Mapping[str, Any] | None = None,
    overrides: Mapping[str, Any] | None = None,
) -> RunConfig:
    """Merge defaults, config-file values and overrides into a RunConfig.

    Overrides with value ``None`` mean "not given" and fall through to
    the file value, then the default.
    """
    merged: dict[str, Any] = {}
    file_values = dict(file_values or {})
    overrides = dict(overrides or {})
    for source in (file_values, overrides):
        for key in source:
            if key not in _KEYS:
                raise ConfigError(f"unknown config key {key!r}")
    for key, (kind, default) in _KEYS.items():
        if overrides.get(key) is not None:
            merged[key] = _parse_value(key, kind, overrides[key])
        elif file_values.get(key) is not None:
            merged[key] = _parse_value(key, kind, file_values[key])
        else:
            merged[key] = default()

    attack = AttackConfig(
        beam_size=merged["beam_size"],
        top_n=merged["top_n"],
        sim_threshold=merged["sim_threshold"],
        wsr_threshold=merged["wsr_threshold"],
        oov_token=merged["oov_token"],
        space_mode=merged["space_mode"],
        require_final_sim=merged["require_final_sim"],
    )
    if merged["workers"] < 1:
        raise ConfigError(f"worker count must be >= 1, got {merged['workers']}")

    config = RunConfig(
        dataset=merged["dataset"],
        victim=merged["victim"],
        labels=merged["labels"],
        embedding_file=merged["embedding_file"],
        stopword_file=merged["stopword_file"],
        pos_lexicon=merged["pos_lexicon"],
        mlm_table=merged["mlm_table"] if merged["mlm_command"] is None else None,
        mlm_command=merged["mlm_command"],
        out=merged["out"],
        workers=merged["workers"],
        seed=merged["seed"],
        attack=attack,
    )
    _check_paths(config)
    return config


def _check_paths(config: RunConfig) -> None:
    for name in ("dataset", "embedding_file", "stopword_file", "pos_lexicon", "mlm_table"):
        value = getattr(config, name)
        if value is not None and not Path(value).is_file():
            raise ConfigError(f"{name.replace('_', ' ')} not found: {value}")
    parse_victim_spec(config.victim)


def parse_victim_spec(spec: str) -> tuple[str, str]:
    """Split a victim spec into its kind and argument.

    ``lexicon:<weights.json>`` runs the built-in classifier;
    ``external:<command line>`` drives a line-protocol subprocess.
    """
    kind, _, argument = spec.partition(":")
    kind = kind.strip().lower()
    argument = argument.strip()
    if kind == "lexicon":
        if not Path(argument).is_file():
            raise ConfigError(f"victim weights file not found: {argument}")
        return kind, argument
    if kind == "external":
        if not argument:
            raise ConfigError("external victim spec needs a command line")
        return kind, argument
    raise ConfigError(
        f"victim spec must start with 'lexicon:' or 'external:', got {spec!r}"
    )


def run_config_to_dict(config: RunConfig) -> dict[str, Any]:
    """Flatten a RunConfig to plain JSON-friendly values (for the service)."""
    payload: dict[str, Any] = {}
    for item in fields(config):
        value = getattr(config, item.name)
        if item.name == "attack":
            continue
        payload[item.name] = str(value) if isinstance(value, Path) else value
    attack = config.attack
    payload.update(
        beam_size=attack.beam_size,
        top_n=attack.top_n,
        sim_threshold=attack.sim_threshold,
        wsr_threshold=attack.wsr_threshold,
        space_mode=attack.space_mode,
        oov_token=attack.oov_token,
        require_final_sim=attack.require_final_sim,
    )
    return payload
