"""Application configuration: defaults < ``mnemo.toml`` < environment < flags.

Example ``mnemo.toml``::

    seed = 2024
    cache = "cache/responses.jsonl"

    [resources]
    embeddings = "data/wiki-news-300d.vec"
    aoa = { path = "data/kuperman.csv", word_column = "Word", rating_column = "Rating.Mean" }
    imageability = { path = "data/glasgow.csv", word_column = "Words", rating_column = "IMAG" }
    imageability_secondary = { path = "data/ljubesic.csv", scale = [0, 1] }
    # stopwords, lemmas, pronouncing_dict, arpabet_map, letter_rules,
    # keyword_prompt, cue_prompt, mask_prompt override the shipped files

    [backend]
    api_base = "https://api.openai.com/v1"
    gen_model = "gpt-4"
    score_model = "meta-llama/Meta-Llama-3-8B"
    timeout = 60
    concurrency = 4

    [pipeline]
    keyword_cap = 9      # default 2L+1
    cue_cap = 5
    retry_rounds = 1

    [evaluator]
    imageability_scorer_url = "http://localhost:8000/score"

Relative paths resolve against the directory holding the config file.
"""

from __future__ import annotations

import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .lexicon import LexiconConfig, NormsSource

DEFAULT_SEED = 2024
DEFAULT_CONFIG = "mnemo.toml"

ENV_VARS = {
    "api_base": "MNEMO_API_BASE",
    "api_key": "MNEMO_API_KEY",
    "gen_model": "MNEMO_GEN_MODEL",
    "score_model": "MNEMO_SCORE_MODEL",
    "timeout": "MNEMO_TIMEOUT",
}

_PATH_KEYS = ("embeddings", "stopwords", "lemmas", "pronouncing_dict", "arpabet_map", "letter_rules",
              "keyword_prompt", "cue_prompt", "mask_prompt")
_NORMS_KEYS = ("imageability", "imageability_secondary", "aoa")


class ConfigError(ValueError):
    pass


@dataclass
class AppConfig:
    resources: dict = field(default_factory=dict)
    api_base: Optional[str] = None
    api_key: Optional[str] = None
    gen_model: str = "gpt-4"
    score_model: str = "meta-llama/Meta-Llama-3-8B"
    timeout: float = 60.0
    concurrency: int = 4
    max_retries: int = 3
    keyword_cap: Optional[int] = None
    cue_cap: int = 5
    retry_rounds: int = 1
    seed: int = DEFAULT_SEED
    cache: Optional[str] = None
    imageability_scorer_url: Optional[str] = None
    source: Optional[str] = None

    def validate(self) -> "AppConfig":
        if self.keyword_cap is not None and self.keyword_cap < 1:
            raise ConfigError("keyword_cap must be >= 1")
        if self.cue_cap < 1:
            raise ConfigError("cue_cap must be >= 1")
        if self.retry_rounds < 0:
            raise ConfigError("retry_rounds must be >= 0")
        if self.concurrency < 1:
            raise ConfigError("concurrency must be >= 1")
        if self.timeout <= 0:
            raise ConfigError("timeout must be > 0")
        return self

    def lexicon_config(self) -> LexiconConfig:
        r = self.resources
        return LexiconConfig(
            imageability=r.get("imageability"),
            imageability_secondary=r.get("imageability_secondary"),
            aoa=r.get("aoa"),
            embeddings=r.get("embeddings"),
            stopwords=r.get("stopwords"),
            lemmas=r.get("lemmas"),
        )


def _resolve(base: Path, value: str) -> str:
    p = Path(value).expanduser()
    return str(p if p.is_absolute() else base / p)


def _norms(base: Path, key: str, value) -> NormsSource:
    if isinstance(value, str):
        return NormsSource(path=_resolve(base, value))
    if not isinstance(value, dict) or "path" not in value:
        raise ConfigError(f"resources.{key} must be a path or a table with 'path'")
    scale = value.get("scale")
    if scale is not None:
        if len(scale) != 2:
            raise ConfigError(f"resources.{key}.scale must be [low, high]")
        scale = (float(scale[0]), float(scale[1]))
    return NormsSource(
        path=_resolve(base, value["path"]),
        word_column=value.get("word_column", "word"),
        rating_column=value.get("rating_column", "rating"),
        scale=scale,
    )


def _apply_file(cfg: AppConfig, path: Path) -> None:
    try:
        data = tomllib.loads(path.read_text(encoding="utf-8"))
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    base = path.parent
    cfg.source = str(path)
    for key, value in (data.get("resources") or {}).items():
        if key in _NORMS_KEYS:
            cfg.resources[key] = _norms(base, key, value)
        elif key in _PATH_KEYS:
            cfg.resources[key] = _resolve(base, value)
        else:
            raise ConfigError(f"unknown resource {key!r}")
    sections = {"backend": ("api_base", "api_key", "gen_model", "score_model", "timeout", "concurrency",
                            "max_retries"),
                "pipeline": ("keyword_cap", "cue_cap", "retry_rounds", "seed"),
                "evaluator": ("imageability_scorer_url",)}
    for section, keys in sections.items():
        for key, value in (data.get(section) or {}).items():
            if key not in keys:
                raise ConfigError(f"unknown key {section}.{key}")
            setattr(cfg, key, value)
    if "seed" in data:
        cfg.seed = int(data["seed"])
    if "cache" in data:
        cfg.cache = _resolve(base, data["cache"])


def load_config(path: Optional[str] = None, env: Optional[dict] = None, **overrides) -> AppConfig:
    """Build the effective configuration; ``None`` overrides are ignored."""
    cfg = AppConfig()
    env = os.environ if env is None else env
    if path is not None:
        p = Path(path)
        if not p.is_file():
            raise ConfigError(f"config file not found: {p}")
        _apply_file(cfg, p)
    elif Path(DEFAULT_CONFIG).is_file():
        _apply_file(cfg, Path(DEFAULT_CONFIG))
    for key, var in ENV_VARS.items():
        if env.get(var):
            setattr(cfg, key, float(env[var]) if key == "timeout" else env[var])
    for key, value in overrides.items():
        if value is not None:
            setattr(cfg, key, value)
    try:
        cfg.timeout = float(cfg.timeout)
        cfg.concurrency = int(cfg.concurrency)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    return cfg.validate()
