"""Two-stage mnemonic generation and the factories that wire it from an :class:`AppConfig`."""

from __future__ import annotations

from typing import Optional

from .config import AppConfig, ConfigError
from .cues import NoValidCueError, generate_cues
from .gateway import Gateway, OpenAIBackend, ReplayBackend, ResponseCache, load_prompt
from .keywords import default_cap, generate_keywords
from .lexicon import LexiconBundle, load_bundle
from .models import TargetWord
from .phonetics import Pronouncer


def build_pronouncer(cfg: AppConfig) -> Pronouncer:
    r = cfg.resources
    return Pronouncer(r.get("pronouncing_dict"), r.get("arpabet_map"), r.get("letter_rules"))


def build_lexicon(cfg: AppConfig) -> LexiconBundle:
    return load_bundle(cfg.lexicon_config())


def build_gateway(cfg: AppConfig, replay: Optional[str] = None, use_cache: bool = True) -> Gateway:
    if replay:
        try:
            backend = ReplayBackend(replay)
        except FileNotFoundError as exc:
            raise ConfigError(str(exc)) from exc
    elif cfg.api_base:
        backend = OpenAIBackend(cfg.api_base, cfg.api_key, cfg.timeout)
    else:
        raise ConfigError("no backend configured: set MNEMO_API_BASE (or backend.api_base) or pass --replay")
    cache = ResponseCache(cfg.cache) if (use_cache and cfg.cache) else None
    return Gateway(
        backend,
        gen_model=cfg.gen_model,
        score_model=cfg.score_model,
        cache=cache,
        max_in_flight=cfg.concurrency,
        max_retries=cfg.max_retries,
        mask_prompt=load_prompt("mask", cfg.resources.get("mask_prompt")),
    )


def _target_info(target: TargetWord) -> dict:
    p = target.pronunciation
    return {
        "surface": target.surface,
        "meaning": target.meaning,
        "syllables": p.syllable_count,
        "phones": list(p.phones),
        "ipa": p.ipa,
        "pronunciation": p.confidence,
    }


def generate_mnemonic(word: str, meaning: Optional[str], gateway: Gateway, lex: LexiconBundle,
                      pronouncer: Pronouncer, seed: int, keyword_cap: Optional[int] = None,
                      cue_cap: int = 5, retry_rounds: int = 1, keyword_template: Optional[str] = None,
                      cue_template: Optional[str] = None) -> dict:
    """Run keyword then cue overgenerate-and-rank and return a JSON-ready result.

    Raises :class:`NoValidCueError` (with the partial result attached as
    ``exc.result``) when no cue passes the filters.
    """
    target = TargetWord.from_word(word, meaning, pronouncer)
    ranked_sets = generate_keywords(target, gateway, lex, seed, keyword_cap, keyword_template)
    chosen_set = ranked_sets[0]
    result = {
        "target": _target_info(target),
        "seed": seed,
        "keyword_cap": keyword_cap or default_cap(target),
        "keyword_candidates": [s.to_dict() for s in ranked_sets],
        "chosen_keywords": list(chosen_set.keywords),
        "cue_candidates": [],
        "chosen_cue": None,
    }
    try:
        outcome = generate_cues(target, chosen_set, gateway, lex, seed, cue_cap, retry_rounds, cue_template)
    except NoValidCueError as exc:
        result["cue_candidates"] = [_cue_row(c, None) for c in exc.candidates]
        result["cache_stats"] = gateway.stats()
        exc.result = result
        raise
    ranked_ids = {id(c): i + 1 for i, c in enumerate(outcome.ranked)}
    result["cue_rounds"] = outcome.rounds
    result["cue_candidates"] = [_cue_row(c, ranked_ids.get(id(c)), outcome.errors.get(c.text))
                                for c in outcome.candidates]
    result["chosen_cue"] = outcome.chosen.text
    result["cache_stats"] = gateway.stats()
    return result


def _cue_row(cue, position, error=None) -> dict:
    row = cue.to_dict()
    if position is not None:
        row["status"] = "ranked"
        row["position"] = position
    elif cue.constraint is not None and not cue.constraint.ok:
        row["status"] = "filtered"
    else:
        row["status"] = "unscored"
    if error:
        row["error"] = error
    return row
