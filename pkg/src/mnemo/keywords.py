"""Syllabic keyword generation: overgenerate with the LLM, score, rank."""

from __future__ import annotations

import logging
import re
from typing import Optional, Sequence

from .gateway import Gateway, GatewayError, fill, load_prompt
from .lexicon import LexiconBundle, LexiconError, cosine
from .models import KeywordSet, TargetWord
from .phonetics import levenshtein
from .ranking import aggregate_order

log = logging.getLogger(__name__)

_MARKER = re.compile(r"^\s*\**\s*keywords\s*\**\s*:\s*\**(.*)$", re.IGNORECASE)
_EDGE_PUNCT = re.compile(r"^[^\w']+|[^\w']+$")

SEM_FLOOR = -1.0


class NoCandidatesError(RuntimeError):
    """Every overgenerated candidate failed to arrive or to parse."""


def default_cap(target: TargetWord) -> int:
    return 2 * target.syllable_count + 1


def keyword_prompt(target: TargetWord, template: Optional[str] = None) -> str:
    return fill(template or load_prompt("keyword"), target=target.surface)


def parse_keyword_response(raw: str) -> list[str]:
    """Keywords from the last ``Keywords:`` line, split on commas."""
    found = None
    for line in raw.splitlines():
        m = _MARKER.match(line)
        if m:
            found = m.group(1)
    if found is None:
        raise ValueError("no 'Keywords:' line in response")
    words = []
    for item in found.split(","):
        word = _EDGE_PUNCT.sub("", item.strip().strip("*")).lower()
        if not word:
            raise ValueError(f"empty keyword in {found!r}")
        words.append(word)
    return words


def overgenerate_keyword_sets(target: TargetWord, gateway: Gateway, count_cap: Optional[int] = None,
                              template: Optional[str] = None) -> list[KeywordSet]:
    """Issue up to ``count_cap`` (default 2L+1) independent generation calls.

    Unparseable responses and failed slots are dropped; identical sets are
    kept once, in slot order.
    """
    cap = count_cap or default_cap(target)
    prompt = keyword_prompt(target, template)
    reqs = [gateway.request(prompt, max_tokens=64, seed_hint=slot) for slot in range(cap)]
    results = gateway.complete_many(reqs)

    sets: list[KeywordSet] = []
    seen = set()
    for slot, result in enumerate(results):
        if isinstance(result, Exception):
            continue
        try:
            words = tuple(parse_keyword_response(result))
            kset = KeywordSet(words)
        except ValueError as exc:
            log.warning("keyword slot %d unparseable: %s", slot, exc)
            continue
        if words not in seen:
            seen.add(words)
            sets.append(kset)
    if not sets:
        errors = [r for r in results if isinstance(r, Exception)]
        if errors and len(errors) == len(results):
            raise GatewayError(f"all {cap} keyword calls failed; last error: {errors[-1]}")
        raise NoCandidatesError(f"none of {cap} keyword responses could be parsed")
    return sets


def score_imageability(kset: KeywordSet, lex: LexiconBundle) -> float:
    """Mean imageability over non-stopword keywords; 1.0 when nothing is left."""
    content = [k for k in kset.keywords if not lex.is_stopword(k)]
    if not content:
        return 1.0
    return sum(lex.imageability(k) for k in content) / len(content)


def concat(keywords: Sequence[str]) -> str:
    return "".join(k.replace(" ", "") for k in keywords).lower()


def score_orthographic(kset: KeywordSet, target: TargetWord) -> int:
    """Edit distance between the joined keywords and the target; lower is better."""
    return levenshtein(concat(kset.keywords), target.surface.lower())


def score_semantic(kset: KeywordSet, target: TargetWord, lex: LexiconBundle) -> float:
    """Best keyword/target cosine; OOV keywords score -1."""
    tvec = lex.embed(target.surface)
    if tvec is None:
        raise LexiconError(f"target {target.surface!r} has no embedding")
    best = SEM_FLOOR
    for k in kset.keywords:
        kvec = lex.embed(k)
        if kvec is None:
            continue
        try:
            best = max(best, cosine(kvec, tvec))
        except ValueError:
            continue
    return best


def score_keyword_set(kset: KeywordSet, target: TargetWord, lex: LexiconBundle) -> KeywordSet:
    kset.raw_scores = {
        "img": score_imageability(kset, lex),
        "orth": score_orthographic(kset, target),
        "sem": score_semantic(kset, target, lex),
    }
    return kset


def rank_keyword_sets(sets: Sequence[KeywordSet], rng_seed: int) -> list[KeywordSet]:
    """Dense-rank each criterion, aggregate by cube root of the rank product, best first."""
    if not sets:
        raise ValueError("need at least one keyword set")
    ranks, aggregates, order = aggregate_order(
        [
            ([s.raw_scores["img"] for s in sets], True),
            ([s.raw_scores["orth"] for s in sets], False),
            ([s.raw_scores["sem"] for s in sets], True),
        ],
        seed=rng_seed,
    )
    for i, s in enumerate(sets):
        s.ranks = {"img": ranks[0][i], "orth": ranks[1][i], "sem": ranks[2][i]}
        s.aggregate = aggregates[i]
    return [sets[i] for i in order]


def generate_keywords(target: TargetWord, gateway: Gateway, lex: LexiconBundle, seed: int,
                      count_cap: Optional[int] = None, template: Optional[str] = None) -> list[KeywordSet]:
    sets = overgenerate_keyword_sets(target, gateway, count_cap, template)
    for s in sets:
        score_keyword_set(s, target, lex)
    return rank_keyword_sets(sets, seed)
