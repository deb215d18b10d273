"""Verbal cue generation: overgenerate, filter on containment and order, score, rank."""

from __future__ import annotations

import logging
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .gateway import MASK, Gateway, GatewayError, MaskPredictions, ParseError, fill, load_prompt
from .keywords import NoCandidatesError
from .lexicon import LexiconBundle, LexiconError, cosine
from .models import Constraint, KeywordSet, TargetWord, VerbalCue
from .ranking import aggregate_order

log = logging.getLogger(__name__)

_HYPHENS = re.compile(r"[-‐‑‒–—]+")
_EDGE_PUNCT = re.compile(r"^[\W_]+|[\W_]+$")
_SUMMARY = re.compile(r"^\s*\**\s*summary\s*\**\s*:\s*\**\s*(.*?)\s*$", re.IGNORECASE)


class NoValidCueError(RuntimeError):
    def __init__(self, message: str, candidates: Sequence[VerbalCue] = ()):
        super().__init__(message)
        self.candidates = list(candidates)


@dataclass
class MaskPredictionScore:
    predictions: MaskPredictions
    cont: float


def _normalize(piece: str) -> str:
    return _EDGE_PUNCT.sub("", piece).lower()


def tokenize(text: str) -> list[str]:
    """Whitespace split, hyphen split, edge punctuation stripped, lowercased."""
    tokens = []
    for word in text.split():
        for piece in _HYPHENS.split(word):
            tok = _normalize(piece)
            if tok:
                tokens.append(tok)
    return tokens


def keyword_sequence(keywords: Sequence[str]) -> list[str]:
    """Keywords as the token sequence they must appear as in a cue."""
    return [t for k in keywords for t in tokenize(k)]


def is_subsequence(needles: Sequence[str], tokens: Sequence[str]) -> bool:
    """Greedy left-to-right match; each needle takes the earliest free token."""
    it = iter(tokens)
    return all(any(tok == n for tok in it) for n in needles)


def _matches_target(token: str, target: TargetWord, lex: LexiconBundle) -> bool:
    return token == target.surface or lex.lemmatize(token) == lex.lemmatize(target.surface)


def check_constraints(cue: VerbalCue, target: TargetWord, keywords: KeywordSet,
                      lex: LexiconBundle) -> Constraint:
    tokens = list(cue.tokens)
    needles = keyword_sequence(keywords.keywords)
    remaining = list(tokens)
    contains_all = True
    for n in needles:
        if n in remaining:
            remaining.remove(n)
        else:
            contains_all = False
    return Constraint(
        contains_target=any(_matches_target(t, target, lex) for t in tokens),
        contains_all_keywords=contains_all,
        keywords_in_order=is_subsequence(needles, tokens),
    )


def mask_target(text: str, target: TargetWord, lex: LexiconBundle) -> str:
    """Replace the first occurrence of the target (or an inflection) with ``[MASK]``."""
    for word in re.finditer(r"\S+", text):
        offset = word.start()
        for piece in re.finditer(r"[^-‐-—]+", word.group()):
            core = re.search(r"[^\W_](?:.*[^\W_])?", piece.group())
            if core and _matches_target(core.group().lower(), target, lex):
                start = offset + piece.start() + core.start()
                end = start + len(core.group())
                return text[:start] + MASK + text[end:]
    raise ValueError(f"target {target.surface!r} not found in cue")


def cue_prompt(target: TargetWord, keywords: KeywordSet, template: Optional[str] = None) -> str:
    if not target.meaning:
        raise ValueError("cue generation needs the target word's meaning")
    return fill(
        template or load_prompt("cue"),
        target=target.surface,
        meaning=target.meaning,
        keywords=", ".join(keywords.keywords),
    )


def parse_cue_response(raw: str) -> str:
    found = None
    for line in raw.splitlines():
        m = _SUMMARY.match(line)
        if m and m.group(1):
            found = m.group(1).strip("*").strip()
    if not found:
        raise ValueError("no 'Summary:' line in response")
    return found


def overgenerate_cues(target: TargetWord, keywords: KeywordSet, gateway: Gateway, count_cap: int = 5,
                      template: Optional[str] = None, first_slot: int = 0) -> list[VerbalCue]:
    """Up to ``count_cap`` independent calls; the ``Summary:`` line of each is a cue."""
    prompt = cue_prompt(target, keywords, template)
    reqs = [gateway.request(prompt, max_tokens=512, seed_hint=first_slot + i) for i in range(count_cap)]
    results = gateway.complete_many(reqs)
    cues: list[VerbalCue] = []
    seen = set()
    for i, result in enumerate(results):
        if isinstance(result, Exception):
            continue
        try:
            text = parse_cue_response(result)
        except ValueError as exc:
            log.warning("cue slot %d dropped: %s", first_slot + i, exc)
            continue
        if text not in seen:
            seen.add(text)
            cues.append(VerbalCue(text))
    if not cues:
        errors = [r for r in results if isinstance(r, Exception)]
        if errors and len(errors) == len(results):
            raise GatewayError(f"all {count_cap} cue calls failed; last error: {errors[-1]}")
        raise NoCandidatesError(f"none of {count_cap} cue responses had a Summary line")
    return cues


def context_completeness(predictions: Sequence[str], target: TargetWord, lex: LexiconBundle) -> float:
    """Mean prediction/target cosine; predictions without a vector add 0."""
    tvec = lex.embed(target.surface)
    if tvec is None:
        raise LexiconError(f"target {target.surface!r} has no embedding")
    total = 0.0
    for word in predictions:
        vec = lex.embed(word)
        if vec is None:
            continue
        try:
            total += cosine(vec, tvec)
        except ValueError:
            continue
    return total / len(predictions)


def score_context_completeness(cue: VerbalCue, target: TargetWord, gateway: Gateway,
                               lex: LexiconBundle) -> MaskPredictionScore:
    if lex.embed(target.surface) is None:
        raise LexiconError(f"target {target.surface!r} has no embedding")
    cue.masked_text = mask_target(cue.text, target, lex)
    preds = gateway.masked_top5(cue.masked_text)
    cue.predictions = list(preds.candidates)
    return MaskPredictionScore(preds, context_completeness(preds.candidates, target, lex))


def score_aoa(cue: VerbalCue, lex: LexiconBundle) -> float:
    """Summed AoA of non-stopword tokens found in the table; lower is better."""
    total = 0.0
    for tok in cue.tokens:
        if lex.is_stopword(tok):
            continue
        value = lex.aoa(tok)
        if value is not None:
            total += value
    return total


def rank_cues(cues: Sequence[VerbalCue], rng_seed: int) -> list[VerbalCue]:
    if not cues:
        raise NoValidCueError("no valid cue")
    ranks, aggregates, order = aggregate_order(
        [
            ([c.raw_scores["cont"] for c in cues], True),
            ([c.raw_scores["aoa"] for c in cues], False),
        ],
        seed=rng_seed,
    )
    for i, c in enumerate(cues):
        c.ranks = {"cont": ranks[0][i], "aoa": ranks[1][i]}
        c.aggregate = aggregates[i]
    return [cues[i] for i in order]


@dataclass
class CueOutcome:
    candidates: list = field(default_factory=list)
    ranked: list = field(default_factory=list)
    rounds: int = 0
    errors: dict = field(default_factory=dict)

    @property
    def chosen(self) -> Optional[VerbalCue]:
        return self.ranked[0] if self.ranked else None


def generate_cues(target: TargetWord, keywords: KeywordSet, gateway: Gateway, lex: LexiconBundle,
                  seed: int, count_cap: int = 5, retry_rounds: int = 1,
                  template: Optional[str] = None) -> CueOutcome:
    """Run generation rounds until some cue survives the filter, then rank the survivors.

    Each round asks for ``count_cap`` fresh candidates; ``retry_rounds`` extra
    rounds are allowed. Raises :class:`NoValidCueError` if nothing survives.
    """
    outcome = CueOutcome()
    seen = set()
    survivors: list[VerbalCue] = []
    for rnd in range(retry_rounds + 1):
        outcome.rounds = rnd + 1
        try:
            fresh = overgenerate_cues(target, keywords, gateway, count_cap, template,
                                      first_slot=rnd * count_cap)
        except NoCandidatesError as exc:
            log.warning("cue round %d produced nothing: %s", rnd + 1, exc)
            continue
        fresh = [c for c in fresh if c.text not in seen]
        seen.update(c.text for c in fresh)
        outcome.candidates.extend(fresh)
        passing = []
        for cue in fresh:
            cue.constraint = check_constraints(cue, target, keywords, lex)
            if cue.constraint.ok:
                passing.append(cue)
        _score_survivors(passing, target, gateway, lex, outcome)
        survivors.extend(c for c in passing if "cont" in c.raw_scores)
        if survivors:
            break
    if not survivors:
        raise NoValidCueError(f"no valid cue after {outcome.rounds} round(s)", outcome.candidates)
    outcome.ranked = rank_cues(survivors, seed)
    return outcome


def _score_survivors(cues, target, gateway, lex, outcome):
    def one(cue):
        try:
            return score_context_completeness(cue, target, gateway, lex)
        except (GatewayError, ParseError, ValueError) as exc:
            return exc

    if len(cues) > 1 and gateway.max_in_flight > 1:
        with ThreadPoolExecutor(max_workers=min(gateway.max_in_flight, len(cues))) as pool:
            results = list(pool.map(one, cues))
    else:
        results = [one(c) for c in cues]
    for cue, res in zip(cues, results):
        if isinstance(res, LexiconError):
            raise res
        if isinstance(res, Exception):
            log.warning("dropping cue %r: %s", cue.text, res)
            outcome.errors[cue.text] = str(res)
            continue
        cue.raw_scores = {"cont": res.cont, "aoa": score_aoa(cue, lex)}
