"""Automated metrics for keyword sets and verbal cues over JSONL datasets.

Keyword metrics (all in [0, 1]): syllable ratio, phonetic similarity,
normalized imageability, orthographic similarity and clamped semantic
similarity. Cue metrics: perplexity under the scoring model and an
imageability score, either from an external scorer service or from the
lexicon proxy (labelled ``"proxy"``).

A metric that cannot be computed for a record is reported as ``None`` with
the reason under ``errors``; it is left out of that metric's mean only.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import httpx

from .cues import tokenize
from .gateway import Gateway, GatewayError
from .keywords import concat, score_imageability, score_semantic
from .lexicon import IMG_MAX, IMG_MIN, LexiconBundle, LexiconError
from .models import KeywordSet, TargetWord
from .phonetics import Pronouncer, PronunciationError, normalized_similarity, syllable_ratio

log = logging.getLogger(__name__)

KEYWORD_METRICS = ("syllable_ratio", "phonetic_sim", "imageability_norm", "orthographic_sim_norm",
                   "semantic_sim_norm")
CUE_METRICS = ("ppl", "cue_imageability")


class DatasetError(ValueError):
    pass


@dataclass(frozen=True)
class MnemonicRecord:
    target: str
    keywords: tuple
    cue: str
    meaning: Optional[str] = None
    source: str = "unknown"

    def __post_init__(self):
        if not self.target or not self.target.strip():
            raise ValueError("target must be nonempty")
        if not self.cue or not self.cue.strip():
            raise ValueError("cue must be nonempty")
        if not self.keywords:
            raise ValueError("keywords must be nonempty")

    @classmethod
    def from_dict(cls, d: dict) -> "MnemonicRecord":
        kws = d.get("keywords") or []
        if isinstance(kws, str):
            kws = [k.strip() for k in kws.split(",")]
        return cls(target=d.get("target", ""), keywords=tuple(k.strip().lower() for k in kws if k.strip()),
                   cue=d.get("cue", ""), meaning=d.get("meaning"), source=d.get("source", "unknown"))


def read_dataset(path) -> list[MnemonicRecord]:
    path = Path(path)
    if not path.is_file():
        raise DatasetError(f"dataset not found: {path}")
    records = []
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                records.append(MnemonicRecord.from_dict(json.loads(line)))
            except (ValueError, AttributeError) as exc:
                raise DatasetError(f"{path}:{lineno}: {exc}") from exc
    if not records:
        raise DatasetError(f"{path}: empty dataset")
    return records


def imageability_norm(f_img: float) -> float:
    return (f_img - IMG_MIN) / (IMG_MAX - IMG_MIN)


def keyword_metrics(rec: MnemonicRecord, lex: LexiconBundle, phon: Pronouncer) -> dict:
    """Keyword metrics plus ``errors`` and ``fallback_pronunciations`` bookkeeping."""
    out: dict = {name: None for name in KEYWORD_METRICS}
    errors: dict = {}
    fallbacks: list = []

    try:
        kset = KeywordSet(rec.keywords)
    except ValueError as exc:
        errors["keywords"] = str(exc)
        return {"metrics": out, "errors": errors, "fallback_pronunciations": fallbacks}
    target_text = rec.target.strip().lower()
    out["imageability_norm"] = imageability_norm(score_imageability(kset, lex))
    out["orthographic_sim_norm"] = normalized_similarity(concat(rec.keywords), target_text)

    try:
        target = TargetWord.from_word(rec.target, rec.meaning, phon)
        kw_prons = phon.pronounce_words(rec.keywords)
        fallbacks = [p.word for p in [target.pronunciation, *kw_prons] if p.confidence == "fallback"]
        out["syllable_ratio"] = syllable_ratio(len(rec.keywords), target.syllable_count)
        out["phonetic_sim"] = normalized_similarity("".join(p.ipa for p in kw_prons), target.pronunciation.ipa)
    except (PronunciationError, ValueError) as exc:
        errors["pronunciation"] = str(exc)
        target = None

    try:
        stub = target or _surface_only(target_text)
        out["semantic_sim_norm"] = max(score_semantic(kset, stub, lex), 0.0)
    except LexiconError as exc:
        errors["semantic_sim_norm"] = str(exc)
    return {"metrics": out, "errors": errors, "fallback_pronunciations": fallbacks}


class _surface_only:
    """Minimal stand-in for a target whose pronunciation failed."""

    def __init__(self, surface):
        self.surface = surface


def cue_perplexity(rec: MnemonicRecord, gateway: Gateway) -> float:
    """``exp(-mean logprob)`` over the tokens the scoring backend returns."""
    lp = gateway.token_logprobs(rec.cue)
    if not lp.logprobs:
        raise GatewayError("scoring backend returned no token logprobs")
    return perplexity(lp.logprobs)


def perplexity(logprobs: Sequence[float]) -> float:
    return math.exp(-sum(logprobs) / len(logprobs))


@dataclass
class ScorerConfig:
    url: Optional[str] = None
    timeout: float = 30.0
    client: Optional[httpx.Client] = None


def lexicon_imageability_proxy(text: str, lex: LexiconBundle) -> float:
    content = [t for t in tokenize(text) if not lex.is_stopword(t)]
    if not content:
        return 0.0
    return imageability_norm(sum(lex.imageability(t) for t in content) / len(content))


def cue_imageability_proxy(rec: MnemonicRecord, scorer: Optional[ScorerConfig], lex: LexiconBundle) -> tuple[float, str]:
    """External scorer value when configured and reachable, else the lexicon proxy."""
    if scorer is not None and scorer.url:
        client = scorer.client or httpx.Client(timeout=scorer.timeout)
        try:
            resp = client.post(scorer.url, json={"text": rec.cue})
            resp.raise_for_status()
            return float(resp.json()["score"]), "external"
        except (httpx.HTTPError, ValueError, KeyError, TypeError) as exc:
            log.warning("imageability scorer failed (%s); using lexicon proxy", exc)
        finally:
            if scorer.client is None:
                client.close()
    return lexicon_imageability_proxy(rec.cue, lex), "proxy"


@dataclass
class EvalOptions:
    metrics: str = "all"  # "keywords", "cues" or "all"
    seed: Optional[int] = None
    scorer: Optional[ScorerConfig] = None
    concurrency: int = 4


@dataclass
class MetricReport:
    meta: dict
    per_record: list
    per_source_means: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"meta": self.meta, "per_record": self.per_record, "per_source_means": self.per_source_means}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, ensure_ascii=False) + "\n"

    def to_csv(self) -> str:
        names = sorted({m for row in self.per_record for m in row["metrics"]})
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["index", "source", "target", *names])
        for row in self.per_record:
            writer.writerow([row["index"], row["source"], row["target"],
                             *["" if row["metrics"].get(n) is None else row["metrics"][n] for n in names]])
        return buf.getvalue()


def evaluate_record(index: int, rec: MnemonicRecord, lex: LexiconBundle, phon: Pronouncer,
                    gateway: Optional[Gateway], options: EvalOptions) -> dict:
    row = {"index": index, "source": rec.source, "target": rec.target, "keywords": list(rec.keywords),
           "scored_cue": rec.cue, "metrics": {}, "errors": {}, "fallback_pronunciations": []}
    if options.metrics in ("all", "keywords"):
        km = keyword_metrics(rec, lex, phon)
        row["metrics"].update(km["metrics"])
        row["errors"].update(km["errors"])
        row["fallback_pronunciations"] = km["fallback_pronunciations"]
    if options.metrics in ("all", "cues"):
        row["metrics"]["ppl"] = None
        if gateway is None:
            row["errors"]["ppl"] = "no scoring backend configured"
        else:
            try:
                row["metrics"]["ppl"] = cue_perplexity(rec, gateway)
            except (GatewayError, ValueError) as exc:
                row["errors"]["ppl"] = str(exc)
        value, label = cue_imageability_proxy(rec, options.scorer, lex)
        row["metrics"]["cue_imageability"] = value
        row["cue_imageability_source"] = label
    return row


def _means(rows: list) -> dict:
    grouped: dict = {}
    for row in rows:
        grouped.setdefault(row["source"], []).append(row)
    out = {}
    for source in sorted(grouped):
        metrics = {}
        names = sorted({m for r in grouped[source] for m in r["metrics"]})
        for name in names:
            values = [r["metrics"][name] for r in grouped[source] if r["metrics"].get(name) is not None]
            metrics[name] = {"mean": sum(values) / len(values) if values else None, "n": len(values)}
        out[source] = {"records": len(grouped[source]), "metrics": metrics}
    return out


def run_report(dataset_path, lex: LexiconBundle, phon: Pronouncer, gateway: Optional[Gateway] = None,
               options: Optional[EvalOptions] = None) -> MetricReport:
    options = options or EvalOptions()
    if options.metrics not in ("all", "keywords", "cues"):
        raise ValueError(f"unknown metrics selection {options.metrics!r}")
    records = read_dataset(dataset_path)

    def job(item):
        i, rec = item
        return evaluate_record(i, rec, lex, phon, gateway, options)

    workers = max(1, min(options.concurrency, gateway.max_in_flight if gateway else 1))
    if workers > 1 and len(records) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(job, enumerate(records)))
    else:
        rows = [job(item) for item in enumerate(records)]

    data = Path(dataset_path).read_bytes()
    meta = {
        "dataset": Path(dataset_path).name,
        "dataset_sha256": hashlib.sha256(data).hexdigest(),
        "records": len(rows),
        "metrics": options.metrics,
        "seed": options.seed,
        "generation_model": gateway.gen_model if gateway else None,
        "scoring_model": gateway.score_model if gateway else None,
        "lexicon_sha256": lex.digest(),
        "lexicon_sources": {k: dict(v) for k, v in lex.sources.items()},
        "fallback_pronunciations": sum(len(r["fallback_pronunciations"]) for r in rows),
        "flagged_records": sum(1 for r in rows if r["errors"]),
        "cue_imageability_mode": "external" if options.scorer and options.scorer.url else "proxy",
        "normalization": {
            "imageability_norm": "(f_img - 1) / 6",
            "orthographic_sim_norm": "1 - lev(concat(keywords), target) / max_len",
            "phonetic_sim": "1 - lev(ipa(keywords), ipa(target)) / max_len",
            "semantic_sim_norm": "max(f_sem, 0)",
            "syllable_ratio": "min(M, L) / max(M, L)",
            "ppl": "exp(-mean token logprob), raw",
        },
    }
    return MetricReport(meta=meta, per_record=rows, per_source_means=_means(rows))
