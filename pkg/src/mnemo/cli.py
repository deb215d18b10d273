"""``mnemo`` command line.

Exit codes: 0 ok, 1 constraint violation under ``score-cue --strict``,
2 usage or configuration error, 3 backend failure, 4 no valid cue.
In ``--output json`` mode (the default) standard output carries only JSON;
logs go to standard error.
"""

from __future__ import annotations

import functools
import json
import logging
import sys

import click

from .config import ConfigError, load_config
from .cues import NoValidCueError, check_constraints, score_aoa, score_context_completeness
from .evaluator import DatasetError, EvalOptions, ScorerConfig, run_report
from .gateway import GatewayError, ParseError, ResponseCache, fill, load_prompt
from .keywords import (NoCandidatesError, default_cap, keyword_prompt, overgenerate_keyword_sets,
                       rank_keyword_sets, score_keyword_set)
from .lexicon import LexiconError
from .models import KeywordSet, TargetWord, VerbalCue
from .phonetics import PronunciationError
from .pipeline import build_gateway, build_lexicon, build_pronouncer, generate_mnemonic

EXIT_CONSTRAINT = 1
EXIT_CONFIG = 2
EXIT_BACKEND = 3
EXIT_NO_CUE = 4

log = logging.getLogger("mnemo")


def emit(ctx_obj, payload: dict, text: str = None) -> None:
    if ctx_obj["output"] == "json":
        click.echo(json.dumps(payload, indent=2, ensure_ascii=False, sort_keys=True))
    else:
        click.echo(text if text is not None else _as_text(payload))


def _as_text(payload, indent=0) -> str:
    pad = "  " * indent
    lines = []
    for key, value in payload.items():
        if isinstance(value, dict):
            lines.append(f"{pad}{key}:")
            lines.append(_as_text(value, indent + 1))
        elif isinstance(value, list) and value and isinstance(value[0], dict):
            lines.append(f"{pad}{key}:")
            for item in value:
                lines.append(_as_text(item, indent + 1))
                lines.append("")
        else:
            lines.append(f"{pad}{key}: {value}")
    return "\n".join(lines)


def fail(ctx_obj, code: int, message: str, extra: dict = None):
    click.echo(f"error: {message}", err=True)
    if ctx_obj["output"] == "json":
        payload = {"error": message, "exit_code": code}
        payload.update(extra or {})
        click.echo(json.dumps(payload, indent=2, ensure_ascii=False, sort_keys=True))
    sys.exit(code)


def common_options(fn):
    @click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None,
                  help="Config file (default ./mnemo.toml if present).")
    @click.option("--replay", type=click.Path(file_okay=False), default=None,
                  help="Serve LLM calls from a replay fixture directory.")
    @click.option("--cache", "cache_path", type=click.Path(dir_okay=False), default=None,
                  help="JSONL response cache file.")
    @click.option("--output", type=click.Choice(["json", "text"]), default="json", show_default=True)
    @click.option("-v", "--verbose", count=True)
    @click.pass_context
    @functools.wraps(fn)
    def wrapper(ctx, config_path, replay, cache_path, output, verbose, **kwargs):
        logging.basicConfig(level=logging.WARNING - 10 * min(verbose, 2), stream=sys.stderr,
                            format="%(levelname)s %(name)s: %(message)s")
        obj = {"output": output, "replay": replay}
        try:
            obj["cfg"] = load_config(config_path, cache=cache_path)
        except ConfigError as exc:
            fail(obj, EXIT_CONFIG, str(exc))
        try:
            return fn(obj, **kwargs)
        except (ConfigError, LexiconError, DatasetError, PronunciationError) as exc:
            fail(obj, EXIT_CONFIG, str(exc))
        except (GatewayError, NoCandidatesError) as exc:
            fail(obj, EXIT_BACKEND, str(exc))

    return wrapper


@click.group()
@click.version_option(package_name="artifact")
def main():
    """Keyword mnemonics: overgenerate-and-rank generation and evaluation."""


@main.command()
@click.argument("word")
@click.option("--meaning", default=None, help="Short gloss of the target word (needed for cues).")
@click.option("--seed", type=int, default=None, help="Tie-break seed.")
@click.option("--keyword-cap", type=click.IntRange(min=1), default=None, help="Override the 2L+1 cap.")
@click.option("--cue-cap", type=click.IntRange(min=1), default=None)
@click.option("--retry-rounds", type=click.IntRange(min=0), default=None,
              help="Extra cue rounds when no cue passes the filters.")
@click.option("--dry-run", is_flag=True, help="Print the prompts and exit without calling the backend.")
@common_options
def generate(obj, word, meaning, seed, keyword_cap, cue_cap, retry_rounds, dry_run):
    """Generate keywords and a verbal cue for WORD."""
    cfg = obj["cfg"]
    seed = cfg.seed if seed is None else seed
    keyword_cap = keyword_cap or cfg.keyword_cap
    cue_cap = cue_cap or cfg.cue_cap
    retry_rounds = cfg.retry_rounds if retry_rounds is None else retry_rounds
    kw_template = load_prompt("keyword", cfg.resources.get("keyword_prompt"))
    cue_template = load_prompt("cue", cfg.resources.get("cue_prompt"))
    pronouncer = build_pronouncer(cfg)
    target = TargetWord.from_word(word, meaning, pronouncer)

    if dry_run:
        cue = fill(cue_template, target=target.surface, meaning=meaning or "{meaning}")
        emit(obj, {
            "target": target.surface,
            "syllables": target.syllable_count,
            "keyword_calls": keyword_cap or default_cap(target),
            "cue_calls_per_round": cue_cap,
            "prompts": {"keyword": keyword_prompt(target, kw_template), "cue": cue},
        }, text=keyword_prompt(target, kw_template) + "\n\n---\n\n" + cue)
        return
    if not meaning:
        raise ConfigError("--meaning is required for cue generation")

    lex = build_lexicon(cfg)
    gateway = build_gateway(cfg, obj["replay"])
    try:
        result = generate_mnemonic(word, meaning, gateway, lex, pronouncer, seed,
                                   keyword_cap, cue_cap, retry_rounds, kw_template, cue_template)
    except NoValidCueError as exc:
        fail(obj, EXIT_NO_CUE, str(exc), getattr(exc, "result", None))
    emit(obj, result, text=_generate_text(result))


def _generate_text(result: dict) -> str:
    lines = [f"target: {result['target']['surface']} /{result['target']['ipa']}/ "
             f"({result['target']['syllables']} syllables)", "", "keyword sets (best first):"]
    for s in result["keyword_candidates"]:
        lines.append(f"  {', '.join(s['keywords']):30s} agg={s['aggregate']:.3f} ranks={s['ranks']}")
    lines += ["", "cues:"]
    for c in result["cue_candidates"]:
        lines.append(f"  [{c['status']}] {c['text']}")
    lines += ["", f"chosen keywords: {', '.join(result['chosen_keywords'])}",
              f"chosen cue: {result['chosen_cue']}"]
    return "\n".join(lines)


def _split_keywords(text: str) -> tuple:
    return tuple(k.strip().lower() for k in text.split(",") if k.strip())


@main.command("score-cue")
@click.argument("target")
@click.argument("keywords")
@click.argument("cue")
@click.option("--meaning", default=None)
@click.option("--no-llm", is_flag=True, help="Skip context completeness (no backend calls).")
@click.option("--strict", is_flag=True, help="Exit 1 when any constraint fails.")
@common_options
def score_cue(obj, target, keywords, cue, meaning, no_llm, strict):
    """Check constraints and score one CUE for TARGET with comma-separated KEYWORDS."""
    cfg = obj["cfg"]
    lex = build_lexicon(cfg)
    tgt = TargetWord.from_word(target, meaning, build_pronouncer(cfg))
    try:
        kset = KeywordSet(_split_keywords(keywords))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    vc = VerbalCue(cue)
    constraint = check_constraints(vc, tgt, kset, lex)
    out = {
        "target": tgt.surface,
        "keywords": list(kset.keywords),
        "cue": cue,
        "tokens": list(vc.tokens),
        "constraint": {
            "contains_target": constraint.contains_target,
            "contains_all_keywords": constraint.contains_all_keywords,
            "keywords_in_order": constraint.keywords_in_order,
            "ok": constraint.ok,
        },
        "f_aoa": score_aoa(vc, lex),
    }
    if not no_llm:
        out["f_cont"] = None
        if constraint.contains_target:
            gateway = build_gateway(cfg, obj["replay"])
            try:
                res = score_context_completeness(vc, tgt, gateway, lex)
                out.update(f_cont=res.cont, masked_cue=vc.masked_text, predictions=list(res.predictions.candidates))
            except ParseError as exc:
                out["f_cont_error"] = str(exc)
        else:
            out["f_cont_error"] = "target not found in cue"
    emit(obj, out)
    if strict and not constraint.ok:
        sys.exit(EXIT_CONSTRAINT)


@main.command("rank-keywords")
@click.argument("target")
@click.option("--set", "sets", multiple=True, help="Comma-separated keyword set (repeatable).")
@click.option("--generate", "use_llm", is_flag=True, help="Overgenerate the candidate sets with the LLM.")
@click.option("--keyword-cap", type=click.IntRange(min=1), default=None)
@click.option("--seed", type=int, default=None)
@common_options
def rank_keywords(obj, target, sets, use_llm, keyword_cap, seed):
    """Score and rank keyword sets for TARGET."""
    cfg = obj["cfg"]
    seed = cfg.seed if seed is None else seed
    lex = build_lexicon(cfg)
    tgt = TargetWord.from_word(target, None, build_pronouncer(cfg))
    try:
        candidates = [KeywordSet(_split_keywords(s)) for s in sets]
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if use_llm:
        gateway = build_gateway(cfg, obj["replay"])
        template = load_prompt("keyword", cfg.resources.get("keyword_prompt"))
        candidates += overgenerate_keyword_sets(tgt, gateway, keyword_cap or cfg.keyword_cap, template)
    if not candidates:
        raise ConfigError("give at least one --set or pass --generate")
    for s in candidates:
        score_keyword_set(s, tgt, lex)
    ranked = rank_keyword_sets(candidates, seed)
    emit(obj, {"target": tgt.surface, "seed": seed, "ranked": [s.to_dict() for s in ranked]})


@main.command("eval")
@click.argument("dataset", type=click.Path(dir_okay=False))
@click.option("--metrics", type=click.Choice(["all", "keywords", "cues"]), default="all", show_default=True)
@click.option("--report", "report_path", type=click.Path(dir_okay=False), default=None,
              help="Also write the JSON report to this file.")
@click.option("--csv", "csv_path", type=click.Path(dir_okay=False), default=None)
@click.option("--no-llm", is_flag=True, help="Skip perplexity (no backend calls).")
@click.option("--seed", type=int, default=None)
@common_options
def eval_cmd(obj, dataset, metrics, report_path, csv_path, no_llm, seed):
    """Compute keyword and cue metrics for a JSONL DATASET of mnemonic records."""
    cfg = obj["cfg"]
    lex = build_lexicon(cfg)
    gateway = None
    if metrics != "keywords" and not no_llm:
        gateway = build_gateway(cfg, obj["replay"])
    options = EvalOptions(metrics=metrics, seed=cfg.seed if seed is None else seed,
                          scorer=ScorerConfig(cfg.imageability_scorer_url, cfg.timeout),
                          concurrency=cfg.concurrency)
    report = run_report(dataset, lex, build_pronouncer(cfg), gateway, options)
    text = report.to_json()
    if report_path:
        with open(report_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    if csv_path:
        with open(csv_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(report.to_csv())
    if obj["output"] == "json":
        click.echo(text, nl=False)
    else:
        for source, block in report.per_source_means.items():
            click.echo(f"{source} ({block['records']} records)")
            for name, m in block["metrics"].items():
                mean = "n/a" if m["mean"] is None else f"{m['mean']:.4f}"
                click.echo(f"  {name:24s} {mean}  (n={m['n']})")


@main.group()
def cache():
    """Inspect or clear the response cache."""


def _open_cache(obj) -> ResponseCache:
    path = obj["cfg"].cache
    if not path:
        raise ConfigError("no cache configured: pass --cache or set 'cache' in mnemo.toml")
    return ResponseCache(path)


@cache.command("inspect")
@common_options
def cache_inspect(obj):
    """Summarize cached responses."""
    store = _open_cache(obj)
    models: dict = {}
    for rec in store.records():
        models[rec["model"]] = models.get(rec["model"], 0) + 1
    emit(obj, {"path": str(store.path), "entries": len(store), "by_model": models})


@cache.command("clear")
@common_options
def cache_clear(obj):
    """Delete the cache file."""
    store = _open_cache(obj)
    emit(obj, {"path": str(store.path), "removed": store.clear()})


if __name__ == "__main__":
    main()
