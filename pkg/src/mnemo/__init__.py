"""Keyword mnemonics via LLM overgenerate-and-rank.

Generation runs in two stages. Candidate syllabic keyword sets are
overgenerated and ranked by imageability, orthographic and semantic
similarity; verbal cues built on the best set are then filtered for
containment and keyword order and ranked by context completeness and
age of acquisition. The evaluator computes automated keyword and cue
metrics over JSONL datasets.

>>> from mnemo import load_bundle, Pronouncer, TargetWord
>>> target = TargetWord.from_word("alleviate", "relieve; make more bearable")
>>> target.syllable_count
4
"""

from .cues import check_constraints, generate_cues, rank_cues, score_aoa, score_context_completeness, tokenize
from .evaluator import EvalOptions, MnemonicRecord, run_report
from .gateway import Gateway, GenerationRequest, OpenAIBackend, ReplayBackend, ResponseCache
from .keywords import generate_keywords, parse_keyword_response, rank_keyword_sets, score_keyword_set
from .lexicon import LexiconBundle, LexiconConfig, NormsSource, cosine, load_bundle
from .models import Constraint, KeywordSet, TargetWord, VerbalCue
from .phonetics import Pronouncer, Pronunciation, levenshtein, pronounce, syllable_ratio
from .pipeline import generate_mnemonic

__version__ = "0.1.0"

__all__ = [
    "Constraint", "EvalOptions", "Gateway", "GenerationRequest", "KeywordSet", "LexiconBundle",
    "LexiconConfig", "MnemonicRecord", "NormsSource", "OpenAIBackend", "Pronouncer", "Pronunciation",
    "ReplayBackend", "ResponseCache", "TargetWord", "VerbalCue", "check_constraints", "cosine",
    "generate_cues", "generate_keywords", "generate_mnemonic", "levenshtein", "load_bundle",
    "parse_keyword_response", "pronounce", "rank_cues", "rank_keyword_sets", "run_report", "score_aoa",
    "score_context_completeness", "score_keyword_set", "syllable_ratio", "tokenize",
]
