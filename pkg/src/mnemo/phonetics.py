"""Pronunciations, syllable counts, IPA transcription and edit distance.

The pronouncing dictionary defaults to the CMU dictionary shipped by the
``cmudict`` package; any file in the same ``WORD  PH1 PH2 ...`` format can
be used instead. Words missing from the dictionary go through a small
letter-to-phone rule table and are flagged ``confidence="fallback"``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Optional, Sequence

from rapidfuzz.distance import Levenshtein as _Lev

from .lexicon import data_path

_VOWELS = frozenset(
    "AA AE AH AO AW AY EH ER EY IH IY OW OY UH UW".split()
)
_STRESS_MARKS = str.maketrans("", "", "ˈˌ")
_NON_ALPHA = re.compile(r"[^a-z]")


class PronunciationError(ValueError):
    pass


@dataclass(frozen=True)
class Pronunciation:
    word: str
    phones: tuple
    syllable_count: int
    ipa: str
    confidence: str = "dictionary"  # or "fallback"


def levenshtein(a: str, b: str) -> int:
    """Unit-cost edit distance over code points."""
    return _Lev.distance(a, b)


def normalized_similarity(a: str, b: str) -> float:
    """``1 - distance / max(len)``; two empty strings count as identical."""
    longest = max(len(a), len(b))
    if longest == 0:
        return 1.0
    return 1.0 - levenshtein(a, b) / longest


def strip_stress(phone: str) -> str:
    return phone.rstrip("012")


def count_syllables(phones: Iterable[str]) -> int:
    return sum(1 for p in phones if p[-1:].isdigit())


def read_arpabet_map(path) -> dict[str, str]:
    table = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected 'arpabet<TAB>ipa'")
            table[parts[0].strip().upper()] = parts[1].strip()
    return table


def read_pronouncing_dict(path) -> dict[str, tuple]:
    """Parse a CMU-format dictionary, keeping only the first variant of each word."""
    entries: dict[str, tuple] = {}
    with open(path, encoding="latin-1") as fh:
        for line in fh:
            if not line.strip() or line.startswith(";;;"):
                continue
            line = line.split("#", 1)[0]
            parts = line.split()
            if len(parts) < 2:
                continue
            head = parts[0].lower()
            if head.endswith(")") and "(" in head:
                continue
            entries.setdefault(head, tuple(p.upper() for p in parts[1:]))
    return entries


def _default_dict_path() -> Path:
    import cmudict

    return Path(cmudict.__file__).parent / "data" / "cmudict.dict"


def read_letter_rules(path) -> list[tuple[str, tuple]]:
    rules = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            grapheme, phones = line.split("\t")
            rules.append((grapheme, tuple(phones.split())))
    rules.sort(key=lambda r: -len(r[0]))
    return rules


class Pronouncer:
    """Dictionary-backed pronunciation lookup with a rule-based fallback."""

    def __init__(self, dictionary=None, arpabet_map=None, letter_rules=None):
        if dictionary is None or isinstance(dictionary, (str, Path)):
            dictionary = read_pronouncing_dict(dictionary or _default_dict_path())
        self.dictionary = dictionary
        self.arpabet = read_arpabet_map(arpabet_map or data_path("arpabet_ipa.tsv"))
        self.rules = read_letter_rules(letter_rules or data_path("letter_rules.tsv"))

    def to_ipa(self, phones: Sequence[str]) -> str:
        out = []
        for phone in phones:
            key = phone.upper()
            ipa = self.arpabet.get(key)
            if ipa is None:
                ipa = self.arpabet.get(strip_stress(key))
            if ipa is None:
                raise PronunciationError(f"unknown phone symbol {phone!r}")
            out.append(ipa)
        return "".join(out).translate(_STRESS_MARKS)

    def pronounce(self, word: str) -> Pronunciation:
        cleaned = _NON_ALPHA.sub("", word.lower())
        if not cleaned:
            raise PronunciationError(f"cannot pronounce {word!r}: no alphabetic characters")
        phones = self.dictionary.get(word.lower().strip(".,;:!?\"'()")) or self.dictionary.get(cleaned)
        confidence = "dictionary"
        if phones is None or count_syllables(phones) == 0:
            phones = self.letter_to_phones(cleaned)
            confidence = "fallback"
        return Pronunciation(
            word=cleaned,
            phones=tuple(phones),
            syllable_count=count_syllables(phones),
            ipa=self.to_ipa(phones),
            confidence=confidence,
        )

    def letter_to_phones(self, word: str) -> tuple:
        """Greedy longest-match grapheme rules; first vowel stressed, final silent e dropped."""
        letters = word
        if len(letters) > 2 and letters.endswith("e") and re.search(r"[aeiouy]", letters[:-1]):
            letters = letters[:-1]
        raw: list[str] = []
        i = 0
        while i < len(letters):
            for grapheme, phones in self.rules:
                if letters.startswith(grapheme, i):
                    raw.extend(phones)
                    i += len(grapheme)
                    break
            else:
                i += 1
        if not any(p in _VOWELS for p in raw):
            raw.insert(max(len(raw) - 1, 0), "AH")
        out = []
        stressed = False
        for p in raw:
            if p in _VOWELS:
                out.append(p + ("0" if stressed else "1"))
                stressed = True
            else:
                out.append(p)
        return tuple(out)

    def pronounce_words(self, words: Iterable[str]) -> list[Pronunciation]:
        """Pronounce each whitespace/hyphen-separated piece of every word."""
        prons = []
        for w in words:
            for piece in re.split(r"[\s\-]+", w.strip()):
                if piece:
                    prons.append(self.pronounce(piece))
        return prons

    def ipa_concat(self, words: Iterable[str]) -> str:
        return "".join(p.ipa for p in self.pronounce_words(words))

    def phonetic_similarity(self, keywords: Sequence[str], target) -> float:
        """``1 - D(ipa(keywords), ipa(target)) / max length``, in [0, 1]."""
        keywords = getattr(keywords, "keywords", keywords)
        target_ipa = target.pronunciation.ipa if hasattr(target, "pronunciation") else self.ipa_concat([target])
        return normalized_similarity(self.ipa_concat(keywords), target_ipa)


def syllable_ratio(keyword_count, syllable_count) -> float:
    """Symmetric keyword/syllable count ratio ``min/max``.

    Takes counts, or a keyword set (or list) and a target word.
    """
    if not isinstance(keyword_count, int):
        keyword_count = len(getattr(keyword_count, "keywords", keyword_count))
    if not isinstance(syllable_count, int):
        syllable_count = syllable_count.syllable_count
    if keyword_count < 1 or syllable_count < 1:
        raise ValueError("keyword and syllable counts must be >= 1")
    return min(keyword_count, syllable_count) / max(keyword_count, syllable_count)


@lru_cache(maxsize=1)
def default_pronouncer() -> Pronouncer:
    return Pronouncer()


def pronounce(word: str) -> Pronunciation:
    return default_pronouncer().pronounce(word)


def to_ipa(phones: Sequence[str]) -> str:
    return default_pronouncer().to_ipa(phones)


def phonetic_similarity(keywords: Sequence[str], target, pronouncer: Optional[Pronouncer] = None) -> float:
    return (pronouncer or default_pronouncer()).phonetic_similarity(keywords, target)
