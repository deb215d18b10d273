"""Domain records shared by the pipelines and the evaluator."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .phonetics import Pronouncer, Pronunciation, default_pronouncer


@dataclass(frozen=True)
class TargetWord:
    surface: str
    pronunciation: Pronunciation
    meaning: Optional[str] = None

    def __post_init__(self):
        if not self.surface:
            raise ValueError("target word must be nonempty")
        if self.pronunciation.syllable_count < 1:
            raise ValueError(f"{self.surface!r} has no syllables")

    @property
    def syllable_count(self) -> int:
        return self.pronunciation.syllable_count

    @classmethod
    def from_word(cls, word: str, meaning: Optional[str] = None, pronouncer: Optional[Pronouncer] = None):
        pronouncer = pronouncer or default_pronouncer()
        word = word.strip()
        return cls(surface=word.lower(), pronunciation=pronouncer.pronounce(word), meaning=meaning)


@dataclass
class KeywordSet:
    keywords: tuple
    # optional 1-based (start, end) syllable spans, one per keyword
    alignment: Optional[tuple] = None
    raw_scores: dict = field(default_factory=dict)
    ranks: dict = field(default_factory=dict)
    aggregate: Optional[float] = None

    def __post_init__(self):
        self.keywords = tuple(self.keywords)
        if not self.keywords:
            raise ValueError("a keyword set needs at least one keyword")
        for k in self.keywords:
            if not k or k != k.lower() or any(not (c.isalpha() or c in " '") for c in k):
                raise ValueError(f"invalid keyword {k!r}: must be nonempty, lowercase, punctuation-free")

    def validate_alignment(self, syllable_count: int) -> None:
        """Check that spans are in range, ordered, and cover every syllable."""
        if self.alignment is None:
            return
        if len(self.alignment) != len(self.keywords):
            raise ValueError("alignment needs one span per keyword")
        covered = set()
        prev_start = 0
        for start, end in self.alignment:
            if not 1 <= start <= end <= syllable_count:
                raise ValueError(f"span {(start, end)} outside 1..{syllable_count}")
            if start < prev_start:
                raise ValueError("spans must be ordered")
            prev_start = start
            covered.update(range(start, end + 1))
        if covered != set(range(1, syllable_count + 1)):
            raise ValueError(f"spans do not cover syllables 1..{syllable_count}")

    def to_dict(self) -> dict:
        return {
            "keywords": list(self.keywords),
            "raw_scores": dict(self.raw_scores),
            "ranks": dict(self.ranks),
            "aggregate": self.aggregate,
        }


@dataclass(frozen=True)
class Constraint:
    contains_target: bool
    contains_all_keywords: bool
    keywords_in_order: bool

    @property
    def ok(self) -> bool:
        return self.contains_target and self.contains_all_keywords and self.keywords_in_order


@dataclass
class VerbalCue:
    text: str
    tokens: tuple = ()
    constraint: Optional[Constraint] = None
    raw_scores: dict = field(default_factory=dict)
    ranks: dict = field(default_factory=dict)
    aggregate: Optional[float] = None
    predictions: Optional[list] = None
    masked_text: Optional[str] = None

    def __post_init__(self):
        from .cues import tokenize

        if not self.tokens:
            self.tokens = tuple(tokenize(self.text))

    def to_dict(self) -> dict:
        return {
            "text": self.text,
            "tokens": list(self.tokens),
            "constraint": None if self.constraint is None else {
                "contains_target": self.constraint.contains_target,
                "contains_all_keywords": self.constraint.contains_all_keywords,
                "keywords_in_order": self.constraint.keywords_in_order,
            },
            "masked_text": self.masked_text,
            "predictions": self.predictions,
            "raw_scores": dict(self.raw_scores),
            "ranks": dict(self.ranks),
            "aggregate": self.aggregate,
        }
