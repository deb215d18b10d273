"""Psycholinguistic resources: imageability and AoA norms, stopwords, lemmas, embeddings.

Every lookup is lowercased and lemmatized first. Missing-word rules:

* imageability falls back to 1.0, the floor of the 7-point scale;
* AoA returns ``None`` so callers can skip the word;
* embeddings return ``None``, never a zero vector.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from types import MappingProxyType
from typing import Mapping, Optional, Sequence

import numpy as np

IMG_MIN = 1.0
IMG_MAX = 7.0
_MISSING_TOKENS = {"", "na", "n/a", "nan", "#n/a"}


class LexiconError(ValueError):
    """A resource file is missing or malformed."""


def data_path(name: str) -> Path:
    """Path of a file shipped in ``mnemo/data``."""
    return Path(str(resources.files("mnemo") / "data" / name))


@dataclass(frozen=True)
class NormsSource:
    """Where to read one CSV norms table from."""

    path: str
    word_column: str = "word"
    rating_column: str = "rating"
    # native rating scale; only used when rescaling a secondary imageability source
    scale: Optional[tuple[float, float]] = None


@dataclass
class LexiconConfig:
    imageability: Optional[NormsSource] = None
    imageability_secondary: Optional[NormsSource] = None
    aoa: Optional[NormsSource] = None
    embeddings: Optional[str] = None
    stopwords: Optional[str] = None
    lemmas: Optional[str] = None


@dataclass(frozen=True)
class LexiconBundle:
    imageability_table: Mapping[str, float]
    aoa_table: Mapping[str, float]
    stopwords: frozenset
    lemmas: Mapping[str, str]
    embeddings: Mapping[str, np.ndarray]
    dim: int = 0
    sources: Mapping[str, dict] = field(default_factory=dict)

    def lemmatize(self, word: str) -> str:
        w = word.lower()
        return self.lemmas.get(w, w)

    def is_stopword(self, word: str) -> bool:
        return word.lower() in self.stopwords

    def imageability(self, word: str) -> float:
        return self.imageability_table.get(self.lemmatize(word), IMG_MIN)

    def aoa(self, word: str) -> Optional[float]:
        return self.aoa_table.get(self.lemmatize(word))

    def embed(self, word: str) -> Optional[np.ndarray]:
        w = word.lower()
        vec = self.embeddings.get(self.lemmatize(w))
        if vec is None:
            vec = self.embeddings.get(w)
        return vec

    def serialize(self) -> bytes:
        """Canonical byte form; equal bundles serialize identically."""
        payload = {
            "imageability": sorted(self.imageability_table.items()),
            "aoa": sorted(self.aoa_table.items()),
            "stopwords": sorted(self.stopwords),
            "lemmas": sorted(self.lemmas.items()),
            "dim": self.dim,
            "embeddings": [(w, [float(x) for x in v]) for w, v in sorted(self.embeddings.items())],
        }
        return json.dumps(payload, ensure_ascii=False, separators=(",", ":")).encode("utf-8")

    def digest(self) -> str:
        return hashlib.sha256(self.serialize()).hexdigest()


def cosine(a: Sequence[float], b: Sequence[float]) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        raise ValueError("cosine undefined for a zero-norm vector")
    value = float(np.dot(a, b) / (na * nb))
    return max(-1.0, min(1.0, value))


def _file_info(path: Path, rows: int) -> dict:
    return {
        "path": path.name,
        "sha256": hashlib.sha256(path.read_bytes()).hexdigest(),
        "rows": rows,
    }


def _require(path) -> Path:
    p = Path(path)
    if not p.is_file():
        raise LexiconError(f"resource file not found: {p}")
    return p


def read_norms(source: NormsSource) -> tuple[dict[str, float], Path]:
    """Read a CSV norms table into ``{lowercased word: rating}``.

    Rows whose rating cell is empty or ``NA`` are skipped; any other
    non-numeric rating is an error. The first occurrence of a word wins.
    """
    path = _require(source.path)
    table: dict[str, float] = {}
    with path.open(newline="", encoding="utf-8-sig") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise LexiconError(f"{path}: empty norms file")
        for col in (source.word_column, source.rating_column):
            if col not in reader.fieldnames:
                raise LexiconError(f"{path}: missing column {col!r} (have {reader.fieldnames})")
        for row in reader:
            lineno = reader.line_num
            word = (row.get(source.word_column) or "").strip().lower()
            raw = (row.get(source.rating_column) or "").strip()
            if not word:
                raise LexiconError(f"{path}:{lineno}: empty word")
            if raw.lower() in _MISSING_TOKENS:
                continue
            try:
                value = float(raw)
            except ValueError:
                raise LexiconError(f"{path}:{lineno}: malformed rating {raw!r}") from None
            if not math.isfinite(value):
                raise LexiconError(f"{path}:{lineno}: non-finite rating {raw!r}")
            table.setdefault(word, value)
    return table, path


def rescale(value: float, lo: float, hi: float) -> float:
    """Linear map of ``[lo, hi]`` onto the 7-point imageability scale."""
    return IMG_MIN + (value - lo) * (IMG_MAX - IMG_MIN) / (hi - lo)


def read_embeddings(path) -> tuple[dict[str, np.ndarray], int]:
    """Read a word2vec/fastText style text file.

    An optional ``<count> <dim>`` header fixes the dimension; otherwise the
    first vector does.
    """
    path = _require(path)
    vectors: dict[str, np.ndarray] = {}
    dim = 0
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.rstrip("\n").split(" ")
            parts = [p for p in parts if p]
            if not parts:
                continue
            if lineno == 1 and len(parts) == 2 and all(p.isdigit() for p in parts):
                dim = int(parts[1])
                continue
            word, values = parts[0].lower(), parts[1:]
            if dim == 0:
                dim = len(values)
            if len(values) != dim:
                raise LexiconError(
                    f"{path}:{lineno}: dimension mismatch, expected {dim} got {len(values)}"
                )
            try:
                vec = np.array([float(v) for v in values], dtype=float)
            except ValueError:
                raise LexiconError(f"{path}:{lineno}: malformed vector for {word!r}") from None
            vec.setflags(write=False)
            vectors.setdefault(word, vec)
    if not vectors:
        raise LexiconError(f"{path}: no vectors loaded")
    return vectors, dim


def read_lemmas(path) -> dict[str, str]:
    path = _require(path)
    table: dict[str, str] = {}
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2 or not parts[0] or not parts[1]:
                raise LexiconError(f"{path}:{lineno}: expected 'form<TAB>lemma'")
            table.setdefault(parts[0].strip().lower(), parts[1].strip().lower())
    return table


def read_stopwords(path) -> frozenset:
    path = _require(path)
    with path.open(encoding="utf-8") as fh:
        words = {line.strip().lower() for line in fh}
    words.discard("")
    return frozenset(w for w in words if not w.startswith("#"))


def load_bundle(config: Optional[LexiconConfig] = None) -> LexiconBundle:
    """Load every configured resource into an immutable bundle.

    Stopwords and lemmas default to the shipped tables. When a word is in
    both imageability sources the primary (Glasgow) rating is kept; the
    secondary source is rescaled from its declared native scale first.
    """
    config = config or LexiconConfig()
    sources: dict[str, dict] = {}

    imageability: dict[str, float] = {}
    if config.imageability is not None:
        primary, path = read_norms(config.imageability)
        for word, value in primary.items():
            if not IMG_MIN <= value <= IMG_MAX:
                raise LexiconError(f"{path}: rating for {word!r} outside [1, 7]: {value}")
        imageability.update(primary)
        sources["imageability"] = _file_info(path, len(primary))
    if config.imageability_secondary is not None:
        src = config.imageability_secondary
        lo, hi = src.scale or (0.0, 1.0)
        if not hi > lo:
            raise LexiconError(f"invalid secondary scale {(lo, hi)}")
        secondary, path = read_norms(src)
        for word, value in secondary.items():
            if not lo <= value <= hi:
                raise LexiconError(f"{path}: rating for {word!r} outside declared scale {(lo, hi)}")
            imageability.setdefault(word, rescale(value, lo, hi))
        sources["imageability_secondary"] = dict(_file_info(path, len(secondary)), scale=[lo, hi])

    aoa: dict[str, float] = {}
    if config.aoa is not None:
        aoa, path = read_norms(config.aoa)
        for word, value in aoa.items():
            if value <= 0:
                raise LexiconError(f"{path}: AoA for {word!r} must be > 0, got {value}")
        sources["aoa"] = _file_info(path, len(aoa))

    embeddings: dict[str, np.ndarray] = {}
    dim = 0
    if config.embeddings is not None:
        embeddings, dim = read_embeddings(config.embeddings)
        sources["embeddings"] = dict(_file_info(Path(config.embeddings), len(embeddings)), dim=dim)

    stop_path = Path(config.stopwords) if config.stopwords else data_path("stopwords.txt")
    stopwords = read_stopwords(stop_path)
    sources["stopwords"] = _file_info(stop_path, len(stopwords))

    lemma_path = Path(config.lemmas) if config.lemmas else data_path("lemmas.tsv")
    lemmas = read_lemmas(lemma_path)
    sources["lemmas"] = _file_info(lemma_path, len(lemmas))

    return LexiconBundle(
        imageability_table=MappingProxyType(imageability),
        aoa_table=MappingProxyType(aoa),
        stopwords=stopwords,
        lemmas=MappingProxyType(lemmas),
        embeddings=MappingProxyType(embeddings),
        dim=dim,
        sources=MappingProxyType(sources),
    )
