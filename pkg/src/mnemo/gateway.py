"""LLM access: text generation, masked top-5 prediction and token logprobs.

Two backends are provided. :class:`OpenAIBackend` speaks the OpenAI-style
HTTP JSON API (``/chat/completions`` for generation, ``/completions`` with
``echo`` for prompt logprobs). :class:`ReplayBackend` serves recorded
responses from a fixture directory and never touches the network.

:class:`Gateway` sits in front of either one and adds the response cache,
retries with exponential backoff and a bound on in-flight requests.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
import re
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional, Sequence, Union

import httpx

from .lexicon import data_path

log = logging.getLogger(__name__)

MASK = "[MASK]"


class GatewayError(RuntimeError):
    """Base class for backend failures."""


class TransportError(GatewayError):
    pass


class BackendStatusError(GatewayError):
    def __init__(self, status: int, body: str = ""):
        super().__init__(f"backend returned HTTP {status}: {body[:200]}")
        self.status = status


class EmptyResponseError(GatewayError):
    pass


class LogprobsUnsupportedError(GatewayError):
    pass


class ReplayMissError(GatewayError):
    pass


class ParseError(ValueError):
    pass


@dataclass(frozen=True)
class GenerationRequest:
    prompt: str
    model: str = "gpt-4"
    temperature: float = 0.7
    top_p: float = 1.0
    max_tokens: int = 256
    seed_hint: Optional[int] = None

    def __post_init__(self):
        if not self.prompt:
            raise ValueError("prompt must be nonempty")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if not 0 < self.top_p <= 1:
            raise ValueError("top_p must be in (0, 1]")
        if self.max_tokens < 1:
            raise ValueError("max_tokens must be >= 1")


@dataclass(frozen=True)
class TokenLogprobs:
    tokens: tuple
    logprobs: tuple

    def __post_init__(self):
        if len(self.tokens) != len(self.logprobs):
            raise ValueError("tokens and logprobs must have equal length")
        for lp in self.logprobs:
            if not math.isfinite(lp) or lp > 1e-9:
                raise ValueError(f"invalid logprob {lp!r}")


@dataclass(frozen=True)
class MaskPredictions:
    candidates: tuple

    def __post_init__(self):
        if len(self.candidates) != 5:
            raise ValueError(f"expected exactly 5 candidates, got {len(self.candidates)}")


def cache_key(req: GenerationRequest, kind: str = "complete") -> str:
    payload = {
        "model": req.model,
        "temperature": req.temperature,
        "top_p": req.top_p,
        "max_tokens": req.max_tokens,
        "prompt": req.prompt,
    }
    # distinct overgeneration slots must not collapse onto one cached answer
    if req.seed_hint is not None:
        payload["seed_hint"] = req.seed_hint
    if kind != "complete":
        payload["kind"] = kind
    blob = json.dumps(payload, sort_keys=True, ensure_ascii=False)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def prompt_hash(prompt: str) -> str:
    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()


class ResponseCache:
    """Append-only JSONL cache; many readers, one serialized writer."""

    def __init__(self, path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._entries: dict[str, dict] = {}
        self.hits = 0
        self.misses = 0
        if self.path.exists():
            with self.path.open(encoding="utf-8") as fh:
                for line in fh:
                    if line.strip():
                        rec = json.loads(line)
                        self._entries.setdefault(rec["key"], rec)

    def get(self, key: str) -> Optional[str]:
        rec = self._entries.get(key)
        with self._lock:
            if rec is None:
                self.misses += 1
                return None
            self.hits += 1
        return rec["response"]

    def put(self, key: str, req: GenerationRequest, response: str) -> None:
        params = {k: v for k, v in asdict(req).items() if k not in ("prompt", "model")}
        rec = {
            "key": key,
            "model": req.model,
            "params": params,
            "prompt": req.prompt,
            "response": response,
            "timestamp": time.time(),
        }
        with self._lock:
            if key in self._entries:
                return
            self._entries[key] = rec
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with self.path.open("a", encoding="utf-8") as fh:
                fh.write(json.dumps(rec, ensure_ascii=False) + "\n")

    def __len__(self):
        return len(self._entries)

    def records(self) -> list[dict]:
        return list(self._entries.values())

    def clear(self) -> int:
        with self._lock:
            n = len(self._entries)
            self._entries.clear()
            if self.path.exists():
                self.path.unlink()
        return n

    def stats(self) -> dict:
        return {"hits": self.hits, "misses": self.misses, "entries": len(self._entries)}


class OpenAIBackend:
    """OpenAI-compatible HTTP backend."""

    def __init__(self, base_url: str, api_key: Optional[str] = None, timeout: float = 60.0,
                 client: Optional[httpx.Client] = None):
        self.base_url = base_url.rstrip("/")
        headers = {"Authorization": f"Bearer {api_key}"} if api_key else {}
        self._client = client or httpx.Client(timeout=timeout)
        self._headers = headers

    def _post(self, path: str, payload: dict) -> dict:
        url = f"{self.base_url}/{path}"
        try:
            resp = self._client.post(url, json=payload, headers=self._headers)
        except httpx.HTTPError as exc:
            raise TransportError(f"{type(exc).__name__} contacting {url}: {exc}") from exc
        if resp.status_code >= 400:
            raise BackendStatusError(resp.status_code, resp.text)
        try:
            return resp.json()
        except ValueError as exc:
            raise GatewayError(f"non-JSON response from {url}") from exc

    def generate(self, req: GenerationRequest) -> str:
        payload = {
            "model": req.model,
            "messages": [{"role": "user", "content": req.prompt}],
            "temperature": req.temperature,
            "top_p": req.top_p,
            "max_tokens": req.max_tokens,
        }
        if req.seed_hint is not None:
            payload["seed"] = req.seed_hint
        data = self._post("chat/completions", payload)
        try:
            return data["choices"][0]["message"]["content"] or ""
        except (KeyError, IndexError, TypeError):
            raise GatewayError(f"unexpected chat response shape: {str(data)[:200]}") from None

    def score(self, text: str, model: str) -> TokenLogprobs:
        payload = {
            "model": model,
            "prompt": text,
            "max_tokens": 1,
            "temperature": 0,
            "echo": True,
            "logprobs": 0,
        }
        data = self._post("completions", payload)
        try:
            lp = data["choices"][0]["logprobs"]
        except (KeyError, IndexError, TypeError):
            lp = None
        if not lp or "token_logprobs" not in lp:
            raise LogprobsUnsupportedError(f"backend at {self.base_url} returned no prompt logprobs")
        offsets = lp.get("text_offset") or list(range(len(lp["tokens"])))
        tokens, logprobs = [], []
        for tok, val, off in zip(lp["tokens"], lp["token_logprobs"], offsets):
            # the echoed prompt ends where the generated token starts; the
            # first token has no left context and comes back as null
            if off >= len(text) or val is None:
                continue
            tokens.append(tok)
            logprobs.append(float(val))
        return TokenLogprobs(tuple(tokens), tuple(logprobs))


class ReplayBackend:
    """Serve recorded responses from ``*.json`` fixtures in a directory.

    Each fixture is either ``{"kind": "complete", "prompt": ..., "responses": [...]}``
    or ``{"kind": "logprobs", "text": ..., "tokens": [...], "logprobs": [...]}``.
    Generation slot ``seed_hint`` picks ``responses[seed_hint % len(responses)]``.
    Every call is recorded in :attr:`calls` as ``(kind, prompt)``.
    """

    def __init__(self, directory):
        self.directory = Path(directory)
        if not self.directory.is_dir():
            raise FileNotFoundError(f"replay directory not found: {self.directory}")
        self._complete: dict[str, list] = {}
        self._logprobs: dict[str, TokenLogprobs] = {}
        for path in sorted(self.directory.glob("*.json")):
            rec = json.loads(path.read_text(encoding="utf-8"))
            if rec.get("kind", "complete") == "complete":
                self._complete.setdefault(prompt_hash(rec["prompt"]), list(rec["responses"]))
            else:
                self._logprobs.setdefault(
                    prompt_hash(rec["text"]),
                    TokenLogprobs(tuple(rec["tokens"]), tuple(rec["logprobs"])),
                )
        self.calls: list[tuple[str, str]] = []
        self._lock = threading.Lock()

    def _record(self, kind: str, prompt: str):
        with self._lock:
            self.calls.append((kind, prompt))

    def generate(self, req: GenerationRequest) -> str:
        self._record("complete", req.prompt)
        responses = self._complete.get(prompt_hash(req.prompt))
        if not responses:
            raise ReplayMissError(f"no replay fixture for prompt {prompt_hash(req.prompt)[:12]}")
        return responses[(req.seed_hint or 0) % len(responses)]

    def score(self, text: str, model: str) -> TokenLogprobs:
        self._record("logprobs", text)
        hit = self._logprobs.get(prompt_hash(text))
        if hit is None:
            raise ReplayMissError(f"no logprob fixture for text {text[:40]!r}")
        return hit

    @staticmethod
    def write_fixture(directory, prompt: str, responses: Sequence[str]) -> Path:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        path = directory / f"{prompt_hash(prompt)[:16]}.json"
        rec = {"kind": "complete", "prompt": prompt, "responses": list(responses)}
        path.write_text(json.dumps(rec, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
        return path

    @staticmethod
    def write_logprob_fixture(directory, text: str, tokens: Sequence[str], logprobs: Sequence[float]) -> Path:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        path = directory / f"lp-{prompt_hash(text)[:16]}.json"
        rec = {"kind": "logprobs", "text": text, "tokens": list(tokens), "logprobs": list(logprobs)}
        path.write_text(json.dumps(rec, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
        return path


def load_prompt(name: str, override: Optional[Union[str, Path]] = None) -> str:
    path = Path(override) if override else data_path(f"prompts/{name}.txt")
    return path.read_text(encoding="utf-8").rstrip("\n")


def fill(template: str, **slots: str) -> str:
    """Substitute ``{slot}`` markers without touching any other braces."""
    for name, value in slots.items():
        template = template.replace("{" + name + "}", value)
    return template


_LIST_PREFIX = re.compile(r"^\s*(?:\d+\s*[.):-]|[-*•])\s*")
_EDGE_PUNCT = re.compile(r"^[^\w]+|[^\w]+$")


def parse_mask_predictions(raw: str) -> MaskPredictions:
    """Parse a numbered list of exactly five single-word candidates."""
    lines = [ln for ln in raw.splitlines() if ln.strip()]
    if len(lines) != 5:
        raise ParseError(f"expected 5 candidate lines, got {len(lines)}")
    words = []
    for ln in lines:
        word = _EDGE_PUNCT.sub("", _LIST_PREFIX.sub("", ln)).lower()
        if not word or len(word.split()) != 1:
            raise ParseError(f"candidate line {ln.strip()!r} is not a single word")
        words.append(word)
    return MaskPredictions(tuple(words))


class Gateway:
    """Cache, retries and in-flight limit in front of a backend."""

    def __init__(self, backend, gen_model: str = "gpt-4", score_model: str = "llama3-8b",
                 cache: Optional[ResponseCache] = None, max_in_flight: int = 4,
                 max_retries: int = 3, backoff: float = 0.5, mask_prompt: Optional[str] = None):
        if max_in_flight < 1:
            raise ValueError("max_in_flight must be >= 1")
        self.backend = backend
        self.gen_model = gen_model
        self.score_model = score_model
        self.cache = cache
        self.max_in_flight = max_in_flight
        self.max_retries = max_retries
        self.backoff = backoff
        self.mask_template = mask_prompt or load_prompt("mask")
        self._slots = threading.BoundedSemaphore(max_in_flight)
        self.backend_calls = 0
        self._count_lock = threading.Lock()

    def request(self, prompt: str, temperature: float = 0.7, top_p: float = 1.0,
                max_tokens: int = 256, seed_hint: Optional[int] = None) -> GenerationRequest:
        return GenerationRequest(prompt=prompt, model=self.gen_model, temperature=temperature,
                                 top_p=top_p, max_tokens=max_tokens, seed_hint=seed_hint)

    def _with_retries(self, fn, *args):
        for attempt in range(self.max_retries + 1):
            try:
                with self._slots:
                    with self._count_lock:
                        self.backend_calls += 1
                    return fn(*args)
            except (TransportError, BackendStatusError) as exc:
                transient = isinstance(exc, TransportError) or exc.status == 429 or exc.status >= 500
                if not transient:
                    raise
                if attempt == self.max_retries:
                    raise TransportError(f"{exc} (gave up after {self.max_retries} retries)") from exc
                delay = self.backoff * (2 ** attempt)
                log.warning("backend call failed (%s); retry %d/%d in %.2fs",
                            exc, attempt + 1, self.max_retries, delay)
                if delay:
                    time.sleep(delay)

    def complete(self, req: GenerationRequest) -> str:
        key = cache_key(req)
        if self.cache is not None:
            hit = self.cache.get(key)
            if hit is not None:
                return hit
        text = self._with_retries(self.backend.generate, req)
        if not text or not text.strip():
            raise EmptyResponseError("backend returned an empty response")
        if self.cache is not None:
            self.cache.put(key, req, text)
        return text

    def complete_many(self, reqs: Sequence[GenerationRequest]) -> list:
        """Run requests concurrently; failed slots hold the exception instead of text."""
        def one(req):
            try:
                return self.complete(req)
            except GatewayError as exc:
                log.warning("dropping candidate slot %s: %s", req.seed_hint, exc)
                return exc

        if len(reqs) <= 1 or self.max_in_flight == 1:
            return [one(r) for r in reqs]
        with ThreadPoolExecutor(max_workers=min(self.max_in_flight, len(reqs))) as pool:
            return list(pool.map(one, reqs))

    def masked_prompt(self, cue_with_mask: str) -> str:
        return fill(self.mask_template, masked_cue=cue_with_mask)

    def masked_top5(self, cue_with_mask: str) -> MaskPredictions:
        if cue_with_mask.count(MASK) != 1:
            raise ValueError(f"cue must contain exactly one {MASK} token")
        req = self.request(self.masked_prompt(cue_with_mask), temperature=0.0, max_tokens=64)
        return parse_mask_predictions(self.complete(req))

    def token_logprobs(self, text: str) -> TokenLogprobs:
        if not text:
            raise ValueError("text must be nonempty")
        scorer = getattr(self.backend, "score", None)
        if scorer is None:
            raise LogprobsUnsupportedError(f"{type(self.backend).__name__} cannot score text")
        req = GenerationRequest(prompt=text, model=self.score_model, temperature=0.0, max_tokens=1)
        key = cache_key(req, kind="logprobs")
        if self.cache is not None:
            hit = self.cache.get(key)
            if hit is not None:
                rec = json.loads(hit)
                return TokenLogprobs(tuple(rec["tokens"]), tuple(rec["logprobs"]))
        result = self._with_retries(scorer, text, self.score_model)
        if self.cache is not None:
            blob = json.dumps({"tokens": list(result.tokens), "logprobs": list(result.logprobs)})
            self.cache.put(key, req, blob)
        return result

    def stats(self) -> dict:
        out = {"backend_calls": self.backend_calls}
        if self.cache is not None:
            out.update(self.cache.stats())
        return out
