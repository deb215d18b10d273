import json
import math

import httpx
import pytest
from hypothesis import given, settings, strategies as st

from mnemo.evaluator import (
    DatasetError,
    EvalOptions,
    MnemonicRecord,
    ScorerConfig,
    cue_imageability_proxy,
    cue_perplexity,
    imageability_norm,
    keyword_metrics,
    perplexity,
    read_dataset,
    run_report,
)
from mnemo.gateway import Gateway, TokenLogprobs
from conftest import FIXTURES, make_bundle

DATASET = FIXTURES / "dataset.jsonl"


class ConstantScorer:
    def __init__(self, value):
        self.value = value

    def generate(self, req):
        raise NotImplementedError

    def score(self, text, model):
        toks = text.split()
        return TokenLogprobs(tuple(toks), tuple(self.value(i) for i in range(len(toks))))


def rec(**kw):
    base = {"target": "alleviate", "keywords": ["a", "leaf", "he", "ate"], "cue": "A leaf to alleviate."}
    base.update(kw)
    return MnemonicRecord.from_dict(base)


def test_perplexity_analytic_cases():
    v = 50000
    gw = Gateway(ConstantScorer(lambda i: -math.log(v)))
    assert cue_perplexity(rec(cue="one two three four"), gw) == pytest.approx(v, rel=1e-6)
    assert perplexity([0.0, 0.0, 0.0]) == 1.0
    assert abs(perplexity([-1.0, -2.0, -3.0]) - math.e ** 2) <= 1e-9


def test_record_validation():
    with pytest.raises(ValueError):
        rec(cue="")
    with pytest.raises(ValueError):
        rec(keywords=[])
    assert rec(keywords="bee, lie").keywords == ("bee", "lie")


def test_read_dataset_errors(tmp_path):
    with pytest.raises(DatasetError, match="not found"):
        read_dataset(tmp_path / "missing.jsonl")
    (tmp_path / "empty.jsonl").write_text("\n")
    with pytest.raises(DatasetError, match="empty"):
        read_dataset(tmp_path / "empty.jsonl")
    (tmp_path / "bad.jsonl").write_text('{"target": "x", "keywords": ["y"], "cue": "z"}\n{"target": ""}\n')
    with pytest.raises(DatasetError, match=":2:"):
        read_dataset(tmp_path / "bad.jsonl")


def test_normalization_endpoints(lex, phon):
    assert imageability_norm(7.0) == 1.0 and imageability_norm(1.0) == 0.0
    exact = keyword_metrics(rec(keywords=["alle", "viate"]), lex, phon)["metrics"]
    assert exact["orthographic_sim_norm"] == 1.0


def test_semantic_clamped_at_zero(phon):
    lex = make_bundle(embeddings={"bee": (1.0, 0.0), "lie": (-1.0, 0.2)})
    m = keyword_metrics(rec(target="bee", keywords=["lie"], cue="bee lie"), lex, phon)["metrics"]
    assert m["semantic_sim_norm"] == 0.0


def test_keyword_metrics_alleviate_example(lex, phon):
    m = keyword_metrics(rec(), lex, phon)["metrics"]
    assert m["syllable_ratio"] == 1.0
    assert m["imageability_norm"] == pytest.approx((5.0 - 1) / 6)


def test_fallback_pronunciations_counted(lex, phon):
    out = keyword_metrics(rec(target="glorptastic", keywords=["glorp", "tastic"], cue="c"), lex, phon)
    assert "glorptastic" in out["fallback_pronunciations"]


def test_cue_imageability_external():
    def handler(request):
        assert json.loads(request.content) == {"text": "A leaf to alleviate."}
        return httpx.Response(200, json={"score": 0.61})

    scorer = ScorerConfig(url="http://scorer.test/score", client=httpx.Client(transport=httpx.MockTransport(handler)))
    assert cue_imageability_proxy(rec(), scorer, make_bundle()) == (0.61, "external")


def test_cue_imageability_external_failure_falls_back():
    scorer = ScorerConfig(url="http://scorer.test/score",
                          client=httpx.Client(transport=httpx.MockTransport(lambda r: httpx.Response(500))))
    value, label = cue_imageability_proxy(rec(cue="the of"), scorer, make_bundle(stopwords={"the", "of"}))
    assert (value, label) == (0.0, "proxy")


def test_cue_imageability_proxy_endpoints():
    lex = make_bundle(imageability={"leaf": 7.0, "tree": 7.0}, stopwords={"the", "a"})
    assert cue_imageability_proxy(rec(cue="The leaf, a tree."), None, lex) == (1.0, "proxy")
    assert cue_imageability_proxy(rec(cue="the a"), None, lex) == (0.0, "proxy")


def test_report_two_sources_and_exclusion(lex, phon, gateway):
    report = run_report(DATASET, lex, phon, gateway, EvalOptions(seed=7))
    means = report.per_source_means
    assert set(means) == {"generated", "reference"}
    bad = [r for r in report.per_record if r["target"] == "42"][0]
    assert "pronunciation" in bad["errors"]
    assert bad["metrics"]["phonetic_sim"] is None and bad["metrics"]["ppl"] is not None
    ref = means["reference"]["metrics"]
    assert ref["phonetic_sim"]["n"] == 2 and ref["ppl"]["n"] == 3
    assert report.meta["flagged_records"] == 1
    assert report.meta["cue_imageability_mode"] == "proxy"


def test_report_scored_string_recorded(lex, phon, gateway):
    report = run_report(DATASET, lex, phon, gateway)
    cues = [json.loads(line)["cue"] for line in DATASET.read_text().splitlines()]
    assert [r["scored_cue"] for r in report.per_record] == cues


def test_polemical_ordering(lex, phon, gateway):
    # fixture scores follow the reported ordering, never the absolute values
    rows = {r["scored_cue"]: r for r in run_report(DATASET, lex, phon, gateway).per_record}
    assert rows["A polemical polar Mick call"]["metrics"]["ppl"] > rows[
        "On his plate, there was a leaf he ate to alleviate his hunger."]["metrics"]["ppl"]


def test_report_single_record(tmp_path, lex, phon):
    path = tmp_path / "one.jsonl"
    path.write_text(DATASET.read_text().splitlines()[0] + "\n")
    report = run_report(path, lex, phon, None, EvalOptions(metrics="keywords"))
    row = report.per_record[0]
    for name, value in row["metrics"].items():
        assert report.per_source_means["generated"]["metrics"][name]["mean"] == value
    assert "ppl" not in row["metrics"]


def test_report_byte_identical(lex, phon, replay):
    a = run_report(DATASET, lex, phon, Gateway(replay)).to_json()
    b = run_report(DATASET, lex, phon, Gateway(replay)).to_json()
    assert a == b
    assert run_report(DATASET, lex, phon, Gateway(replay)).to_csv().startswith("index,source,target,")


def test_unknown_metric_selection(lex, phon):
    with pytest.raises(ValueError):
        run_report(DATASET, lex, phon, None, EvalOptions(metrics="bogus"))


word = st.text(alphabet="abcdefghilmnopt", min_size=1, max_size=8)


@settings(max_examples=60, deadline=None)
@given(word, st.lists(word, min_size=1, max_size=4))
def test_normalized_metrics_in_unit_interval(lex, phon, target, keywords):
    m = keyword_metrics(rec(target=target, keywords=keywords, cue="c"), lex, phon)["metrics"]
    for name, value in m.items():
        if value is not None:
            assert 0.0 <= value <= 1.0, name
