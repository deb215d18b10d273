import json

import pytest
from click.testing import CliRunner

from mnemo.cli import main
from conftest import CONFIG, FIXTURES, REPLAY

GOLDEN = FIXTURES / "golden_generate_alleviate.json"
MEANING = "relieve; make more bearable"
BASE = ["--config", str(CONFIG), "--replay", str(REPLAY)]


@pytest.fixture
def run():
    runner = CliRunner()

    def invoke(*args):
        return runner.invoke(main, list(args), catch_exceptions=False)

    return invoke


def test_generate_matches_golden(run):
    res = run("generate", "alleviate", "--meaning", MEANING, "--seed", "7", *BASE)
    assert res.exit_code == 0, res.output
    assert res.stdout == GOLDEN.read_text(encoding="utf-8")
    out = json.loads(res.stdout)
    assert "alleviate" in out["chosen_cue"]
    for key in ("target", "keyword_candidates", "chosen_keywords", "cue_candidates", "chosen_cue", "seed",
                "cache_stats"):
        assert key in out


def test_generate_without_word_is_usage_error(run):
    assert run("generate").exit_code == 2


def test_generate_without_meaning(run):
    res = run("generate", "alleviate", *BASE)
    assert res.exit_code == 2
    assert json.loads(res.stdout)["exit_code"] == 2


def test_dry_run_makes_no_calls(run, tmp_path):
    # an empty replay directory would fail on any call
    res = run("generate", "alleviate", "--dry-run", "--config", str(CONFIG), "--replay", str(tmp_path))
    assert res.exit_code == 0
    out = json.loads(res.stdout)
    assert out["keyword_calls"] == 9 and out["cue_calls_per_round"] == 5
    assert "Target word: alleviate" in out["prompts"]["keyword"]


def test_backend_failure_exit_code(run, tmp_path):
    res = run("generate", "alleviate", "--meaning", MEANING, "--config", str(CONFIG), "--replay", str(tmp_path))
    assert res.exit_code == 3
    assert "error" in json.loads(res.stdout)


def test_missing_replay_dir_is_config_error(run, tmp_path):
    res = run("generate", "alleviate", "--meaning", MEANING, "--config", str(CONFIG),
              "--replay", str(tmp_path / "nope"))
    assert res.exit_code == 2


def test_no_backend_configured(run, monkeypatch):
    monkeypatch.delenv("MNEMO_API_BASE", raising=False)
    res = run("generate", "alleviate", "--meaning", MEANING, "--config", str(CONFIG))
    assert res.exit_code == 2


def test_no_valid_cue_exit_code(run, tmp_path):
    from mnemo.cues import cue_prompt
    from mnemo.gateway import ReplayBackend
    from mnemo.keywords import keyword_prompt
    from mnemo.models import KeywordSet, TargetWord

    t = TargetWord.from_word("alleviate", MEANING)
    ReplayBackend.write_fixture(tmp_path, keyword_prompt(t), ["Keywords: a, leaf, he, ate"])
    ReplayBackend.write_fixture(tmp_path, cue_prompt(t, KeywordSet(("a", "leaf", "he", "ate"))),
                                ["Summary: He ate a leaf to alleviate it."])
    res = run("generate", "alleviate", "--meaning", MEANING, "--config", str(CONFIG), "--replay", str(tmp_path))
    assert res.exit_code == 4
    out = json.loads(res.stdout)
    assert out["chosen_keywords"] == ["a", "leaf", "he", "ate"]
    assert out["cue_candidates"][0]["status"] == "filtered"


def test_score_cue_exemplar(run):
    res = run("score-cue", "alleviate", "a, leaf, he, ate",
              "On his plate, there was a leaf he ate to alleviate his hunger.", *BASE)
    assert res.exit_code == 0
    out = json.loads(res.stdout)
    assert out["constraint"] == {"contains_target": True, "contains_all_keywords": True,
                                 "keywords_in_order": True, "ok": True}
    assert out["f_cont"] > 0 and out["f_aoa"] > 0


def test_score_cue_strict(run):
    args = ["score-cue", "alleviate", "a, leaf, he, ate", "A leaf to alleviate his hunger.", *BASE, "--no-llm"]
    res = run(*args)
    assert res.exit_code == 0
    assert json.loads(res.stdout)["constraint"]["contains_all_keywords"] is False
    assert run(*args, "--strict").exit_code == 1


def test_score_cue_no_llm(run, tmp_path):
    res = run("score-cue", "alleviate", "a, leaf, he, ate",
              "On his plate, there was a leaf he ate to alleviate his hunger.",
              "--config", str(CONFIG), "--replay", str(tmp_path), "--no-llm")
    out = json.loads(res.stdout)
    assert "f_cont" not in out and out["f_aoa"] == pytest.approx(30.7)


def test_rank_keywords(run):
    res = run("rank-keywords", "alleviate", "--set", "a, leaf, he, ate", "--set", "a, levy, it",
              "--config", str(CONFIG))
    assert res.exit_code == 0
    ranked = json.loads(res.stdout)["ranked"]
    assert ranked[0]["keywords"] == ["a", "leaf", "he", "ate"]


def test_rank_keywords_generate(run):
    res = run("rank-keywords", "alleviate", "--generate", "--seed", "7", *BASE)
    assert len(json.loads(res.stdout)["ranked"]) == 4


def test_eval_two_sources(run, tmp_path):
    report = tmp_path / "report.json"
    csv_path = tmp_path / "report.csv"
    res = run("eval", str(FIXTURES / "dataset.jsonl"), *BASE, "--report", str(report), "--csv", str(csv_path))
    assert res.exit_code == 0
    out = json.loads(res.stdout)
    assert set(out["per_source_means"]) == {"generated", "reference"}
    assert report.read_text(encoding="utf-8") == res.stdout
    assert csv_path.read_text().startswith("index,source,target")


def test_eval_keywords_only(run, tmp_path):
    res = run("eval", str(FIXTURES / "dataset.jsonl"), "--metrics", "keywords", "--config", str(CONFIG),
              "--replay", str(tmp_path))
    assert res.exit_code == 0
    for row in json.loads(res.stdout)["per_record"]:
        assert "ppl" not in row["metrics"] and "cue_imageability" not in row["metrics"]


def test_eval_missing_dataset(run, tmp_path):
    res = run("eval", str(tmp_path / "missing.jsonl"), *BASE)
    assert res.exit_code == 2
    json.loads(res.stdout)


def test_eval_deterministic(run):
    args = ["eval", str(FIXTURES / "dataset.jsonl"), *BASE]
    assert run(*args).stdout == run(*args).stdout


def test_cache_commands(run, tmp_path):
    cache = tmp_path / "cache.jsonl"
    first = run("generate", "alleviate", "--meaning", MEANING, *BASE, "--cache", str(cache))
    second = run("generate", "alleviate", "--meaning", MEANING, *BASE, "--cache", str(cache))
    assert json.loads(second.stdout)["cache_stats"]["backend_calls"] == 0
    assert json.loads(first.stdout)["chosen_cue"] == json.loads(second.stdout)["chosen_cue"]
    inspect = json.loads(run("cache", "inspect", "--cache", str(cache), "--config", str(CONFIG)).stdout)
    assert inspect["entries"] == 17 and inspect["by_model"] == {"gpt-4": 17}
    cleared = json.loads(run("cache", "clear", "--cache", str(cache), "--config", str(CONFIG)).stdout)
    assert cleared["removed"] == 17 and not cache.exists()


def test_cache_without_path(run):
    assert run("cache", "inspect", "--config", str(CONFIG)).exit_code == 2


def test_bad_config(run, tmp_path):
    bad = tmp_path / "bad.toml"
    bad.write_text("[pipeline]\ncue_cap = 0\n")
    assert run("generate", "x", "--dry-run", "--config", str(bad)).exit_code == 2
    assert run("generate", "x", "--dry-run", "--config", str(tmp_path / "none.toml")).exit_code == 2


def test_text_output(run):
    res = run("generate", "alleviate", "--meaning", MEANING, "--seed", "7", *BASE, "--output", "text")
    assert "chosen cue: On his plate" in res.stdout
