import itertools
import math
import random
from collections import Counter

import pytest
from hypothesis import given, strategies as st

from mnemo.cues import (
    NoValidCueError,
    check_constraints,
    context_completeness,
    cue_prompt,
    generate_cues,
    is_subsequence,
    mask_target,
    overgenerate_cues,
    parse_cue_response,
    rank_cues,
    score_aoa,
    score_context_completeness,
    tokenize,
)
from mnemo.gateway import Gateway, ReplayBackend
from mnemo.lexicon import LexiconError
from mnemo.models import KeywordSet, TargetWord, VerbalCue
from conftest import make_bundle

ALLEVIATE_CUE = "On his plate, there was a leaf he ate to alleviate his hunger."
BELIE_CUE = "The bee tells a lie that belies its nasty sting."
APPEASE_CUE = "To appease the boy's dislike for vegetables, his mother offered him a plate of peas."


def target(word, phon, meaning="something"):
    return TargetWord.from_word(word, meaning, phon)


def subsequence_oracle(needles, tokens):
    """Exhaustive search over every index combination."""
    if not needles:
        return True
    return any(all(tokens[i] == n for i, n in zip(idx, needles))
               for idx in itertools.combinations(range(len(tokens)), len(needles)))


def test_tokenize():
    assert tokenize("On his plate, there was a leaf.") == ["on", "his", "plate", "there", "was", "a", "leaf"]
    assert tokenize("An ex-champion horse") == ["an", "ex", "champion", "horse"]
    assert tokenize("\"Quoted!\" -- dash") == ["quoted", "dash"]
    assert VerbalCue("Boy's toy.").tokens == ("boy's", "toy")


def test_exemplar_cues(lex, phon):
    c = check_constraints(VerbalCue(ALLEVIATE_CUE), target("alleviate", phon), KeywordSet(("a", "leaf", "he", "ate")), lex)
    assert c.contains_target and c.contains_all_keywords and c.keywords_in_order
    c = check_constraints(VerbalCue(BELIE_CUE), target("belie", phon), KeywordSet(("bee", "lie")), lex)
    assert c.ok and c.contains_target
    c = check_constraints(VerbalCue("The city does please everyone"), target("duplicity", phon),
                          KeywordSet(("do", "please", "city")), lex)
    assert not c.keywords_in_order
    assert not c.ok


def test_missing_keyword(lex, phon):
    c = check_constraints(VerbalCue("A leaf to alleviate his hunger."), target("alleviate", phon),
                          KeywordSet(("a", "leaf", "he", "ate")), lex)
    assert not c.contains_all_keywords and not c.keywords_in_order and c.contains_target


def test_repeated_keyword_needs_two_tokens(lex, phon):
    kset = KeywordSet(("a", "leaf", "a"))
    t = target("alleviate", phon)
    assert not check_constraints(VerbalCue("a leaf to alleviate"), t, kset, lex).contains_all_keywords
    assert check_constraints(VerbalCue("a leaf, a way to alleviate"), t, kset, lex).ok


def random_pair(rng):
    vocab = ["do", "please", "city", "bee", "lie", "a"]
    tokens = [rng.choice(vocab + ["belies", "belie", "sting"]) for _ in range(rng.randint(0, 20))]
    needles = [rng.choice(vocab) for _ in range(rng.randint(1, 5))]
    return tokens, needles


def test_filter_matches_brute_force(lex, phon):
    rng = random.Random(1234)
    t = target("belie", phon)
    for _ in range(1000):
        tokens, needles = random_pair(rng)
        cue = VerbalCue(" ".join(tokens) or "x", tokens=tuple(tokens) or ("x",))
        got = check_constraints(cue, t, KeywordSet(tuple(needles)), lex)
        toks = list(cue.tokens)
        want_target = any(tok in ("belie", "belies") for tok in toks)
        want_all = not (Counter(needles) - Counter(toks))
        want_order = subsequence_oracle(needles, toks)
        assert (got.contains_target, got.contains_all_keywords, got.keywords_in_order) == (
            want_target, want_all, want_order)
        assert got.ok == (want_target and want_order)


@given(st.lists(st.sampled_from("abc"), max_size=12), st.lists(st.sampled_from("abc"), max_size=4))
def test_greedy_equals_exhaustive(tokens, needles):
    assert is_subsequence(needles, tokens) == subsequence_oracle(needles, tokens)


def test_mask_target(lex, phon):
    assert mask_target(BELIE_CUE, target("belie", phon), lex) == "The bee tells a lie that [MASK] its nasty sting."
    assert mask_target(ALLEVIATE_CUE, target("alleviate", phon), lex) == (
        "On his plate, there was a leaf he ate to [MASK] his hunger.")
    assert mask_target("Alleviate-worthy!", target("alleviate", phon), lex) == "[MASK]-worthy!"
    with pytest.raises(ValueError):
        mask_target("nothing here", target("alleviate", phon), lex)


def test_cue_prompt_needs_meaning(phon):
    with pytest.raises(ValueError, match="meaning"):
        cue_prompt(TargetWord.from_word("appease", None, phon), KeywordSet(("a", "peas")))


def test_parse_cue_response():
    raw = "Story: The young boy was upset.\nSummary: " + APPEASE_CUE
    assert parse_cue_response(raw) == APPEASE_CUE
    with pytest.raises(ValueError):
        parse_cue_response("Story: only a story")


def test_overgenerate_appease(gateway, phon):
    t = TargetWord.from_word("appease", "soothe; relieve", phon)
    cues = overgenerate_cues(t, KeywordSet(("a", "peas")), gateway)
    assert [c.text for c in cues] == [APPEASE_CUE]  # five identical answers collapse to one


def test_overgenerate_drops_missing_summary(tmp_path, phon):
    t = TargetWord.from_word("appease", "soothe; relieve", phon)
    kset = KeywordSet(("a", "peas"))
    ReplayBackend.write_fixture(tmp_path, cue_prompt(t, kset), ["Story: no summary", "Summary: A peas pod."])
    cues = overgenerate_cues(t, kset, Gateway(ReplayBackend(tmp_path)), count_cap=2)
    assert [c.text for c in cues] == ["A peas pod."]


UNIT = {"target": (1.0, 0.0), "p8": (0.8, 0.6), "p6": (0.6, 0.8), "p4": (0.4, math.sqrt(1 - 0.16)),
        "p2": (0.2, math.sqrt(1 - 0.04)), "p0": (0.0, 1.0)}


def test_context_completeness_examples(phon):
    lex = make_bundle(embeddings=UNIT)
    t = TargetWord(surface="target", pronunciation=phon.pronounce("target"))
    assert context_completeness(["p8", "p6", "p4", "p2", "p0"], t, lex) == pytest.approx(0.4, abs=1e-12)
    assert context_completeness(["target"] * 5, t, lex) == pytest.approx(1.0)
    assert context_completeness(["zz", "yy", "xx", "ww", "vv"], t, lex) == 0.0


def test_score_context_completeness_replay(gateway, lex, phon):
    t = target("alleviate", phon)
    cue = VerbalCue(ALLEVIATE_CUE)
    result = score_context_completeness(cue, t, gateway, lex)
    assert cue.predictions == ["satisfy", "ease", "relieve", "quell", "curb"]
    assert -1.0 <= result.cont <= 1.0
    with pytest.raises(LexiconError):
        score_context_completeness(VerbalCue("zorp it"), target("zorp", phon), gateway, lex)


def test_aoa_examples(lex):
    assert score_aoa(VerbalCue("the of and zyzzyva"), lex) == 0.0
    assert score_aoa(VerbalCue("he ate to his hunger"), lex) == pytest.approx(9.5)
    assert score_aoa(VerbalCue("hunger hunger"), lex) > score_aoa(VerbalCue("hunger"), lex)


@given(st.lists(st.sampled_from(["leaf", "ate", "the", "zorp", "hunger", "plate", "a"]), min_size=1, max_size=10),
       st.sampled_from(["leaf", "ate", "the", "zorp", "hunger"]), st.integers(0, 10))
def test_aoa_nondecreasing_under_insertion(lex, words, extra, pos):
    base = score_aoa(VerbalCue(" ".join(words)), lex)
    longer = words[:pos] + [extra] + words[pos:]
    assert score_aoa(VerbalCue(" ".join(longer)), lex) >= base >= 0


def cue_with(cont, aoa, text="c"):
    c = VerbalCue(text)
    c.raw_scores = {"cont": cont, "aoa": aoa}
    return c


def test_rank_cues_examples():
    only = rank_cues([cue_with(0.1, 10)], 0)
    assert only[0].aggregate == 1.0
    cues = [cue_with(0.5, 20, "x"), cue_with(0.9, 5, "best"), cue_with(0.1, 1, "y")]
    ranked = rank_cues(cues, 0)
    assert ranked[0].text == "best" and ranked[0].ranks == {"cont": 1, "aoa": 2}
    with pytest.raises(NoValidCueError):
        rank_cues([], 0)


def test_rank_cues_sqrt_aggregate():
    cues = [cue_with(1 - i / 10, i, str(i)) for i in range(9)]
    rank_cues(cues, 0)
    assert all(c.aggregate == math.sqrt(c.ranks["cont"] * c.ranks["aoa"]) for c in cues)


def test_generate_cues_replay(gateway, replay, lex, phon):
    t = target("alleviate", phon, "relieve; make more bearable")
    outcome = generate_cues(t, KeywordSet(("a", "leaf", "he", "ate")), gateway, lex, seed=7)
    assert outcome.rounds == 1
    cue_calls = [p for k, p in replay.calls if "StoryWeave" in p]
    assert len(cue_calls) <= 5
    assert outcome.chosen.text == ALLEVIATE_CUE
    filtered = [c for c in outcome.candidates if not c.constraint.ok]
    assert [c.text for c in filtered] == ["He ate a leaf to alleviate his hunger."]


def test_no_valid_cue_after_retry(tmp_path, lex, phon):
    t = target("alleviate", phon)
    kset = KeywordSet(("a", "leaf", "he", "ate"))
    ReplayBackend.write_fixture(tmp_path, cue_prompt(t, kset), ["Summary: He ate a leaf to alleviate it."])
    backend = ReplayBackend(tmp_path)
    with pytest.raises(NoValidCueError) as info:
        generate_cues(t, kset, Gateway(backend), lex, seed=1, retry_rounds=1)
    assert len(backend.calls) == 10  # two rounds of five
    assert info.value.candidates
