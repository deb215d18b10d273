"""Rebuild the replay fixtures under ``tests/fixtures/replay``.

Fixtures are keyed by prompt hash, so they must be regenerated whenever a
shipped prompt template changes.

    python tools/make_replay_fixtures.py
"""

import shutil
from pathlib import Path

from mnemo.cues import cue_prompt
from mnemo.gateway import ReplayBackend, fill, load_prompt
from mnemo.keywords import keyword_prompt
from mnemo.models import KeywordSet, TargetWord

OUT = Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "replay"
MASK_TEMPLATE = load_prompt("mask")


def story(text, summary):
    return f"Story: {text}\nSummary: {summary}"


def masked(cue):
    return fill(MASK_TEMPLATE, masked_cue=cue)


def main():
    if OUT.exists():
        shutil.rmtree(OUT)
    write = ReplayBackend.write_fixture

    alleviate = TargetWord.from_word("alleviate", "relieve; make more bearable")
    write(OUT, keyword_prompt(alleviate), [
        "Keywords: a, leaf, he, ate",
        "Keywords: a, levy, it",
        "Here is my answer.\nKeywords: all, leave, he, ate",
        "Keywords: ale, eve, ate",
        "Keywords: a, leaf, he, ate",
        "I could not think of anything.",
    ])
    write(OUT, cue_prompt(alleviate, KeywordSet(("a", "leaf", "he", "ate"))), [
        story("He found himself famished, left with nothing but a single leaf on his plate. "
              "He ate it, hoping to alleviate his hunger.",
              "On his plate, there was a leaf he ate to alleviate his hunger."),
        story("A sick boy chewed a leaf his grandma gave him.",
              "A leaf he ate helped alleviate the ache in his stomach."),
        story("Out of order on purpose.", "He ate a leaf to alleviate his hunger."),
        "Story: This response forgot its summary line.",
        story("Grandma brewed tea from a garden leaf.",
              "To alleviate her pain, a leaf he ate was crushed into tea by grandma."),
    ])
    write(OUT, masked("On his plate, there was a leaf he ate to [MASK] his hunger."),
          ["1. Satisfy\n2. Ease\n3. Relieve\n4. Quell\n5. Curb\n"])
    write(OUT, masked("A leaf he ate helped [MASK] the ache in his stomach."),
          ["1. Ease\n2. Relieve\n3. Soothe\n4. Reduce\n5. Calm"])
    write(OUT, masked("To [MASK] her pain, a leaf he ate was crushed into tea by grandma."),
          ["1. Ease\n2. Relieve\n3. Soothe\n4. Dull\n5. Numb"])

    # paper's appease example, used by gateway and pipeline tests
    appease = TargetWord.from_word("appease", "soothe; relieve")
    write(OUT, keyword_prompt(appease), ["Keywords: a, peas"])
    summary = "To appease the boy's dislike for vegetables, his mother offered him a plate of peas."
    write(OUT, cue_prompt(appease, KeywordSet(("a", "peas"))), [
        "Story: The young boy was upset, he hated vegetables. His mother, understanding his distaste, "
        "offered him a plate of peas. She hoped this would appease his frustration and coax him into "
        "eating healthier.\nSummary: " + summary,
    ])
    write(OUT, masked("To [MASK] the boy's dislike for vegetables, his mother offered him a plate of peas."),
          ["1. Overcome\n2. Counteract\n3. Combat\n4. Challenge\n5. Confront"])

    # scoring fixtures for the evaluation dataset
    lp = ReplayBackend.write_logprob_fixture
    lp(OUT, "On his plate, there was a leaf he ate to alleviate his hunger.",
       ["On", " his", " plate", ",", " there", " was", " a", " leaf", " he", " ate", " to", " alleviate",
        " his", " hunger", "."],
       [-3.1, -2.0, -4.2, -0.9, -2.4, -0.8, -1.3, -5.0, -3.3, -2.9, -1.1, -6.2, -0.7, -1.5, -0.4])
    lp(OUT, "On his plate, there was a leaf to alleviate his hunger.",
       ["On", " his", " plate", ",", " there", " was", " a", " leaf", " to", " alleviate", " his", " hunger", "."],
       [-3.1, -2.0, -4.2, -0.9, -2.4, -0.8, -1.3, -5.0, -2.6, -6.0, -0.8, -1.4, -0.4])
    lp(OUT, "The bee tells a lie that belies its nasty sting.",
       ["The", " bee", " tells", " a", " lie", " that", " bel", "ies", " its", " nasty", " sting", "."],
       [-2.5, -7.1, -4.4, -1.2, -2.0, -1.9, -6.5, -0.6, -1.8, -3.7, -2.2, -0.5])
    lp(OUT, "A polemical polar Mick call",
       ["A", " pole", "mical", " polar", " Mick", " call"],
       [-4.0, -9.5, -3.0, -10.2, -11.4, -8.3])
    lp(OUT, "For tea, two cups.", ["For", " tea", ",", " two", " cups", "."], [-3.0, -4.1, -1.7, -2.2, -3.9, -0.6])
    print(f"wrote {len(list(OUT.glob('*.json')))} fixtures to {OUT}")


if __name__ == "__main__":
    main()
