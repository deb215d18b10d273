"""Generate, filter and rank verbal cues for a chosen keyword set.

Cues must contain the target (any inflection) and every keyword in order.
Survivors are scored by how well an LLM can guess the masked target
(context completeness) and by summed age of acquisition, then ranked.

Run: python demos/03_cue_generation.py
"""

from _shared import setup

from mnemo.cues import generate_cues
from mnemo.models import KeywordSet, TargetWord

lex, phon, gateway = setup()
target = TargetWord.from_word("alleviate", "relieve; make more bearable", phon)
outcome = generate_cues(target, KeywordSet(("a", "leaf", "he", "ate")), gateway, lex, seed=7)

for cue in outcome.candidates:
    flags = cue.constraint
    if not flags.ok:
        print(f"filtered  {cue.text}\n          in order: {flags.keywords_in_order}")
        continue
    print(f"kept      {cue.text}")
    print(f"          masked: {cue.masked_text}")
    print(f"          guesses: {', '.join(cue.predictions)}")
    print(f"          f_cont={cue.raw_scores['cont']:.3f} f_aoa={cue.raw_scores['aoa']:.1f} "
          f"ranks={cue.ranks} aggregate={cue.aggregate:.3f}")

print(f"\nchosen: {outcome.chosen.text}")
