"""Overgenerate keyword sets for "alleviate" and rank them.

The replay backend stands in for the LLM; each candidate is scored on
imageability, spelling distance and meaning overlap, then ranked by the
geometric mean of its three ranks.

Run: python demos/02_keyword_ranking.py
"""

from _shared import setup

from mnemo.keywords import default_cap, generate_keywords
from mnemo.models import TargetWord

lex, phon, gateway = setup()
target = TargetWord.from_word("alleviate", "relieve; make more bearable", phon)
print(f"target {target.surface!r}, L={target.syllable_count}, up to {default_cap(target)} calls")

ranked = generate_keywords(target, gateway, lex, seed=7)
print(f"{gateway.backend_calls} calls, {len(ranked)} distinct sets\n")
print(f"{'keywords':22s} {'f_img':>6s} {'f_orth':>6s} {'f_sem':>6s}   ranks      aggregate")
for s in ranked:
    r = s.raw_scores
    ranks = "/".join(str(s.ranks[k]) for k in ("img", "orth", "sem"))
    print(f"{', '.join(s.keywords):22s} {r['img']:6.2f} {r['orth']:6d} {r['sem']:6.3f}   {ranks:10s} {s.aggregate:.3f}")
