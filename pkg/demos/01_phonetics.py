"""Pronunciations, IPA and the two keyword sound metrics.

Run: python demos/01_phonetics.py
"""

from mnemo.models import KeywordSet, TargetWord
from mnemo.phonetics import default_pronouncer, levenshtein, syllable_ratio

phon = default_pronouncer()

for word in ("alleviate", "duplicity", "belie", "glorptastic"):
    p = phon.pronounce(word)
    print(f"{word:12s} {' '.join(p.phones):28s} /{p.ipa}/  L={p.syllable_count}  ({p.confidence})")

# "do please city" covers four syllables with three keywords
duplicity = TargetWord.from_word("duplicity", pronouncer=phon)
print("\nsyllable ratio, do/please/city:", syllable_ratio(KeywordSet(("do", "please", "city")), duplicity))

# two keyword sets for "enmity": how far is each from the target in IPA space?
target = phon.pronounce("enmity").ipa
for kws in (("hen", "mitt", "tee"), ("n", "mitt", "hi")):
    ipa = phon.ipa_concat(kws)
    sim = phon.phonetic_similarity(kws, TargetWord.from_word("enmity", pronouncer=phon))
    print(f"{', '.join(kws):14s} /{ipa}/ vs /{target}/: distance {levenshtein(ipa, target)}, similarity {sim:.3f}")
