"""Regenerate ``src/mnemo/data/lemmas.tsv`` from the lemminflect lookup tables.

Only needed when refreshing the shipped table; the package itself never
imports lemminflect.

    python tools/build_lemmas.py
"""

import csv
import gzip
import os
from collections import defaultdict

import lemminflect

POS_PRIORITY = ("noun", "verb", "adj", "adv")
OUT = os.path.join(os.path.dirname(__file__), "..", "src", "mnemo", "data", "lemmas.tsv")

# regular forms missing from the upstream lookup
SUPPLEMENT = {
    "belies": "belie",
    "belied": "belie",
    "belying": "belie",
}


def main():
    resources = os.path.join(os.path.dirname(lemminflect.__file__), "resources")
    by_form = defaultdict(dict)
    lemmas = set()
    with gzip.open(os.path.join(resources, "lemma_lu.csv.gz"), "rt", encoding="utf-8") as fh:
        for form, pos, lemma_field in csv.reader(fh):
            form = form.lower()
            first = lemma_field.split("/")[0].lower()
            lemmas.add(first)
            if form.isalpha() and first.isalpha():
                by_form[form].setdefault(pos.lower(), first)

    table = {}
    for form, choices in by_form.items():
        if form in lemmas:
            continue
        for pos in POS_PRIORITY:
            if pos in choices:
                table[form] = choices[pos]
                break
    table.update(SUPPLEMENT)
    # values must never be keys, so lookups stay idempotent
    table = {f: l for f, l in table.items() if f != l and l not in table}

    with open(OUT, "w", encoding="utf-8") as fh:
        for form in sorted(table):
            fh.write(f"{form}\t{table[form]}\n")
    print(f"wrote {len(table)} entries to {os.path.normpath(OUT)}")


if __name__ == "__main__":
    main()
