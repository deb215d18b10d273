"""Evaluate a small dataset of generated and reference mnemonics.

Prints per-source means of the keyword metrics, perplexity and the cue
imageability (here the lexicon proxy, since no image scorer is set up).

Run: python demos/04_evaluation.py
"""

from _shared import FIXTURES, setup

from mnemo.evaluator import EvalOptions, run_report

lex, phon, gateway = setup()
report = run_report(FIXTURES / "dataset.jsonl", lex, phon, gateway, EvalOptions(seed=7))

for source, block in report.per_source_means.items():
    print(f"{source} ({block['records']} records)")
    for name, m in block["metrics"].items():
        mean = "n/a" if m["mean"] is None else f"{m['mean']:.3f}"
        print(f"  {name:22s} {mean:>10s}  n={m['n']}")

print("\nflagged rows:")
for row in report.per_record:
    if row["errors"]:
        print(f"  {row['target']!r}: {', '.join(sorted(row['errors']))}")
