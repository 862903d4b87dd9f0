#!/usr/bin/env python3
"""Builds a bag-of-words CSV+schema pair from a `text<TAB>label` file.

Intended for the sentence-sentiment corpora: each input line holds a text
followed by a tab and a 0/1 label. Tokens are lowercased alphanumeric runs
passed through the same small suffix-stripper the fuzzy feature matcher uses,
so token columns from two corpora line up under exact-name matching. Each
kept token becomes a binary presence column; the label lands in a nominal
`sentiment` column.

Usage: make_bow.py --input imdb_labelled.txt --output-prefix data/imdb
"""

import argparse
import re
import sys
from collections import Counter

RULES = [
    ("tional", "tion", 0), ("ation", "ate", 0), ("sses", "ss", 0),
    ("ness", "", 0), ("ment", "", 0), ("ies", "y", 0),
    ("ing", "", 3), ("ed", "", 2), ("ly", "", 2), ("s", "", 2),
]


def stem(word):
    for _ in range(4):
        changed = False
        for suffix, repl, min_stem in RULES:
            if len(word) <= len(suffix) or not word.endswith(suffix):
                continue
            stem_len = len(word) - len(suffix)
            if stem_len < min_stem:
                continue
            if suffix == "s" and word[stem_len - 1] == "s":
                continue
            word = word[:stem_len] + repl
            changed = True
            break
        if not changed:
            break
    return word


def tokens(text):
    return [stem(t) for t in re.findall(r"[a-z0-9]+", text.lower())]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--input", required=True, help="text<TAB>label file")
    ap.add_argument("--output-prefix", required=True, help="writes <prefix>.csv and <prefix>.schema")
    ap.add_argument("--max-features", type=int, default=2000)
    ap.add_argument("--min-count", type=int, default=2)
    args = ap.parse_args()

    rows = []
    with open(args.input, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            text, sep, label = line.rpartition("\t")
            if not sep or label not in ("0", "1"):
                sys.exit(f"{args.input}:{lineno}: expected 'text<TAB>0|1'")
            rows.append((set(tokens(text)), label))
    if not rows:
        sys.exit(f"{args.input}: no usable lines")

    counts = Counter()
    for toks, _ in rows:
        counts.update(toks)
    vocab = [t for t, c in counts.items() if c >= args.min_count and t != "sentiment"]
    vocab.sort(key=lambda t: (-counts[t], t))
    vocab = sorted(vocab[: args.max_features])

    with open(args.output_prefix + ".csv", "w", encoding="utf-8") as out:
        out.write(",".join(vocab + ["sentiment"]) + "\n")
        for toks, label in rows:
            out.write(",".join("1" if t in toks else "0" for t in vocab))
            out.write(f",{label}\n")

    with open(args.output_prefix + ".schema", "w", encoding="utf-8") as out:
        out.write("missing ?\n")
        for t in vocab:
            out.write(f"column {t} nominal 0|1\n")
        out.write("column sentiment nominal 0|1 label\n")

    print(f"{args.output_prefix}.csv: {len(rows)} rows, {len(vocab)} token columns")


if __name__ == "__main__":
    main()
