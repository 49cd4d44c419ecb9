import re
import sys
from collections import Counter

WORD = re.compile(r"[a-z']+")


def tokens(text):
    lowered = text.lower()
    return WORD.findall(lowered)


def count_file(path):
    counts = Counter()
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            words = tokens(line)
            counts.update(words)
    return counts


def top(counts, n=10):
    pairs = counts.most_common(n)
    width = max(len(w) for w, _ in pairs)
    rows = []
    for word, freq in pairs:
        rows.append(f"{word.ljust(width)} {freq}")
    return "\n".join(rows)


def main(argv):
    total = Counter()
    for arg in argv[1:]:
        total += count_file(arg)
    print(top(total))
    sys.exit(0)
