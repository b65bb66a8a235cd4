#!/usr/bin/env python3
"""Generate the bundled tiny corpus (train/valid/test).

A synthetic word-level corpus small enough to train in seconds but with
enough structure that a recurrent model clearly beats a unigram baseline:

  - ~2400 word types with a Zipf(1) unigram law (the top 400 types carry
    roughly 3/4 of the mass), so a 2000-word vocabulary cap leaves a
    realistic <unk> tail;
  - words are grouped into 20 latent classes; sentences follow a Markov
    chain over classes, so bigram context is informative;
  - sentences end with probability 0.08 per token;
  - spellings are pronounceable 2-9 letter strings, unique per type, so
    language (spelling-based) codebooks are uniquely decodable.

The generator is self-contained and deterministic: it uses its own
SplitMix64 PRNG rather than the stdlib random module so the committed files
are reproducible byte-for-byte on any Python 3.

Usage: python3 make_tiny_corpus.py [out_dir]
"""

import os
import sys
from bisect import bisect_right

MASK64 = (1 << 64) - 1


class SplitMix64:
    """Same generator the toolkit uses; one stream per artifact."""

    def __init__(self, seed):
        self.state = seed & MASK64

    def next64(self):
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return (z ^ (z >> 31)) & MASK64

    def uniform(self):
        return self.next64() / 2.0**64

    def below(self, n):
        return self.next64() % n


VOWELS = "aeiou"
CONSONANTS = "bcdfghjklmnpqrstvwxyz"


def make_spellings(rng, count):
    """Unique pronounceable spellings, 2-9 letters."""
    seen = set()
    words = []
    while len(words) < count:
        length = 2 + rng.below(8)
        start_vowel = rng.below(2) == 0
        chars = []
        for i in range(length):
            pool = VOWELS if (i % 2 == 0) == start_vowel else CONSONANTS
            chars.append(pool[rng.below(len(pool))])
        w = "".join(chars)
        if w not in seen:
            seen.add(w)
            words.append(w)
    return words


class CorpusModel:
    """Zipf unigrams split over latent classes + a Markov chain of classes."""

    def __init__(self, seed, types=2400, classes=20):
        rng = SplitMix64(seed)
        self.words = make_spellings(rng, types)
        self.classes = classes

        # Zipf(1) weight by rank; each type lands in one latent class.
        weights = [1.0 / (rank + 1) for rank in range(types)]
        members = [[] for _ in range(classes)]
        for rank in range(types):
            members[rng.below(classes)].append(rank)

        # Per-class cumulative emission tables.
        self.emit_cum = []
        self.emit_words = []
        for c in range(classes):
            cum, total = [], 0.0
            for rank in members[c]:
                total += weights[rank]
                cum.append(total)
            self.emit_cum.append(cum)
            self.emit_words.append(members[c])

        # Sparse class transitions: three preferred successors carry almost
        # all the mass, so context roughly halves the per-word entropy and a
        # recurrent model has real structure to learn.
        self.trans_cum = []
        for c in range(classes):
            row = [0.02 for _ in range(classes)]
            for boost in (6.0, 3.0, 1.5):
                row[rng.below(classes)] += boost + rng.uniform()
            cum, total = [], 0.0
            for x in row:
                total += x
                cum.append(total)
            self.trans_cum.append([x / total for x in cum])

    def sample_word(self, rng, c):
        cum = self.emit_cum[c]
        i = bisect_right(cum, rng.uniform() * cum[-1])
        return self.words[self.emit_words[c][min(i, len(cum) - 1)]]

    def sample_class(self, rng, c):
        i = bisect_right(self.trans_cum[c], rng.uniform())
        return min(i, self.classes - 1)

    def generate(self, seed, min_tokens, end_prob=0.08):
        rng = SplitMix64(seed)
        lines, sentence = [], []
        tokens = 0
        c = rng.below(self.classes)
        while tokens < min_tokens or sentence:
            sentence.append(self.sample_word(rng, c))
            tokens += 1
            c = self.sample_class(rng, c)
            if rng.uniform() < end_prob:
                lines.append(" ".join(sentence))
                sentence = []
                c = rng.below(self.classes)
        return "\n".join(lines) + "\n"


def main():
    out_dir = sys.argv[1] if len(sys.argv) > 1 else "."
    os.makedirs(out_dir, exist_ok=True)
    model = CorpusModel(seed=20240811)
    splits = {"tiny_train.txt": (1, 50000), "tiny_valid.txt": (2, 5000), "tiny_test.txt": (3, 5000)}
    for name, (split_seed, min_tokens) in splits.items():
        text = model.generate(split_seed, min_tokens)
        path = f"{out_dir}/{name}"
        with open(path, "w") as f:
            f.write(text)
        n = sum(len(line.split()) for line in text.splitlines())
        print(f"{path}: {n} tokens, {len(text.splitlines())} sentences")


if __name__ == "__main__":
    main()
