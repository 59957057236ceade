#!/usr/bin/env python3
"""Regenerates the bundled corpora under data/.

The TSV files are committed; this script exists so they can be rebuilt
deterministically (fixed seed) if the recipe ever changes.
"""
import random
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "data"

CLUSTER_VOCAB = {
    0: ["match", "team", "coach", "goal", "league", "player", "score",
        "stadium", "tournament", "referee", "defense", "striker", "season",
        "trophy", "fans", "kickoff"],
    1: ["market", "stock", "profit", "investor", "bank", "dividend",
        "earnings", "portfolio", "bond", "interest", "inflation", "shares",
        "trading", "revenue", "budget", "loan"],
    2: ["experiment", "theory", "particle", "laboratory", "hypothesis",
        "measurement", "quantum", "molecule", "telescope", "detector",
        "physics", "research", "sample", "neutron", "orbit", "genome"],
    3: ["recipe", "oven", "flavor", "garlic", "roasted", "dinner", "sauce",
        "chef", "delicious", "kitchen", "spice", "baked", "dessert", "salad",
        "butter", "grilled"],
}
NOISE = ["the", "a", "and", "of", "with", "about", "very", "this", "that",
         "some", "more", "when", "after", "before", "today", "report",
         "story", "people", "new", "other"]

POSITIVE = ["great", "wonderful", "excellent", "enjoyable", "brilliant",
            "charming", "delightful", "superb", "refreshing", "moving",
            "funny", "heartfelt", "impressive", "satisfying", "memorable"]
NEGATIVE = ["terrible", "boring", "awful", "dull", "tedious", "disappointing",
            "bland", "clumsy", "forgettable", "lifeless", "annoying",
            "painful", "shallow", "messy", "predictable"]
FILLER = ["the", "movie", "film", "plot", "acting", "story", "director",
          "scenes", "characters", "script", "it", "was", "felt", "with",
          "and", "a", "of", "ending", "dialogue", "cast"]

LINSEP = {
    0: ["north", "river", "stone", "forest", "mountain", "valley", "cliff",
        "meadow"],
    1: ["engine", "circuit", "piston", "gear", "turbine", "valve", "rotor",
        "chassis"],
}


def cluster_sentence(rng, label):
    n = rng.randint(6, 12)
    return " ".join(
        rng.choice(CLUSTER_VOCAB[label]) if rng.random() < 0.65
        else rng.choice(NOISE)
        for _ in range(n))


def sentiment_sentence(rng, label):
    words = POSITIVE if label == 0 else NEGATIVE
    n = rng.randint(7, 14)
    return " ".join(
        rng.choice(words) if rng.random() < 0.4 else rng.choice(FILLER)
        for _ in range(n))


def linsep_sentence(rng, label):
    n = rng.randint(4, 8)
    return " ".join(rng.choice(LINSEP[label]) for _ in range(n))


def write_split(path, rng, num_classes, per_class, make, label_noise=0.0):
    rows = []
    for c in range(num_classes):
        for _ in range(per_class):
            rows.append((c, make(rng, c)))
    rng.shuffle(rows)
    if label_noise > 0.0:
        # train-only annotation noise; eval splits stay clean
        rows = [(
            (label + rng.randrange(1, num_classes)) % num_classes
            if rng.random() < label_noise else label, text)
            for label, text in rows]
    with open(path, "w") as f:
        for label, text in rows:
            f.write(f"{label}\t{text}\n")


def write_lexicon(path, rng):
    entries = {}

    def add_group(words, pool):
        for w in words:
            same = [x for x in words if x != w]
            cands = [rng.choice(same)] + rng.sample(pool, 2)
            entries[w] = [c for c in dict.fromkeys(cands) if c != w]

    add_group(POSITIVE, FILLER)
    add_group(NEGATIVE, FILLER)
    for c, words in CLUSTER_VOCAB.items():
        for w in words:
            same = [x for x in words if x != w]
            cands = [rng.choice(same)] + rng.sample(NOISE, 2)
            entries[w] = [x for x in dict.fromkeys(cands) if x != w]
    for w in FILLER + NOISE:
        others = [x for x in dict.fromkeys(FILLER + NOISE) if x != w]
        entries[w] = rng.sample(others, 2)

    with open(path, "w") as f:
        for w in sorted(entries):
            f.write(f"{w}\t{','.join(entries[w])}\n")


def main():
    OUT.mkdir(exist_ok=True)
    rng = random.Random(20240817)

    write_split(OUT / "cluster4_train.tsv", rng, 4, 200, cluster_sentence,
                label_noise=0.2)
    write_split(OUT / "cluster4_dev.tsv", rng, 4, 50, cluster_sentence)
    write_split(OUT / "cluster4_test.tsv", rng, 4, 75, cluster_sentence)

    write_split(OUT / "sentiment_train.tsv", rng, 2, 300, sentiment_sentence,
                label_noise=0.2)
    write_split(OUT / "sentiment_dev.tsv", rng, 2, 75, sentiment_sentence)
    write_split(OUT / "sentiment_test.tsv", rng, 2, 150, sentiment_sentence)

    write_split(OUT / "linsep_train.tsv", rng, 2, 100, linsep_sentence)
    write_split(OUT / "linsep_test.tsv", rng, 2, 50, linsep_sentence)

    write_lexicon(OUT / "lexicon.tsv", rng)
    print("wrote corpora to", OUT)


if __name__ == "__main__":
    main()
