"""Small synthetic corpora in the on-disk layout, for demos and tests.

    python -m mdsum.toy <root> --kind mds --seed 0
"""
from __future__ import annotations

import argparse
from pathlib import Path

import numpy as np

from .corpus import SPLITS, Corpus, Document, DocumentSet, write_document_set

TOPICS = [
    ["storm", "coast", "flood", "rain", "wind", "homes"],
    ["election", "vote", "party", "leader", "poll", "seats"],
    ["market", "shares", "bank", "price", "trade", "profit"],
    ["team", "match", "coach", "goal", "season", "fans"],
    ["virus", "hospital", "doctors", "patients", "vaccine", "cases"],
    ["court", "judge", "trial", "lawyer", "verdict", "jury"],
    ["rocket", "launch", "space", "crew", "orbit", "station"],
    ["fire", "forest", "smoke", "crews", "acres", "town"],
]
VERBS = ["hit", "left", "reached", "closed", "raised", "won", "faced", "met"]
FILLER = ["the", "a", "new", "local", "officials", "said", "on", "after"]


def _sentence(rng, topic, with_number):
    words = [rng.choice(FILLER), rng.choice(topic), rng.choice(VERBS), rng.choice(topic)]
    if with_number:
        words.insert(3, str(int(rng.integers(2, 999))))
    words.append(rng.choice(topic))
    text = " ".join(words)
    return text[0].upper() + text[1:] + "."


def _document(rng, topic, n_sentences):
    return " ".join(_sentence(rng, topic, rng.random() < 0.3) for _ in range(n_sentences))


def _docset(rng, set_id, topic, n_docs, n_sentences, n_refs):
    docs = tuple(Document(f"d{k:02d}", _document(rng, topic, n_sentences)) for k in range(1, n_docs + 1))
    refs = []
    for _ in range(n_refs):
        # a reference reuses the lead sentence of a document plus one fresh sentence
        lead = docs[int(rng.integers(len(docs)))].text.split(". ")[0].rstrip(".") + "."
        refs.append(lead + " " + _sentence(rng, topic, False))
    return DocumentSet(set_id, docs, tuple(refs))


def make_corpus(kind="mds", sizes=(3, 1, 2), seed=0, n_docs=3, n_sentences=3):
    """Build a synthetic corpus. ``kind='sds'`` gives one document per set."""
    rng = np.random.default_rng(seed)
    corpus = Corpus()
    k = 0
    for split, count in zip(SPLITS, sizes):
        sets = []
        for _ in range(count):
            topic = TOPICS[k % len(TOPICS)]
            docs = 1 if kind == "sds" else n_docs
            sets.append(_docset(rng, f"{kind}{k:03d}", topic, docs, n_sentences, 1))
            k += 1
        corpus.splits[split] = sets
    return corpus


def write_corpus(corpus, root):
    root = Path(root)
    for split in SPLITS:
        (root / split).mkdir(parents=True, exist_ok=True)
        for ds in corpus[split]:
            write_document_set(root / split / ds.id, ds)
    return root


def main(argv=None):
    ap = argparse.ArgumentParser(description="Write a synthetic corpus.")
    ap.add_argument("root")
    ap.add_argument("--kind", choices=("sds", "mds"), default="mds")
    ap.add_argument("--sizes", default="3,1,2", help="train,dev,test set counts")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    sizes = tuple(int(x) for x in args.sizes.split(","))
    write_corpus(make_corpus(args.kind, sizes, args.seed), args.root)


if __name__ == "__main__":
    main()
