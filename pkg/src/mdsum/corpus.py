"""Corpus ingestion, text preprocessing, digit restoration and vocabularies.

On-disk layout::

    <root>/<split>/<set_id>/*.doc.txt   one document per file, stem = document name
    <root>/<split>/<set_id>/*.ref.txt   one reference summary per file

with ``split`` one of train/dev/test. Plain ``*.txt`` files are documents too,
and ``ref.*.txt`` files are references.
"""
from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

from .errors import ConfigError, DataError
from .metrics import nearest_sentence

SPLITS = ("train", "dev", "test")

PAD, UNK, EOS, EOD = "<pad>", "<unk>", "<eos>", "<eod>"
SPECIALS = (PAD, UNK, EOS, EOD)

_TOKEN_RE = re.compile(r"[\w#]+|[^\w\s#]")
_SENT_END_RE = re.compile(r"(?<=[.!?])\s+")
_DIGIT_RE = re.compile(r"\d")
_HASH_RUN_RE = re.compile(r"#+")
_DIGIT_RUN_RE = re.compile(r"\d+")


@dataclass(frozen=True)
class Token:
    surface: str
    is_digit_mask: bool = False

    def __post_init__(self):
        if not self.surface or any(ch.isspace() for ch in self.surface):
            raise ValueError(f"invalid token surface {self.surface!r}")


@dataclass(frozen=True)
class Sentence:
    tokens: tuple
    original_text: str = ""

    @classmethod
    def from_words(cls, words, original_text=None):
        words = list(words)
        text = " ".join(words) if original_text is None else original_text
        return cls(tuple(Token(w, bool(w) and set(w) == {"#"}) for w in words), text)

    @property
    def words(self):
        return [t.surface for t in self.tokens]

    def __len__(self):
        return len(self.tokens)

    def __getitem__(self, index):
        if isinstance(index, slice):
            tokens = self.tokens[index]
            return Sentence(tokens, " ".join(t.surface for t in tokens))
        return self.tokens[index]


@dataclass(frozen=True)
class Document:
    """A named document. Raw ``text`` is preprocessed lazily on first access to ``sentences``."""

    name: str
    text: str = ""
    preset: tuple | None = field(default=None, repr=False, compare=False)

    @classmethod
    def from_sentences(cls, name, sentences):
        sentences = tuple(sentences)
        return cls(name, " ".join(s.original_text for s in sentences), sentences)

    @cached_property
    def sentences(self):
        if self.preset is not None:
            return list(self.preset)
        return preprocess_text(self.text)


@dataclass(frozen=True)
class DocumentSet:
    id: str
    documents: tuple
    reference_texts: tuple = ()

    def __post_init__(self):
        if not self.documents:
            raise DataError(f"document set {self.id!r} has no documents")
        docs = tuple(sorted(self.documents, key=lambda d: d.name))
        names = [d.name for d in docs]
        if len(set(names)) != len(names):
            raise DataError(f"document set {self.id!r} has duplicate document names")
        object.__setattr__(self, "documents", docs)

    @cached_property
    def references(self):
        return [preprocess_text(t) for t in self.reference_texts]

    def all_sentences(self):
        """Every source sentence, in document-name order then position."""
        return [s for d in self.documents for s in d.sentences]


@dataclass
class Corpus:
    splits: dict = field(default_factory=lambda: {s: [] for s in SPLITS})

    def __getitem__(self, split):
        return self.splits[split]

    def sets(self, splits=None):
        for name in splits or self.splits:
            yield from self.splits.get(name, [])


def truncate_to_budget(sentences, budget):
    """Keep whole sentences while the running length stays within ``budget``.

    If not even the first sentence fits, it is cut to its first ``budget``
    items, so the result is never empty for non-empty input.
    """
    kept, total = [], 0
    for s in sentences:
        if total + len(s) > budget:
            break
        kept.append(s)
        total += len(s)
    if not kept and sentences:
        kept.append(sentences[0][:budget])
    return kept


def tokenize(text, mask_digits=True):
    """Lowercase, detach punctuation, and optionally replace each digit with '#'."""
    out = []
    for raw in _TOKEN_RE.findall(text):
        low = raw.lower()
        if mask_digits and _DIGIT_RE.search(low):
            out.append(Token(_DIGIT_RE.sub("#", low), raw.isdigit()))
        else:
            out.append(Token(low, False))
    return out


def split_sentences(text):
    return [s for s in _SENT_END_RE.split(text.strip()) if s]


def preprocess_text(raw, mask_digits=True):
    sentences = []
    for chunk in split_sentences(raw):
        tokens = tokenize(chunk, mask_digits)
        if tokens:
            sentences.append(Sentence(tuple(tokens), chunk))
    return sentences


def restore_digits(generated, sources):
    """Replace '#'-runs in generated sentences with digits from their closest source.

    The closest source is the one at minimum word edit distance (first wins on
    ties). Runs are paired left to right with the digit runs of that source's
    original text; surplus '#'-runs stay as they are.
    """
    sources = list(sources)
    source_words = [s.words for s in sources]
    restored = []
    for sent in generated:
        words = sent.words
        if not sources or not any("#" in w for w in words):
            restored.append(sent)
            continue
        best, _ = nearest_sentence(words, source_words)
        digit_runs = iter(_DIGIT_RUN_RE.findall(sources[best].original_text))

        def fill(match):
            return next(digit_runs, match.group(0))

        new_words = [_HASH_RUN_RE.sub(fill, w) if "#" in w else w for w in words]
        restored.append(Sentence(tuple(Token(w) for w in new_words), " ".join(new_words)))
    return restored


class Vocabulary:
    """Dense token <-> id map. Ids 0..3 are the specials <pad>, <unk>, <eos>, <eod>."""

    def __init__(self, tokens: Iterable[str] = ()):
        self.id_to_token = list(SPECIALS)
        for t in tokens:
            if t not in SPECIALS:
                self.id_to_token.append(t)
        self.token_to_id = {t: i for i, t in enumerate(self.id_to_token)}
        if len(self.token_to_id) != len(self.id_to_token):
            raise ValueError("duplicate tokens in vocabulary")

    pad = property(lambda self: 0)
    unk = property(lambda self: 1)
    eos = property(lambda self: 2)
    eod = property(lambda self: 3)

    @property
    def specials(self):
        return {PAD: 0, UNK: 1, EOS: 2, EOD: 3}

    def __len__(self):
        return len(self.id_to_token)

    def __contains__(self, token):
        return token in self.token_to_id

    def __eq__(self, other):
        return isinstance(other, Vocabulary) and self.id_to_token == other.id_to_token

    def encode(self, words: Sequence[str]):
        return [self.token_to_id.get(w, 1) for w in words]

    def decode(self, ids):
        return [self.id_to_token[i] for i in ids]


def build_vocabulary(corpus, max_size, min_freq=1, splits=None):
    if max_size < len(SPECIALS):
        raise ValueError("max_size must leave room for the four special tokens")
    if min_freq < 1:
        raise ValueError("min_freq must be at least 1")
    counts = Counter()
    for ds in corpus.sets(splits):
        for doc in ds.documents:
            for sent in doc.sentences:
                counts.update(sent.words)
        for ref in ds.references:
            for sent in ref:
                counts.update(sent.words)
    ranked = sorted((t for t, c in counts.items() if c >= min_freq and t not in SPECIALS),
                    key=lambda t: (-counts[t], t))
    return Vocabulary(ranked[: max_size - len(SPECIALS)])


def _read(path):
    return path.read_text(encoding="utf-8")


def _classify(path):
    name = path.name
    if name.endswith(".ref.txt"):
        return "ref", name[: -len(".ref.txt")]
    if name.startswith("ref.") and name.endswith(".txt"):
        return "ref", name[: -len(".txt")]
    if name.endswith(".doc.txt"):
        return "doc", name[: -len(".doc.txt")]
    if name.endswith(".txt"):
        return "doc", name[: -len(".txt")]
    return None, None


def read_document_set(set_dir):
    set_dir = Path(set_dir)
    docs, refs = [], []
    for path in sorted(set_dir.iterdir()):
        if not path.is_file():
            continue
        kind, stem = _classify(path)
        if kind == "doc":
            text = _read(path)
            if not text.strip():
                raise DataError(f"empty document file {path}")
            docs.append(Document(stem, text))
        elif kind == "ref":
            refs.append(_read(path))
    if not docs:
        raise DataError(f"document set {set_dir.name!r} ({set_dir}) contains no documents")
    return DocumentSet(set_dir.name, tuple(docs), tuple(refs))


def ingest_corpus(root):
    root = Path(root)
    corpus = Corpus()
    for split in SPLITS:
        split_dir = root / split
        if not split_dir.is_dir():
            raise ConfigError(f"missing split directory {split_dir}")
        corpus.splits[split] = [read_document_set(d) for d in sorted(split_dir.iterdir()) if d.is_dir()]
    return corpus


def write_document_set(set_dir, docset):
    """Write a document set in the corpus layout (inverse of :func:`read_document_set`)."""
    set_dir = Path(set_dir)
    set_dir.mkdir(parents=True, exist_ok=True)
    for doc in docset.documents:
        (set_dir / f"{doc.name}.doc.txt").write_text(doc.text, encoding="utf-8")
    for i, ref in enumerate(docset.reference_texts):
        (set_dir / f"{chr(ord('a') + i)}.ref.txt").write_text(ref, encoding="utf-8")
