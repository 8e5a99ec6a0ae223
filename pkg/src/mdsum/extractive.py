"""Extractive summarizers (Lead, Coverage, LexRank, TextRank, Centroid) and the
pipelines that combine them with the abstractive model.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .corpus import Document, DocumentSet, restore_digits, truncate_to_budget
from .decoder import GenerationConfig, SummaryResult
from .errors import ConfigError
from .metrics import content_words
from .numerics.linalg import column_normalize, pagerank_power_iteration

METHODS = ("lead", "coverage", "lexrank", "textrank", "centroid")
DAMPING = 0.85
RANK_TOL = 1e-6
LEXRANK_THRESHOLD = 0.1
REDUNDANCY_COSINE = 0.95
TEXTRANK_PENALTY = 0.5


def pagerank(weights, damping=DAMPING, tol=RANK_TOL):
    """Uniform-teleport PageRank over a non-negative weight matrix.

    Columns are normalized (all-zero columns become uniform). The iteration
    stops once the max-norm change certifies an error below ``tol``.
    """
    n = weights.shape[0]
    if n == 0:
        return np.zeros(0)
    M = column_normalize(weights)
    step_tol = tol * (1.0 - damping) / damping if damping > 0 else tol
    return pagerank_power_iteration(M, np.full(n, 1.0 / n), damping, step_tol)


def tfidf(counts):
    """Raw term frequency times ln(N / df), rows are units (sentences or documents)."""
    n = counts.shape[0]
    df = (counts > 0).sum(axis=0)
    idf = np.log(n / np.maximum(df, 1))
    return counts * idf


def cosine_matrix(X, Y=None):
    Y = X if Y is None else Y
    nx = np.linalg.norm(X, axis=1)
    ny = np.linalg.norm(Y, axis=1)
    denom = np.outer(nx, ny)
    out = np.zeros(denom.shape)
    np.divide(X @ Y.T, denom, out=out, where=denom > 0)
    return out


def _count_matrix(word_lists):
    terms = sorted({w for ws in word_lists for w in ws})
    index = {t: j for j, t in enumerate(terms)}
    counts = np.zeros((len(word_lists), len(terms)))
    for i, ws in enumerate(word_lists):
        for w in ws:
            counts[i, index[w]] += 1
    return counts, terms


@dataclass
class SentenceBag:
    """Sentences of one or more documents with tf-idf vectors (idf over these sentences)."""

    sentences: list
    doc_names: list
    positions: list  # 1-based position within the document
    words: list
    counts: np.ndarray
    vectors: np.ndarray
    terms: list

    @classmethod
    def from_documents(cls, documents: Sequence[Document]):
        sents, names, pos = [], [], []
        for doc in sorted(documents, key=lambda d: d.name):
            for k, s in enumerate(doc.sentences, start=1):
                sents.append(s)
                names.append(doc.name)
                pos.append(k)
        words = [content_words(s.words) for s in sents]
        counts, terms = _count_matrix(words)
        return cls(sents, names, pos, words, counts, tfidf(counts), terms)

    def __len__(self):
        return len(self.sentences)


def _fill(order, sentences, budget, skip=None):
    """Walk ``order`` adding whole sentences until the next one overflows ``budget``."""
    chosen, total = [], 0
    for i in order:
        if skip is not None and skip(i, chosen):
            continue
        if total + len(sentences[i]) > budget:
            break
        chosen.append(i)
        total += len(sentences[i])
    if not chosen:
        order = [i for i in order if skip is None or not skip(i, [])]
        if order:
            return [sentences[order[0]][:budget]]
        return []
    return [sentences[i] for i in chosen]


def _ranked(scores):
    """Indices by descending score; ties keep document order then position."""
    return list(np.lexsort((np.arange(len(scores)), -np.asarray(scores))))


def lead(source, budget):
    """First sentences of a document, or of the first document (by name) of a set."""
    if isinstance(source, DocumentSet):
        doc = source.documents[0]
    elif isinstance(source, Document):
        doc = source
    else:
        doc = sorted(source, key=lambda d: d.name)[0]
    sents = doc.sentences
    return _fill(range(len(sents)), sents, budget)


def coverage(source, budget):
    """Round-robin over documents: every first sentence, then every second sentence, ..."""
    docs = source.documents if isinstance(source, DocumentSet) else sorted(source, key=lambda d: d.name)
    queue = []
    depth = max(len(d.sentences) for d in docs)
    for k in range(depth):
        for d in docs:
            if k < len(d.sentences):
                queue.append(d.sentences[k])
    return _fill(range(len(queue)), queue, budget)


def lexrank_scores(bag, threshold=LEXRANK_THRESHOLD, damping=DAMPING, tol=RANK_TOL):
    cos = cosine_matrix(bag.vectors)
    return pagerank((cos >= threshold).astype(float) * (cos > 0), damping, tol)


def lexrank(bag, budget, threshold=LEXRANK_THRESHOLD, damping=DAMPING, tol=RANK_TOL):
    cos = cosine_matrix(bag.vectors)
    order = _ranked(lexrank_scores(bag, threshold, damping, tol))

    def redundant(i, chosen):
        return any(cos[i, j] > REDUNDANCY_COSINE for j in chosen)

    return _fill(order, bag.sentences, budget, redundant)


def textrank_weights(bag):
    """|shared word types| / (ln|S_i| + ln|S_j|); no edge when the denominator is not positive."""
    n = len(bag)
    types = [set(ws) for ws in bag.words]
    logs = [math.log(len(ws)) if ws else -math.inf for ws in bag.words]
    W = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            denom = logs[i] + logs[j]
            if denom > 0:
                W[i, j] = W[j, i] = len(types[i] & types[j]) / denom
    return W


def textrank_scores(bag, damping=DAMPING, tol=RANK_TOL):
    return pagerank(textrank_weights(bag), damping, tol)


def textrank(bag, budget, damping=DAMPING, tol=RANK_TOL, penalty=TEXTRANK_PENALTY):
    """Greedy selection; after each pick, remaining scores drop by penalty * w(i, pick) * score(pick)."""
    W = textrank_weights(bag)
    scores = textrank_scores(bag, damping, tol).copy()
    remaining = list(range(len(bag)))
    order = []
    while remaining:
        best = max(remaining, key=lambda i: (scores[i], -i))
        order.append(best)
        remaining.remove(best)
        for i in remaining:
            scores[i] -= penalty * W[i, best] * scores[best]
    return _fill(order, bag.sentences, budget)


def centroid_scores(bag, threshold=None):
    """cos(s, centroid) + 1/position + cos(s, first sentence of its document)."""
    if len(bag) == 0:
        return np.zeros(0)
    centroid = bag.vectors.mean(axis=0)
    thr = centroid.mean() if threshold is None else threshold
    centroid = np.where(centroid > thr, centroid, 0.0)
    to_centroid = cosine_matrix(bag.vectors, centroid[None, :])[:, 0]
    first = {}
    for i, (name, pos) in enumerate(zip(bag.doc_names, bag.positions)):
        if pos == 1:
            first[name] = i
    to_first = np.array([
        cosine_matrix(bag.vectors[i:i + 1], bag.vectors[first[name]:first[name] + 1])[0, 0] if name in first else 0.0
        for i, name in enumerate(bag.doc_names)
    ])
    return to_centroid + 1.0 / np.asarray(bag.positions, dtype=float) + to_first


def centroid_summarize(bag, budget, tfidf_threshold=None):
    return _fill(_ranked(centroid_scores(bag, tfidf_threshold)), bag.sentences, budget)


def document_scores(docset, damping=DAMPING, tol=RANK_TOL):
    words = [[w for s in d.sentences for w in content_words(s.words)] for d in docset.documents]
    counts, _ = _count_matrix(words)
    cos = cosine_matrix(tfidf(counts))
    np.fill_diagonal(cos, 0.0)
    return pagerank(cos, damping, tol)


def select_representative_document(docset):
    """Highest document PageRank over tf-idf cosine similarity; ties go to the first name."""
    scores = document_scores(docset)
    return docset.documents[_ranked(scores)[0]]


def extract(method, documents, budget):
    """Run extractive ``method`` over a list of documents (or a DocumentSet)."""
    docs = list(documents.documents if isinstance(documents, DocumentSet) else documents)
    if method == "lead":
        return lead(docs, budget)
    if method == "coverage":
        return coverage(docs, budget)
    bag = SentenceBag.from_documents(docs)
    if len(bag) == 0:
        return []
    if method == "lexrank":
        return lexrank(bag, budget)
    if method == "textrank":
        return textrank(bag, budget)
    if method == "centroid":
        return centroid_summarize(bag, budget)
    raise ConfigError(f"unknown extractive method {method!r}")


PIPELINE_KINDS = ("ours", "single_ab", "ex_merge_ab", "ab_merge_ab", "ab_multi_ex", "extractive")


@dataclass(frozen=True)
class PipelineSpec:
    kind: str
    method: str | None = None
    intermediate_budget: int = 100
    final_budget: int = 100

    def __post_init__(self):
        if self.kind not in PIPELINE_KINDS:
            raise ConfigError(f"unknown pipeline kind {self.kind!r}")
        needs_method = self.kind in ("ex_merge_ab", "ab_multi_ex", "extractive")
        if needs_method and self.method not in METHODS:
            raise ConfigError(f"pipeline {self.kind} needs an extractive method, got {self.method!r}")
        if self.kind == "ex_merge_ab" and self.method == "coverage":
            raise ConfigError("coverage is a multi-document method and cannot summarize single documents")

    @property
    def needs_model(self):
        return self.kind != "extractive"


_SHORT = {"lead": "lead", "lex": "lexrank", "text": "textrank", "cent": "centroid", "cov": "coverage"}

PIPELINE_NAMES = (
    "ours", "single-ab", "lead+ab", "lex+ab", "text+ab", "cent+ab",
    "ab+lead", "ab+cov", "ab+lex", "ab+text", "ab+cent", "ab+ab",
    "lead", "coverage", "lexrank", "textrank", "centroid",
)


def pipeline_spec(name, intermediate_budget=100, final_budget=100):
    """Map a command-line pipeline name to its :class:`PipelineSpec`."""
    b = dict(intermediate_budget=intermediate_budget, final_budget=final_budget)
    if name == "ours":
        return PipelineSpec("ours", **b)
    if name == "single-ab":
        return PipelineSpec("single_ab", **b)
    if name == "ab+ab":
        return PipelineSpec("ab_merge_ab", **b)
    if name in METHODS:
        return PipelineSpec("extractive", name, **b)
    head, _, tail = name.partition("+")
    if tail == "ab" and head in _SHORT:
        return PipelineSpec("ex_merge_ab", _SHORT[head], **b)
    if head == "ab" and tail in _SHORT:
        return PipelineSpec("ab_multi_ex", _SHORT[tail], **b)
    raise ConfigError(f"unknown pipeline {name!r}; choose from {', '.join(PIPELINE_NAMES)}")


def _abstractive(model, documents, gen_config):
    documents = [d for d in documents if d.sentences]
    if not documents:
        return []
    return model.summarize(documents, gen_config).sentences


def run_pipeline(spec, docset, model=None, gen_config=None):
    """Summarize ``docset`` with the composition described by ``spec``.

    Digits masked during preprocessing are restored against the set's source
    sentences before returning.
    """
    if spec.needs_model and model is None:
        raise ConfigError(f"pipeline {spec.kind} needs a trained model")
    gen_config = gen_config or GenerationConfig()
    docs = list(docset.documents)
    if spec.kind == "ours":
        sentences = _abstractive(model, docs, gen_config)
    elif spec.kind == "single_ab":
        sentences = _abstractive(model, [select_representative_document(docset)], gen_config)
    elif spec.kind == "ex_merge_ab":
        merged = [s for d in docs for s in extract(spec.method, [d], spec.intermediate_budget)]
        sentences = _abstractive(model, [Document.from_sentences("merged", merged)], gen_config)
    elif spec.kind == "ab_merge_ab":
        merged = [s for d in docs for s in _abstractive(model, [d], gen_config)]
        sentences = _abstractive(model, [Document.from_sentences("merged", merged)], gen_config)
    elif spec.kind == "ab_multi_ex":
        pseudo = [Document.from_sentences(d.name, _abstractive(model, [d], gen_config)) for d in docs]
        pseudo = [d for d in pseudo if d.sentences]
        sentences = extract(spec.method, pseudo, spec.final_budget) if pseudo else []
    else:
        sentences = extract(spec.method, docs, spec.final_budget)
    sentences = truncate_to_budget(list(sentences), spec.final_budget)
    return SummaryResult(restore_digits(sentences, docset.all_sentences()), [])
