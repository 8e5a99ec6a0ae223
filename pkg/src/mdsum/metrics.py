"""ROUGE-1/2/SU4 F1 and word edit-distance metrics (ED, ED/w)."""
from __future__ import annotations

import json
from collections import Counter
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import UndefinedMetricError
from .numerics import kernels

SKIP_GAP = 4


@dataclass(frozen=True)
class RougeScore:
    precision: float
    recall: float
    f1: float

    @classmethod
    def from_counts(cls, overlap, n_candidate, n_reference):
        p = overlap / n_candidate if n_candidate else 0.0
        r = overlap / n_reference if n_reference else 0.0
        f = 2 * p * r / (p + r) if p + r > 0 else 0.0
        return cls(p, r, f)


ZERO = RougeScore(0.0, 0.0, 0.0)


def ngrams(tokens, n):
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def su4_units(tokens):
    """Unigrams plus skip-bigrams (i, j) with at most four tokens between them."""
    units = Counter((t,) for t in tokens)
    for i in range(len(tokens)):
        for j in range(i + 1, min(i + SKIP_GAP + 2, len(tokens))):
            units[(tokens[i], tokens[j])] += 1
    return units


def _overlap(cand, ref):
    return sum(min(c, ref[u]) for u, c in cand.items() if u in ref)


def _as_reference_list(references):
    references = list(references)
    if references and isinstance(references[0], str):
        return [references]
    return references


def _aggregate(scores, how):
    if not scores:
        return ZERO
    if how == "max":
        return max(scores, key=lambda s: s.f1)
    if how != "mean":
        raise ValueError(f"unknown aggregation {how!r}")
    k = len(scores)
    return RougeScore(sum(s.precision for s in scores) / k,
                      sum(s.recall for s in scores) / k,
                      sum(s.f1 for s in scores) / k)


def _score(cand_units, references, unit_fn, how):
    n_cand = sum(cand_units.values())
    scores = []
    for ref in references:
        ref_units = unit_fn(list(ref))
        if not n_cand or not ref_units:
            scores.append(ZERO)
            continue
        scores.append(RougeScore.from_counts(_overlap(cand_units, ref_units), n_cand, sum(ref_units.values())))
    return _aggregate(scores, how)


def rouge_n(candidate, references, n, how="mean"):
    """Clipped n-gram overlap. ``references`` is one token list or a list of them."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return _score(ngrams(list(candidate), n), _as_reference_list(references), lambda t: ngrams(t, n), how)


def rouge_su4(candidate, references, how="mean"):
    return _score(su4_units(list(candidate)), _as_reference_list(references), su4_units, how)


def _to_ids(seqs):
    table = {}
    return [np.array([table.setdefault(t, len(table)) for t in s], dtype=np.int64) for s in seqs]


def word_edit_distance(a, b):
    """Levenshtein distance over tokens with unit costs."""
    x, y = _to_ids([a, b])
    return int(kernels.levenshtein(x, y))


def nearest_sentence(words, candidates):
    """(index, distance) of the candidate closest to ``words``; lowest index wins ties."""
    if not candidates:
        raise ValueError("no candidate sentences")
    ids = _to_ids([words, *candidates])
    lens = np.array([len(c) for c in ids[1:]], dtype=np.int64)
    offsets = np.zeros(len(lens) + 1, dtype=np.int64)
    np.cumsum(lens, out=offsets[1:])
    flat = np.concatenate(ids[1:]) if lens.sum() else np.zeros(0, dtype=np.int64)
    dists = kernels.levenshtein_many(ids[0], flat, offsets)
    best = int(np.argmin(dists))
    return best, int(dists[best])


def edit_distance_report(summary, sources):
    """(ED, ED/w) of generated sentences against their nearest source sentences.

    Both arguments are lists of token lists. Empty generated sentences are ignored.
    """
    sentences = [list(s) for s in summary if len(s)]
    if not sentences:
        raise UndefinedMetricError("edit distance is undefined for an empty summary")
    sources = [list(s) for s in sources]
    eds, per_word = [], []
    for s in sentences:
        _, d = nearest_sentence(s, sources) if sources else (0, len(s))
        eds.append(d)
        per_word.append(d / len(s))
    return float(np.mean(eds)), float(np.mean(per_word))


def content_words(words):
    """Drop pure-punctuation tokens before scoring."""
    return [w for w in words if any(ch.isalnum() or ch == "#" for ch in w)]


@dataclass
class SetScores:
    rouge1: float
    rouge2: float
    rouge_su4: float
    ed: float | None
    ed_per_word: float | None


@dataclass
class EvalReport:
    per_set: dict = field(default_factory=dict)

    def _mean(self, key):
        vals = [getattr(s, key) for s in self.per_set.values() if getattr(s, key) is not None]
        return float(np.mean(vals)) if vals else float("nan")

    @property
    def rouge1(self):
        return self._mean("rouge1")

    @property
    def rouge2(self):
        return self._mean("rouge2")

    @property
    def rouge_su4(self):
        return self._mean("rouge_su4")

    @property
    def ed(self):
        return self._mean("ed")

    @property
    def ed_per_word(self):
        return self._mean("ed_per_word")

    def row(self):
        return [self.rouge1, self.rouge2, self.rouge_su4, self.ed, self.ed_per_word]

    def to_json(self):
        return json.dumps({k: asdict(v) for k, v in self.per_set.items()}, indent=2, sort_keys=True)


def score_set(summary, references, sources, how="mean"):
    """Score one summary (list of token lists) against references (each a list of token lists)."""
    cand = content_words([w for s in summary for w in s])
    refs = [content_words([w for s in ref for w in s]) for ref in references]
    try:
        ed, edw = edit_distance_report(summary, sources)
    except UndefinedMetricError:
        ed = edw = None
    return SetScores(rouge_n(cand, refs, 1, how).f1, rouge_n(cand, refs, 2, how).f1,
                     rouge_su4(cand, refs, how).f1, ed, edw)


COLUMNS = ("Method", "R-1", "R-2", "R-SU4", "ED", "ED/w")


def format_table(reports):
    """Render {method: EvalReport} with ROUGE in percent, as in the result tables."""
    width = max([len(COLUMNS[0])] + [len(m) for m in reports]) + 2
    lines = [COLUMNS[0].ljust(width) + "".join(c.rjust(9) for c in COLUMNS[1:])]
    for method, rep in reports.items():
        r1, r2, su4, ed, edw = rep.row()
        cells = [f"{100 * r1:.2f}", f"{100 * r2:.2f}", f"{100 * su4:.2f}", f"{ed:.2f}", f"{edw:.2f}"]
        lines.append(method.ljust(width) + "".join(c.rjust(9) for c in cells))
    return "\n".join(lines) + "\n"


def parse_table(text):
    """Inverse of :func:`format_table`: {method: [r1, r2, su4, ed, edw]} in table units."""
    rows = {}
    for line in text.strip().splitlines()[1:]:
        parts = line.split()
        rows[" ".join(parts[:-5])] = [float(x) for x in parts[-5:]]
    return rows
