"""The hierarchical encoder-decoder with document-set encoder and graph attention."""
from __future__ import annotations

import copy
from dataclasses import dataclass, field, replace

import numpy as np

from .attention import AttentionConfig
from .encoder import DOCSET_MODES, INIT_SCALE, LSTMCell, encode_docset, encode_document
from .errors import ContractError
from .numerics.ops import stack
from .numerics.tape import Parameter

# parameters tuned when adapting to multi-document data
DECODER_PARAMS = ("dec_sent.W", "dec_sent.b", "dec_word.W", "dec_word.b")
PROJECTION_PARAMS = ("proj.W", "proj.b")


@dataclass(frozen=True)
class ModelConfig:
    embed_dim: int = 64
    hidden_dim: int = 64
    attention: AttentionConfig = field(default_factory=AttentionConfig)
    docset_mode: str = "learned"

    def __post_init__(self):
        if self.embed_dim < 1 or self.hidden_dim < 1:
            raise ContractError("model dimensions must be positive")
        if self.docset_mode not in DOCSET_MODES:
            raise ContractError(f"docset mode must be one of {DOCSET_MODES}")


@dataclass
class EncodedSource:
    documents: list
    docset: object
    states: object  # (n, H) node of every source sentence state
    sentence_ids: list

    @property
    def n_sentences(self):
        return self.states.value.shape[0]


class Model:
    def __init__(self, vocab, config=None, seed=0):
        self.vocab = vocab
        self.config = config or ModelConfig()
        rng = np.random.default_rng(seed)
        V, E, H = len(vocab), self.config.embed_dim, self.config.hidden_dim

        def uniform(*shape):
            return rng.uniform(-INIT_SCALE, INIT_SCALE, size=shape)

        self.embedding = Parameter("embedding", uniform(V, E))
        self.enc_word = LSTMCell.create("enc_word", E, H, rng)
        self.enc_sent = LSTMCell.create("enc_sent", H, H, rng)
        self.q = Parameter("docset.q", uniform(2 * H))
        self.P = Parameter("attention.P", uniform(H, H))
        self.dec_sent = LSTMCell.create("dec_sent", H, H, rng)
        self.dec_word = LSTMCell.create("dec_word", E, H, rng)
        self.proj_W = Parameter("proj.W", uniform(V, 2 * H))
        self.proj_b = Parameter("proj.b", uniform(V))

    def parameters(self):
        return [self.embedding, *self.enc_word.parameters(), *self.enc_sent.parameters(),
                self.q, self.P, *self.dec_sent.parameters(), *self.dec_word.parameters(),
                self.proj_W, self.proj_b]

    def named_parameters(self):
        return {p.name: p for p in self.parameters()}

    def set_trainable(self, names=None):
        """Make exactly ``names`` trainable (all parameters when ``names`` is None)."""
        params = self.named_parameters()
        if names is not None:
            unknown = set(names) - set(params)
            if unknown:
                raise ContractError(f"unknown parameters {sorted(unknown)}")
        for name, p in params.items():
            p.trainable = names is None or name in names
            p.zero_grad()

    def trainable_names(self):
        return [p.name for p in self.parameters() if p.trainable]

    def zero_grad(self):
        for p in self.parameters():
            p.zero_grad()

    def clone(self, **config_changes):
        """Deep copy (parameters included), optionally with a modified config."""
        other = copy.deepcopy(self)
        if config_changes:
            other.config = replace(self.config, **config_changes)
        return other

    def snapshot(self):
        return {p.name: p.value.copy() for p in self.parameters()}

    def restore(self, snapshot):
        for p in self.parameters():
            p.value[...] = snapshot[p.name]

    def encode_ids(self, sentences):
        return [self.vocab.encode(s.words) for s in sentences]

    def encode(self, documents):
        """Encode a list of documents (each with ``.sentences``) into an :class:`EncodedSource`."""
        documents = list(documents)
        if not documents:
            raise ContractError("nothing to encode")
        ids = [self.encode_ids(d.sentences) for d in documents]
        encoded = [encode_document(doc_ids, self) for doc_ids in ids]
        docset = encode_docset([e.doc_vector for e in encoded], self.q, self.config.docset_mode)
        states = stack([h for e in encoded for h in e.sentence_states])
        return EncodedSource(encoded, docset, states, [s for doc_ids in ids for s in doc_ids])

    def summarize(self, documents, gen_config=None):
        from .decoder import GenerationConfig, generate_summary

        return generate_summary(self, self.encode(documents), gen_config or GenerationConfig())
