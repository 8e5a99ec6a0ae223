"""Teacher-forced cross-entropy training, SDS pre-training, selective MDS fine-tuning, checkpoints."""
from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .attention import AttentionConfig
from .corpus import Vocabulary
from .decoder import DecoderStates, GenerationConfig, generate_summary, initial_states, sentence_step, token_nll
from .encoder import encode_sentence, lstm_step
from .errors import ConfigError, ContractError, DataError
from .metrics import content_words, rouge_n
from .model import DECODER_PARAMS, PROJECTION_PARAMS, Model, ModelConfig
from .numerics.ops import lookup, mean
from .numerics.optim import AdamState, adam_step
from .numerics.tape import Node, Tape

log = logging.getLogger(__name__)

CHECKPOINT_FORMAT = "mdsum-checkpoint"
CHECKPOINT_VERSION = 1
EARLY_STOP_METRICS = ("rouge1", "loss", "none")


@dataclass(frozen=True)
class TrainConfig:
    mode: str = "pretrain_sds"
    epochs: int = 20
    batch_size: int = 1
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    early_stop: str = "rouge1"
    patience: int = 2
    seed: int = 0
    tune_projection: bool = False

    def __post_init__(self):
        if self.mode not in ("pretrain_sds", "finetune_mds"):
            raise ConfigError(f"unknown training mode {self.mode!r}")
        if self.early_stop not in EARLY_STOP_METRICS:
            raise ConfigError(f"early_stop must be one of {EARLY_STOP_METRICS}")
        if self.patience < 1 or self.epochs < 1 or self.batch_size < 1:
            raise ConfigError("epochs, batch_size and patience must be >= 1")


@dataclass
class TrainReport:
    train_loss: list = field(default_factory=list)
    dev_metric: list = field(default_factory=list)
    metric: str = "rouge1"
    stopped_epoch: int = 0
    best_epoch: int = 0
    trainable: list = field(default_factory=list)

    def to_json(self):
        return json.dumps(asdict(self), indent=2, sort_keys=True)


def _reference_ids(model, reference):
    ids = [model.vocab.encode(s.words) for s in reference]
    if not ids:
        raise ContractError("reference summary is empty")
    return ids


def forward_loss(model, documents, reference_ids):
    """Per-token negative log-likelihood of the reference under teacher forcing (a node)."""
    vocab = model.vocab
    source = model.encode(documents)
    states = initial_states(model, source)
    losses = []
    for target in list(reference_ids) + [None]:
        h, c, f, _, ctx = sentence_step(model, source, states)
        if target is None:
            inputs, outputs = [vocab.eos], [vocab.eod]
        else:
            inputs, outputs = [vocab.eos] + list(target), list(target) + [vocab.eos]
        hw, cw = h, Node(np.zeros_like(h.value))
        for inp, tgt in zip(inputs, outputs):
            hw, cw = lstm_step(model.dec_word, lookup(model.embedding, inp), hw, cw)
            losses.append(token_nll(hw, ctx, model.proj_W, model.proj_b, tgt))
        if target is not None:
            states = DecoderStates(h, c, encode_sentence(target, model)[1], f, states.step + 1)
    return mean(losses)


def teacher_forced_loss(model, documents, reference, backward=True):
    """Loss value for one (documents, reference) pair; accumulates gradients when ``backward``.

    ``reference`` is a list of :class:`~mdsum.corpus.Sentence`.
    """
    ref_ids = _reference_ids(model, reference)
    if not backward:
        return float(forward_loss(model, documents, ref_ids).value)
    with Tape() as tape:
        loss = forward_loss(model, documents, ref_ids)
        tape.backward(loss)
    return float(loss.value)


def training_pairs(docsets, sds):
    pairs = []
    for ds in docsets:
        if sds and len(ds.documents) != 1:
            raise DataError(f"single-document training needs one document per set; {ds.id!r} has {len(ds.documents)}")
        for ref in ds.references:
            if ref:
                pairs.append((ds.id, list(ds.documents), ref))
    return pairs


def dev_score(model, docsets, metric, gen_config=None):
    """Mean dev metric: ROUGE-1 F1 of greedy summaries (higher is better) or loss (lower is better)."""
    values = []
    for ds in docsets:
        refs = [r for r in ds.references if r]
        if not refs:
            continue
        if metric == "loss":
            values.append(np.mean([teacher_forced_loss(model, ds.documents, r, backward=False) for r in refs]))
        else:
            result = generate_summary(model, model.encode(ds.documents), gen_config or GenerationConfig())
            cand = content_words([w for s in result.sentences for w in s.words])
            ref_words = [content_words([w for s in r for w in s.words]) for r in refs]
            values.append(rouge_n(cand, ref_words, 1).f1)
    return float(np.mean(values)) if values else float("nan")


def _improved(metric, value, best):
    if best is None:
        return True
    return value > best if metric == "rouge1" else value < best


def train_loop(model, train_sets, dev_sets, config, sds, gen_config=None, callback=None):
    """Adam over shuffled (documents, reference) pairs with optional dev-based early stopping.

    ``callback(epoch, report)`` runs after every epoch; a truthy return ends training.
    """
    pairs = training_pairs(train_sets, sds)
    if not pairs:
        raise ConfigError("training split is empty")
    metric = config.early_stop if dev_sets else "none"
    report = TrainReport(metric=metric, trainable=model.trainable_names())
    state = AdamState(lr=config.lr, beta1=config.beta1, beta2=config.beta2, eps=config.eps)
    rng = np.random.default_rng(config.seed)
    params = model.parameters()
    best, best_snapshot, bad = None, None, 0
    model.zero_grad()
    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(len(pairs))
        total = 0.0
        for k, idx in enumerate(order, start=1):
            _, docs, ref = pairs[idx]
            total += teacher_forced_loss(model, docs, ref)
            if k % config.batch_size == 0 or k == len(order):
                n_batch = (k - 1) % config.batch_size + 1
                if n_batch > 1:
                    for p in params:
                        p.grad /= n_batch
                adam_step(params, state)
        report.train_loss.append(total / len(pairs))
        report.stopped_epoch = epoch
        if callback is not None and callback(epoch, report):
            break
        if metric == "none":
            report.best_epoch = epoch
            continue
        value = dev_score(model, dev_sets, metric, gen_config)
        report.dev_metric.append(value)
        log.info("epoch %d loss %.4f dev %s %.4f", epoch, report.train_loss[-1], metric, value)
        if _improved(metric, value, best):
            best, best_snapshot, bad = value, model.snapshot(), 0
            report.best_epoch = epoch
        else:
            bad += 1
            if bad >= config.patience:
                break
    if best_snapshot is not None:
        model.restore(best_snapshot)
    return report


def pretrain_sds(model, corpus, config, gen_config=None, callback=None):
    """Train every parameter on single-document (document, summary) pairs."""
    model.set_trainable(None)
    return train_loop(model, corpus["train"], corpus["dev"] if config.early_stop != "none" else [],
                      config, sds=True, gen_config=gen_config, callback=callback)


def finetune_parameter_names(model, tune_projection=False):
    names = list(DECODER_PARAMS)
    if model.config.docset_mode != "uniform":
        names.append("docset.q")
    if tune_projection:
        names.extend(PROJECTION_PARAMS)
    return names


def finetune_mds(model, corpus, config, gen_config=None, callback=None):
    """Tune only the decoder recurrences and the document-set weight vector."""
    check_vocabulary(model)
    model.set_trainable(finetune_parameter_names(model, config.tune_projection))
    return train_loop(model, corpus["train"], corpus["dev"] if config.early_stop != "none" else [],
                      config, sds=False, gen_config=gen_config, callback=callback)


def check_vocabulary(model):
    V = len(model.vocab)
    if model.embedding.value.shape[0] != V or model.proj_W.value.shape[0] != V:
        raise ConfigError(f"checkpoint parameters do not match a vocabulary of {V} tokens")


def save_checkpoint(model, path, extra=None):
    cfg = model.config
    payload = {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "model": {
            "embed_dim": cfg.embed_dim,
            "hidden_dim": cfg.hidden_dim,
            "docset_mode": cfg.docset_mode,
            "attention": asdict(cfg.attention),
        },
        "vocabulary": model.vocab.id_to_token,
        "extra": extra or {},
        "parameters": [
            {"name": p.name, "shape": list(p.value.shape), "trainable": p.trainable,
             "values": p.value.reshape(-1).tolist()}
            for p in model.parameters()
        ],
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload), encoding="utf-8")


def load_checkpoint(path):
    path = Path(path)
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read checkpoint {path}: {exc}") from exc
    if payload.get("format") != CHECKPOINT_FORMAT:
        raise ConfigError(f"{path} is not a checkpoint")
    if payload.get("version") != CHECKPOINT_VERSION:
        raise ConfigError(f"{path}: unsupported checkpoint version {payload.get('version')}")
    m = payload["model"]
    config = ModelConfig(m["embed_dim"], m["hidden_dim"], AttentionConfig(**m["attention"]), m["docset_mode"])
    model = Model(Vocabulary(payload["vocabulary"][4:]), config)
    if model.vocab.id_to_token != payload["vocabulary"]:
        raise ConfigError(f"{path}: vocabulary does not start with the special tokens")
    params = model.named_parameters()
    seen = set()
    for rec in payload["parameters"]:
        p = params.get(rec["name"])
        if p is None:
            raise ConfigError(f"{path}: unknown parameter {rec['name']!r}")
        shape = tuple(rec["shape"])
        if shape != p.value.shape:
            raise ConfigError(f"{path}: parameter {rec['name']} has shape {shape}, expected {p.value.shape}")
        p.value[...] = np.asarray(rec["values"], dtype=np.float64).reshape(shape)
        p.trainable = bool(rec.get("trainable", True))
        seen.add(rec["name"])
    missing = set(params) - seen
    if missing:
        raise ConfigError(f"{path}: missing parameters {sorted(missing)}")
    return model


def model_gradcheck(seed=0, dim=4, attention_mode="concentrated", K=2, docset_mode="learned", h=1e-5, tol=1e-4):
    """Finite-difference check of the full teacher-forced loss on a small random model.

    Uses E = H = ``dim``, up to 3 documents and at most 4 source sentences in
    total, with parameters drawn from U(-0.5, 0.5) so gradients are not tiny.
    """
    from .corpus import Document, Sentence
    from .numerics.gradcheck import finite_diff_gradcheck

    rng = np.random.default_rng(seed)
    words = [f"w{i}" for i in range(8)]
    vocab = Vocabulary(words)
    config = ModelConfig(dim, dim, AttentionConfig(attention_mode, K, 0.9), docset_mode)
    model = Model(vocab, config, seed=seed)
    for p in model.parameters():
        p.value[...] = rng.uniform(-0.5, 0.5, size=p.value.shape)
    n_docs = int(rng.integers(1, 4))
    n_sent = int(rng.integers(n_docs, 5))
    per_doc = np.full(n_docs, 1)
    for _ in range(n_sent - n_docs):
        per_doc[rng.integers(n_docs)] += 1

    def sentence():
        return Sentence.from_words(rng.choice(words, size=int(rng.integers(1, 4))).tolist())

    docs = [Document.from_sentences(f"d{m}", [sentence() for _ in range(k)]) for m, k in enumerate(per_doc)]
    reference = [sentence() for _ in range(int(rng.integers(1, 3)))]
    model.set_trainable(None)
    teacher_forced_loss(model, docs, reference)
    return finite_diff_gradcheck(lambda: teacher_forced_loss(model, docs, reference, backward=False),
                                 model.parameters(), h=h, tol=tol)
