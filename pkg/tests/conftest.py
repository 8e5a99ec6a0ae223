import numpy as np
import pytest

from mdsum.attention import AttentionConfig
from mdsum.corpus import Document, Sentence, Vocabulary
from mdsum.model import Model, ModelConfig
from mdsum.toy import make_corpus, write_corpus

WORDS = ["alpha", "beta", "gamma", "delta", "eps", "zeta"]


def tiny_model(dim=4, words=WORDS, seed=0, scale=None, attention=None, docset_mode="learned"):
    config = ModelConfig(dim, dim, attention or AttentionConfig("concentrated", 3, 0.9), docset_mode)
    model = Model(Vocabulary(words), config, seed=seed)
    if scale is not None:
        rng = np.random.default_rng(seed + 1000)
        for p in model.parameters():
            p.value[...] = rng.uniform(-scale, scale, size=p.value.shape)
    return model


def doc(name, *sentences):
    return Document.from_sentences(name, [Sentence.from_words(s.split()) for s in sentences])


@pytest.fixture
def model():
    return tiny_model(scale=0.5)


@pytest.fixture(scope="session")
def toy_dirs(tmp_path_factory):
    root = tmp_path_factory.mktemp("toy")
    sds = write_corpus(make_corpus("sds", (5, 1, 2), seed=0), root / "sds")
    mds = write_corpus(make_corpus("mds", (3, 1, 3), seed=1), root / "mds")
    return sds, mds
