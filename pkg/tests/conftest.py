import numpy as np
import pytest

from archtext.datagen import GenConfig
from archtext.graph import ArchGraph
from archtext.model import Model, ModelConfig
from archtext.text import TextVocab


@pytest.fixture
def small_ops():
    return ("conv2d", "relu", "maxpool2d", "linear", "gelu", "avgpool2d", "batchnorm2d")


@pytest.fixture
def gen_cfg(small_ops):
    return GenConfig(rng_seed=0, ops=small_ops, min_nodes=3, max_nodes=6)


@pytest.fixture
def chain_graph():
    # conv2d -> relu -> linear over the default catalog vocabulary
    return ArchGraph(nodes=[3, 11, 8], edges=[(0, 1), (1, 2)],
                     shapes=[(8, 3, 3, 3), (0, 0, 0, 0), (16, 8, 1, 1)])


@pytest.fixture
def tiny_text_vocab():
    return TextVocab(["alpha", "beta", "gamma", "delta"])


@pytest.fixture
def tiny_model_cfg(tiny_text_vocab):
    return ModelConfig(node_vocab_size=10, text_vocab_size=len(tiny_text_vocab),
                       d=8, gat_layers=1, gat_heads=2, cross_layers=1, cross_heads=2,
                       dec_heads=2, max_nodes=8, max_tokens=8, n_answers=6,
                       shape_buckets=4)


@pytest.fixture
def tiny_model(tiny_model_cfg):
    return Model.initialized(tiny_model_cfg, seed=1)


@pytest.fixture
def rng():
    return np.random.default_rng(0)
