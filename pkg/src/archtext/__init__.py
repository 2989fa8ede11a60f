"""archtext: joint learning over neural-architecture graphs and natural language.

The package covers the full desk-scale pipeline: a graph IR for architectures,
a word-level tokenizer, synthetic dataset generators, a small reverse-mode
autodiff engine, the bi-modal encoder model with its task heads, training
loops, an evaluation harness, and a cosine-retrieval index. Everything is
deterministic given a seed.
"""

__version__ = "0.1.0"
