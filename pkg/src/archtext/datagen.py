"""Synthetic dataset generators: architectures, descriptions, QA, clone pairs.

Three dataset styles are produced:

* autonet   - random graphs plus template descriptions (positives mention
              only ops present in the graph, negatives mention at least one
              absent op);
* autonet-aqa - the same graphs with 35 questions each, answered from a
              frozen 51-entry answer catalog;
* tvhf      - family-structured graphs whose negatives are mined from other
              architectures' positive descriptions by thresholded text
              similarity.

Generation is deterministic: every sample draws from an RNG stream spawned
from (master seed, stream tag, sample index), so outputs are reproducible
bit-for-bit and order-stable.
"""

from __future__ import annotations

import json
import statistics
from dataclasses import dataclass

import numpy as np

from .catalog import (
    ACT_OPS,
    CATALOG,
    CONV_OPS,
    CONV_SHAPED,
    DEFAULT_OPS,
    KERNEL_CHOICES,
    KERNEL_POOLS,
    LINEAR_SHAPED,
    NORM_OPS,
    NORM_SHAPED,
    POOL_OPS,
    load_answer_catalog,
    phrase_of,
)
from .graph import ArchGraph, NodeVocab
from .text import normalize

CHANNEL_CHOICES = (8, 16, 32, 64, 128)


@dataclass(frozen=True)
class GenConfig:
    """Knobs for all generators; defaults are the desk-scale dataset."""

    rng_seed: int = 0
    ops: tuple[str, ...] = DEFAULT_OPS
    min_nodes: int = 8
    max_nodes: int = 64
    n_train_archs: int = 200
    n_val_archs: int = 50
    desc_pos_fraction: float = 0.3
    beta: float = 0.5
    acd_pos_fraction: float = 0.11
    tvhf_neg_fraction: float = 0.93
    tvhf_families: int = 24
    tvhf_variants: int = 3

    def __post_init__(self):
        if self.min_nodes < 1 or self.min_nodes > self.max_nodes:
            raise ValueError("need 1 <= min_nodes <= max_nodes")
        if not 0.0 < self.beta < 1.0:
            raise ValueError("beta must lie in (0, 1)")
        if not 0.0 < self.desc_pos_fraction < 1.0:
            raise ValueError("desc_pos_fraction must lie in (0, 1)")
        unknown = [op for op in self.ops if op not in CATALOG]
        if unknown:
            raise ValueError(f"ops not in catalog: {unknown}")

    def node_vocab(self) -> NodeVocab:
        return NodeVocab(list(self.ops))


@dataclass(frozen=True)
class BiModalSample:
    graph: ArchGraph
    text: str
    y: float

    def __post_init__(self):
        if not 0.0 <= self.y <= 1.0:
            raise ValueError("y must lie in [0, 1]")


@dataclass(frozen=True)
class AQASample:
    graph: ArchGraph
    question: str
    answers: frozenset[int]

    def __post_init__(self):
        object.__setattr__(self, "answers", frozenset(int(a) for a in self.answers))
        if not self.answers:
            raise ValueError("answer set must be non-empty")
        if any(a < 0 or a >= 51 for a in self.answers):
            raise ValueError("answer ids must lie in [0, 51)")


@dataclass(frozen=True)
class ACDPair:
    g1: ArchGraph
    g2: ArchGraph
    label: int


@dataclass(frozen=True)
class BACDSample:
    g1: ArchGraph
    g2: ArchGraph
    label: int
    text: str


@dataclass(frozen=True)
class ACSample:
    graph: ArchGraph
    text: str


def extract_present_ops(g: ArchGraph, vocab: NodeVocab) -> set[str]:
    """Distinct op names appearing in the graph's node list."""
    return {vocab.name_of(n) for n in g.nodes}


def token_overlap_similarity(a: str, b: str) -> float:
    """Jaccard overlap of lowercased word sets; 0.0 when both are empty."""
    wa, wb = set(normalize(a)), set(normalize(b))
    if not wa and not wb:
        return 0.0
    union = wa | wb
    if not union:
        return 0.0
    return len(wa & wb) / len(union)


# ---------------------------------------------------------------------------
# architecture generation


def _shape_for(op: str, rng: np.random.Generator):
    def ch() -> int:
        return int(CHANNEL_CHOICES[rng.integers(len(CHANNEL_CHOICES))])

    def kern() -> int:
        return int(KERNEL_CHOICES[rng.integers(len(KERNEL_CHOICES))])

    if op in CONV_SHAPED:
        k = kern()
        return (ch(), ch(), k, k)
    if op in LINEAR_SHAPED:
        return (ch(), ch(), 1, 1)
    if op in NORM_SHAPED:
        return (ch(), 0, 0, 0)
    if op in KERNEL_POOLS:
        k = kern()
        return (0, 0, k, k)
    return (0, 0, 0, 0)


def _graph_style(cfg: GenConfig, rng: np.random.Generator) -> list[str]:
    """The op subset one architecture draws from. Real nets repeat a handful
    of op types, and keeping the subset strictly below the full vocabulary
    guarantees an absent op for negative descriptions."""
    n = len(cfg.ops)
    if n == 1:
        return list(cfg.ops)
    upper = min(12, n - 1)
    lower = min(3, upper)
    size = int(rng.integers(lower, upper + 1))
    if "conv2d" in cfg.ops:
        pool = [op for op in cfg.ops if op != "conv2d"]
        picked = rng.choice(len(pool), size=size - 1, replace=False) if size > 1 else []
        return ["conv2d"] + [pool[int(i)] for i in sorted(picked)]
    picked = rng.choice(n, size=size, replace=False)
    return [cfg.ops[int(i)] for i in sorted(picked)]


def gen_architecture(cfg: GenConfig, rng: np.random.Generator, name: str | None = None) -> ArchGraph:
    """One random valid DAG: a spanning chain in index order plus skip edges.

    Node 0 is a convolution stem when the vocabulary has one; every other
    node receives at least one in-edge, so the graph is connected.
    """
    m = int(rng.integers(cfg.min_nodes, cfg.max_nodes + 1))
    vocab = cfg.node_vocab()
    style = _graph_style(cfg, rng)
    ops = []
    for i in range(m):
        if i == 0 and "conv2d" in cfg.ops:
            ops.append("conv2d")
        else:
            ops.append(style[int(rng.integers(len(style)))])
    edges = set()
    for i in range(1, m):
        edges.add((int(rng.integers(0, i)), i))
    if m >= 3:
        for _ in range(m // 3):
            u = int(rng.integers(0, m - 1))
            v = int(rng.integers(u + 1, m))
            edges.add((u, v))
    shapes = [_shape_for(op, rng) for op in ops]
    return ArchGraph(
        nodes=[vocab.id_of(op) for op in ops],
        edges=edges,
        shapes=shapes,
        name=name,
    )


# ---------------------------------------------------------------------------
# description generation

_STAT_TEMPLATES = (
    "this classification neural network includes {a} and has about {params} million parameters.",
    "in total this neural network architecture has {m} layers, and it includes {cnt} {a} layers.",
)

_PLAIN_TEMPLATES_1 = (
    "this architecture contains {a}.",
    "a compact network that applies {a} through most of its depth.",
    "this model makes heavy use of {a}.",
)

_PLAIN_TEMPLATES_2 = (
    "this architecture contains {a}, and {b}.",
    "this neural network has {a}. it also includes {b}.",
    "this network combines {a} with {b} for feature extraction.",
)

_PLAIN_TEMPLATES_3 = (
    "this model is built around {a} followed by {b} and {c}.",
    "this network stacks {a}, {b}, and {c} throughout its body.",
)


def _param_millions(g: ArchGraph) -> float:
    total = 0
    for o, i, kh, kw in g.shapes:
        total += o * max(i, 1) * max(kh, 1) * max(kw, 1)
    return total / 1e6


def _render_description(g: ArchGraph, vocab: NodeVocab, mention: list[str],
                        rng: np.random.Generator, fake_count: bool) -> str:
    phrases = [phrase_of(op) for op in mention]
    k = len(phrases)
    if k == 1 and rng.random() < 0.4:
        t = _STAT_TEMPLATES[int(rng.integers(len(_STAT_TEMPLATES)))]
        if "{params}" in t:
            return t.format(a=phrases[0], params=f"{_param_millions(g):.2f}")
        if fake_count:
            cnt = int(rng.integers(1, 6))
        else:
            names = [vocab.name_of(n) for n in g.nodes]
            cnt = names.count(mention[0])
        return t.format(a=phrases[0], m=g.num_nodes, cnt=cnt)
    if k == 1:
        t = _PLAIN_TEMPLATES_1[int(rng.integers(len(_PLAIN_TEMPLATES_1)))]
        return t.format(a=phrases[0])
    if k == 2:
        t = _PLAIN_TEMPLATES_2[int(rng.integers(len(_PLAIN_TEMPLATES_2)))]
        return t.format(a=phrases[0], b=phrases[1])
    t = _PLAIN_TEMPLATES_3[int(rng.integers(len(_PLAIN_TEMPLATES_3)))]
    return t.format(a=phrases[0], b=phrases[1], c=phrases[2])


def _pick(rng: np.random.Generator, items: list[str], k: int) -> list[str]:
    k = min(k, len(items))
    idx = rng.choice(len(items), size=k, replace=False)
    return [items[int(i)] for i in sorted(idx)]


def gen_descriptions(g: ArchGraph, cfg: GenConfig, rng: np.random.Generator) -> list[BiModalSample]:
    """10-11 descriptions per graph, roughly 30% positive.

    Positives mention only ops present in the graph; every negative
    mentions at least one absent op. Raises if no op is absent.
    """
    vocab = cfg.node_vocab()
    present = sorted(extract_present_ops(g, vocab))
    absent = [op for op in cfg.ops if op not in present]
    if not absent:
        raise ValueError("no absent op available for negative descriptions")
    n = 10 + int(rng.integers(0, 2))
    npos = round(cfg.desc_pos_fraction * n)
    samples = []
    for j in range(npos):
        mention = _pick(rng, present, 1 + int(rng.integers(0, 3)))
        text = _render_description(g, vocab, mention, rng, fake_count=False)
        if j == 0 and g.name:
            text = f"the {g.name} model: " + text
        samples.append(BiModalSample(graph=g, text=text, y=1.0))
    for _ in range(n - npos):
        mention = _pick(rng, absent, 1)
        mention += _pick(rng, present, int(rng.integers(0, 3)))
        order = rng.permutation(len(mention))
        mention = [mention[int(i)] for i in order]
        text = _render_description(g, vocab, mention, rng, fake_count=True)
        samples.append(BiModalSample(graph=g, text=text, y=0.0))
    order = rng.permutation(len(samples))
    return [samples[int(i)] for i in order]


# ---------------------------------------------------------------------------
# question answering

_DESC_TEXT = {
    "maxpool2d": "calculating the maximum value for each patch of the feature map",
    "avgpool2d": "calculating the average for each patch of the feature map",
    "dil_conv2d": "creating a wider kernel by inserting spaces between the kernel elements",
    "sep_conv2d": "dividing a single convolution into two convolutions to reduce parameters",
    "linear": "applying a linear transformation to the incoming data",
    "dropout": "randomly zeroing activations to reduce overfitting during training",
    "batchnorm2d": "normalizing activations over the batch dimension",
}

_FAMILY_MEMBERS = {
    "pooling": POOL_OPS,
    "normalization": NORM_OPS,
    "activation": ACT_OPS,
}

_QUESTIONS: tuple[tuple[str, str, str | None], ...] = (
    ("what does the 2d max pooling layer perform in this neural network?", "func", "maxpool2d"),
    ("what does the 2d average pooling layer perform in this neural network?", "func", "avgpool2d"),
    ("what does the dilated convolution module do in this network?", "func", "dil_conv2d"),
    ("what does the separable convolution module do in this network?", "func", "sep_conv2d"),
    ("what transformation does the fully connected layer apply in this model?", "func", "linear"),
    ("what is the purpose of the dropout layer in this architecture?", "func", "dropout"),
    ("what does the batch normalization layer normalize in this network?", "func", "batchnorm2d"),
    ("what kernel sizes are used by the standard 2d convolution layers in this network?", "kernel", "conv2d"),
    ("what kernel sizes are used by the dilated convolution layers in this network?", "kernel", "dil_conv2d"),
    ("what kernel sizes are used by the separable convolution layers in this network?", "kernel", "sep_conv2d"),
    ("what 2d max pooling kernel size has been used in this network?", "kernel", "maxpool2d"),
    ("what 2d average pooling kernel size has been used in this network?", "kernel", "avgpool2d"),
    ("what type of pooling module has been used in this neural architecture?", "family", "pooling"),
    ("what type of normalization layer is used in this neural network architecture?", "family", "normalization"),
    ("what type of activation layer has been used in this neural network model?", "family", "activation"),
    ("what kind of downsampling is applied in this architecture?", "family", "pooling"),
    ("which normalization technique does this model apply?", "family", "normalization"),
    ("which nonlinearity is applied between the layers of this model?", "family", "activation"),
    ("overall what kind of layers are included in this neural network architecture?", "overall", None),
    ("which operation type appears first in this architecture?", "first", None),
    ("which operation type appears last in this architecture?", "last", None),
    ("which operation type occurs most frequently in this network?", "most_frequent", None),
    ("in general what kernel sizes are used in this neural network model?", "kernels_all", None),
    ("what is the largest kernel size used in this model?", "kernel_max", None),
    ("what is the smallest kernel size used in this model?", "kernel_min", None),
    ("does this architecture include a standard 2d convolution layer?", "presence", "conv2d"),
    ("does this model make use of 2d max pooling?", "presence", "maxpool2d"),
    ("does this model make use of 2d average pooling?", "presence", "avgpool2d"),
    ("does this network contain dilated convolution modules?", "presence", "dil_conv2d"),
    ("does this network contain separable convolution modules?", "presence", "sep_conv2d"),
    ("does this model include a fully connected layer?", "presence", "linear"),
    ("does this architecture use dropout regularization?", "presence", "dropout"),
    ("does this network apply batch normalization?", "presence", "batchnorm2d"),
    ("what types of convolution modules are used in this neural network?", "conv_types", None),
    ("which layers with learnable parameters are included in this model?", "parametric", None),
)


class AnswerCatalog:
    """Id lookups over the frozen 51-entry answer file."""

    def __init__(self):
        self.answers = load_answer_catalog()
        self._idx = {a: i for i, a in enumerate(self.answers)}
        self.name_id = {op: self._idx[op] for op in DEFAULT_OPS}
        self.kernel_id = {f"{k}*{k}": self._idx[f"{k}*{k}"] for k in KERNEL_CHOICES}
        self.desc_id = {op: self._idx[t] for op, t in _DESC_TEXT.items()}
        self.dni_id = {}
        for op in ("maxpool2d", "avgpool2d", "dil_conv2d", "sep_conv2d",
                   "linear", "dropout", "batchnorm2d", "conv2d"):
            self.dni_id[op] = self._idx[f"this model does not include {op}"]
        for fam in ("pooling", "normalization", "activation"):
            self.dni_id[fam] = self._idx[f"this model does not include any {fam} layers"]

    def text_of(self, answer_id: int) -> str:
        return self.answers[answer_id]


_CATALOG_CACHE: AnswerCatalog | None = None


def answer_catalog() -> AnswerCatalog:
    global _CATALOG_CACHE
    if _CATALOG_CACHE is None:
        _CATALOG_CACHE = AnswerCatalog()
    return _CATALOG_CACHE


def _node_kernels(g: ArchGraph, vocab: NodeVocab, op: str | None = None) -> list[int]:
    ks = []
    for n, s in zip(g.nodes, g.shapes):
        if op is not None and vocab.name_of(n) != op:
            continue
        if s[2] > 0:
            ks.append(s[2])
    return sorted(set(ks))


def _answer_ids(g: ArchGraph, vocab: NodeVocab, rule: str, arg: str | None,
                cat: AnswerCatalog) -> frozenset[int]:
    present = extract_present_ops(g, vocab)
    if rule == "func":
        return frozenset({cat.desc_id[arg] if arg in present else cat.dni_id[arg]})
    if rule == "kernel":
        ks = _node_kernels(g, vocab, arg)
        if arg in present and ks:
            return frozenset(cat.kernel_id[f"{k}*{k}"] for k in ks)
        return frozenset({cat.dni_id[arg]})
    if rule == "family":
        members = sorted(_FAMILY_MEMBERS[arg] & present)
        if members:
            return frozenset(cat.name_id[op] for op in members)
        return frozenset({cat.dni_id[arg]})
    if rule == "overall":
        return frozenset(cat.name_id[op] for op in present)
    if rule == "first":
        return frozenset({cat.name_id[vocab.name_of(g.nodes[0])]})
    if rule == "last":
        return frozenset({cat.name_id[vocab.name_of(g.nodes[-1])]})
    if rule == "most_frequent":
        names = [vocab.name_of(n) for n in g.nodes]
        top = max(names.count(op) for op in set(names))
        return frozenset(cat.name_id[op] for op in set(names) if names.count(op) == top)
    if rule == "kernels_all":
        ks = _node_kernels(g, vocab)
        if ks:
            return frozenset(cat.kernel_id[f"{k}*{k}"] for k in ks)
        return frozenset({cat.dni_id["conv2d"]})
    if rule in ("kernel_max", "kernel_min"):
        ks = _node_kernels(g, vocab)
        if ks:
            k = max(ks) if rule == "kernel_max" else min(ks)
            return frozenset({cat.kernel_id[f"{k}*{k}"]})
        return frozenset({cat.dni_id["conv2d"]})
    if rule == "presence":
        return frozenset({cat.name_id[arg] if arg in present else cat.dni_id[arg]})
    if rule == "conv_types":
        members = sorted(CONV_OPS & present)
        if members:
            return frozenset(cat.name_id[op] for op in members)
        return frozenset({cat.dni_id["conv2d"]})
    if rule == "parametric":
        param_ops = sorted({vocab.name_of(n) for n, s in zip(g.nodes, g.shapes) if s[0] > 0})
        if param_ops:
            return frozenset(cat.name_id[op] for op in param_ops)
        return frozenset({cat.dni_id["linear"]})
    raise ValueError(f"unknown answer rule {rule!r}")


def gen_qa(g: ArchGraph, cfg: GenConfig, rng: np.random.Generator) -> list[AQASample]:
    """Exactly 35 unique questions for the graph, answered from the catalog.

    Requires every op of the graph to be covered by the answer catalog
    (the default 28-op vocabulary).
    """
    vocab = cfg.node_vocab()
    cat = answer_catalog()
    uncovered = sorted(extract_present_ops(g, vocab) - set(cat.name_id))
    if uncovered:
        raise ValueError(f"ops outside the answer catalog: {uncovered}")
    samples = []
    for question, rule, arg in _QUESTIONS:
        ids = _answer_ids(g, vocab, rule, arg, cat)
        samples.append(AQASample(graph=g, question=question, answers=ids))
    return samples


# ---------------------------------------------------------------------------
# negative mining and clone pairs


def mine_negatives(positives: dict[str, list[str]], sim, beta: float) -> dict[str, list[str]]:
    """Admit a foreign description as a negative for an architecture when its
    best similarity against that architecture's own positives is <= beta.

    Output lists are deduplicated and sorted, so the result is invariant
    under reordering of the input corpus.
    """
    if len(positives) < 2:
        raise ValueError("need at least 2 architectures to mine negatives")
    out: dict[str, list[str]] = {}
    for j in sorted(positives):
        own = positives[j]
        negs = set()
        for k in sorted(positives):
            if k == j:
                continue
            for t in positives[k]:
                if max(sim(t, p) for p in own) <= beta:
                    negs.add(t)
        out[j] = sorted(negs)
    return out


def gen_acd_pairs(tagged: list[tuple[ArchGraph, str]], rng: np.random.Generator,
                  pos_fraction: float = 0.11) -> list[ACDPair]:
    """Labelled clone pairs: label 1 iff both graphs share a family tag,
    sampled so similar pairs make up the requested fraction."""
    if len(tagged) < 2:
        raise ValueError("need at least 2 architectures")
    pos_idx, neg_idx = [], []
    for i in range(len(tagged)):
        for j in range(i + 1, len(tagged)):
            (pos_idx if tagged[i][1] == tagged[j][1] else neg_idx).append((i, j))
    if pos_fraction > 0 and not pos_idx:
        raise ValueError("positive pairs requested but no family has 2 members")
    npos = len(pos_idx)
    nneg = round(npos * (1 - pos_fraction) / pos_fraction) if pos_fraction > 0 else len(neg_idx)
    if nneg > len(neg_idx):
        nneg = len(neg_idx)
        npos = min(npos, round(nneg * pos_fraction / (1 - pos_fraction)))
    chosen_pos = [pos_idx[int(i)] for i in rng.choice(len(pos_idx), size=npos, replace=False)] if npos else []
    chosen_neg = [neg_idx[int(i)] for i in rng.choice(len(neg_idx), size=nneg, replace=False)] if nneg else []
    pairs = [ACDPair(tagged[i][0], tagged[j][0], 1) for i, j in sorted(chosen_pos)]
    pairs += [ACDPair(tagged[i][0], tagged[j][0], 0) for i, j in sorted(chosen_neg)]
    order = rng.permutation(len(pairs))
    return [pairs[int(i)] for i in order]


def mutate_architecture(g: ArchGraph, cfg: GenConfig, rng: np.random.Generator,
                        name: str | None = None) -> ArchGraph:
    """A same-family variant: re-drawn shapes for ~30% of nodes, one op swap,
    plus possibly one extra skip edge. Stays valid by construction."""
    vocab = cfg.node_vocab()
    nodes = [vocab.name_of(n) for n in g.nodes]
    shapes = list(g.shapes)
    m = g.num_nodes
    for i in range(m):
        if rng.random() < 0.3:
            shapes[i] = _shape_for(nodes[i], rng)
    if m >= 2 and rng.random() < 0.5:
        # swap one node to another op already present, so the family's op
        # set never grows past the base style
        i = 1 + int(rng.integers(0, m - 1))
        present = sorted(set(nodes))
        nodes[i] = present[int(rng.integers(len(present)))]
        shapes[i] = _shape_for(nodes[i], rng)
    edges = set(g.edges)
    if m >= 3 and rng.random() < 0.5:
        u = int(rng.integers(0, m - 1))
        v = int(rng.integers(u + 1, m))
        edges.add((u, v))
    return ArchGraph(
        nodes=[vocab.id_of(op) for op in nodes],
        edges=edges,
        shapes=shapes,
        name=name,
    )


def gen_family_archs(cfg: GenConfig, rng_master_tag: int = 7) -> list[tuple[ArchGraph, str]]:
    """Family-structured architectures: one random base per family and
    variant mutations of it."""
    tagged = []
    for f in range(cfg.tvhf_families):
        tag = f"fam{f:03d}"
        rng = np.random.default_rng([cfg.rng_seed, rng_master_tag, f])
        base = gen_architecture(cfg, rng, name=f"{tag}_v0")
        tagged.append((base, tag))
        for v in range(1, cfg.tvhf_variants):
            tagged.append((mutate_architecture(base, cfg, rng, name=f"{tag}_v{v}"), tag))
    return tagged


# ---------------------------------------------------------------------------
# dataset drivers

_STREAM_AUTONET = 1
_STREAM_AQA = 2
_STREAM_TVHF = 3
_STREAM_ACD = 4
_STREAM_BACD = 5


def gen_autonet(cfg: GenConfig, n_archs: int, split: str) -> list[BiModalSample]:
    split_code = 0 if split == "train" else 1
    samples = []
    for i in range(n_archs):
        rng = np.random.default_rng([cfg.rng_seed, _STREAM_AUTONET, split_code, i])
        g = gen_architecture(cfg, rng, name=f"autonet_{split}_{i:05d}")
        samples.extend(gen_descriptions(g, cfg, rng))
    return samples


def gen_autonet_aqa(cfg: GenConfig, n_archs: int, split: str) -> list[AQASample]:
    split_code = 0 if split == "train" else 1
    samples = []
    for i in range(n_archs):
        rng = np.random.default_rng([cfg.rng_seed, _STREAM_AQA, split_code, i])
        g = gen_architecture(cfg, rng, name=f"autonet_{split}_{i:05d}")
        samples.extend(gen_qa(g, cfg, rng))
    return samples


def gen_tvhf(cfg: GenConfig) -> list[BiModalSample]:
    """Family architectures with template positives and mined negatives,
    subsampled to the configured negative fraction."""
    tagged = gen_family_archs(cfg)
    by_name: dict[str, ArchGraph] = {}
    positives: dict[str, list[str]] = {}
    for idx, (g, _tag) in enumerate(tagged):
        rng = np.random.default_rng([cfg.rng_seed, _STREAM_TVHF, idx])
        descs = [s for s in gen_descriptions(g, cfg, rng) if s.y == 1.0]
        by_name[g.name] = g
        positives[g.name] = [s.text for s in descs]
    mined = mine_negatives(positives, token_overlap_similarity, cfg.beta)
    samples: list[BiModalSample] = []
    for idx, name in enumerate(sorted(positives)):
        g = by_name[name]
        pos_texts = positives[name]
        for t in pos_texts:
            samples.append(BiModalSample(graph=g, text=t, y=1.0))
        f = cfg.tvhf_neg_fraction
        want = round(len(pos_texts) * f / (1 - f))
        pool = mined[name]
        rng = np.random.default_rng([cfg.rng_seed, _STREAM_TVHF, idx, 1])
        take = min(want, len(pool))
        if take:
            chosen = rng.choice(len(pool), size=take, replace=False)
            for i in sorted(int(c) for c in chosen):
                samples.append(BiModalSample(graph=g, text=pool[i], y=0.0))
    return samples


def gen_acd_dataset(cfg: GenConfig) -> list[ACDPair]:
    tagged = gen_family_archs(cfg)
    rng = np.random.default_rng([cfg.rng_seed, _STREAM_ACD])
    return gen_acd_pairs(tagged, rng, cfg.acd_pos_fraction)


def gen_bacd_dataset(cfg: GenConfig) -> list[BACDSample]:
    """Clone pairs with one supporting sentence: a shared op for similar
    pairs, an op unique to the first graph otherwise."""
    vocab = cfg.node_vocab()
    pairs = gen_acd_dataset(cfg)
    samples = []
    for idx, p in enumerate(pairs):
        rng = np.random.default_rng([cfg.rng_seed, _STREAM_BACD, idx])
        ops1 = extract_present_ops(p.g1, vocab)
        ops2 = extract_present_ops(p.g2, vocab)
        shared = sorted(ops1 & ops2)
        only1 = sorted(ops1 - ops2)
        if p.label == 1 and shared:
            op = shared[int(rng.integers(len(shared)))]
            text = f"both models rely on {phrase_of(op)}."
        elif only1:
            op = only1[int(rng.integers(len(only1)))]
            text = f"a model built around {phrase_of(op)}."
        else:
            op = sorted(ops1)[int(rng.integers(len(ops1)))]
            text = f"an architecture for feature extraction with {phrase_of(op)}."
        samples.append(BACDSample(g1=p.g1, g2=p.g2, label=p.label, text=text))
    return samples


# ---------------------------------------------------------------------------
# JSONL serialization

def graph_to_obj(g: ArchGraph, vocab: NodeVocab) -> dict:
    obj: dict = {}
    if g.name is not None:
        obj["name"] = g.name
    obj["nodes"] = [vocab.name_of(n) for n in g.nodes]
    obj["edges"] = [[u, v] for u, v in g.sorted_edges()]
    obj["shapes"] = [list(s) for s in g.shapes]
    return obj


def graph_from_obj(obj: dict, vocab: NodeVocab) -> ArchGraph:
    return ArchGraph(
        nodes=[vocab.id_of(n) for n in obj["nodes"]],
        edges=[(e[0], e[1]) for e in obj["edges"]],
        shapes=[tuple(s) for s in obj["shapes"]],
        name=obj.get("name"),
    )


def record_of(sample, vocab: NodeVocab) -> dict:
    if isinstance(sample, BiModalSample):
        return {"graph": graph_to_obj(sample.graph, vocab), "text": sample.text, "y": sample.y}
    if isinstance(sample, AQASample):
        return {"graph": graph_to_obj(sample.graph, vocab), "question": sample.question,
                "answers": sorted(sample.answers)}
    if isinstance(sample, ACDPair):
        return {"g1": graph_to_obj(sample.g1, vocab), "g2": graph_to_obj(sample.g2, vocab),
                "label": sample.label}
    if isinstance(sample, BACDSample):
        return {"g1": graph_to_obj(sample.g1, vocab), "g2": graph_to_obj(sample.g2, vocab),
                "label": sample.label, "text": sample.text}
    if isinstance(sample, ACSample):
        return {"graph": graph_to_obj(sample.graph, vocab), "text": sample.text, "y": 1.0}
    raise TypeError(f"unsupported sample type {type(sample)!r}")


def write_jsonl(samples, vocab: NodeVocab, path: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for s in samples:
            f.write(json.dumps(record_of(s, vocab)) + "\n")


def _read_jsonl(path: str) -> list[dict]:
    records = []
    with open(path, encoding="utf-8") as f:
        for line_no, line in enumerate(f, 1):
            line = line.strip()
            if not line:
                continue
            try:
                records.append(json.loads(line))
            except json.JSONDecodeError as e:
                raise ValueError(f"{path}:{line_no}: invalid JSON: {e.msg}") from e
    return records


def load_bimodal(path: str, vocab: NodeVocab) -> list[BiModalSample]:
    return [BiModalSample(graph=graph_from_obj(r["graph"], vocab), text=r["text"], y=float(r["y"]))
            for r in _read_jsonl(path)]


def load_aqa(path: str, vocab: NodeVocab) -> list[AQASample]:
    return [AQASample(graph=graph_from_obj(r["graph"], vocab), question=r["question"],
                      answers=frozenset(r["answers"]))
            for r in _read_jsonl(path)]


def load_acd(path: str, vocab: NodeVocab) -> list[ACDPair]:
    return [ACDPair(g1=graph_from_obj(r["g1"], vocab), g2=graph_from_obj(r["g2"], vocab),
                    label=int(r["label"]))
            for r in _read_jsonl(path)]


def load_bacd(path: str, vocab: NodeVocab) -> list[BACDSample]:
    return [BACDSample(g1=graph_from_obj(r["g1"], vocab), g2=graph_from_obj(r["g2"], vocab),
                       label=int(r["label"]), text=r["text"])
            for r in _read_jsonl(path)]


def load_ac(path: str, vocab: NodeVocab) -> list[ACSample]:
    """Caption pairs: the positive rows of a bi-modal file."""
    out = []
    for r in _read_jsonl(path):
        if float(r.get("y", 1.0)) == 1.0:
            out.append(ACSample(graph=graph_from_obj(r["graph"], vocab), text=r["text"]))
    return out


# ---------------------------------------------------------------------------
# dataset statistics


def _dist(values) -> dict:
    vals = list(values)
    if not vals:
        return {"mean": 0.0, "std": 0.0, "median": 0.0}
    return {
        "mean": float(statistics.fmean(vals)),
        "std": float(statistics.pstdev(vals)),
        "median": float(statistics.median(vals)),
    }


def compute_stats(path: str) -> dict:
    """Table-style statistics of a JSONL dataset (any record schema)."""
    records = _read_jsonl(path)
    graphs, texts = [], []
    for r in records:
        for key in ("graph", "g1", "g2"):
            if key in r:
                graphs.append(r[key])
        if "text" in r:
            texts.append(r["text"])
        if "question" in r:
            texts.append(r["question"])
    unique_archs = {json.dumps(g, sort_keys=True) for g in graphs}
    unique_nodes = {n for g in graphs for n in g["nodes"]}
    token_lists = [normalize(t) for t in texts]
    unique_tokens = {w for ws in token_lists for w in ws}
    stats = {
        "samples": len(records),
        "unique_archs": len(unique_archs),
        "unique_nodes": len(unique_nodes),
        "nodes": _dist(len(g["nodes"]) for g in graphs),
        "edges": _dist(len(g["edges"]) for g in graphs),
        "unique_tokens": len(unique_tokens),
        "tokens": _dist(len(ws) for ws in token_lists),
        "seq_length": _dist(len(t) for t in texts),
    }
    return stats
