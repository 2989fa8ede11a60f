"""Objectives and optimization loops: pre-training (similarity + masked-node
reconstruction), QA fine-tuning, and caption fine-tuning.

Each loop is deterministic given (model seed, train seed): epoch order comes
from a seed-derived permutation, node masking draws from the same sequential
stream, and a re-run writes a bit-identical checkpoint.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from .autodiff import AdamState, NonFiniteError, Tensor, adam_step
from .datagen import ACSample, AQASample, BiModalSample
from .graph import MASK_NODE_ID, ArchGraph
from .model import (
    Model,
    aqa_logits,
    cosine,
    decoder_logits,
    encode_graph,
    encode_text,
    freeze_groups,
    mam_logits,
)
from .text import TextVocab, tokenize


@dataclass
class TrainConfig:
    task: str = "pretrain"
    lr: float = 2e-5
    batch_size: int = 8
    epochs: int = 10
    seed: int = 0
    alpha: float = 5e-2
    mask_ratio: float = 0.15

    def __post_init__(self):
        if self.task not in ("pretrain", "aqa", "ac"):
            raise ValueError(f"unknown task {self.task!r}")
        if self.batch_size < 1 or self.epochs < 1:
            raise ValueError("batch_size and epochs must be >= 1")


@dataclass(frozen=True)
class MaskPlan:
    positions: tuple[int, ...]
    original_ids: tuple[int, ...]


def mask_count(m: int, ratio: float) -> int:
    """max(1, round(ratio * m)) with half-up rounding."""
    return max(1, math.floor(ratio * m + 0.5))


def mask_nodes(g: ArchGraph, ratio: float, rng: np.random.Generator) -> tuple[ArchGraph, MaskPlan]:
    """Replace a sample of node ids with the mask token; edges and shapes stay."""
    m = g.num_nodes
    k = mask_count(m, ratio)
    positions = sorted(int(p) for p in rng.choice(m, size=k, replace=False))
    nodes = list(g.nodes)
    originals = []
    for p in positions:
        originals.append(nodes[p])
        nodes[p] = MASK_NODE_ID
    masked = ArchGraph(nodes=nodes, edges=g.edges, shapes=g.shapes, name=g.name)
    return masked, MaskPlan(positions=tuple(positions), original_ids=tuple(originals))


# ---------------------------------------------------------------------------
# losses


def sim_loss(j_t: Tensor, j_g: Tensor, y: float, eps_cos: float = 1e-8) -> Tensor:
    """Squared error between the target score and the cosine of the pair."""
    diff = Tensor(float(y)) - cosine(j_t, j_g, eps_cos)
    return diff * diff


def mam_loss(f_m: Tensor, plan: MaskPlan) -> Tensor:
    """Mean negative log-likelihood of the original ids at masked positions."""
    if not plan.positions:
        raise ValueError("empty mask plan")
    logp = ad.log_softmax(f_m)
    onehot = np.zeros(f_m.shape)
    for pos, orig in zip(plan.positions, plan.original_ids):
        onehot[pos, orig] = 1.0
    picked = ad.sum_(logp * Tensor(onehot))
    return -picked * (1.0 / len(plan.positions))


def total_loss(l_sim: Tensor, l_mam: Tensor | None, alpha: float, no_mam: bool) -> Tensor:
    if no_mam or l_mam is None:
        return l_sim
    return l_sim + alpha * l_mam


def aqa_loss(f_q: Tensor, targets: np.ndarray) -> Tensor:
    """Mean element-wise binary cross-entropy against soft target scores."""
    t = np.asarray(targets, dtype=np.float64).reshape(1, -1)
    if t.shape != f_q.shape:
        raise ValueError(f"target shape {t.shape} != logits shape {f_q.shape}")
    if t.min() < 0.0 or t.max() > 1.0:
        raise ValueError("targets must lie in [0, 1]")
    return ad.mean(ad.bce_with_logits(f_q, t))


def decoder_loss(logits: Tensor, target_ids, target_mask) -> Tensor:
    """Mean negative log-likelihood of real target tokens, pads excluded."""
    mask = np.asarray(target_mask, dtype=bool)
    n_real = int(mask.sum())
    if n_real < 1:
        raise ValueError("no real target tokens")
    logp = ad.log_softmax(logits)
    onehot = np.zeros(logits.shape)
    for i, (tid, real) in enumerate(zip(target_ids, mask)):
        if real:
            onehot[i, int(tid)] = 1.0
    return -ad.sum_(logp * Tensor(onehot)) * (1.0 / n_real)


# ---------------------------------------------------------------------------
# loop machinery


def _frozen_view(model: Model) -> dict[str, Tensor]:
    cfg = model.cfg
    if cfg.text_only and cfg.arch_only:
        raise ValueError("text_only and arch_only are mutually exclusive")
    if cfg.text_only:
        return freeze_groups(model.params, ("arch.", "gat."))
    if cfg.arch_only:
        return freeze_groups(model.params, ("text.",))
    return model.params


def _collect_grads(model: Model) -> dict[str, np.ndarray]:
    return {name: p.grad for name, p in model.params.items() if p.grad is not None}


def _batches(n: int, batch_size: int, order: np.ndarray):
    for start in range(0, n, batch_size):
        yield [int(i) for i in order[start:start + batch_size]]


def pretrain(samples: list[BiModalSample], model: Model, tcfg: TrainConfig,
             text_vocab: TextVocab) -> list[dict]:
    """Joint similarity + masked-node pre-training; returns step log records."""
    if not samples:
        raise ValueError("empty dataset")
    cfg = model.cfg
    seqs = [tokenize(s.text, text_vocab, cfg.max_tokens) for s in samples]
    state = AdamState(lr=tcfg.lr)
    rng = np.random.default_rng([tcfg.seed, 11])
    log: list[dict] = []
    step = 0
    for epoch in range(tcfg.epochs):
        order = rng.permutation(len(samples))
        for batch in _batches(len(samples), tcfg.batch_size, order):
            view = _frozen_view(model)
            sim_terms, mam_terms = [], []
            for i in batch:
                s = samples[i]
                _, j_t = encode_text(seqs[i], view, cfg)
                _, j_g = encode_graph(s.graph, view, cfg)
                sim_terms.append(sim_loss(j_t, j_g, s.y, cfg.eps_cos))
                if not cfg.no_mam:
                    masked, plan = mask_nodes(s.graph, tcfg.mask_ratio, rng)
                    h_gm, _ = encode_graph(masked, view, cfg)
                    mam_terms.append(mam_loss(mam_logits(h_gm, view), plan))
            inv = 1.0 / len(batch)
            l_sim = _sum(sim_terms) * inv
            l_mam = _sum(mam_terms) * inv if mam_terms else None
            l_total = total_loss(l_sim, l_mam, tcfg.alpha, cfg.no_mam)
            _step(model, l_total, state, epoch, step)
            step += 1
            log.append({
                "epoch": epoch,
                "step": step,
                "l_sim": l_sim.item(),
                "l_mam": l_mam.item() if l_mam is not None else None,
                "l_total": l_total.item(),
            })
    return log


def finetune_aqa(samples: list[AQASample], model: Model, tcfg: TrainConfig,
                 text_vocab: TextVocab) -> list[dict]:
    """Multi-label answer fine-tuning with binary cross-entropy."""
    if not samples:
        raise ValueError("empty dataset")
    cfg = model.cfg
    seqs = [tokenize(s.question, text_vocab, cfg.max_tokens) for s in samples]
    targets = []
    for s in samples:
        t = np.zeros(cfg.n_answers)
        for a in s.answers:
            t[a] = 1.0
        targets.append(t)
    state = AdamState(lr=tcfg.lr)
    rng = np.random.default_rng([tcfg.seed, 12])
    log: list[dict] = []
    step = 0
    for epoch in range(tcfg.epochs):
        order = rng.permutation(len(samples))
        for batch in _batches(len(samples), tcfg.batch_size, order):
            view = _frozen_view(model)
            terms = []
            for i in batch:
                _, j_t = encode_text(seqs[i], view, cfg)
                _, j_g = encode_graph(samples[i].graph, view, cfg)
                terms.append(aqa_loss(aqa_logits(j_t, j_g, view), targets[i]))
            l_total = _sum(terms) * (1.0 / len(batch))
            _step(model, l_total, state, epoch, step)
            step += 1
            log.append({"epoch": epoch, "step": step, "l_sim": None,
                        "l_mam": None, "l_total": l_total.item()})
    return log


def finetune_ac(samples: list[ACSample], model: Model, tcfg: TrainConfig,
                text_vocab: TextVocab) -> list[dict]:
    """Caption fine-tuning: teacher-forced decoder likelihood over the graph
    path; the text encoder is not part of this computation."""
    if not samples:
        raise ValueError("empty dataset")
    cfg = model.cfg
    seqs = [tokenize(s.text, text_vocab, cfg.max_tokens) for s in samples]
    state = AdamState(lr=tcfg.lr)
    rng = np.random.default_rng([tcfg.seed, 13])
    log: list[dict] = []
    step = 0
    for epoch in range(tcfg.epochs):
        order = rng.permutation(len(samples))
        for batch in _batches(len(samples), tcfg.batch_size, order):
            view = _frozen_view(model)
            terms = []
            for i in batch:
                s = samples[i]
                h_g, _ = encode_graph(s.graph, view, cfg)
                seq = seqs[i]
                n_real = seq.real_length
                input_ids = seq.ids[:n_real - 1]
                target_ids = seq.ids[1:n_real]
                logits = decoder_logits(h_g, np.ones(s.graph.num_nodes, dtype=bool),
                                        input_ids, view, cfg)
                terms.append(decoder_loss(logits, target_ids, [True] * len(target_ids)))
            l_total = _sum(terms) * (1.0 / len(batch))
            _step(model, l_total, state, epoch, step)
            step += 1
            log.append({"epoch": epoch, "step": step, "l_sim": None,
                        "l_mam": None, "l_total": l_total.item()})
    return log


def _sum(terms: list[Tensor]) -> Tensor:
    out = terms[0]
    for t in terms[1:]:
        out = out + t
    return out


def _step(model: Model, loss: Tensor, state: AdamState, epoch: int, step: int) -> None:
    ad.zero_grads(model.params)
    try:
        loss.backward()
        grads = _collect_grads(model)
        adam_step(model.params, grads, state)
    except NonFiniteError as e:
        raise NonFiniteError(
            f"aborting at epoch {epoch} step {step}: {e}; "
            f"loss value {float(loss.data)!r}") from e
