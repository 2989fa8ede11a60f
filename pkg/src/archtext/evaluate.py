"""Task runners and metrics: reasoning, clone detection, QA, captioning,
plus the structural and name-match baselines and a PCA projector.

All runners are pure functions of (frozen model, dataset): repeated calls
return identical metrics. Aggregation is count-based, so it is independent
of sample order.
"""

from __future__ import annotations

import re
import warnings
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .datagen import ACDPair, ACSample, AQASample, BACDSample, BiModalSample
from .graph import ArchGraph, NodeVocab
from .model import (
    Model,
    aqa_logits,
    cosine,
    decode_beam,
    detach_params,
    encode_graph,
    encode_text,
)
from .text import TextVocab, detokenize, normalize, tokenize


@dataclass(frozen=True)
class ClsMetrics:
    accuracy: float
    precision: float
    recall: float
    f1: float
    tp: int
    fp: int
    tn: int
    fn: int

    def to_dict(self) -> dict:
        return {"accuracy": self.accuracy, "precision": self.precision,
                "recall": self.recall, "f1": self.f1,
                "tp": self.tp, "fp": self.fp, "tn": self.tn, "fn": self.fn}


@dataclass(frozen=True)
class RougeScores:
    r1: float
    r2: float
    rlsum: float

    def to_dict(self) -> dict:
        return {"rouge1": self.r1, "rouge2": self.r2, "rougeLsum": self.rlsum}


def _f1(p: float, r: float) -> float:
    return 2 * p * r / (p + r) if p + r > 0 else 0.0


def threshold_decision(score: float, tau: float) -> bool:
    """Positive only for scores strictly greater than the threshold."""
    return score > tau


def metrics_from_counts(tp: int, fp: int, tn: int, fn: int) -> ClsMetrics:
    total = tp + fp + tn + fn
    acc = (tp + tn) / total if total else 0.0
    p = tp / (tp + fp) if tp + fp else 0.0
    r = tp / (tp + fn) if tp + fn else 0.0
    return ClsMetrics(accuracy=acc, precision=p, recall=r, f1=_f1(p, r),
                      tp=tp, fp=fp, tn=tn, fn=fn)


def accuracy_f1(preds, labels) -> ClsMetrics:
    """Binary classification metrics; precision/recall/f1 are 0 on zero division."""
    if len(preds) != len(labels):
        raise ValueError("preds and labels lengths differ")
    if not preds:
        raise ValueError("empty prediction list")
    tp = sum(1 for p, y in zip(preds, labels) if p and y)
    fp = sum(1 for p, y in zip(preds, labels) if p and not y)
    tn = sum(1 for p, y in zip(preds, labels) if not p and not y)
    fn = sum(1 for p, y in zip(preds, labels) if not p and y)
    return metrics_from_counts(tp, fp, tn, fn)


# ---------------------------------------------------------------------------
# ROUGE


def _ngram_f(cand: list[str], ref: list[str], n: int) -> float:
    cand_ngrams = Counter(tuple(cand[i:i + n]) for i in range(len(cand) - n + 1))
    ref_ngrams = Counter(tuple(ref[i:i + n]) for i in range(len(ref) - n + 1))
    overlap = sum((cand_ngrams & ref_ngrams).values())
    p = overlap / sum(cand_ngrams.values()) if cand_ngrams else 0.0
    r = overlap / sum(ref_ngrams.values()) if ref_ngrams else 0.0
    return _f1(p, r)


def _lcs_ref_positions(ref: list[str], cand: list[str]) -> set[int]:
    """Reference indices matched by one longest common subsequence."""
    nr, nc = len(ref), len(cand)
    dp = [[0] * (nc + 1) for _ in range(nr + 1)]
    for i in range(1, nr + 1):
        for j in range(1, nc + 1):
            if ref[i - 1] == cand[j - 1]:
                dp[i][j] = dp[i - 1][j - 1] + 1
            else:
                dp[i][j] = max(dp[i - 1][j], dp[i][j - 1])
    matched = set()
    i, j = nr, nc
    while i > 0 and j > 0:
        if ref[i - 1] == cand[j - 1]:
            matched.add(i - 1)
            i -= 1
            j -= 1
        elif dp[i - 1][j] >= dp[i][j - 1]:
            i -= 1
        else:
            j -= 1
    return matched


def _sentences(text: str) -> list[list[str]]:
    parts = re.split(r"[.\n]", text)
    out = [normalize(p) for p in parts]
    return [s for s in out if s]


def rouge_scores(candidate: str, reference: str) -> RougeScores:
    """Unigram/bigram overlap F plus the summary-level LCS variant.

    The LCS variant splits both sides into sentences (periods/newlines),
    takes the union of LCS matches of each reference sentence against every
    candidate sentence, and computes F over total token counts.
    """
    cand_tokens = normalize(candidate)
    ref_tokens = normalize(reference)
    r1 = _ngram_f(cand_tokens, ref_tokens, 1)
    r2 = _ngram_f(cand_tokens, ref_tokens, 2)
    cand_sents = _sentences(candidate)
    ref_sents = _sentences(reference)
    total_ref = sum(len(s) for s in ref_sents)
    total_cand = sum(len(s) for s in cand_sents)
    hits = 0
    for ref_sent in ref_sents:
        union: set[int] = set()
        for cand_sent in cand_sents:
            union |= _lcs_ref_positions(ref_sent, cand_sent)
        hits += len(union)
    p = hits / total_cand if total_cand else 0.0
    r = hits / total_ref if total_ref else 0.0
    return RougeScores(r1=r1, r2=r2, rlsum=_f1(p, r))


# ---------------------------------------------------------------------------
# structural baseline


def _multiset_iou(a: Counter, b: Counter) -> float:
    union = sum((a | b).values())
    if union == 0:
        return 0.0
    return sum((a & b).values()) / union


def jaccard_similarity(g1: ArchGraph, g2: ArchGraph, vocab: NodeVocab) -> float:
    """Mean of node-name multiset IoU and edge-type multiset IoU; an edge is
    typed by its (source op name, destination op name) pair. If both graphs
    are edgeless, the node IoU stands alone."""
    n1 = Counter(vocab.name_of(n) for n in g1.nodes)
    n2 = Counter(vocab.name_of(n) for n in g2.nodes)
    node_iou = _multiset_iou(n1, n2)
    if not g1.edges and not g2.edges:
        return node_iou
    e1 = Counter((vocab.name_of(g1.nodes[u]), vocab.name_of(g1.nodes[v]))
                 for u, v in g1.edges)
    e2 = Counter((vocab.name_of(g2.nodes[u]), vocab.name_of(g2.nodes[v]))
                 for u, v in g2.edges)
    return 0.5 * node_iou + 0.5 * _multiset_iou(e1, e2)


def ar_name_baseline(arch_name: str, statement: str) -> bool:
    """Correct iff the architecture name occurs in the statement (case-folded)."""
    if not arch_name:
        raise ValueError("empty architecture name")
    return arch_name.lower() in statement.lower()


# ---------------------------------------------------------------------------
# task runners


def _frozen(model: Model) -> Model:
    return Model(cfg=model.cfg, params=detach_params(model.params))


def run_ar(model: Model, samples: list[BiModalSample], tau: float,
           text_vocab: TextVocab) -> ClsMetrics:
    """Statement verification: cosine(J_t, J_g) > tau counts as correct."""
    if not samples:
        raise ValueError("empty dataset")
    fm = _frozen(model)
    preds, labels = [], []
    for s in samples:
        seq = tokenize(s.text, text_vocab, fm.cfg.max_tokens)
        _, j_t = encode_text(seq, fm.params, fm.cfg)
        _, j_g = encode_graph(s.graph, fm.params, fm.cfg)
        score = cosine(j_t, j_g, fm.cfg.eps_cos).item()
        preds.append(threshold_decision(score, tau))
        labels.append(s.y >= 0.5)
    return accuracy_f1(preds, labels)


def run_acd(model: Model, pairs: list[ACDPair], tau: float) -> ClsMetrics:
    """Clone detection: cosine of the two pooled graph embeddings vs tau."""
    if not pairs:
        raise ValueError("empty dataset")
    fm = _frozen(model)
    preds, labels = [], []
    for p in pairs:
        _, j1 = encode_graph(p.g1, fm.params, fm.cfg)
        _, j2 = encode_graph(p.g2, fm.params, fm.cfg)
        preds.append(threshold_decision(cosine(j1, j2, fm.cfg.eps_cos).item(), tau))
        labels.append(p.label == 1)
    return accuracy_f1(preds, labels)


def three_way_score(j1, j2, j_t, eps: float = 1e-8) -> float:
    """Mean of the three pairwise cosines among (J_g1, J_g2, J_t)."""
    return (cosine(j1, j2, eps).item() + cosine(j1, j_t, eps).item()
            + cosine(j2, j_t, eps).item()) / 3.0


def bacd_score(model: Model, s: BACDSample, text_vocab: TextVocab) -> float:
    fm = _frozen(model)
    seq = tokenize(s.text, text_vocab, fm.cfg.max_tokens)
    _, j_t = encode_text(seq, fm.params, fm.cfg)
    _, j1 = encode_graph(s.g1, fm.params, fm.cfg)
    _, j2 = encode_graph(s.g2, fm.params, fm.cfg)
    return three_way_score(j1, j2, j_t, fm.cfg.eps_cos)


def run_bacd(model: Model, samples: list[BACDSample], tau: float,
             text_vocab: TextVocab) -> ClsMetrics:
    """Text-assisted clone detection over the three-way cosine average."""
    if not samples:
        raise ValueError("empty dataset")
    preds = [threshold_decision(bacd_score(model, s, text_vocab), tau) for s in samples]
    labels = [s.label == 1 for s in samples]
    return accuracy_f1(preds, labels)


def run_aqa(model: Model, samples: list[AQASample],
            text_vocab: TextVocab) -> ClsMetrics:
    """Multi-label QA, micro-averaged over every answer slot of every sample."""
    if not samples:
        raise ValueError("empty dataset")
    fm = _frozen(model)
    tp = fp = tn = fn = 0
    for s in samples:
        seq = tokenize(s.question, text_vocab, fm.cfg.max_tokens)
        _, j_t = encode_text(seq, fm.params, fm.cfg)
        _, j_g = encode_graph(s.graph, fm.params, fm.cfg)
        logits = aqa_logits(j_t, j_g, fm.params).data[0]
        probs = 1.0 / (1.0 + np.exp(-logits))
        for slot in range(fm.cfg.n_answers):
            pred = threshold_decision(float(probs[slot]), 0.5)
            gold = slot in s.answers
            if pred and gold:
                tp += 1
            elif pred and not gold:
                fp += 1
            elif not pred and gold:
                fn += 1
            else:
                tn += 1
    return metrics_from_counts(tp, fp, tn, fn)


def caption_graph(model: Model, g: ArchGraph, text_vocab: TextVocab,
                  beam: int = 10, max_len: int | None = None) -> str:
    """Beam-decode one caption for a graph."""
    fm = _frozen(model)
    h_g, _ = encode_graph(g, fm.params, fm.cfg)
    budget = max_len if max_len is not None else fm.cfg.max_tokens - 1
    ids = decode_beam(h_g, np.ones(g.num_nodes, dtype=bool), fm.params, fm.cfg,
                      beam=beam, max_len=budget)
    return detokenize(ids, text_vocab)


def run_ac(model: Model, samples: list[ACSample], text_vocab: TextVocab,
           beam: int = 10) -> RougeScores:
    """Captioning: decode, detokenize, average the three overlap scores."""
    if not samples:
        raise ValueError("empty dataset")
    r1s, r2s, rls = [], [], []
    for s in samples:
        generated = caption_graph(model, s.graph, text_vocab, beam=beam)
        sc = rouge_scores(generated, s.text)
        r1s.append(sc.r1)
        r2s.append(sc.r2)
        rls.append(sc.rlsum)
    return RougeScores(r1=float(np.mean(r1s)), r2=float(np.mean(r2s)),
                       rlsum=float(np.mean(rls)))


# ---------------------------------------------------------------------------
# PCA projection


def pca_project(embeddings: np.ndarray, k: int = 2, tol: float = 1e-9,
                max_iter: int = 10000) -> np.ndarray:
    """Project onto the top-k covariance eigenvectors via power iteration
    with deflation. Each eigenvector's largest-magnitude entry is made
    positive. Rank-deficient inputs yield fewer columns with a warning."""
    x = np.asarray(embeddings, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 2:
        raise ValueError("need an (N >= 2) x d matrix")
    centered = x - x.mean(axis=0, keepdims=True)
    cov = centered.T @ centered / x.shape[0]
    d = cov.shape[0]
    rng = np.random.default_rng(0)
    comps = []
    first_eig = None
    for _ in range(min(k, d)):
        v = rng.standard_normal(d)
        v /= np.linalg.norm(v)
        lam = 0.0
        for _ in range(max_iter):
            w = cov @ v
            lam = float(np.linalg.norm(w))
            if lam < 1e-30:
                break
            w_norm = w / lam
            if np.linalg.norm(w_norm - v) < tol or np.linalg.norm(w_norm + v) < tol:
                v = w_norm
                break
            v = w_norm
        if first_eig is None:
            first_eig = lam
        if lam < 1e-30 or (first_eig > 0 and lam / first_eig < 1e-12):
            warnings.warn(f"data rank < {k}; returning {len(comps)} components")
            break
        imax = int(np.argmax(np.abs(v)))
        if v[imax] < 0:
            v = -v
        comps.append(v)
        cov = cov - lam * np.outer(v, v)
    if not comps:
        warnings.warn("degenerate data; returning a zero component")
        return np.zeros((x.shape[0], 1))
    basis = np.stack(comps, axis=1)
    return centered @ basis
