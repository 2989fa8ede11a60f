"""Flat cosine-retrieval index over pooled architecture embeddings.

Entries are unit-normalized graph embeddings keyed by architecture id, plus
a fingerprint of the checkpoint that produced them; querying with a model
whose checkpoint hash differs is refused outright. Search is an exhaustive
scan: desk-scale indexes stay small and exactness beats speed here.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .graph import ArchGraph
from .model import Model, detach_params, encode_graph, encode_text
from .text import TextVocab, tokenize

MAGIC = b"ABIX"
VERSION = 1


class IndexError_(ValueError):
    """Raised on malformed index files or fingerprint mismatches."""


@dataclass
class EmbeddingIndex:
    d: int
    entries: list[tuple[str, np.ndarray]]
    fingerprint: bytes

    def __post_init__(self):
        if len(self.fingerprint) != 32:
            raise IndexError_("fingerprint must be 32 bytes")
        seen = set()
        for arch_id, vec in self.entries:
            if arch_id in seen:
                raise IndexError_(f"duplicate architecture id {arch_id!r}")
            seen.add(arch_id)
            if vec.shape != (self.d,):
                raise IndexError_(f"entry {arch_id!r} has dimension {vec.shape}, want ({self.d},)")


def _unit(vec: np.ndarray) -> np.ndarray:
    norm = float(np.linalg.norm(vec))
    if norm < 1e-12:
        return np.zeros_like(vec)
    return vec / norm


def build_index(model: Model, graphs: list[tuple[str, ArchGraph]],
                fingerprint: bytes) -> EmbeddingIndex:
    """Encode every graph through the architecture path and store the
    unit-normalized pooled embeddings."""
    fm = Model(cfg=model.cfg, params=detach_params(model.params))
    entries = []
    for arch_id, g in graphs:
        _, j_g = encode_graph(g, fm.params, fm.cfg)
        entries.append((arch_id, _unit(j_g.data[0])))
    return EmbeddingIndex(d=model.cfg.d, entries=entries, fingerprint=fingerprint)


def search(index: EmbeddingIndex, query: str, model: Model, k: int,
           text_vocab: TextVocab, fingerprint: bytes) -> list[tuple[str, float]]:
    """Embed the query through the text path and rank all entries by cosine.

    Ties break toward the lexicographically smaller id. k=0 returns nothing;
    k beyond the entry count returns everything.
    """
    if fingerprint != index.fingerprint:
        raise IndexError_(
            "checkpoint fingerprint does not match the index; rebuild the index "
            "against the loaded checkpoint")
    if k <= 0:
        return []
    fm = Model(cfg=model.cfg, params=detach_params(model.params))
    seq = tokenize(query, text_vocab, fm.cfg.max_tokens)
    _, j_t = encode_text(seq, fm.params, fm.cfg)
    q = _unit(j_t.data[0])
    scored = [(arch_id, float(q @ vec)) for arch_id, vec in index.entries]
    scored.sort(key=lambda e: (-e[1], e[0]))
    return scored[:k]


def save_index(index: EmbeddingIndex, path: str) -> None:
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<I", VERSION))
        f.write(struct.pack("<I", index.d))
        f.write(struct.pack("<I", len(index.entries)))
        f.write(index.fingerprint)
        for arch_id, vec in index.entries:
            encoded = arch_id.encode("utf-8")
            f.write(struct.pack("<I", len(encoded)))
            f.write(encoded)
            f.write(vec.astype("<f4").tobytes(order="C"))


def load_index(path: str) -> EmbeddingIndex:
    with open(path, "rb") as f:
        blob = f.read()
    if blob[:4] != MAGIC:
        raise IndexError_(f"{path}: bad magic {blob[:4]!r}, expected {MAGIC!r}")
    try:
        (version,) = struct.unpack_from("<I", blob, 4)
        if version != VERSION:
            raise IndexError_(f"{path}: unsupported version {version}")
        (d,) = struct.unpack_from("<I", blob, 8)
        (count,) = struct.unpack_from("<I", blob, 12)
        fingerprint = blob[16:48]
        offset = 48
        entries = []
        for _ in range(count):
            (id_len,) = struct.unpack_from("<I", blob, offset)
            offset += 4
            arch_id = blob[offset:offset + id_len].decode("utf-8")
            offset += id_len
            vec = np.frombuffer(blob, dtype="<f4", count=d, offset=offset).astype(np.float64)
            offset += 4 * d
            entries.append((arch_id, vec))
    except (struct.error, ValueError) as e:
        raise IndexError_(f"{path}: truncated or corrupt index: {e}") from e
    return EmbeddingIndex(d=d, entries=entries, fingerprint=fingerprint)
