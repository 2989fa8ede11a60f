"""Architecture-graph IR: a DAG of operation nodes with parameter shapes.

A graph holds an ordered node list (operation ids into a node vocabulary),
a set of directed edges, and one 4-tuple of non-negative integers per node
(out-channels, in-channels, kernel-h, kernel-w). Nodes without shape
attributes carry the sentinel (0, 0, 0, 0).

All values are immutable after construction and safe to share across
threads; every operation in this module is pure.
"""

from __future__ import annotations

import heapq
import json
from dataclasses import dataclass, field

import numpy as np

MASK_NODE = "[MASK_NODE]"
PAD_NODE = "[PAD_NODE]"
UNK_NODE = "[UNK_NODE]"
RESERVED_NODE_TOKENS = (MASK_NODE, PAD_NODE, UNK_NODE)

MASK_NODE_ID = 0
PAD_NODE_ID = 1
UNK_NODE_ID = 2

Shape = tuple[int, int, int, int]
SENTINEL_SHAPE: Shape = (0, 0, 0, 0)


class GraphParseError(ValueError):
    """Raised on a malformed graph document (syntax or schema)."""


class GraphValidationError(ValueError):
    """Raised when a syntactically valid document violates graph invariants."""

    def __init__(self, report: "ValidationReport"):
        super().__init__("; ".join(f"{c}: {m}" for c, m in report.violations))
        self.report = report


@dataclass(frozen=True)
class OpKind:
    """One entry of the node vocabulary."""

    id: int
    name: str


class NodeVocab:
    """Operation-name vocabulary; ids 0..2 are reserved control tokens."""

    def __init__(self, op_names: list[str] | tuple[str, ...]):
        names = list(RESERVED_NODE_TOKENS) + [n for n in op_names if n not in RESERVED_NODE_TOKENS]
        if len(set(names)) != len(names):
            raise ValueError("duplicate op names in vocabulary")
        self._names = names
        self._ids = {n: i for i, n in enumerate(names)}

    def __len__(self) -> int:
        return len(self._names)

    def __contains__(self, name: str) -> bool:
        return name in self._ids

    @property
    def names(self) -> list[str]:
        return list(self._names)

    def id_of(self, name: str) -> int:
        """Id for a name; unknown names map to the UNK token."""
        return self._ids.get(name, UNK_NODE_ID)

    def name_of(self, op_id: int) -> str:
        if not 0 <= op_id < len(self._names):
            raise KeyError(f"op id {op_id} out of vocabulary (size {len(self._names)})")
        return self._names[op_id]

    def kinds(self) -> list[OpKind]:
        return [OpKind(i, n) for i, n in enumerate(self._names)]

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as f:
            for name in self._names:
                f.write(name + "\n")

    @classmethod
    def load(cls, path: str) -> "NodeVocab":
        with open(path, encoding="utf-8") as f:
            names = [line.rstrip("\n") for line in f if line.rstrip("\n")]
        if tuple(names[:3]) != RESERVED_NODE_TOKENS:
            raise ValueError(f"node vocabulary file must start with {RESERVED_NODE_TOKENS}")
        return cls(names[3:])


@dataclass(frozen=True)
class ArchGraph:
    """Immutable architecture graph: nodes, directed edges, per-node shapes."""

    nodes: tuple[int, ...]
    edges: frozenset[tuple[int, int]]
    shapes: tuple[Shape, ...]
    name: str | None = None

    def __init__(self, nodes, edges, shapes, name: str | None = None):
        object.__setattr__(self, "nodes", tuple(int(n) for n in nodes))
        object.__setattr__(self, "edges", frozenset((int(a), int(b)) for a, b in edges))
        object.__setattr__(self, "shapes", tuple(tuple(int(x) for x in s) for s in shapes))
        object.__setattr__(self, "name", name)

    @property
    def num_nodes(self) -> int:
        return len(self.nodes)

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violations: tuple[tuple[str, str], ...] = field(default_factory=tuple)


def validate_graph(g: ArchGraph) -> ValidationReport:
    """Check every graph invariant; reports all violations, never raises."""
    violations: list[tuple[str, str]] = []
    m = g.num_nodes
    if m < 1:
        violations.append(("empty", "graph must have at least one node"))
    for i, n in enumerate(g.nodes):
        if n < 0:
            violations.append(("node-id", f"node {i} has negative op id {n}"))
    in_range_edges = []
    for u, v in g.sorted_edges():
        if 0 <= u < m and 0 <= v < m:
            in_range_edges.append((u, v))
        else:
            violations.append(("edge-range", f"edge ({u},{v}) index out of range for {m} nodes"))
    if len(g.shapes) != m:
        violations.append(("shape-count", f"{len(g.shapes)} shapes for {m} nodes"))
    for i, s in enumerate(g.shapes):
        if len(s) != 4:
            violations.append(("shape-arity", f"shape {i} has {len(s)} entries, expected 4"))
        elif any(x < 0 for x in s):
            violations.append(("shape-negative", f"shape {i} = {s} has a negative entry"))
    back = _find_back_edge(m, in_range_edges)
    if back is not None:
        violations.append(("cycle", f"graph contains a cycle through edge {back}"))
    return ValidationReport(ok=not violations, violations=tuple(violations))


def _find_back_edge(m: int, edges: list[tuple[int, int]]) -> tuple[int, int] | None:
    """Kahn elimination; returns an edge inside the residual cyclic core, if any."""
    indeg = [0] * m
    succ: list[list[int]] = [[] for _ in range(m)]
    for u, v in edges:
        indeg[v] += 1
        succ[u].append(v)
    heap = [i for i in range(m) if indeg[i] == 0]
    heapq.heapify(heap)
    removed = [False] * m
    count = 0
    while heap:
        u = heapq.heappop(heap)
        removed[u] = True
        count += 1
        for v in succ[u]:
            indeg[v] -= 1
            if indeg[v] == 0:
                heapq.heappush(heap, v)
    if count == m:
        return None
    for u, v in sorted(edges):
        if not removed[u] and not removed[v]:
            return (u, v)
    return sorted(edges)[0] if edges else None


def topo_order(g: ArchGraph) -> list[int]:
    """Kahn's method with smallest-index-first tie break.

    Raises ValueError naming one back edge if the graph is cyclic.
    """
    m = g.num_nodes
    edges = [(u, v) for u, v in g.sorted_edges() if 0 <= u < m and 0 <= v < m]
    indeg = [0] * m
    succ: list[list[int]] = [[] for _ in range(m)]
    for u, v in edges:
        indeg[v] += 1
        succ[u].append(v)
    heap = [i for i in range(m) if indeg[i] == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        u = heapq.heappop(heap)
        order.append(u)
        for v in succ[u]:
            indeg[v] -= 1
            if indeg[v] == 0:
                heapq.heappush(heap, v)
    if len(order) != m:
        back = _find_back_edge(m, edges)
        raise ValueError(f"graph is cyclic; back edge {back}")
    return order


def attention_mask(g: ArchGraph, use_edges: bool = True) -> np.ndarray:
    """Boolean m x m attention mask: symmetrized adjacency plus self-loops.

    With use_edges=False every position may attend everywhere (the
    structure-blind ablation).
    """
    m = g.num_nodes
    if not use_edges:
        return np.ones((m, m), dtype=bool)
    mask = np.eye(m, dtype=bool)
    for u, v in g.edges:
        mask[u, v] = True
        mask[v, u] = True
    return mask


def parse_graph(text: str, vocab: NodeVocab) -> ArchGraph:
    """Parse the JSON graph document; op names map to ids via `vocab`.

    Raises GraphParseError on malformed documents and GraphValidationError
    (embedding the full report) when the parsed graph violates invariants.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise GraphParseError(f"invalid JSON at line {e.lineno} column {e.colno}: {e.msg}") from e
    if not isinstance(doc, dict):
        raise GraphParseError("top-level value must be an object")
    unknown = set(doc) - {"name", "nodes", "edges", "shapes"}
    if unknown:
        raise GraphParseError(f"unknown fields: {sorted(unknown)}")
    for key in ("nodes", "edges", "shapes"):
        if key not in doc:
            raise GraphParseError(f"missing field '{key}'")
        if not isinstance(doc[key], list):
            raise GraphParseError(f"field '{key}' must be a list")
    name = doc.get("name")
    if name is not None and not isinstance(name, str):
        raise GraphParseError("field 'name' must be a string")
    nodes = []
    for i, n in enumerate(doc["nodes"]):
        if not isinstance(n, str):
            raise GraphParseError(f"nodes[{i}] must be an op-name string")
        nodes.append(vocab.id_of(n))
    edges = []
    for i, e in enumerate(doc["edges"]):
        if not (isinstance(e, list) and len(e) == 2 and all(isinstance(x, int) for x in e)):
            raise GraphParseError(f"edges[{i}] must be a pair of integers")
        edges.append((e[0], e[1]))
    shapes = []
    for i, s in enumerate(doc["shapes"]):
        if not (isinstance(s, list) and len(s) == 4 and all(isinstance(x, int) for x in s)):
            raise GraphParseError(f"shapes[{i}] must be a list of 4 integers")
        shapes.append(tuple(s))
    g = ArchGraph(nodes=nodes, edges=edges, shapes=shapes, name=name)
    report = validate_graph(g)
    if not report.ok:
        raise GraphValidationError(report)
    return g


def serialize_graph(g: ArchGraph, vocab: NodeVocab) -> str:
    """Canonical JSON form: nodes in stored order, edges sorted lexicographically."""
    doc: dict = {}
    if g.name is not None:
        doc["name"] = g.name
    doc["nodes"] = [vocab.name_of(n) for n in g.nodes]
    doc["edges"] = [[u, v] for u, v in g.sorted_edges()]
    doc["shapes"] = [list(s) for s in g.shapes]
    return json.dumps(doc, indent=1) + "\n"


def to_dot(g: ArchGraph, vocab: NodeVocab) -> str:
    """DOT digraph text for external rendering tools."""
    lines = ["digraph arch {"]
    if g.name:
        lines.append(f'  label="{g.name}";')
    for i, n in enumerate(g.nodes):
        lines.append(f'  n{i} [label="{i}: {vocab.name_of(n)}"];')
    for u, v in g.sorted_edges():
        lines.append(f"  n{u} -> n{v};")
    lines.append("}")
    return "\n".join(lines) + "\n"
