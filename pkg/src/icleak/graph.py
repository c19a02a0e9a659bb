"""Confusion graphs of index-coding subproblems.

Graphs store adjacency as one Python int bitset per vertex.  Two tuples of
``X_S^t`` are adjacent iff some receiver i in S sees different x_i^t while
its side information restricted to S agrees.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Iterator, Sequence

from .errors import CapExceeded, ValidationError
from .model import Instance, Layout, as_scope

DEFAULT_VERTEX_CAP = 2**16
TRANSITIVITY_CAP = 2**12


def iter_bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def mask_of(vertices: Iterable[int]) -> int:
    m = 0
    for v in vertices:
        m |= 1 << v
    return m


@dataclass(frozen=True, eq=False)
class Graph:
    n_vertices: int
    adjacency: tuple[int, ...]

    def __post_init__(self):
        if len(self.adjacency) != self.n_vertices:
            raise ValueError("one adjacency row per vertex required")
        for v, row in enumerate(self.adjacency):
            if row >> v & 1:
                raise ValueError(f"self-loop at vertex {v}")
            if row >> self.n_vertices:
                raise ValueError(f"row {v} references vertices beyond {self.n_vertices}")

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "Graph":
        rows = [0] * n
        for u, v in edges:
            if u == v:
                raise ValueError("self-loops are not allowed")
            rows[u] |= 1 << v
            rows[v] |= 1 << u
        return cls(n, tuple(rows))

    @classmethod
    def complete(cls, n: int) -> "Graph":
        full = (1 << n) - 1
        return cls(n, tuple(full & ~(1 << v) for v in range(n)))

    @classmethod
    def empty(cls, n: int) -> "Graph":
        return cls(n, (0,) * n)

    @classmethod
    def cycle(cls, n: int) -> "Graph":
        return cls.from_edges(n, [(v, (v + 1) % n) for v in range(n)])

    @classmethod
    def path(cls, n: int) -> "Graph":
        return cls.from_edges(n, [(v, v + 1) for v in range(n - 1)])

    @property
    def full_mask(self) -> int:
        return (1 << self.n_vertices) - 1

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self.adjacency[u] >> v & 1)

    def degree(self, v: int) -> int:
        return self.adjacency[v].bit_count()

    def degrees(self) -> list[int]:
        return [row.bit_count() for row in self.adjacency]

    @property
    def n_edges(self) -> int:
        return sum(self.degrees()) // 2

    def edges(self) -> Iterator[tuple[int, int]]:
        for u, row in enumerate(self.adjacency):
            for v in iter_bits(row >> (u + 1)):
                yield u, u + 1 + v

    def complement(self) -> "Graph":
        full = self.full_mask
        return Graph(self.n_vertices, tuple(full & ~row & ~(1 << v) for v, row in enumerate(self.adjacency)))

    def is_independent(self, vertices: Iterable[int] | int) -> bool:
        mask = vertices if isinstance(vertices, int) else mask_of(vertices)
        return all(not (self.adjacency[v] & mask) for v in iter_bits(mask))

    def is_clique(self, vertices: Iterable[int]) -> bool:
        vs = list(vertices)
        return all(self.has_edge(u, v) for u, v in combinations(vs, 2))

    def is_proper_coloring(self, colors: Sequence[int]) -> bool:
        return all(colors[u] != colors[v] for u, v in self.edges())

    def label(self, v: int) -> str:
        return str(v)

    def same_edges(self, other: "Graph") -> bool:
        return self.n_vertices == other.n_vertices and self.adjacency == other.adjacency


@dataclass(frozen=True, eq=False)
class ConfusionGraph(Graph):
    instance: Instance = None
    scope: tuple[int, ...] = ()
    t: int = 1

    @property
    def layout(self) -> Layout:
        return Layout(self.instance.q, self.scope, self.t)

    @property
    def q(self) -> int:
        return self.instance.q

    def label(self, v: int) -> str:
        return self.layout.format(v)

    def vertex(self, v: int) -> tuple[int, ...]:
        return self.layout.digits(v)

    def index(self, digits: Sequence[int]) -> int:
        return self.layout.index(digits)


def confusable(x: Sequence[int], z: Sequence[int], instance: Instance, S: Iterable[int], t: int = 1) -> bool:
    """Pairwise confusability of two flat symbol tuples of ``X_S^t``."""
    S = as_scope(S)
    width = len(S) * t
    if len(x) != width or len(z) != width:
        raise ValidationError(f"tuples must have {width} symbols for |S|={len(S)}, t={t}")
    if tuple(x) == tuple(z):
        return False
    pos = {i: k for k, i in enumerate(S)}

    def block(v, i):
        k = pos[i]
        return tuple(v[k * t:(k + 1) * t])

    for i in S:
        if block(x, i) != block(z, i) and all(block(x, j) == block(z, j) for j in instance.side(i, S)):
            return True
    return False


def build_confusion_graph(instance: Instance, S: Iterable[int] | None = None, t: int = 1,
                          cap: int = DEFAULT_VERTEX_CAP) -> ConfusionGraph:
    """Construct the confusion graph of the subproblem induced by S (default: all messages)."""
    S = instance.messages if S is None else as_scope(S)
    if not set(S) <= set(instance.messages):
        raise ValidationError(f"subset {S} not contained in [{instance.n}]")
    if t < 1:
        raise ValidationError("sequence length t must be at least 1")
    layout = Layout(instance.q, S, t)
    N = layout.size
    if N > cap:
        raise CapExceeded(f"confusion graph would have {N} vertices, cap is {cap}")
    blocks = [layout.blocks(v) for v in range(N)]
    pos = {i: k for k, i in enumerate(S)}
    rows = [0] * N
    for i in S:
        side = [pos[j] for j in instance.side(i, S)]
        k = pos[i]
        group: dict[tuple, int] = {}
        sub: dict[tuple, int] = {}
        keys = []
        for v, b in enumerate(blocks):
            g = tuple(b[j] for j in side)
            h = (g, b[k])
            keys.append((g, h))
            group[g] = group.get(g, 0) | (1 << v)
            sub[h] = sub.get(h, 0) | (1 << v)
        for v, (g, h) in enumerate(keys):
            rows[v] |= group[g] & ~sub[h]
    return ConfusionGraph(N, tuple(rows), instance, S, t)


def translate(layout: Layout, idx: int, shift: Sequence[int]) -> int:
    """Symbol-wise addition mod q of a fixed flat tuple."""
    q = layout.q
    return layout.index([(a + b) % q for a, b in zip(layout.digits(idx), shift)])


def check_vertex_transitive(graph: Graph, cap: int = TRANSITIVITY_CAP) -> bool:
    """Vertex-transitivity test.

    Confusion graphs are checked against the translation group (which acts
    transitively on ``X_S^t``): it suffices that each unit translation maps
    edges onto edges.  Other graphs fall back to an automorphism search.
    """
    degs = graph.degrees()
    if len(set(degs)) > 1:
        return False
    if graph.n_vertices <= 1:
        return True
    if isinstance(graph, ConfusionGraph):
        layout = graph.layout
        for pos in range(layout.width):
            shift = [0] * layout.width
            shift[pos] = 1
            perm = [translate(layout, v, shift) for v in range(graph.n_vertices)]
            for v, row in enumerate(graph.adjacency):
                if mask_of(perm[u] for u in iter_bits(row)) != graph.adjacency[perm[v]]:
                    return False
        return True
    if graph.n_vertices > cap:
        raise CapExceeded(f"automorphism search limited to {cap} vertices")
    return _transitive_by_search(graph)


def _transitive_by_search(graph: Graph) -> bool:
    import networkx as nx
    from networkx.algorithms.isomorphism import GraphMatcher

    G = nx.Graph()
    G.add_nodes_from(range(graph.n_vertices))
    G.add_edges_from(graph.edges())
    reached = {0}
    for v in range(1, graph.n_vertices):
        if v in reached:
            continue
        H0 = G.copy()
        H1 = G.copy()
        nx.set_node_attributes(H0, {u: u == 0 for u in H0}, "root")
        nx.set_node_attributes(H1, {u: u == v for u in H1}, "root")
        gm = GraphMatcher(H0, H1, node_match=lambda a, b: a["root"] == b["root"])
        mapping = next(gm.isomorphisms_iter(), None)
        if mapping is None:
            return False
        reached.add(v)
    return True


def to_dot(graph: Graph, name: str = "G") -> str:
    out = io.StringIO()
    out.write(f"graph {name} {{\n")
    for v in range(graph.n_vertices):
        out.write(f'  {v} [label="{graph.label(v)}"];\n')
    for u, v in graph.edges():
        out.write(f"  {u} -- {v};\n")
    out.write("}\n")
    return out.getvalue()


def to_adjacency_csv(graph: Graph) -> str:
    labels = [graph.label(v) for v in range(graph.n_vertices)]
    lines = ["," + ",".join(labels)]
    for v, row in enumerate(graph.adjacency):
        lines.append(labels[v] + "," + ",".join("1" if row >> u & 1 else "0" for u in range(graph.n_vertices)))
    return "\n".join(lines) + "\n"
