# Copyright 2024 Canonical Ltd.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Immutable simple graphs with bit-row adjacency.

Row v of a graph is a Python integer whose bit u is set iff uv is an edge.
Vertex sets are plain integer masks over the same bit positions, so common
neighbourhoods, clique extension and complements are all word-parallel
integer operations. The graph6 codec converts through numpy matrices.
"""

import dataclasses
import functools
import heapq
import logging
from typing import Iterable, Iterator, List, Optional, Sequence, Tuple, TypeAlias

import numpy as np

import config
from errors import Graph6ParseError, ParseError, PreconditionError

logger = logging.getLogger(__name__)

VertexSet: TypeAlias = int
Edge: TypeAlias = Tuple[int, int]

GRAPH6_HEADER = ">>graph6<<"
_GRAPH6_WEIGHTS = np.array([32, 16, 8, 4, 2, 1], dtype=np.int64)


# Vertex set helpers


def bit(v: int) -> VertexSet:
    """Return the singleton set {v}."""
    return 1 << v


def lowest(mask: VertexSet) -> int:
    """Return the smallest vertex of a non-empty set."""
    return (mask & -mask).bit_length() - 1


def iter_bits(mask: VertexSet) -> Iterator[int]:
    """Yield the vertices of a set in increasing order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def mask_of(vertices: Iterable[int]) -> VertexSet:
    """Build a vertex set from an iterable of vertices."""
    mask = 0
    for v in vertices:
        mask |= 1 << v
    return mask


def vertices_of(mask: VertexSet) -> List[int]:
    """List the vertices of a set in increasing order."""
    return list(iter_bits(mask))


def above(v: int) -> VertexSet:
    """Return the (infinite) mask of all vertices greater than v, truncated by AND."""
    return ~((1 << (v + 1)) - 1)


@dataclasses.dataclass(frozen=True)
class TwinQuotient:
    """Vertices with identical neighbourhoods collapsed into classes.

    Twins are never adjacent, so every class is an independent set, a clique
    meets each class at most once and every common neighbourhood is a union
    of classes. Classes are numbered in degeneracy order of the quotient.
    """

    graph: "Graph"
    members: Tuple[Tuple[int, ...], ...]
    class_of: Tuple[int, ...]

    @property
    def sizes(self) -> Tuple[int, ...]:
        """Class sizes in class order."""
        return tuple(len(m) for m in self.members)

    def representative(self, c: int) -> int:
        """Smallest original vertex of class c."""
        return self.members[c][0]

    def expand(self, class_mask: VertexSet) -> VertexSet:
        """Map a set of classes back to the original vertex set."""
        return mask_of(v for c in iter_bits(class_mask) for v in self.members[c])


@dataclasses.dataclass(frozen=True)
class Graph:
    """Simple undirected graph on vertices 0..n-1.

    Instances are immutable; derived data (edge count, twin quotient) is
    cached on first use.
    """

    n: int
    rows: Tuple[int, ...]

    def __post_init__(self):
        if len(self.rows) != self.n:
            raise ValueError(f"expected {self.n} rows, got {len(self.rows)}")

    # Constructors

    @classmethod
    def empty(cls, n: int) -> "Graph":
        """Edgeless graph on n vertices."""
        _check_size(n)
        return cls(n, (0,) * n)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Edge]) -> "Graph":
        """Build a graph from an edge list; loops are rejected."""
        _check_size(n)
        rows = [0] * n
        for u, v in edges:
            if u == v:
                raise ValueError(f"loop at vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u},{v}) out of range for n={n}")
            rows[u] |= 1 << v
            rows[v] |= 1 << u
        return cls(n, tuple(rows))

    @classmethod
    def from_rows(cls, n: int, rows: Sequence[int], validate: bool = True) -> "Graph":
        """Build a graph from bit rows, checking symmetry and loops."""
        _check_size(n)
        g = cls(n, tuple(rows))
        if validate:
            full = (1 << n) - 1
            if any(row & ~full for row in g.rows):
                raise ValueError("row has bits outside the vertex range")
            matrix = g.to_matrix()
            if matrix.diagonal().any():
                raise ValueError("adjacency has a loop")
            if not np.array_equal(matrix, matrix.T):
                raise ValueError("adjacency is not symmetric")
        return g

    @classmethod
    def from_matrix(cls, matrix: np.ndarray) -> "Graph":
        """Build a graph from a symmetric boolean matrix with empty diagonal."""
        matrix = np.asarray(matrix, dtype=bool)
        n = matrix.shape[0]
        _check_size(n)
        if n == 0:
            return cls(0, ())
        packed = np.packbits(matrix, axis=1, bitorder="little")
        return cls(n, tuple(int.from_bytes(row.tobytes(), "little") for row in packed))

    def to_matrix(self) -> np.ndarray:
        """Return the boolean n x n adjacency matrix."""
        if self.n == 0:
            return np.zeros((0, 0), dtype=bool)
        width = (self.n + 7) // 8
        buf = b"".join(row.to_bytes(width, "little") for row in self.rows)
        packed = np.frombuffer(buf, dtype=np.uint8).reshape(self.n, width)
        return np.unpackbits(packed, axis=1, bitorder="little")[:, : self.n].astype(bool)

    # Inspection

    @functools.cached_property
    def edge_count(self) -> int:
        """Number of edges e(G)."""
        return sum(row.bit_count() for row in self.rows) // 2

    @property
    def full_mask(self) -> VertexSet:
        """The set of all vertices."""
        return (1 << self.n) - 1

    @property
    def nonedge_count(self) -> int:
        """Number of non-adjacent vertex pairs."""
        return self.n * (self.n - 1) // 2 - self.edge_count

    def neighbors(self, v: int) -> VertexSet:
        """Neighbourhood N(v) as a vertex set."""
        return self.rows[v]

    def degree(self, v: int) -> int:
        """Degree of v."""
        return self.rows[v].bit_count()

    def has_edge(self, u: int, v: int) -> bool:
        """Whether uv is an edge."""
        return bool(self.rows[u] >> v & 1)

    def edges(self) -> Iterator[Edge]:
        """Yield edges (u, v), u < v, in lexicographic order."""
        for u, row in enumerate(self.rows):
            for v in iter_bits(row & above(u)):
                yield u, v

    def nonedges(self) -> Iterator[Edge]:
        """Yield non-adjacent pairs (u, v), u < v, in lexicographic order."""
        full = self.full_mask
        for u, row in enumerate(self.rows):
            for v in iter_bits(~row & full & above(u)):
                yield u, v

    def edges_between(self, left: VertexSet, right: VertexSet) -> int:
        """Count edges with one end in `left` and the other in `right` (disjoint sets)."""
        return sum((self.rows[v] & right).bit_count() for v in iter_bits(left))

    def edges_within(self, mask: VertexSet) -> int:
        """Count edges of the subgraph induced on `mask`."""
        return sum((self.rows[v] & mask).bit_count() for v in iter_bits(mask)) // 2

    # Persistent updates

    def add_edge(self, u: int, v: int) -> "Graph":
        """Return a copy with uv added."""
        if u == v:
            raise ValueError(f"loop at vertex {u}")
        rows = list(self.rows)
        rows[u] |= 1 << v
        rows[v] |= 1 << u
        return Graph(self.n, tuple(rows))

    def remove_edge(self, u: int, v: int) -> "Graph":
        """Return a copy with uv removed."""
        rows = list(self.rows)
        rows[u] &= ~(1 << v)
        rows[v] &= ~(1 << u)
        return Graph(self.n, tuple(rows))

    def relabel(self, order: Sequence[int]) -> "Graph":
        """Return the graph whose vertex i is vertex order[i] of this graph."""
        position = [0] * self.n
        for new, old in enumerate(order):
            position[old] = new
        rows = [mask_of(position[w] for w in iter_bits(self.rows[old])) for old in order]
        return Graph(self.n, tuple(rows))

    @functools.cached_property
    def quotient(self) -> TwinQuotient:
        """Twin quotient of this graph, classes in degeneracy order."""
        return _twin_quotient(self)

    def __str__(self) -> str:
        return f"Graph(n={self.n}, e={self.edge_count})"


def _check_size(n: int) -> None:
    limit = config.get_settings().max_vertices
    if n < 0:
        raise ValueError(f"negative vertex count {n}")
    if n > limit:
        logger.error(f"Refusing graph with {n} vertices, limit is {limit}")
        raise PreconditionError(f"graph has {n} vertices, limit is {limit}")


def degeneracy_order(g: Graph) -> List[int]:
    """Repeatedly remove a vertex of minimum remaining degree (ties: smallest index)."""
    degree = [g.degree(v) for v in range(g.n)]
    heap = [(d, v) for v, d in enumerate(degree)]
    heapq.heapify(heap)
    removed = [False] * g.n
    order = []
    while heap:
        d, v = heapq.heappop(heap)
        if removed[v] or d != degree[v]:
            continue
        removed[v] = True
        order.append(v)
        for w in iter_bits(g.rows[v]):
            if not removed[w]:
                degree[w] -= 1
                heapq.heappush(heap, (degree[w], w))
    return order


def _twin_quotient(g: Graph) -> TwinQuotient:
    class_of_row = {}
    groups: List[List[int]] = []
    class_of = [0] * g.n
    for v, row in enumerate(g.rows):
        c = class_of_row.setdefault(row, len(groups))
        if c == len(groups):
            groups.append([])
        groups[c].append(v)
        class_of[v] = c

    rows = [mask_of(class_of[w] for w in iter_bits(g.rows[members[0]])) for members in groups]
    raw = Graph(len(groups), tuple(rows))
    order = degeneracy_order(raw)
    position = [0] * len(order)
    for new, old in enumerate(order):
        position[old] = new
    logger.debug(f"Twin quotient of {g}: {len(groups)} classes")
    return TwinQuotient(
        raw.relabel(order),
        tuple(tuple(groups[c]) for c in order),
        tuple(position[c] for c in class_of),
    )


# Core operations


def common_neighborhood(g: Graph, us: VertexSet) -> VertexSet:
    """Return N(U), the vertices adjacent to every vertex of U."""
    if not us:
        raise PreconditionError("common neighbourhood of the empty set is undefined")
    if us >> g.n:
        raise PreconditionError(f"vertex set has members outside 0..{g.n - 1}")
    common = g.full_mask
    for v in iter_bits(us):
        common &= g.rows[v]
    return common


def complement(g: Graph) -> Graph:
    """Return the complement graph."""
    full = g.full_mask
    return Graph(g.n, tuple(full & ~row & ~(1 << v) for v, row in enumerate(g.rows)))


def _colour_bound(rows: Sequence[int], candidates: VertexSet) -> int:
    """Greedy colour count of the candidates, an upper bound on their clique number."""
    colours = 0
    uncoloured = candidates
    while uncoloured:
        colours += 1
        available = uncoloured
        while available:
            v = lowest(available)
            uncoloured &= ~(1 << v)
            available &= ~(1 << v) & ~rows[v]
    return colours


def find_clique_rows(rows: Sequence[int], k: int, candidates: VertexSet) -> Optional[List[int]]:
    """Find k pairwise adjacent vertices of `candidates` given raw bit rows."""
    if k == 0:
        return []
    if candidates.bit_count() < k:
        return None
    if k == 1:
        return [lowest(candidates)]
    if k >= 3 and _colour_bound(rows, candidates) < k:
        return None
    while candidates.bit_count() >= k:
        v = lowest(candidates)
        candidates &= candidates - 1
        found = find_clique_rows(rows, k - 1, candidates & rows[v])
        if found is not None:
            return [v] + found
    return None


def find_clique(g: Graph, k: int, candidates: Optional[VertexSet] = None) -> Optional[List[int]]:
    """Return k pairwise adjacent vertices of `candidates` (default: all), or None."""
    if k < 0:
        raise ValueError(f"clique order must be non-negative, got {k}")
    if candidates is None:
        candidates = g.full_mask
    found = find_clique_rows(g.rows, k, candidates)
    return sorted(found) if found is not None else None


def clique_witness(g: Graph, r: int) -> Optional[List[int]]:
    """Return the vertices of some K_r in g, or None if g is K_r-free."""
    q = g.quotient
    found = find_clique_rows(q.graph.rows, r, q.graph.full_mask)
    if found is None:
        return None
    return sorted(q.representative(c) for c in found)


def max_clique_at_most(g: Graph, r: int) -> bool:
    """Return True iff g contains no clique on r vertices."""
    if r < 2:
        raise PreconditionError(f"clique order must be at least 2, got {r}")
    return clique_witness(g, r) is None


def clique_number(g: Graph) -> int:
    """Size of a largest clique."""
    k = 0
    while clique_witness(g, k + 1) is not None:
        k += 1
    return k


def contains_triangle(g: Graph) -> bool:
    """Return True iff g has a K3."""
    for u, row in enumerate(g.rows):
        for v in iter_bits(row & above(u)):
            if row & g.rows[v]:
                return True
    return False


def triangles(g: Graph, within: Optional[VertexSet] = None) -> Iterator[Tuple[int, int, int]]:
    """Yield the triangles (a, b, c), a < b < c, inside `within`, lexicographically."""
    mask = g.full_mask if within is None else within
    for a in iter_bits(mask):
        row_a = g.rows[a] & mask
        for b in iter_bits(row_a & above(a)):
            for c in iter_bits(row_a & g.rows[b] & above(b)):
                yield a, b, c


def triangle_count(g: Graph) -> int:
    """Number of triangles."""
    total = 0
    for a, row in enumerate(g.rows):
        for b in iter_bits(row & above(a)):
            total += (row & g.rows[b] & above(b)).bit_count()
    return total


# graph6 codec


def _encode_order(n: int) -> str:
    if n <= 62:
        return chr(n + 63)
    if n <= 258047:
        return "~" + "".join(chr(((n >> shift) & 63) + 63) for shift in (12, 6, 0))
    return "~~" + "".join(chr(((n >> shift) & 63) + 63) for shift in (30, 24, 18, 12, 6, 0))


def _decode_order(body: str, offset: int) -> Tuple[int, int]:
    """Return (n, number of characters used by the vertex count)."""
    if not body:
        raise Graph6ParseError(offset, "missing vertex count")
    if body[0] != "~":
        return ord(body[0]) - 63, 1
    width, start = (6, 2) if body[1:2] == "~" else (3, 1)
    digits = body[start : start + width]
    if len(digits) < width:
        raise Graph6ParseError(offset + len(body), "truncated vertex count")
    n = 0
    for ch in digits:
        n = (n << 6) | (ord(ch) - 63)
    return n, start + width


def from_graph6(text, max_vertices: Optional[int] = None) -> Graph:
    """Decode one graph6 line (an optional >>graph6<< header is accepted)."""
    if isinstance(text, bytes):
        for i, byte in enumerate(text):
            if byte > 127:
                raise Graph6ParseError(i, f"non-ASCII byte 0x{byte:02x}")
        text = text.decode("ascii")
    line = text[:-1] if text.endswith("\n") else text
    line = line[:-1] if line.endswith("\r") else line

    if line.startswith(">>sparse6<<") or line.startswith(":"):
        raise ParseError("sparse6 input is not supported, convert to graph6")
    if line.startswith(">>digraph6<<") or line.startswith("&"):
        raise ParseError("digraph6 input is not supported, convert to graph6")

    offset = len(GRAPH6_HEADER) if line.startswith(GRAPH6_HEADER) else 0
    body = line[offset:]
    for i, ch in enumerate(body):
        if not 63 <= ord(ch) <= 126:
            raise Graph6ParseError(offset + i, f"byte {ord(ch)} outside the graph6 range 63..126")

    n, used = _decode_order(body, offset)
    limit = max_vertices if max_vertices is not None else config.get_settings().max_vertices
    if n > limit:
        logger.error(f"graph6 line declares {n} vertices, limit is {limit}")
        raise PreconditionError(f"graph has {n} vertices, limit is {limit}")

    nbits = n * (n - 1) // 2
    nchars = (nbits + 5) // 6
    data = body[used:]
    if len(data) < nchars:
        raise Graph6ParseError(
            offset + len(body), f"expected {nchars} data bytes for {n} vertices, found {len(data)}"
        )
    if len(data) > nchars:
        raise Graph6ParseError(offset + used + nchars, "trailing garbage after adjacency data")

    codes = np.frombuffer(data.encode("ascii"), dtype=np.uint8) - 63
    bits = np.unpackbits(codes[:, None], axis=1)[:, 2:].ravel()[:nbits].astype(bool)
    matrix = np.zeros((n, n), dtype=bool)
    # bit order is x(0,1), x(0,2), x(1,2), x(0,3), ... i.e. column-major upper triangle
    high, low = np.tril_indices(n, -1)
    matrix[low, high] = bits
    matrix |= matrix.T
    return Graph.from_matrix(matrix)


def to_graph6(g: Graph) -> str:
    """Encode a graph as a graph6 line (without header or newline)."""
    bits = g.to_matrix()[np.tril_indices(g.n, -1)]
    pad = (-len(bits)) % 6
    if pad:
        bits = np.concatenate([bits, np.zeros(pad, dtype=bool)])
    values = bits.reshape(-1, 6).astype(np.int64) @ _GRAPH6_WEIGHTS + 63
    return _encode_order(g.n) + values.astype(np.uint8).tobytes().decode("ascii")


def iter_graph6(lines: Iterable[str]) -> Iterator[Graph]:
    """Decode every non-blank graph6 line of a stream."""
    for number, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            yield from_graph6(line.strip())
        except Graph6ParseError as e:
            logger.error(f"line {number}: {e}")
            raise
