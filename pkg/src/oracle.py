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

"""Exhaustive small-n ground truth.

Isomorphism classes of K4-free graphs are generated by edge augmentation:
a child G + uv of a class representative G is kept iff deleting the
canonical edge of G + uv gives a graph isomorphic to G. Every class then
has exactly one parent class, so a depth-first walk meets each class once.
"""

import dataclasses
import itertools
import logging
from typing import Dict, Iterator, List, Optional, Sequence, Set, Tuple

import config
import graph
import saturation
from errors import PreconditionError
from graph import Edge, Graph

logger = logging.getLogger(__name__)

Partition = List[List[int]]

NAIVE_MAX_VERTICES = 6


@dataclasses.dataclass(frozen=True)
class OracleRecord:
    """Exact f(n, e) with a witness graph attaining it."""

    n: int
    e: int
    f_min: int
    witness: Graph
    graphs_enumerated: int


def _check_order(n: int) -> None:
    cap = config.get_settings().oracle_max_vertices
    if n > cap:
        logger.error(f"Oracle refused n={n}, cap is {cap}")
        raise PreconditionError(f"oracle supports n <= {cap}, got {n}")
    if n < 0:
        raise PreconditionError(f"negative vertex count {n}")


# Canonical form


def _refine(g: Graph, partition: Partition) -> Partition:
    """Split cells by neighbour counts into every cell until stable."""
    while True:
        masks = [graph.mask_of(cell) for cell in partition]
        refined: Partition = []
        for cell in partition:
            if len(cell) == 1:
                refined.append(cell)
                continue
            signatures: Dict[Tuple[int, ...], List[int]] = {}
            for v in cell:
                key = tuple((g.rows[v] & m).bit_count() for m in masks)
                signatures.setdefault(key, []).append(v)
            refined.extend(signatures[key] for key in sorted(signatures))
        if len(refined) == len(partition):
            return refined
        partition = refined


def _interchangeable(g: Graph, u: int, v: int) -> bool:
    # the transposition (u v) is an automorphism
    return g.rows[u] & ~(1 << v) == g.rows[v] & ~(1 << u)


def _leaf_code(g: Graph, order: Sequence[int]) -> int:
    code = 0
    for j in range(1, len(order)):
        row = g.rows[order[j]]
        for i in range(j):
            code = (code << 1) | (row >> order[i] & 1)
    return code


def _search(g: Graph, partition: Partition, best: List) -> None:
    target = next((i for i, cell in enumerate(partition) if len(cell) > 1), None)
    if target is None:
        order = [cell[0] for cell in partition]
        code = _leaf_code(g, order)
        if best[0] is None or code > best[0]:
            best[0], best[1] = code, order
        return
    tried: List[int] = []
    cell = partition[target]
    for v in cell:
        if any(_interchangeable(g, u, v) for u in tried):
            continue
        tried.append(v)
        split = partition[:target] + [[v], [w for w in cell if w != v]] + partition[target + 1 :]
        _search(g, _refine(g, split), best)


def canonical_labelling(g: Graph) -> Tuple[bytes, List[int]]:
    """Return the canonical form and an order listing the vertex at each canonical position."""
    _check_order(g.n)
    by_degree: Dict[int, List[int]] = {}
    for v in range(g.n):
        by_degree.setdefault(g.degree(v), []).append(v)
    partition = _refine(g, [by_degree[d] for d in sorted(by_degree)])
    best: List = [None, list(range(g.n))]
    _search(g, partition, best)
    nbits = g.n * (g.n - 1) // 2
    code = best[0] or 0
    return bytes([g.n]) + code.to_bytes((nbits + 7) // 8, "big"), best[1]


def canonical_form(g: Graph) -> bytes:
    """Byte string equal for two graphs iff they are isomorphic (n <= oracle cap)."""
    return canonical_labelling(g)[0]


def _canonical_edge(g: Graph, order: Sequence[int]) -> Edge:
    for j in range(g.n - 1, 0, -1):
        for i in range(j - 1, -1, -1):
            if g.has_edge(order[i], order[j]):
                return tuple(sorted((order[i], order[j])))
    raise PreconditionError("graph has no edges")


# Enumeration


def _creates_k4(g: Graph, u: int, v: int) -> bool:
    common = g.rows[u] & g.rows[v]
    return graph.find_clique_rows(g.rows, 2, common) is not None


def _children(g: Graph, forbid_k4: bool) -> Iterator[Graph]:
    parent = canonical_form(g)
    seen: Set[bytes] = set()
    for u, v in g.nonedges():
        if forbid_k4 and _creates_k4(g, u, v):
            continue
        child = g.add_edge(u, v)
        key, order = canonical_labelling(child)
        if key in seen:
            continue
        seen.add(key)
        edge = _canonical_edge(child, order)
        if edge == (u, v) or canonical_form(child.remove_edge(*edge)) == parent:
            yield child


def _walk(g: Graph, depth: int, forbid_k4: bool) -> Iterator[Graph]:
    """Yield g and every accepted descendant with at most `depth` edges, depth first."""
    yield g
    if g.edge_count < depth:
        for child in _children(g, forbid_k4):
            yield from _walk(child, depth, forbid_k4)


def _root_graph(n: int, root: Optional[Sequence[Edge]]) -> Graph:
    if root is None:
        return Graph.empty(n)
    return Graph.from_edges(n, [tuple(edge) for edge in root])


def enumerate_k4free(
    n: int, e: int, forbid_k4: bool = True, root: Optional[Sequence[Edge]] = None
) -> Iterator[Graph]:
    """Yield one graph per isomorphism class of K4-free graphs with n vertices, e edges.

    Args:
        n: vertex count, at most the `oracle-max-vertices` setting.
        e: edge count.
        forbid_k4: set False to enumerate all graphs.
        root: edge list of a node returned by subtree_roots; only its subtree is walked.
    """
    _check_order(n)
    if e < 0:
        raise PreconditionError(f"negative edge count {e}")
    start = _root_graph(n, root)
    for g in _walk(start, e, forbid_k4):
        if g.edge_count == e:
            yield g


def subtree_roots(n: int, depth: int, forbid_k4: bool = True) -> List[List[Edge]]:
    """Edge lists of all generation-tree nodes with `depth` edges (independent work units)."""
    return [list(g.edges()) for g in enumerate_k4free(n, depth, forbid_k4=forbid_k4)]


def enumerate_naive(n: int, e: int, forbid_k4: bool = True) -> Iterator[Graph]:
    """Generate every labelled graph and keep the first of each class (n <= 6)."""
    _check_order(n)
    if n > NAIVE_MAX_VERTICES:
        raise PreconditionError(f"naive enumeration supports n <= {NAIVE_MAX_VERTICES}")
    pairs = list(itertools.combinations(range(n), 2))
    seen: Set[bytes] = set()
    for edges in itertools.combinations(pairs, e):
        g = Graph.from_edges(n, edges)
        if forbid_k4 and not graph.max_clique_at_most(g, 4):
            continue
        key = canonical_form(g)
        if key not in seen:
            seen.add(key)
            yield g


# Extremal function


class _Minimum:
    """Running argmin under (count, triangle count, stream index)."""

    def __init__(self, n: int, e: int):
        self.n, self.e = n, e
        self.key: Optional[Tuple[int, int, int]] = None
        self.witness: Optional[Graph] = None
        self.seen = 0

    def offer(self, g: Graph) -> None:
        count = saturation.count_saturating(g, 4, threads=1).count
        key = (count, graph.triangle_count(g), self.seen)
        self.seen += 1
        if self.key is None or key < self.key:
            self.key, self.witness = key, g

    def record(self) -> OracleRecord:
        if self.witness is None:
            logger.error(f"No K4-free graph with n={self.n}, e={self.e}")
            raise PreconditionError(f"no K4-free graph has {self.n} vertices and {self.e} edges")
        return OracleRecord(self.n, self.e, self.key[0], self.witness, self.seen)


def f_table(n: int, e: int, root: Optional[Sequence[Edge]] = None) -> OracleRecord:
    """Exact f(n, e): fewest K4-saturating pairs over K4-free graphs with n vertices, e edges.

    With `root`, the minimum is over that subtree only.
    """
    best = _Minimum(n, e)
    for g in enumerate_k4free(n, e, root=root):
        best.offer(g)
    record = best.record()
    logger.info(f"f({n},{e}) = {record.f_min} over {record.graphs_enumerated} classes")
    return record


def f_sweep(n: int) -> Dict[int, OracleRecord]:
    """f(n, e) for every e admitting a K4-free graph, from one traversal."""
    _check_order(n)
    best: Dict[int, _Minimum] = {}
    for g in _walk(Graph.empty(n), n * (n - 1) // 2, True):
        e = g.edge_count
        best.setdefault(e, _Minimum(n, e)).offer(g)
    return {e: best[e].record() for e in sorted(best)}
