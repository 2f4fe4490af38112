# Copyright 2024 Canonical Ltd.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
# http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Slow reference implementations and random graph generators for the unit tests."""

import itertools
import random
from typing import List, Optional

import networkx as nx

import constructions
import graph
from graph import Graph


def to_networkx(g: Graph) -> nx.Graph:
    nxg = nx.Graph()
    nxg.add_nodes_from(range(g.n))
    nxg.add_edges_from(g.edges())
    return nxg


def from_networkx(nxg: nx.Graph) -> Graph:
    index = {v: i for i, v in enumerate(sorted(nxg.nodes()))}
    return Graph.from_edges(len(index), [(index[u], index[v]) for u, v in nxg.edges()])


def is_clique(g: Graph, vertices) -> bool:
    return all(g.has_edge(u, v) for u, v in itertools.combinations(vertices, 2))


def naive_has_clique(g: Graph, r: int) -> bool:
    return any(is_clique(g, c) for c in itertools.combinations(range(g.n), r))


def naive_is_saturating(g: Graph, u: int, v: int, r: int) -> bool:
    common = graph.vertices_of(g.rows[u] & g.rows[v])
    return any(is_clique(g, c) for c in itertools.combinations(common, r - 2))


def naive_saturating_count(g: Graph, r: int) -> int:
    return sum(1 for u, v in g.nonedges() if naive_is_saturating(g, u, v, r))


def naive_max_packing_size(g: Graph) -> int:
    tris = list(graph.triangles(g))
    for size in range(g.n // 3, 0, -1):
        for family in itertools.combinations(tris, size):
            if len({v for tri in family for v in tri}) == 3 * size:
                return size
    return 0


def creates_k4(g: Graph, u: int, v: int) -> bool:
    return graph.find_clique(g, 2, g.rows[u] & g.rows[v]) is not None


def random_k4free(rng: random.Random, n: int, p: float) -> Graph:
    """Insert the pairs in random order, each with probability p, skipping any that close a K4."""
    g = Graph.empty(n)
    pairs = list(itertools.combinations(range(n), 2))
    rng.shuffle(pairs)
    for u, v in pairs:
        if rng.random() < p and not creates_k4(g, u, v):
            g = g.add_edge(u, v)
    return g


def bipartite_plus_triangle(n: int) -> Graph:
    """K_{ceil(n/2),floor(n/2)} with one edge moved inside the larger part (n >= 4)."""
    big = (n + 1) // 2
    return constructions.turan_bipartite(n).add_edge(0, 1).remove_edge(0, big)


def swap_chain(rng: random.Random, n: int, steps: int) -> Graph:
    """Random K4-free graph with floor(n^2/4) edges and a triangle, by local edge swaps."""
    g = bipartite_plus_triangle(n)
    for _ in range(steps):
        nonedges = [(u, v) for u, v in g.nonedges() if not creates_k4(g, u, v)]
        if not nonedges:
            break
        u, v = rng.choice(nonedges)
        added = g.add_edge(u, v)
        x, y = rng.choice([edge for edge in added.edges() if edge != (u, v)])
        candidate = added.remove_edge(x, y)
        if graph.contains_triangle(candidate):
            g = candidate
    return g


def find_with_triangle(rng: random.Random, n: int, p: float, tries: int = 50) -> Optional[Graph]:
    for _ in range(tries):
        g = random_k4free(rng, n, p)
        if graph.contains_triangle(g):
            return g
    return None


def permuted(g: Graph, rng: random.Random) -> Graph:
    order: List[int] = list(range(g.n))
    rng.shuffle(order)
    return g.relabel(order)
