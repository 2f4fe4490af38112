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

"""Named graphs and pattern blow-ups.

A blow-up replaces pattern vertex i by an independent part of size
sizes[i] and every pattern edge by a complete bipartite graph. Parts are
laid out contiguously in pattern order.
"""

import dataclasses
import logging
from typing import Callable, Dict, FrozenSet, List, Optional, Tuple

import graph
from errors import PreconditionError
from graph import Graph, VertexSet

logger = logging.getLogger(__name__)

MAX_PATTERN_VERTICES = 16
C5_CHORD_EDGES = ((0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (0, 2))


@dataclasses.dataclass(frozen=True)
class BlowupPattern:
    """A small pattern graph and one part size per pattern vertex."""

    pattern: Graph
    sizes: Tuple[int, ...]

    def __post_init__(self):
        if self.pattern.n > MAX_PATTERN_VERTICES:
            raise PreconditionError(
                f"pattern has {self.pattern.n} vertices, limit is {MAX_PATTERN_VERTICES}"
            )
        if len(self.sizes) != self.pattern.n:
            raise PreconditionError(
                f"expected {self.pattern.n} part sizes, got {len(self.sizes)}"
            )
        if any(s < 0 for s in self.sizes):
            raise PreconditionError(f"part sizes must be non-negative, got {self.sizes}")

    @property
    def n(self) -> int:
        return sum(self.sizes)

    @property
    def nonempty(self) -> VertexSet:
        """Pattern vertices whose part is non-empty."""
        return graph.mask_of(i for i, s in enumerate(self.sizes) if s > 0)

    def part_masks(self) -> List[VertexSet]:
        """Vertex set of every part of the blown-up graph, in pattern order."""
        masks, offset = [], 0
        for size in self.sizes:
            masks.append(((1 << size) - 1) << offset)
            offset += size
        return masks


@dataclasses.dataclass(frozen=True)
class PartClassification:
    """Which pairs of a blow-up are K_r-saturating, at pattern level.

    `within` holds pattern vertices whose internal pairs are saturating;
    `cross` holds pattern non-edges (i, j), i < j, whose cross pairs are.
    """

    within: FrozenSet[int]
    cross: FrozenSet[Tuple[int, int]]
    r: int


def c5_with_chord() -> Graph:
    """The 5-cycle v1..v5 (vertices 0..4) with the chord v1v3."""
    return Graph.from_edges(5, C5_CHORD_EDGES)


def single_edge() -> Graph:
    return Graph.from_edges(2, [(0, 1)])


def blowup(bp: BlowupPattern) -> Graph:
    """Blow up every pattern vertex into an independent part."""
    masks = bp.part_masks()
    rows = []
    for i, size in enumerate(bp.sizes):
        row = 0
        for j in graph.iter_bits(bp.pattern.rows[i]):
            row |= masks[j]
        rows.extend([row] * size)
    return Graph.from_rows(bp.n, rows, validate=False)


def classify_parts(pattern: Graph, nonempty: VertexSet, r: int) -> PartClassification:
    """Classify pattern vertices and non-edges by whether their pairs saturate K_r.

    Only parts in `nonempty` contribute vertices to common neighbourhoods.
    """
    rows = pattern.rows
    within = frozenset(
        i
        for i in graph.iter_bits(nonempty)
        if graph.find_clique_rows(rows, r - 2, rows[i] & nonempty) is not None
    )
    cross = frozenset(
        (i, j)
        for i in graph.iter_bits(nonempty)
        for j in graph.iter_bits(nonempty & ~rows[i] & graph.above(i))
        if graph.find_clique_rows(rows, r - 2, rows[i] & rows[j] & nonempty) is not None
    )
    return PartClassification(within=within, cross=cross, r=r)


def predicted_counts(bp: BlowupPattern, r: int) -> Tuple[int, int]:
    """Closed-form (edge count, K_r-saturating count) of a blow-up.

    Valid whenever the blow-up is K_r-free.
    """
    sizes = bp.sizes
    edges = sum(sizes[i] * sizes[j] for i, j in bp.pattern.edges())
    parts = classify_parts(bp.pattern, bp.nonempty, r)
    saturating = sum(sizes[i] * (sizes[i] - 1) // 2 for i in parts.within)
    saturating += sum(sizes[i] * sizes[j] for i, j in parts.cross)
    return edges, saturating


def _units_of_66(n: int) -> int:
    if n <= 0 or n % 66:
        logger.error(f"Rejecting construction size n={n}")
        raise PreconditionError("n must be divisible by 66")
    return n // 66


def part_sizes_H(n: int) -> Tuple[int, ...]:
    """|V1|..|V5| of H: 16m, 4m+1, 16m, 15m, 15m-1 with m = n/66."""
    m = _units_of_66(n)
    return (16 * m, 4 * m + 1, 16 * m, 15 * m, 15 * m - 1)


def part_sizes_Hprime(n: int) -> Tuple[int, ...]:
    """|V1|..|V5| of H': 16m, 4m, 16m, 15m, 15m with m = n/66.

    These are the only sizes consistent with n vertices and n^2/4 edges.
    """
    m = _units_of_66(n)
    return (16 * m, 4 * m, 16 * m, 15 * m, 15 * m)


def construct_H(n: int) -> Graph:
    """K4-free graph with n^2/4 + n/66 edges and 2n^2/33 - 7n/33 saturating pairs."""
    return blowup(BlowupPattern(c5_with_chord(), part_sizes_H(n)))


def construct_Hprime(n: int) -> Graph:
    """K4-free graph with n^2/4 edges, a triangle and 2n^2/33 - 3n/11 saturating pairs."""
    return blowup(BlowupPattern(c5_with_chord(), part_sizes_Hprime(n)))


def construct_H_minus(n: int, k: int) -> Graph:
    """H(n) without its k lexicographically first V4-V5 edges.

    V4-V5 edges lie in no K4 witness of a saturating pair, so the count of
    saturating pairs stays 2n^2/33 - 7n/33 while the edge count drops by k.
    """
    m = _units_of_66(n)
    if not 0 <= k <= m - 1:
        logger.error(f"Cannot remove {k} edges from H({n})")
        raise PreconditionError(f"k must lie in 0..{m - 1} for n={n}, got {k}")
    bp = BlowupPattern(c5_with_chord(), part_sizes_H(n))
    h = blowup(bp)
    masks = bp.part_masks()
    removed = 0
    for u in graph.iter_bits(masks[3]):
        for v in graph.iter_bits(masks[4]):
            if removed == k:
                return h
            h = h.remove_edge(u, v)
            removed += 1
    return h


def h_minus_series(n: int) -> List[Tuple[int, int, int]]:
    """(k, edges, saturating) of H_minus(n, k) for every admissible k.

    Each row realises e = n^2/4 + t with t = n/66 - k and an unchanged count.
    """
    m = _units_of_66(n)
    f = 2 * n * n // 33 - 7 * n // 33
    return [(k, n * n // 4 + m - k, f) for k in range(m)]


def bollobas_F(n: int) -> Graph:
    """Two adjacent hubs joined to an independent set of n - 2 vertices."""
    if n < 4:
        raise PreconditionError(f"bollobasF needs n >= 4, got {n}")
    edges = [(0, 1)] + [(hub, v) for hub in (0, 1) for v in range(2, n)]
    return Graph.from_edges(n, edges)


def turan_bipartite(n: int) -> Graph:
    """Complete bipartite graph with parts of sizes ceil(n/2) and floor(n/2)."""
    if n < 1:
        raise PreconditionError(f"turan2 needs n >= 1, got {n}")
    return blowup(BlowupPattern(single_edge(), ((n + 1) // 2, n // 2)))


def join_pattern_r(r: int) -> Graph:
    """A clique of r - 4 apex vertices joined to every vertex of C5 with a chord.

    Apexes come first, so C5 vertex v_i is vertex r - 5 + i.
    """
    if r < 4:
        raise PreconditionError(f"join pattern needs r >= 4, got {r}")
    apexes = r - 4
    edges = [(a, b) for a in range(apexes) for b in range(a + 1, apexes + 5)]
    edges += [(apexes + u, apexes + v) for u, v in C5_CHORD_EDGES]
    return Graph.from_edges(apexes + 5, edges)


def _construct_H_minus(n: Optional[int], k: Optional[int], r: Optional[int]) -> Graph:
    return construct_H_minus(n, k or 0)


_CONSTRUCTION_TABLE: Dict[str, Callable[..., Graph]] = {
    "H": lambda n, k, r: construct_H(n),
    "Hprime": lambda n, k, r: construct_Hprime(n),
    "Hminus": _construct_H_minus,
    "bollobasF": lambda n, k, r: bollobas_F(n),
    "turan2": lambda n, k, r: turan_bipartite(n),
    "joinpattern": lambda n, k, r: join_pattern_r(r if r is not None else 4),
}

CONSTRUCTION_NAMES = tuple(_CONSTRUCTION_TABLE)


def construct(
    name: str, n: Optional[int] = None, k: Optional[int] = None, r: Optional[int] = None
) -> Graph:
    """Build a named construction.

    Args:
        name: one of CONSTRUCTION_NAMES.
        n: vertex count (all but joinpattern).
        k: removed edges (Hminus only).
        r: clique order (joinpattern only).
    """
    fn = _CONSTRUCTION_TABLE.get(name)
    if fn is None:
        msg = f"Unknown construction '{name}'"
        logger.error(msg)
        raise PreconditionError(msg)
    if name != "joinpattern" and n is None:
        raise PreconditionError(f"construction {name} needs n")
    g = fn(n, k, r)
    logger.info(f"Constructed {name}: {g}")
    return g
