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

"""Triangle packings and the counting audits built on them.

Given a K4-free graph G with floor(n^2/4) edges and a maximum family T of
vertex-disjoint triangles, G' = G - V(T) is triangle-free and the
saturating pairs split into those touching V(T) (r1) and those inside G'
(r2). The audits below compare measured quantities with the lower bounds
that hold for every such graph, in exact rational arithmetic.
"""

import dataclasses
import logging
import time
from collections import Counter
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import config
import graph
import saturation
from errors import (
    CliqueFoundError,
    InvalidPackingError,
    PackingBudgetExceededError,
    PreconditionError,
)
from graph import Graph, VertexSet

logger = logging.getLogger(__name__)

Triangle = Tuple[int, int, int]

# Number of search nodes between two wall-clock checks.
_CLOCK_INTERVAL = 256


@dataclasses.dataclass(frozen=True)
class TrianglePacking:
    """Vertex-disjoint triangles; `exact` is True iff proven maximum."""

    triangles: Tuple[Triangle, ...]
    exact: bool

    def __len__(self) -> int:
        return len(self.triangles)

    @property
    def vertices(self) -> VertexSet:
        """V(T), the packed vertices."""
        return graph.mask_of(v for tri in self.triangles for v in tri)


@dataclasses.dataclass(frozen=True)
class DecompositionReport:
    n: int
    e: int
    tn: int
    t: Fraction
    e_T: int
    e_Gprime: int
    e_cross: int
    t_i: Tuple[int, ...]
    r1_count: int
    r2_count: int
    gprime_triangle_free: bool
    packing: TrianglePacking

    @property
    def f(self) -> int:
        return self.r1_count + self.r2_count


@dataclasses.dataclass(frozen=True)
class TriangleAnalysis:
    """Neighbourhood statistics of one packed triangle T = (x, y, z) inside G'.

    a, b, c and joint_book_k are None when N2 is empty.
    """

    T: Triangle
    N0: VertexSet
    N1: VertexSet
    N2: VertexSet
    p0: Fraction
    p1: Fraction
    p2: Fraction
    A: VertexSet
    B: VertexSet
    C: VertexSet
    a: Optional[Fraction]
    b: Optional[Fraction]
    c: Optional[Fraction]
    Nx: VertexSet
    Ny: VertexSet
    Nz: VertexSet
    joint_book_k: Optional[int]

    @property
    def edges_to_gprime(self) -> int:
        """e(T, G')."""
        return self.Nx.bit_count() + self.Ny.bit_count() + self.Nz.bit_count()


@dataclasses.dataclass(frozen=True)
class LemmaAudit:
    """One inequality left >= right; `required` is False where it is only reported."""

    name: str
    left: Fraction
    right: Fraction
    required: bool = True

    @property
    def slack(self) -> Fraction:
        return self.left - self.right

    @property
    def holds(self) -> bool:
        return self.slack >= 0


# Packing


def _greedy(masks: Sequence[int], order: Sequence[int]) -> List[int]:
    used, chosen = 0, []
    for i in order:
        if not masks[i] & used:
            chosen.append(i)
            used |= masks[i]
    return chosen


def _transversal_size(triples: Sequence[Triangle], available: Sequence[int], cap: int) -> int:
    """Size of a greedy vertex cover of the triangles, stopping once it exceeds cap."""
    remaining = list(available)
    picks = 0
    while remaining and picks <= cap:
        counts = Counter(v for i in remaining for v in triples[i])
        v = min(counts, key=lambda w: (-counts[w], w))
        remaining = [i for i in remaining if v not in triples[i]]
        picks += 1
    return picks


class _PackingSearch:
    """Branch and bound on the lowest vertex still covered by a triangle.

    Each node first tries that vertex's triangles in lexicographic order and
    then discards the vertex, so the first optimum found is the
    lexicographically least one.
    """

    def __init__(self, triples: List[Triangle], masks: List[int], budget: float):
        self.triples = triples
        self.masks = masks
        self.started = time.monotonic()
        self.deadline = self.started + budget
        self.nodes = 0
        self.best: List[int] = []
        self.best_size = -1

    def run(self, floor: int) -> List[int]:
        self.best_size = floor - 1
        self._search(list(range(len(self.triples))), [])
        logger.debug(
            f"Packing search finished: {self.best_size} triangles, {self.nodes} nodes, "
            f"{time.monotonic() - self.started:.2f}s"
        )
        return self.best

    def _bound(self, available: List[int], need: int) -> int:
        covered = 0
        for i in available:
            covered |= self.masks[i]
        bound = covered.bit_count() // 3
        if bound < need:
            return bound
        return min(bound, _transversal_size(self.triples, available, need))

    def _search(self, available: List[int], chosen: List[int]) -> None:
        self.nodes += 1
        if self.nodes % _CLOCK_INTERVAL == 0 and time.monotonic() > self.deadline:
            logger.error(f"Packing search gave up after {self.nodes} nodes")
            raise PackingBudgetExceededError(
                f"exact triangle packing exceeded its time budget after {self.nodes} nodes; "
                "raise packing-time-budget or lower exact-limit"
            )
        if not available:
            if len(chosen) > self.best_size:
                self.best_size = len(chosen)
                self.best = list(chosen)
            return
        need = self.best_size - len(chosen) + 1
        if self._bound(available, need) < need:
            return

        covered = 0
        for i in available:
            covered |= self.masks[i]
        v = graph.lowest(covered)
        for i in available:
            if self.masks[i] >> v & 1:
                chosen.append(i)
                self._search([j for j in available if not self.masks[j] & self.masks[i]], chosen)
                chosen.pop()
        self._search([j for j in available if not self.masks[j] >> v & 1], chosen)


def _swap_improve(masks: Sequence[int], chosen: List[int], count: int) -> List[int]:
    """Replace one packed triangle by two disjoint ones until no swap helps."""
    improved = True
    while improved:
        improved = False
        used = 0
        for i in chosen:
            used |= masks[i]
        for i in chosen:
            free_mask = ~(used & ~masks[i])
            candidates = [j for j in range(count) if masks[j] & free_mask == masks[j]]
            pair = next(
                (
                    (j, k)
                    for a, j in enumerate(candidates)
                    for k in candidates[a + 1 :]
                    if not masks[j] & masks[k]
                ),
                None,
            )
            if pair is not None:
                chosen = sorted([c for c in chosen if c != i] + list(pair))
                improved = True
                break
    return chosen


def max_triangle_packing(
    g: Graph, exact_limit: Optional[int] = None, time_budget: Optional[float] = None
) -> TrianglePacking:
    """Return a largest family of vertex-disjoint triangles.

    Args:
        g: the graph.
        exact_limit: graphs with at most this many vertices are solved exactly;
            defaults to the `exact-limit` setting.
        time_budget: seconds for the exact search; defaults to `packing-time-budget`.

    Returns:
        TrianglePacking, lexicographically least among optima when solved exactly.
        A heuristic packing is still marked exact when it meets the cover bound.

    Raises:
        PackingBudgetExceededError: the exact search ran out of time.
    """
    settings = config.get_settings()
    limit = settings.exact_limit if exact_limit is None else exact_limit
    budget = settings.packing_time_budget if time_budget is None else time_budget

    triples = list(graph.triangles(g))
    masks = [graph.mask_of(tri) for tri in triples]
    order = list(range(len(triples)))
    greedy = _greedy(masks, order)

    if g.n <= limit:
        search = _PackingSearch(triples, masks, budget)
        best = search.run(len(greedy))
        return TrianglePacking(tuple(triples[i] for i in best), exact=True)

    logger.warning(f"{g} exceeds exact-limit {limit}, using greedy packing with swaps")
    chosen = _swap_improve(masks, greedy, len(triples))
    bound = min(
        graph.mask_of(v for tri in triples for v in tri).bit_count() // 3,
        _transversal_size(triples, order, len(chosen)),
    )
    proven = len(chosen) >= bound
    if proven:
        logger.info(f"Heuristic packing of {len(chosen)} triangles meets the cover bound")
    return TrianglePacking(tuple(sorted(triples[i] for i in chosen)), exact=proven)


# Decomposition


def _validate_packing(g: Graph, packing: TrianglePacking) -> None:
    used = 0
    for tri in packing.triangles:
        if len(set(tri)) != 3 or not all(0 <= v < g.n for v in tri):
            raise InvalidPackingError(f"{tri} is not a triple of distinct vertices of the graph")
        x, y, z = tri
        if not (g.has_edge(x, y) and g.has_edge(y, z) and g.has_edge(x, z)):
            raise InvalidPackingError(f"{tri} is not a triangle of the graph")
        mask = graph.mask_of(tri)
        if mask & used:
            raise InvalidPackingError(f"{tri} shares a vertex with an earlier triangle")
        used |= mask


def decompose(g: Graph, packing: TrianglePacking) -> DecompositionReport:
    """Split G around a triangle packing and count every piece directly."""
    _validate_packing(g, packing)
    packed = packing.vertices
    rest = g.full_mask & ~packed
    tn = len(packing)

    t_i = []
    remaining = g.full_mask
    for tri in packing.triangles:
        tri_mask = graph.mask_of(tri)
        remaining &= ~tri_mask
        t_i.append(g.edges_between(tri_mask, remaining))

    r1 = r2 = 0
    for u, v in saturation.saturating_pairs(g, 4):
        if (packed >> u | packed >> v) & 1:
            r1 += 1
        else:
            r2 += 1

    gprime_triangle_free = next(graph.triangles(g, within=rest), None) is None
    report = DecompositionReport(
        n=g.n,
        e=g.edge_count,
        tn=tn,
        t=Fraction(tn, g.n) if g.n else Fraction(0),
        e_T=g.edges_within(packed),
        e_Gprime=g.edges_within(rest),
        e_cross=g.edges_between(packed, rest),
        t_i=tuple(t_i),
        r1_count=r1,
        r2_count=r2,
        gprime_triangle_free=gprime_triangle_free,
        packing=packing,
    )
    logger.debug(f"Decomposed {g}: tn={tn} e(G')={report.e_Gprime} r1={r1} r2={r2}")
    return report


def analyze_triangle(g: Graph, packing: TrianglePacking, which: int) -> TriangleAnalysis:
    """Classify the vertices of G' by how many neighbours they have on triangle `which`."""
    if not 0 <= which < len(packing):
        raise PreconditionError(f"triangle index {which} out of range for {len(packing)}")
    _validate_packing(g, packing)
    x, y, z = packing.triangles[which]
    rest = g.full_mask & ~packing.vertices
    nx, ny, nz = g.rows[x] & rest, g.rows[y] & rest, g.rows[z] & rest

    n3 = nx & ny & nz
    if n3:
        w = graph.lowest(n3)
        logger.error(f"Vertex {w} sees all of triangle {(x, y, z)}")
        raise CliqueFoundError(4, sorted((x, y, z, w)))

    a_set, b_set, c_set = nx & ny, ny & nz, nx & nz
    n2 = a_set | b_set | c_set
    n1 = (nx | ny | nz) & ~n2
    n0 = rest & ~(nx | ny | nz)
    size2 = n2.bit_count()

    def share(part: VertexSet) -> Optional[Fraction]:
        return Fraction(part.bit_count(), size2) if size2 else None

    return TriangleAnalysis(
        T=(x, y, z),
        N0=n0,
        N1=n1,
        N2=n2,
        p0=Fraction(n0.bit_count(), g.n),
        p1=Fraction(n1.bit_count(), g.n),
        p2=Fraction(size2, g.n),
        A=a_set,
        B=b_set,
        C=c_set,
        a=share(a_set),
        b=share(b_set),
        c=share(c_set),
        Nx=nx,
        Ny=ny,
        Nz=nz,
        joint_book_k=sum(1 for s in (a_set, b_set, c_set) if s) if size2 else None,
    )


def select_best_triangle(g: Graph, packing: TrianglePacking) -> int:
    """Index of the packed triangle sending the most edges to G' (ties: smallest index)."""
    if not len(packing):
        raise PreconditionError("packing is empty")
    rest = g.full_mask & ~packing.vertices
    counts = [g.edges_between(graph.mask_of(tri), rest) for tri in packing.triangles]
    return counts.index(max(counts))


def reduce_preserving_triangle(g: Graph) -> Graph:
    """Remove the lexicographically first edge whose removal leaves a triangle."""
    total = graph.triangle_count(g)
    if not total:
        raise PreconditionError("graph contains no triangle")
    for u, v in g.edges():
        if total - (g.rows[u] & g.rows[v]).bit_count() > 0:
            logger.info(f"Removing edge ({u},{v}) from {g}")
            return g.remove_edge(u, v)
    logger.error(f"Every edge of {g} lies on all of its triangles")
    raise PreconditionError("no edge can be removed while keeping a triangle")


# Audits


def _pairs(size: int) -> int:
    return size * (size - 1) // 2


def audit_lemmas(
    g: Graph, packing: Optional[TrianglePacking] = None, exact_limit: Optional[int] = None
) -> List[LemmaAudit]:
    """Audit the counting bounds on a K4-free graph with floor(n^2/4) edges and a triangle.

    Where a bound is usually written with e(G) = n^2/4, the actual e(G) is
    used, so every right-hand side is a valid bound for odd n as well.

    Args:
        g: the graph.
        packing: a maximum packing; computed when omitted.
        exact_limit: forwarded to max_triangle_packing.

    Raises:
        CliqueFoundError: g contains K4.
        PreconditionError: wrong edge count, no triangle, or a packing not proven maximum.
    """
    n, e = g.n, g.edge_count
    saturation.ensure_clique_free(g, 4)
    if e != n * n // 4:
        logger.error(f"Audit refused: e = {e}, floor(n^2/4) = {n * n // 4}")
        raise PreconditionError(f"e = {e} != floor(n^2/4) = {n * n // 4}")
    if not graph.contains_triangle(g):
        logger.error(f"Audit refused: {g} contains no triangle")
        raise PreconditionError("graph contains no triangle")
    if packing is None:
        packing = max_triangle_packing(g, exact_limit=exact_limit)
    if not packing.exact:
        logger.error("Audit refused: packing is not proven maximum")
        raise PreconditionError(
            "audit needs a maximum triangle packing; raise exact-limit to solve exactly"
        )

    report = decompose(g, packing)
    best = select_best_triangle(g, packing)
    tri = analyze_triangle(g, packing, best)

    tn = report.tn
    t = report.t
    rest_size = n - 3 * tn
    mantel = Fraction(rest_size * rest_size, 4)
    audits = [
        LemmaAudit(
            "L1",
            Fraction(report.r1_count),
            Fraction(e - report.e_Gprime - 3 * tn - (tn * n - Fraction(3 * tn * (tn + 1), 2))),
        ),
        LemmaAudit(
            "L1-closed",
            Fraction(report.r1_count),
            e - mantel - t * n * n + Fraction(3 * tn * (tn + 1), 2) - 3 * tn,
        ),
    ]

    bound = (e - mantel - 3 * t * t * n * n) / tn
    audits.append(LemmaAudit("L2i", Fraction(tri.edges_to_gprime), bound))
    audits.append(LemmaAudit("L2ii", tri.p2, bound / n - (1 - 3 * t) + tri.p0))

    if tri.joint_book_k == 3:
        complement_edges = _pairs(rest_size) - report.e_Gprime
        audits.append(
            LemmaAudit(
                "L3",
                Fraction(report.r2_count),
                max(bound, Fraction(0)) ** 2 / 6 - complement_edges - (1 - 3 * t) * n,
            )
        )

    sizes = (tri.A.bit_count(), tri.B.bit_count(), tri.C.bit_count())
    audits.append(LemmaAudit("Eq1", Fraction(report.r2_count), Fraction(sum(map(_pairs, sizes)))))
    if tri.joint_book_k != 3:
        audits.append(
            LemmaAudit(
                "Eq1-balanced",
                Fraction(report.r2_count),
                tri.p2 * tri.p2 * n * n / 4 - tri.p2 * n / 2,
            )
        )

    audits.append(
        LemmaAudit(
            "Thm2",
            Fraction(report.f),
            Fraction(2 * n * n, 33) - Fraction(3 * n, 11),
            required=n >= 73,
        )
    )

    for audit in audits:
        if not audit.holds:
            level = logging.ERROR if audit.required else logging.INFO
            logger.log(level, f"Audit {audit.name} fails on {g}: {audit.left} < {audit.right}")
    return audits


def theorem1_chain(
    g: Graph, exact_limit: Optional[int] = None
) -> Tuple[Graph, List[LemmaAudit]]:
    """Drop one edge from a K4-free graph with floor(n^2/4) + 1 edges and audit the result."""
    n = g.n
    saturation.ensure_clique_free(g, 4)
    if g.edge_count != n * n // 4 + 1:
        raise PreconditionError(f"e = {g.edge_count} != floor(n^2/4) + 1 = {n * n // 4 + 1}")
    reduced = reduce_preserving_triangle(g)
    return reduced, audit_lemmas(reduced, exact_limit=exact_limit)
