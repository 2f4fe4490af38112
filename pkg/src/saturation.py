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

"""Decide and count K_r-saturating non-edges.

A non-edge uv of a K_r-free graph is K_r-saturating when adding it creates a
K_r, i.e. when N(u) & N(v) contains a clique on r - 2 vertices. Counting is
done on the twin quotient: every pair of vertices taken from the same two
classes gets the same verdict.
"""

import csv
import dataclasses
import logging
from multiprocessing import Pool
from typing import Dict, Iterator, List, Optional, Sequence, TextIO, Tuple

import config
import graph
from errors import CliqueFoundError, PreconditionError
from graph import Edge, Graph

logger = logging.getLogger(__name__)

CSV_HEADER = ("u", "v", "saturating")


@dataclasses.dataclass(frozen=True)
class SaturationReport:
    """Result of counting K_r-saturating pairs.

    For r = 4, `count` is f(G).
    """

    r: int
    count: int
    total_nonedges: int
    classified: Optional[List[Tuple[int, int, bool]]] = None


def ensure_clique_free(g: Graph, r: int) -> None:
    """Raise CliqueFoundError with a witness if g contains K_r."""
    if r < 2:
        raise PreconditionError(f"clique order must be at least 2, got {r}")
    witness = graph.clique_witness(g, r)
    if witness is not None:
        logger.error(f"Graph {g} is not K{r}-free, witness {witness}")
        raise CliqueFoundError(r, witness)


def _pair_verdict(rows: Sequence[int], r: int, a: int, b: int) -> bool:
    """Whether quotient classes a and b (possibly equal) give saturating pairs."""
    return graph.find_clique_rows(rows, r - 2, rows[a] & rows[b]) is not None


def _count_block(rows: Sequence[int], sizes: Sequence[int], r: int, block: Sequence[int]) -> int:
    """Count saturating pairs whose lower quotient class lies in `block`."""
    total = 0
    k = len(rows)
    for a in block:
        if sizes[a] > 1 and _pair_verdict(rows, r, a, a):
            total += sizes[a] * (sizes[a] - 1) // 2
        # classes b > a that are not adjacent to a
        for b in graph.iter_bits(~rows[a] & ((1 << k) - 1) & graph.above(a)):
            if _pair_verdict(rows, r, a, b):
                total += sizes[a] * sizes[b]
    return total


def _blocks(k: int, workers: int) -> List[List[int]]:
    # interleaved so that every block sees dense and sparse classes alike
    return [list(range(start, k, workers)) for start in range(min(workers, k))]


def count_saturating(g: Graph, r: int, threads: Optional[int] = None) -> SaturationReport:
    """Count the K_r-saturating non-edges of a K_r-free graph.

    Args:
        g: the graph, checked to be K_r-free first.
        r: clique order.
        threads: worker processes; defaults to the `threads` setting.

    Returns:
        SaturationReport without per-pair classification.

    Raises:
        CliqueFoundError: g contains K_r.
    """
    ensure_clique_free(g, r)
    workers = threads or config.get_settings().threads
    q = g.quotient
    rows, sizes = q.graph.rows, q.sizes
    blocks = _blocks(len(rows), workers)

    if workers > 1 and len(blocks) > 1:
        logger.debug(f"Counting K{r}-saturating pairs of {g} with {len(blocks)} workers")
        with Pool(processes=len(blocks)) as pool:
            partial = pool.starmap(_count_block, [(rows, sizes, r, b) for b in blocks])
    else:
        partial = [_count_block(rows, sizes, r, b) for b in blocks]

    count = sum(partial)
    logger.info(f"{g} has {count} K{r}-saturating pairs over {len(rows)} twin classes")
    return SaturationReport(r=r, count=count, total_nonedges=g.nonedge_count)


class _VerdictCache:
    """Memoised class-pair verdicts on the twin quotient of one graph."""

    def __init__(self, g: Graph, r: int):
        self.quotient = g.quotient
        self.r = r
        self._cache: Dict[Tuple[int, int], bool] = {}

    def __call__(self, u: int, v: int) -> bool:
        a, b = sorted((self.quotient.class_of[u], self.quotient.class_of[v]))
        verdict = self._cache.get((a, b))
        if verdict is None:
            verdict = _pair_verdict(self.quotient.graph.rows, self.r, a, b)
            self._cache[(a, b)] = verdict
        return verdict


def is_saturating_pair(g: Graph, u: int, v: int, r: int) -> bool:
    """Return True iff adding uv to the K_r-free graph g creates a K_r."""
    if u == v:
        raise PreconditionError(f"pair ({u},{v}) is a loop")
    if not (0 <= u < g.n and 0 <= v < g.n):
        raise PreconditionError(f"pair ({u},{v}) out of range for n={g.n}")
    if g.has_edge(u, v):
        raise PreconditionError(f"({u},{v}) is already an edge")
    ensure_clique_free(g, r)
    return _VerdictCache(g, r)(u, v)


def saturating_pairs(g: Graph, r: int) -> Iterator[Edge]:
    """Yield the K_r-saturating pairs (u, v), u < v, in lexicographic order."""
    ensure_clique_free(g, r)
    verdict = _VerdictCache(g, r)
    for u, v in g.nonedges():
        if verdict(u, v):
            yield u, v


def classify_nonedges(g: Graph, r: int) -> SaturationReport:
    """Count as count_saturating, also listing a verdict for every non-edge."""
    ensure_clique_free(g, r)
    verdict = _VerdictCache(g, r)
    classified = [(u, v, verdict(u, v)) for u, v in g.nonedges()]
    count = sum(1 for _, _, sat in classified if sat)
    return SaturationReport(
        r=r, count=count, total_nonedges=len(classified), classified=classified
    )


def write_csv(report: SaturationReport, stream: TextIO) -> None:
    """Write the per-pair classification as CSV rows "u,v,saturating" (1 or 0)."""
    if report.classified is None:
        raise PreconditionError("report carries no per-pair classification")
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for u, v, sat in report.classified:
        writer.writerow((u, v, int(sat)))
