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

"""Tests for the exhaustive small-n oracle."""

import random
import unittest
from collections import Counter

import networkx as nx

import constructions
import graph
import oracle
import saturation
from errors import PreconditionError
from graph import Graph

from . import utils


class TestCanonicalForm(unittest.TestCase):
    def test_invariant_under_relabelling(self):
        rng = random.Random(13)
        for _ in range(80):
            g = utils.random_k4free(rng, rng.randint(1, 9), rng.random())
            h = utils.permuted(g, rng)
            self.assertEqual(oracle.canonical_form(g), oracle.canonical_form(h))

    def test_separates_non_isomorphic_graphs(self):
        rng = random.Random(17)
        for _ in range(150):
            n = rng.randint(4, 7)
            p = rng.choice((0.3, 0.5))
            g, h = utils.random_k4free(rng, n, p), utils.random_k4free(rng, n, p)
            same = nx.is_isomorphic(utils.to_networkx(g), utils.to_networkx(h))
            self.assertEqual(oracle.canonical_form(g) == oracle.canonical_form(h), same)

    def test_labelling_order(self):
        g = constructions.bollobas_F(6)
        key, order = oracle.canonical_labelling(g)
        self.assertEqual(sorted(order), list(range(6)))
        self.assertEqual(oracle.canonical_form(g.relabel(order)), key)

    def test_order_cap(self):
        with self.assertRaises(PreconditionError):
            oracle.canonical_form(Graph.empty(10))
        with self.assertRaises(PreconditionError):
            list(oracle.enumerate_k4free(10, 3))
        with self.assertRaises(PreconditionError):
            list(oracle.enumerate_k4free(4, -1))


class TestEnumeration(unittest.TestCase):
    def test_all_graph_counts(self):
        for n, expected in ((1, 1), (2, 2), (3, 4), (4, 11), (5, 34)):
            total = sum(
                len(list(oracle.enumerate_k4free(n, e, forbid_k4=False)))
                for e in range(n * (n - 1) // 2 + 1)
            )
            self.assertEqual(total, expected)

    def test_matches_graph_atlas(self):
        expected = Counter()
        for nxg in nx.graph_atlas_g():
            n = nxg.number_of_nodes()
            if 1 <= n <= 6 and max(len(c) for c in nx.find_cliques(nxg)) < 4:
                expected[(n, nxg.number_of_edges())] += 1
        for n in range(1, 7):
            sweep = oracle.f_sweep(n)
            for e, record in sweep.items():
                self.assertEqual(record.graphs_enumerated, expected[(n, e)], (n, e))
            self.assertEqual(set(sweep), {e for m, e in expected if m == n})

    def test_matches_naive_enumeration(self):
        cases = [(n, e) for n in (4, 5) for e in range(n * (n - 1) // 2 + 1)]
        cases += [(6, 6), (6, 9)]
        for n, e in cases:
            fast = sorted(oracle.canonical_form(g) for g in oracle.enumerate_k4free(n, e))
            naive = sorted(oracle.canonical_form(g) for g in oracle.enumerate_naive(n, e))
            self.assertEqual(fast, naive, (n, e))
        with self.assertRaises(PreconditionError):
            list(oracle.enumerate_naive(7, 3))

    def test_saturation_on_every_class(self):
        for n in (5, 6):
            for e in range(n * (n - 1) // 2 + 1):
                for g in oracle.enumerate_k4free(n, e):
                    self.assertEqual(
                        saturation.count_saturating(g, 4).count,
                        utils.naive_saturating_count(g, 4),
                    )

    def test_subtrees_partition_the_classes(self):
        roots = oracle.subtree_roots(6, 2)
        self.assertEqual(len(roots), 2)
        for e in (5, 8):
            total = sum(len(list(oracle.enumerate_k4free(6, e, root=root))) for root in roots)
            self.assertEqual(total, len(list(oracle.enumerate_k4free(6, e))))


class TestExtremalFunction(unittest.TestCase):
    def test_small_values(self):
        record = oracle.f_table(4, 5)
        self.assertEqual(record.f_min, 1)
        self.assertEqual(record.graphs_enumerated, 1)
        self.assertEqual(record.witness.edge_count, 5)
        self.assertEqual(oracle.f_table(5, 7).f_min, 1)
        self.assertEqual(oracle.f_table(5, 8).f_min, 2)
        self.assertEqual(oracle.f_table(6, 10).f_min, 1)

    def test_bipartite_threshold(self):
        for n in range(4, 8):
            record = oracle.f_table(n, n * n // 4)
            self.assertEqual(record.f_min, 0)
            self.assertEqual(
                oracle.canonical_form(record.witness),
                oracle.canonical_form(constructions.turan_bipartite(n)),
            )

    def test_zero_below_threshold(self):
        sweep = oracle.f_sweep(6)
        for e, record in sweep.items():
            if e <= 9:
                self.assertEqual(record.f_min, 0, e)
            self.assertTrue(graph.max_clique_at_most(record.witness, 4))
            self.assertEqual(record.witness.edge_count, e)
        self.assertEqual(max(sweep), 12)

    def test_sweep_agrees_with_table(self):
        for e, record in oracle.f_sweep(5).items():
            self.assertEqual(record.f_min, oracle.f_table(5, e).f_min)

    def test_no_k4free_graph(self):
        with self.assertRaises(PreconditionError):
            oracle.f_table(4, 6)
