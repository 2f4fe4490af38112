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

"""Tests for the satlab command line."""

import io
import json
import os
import tempfile
import unittest
from unittest import mock

import cli
import config
import constructions
import graph
import reports


class TestCli(unittest.TestCase):
    def setUp(self):
        env = mock.patch.dict(os.environ, {}, clear=False)
        env.start()
        self.addCleanup(env.stop)
        os.environ.pop(config.CONFIG_ENV, None)
        os.environ.pop(config.THREADS_ENV, None)
        self.addCleanup(config.reset)

    def run_cli(self, argv, stdin=""):
        out, err = io.StringIO(), io.StringIO()
        with mock.patch("sys.stdin", io.StringIO(stdin)):
            code = cli.run(argv, out=out, err=err)
        return code, out.getvalue(), err.getvalue()

    def json_lines(self, text):
        return [json.loads(line) for line in text.splitlines()]

    def test_parser_follows_actions(self):
        actions = cli.load_actions()
        self.assertEqual(
            set(actions),
            {"count", "classify", "construct", "audit", "oracle", "optimize", "reduce"},
        )
        self.assertEqual(set(actions), set(cli._get_command_jump_table()))

    def test_construct_then_count(self):
        code, out, _ = self.run_cli(["construct", "H", "--n", "66"])
        self.assertEqual(code, 0)
        self.assertEqual(graph.from_graph6(out.strip()), constructions.construct_H(66))

        stdin = out + graph.to_graph6(constructions.construct_Hprime(66)) + "\n"
        code, out, _ = self.run_cli(["count", "--r", "4"], stdin=stdin)
        self.assertEqual(code, 0)
        payloads = self.json_lines(out)
        self.assertEqual([p["count"] for p in payloads], [250, 246])
        for payload in payloads:
            reports.validate_payload("count", payload)
        self.assertEqual(payloads[0], {"r": 4, "count": 250, "total_nonedges": 2145 - 1090})

    def test_count_reads_file(self):
        with tempfile.NamedTemporaryFile("w", suffix=".g6", delete=False) as handle:
            handle.write("Dhc\n")
        self.addCleanup(os.unlink, handle.name)
        code, out, _ = self.run_cli(["count", "--input", handle.name, "--r", "3"])
        self.assertEqual(code, 0)
        self.assertEqual(self.json_lines(out)[0]["count"], 5)

    def test_classify(self):
        code, out, _ = self.run_cli(["classify", "--r", "3"], stdin="Bg\n")
        self.assertEqual(code, 0)
        self.assertEqual(out, "u,v,saturating\n0,2,1\n")

    def test_audit(self):
        stdin = graph.to_graph6(constructions.construct_Hprime(66)) + "\n"
        code, out, _ = self.run_cli(["audit"], stdin=stdin)
        self.assertEqual(code, 0)
        payload = self.json_lines(out)[0]
        reports.validate_payload("audit", payload)
        self.assertEqual(payload["t"], "4/66")
        self.assertEqual((payload["r1"], payload["r2"]), (114, 132))
        self.assertEqual({row["slack"] for row in payload["audits"]}, {"0"})
        self.assertEqual(payload["triangle"]["p2"], "4/11")

    def test_oracle(self):
        code, out, _ = self.run_cli(["oracle", "--n", "4", "--e", "5"])
        self.assertEqual(code, 0)
        payload = self.json_lines(out)[0]
        reports.validate_payload("oracle", payload)
        self.assertEqual(payload["f_min"], 1)
        self.assertEqual(payload["classes"], 1)

    def test_oracle_sweep_and_classes(self):
        code, out, _ = self.run_cli(["oracle", "--n", "4", "--sweep"])
        self.assertEqual(code, 0)
        self.assertEqual([p["e"] for p in self.json_lines(out)], [0, 1, 2, 3, 4, 5])

        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "classes.g6")
            code, out, _ = self.run_cli(["oracle", "--n", "5", "--e", "4", "--classes", path])
            self.assertEqual(code, 0)
            with open(path) as classes:
                lines = classes.read().splitlines()
        self.assertEqual(len(lines), self.json_lines(out)[0]["classes"])

    def test_optimize(self):
        argv = ["optimize", "--pattern", "edge", "--floor", "1/5", "--restarts", "2"]
        code, out, _ = self.run_cli(argv)
        self.assertEqual(code, 0)
        payload = self.json_lines(out)[0]
        reports.validate_payload("optimize", payload)
        self.assertEqual(payload["conjecture"], "2/33")
        self.assertEqual(payload["restarts"], 2)

    def test_reduce(self):
        stdin = graph.to_graph6(constructions.bollobas_F(5)) + "\n"
        code, out, _ = self.run_cli(["reduce"], stdin=stdin)
        self.assertEqual(code, 0)
        reduced = graph.from_graph6(out.strip())
        self.assertEqual(reduced.edge_count, 6)
        self.assertFalse(reduced.has_edge(0, 2))

    def test_precondition_errors_exit_1(self):
        code, _, err = self.run_cli(["construct", "H", "--n", "65"])
        self.assertEqual(code, 1)
        self.assertIn("error: n must be divisible by 66", err)
        code, _, err = self.run_cli(["count"], stdin="C~\n")
        self.assertEqual(code, 1)
        self.assertIn("graph contains K4", err)

    def test_parse_errors_exit_2(self):
        code, _, err = self.run_cli(["count"], stdin="D h\n")
        self.assertEqual(code, 2)
        self.assertIn("graph6 parse error at byte 1", err)
        for argv in (
            ["count", "--bogus"],
            ["frobnicate"],
            ["oracle", "--n", "10", "--e", "3"],
            ["oracle", "--n", "4"],
            ["optimize", "--floor", "a/b"],
            ["construct", "H", "--n", "abc"],
        ):
            code, _, _ = self.run_cli(argv)
            self.assertEqual(code, 2, argv)

    def test_threads_flag(self):
        with mock.patch.object(
            cli.saturation, "count_saturating", wraps=cli.saturation.count_saturating
        ) as count:
            code, out, _ = self.run_cli(["--threads", "2", "count"], stdin="Dhc\n")
        self.assertEqual(code, 0)
        self.assertEqual(count.call_args.kwargs["threads"], 2)
        # the flag only lasts for one run
        self.assertNotIn(config.THREADS_ENV, os.environ)
        self.assertEqual(config.get_settings().threads, 1)
