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

"""End-to-end tests of the satlab command line."""

import logging

import pytest
import utils

logger = logging.getLogger(__name__)


@pytest.fixture(scope="module")
def h66() -> str:
    proc = utils.satlab("construct", "H", "--n", "66")
    assert proc.returncode == 0, proc.stderr
    return proc.stdout


def test_construct_and_count(h66):
    """H(66) has 250 K4-saturating pairs."""
    proc = utils.satlab("count", stdin=h66)
    assert proc.returncode == 0, proc.stderr
    assert utils.json_lines(proc.stdout) == [{"r": 4, "count": 250, "total_nonedges": 1055}]


def test_parallel_count_matches(h66):
    proc = utils.satlab("--threads", "2", "count", stdin=h66)
    assert proc.returncode == 0, proc.stderr
    assert utils.json_lines(proc.stdout)[0]["count"] == 250


def test_audit_hprime():
    hprime = utils.satlab("construct", "Hprime", "--n", "66").stdout
    proc = utils.satlab("audit", stdin=hprime)
    assert proc.returncode == 0, proc.stderr
    payload = utils.json_lines(proc.stdout)[0]
    assert payload["e"] == 1089
    assert payload["r1"] + payload["r2"] == 246
    assert all(row["holds"] for row in payload["audits"] if row["required"])


def test_reduce_audit(h66):
    """Removing one edge of H(66) leaves a graph every required audit accepts."""
    proc = utils.satlab("reduce", "--audit", stdin=h66)
    assert proc.returncode == 0, proc.stderr
    payload = utils.json_lines(proc.stdout)[0]
    assert payload["e"] == 1089
    assert all(row["holds"] for row in payload["audits"] if row["required"])


def test_exit_codes():
    assert utils.satlab("count", stdin="C~\n").returncode == 1
    assert utils.satlab("count", stdin="D h\n").returncode == 2
    assert utils.satlab("oracle", "--n", "12", "--e", "3").returncode == 2
