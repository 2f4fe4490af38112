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

"""Exceptions raised by satlab.

Library code raises these; only the CLI maps them to exit codes.
"""

from fractions import Fraction
from typing import Sequence


class SatlabError(Exception):
    """Base class for all satlab errors."""

    exit_code = 1


class PreconditionError(SatlabError):
    """An operation was called outside its documented preconditions."""

    exit_code = 1


class CliqueFoundError(PreconditionError):
    """The input graph contains a clique it was required to avoid."""

    def __init__(self, order: int, witness: Sequence[int]):
        self.order = order
        self.witness = tuple(witness)
        super().__init__(f"graph contains K{order}: vertices {list(self.witness)}")


class InvalidPackingError(PreconditionError):
    """A triangle packing is not valid for the graph it was paired with."""


class InfeasibleProgramError(PreconditionError):
    """No support of the pattern reaches the requested edge density."""

    def __init__(self, floor: Fraction, attainable: Fraction):
        self.floor = floor
        self.attainable = attainable
        super().__init__(
            f"edge density floor {floor} is infeasible; "
            f"maximum attainable edge density is {attainable}"
        )


class PackingBudgetExceededError(PreconditionError):
    """The exact packing solver ran out of time before proving optimality."""


class ParseError(SatlabError):
    """Malformed input text or command line."""

    exit_code = 2


class Graph6ParseError(ParseError):
    """A graph6 line could not be decoded."""

    def __init__(self, offset: int, reason: str):
        self.offset = offset
        self.reason = reason
        super().__init__(f"graph6 parse error at byte {offset}: {reason}")
