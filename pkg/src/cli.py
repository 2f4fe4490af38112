#!/usr/bin/env python3

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

"""satlab command line.

Subcommands and their parameters are declared in actions.yaml; parsed
parameters are validated against those declarations with jsonschema
before the command runs. Exit codes: 0 success, 1 precondition failure,
2 unparsable input or invalid flags.
"""

import argparse
import contextlib
import json
import logging
import sys
from fractions import Fraction
from pathlib import Path
from typing import Callable, Dict, Iterator, Optional, TextIO

import jsonschema
import yaml

import config
import constructions
import decomposition
import graph
import optimizer
import oracle
import reports
import saturation
from errors import ParseError, SatlabError
from graph import Graph

logger = logging.getLogger(__name__)

ACTIONS_PATH = Path(__file__).resolve().parent.parent / "actions.yaml"
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")

_PARAM_TYPES = {"integer": int, "number": float, "string": str}


def load_actions(path: Path = ACTIONS_PATH) -> dict:
    with open(path, "r") as actions_file:
        return yaml.safe_load(actions_file)


def _param_schema(spec: dict) -> dict:
    params = {
        name: {k: v for k, v in param.items() if k not in ("positional", "description")}
        for name, param in (spec.get("params") or {}).items()
    }
    return {
        "type": "object",
        "properties": params,
        "required": spec.get("required", []),
        "additionalProperties": spec.get("additionalProperties", False),
    }


def build_parser(actions: dict) -> argparse.ArgumentParser:
    """Build an argument parser with one subcommand per action."""
    parser = argparse.ArgumentParser(prog="satlab", description=__doc__.splitlines()[0])
    parser.add_argument("--log-level", default="WARNING", choices=LOG_LEVELS)
    parser.add_argument("--threads", type=int, help="worker processes (overrides SATLAB_THREADS)")
    parser.add_argument("--config", help="config.yaml to read options from")
    commands = parser.add_subparsers(dest="command", metavar="COMMAND", required=True)

    for name, spec in actions.items():
        sub = commands.add_parser(name, help=spec["description"].strip().splitlines()[0])
        for param, options in (spec.get("params") or {}).items():
            kwargs = {"help": options.get("description", "").strip()}
            if "enum" in options:
                kwargs["choices"] = options["enum"]
            if options.get("positional"):
                sub.add_argument(param, **kwargs)
                continue
            if options["type"] == "boolean":
                kwargs["action"] = "store_true"
                kwargs["default"] = None
            else:
                kwargs["type"] = _PARAM_TYPES[options["type"]]
            sub.add_argument(f"--{param}", dest=param.replace("-", "_"), **kwargs)
    return parser


def validate_params(actions: dict, command: str, args: argparse.Namespace) -> dict:
    """Collect the given parameters of `command` and validate them against actions.yaml."""
    spec = actions[command]
    params = {}
    for name, options in (spec.get("params") or {}).items():
        value = getattr(args, name.replace("-", "_"))
        if value is None and "default" in options:
            value = options["default"]
        if value is not None:
            params[name] = value
    try:
        jsonschema.validate(params, _param_schema(spec))
    except jsonschema.ValidationError as e:
        raise ParseError(f"{command}: {e.message}") from e
    return params


# Input and output helpers


@contextlib.contextmanager
def _open_input(path: str) -> Iterator[TextIO]:
    if path == "-":
        yield sys.stdin
    else:
        with open(path, "r") as stream:
            yield stream


def _graphs(params: dict) -> Iterator[Graph]:
    with _open_input(params["input"]) as stream:
        yield from graph.iter_graph6(stream)


def _emit(out: TextIO, payload: dict) -> None:
    out.write(reports.dumps(payload) + "\n")


def _parse_fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as e:
        raise ParseError(f"invalid rational '{text}'") from e


def _parse_vertices(text: str) -> int:
    try:
        return graph.mask_of(int(v) for v in text.split(",") if v.strip())
    except ValueError as e:
        raise ParseError(f"invalid vertex list '{text}'") from e


# Commands


def handle_count(params: dict, out: TextIO) -> None:
    """Count saturating pairs of every input graph."""
    threads = config.get_settings().threads
    for g in _graphs(params):
        report = saturation.count_saturating(g, params["r"], threads=threads)
        _emit(out, reports.saturation_payload(report))


def handle_classify(params: dict, out: TextIO) -> None:
    """Dump the per-pair classification as CSV."""
    for g in _graphs(params):
        saturation.write_csv(saturation.classify_nonedges(g, params["r"]), out)


def handle_construct(params: dict, out: TextIO) -> None:
    g = constructions.construct(
        params["name"], n=params.get("n"), k=params.get("k"), r=params.get("r")
    )
    out.write(graph.to_graph6(g) + "\n")


def handle_audit(params: dict, out: TextIO) -> None:
    """Decompose and audit every input graph."""
    for g in _graphs(params):
        packing = decomposition.max_triangle_packing(
            g, exact_limit=params.get("exact-limit"), time_budget=params.get("time-budget")
        )
        audits = decomposition.audit_lemmas(g, packing=packing)
        report = decomposition.decompose(g, packing)
        best = decomposition.select_best_triangle(g, packing)
        analysis = decomposition.analyze_triangle(g, packing, best)
        _emit(out, reports.audit_payload(report, analysis, audits))


def _parse_root(text: Optional[str]):
    if text is None:
        return None
    try:
        root = json.loads(text)
        return [(int(u), int(v)) for u, v in root]
    except (ValueError, TypeError) as e:
        raise ParseError(f"invalid root edge list '{text}'") from e


def handle_oracle(params: dict, out: TextIO) -> None:
    """Exact f(n, e) by exhaustive enumeration."""
    n = params["n"]
    root = _parse_root(params.get("root"))
    if params.get("sweep"):
        for record in oracle.f_sweep(n).values():
            _emit(out, reports.oracle_payload(record))
        return
    if "e" not in params:
        raise ParseError("oracle: 'e' is required unless --sweep is given")
    e = params["e"]
    if params.get("classes"):
        with open(params["classes"], "w") as classes:
            for g in oracle.enumerate_k4free(n, e, root=root):
                classes.write(graph.to_graph6(g) + "\n")
    _emit(out, reports.oracle_payload(oracle.f_table(n, e, root=root)))


def _pattern(params: dict):
    """Return (pattern graph, default required support) for the pattern option."""
    name, r = params["pattern"], params["r"]
    if name == "c5chord":
        return constructions.c5_with_chord(), graph.mask_of(range(3))
    if name == "edge":
        return constructions.single_edge(), 0
    if name == "joinpattern":
        pattern = constructions.join_pattern_r(r)
        return pattern, graph.mask_of(range(r - 1))
    return graph.from_graph6(name), 0


def handle_optimize(params: dict, out: TextIO) -> None:
    """Solve the part-density program."""
    pattern, required = _pattern(params)
    if "required" in params:
        required = _parse_vertices(params["required"])
    solver = {
        name.replace("-", "_"): params[name]
        for name in ("restarts", "max-iters", "tolerance", "seed")
        if name in params
    }
    floor = _parse_fraction(params["floor"]) if "floor" in params else None
    prog = optimizer.DensityProgram.create(
        pattern, params["r"], required, edge_density_floor=floor, **solver
    )
    _emit(out, reports.optimization_payload(optimizer.optimize(prog)))


def handle_reduce(params: dict, out: TextIO) -> None:
    """Drop one edge while keeping a triangle, optionally auditing the result."""
    for g in _graphs(params):
        if params.get("audit"):
            reduced, audits = decomposition.theorem1_chain(
                g, exact_limit=params.get("exact-limit")
            )
            _emit(out, reports.reduce_payload(reduced, audits))
        else:
            out.write(graph.to_graph6(decomposition.reduce_preserving_triangle(g)) + "\n")


_COMMAND_JUMP_TABLE = None


def _get_command_jump_table() -> Dict[str, Callable[[dict, TextIO], None]]:
    global _COMMAND_JUMP_TABLE
    ret = _COMMAND_JUMP_TABLE
    if ret is not None:
        return ret

    ret = {
        "count": handle_count,
        "classify": handle_classify,
        "construct": handle_construct,
        "audit": handle_audit,
        "oracle": handle_oracle,
        "optimize": handle_optimize,
        "reduce": handle_reduce,
    }

    _COMMAND_JUMP_TABLE = ret
    return ret


def run(argv, out: Optional[TextIO] = None, err: Optional[TextIO] = None) -> int:
    """Run one command line and return its exit code."""
    out = out or sys.stdout
    err = err or sys.stderr
    actions = load_actions()
    parser = build_parser(actions)
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 2

    logging.basicConfig(
        level=args.log_level, stream=err, format="%(levelname)s %(name)s: %(message)s"
    )
    try:
        if args.config or args.threads:
            config.override(path=args.config, threads=args.threads)
        params = validate_params(actions, args.command, args)
        fn = _get_command_jump_table().get(args.command)
        logger.debug(f"Running {args.command} with {params}")
        fn(params, out)
    except SatlabError as e:
        err.write(f"error: {e}\n")
        return e.exit_code
    except (OSError, ValueError) as e:
        logger.error(f"{args.command} failed: {e}")
        err.write(f"error: {e}\n")
        return 1
    finally:
        config.reset()
    return 0


def main():
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":  # pragma: nocover
    main()
