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

"""JSON payloads for every command, with fixed field order.

Rationals are written as "p/q" strings (or "p" when integral) and floats
are rounded to 12 significant digits, so identical inputs give
byte-identical output.
"""

import functools
import json
from fractions import Fraction
from pathlib import Path
from typing import Iterable, List, Optional

import jsonschema

import graph
from decomposition import DecompositionReport, LemmaAudit, TriangleAnalysis
from graph import Graph
from optimizer import CertifiedPoint, OptimizationResult
from oracle import OracleRecord
from saturation import SaturationReport

SCHEMA_DIR = Path(__file__).resolve().parent.parent / "docs" / "schemas"


def rational(x: Fraction) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def real(x: float) -> float:
    return float(format(x, ".12g"))


def _optional_rational(x: Optional[Fraction]) -> Optional[str]:
    return None if x is None else rational(x)


def saturation_payload(report: SaturationReport) -> dict:
    return {"r": report.r, "count": report.count, "total_nonedges": report.total_nonedges}


def audit_rows(audits: Iterable[LemmaAudit]) -> List[dict]:
    return [
        {
            "name": a.name,
            "left": rational(a.left),
            "right": rational(a.right),
            "holds": a.holds,
            "slack": rational(a.slack),
            "required": a.required,
        }
        for a in audits
    ]


def triangle_payload(analysis: TriangleAnalysis) -> dict:
    return {
        "T": list(analysis.T),
        "e_T_gprime": analysis.edges_to_gprime,
        "N0": analysis.N0.bit_count(),
        "N1": analysis.N1.bit_count(),
        "N2": analysis.N2.bit_count(),
        "p0": rational(analysis.p0),
        "p1": rational(analysis.p1),
        "p2": rational(analysis.p2),
        "A": graph.vertices_of(analysis.A),
        "B": graph.vertices_of(analysis.B),
        "C": graph.vertices_of(analysis.C),
        "a": _optional_rational(analysis.a),
        "b": _optional_rational(analysis.b),
        "c": _optional_rational(analysis.c),
        "joint_book_k": analysis.joint_book_k,
    }


def audit_payload(
    report: DecompositionReport, analysis: TriangleAnalysis, audits: Iterable[LemmaAudit]
) -> dict:
    """Decomposition quantities and audits; t is |packing|/n unreduced."""
    return {
        "n": report.n,
        "e": report.e,
        "t": f"{report.tn}/{report.n}",
        "e_T": report.e_T,
        "e_gprime": report.e_Gprime,
        "t_i": list(report.t_i),
        "r1": report.r1_count,
        "r2": report.r2_count,
        "exact": report.packing.exact,
        "packing": [list(tri) for tri in report.packing.triangles],
        "triangle": triangle_payload(analysis),
        "audits": audit_rows(audits),
    }


def oracle_payload(record: OracleRecord) -> dict:
    return {
        "n": record.n,
        "e": record.e,
        "f_min": record.f_min,
        "witness": graph.to_graph6(record.witness),
        "classes": record.graphs_enumerated,
    }


def certificate_payload(point: CertifiedPoint) -> dict:
    return {
        "weights": [rational(w) for w in point.weights],
        "edge_density": rational(point.edge_density),
        "sat_density": rational(point.sat_density),
        "certified": point.certified,
    }


def optimization_payload(result: OptimizationResult) -> dict:
    return {
        "weights": [real(w) for w in result.weights],
        "edge_density": real(result.edge_density),
        "sat_density": real(result.sat_density),
        "converged": result.converged,
        "best_over_restarts": real(result.best_over_restarts),
        "dispersion": real(result.dispersion),
        "support": list(result.support),
        "restarts": result.restarts,
        "conjecture": _optional_rational(result.conjecture),
        "gap": None if result.gap is None else real(result.gap),
        "certificate": certificate_payload(result.certificate),
    }


def reduce_payload(reduced: Graph, audits: Iterable[LemmaAudit]) -> dict:
    return {
        "graph": graph.to_graph6(reduced),
        "n": reduced.n,
        "e": reduced.edge_count,
        "audits": audit_rows(audits),
    }


def dumps(payload: dict) -> str:
    return json.dumps(payload)


@functools.lru_cache()
def load_schema(name: str) -> dict:
    with open(SCHEMA_DIR / f"{name}.schema.json", "r") as schema_file:
        return json.load(schema_file)


def validate_payload(name: str, payload: dict) -> None:
    """Raise jsonschema.ValidationError unless payload matches docs/schemas/<name>."""
    jsonschema.validate(payload, load_schema(name))
