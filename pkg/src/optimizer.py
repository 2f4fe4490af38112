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

"""Part-density program for pattern blow-ups.

Weights w on the pattern vertices stand for part sizes |V_i|/n. The edge
density of the blow-up is sum over pattern edges of w_i w_j, its
K_r-saturating density is sum over `within` vertices of w_i^2/2 plus sum
over `cross` pairs of w_i w_j, where the classification depends on which
weights are positive. The optimizer minimises the saturating density
subject to an edge-density floor.
"""

import dataclasses
import logging
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import numpy as np
import scipy.optimize
import tenacity

import config
import constructions
import graph
from errors import InfeasibleProgramError, PreconditionError
from graph import Graph, VertexSet

logger = logging.getLogger(__name__)

PENALTY_SCHEDULE = (10.0, 100.0, 1e3, 1e4)
SETTLE_ATTEMPTS = 6
WEIGHT_SUM_TOLERANCE = 1e-8
CERTIFY_MAX_DENOMINATOR = 10**4
SUPPORT_DRAWS = 32
RESTORE_STEPS = 60
_POLISH_FTOL = 1e-14


def turan_floor(r: int) -> Fraction:
    """Edge density of the balanced complete (r-2)-partite graph, 1/4 for r = 4."""
    if r < 3:
        raise PreconditionError(f"clique order must be at least 3, got {r}")
    return Fraction(r - 3, 2 * (r - 2))


def conjecture_value(r: int) -> Fraction:
    """2(r-3)^2 / ((r-1)(4r^2 - 19r + 23)) as an exact rational."""
    if r < 4:
        raise PreconditionError(f"conjectured density needs r >= 4, got {r}")
    return Fraction(2 * (r - 3) ** 2, (r - 1) * (4 * r * r - 19 * r + 23))


@dataclasses.dataclass(frozen=True)
class DensityProgram:
    """Minimise saturating density over blow-ups of `pattern` with edge density >= floor."""

    pattern: Graph
    r: int
    required_support: VertexSet
    edge_density_floor: Fraction
    restarts: int
    max_iters: int
    tolerance: float
    seed: int
    support_threshold: float
    required_floor: float

    @classmethod
    def create(
        cls,
        pattern: Graph,
        r: int,
        required_support: VertexSet = 0,
        edge_density_floor: Optional[Fraction] = None,
        **solver,
    ) -> "DensityProgram":
        """Build a program, taking solver options not given from the settings."""
        settings = config.get_settings()
        options = {
            name: solver.get(name, getattr(settings, name))
            for name in (
                "restarts",
                "max_iters",
                "tolerance",
                "seed",
                "support_threshold",
                "required_floor",
            )
        }
        unknown = set(solver) - set(options)
        if unknown:
            raise TypeError(f"unknown solver options {sorted(unknown)}")
        floor = turan_floor(r) if edge_density_floor is None else Fraction(edge_density_floor)
        prog = cls(pattern, r, required_support, floor, **options)
        prog.validate()
        return prog

    def validate(self) -> None:
        if self.r < 3:
            raise PreconditionError(f"clique order must be at least 3, got {self.r}")
        if self.pattern.n > constructions.MAX_PATTERN_VERTICES:
            raise PreconditionError(f"pattern has {self.pattern.n} vertices")
        if self.required_support >> self.pattern.n:
            raise PreconditionError("required support names vertices outside the pattern")
        if self.required_support:
            rows = self.pattern.rows
            if graph.find_clique_rows(rows, self.r - 1, self.required_support) is None:
                logger.error(f"Required support {self.required_support:b} has no K{self.r - 1}")
                raise PreconditionError(
                    f"required support must contain a clique on {self.r - 1} pattern vertices"
                )


@dataclasses.dataclass(frozen=True)
class CertifiedPoint:
    """A rational point near a numerical optimum, evaluated exactly."""

    weights: Tuple[Fraction, ...]
    edge_density: Fraction
    sat_density: Fraction
    certified: bool


@dataclasses.dataclass(frozen=True)
class OptimizationResult:
    weights: Tuple[float, ...]
    edge_density: float
    sat_density: float
    converged: bool
    best_over_restarts: float
    dispersion: float
    support: Tuple[int, ...]
    restarts: int
    conjecture: Optional[Fraction]
    gap: Optional[float]
    certificate: CertifiedPoint


# Objective


def _is_exact(weights: Sequence) -> bool:
    return all(isinstance(w, (int, Fraction)) for w in weights)


def support_of(weights: Sequence, threshold: float) -> VertexSet:
    """Pattern vertices whose weight exceeds the threshold."""
    return graph.mask_of(i for i, w in enumerate(weights) if w > threshold)


def quadratic_forms(prog: DensityProgram, support: VertexSet) -> Tuple[np.ndarray, np.ndarray]:
    """Matrices A, Q with edge density w'Aw/2 and saturating density w'Qw/2 on `support`."""
    adjacency = prog.pattern.to_matrix().astype(float)
    parts = constructions.classify_parts(prog.pattern, support, prog.r)
    saturating = np.zeros_like(adjacency)
    for i in parts.within:
        saturating[i, i] = 1.0
    for i, j in parts.cross:
        saturating[i, j] = saturating[j, i] = 1.0
    return adjacency, saturating


def densities(
    prog: DensityProgram, weights: Sequence, support: Optional[VertexSet] = None
) -> Tuple:
    """Edge and saturating density of any weight vector, classified on `support`.

    Fractions in, Fractions out; anything else is evaluated in floating point.
    """
    if support is None:
        support = support_of(weights, prog.support_threshold)
    parts = constructions.classify_parts(prog.pattern, support, prog.r)
    if _is_exact(weights):
        w = [Fraction(x) for x in weights]
        edge = sum((w[i] * w[j] for i, j in prog.pattern.edges()), Fraction(0))
        sat = sum((w[i] * w[i] / 2 for i in parts.within), Fraction(0))
        sat += sum((w[i] * w[j] for i, j in parts.cross), Fraction(0))
        return edge, sat
    adjacency, saturating = quadratic_forms(prog, support)
    w = np.asarray(weights, dtype=float)
    return float(w @ adjacency @ w) / 2, float(w @ saturating @ w) / 2


def evaluate_point(prog: DensityProgram, weights: Sequence) -> Tuple:
    """Edge and saturating density of a point of the simplex.

    Raises:
        PreconditionError: negative weights, wrong length or a sum other than 1.
    """
    if len(weights) != prog.pattern.n:
        raise PreconditionError(f"expected {prog.pattern.n} weights, got {len(weights)}")
    if any(w < 0 for w in weights):
        raise PreconditionError(f"weights must be non-negative, got {list(weights)}")
    total = sum(weights)
    if _is_exact(weights) and total != 1 or abs(total - 1) > WEIGHT_SUM_TOLERANCE:
        raise PreconditionError(f"weights must sum to 1, got {total}")
    return densities(prog, weights)


def gradients(prog: DensityProgram, weights: Sequence) -> Tuple[np.ndarray, np.ndarray]:
    """Gradients A w and Q w of the edge and saturating densities."""
    support = support_of(weights, prog.support_threshold)
    adjacency, saturating = quadratic_forms(prog, support)
    w = np.asarray(weights, dtype=float)
    return adjacency @ w, saturating @ w


def max_edge_density(pattern: Graph, support: Optional[VertexSet] = None) -> Fraction:
    """Largest edge density of a blow-up on `support`: (1 - 1/omega)/2."""
    mask = pattern.full_mask if support is None else support
    omega = 0
    while graph.find_clique_rows(pattern.rows, omega + 1, mask) is not None:
        omega += 1
    return Fraction(omega - 1, 2 * omega) if omega else Fraction(0)


# Search


def _project_simplex(v: np.ndarray, radius: float) -> np.ndarray:
    """Euclidean projection onto {x >= 0, sum x = radius}."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - radius
    index = np.arange(1, len(v) + 1)
    cond = u - css / index > 0
    rho = index[cond][-1]
    theta = css[cond][-1] / rho
    return np.maximum(v - theta, 0.0)


@dataclasses.dataclass
class _Local:
    weights: np.ndarray
    sat_density: float
    edge_density: float
    converged: bool
    feasible: bool


def _descend(
    prog: DensityProgram, adjacency: np.ndarray, saturating: np.ndarray, lower: np.ndarray,
    start: np.ndarray,
) -> np.ndarray:
    """Projected gradient descent on the penalised objective, one stage per penalty."""
    floor = float(prog.edge_density_floor)
    radius = 1.0 - lower.sum()
    norm_a = np.linalg.norm(adjacency, 2)
    norm_q = np.linalg.norm(saturating, 2)
    x = lower + _project_simplex(start - lower, radius)
    for mu in PENALTY_SCHEDULE:
        step = 1.0 / (norm_q + 2 * mu * norm_a * (norm_a + 1) + 1e-12)
        for _ in range(prog.max_iters):
            violation = max(0.0, floor - x @ adjacency @ x / 2)
            grad = saturating @ x - 2 * mu * violation * (adjacency @ x)
            moved = lower + _project_simplex(x - step * grad - lower, radius)
            if np.linalg.norm(moved - x) < prog.tolerance:
                x = moved
                break
            x = moved
    return x


def _polish(
    prog: DensityProgram, adjacency: np.ndarray, saturating: np.ndarray, lower: np.ndarray,
    start: np.ndarray,
) -> Tuple[np.ndarray, bool]:
    """Active-set polish with SLSQP; keeps `start` if the polish fails."""
    floor = float(prog.edge_density_floor)
    res = scipy.optimize.minimize(
        lambda x: x @ saturating @ x / 2,
        start,
        jac=lambda x: saturating @ x,
        method="SLSQP",
        bounds=[(lo, 1.0) for lo in lower],
        constraints=[
            {"type": "eq", "fun": lambda x: x.sum() - 1.0, "jac": lambda x: np.ones_like(x)},
            {
                "type": "ineq",
                "fun": lambda x: x @ adjacency @ x / 2 - floor,
                "jac": lambda x: adjacency @ x,
            },
        ],
        options={"maxiter": max(prog.max_iters, 100), "ftol": _POLISH_FTOL},
    )
    x = np.clip(res.x, 0.0, None)
    x /= x.sum()
    if x @ adjacency @ x / 2 < floor - prog.tolerance:
        logger.debug(f"SLSQP polish left the feasible set ({res.message}), keeping descent point")
        return start, False
    return x, bool(res.success)


def _densest_point(
    prog: DensityProgram, support: VertexSet, idx: Sequence[int], lower: np.ndarray
) -> np.ndarray:
    """Uniform weight on a largest clique of `support`, lifted onto the lower bounds."""
    clique: List[int] = []
    while True:
        found = graph.find_clique_rows(prog.pattern.rows, len(clique) + 1, support)
        if found is None:
            break
        clique = found
    position = {v: k for k, v in enumerate(idx)}
    point = lower.copy()
    for v in clique:
        point[position[v]] += (1.0 - lower.sum()) / len(clique)
    return point


def _restore_feasibility(
    adjacency: np.ndarray, x: np.ndarray, target: np.ndarray, floor: float
) -> np.ndarray:
    """Move x towards `target` until the edge density reaches the floor.

    Bisects on the segment, so the result stays on the simplex and above the
    lower bounds whenever both ends are.
    """

    def edge(t: float) -> float:
        y = x + t * (target - x)
        return y @ adjacency @ y / 2

    if edge(1.0) < floor:
        return target
    lo, hi = 0.0, 1.0
    for _ in range(RESTORE_STEPS):
        mid = (lo + hi) / 2
        if edge(mid) >= floor:
            hi = mid
        else:
            lo = mid
    return x + hi * (target - x)


def _solve_on_support(
    prog: DensityProgram, support: VertexSet, start: np.ndarray
) -> Tuple[np.ndarray, bool]:
    idx = graph.vertices_of(support)
    adjacency, saturating = quadratic_forms(prog, support)
    adjacency = adjacency[np.ix_(idx, idx)]
    saturating = saturating[np.ix_(idx, idx)]
    lower = np.array(
        [prog.required_floor if prog.required_support >> i & 1 else 0.0 for i in idx]
    )
    x0 = np.asarray(start, dtype=float)[idx]
    x0 = x0 / x0.sum() if x0.sum() > 0 else np.full(len(idx), 1.0 / len(idx))

    floor = float(prog.edge_density_floor)
    x = _descend(prog, adjacency, saturating, lower, x0)
    if x @ adjacency @ x / 2 < floor:
        # large penalties shrink the descent step, so the last stages stall below the floor
        logger.debug(f"Descent ended below the edge floor on {support:b}, restoring")
        target = _densest_point(prog, support, idx, lower)
        x = _restore_feasibility(adjacency, x, target, floor)
    x, ok = _polish(prog, adjacency, saturating, lower, x)
    full = np.zeros(prog.pattern.n)
    full[idx] = x
    return full, ok


def _local_search(prog: DensityProgram, support: VertexSet, start: np.ndarray) -> _Local:
    """Solve on `support`, then re-solve on the detected support until it settles."""
    state = {"support": support, "point": start, "ok": False}

    @tenacity.retry(
        stop=tenacity.stop_after_attempt(SETTLE_ATTEMPTS),
        retry=tenacity.retry_if_result(lambda settled: not settled),
        retry_error_callback=lambda retry_state: False,
    )
    def settle():
        point, ok = _solve_on_support(prog, state["support"], state["point"])
        detected = support_of(point, prog.support_threshold) | prog.required_support
        settled = detected == state["support"]
        state.update(support=detected, point=point, ok=ok)
        return settled

    settled = settle()
    if not settled:
        logger.warning(f"Support did not settle after {SETTLE_ATTEMPTS} re-solves")
    weights = state["point"]
    edge, sat = densities(prog, weights)
    feasible = edge >= float(prog.edge_density_floor) - prog.tolerance
    return _Local(weights, sat, edge, settled and state["ok"] and feasible, feasible)


def _restart_supports(prog: DensityProgram, rng: np.random.Generator) -> List[VertexSet]:
    """Full support first, then random supersets of the required support.

    A drawn support that cannot reach the edge floor is redrawn; after
    SUPPORT_DRAWS failures the restart uses the full support.
    """
    full = prog.pattern.full_mask
    supports = [full]
    while len(supports) < prog.restarts:
        support = full
        for _ in range(SUPPORT_DRAWS):
            extra = graph.mask_of(i for i in range(prog.pattern.n) if rng.random() < 0.5)
            candidate = extra | prog.required_support
            if candidate and max_edge_density(prog.pattern, candidate) >= prog.edge_density_floor:
                support = candidate
                break
        supports.append(support)
    return supports


def certify(prog: DensityProgram, weights: Sequence[float]) -> CertifiedPoint:
    """Round to a nearby rational point on the simplex and evaluate it exactly."""
    rational = [Fraction(float(w)).limit_denominator(CERTIFY_MAX_DENOMINATOR) for w in weights]
    largest = max(range(len(rational)), key=lambda i: rational[i])
    rational[largest] += 1 - sum(rational)
    edge, sat = densities(prog, rational, support_of(rational, 0))
    tolerance = Fraction(prog.tolerance)
    certified = min(rational) >= 0 and edge >= prog.edge_density_floor - tolerance
    return CertifiedPoint(tuple(rational), edge, sat, certified)


def optimize(prog: DensityProgram) -> OptimizationResult:
    """Multi-start search for the smallest saturating density above the edge floor.

    Raises:
        InfeasibleProgramError: no blow-up of the pattern reaches the floor.
    """
    attainable = max_edge_density(prog.pattern)
    if prog.edge_density_floor > attainable:
        logger.error(f"Floor {prog.edge_density_floor} exceeds attainable {attainable}")
        raise InfeasibleProgramError(prog.edge_density_floor, attainable)

    rng = np.random.default_rng(prog.seed)
    locals_: List[_Local] = []
    for k, support in enumerate(_restart_supports(prog, rng)):
        start = rng.dirichlet(np.ones(prog.pattern.n))
        local = _local_search(prog, support, start)
        logger.debug(
            f"Restart {k}: sat density {local.sat_density:.12g}, "
            f"edge density {local.edge_density:.12g} on {support:b}"
        )
        locals_.append(local)

    # only restarts above the floor compete
    feasible = [loc for loc in locals_ if loc.feasible]
    if feasible:
        best = min(feasible, key=lambda loc: loc.sat_density)
    else:
        best = max(locals_, key=lambda loc: loc.edge_density)
        feasible = [best]
        logger.warning(
            f"No restart reached edge density {prog.edge_density_floor}; "
            f"reporting the closest point ({best.edge_density:.12g}) as not converged"
        )
    values = np.array([loc.sat_density for loc in feasible])
    conjecture = conjecture_value(prog.r) if prog.r >= 4 else None
    gap = best.sat_density - float(conjecture) if conjecture is not None else None
    logger.info(
        f"Best saturating density {best.sat_density:.12g} over {len(locals_)} restarts"
        + (f", gap to conjecture {gap:.3g}" if gap is not None else "")
    )
    return OptimizationResult(
        weights=tuple(float(w) for w in best.weights),
        edge_density=best.edge_density,
        sat_density=best.sat_density,
        converged=best.converged,
        best_over_restarts=float(values.min()),
        dispersion=float(values.std()),
        support=tuple(graph.vertices_of(support_of(best.weights, prog.support_threshold))),
        restarts=len(locals_),
        conjecture=conjecture,
        gap=gap,
        certificate=certify(prog, best.weights),
    )
