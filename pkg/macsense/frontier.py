"""
Frontier Module
Maximum sum-rate R1 + R2 as a function of a bound on Tx 2's distortion D2.

Every frontier point is a lower bound on the true tradeoff: it is the best
scheme the search found, re-evaluated from scratch before it is reported.
"""

import csv
import io
import itertools
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from . import settings
from .channel import ChannelSpec, build_example2
from .estimator import distortion, min_distortion_formula_example2
from .exceptions import ArgumentError, ConfigurationError, DomainError, InternalConsistencyError, PreconditionError
from .parallel import ordered_map
from .probability import conditional_mutual_information
from .region import compute_info_terms, corollary_region, theorem_region
from .scheme import (
    Example2SchemeParams,
    SchemeSpec,
    assemble_joint,
    build_example1_scheme,
    build_example2_scheme,
    constant_V_scheme,
    random_scheme,
)

logger = logging.getLogger(__name__)

MODES = ('theorem', 'corollary')
D2_TOL = 1e-12
IMPROVE_TOL = 1e-12
CERTIFY_TOL = 1e-9
DEFAULT_BUDGET = 400
REFINEMENT_STARTS = 3

# Plotted sum-rate / distortion tradeoff for p_s = 0.9, t = 0.2 (D2, R1 + R2)
PLOTTED_THEOREM = (
    (0.009, 0.0),
    (0.009, 0.0174636602105884),
    (0.0181, 0.454923085608388),
    (0.0272, 0.697925727944108),
    (0.046536, 1.09649065861506),
    (0.04784, 1.12169603783657),
    (0.05386544, 1.23201509074945),
    (0.05396544, 1.23301509074945),
    (0.06184672, 1.32467214365213),
    (0.06484048, 1.34787596202844),
    (0.06829488, 1.37119420097369),
    (0.080276, 1.42848686787232),
    (0.081404, 1.42860128650098),
)
PLOTTED_COROLLARY = (
    (0.02, 0.0),
    (0.0274, 0.422096034230353),
    (0.03466, 0.781081613885977),
    (0.04132, 0.964385233112143),
    (0.046536, 1.09649065861506),
    (0.04784, 1.12169603783657),
    (0.0550376, 1.23920531057077),
    (0.057228, 1.26697188314791),
    (0.05954, 1.29381001683878),
    (0.060576, 1.30468615438059),
    (0.0617024, 1.31545915025154),
    (0.0638056, 1.33385787412638),
    (0.0678344, 1.3621799517021),
    (0.080276, 1.42848686787232),
    (0.081404, 1.42860128650098),
)


@dataclass(frozen=True)
class Evaluation:
    """D2 and the largest sum-rate of one scheme; sum_rate is None when its region is empty"""

    scheme: SchemeSpec
    d2: float
    sum_rate: Optional[float]
    slacks: Tuple[Tuple[str, float], ...] = ()
    params: Optional[Example2SchemeParams] = None

    @property
    def feasible(self) -> bool:
        return self.sum_rate is not None

    def meets(self, d2_bound: float) -> bool:
        return self.feasible and self.d2 <= d2_bound + D2_TOL


@dataclass(frozen=True)
class FrontierPoint:
    d2_bound: float
    best_sum_rate: float
    argmax_params: Optional[Union[Example2SchemeParams, SchemeSpec]]
    feasibility_slacks: Tuple[Tuple[str, float], ...]
    distortion: Optional[float] = None
    feasible: bool = True
    samples: int = 0
    monotonized: bool = False


def _check_mode(mode: str):
    if mode not in MODES:
        raise ArgumentError(f"mode must be one of {MODES}, got '{mode}'")


def _check_grid(d2_grid: Sequence[float], budget: int):
    if not len(d2_grid):
        raise ArgumentError("distortion grid is empty")
    if any(b < a for a, b in zip(d2_grid, d2_grid[1:])):
        raise ArgumentError("distortion grid must be sorted ascending")
    if budget < 1:
        raise DomainError(f"budget must be at least 1, got {budget}")


def evaluate_scheme(channel: ChannelSpec, scheme: SchemeSpec, mode: str = 'theorem',
                    params: Optional[Example2SchemeParams] = None) -> Evaluation:
    """
    Distortion of Tx 2 under its optimal estimator and the maximum sum-rate
    of the scheme's region. Corollary mode first makes V1 and V2 constant.
    """
    _check_mode(mode)
    if mode == 'corollary':
        scheme = constant_V_scheme(scheme)
    joint = assemble_joint(channel, scheme)
    d2 = distortion(joint, 2, channel.distortion)
    if mode == 'corollary':
        region = corollary_region(joint)
    else:
        region = theorem_region(compute_info_terms(joint))
    slacks = tuple((condition.label, condition.slack) for condition in region.feasibility)
    return Evaluation(scheme, d2, region.max_sum_rate(), slacks, params)


def evaluate_example2(channel: ChannelSpec, params: Example2SchemeParams, mode: str = 'theorem') -> Evaluation:
    return evaluate_scheme(channel, build_example2_scheme(params, channel), mode, params)


def _point(target: float, evaluation: Optional[Evaluation], samples: int) -> FrontierPoint:
    if evaluation is None:
        logger.warning(f"No feasible scheme found with D2 <= {target}")
        return FrontierPoint(target, 0.0, None, (), None, feasible=False, samples=samples)
    params = evaluation.params if evaluation.params is not None else evaluation.scheme
    return FrontierPoint(target, evaluation.sum_rate, params, evaluation.slacks, evaluation.d2,
                         feasible=True, samples=samples)


def monotonize(points: List[FrontierPoint]) -> List[FrontierPoint]:
    """A scheme feasible at D2 stays feasible at any larger bound; carry the best forward"""
    result = []
    for point in points:
        previous = result[-1] if result else None
        if previous is not None and previous.feasible and (
                not point.feasible or previous.best_sum_rate > point.best_sum_rate):
            logger.warning(f"Monotonization raised D2 <= {point.d2_bound} from "
                           f"{point.best_sum_rate:.12g} to {previous.best_sum_rate:.12g}")
            point = FrontierPoint(point.d2_bound, previous.best_sum_rate, previous.argmax_params,
                                  previous.feasibility_slacks, previous.distortion,
                                  feasible=True, samples=point.samples, monotonized=True)
        result.append(point)
    return result


def _certify(point: FrontierPoint, reevaluate: Callable[[FrontierPoint], Evaluation]):
    if not point.feasible:
        return
    evaluation = reevaluate(point)
    if (not evaluation.feasible or evaluation.d2 > point.d2_bound + D2_TOL
            or abs(evaluation.sum_rate - point.best_sum_rate) > CERTIFY_TOL):
        logger.error(f"Frontier point at D2 <= {point.d2_bound} did not reproduce: {evaluation}")
        raise InternalConsistencyError(f"frontier point at D2 <= {point.d2_bound} failed certification")


@dataclass(frozen=True)
class SearchGrid:
    """Coarse step for every probability parameter, then refinement rounds each `factor` times finer"""

    coarse_step: Fraction = Fraction(1, 16)
    refinements: int = 2
    factor: int = 4

    def values(self, upper: Fraction = Fraction(1)) -> List[float]:
        count = int(upper / self.coarse_step)
        return [float(self.coarse_step * i) for i in range(count + 1)]

    def steps(self) -> List[float]:
        return [float(self.coarse_step / self.factor ** (r + 1)) for r in range(self.refinements)]


# 'full' sweeps 17 points per parameter (about 10^8 schemes on the second
# example); 'fast' sweeps 5 and relies on the refinement rounds
SEARCH_GRIDS = {
    'full': SearchGrid(),
    'fast': SearchGrid(coarse_step=Fraction(1, 4)),
}


def search_grid(name: Optional[str] = None) -> SearchGrid:
    """Named search grid; MACSENSE_FRONTIER_GRID picks it when name is None"""
    name = settings.FRONTIER_GRID if name is None else name
    if name not in SEARCH_GRIDS:
        raise ConfigurationError(f"unknown search grid '{name}'; choose from {tuple(SEARCH_GRIDS)}")
    return SEARCH_GRIDS[name]


def _canonical(vector: Sequence[float], mode: str) -> Tuple[float, ...]:
    """Drop parameters that cannot matter: the unused U0 branch and, for corollary, the erasure"""
    p_u0, a0, a1, b0, b1, xi1, xi2, e = (min(1.0, max(0.0, float(v))) for v in vector)
    if p_u0 == 0.0:
        a1, b1 = a0, b0
    elif p_u0 == 1.0:
        a0, b0 = a1, b1
    if mode == 'corollary':
        e = 1.0
    return p_u0, a0, a1, b0, b1, xi1, xi2, e


class Example2Search:
    """Grid sweep and pattern-search refinement over Example2SchemeParams, with a shared evaluation cache"""

    def __init__(self, channel: ChannelSpec, mode: str, grid: Optional[SearchGrid] = None):
        _check_mode(mode)
        self.channel = channel
        self.mode = mode
        self.grid = grid or search_grid()
        self.cache: Dict[Tuple[float, ...], Evaluation] = {}
        self.active = range(7) if mode == 'corollary' else range(8)

    def evaluate(self, vector: Sequence[float]) -> Evaluation:
        key = _canonical(vector, self.mode)
        if key not in self.cache:
            self.cache[key] = evaluate_example2(self.channel, Example2SchemeParams.from_vector(key), self.mode)
        return self.cache[key]

    def evaluate_many(self, vectors: Sequence[Sequence[float]]):
        keys = list(dict.fromkeys(_canonical(vector, self.mode) for vector in vectors))
        missing = [key for key in keys if key not in self.cache]
        results = ordered_map(
            lambda key: evaluate_example2(self.channel, Example2SchemeParams.from_vector(key), self.mode),
            missing,
        )
        self.cache.update(zip(missing, results))

    def coarse_vectors(self) -> List[Tuple[float, ...]]:
        """
        Coarse grid reduced by relabelling symmetries: p_u0 <= 1/2, xi_k <= 1/2,
        and at p_u0 = 1/2 the two U0 branches in one order only.
        """
        full = self.grid.values()
        half = self.grid.values(Fraction(1, 2))
        erasures = (1.0,) if self.mode == 'corollary' else (0.0, 1.0)
        vectors = []
        for p_u0 in half:
            branches = itertools.product(full, repeat=4) if p_u0 > 0 else (
                (a, a, b, b) for a, b in itertools.product(full, repeat=2))
            for a0, a1, b0, b1 in branches:
                if p_u0 == 0.5 and (a1, b1) < (a0, b0):
                    continue
                for xi1, xi2, e in itertools.product(half, half, erasures):
                    vectors.append((p_u0, a0, a1, b0, b1, xi1, xi2, e))
        return vectors

    def seed_vectors(self) -> List[Tuple[float, ...]]:
        seeds = [Example2SchemeParams.corollary_min_d2()]
        if self.mode == 'theorem':
            qs = [0.1, 0.125, 0.15, 0.2, 0.25, 0.5]
            try:
                qs.insert(0, locate_permissible_q(self.channel).q_theorem)
            except PreconditionError as e:
                logger.warning(f"No permissibility threshold in the default sweep: {e}")
            seeds += [Example2SchemeParams.theorem_min_d2(q) for q in qs]
        return [params.as_vector() for params in seeds]

    def _moves(self, vector: Tuple[float, ...], step: float, pairs: bool):
        if not pairs:
            for i in self.active:
                for sign in (1, -1):
                    moved = list(vector)
                    moved[i] += sign * step
                    yield tuple(moved)
            return
        for i, j in itertools.combinations(self.active, 2):
            for si, sj in itertools.product((1, -1), repeat=2):
                moved = list(vector)
                moved[i] += si * step
                moved[j] += sj * step
                yield tuple(moved)

    def _refine(self, start: Evaluation, target: float, step: float, budget: int) -> Tuple[Evaluation, int]:
        best, used = start, 0
        while used < budget:
            improved = False
            for pairs in (False, True):
                for candidate in self._moves(best.params.as_vector(), step, pairs):
                    if used >= budget:
                        break
                    used += 1
                    evaluation = self.evaluate(candidate)
                    if evaluation.meets(target) and evaluation.sum_rate > best.sum_rate + IMPROVE_TOL:
                        best, improved = evaluation, True
                        break
                if improved or used >= budget:
                    break
            if not improved:
                break
        return best, used

    def best_for(self, target: float, budget: int) -> FrontierPoint:
        eligible = [evaluation for evaluation in self.cache.values() if evaluation.meets(target)]
        samples = len(eligible)
        if not eligible:
            return _point(target, None, samples)
        eligible.sort(key=lambda evaluation: -evaluation.sum_rate)

        best = eligible[0]
        remaining = budget
        for start in eligible[:REFINEMENT_STARTS]:
            current = start
            for step in self.grid.steps():
                if remaining <= 0:
                    break
                current, used = self._refine(current, target, step, remaining)
                remaining -= used
            if current.sum_rate > best.sum_rate + IMPROVE_TOL:
                best = current
        logger.debug(f"D2 <= {target}: {best.sum_rate:.6f} bits after {budget - remaining} refinement steps")
        return _point(target, best, samples)


def trace_frontier_example2(p_s: float, t: float, d2_grid: Sequence[float], budget: int = DEFAULT_BUDGET,
                            mode: str = 'theorem', grid: Optional[SearchGrid] = None) -> List[FrontierPoint]:
    """
    Frontier of the second example for one mode.

    Args:
        d2_grid: ascending distortion bounds
        budget: refinement candidates examined per bound
        mode: 'theorem' (V1 searched) or 'corollary' (V1, V2 constant)
    """
    _check_grid(d2_grid, budget)
    channel = build_example2(p_s, t)
    search = Example2Search(channel, mode, grid)
    search.evaluate_many(search.coarse_vectors() + search.seed_vectors())
    logger.info(f"{mode}: {len(search.cache)} schemes in the coarse sweep")

    points = monotonize([search.best_for(float(target), budget) for target in d2_grid])

    def reevaluate(point: FrontierPoint) -> Evaluation:
        return evaluate_example2(channel, point.argmax_params, mode)

    for point in points:
        _certify(point, reevaluate)
    logger.info(f"{mode}: frontier certified at {sum(p.feasible for p in points)} of {len(points)} bounds")
    return points


def trace_frontiers_example2(p_s: float, t: float, d2_grid: Sequence[float], budget: int = DEFAULT_BUDGET,
                             modes: Sequence[str] = MODES,
                             grid: Optional[SearchGrid] = None) -> Dict[str, List[FrontierPoint]]:
    """
    Frontiers for several modes on one grid. A corollary scheme is also a
    theorem scheme, so when both are traced the theorem curve takes the
    corollary point wherever that is better.
    """
    frontiers = {mode: trace_frontier_example2(p_s, t, d2_grid, budget, mode, grid) for mode in modes}
    if 'theorem' in frontiers and 'corollary' in frontiers:
        channel = build_example2(p_s, t)
        lifted = []
        for theorem, corollary in zip(frontiers['theorem'], frontiers['corollary']):
            if corollary.feasible and (not theorem.feasible or corollary.best_sum_rate > theorem.best_sum_rate):
                params = corollary.argmax_params.with_erasure(1.0)
                evaluation = evaluate_example2(channel, params, 'theorem')
                if not evaluation.meets(theorem.d2_bound) or \
                        abs(evaluation.sum_rate - corollary.best_sum_rate) > CERTIFY_TOL:
                    raise InternalConsistencyError(
                        f"corollary point at D2 <= {corollary.d2_bound} is not a theorem point")
                logger.info(f"Theorem curve at D2 <= {theorem.d2_bound} lifted to the corollary point")
                theorem = FrontierPoint(theorem.d2_bound, corollary.best_sum_rate, params, evaluation.slacks,
                                        evaluation.d2, feasible=True, samples=theorem.samples,
                                        monotonized=theorem.monotonized)
            lifted.append(theorem)
        frontiers['theorem'] = lifted
    return frontiers


Sampler = Callable[[np.random.Generator], SchemeSpec]


def trace_frontier_generic(channel: ChannelSpec, sampler: Sampler, d2_grid: Sequence[float],
                           budget: int, seed: int, mode: str = 'theorem') -> List[FrontierPoint]:
    """
    Random-restart frontier: budget schemes drawn from sampler with a
    Philox stream seeded by seed, each evaluated once. The first n draws do
    not depend on budget.
    """
    _check_grid(d2_grid, budget)
    _check_mode(mode)
    rng = np.random.Generator(np.random.Philox(seed))
    schemes = [sampler(rng) for _ in range(budget)]
    evaluations = ordered_map(lambda scheme: evaluate_scheme(channel, scheme, mode), schemes)

    points = []
    for target in d2_grid:
        eligible = [evaluation for evaluation in evaluations if evaluation.meets(target)]
        best = max(eligible, key=lambda evaluation: evaluation.sum_rate, default=None)
        points.append(_point(float(target), best, len(eligible)))
    points = monotonize(points)

    def reevaluate(point: FrontierPoint) -> Evaluation:
        return evaluate_scheme(channel, point.argmax_params, mode)

    for point in points:
        _certify(point, reevaluate)
    return points


def example1_sampler(rng: np.random.Generator) -> SchemeSpec:
    """V1 constant or a copy of Z1, X1 ~ Ber(uniform), X2 = 1 half of the time and random otherwise"""
    v1 = 'copy' if rng.random() < 0.5 else 'constant'
    p_x1 = rng.random()
    p_x2 = 1.0 if rng.random() < 0.5 else rng.random()
    return build_example1_scheme(v1, p_x1, p_x2)


def random_scheme_sampler(channel: ChannelSpec, aux_sizes: Optional[Dict[str, int]] = None,
                          concentration: float = 1.0) -> Sampler:
    def sample(rng: np.random.Generator) -> SchemeSpec:
        return random_scheme(channel, rng, aux_sizes, concentration)
    return sample


@dataclass(frozen=True)
class PermissibilityCheck:
    """Literal permissibility slack I(X1;Z2|X2) - I(V1;Y|Z1) next to the region's feasibility slacks"""

    literal_slack: float
    theorem_slacks: Tuple[Tuple[str, float], ...]
    d2: float

    @property
    def theorem_slack(self) -> float:
        return min(slack for _, slack in self.theorem_slacks)

    @property
    def literal_permissible(self) -> bool:
        return self.literal_slack >= 0

    @property
    def theorem_feasible(self) -> bool:
        return self.theorem_slack >= -CERTIFY_TOL


def permissibility_check(params: Example2SchemeParams, channel: ChannelSpec) -> PermissibilityCheck:
    joint = assemble_joint(channel, build_example2_scheme(params, channel))
    literal = (conditional_mutual_information(joint, 'X1', 'Z2', 'X2')
               - conditional_mutual_information(joint, 'V1', 'Y', 'Z1'))
    region = theorem_region(compute_info_terms(joint))
    slacks = tuple((condition.label, condition.slack) for condition in region.feasibility)
    return PermissibilityCheck(literal, slacks, distortion(joint, 2, channel.distortion))


@dataclass(frozen=True)
class PermissibilityThreshold:
    q_theorem: float
    d2: float
    q_literal: Optional[float]
    sweep: Tuple[Tuple[float, PermissibilityCheck], ...]


def _bisect(f: Callable[[float], float], low: float, high: float, tol: float) -> float:
    """Smallest q (to tol) with f(q) >= 0, given f(low) < 0 <= f(high)"""
    while high - low > tol:
        middle = (low + high) / 2
        if f(middle) >= 0:
            high = middle
        else:
            low = middle
    return high


def locate_permissible_q(channel: ChannelSpec, sweep: Sequence[float] = (0.05, 0.1, 0.2),
                         tol: float = 1e-6) -> PermissibilityThreshold:
    """
    Smallest Pr[X1=1] for which the minimum-distortion family (X2 = 1, V1
    never erased) is feasible, located by bisection inside the first sweep
    interval where the theorem slack changes sign. The literal slack is
    bisected the same way when it changes sign.

    Raises:
        PreconditionError: the theorem slack does not change sign over sweep
    """
    sweep = tuple(sorted(sweep))
    checks = tuple((q, permissibility_check(Example2SchemeParams.theorem_min_d2(q), channel)) for q in sweep)

    def located(value: Callable[[PermissibilityCheck], float], slack: Callable[[float], float]) -> Optional[float]:
        for (low, low_check), (high, high_check) in zip(checks, checks[1:]):
            if value(low_check) < 0 <= value(high_check):
                return _bisect(slack, low, high, tol)
        return None

    def theorem_slack(q: float) -> float:
        return permissibility_check(Example2SchemeParams.theorem_min_d2(q), channel).theorem_slack + CERTIFY_TOL

    def literal_slack(q: float) -> float:
        return permissibility_check(Example2SchemeParams.theorem_min_d2(q), channel).literal_slack

    q_theorem = located(lambda check: check.theorem_slack + CERTIFY_TOL, theorem_slack)
    if q_theorem is None:
        raise PreconditionError(f"theorem feasibility does not change sign over q in {sweep}")
    q_literal = located(lambda check: check.literal_slack, literal_slack)
    d2 = permissibility_check(Example2SchemeParams.theorem_min_d2(q_theorem), channel).d2
    logger.info(f"Permissible Pr[X1=1] >= {q_theorem:.6f} (D2 = {d2:.6f})")
    return PermissibilityThreshold(q_theorem, d2, q_literal, checks)


PARAM_COLUMNS = Example2SchemeParams.FIELDS


def frontier_csv(frontiers: Dict[str, List[FrontierPoint]]) -> str:
    """One row per (mode, bound); 12 significant digits"""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(['mode', 'd2_bound', 'best_sum_rate', 'distortion', 'feasible', 'samples',
                     'monotonized', 'scheme', *PARAM_COLUMNS])
    for mode, points in frontiers.items():
        for point in points:
            params = point.argmax_params
            if isinstance(params, Example2SchemeParams):
                scheme, values = 'example2', [f'{v:.12g}' for v in params.as_vector()]
            else:
                scheme, values = (params.name if params is not None else ''), [''] * len(PARAM_COLUMNS)
            writer.writerow([
                mode, f'{point.d2_bound:.12g}', f'{point.best_sum_rate:.12g}',
                '' if point.distortion is None else f'{point.distortion:.12g}',
                int(point.feasible), point.samples, int(point.monotonized), scheme, *values,
            ])
    return buffer.getvalue()


def frontier_start(points: Sequence[FrontierPoint]) -> Optional[float]:
    """Smallest achieved distortion among the reported points"""
    achieved = [point.distortion for point in points if point.feasible]
    return min(achieved, default=None)


def formula_cross_check(p_s: float, t: float, qs: Sequence[float]) -> List[Tuple[float, float, float]]:
    """(q, formula, computed) for the minimum-distortion family"""
    channel = build_example2(p_s, t)
    rows = []
    for q in qs:
        joint = assemble_joint(channel, build_example2_scheme(Example2SchemeParams.theorem_min_d2(q), channel))
        rows.append((q, min_distortion_formula_example2(q, p_s), distortion(joint, 2, channel.distortion)))
    return rows
