"""
FME Engine Module
Exact-rational Fourier-Motzkin elimination over named variables.

Used to project the auxiliary-rate system (rates split into common,
private and compression parts) onto (R1, R2) and compare the shadow with
the closed-form region. All arithmetic inside the engine is on Fractions;
floating-point information terms enter through rationalize().
"""

import itertools
import logging
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from . import settings
from .exceptions import ArgumentError, DomainError, UnknownVariableError
from .region import DOMINANCES, InfoTerms, RegionDescription

logger = logging.getLogger(__name__)

Number = Union[int, float, Fraction, str]

SUBRATE_VARIABLES = ('R1', 'R2', 'R1p', 'R2p', 'R1v', 'R2v')
# compression rates first, then the private parts
SUBRATE_ORDER = ('R1v', 'R2v', 'R1p', 'R2p')


class Relation(Enum):
    LE = '<='
    LT = '<'
    GE = '>='
    GT = '>'

    @property
    def strict(self) -> bool:
        return self in (Relation.LT, Relation.GT)

    @property
    def is_upper(self) -> bool:
        return self in (Relation.LE, Relation.LT)

    def flipped(self) -> 'Relation':
        return {Relation.LE: Relation.GE, Relation.LT: Relation.GT,
                Relation.GE: Relation.LE, Relation.GT: Relation.LT}[self]


def to_fraction(value: Number) -> Fraction:
    if isinstance(value, float) and not math.isfinite(value):
        raise DomainError(f"coefficients must be finite, got {value}")
    return Fraction(value)


def rationalize(value: float, bits: Optional[int] = None) -> Fraction:
    """Round value to the nearest k / 2**bits"""
    bits = settings.RATIONAL_BITS if bits is None else bits
    if not math.isfinite(value):
        raise DomainError(f"cannot rationalize {value}")
    scale = 1 << bits
    return Fraction(round(value * scale), scale)


def rationalize_info(info: InfoTerms, bits: Optional[int] = None) -> Tuple[Fraction, ...]:
    """
    Rationalized I0..I15. Rounding may flip a dominance I_a >= I_b that holds
    with equality; the smaller term is then pulled down to the larger.
    """
    values = [rationalize(value, bits) for value in info.values]
    for larger, smaller in DOMINANCES:
        if values[smaller] > values[larger]:
            logger.debug(f"Rationalized I{smaller} exceeds I{larger} by {values[smaller] - values[larger]}; clipped")
            values[smaller] = values[larger]
    return tuple(values)


@dataclass(frozen=True)
class Constraint:
    """coefficients . x <relation> bound"""

    coefficients: Tuple[Fraction, ...]
    bound: Fraction
    relation: Relation = Relation.LE
    label: str = ''

    def __post_init__(self):
        object.__setattr__(self, 'coefficients', tuple(to_fraction(c) for c in self.coefficients))
        object.__setattr__(self, 'bound', to_fraction(self.bound))
        object.__setattr__(self, 'relation', Relation(self.relation))

    @property
    def strict(self) -> bool:
        return self.relation.strict

    def is_constant(self) -> bool:
        return not any(self.coefficients)

    def upper_form(self) -> 'Constraint':
        """Same constraint written with <= or <"""
        if self.relation.is_upper:
            return self
        return Constraint(tuple(-c for c in self.coefficients), -self.bound, self.relation.flipped(), self.label)

    def satisfied(self, values: Sequence[Fraction], closure: bool = True) -> bool:
        lhs = sum((c * v for c, v in zip(self.coefficients, values) if c), Fraction(0))
        if self.relation is Relation.LE or (closure and self.relation is Relation.LT):
            return lhs <= self.bound
        if self.relation is Relation.LT:
            return lhs < self.bound
        if self.relation is Relation.GE or closure:
            return lhs >= self.bound
        return lhs > self.bound

    def render(self, variables: Sequence[str]) -> str:
        terms = [f"{c}*{name}" for c, name in zip(self.coefficients, variables) if c]
        return f"{' + '.join(terms) or '0'} {self.relation.value} {self.bound}"


@dataclass(frozen=True)
class EliminationStep:
    """Bounds on one eliminated variable, kept for back-substitution"""

    variable: str
    variables: Tuple[str, ...]
    bounds: Tuple[Constraint, ...]


@dataclass(frozen=True)
class RationalLinearSystem:
    variables: Tuple[str, ...]
    constraints: Tuple[Constraint, ...]
    infeasible: bool = False
    lineage: Tuple[EliminationStep, ...] = field(default=(), repr=False)

    def __post_init__(self):
        object.__setattr__(self, 'variables', tuple(self.variables))
        object.__setattr__(self, 'constraints', tuple(self.constraints))
        if len(set(self.variables)) != len(self.variables):
            raise ArgumentError(f"variable names repeat: {self.variables}")
        for constraint in self.constraints:
            if len(constraint.coefficients) != len(self.variables):
                raise ArgumentError(f"constraint '{constraint.label}' has {len(constraint.coefficients)} "
                                    f"coefficients for {len(self.variables)} variables")

    def index(self, name: str) -> int:
        try:
            return self.variables.index(name)
        except ValueError:
            raise UnknownVariableError(name, self.variables) from None

    def involving(self, name: str) -> int:
        j = self.index(name)
        return sum(1 for constraint in self.constraints if constraint.coefficients[j])

    def contains(self, point: Mapping[str, Number], closure: bool = True) -> bool:
        if self.infeasible:
            return False
        values = [to_fraction(point[name]) for name in self.variables]
        return all(constraint.satisfied(values, closure) for constraint in self.constraints)

    def with_bound_shift(self, index: int, delta: Number) -> 'RationalLinearSystem':
        """Copy with one constraint's bound moved by delta"""
        constraints = list(self.constraints)
        constraints[index] = replace(constraints[index], bound=constraints[index].bound + to_fraction(delta))
        return replace(self, constraints=tuple(constraints))

    def reordered(self, variables: Sequence[str]) -> 'RationalLinearSystem':
        positions = [self.index(name) for name in variables]
        if len(positions) != len(self.variables):
            raise ArgumentError(f"{tuple(variables)} is not a permutation of {self.variables}")
        constraints = tuple(
            replace(constraint, coefficients=tuple(constraint.coefficients[p] for p in positions))
            for constraint in self.constraints
        )
        return replace(self, variables=tuple(variables), constraints=constraints)

    def dump(self) -> str:
        """One inequality per line with exact rational literals"""
        lines = [constraint.render(self.variables) for constraint in self.constraints]
        if self.infeasible:
            lines.append('0 < 0')
        return '\n'.join(lines) + '\n'


def _row(variables: Sequence[str], coefficients: Mapping[str, int], relation: Relation,
         bound: Fraction, label: str = '') -> Constraint:
    for name in coefficients:
        if name not in variables:
            raise UnknownVariableError(name, variables)
    return Constraint(tuple(coefficients.get(name, 0) for name in variables), bound, relation, label)


def build_subrates_system(info: Union[InfoTerms, Sequence[Fraction]],
                          bits: Optional[int] = None) -> RationalLinearSystem:
    """
    Auxiliary-rate system in (R1, R2, R1p, R2p, R1v, R2v), common rates
    substituted as R_k - R_kp, with every nonnegativity constraint.
    """
    I = rationalize_info(info, bits) if isinstance(info, InfoTerms) else tuple(Fraction(v) for v in info)
    v = SUBRATE_VARIABLES
    lt, gt, ge = Relation.LT, Relation.GT, Relation.GE
    rows = [
        _row(v, {'R1v': 1}, gt, I[1], 'R1v > I1'),
        _row(v, {'R2v': 1}, gt, I[2], 'R2v > I2'),
        _row(v, {'R2v': 1, 'R1': 1, 'R1p': -1}, lt, I[2] + I[3], 'Tx 2 decodes common 1'),
        _row(v, {'R1v': 1, 'R2': 1, 'R2p': -1}, lt, I[1] + I[4], 'Tx 1 decodes common 2'),
        _row(v, {'R1v': 1, 'R2v': 1, 'R1': 1, 'R1p': -1}, lt, I[2] + I[3] + I[5], 'Tx 2 joint 1'),
        _row(v, {'R1v': 1, 'R2v': 1, 'R2': 1, 'R2p': -1}, lt, I[1] + I[4] + I[6], 'Tx 1 joint 2'),
        _row(v, {'R1p': 1, 'R2p': 1}, lt, I[7], 'private sum'),
        _row(v, {'R1p': 1}, lt, I[8], 'private 1'),
        _row(v, {'R2p': 1}, lt, I[9], 'private 2'),
        _row(v, {'R1v': 1, 'R1p': 1}, lt, I[10] + I[0], 'receiver 1'),
        _row(v, {'R2v': 1, 'R2p': 1}, lt, I[11] + I[0], 'receiver 2'),
        _row(v, {'R1v': 1, 'R1p': 1, 'R2p': 1}, lt, I[12] + I[0], 'receiver 1+p2'),
        _row(v, {'R2v': 1, 'R1p': 1, 'R2p': 1}, lt, I[13] + I[0], 'receiver 2+p1'),
        _row(v, {'R1v': 1, 'R1p': 1, 'R2v': 1, 'R2p': 1}, lt, I[14] + I[0], 'receiver private'),
        _row(v, {'R1v': 1, 'R1': 1, 'R2v': 1, 'R2': 1}, lt, I[15] + I[0], 'receiver total'),
        _row(v, {'R1p': 1}, ge, Fraction(0), 'R1p >= 0'),
        _row(v, {'R2p': 1}, ge, Fraction(0), 'R2p >= 0'),
        _row(v, {'R1': 1, 'R1p': -1}, ge, Fraction(0), 'R1c >= 0'),
        _row(v, {'R2': 1, 'R2p': -1}, ge, Fraction(0), 'R2c >= 0'),
        _row(v, {'R1v': 1}, ge, Fraction(0), 'R1v >= 0'),
        _row(v, {'R2v': 1}, ge, Fraction(0), 'R2v >= 0'),
        _row(v, {'R1': 1}, ge, Fraction(0), 'R1 >= 0'),
        _row(v, {'R2': 1}, ge, Fraction(0), 'R2 >= 0'),
    ]
    return RationalLinearSystem(v, tuple(rows))


def region_to_system(region: RegionDescription, info: Optional[Union[InfoTerms, Sequence[Fraction]]] = None,
                     bits: Optional[int] = None) -> RationalLinearSystem:
    """
    (R1, R2) system of a region. Inequalities that carry an I-term
    combination are evaluated exactly on the rationalized info; the rest
    have their float right-hand side rationalized. Feasibility conditions
    become constant constraints 0 < slack.
    """
    if info is None:
        terms = None
    elif isinstance(info, InfoTerms):
        terms = rationalize_info(info, bits)
    else:
        terms = tuple(Fraction(v) for v in info)

    def exact(value: float, combination) -> Fraction:
        if terms is not None and combination is not None:
            return sum((c * t for c, t in zip(combination, terms) if c), Fraction(0))
        return rationalize(value, bits)

    rows = [
        Constraint((inequality.a1, inequality.a2), exact(inequality.rhs, inequality.terms),
                   Relation.LT if inequality.strict else Relation.LE, inequality.label)
        for inequality in region.inequalities
    ]
    rows += [
        Constraint((0, 0), exact(condition.slack, condition.terms),
                   Relation.LT if condition.strict else Relation.LE, condition.label)
        for condition in region.feasibility
    ]
    rows += [
        Constraint((1, 0), 0, Relation.GE, 'R1 >= 0'),
        Constraint((0, 1), 0, Relation.GE, 'R2 >= 0'),
    ]
    return RationalLinearSystem(('R1', 'R2'), tuple(rows))


def _normalized(constraint: Constraint) -> Constraint:
    """Upper form scaled so the first nonzero coefficient has magnitude one"""
    constraint = constraint.upper_form()
    lead = next((abs(c) for c in constraint.coefficients if c), None)
    if lead is None or lead == 1:
        return constraint
    return Constraint(tuple(c / lead for c in constraint.coefficients), constraint.bound / lead,
                      constraint.relation, constraint.label)


def _simplify(variables: Tuple[str, ...], constraints: Iterable[Constraint],
              lineage: Tuple[EliminationStep, ...]) -> RationalLinearSystem:
    """
    Drop constant constraints that always hold, flag the system infeasible
    on one that never holds, and keep '0 < 0' boundary rows, which hold
    only under closure.
    """
    kept = []
    seen = set()
    infeasible = False
    for constraint in constraints:
        constraint = _normalized(constraint)
        if constraint.is_constant():
            if constraint.bound < 0:
                infeasible = True
                continue
            if constraint.bound > 0 or not constraint.strict:
                continue
        key = (constraint.coefficients, constraint.bound, constraint.relation)
        if key not in seen:
            seen.add(key)
            kept.append(constraint)
    return RationalLinearSystem(variables, tuple(kept), infeasible, lineage)


def eliminate(system: RationalLinearSystem, var: str) -> RationalLinearSystem:
    """
    Remove var by pairing each of its lower bounds with each upper bound.
    A combined row is strict when either parent is.
    """
    j = system.index(var)
    rest = tuple(name for name in system.variables if name != var)

    zero, lower, upper = [], [], []
    for constraint in system.constraints:
        constraint = constraint.upper_form()
        coefficient = constraint.coefficients[j]
        if coefficient == 0:
            zero.append(constraint)
        elif coefficient > 0:
            upper.append(constraint)
        else:
            lower.append(constraint)

    def drop(coefficients):
        return coefficients[:j] + coefficients[j + 1:]

    combined = [replace(constraint, coefficients=drop(constraint.coefficients)) for constraint in zero]
    for low in lower:
        a = -low.coefficients[j]
        for up in upper:
            b = up.coefficients[j]
            coefficients = tuple(b * lc + a * uc for lc, uc in zip(low.coefficients, up.coefficients))
            strict = low.strict or up.strict
            combined.append(Constraint(drop(coefficients), b * low.bound + a * up.bound,
                                       Relation.LT if strict else Relation.LE))

    step = EliminationStep(var, system.variables, tuple(lower + upper))
    result = _simplify(rest, combined, system.lineage + (step,))
    logger.debug(f"Eliminated {var}: {len(lower)} lower x {len(upper)} upper, "
                 f"{len(system.constraints)} -> {len(result.constraints)} constraints")
    return replace(result, infeasible=result.infeasible or system.infeasible)


def prune(system: RationalLinearSystem) -> RationalLinearSystem:
    """Keep only the tightest row per direction; at equal bounds the strict row wins"""
    best: Dict[Tuple[Fraction, ...], Constraint] = {}
    order = []
    for constraint in system.constraints:
        constraint = _normalized(constraint)
        key = constraint.coefficients
        current = best.get(key)
        if current is None:
            order.append(key)
            best[key] = constraint
        elif (constraint.bound < current.bound
              or (constraint.bound == current.bound and constraint.strict and not current.strict)):
            best[key] = constraint
    return replace(system, constraints=tuple(best[key] for key in order))


def elimination_order(system: RationalLinearSystem, keep: Sequence[str]) -> List[str]:
    """Subrate order when it applies, otherwise fewest-involved variable first"""
    targets = [name for name in system.variables if name not in keep]
    if set(targets) <= set(SUBRATE_ORDER):
        return [name for name in SUBRATE_ORDER if name in targets]
    order = []
    current = system
    while targets:
        name = min(targets, key=lambda n: (current.involving(n), current.index(n)))
        order.append(name)
        targets.remove(name)
        current = prune(eliminate(current, name))
    return order


def project(system: RationalLinearSystem, keep: Sequence[str]) -> RationalLinearSystem:
    """Shadow of system on keep, pruned after every elimination; variables follow keep's order"""
    keep = tuple(keep)
    for name in keep:
        system.index(name)
    if set(keep) == set(system.variables):
        return system.reordered(keep)

    projected = system
    for name in elimination_order(system, keep):
        projected = prune(eliminate(projected, name))
    projected = projected.reordered(keep)
    logger.info(f"Projected {len(system.variables)} variables onto {keep}: "
                f"{len(projected.constraints)} constraints{' (infeasible)' if projected.infeasible else ''}")
    return projected


def extend_point(projected: RationalLinearSystem, point: Mapping[str, Number],
                 closure: bool = True) -> Optional[Dict[str, Fraction]]:
    """
    Lift a point of the projected system to every eliminated variable by
    intersecting one-dimensional intervals in reverse elimination order.
    Returns None when some interval is empty.
    """
    values = {name: to_fraction(point[name]) for name in projected.variables}
    for step in reversed(projected.lineage):
        j = step.variables.index(step.variable)
        low, high = None, None
        low_strict = high_strict = False
        for constraint in step.bounds:
            rest = sum((c * values[name] for c, name in zip(constraint.coefficients, step.variables)
                        if c and name != step.variable), Fraction(0))
            a = constraint.coefficients[j]
            limit = (constraint.bound - rest) / a
            if a > 0:
                if high is None or limit < high or (limit == high and constraint.strict):
                    high, high_strict = limit, constraint.strict
            elif low is None or limit > low or (limit == low and constraint.strict):
                low, low_strict = limit, constraint.strict

        if low is not None and high is not None:
            if low > high or (low == high and not closure and (low_strict or high_strict)):
                return None
            value = (low + high) / 2
        elif low is not None:
            value = low + 1
        elif high is not None:
            value = high - 1
        else:
            value = Fraction(0)
        values[step.variable] = value
    return values


@dataclass(frozen=True)
class EquivalenceVerdict:
    equivalent: bool
    points_checked: int
    counterexample: Optional[Dict[str, Fraction]] = None
    in_first: Optional[bool] = None

    def __bool__(self):
        return self.equivalent

    def describe(self) -> str:
        if self.equivalent:
            return f"equivalent on {self.points_checked} points"
        point = ', '.join(f"{name}={value}" for name, value in self.counterexample.items())
        side = 'first' if self.in_first else 'second'
        return f"differ at ({point}): only the {side} system contains it"


class _IntegerRows:
    """Constraint rows scaled to integers so membership tests avoid Fraction arithmetic"""

    def __init__(self, system: RationalLinearSystem, closure: bool):
        self.infeasible = system.infeasible
        self.rows = []
        for constraint in system.constraints:
            constraint = constraint.upper_form()
            scale = math.lcm(constraint.bound.denominator, *(c.denominator for c in constraint.coefficients))
            coefficients = tuple(int(c * scale) for c in constraint.coefficients)
            self.rows.append((coefficients, int(constraint.bound * scale), constraint.strict and not closure))

    def contains(self, numerators: Sequence[int], denominator: int) -> bool:
        if self.infeasible:
            return False
        for coefficients, bound, strict in self.rows:
            lhs = sum(c * n for c, n in zip(coefficients, numerators))
            limit = bound * denominator
            if lhs > limit or (strict and lhs == limit):
                return False
        return True


Box = Union[Tuple[Number, Number], Mapping[str, Tuple[Number, Number]]]


def default_box(*systems: RationalLinearSystem) -> Tuple[Fraction, Fraction]:
    """[0, largest |bound| + 1], wide enough to cross every facet"""
    largest = max((abs(c.bound) for system in systems for c in system.constraints), default=Fraction(0))
    return Fraction(0), largest + 1


def systems_equivalent(a: RationalLinearSystem, b: RationalLinearSystem, box: Optional[Box] = None,
                       samples: int = 1000, seed: int = 0, grid: int = 100,
                       closure: bool = True) -> EquivalenceVerdict:
    """
    Compare memberships of a and b on a regular grid over box plus
    pseudo-random rational points (Philox stream seeded with seed).
    """
    if set(a.variables) != set(b.variables):
        raise ArgumentError(f"systems range over different variables: {a.variables} vs {b.variables}")
    b = b.reordered(a.variables)
    names = a.variables
    if box is None:
        box = default_box(a, b)
    if isinstance(box, Mapping):
        limits = [tuple(to_fraction(x) for x in box[name]) for name in names]
    else:
        limits = [tuple(to_fraction(x) for x in box)] * len(names)

    first, second = _IntegerRows(a, closure), _IntegerRows(b, closure)

    per_axis = grid if len(names) <= 2 else max(2, round((grid * grid) ** (1.0 / len(names))))
    axes = [[low + (high - low) * Fraction(i, per_axis - 1) for i in range(per_axis)] for low, high in limits]

    resolution = 1 << 30
    rng = np.random.Generator(np.random.Philox(seed))
    draws = rng.integers(0, resolution, size=(samples, len(names)), endpoint=True)
    random_points = (
        tuple(low + (high - low) * Fraction(int(n), resolution) for (low, high), n in zip(limits, row))
        for row in draws
    )

    checked = 0
    for point in itertools.chain(itertools.product(*axes), random_points):
        denominator = math.lcm(*(x.denominator for x in point))
        numerators = [x.numerator * (denominator // x.denominator) for x in point]
        in_a = first.contains(numerators, denominator)
        in_b = second.contains(numerators, denominator)
        checked += 1
        if in_a != in_b:
            counterexample = dict(zip(names, point))
            logger.info(f"Systems differ at {counterexample}")
            return EquivalenceVerdict(False, checked, counterexample, in_a)
    return EquivalenceVerdict(True, checked)


@dataclass(frozen=True)
class InstanceVerdict:
    """Outcome of one projection-versus-region comparison"""

    label: str
    projected: RationalLinearSystem
    closed_form: RationalLinearSystem
    verdict: EquivalenceVerdict


def verify_instance(info: InfoTerms, region: RegionDescription, label: str = '', samples: int = 1000,
                    seed: int = 0, grid: int = 100, perturb: Optional[Fraction] = None) -> InstanceVerdict:
    """
    Project the auxiliary-rate system built from info and compare it with
    region under one shared rationalization. perturb tightens the first
    nonnegativity row of the projection to R >= |perturb|; that removes the
    origin, so any nonempty region then fails the comparison.
    """
    terms = rationalize_info(info)
    projected = project(build_subrates_system(terms), ('R1', 'R2'))
    if perturb:
        index = next(i for i, c in enumerate(projected.constraints)
                     if any(c.coefficients) and max(c.coefficients) <= 0)
        projected = projected.with_bound_shift(index, -abs(to_fraction(perturb)))
    closed_form = region_to_system(region, terms)
    verdict = systems_equivalent(projected, closed_form, default_box(projected, closed_form),
                                 samples=samples, seed=seed, grid=grid)
    logger.info(f"{label or 'instance'}: {verdict.describe()}")
    return InstanceVerdict(label, projected, closed_form, verdict)
