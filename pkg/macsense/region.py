"""
Region Evaluator Module
Information terms I0..I15 of a scheme and the achievable (R1, R2) region as
an explicit list of inequalities with coefficients in {0, 1}.

With U = (U0, U1, U2):

    I0  = I(V1; X1X2Y | U) + I(V2; X1X2YV1 | U)
    I1  = I(V1; X1Z1 | U)          I2  = I(V2; X2Z2 | U)
    I3  = I(U1; X2Z2 | U0U2)       I4  = I(U2; X1Z1 | U0U1)
    I5  = I(V1; X2Z2 | U)          I6  = I(V2; X1Z1 | U)
    I7  = I(X1X2; YV1V2 | U)
    I8  = I(X1; YV1V2 | U X2)      I9  = I(X2; YV1V2 | U X1)
    I10 = I(X1; Y | U0 X2)         I11 = I(X2; Y | U0 X1)
    I12 = I(X1X2; Y | U0U2)        I13 = I(X1X2; Y | U0U1)
    I14 = I(X1X2; Y | U0)          I15 = I(X1X2; Y)
"""

import csv
import io
import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from . import settings
from .exceptions import DomainError, InternalConsistencyError
from .probability import JointDistribution, conditional_mutual_information
from .scheme import require_constant_v

logger = logging.getLogger(__name__)

U = ('U0', 'U1', 'U2')
TERM_COUNT = 16
DOMINANCE_TOL = 1e-9

# one entry per term; each entry lists the (A, B, C) triples whose I(A;B|C) are summed
TERM_DEFINITIONS = (
    ((('V1',), ('X1', 'X2', 'Y'), U), (('V2',), ('X1', 'X2', 'Y', 'V1'), U)),
    ((('V1',), ('X1', 'Z1'), U),),
    ((('V2',), ('X2', 'Z2'), U),),
    ((('U1',), ('X2', 'Z2'), ('U0', 'U2')),),
    ((('U2',), ('X1', 'Z1'), ('U0', 'U1')),),
    ((('V1',), ('X2', 'Z2'), U),),
    ((('V2',), ('X1', 'Z1'), U),),
    ((('X1', 'X2'), ('Y', 'V1', 'V2'), U),),
    ((('X1',), ('Y', 'V1', 'V2'), U + ('X2',)),),
    ((('X2',), ('Y', 'V1', 'V2'), U + ('X1',)),),
    ((('X1',), ('Y',), ('U0', 'X2')),),
    ((('X2',), ('Y',), ('U0', 'X1')),),
    ((('X1', 'X2'), ('Y',), ('U0', 'U2')),),
    ((('X1', 'X2'), ('Y',), ('U0', 'U1')),),
    ((('X1', 'X2'), ('Y',), ('U0',)),),
    ((('X1', 'X2'), ('Y',), ()),),
)

# (larger, smaller) pairs that hold for every joint of the scheme factorization
DOMINANCES = ((1, 5), (2, 6), (7, 9), (13, 11), (12, 10), (7, 8))


def combo(**coefficients: int) -> Tuple[int, ...]:
    """Coefficient vector over I0..I15, e.g. combo(I3=1, I5=1, I1=-1)"""
    vector = [0] * TERM_COUNT
    for label, coefficient in coefficients.items():
        vector[int(label[1:])] = coefficient
    return tuple(vector)


@dataclass(frozen=True)
class InfoTerms:
    """The sixteen information terms, in bits"""

    values: Tuple[float, ...]

    def __post_init__(self):
        values = tuple(float(v) for v in self.values)
        if len(values) != TERM_COUNT:
            raise DomainError(f"expected {TERM_COUNT} information terms, got {len(values)}")
        object.__setattr__(self, 'values', values)

    def __getitem__(self, j: int) -> float:
        return self.values[j]

    def evaluate(self, terms: Sequence[int]) -> float:
        return sum(c * v for c, v in zip(terms, self.values) if c)

    def replace(self, j: int, value: float) -> 'InfoTerms':
        values = list(self.values)
        values[j] = value
        return InfoTerms(tuple(values))

    def as_dict(self) -> Dict[str, float]:
        return {f'I{j}': v for j, v in enumerate(self.values)}

    def check_dominances(self, tol: float = DOMINANCE_TOL):
        for larger, smaller in DOMINANCES:
            gap = self.values[larger] - self.values[smaller]
            if gap < -tol:
                logger.error(f"I{larger} < I{smaller} by {-gap:.3e} bits")
                raise InternalConsistencyError(
                    f"dominance I{larger} >= I{smaller} violated by {-gap:.3e} bits; "
                    f"the joint does not follow the scheme factorization")


def _without_states(joint: JointDistribution) -> JointDistribution:
    keep = [name for name in joint.names if name not in ('S1', 'S2')]
    return joint.marginal(keep) if len(keep) < len(joint.names) else joint


def compute_info_terms(joint: JointDistribution) -> InfoTerms:
    """
    Evaluate I0..I15 on a 12-variable scheme joint.

    Raises:
        UnknownVariableError: a scheme variable is missing from joint
        InternalConsistencyError: a dominance fails by more than 1e-9 bits
    """
    reduced = _without_states(joint)
    values = tuple(
        sum(conditional_mutual_information(reduced, a, b, c) for a, b, c in parts)
        for parts in TERM_DEFINITIONS
    )
    info = InfoTerms(values)
    info.check_dominances()
    logger.debug(f"Information terms: {', '.join(f'I{j}={v:.6f}' for j, v in enumerate(values))}")
    return info


@dataclass(frozen=True)
class Inequality:
    """a1 R1 + a2 R2 (< or <=) rhs; terms, when known, writes rhs as a combination of I0..I15"""

    a1: int
    a2: int
    rhs: float
    strict: bool = True
    label: str = ''
    terms: Optional[Tuple[int, ...]] = None

    def holds(self, r1: float, r2: float, closure: bool = True) -> bool:
        lhs = self.a1 * r1 + self.a2 * r2
        if closure:
            return lhs <= self.rhs + settings.CLOSURE_SLACK
        return lhs < self.rhs if self.strict else lhs <= self.rhs

    def describe(self) -> str:
        lhs = ' + '.join(name for a, name in ((self.a1, 'R1'), (self.a2, 'R2')) if a)
        return f"{lhs} {'<' if self.strict else '<='} {self.rhs:.12g}"


@dataclass(frozen=True)
class FeasibilityCondition:
    """Named condition 'slack > 0' (or >= 0 when not strict)"""

    label: str
    slack: float
    strict: bool = True
    terms: Optional[Tuple[int, ...]] = None

    def holds(self, closure: bool = True) -> bool:
        if closure:
            return self.slack >= -settings.CLOSURE_SLACK
        return self.slack > 0 if self.strict else self.slack >= 0


@dataclass(frozen=True)
class RegionDescription:
    inequalities: Tuple[Inequality, ...]
    feasibility: Tuple[FeasibilityCondition, ...] = ()
    source: str = ''

    def conditions_hold(self, closure: bool = True) -> bool:
        return all(condition.holds(closure) for condition in self.feasibility)

    def contains(self, r1: float, r2: float, closure: bool = True) -> bool:
        return point_feasible(self, r1, r2, closure)

    def is_empty(self, closure: bool = True) -> bool:
        return not point_feasible(self, 0.0, 0.0, closure)

    def rate_bounds(self) -> Tuple[float, float, float]:
        """Tightest right-hand sides on R1, R2 and R1 + R2"""
        bounds = {}
        for inequality in self.inequalities:
            direction = (inequality.a1, inequality.a2)
            bounds[direction] = min(bounds.get(direction, float('inf')), inequality.rhs)
        return bounds.get((1, 0), float('inf')), bounds.get((0, 1), float('inf')), bounds.get((1, 1), float('inf'))

    def max_sum_rate(self, closure: bool = True) -> Optional[float]:
        """max R1 + R2 over the region, or None when the region is empty"""
        if self.is_empty(closure):
            return None
        a, b, c = (max(bound, 0.0) for bound in self.rate_bounds())
        return min(c, a + b)

    def vertices(self) -> List[Tuple[float, float]]:
        """Corners of the rate polygon, counter-clockwise from the origin"""
        if self.is_empty():
            return []
        a, b, c = (max(bound, 0.0) for bound in self.rate_bounds())
        a, b = min(a, c), min(b, c)
        corners = [(0.0, 0.0), (a, 0.0), (a, min(b, c - a)), (min(a, c - b), b), (0.0, b)]
        vertices = []
        for corner in corners:
            if not vertices or corner != vertices[-1]:
                vertices.append(corner)
        if len(vertices) > 1 and vertices[-1] == vertices[0]:
            vertices.pop()
        return vertices

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator='\n')
        writer.writerow(['a1', 'a2', 'rhs_bits', 'strict', 'label'])
        for inequality in self.inequalities:
            writer.writerow([inequality.a1, inequality.a2, f'{inequality.rhs:.12g}',
                             int(inequality.strict), inequality.label])
        return buffer.getvalue()

    def vertices_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator='\n')
        writer.writerow(['R1', 'R2'])
        for r1, r2 in self.vertices():
            writer.writerow([f'{r1:.12g}', f'{r2:.12g}'])
        return buffer.getvalue()


def point_feasible(region: RegionDescription, r1: float, r2: float, closure: bool = True) -> bool:
    """
    Membership of (r1, r2) in region.

    With closure, strict inequalities are read as <= with the configured
    slack (MACSENSE_CLOSURE_SLACK); without it they are strict.
    """
    if r1 < 0 or r2 < 0:
        raise DomainError(f"rates must be nonnegative, got ({r1}, {r2})")
    if not region.conditions_hold(closure):
        return False
    return all(inequality.holds(r1, r2, closure) for inequality in region.inequalities)


_R1_BASE = combo(I3=1, I5=1, I1=-1)
_R2_BASE = combo(I4=1, I6=1, I2=-1)

_MIN_R1 = (
    ('I8', combo(I8=1)),
    ('I10+I0-I1', combo(I10=1, I0=1, I1=-1)),
    ('I13+I0-I2', combo(I13=1, I0=1, I2=-1)),
    ('I14+I0-I1-I2', combo(I14=1, I0=1, I1=-1, I2=-1)),
)
_MIN_R2 = (
    ('I9', combo(I9=1)),
    ('I11+I0-I2', combo(I11=1, I0=1, I2=-1)),
    ('I12+I0-I1', combo(I12=1, I0=1, I1=-1)),
    ('I14+I0-I1-I2', combo(I14=1, I0=1, I1=-1, I2=-1)),
)
_MIN_SUM = (
    ('I7', combo(I7=1)),
    ('I12+I0-I1', combo(I12=1, I0=1, I1=-1)),
    ('I13+I0-I2', combo(I13=1, I0=1, I2=-1)),
    ('I14+I0-I1-I2', combo(I14=1, I0=1, I1=-1, I2=-1)),
)

THEOREM_FEASIBILITY = (
    ('I3+I5>I1', _R1_BASE),
    ('I4+I6>I2', _R2_BASE),
    ('I14+I0>I1+I2', combo(I14=1, I0=1, I1=-1, I2=-1)),
    ('I10+I0>I1', combo(I10=1, I0=1, I1=-1)),
    ('I11+I0>I2', combo(I11=1, I0=1, I2=-1)),
)


def _add(*vectors: Sequence[int]) -> Tuple[int, ...]:
    return tuple(sum(parts) for parts in zip(*vectors))


def theorem_inequalities() -> List[Tuple[int, int, str, Tuple[int, ...]]]:
    """(a1, a2, label, terms) for the thirteen rate inequalities, min-expressions expanded"""
    rows = [(1, 0, f'R1: I3+I5-I1 + {label}', _add(_R1_BASE, terms)) for label, terms in _MIN_R1]
    rows += [(0, 1, f'R2: I4+I6-I2 + {label}', _add(_R2_BASE, terms)) for label, terms in _MIN_R2]
    rows += [(1, 1, f'R1+R2: I3+I4+I5+I6-I1-I2 + {label}', _add(_R1_BASE, _R2_BASE, terms))
             for label, terms in _MIN_SUM]
    rows.append((1, 1, 'R1+R2: I15+I0-I1-I2', combo(I15=1, I0=1, I1=-1, I2=-1)))
    return rows


def theorem_region(info: InfoTerms) -> RegionDescription:
    """
    Achievable region from the information terms: thirteen strict rate
    inequalities plus the five feasibility conditions with signed slack.
    """
    inequalities = tuple(
        Inequality(a1, a2, info.evaluate(terms), strict=True, label=label, terms=terms)
        for a1, a2, label, terms in theorem_inequalities()
    )
    feasibility = tuple(
        FeasibilityCondition(label, info.evaluate(terms), strict=True, terms=terms)
        for label, terms in THEOREM_FEASIBILITY
    )
    region = RegionDescription(inequalities, feasibility, source='theorem')
    if not region.conditions_hold():
        failing = [c.label for c in feasibility if not c.holds()]
        logger.debug(f"Theorem region empty: {', '.join(failing)} fail")
    return region


def corollary_region(joint: JointDistribution) -> RegionDescription:
    """
    Region for constant compression variables, evaluated straight from the joint.

    Each bound also carries its combination of I0..I15. With V1, V2
    constant, U2 is independent of (U1, X1, Z2, Y) given (U0, X2) and
    symmetrically for U1, so I(U1;Z2|X2U0) = I3, I(X1;Y|X2U1U0) = I8 and
    I(X1X2;Y|U) = I7.

    Raises:
        PreconditionError: V1 or V2 is not constant under joint
    """
    require_constant_v(joint)
    reduced = _without_states(joint)

    def cmi(a, b, c=()):
        return conditional_mutual_information(reduced, a, b, c)

    cooperation_1 = cmi('U1', 'Z2', ('X2', 'U0'))
    cooperation_2 = cmi('U2', 'Z1', ('X1', 'U0'))
    inequalities = (
        Inequality(1, 0, cmi('X1', 'Y', ('X2', 'U1', 'U0')) + cooperation_1, strict=False,
                   label='R1: I(X1;Y|X2U1U0)+I(U1;Z2|X2U0)', terms=combo(I8=1, I3=1)),
        Inequality(0, 1, cmi('X2', 'Y', ('X1', 'U2', 'U0')) + cooperation_2, strict=False,
                   label='R2: I(X2;Y|X1U2U0)+I(U2;Z1|X1U0)', terms=combo(I9=1, I4=1)),
        Inequality(1, 1, cmi(('X1', 'X2'), 'Y'), strict=False, label='R1+R2: I(X1X2;Y)',
                   terms=combo(I15=1)),
        Inequality(1, 1, cmi(('X1', 'X2'), 'Y', U) + cooperation_1 + cooperation_2, strict=False,
                   label='R1+R2: I(X1X2;Y|U)+I(U1;Z2|X2U0)+I(U2;Z1|X1U0)', terms=combo(I7=1, I3=1, I4=1)),
    )
    return RegionDescription(inequalities, (), source='corollary')


def transcribed_region(joint: JointDistribution) -> RegionDescription:
    """
    Region written term by term from the unreduced inequality system, with
    composite quantities such as I(U_k V_k; X_kbar Z_kbar | U0 U_kbar)
    evaluated directly on the joint.
    """
    reduced = _without_states(joint)

    def cmi(a, b, c=()):
        return conditional_mutual_information(reduced, a, b, c)

    compression = cmi(('V1', 'V2'), ('X1', 'X2', 'Y'), U) + cmi('V1', 'V2', U)
    loss = {k: cmi(f'V{k}', (f'X{k}', f'Z{k}'), U) for k in (1, 2)}
    head = {}
    inequalities = []
    for k in (1, 2):
        kbar = 3 - k
        head[k] = cmi((f'U{k}', f'V{k}'), (f'X{kbar}', f'Z{kbar}'), ('U0', f'U{kbar}')) - loss[k]
        options = (
            cmi(f'X{k}', 'Y', ('U0', f'X{kbar}')) + compression - loss[k],
            cmi(('X1', 'X2'), 'Y', ('U0', f'U{k}')) + compression - loss[kbar],
            cmi(('X1', 'X2'), 'Y', ('U0',)) + compression - loss[1] - loss[2],
            cmi(f'X{k}', ('Y', 'V1', 'V2'), U + (f'X{kbar}',)),
        )
        a1, a2 = (1, 0) if k == 1 else (0, 1)
        inequalities += [Inequality(a1, a2, head[k] + option, strict=False, label=f'R{k} option {i}')
                         for i, option in enumerate(options, 1)]

    sum_options = (
        cmi(('X1', 'X2'), 'Y', ('U0', 'U2')) + compression - loss[1],
        cmi(('X1', 'X2'), 'Y', ('U0', 'U1')) + compression - loss[2],
        cmi(('X1', 'X2'), 'Y', ('U0',)) + compression - loss[1] - loss[2],
        cmi(('X1', 'X2'), ('Y', 'V1', 'V2'), U),
    )
    inequalities += [Inequality(1, 1, head[1] + head[2] + option, strict=False, label=f'R1+R2 option {i}')
                     for i, option in enumerate(sum_options, 1)]
    inequalities.append(Inequality(1, 1, cmi(('X1', 'X2'), 'Y') + compression - loss[1] - loss[2],
                                   strict=False, label='R1+R2 total'))

    feasibility = (
        FeasibilityCondition('Tx 1 common part decodable', head[1], strict=False),
        FeasibilityCondition('Tx 2 common part decodable', head[2], strict=False),
        FeasibilityCondition('compression sum', cmi(('X1', 'X2'), 'Y', ('U0',)) + compression
                             - loss[1] - loss[2], strict=False),
        FeasibilityCondition('compression 1', cmi('X1', 'Y', ('U0', 'X2')) + compression - loss[1],
                             strict=False),
        FeasibilityCondition('compression 2', cmi('X2', 'Y', ('U0', 'X1')) + compression - loss[2],
                             strict=False),
    )
    return RegionDescription(tuple(inequalities), feasibility, source='transcribed')
