"""
Probability Core Module
Finite-alphabet probability tensors with marginalization, conditioning,
entropy and conditional mutual information. Every information quantity is
returned in bits.

Layout convention: a JointDistribution stores its weights as a dense tensor
whose axes follow the declaration order of its variables, flattened in
row-major order (first declared variable slowest-varying).
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .exceptions import (
    ArgumentError,
    DomainError,
    InternalConsistencyError,
    NormalizationError,
    ShapeError,
    UnknownVariableError,
)

logger = logging.getLogger(__name__)

NORMALIZATION_TOL = 1e-12
CLAMP_TOL = 1e-10

Names = Union[str, Iterable[str]]
VariableSet = frozenset


def variable_set(names: Names) -> frozenset:
    """Build a VariableSet; a bare string is one variable name, not a sequence of letters"""
    if isinstance(names, str):
        return frozenset((names,))
    return frozenset(names)


@dataclass(frozen=True)
class Alphabet:
    """A named, ordered, finite set of symbol labels"""

    name: str
    symbols: Tuple[str, ...]

    def __post_init__(self):
        symbols = tuple(str(symbol) for symbol in self.symbols)
        if not symbols:
            raise DomainError(f"alphabet '{self.name}' must contain at least one symbol")
        if len(set(symbols)) != len(symbols):
            raise ArgumentError(f"alphabet '{self.name}' has duplicate symbols: {symbols}")
        object.__setattr__(self, 'symbols', symbols)

    @classmethod
    def of_size(cls, name: str, size: int) -> 'Alphabet':
        """Alphabet with symbols '0', '1', ..., str(size - 1)"""
        if size < 1:
            raise DomainError(f"alphabet '{name}' must have positive size, got {size}")
        return cls(name, tuple(str(i) for i in range(size)))

    @property
    def size(self) -> int:
        return len(self.symbols)

    def index(self, symbol) -> int:
        try:
            return self.symbols.index(str(symbol))
        except ValueError:
            raise ArgumentError(f"symbol '{symbol}' is not in alphabet '{self.name}' {self.symbols}") from None

    def renamed(self, name: str) -> 'Alphabet':
        return Alphabet(name, self.symbols)


class Severity(Enum):
    WARNING = "warning"
    ERROR = "error"


@dataclass(frozen=True)
class Diagnostic:
    """One finding reported by validate()"""

    severity: Severity
    code: str
    message: str
    indices: Tuple[Tuple[int, ...], ...] = ()
    deficit: Optional[float] = None


def _as_variables(variables) -> Tuple[Tuple[str, Alphabet], ...]:
    if isinstance(variables, Mapping):
        variables = variables.items()
    result = []
    for name, alphabet in variables:
        if not isinstance(alphabet, Alphabet):
            alphabet = Alphabet(name, tuple(alphabet))
        result.append((str(name), alphabet))
    names = [name for name, _ in result]
    if len(set(names)) != len(names):
        raise ArgumentError(f"variable names must be unique, got {names}")
    return tuple(result)


def _as_weights(variables, weights) -> np.ndarray:
    shape = tuple(alphabet.size for _, alphabet in variables)
    array = np.array(weights, dtype=float)
    if array.size != int(np.prod(shape, dtype=np.int64)):
        for (name, alphabet), size in zip(variables, array.shape):
            if alphabet.size != size:
                raise ShapeError(
                    f"axis for '{name}' has {size} entries but its alphabet has {alphabet.size}",
                    variable=name,
                )
        raise ShapeError(f"weights have {array.size} cells, expected {shape}")
    array = array.reshape(shape)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class JointDistribution:
    """
    Labeled dense probability tensor over a tuple of named finite variables.

    Construction validates nonnegativity and normalization; use
    JointDistribution.unchecked() for tensors that are only meant to be
    inspected with validate().
    """

    variables: Tuple[Tuple[str, Alphabet], ...]
    weights: np.ndarray

    def __post_init__(self):
        variables = _as_variables(self.variables)
        object.__setattr__(self, 'variables', variables)
        object.__setattr__(self, 'weights', _as_weights(variables, self.weights))

        problems = validate(self)
        if problems:
            first = problems[0]
            if first.code == 'normalization':
                raise NormalizationError(first.message, deficit=first.deficit)
            raise DomainError(first.message)

    @classmethod
    def unchecked(cls, variables, weights) -> 'JointDistribution':
        """Build without validation (diagnostics and tests only)"""
        joint = object.__new__(cls)
        variables = _as_variables(variables)
        object.__setattr__(joint, 'variables', variables)
        object.__setattr__(joint, 'weights', _as_weights(variables, weights))
        return joint

    @classmethod
    def point_mass(cls, variables, symbols: Sequence) -> 'JointDistribution':
        """Deterministic distribution putting all mass on one symbol tuple"""
        variables = _as_variables(variables)
        weights = np.zeros(tuple(alphabet.size for _, alphabet in variables))
        index = tuple(alphabet.index(symbol) for (_, alphabet), symbol in zip(variables, symbols))
        weights[index] = 1.0
        return cls(variables, weights)

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(name for name, _ in self.variables)

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.weights.shape

    def alphabet(self, name: str) -> Alphabet:
        for variable, alphabet in self.variables:
            if variable == name:
                return alphabet
        raise UnknownVariableError(name, self.names)

    def axis(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise UnknownVariableError(name, self.names) from None

    def total(self) -> float:
        return float(self.weights.sum())

    def probability(self, assignment: Mapping[str, object]) -> float:
        """P(assignment) for a partial assignment name -> symbol"""
        marginal = marginalize(self, assignment.keys())
        index = tuple(alphabet.index(assignment[name]) for name, alphabet in marginal.variables)
        return float(marginal.weights[index])

    def marginal(self, keep: Names) -> 'JointDistribution':
        return marginalize(self, keep)

    def product(self, other: 'JointDistribution') -> 'JointDistribution':
        """Joint of self and other under independence"""
        weights = np.multiply.outer(self.weights, other.weights)
        return JointDistribution(self.variables + other.variables, weights)

    def __repr__(self):
        names = ', '.join(f"{name}[{alphabet.size}]" for name, alphabet in self.variables)
        return f"JointDistribution({names})"


def _check_names(joint: JointDistribution, names: Iterable[str]) -> frozenset:
    names = variable_set(names)
    known = set(joint.names)
    for name in sorted(names):
        if name not in known:
            raise UnknownVariableError(name, joint.names)
    return names


def _marginal_array(joint: JointDistribution, keep: frozenset) -> Tuple[np.ndarray, Tuple[str, ...]]:
    """Sum out every variable not in keep; axes stay in declaration order"""
    kept = tuple(name for name in joint.names if name in keep)
    dropped = tuple(axis for axis, name in enumerate(joint.names) if name not in keep)
    if not dropped:
        return joint.weights, kept
    return joint.weights.sum(axis=dropped), kept


def marginalize(joint: JointDistribution, keep: Names) -> JointDistribution:
    """
    Marginal of joint on the variables in keep.

    The result keeps the declaration order of joint. An empty keep set sums
    every axis and yields a zero-dimensional distribution holding the total
    mass.
    """
    keep = _check_names(joint, keep)
    array, kept = _marginal_array(joint, keep)
    variables = tuple((name, joint.alphabet(name)) for name in kept)
    return JointDistribution.unchecked(variables, array)


def _axes(order: Tuple[str, ...], names: frozenset) -> Tuple[int, ...]:
    return tuple(axis for axis, name in enumerate(order) if name in names)


def _disjoint(*sets: frozenset):
    seen = set()
    for names in sets:
        overlap = seen & names
        if overlap:
            raise ArgumentError(f"variable sets must be pairwise disjoint; shared: {sorted(overlap)}")
        seen |= names


def _clamp(value: float, what: str) -> float:
    if value >= 0.0:
        return value
    if value >= -CLAMP_TOL:
        return 0.0
    logger.error(f"{what} evaluated to {value:.3e} bits")
    raise InternalConsistencyError(f"{what} is negative ({value:.3e} bits)")


def conditional_mutual_information(joint: JointDistribution, a: Names, b: Names, c: Names = ()) -> float:
    """
    I(A;B|C) in bits.

    Computed as the sum of p(a,b,c) log2[p(a,b,c) p(c) / (p(a,c) p(b,c))]
    over cells with positive mass, so 0 log 0 = 0.

    Args:
        joint: distribution containing every named variable
        a, b, c: pairwise disjoint variable sets; c may be empty

    Returns:
        Nonnegative number of bits (values in [-1e-10, 0) are clamped to 0)
    """
    a = _check_names(joint, a)
    b = _check_names(joint, b)
    c = _check_names(joint, c)
    _disjoint(a, b, c)
    if not a or not b:
        return 0.0

    p_abc, order = _marginal_array(joint, a | b | c)
    a_axes, b_axes = _axes(order, a), _axes(order, b)

    p_ac = p_abc.sum(axis=b_axes, keepdims=True)
    p_bc = p_abc.sum(axis=a_axes, keepdims=True)
    p_c = p_abc.sum(axis=a_axes + b_axes, keepdims=True)

    mask = p_abc > 0
    numerator = np.broadcast_to(p_abc * p_c, p_abc.shape)[mask]
    denominator = np.broadcast_to(p_ac * p_bc, p_abc.shape)[mask]
    if np.any(denominator <= 0):
        raise InternalConsistencyError("positive joint mass over a zero marginal")

    value = float(np.sum(p_abc[mask] * np.log2(numerator / denominator)))
    return _clamp(value, f"I({','.join(sorted(a))};{','.join(sorted(b))}|{','.join(sorted(c))})")


def mutual_information(joint: JointDistribution, a: Names, b: Names) -> float:
    return conditional_mutual_information(joint, a, b, ())


def entropy(joint: JointDistribution, a: Names, given: Names = ()) -> float:
    """H(A|C) in bits"""
    a = _check_names(joint, a)
    given = _check_names(joint, given)
    _disjoint(a, given)
    if not a:
        return 0.0

    p_ac, order = _marginal_array(joint, a | given)
    p_c = p_ac.sum(axis=_axes(order, a), keepdims=True)
    mask = p_ac > 0
    ratio = p_ac[mask] / np.broadcast_to(p_c, p_ac.shape)[mask]
    value = float(-np.sum(p_ac[mask] * np.log2(ratio)))
    return _clamp(value, f"H({','.join(sorted(a))}|{','.join(sorted(given))})")


def validate(joint: JointDistribution) -> List[Diagnostic]:
    """Report NaN entries, negative entries and normalization deficit; empty list means valid"""
    weights = joint.weights
    diagnostics = []

    nan_cells = np.argwhere(np.isnan(weights))
    if len(nan_cells):
        diagnostics.append(Diagnostic(
            Severity.ERROR, 'nan',
            f"{len(nan_cells)} NaN entries",
            indices=tuple(tuple(int(i) for i in cell) for cell in nan_cells),
        ))
        return diagnostics

    negative_cells = np.argwhere(weights < 0)
    if len(negative_cells):
        indices = tuple(tuple(int(i) for i in cell) for cell in negative_cells)
        diagnostics.append(Diagnostic(
            Severity.WARNING, 'negative',
            f"{len(indices)} negative entries at {list(indices)[:10]}",
            indices=indices,
        ))

    deficit = 1.0 - float(weights.sum())
    if abs(deficit) > NORMALIZATION_TOL:
        diagnostics.append(Diagnostic(
            Severity.ERROR, 'normalization',
            f"weights sum to {1.0 - deficit:.15g} (deficit {deficit:.3g})",
            deficit=deficit,
        ))
    return diagnostics


def random_joint(rng: np.random.Generator, sizes: Mapping[str, int], concentration: float = 1.0) -> JointDistribution:
    """Dirichlet-distributed joint over variables of the given sizes"""
    variables = tuple((name, Alphabet.of_size(name, size)) for name, size in sizes.items())
    cells = int(np.prod([size for size in sizes.values()], dtype=np.int64))
    weights = rng.dirichlet(np.full(cells, concentration))
    weights = weights / weights.sum()
    return JointDistribution(variables, weights)


def info_table(joint: JointDistribution, terms: Mapping[str, Tuple[Names, Names, Names]]) -> Dict[str, float]:
    """Evaluate a named batch of I(A;B|C) terms"""
    return {
        label: conditional_mutual_information(joint, a, b, c)
        for label, (a, b, c) in terms.items()
    }
