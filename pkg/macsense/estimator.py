"""
Estimator Module
Symbol-wise optimal state estimators and their expected distortions.

A transmitter k estimates its state S_k from a conditioning tuple c by
minimizing sum_s P(S_k = s | c) d_k(s, s'). The default conditioning is
(X_k, Z_k, U_kbar, V_kbar); the extended variant also conditions on U0.
"""

import csv
import io
import logging
from dataclasses import dataclass
from typing import Dict, Iterator, Optional, Sequence, Tuple

import numpy as np

from .channel import DistortionTable, check_probability
from .exceptions import ArgumentError, ShapeError
from .probability import Alphabet, JointDistribution, Names, variable_set

logger = logging.getLogger(__name__)

# Ties closer than this (in expected cost) go to the lowest-index symbol
TIE_TOL = 1e-15

CONDITIONING_VARIANTS = ('default', 'extended')


def other(k: int) -> int:
    if k not in (1, 2):
        raise ArgumentError(f"user must be 1 or 2, got {k}")
    return 3 - k


def default_conditioning(k: int, variant: str = 'default') -> Tuple[str, ...]:
    """(X_k, Z_k, U_kbar, V_kbar), with U0 prepended for the extended variant"""
    kbar = other(k)
    names = (f'X{k}', f'Z{k}', f'U{kbar}', f'V{kbar}')
    if variant == 'extended':
        return ('U0',) + names
    if variant != 'default':
        raise ArgumentError(f"unknown conditioning variant '{variant}'; choose from {CONDITIONING_VARIANTS}")
    return names


@dataclass(frozen=True, eq=False)
class EstimatorTable:
    """
    Map from conditioning tuple to reconstruction symbol.

    table holds reconstruction indices with one axis per conditioning
    variable, axes in the order of conditioning.
    """

    user: int
    conditioning: Tuple[Tuple[str, Alphabet], ...]
    table: np.ndarray
    reconstruction: Alphabet

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(name for name, _ in self.conditioning)

    def estimate(self, *symbols) -> str:
        """Reconstruction symbol for one conditioning tuple given as symbol labels"""
        if len(symbols) != len(self.conditioning):
            raise ShapeError(f"expected {len(self.conditioning)} symbols for {self.names}, got {len(symbols)}")
        index = tuple(alphabet.index(symbol) for (_, alphabet), symbol in zip(self.conditioning, symbols))
        return self.reconstruction.symbols[int(self.table[index])]

    def rows(self) -> Iterator[Tuple[Tuple[str, ...], str]]:
        for index in np.ndindex(*self.table.shape):
            symbols = tuple(alphabet.symbols[i] for (_, alphabet), i in zip(self.conditioning, index))
            yield symbols, self.reconstruction.symbols[int(self.table[index])]

    def is_constant(self) -> bool:
        return bool(np.all(self.table == self.table.flat[0]))

    def to_csv(self) -> str:
        """Conditioning columns followed by the reconstruction column"""
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator='\n')
        writer.writerow(list(self.names) + [f'S{self.user}_hat'])
        for symbols, estimate in self.rows():
            writer.writerow(list(symbols) + [estimate])
        return buffer.getvalue()


def _state_last(joint: JointDistribution, k: int, conditioning: Sequence[str]) -> np.ndarray:
    """P(c, s_k) with conditioning axes in the given order and S_k last"""
    state = f'S{k}'
    order = tuple(conditioning) + (state,)
    marginal = joint.marginal(order)
    return np.transpose(marginal.weights, [marginal.axis(name) for name in order])


def _check_matrix(joint: JointDistribution, k: int, d: DistortionTable) -> np.ndarray:
    matrix = d.matrix(k)
    states = joint.alphabet(f'S{k}').size
    if matrix.shape[0] != states:
        raise ShapeError(f"distortion matrix for user {k} has {matrix.shape[0]} rows but |S{k}| = {states}",
                         variable=f'S{k}')
    return matrix


def optimal_estimator(joint: JointDistribution, k: int, d: DistortionTable,
                      conditioning: Optional[Names] = None) -> EstimatorTable:
    """
    Bayes estimator of S_k from the conditioning variables.

    Args:
        joint: distribution containing S_k and every conditioning variable
        k: user index (1 or 2)
        d: distortion table; must define user k
        conditioning: ordered variable names, default (X_k, Z_k, U_kbar, V_kbar)

    Raises:
        ConfigurationError: d has no matrix for user k
        ArgumentError: S_k is among the conditioning variables
    """
    if conditioning is None:
        conditioning = default_conditioning(k)
    elif isinstance(conditioning, str):
        conditioning = (conditioning,)
    conditioning = tuple(conditioning)
    if len(set(conditioning)) != len(conditioning):
        raise ArgumentError(f"conditioning variables repeat: {conditioning}")
    if f'S{k}' in variable_set(conditioning):
        raise ArgumentError(f"S{k} cannot condition its own estimate")

    matrix = _check_matrix(joint, k, d)
    p = _state_last(joint, k, conditioning)
    cost = p @ matrix
    best = cost.min(axis=-1, keepdims=True)
    table = np.argmax(cost <= best + TIE_TOL, axis=-1)
    table.setflags(write=False)

    variables = tuple((name, joint.alphabet(name)) for name in conditioning)
    logger.debug(f"Estimator for S{k} over {conditioning}: {table.size} cells")
    return EstimatorTable(k, variables, table, d.reconstruction(k))


def expected_distortion(joint: JointDistribution, est: EstimatorTable, d: DistortionTable) -> float:
    """E[d_k(S_k, est(C))] under joint"""
    k = est.user
    matrix = _check_matrix(joint, k, d)
    for name, alphabet in est.conditioning:
        if joint.alphabet(name).size != alphabet.size:
            raise ShapeError(f"estimator alphabet for '{name}' does not match the joint", variable=name)
    p = _state_last(joint, k, est.names)
    # cost[c..., s] = d(s, est(c))
    cost = np.moveaxis(matrix[:, est.table], 0, -1)
    return float(np.sum(p * cost))


def distortion(joint: JointDistribution, k: int, d: DistortionTable, variant: str = 'default') -> float:
    """Minimum expected distortion for user k under one of the conditioning variants"""
    est = optimal_estimator(joint, k, d, default_conditioning(k, variant))
    return expected_distortion(joint, est, d)


def distortion_report(joint: JointDistribution, d: DistortionTable) -> Dict[Tuple[int, str], float]:
    """D_k for every user with a distortion matrix and both conditioning variants"""
    return {
        (k, variant): distortion(joint, k, d, variant)
        for k in sorted(d.matrices)
        for variant in CONDITIONING_VARIANTS
    }


def min_distortion_formula_example2(q: float, p_s: float) -> float:
    """q p_s (1 - p_s), the second example's distortion when Tx 2 learns Y' through V1"""
    q = check_probability('q', q, open_interval=False)
    p_s = check_probability('p_s', p_s, open_interval=False)
    return q * p_s * (1.0 - p_s)
