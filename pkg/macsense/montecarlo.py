"""
Monte Carlo Module
i.i.d. draws from a single-letter joint and empirical estimator distortion.

Sampling uses numpy's Philox4x64 counter-based generator seeded with the
caller's 64-bit seed, so a (joint, n, seed) triple always yields the same
batch on any platform numpy supports.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .channel import DistortionTable
from .estimator import EstimatorTable, default_conditioning, expected_distortion, optimal_estimator
from .exceptions import DomainError, ShapeError, UnknownVariableError
from .probability import Alphabet, JointDistribution

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class SampleBatch:
    """
    n draws of the full variable tuple.

    draws[i, j] is the symbol index of variable names[j] in draw i.
    """

    n: int
    seed: int
    variables: Tuple[Tuple[str, Alphabet], ...]
    draws: np.ndarray

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(name for name, _ in self.variables)

    def column(self, name: str) -> np.ndarray:
        try:
            return self.draws[:, self.names.index(name)]
        except ValueError:
            raise UnknownVariableError(name, self.names) from None

    def symbols(self, i: int) -> Tuple[str, ...]:
        return tuple(alphabet.symbols[j] for (_, alphabet), j in zip(self.variables, self.draws[i]))


def generator(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def sample_joint(joint: JointDistribution, n: int, seed: int) -> SampleBatch:
    """Inverse-CDF sampling over the flattened tensor"""
    if n < 1:
        raise DomainError(f"sample count must be at least 1, got {n}")
    cdf = np.cumsum(joint.weights.ravel())
    uniforms = generator(seed).random(n) * cdf[-1]
    # side='right' skips zero-mass cells, so every draw lies in the support
    flat = np.minimum(np.searchsorted(cdf, uniforms, side='right'), cdf.size - 1)
    draws = np.stack(np.unravel_index(flat, joint.shape), axis=1)
    draws.setflags(write=False)
    logger.debug(f"Drew {n} samples from {joint!r} with seed {seed}")
    return SampleBatch(n, seed, joint.variables, draws)


@dataclass(frozen=True)
class EmpiricalDistortion:
    mean: float
    standard_error: float
    n: int


def empirical_distortion(batch: SampleBatch, est: EstimatorTable, d: DistortionTable,
                         k: Optional[int] = None) -> EmpiricalDistortion:
    """Sample mean of d_k(s_k, est(c)) over the batch and its standard error"""
    k = est.user if k is None else k
    if k != est.user:
        raise ShapeError(f"estimator is for user {est.user}, not {k}")
    matrix = d.matrix(k)
    states = batch.column(f'S{k}')
    index = tuple(batch.column(name) for name in est.names)
    losses = matrix[states, est.table[index]]

    mean = float(losses.mean())
    if batch.n > 1:
        standard_error = float(losses.std(ddof=1) / math.sqrt(batch.n))
    else:
        standard_error = math.inf
    return EmpiricalDistortion(mean, standard_error, batch.n)


@dataclass(frozen=True)
class SimulationReport:
    user: int
    variant: str
    analytic: float
    empirical: EmpiricalDistortion
    seed: int

    @property
    def deviation(self) -> float:
        return abs(self.empirical.mean - self.analytic)

    def within(self, sigmas: float = 3.0) -> bool:
        """True when the empirical mean is within sigmas standard errors of the analytic value"""
        if self.empirical.standard_error == 0:
            return self.deviation <= 1e-12
        return self.deviation <= sigmas * self.empirical.standard_error

    def describe(self) -> str:
        return (f"D{self.user} ({self.variant}): analytic {self.analytic:.12g}, "
                f"empirical {self.empirical.mean:.12g} +/- {self.empirical.standard_error:.3g} "
                f"(n={self.empirical.n}, seed={self.seed})")


def simulate(joint: JointDistribution, d: DistortionTable, k: int, n: int, seed: int,
             variant: str = 'default') -> SimulationReport:
    """Optimal estimator for S_k, its analytic distortion and an empirical estimate from n draws"""
    est = optimal_estimator(joint, k, d, default_conditioning(k, variant))
    analytic = expected_distortion(joint, est, d)
    empirical = empirical_distortion(sample_joint(joint, n, seed), est, d, k)
    report = SimulationReport(k, variant, analytic, empirical, seed)
    logger.info(report.describe())
    return report
