"""
Scheme Distribution Module
The seven conditional pmfs of a coding scheme (auxiliaries U0, U1, U2,
inputs X1, X2 and compression variables V1, V2), the built-in example
schemes, and assembly of the full 12-variable joint distribution

    P_U0 P_U1|U0 P_U2|U0 P_X1|U0U1 P_X2|U0U2 P_S1S2 P_YZ1Z2|S1S2X1X2
    P_V1|U0U2X1Z1 P_V2|U0U1X2Z2.
"""

import logging
from dataclasses import dataclass, field, fields, replace
from typing import Dict, Mapping, Optional, Sequence, Tuple

import numpy as np

from .channel import ChannelSpec, check_probability
from .documents import (
    dump_alphabets,
    dump_document,
    flatten,
    parse_alphabets,
    parse_document,
    parse_flat,
)
from .exceptions import DomainError, NormalizationError, PreconditionError, ShapeError
from .probability import Alphabet, JointDistribution, entropy

logger = logging.getLogger(__name__)

AUX_NAMES = ('U0', 'U1', 'U2', 'V1', 'V2')
JOINT_NAMES = ('U0', 'U1', 'U2', 'X1', 'X2', 'S1', 'S2', 'Y', 'Z1', 'Z2', 'V1', 'V2')
ERASURE = '?'

KERNEL_TOL = 1e-12

# attribute -> (document key, axis variables; the last axis is the output)
KERNELS = {
    'p_u0': ('P_U0', ('U0',)),
    'p_u1': ('P_U1|U0', ('U0', 'U1')),
    'p_u2': ('P_U2|U0', ('U0', 'U2')),
    'p_x1': ('P_X1|U0U1', ('U0', 'U1', 'X1')),
    'p_x2': ('P_X2|U0U2', ('U0', 'U2', 'X2')),
    'p_v1': ('P_V1|U0U2X1Z1', ('U0', 'U2', 'X1', 'Z1', 'V1')),
    'p_v2': ('P_V2|U0U1X2Z2', ('U0', 'U1', 'X2', 'Z2', 'V2')),
}

_EINSUM = 'a,ab,ac,abd,ace,fg,fgdehij,acdik,abejl->abcdefghijkl'


@dataclass(frozen=True, eq=False)
class SchemeSpec:
    """Auxiliary alphabets plus the seven conditional pmfs, each stored as a dense kernel"""

    alphabets: Dict[str, Alphabet]
    p_u0: np.ndarray
    p_u1: np.ndarray
    p_u2: np.ndarray
    p_x1: np.ndarray
    p_x2: np.ndarray
    p_v1: np.ndarray
    p_v2: np.ndarray
    name: str = 'scheme'

    def __post_init__(self):
        for aux in AUX_NAMES:
            if aux not in self.alphabets:
                raise ShapeError(f"scheme is missing alphabet '{aux}'", variable=aux)
        object.__setattr__(self, 'alphabets', {aux: self.alphabets[aux].renamed(aux) for aux in AUX_NAMES})

        sizes = {}
        for attribute, (key, axes) in KERNELS.items():
            kernel = np.array(getattr(self, attribute), dtype=float)
            if kernel.ndim != len(axes):
                raise ShapeError(f"{key} must have {len(axes)} axes {axes}, got {kernel.ndim}")
            for variable, size in zip(axes, kernel.shape):
                expected = self.alphabets[variable].size if variable in self.alphabets else sizes.get(variable)
                if expected is not None and expected != size:
                    raise ShapeError(f"{key}: axis '{variable}' has {size} entries, expected {expected}",
                                     variable=variable)
                sizes[variable] = size
            if not np.all(np.isfinite(kernel)) or np.any(kernel < 0):
                raise DomainError(f"{key} entries must be finite and nonnegative")
            sums = kernel.sum(axis=-1)
            bad = np.argwhere(np.abs(sums - 1.0) > KERNEL_TOL)
            if len(bad):
                cell = tuple(int(i) for i in bad[0])
                raise NormalizationError(f"{key} slice at {dict(zip(axes[:-1], cell))} sums to "
                                         f"{float(sums[cell]):.15g}", cell=cell)
            kernel.setflags(write=False)
            object.__setattr__(self, attribute, kernel)

    def size(self, name: str) -> int:
        """Alphabet size of an auxiliary, input or feedback variable as seen by the kernels"""
        for attribute, (_, axes) in KERNELS.items():
            if name in axes:
                return getattr(self, attribute).shape[axes.index(name)]
        raise ShapeError(f"scheme has no axis '{name}'", variable=name)

    def has_constant_v(self) -> bool:
        return self.alphabets['V1'].size == 1 and self.alphabets['V2'].size == 1


def _check_compatible(channel: ChannelSpec, scheme: SchemeSpec):
    for name in ('X1', 'X2', 'Z1', 'Z2'):
        expected = channel.alphabet(name).size
        for attribute, (key, axes) in KERNELS.items():
            if name in axes:
                actual = getattr(scheme, attribute).shape[axes.index(name)]
                if actual != expected:
                    raise ShapeError(f"{key}: axis '{name}' has {actual} entries but the channel alphabet "
                                     f"has {expected}", variable=name)


def assemble_joint(channel: ChannelSpec, scheme: SchemeSpec) -> JointDistribution:
    """
    Full joint over (U0, U1, U2, X1, X2, S1, S2, Y, Z1, Z2, V1, V2).

    Raises:
        ShapeError: the scheme's input or feedback axes disagree with the channel
    """
    _check_compatible(channel, scheme)
    weights = np.einsum(
        _EINSUM,
        scheme.p_u0, scheme.p_u1, scheme.p_u2, scheme.p_x1, scheme.p_x2,
        channel.state_pmf.weights, channel.kernel, scheme.p_v1, scheme.p_v2,
        optimize=True,
    )
    alphabets = {**scheme.alphabets, **channel.alphabets}
    variables = tuple((name, alphabets[name]) for name in JOINT_NAMES)
    joint = JointDistribution(variables, weights)
    logger.debug(f"Assembled joint for {scheme.name} on {channel.name}: {weights.size} cells")
    return joint


def constant_V_scheme(scheme: SchemeSpec) -> SchemeSpec:
    """Replace V1 and V2 by singleton alphabets with deterministic kernels"""
    alphabets = dict(scheme.alphabets)
    alphabets['V1'] = Alphabet('V1', ('0',))
    alphabets['V2'] = Alphabet('V2', ('0',))
    return replace(
        scheme,
        alphabets=alphabets,
        p_v1=np.ones(scheme.p_v1.shape[:-1] + (1,)),
        p_v2=np.ones(scheme.p_v2.shape[:-1] + (1,)),
        name=scheme.name if scheme.name.endswith('[V const]') else f'{scheme.name}[V const]',
    )


def v_is_constant(joint: JointDistribution, tol: float = 1e-12) -> bool:
    """True when both compression variables are deterministic in the joint"""
    return entropy(joint, 'V1') <= tol and entropy(joint, 'V2') <= tol


def _bernoulli(p: float) -> np.ndarray:
    return np.array([1.0 - p, p])


@dataclass(frozen=True)
class Example2SchemeParams:
    """
    Binary-auxiliary family for the second example: U0 ~ Ber(p_u0),
    U_k | U0=u ~ Ber(p_uk[u]), X_k = U_k xor Xi_k with Xi_k ~ Ber(xi_k), and
    V1 = 1{Z1 = 1} unless erased (probability e), V2 constant.
    """

    p_u0: float = 0.0
    p_u1: Tuple[float, float] = (0.0, 0.0)
    p_u2: Tuple[float, float] = (0.0, 0.0)
    xi1: float = 0.0
    xi2: float = 0.0
    e: float = 1.0

    FIELDS = ('p_u0', 'p_u1_0', 'p_u1_1', 'p_u2_0', 'p_u2_1', 'xi1', 'xi2', 'e')

    def __post_init__(self):
        object.__setattr__(self, 'p_u1', tuple(float(v) for v in self.p_u1))
        object.__setattr__(self, 'p_u2', tuple(float(v) for v in self.p_u2))
        for label, value in zip(self.FIELDS, self.as_vector()):
            check_probability(label, value, open_interval=False)

    def as_vector(self) -> Tuple[float, ...]:
        return (self.p_u0, *self.p_u1, *self.p_u2, self.xi1, self.xi2, self.e)

    @classmethod
    def from_vector(cls, values: Sequence[float]) -> 'Example2SchemeParams':
        if len(values) != len(cls.FIELDS):
            raise ShapeError(f"expected {len(cls.FIELDS)} parameters {cls.FIELDS}, got {len(values)}")
        values = [float(v) for v in values]
        return cls(values[0], (values[1], values[2]), (values[3], values[4]), values[5], values[6], values[7])

    def with_erasure(self, e: float) -> 'Example2SchemeParams':
        return replace(self, e=float(e))

    def input_pmf(self, k: int) -> float:
        """Pr[X_k = 1]"""
        p_uk = self.p_u1 if k == 1 else self.p_u2
        xi = self.xi1 if k == 1 else self.xi2
        p_u = (1.0 - self.p_u0) * p_uk[0] + self.p_u0 * p_uk[1]
        return p_u * (1.0 - xi) + (1.0 - p_u) * xi

    @classmethod
    def corollary_min_d2(cls) -> 'Example2SchemeParams':
        """X1 = 0 and X2 = 1 deterministically, V1 erased"""
        return cls(p_u0=0.0, p_u1=(0.0, 0.0), p_u2=(1.0, 1.0), xi1=0.0, xi2=0.0, e=1.0)

    @classmethod
    def theorem_min_d2(cls, q: float = 0.1, common: bool = True) -> 'Example2SchemeParams':
        """
        Pr[X1=1] = q, X2 = 1, V1 never erased.

        With common=True Tx 1 sends X1 as its common part (U1 = X1), which is
        what lets Tx 2 decode it from the feedback; otherwise X1 is private
        noise on a constant U1.
        """
        q = check_probability('q', q, open_interval=False)
        if common:
            return cls(p_u0=0.0, p_u1=(q, q), p_u2=(1.0, 1.0), xi1=0.0, xi2=0.0, e=0.0)
        return cls(p_u0=0.0, p_u1=(0.0, 0.0), p_u2=(1.0, 1.0), xi1=q, xi2=0.0, e=0.0)


def _xor_kernel(xi: float) -> np.ndarray:
    """P(X = x | U0 = u0, U = u) for X = U xor Xi, axes (U0, U, X)"""
    flip = np.array([[1.0 - xi, xi], [xi, 1.0 - xi]])
    return np.stack([flip, flip])


def build_example2_scheme(params: Example2SchemeParams, channel: Optional[ChannelSpec] = None) -> SchemeSpec:
    """
    Scheme of the second example: binary U0, U1, U2, X_k = U_k xor Xi_k,
    V1 = 1{Z1 = 1} if E = 0 and '?' if E = 1, V2 = 0.

    Raises:
        ShapeError: channel is given and its Z1 alphabet is not the 3-symbol Y' alphabet
    """
    sizes = {'X1': 2, 'X2': 2, 'Z1': 3, 'Z2': 4}
    if channel is not None:
        for name, size in sizes.items():
            if channel.alphabet(name).size != size:
                raise ShapeError(f"second-example scheme needs |{name}|={size}, channel has "
                                 f"{channel.alphabet(name).size}", variable=name)

    e = params.e
    p_v1 = np.zeros((2, 2, 2, 3, 3))
    for z1 in range(3):
        p_v1[:, :, :, z1, 1 if z1 == 1 else 0] = 1.0 - e
        p_v1[:, :, :, z1, 2] += e

    alphabets = {
        'U0': Alphabet('U0', ('0', '1')),
        'U1': Alphabet('U1', ('0', '1')),
        'U2': Alphabet('U2', ('0', '1')),
        'V1': Alphabet('V1', ('0', '1', ERASURE)),
        'V2': Alphabet('V2', ('0',)),
    }
    return SchemeSpec(
        alphabets=alphabets,
        p_u0=_bernoulli(params.p_u0),
        p_u1=np.stack([_bernoulli(p) for p in params.p_u1]),
        p_u2=np.stack([_bernoulli(p) for p in params.p_u2]),
        p_x1=_xor_kernel(params.xi1),
        p_x2=_xor_kernel(params.xi2),
        p_v1=p_v1,
        p_v2=np.ones((2, 2, 2, 4, 1)),
        name=f'example2{params.as_vector()}',
    )


def build_example1_scheme(v1: str = 'copy', p_x1: float = 0.5, p_x2: float = 1.0) -> SchemeSpec:
    """
    Scheme for the first example: U1 = X1 ~ Ber(p_x1) is Tx 1's common part,
    X2 ~ Ber(p_x2), U0 and U2 constant, V2 constant, and V1 either a copy of
    Z1 = S2 ('copy') or constant ('constant').
    """
    if v1 not in ('copy', 'constant'):
        raise DomainError(f"v1 must be 'copy' or 'constant', got '{v1}'")
    p_x1 = check_probability('p_x1', p_x1, open_interval=False)
    p_x2 = check_probability('p_x2', p_x2, open_interval=False)

    alphabets = {
        'U0': Alphabet('U0', ('0',)),
        'U1': Alphabet('U1', ('0', '1')),
        'U2': Alphabet('U2', ('0',)),
        'V1': Alphabet('V1', ('0', '1')) if v1 == 'copy' else Alphabet('V1', ('0',)),
        'V2': Alphabet('V2', ('0',)),
    }
    if v1 == 'copy':
        p_v1 = np.broadcast_to(np.eye(2), (1, 1, 2, 2, 2)).copy()
    else:
        p_v1 = np.ones((1, 1, 2, 2, 1))
    return SchemeSpec(
        alphabets=alphabets,
        p_u0=np.array([1.0]),
        p_u1=_bernoulli(p_x1).reshape(1, 2),
        p_u2=np.array([[1.0]]),
        p_x1=np.eye(2).reshape(1, 2, 2),
        p_x2=_bernoulli(p_x2).reshape(1, 1, 2),
        p_v1=p_v1,
        p_v2=np.ones((1, 2, 2, 2, 1)),
        name=f'example1[v1={v1}]',
    )


def random_scheme(channel: ChannelSpec, rng: np.random.Generator,
                  aux_sizes: Optional[Mapping[str, int]] = None,
                  concentration: float = 1.0) -> SchemeSpec:
    """Scheme whose seven kernels have Dirichlet-distributed slices"""
    sizes = {aux: 2 for aux in AUX_NAMES} | dict(aux_sizes or {})
    sizes.update({name: channel.alphabet(name).size for name in ('X1', 'X2', 'Z1', 'Z2')})

    def draw(axes):
        slices = rng.dirichlet(np.full(sizes[axes[-1]], concentration),
                               size=tuple(sizes[axis] for axis in axes[:-1]))
        return slices / slices.sum(axis=-1, keepdims=True)

    kernels = {attribute: draw(axes) for attribute, (_, axes) in KERNELS.items()}
    alphabets = {aux: Alphabet.of_size(aux, sizes[aux]) for aux in AUX_NAMES}
    return SchemeSpec(alphabets=alphabets, name='random', **kernels)


def save_scheme(scheme: SchemeSpec) -> str:
    """Serialize to the scheme document format (same row-major convention as channels)"""
    document = {
        'aux_alphabets': dump_alphabets(scheme.alphabets, AUX_NAMES),
        **{key: flatten(getattr(scheme, attribute)) for attribute, (key, _) in KERNELS.items()},
        'name': scheme.name,
    }
    return dump_document(document)


def load_scheme(text: str, channel: ChannelSpec) -> SchemeSpec:
    """Parse a scheme document; input and feedback axis sizes come from channel"""
    document = parse_document(text)
    alphabets = parse_alphabets(document, 'aux_alphabets', AUX_NAMES)
    sizes = {name: alphabet.size for name, alphabet in alphabets.items()}
    sizes.update({name: channel.alphabet(name).size for name in ('X1', 'X2', 'Z1', 'Z2')})
    kernels = {
        attribute: parse_flat(document, key, tuple(sizes[axis] for axis in axes))
        for attribute, (key, axes) in KERNELS.items()
    }
    scheme = SchemeSpec(alphabets=alphabets, name=document.get('name', 'scheme'), **kernels)
    logger.info(f"Loaded scheme '{scheme.name}'")
    return scheme


def require_constant_v(joint: JointDistribution):
    if not v_is_constant(joint):
        raise PreconditionError("compression variables V1, V2 must be constant for this evaluation")
