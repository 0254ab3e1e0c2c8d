"""
Channel Model Module
Memoryless state-dependent multiple-access channel with generalized
feedback: state pmf P_{S1S2}, kernel P_{YZ1Z2|S1S2X1X2}, per-user distortion
tables, the two built-in example channels and document I/O.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Mapping, Optional, Tuple

import numpy as np

from .documents import (
    dump_alphabets,
    dump_document,
    flatten,
    format_probability,
    parse_alphabets,
    parse_document,
    parse_flat,
    parse_probability,
    require,
)
from .exceptions import ConfigurationError, DocumentError, DomainError, NormalizationError, ShapeError
from .probability import Alphabet, JointDistribution

logger = logging.getLogger(__name__)

STATE_NAMES = ('S1', 'S2')
INPUT_NAMES = ('X1', 'X2')
OUTPUT_NAMES = ('Y', 'Z1', 'Z2')
CHANNEL_NAMES = STATE_NAMES + INPUT_NAMES + OUTPUT_NAMES

KERNEL_TOL = 1e-12


def check_probability(name: str, value: float, open_interval: bool = True) -> float:
    """Reject values outside (0,1) (or [0,1] when open_interval is False)"""
    value = float(value)
    if open_interval:
        ok = 0.0 < value < 1.0
    else:
        ok = 0.0 <= value <= 1.0
    if not ok:
        interval = "(0,1)" if open_interval else "[0,1]"
        raise DomainError(f"{name}={value} must lie in {interval}")
    return value


@dataclass(frozen=True, eq=False)
class DistortionTable:
    """Per-user distortion matrices d_k(s_k, s_hat_k) and reconstruction alphabets"""

    matrices: Dict[int, np.ndarray] = field(default_factory=dict)
    reconstructions: Dict[int, Alphabet] = field(default_factory=dict)

    def __post_init__(self):
        matrices = {}
        for k, matrix in self.matrices.items():
            matrix = np.array(matrix, dtype=float)
            if matrix.ndim != 2:
                raise ShapeError(f"distortion matrix for user {k} must be two-dimensional")
            if not np.all(np.isfinite(matrix)) or np.any(matrix < 0):
                raise DomainError(f"distortion matrix for user {k} must be finite and nonnegative")
            reconstruction = self.reconstructions.get(k)
            if reconstruction is None or reconstruction.size != matrix.shape[1]:
                raise ShapeError(f"user {k}: reconstruction alphabet does not match matrix columns")
            matrix.setflags(write=False)
            matrices[k] = matrix
        object.__setattr__(self, 'matrices', matrices)

    @classmethod
    def hamming(cls, state_alphabets: Mapping[int, Alphabet]) -> 'DistortionTable':
        """d(s, s_hat) = 1{s != s_hat} with the state alphabet as reconstruction alphabet"""
        matrices = {k: 1.0 - np.eye(alphabet.size) for k, alphabet in state_alphabets.items()}
        reconstructions = {k: alphabet.renamed(f"S{k}_hat") for k, alphabet in state_alphabets.items()}
        return cls(matrices, reconstructions)

    def matrix(self, k: int) -> np.ndarray:
        if k not in self.matrices:
            raise ConfigurationError(f"no distortion table for user {k}")
        return self.matrices[k]

    def reconstruction(self, k: int) -> Alphabet:
        if k not in self.reconstructions:
            raise ConfigurationError(f"no reconstruction alphabet for user {k}")
        return self.reconstructions[k]

    def max_distortion(self, k: int) -> float:
        return float(self.matrix(k).max())


@dataclass(frozen=True, eq=False)
class ChannelSpec:
    """
    State pmf plus channel kernel over declared finite alphabets.

    kernel has axes (S1, S2, X1, X2, Y, Z1, Z2); every slice over
    (Y, Z1, Z2) sums to one.
    """

    alphabets: Dict[str, Alphabet]
    state_pmf: JointDistribution
    kernel: np.ndarray
    distortion: Optional[DistortionTable] = None
    name: str = 'channel'

    def __post_init__(self):
        for name in CHANNEL_NAMES:
            if name not in self.alphabets:
                raise ShapeError(f"channel is missing alphabet '{name}'", variable=name)
        alphabets = {name: self.alphabets[name].renamed(name) for name in CHANNEL_NAMES}
        object.__setattr__(self, 'alphabets', alphabets)

        if self.state_pmf.names != STATE_NAMES:
            raise ShapeError(f"state pmf must be over {STATE_NAMES}, got {self.state_pmf.names}")
        for name in STATE_NAMES:
            if self.state_pmf.alphabet(name).symbols != alphabets[name].symbols:
                raise ShapeError(f"state pmf alphabet for '{name}' does not match the channel", variable=name)

        shape = tuple(alphabets[name].size for name in CHANNEL_NAMES)
        kernel = np.array(self.kernel, dtype=float)
        if kernel.shape != shape:
            for name, expected, actual in zip(CHANNEL_NAMES, shape, kernel.shape):
                if expected != actual:
                    raise ShapeError(f"kernel axis '{name}' has {actual} entries, expected {expected}", variable=name)
            raise ShapeError(f"kernel shape {kernel.shape} does not match {shape}")
        if not np.all(np.isfinite(kernel)) or np.any(kernel < 0):
            raise DomainError("kernel entries must be finite and nonnegative")

        sums = kernel.sum(axis=(4, 5, 6))
        bad = np.argwhere(np.abs(sums - 1.0) > KERNEL_TOL)
        if len(bad):
            cell = tuple(alphabets[name].symbols[i] for name, i in zip(CHANNEL_NAMES[:4], bad[0]))
            raise NormalizationError(
                f"kernel slice for (s1,s2,x1,x2)={cell} sums to {sums[tuple(bad[0])]:.15g}",
                cell=cell,
                deficit=1.0 - float(sums[tuple(bad[0])]),
            )
        kernel.setflags(write=False)
        object.__setattr__(self, 'kernel', kernel)

        if self.distortion is None:
            object.__setattr__(self, 'distortion', DistortionTable.hamming(
                {1: alphabets['S1'], 2: alphabets['S2']}))

    def alphabet(self, name: str) -> Alphabet:
        return self.alphabets[name]

    def kernel_slice(self, s1, s2, x1, x2) -> np.ndarray:
        """P(Y, Z1, Z2 | s1, s2, x1, x2) indexed by symbol labels"""
        index = tuple(self.alphabets[name].index(symbol)
                      for name, symbol in zip(CHANNEL_NAMES[:4], (s1, s2, x1, x2)))
        return self.kernel[index]

    def is_deterministic(self) -> bool:
        return bool(np.all((self.kernel == 0.0) | (self.kernel == 1.0)))


def _binary(name: str) -> Alphabet:
    return Alphabet(name, ('0', '1'))


def build_example1(p_s: float) -> ChannelSpec:
    """Y = S2 X2, (Z1, Z2) = (S2, X1), S1 = 0 constant, S2 ~ Ber(p_s)"""
    p_s = check_probability('p_s', p_s)
    alphabets = {
        'S1': Alphabet('S1', ('0',)),
        'S2': _binary('S2'),
        'X1': _binary('X1'),
        'X2': _binary('X2'),
        'Y': _binary('Y'),
        'Z1': _binary('Z1'),
        'Z2': _binary('Z2'),
    }
    state_pmf = JointDistribution(
        (('S1', alphabets['S1']), ('S2', alphabets['S2'])),
        [[1.0 - p_s, p_s]],
    )
    kernel = np.zeros((1, 2, 2, 2, 2, 2, 2))
    for s2 in range(2):
        for x1 in range(2):
            for x2 in range(2):
                kernel[0, s2, x1, x2, s2 * x2, s2, x1] = 1.0
    return ChannelSpec(alphabets, state_pmf, kernel, name=f'example1(p_s={p_s})')


def with_receiver_csi(channel: ChannelSpec, name: Optional[str] = None) -> ChannelSpec:
    """
    Same channel with the receiver output extended to Y = (Y', S1, S2).

    The composite output is a flat alphabet labelled "y'|s1|s2" with y'
    slowest-varying.
    """
    y, s1, s2 = channel.alphabets['Y'], channel.alphabets['S1'], channel.alphabets['S2']
    labels = tuple(f"{a}|{b}|{c}" for a in y.symbols for b in s1.symbols for c in s2.symbols)
    alphabets = dict(channel.alphabets)
    alphabets['Y'] = Alphabet('Y', labels)

    n1, n2, nx1, nx2, ny, nz1, nz2 = channel.kernel.shape
    kernel = np.zeros((n1, n2, nx1, nx2, ny * n1 * n2, nz1, nz2))
    for i1 in range(n1):
        for i2 in range(n2):
            for iy in range(ny):
                kernel[i1, i2, :, :, iy * n1 * n2 + i1 * n2 + i2] = channel.kernel[i1, i2, :, :, iy]
    return ChannelSpec(alphabets, channel.state_pmf, kernel, channel.distortion,
                       name=name or f'{channel.name}+csi')


def build_example2(p_s: float, t: float) -> ChannelSpec:
    """
    Y' = S1 X1 + S2 X2, Y = (Y', S1, S2), Z1 = Y', Z2 = Y' + B with
    B ~ Ber(t) independent of the i.i.d. Ber(p_s) states; B is summed out.
    """
    p_s = check_probability('p_s', p_s)
    t = check_probability('t', t)
    alphabets = {
        'S1': _binary('S1'),
        'S2': _binary('S2'),
        'X1': _binary('X1'),
        'X2': _binary('X2'),
        'Y': Alphabet('Y', ('0', '1', '2')),
        'Z1': Alphabet('Z1', ('0', '1', '2')),
        'Z2': Alphabet('Z2', ('0', '1', '2', '3')),
    }
    marginal = np.array([1.0 - p_s, p_s])
    state_pmf = JointDistribution(
        (('S1', alphabets['S1']), ('S2', alphabets['S2'])),
        np.outer(marginal, marginal),
    )
    kernel = np.zeros((2, 2, 2, 2, 3, 3, 4))
    for s1 in range(2):
        for s2 in range(2):
            for x1 in range(2):
                for x2 in range(2):
                    y = s1 * x1 + s2 * x2
                    kernel[s1, s2, x1, x2, y, y, y] = 1.0 - t
                    kernel[s1, s2, x1, x2, y, y, y + 1] = t
    base = ChannelSpec(alphabets, state_pmf, kernel)
    return with_receiver_csi(base, name=f'example2(p_s={p_s}, t={t})')


def random_channel(rng: np.random.Generator, sizes: Optional[Mapping[str, int]] = None,
                   concentration: float = 1.0) -> ChannelSpec:
    """Channel with Dirichlet state pmf and Dirichlet kernel slices"""
    sizes = {name: 2 for name in CHANNEL_NAMES} | dict(sizes or {})
    alphabets = {name: Alphabet.of_size(name, sizes[name]) for name in CHANNEL_NAMES}
    states = rng.dirichlet(np.full(sizes['S1'] * sizes['S2'], concentration))
    state_pmf = JointDistribution(
        (('S1', alphabets['S1']), ('S2', alphabets['S2'])),
        (states / states.sum()).reshape(sizes['S1'], sizes['S2']),
    )
    inputs = tuple(sizes[name] for name in CHANNEL_NAMES[:4])
    outputs = tuple(sizes[name] for name in OUTPUT_NAMES)
    slices = rng.dirichlet(np.full(int(np.prod(outputs)), concentration), size=inputs)
    slices = slices / slices.sum(axis=-1, keepdims=True)
    kernel = slices.reshape(inputs + outputs)
    return ChannelSpec(alphabets, state_pmf, kernel, name='random')


def save_channel(channel: ChannelSpec) -> str:
    """Serialize to the channel document format (exact float round-trip)"""
    document = {
        'alphabets': dump_alphabets(channel.alphabets, CHANNEL_NAMES),
        'state_pmf': flatten(channel.state_pmf.weights),
        'kernel': flatten(channel.kernel),
        'distortion': {
            str(k): {
                'reconstruction': list(channel.distortion.reconstruction(k).symbols),
                'matrix': [[format_probability(v) for v in row] for row in channel.distortion.matrix(k)],
            }
            for k in sorted(channel.distortion.matrices)
        },
    }
    if channel.name:
        document['name'] = channel.name
    return dump_document(document)


def _parse_distortion(raw, alphabets: Dict[str, Alphabet]) -> Optional[DistortionTable]:
    if raw is None:
        return None
    if not isinstance(raw, dict):
        raise DocumentError("expected an object keyed by user '1' / '2'", key='distortion')
    matrices, reconstructions = {}, {}
    for user, entry in raw.items():
        if user not in ('1', '2'):
            raise DocumentError(f"unknown user '{user}'", key='distortion')
        k = int(user)
        if not isinstance(entry, dict):
            raise DocumentError(f"user {k} entry must be an object", key='distortion')
        reconstruction = entry.get('reconstruction', list(alphabets[f'S{k}'].symbols))
        reconstructions[k] = Alphabet(f'S{k}_hat', tuple(str(s) for s in reconstruction))
        rows = require(entry, 'matrix')
        key = f'distortion.{k}.matrix'
        if not isinstance(rows, list) or len(rows) != alphabets[f'S{k}'].size:
            raise DocumentError(f"expected {alphabets[f'S{k}'].size} rows", key=key)
        matrices[k] = np.array([[parse_probability(v, key) for v in row] for row in rows], dtype=float)
    return DistortionTable(matrices, reconstructions)


def load_channel(text: str) -> ChannelSpec:
    """Parse and validate a channel document"""
    document = parse_document(text)
    alphabets = parse_alphabets(document, 'alphabets', CHANNEL_NAMES)
    state_shape = (alphabets['S1'].size, alphabets['S2'].size)
    state_pmf = JointDistribution(
        (('S1', alphabets['S1']), ('S2', alphabets['S2'])),
        parse_flat(document, 'state_pmf', state_shape),
    )
    kernel = parse_flat(document, 'kernel', tuple(alphabets[name].size for name in CHANNEL_NAMES))
    distortion = _parse_distortion(document.get('distortion'), alphabets)
    channel = ChannelSpec(alphabets, state_pmf, kernel, distortion, name=document.get('name', 'channel'))
    logger.info(f"Loaded channel '{channel.name}' with kernel shape {channel.kernel.shape}")
    return channel
