import json

import numpy as np
import pytest

from macsense.channel import (
    ChannelSpec,
    DistortionTable,
    build_example2,
    load_channel,
    random_channel,
    save_channel,
    with_receiver_csi,
)
from macsense.exceptions import ConfigurationError, DocumentError, DomainError, NormalizationError, ShapeError
from macsense.probability import Alphabet


def test_example2_dimensions(example2):
    assert example2.kernel.shape == (2, 2, 2, 2, 12, 3, 4)
    assert example2.alphabet('Y').symbols[0] == '0|0|0'
    assert example2.state_pmf.probability({'S1': '1', 'S2': '1'}) == pytest.approx(0.81)


def test_example2_outputs(example2):
    # s1 = s2 = 1, x1 = x2 = 1: Y' = 2, Z2 is 2 or 3
    out = example2.kernel_slice('1', '1', '1', '1')
    y = example2.alphabet('Y').index('2|1|1')
    assert out[y, 2, 2] == pytest.approx(0.8)
    assert out[y, 2, 3] == pytest.approx(0.2)
    assert out.sum() == pytest.approx(1.0)


def test_example1_is_deterministic(example1):
    assert example1.is_deterministic()
    out = example1.kernel_slice('0', '1', '0', '1')
    assert out[1, 1, 0] == 1.0


@pytest.mark.parametrize('p_s', [0.0, 1.0, -0.1, 1.5])
def test_state_parameter_outside_open_interval(p_s):
    with pytest.raises(DomainError):
        build_example2(p_s, 0.2)


def test_default_distortion_is_hamming(example2):
    d = example2.distortion
    assert d.matrix(2).tolist() == [[0.0, 1.0], [1.0, 0.0]]
    assert d.reconstruction(2).symbols == ('0', '1')
    assert d.max_distortion(1) == 1.0


def test_missing_distortion_user():
    d = DistortionTable({1: np.zeros((2, 2))}, {1: Alphabet('S1_hat', ('0', '1'))})
    with pytest.raises(ConfigurationError):
        d.matrix(2)


def test_receiver_csi_preserves_marginal_of_y(example1):
    csi = with_receiver_csi(example1)
    assert csi.alphabet('Y').size == 4
    folded = csi.kernel.reshape(1, 2, 2, 2, 2, 2, 2, 2).sum(axis=5)
    assert np.allclose(folded, example1.kernel)


def test_kernel_normalization_names_cell(example1):
    kernel = example1.kernel.copy()
    kernel[0, 1, 0, 1] *= 0.5
    with pytest.raises(NormalizationError) as error:
        ChannelSpec(example1.alphabets, example1.state_pmf, kernel)
    assert error.value.cell == ('0', '1', '0', '1')
    assert error.value.deficit == pytest.approx(0.5)


def test_kernel_shape_error_names_axis(example1):
    with pytest.raises(ShapeError) as error:
        ChannelSpec(example1.alphabets, example1.state_pmf, np.ones((1, 2, 2, 2, 2, 2, 3)) / 12)
    assert error.value.variable == 'Z2'


def test_document_round_trip_is_exact(rng):
    channel = random_channel(rng, {'Y': 3})
    loaded = load_channel(save_channel(channel))
    assert np.array_equal(loaded.kernel, channel.kernel)
    assert np.array_equal(loaded.state_pmf.weights, channel.state_pmf.weights)
    assert loaded.alphabet('Y').size == 3


def test_document_accepts_rational_literals(example1):
    document = json.loads(save_channel(example1))
    document['state_pmf'] = ['7/10', '3/10']
    assert load_channel(json.dumps(document)).state_pmf.probability({'S2': '1'}) == pytest.approx(0.3)


def test_document_missing_key_is_named(example1):
    document = json.loads(save_channel(example1))
    del document['kernel']
    with pytest.raises(DocumentError) as error:
        load_channel(json.dumps(document))
    assert error.value.key == 'kernel'


def test_document_syntax_error_has_position():
    with pytest.raises(DocumentError) as error:
        load_channel('{"alphabets": [1,,]}')
    assert error.value.line == 1
    assert error.value.column is not None
