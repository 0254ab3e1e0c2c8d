import numpy as np
import pytest

from macsense.channel import random_channel
from macsense.exceptions import DomainError, NormalizationError, PreconditionError, ShapeError
from macsense.scheme import (
    JOINT_NAMES,
    Example2SchemeParams,
    SchemeSpec,
    assemble_joint,
    build_example1_scheme,
    build_example2_scheme,
    constant_V_scheme,
    load_scheme,
    random_scheme,
    require_constant_v,
    save_scheme,
    v_is_constant,
)

from . import oracles


def test_joint_axes_and_size(corollary_joint):
    assert corollary_joint.names == JOINT_NAMES
    assert corollary_joint.weights.size == 55296
    assert corollary_joint.total() == pytest.approx(1.0, abs=1e-12)


def test_joint_matches_factorization_cell_by_cell(rng):
    channel = random_channel(rng)
    scheme = random_scheme(channel, rng)
    joint = assemble_joint(channel, scheme)
    for index in [(0,) * 12, (1,) * 12, (1, 0, 1, 0, 1, 1, 0, 1, 0, 0, 1, 1)]:
        u0, u1, u2, x1, x2, s1, s2, y, z1, z2, v1, v2 = index
        expected = (scheme.p_u0[u0] * scheme.p_u1[u0, u1] * scheme.p_u2[u0, u2]
                    * scheme.p_x1[u0, u1, x1] * scheme.p_x2[u0, u2, x2]
                    * channel.state_pmf.weights[s1, s2] * channel.kernel[s1, s2, x1, x2, y, z1, z2]
                    * scheme.p_v1[u0, u2, x1, z1, v1] * scheme.p_v2[u0, u1, x2, z2, v2])
        assert joint.weights[index] == pytest.approx(expected, rel=1e-12)


def test_corollary_scheme_has_deterministic_inputs(corollary_joint):
    assert corollary_joint.probability({'X1': '0', 'X2': '1'}) == pytest.approx(1.0)
    assert v_is_constant(corollary_joint)


def test_theorem_scheme_v1_reveals_single_sum(theorem_joint):
    assert not v_is_constant(theorem_joint)
    # V1 = 1 exactly when Z1 = Y' = 1
    assert theorem_joint.probability({'V1': '1', 'Z1': '1'}) == pytest.approx(theorem_joint.probability({'Z1': '1'}))
    assert theorem_joint.probability({'V1': '?'}) == 0.0
    with pytest.raises(PreconditionError):
        require_constant_v(theorem_joint)


def test_erasure_mixes_v1(example2):
    params = Example2SchemeParams.theorem_min_d2(0.2).with_erasure(0.25)
    joint = assemble_joint(example2, build_example2_scheme(params, example2))
    assert joint.probability({'V1': '?'}) == pytest.approx(0.25)


def test_input_pmf():
    params = Example2SchemeParams(p_u0=0.5, p_u1=(0.2, 0.6), xi1=0.1)
    # Pr[U1=1] = 0.4, Pr[X1=1] = 0.4 * 0.9 + 0.6 * 0.1
    assert params.input_pmf(1) == pytest.approx(0.42)
    assert params.input_pmf(2) == 0.0


def test_params_vector_round_trip():
    params = Example2SchemeParams(0.25, (0.5, 0.75), (1.0, 0.0), 0.125, 0.5, 0.0)
    assert Example2SchemeParams.from_vector(params.as_vector()) == params


def test_params_out_of_range():
    with pytest.raises(DomainError):
        Example2SchemeParams(p_u0=1.5)
    with pytest.raises(ShapeError):
        Example2SchemeParams.from_vector([0.5] * 7)


def test_example2_scheme_rejects_other_channels(example1):
    with pytest.raises(ShapeError):
        build_example2_scheme(Example2SchemeParams(), example1)


def test_example1_copy_scheme(example1):
    joint = assemble_joint(example1, build_example1_scheme('copy'))
    # V1 is a copy of Z1 = S2
    assert oracles.cmi(joint, ['V1'], ['S2']) == pytest.approx(oracles.entropy(joint, ['S2']), abs=1e-9)


def test_example1_unknown_choice():
    with pytest.raises(DomainError):
        build_example1_scheme('echo')


def test_constant_v_is_idempotent(example2):
    scheme = constant_V_scheme(build_example2_scheme(Example2SchemeParams.theorem_min_d2(0.1), example2))
    again = constant_V_scheme(scheme)
    assert again.name == scheme.name
    assert v_is_constant(assemble_joint(example2, again))


def test_kernel_normalization_names_slice(example2):
    scheme = build_example2_scheme(Example2SchemeParams(), example2)
    p_x1 = scheme.p_x1.copy()
    p_x1[1, 0] = [0.5, 0.2]
    with pytest.raises(NormalizationError) as error:
        SchemeSpec(scheme.alphabets, scheme.p_u0, scheme.p_u1, scheme.p_u2, p_x1,
                   scheme.p_x2, scheme.p_v1, scheme.p_v2)
    assert error.value.cell == (1, 0)


def test_scheme_document_round_trip(rng, example2):
    scheme = random_scheme(example2, rng, {'U0': 3, 'V1': 2})
    loaded = load_scheme(save_scheme(scheme), example2)
    assert loaded.alphabets['U0'].size == 3
    for attribute in ('p_u0', 'p_u1', 'p_x2', 'p_v1', 'p_v2'):
        assert np.array_equal(getattr(loaded, attribute), getattr(scheme, attribute))


def test_scheme_incompatible_with_channel(rng, example1, example2):
    scheme = random_scheme(example2, rng)
    with pytest.raises(ShapeError) as error:
        assemble_joint(example1, scheme)
    assert error.value.variable == 'Z1'
