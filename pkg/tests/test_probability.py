import math

import numpy as np
import pytest

from macsense.exceptions import ArgumentError, NormalizationError, ShapeError, UnknownVariableError
from macsense.probability import (
    Alphabet,
    JointDistribution,
    Severity,
    conditional_mutual_information,
    entropy,
    info_table,
    marginalize,
    mutual_information,
    random_joint,
    validate,
    variable_set,
)

from . import oracles

TOL = 1e-9


def binary_joint(weights, names=('A', 'B')):
    return JointDistribution(tuple((name, ('0', '1')) for name in names), weights)


def test_variable_set_treats_string_as_one_name():
    assert variable_set('X1') == frozenset({'X1'})
    assert variable_set(['X1', 'Z1']) == frozenset({'X1', 'Z1'})


def test_marginal_keeps_declaration_order():
    joint = JointDistribution(
        (('A', ('0', '1')), ('B', ('0', '1', '2')), ('C', ('0', '1'))),
        np.arange(12, dtype=float) / 66.0,
    )
    marginal = marginalize(joint, ['C', 'A'])
    assert marginal.names == ('A', 'C')
    assert marginal.weights == pytest.approx(joint.weights.sum(axis=1))


def test_marginalization_commutes(rng):
    sizes = {'A': 2, 'B': 3, 'C': 2, 'D': 4}
    cells = 2 * 3 * 2 * 4
    for _ in range(100):
        # multiples of 1/1024 keep every partial sum exact
        counts = rng.multinomial(1024, np.full(cells, 1.0 / cells))
        joint = JointDistribution(tuple((name, Alphabet.of_size(name, size)) for name, size in sizes.items()),
                                  counts.reshape(tuple(sizes.values())) / 1024)
        keep = [name for name in sizes if rng.random() < 0.6]
        inner = [name for name in keep if rng.random() < 0.5]
        twice = marginalize(marginalize(joint, keep), inner)
        once = marginalize(joint, inner)
        assert twice.names == once.names
        assert np.array_equal(twice.weights, once.weights)


def test_empty_marginal_holds_total_mass():
    joint = binary_joint([[0.25, 0.25], [0.25, 0.25]])
    assert float(marginalize(joint, ()).weights) == pytest.approx(1.0)


def test_unknown_variable_is_named():
    joint = binary_joint([[0.5, 0.0], [0.0, 0.5]])
    with pytest.raises(UnknownVariableError) as error:
        marginalize(joint, ['A', 'Q'])
    assert error.value.name == 'Q'


def test_overlapping_sets_rejected():
    joint = binary_joint([[0.5, 0.0], [0.0, 0.5]])
    with pytest.raises(ArgumentError):
        conditional_mutual_information(joint, 'A', ['A', 'B'])


def test_copy_of_fair_bit_carries_one_bit():
    joint = binary_joint([[0.5, 0.0], [0.0, 0.5]])
    assert mutual_information(joint, 'A', 'B') == pytest.approx(1.0, abs=1e-12)
    assert entropy(joint, 'A') == pytest.approx(1.0, abs=1e-12)
    assert entropy(joint, 'A', given='B') == pytest.approx(0.0, abs=1e-12)


def test_independent_bits_share_nothing():
    joint = binary_joint(np.outer([0.3, 0.7], [0.9, 0.1]))
    assert mutual_information(joint, 'A', 'B') == pytest.approx(0.0, abs=1e-12)


def test_xor_is_pairwise_independent_but_conditionally_dependent():
    weights = np.zeros((2, 2, 2))
    for a in range(2):
        for b in range(2):
            weights[a, b, a ^ b] = 0.25
    joint = binary_joint(weights, names=('A', 'B', 'C'))
    assert mutual_information(joint, 'A', 'B') == pytest.approx(0.0, abs=1e-12)
    assert conditional_mutual_information(joint, 'A', 'B', 'C') == pytest.approx(1.0, abs=1e-12)


def test_empty_first_argument_is_zero():
    joint = binary_joint([[0.5, 0.0], [0.0, 0.5]])
    assert conditional_mutual_information(joint, (), 'B') == 0.0


def test_matches_direct_summation(rng):
    joint = random_joint(rng, {'A': 2, 'B': 3, 'C': 2, 'D': 2})
    for a, b, c in ((['A'], ['B'], []), (['A', 'D'], ['B'], ['C']), (['B'], ['C', 'D'], ['A'])):
        assert conditional_mutual_information(joint, a, b, c) == pytest.approx(oracles.cmi(joint, a, b, c), abs=TOL)


def test_information_properties_on_random_joints(rng):
    for _ in range(100):
        joint = random_joint(rng, {'A': 2, 'B': 2, 'C': 3, 'D': 2}, concentration=0.5)
        value = conditional_mutual_information(joint, ['A'], ['B', 'C'], ['D'])
        assert value >= 0
        assert value == pytest.approx(conditional_mutual_information(joint, ['B', 'C'], ['A'], ['D']), abs=TOL)
        # chain rule: I(A;BC|D) = I(A;B|D) + I(A;C|BD)
        chained = (conditional_mutual_information(joint, 'A', 'B', 'D')
                   + conditional_mutual_information(joint, 'A', 'C', ['B', 'D']))
        assert value == pytest.approx(chained, abs=TOL)
        assert entropy(joint, ['A', 'B']) == pytest.approx(oracles.entropy(joint, ['A', 'B']), abs=TOL)


def test_info_table_evaluates_named_terms():
    joint = binary_joint([[0.5, 0.0], [0.0, 0.5]])
    table = info_table(joint, {'copy': ('A', 'B', ()), 'none': ('A', (), ())})
    assert table['copy'] == pytest.approx(1.0)
    assert table['none'] == 0.0


def test_normalization_error_reports_deficit():
    with pytest.raises(NormalizationError) as error:
        binary_joint([[0.5, 0.2], [0.1, 0.1]])
    assert error.value.deficit == pytest.approx(0.1)


def test_shape_error_names_variable():
    with pytest.raises(ShapeError) as error:
        JointDistribution((('A', ('0', '1')), ('B', ('0', '1', '2'))), np.full((2, 2), 0.25))
    assert error.value.variable == 'B'


def test_validate_reports_without_raising():
    joint = JointDistribution.unchecked((('A', ('0', '1')),), [1.2, -0.1])
    codes = {diagnostic.code: diagnostic for diagnostic in validate(joint)}
    assert codes['negative'].severity is Severity.WARNING
    assert codes['negative'].indices == ((1,),)
    assert codes['normalization'].deficit == pytest.approx(-0.1)


def test_half_mass_reports_half_deficit():
    joint = JointDistribution.unchecked((('A', ('0', '1')),), [0.25, 0.25])
    diagnostics = validate(joint)
    assert [diagnostic.code for diagnostic in diagnostics] == ['normalization']
    assert diagnostics[0].severity is Severity.ERROR
    assert diagnostics[0].deficit == pytest.approx(0.5)
    with pytest.raises(NormalizationError) as error:
        JointDistribution((('A', ('0', '1')),), [0.25, 0.25])
    assert error.value.deficit == pytest.approx(0.5)


def test_probability_of_partial_assignment():
    joint = binary_joint([[0.1, 0.2], [0.3, 0.4]])
    assert joint.probability({'B': '1'}) == pytest.approx(0.6)
    assert joint.probability({'A': '1', 'B': '0'}) == pytest.approx(0.3)


def test_product_and_point_mass():
    a = JointDistribution.point_mass((('A', ('x', 'y')),), ('y',))
    b = JointDistribution((('B', Alphabet('B', ('0', '1'))),), [0.25, 0.75])
    joint = a.product(b)
    assert joint.names == ('A', 'B')
    assert joint.probability({'A': 'y', 'B': '1'}) == pytest.approx(0.75)
    assert entropy(joint, 'A') == 0.0
    assert entropy(joint, 'B') == pytest.approx(-(0.25 * math.log2(0.25) + 0.75 * math.log2(0.75)))
