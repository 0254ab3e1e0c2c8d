import pytest

from macsense.channel import random_channel
from macsense.exceptions import DomainError, InternalConsistencyError, PreconditionError
from macsense.region import (
    DOMINANCES,
    InfoTerms,
    combo,
    compute_info_terms,
    corollary_region,
    point_feasible,
    theorem_inequalities,
    theorem_region,
    transcribed_region,
)
from macsense.scheme import assemble_joint, constant_V_scheme, random_scheme

from . import oracles

TOL = 1e-9

U = ['U0', 'U1', 'U2']

# I0..I15 written out independently of the module's table
DEFINITIONS = [
    [(['V1'], ['X1', 'X2', 'Y'], U), (['V2'], ['X1', 'X2', 'Y', 'V1'], U)],
    [(['V1'], ['X1', 'Z1'], U)],
    [(['V2'], ['X2', 'Z2'], U)],
    [(['U1'], ['X2', 'Z2'], ['U0', 'U2'])],
    [(['U2'], ['X1', 'Z1'], ['U0', 'U1'])],
    [(['V1'], ['X2', 'Z2'], U)],
    [(['V2'], ['X1', 'Z1'], U)],
    [(['X1', 'X2'], ['Y', 'V1', 'V2'], U)],
    [(['X1'], ['Y', 'V1', 'V2'], U + ['X2'])],
    [(['X2'], ['Y', 'V1', 'V2'], U + ['X1'])],
    [(['X1'], ['Y'], ['U0', 'X2'])],
    [(['X2'], ['Y'], ['U0', 'X1'])],
    [(['X1', 'X2'], ['Y'], ['U0', 'U2'])],
    [(['X1', 'X2'], ['Y'], ['U0', 'U1'])],
    [(['X1', 'X2'], ['Y'], ['U0'])],
    [(['X1', 'X2'], ['Y'], [])],
]

SAMPLE = InfoTerms((0.5, 0.3, 0.2, 0.4, 0.3, 0.1, 0.1, 1.5, 0.8, 0.9, 0.7, 0.6, 1.0, 1.1, 1.2, 1.4))


def random_joint_for(rng, constant_v=False):
    channel = random_channel(rng)
    scheme = random_scheme(channel, rng)
    if constant_v:
        scheme = constant_V_scheme(scheme)
    return assemble_joint(channel, scheme)


def test_info_terms_match_direct_summation(rng):
    joint = random_joint_for(rng)
    info = compute_info_terms(joint)
    for j, parts in enumerate(DEFINITIONS):
        expected = sum(oracles.cmi(joint, a, b, c) for a, b, c in parts)
        assert info[j] == pytest.approx(expected, abs=TOL), f'I{j}'


def test_dominances_on_random_joints(rng):
    for _ in range(100):
        info = compute_info_terms(random_joint_for(rng))
        for larger, smaller in DOMINANCES:
            assert info[larger] >= info[smaller] - TOL


def test_dominance_violation_is_reported():
    with pytest.raises(InternalConsistencyError):
        SAMPLE.replace(9, 2.0).check_dominances()


def test_combo_builds_coefficients():
    assert combo(I3=1, I5=1, I1=-1) == (0, -1, 0, 1, 0, 1) + (0,) * 10


def test_thirteen_inequalities():
    rows = theorem_inequalities()
    assert len(rows) == 13
    assert sum(1 for a1, a2, _, _ in rows if (a1, a2) == (1, 1)) == 5


def test_theorem_region_bounds():
    region = theorem_region(SAMPLE)
    assert region.conditions_hold()
    r1, r2, total = region.rate_bounds()
    assert r1 == pytest.approx(1.0)
    assert r2 == pytest.approx(1.1)
    assert total == pytest.approx(1.4)
    assert region.max_sum_rate() == pytest.approx(1.4)
    expected = [(0.0, 0.0), (1.0, 0.0), (1.0, 0.4), (0.3, 1.1), (0.0, 1.1)]
    for vertex, corner in zip(region.vertices(), expected):
        assert vertex == pytest.approx(corner)


def test_membership_and_closure():
    region = theorem_region(SAMPLE)
    assert region.contains(0.5, 0.5)
    assert not region.contains(1.05, 0.1)
    r1 = region.rate_bounds()[0]
    assert point_feasible(region, r1, 0.0, closure=True)
    assert not point_feasible(region, r1, 0.0, closure=False)
    with pytest.raises(DomainError):
        point_feasible(region, -0.1, 0.0)


def test_failed_feasibility_empties_region():
    region = theorem_region(SAMPLE.replace(3, 0.1))
    assert not region.conditions_hold()
    assert region.is_empty()
    assert region.max_sum_rate() is None
    assert region.vertices() == []
    slack = dict((c.label, c.slack) for c in region.feasibility)['I3+I5>I1']
    assert slack == pytest.approx(-0.1)


def test_region_csv():
    lines = theorem_region(SAMPLE).to_csv().splitlines()
    assert lines[0] == 'a1,a2,rhs_bits,strict,label'
    assert len(lines) == 14
    assert theorem_region(SAMPLE).vertices_csv().splitlines()[0] == 'R1,R2'


def test_corollary_needs_constant_v(rng):
    with pytest.raises(PreconditionError):
        corollary_region(random_joint_for(rng))


def test_corollary_agrees_with_theorem_for_constant_v(rng):
    for _ in range(20):
        joint = random_joint_for(rng, constant_v=True)
        theorem = theorem_region(compute_info_terms(joint))
        corollary = corollary_region(joint)
        assert theorem.max_sum_rate() == pytest.approx(corollary.max_sum_rate(), abs=TOL)
        top = max(theorem.rate_bounds()[2], 1e-3) * 1.1
        for i in range(30):
            for j in range(30):
                r1, r2 = top * i / 29, top * j / 29
                assert theorem.contains(r1, r2) == corollary.contains(r1, r2)


def test_corollary_bounds_are_info_term_combinations(rng):
    for _ in range(20):
        joint = random_joint_for(rng, constant_v=True)
        info = compute_info_terms(joint)
        for inequality in corollary_region(joint).inequalities:
            assert info.evaluate(inequality.terms) == pytest.approx(inequality.rhs, abs=TOL), inequality.label


def test_transcribed_region_matches_reduced_form(rng):
    for _ in range(10):
        joint = random_joint_for(rng)
        theorem = theorem_region(compute_info_terms(joint))
        transcribed = transcribed_region(joint)
        assert transcribed.rate_bounds() == pytest.approx(theorem.rate_bounds(), abs=TOL)
        for direct, reduced in zip(transcribed.feasibility, theorem.feasibility):
            assert direct.slack == pytest.approx(reduced.slack, abs=TOL)
