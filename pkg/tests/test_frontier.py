from fractions import Fraction

import pytest

from macsense import settings
from macsense.channel import build_example1
from macsense.exceptions import ArgumentError, ConfigurationError, DomainError, PreconditionError
from macsense.frontier import (
    PLOTTED_COROLLARY,
    PLOTTED_THEOREM,
    SEARCH_GRIDS,
    Example2Search,
    FrontierPoint,
    SearchGrid,
    evaluate_example2,
    example1_sampler,
    formula_cross_check,
    frontier_csv,
    frontier_start,
    locate_permissible_q,
    monotonize,
    permissibility_check,
    search_grid,
    trace_frontier_example2,
    trace_frontier_generic,
    trace_frontiers_example2,
)
from macsense.scheme import Example2SchemeParams

SMALL = SearchGrid(coarse_step=Fraction(1, 2), refinements=1, factor=4)


def test_theorem_minimum_distortion_scheme(example2):
    evaluation = evaluate_example2(example2, Example2SchemeParams.theorem_min_d2(0.1), 'theorem')
    assert evaluation.d2 == pytest.approx(0.009, abs=1e-9)
    assert evaluation.feasible
    assert evaluation.sum_rate == pytest.approx(0.0174636602105884, abs=1e-4)


def test_corollary_minimum_distortion_scheme(example2):
    evaluation = evaluate_example2(example2, Example2SchemeParams.corollary_min_d2(), 'corollary')
    assert evaluation.d2 == pytest.approx(0.02, abs=1e-9)
    assert evaluation.sum_rate == pytest.approx(0.0, abs=1e-9)


def test_small_q_is_not_permissible(example2):
    check = permissibility_check(Example2SchemeParams.theorem_min_d2(0.05), example2)
    assert not check.theorem_feasible
    assert check.d2 == pytest.approx(0.0045)
    assert permissibility_check(Example2SchemeParams.theorem_min_d2(0.1), example2).theorem_feasible


def test_permissibility_threshold(example2):
    threshold = locate_permissible_q(example2)
    assert 0.075 < threshold.q_theorem < 0.095
    assert threshold.d2 == pytest.approx(threshold.q_theorem * 0.09, abs=1e-9)
    assert [q for q, _ in threshold.sweep] == [0.05, 0.1, 0.2]


def test_permissibility_threshold_needs_sign_change(example2):
    with pytest.raises(PreconditionError) as error:
        locate_permissible_q(example2, sweep=(0.2, 0.3))
    assert 'does not change sign' in str(error.value)


def test_formula_cross_check():
    for q, formula, computed in formula_cross_check(0.9, 0.2, (0.1, 0.3, 0.7)):
        assert computed == pytest.approx(formula, abs=1e-12)


def test_canonical_vectors_collapse_unused_branches(example2):
    search = Example2Search(example2, 'corollary', SMALL)
    a = search.evaluate((0.0, 0.5, 1.0, 0.0, 0.5, 0.0, 0.0, 0.0))
    b = search.evaluate((0.0, 0.5, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0))
    assert a is b
    assert len(search.cache) == 1


def test_coarse_grid_uses_symmetry(example2):
    vectors = Example2Search(example2, 'corollary', SMALL).coarse_vectors()
    assert all(v[0] <= 0.5 and v[5] <= 0.5 and v[6] <= 0.5 for v in vectors)
    assert all(v[7] == 1.0 for v in vectors)
    assert len(vectors) == len(set(vectors))
    # p_u0 = 0: 9 branches; p_u0 = 1/2: 45 ordered branch pairs; 4 (xi1, xi2) pairs each
    assert len(vectors) == (9 + 45) * 4


def test_default_grid_steps_by_sixteenths():
    grid = SearchGrid()
    assert grid == SEARCH_GRIDS['full']
    assert len(grid.values()) == 17
    assert grid.values(Fraction(1, 2))[-1] == 0.5
    assert grid.steps() == [1 / 64, 1 / 256]
    fast = SEARCH_GRIDS['fast']
    assert fast.values() == [0.0, 0.25, 0.5, 0.75, 1.0]
    assert fast.steps() == [1 / 16, 1 / 64]


def test_search_grid_follows_setting(example2, monkeypatch):
    monkeypatch.setattr(settings, 'FRONTIER_GRID', 'full')
    assert search_grid() is SEARCH_GRIDS['full']
    assert Example2Search(example2, 'theorem').grid.coarse_step == Fraction(1, 16)
    assert search_grid('fast').coarse_step == Fraction(1, 4)
    with pytest.raises(ConfigurationError):
        search_grid('medium')


def test_corollary_frontier_starts_at_two_percent():
    points = trace_frontier_example2(0.9, 0.2, [0.019, 0.02, 0.05], budget=40, mode='corollary', grid=SMALL)
    assert not points[0].feasible
    assert points[0].best_sum_rate == 0.0
    assert points[1].feasible
    assert points[1].distortion == pytest.approx(0.02, abs=1e-9)
    assert points[2].best_sum_rate >= points[1].best_sum_rate
    assert frontier_start(points) == pytest.approx(0.02, abs=1e-9)


def test_frontier_rejects_bad_grids():
    with pytest.raises(ArgumentError):
        trace_frontier_example2(0.9, 0.2, [0.05, 0.02], mode='corollary', grid=SMALL)
    with pytest.raises(ArgumentError):
        trace_frontier_example2(0.9, 0.2, [], mode='corollary')
    with pytest.raises(DomainError):
        trace_frontier_example2(0.9, 0.2, [0.05], budget=0, mode='corollary')
    with pytest.raises(ArgumentError):
        trace_frontier_example2(0.9, 0.2, [0.05], mode='both')


def test_monotonize_carries_best_forward():
    points = [
        FrontierPoint(0.01, 0.5, None, (), 0.01),
        FrontierPoint(0.02, 0.4, None, (), 0.02),
        FrontierPoint(0.03, 0.0, None, (), None, feasible=False),
        FrontierPoint(0.04, 0.7, None, (), 0.04),
    ]
    result = monotonize(points)
    assert [p.best_sum_rate for p in result] == [0.5, 0.5, 0.5, 0.7]
    assert [p.monotonized for p in result] == [False, True, True, False]
    assert result[2].feasible
    assert result[2].d2_bound == 0.03


def test_generic_frontier_on_example1():
    channel = build_example1(0.3)
    theorem = trace_frontier_generic(channel, example1_sampler, [0.0, 0.3], budget=200, seed=1)
    assert theorem[0].feasible
    assert theorem[0].distortion == 0.0
    corollary = trace_frontier_generic(channel, example1_sampler, [0.1, 0.3], budget=50, seed=1, mode='corollary')
    assert not corollary[0].feasible
    assert corollary[1].distortion == pytest.approx(0.3, abs=1e-12)
    again = trace_frontier_generic(channel, example1_sampler, [0.0, 0.3], budget=200, seed=1)
    assert [p.best_sum_rate for p in again] == [p.best_sum_rate for p in theorem]


def test_frontier_csv_columns():
    params = Example2SchemeParams.corollary_min_d2()
    frontiers = {'corollary': [FrontierPoint(0.02, 0.0, params, (), 0.02),
                               FrontierPoint(0.03, 0.0, None, (), None, feasible=False)]}
    lines = frontier_csv(frontiers).splitlines()
    assert lines[0] == ('mode,d2_bound,best_sum_rate,distortion,feasible,samples,monotonized,scheme,'
                        'p_u0,p_u1_0,p_u1_1,p_u2_0,p_u2_1,xi1,xi2,e')
    assert lines[1].startswith('corollary,0.02,0,0.02,1,0,0,example2,0,0,0,1,1,0,0,1')
    assert lines[2] == 'corollary,0.03,0,,0,0,0,,,,,,,,,'


def test_plotted_reference_curves_are_monotone():
    for curve in (PLOTTED_THEOREM, PLOTTED_COROLLARY):
        assert all(a[0] <= b[0] and a[1] <= b[1] for a, b in zip(curve, curve[1:]))
    assert PLOTTED_THEOREM[-1] == PLOTTED_COROLLARY[-1]


@pytest.mark.slow
def test_both_curves_reproduce_plotted_tradeoff():
    bounds = [0.009, 0.01, 0.02, 0.03, 0.04, 0.05, 0.06, 0.07, 0.0814]
    frontiers = trace_frontiers_example2(0.9, 0.2, bounds, grid=SEARCH_GRIDS['fast'])
    theorem, corollary = frontiers['theorem'], frontiers['corollary']

    assert theorem[0].feasible
    assert theorem[0].best_sum_rate == pytest.approx(0.0175, abs=0.002)
    assert frontier_start(theorem) <= 0.009 + 1e-12
    assert not corollary[0].feasible and not corollary[1].feasible
    assert corollary[2].feasible

    for t, c in zip(theorem, corollary):
        assert t.best_sum_rate >= c.best_sum_rate
    assert theorem[-1].best_sum_rate == pytest.approx(1.4286, abs=0.02)
    assert corollary[-1].best_sum_rate == pytest.approx(1.4286, abs=0.02)
