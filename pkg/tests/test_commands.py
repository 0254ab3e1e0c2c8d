import json
import sys
from io import StringIO

import pytest
from django.core.management import call_command
from django.core.management.base import CommandError

import manage
from macsense.channel import build_example1, save_channel
from macsense.exceptions import ArgumentError, DomainError
from macsense.management.base import INPUT_ERROR, VERIFICATION_FAILURE, parse_grid


def run(*args):
    out = StringIO()
    call_command(*args, stdout=out)
    return out.getvalue()


def distortion_row(output, user):
    row = next(line for line in output.splitlines() if line.startswith(f'D{user} '))
    return row.split()[1:]


def test_parse_grid():
    grid = parse_grid('0.01:0.08:0.005')
    assert len(grid) == 15
    assert grid[0] == 0.01
    assert grid[-1] == 0.08
    assert parse_grid('0.02, 0.05') == [0.02, 0.05]
    with pytest.raises(ArgumentError):
        parse_grid('a:b:c')
    with pytest.raises(DomainError):
        parse_grid('0.1:0.05:0.01')


def test_evaluate_corollary_minimum_distortion():
    output = run('evaluate_region', '--example2', '--corollary-min-d2')
    assert float(distortion_row(output, 2)[0]) == pytest.approx(0.02, abs=1e-12)
    assert 'I15' in output


def test_evaluate_example1_copy_scheme(tmp_path):
    target = tmp_path / 'region.csv'
    output = run('evaluate_region', '--example1', '--ps', '0.3', '--scheme', 'v1-copy', '-o', str(target))
    assert float(distortion_row(output, 2)[0]) == 0.0
    lines = target.read_text().splitlines()
    assert lines[0] == 'a1,a2,rhs_bits,strict,label'
    assert len(lines) == 14


def test_evaluate_writes_estimator_table(tmp_path):
    target = tmp_path / 'estimator.csv'
    run('evaluate_region', '--example2', '--corollary-min-d2', '--estimator-csv', str(target))
    assert target.read_text().splitlines()[0] == 'X2,Z2,U1,V1,S2_hat'


def test_malformed_channel_names_the_key(tmp_path):
    document = json.loads(save_channel(build_example1(0.3)))
    document['kernel'] = document['kernel'][:-1]
    path = tmp_path / 'channel.json'
    path.write_text(json.dumps(document))
    with pytest.raises(CommandError) as error:
        run('evaluate_region', '--channel', str(path), '--scheme', 'v1-copy')
    assert error.value.returncode == INPUT_ERROR
    assert "'kernel'" in str(error.value)


def test_missing_channel_file(tmp_path):
    with pytest.raises(CommandError) as error:
        run('evaluate_region', '--channel', str(tmp_path / 'absent.json'))
    assert error.value.returncode == INPUT_ERROR


def test_scheme_flag_must_match_channel():
    with pytest.raises(CommandError) as error:
        run('evaluate_region', '--example2', '--scheme', 'v1-copy')
    assert error.value.returncode == INPUT_ERROR


def test_trace_frontier_rows(tmp_path):
    target = tmp_path / 'frontier.csv'
    output = run('trace_frontier', '--example1', '--ps', '0.3', '--d2-grid', '0.01:0.08:0.005',
                 '--budget', '20', '--seed', '3', '-o', str(target))
    lines = target.read_text().splitlines()
    assert lines[0].startswith('mode,d2_bound,best_sum_rate')
    assert sum(1 for line in lines if line.startswith('theorem,')) == 15
    assert sum(1 for line in lines if line.startswith('corollary,')) == 15
    assert 'theorem' in output


def test_trace_frontier_rejects_bad_grid():
    with pytest.raises(CommandError) as error:
        run('trace_frontier', '--example1', '--d2-grid', '0.08:0.01:0.005')
    assert error.value.returncode == INPUT_ERROR


def test_verify_fme_passes():
    output = run('verify_fme', '--count', '1', '--seed', '1', '--samples', '100', '--grid', '20')
    assert '1/1 equivalent' in output
    assert 'PASS' in output


def test_verify_fme_negative_control():
    # constant auxiliaries keep every region nonempty, so the shifted row must be caught
    with pytest.raises(CommandError) as error:
        run('verify_fme', '--count', '2', '--seed', '1', '--aux-size', '1', '--samples', '100', '--grid', '20',
            '--perturb', '1/100')
    assert error.value.returncode == VERIFICATION_FAILURE


def test_simulate_is_reproducible():
    first = run('simulate', '--example2', '--theorem-min-d2', '0.1', '-n', '10', '--seed', '4')
    second = run('simulate', '--example2', '--theorem-min-d2', '0.1', '-n', '10', '--seed', '4')
    assert first == second
    assert 'Draws:      10 (seed 4)' in first


def test_simulate_agrees_with_analytic_value():
    output = run('simulate', '--example2', '--corollary-min-d2', '-n', '100000', '--seed', '2024')
    analytic = next(line for line in output.splitlines() if line.startswith('Analytic:'))
    assert float(analytic.split()[1]) == pytest.approx(0.02, abs=1e-12)
    assert 'within 3 standard errors' in output


def test_manage_py_dispatches_to_commands(monkeypatch, capsys):
    monkeypatch.setattr(sys, 'argv', ['manage.py', 'evaluate_region', '--example2', '--corollary-min-d2'])
    manage.main()
    output = capsys.readouterr().out
    assert float(distortion_row(output, 2)[0]) == pytest.approx(0.02, abs=1e-12)
