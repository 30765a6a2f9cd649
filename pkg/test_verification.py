"""Tests for suite configuration, suite runs, verdicts and report files."""

import json

import pandas as pd
import pytest

from warpkit.reporting import calculate_pass_stats, create_summary_table, table_paths
from warpkit.verification import (
    DEFAULT_SUITE_SETTINGS,
    SUITES,
    SuiteConfig,
    build_fixture,
    evaluate_pass,
    load_config,
    load_report,
    make_config,
    run_suite,
    write_report,
)


def test_every_suite_has_defaults():
    assert set(DEFAULT_SUITE_SETTINGS) == set(SUITES)
    for suite in SUITES:
        config = make_config(suite)
        assert config.seed == 0
        assert config.resolutions == sorted(config.resolutions)


def test_overrides_merge_key_by_key():
    config = make_config('stl', {'fixture': 'cylinder', 'tolerances': {'lipschitz_factor': 0.1}},
                         seed=7, resolutions=[8])
    assert config.fixture == 'cylinder'
    assert config.tolerances == {'lipschitz_factor': 0.1}
    assert config.sample_counts == {'pairs': 500}
    assert config.options['collar'] == 0.1
    assert config.seed == 7
    assert config.resolutions == [8]
    # defaults stay untouched
    assert DEFAULT_SUITE_SETTINGS['stl']['tolerances']['lipschitz_factor'] == 0.05


@pytest.mark.parametrize("kwargs, message", [
    ({'resolutions': [64, 32]}, "ascending"),
    ({'tolerances': {'deviation': 0.0}}, "positive"),
    ({'fixture': 'torus'}, "unknown fixture"),
    ({'sample_counts': {'pairs': -1}}, "nonnegative"),
])
def test_suite_config_validation(kwargs, message):
    settings = {'suite': 'tensorization', 'fixture': 'square', 'resolutions': [8], 'tolerances': {'deviation': 0.1}}
    settings.update(kwargs)
    with pytest.raises(ValueError, match=message):
        SuiteConfig(**settings)


def test_make_config_errors():
    with pytest.raises(ValueError, match="unknown suite"):
        make_config('curvature')
    with pytest.raises(ValueError, match="not 'stl'"):
        make_config('stl', {'suite': 'doubling'})
    with pytest.raises(ValueError, match="unknown config key"):
        make_config('stl', {'tolerence': {}})


def test_load_config(tmp_path, write_json):
    path = write_json({'suite': 'density', 'resolutions': [2, 4]}, name="density.cfg")
    config = load_config(path, seed=3)
    assert config.suite == 'density'
    assert config.resolutions == [2, 4]
    assert config.seed == 3
    with pytest.raises(ValueError, match="no suite"):
        load_config(write_json({'resolutions': [2]}))
    with pytest.raises(FileNotFoundError):
        load_config(tmp_path / "missing.cfg")


def test_fixture_errors_are_wrapped():
    with pytest.raises(RuntimeError, match="Error building fixture custom"):
        build_fixture('custom', 8, {})
    with pytest.raises(RuntimeError, match="Error building fixture cone"):
        build_fixture('cone', 2, {})


def test_fixture_sizes():
    assert build_fixture('square', 8, {}).node_count == 81
    cone = build_fixture('cone', 8, {'stencil': 'axis'})
    assert cone.node_count == 1 + 7 * 8
    assert cone.stencil == 'axis'


def test_evaluate_pass_on_ratio_tables():
    rows = [
        {'function': 't', 'resolution': 8, 'deviation': 0.0, 'canary': True},
        {'function': 't', 'resolution': 16, 'deviation': 1e-15, 'canary': True},
        {'function': 'f', 'resolution': 8, 'deviation': 0.2, 'canary': False},
        {'function': 'f', 'resolution': 16, 'deviation': 0.08, 'canary': False},
    ]
    tolerances = {'deviation': 0.1, 'canary': 1e-9}
    assert evaluate_pass('tensorization', {'ratios': rows}, tolerances)
    rows[3]['deviation'] = 0.25
    assert not evaluate_pass('tensorization', {'ratios': rows}, tolerances)
    with pytest.raises(ValueError, match="unknown suite"):
        evaluate_pass('curvature', {}, tolerances)


def test_stl_on_cylinder_passes_and_is_reproducible():
    config = make_config('stl', {'fixture': 'cylinder', 'sample_counts': {'pairs': 40}}, resolutions=[12])
    first = run_suite(config)
    second = run_suite(config)
    assert first.passed
    assert first.tables == second.tables
    canary = next(row for row in first.tables['lipschitz'] if row['canary'])
    assert canary['violations'] == 0
    assert canary['L'] == pytest.approx(1.0)
    assert evaluate_pass(first.suite, first.tables, config.tolerances) == first.passed
    assert first.provenance['config']['fixture'] == 'cylinder'


def test_ratio_suite_canary_is_exact():
    report = run_suite(make_config('tensorization', resolutions=[8, 16]))
    canaries = [row for row in report.tables['ratios'] if row['canary']]
    assert len(canaries) == 2
    assert max(row['deviation'] for row in canaries) <= 1e-9


def test_density_suite_small():
    config = make_config('density', {
        'sample_counts': {'functions': 3},
        'options': {'base_vertices': 9, 'levels': 17},
    })
    report = run_suite(config)
    assert report.passed
    assert len(report.tables['operator']) == 3 * 3
    assert all(row['max_change'] <= 1e-12 for row in report.tables['canary'])


def test_capacity_suite_short_ladder():
    report = run_suite(make_config('capacity', resolutions=[100, 1000]))
    assert report.passed
    first = report.tables['decay'][0]
    assert first['remainder'] == pytest.approx(first['analytic'], rel=0.1)
    assert report.tables['canary'][0]['remainder'] == 0.0


def test_doubling_suite_small():
    config = make_config('doubling', {'sample_counts': {'centers': 8, 'radii': 3}}, resolutions=[32])
    report = run_suite(config)
    ratios = [row['ratio'] for row in report.tables['balls']]
    assert min(ratios) >= 1.0
    assert report.summary['sup_ratio'] == max(ratios)


def test_dist_factorization_small():
    config = make_config('dist_factorization', {
        'tolerances': {'relative': 0.2, 'oracle_graph': 0.2},
        'sample_counts': {'pairs': 10, 'oracle_pairs': 4},
        'options': {'solver_resolution': 32, 'oracle_resolution': 64},
    }, resolutions=[16])
    report = run_suite(config)
    pairs = report.tables['pairs']
    assert len(pairs) == 11
    assert abs(pairs[-1]['relative']) <= 1e-9
    assert len(report.tables['oracle']) == 4
    assert evaluate_pass(report.suite, report.tables, config.tolerances) == report.passed
    # sampled pairs stay off the apex collar; the last row is the vertical canary
    assert min(min(row['t_p'], row['t_q']) for row in pairs[:-1]) >= 0.1 - 1e-12


def test_dist_verdict_is_per_pair():
    tolerances = DEFAULT_SUITE_SETTINGS['dist_factorization']['tolerances']
    pairs = [{'relative': 0.001, 'canary': False} for _ in range(99)]
    pairs.append({'relative': 0.0, 'canary': True})
    assert evaluate_pass('dist_factorization', {'pairs': pairs}, tolerances)

    # one pair off by 4% fails although the mean stays near 0.1%
    pairs[0]['relative'] = 0.04
    assert not evaluate_pass('dist_factorization', {'pairs': pairs}, tolerances)

    pairs[0]['relative'] = 0.001
    oracle = [{'solver_relative': 0.001, 'graph_relative': 0.002} for _ in range(20)]
    assert evaluate_pass('dist_factorization', {'pairs': pairs, 'oracle': oracle}, tolerances)
    oracle[5]['graph_relative'] = 0.04
    assert not evaluate_pass('dist_factorization', {'pairs': pairs, 'oracle': oracle}, tolerances)


def test_report_files(tmp_path):
    config = make_config('stl', {'fixture': 'cylinder', 'sample_counts': {'pairs': 10}}, resolutions=[8])
    report = run_suite(config)
    path = write_report(report, tmp_path / "r.rep")

    document = json.loads(path.read_text())
    assert document['passed'] == report.passed
    assert evaluate_pass(document['suite'], document['tables'], document['provenance']['config']['tolerances']) \
        == document['passed']

    csv_path = table_paths(path, ['lipschitz'])['lipschitz']
    assert csv_path.name == "r_lipschitz.csv"
    assert len(pd.read_csv(csv_path)) == len(report.tables['lipschitz'])
    assert load_report(path).tables == report.tables


def test_summary_table_and_stats():
    config = make_config('stl', {'fixture': 'cylinder', 'sample_counts': {'pairs': 10}}, resolutions=[8])
    report = run_suite(config)
    table = create_summary_table([report])
    assert list(table.columns) == ['Suite', 'Fixture', 'Passed', 'Runtime (s)', 'Tables', 'Rows']
    assert table.loc[0, 'Fixture'] == 'cylinder'
    stats = calculate_pass_stats([report])
    assert stats['total_suites'] == 1
    assert stats['pass_percentage'] == 100
    assert calculate_pass_stats([])['pass_percentage'] == 0


@pytest.mark.slow
@pytest.mark.parametrize("suite, overrides", [
    ('tensorization', {}),
    ('warp_gradient', {}),
    ('dist_factorization', {'fixture': 'cone'}),
    ('dist_factorization', {'fixture': 'suspension'}),
    ('stl', {'fixture': 'cone'}),
    ('stl', {'fixture': 'cylinder'}),
    ('doubling', {}),
    ('capacity', {}),
    ('density', {}),
])
def test_default_suites_pass(suite, overrides):
    report = run_suite(make_config(suite, overrides))
    assert report.passed, report.summary
