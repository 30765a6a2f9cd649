"""Named verification suites, their configuration and their reports."""

import copy
import json
import logging
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy.integrate import quad
from scipy.sparse import csgraph

from . import __version__
from .dsolver import BATCH_RESOLUTION, GeodesicQuery, oracle_D, solve_batch, warped_distance
from .energy import (
    GridFunction,
    bl_distance,
    bl_energy,
    cutoff,
    function_from_spec,
    slope_energy,
    time_discretize,
)
from .metric_space import ball_measure, circle_space, interval_space, load_space, shortest_paths
from .products import build_cartesian, build_warped, product_distances
from .reporting import write_tables
from .warp_profile import (
    cone_profile,
    cylinder_profile,
    distance_to_zero_set,
    load_profile,
    suspension_profile,
)

logger = logging.getLogger(__name__)

SUITES = ('tensorization', 'warp_gradient', 'dist_factorization', 'stl', 'doubling', 'capacity', 'density')
FIXTURES = ('square', 'cylinder', 'cone', 'suspension', 'custom')
ORACLE_KINDS = {'cylinder': 'flat', 'cone': 'cone', 'suspension': 'suspension'}

# Absolute slack for "nonincreasing" trend checks
TREND_SLACK = 1e-12

DEFAULT_SUITE_SETTINGS = {
    'tensorization': {
        'fixture': 'square',
        'resolutions': [32, 64, 128],
        'tolerances': {'deviation': 0.10, 'canary': 1e-9},
        'sample_counts': {},
        'options': {'stencil': 'diagonal'},
    },
    'warp_gradient': {
        'fixture': 'cone',
        'resolutions': [32, 64, 128],
        'tolerances': {'deviation': 0.15, 'canary': 1e-9},
        'sample_counts': {},
        'options': {'stencil': 'wide', 'collar': 0.1},
    },
    'dist_factorization': {
        'fixture': 'cone',
        'resolutions': [64],
        'tolerances': {
            'relative': 0.03,
            'one_sided': 0.01,
            'canary': 1e-9,
            'oracle_solver': 0.005,
            'oracle_graph': 0.03,
        },
        'sample_counts': {'pairs': 100, 'oracle_pairs': 100},
        'options': {
            'stencil': 'wide',
            'collar': 0.1,
            'level_reach': 16,
            'base_reach': 4,
            'solver_resolution': BATCH_RESOLUTION[0],
            'oracle_resolution': 256,
        },
    },
    'stl': {
        'fixture': 'cone',
        'resolutions': [32],
        'tolerances': {'lipschitz_factor': 0.05},
        'sample_counts': {'pairs': 500},
        'options': {'stencil': 'diagonal', 'collar': 0.1, 'solver_resolution': BATCH_RESOLUTION[0]},
    },
    'doubling': {
        'fixture': 'cylinder',
        'resolutions': [64],
        'tolerances': {'doubling_constant': 5.0},
        'sample_counts': {'centers': 40, 'radii': 6},
        'options': {'stencil': 'wide', 'circumference': 1.0, 'collar': 0.1, 'r_max': 0.1},
    },
    'capacity': {
        'fixture': 'cone',
        'resolutions': [100, 1000, 10000],
        'tolerances': {'ratio': 1.3, 'analytic': 0.10, 'canary': 1e-12},
        'sample_counts': {},
        'options': {'stencil': 'axis', 'base_vertices': 4, 'levels_per_n': 4},
    },
    'density': {
        'fixture': 'square',
        'resolutions': [2, 4, 8],
        'tolerances': {'l2': 1e-12, 'energy': 1e-9, 'canary': 1e-12},
        'sample_counts': {'functions': 20},
        'options': {'stencil': 'axis', 'base_vertices': 17, 'levels': 65, 'max_frequency': 2},
    },
}


@dataclass
class SuiteConfig:
    """Everything a suite run depends on."""

    suite: str
    fixture: str
    resolutions: list
    tolerances: dict
    seed: int = 0
    sample_counts: dict = field(default_factory=dict)
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.suite not in SUITES:
            raise ValueError(f"unknown suite '{self.suite}', expected one of {', '.join(SUITES)}")
        if self.fixture not in FIXTURES:
            raise ValueError(f"unknown fixture '{self.fixture}', expected one of {', '.join(FIXTURES)}")
        self.resolutions = [int(r) for r in self.resolutions]
        if not self.resolutions or min(self.resolutions) < 1:
            raise ValueError("resolutions must be a nonempty list of positive integers")
        if any(b <= a for a, b in zip(self.resolutions, self.resolutions[1:])):
            raise ValueError(f"resolutions must be ascending, got {self.resolutions}")
        bad = [name for name, value in self.tolerances.items() if not float(value) > 0]
        if bad:
            raise ValueError(f"tolerances must be positive: {', '.join(bad)}")
        bad = [name for name, value in self.sample_counts.items() if int(value) < 0]
        if bad:
            raise ValueError(f"sample counts must be nonnegative: {', '.join(bad)}")
        self.seed = int(self.seed)

    def to_dict(self):
        return asdict(self)


def make_config(suite, overrides=None, seed=None, resolutions=None):
    """
    Suite config from DEFAULT_SUITE_SETTINGS, a config document and CLI flags.

    Dictionaries (tolerances, sample_counts, options) are merged key by key;
    later sources win.
    """
    if suite not in DEFAULT_SUITE_SETTINGS:
        raise ValueError(f"unknown suite '{suite}', expected one of {', '.join(SUITES)}")
    settings = copy.deepcopy(DEFAULT_SUITE_SETTINGS[suite])
    settings['seed'] = 0

    for key, value in (overrides or {}).items():
        if key == 'suite':
            if value != suite:
                raise ValueError(f"config is for suite '{value}', not '{suite}'")
            continue
        if key not in ('fixture', 'resolutions', 'tolerances', 'seed', 'sample_counts', 'options'):
            raise ValueError(f"unknown config key '{key}'")
        if isinstance(settings.get(key), dict):
            settings[key].update(value)
        else:
            settings[key] = value

    if seed is not None:
        settings['seed'] = seed
    if resolutions:
        settings['resolutions'] = list(resolutions)
    return SuiteConfig(suite=suite, **settings)


def load_config(path, suite=None, seed=None, resolutions=None):
    """Read a JSON config file; the suite comes from the file unless given."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Config file not found at {path}")
    try:
        document = json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise ValueError(f"could not parse config file {path}: {e}") from e
    if not isinstance(document, dict):
        raise ValueError("config file must hold a JSON object")
    suite = suite or document.get('suite')
    if suite is None:
        raise ValueError("config names no suite")
    return make_config(suite, document, seed=seed, resolutions=resolutions)


@dataclass
class VerificationReport:
    """Metrics, verdict and provenance of one suite run."""

    suite: str
    tables: dict
    passed: bool
    runtime: float
    provenance: dict
    summary: dict = field(default_factory=dict)

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, document):
        return cls(**document)


def write_report(report, path):
    """Write the JSON report and one ``<stem>_<table>.csv`` per metric table."""
    path = Path(path)
    path.write_text(json.dumps(report.to_dict(), indent=2))
    written = write_tables(report.tables, path)
    logger.info("report written to %s with %d tables", path, len(written))
    return path


def load_report(path):
    return VerificationReport.from_dict(json.loads(Path(path).read_text()))


# ---------------------------------------------------------------------------
# Fixtures
# ---------------------------------------------------------------------------

def build_fixture(name, resolution, options, stencil=None):
    """
    Product for a named fixture at one resolution.

    square: interval x [0, 1] with resolution + 1 points each way;
    cylinder / cone / suspension: circle base with ``resolution`` vertices
    and ``resolution`` levels; custom: space and profile files from options.
    ``base_vertices`` and ``levels`` options override the sizes.
    """
    stencil = stencil or options.get('stencil', 'diagonal')
    reach = {key: options[key] for key in ('level_reach', 'base_reach') if key in options}
    try:
        if name == 'square':
            base = interval_space(options.get('base_vertices', resolution + 1), 1.0)
            return build_cartesian(base, (0.0, 1.0), options.get('levels', resolution + 1), stencil=stencil)

        levels = options.get('levels', resolution)
        if name == 'custom':
            base = load_space(options['space'])
            profile = load_profile(options['profile'])
        else:
            base = circle_space(options.get('base_vertices', resolution), options.get('circumference', 2 * np.pi))
            if name == 'cylinder':
                profile = cylinder_profile(levels)
            elif name == 'cone':
                profile = cone_profile(levels)
            else:
                profile = suspension_profile(levels)
        return build_warped(base, profile, stencil=stencil, **reach)
    except (ValueError, FileNotFoundError, KeyError) as e:
        raise RuntimeError(f"Error building fixture {name}: {e}") from e


def _collar_mask(product, collar):
    """Nodes at distance >= collar * (b - a) from every apex level."""
    mask = np.ones(product.node_count, dtype=bool)
    if collar and product.apex_levels:
        apex_t = product.profile.levels[list(product.apex_levels)]
        distance = np.abs(product.node_t[:, None] - apex_t[None, :]).min(axis=1)
        mask &= distance >= collar * product.profile.length
    return mask


def _sample_pairs(rng, candidates, count):
    first = rng.choice(candidates, size=count)
    second = rng.choice(candidates, size=count)
    clash = first == second
    while clash.any():
        second[clash] = rng.choice(candidates, size=int(clash.sum()))
        clash = first == second
    return first, second


def _nonincreasing(values):
    return all(b <= a + TREND_SLACK for a, b in zip(values, values[1:]))


# ---------------------------------------------------------------------------
# Suites
# ---------------------------------------------------------------------------

RATIO_FUNCTIONS = {
    'tensorization': (
        ('t', {'kind': 't'}, True),
        ('sin_product', {'kind': 'sin_product', 'params': [2 * np.pi, 2 * np.pi, 0]}, False),
    ),
    'warp_gradient': (
        ('t', {'kind': 't'}, True),
        ('t_sin_theta', {'kind': 'product', 'params': [1, 1.0]}, False),
    ),
}


def _run_ratio_suite(config):
    """E_slope / E_combined over the resolution ladder."""
    collar = config.options.get('collar', 0.0)
    rows = []
    for resolution in config.resolutions:
        product = build_fixture(config.fixture, resolution, config.options)
        mask = _collar_mask(product, collar)
        for name, spec, canary in RATIO_FUNCTIONS[config.suite]:
            field_ = slope_energy(function_from_spec(product, spec))
            e_slope = field_.energy('slope', mask)
            e_combined = field_.energy('combined', mask)
            ratio = e_slope / e_combined
            rows.append({
                'function': name,
                'resolution': resolution,
                'E_slope': e_slope,
                'E_combined': e_combined,
                'ratio': ratio,
                'deviation': abs(1.0 - ratio),
                'canary': canary,
            })
            logger.info("%s %s @%d: ratio %.5f", config.suite, name, resolution, ratio)

    finals = [row['deviation'] for row in rows if row['resolution'] == config.resolutions[-1] and not row['canary']]
    return {'ratios': rows}, {'final_deviation': max(finals, default=0.0)}


def _run_dist_factorization(config):
    resolution = config.resolutions[-1]
    product = build_fixture(config.fixture, resolution, config.options)
    profile = product.profile
    base_dist = shortest_paths(product.base)
    solver_res = int(config.options.get('solver_resolution', BATCH_RESOLUTION[0]))
    rng = np.random.default_rng(config.seed)

    candidates = np.flatnonzero(_collar_mask(product, config.options.get('collar', 0.0)))
    first, second = _sample_pairs(rng, candidates, config.sample_counts.get('pairs', 100))

    # vertical canary between the lowest and highest non-apex levels of one fiber
    open_levels = [i for i in range(profile.grid_count) if i not in product.apex_levels]
    canary = (product.node_table[open_levels[0], 0], product.node_table[open_levels[-1], 0])
    first = np.append(first, canary[0])
    second = np.append(second, canary[1])

    graph = product_distances(product, np.unique(first))
    rows = []
    for k, (p, q) in enumerate(zip(first, second)):
        tp, tq = product.node_t[p], product.node_t[q]
        xp, xq = product.node_vertex[p], product.node_vertex[q]
        composed = warped_distance(base_dist, profile, (tp, xp), (tq, xq), resolution=(solver_res, solver_res))
        d_graph = graph.distance(p, q)
        rows.append({
            'pair': k,
            'node_p': int(p),
            'node_q': int(q),
            't_p': float(tp),
            't_q': float(tq),
            'ell': base_dist.distance(xp, xq),
            'graph': d_graph,
            'composed': composed,
            'relative': (d_graph - composed) / composed,
            'canary': k == len(first) - 1,
        })
    tables = {'pairs': rows}

    oracle_kind = ORACLE_KINDS.get(config.fixture)
    oracle_count = min(config.sample_counts.get('oracle_pairs', 0), len(rows) - 1)
    if oracle_kind and oracle_count:
        oracle_res = int(config.options.get('oracle_resolution', 256))
        picked = rows[:oracle_count]
        queries = [GeodesicQuery(row['t_p'], row['t_q'], row['ell'], (oracle_res, oracle_res)) for row in picked]
        oracle_rows = []
        for row, solution in zip(picked, solve_batch(profile, queries)):
            exact = oracle_D(oracle_kind, row['t_p'], row['t_q'], row['ell'])
            oracle_rows.append({
                'pair': row['pair'],
                'oracle': exact,
                'solver': solution.value,
                'graph': row['graph'],
                'solver_relative': abs(solution.value - exact) / exact,
                'graph_relative': (row['graph'] - exact) / exact,
            })
        tables['oracle'] = oracle_rows

    sampled = [row['relative'] for row in rows if not row['canary']]
    summary = {
        'mean_relative': float(np.mean(np.abs(sampled))),
        'max_relative': float(np.max(np.abs(sampled))),
        'min_relative': float(np.min(sampled)),
    }
    return tables, summary


STL_FUNCTIONS = (
    ('t', {'kind': 't'}, True),
    ('t_sin_theta', {'kind': 'product', 'params': [1, 1.0]}, False),
    ('radial', {'kind': 'radial', 'params': [2.0]}, False),
)


def _run_stl(config):
    resolution = config.resolutions[-1]
    product = build_fixture(config.fixture, resolution, config.options)
    profile = product.profile
    base_dist = shortest_paths(product.base)
    solver_res = int(config.options.get('solver_resolution', BATCH_RESOLUTION[0]))
    mask = _collar_mask(product, config.options.get('collar', 0.0))

    rng = np.random.default_rng(config.seed)
    first, second = _sample_pairs(rng, np.flatnonzero(mask), config.sample_counts.get('pairs', 500))
    distances = np.array([
        warped_distance(
            base_dist, profile,
            (product.node_t[p], product.node_vertex[p]),
            (product.node_t[q], product.node_vertex[q]),
            resolution=(solver_res, solver_res),
        )
        for p, q in zip(first, second)
    ])

    factor = 1.0 + config.tolerances['lipschitz_factor']
    rows = []
    for name, spec, canary in STL_FUNCTIONS:
        f = function_from_spec(product, spec)
        lipschitz = float(bl_energy(f).combined[mask].max())
        increments = np.abs(f.values[first] - f.values[second])
        ratios = increments / distances
        rows.append({
            'function': name,
            'L': lipschitz,
            'max_ratio': float(ratios.max()),
            'violations': int((increments > lipschitz * distances * factor).sum()),
            'pairs': len(ratios),
            'canary': canary,
        })
        logger.info("stl %s: L=%.4f, max ratio %.4f", name, lipschitz, ratios.max())
    return {'lipschitz': rows}, {'violations': sum(row['violations'] for row in rows)}


def _run_doubling(config):
    resolution = config.resolutions[-1]
    product = build_fixture(config.fixture, resolution, config.options)
    profile = product.profile
    graph = product.graph

    collar = config.options.get('collar', 0.1)
    r_max = config.options.get('r_max', 0.1)
    wm = profile.wm_samples[product.node_level]
    interior = (product.node_level > 0) & (product.node_level < profile.grid_count - 1)
    candidates = np.flatnonzero(interior & (wm >= collar))

    spacing = max(profile.dt, float(product.base.lengths.max() * profile.wd_samples.max()))
    radii = np.geomspace(2 * spacing, r_max, config.sample_counts.get('radii', 6))

    rng = np.random.default_rng(config.seed)
    count = min(config.sample_counts.get('centers', 40), len(candidates))
    centers = np.sort(rng.choice(candidates, size=count, replace=False))

    rows = []
    for center in centers:
        distances = csgraph.dijkstra(graph.adjacency, directed=False, indices=int(center), limit=2 * r_max * 1.01)
        for r in radii:
            inner = ball_measure(graph, center, r, distances)
            outer = ball_measure(graph, center, 2 * r, distances)
            rows.append({
                'center': int(center),
                't': float(product.node_t[center]),
                'r': float(r),
                'inner': inner,
                'outer': outer,
                'ratio': outer / inner,
            })
    ratios = [row['ratio'] for row in rows]
    return {'balls': rows}, {'sup_ratio': max(ratios), 'min_ratio': min(ratios)}


def _analytic_remainder(profile, base_mass, n):
    """base_mass * integral of w_m / (D log n)^2 over {1/n <= D <= n}."""
    zeros = profile.levels[profile.wm_samples == 0]
    log_n = np.log(n)

    def integrand(t):
        distance = float(distance_to_zero_set(profile, t))
        if not 1.0 / n <= distance <= n:
            return 0.0
        return float(profile.wm(t)) / (distance * log_n) ** 2

    breaks = sorted({
        float(z + s * d)
        for z in zeros for s in (-1, 1) for d in (1.0 / n, 1.0, float(n))
        if profile.a < z + s * d < profile.b
    })
    value, _ = quad(integrand, profile.a, profile.b, points=breaks or None, limit=500)
    return base_mass * value


def _run_capacity(config):
    options = dict(config.options)
    ladder = config.resolutions
    options.setdefault('levels', options.get('levels_per_n', 4) * ladder[-1] + 1)
    product = build_fixture(config.fixture, options.get('base_vertices', 4), options)
    profile = product.profile
    base_mass = product.base.total_measure

    f = GridFunction(np.ones(product.node_count), product)
    rows = []
    for n in ladder:
        cut, remainder = cutoff('log_eta', {'n': n}, f)
        rows.append({
            'n': n,
            'remainder': remainder,
            'scaled': remainder * np.log(n),
            'analytic': _analytic_remainder(profile, base_mass, n),
            'bl_distance': bl_distance(f, cut),
        })
        logger.info("capacity n=%d: remainder %.6g (analytic %.6g)", n, remainder, rows[-1]['analytic'])

    cover = abs(profile.a) + profile.length + 2.0
    cut, remainder = cutoff('truncate_chi', {'radius': cover, 'center': profile.a}, f)
    canary = [{
        'kind': 'truncate_chi',
        'remainder': remainder,
        'max_change': float(np.abs(cut.values - f.values).max()),
    }]

    scaled = [row['scaled'] for row in rows]
    return {'decay': rows, 'canary': canary}, {'scaled_ratio': max(scaled) / min(scaled)}


def _random_trig_grid(rng, levels, xs, max_frequency):
    grid = np.zeros((len(levels), len(xs)))
    for p in range(max_frequency + 1):
        for q in range(max_frequency + 1):
            amplitude = rng.normal() / (1 + p + q)
            phase_t, phase_x = rng.uniform(0, 2 * np.pi, size=2)
            grid += amplitude * np.outer(np.cos(np.pi * p * levels + phase_t), np.cos(np.pi * q * xs + phase_x))
    return grid


def _run_density(config):
    product = build_fixture(config.fixture, config.resolutions[-1], config.options)
    rng = np.random.default_rng(config.seed)
    levels = product.profile.levels
    xs = product.base.coordinates[:, 0]
    max_frequency = int(config.options.get('max_frequency', 2))

    rows = []
    for k in range(config.sample_counts.get('functions', 20)):
        f = GridFunction.from_grid(product, _random_trig_grid(rng, levels, xs, max_frequency))
        before = bl_energy(f, 'cartesian')
        for n in config.resolutions:
            tf = time_discretize(f, n)
            after = bl_energy(tf, 'cartesian')
            rows.append({
                'function': k,
                'n': n,
                'l2_in': f.l2_norm(),
                'l2_out': tf.l2_norm(),
                'ex_in': before.E_partial_x,
                'ex_out': after.E_partial_x,
                'et_in': before.E_partial_t,
                'et_out': after.E_partial_t,
                'error': (tf - f).l2_norm(),
            })

    constant = GridFunction(np.full(product.node_count, 1.0), product)
    canary = [
        {'n': n, 'max_change': float(np.abs(time_discretize(constant, n).values - 1.0).max())}
        for n in config.resolutions
    ]
    return {'operator': rows, 'canary': canary}, {'functions': config.sample_counts.get('functions', 20)}


SUITE_RUNNERS = {
    'tensorization': _run_ratio_suite,
    'warp_gradient': _run_ratio_suite,
    'dist_factorization': _run_dist_factorization,
    'stl': _run_stl,
    'doubling': _run_doubling,
    'capacity': _run_capacity,
    'density': _run_density,
}


# ---------------------------------------------------------------------------
# Verdicts
# ---------------------------------------------------------------------------

def _pass_ratio(tables, tolerances):
    rows = tables['ratios']
    for name in dict.fromkeys(row['function'] for row in rows):
        series = sorted((row for row in rows if row['function'] == name), key=lambda row: row['resolution'])
        deviations = [row['deviation'] for row in series]
        if series[0]['canary']:
            if max(deviations) > tolerances['canary']:
                return False
        elif not _nonincreasing(deviations) or deviations[-1] > tolerances['deviation']:
            return False
    return True


def _pass_dist(tables, tolerances):
    sampled = [row['relative'] for row in tables['pairs'] if not row['canary']]
    canaries = [row['relative'] for row in tables['pairs'] if row['canary']]
    if max(np.abs(sampled)) > tolerances['relative']:
        return False
    if min(sampled) < -tolerances['one_sided']:
        return False
    if any(abs(value) > tolerances['canary'] for value in canaries):
        return False
    oracle = tables.get('oracle', [])
    if oracle:
        if max(row['solver_relative'] for row in oracle) > tolerances['oracle_solver']:
            return False
        graph_relative = [row['graph_relative'] for row in oracle]
        if max(np.abs(graph_relative)) > tolerances['oracle_graph']:
            return False
        if min(graph_relative) < -tolerances['one_sided']:
            return False
    return True


def _pass_stl(tables, tolerances):
    return all(row['violations'] == 0 for row in tables['lipschitz'])


def _pass_doubling(tables, tolerances):
    ratios = [row['ratio'] for row in tables['balls']]
    return max(ratios) <= tolerances['doubling_constant'] and min(ratios) >= 1.0 - TREND_SLACK


def _pass_capacity(tables, tolerances):
    rows = sorted(tables['decay'], key=lambda row: row['n'])
    scaled = [row['scaled'] for row in rows]
    if max(scaled) / min(scaled) > tolerances['ratio']:
        return False
    first = rows[0]
    if abs(first['remainder'] - first['analytic']) > tolerances['analytic'] * first['analytic']:
        return False
    if not _nonincreasing([row['bl_distance'] for row in rows]):
        return False
    return all(
        row['remainder'] <= tolerances['canary'] and row['max_change'] <= tolerances['canary']
        for row in tables['canary']
    )


def _pass_density(tables, tolerances):
    rows = tables['operator']
    for row in rows:
        if row['l2_out'] > row['l2_in'] + tolerances['l2'] * max(1.0, row['l2_in']):
            return False
        if row['ex_out'] > row['ex_in'] + tolerances['energy']:
            return False
        if row['et_out'] > row['et_in'] + tolerances['energy']:
            return False
    for k in dict.fromkeys(row['function'] for row in rows):
        errors = [row['error'] for row in sorted((r for r in rows if r['function'] == k), key=lambda r: r['n'])]
        if any(b >= a for a, b in zip(errors, errors[1:])):
            return False
    return all(row['max_change'] <= tolerances['canary'] for row in tables['canary'])


PASS_RULES = {
    'tensorization': _pass_ratio,
    'warp_gradient': _pass_ratio,
    'dist_factorization': _pass_dist,
    'stl': _pass_stl,
    'doubling': _pass_doubling,
    'capacity': _pass_capacity,
    'density': _pass_density,
}


def evaluate_pass(suite, tables, tolerances):
    """
    Verdict of a suite from its metric tables and tolerances alone.

    Parameters
    ----------
    suite : str
        Suite name
    tables : dict
        Metric tables as stored in the report
    tolerances : dict
        The run's tolerances

    Returns
    -------
    bool
        True if every check of the suite holds
    """
    if suite not in PASS_RULES:
        raise ValueError(f"unknown suite '{suite}'")
    return bool(PASS_RULES[suite](tables, tolerances))


def _plain(value):
    """numpy scalars to Python scalars, recursively."""
    if isinstance(value, dict):
        return {key: _plain(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(item) for item in value]
    if isinstance(value, np.generic):
        return value.item()
    return value


def run_suite(config):
    """
    Run one verification suite.

    Parameters
    ----------
    config : SuiteConfig
        Suite, fixture, ladder, tolerances and seed

    Returns
    -------
    VerificationReport
        Deterministic metrics for a fixed seed, the verdict and provenance

    Raises
    ------
    RuntimeError
        If a fixture cannot be built
    """
    logger.info("running suite %s on %s", config.suite, config.fixture)
    start = time.perf_counter()
    tables, summary = SUITE_RUNNERS[config.suite](config)
    tables, summary = _plain(tables), _plain(summary)
    passed = evaluate_pass(config.suite, tables, config.tolerances)
    runtime = time.perf_counter() - start

    logger.info("suite %s %s in %.2fs", config.suite, 'passed' if passed else 'FAILED', runtime)
    return VerificationReport(
        suite=config.suite,
        tables=tables,
        passed=passed,
        runtime=runtime,
        provenance={'config': _plain(config.to_dict()), 'version': __version__},
        summary=summary,
    )
