"""Discrete warped products, their distances and Sobolev energies."""

__version__ = "0.1.0"

from .metric_space import (
    DistanceMatrix,
    MetricMeasureSpace,
    ball_measure,
    circle_space,
    generate,
    interval_space,
    load_space,
    random_geometric_space,
    save_space,
    shortest_paths,
    validate_space,
)
from .warp_profile import (
    CompatibilityError,
    WarpFunction,
    WarpProfile,
    analyze_zero_set,
    cone_profile,
    cylinder_profile,
    distance_to_zero_set,
    eval_profile,
    load_profile,
    save_profile,
    suspension_profile,
)
from .products import build_cartesian, build_warped, export_product, node_lookup, product_distances
from .dsolver import GeodesicQuery, ball_radius, oracle_D, solve_batch, solve_D, warped_distance
from .energy import (
    GridFunction,
    bl_distance,
    bl_energy,
    calculus_checks,
    cutoff,
    function_from_spec,
    load_function,
    slope_energy,
    time_discretize,
)
from .reporting import calculate_pass_stats, create_summary_table
from .verification import SuiteConfig, evaluate_pass, load_config, make_config, run_suite, write_report

__all__ = [
    '__version__',
    'DistanceMatrix',
    'MetricMeasureSpace',
    'ball_measure',
    'circle_space',
    'generate',
    'interval_space',
    'load_space',
    'random_geometric_space',
    'save_space',
    'shortest_paths',
    'validate_space',
    'CompatibilityError',
    'WarpFunction',
    'WarpProfile',
    'analyze_zero_set',
    'cone_profile',
    'cylinder_profile',
    'distance_to_zero_set',
    'eval_profile',
    'load_profile',
    'save_profile',
    'suspension_profile',
    'build_cartesian',
    'build_warped',
    'export_product',
    'node_lookup',
    'product_distances',
    'GeodesicQuery',
    'ball_radius',
    'oracle_D',
    'solve_batch',
    'solve_D',
    'warped_distance',
    'GridFunction',
    'bl_distance',
    'bl_energy',
    'calculus_checks',
    'cutoff',
    'function_from_spec',
    'load_function',
    'slope_energy',
    'time_discretize',
    'calculate_pass_stats',
    'create_summary_table',
    'SuiteConfig',
    'evaluate_pass',
    'load_config',
    'make_config',
    'run_suite',
    'write_report',
]
