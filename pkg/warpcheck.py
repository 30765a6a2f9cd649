"""
Command-line front end: build spaces and products, evaluate distances and
energies, run verification suites.

Usage:
    python warpcheck.py gen circle --n 64 --out circle.json
    python warpcheck.py build --fixture cone --resolution 32 --out cone.json
    python warpcheck.py dist --space circle.json --profile cone.json --pairs pairs.csv --out d.csv
    python warpcheck.py energy --fixture square --resolution 32 --spec '{"kind": "t"}' --out e.json
    python warpcheck.py verify stl --config stl_cyl.cfg --out r.json
"""

import argparse
import json
import logging
import sys

import pandas as pd

from warpkit import __version__
from warpkit.dsolver import DEFAULT_RESOLUTION, GeodesicQuery, solve_batch
from warpkit.energy import ENERGY_MODES, bl_energy, function_from_spec, load_function, slope_energy
from warpkit.metric_space import GENERATORS, generate, load_space, save_space, shortest_paths
from warpkit.products import STENCILS, build_warped, export_product, product_distances
from warpkit.verification import FIXTURES, SUITES, build_fixture, load_config, make_config, run_suite, write_report
from warpkit.warp_profile import load_profile

logger = logging.getLogger("warpcheck")

PAIR_COLUMNS = ['t0', 'base_vertex0', 't1', 'base_vertex1']

# Exit codes
EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2


class UsageError(Exception):
    """Bad command-line usage, reported with exit code 2."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _add_product_source(parser, stencil_default):
    parser.add_argument('--space', help="Base space file (JSON)")
    parser.add_argument('--profile', help="Warp profile file (JSON)")
    parser.add_argument('--fixture', choices=[f for f in FIXTURES if f != 'custom'], help="Named fixture instead of files")
    parser.add_argument('--resolution', type=int, default=32, help="Fixture resolution (default: 32)")
    parser.add_argument('--stencil', choices=STENCILS, default=stencil_default, help=f"Product stencil (default: {stencil_default})")


def build_parser():
    parser = _Parser(prog='warpcheck', description="Warped products of metric measure spaces")
    parser.add_argument('-v', '--verbose', action='store_true', help="Debug logging")
    parser.add_argument('--version', action='version', version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest='command', required=True, parser_class=_Parser)

    gen = commands.add_parser('gen', help="Generate a fixture space file")
    gen.add_argument('kind', choices=sorted(GENERATORS))
    gen.add_argument('--n', type=int, required=True, help="Vertex count")
    gen.add_argument('--circumference', type=float, help="Circle circumference")
    gen.add_argument('--length', type=float, help="Interval length")
    gen.add_argument('--radius', type=float, help="Connection radius of a random geometric graph")
    gen.add_argument('--seed', type=int, help="Random seed")
    gen.add_argument('--out', required=True, help="Output space file")

    build = commands.add_parser('build', help="Build and export a warped product")
    _add_product_source(build, 'diagonal')
    build.add_argument('--out', required=True, help="Output space file; node table goes next to it")

    dist = commands.add_parser('dist', help="Batch warped distances")
    _add_product_source(dist, 'wide')
    dist.add_argument('--pairs', required=True, help="CSV with columns t0, base_vertex0, t1, base_vertex1")
    dist.add_argument('--method', choices=('graph', 'dsolver'), default='dsolver')
    dist.add_argument('--solver-resolution', type=int, default=DEFAULT_RESOLUTION[0], dest='solver_resolution')
    dist.add_argument('--out', required=True, help="Output distances CSV")

    energy = commands.add_parser('energy', help="Energies of a grid function")
    _add_product_source(energy, 'diagonal')
    source = energy.add_mutually_exclusive_group(required=True)
    source.add_argument('--function', help="Function file (CSV: level, vertex, value)")
    source.add_argument('--spec', help='Closed-form function as JSON, e.g. \'{"kind": "t"}\'')
    energy.add_argument('--mode', choices=ENERGY_MODES, help="Gradient mode (default: natural for the product)")
    energy.add_argument('--out', required=True, help="Output JSON")

    verify = commands.add_parser('verify', help="Run a verification suite")
    verify.add_argument('suite', choices=SUITES)
    verify.add_argument('--config', help="Suite config file (JSON)")
    verify.add_argument('--seed', type=int)
    verify.add_argument('--resolution', type=int, action='append', dest='resolutions',
                        help="Resolution; repeat for a ladder")
    verify.add_argument('--out', required=True, help="Report file; metric tables go next to it")
    return parser


def _load_product(args):
    if args.fixture:
        return build_fixture(args.fixture, args.resolution, {'stencil': args.stencil})
    if not (args.space and args.profile):
        raise UsageError("give --space and --profile, or --fixture")
    return build_warped(load_space(args.space), load_profile(args.profile), stencil=args.stencil)


def _read_pairs(path):
    frame = pd.read_csv(path)
    missing = [c for c in PAIR_COLUMNS if c not in frame.columns]
    if missing:
        raise ValueError(f"pairs file is missing columns: {', '.join(missing)}")
    if frame.empty:
        raise ValueError("pairs file has no rows")
    for column in ('base_vertex0', 'base_vertex1'):
        if not pd.api.types.is_integer_dtype(frame[column]):
            raise ValueError(f"{column} must hold integer vertex ids")
    for column in ('t0', 't1'):
        if not pd.api.types.is_numeric_dtype(frame[column]):
            raise ValueError(f"{column} must be numeric")
    return frame


def _graph_node(product, t, vertex):
    profile = product.profile
    level = profile.level_of(t)
    if abs(profile.levels[level] - t) > 1e-9 * profile.length or not profile.contains(t):
        raise ValueError(f"t={t} is not a grid level; the graph method needs t on the grid")
    if not 0 <= vertex < product.base.vertex_count:
        raise ValueError(f"base vertex {vertex} out of range")
    return int(product.node_table[level, vertex])


def cmd_gen(args):
    params = {'n': args.n}
    for key in ('circumference', 'length', 'radius', 'seed'):
        if getattr(args, key) is not None:
            params[key] = getattr(args, key)
    space = generate(args.kind, **params)
    save_space(space, args.out)
    print(f"✅ {space.name}: {space.vertex_count} vertices, {len(space.edges)} edges → {args.out}")
    return EXIT_OK


def cmd_build(args):
    product = _load_product(args)
    path, sidecar = export_product(product, args.out)
    print(f"✅ {product.node_count} nodes, {len(product.graph.edges)} edges → {path} (+ {sidecar.name})")
    return EXIT_OK


def cmd_dist(args):
    frame = _read_pairs(args.pairs)
    product = _load_product(args)
    profile = product.profile
    base = product.base

    vertices = frame[['base_vertex0', 'base_vertex1']].to_numpy()
    if vertices.min() < 0 or vertices.max() >= base.vertex_count:
        raise ValueError(f"pairs file has base vertices outside [0, {base.vertex_count - 1}]")

    if args.method == 'graph':
        heads = [_graph_node(product, t, x) for t, x in zip(frame['t0'], frame['base_vertex0'])]
        tails = [_graph_node(product, t, x) for t, x in zip(frame['t1'], frame['base_vertex1'])]
        distances = product_distances(product, heads)
        values = [distances.distance(p, q) for p, q in zip(heads, tails)]
    else:
        base_dist = shortest_paths(base)
        resolution = (args.solver_resolution, args.solver_resolution)
        queries = [
            GeodesicQuery(float(t0), float(t1), base_dist.distance(x0, x1), resolution)
            for t0, x0, t1, x1 in frame[PAIR_COLUMNS].itertuples(index=False)
        ]
        values = [solution.value for solution in solve_batch(profile, queries)]

    result = frame[PAIR_COLUMNS].copy()
    result['distance'] = values
    result['method'] = args.method
    result.to_csv(args.out, index=False)
    print(f"✅ {len(result)} distances ({args.method}) → {args.out}")
    return EXIT_OK


def cmd_energy(args):
    product = _load_product(args)
    if args.function:
        f = load_function(product, args.function)
    else:
        try:
            spec = json.loads(args.spec)
        except json.JSONDecodeError as e:
            raise ValueError(f"--spec is not valid JSON: {e}") from e
        f = function_from_spec(product, spec)

    field = bl_energy(f, args.mode)
    if product.stencil != 'axis':
        field = slope_energy(f, field)
    document = {
        'mode': field.mode,
        'stencil': product.stencil,
        'nodes': product.node_count,
        'l2_norm': f.l2_norm(),
        **field.totals(),
    }
    with open(args.out, 'w') as handle:
        json.dump(document, handle, indent=2)
    print(f"✅ E_combined = {field.E_combined:.6g} → {args.out}")
    return EXIT_OK


def cmd_verify(args):
    if args.config:
        config = load_config(args.config, suite=args.suite, seed=args.seed, resolutions=args.resolutions)
    else:
        config = make_config(args.suite, seed=args.seed, resolutions=args.resolutions)
    report = run_suite(config)
    write_report(report, args.out)
    status = "✅ PASSED" if report.passed else "❌ FAILED"
    print(f"{status} {report.suite} on {config.fixture} in {report.runtime:.2f}s → {args.out}")
    return EXIT_OK if report.passed else EXIT_FAILED


COMMANDS = {
    'gen': cmd_gen,
    'build': cmd_build,
    'dist': cmd_dist,
    'energy': cmd_energy,
    'verify': cmd_verify,
}


def cli_main(argv=None):
    """
    Run one subcommand.

    Returns
    -------
    int
        0 on success or a passing suite, 1 on a failing suite, 2 on usage
        or input errors
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format='%(asctime)s %(levelname)s %(name)s: %(message)s',
    )

    try:
        return COMMANDS[args.command](args)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
    except (ValueError, FileNotFoundError, KeyError, RuntimeError) as e:
        logger.debug("command %s failed", args.command, exc_info=True)
        print(f"❌ Error: {e}", file=sys.stderr)
    return EXIT_USAGE


def main():
    sys.exit(cli_main())


if __name__ == '__main__':
    main()
