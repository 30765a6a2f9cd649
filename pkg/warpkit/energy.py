"""Gradients and energies of grid functions on product spaces."""

import dataclasses
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd

from .metric_space import MetricMeasureSpace, local_slope, shortest_paths
from .warp_profile import analyze_zero_set, distance_to_zero_set

logger = logging.getLogger(__name__)

ENERGY_MODES = ('cartesian', 'warped')
CUTOFF_KINDS = ('truncate_chi', 'log_eta', 'spatial_sigma', 'combined')
FUNCTION_KINDS = (
    't', 'x_coordinate_of_generator', 'product', 'sin_t', 'sin_product', 'radial', 'constant',
)

QUOTIENT_TOLERANCE = 1e-12
CHECK_TOLERANCE = 1e-12


@dataclass
class GridFunction:
    """One real value per product node."""

    values: np.ndarray
    product: object

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float).reshape(-1)
        if len(self.values) != self.product.node_count:
            raise ValueError(
                f"function has {len(self.values)} values but the product has {self.product.node_count} nodes"
            )
        if not np.isfinite(self.values).all():
            raise ValueError("function values must be finite")

    @property
    def grid(self):
        """Values on the full (level, base vertex) grid."""
        return self.values[self.product.node_table]

    @classmethod
    def from_grid(cls, product, grid):
        """
        Pass grid values to the quotient.

        Raises
        ------
        ValueError
            If an apex fiber carries more than one value
        """
        grid = np.asarray(grid, dtype=float)
        table = product.node_table
        if grid.shape != table.shape:
            raise ValueError(f"grid has shape {grid.shape}, expected {table.shape}")
        for level in product.apex_levels:
            row = grid[level]
            if np.ptp(row) > QUOTIENT_TOLERANCE * max(1.0, np.abs(row).max()):
                raise ValueError(f"function does not pass to the quotient at apex level {level}")

        counts = np.bincount(table.ravel(), minlength=product.node_count)
        sums = np.bincount(table.ravel(), weights=grid.ravel(), minlength=product.node_count)
        return cls(values=sums / counts, product=product)

    def _check_same(self, other):
        if other.product is not self.product:
            raise ValueError("functions live on different products")

    def __add__(self, other):
        self._check_same(other)
        return GridFunction(self.values + other.values, self.product)

    def __sub__(self, other):
        self._check_same(other)
        return GridFunction(self.values - other.values, self.product)

    def __mul__(self, other):
        if isinstance(other, GridFunction):
            self._check_same(other)
            return GridFunction(self.values * other.values, self.product)
        return GridFunction(self.values * float(other), self.product)

    __rmul__ = __mul__

    def l2_norm(self):
        return float(np.sqrt(np.sum(self.values ** 2 * self.product.measure)))


@dataclass
class GradientField:
    """Per-node gradient densities and their measure-weighted energies."""

    partial_t: np.ndarray
    partial_x: np.ndarray
    measure: np.ndarray
    weight: np.ndarray = None
    combined: np.ndarray = None
    slope: np.ndarray = None
    mode: str = None

    def energy(self, name, mask=None):
        """Sum of density^2 * measure, optionally over a node mask."""
        density = getattr(self, name)
        if density is None:
            return None
        terms = density ** 2 * self.measure
        return float(terms[mask].sum() if mask is not None else terms.sum())

    @property
    def E_partial_t(self):
        return self.energy('partial_t')

    @property
    def E_partial_x(self):
        return self.energy('partial_x')

    @property
    def E_combined(self):
        return self.energy('combined')

    @property
    def E_slope(self):
        return self.energy('slope')

    def totals(self):
        return {
            'E_partial_t': self.E_partial_t,
            'E_partial_x': self.E_partial_x,
            'E_combined': self.E_combined,
            'E_slope': self.E_slope,
        }


def partial_gradients(f):
    """
    Slice-wise difference-quotient gradients.

    partial_t is the larger of the backward and forward quotients along
    the level direction; partial_x is the largest quotient over base
    neighbours using un-warped base lengths, and vanishes at apex nodes.

    Parameters
    ----------
    f : GridFunction
        Function on a built product

    Returns
    -------
    GradientField
        partial_t and partial_x per node
    """
    product = f.product
    table = product.node_table
    grid = f.grid

    vertical = np.abs(np.diff(grid, axis=0)) / product.profile.dt
    partial_t = np.zeros_like(grid)
    partial_t[:-1] = vertical
    partial_t[1:] = np.maximum(partial_t[1:], vertical)

    partial_x_by_vertex = np.zeros(grid.shape[::-1])
    base = product.base
    if len(base.edges):
        u, v = base.edges[:, 0], base.edges[:, 1]
        quotients = (np.abs(grid[:, v] - grid[:, u]) / base.lengths).T
        np.maximum.at(partial_x_by_vertex, u, quotients)
        np.maximum.at(partial_x_by_vertex, v, quotients)
    partial_x = partial_x_by_vertex.T
    partial_x[list(product.apex_levels)] = 0.0

    node_t = np.zeros(product.node_count)
    node_x = np.zeros(product.node_count)
    np.maximum.at(node_t, table.ravel(), partial_t.ravel())
    np.maximum.at(node_x, table.ravel(), partial_x.ravel())
    return GradientField(partial_t=node_t, partial_x=node_x, measure=product.measure)


def _natural_mode(product):
    return 'cartesian' if product.is_cartesian else 'warped'


def bl_energy(f, mode=None):
    """
    Beppo-Levi gradient |Df|_c or |Df|_w and its energy.

    combined^2 = weight * partial_x^2 + partial_t^2 with weight 1
    (cartesian) or w_d(t)^-2 (warped, zero on apex levels).

    Parameters
    ----------
    f : GridFunction
        The function
    mode : str, optional
        'cartesian' or 'warped'; defaults to the product's own kind

    Returns
    -------
    GradientField
        Partials, weight and combined density
    """
    product = f.product
    mode = mode or _natural_mode(product)
    if mode not in ENERGY_MODES:
        raise ValueError(f"unknown energy mode '{mode}', expected one of {', '.join(ENERGY_MODES)}")

    field = partial_gradients(f)
    if mode == 'cartesian':
        weight = np.ones(product.node_count)
    else:
        wd = product.profile.wd_samples[product.node_level]
        collapsed = wd == 0
        if (collapsed & ~product.is_apex).any():
            raise RuntimeError("internal consistency error: multi-point fiber on a level where w_d = 0")
        weight = np.zeros(product.node_count)
        weight[~collapsed] = wd[~collapsed] ** -2.0

    combined = np.sqrt(weight * field.partial_x ** 2 + field.partial_t ** 2)
    return dataclasses.replace(field, weight=weight, combined=combined, mode=mode)


def slope_energy(f, field=None):
    """
    Metric slope over product-graph neighbours and its energy.

    slope(v) is the largest |f(u) - f(v)| / len(u, v) over graph
    neighbours u, i.e. lip f measured with the warped edge lengths.
    """
    product = f.product
    if product.stencil not in ('diagonal', 'wide'):
        raise ValueError(f"slope energy needs a diagonal or wide stencil, product uses '{product.stencil}'")
    field = field if field is not None else bl_energy(f)
    return dataclasses.replace(field, slope=local_slope(product.graph, f.values))


# ---------------------------------------------------------------------------
# Time discretization
# ---------------------------------------------------------------------------

def _check_cell_count(product, n):
    grid_count = product.profile.grid_count
    if not 1 <= n <= grid_count - 1:
        raise ValueError(f"n must lie in [1, {grid_count - 1}], got {n}")


def _cell_average_matrix(profile, n):
    """(n, M) matrix of exact cell averages of the piecewise-linear interpolant."""
    levels = profile.levels
    h = profile.dt
    cell_edges = np.linspace(profile.a, profile.b, n + 1)
    width = profile.length / n
    lo, hi = levels[:-1], levels[1:]

    averages = np.zeros((n, profile.grid_count))
    for k in range(n):
        p = np.clip(cell_edges[k], lo, hi)
        q = np.clip(cell_edges[k + 1], lo, hi)
        averages[k, :-1] += ((hi - p) ** 2 - (hi - q) ** 2) / (2 * h)
        averages[k, 1:] += ((q - lo) ** 2 - (p - lo) ** 2) / (2 * h)
    return averages / width


def _centred_hat_matrix(profile, n):
    """(M, n) matrix of cell-centred hats, constant beyond the outer centres."""
    width = profile.length / n
    centres = profile.a + (np.arange(n) + 0.5) * width
    identity = np.eye(n)
    return np.column_stack([np.interp(profile.levels, centres, identity[k]) for k in range(n)])


def cell_averages(f, n):
    """
    Averages g_k(x) = (1/H) * integral of f(t, x) over the k-th of n equal cells.

    Returns
    -------
    np.ndarray
        (n, base vertices) array
    """
    _check_cell_count(f.product, n)
    return _cell_average_matrix(f.product.profile, n) @ f.grid


def time_discretize(f, n):
    """
    Replace f by the piecewise-linear-in-t interpolant of its cell averages.

    The average over the k-th cell sits at the cell centre; T_n f is
    constant on the two outer half cells and linear in between. When 2n
    divides M - 1 the operator is an exact L^2 contraction and does not
    increase the x-energy.

    Parameters
    ----------
    f : GridFunction
        Function on a product without apex levels
    n : int
        Number of cells, 1 <= n <= M - 1

    Returns
    -------
    GridFunction
        T_n f
    """
    product = f.product
    _check_cell_count(product, n)
    if product.apex_levels:
        raise ValueError("time discretization needs a product without apex levels")
    if (product.profile.grid_count - 1) % (2 * n):
        logger.warning(
            "2n=%d does not divide M-1=%d: cell centres fall between levels",
            2 * n, product.profile.grid_count - 1,
        )

    operator = _centred_hat_matrix(product.profile, n) @ _cell_average_matrix(product.profile, n)
    return GridFunction.from_grid(product, operator @ f.grid)


# ---------------------------------------------------------------------------
# Cutoffs
# ---------------------------------------------------------------------------

def _log_eta(product, n):
    report = analyze_zero_set(product.profile)
    if not report.has_zeros:
        raise ValueError("log_eta cutoff needs w_m to vanish somewhere")
    if not report.is_discrete:
        raise ValueError("log_eta cutoff needs a discrete zero set of w_m")
    if report.linear_decay_constant is None or not np.isfinite(report.linear_decay_constant):
        raise ValueError("log_eta cutoff needs w_m to decay linearly at its zeros")
    if not n > 1:
        raise ValueError(f"log_eta needs n > 1, got {n}")

    distance = distance_to_zero_set(product.profile, product.profile.levels)
    with np.errstate(divide='ignore'):
        eta = 1.0 - np.abs(np.log(distance)) / np.log(n)
    return np.clip(eta, 0.0, 1.0)


def _truncate_chi(product, radius, center):
    return np.clip(radius - np.abs(product.profile.levels - center), 0.0, 1.0)


def _spatial_sigma(product, m, center):
    base_distance = shortest_paths(product.base, [center]).values[0]
    return np.clip(m - base_distance, 0.0, 1.0)


def _cutoff_grid(product, kind, params):
    ones_t = np.ones(product.profile.grid_count)
    ones_x = np.ones(product.base.vertex_count)
    try:
        if kind == 'truncate_chi':
            return _truncate_chi(product, params['radius'], params.get('center', 0.0))[:, None] * ones_x
        if kind == 'log_eta':
            return _log_eta(product, params['n'])[:, None] * ones_x
        if kind == 'spatial_sigma':
            return ones_t[:, None] * _spatial_sigma(product, params['m'], params.get('center', 0))
        n = params['n']
        in_t = _log_eta(product, n) * _truncate_chi(product, params.get('radius', n), params.get('center_t', 0.0))
        in_x = _spatial_sigma(product, params['m'], params.get('center_x', 0))
        return in_t[:, None] * in_x[None, :]
    except KeyError as e:
        raise ValueError(f"{kind} cutoff is missing parameter {e}") from e


def cutoff(kind, params, f):
    """
    Multiply f by a cutoff and measure the energy the cutoff adds.

    Parameters
    ----------
    kind : str
        'truncate_chi' (0 v (radius - |t - center|) ^ 1), 'log_eta'
        (1 - |log D(t)| / log n clamped to [0, 1]), 'spatial_sigma'
        (0 v (m - d(x, center)) ^ 1) or 'combined' (their product)
    params : dict
        Cutoff parameters
    f : GridFunction
        The function

    Returns
    -------
    tuple
        (cutoff * f, sum over nodes of |D cutoff|^2 * f^2 * m)
    """
    if kind not in CUTOFF_KINDS:
        raise ValueError(f"unknown cutoff kind '{kind}', expected one of {', '.join(CUTOFF_KINDS)}")
    product = f.product
    grid = _cutoff_grid(product, kind, params)
    # apex fibers are single points: keep the largest factor over the fiber
    for level in product.apex_levels:
        grid[level] = grid[level].max()

    factor = GridFunction.from_grid(product, grid)
    gradient = bl_energy(factor)
    remainder = float(np.sum(gradient.combined ** 2 * f.values ** 2 * product.measure))
    logger.debug("%s cutoff %s: remainder %.6g", kind, params, remainder)
    return factor * f, remainder


def bl_distance(f, g, mode=None):
    """sqrt(||f - g||^2_L2 + E_combined(f - g))."""
    difference = f - g
    return float(np.sqrt(difference.l2_norm() ** 2 + bl_energy(difference, mode).E_combined))


# ---------------------------------------------------------------------------
# Calculus checks
# ---------------------------------------------------------------------------

@dataclass
class CalculusReport:
    """Nodes violating each discrete calculus rule."""

    violations: dict
    max_excess: dict

    @property
    def passed(self):
        return all(len(nodes) == 0 for nodes in self.violations.values())

    def summary(self):
        return {name: len(nodes) for name, nodes in self.violations.items()}


def _neighbourhood_sup(graph, values):
    """max of values over each vertex and its graph neighbours."""
    adjacency = graph.adjacency
    rows = np.repeat(np.arange(graph.vertex_count), np.diff(adjacency.indptr))
    sup = values.copy()
    np.maximum.at(sup, rows, values[adjacency.indices])
    return sup


def _violations(lhs, rhs):
    excess = lhs - rhs - CHECK_TOLERANCE * (1.0 + np.abs(rhs))
    return [int(v) for v in np.flatnonzero(excess > 0)], float(np.max(lhs - rhs, initial=0.0))


def _split_form_bound(f, split):
    """Per-node sup-form partials P_x^2 + P_t^2 for f = g1(x) + h(t) g2(x)."""
    product = f.product
    g1, h, g2 = (np.asarray(part, dtype=float) for part in split)
    grid_count, base_count = product.node_table.shape
    if g1.shape != (base_count,) or g2.shape != (base_count,) or h.shape != (grid_count,):
        raise ValueError("split parts must have shapes (base vertices,), (levels,), (base vertices,)")

    expected = g1[None, :] + h[:, None] * g2[None, :]
    if not np.allclose(f.grid, expected, rtol=0.0, atol=1e-12 * max(1.0, np.abs(expected).max())):
        raise ValueError("function is not of the given split form")

    graph = product.graph
    adjacency = graph.adjacency
    v = np.repeat(np.arange(graph.vertex_count), np.diff(adjacency.indptr))
    u = adjacency.indices
    lengths = adjacency.data

    levels = product.node_level
    x_v = product.node_vertex[v].copy()
    x_u = product.node_vertex[u].copy()
    apex = product.is_apex
    # an apex end takes the base vertex of the other end
    x_v[apex[v]] = x_u[apex[v]]
    x_u[apex[u]] = x_v[apex[u]]

    t = product.profile.levels
    dt = np.abs(t[levels[u]] - t[levels[v]])
    horizontal = np.sqrt(np.maximum(lengths ** 2 - dt ** 2, 0.0))

    a_part = g1[x_u] - g1[x_v] + h[levels[v]] * (g2[x_u] - g2[x_v])
    quotient_x = np.divide(np.abs(a_part), horizontal, out=np.zeros_like(a_part), where=horizontal > 0)
    dh = np.abs(h[levels[u]] - h[levels[v]])
    quotient_h = np.divide(dh, dt, out=np.zeros_like(dh), where=dt > 0)

    g2_node = np.abs(g2)[product.node_vertex]
    g2_node[apex] = np.abs(g2).max()
    g2_sup = _neighbourhood_sup(graph, g2_node)

    p_x = np.zeros(graph.vertex_count)
    p_t = np.zeros(graph.vertex_count)
    np.maximum.at(p_x, v, quotient_x)
    np.maximum.at(p_t, v, quotient_h)
    return p_x ** 2 + (p_t * g2_sup) ** 2


def calculus_checks(f, g, alpha, beta, L, split=None):
    """
    Check the discrete slope calculus node by node.

    - subadditivity: slope(alpha f + beta g) <= |alpha| slope(f) + |beta| slope(g)
    - leibniz: slope(f g) <= sup|f| slope(g) + sup|g| slope(f), sups over
      the closed graph neighbourhood
    - scaling: dividing every edge length by L multiplies slopes by L
    - split_form (when ``split = (g1, h, g2)`` describes f): slope(f)^2 is
      bounded by the sup-form partials

    Returns
    -------
    CalculusReport
        Violating nodes per rule (expected empty)
    """
    f._check_same(g)
    if not L > 0:
        raise ValueError(f"scaling factor must be positive, got {L}")
    graph = f.product.graph

    slope_f = local_slope(graph, f.values)
    slope_g = local_slope(graph, g.values)

    violations, excess = {}, {}
    lhs = local_slope(graph, alpha * f.values + beta * g.values)
    violations['subadditivity'], excess['subadditivity'] = _violations(
        lhs, abs(alpha) * slope_f + abs(beta) * slope_g
    )

    lhs = local_slope(graph, f.values * g.values)
    rhs = (_neighbourhood_sup(graph, np.abs(f.values)) * slope_g
           + _neighbourhood_sup(graph, np.abs(g.values)) * slope_f)
    violations['leibniz'], excess['leibniz'] = _violations(lhs, rhs)

    scaled = MetricMeasureSpace(
        vertex_count=graph.vertex_count,
        edges=graph.edges,
        lengths=graph.lengths / L,
        measure=graph.measure,
        name=f"{graph.name} / {L:g}",
        strict_measure=False,
    )
    scaled_slope = local_slope(scaled, f.values)
    mismatch = np.abs(scaled_slope - L * slope_f)
    violations['scaling'], excess['scaling'] = _violations(mismatch, CHECK_TOLERANCE * L * slope_f)

    if split is not None:
        violations['split_form'], excess['split_form'] = _violations(slope_f ** 2, _split_form_bound(f, split))

    report = CalculusReport(violations=violations, max_excess=excess)
    logger.debug("calculus checks: %s", report.summary())
    return report


# ---------------------------------------------------------------------------
# Function construction and files
# ---------------------------------------------------------------------------

def _coordinate(product, axis):
    coordinates = product.base.coordinates
    if coordinates is None:
        raise ValueError(f"base space {product.base.name} has no coordinates")
    if not 0 <= axis < coordinates.shape[1]:
        raise ValueError(f"coordinate axis {axis} out of range for {coordinates.shape[1]}-d coordinates")
    return coordinates[:, axis]


def function_from_spec(product, spec):
    """
    Grid function from a closed-form spec {kind, params}.

    Kinds: t; x_coordinate_of_generator [axis]; product [axis, power]
    (t^power * x_axis); sin_t [k]; sin_product [kt, kx, axis]
    (sin(kt t) sin(kx x_axis)); radial [power] ((t - a)^power);
    constant [c].
    """
    kind = spec.get('kind')
    if kind not in FUNCTION_KINDS:
        raise ValueError(f"unknown function kind '{kind}', expected one of {', '.join(FUNCTION_KINDS)}")
    params = list(spec.get('params', []))

    def param(index, default):
        return params[index] if len(params) > index else default

    t = product.profile.levels[:, None]
    shape = product.node_table.shape
    if kind == 't':
        grid = np.broadcast_to(t, shape)
    elif kind == 'constant':
        grid = np.full(shape, float(param(0, 1.0)))
    elif kind == 'x_coordinate_of_generator':
        grid = np.broadcast_to(_coordinate(product, int(param(0, 0)))[None, :], shape)
    elif kind == 'product':
        grid = t ** float(param(1, 1.0)) * _coordinate(product, int(param(0, 0)))[None, :]
    elif kind == 'sin_t':
        grid = np.broadcast_to(np.sin(float(param(0, 1.0)) * t), shape)
    elif kind == 'sin_product':
        x = _coordinate(product, int(param(2, 0)))[None, :]
        grid = np.sin(float(param(0, 1.0)) * t) * np.sin(float(param(1, 1.0)) * x)
    else:
        grid = np.broadcast_to((t - product.profile.a) ** float(param(0, 2.0)), shape)
    return GridFunction.from_grid(product, np.array(grid, dtype=float))


def save_function(f, path):
    """Write a function file: one (level, vertex, value) row per grid point."""
    levels, vertices = np.indices(f.product.node_table.shape)
    frame = pd.DataFrame({'level': levels.ravel(), 'vertex': vertices.ravel(), 'value': f.grid.ravel()})
    frame.to_csv(path, index=False)


def load_function(product, path):
    """
    Read a function file and validate it against the product.

    Raises
    ------
    FileNotFoundError
        If the file does not exist
    ValueError
        On missing columns, out-of-range or duplicate keys, missing grid
        points or values that do not pass to the quotient
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Function file not found at {path}")
    frame = pd.read_csv(path)
    missing = {'level', 'vertex', 'value'} - set(frame.columns)
    if missing:
        raise ValueError(f"function file is missing columns: {', '.join(sorted(missing))}")

    grid_count, base_count = product.node_table.shape
    levels = frame['level'].to_numpy()
    vertices = frame['vertex'].to_numpy()
    if not (np.issubdtype(levels.dtype, np.integer) and np.issubdtype(vertices.dtype, np.integer)):
        raise ValueError("level and vertex must be integers")
    if levels.min() < 0 or levels.max() >= grid_count or vertices.min() < 0 or vertices.max() >= base_count:
        raise ValueError("function file has out-of-range (level, vertex) keys")
    if frame.duplicated(['level', 'vertex']).any():
        raise ValueError("function file has duplicate (level, vertex) keys")
    if len(frame) != grid_count * base_count:
        raise ValueError(f"function file covers {len(frame)} of {grid_count * base_count} grid points")

    grid = np.empty((grid_count, base_count))
    grid[levels, vertices] = frame['value'].to_numpy(dtype=float)
    return GridFunction.from_grid(product, grid)
