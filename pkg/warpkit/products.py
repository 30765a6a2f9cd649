"""Cartesian and warped products of a metric measure space with an interval."""

import logging
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np
import pandas as pd
from scipy.integrate import simpson
from scipy.sparse import csgraph

from .metric_space import MetricMeasureSpace, save_space, shortest_paths, unique_edges
from .warp_profile import analyze_zero_set, cylinder_profile

logger = logging.getLogger(__name__)

STENCILS = ('axis', 'diagonal', 'wide')

# Wide stencil reach: level steps and base hops per edge
DEFAULT_LEVEL_REACH = 8
DEFAULT_BASE_REACH = 4

# Simpson sub-intervals per warped segment
SEGMENT_INTERVALS = 4


def segment_length(profile, t0, t1, ell, intervals=SEGMENT_INTERVALS):
    """
    Warped length of straight segments in the (t, base-arclength) plane.

    Each segment runs from (t0, 0) to (t1, ell) at constant speed, so its
    length is the integral over s in [0, 1] of
    sqrt((t1 - t0)^2 + w_d(t0 + s (t1 - t0))^2 ell^2).

    Parameters
    ----------
    profile : WarpProfile
        Supplies w_d
    t0, t1, ell : array-like
        Segment endpoints in t and base distances (broadcast together)
    intervals : int
        Even number of Simpson sub-intervals

    Returns
    -------
    np.ndarray
        Segment lengths, never below |t1 - t0|
    """
    t0, t1, ell = np.broadcast_arrays(
        np.asarray(t0, dtype=float), np.asarray(t1, dtype=float), np.asarray(ell, dtype=float)
    )
    s = np.linspace(0.0, 1.0, intervals + 1)
    dt = t1 - t0
    ts = t0[..., None] + s * dt[..., None]
    integrand = np.sqrt(dt[..., None] ** 2 + (profile.wd(ts) * ell[..., None]) ** 2)
    lengths = simpson(integrand, dx=1.0 / intervals, axis=-1)
    return np.maximum(lengths, np.abs(dt))


def warped_length(profile, base_dist, curve):
    """
    w_d-length of a polyline curve through (t_k, x_k) points.

    Consecutive points are joined by segments that are straight in t and
    follow a base geodesic of length d(x_k, x_{k+1}).

    Parameters
    ----------
    profile : WarpProfile
        The profile
    base_dist : DistanceMatrix
        Base distances covering the curve's vertices
    curve : sequence of (t, base vertex)
        Polyline vertices

    Returns
    -------
    float
        Total warped length
    """
    if len(curve) < 2:
        return 0.0
    ts = np.array([t for t, _ in curve], dtype=float)
    ells = np.array([base_dist.distance(x, y) for (_, x), (_, y) in zip(curve[:-1], curve[1:])])
    return float(segment_length(profile, ts[:-1], ts[1:], ells).sum())


@dataclass(frozen=True)
class NodeInfo:
    """Quotient class of a product node."""

    node: int
    level: int
    t: float
    members: tuple


@dataclass
class WarpedProduct:
    """Discrete warped product I x_w X after the apex quotient.

    ``node_table[i, j]`` is the node of (level i, base vertex j); every
    apex level maps its whole fiber to one node. ``graph`` carries the
    warped edge lengths and the m_w vertex weights.
    """

    base: MetricMeasureSpace
    profile: object
    stencil: str
    node_table: np.ndarray
    apex_levels: tuple
    graph: MetricMeasureSpace
    level_reach: int = DEFAULT_LEVEL_REACH
    base_reach: int = DEFAULT_BASE_REACH

    @property
    def node_count(self):
        return self.graph.vertex_count

    @property
    def measure(self):
        return self.graph.measure

    @property
    def is_cartesian(self):
        return self.profile.w_d.kind == 'constant' and self.profile.wd_samples[0] == 1.0

    @cached_property
    def node_level(self):
        levels = np.empty(self.node_count, dtype=np.int64)
        levels[self.node_table] = np.arange(self.profile.grid_count)[:, None]
        return levels

    @cached_property
    def node_vertex(self):
        """Representative base vertex per node; the first member for apex classes."""
        _, cols = np.indices(self.node_table.shape)
        vertices = np.full(self.node_count, self.node_table.shape[1], dtype=np.int64)
        np.minimum.at(vertices, self.node_table.ravel(), cols.ravel())
        return vertices

    @cached_property
    def node_t(self):
        return self.profile.levels[self.node_level]

    @cached_property
    def is_apex(self):
        flags = np.zeros(self.node_count, dtype=bool)
        flags[self.node_table[list(self.apex_levels), 0]] = True
        return flags


def _node_table(grid_count, base_count, apex_levels):
    table = np.empty((grid_count, base_count), dtype=np.int64)
    next_id = 0
    apex = set(apex_levels)
    for i in range(grid_count):
        if i in apex:
            table[i] = next_id
            next_id += 1
        else:
            table[i] = np.arange(next_id, next_id + base_count)
            next_id += base_count
    return table


def _axis_edges(table, profile, base):
    """Vertical edges of length dt and horizontal edges w_d(t_i) * l(x, y)."""
    heads = [table[:-1].ravel()]
    tails = [table[1:].ravel()]
    lengths = [np.full(heads[0].size, profile.dt)]

    live = np.flatnonzero(profile.wd_samples > 0)
    if len(live) and len(base.edges):
        u, v = base.edges[:, 0], base.edges[:, 1]
        heads.append(table[live][:, u].ravel())
        tails.append(table[live][:, v].ravel())
        lengths.append((profile.wd_samples[live, None] * base.lengths[None, :]).ravel())
    return heads, tails, lengths


def _diagonal_edges(table, profile, base):
    """(i, x)-(i+1, y) edges for base-adjacent x, y with trapezoid-averaged w_d."""
    if not len(base.edges):
        return [], [], []
    wd_mid = (profile.wd_samples[:-1] + profile.wd_samples[1:]) / 2
    lengths = np.sqrt(profile.dt ** 2 + (wd_mid[:, None] * base.lengths[None, :]) ** 2).ravel()
    u, v = base.edges[:, 0], base.edges[:, 1]
    heads = [table[:-1][:, u].ravel(), table[:-1][:, v].ravel()]
    tails = [table[1:][:, v].ravel(), table[1:][:, u].ravel()]
    return heads, tails, [lengths, lengths]


def _wide_edges(table, profile, base, level_reach, base_reach):
    """(i, x)-(i+k, y) edges for 1 <= k <= level_reach and y within base_reach hops of x."""
    hops = csgraph.dijkstra(base.adjacency, directed=False, unweighted=True, limit=base_reach + 0.5)
    xs, ys = np.nonzero(np.isfinite(hops))
    ells = shortest_paths(base).values[xs, ys]
    levels = profile.levels

    heads, tails, lengths = [], [], []
    for k in range(1, min(level_reach, profile.grid_count - 1) + 1):
        lower = np.arange(profile.grid_count - k)
        heads.append(table[lower][:, xs].ravel())
        tails.append(table[lower + k][:, ys].ravel())
        lengths.append(segment_length(
            profile, levels[lower][:, None], levels[lower + k][:, None], ells[None, :]
        ).ravel())
    return heads, tails, lengths


def build_warped(base, profile, stencil='diagonal', level_reach=DEFAULT_LEVEL_REACH,
                 base_reach=DEFAULT_BASE_REACH):
    """
    Build the warped product of a base space with an interval.

    Parameters
    ----------
    base : MetricMeasureSpace
        Fiber space X
    profile : WarpProfile
        Interval grid and warping functions
    stencil : str
        'axis' (vertical + horizontal), 'diagonal' (adds one-level diagonal
        moves) or 'wide' (adds straight segments spanning up to
        ``level_reach`` levels and ``base_reach`` base hops)
    level_reach, base_reach : int
        Reach of the wide stencil

    Returns
    -------
    WarpedProduct
        The product with apex levels collapsed and m_w vertex weights

    Raises
    ------
    CompatibilityError
        If w_d vanishes where w_m does not
    """
    if stencil not in STENCILS:
        raise ValueError(f"unknown stencil '{stencil}', expected one of {', '.join(STENCILS)}")
    if level_reach < 1 or base_reach < 1:
        raise ValueError("stencil reach must be at least 1")

    report = analyze_zero_set(profile)
    apex_levels = report.zero_levels_wd
    table = _node_table(profile.grid_count, base.vertex_count, apex_levels)

    heads, tails, lengths = _axis_edges(table, profile, base)
    if stencil == 'diagonal':
        parts = _diagonal_edges(table, profile, base)
    elif stencil == 'wide':
        parts = _wide_edges(table, profile, base, level_reach, base_reach)
    else:
        parts = ([], [], [])
    heads += parts[0]
    tails += parts[1]
    lengths += parts[2]

    edges, edge_lengths = unique_edges(np.concatenate(heads), np.concatenate(tails), np.concatenate(lengths))

    weights = profile.wm_samples[:, None] * profile.level_weights[:, None] * base.measure[None, :]
    node_count = int(table.max()) + 1
    measure = np.bincount(table.ravel(), weights=weights.ravel(), minlength=node_count)

    graph = MetricMeasureSpace(
        vertex_count=node_count,
        edges=edges,
        lengths=edge_lengths,
        measure=measure,
        name=f"{base.name} x_w [{profile.a:g},{profile.b:g}]",
        strict_measure=False,
    )
    logger.info(
        "built %s product: %d nodes, %d edges, %d apex levels",
        stencil, node_count, len(edges), len(apex_levels),
    )
    return WarpedProduct(
        base=base,
        profile=profile,
        stencil=stencil,
        node_table=table,
        apex_levels=tuple(apex_levels),
        graph=graph,
        level_reach=level_reach,
        base_reach=base_reach,
    )


def build_cartesian(base, interval, levels, stencil='diagonal'):
    """
    Cartesian product [a, b] x X: the warped product with w_d = w_m = 1.

    Examples
    --------
    >>> square = build_cartesian(interval_space(2), (0.0, 1.0), 2)
    >>> square.node_count
    4
    """
    return build_warped(base, cylinder_profile(levels, interval=interval), stencil=stencil)


def node_lookup(product, level, vertex):
    """
    Quotient class of the grid point (level, base vertex).

    Returns
    -------
    NodeInfo
        Node id, its level and t, and the base vertices in its class
    """
    grid_count, base_count = product.node_table.shape
    if not 0 <= level < grid_count:
        raise ValueError(f"level {level} out of range [0, {grid_count - 1}]")
    if not 0 <= vertex < base_count:
        raise ValueError(f"base vertex {vertex} out of range [0, {base_count - 1}]")

    node = int(product.node_table[level, vertex])
    members = tuple(int(j) for j in np.flatnonzero(product.node_table[level] == node))
    return NodeInfo(node=node, level=int(level), t=float(product.profile.levels[level]), members=members)


def product_distances(product, sources=None):
    """Graph distances on the product from the given nodes (all when omitted)."""
    return shortest_paths(product.graph, sources)


def node_frame(product):
    """One row per grid point: node, level, t, base_vertex."""
    levels, vertices = np.indices(product.node_table.shape)
    return pd.DataFrame({
        'node': product.node_table.ravel(),
        'level': levels.ravel(),
        't': product.profile.levels[levels.ravel()],
        'base_vertex': vertices.ravel(),
    })


def export_product(product, path):
    """
    Write the product graph as a space file plus a node sidecar CSV.

    The sidecar lands next to the space file as ``<stem>_nodes.csv``.

    Returns
    -------
    tuple
        (space file path, sidecar path)
    """
    path = Path(path)
    save_space(product.graph, path)
    sidecar = path.with_name(f"{path.stem}_nodes.csv")
    node_frame(product).to_csv(sidecar, index=False)
    logger.info("exported product to %s (+ %s)", path, sidecar.name)
    return path, sidecar
