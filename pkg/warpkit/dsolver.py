"""The reduced distance function D(t0, t1, l) and warped distances built on it.

D(t0, t1, l) is the length of the shortest curve from (t0, 0) to (t1, l) in
the strip [a, b] x [0, l] with line element dt^2 + w_d(t)^2 dtheta^2. The
warped distance between (t0, x0) and (t1, x1) is D(t0, t1, d(x0, x1)).
"""

import logging
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import minimize
from scipy.sparse import csgraph

from .metric_space import adjacency_matrix, unique_edges
from .products import segment_length

logger = logging.getLogger(__name__)

DEFAULT_RESOLUTION = (256, 256)
BATCH_RESOLUTION = (64, 64)

# (level step, theta step) moves of the grid stencil; edges are undirected
MOVES = ((1, 0), (0, 1), (1, 1), (-1, 1), (2, 1), (-2, 1), (1, 2), (-1, 2))

SMOOTHING_ITERATIONS = 20
MAX_PATH_VERTICES = 128
STRAIGHT_VERTICES = 128
POLISH_ITERATIONS = 2000
POLISH_EPS = 1e-14
SNAP_TOLERANCE = 1e-12
RADIUS_TOLERANCE = 1e-6


@dataclass(frozen=True)
class GeodesicQuery:
    """Endpoints t0, t1 and base distance ell of one D evaluation."""

    t0: float
    t1: float
    ell: float
    resolution: tuple = DEFAULT_RESOLUTION

    def __post_init__(self):
        object.__setattr__(self, 't0', float(self.t0))
        object.__setattr__(self, 't1', float(self.t1))
        object.__setattr__(self, 'ell', float(self.ell))
        object.__setattr__(self, 'resolution', tuple(int(r) for r in self.resolution))
        if not np.isfinite(self.ell) or self.ell < 0:
            raise ValueError(f"base distance must be finite and nonnegative, got {self.ell}")
        if len(self.resolution) != 2 or min(self.resolution) < 2:
            raise ValueError(f"resolution needs two sizes >= 2, got {self.resolution}")


@dataclass(frozen=True)
class DSolution:
    """Value of D with the (t, theta) polyline realizing it."""

    value: float
    path: np.ndarray
    method: str = 'grid'


def polyline_length(profile, points):
    """Warped length of a (t, theta) polyline, each piece measured by Simpson's rule."""
    points = np.asarray(points, dtype=float)
    if len(points) < 2:
        return 0.0
    return float(segment_length(
        profile, points[:-1, 0], points[1:, 0], np.abs(np.diff(points[:, 1]))
    ).sum())


def _level_grid(profile, count, t0, t1):
    """Uniform levels of [a, b] with t0 and t1 inserted or snapped onto nearby levels."""
    levels = np.linspace(profile.a, profile.b, count)
    snap = SNAP_TOLERANCE * profile.length
    for t in (t0, t1):
        nearest = np.argmin(np.abs(levels - t))
        if abs(levels[nearest] - t) <= snap:
            levels[nearest] = t
        else:
            levels = np.sort(np.append(levels, t))
    return levels


def _grid_path(profile, t0, t1, ell, resolution):
    """Dijkstra on the stencil grid; returns (length, polyline)."""
    levels = _level_grid(profile, resolution[0], t0, t1)
    thetas = np.linspace(0.0, ell, resolution[1])
    dtheta = thetas[1] - thetas[0]
    rows, cols = len(levels), len(thetas)

    collapsed = profile.wd(levels) == 0
    table = np.empty((rows, cols), dtype=np.int64)
    next_id = 0
    for r in range(rows):
        if collapsed[r]:
            table[r] = next_id
            next_id += 1
        else:
            table[r] = np.arange(next_id, next_id + cols)
            next_id += cols

    heads, tails, lengths = [], [], []
    for di, dj in MOVES:
        lo, hi = max(0, -di), rows - max(0, di)
        if hi <= lo or dj >= cols:
            continue
        r = np.arange(lo, hi)
        per_row = segment_length(profile, levels[r], levels[r + di], dj * dtheta, intervals=2)
        heads.append(table[r][:, :cols - dj].ravel())
        tails.append(table[r + di][:, dj:].ravel())
        lengths.append(np.repeat(per_row, cols - dj))

    edges, edge_lengths = unique_edges(np.concatenate(heads), np.concatenate(tails), np.concatenate(lengths))
    graph = adjacency_matrix(next_id, edges, edge_lengths)

    r0 = int(np.flatnonzero(levels == t0)[0])
    r1 = int(np.flatnonzero(levels == t1)[0])
    source, target = table[r0, 0], table[r1, cols - 1]
    dist, predecessors = csgraph.dijkstra(graph, directed=False, indices=source, return_predecessors=True)

    chain = [target]
    while chain[-1] != source:
        chain.append(predecessors[chain[-1]])
    chain.reverse()

    node_row = np.empty(next_id, dtype=np.int64)
    node_col = np.full(next_id, -1, dtype=np.int64)
    node_row[table.ravel()] = np.repeat(np.arange(rows), cols)
    open_rows = ~collapsed
    node_col[table[open_rows].ravel()] = np.tile(np.arange(cols), int(open_rows.sum()))

    points = []
    for k, node in enumerate(chain):
        t = levels[node_row[node]]
        if node_col[node] >= 0:
            points.append((t, thetas[node_col[node]]))
            continue
        # apex class: enter at the previous theta, leave at the next one
        theta_in = points[-1][1] if points else 0.0
        if k + 1 < len(chain):
            following = chain[k + 1]
            theta_out = thetas[node_col[following]] if node_col[following] >= 0 else theta_in
        else:
            theta_out = ell
        points.append((t, theta_in))
        points.append((t, theta_out))

    path = np.array(points, dtype=float)
    keep = np.ones(len(path), dtype=bool)
    keep[1:] = (np.diff(path, axis=0) != 0).any(axis=1)
    return float(dist[target]), path[keep]


def _subsample(profile, path):
    if len(path) <= MAX_PATH_VERTICES:
        return path
    picks = np.round(np.linspace(0, len(path) - 1, MAX_PATH_VERTICES)).astype(int)
    apex_points = np.flatnonzero(profile.wd(path[:, 0]) == 0)
    return path[np.union1d(picks, apex_points)]


def _smooth(profile, path, t_step, theta_step, ell):
    """Red-black coordinate descent on interior vertices with step halving."""
    path = path.copy()
    interior = np.arange(1, len(path) - 1)
    if not len(interior):
        return path

    def local_cost(k, candidate):
        before = segment_length(profile, path[k - 1, 0], candidate[:, 0], np.abs(candidate[:, 1] - path[k - 1, 1]))
        after = segment_length(profile, candidate[:, 0], path[k + 1, 0], np.abs(path[k + 1, 1] - candidate[:, 1]))
        return before + after

    for _ in range(SMOOTHING_ITERATIONS):
        for parity in (1, 0):
            k = interior[interior % 2 == parity]
            if not len(k):
                continue
            cost = local_cost(k, path[k])
            for offset in ((t_step, 0.0), (-t_step, 0.0), (0.0, theta_step), (0.0, -theta_step)):
                candidate = path[k] + offset
                candidate[:, 0] = np.clip(candidate[:, 0], profile.a, profile.b)
                candidate[:, 1] = np.clip(candidate[:, 1], 0.0, ell)
                new_cost = local_cost(k, candidate)
                better = new_cost < cost
                path[k[better]] = candidate[better]
                cost = np.where(better, new_cost, cost)
        t_step /= 2
        theta_step /= 2
    return path


def _polish(profile, path, ell):
    """L-BFGS-B on the interior vertices of the midpoint-rule length."""
    if len(path) < 3:
        return path
    inner = len(path) - 2
    start = np.concatenate([path[1:-1, 0], path[1:-1, 1]])

    def length_and_gradient(x):
        ts = np.concatenate([[path[0, 0]], x[:inner], [path[-1, 0]]])
        thetas = np.concatenate([[path[0, 1]], x[inner:], [path[-1, 1]]])
        dt, dtheta = np.diff(ts), np.diff(thetas)
        mid = (ts[:-1] + ts[1:]) / 2
        w = profile.wd(mid)
        dw = profile.wd_derivative(mid)
        s = np.sqrt(dt ** 2 + (w * dtheta) ** 2 + POLISH_EPS)

        shared = w * dw * dtheta ** 2 / 2
        grad_t = np.zeros_like(ts)
        grad_t[1:] += (dt + shared) / s
        grad_t[:-1] += (-dt + shared) / s
        grad_theta = np.zeros_like(thetas)
        grad_theta[1:] += w ** 2 * dtheta / s
        grad_theta[:-1] -= w ** 2 * dtheta / s
        return s.sum(), np.concatenate([grad_t[1:-1], grad_theta[1:-1]])

    bounds = [(profile.a, profile.b)] * inner + [(0.0, ell)] * inner
    result = minimize(
        length_and_gradient, start, jac=True, method='L-BFGS-B', bounds=bounds,
        options={'maxiter': POLISH_ITERATIONS, 'ftol': 1e-13, 'gtol': 1e-10},
    )
    if not result.success:
        logger.debug("geodesic polish stopped early: %s", result.message)

    polished = path.copy()
    polished[1:-1, 0] = result.x[:inner]
    polished[1:-1, 1] = result.x[inner:]
    return polished


def _straight_path(t0, t1, ell, count=STRAIGHT_VERTICES):
    """The coordinate-straight polyline from (t0, 0) to (t1, ell)."""
    s = np.linspace(0.0, 1.0, count)
    return np.column_stack([t0 + s * (t1 - t0), s * ell])


def solve_D(profile, query):
    """
    Evaluate D(t0, t1, ell) on a stencil grid with path refinement.

    The grid answer is the Dijkstra distance on [a, b] x [0, ell] with
    axis, diagonal and knight moves; its path is then smoothed by
    coordinate descent and polished with L-BFGS-B. A second polish starts
    from the straight (t, theta) segment, which escapes grid paths that
    detour through an apex. The smallest of the four lengths is returned.

    Parameters
    ----------
    profile : WarpProfile
        Supplies w_d
    query : GeodesicQuery
        Endpoints, base distance and grid resolution

    Returns
    -------
    DSolution
        Value and polyline from (t0, 0) to (t1, ell)

    Examples
    --------
    >>> round(solve_D(cylinder_profile(2, (0.0, 3.0)), GeodesicQuery(0.0, 3.0, 4.0)).value, 2)
    5.0
    """
    slack = SNAP_TOLERANCE * profile.length
    for t in (query.t0, query.t1):
        if not profile.contains(t, slack):
            raise ValueError(f"t={t} lies outside the interval [{profile.a}, {profile.b}]")
    t0 = float(np.clip(query.t0, profile.a, profile.b))
    t1 = float(np.clip(query.t1, profile.a, profile.b))
    ell = query.ell

    if ell == 0:
        return DSolution(value=abs(t1 - t0), path=np.array([[t0, 0.0], [t1, 0.0]]), method='grid')

    flipped = t0 > t1
    if flipped:
        t0, t1 = t1, t0

    grid_value, path = _grid_path(profile, t0, t1, ell, query.resolution)
    candidates = [(grid_value, path)]

    path = _subsample(profile, path)
    t_step = profile.length / (query.resolution[0] - 1)
    theta_step = ell / (query.resolution[1] - 1)
    smoothed = _smooth(profile, path, t_step, theta_step, ell)
    candidates.append((polyline_length(profile, smoothed), smoothed))

    polished = _polish(profile, smoothed, ell)
    candidates.append((polyline_length(profile, polished), polished))

    straight = _polish(profile, _straight_path(t0, t1, ell), ell)
    candidates.append((polyline_length(profile, straight), straight))

    value, best = min(candidates, key=lambda item: item[0])
    value = max(value, t1 - t0)
    logger.debug(
        "D(%.6g, %.6g, %.6g): grid %.8g, smoothed %.8g, polished %.8g, straight %.8g",
        t0, t1, ell, *(length for length, _ in candidates),
    )

    if flipped:
        best = best[::-1].copy()
        best[:, 1] = ell - best[:, 1]
    return DSolution(value=float(value), path=best, method='grid')


def oracle_D(kind, t0, t1, ell):
    """
    Closed-form D for the flat, cone and suspension profiles.

    flat: w_d = 1; cone: w_d(t) = t; suspension: w_d(t) = sin t on [0, pi].
    """
    if ell < 0:
        raise ValueError(f"base distance must be nonnegative, got {ell}")
    if kind == 'flat':
        return float(np.hypot(t1 - t0, ell))
    if kind == 'cone':
        if ell >= np.pi:
            return float(t0 + t1)
        return float(np.sqrt(max(t0 ** 2 + t1 ** 2 - 2 * t0 * t1 * np.cos(ell), 0.0)))
    if kind == 'suspension':
        angle = min(ell, np.pi)
        cosine = np.cos(t0) * np.cos(t1) + np.sin(t0) * np.sin(t1) * np.cos(angle)
        return float(np.arccos(np.clip(cosine, -1.0, 1.0)))
    raise ValueError(f"unknown oracle kind '{kind}', expected flat, cone or suspension")


@lru_cache(maxsize=4096)
def _solve_cached(profile, t0, t1, ell, resolution):
    return solve_D(profile, GeodesicQuery(t0, t1, ell, resolution))


def solve_batch(profile, queries):
    """
    Solve a batch of queries, reusing earlier answers for repeated ones.

    Parameters
    ----------
    profile : WarpProfile
        Supplies w_d
    queries : iterable of GeodesicQuery
        The queries

    Returns
    -------
    list of DSolution
        One solution per query, in order
    """
    solutions = []
    for query in queries:
        solutions.append(_solve_cached(profile, query.t0, query.t1, query.ell, query.resolution))
    info = _solve_cached.cache_info()
    logger.debug("solve_batch: %d queries, cache hits %d, misses %d", len(solutions), info.hits, info.misses)
    return solutions


def warped_distance(base_dist, profile, p, q, resolution=BATCH_RESOLUTION):
    """
    d_w((t0, x0), (t1, x1)) = D(t0, t1, d(x0, x1)).

    Parameters
    ----------
    base_dist : DistanceMatrix
        Base distances
    profile : WarpProfile
        The profile
    p, q : tuple
        (t, base vertex) points

    Returns
    -------
    float
        The composed distance
    """
    (t0, x0), (t1, x1) = p, q
    ell = base_dist.distance(x0, x1)
    return _solve_cached(profile, float(t0), float(t1), float(ell), tuple(resolution)).value


def ball_radius(profile, t0, t_prime, eps, resolution=BATCH_RESOLUTION):
    """
    Base radius r with D(t0, t', r) = eps.

    Parameters
    ----------
    profile : WarpProfile
        The profile
    t0, t_prime : float
        Levels of the ball center and of the slice
    eps : float
        Ball radius in the warped product
    resolution : tuple
        Solver grid

    Returns
    -------
    float or None
        The radius found by bisection to RADIUS_TOLERANCE; None when
        |t' - t0| >= eps; +inf when D stays below eps for every r (the slice
        reaches an apex inside the ball)

    Raises
    ------
    ValueError
        If w_d(t0) = 0
    """
    for t in (t0, t_prime):
        if not profile.contains(t):
            raise ValueError(f"t={t} lies outside the interval [{profile.a}, {profile.b}]")
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    if profile.wd(t0) == 0:
        raise ValueError(f"w_d vanishes at t0={t0}")
    if abs(t_prime - t0) >= eps:
        return None

    window = np.linspace(max(profile.a, t0 - eps), min(profile.b, t0 + eps), 1001)
    inf_wd = float(profile.wd(window).min())

    def D(r):
        return _solve_cached(profile, float(t0), float(t_prime), float(r), tuple(resolution)).value

    hi = eps / inf_wd * 1.05 + 0.01 * eps if inf_wd > 0 else 2 * eps / float(profile.wd(t0))
    for _ in range(40):
        if D(hi) >= eps:
            break
        hi *= 2
    else:
        logger.info("ball_radius: D(%g, %g, r) stays below %g, radius unbounded", t0, t_prime, eps)
        return np.inf

    lo = 0.0
    while hi - lo > RADIUS_TOLERANCE:
        mid = (lo + hi) / 2
        if D(mid) < eps:
            lo = mid
        else:
            hi = mid
    radius = (lo + hi) / 2

    if inf_wd > 0 and radius > eps / inf_wd * (1 + 1e-3):
        logger.warning("ball_radius %.6g exceeds the bound eps / inf w_d = %.6g", radius, eps / inf_wd)
    return radius
