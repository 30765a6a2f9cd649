"""Finite metric measure spaces as weighted graphs."""

import json
import logging
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import networkx as nx
import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

logger = logging.getLogger(__name__)

# Relative slack used by the triangle-inequality check
METRIC_TOLERANCE = 1e-12

# random_geometric connectivity retries
RADIUS_GROWTH = 1.2
MAX_RADIUS_RETRIES = 50


def unique_edges(heads, tails, lengths):
    """
    Canonicalize an undirected edge list.

    Each edge is stored once as (min, max); self-loops are dropped and
    parallel edges are merged keeping the shortest length.

    Parameters
    ----------
    heads, tails : array-like of int
        Edge endpoints
    lengths : array-like of float
        Edge lengths

    Returns
    -------
    tuple
        (edges, lengths) with edges an (E, 2) int array sorted by endpoints
    """
    heads = np.asarray(heads, dtype=np.int64)
    tails = np.asarray(tails, dtype=np.int64)
    lengths = np.asarray(lengths, dtype=float)

    lo = np.minimum(heads, tails)
    hi = np.maximum(heads, tails)
    keep = lo != hi
    lo, hi, lengths = lo[keep], hi[keep], lengths[keep]

    order = np.lexsort((lengths, hi, lo))
    lo, hi, lengths = lo[order], hi[order], lengths[order]

    first = np.ones(len(lo), dtype=bool)
    first[1:] = (lo[1:] != lo[:-1]) | (hi[1:] != hi[:-1])

    edges = np.column_stack([lo[first], hi[first]])
    return edges, lengths[first]


def adjacency_matrix(vertex_count, edges, lengths):
    """Symmetric CSR matrix holding the edge lengths."""
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    rows = np.concatenate([edges[:, 0], edges[:, 1]])
    cols = np.concatenate([edges[:, 1], edges[:, 0]])
    data = np.concatenate([lengths, lengths])
    return sparse.csr_matrix((data, (rows, cols)), shape=(vertex_count, vertex_count))


def validate_space(vertex_count, edges, lengths, measure, strict_measure=True):
    """
    Validate the data of a metric measure space.

    Parameters
    ----------
    vertex_count : int
        Number of vertices
    edges : np.ndarray
        (E, 2) array of vertex ids
    lengths : np.ndarray
        Edge lengths
    measure : np.ndarray
        Per-vertex weights
    strict_measure : bool
        Require strictly positive weights (default: True). Warped products
        relax this to nonnegative weights because an apex can be null.

    Returns
    -------
    tuple
        (is_valid: bool, error_message: str or None)

    Examples
    --------
    >>> validate_space(2, np.array([[0, 1]]), np.array([0.0]), np.ones(2))
    (False, 'nonpositive edge length at edge (0,1)')
    """
    if vertex_count < 1:
        return False, "space must have at least one vertex"

    if len(measure) != vertex_count:
        return False, f"measure has {len(measure)} entries, expected {vertex_count}"

    if len(edges):
        if edges.min() < 0 or edges.max() >= vertex_count:
            bad = edges[(edges < 0).any(axis=1) | (edges >= vertex_count).any(axis=1)][0]
            return False, f"edge ({bad[0]},{bad[1]}) references a missing vertex"

        loops = np.flatnonzero(edges[:, 0] == edges[:, 1])
        if len(loops):
            u = edges[loops[0], 0]
            return False, f"self-loop at vertex {u}"

        bad_length = np.flatnonzero(~(lengths > 0) | ~np.isfinite(lengths))
        if len(bad_length):
            u, v = edges[bad_length[0]]
            return False, f"nonpositive edge length at edge ({u},{v})"

        canonical = np.sort(edges, axis=1)
        _, counts = np.unique(canonical, axis=0, return_counts=True)
        if (counts > 1).any():
            dup = np.unique(canonical, axis=0)[np.argmax(counts > 1)]
            return False, f"duplicate edge ({dup[0]},{dup[1]})"

    if not np.isfinite(measure).all():
        vertex = int(np.flatnonzero(~np.isfinite(measure))[0])
        return False, f"non-finite measure at vertex {vertex}"

    bad_measure = measure <= 0 if strict_measure else measure < 0
    if bad_measure.any():
        vertex = int(np.flatnonzero(bad_measure)[0])
        qualifier = "nonpositive" if strict_measure else "negative"
        return False, f"{qualifier} measure at vertex {vertex}"

    n_components, _ = csgraph.connected_components(
        adjacency_matrix(vertex_count, edges, lengths), directed=False
    )
    if n_components > 1:
        return False, f"graph is disconnected ({n_components} components)"

    return True, None


@dataclass(frozen=True)
class DistanceMatrix:
    """Shortest-path distances from a set of source vertices.

    ``values[k, v]`` is the distance from ``sources[k]`` to ``v``; when
    every vertex is a source the matrix is square and symmetric.
    """

    values: np.ndarray
    sources: np.ndarray

    @property
    def size(self):
        return self.values.shape[1]

    @property
    def is_complete(self):
        return len(self.sources) == self.size

    @cached_property
    def _row_of(self):
        return {int(s): k for k, s in enumerate(self.sources)}

    def row(self, source):
        """Distances from one source vertex."""
        return self.values[self._row_of[int(source)]]

    def distance(self, u, v):
        """d(u, v), using symmetry when only v is a source."""
        if int(u) in self._row_of:
            return float(self.values[self._row_of[int(u)], int(v)])
        if int(v) in self._row_of:
            return float(self.values[self._row_of[int(v)], int(u)])
        raise KeyError(f"neither {u} nor {v} is a source of this distance matrix")

    def check_metric(self, rel_tol=METRIC_TOLERANCE):
        """
        Check symmetry, zero diagonal and the triangle inequality.

        Returns
        -------
        tuple
            (is_valid: bool, error_message: str or None)
        """
        if not self.is_complete:
            return False, "metric check needs distances from every vertex"

        order = np.argsort(self.sources)
        d = self.values[order]
        slack = rel_tol * max(float(d.max()), 1.0)

        if not np.allclose(d, d.T, rtol=0.0, atol=slack):
            return False, "distance matrix is not symmetric"
        if np.abs(np.diag(d)).max() > 0:
            return False, "distance matrix has a nonzero diagonal"
        for b in range(len(d)):
            via_b = d[:, b, None] + d[None, b, :]
            if (d > via_b + slack).any():
                a, c = np.argwhere(d > via_b + slack)[0]
                return False, f"triangle inequality fails for ({a},{b},{c})"
        return True, None


@dataclass
class MetricMeasureSpace:
    """Weighted graph with shortest-path metric and vertex measure."""

    vertex_count: int
    edges: np.ndarray
    lengths: np.ndarray
    measure: np.ndarray
    name: str = "space"
    coordinates: np.ndarray = None
    strict_measure: bool = True
    distance_cache: DistanceMatrix = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.vertex_count = int(self.vertex_count)
        self.edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        self.lengths = np.asarray(self.lengths, dtype=float).reshape(-1)
        self.measure = np.asarray(self.measure, dtype=float).reshape(-1)
        if self.coordinates is not None:
            self.coordinates = np.asarray(self.coordinates, dtype=float)
            if self.coordinates.ndim == 1:
                self.coordinates = self.coordinates[:, None]

        if len(self.edges) != len(self.lengths):
            raise ValueError("edges and lengths differ in size")

        is_valid, error_message = validate_space(
            self.vertex_count, self.edges, self.lengths, self.measure, self.strict_measure
        )
        if not is_valid:
            raise ValueError(f"{self.name}: {error_message}")

    @cached_property
    def adjacency(self):
        return adjacency_matrix(self.vertex_count, self.edges, self.lengths)

    @property
    def total_measure(self):
        return float(self.measure.sum())

    @property
    def edge_list(self):
        """Edges as (u, v, length) tuples, the file-format view."""
        return [(int(u), int(v), float(w)) for (u, v), w in zip(self.edges, self.lengths)]

    def neighbors(self, vertex):
        """Neighbouring vertex ids and edge lengths of one vertex."""
        start, stop = self.adjacency.indptr[vertex], self.adjacency.indptr[vertex + 1]
        return self.adjacency.indices[start:stop], self.adjacency.data[start:stop]


def shortest_paths(space, sources=None):
    """
    Exact single-source shortest-path distances.

    Parameters
    ----------
    space : MetricMeasureSpace
        The space
    sources : iterable of int, optional
        Source vertices; all vertices when omitted, in which case the result
        is also stored in ``space.distance_cache``

    Returns
    -------
    DistanceMatrix
        Distances from each requested source
    """
    if sources is None:
        if space.distance_cache is not None:
            return space.distance_cache
        indices = np.arange(space.vertex_count)
    else:
        indices = np.asarray(list(dict.fromkeys(int(s) for s in sources)), dtype=np.int64)
        if len(indices) and (indices.min() < 0 or indices.max() >= space.vertex_count):
            raise ValueError(f"source vertex out of range for {space.name}")

    values = csgraph.dijkstra(space.adjacency, directed=False, indices=indices)
    result = DistanceMatrix(values=np.atleast_2d(values), sources=indices)

    if sources is None:
        space.distance_cache = result
        logger.debug("cached all-pairs distances for %s (%d vertices)", space.name, space.vertex_count)
    return result


def ball_measure(space, center, r, distances=None):
    """
    Measure of the open ball B_r(center).

    Parameters
    ----------
    space : MetricMeasureSpace
        The space
    center : int
        Center vertex
    r : float
        Radius; vertices at distance exactly r are excluded
    distances : np.ndarray, optional
        Precomputed distances from ``center``

    Returns
    -------
    float
        Sum of the measures of vertices at distance < r
    """
    if distances is None:
        distances = csgraph.dijkstra(space.adjacency, directed=False, indices=int(center), limit=r)
    return float(space.measure[distances < r].sum())


def doubling_ratio(space, center, r, distances=None):
    """m(B_2r(center)) / m(B_r(center))."""
    if distances is None:
        distances = csgraph.dijkstra(space.adjacency, directed=False, indices=int(center), limit=2 * r)
    inner = ball_measure(space, center, r, distances)
    outer = ball_measure(space, center, 2 * r, distances)
    return outer / inner if inner > 0 else np.inf


def diameter(space):
    """Largest shortest-path distance."""
    return float(shortest_paths(space).values.max())


def local_slope(space, values):
    """
    Max difference quotient over graph neighbours at every vertex.

    Parameters
    ----------
    space : MetricMeasureSpace
        The space
    values : np.ndarray
        Function values per vertex

    Returns
    -------
    np.ndarray
        max_u |f(u) - f(v)| / d(u, v) over neighbours u of v
    """
    values = np.asarray(values, dtype=float)
    adjacency = space.adjacency
    rows = np.repeat(np.arange(space.vertex_count), np.diff(adjacency.indptr))
    quotients = np.abs(values[adjacency.indices] - values[rows]) / adjacency.data

    slope = np.zeros(space.vertex_count)
    np.maximum.at(slope, rows, quotients)
    return slope


def lipschitz_constant(space, values):
    """Global Lipschitz constant of a vertex function w.r.t. the graph metric."""
    values = np.asarray(values, dtype=float)
    d = shortest_paths(space).values
    order = np.argsort(shortest_paths(space).sources)
    d = d[order]
    diffs = np.abs(values[:, None] - values[None, :])
    off_diagonal = d > 0
    if not off_diagonal.any():
        return 0.0
    return float((diffs[off_diagonal] / d[off_diagonal]).max())


# ---------------------------------------------------------------------------
# Generators
# ---------------------------------------------------------------------------

def circle_space(n, circumference=2 * np.pi):
    """Cycle graph with n equal edges and uniform vertex measure."""
    if n < 3:
        raise ValueError(f"circle needs n >= 3 vertices, got {n}")
    if not circumference > 0:
        raise ValueError(f"circle circumference must be positive, got {circumference}")

    step = circumference / n
    ids = np.arange(n)
    edges, lengths = unique_edges(ids, (ids + 1) % n, np.full(n, step))

    radius = circumference / (2 * np.pi)
    angles = ids * (2 * np.pi / n)
    coordinates = np.column_stack([radius * np.cos(angles), radius * np.sin(angles)])

    return MetricMeasureSpace(
        vertex_count=n,
        edges=edges,
        lengths=lengths,
        measure=np.full(n, step),
        name=f"circle(n={n}, circumference={circumference:g})",
        coordinates=coordinates,
    )


def interval_space(n, length=1.0):
    """Path graph with uniform edges and trapezoid vertex measures."""
    if n < 2:
        raise ValueError(f"interval needs n >= 2 vertices, got {n}")
    if not length > 0:
        raise ValueError(f"interval length must be positive, got {length}")

    step = length / (n - 1)
    ids = np.arange(n - 1)
    measure = np.full(n, step)
    measure[[0, -1]] = step / 2

    return MetricMeasureSpace(
        vertex_count=n,
        edges=np.column_stack([ids, ids + 1]),
        lengths=np.full(n - 1, step),
        measure=measure,
        name=f"interval(n={n}, length={length:g})",
        coordinates=np.linspace(0.0, length, n),
    )


def random_geometric_space(n, radius, seed=0):
    """
    Connected random geometric graph in the unit square.

    The radius grows by RADIUS_GROWTH until the graph is connected, at most
    MAX_RADIUS_RETRIES times. Positions only depend on the seed, so a fixed
    seed reproduces the same edge set.
    """
    if n < 2:
        raise ValueError(f"random_geometric needs n >= 2 vertices, got {n}")
    if not radius > 0:
        raise ValueError(f"random_geometric radius must be positive, got {radius}")

    current = float(radius)
    for attempt in range(MAX_RADIUS_RETRIES + 1):
        graph = nx.random_geometric_graph(n, current, seed=seed)
        if nx.is_connected(graph):
            break
        current *= RADIUS_GROWTH
    else:
        raise ValueError(f"random_geometric graph still disconnected at radius {current:g}")

    if attempt:
        logger.info("random_geometric: radius grown to %.4g after %d retries", current, attempt)

    positions = np.array([graph.nodes[v]["pos"] for v in range(n)], dtype=float)
    pairs = np.array(list(graph.edges()), dtype=np.int64).reshape(-1, 2)
    lengths = np.linalg.norm(positions[pairs[:, 0]] - positions[pairs[:, 1]], axis=1)
    edges, lengths = unique_edges(pairs[:, 0], pairs[:, 1], lengths)

    return MetricMeasureSpace(
        vertex_count=n,
        edges=edges,
        lengths=lengths,
        measure=np.ones(n),
        name=f"random_geometric(n={n}, radius={current:.4g}, seed={seed})",
        coordinates=positions,
    )


GENERATORS = {
    "circle": circle_space,
    "interval": interval_space,
    "random_geometric": random_geometric_space,
}


def generate(kind, **params):
    """
    Build a fixture space.

    Parameters
    ----------
    kind : str
        One of 'circle', 'interval', 'random_geometric'
    **params
        Generator parameters (n, circumference / length / radius, seed)

    Returns
    -------
    MetricMeasureSpace
        The generated space
    """
    if kind not in GENERATORS:
        raise ValueError(f"unknown space kind '{kind}', expected one of {sorted(GENERATORS)}")
    try:
        return GENERATORS[kind](**params)
    except TypeError as e:
        raise ValueError(f"invalid parameters for {kind}: {e}") from e


# ---------------------------------------------------------------------------
# Space files
# ---------------------------------------------------------------------------

def space_to_dict(space):
    """Space file document for a space."""
    document = {
        "name": space.name,
        "vertices": space.vertex_count,
        "edges": [[u, v, w] for u, v, w in space.edge_list],
        "measure": space.measure.tolist(),
    }
    if space.coordinates is not None:
        document["coordinates"] = space.coordinates.tolist()
    return document


def space_from_dict(document, strict_measure=True):
    """Validated space from a parsed space file document."""
    missing = [key for key in ("vertices", "edges", "measure") if key not in document]
    if missing:
        raise ValueError(f"space document is missing {', '.join(missing)}")

    raw_edges = np.asarray(document["edges"], dtype=float)
    if raw_edges.size == 0:
        raw_edges = raw_edges.reshape(0, 3)
    if raw_edges.ndim != 2 or raw_edges.shape[1] != 3:
        raise ValueError("edges must be an array of [u, v, length] triples")

    ids = raw_edges[:, :2]
    if not np.array_equal(ids, np.round(ids)):
        raise ValueError("edge endpoints must be integer vertex ids")

    return MetricMeasureSpace(
        vertex_count=int(document["vertices"]),
        edges=ids.astype(np.int64),
        lengths=raw_edges[:, 2],
        measure=np.asarray(document["measure"], dtype=float),
        name=str(document.get("name", "space")),
        coordinates=document.get("coordinates"),
        strict_measure=strict_measure,
    )


def load_space(path):
    """
    Load and validate a space file.

    Parameters
    ----------
    path : str or Path
        JSON space file

    Returns
    -------
    MetricMeasureSpace
        The validated space

    Raises
    ------
    FileNotFoundError
        If the file does not exist
    ValueError
        If the file does not parse or violates an invariant
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Space file not found at {path}")
    try:
        document = json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise ValueError(f"could not parse space file {path}: {e}") from e
    return space_from_dict(document)


def save_space(space, path):
    """Write a space file."""
    Path(path).write_text(json.dumps(space_to_dict(space), indent=2))
