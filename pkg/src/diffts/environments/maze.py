"""Grid graphs, perfect-maze generation and the shortest-path super-arm oracle.

An ``n x n`` grid graph has nodes ``(i, j)`` with id ``i * n + j``. Base arms
are its edges: first the horizontal edges ``(i, j)-(i, j+1)`` in row-major
order, then the vertical edges ``(i, j)-(i+1, j)``. Drawn as a bitmap of side
``2n - 1``, node ``(i, j)`` sits at pixel ``(2i, 2j)``, a horizontal edge at
``(2i, 2j + 1)`` and a vertical edge at ``(2i + 1, 2j)``.
"""

import heapq
from dataclasses import dataclass, field

import numpy as np

from ..errors import StructuralError

WALL_MEAN = -1.0
FREE_MEAN = -0.01


@dataclass(frozen=True)
class GridGraph:
    side: int = 10

    @property
    def n_nodes(self):
        return self.side * self.side

    @property
    def n_horizontal(self):
        return self.side * (self.side - 1)

    @property
    def n_edges(self):
        return 2 * self.n_horizontal

    def node(self, i, j):
        return i * self.side + j

    def edge_between(self, u, v):
        u, v = min(u, v), max(u, v)
        n = self.side
        (i, j), (k, l) = divmod(u, n), divmod(v, n)
        if i == k and l == j + 1:
            return i * (n - 1) + j
        if j == l and k == i + 1:
            return self.n_horizontal + i * n + j
        raise StructuralError(f"nodes {u} and {v} are not adjacent")

    def edge_nodes(self, e):
        n = self.side
        if e < self.n_horizontal:
            i, j = divmod(e, n - 1)
            return self.node(i, j), self.node(i, j + 1)
        i, j = divmod(e - self.n_horizontal, n)
        return self.node(i, j), self.node(i + 1, j)

    def edge_pixel(self, e):
        u, v = self.edge_nodes(e)
        (i, j), (k, l) = divmod(u, self.side), divmod(v, self.side)
        return i + k, j + l

    def neighbors(self, u):
        n = self.side
        i, j = divmod(u, n)
        out = []
        for di, dj in ((-1, 0), (0, -1), (0, 1), (1, 0)):
            a, b = i + di, j + dj
            if 0 <= a < n and 0 <= b < n:
                v = self.node(a, b)
                out.append((v, self.edge_between(u, v)))
        return sorted(out)


@dataclass(frozen=True)
class SuperArmStructure:
    """Source-to-destination paths over a grid graph; base arms are edges."""

    graph: GridGraph
    source: int
    destination: int

    def __post_init__(self):
        if self.source == self.destination:
            raise StructuralError("source and destination must differ")

    @classmethod
    def corners(cls, side=10):
        g = GridGraph(side)
        return cls(g, 0, g.n_nodes - 1)

    @property
    def n_base_arms(self):
        return self.graph.n_edges

    def path_edges(self, nodes):
        return [self.graph.edge_between(u, v) for u, v in zip(nodes[:-1], nodes[1:])]

    def is_path(self, edges):
        """Whether ``edges`` form a simple source-destination path."""
        node, seen, remaining = self.source, {self.source}, list(edges)
        while remaining:
            nxt = None
            for k, e in enumerate(remaining):
                u, v = self.graph.edge_nodes(e)
                if node in (u, v):
                    nxt = (k, v if u == node else u)
                    break
            if nxt is None or nxt[1] in seen:
                return False
            remaining.pop(nxt[0])
            node = nxt[1]
            seen.add(node)
        return node == self.destination


def shortest_path(structure, weights):
    """Minimum-weight path by Dijkstra; returns the list of edge ids.

    Weights must be non-negative. Equal-distance nodes are settled in
    increasing id order and predecessors only change on strict improvement.
    """
    g = structure.graph
    weights = np.asarray(weights, dtype=np.float64)
    if np.any(weights < 0):
        raise ValueError("Dijkstra weights must be non-negative")
    dist = np.full(g.n_nodes, np.inf)
    prev = np.full(g.n_nodes, -1)
    prev_edge = np.full(g.n_nodes, -1)
    dist[structure.source] = 0.0
    heap = [(0.0, structure.source)]
    done = np.zeros(g.n_nodes, dtype=bool)
    while heap:
        d, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        if u == structure.destination:
            break
        for v, e in g.neighbors(u):
            nd = d + weights[e]
            if nd < dist[v]:
                dist[v], prev[v], prev_edge[v] = nd, u, e
                heapq.heappush(heap, (nd, v))
    if not done[structure.destination]:
        raise StructuralError("destination unreachable")
    edges, node = [], structure.destination
    while node != structure.source:
        edges.append(int(prev_edge[node]))
        node = prev[node]
    return edges[::-1]


def generate_perfect_maze(rng, side=10):
    """Recursive-backtracker spanning tree; returns a boolean ``open`` flag per edge."""
    g = GridGraph(side)
    open_edges = np.zeros(g.n_edges, dtype=bool)
    visited = np.zeros(g.n_nodes, dtype=bool)
    start = int(rng.integers(g.n_nodes))
    visited[start] = True
    stack = [start]
    while stack:
        u = stack[-1]
        cands = [(v, e) for v, e in g.neighbors(u) if not visited[v]]
        if not cands:
            stack.pop()
            continue
        v, e = cands[int(rng.integers(len(cands)))]
        open_edges[e] = True
        visited[v] = True
        stack.append(v)
    return open_edges


def render_bitmap(graph, open_edges, pad=True):
    """Wall bitmap (True = wall) of side ``2n - 1``, padded with one wall row and column."""
    n = 2 * graph.side - 1
    walls = np.zeros((n, n), dtype=bool)
    walls[1::2, 1::2] = True
    for e in range(graph.n_edges):
        walls[graph.edge_pixel(e)] = not open_edges[e]
    if pad:
        walls = np.pad(walls, ((0, 1), (0, 1)), constant_values=True)
    return walls


def edges_from_bitmap(graph, walls):
    return np.array([not walls[graph.edge_pixel(e)] for e in range(graph.n_edges)])


def edge_means(open_edges):
    return np.where(open_edges, FREE_MEAN, WALL_MEAN)


@dataclass(eq=False)
class MazeTask:
    """Combinatorial semi-bandit over the edges of a grid graph."""

    mu: np.ndarray
    structure: SuperArmStructure
    noise_std: float = 0.1
    _best: float = field(default=None, init=False, repr=False)

    def __post_init__(self):
        self.mu = np.asarray(self.mu, dtype=np.float64)
        if self.mu.shape != (self.structure.n_base_arms,):
            raise StructuralError("one mean per base arm is required")

    @property
    def n_arms(self):
        return len(self.mu)

    @property
    def combinatorial(self):
        return True

    def optimal_path(self):
        return shortest_path(self.structure, np.maximum(0.0, -self.mu))

    def best_mean(self):
        if self._best is None:
            self._best = float(self.mu[self.optimal_path()].sum())
        return self._best

    def draw(self, arms, rng):
        arms = np.asarray(arms)
        return self.mu[arms] + self.noise_std * rng.standard_normal(arms.shape)

    def bitmap(self):
        return render_bitmap(self.structure.graph, self.mu > (WALL_MEAN + FREE_MEAN) / 2)


def maze_mean(rng, side=10):
    return edge_means(generate_perfect_maze(rng, side))


def gen_maze(rng, side=10, noise_std=0.1):
    return MazeTask(maze_mean(rng, side), SuperArmStructure.corners(side), noise_std)


def covering_paths(side=10):
    """Three corner-to-corner node paths that together use every grid edge.

    A row snake over rows ``0..n-2`` (then down), a column snake over columns
    ``0..n-2`` (then right), and a border path along row 0, the last column,
    back along row ``n-2`` and out along the last row.
    """
    n = side
    if n < 3:
        raise StructuralError("covering paths need a grid side of at least 3")
    rows = []
    for i in range(n - 1):
        cols = range(n) if i % 2 == 0 else range(n - 1, -1, -1)
        rows.extend((i, j) for j in cols)
    if (n - 2) % 2 == 0:
        rows.append((n - 1, n - 1))
    else:
        rows.extend((n - 1, j) for j in range(n))
    cols_path = [(j, i) for i, j in rows]
    border = [(0, j) for j in range(n)]
    border += [(i, n - 1) for i in range(1, n - 1)]
    border += [(n - 2, j) for j in range(n - 2, -1, -1)]
    border += [(n - 1, j) for j in range(n)]
    return [[i * n + j for i, j in p] for p in (rows, cols_path, border)]


def covering_super_arms(structure):
    return [structure.path_edges(p) for p in covering_paths(structure.graph.side)]
