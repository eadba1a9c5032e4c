"""Finite (epsilon, T)-pseudo-orbit transition graphs over torus grids.

Each edge is one time-T flow segment from a sample of the source cell followed
by one jump of length at most epsilon into the target cell. The edge weight is
the integer winding vector picked up along the way: the lattice translate of
the target cell that the lifted endpoint lands next to.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np

from .flows import CohomologyClass, FlowSpec, integrate_T

MAX_CELLS_ENV = "TORSEC_MAX_CELLS"
DEFAULT_MAX_CELLS = 200_000


class GraphError(ValueError):
    pass


class ResourceLimitError(RuntimeError):
    pass


def max_cells() -> int:
    return int(os.environ.get(MAX_CELLS_ENV, DEFAULT_MAX_CELLS))


@dataclass(frozen=True)
class Grid:
    """Uniform box grid on the unit torus; cells are indexed in C order."""

    shape: tuple

    def __post_init__(self):
        shape = tuple(int(s) for s in self.shape)
        if len(shape) not in (2, 3) or min(shape) < 1:
            raise GraphError(f"grid shape must be 2 or 3 positive ints, got {self.shape}")
        object.__setattr__(self, "shape", shape)

    @property
    def dimension(self) -> int:
        return len(self.shape)

    @property
    def n_cells(self) -> int:
        return int(np.prod(self.shape))

    @property
    def cell_size(self) -> np.ndarray:
        return 1.0 / np.asarray(self.shape, dtype=float)

    @property
    def diameter(self) -> float:
        return float(np.sqrt(np.sum(self.cell_size ** 2)))

    def unravel(self, idx) -> np.ndarray:
        return np.stack(np.unravel_index(np.asarray(idx), self.shape), axis=-1)

    def ravel(self, multi) -> np.ndarray:
        multi = np.asarray(multi) % np.asarray(self.shape)
        return np.ravel_multi_index(tuple(multi.T), self.shape)

    def centers(self) -> np.ndarray:
        return (self.unravel(np.arange(self.n_cells)) + 0.5) * self.cell_size

    def cell_of(self, point) -> int:
        p = np.mod(np.asarray(point, dtype=float), 1.0)
        return int(self.ravel(np.floor(p / self.cell_size).astype(np.int64)))

    def refined(self, factor: int) -> "Grid":
        return Grid(tuple(s * factor for s in self.shape))


@dataclass
class TransitionGraph:
    """Immutable weighted digraph in CSR form.

    ``dst[e]``, ``src[e]`` and ``winding[e]`` describe edge ``e``; edges are
    sorted by source so ``indptr`` slices the out-edges of each vertex.
    Parallel edges with distinct windings are kept.
    """

    n: int
    src: np.ndarray
    dst: np.ndarray
    winding: np.ndarray
    grid: Grid | None = None
    T: float | None = None
    epsilon: float | None = None
    provenance: dict = field(default_factory=dict)
    flow: FlowSpec | None = field(default=None, repr=False)

    def __post_init__(self):
        src = np.asarray(self.src, dtype=np.int64)
        dst = np.asarray(self.dst, dtype=np.int64)
        wind = np.asarray(self.winding, dtype=np.int64).reshape(len(src), -1)
        key = np.lexsort(tuple(wind.T[::-1]) + (dst, src))
        src, dst, wind = src[key], dst[key], wind[key]
        if len(src):
            keep = np.ones(len(src), dtype=bool)
            keep[1:] = (np.diff(src) != 0) | (np.diff(dst) != 0) | np.any(np.diff(wind, axis=0) != 0, axis=1)
            src, dst, wind = src[keep], dst[keep], wind[keep]
            if src.min() < 0 or max(src.max(), dst.max()) >= self.n:
                raise GraphError("edge endpoint out of range")
        self.src, self.dst, self.winding = src, dst, wind
        self.indptr = np.searchsorted(src, np.arange(self.n + 1)).astype(np.int64)
        for arr in (self.src, self.dst, self.winding, self.indptr):
            arr.setflags(write=False)

    @classmethod
    def from_edges(cls, n, edges, dimension=2, **kw) -> "TransitionGraph":
        """Toy constructor from ``(u, v, winding)`` triples."""
        edges = list(edges)
        src = np.array([e[0] for e in edges], dtype=np.int64)
        dst = np.array([e[1] for e in edges], dtype=np.int64)
        wind = np.array([tuple(e[2]) for e in edges], dtype=np.int64).reshape(len(edges), dimension)
        return cls(n, src, dst, wind, **kw)

    @property
    def n_edges(self) -> int:
        return len(self.src)

    @property
    def dimension(self) -> int:
        return self.winding.shape[1]

    def alpha_weights(self, alpha: CohomologyClass) -> np.ndarray:
        if alpha.dimension != self.dimension:
            raise GraphError(f"covector dimension {alpha.dimension} != graph dimension {self.dimension}")
        return alpha(self.winding)

    def out_edges(self, u: int) -> range:
        return range(self.indptr[u], self.indptr[u + 1])

    def path_winding(self, edge_ids) -> np.ndarray:
        """Total winding of consecutive edges (must chain head to tail)."""
        edge_ids = np.asarray(edge_ids, dtype=np.int64)
        if len(edge_ids) > 1 and np.any(self.dst[edge_ids[:-1]] != self.src[edge_ids[1:]]):
            raise GraphError("edges do not form a path")
        return self.winding[edge_ids].sum(axis=0)

    def to_networkx(self):
        import networkx as nx

        g = nx.MultiDiGraph()
        g.add_nodes_from(range(self.n))
        for e in range(self.n_edges):
            g.add_edge(int(self.src[e]), int(self.dst[e]), key=e, winding=tuple(int(c) for c in self.winding[e]))
        return g

    def rebuild_inputs(self) -> dict:
        if self.flow is None or self.grid is None:
            raise GraphError("graph has no flow provenance; cannot refine")
        return dict(spec=self.flow, grid=self.grid, T=self.T, epsilon=self.epsilon,
                    samples_per_cell=self.provenance.get("samples_per_cell", 1),
                    steps=self.provenance.get("steps"))


def default_steps(T: float) -> int:
    return max(8, int(math.ceil(64 * T)))


def _sample_offsets(dimension: int, samples_per_cell: int) -> np.ndarray:
    s = samples_per_cell
    ticks = (np.arange(s) + 0.5) / s
    mesh = np.meshgrid(*([ticks] * dimension), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def build(spec: FlowSpec, grid: Grid, T: float, epsilon: float, samples_per_cell: int = 1,
          steps: int | None = None, chunk: int = 20000) -> TransitionGraph:
    """Build the transition graph of ``spec`` on ``grid``.

    Edge ``b -> b'`` exists iff some sample of ``b`` flows for time ``T`` to a
    point whose torus distance to the box of ``b'`` is at most ``epsilon``.
    ``samples_per_cell = s`` samples an s^d sub-lattice of each cell (s = 1 is
    the centre). Raises :class:`GraphError` unless
    ``cell diameter <= epsilon < 1/2``.
    """
    if spec.dimension != grid.dimension:
        raise GraphError("flow and grid dimensions differ")
    if not T > 0:
        raise GraphError("T must be positive")
    if epsilon >= 0.5:
        raise GraphError("epsilon must be < 1/2 so jumps close up unambiguously")
    if epsilon < grid.diameter * (1 - 1e-12):
        raise GraphError(f"epsilon {epsilon:g} below cell diameter {grid.diameter:g}")
    if grid.n_cells > max_cells():
        raise ResourceLimitError(f"{grid.n_cells} cells exceeds cap {max_cells()} (set {MAX_CELLS_ENV})")
    steps = default_steps(T) if steps is None else int(steps)
    d = grid.dimension
    shape = np.asarray(grid.shape)
    h = grid.cell_size
    reach = np.ceil(epsilon / h).astype(np.int64)
    deltas = np.stack(np.meshgrid(*[np.arange(-r, r + 1) for r in reach], indexing="ij"), -1).reshape(-1, d)
    offsets = _sample_offsets(d, samples_per_cell)
    cells = grid.unravel(np.arange(grid.n_cells))
    parts = []
    eps2 = epsilon * epsilon * (1 + 1e-12)
    for lo in range(0, grid.n_cells, chunk):
        block = cells[lo:lo + chunk]
        pts = ((block[:, None, :] + offsets[None, :, :]) * h).reshape(-1, d)
        owner = np.repeat(np.arange(lo, lo + len(block)), len(offsets))
        _, disp = integrate_T(spec, pts, T, steps)
        lifted = pts + disp
        base = np.floor(lifted / h).astype(np.int64)
        cand = base[:, None, :] + deltas[None, :, :]
        low = cand * h
        gap = np.maximum(0.0, np.maximum(low - lifted[:, None, :], lifted[:, None, :] - (low + h)))
        ok = np.sum(gap * gap, axis=-1) <= eps2
        rows, cols = np.nonzero(ok)
        hit = cand[rows, cols]
        wind = np.floor_divide(hit, shape)
        target = grid.ravel(hit - wind * shape)
        parts.append(np.column_stack([owner[rows], target, wind]))
    allrows = np.unique(np.concatenate(parts), axis=0)
    provenance = {"flow": spec.to_dict(), "flow_digest": spec.digest(), "grid": list(grid.shape),
                  "T": T, "epsilon": epsilon, "samples_per_cell": samples_per_cell, "steps": steps}
    return TransitionGraph(grid.n_cells, allrows[:, 0], allrows[:, 1], allrows[:, 2:], grid=grid, T=T,
                           epsilon=epsilon, provenance=provenance, flow=spec)


def refine(graph: TransitionGraph, factor: int = 2) -> TransitionGraph:
    """Rebuild at ``factor`` times the resolution with epsilon = new cell diameter."""
    if factor < 2:
        raise GraphError("refinement factor must be >= 2")
    inputs = graph.rebuild_inputs()
    grid = inputs["grid"].refined(factor)
    if grid.n_cells > max_cells():
        raise ResourceLimitError(f"refined grid has {grid.n_cells} cells, cap is {max_cells()}")
    inputs.update(grid=grid, epsilon=grid.diameter)
    return build(**inputs)


# -- interchange ------------------------------------------------------------

FORMAT_TAG = "torsec-graph 1"


def export_text(graph: TransitionGraph, path) -> None:
    """Write the plain-text interchange format.

    Header lines ``key value``; then ``edges <count>`` followed by one line
    ``u v w_1 ... w_d`` per edge.
    """
    with open(path, "w") as fh:
        fh.write(f"# {FORMAT_TAG}\n")
        fh.write(f"dimension {graph.dimension}\n")
        fh.write(f"vertices {graph.n}\n")
        if graph.grid is not None:
            fh.write("grid " + " ".join(str(s) for s in graph.grid.shape) + "\n")
        if graph.T is not None:
            fh.write(f"T {graph.T!r}\n")
        if graph.epsilon is not None:
            fh.write(f"epsilon {graph.epsilon!r}\n")
        if "flow_digest" in graph.provenance:
            fh.write(f"flow_digest {graph.provenance['flow_digest']}\n")
        fh.write(f"edges {graph.n_edges}\n")
        rows = np.column_stack([graph.src, graph.dst, graph.winding])
        np.savetxt(fh, rows, fmt="%d")


def import_text(path) -> TransitionGraph:
    header = {}
    with open(path) as fh:
        first = fh.readline().strip()
        if first != f"# {FORMAT_TAG}":
            raise GraphError(f"not a {FORMAT_TAG} file")
        while True:
            line = fh.readline()
            if not line:
                raise GraphError("missing edges section")
            key, _, value = line.strip().partition(" ")
            header[key] = value
            if key == "edges":
                break
        count = int(header["edges"])
        d = int(header["dimension"])
        rows = np.loadtxt(fh, dtype=np.int64, ndmin=2) if count else np.zeros((0, d + 2), dtype=np.int64)
    if rows.shape != (count, d + 2):
        raise GraphError(f"expected {count} edge rows of width {d + 2}, got {rows.shape}")
    grid = Grid(tuple(int(s) for s in header["grid"].split())) if "grid" in header else None
    prov = {"flow_digest": header["flow_digest"]} if "flow_digest" in header else {}
    return TransitionGraph(int(header["vertices"]), rows[:, 0], rows[:, 1], rows[:, 2:], grid=grid,
                           T=float(header["T"]) if "T" in header else None,
                           epsilon=float(header["epsilon"]) if "epsilon" in header else None,
                           provenance=prov)
