"""Conley-level analysis that ignores homology.

Recurrence chains are the strongly connected components that carry a cycle
(a singleton component counts only with a self-loop). The Conley order is
reachability between chains.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .graph import TransitionGraph


def scc_labels(n, src, dst):
    """Strong component label per vertex, relabelled by smallest member vertex."""
    if n == 0:
        return np.zeros(0, dtype=np.int64)
    mat = csr_matrix((np.ones(len(src), dtype=np.int8), (src, dst)), shape=(n, n))
    _, raw = connected_components(mat, directed=True, connection="strong")
    first = np.full(raw.max() + 1, n, dtype=np.int64)
    np.minimum.at(first, raw, np.arange(n))
    order = np.argsort(first, kind="stable")
    rank = np.empty_like(order)
    rank[order] = np.arange(len(order))
    return rank[raw]


def cyclic_components(n, src, dst):
    """(component label per vertex, boolean mask of vertices lying on a cycle)."""
    comp = scc_labels(n, src, dst)
    sizes = np.bincount(comp, minlength=comp.max() + 1 if n else 0)
    on_cycle = sizes[comp] > 1
    loops = src[src == dst]
    on_cycle[loops] = True
    return comp, on_cycle


@dataclass
class ChainDecomposition:
    """Recurrence chains of a graph and the Conley order between them.

    ``chain_of[v]`` is the chain id of a recurrent vertex and -1 otherwise;
    chains are numbered by their smallest vertex. ``order`` lists pairs
    ``(i, j)``, i != j, such that chain j is reachable from chain i.
    """

    chain_of: np.ndarray
    chains: list
    order: list
    nonrecurrent: np.ndarray

    def to_dict(self) -> dict:
        return {
            "chains": {str(i): [int(v) for v in c] for i, c in enumerate(self.chains)},
            "order": [[int(i), int(j)] for i, j in self.order],
            "nonrecurrent_count": int(len(self.nonrecurrent)),
        }


def recurrent_set(g: TransitionGraph) -> np.ndarray:
    """Vertices lying on a directed cycle (self-loops included)."""
    _, on_cycle = cyclic_components(g.n, g.src, g.dst)
    return np.flatnonzero(on_cycle)


def _condensation(comp, src, dst):
    a, b = comp[src], comp[dst]
    keep = a != b
    pairs = np.unique(np.column_stack([a[keep], b[keep]]), axis=0) if keep.any() else np.zeros((0, 2), np.int64)
    return pairs


def topological_ranks(n_comp, pairs) -> np.ndarray:
    """Deterministic topological order of a DAG (smallest ready node first)."""
    indeg = np.zeros(n_comp, dtype=np.int64)
    succ = [[] for _ in range(n_comp)]
    for a, b in pairs:
        succ[a].append(int(b))
        indeg[b] += 1
    ready = [i for i in range(n_comp) if indeg[i] == 0]
    heapq.heapify(ready)
    rank = np.empty(n_comp, dtype=np.int64)
    k = 0
    while ready:
        c = heapq.heappop(ready)
        rank[c] = k
        k += 1
        for b in succ[c]:
            indeg[b] -= 1
            if indeg[b] == 0:
                heapq.heappush(ready, b)
    if k != n_comp:
        raise RuntimeError("condensation is not acyclic")
    return rank


def chain_reachability(comp, pairs, chain_comps):
    """Reachability between chain components as bitsets propagated over the condensation."""
    n_comp = int(comp.max()) + 1 if len(comp) else 0
    rank = topological_ranks(n_comp, pairs)
    succ = [[] for _ in range(n_comp)]
    for a, b in pairs:
        succ[a].append(int(b))
    bit = {c: 1 << i for i, c in enumerate(chain_comps)}
    reach = [0] * n_comp
    for c in np.argsort(-rank):
        r = bit.get(int(c), 0)
        for b in succ[c]:
            r |= reach[b]
        reach[c] = r
    out = []
    for i, c in enumerate(chain_comps):
        r = reach[c] & ~bit[c]
        j = 0
        while r:
            if r & 1:
                out.append((i, j))
            r >>= 1
            j += 1
    return sorted(out)


def chain_decomposition(g: TransitionGraph) -> ChainDecomposition:
    comp, on_cycle = cyclic_components(g.n, g.src, g.dst)
    chain_comps = sorted(set(comp[on_cycle].tolist()))
    index = {c: i for i, c in enumerate(chain_comps)}
    chain_of = np.full(g.n, -1, dtype=np.int64)
    for v in np.flatnonzero(on_cycle):
        chain_of[v] = index[comp[v]]
    chains = [np.flatnonzero(chain_of == i) for i in range(len(chain_comps))]
    pairs = _condensation(comp, g.src, g.dst)
    order = chain_reachability(comp, pairs, chain_comps)
    return ChainDecomposition(chain_of, chains, order, np.flatnonzero(~on_cycle))


def is_chain_recurrent(g: TransitionGraph) -> bool:
    """Every vertex recurrent and a single chain."""
    comp, on_cycle = cyclic_components(g.n, g.src, g.dst)
    return bool(on_cycle.all() and (comp.max() == 0 if g.n else True))


def lyapunov_potential(g: TransitionGraph) -> np.ndarray:
    """Discrete Lyapunov function: minus the topological rank of each strong component.

    Constant on chains, strictly decreasing along every edge joining distinct
    components, and distinct on distinct chains.
    """
    comp = scc_labels(g.n, g.src, g.dst)
    n_comp = int(comp.max()) + 1 if g.n else 0
    rank = topological_ranks(n_comp, _condensation(comp, g.src, g.dst))
    return -rank[comp].astype(float)
