"""Homology-aware analysis of a transition graph for an integer class alpha.

Conventions (used by every module downstream): an edge u -> v carries the
alpha-weight w = alpha(winding). A potential ``F`` is *feasible* when

    F(v) + w >= F(u)        for every edge u -> v,

i.e. its lift to the cover is non-decreasing along the flow. Feasible
potentials exist iff no cycle has negative alpha-weight (the graph form of
"-alpha is quasi-Lyapunov"). ``F = -dist`` where ``dist`` are Bellman-Ford
distances from a virtual source. Edges with ``F(v) + w == F(u)`` are *tight*;
alpha-recurrent vertices are those on cycles of tight edges, which are exactly
the cycles of zero alpha-weight.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import _kernels
from .flows import CohomologyClass
from .graph import TransitionGraph
from .recurrence import cyclic_components, is_chain_recurrent, scc_labels


class NotQuasiLyapunovError(ValueError):
    """Raised when an operation needs the absence of negative alpha-cycles."""

    def __init__(self, alpha, witness):
        super().__init__(f"-({alpha}) is not quasi-Lyapunov: negative cycle of {len(witness)} edges")
        self.witness = witness


def alpha_weight(winding, alpha: CohomologyClass) -> int:
    return int(np.dot(np.asarray(winding, dtype=np.int64), np.asarray(alpha.covector, dtype=np.int64)))


@dataclass
class AlphaAnalysis:
    alpha: CohomologyClass
    quasi_lyapunov_minus_alpha: bool
    alpha_recurrent_vertices: np.ndarray
    chain_of: np.ndarray
    chains: list
    potentials: np.ndarray | None
    negative_cycle: np.ndarray | None

    @property
    def n_chains(self) -> int:
        return len(self.chains)

    def to_dict(self) -> dict:
        return {
            "alpha": list(self.alpha.covector),
            "quasi_lyapunov_minus_alpha": self.quasi_lyapunov_minus_alpha,
            "alpha_recurrent_vertices": [int(v) for v in self.alpha_recurrent_vertices],
            "chains": [[int(v) for v in c] for c in self.chains],
            "potentials": None if self.potentials is None else [int(p) for p in self.potentials],
            "negative_cycle_edges": None if self.negative_cycle is None else [int(e) for e in self.negative_cycle],
        }


def feasible_potential(g: TransitionGraph, weights):
    """(F, None) with F feasible, or (None, negative cycle edge ids)."""
    dist, cyc = _kernels.bellman_ford(g.n, g.indptr, g.dst, np.asarray(weights, dtype=np.int64), g.src)
    if cyc.size:
        return None, cyc
    return -dist, None


def tight_mask(g: TransitionGraph, weights, potential) -> np.ndarray:
    return potential[g.dst] + weights == potential[g.src]


def analyze(g: TransitionGraph, alpha: CohomologyClass) -> AlphaAnalysis:
    w = g.alpha_weights(alpha)
    F, cyc = feasible_potential(g, w)
    if F is None:
        empty = np.zeros(0, dtype=np.int64)
        return AlphaAnalysis(alpha, False, empty, np.full(g.n, -1, dtype=np.int64), [], None, cyc)
    tight = tight_mask(g, w, F)
    comp, on_cycle = cyclic_components(g.n, g.src[tight], g.dst[tight])
    rec = np.flatnonzero(on_cycle)
    chain_of = np.full(g.n, -1, dtype=np.int64)
    labels = comp[rec]
    # chain ids follow the smallest member vertex (comp labels already do)
    uniq = np.unique(labels)
    chain_of[rec] = np.searchsorted(uniq, labels)
    chains = [rec[chain_of[rec] == i] for i in range(len(uniq))]
    return AlphaAnalysis(alpha, True, rec, chain_of, chains, F, None)


def is_quasi_lyapunov_neg(g: TransitionGraph, alpha: CohomologyClass) -> bool:
    """True iff no cycle has negative alpha-weight."""
    return feasible_potential(g, g.alpha_weights(alpha))[0] is not None


def alpha_recurrent(g: TransitionGraph, alpha: CohomologyClass):
    """(alpha-recurrent vertices, chain id per vertex); refuses with negative cycles."""
    res = analyze(g, alpha)
    if not res.quasi_lyapunov_minus_alpha:
        raise NotQuasiLyapunovError(alpha, res.negative_cycle)
    return res.alpha_recurrent_vertices, res.chain_of


# -- minimum cycle mean -----------------------------------------------------

@dataclass
class SupportValue:
    """Minimum over cycles of (alpha-weight / edge count), with a witness cycle."""

    value: Fraction
    cycle: np.ndarray
    certified: bool

    def per_time(self, T: float) -> float:
        return float(self.value) / T


class AcyclicGraphError(ValueError):
    pass


def _cyclic_subgraph(g: TransitionGraph):
    comp, on_cycle = cyclic_components(g.n, g.src, g.dst)
    if not on_cycle.any():
        raise AcyclicGraphError("graph has no cycle")
    return on_cycle, comp


def _internal_csr(g, comp, active):
    keep = (comp[g.src] == comp[g.dst]) & active[g.src]
    eid = np.flatnonzero(keep)
    indptr = np.searchsorted(g.src[eid], np.arange(g.n + 1)).astype(np.int64)
    return eid, indptr


def direction_support(g: TransitionGraph, alpha, certify: bool = True) -> SupportValue:
    """Minimum cycle mean of alpha-weights.

    ``alpha`` is a :class:`CohomologyClass` or a real covector. Howard policy
    iteration proposes a cycle; for integer classes the value is then certified
    exactly: with candidate mean W/L, the integer weights ``L*w - W`` must admit
    no negative cycle, otherwise the negative cycle found is a strictly better
    candidate and the check repeats.
    """
    active, comp = _cyclic_subgraph(g)
    eid, indptr = _internal_csr(g, comp, active)
    if isinstance(alpha, CohomologyClass):
        w_int = g.alpha_weights(alpha)
        w = w_int.astype(float)
    else:
        w_int = None
        w = g.winding @ np.asarray(alpha, dtype=float)
    _, cyc_local = _kernels.howard_min_mean(g.n, indptr, g.dst[eid], w[eid], active)
    cycle = eid[cyc_local]
    if w_int is None or not certify:
        return SupportValue(Fraction(float(w[cycle].sum())) / len(cycle), cycle, False)
    while True:
        W, L = int(w_int[cycle].sum()), len(cycle)
        shifted = L * w_int - W
        _, neg = _kernels.bellman_ford(g.n, g.indptr, g.dst, shifted, g.src)
        if neg.size == 0:
            return SupportValue(Fraction(W, L), cycle, True)
        cycle = neg


# -- existence --------------------------------------------------------------

@dataclass
class Existence:
    nonempty: bool
    criterion: str
    reason: str
    witness: list | None = None

    def to_dict(self) -> dict:
        d = {"verdict": "nonempty" if self.nonempty else "empty", "criterion": self.criterion,
             "reason": self.reason}
        if self.witness is not None:
            d["witness_edges"] = [int(e) for e in self.witness]
        return d


def existence(g: TransitionGraph, alpha: CohomologyClass, analysis: AlphaAnalysis | None = None) -> Existence:
    """Existence of a partial cross-section cohomologous to ``alpha``.

    Nonzero alpha: nonempty iff no negative alpha-cycle. Zero alpha: nonempty
    iff the graph is not chain recurrent.
    """
    if alpha.is_zero:
        if is_chain_recurrent(g):
            return Existence(False, "chain-recurrence", "graph is chain recurrent: one chain covering every vertex")
        return Existence(True, "chain-recurrence", "graph is not chain recurrent")
    res = analysis if analysis is not None else analyze(g, alpha)
    if res.quasi_lyapunov_minus_alpha:
        return Existence(True, "quasi-lyapunov", "no cycle of negative alpha-weight (-alpha quasi-Lyapunov)")
    return Existence(False, "quasi-lyapunov", "negative alpha-cycle witness (-alpha not quasi-Lyapunov)",
                     [int(e) for e in res.negative_cycle])


def fried_positive(g: TransitionGraph, alpha: CohomologyClass, analysis: AlphaAnalysis | None = None) -> bool:
    """No negative alpha-cycle and empty alpha-recurrent set: every cycle is alpha-positive."""
    if alpha.is_zero:
        return False
    res = analysis if analysis is not None else analyze(g, alpha)
    return res.quasi_lyapunov_minus_alpha and len(res.alpha_recurrent_vertices) == 0


@dataclass
class ClosedWalk:
    """Closed walk ``prefix + cycle * repeats + suffix`` through ``vertex``."""

    vertex: int
    prefix: list
    cycle: list
    repeats: int
    suffix: list
    weight: int

    def edges(self) -> list:
        return self.prefix + self.cycle * self.repeats + self.suffix

    def to_dict(self) -> dict:
        return {"vertex": self.vertex, "prefix": self.prefix, "cycle": self.cycle,
                "repeats": self.repeats, "suffix": self.suffix, "alpha_weight": self.weight}


def _bfs_path(g, start, goal_mask, allowed):
    parent = _kernels.bfs_edges(g.n, g.indptr, g.dst, start, allowed)
    hits = np.flatnonzero(goal_mask & ((parent >= 0) | (np.arange(g.n) == start)))
    if hits.size == 0:
        return None, None
    goal = int(start) if goal_mask[start] else int(hits[0])
    path = []
    v = goal
    while v != start:
        e = int(parent[v])
        path.append(e)
        v = int(g.src[e])
    return path[::-1], goal


def negative_cycle_through(g: TransitionGraph, alpha: CohomologyClass, vertex: int) -> ClosedWalk | None:
    """A negative-alpha-weight closed walk through ``vertex``, or None.

    Searches the strong component of ``vertex``: any negative cycle there can be
    reached from and return to ``vertex``, and is pumped until the whole walk is
    negative.
    """
    comp = scc_labels(g.n, g.src, g.dst)
    allowed = comp == comp[vertex]
    keep = allowed[g.src] & allowed[g.dst]
    sub = TransitionGraph(g.n, g.src[keep], g.dst[keep], g.winding[keep])
    res = analyze(sub, alpha)
    if res.quasi_lyapunov_minus_alpha:
        return None
    w = g.alpha_weights(alpha)
    # ``sub`` keeps the sorted order of the retained edges, so ids map back directly
    cycle = [int(e) for e in np.flatnonzero(keep)[res.negative_cycle]]
    cyc_vertices = np.zeros(g.n, dtype=bool)
    cyc_vertices[g.src[cycle]] = True
    prefix, entry = _bfs_path(g, vertex, cyc_vertices, allowed)
    k = cycle.index(next(e for e in cycle if g.src[e] == entry))
    cycle = cycle[k:] + cycle[:k]
    target = np.zeros(g.n, dtype=bool)
    target[vertex] = True
    suffix, _ = _bfs_path(g, entry, target, allowed)
    cw = int(w[cycle].sum())
    rest = int(w[prefix].sum()) + int(w[suffix].sum())
    repeats = max(1, (rest // -cw) + 1)
    return ClosedWalk(int(vertex), prefix, cycle, repeats, suffix, rest + repeats * cw)
