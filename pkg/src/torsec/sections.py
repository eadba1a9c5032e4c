"""Classification of partial cross-sections at graph level.

Orientation (shared with :mod:`torsec.alpha`): potentials satisfy
``F(v) + w >= F(u)`` on every edge u -> v with alpha-weight w. Each
alpha-chain j has a base vertex b_j (its smallest vertex) and a label
``L_j = F(b_j)``. The shift ``a_ij`` is the least alpha-weight of a path from
b_i to b_j, and a labeling is feasible iff ``L_i - L_j <= a_ij`` for every
reachable pair. Labels live in alpha units: a deck translation by k adds
alpha(k), a multiple of n_alpha. A section at level t is the set of edges
crossing ``F = t mod 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from . import _kernels
from .alpha import AlphaAnalysis, NotQuasiLyapunovError, analyze
from .flows import CohomologyClass
from .graph import TransitionGraph, refine

INF = _kernels.INF


class SectionError(ValueError):
    pass


class InfeasibleLabelingError(SectionError):
    """A labeling violates ``L_i - L_j <= a_ij``; ``witness`` is a path b_i -> b_j."""

    def __init__(self, message, pair=None, witness=None):
        super().__init__(message)
        self.pair = pair
        self.witness = witness


class CardinalityError(SectionError):
    pass


def _csr(n, src):
    return np.searchsorted(src, np.arange(n + 1)).astype(np.int64)


def _reduced_dijkstra(g: TransitionGraph, w, F, init):
    """Multi-source shortest paths for weights ``w`` using the feasible potential F.

    ``init`` holds true start values G(s) (INF elsewhere). Returns G with
    G(v) = min_s (init(s) + d(s, v)), INF where unreachable, and the parent edges.
    """
    reduced = w + F[g.dst] - F[g.src]
    key = np.where(init < INF, init + F, INF)
    dist, parent = _kernels.dijkstra(g.n, g.indptr, g.dst, reduced, key)
    out = np.where(dist < INF, dist - F, INF)
    return out, parent


def _path_to(g, parent, target):
    path = []
    v = int(target)
    while parent[v] >= 0:
        e = int(parent[v])
        path.append(e)
        v = int(g.src[e])
    return path[::-1]


def _shift_matrix(g, w, F, bases):
    k = len(bases)
    shifts = np.full((k, k), INF, dtype=np.int64)
    for i, b in enumerate(bases):
        init = np.full(g.n, INF, dtype=np.int64)
        init[b] = 0
        dist, _ = _reduced_dijkstra(g, w, F, init)
        shifts[i] = dist[bases]
        shifts[i, i] = 0
    return shifts


def _match_chains(coarse: TransitionGraph, fine: TransitionGraph, coarse_chains, fine_chains):
    """Map each coarse chain to the fine chain with the largest spatial overlap."""
    factor = fine.grid.shape[0] // coarse.grid.shape[0]
    owner = np.full(fine.n, -1, dtype=np.int64)
    for m, c in enumerate(fine_chains):
        owner[c] = m
    match, problems = [], []
    for i, c in enumerate(coarse_chains):
        cells = coarse.grid.unravel(c)
        # fine children of every coarse cell of the chain
        kids = [cells * factor + np.array(off) for off in product(range(factor), repeat=coarse.grid.dimension)]
        hit = owner[fine.grid.ravel(np.concatenate(kids))]
        hit = hit[hit >= 0]
        if hit.size == 0:
            match.append(None)
            problems.append(f"chain {i} has no overlapping chain at resolution {fine.grid.shape}")
            continue
        counts = np.bincount(hit)
        best = np.flatnonzero(counts == counts.max())
        if len(best) > 1:
            match.append(None)
            problems.append(f"chain {i} overlaps chains {best.tolist()} equally at resolution {fine.grid.shape}")
            continue
        match.append(int(best[0]))
    seen = {}
    for i, m in enumerate(match):
        if m is None:
            continue
        if m in seen:
            problems.append(f"chains {seen[m]} and {i} merge into one chain at resolution {fine.grid.shape}")
            match[i] = None
            match[seen[m]] = None
        else:
            seen[m] = i
    return match, problems


@dataclass
class AlphaChainGraph:
    """alpha-chains with the integer shift matrix of the lifted Conley order.

    ``shifts[i, j]`` is INF when chain j is unreachable from chain i.
    ``history`` holds one shift matrix per refinement level (base first);
    entries are None where chains could not be matched.
    """

    alpha: CohomologyClass
    chains: list
    bases: np.ndarray
    shifts: np.ndarray
    history: list = field(default_factory=list)
    divergent: np.ndarray | None = None
    ambiguities: list = field(default_factory=list)
    resolutions: list = field(default_factory=list)
    potential: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        k = len(self.chains)
        if self.divergent is None:
            self.divergent = np.zeros((k, k), dtype=bool)
        if not self.history:
            self.history = [[[None if s >= INF else int(s) for s in row] for row in self.shifts]]

    @property
    def n_alpha(self) -> int:
        return self.alpha.n_alpha

    @property
    def n_chains(self) -> int:
        return len(self.chains)

    @property
    def reachable_any(self) -> np.ndarray:
        return self.shifts < INF

    def shift(self, i, j):
        s = self.shifts[i, j]
        return math.inf if s >= INF else int(s)

    def limit_shifts(self) -> np.ndarray:
        """Shifts with divergent entries (and entries lost under refinement) removed."""
        out = self.shifts.copy()
        out[self.divergent] = INF
        for level in self.history[1:]:
            for i, row in enumerate(level):
                for j, s in enumerate(row):
                    if s is None and self.shifts[i, j] < INF and not self._unmatched(i, j, level):
                        out[i, j] = INF
        return out

    @staticmethod
    def _unmatched(i, j, level):
        # a row or column of None marks an unmatched chain, not an unreachable pair
        return all(s is None for s in level[i]) or all(row[j] is None for row in level)

    def is_transitive(self, limit: bool = True) -> bool:
        s = self.limit_shifts() if limit else self.shifts
        return bool(np.all(s < INF))

    def to_dict(self) -> dict:
        def mat(m):
            return [[None if s >= INF else int(s) for s in row] for row in m]

        return {
            "alpha": list(self.alpha.covector),
            "n_alpha": self.n_alpha,
            "chains": [[int(v) for v in c] for c in self.chains],
            "bases": [int(b) for b in self.bases],
            "shifts": mat(self.shifts),
            "shift_history": self.history,
            "resolutions": [list(r) for r in self.resolutions],
            "divergent": [[bool(x) for x in row] for row in self.divergent],
            "reachable_any": [[bool(x) for x in row] for row in self.reachable_any],
            "ambiguities": list(self.ambiguities),
        }


def _require_ql(res: AlphaAnalysis):
    if not res.quasi_lyapunov_minus_alpha:
        raise NotQuasiLyapunovError(res.alpha, res.negative_cycle)


def build_chain_graph(g: TransitionGraph, alpha: CohomologyClass, refinement_levels: int = 1,
                      analysis: AlphaAnalysis | None = None, refined: list | None = None) -> AlphaChainGraph:
    """alpha-chain graph of ``g``; with ``refinement_levels > 1`` also track shifts under refinement.

    Level l uses the graph refined by 2**l. ``refined`` may supply those graphs
    to avoid rebuilding them. An entry is divergent when it is finite at every
    level and strictly increases from each level to the next.
    """
    if refinement_levels < 1:
        raise SectionError("refinement_levels must be >= 1")
    res = analysis if analysis is not None else analyze(g, alpha)
    _require_ql(res)
    w = g.alpha_weights(alpha)
    bases = np.array([int(c[0]) for c in res.chains], dtype=np.int64)
    shifts = _shift_matrix(g, w, res.potentials, bases)
    k = len(bases)
    cg = AlphaChainGraph(alpha, list(res.chains), bases, shifts, potential=res.potentials,
                         resolutions=[g.grid.shape] if g.grid is not None else [])
    if refinement_levels == 1 or k == 0:
        return cg
    history = [cg.history[0]]
    for level in range(1, refinement_levels):
        if refined is not None and len(refined) >= level:
            fine = refined[level - 1]
        else:
            fine = refine(g, 2 ** level)
        fres = analyze(fine, alpha)
        _require_ql(fres)
        match, problems = _match_chains(g, fine, res.chains, fres.chains)
        cg.ambiguities.extend(problems)
        cg.resolutions.append(fine.grid.shape)
        fbases = np.array([int(fres.chains[m][0]) for m in match if m is not None], dtype=np.int64)
        fshift = _shift_matrix(fine, fine.alpha_weights(alpha), fres.potentials, fbases)
        pos = {i: p for p, i in enumerate(i for i, m in enumerate(match) if m is not None)}
        table = [[None] * k for _ in range(k)]
        for i in pos:
            for j in pos:
                s = fshift[pos[i], pos[j]]
                table[i][j] = None if s >= INF else int(s)
        history.append(table)
    cg.history = history
    div = np.zeros((k, k), dtype=bool)
    for i in range(k):
        for j in range(k):
            if i == j:
                continue
            seq = [h[i][j] for h in history]
            div[i, j] = all(s is not None for s in seq) and all(b > a for a, b in zip(seq, seq[1:]))
    cg.divergent = div
    return cg


def chain_graph_from_shifts(alpha: CohomologyClass, shifts, divergent=None) -> AlphaChainGraph:
    """Toy chain graph from a shift matrix (use ``math.inf`` or None for unreachable)."""
    k = len(shifts)
    mat = np.full((k, k), INF, dtype=np.int64)
    for i in range(k):
        for j in range(k):
            s = shifts[i][j]
            if s is not None and s != math.inf:
                mat[i, j] = int(s)
        mat[i, i] = 0
    div = None if divergent is None else np.asarray(divergent, dtype=bool)
    chains = [np.array([i], dtype=np.int64) for i in range(k)]
    return AlphaChainGraph(alpha, chains, np.arange(k, dtype=np.int64), mat, divergent=div)


# -- labelings ----------------------------------------------------------------

@dataclass(frozen=True)
class Labeling:
    """Integer label per alpha-chain; normalized labelings have label 0 on chain 0."""

    labels: tuple
    n_alpha: int = 1

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(int(x) for x in self.labels))

    def __len__(self):
        return len(self.labels)

    def normalized(self) -> "Labeling":
        if not self.labels:
            return self
        return Labeling(tuple(x - self.labels[0] for x in self.labels), self.n_alpha)

    def shifted(self, k: int) -> "Labeling":
        return Labeling(tuple(x + k for x in self.labels), self.n_alpha)

    def to_list(self) -> list:
        return list(self.labels)


def labelings_equal(l1: Labeling, l2: Labeling) -> bool:
    """Equal up to an additive constant, i.e. the same isotopy class."""
    if len(l1) != len(l2):
        raise SectionError(f"labelings over different chain sets ({len(l1)} vs {len(l2)} chains)")
    if not l1.labels:
        return True
    d = l1.labels[0] - l2.labels[0]
    return all(a - b == d for a, b in zip(l1.labels, l2.labels))


def check_labeling(cg: AlphaChainGraph, labeling: Labeling, limit: bool = False):
    """First violated pair (i, j) of ``L_i - L_j <= a_ij``, or None."""
    if len(labeling) != cg.n_chains:
        raise SectionError(f"labeling has {len(labeling)} labels for {cg.n_chains} chains")
    s = cg.limit_shifts() if limit else cg.shifts
    L = np.asarray(labeling.labels, dtype=np.int64)
    viol = (L[:, None] - L[None, :] > s) & (s < INF)
    if cg.alpha.is_zero and len(L) and np.all(L == L[0]):
        return (0, 0)
    hits = np.argwhere(viol)
    return None if hits.size == 0 else (int(hits[0][0]), int(hits[0][1]))


@dataclass
class Cardinality:
    kind: str
    count: int | None = None
    reason: str = ""

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "reason": self.reason}
        if self.count is not None:
            d["count"] = self.count
        return d


@dataclass
class LabelingSet:
    labelings: list
    complete: bool
    truncated: bool
    window: int | None
    infinite_family: bool

    def __len__(self):
        return len(self.labelings)

    def to_dict(self) -> dict:
        return {"labelings": [l.to_list() for l in self.labelings], "complete": self.complete,
                "truncated": self.truncated, "window": self.window, "infinite_family": self.infinite_family}


def enumerate_labelings(cg: AlphaChainGraph, window: int | None = None, graph_level: bool = False,
                        limit: int = 100_000) -> LabelingSet:
    """All normalized feasible labelings, by depth-first interval propagation.

    By default divergent shifts are dropped (the limit view). With
    ``graph_level=True`` every finite shift of the base graph is enforced.
    Labels are confined to ``[-window, window]`` when a window is given; a
    window is required unless the constraints bound every label.
    """
    k = cg.n_chains
    s = cg.shifts if graph_level else cg.limit_shifts()
    bounded = bool(np.all(s < INF))
    zero = cg.alpha.is_zero
    if zero:
        bounded = False
    if not bounded and window is None:
        raise SectionError("labelings form an infinite family; a window is required")
    if k == 0:
        # the empty labeling; for the zero class it gives only the empty section
        return LabelingSet([] if zero else [Labeling((), cg.n_alpha)], True, False, window, False)
    lo = np.full(k, -INF, dtype=np.int64)
    hi = np.full(k, INF, dtype=np.int64)
    if window is not None:
        lo[:], hi[:] = -window, window
    out = []
    labels = np.zeros(k, dtype=np.int64)
    truncated = False

    def bounds(j, upto):
        # L_i - L_j <= s[i, j] and L_j - L_i <= s[j, i] for assigned i
        a, b = lo[j], hi[j]
        for i in range(upto):
            if s[i, j] < INF:
                a = max(a, labels[i] - s[i, j])
            if s[j, i] < INF:
                b = min(b, labels[i] + s[j, i])
        return a, b

    def dfs(j):
        nonlocal truncated
        if len(out) >= limit:
            truncated = True
            return
        if j == k:
            if not (zero and np.all(labels == 0)):
                out.append(Labeling(tuple(labels.tolist()), cg.n_alpha))
            return
        a, b = bounds(j, j)
        for v in range(int(a), int(b) + 1):
            labels[j] = v
            dfs(j + 1)
            if truncated:
                return

    dfs(1)
    # windowed enumeration is complete only when every label is bounded by constraints
    complete = bounded and not truncated
    return LabelingSet(out, complete, truncated or not bounded, window, not bounded)


def classify_cardinality(cg: AlphaChainGraph, alpha: CohomologyClass | None = None,
                         chain_recurrent: bool | None = None, limit: int = 100_000) -> Cardinality:
    """Cardinality of the set of section classes for a nonempty existence case."""
    alpha = cg.alpha if alpha is None else alpha
    if alpha.is_zero:
        if chain_recurrent:
            raise CardinalityError("existence is empty for the zero class on a chain recurrent graph")
        return Cardinality("countably_infinite", None, "zero class: labelings can be scaled")
    if cg.n_chains <= 1:
        return Cardinality("singleton", 1, f"{cg.n_chains} alpha-chain(s)")
    s = cg.limit_shifts()
    if np.all(s < INF):
        found = enumerate_labelings(cg, limit=limit)
        if found.truncated:
            return Cardinality("finite", None, f"more than {limit} labelings")
        return Cardinality("finite", len(found), "transitive chain graph")
    missing = np.argwhere(s >= INF)
    i, j = (int(x) for x in missing[0])
    if cg.divergent[i, j]:
        return Cardinality("countably_infinite", None, f"divergent shift a_{i}{j}: not transitive")
    return Cardinality("countably_infinite", None, f"unreachable pair a_{i}{j}: not transitive")


# -- potentials and sections --------------------------------------------------

def _feasible_min(g, w, F0, seeds):
    """Least feasible potential F with F(s) >= seeds[s].

    Vertices not reachable from any seed get ``F0 + C`` with C as large as
    possible without exceeding the seeded values anywhere; returns (F, parent).
    """
    init = np.full(g.n, INF, dtype=np.int64)
    for s, val in seeds.items():
        init[s] = -val
    G, parent = _reduced_dijkstra(g, w, F0, init)
    reached = G < INF
    if reached.all():
        return -G, parent
    C = int(np.min(-G[reached] - F0[reached])) if reached.any() else 0
    return np.where(reached, -G, F0 + C), parent


def _reverse(g: TransitionGraph) -> TransitionGraph:
    rg = g.__dict__.get("_reverse_cache")
    if rg is None:
        rg = TransitionGraph(g.n, g.dst, g.src, g.winding)
        g.__dict__["_reverse_cache"] = rg
    return rg


def synthesize_potential(g: TransitionGraph, cg: AlphaChainGraph, labeling: Labeling,
                         hug_chains: bool = True) -> np.ndarray:
    """Integer potential with ``F(b_j) = L_j`` that is feasible on every edge.

    Chain values are ``L_j + F0(v) - F0(b_j)``. With ``hug_chains`` the
    potential is raised just upstream of every chain so that edges entering a
    chain stay uncut whenever the labeling allows it.
    """
    if len(labeling) != cg.n_chains:
        raise SectionError(f"labeling has {len(labeling)} labels for {cg.n_chains} chains")
    bad = check_labeling(cg, labeling)
    if bad is not None and not (cg.alpha.is_zero and bad == (0, 0)):
        i, j = bad
        init = np.full(g.n, INF, dtype=np.int64)
        init[cg.bases[i]] = 0
        w = g.alpha_weights(cg.alpha)
        _, parent = _reduced_dijkstra(g, w, cg.potential, init)
        raise InfeasibleLabelingError(
            f"labeling violates L_{i} - L_{j} <= a_{i}{j} = {cg.shift(i, j)}", (i, j),
            _path_to(g, parent, cg.bases[j]))
    w = g.alpha_weights(cg.alpha)
    F0 = cg.potential
    seeds = {int(b): int(L) for b, L in zip(cg.bases, labeling.labels)}
    F, _ = _feasible_min(g, w, F0, seeds)
    if not hug_chains or cg.n_chains == 0:
        return F
    # greatest feasible potential with the same chain values, via the reversed graph
    rg = _reverse(g)
    Fmax = -_feasible_min(rg, rg.alpha_weights(cg.alpha), -F0, {s: -v for s, v in seeds.items()})[0]
    on_chain = np.zeros(g.n, dtype=bool)
    for c in cg.chains:
        on_chain[c] = True
    upstream = np.zeros(g.n, dtype=bool)
    upstream[g.src[on_chain[g.dst]]] = True
    upstream &= ~on_chain
    extra = {int(u): int(Fmax[u]) for u in np.flatnonzero(upstream) if Fmax[u] > F[u]}
    if not extra:
        return F
    init = np.full(g.n, INF, dtype=np.int64)
    for u, val in extra.items():
        init[u] = -val
    G, _ = _reduced_dijkstra(g, w, F0, init)
    return np.maximum(F, np.where(G < INF, -G, -INF))


def default_level(labeling: Labeling | None = None) -> float:
    """Midpoint of the largest gap of chain values mod 1; integer values leave the gap (0, 1)."""
    return 0.5


def cut_multiplicity(g: TransitionGraph, alpha: CohomologyClass, potential, t: float) -> np.ndarray:
    """Signed number of levels ``t + Z`` crossed by each edge (negative = wrong side)."""
    w = g.alpha_weights(alpha)
    F = np.asarray(potential, dtype=np.int64)
    return (np.ceil(F[g.dst] + w - t) - np.ceil(F[g.src] - t)).astype(np.int64)


@dataclass
class CrossSection:
    """A section as a graph cut: edges crossed by the level set, with multiplicities.

    ``anchor`` is the level index ``ceil(F(0) - t)`` of vertex 0 in the chosen
    lift; translating the section by a deck transformation k adds alpha(k).
    """

    alpha: CohomologyClass
    level: float
    edges: np.ndarray
    multiplicity: np.ndarray
    anchor: int
    negative_crossings: int
    rec_contacts: int
    class_verified: bool
    polylines: list = field(default_factory=list)
    polyline_classes: list = field(default_factory=list)
    rec_adjacent: int = 0

    def translated(self, k) -> "CrossSection":
        shift = int(self.alpha(np.asarray(k, dtype=np.int64)))
        return CrossSection(self.alpha, self.level, self.edges, self.multiplicity, self.anchor + shift,
                            self.negative_crossings, self.rec_contacts, self.class_verified,
                            self.polylines, self.polyline_classes, self.rec_adjacent)

    def to_dict(self) -> dict:
        return {
            "class": list(self.alpha.covector),
            "level": self.level,
            "cut_edges": [int(e) for e in self.edges],
            "multiplicity": [int(m) for m in self.multiplicity],
            "anchor": self.anchor,
            "negative_crossings": self.negative_crossings,
            "rec_contacts": self.rec_contacts,
            "rec_adjacent_cut_edges": self.rec_adjacent,
            "class_verified": self.class_verified,
            "polyline_count": len(self.polylines),
            "polyline_classes": [list(c) for c in self.polyline_classes],
        }


def _undirected(g):
    """Symmetrized CSR (cached on the graph): heads, order into [edges, reversed edges], indptr."""
    cache = g.__dict__.get("_undirected_cache")
    if cache is None:
        heads = np.concatenate([g.dst, g.src])
        tails = np.concatenate([g.src, g.dst])
        order = np.argsort(tails, kind="stable")
        cache = (heads[order], order, _csr(g.n, tails[order]))
        g.__dict__["_undirected_cache"] = cache
    return cache


def _level_index(g, alpha, edges, mult, start, start_value):
    """Integer level index per vertex from cut data.

    Along an edge u -> v, index(v) = index(u) + c(e) - w(e). Returns (index,
    reached mask, consistent flag).
    """
    c = np.zeros(g.n_edges, dtype=np.int64)
    c[edges] = mult
    delta = c - g.alpha_weights(alpha)
    heads, order, indptr = _undirected(g)
    step = np.concatenate([delta, -delta])[order]
    idx, reached = _kernels.bfs_integrate(g.n, indptr, heads, step, start, start_value)
    on = reached[g.src]
    ok = bool(np.all(idx[g.dst[on]] == idx[g.src[on]] + delta[on]))
    return idx, reached, ok


def rec_contacts(g: TransitionGraph, cg: AlphaChainGraph, edges):
    """(contacts, adjacent) for a set of cut edges.

    A contact is a cut edge inside one lift of an alpha-chain: both ends in
    chain j and ``F0(v) + w == F0(u)``, so the level set would pass through
    that lifted component. ``adjacent`` counts cut edges with any endpoint in
    an alpha-chain; it is a resolution diagnostic, since neighbouring chains
    can leave no room for a cut between them.
    """
    cid = cg_chain_id(cg, g.n)
    edges = np.asarray(edges, dtype=np.int64)
    u, v = g.src[edges], g.dst[edges]
    adjacent = int(np.sum((cid[u] >= 0) | (cid[v] >= 0)))
    if cg.potential is None or not len(edges):
        return 0, adjacent
    w = g.alpha_weights(cg.alpha)[edges]
    F0 = cg.potential
    inside = (cid[u] >= 0) & (cid[u] == cid[v]) & (F0[v] + w == F0[u])
    return int(inside.sum()), adjacent


def extract_section(g: TransitionGraph, cg: AlphaChainGraph, potential, level: float | None = None,
                    polylines: bool = True) -> CrossSection:
    """Cut the potential at ``level + Z`` and verify the result."""
    alpha = cg.alpha
    t = default_level() if level is None else float(level)
    F = np.asarray(potential, dtype=np.int64)
    chain_vals = np.concatenate([F[c] for c in cg.chains]) if cg.chains else np.zeros(0, dtype=np.int64)
    if np.any(np.isclose(np.mod(chain_vals - t, 1.0), 0.0)):
        raise SectionError(f"level {t} hits a chain value")
    mult = cut_multiplicity(g, alpha, F, t)
    neg = int(np.sum(mult < 0))
    if neg:
        raise SectionError(f"{neg} edges crossed negatively: potential is not feasible")
    edges = np.flatnonzero(mult > 0)
    contacts, adjacent = rec_contacts(g, cg, edges)
    anchor = int(math.ceil(F[0] - t)) if g.n else 0
    _, reached, ok = _level_index(g, alpha, edges, mult[edges], 0, anchor)
    sec = CrossSection(alpha, t, edges, mult[edges], anchor, neg, contacts, ok and bool(reached.all()),
                       rec_adjacent=adjacent)
    if polylines and g.grid is not None and g.dimension == 2:
        from .polylines import trace_level_curves

        sec.polylines, sec.polyline_classes = trace_level_curves(g, alpha, F, t)
    return sec


def section_to_labeling(g: TransitionGraph, cg: AlphaChainGraph, section: CrossSection,
                        normalize: bool = True) -> Labeling:
    """Recover chain labels by integrating cut multiplicities from the anchor vertex."""
    if section.alpha.covector != cg.alpha.covector:
        raise SectionError("section class differs from the chain graph class")
    e = section.edges
    if rec_contacts(g, cg, e)[0]:
        raise SectionError("section cuts a lifted alpha-chain: it meets the alpha-recurrent set")
    idx, reached, ok = _level_index(g, cg.alpha, e, section.multiplicity, 0, section.anchor)
    if not ok:
        raise SectionError("cut data is not cohomologous to the chain graph class")
    if not all(reached[b] for b in cg.bases):
        raise SectionError("some chain is not connected to the anchor vertex")
    lab = Labeling(tuple(int(idx[b]) for b in cg.bases), cg.n_alpha)
    return lab.normalized() if normalize else lab


def cg_chain_id(cg: AlphaChainGraph, n: int) -> np.ndarray:
    out = np.full(n, -1, dtype=np.int64)
    for i, c in enumerate(cg.chains):
        out[c] = i
    return out


def cuts_every_cycle(g: TransitionGraph, section: CrossSection) -> bool:
    """True when removing the cut edges leaves the graph acyclic."""
    from .recurrence import recurrent_set

    keep = np.ones(g.n_edges, dtype=bool)
    keep[section.edges] = False
    sub = TransitionGraph(g.n, g.src[keep], g.dst[keep], g.winding[keep])
    return len(recurrent_set(sub)) == 0


# -- Fried sums ---------------------------------------------------------------

@dataclass
class FriedSum:
    labeling: Labeling | None
    feasible: bool
    violation: tuple | None = None

    def to_dict(self) -> dict:
        return {"labeling": None if self.labeling is None else self.labeling.to_list(),
                "feasible": self.feasible,
                "violation": None if self.violation is None else list(self.violation)}


def _chain_potential(cg: AlphaChainGraph, labeling: Labeling, n: int) -> np.ndarray:
    out = np.full(n, INF, dtype=np.int64)
    F0 = cg.potential
    for c, b, L in zip(cg.chains, cg.bases, labeling.labels):
        out[c] = L + F0[c] - F0[b]
    return out


def fried_sum(cg1: AlphaChainGraph, l1: Labeling, cg2: AlphaChainGraph, l2: Labeling,
              cg_sum: AlphaChainGraph) -> FriedSum:
    """Restrict both labelings to the chains of the sum class and add them."""
    n = len(cg1.potential)
    p1 = _chain_potential(cg1, l1, n)
    p2 = _chain_potential(cg2, l2, n)
    labels = []
    for b in cg_sum.bases:
        if p1[b] >= INF or p2[b] >= INF:
            raise SectionError(f"sum chain at vertex {int(b)} is not alpha-recurrent for both classes")
        labels.append(int(p1[b] + p2[b]))
    lab = Labeling(tuple(labels), cg_sum.n_alpha).normalized()
    bad = check_labeling(cg_sum, lab)
    if bad is not None:
        return FriedSum(lab, False, bad)
    return FriedSum(lab, True)


@dataclass
class FriedSumMap:
    images: dict
    injective: bool
    collisions: list
    infeasible: list

    def to_dict(self) -> dict:
        return {"injective": self.injective,
                "images": [{"pair": [list(a), list(b)], "sum": None if s is None else list(s)}
                           for (a, b), s in sorted(self.images.items())],
                "collisions": [[[list(a), list(b)] for a, b in grp] for grp in self.collisions],
                "infeasible": [[list(a), list(b)] for a, b in self.infeasible]}


def fried_sum_map(cg1, set1, cg2, set2, cg_sum) -> FriedSumMap:
    """Tabulate the sum map on two labeling sets and report collisions and failures."""
    images, infeasible = {}, []
    for l1, l2 in product(set1, set2):
        res = fried_sum(cg1, l1, cg2, l2, cg_sum)
        key = (l1.labels, l2.labels)
        images[key] = res.labeling.labels if res.feasible else None
        if not res.feasible:
            infeasible.append(key)
    groups = {}
    for key, img in images.items():
        if img is not None:
            groups.setdefault(img, []).append(key)
    collisions = [sorted(v) for _, v in sorted(groups.items()) if len(v) > 1]
    return FriedSumMap(images, not collisions, collisions, infeasible)
