"""Compiled graph kernels over CSR adjacency (indptr, dst, weight).

All kernels take integer weights unless noted and treat parallel edges as
distinct. Vertices are 0..n-1; edge ids index into ``dst``/``weight``.
"""

import heapq

import numpy as np
from numba import njit

INF = np.iinfo(np.int64).max // 4


@njit(cache=True, nogil=True)
def _parent_cycle(n, parent_edge, src_of_edge):
    # colour walk over the predecessor forest; returns edge ids of one cycle or empty
    state = np.zeros(n, dtype=np.int8)
    stamp = np.full(n, -1, dtype=np.int64)
    for start in range(n):
        if state[start] != 0:
            continue
        v = start
        while v != -1 and state[v] == 0:
            state[v] = 1
            stamp[v] = start
            e = parent_edge[v]
            v = -1 if e < 0 else src_of_edge[e]
        if v != -1 and state[v] == 1 and stamp[v] == start:
            # v is on a cycle of the predecessor graph
            edges = []
            u = v
            while True:
                e = parent_edge[u]
                edges.append(e)
                u = src_of_edge[e]
                if u == v:
                    break
            out = np.empty(len(edges), dtype=np.int64)
            for i in range(len(edges)):
                out[i] = edges[len(edges) - 1 - i]
            return out
        v = start
        while v != -1 and state[v] == 1:
            state[v] = 2
            e = parent_edge[v]
            v = -1 if e < 0 else src_of_edge[e]
    return np.empty(0, dtype=np.int64)


@njit(cache=True, nogil=True)
def bellman_ford(n, indptr, dst, weight, src_of_edge):
    """FIFO Bellman-Ford from a virtual source joined to every vertex by 0-edges.

    Returns (dist, cycle_edges). ``dist`` satisfies dist[v] <= dist[u] + w for
    every edge when ``cycle_edges`` is empty; otherwise ``cycle_edges`` lists the
    edge ids of a negative cycle in traversal order.
    """
    dist = np.zeros(n, dtype=np.int64)
    parent_edge = np.full(n, -1, dtype=np.int64)
    in_queue = np.ones(n, dtype=np.bool_)
    queue = np.arange(n).astype(np.int64)
    rounds = 0
    while queue.size > 0:
        rounds += 1
        nxt = []
        for qi in range(queue.size):
            u = queue[qi]
            in_queue[u] = False
            du = dist[u]
            for e in range(indptr[u], indptr[u + 1]):
                v = dst[e]
                nd = du + weight[e]
                if nd < dist[v]:
                    dist[v] = nd
                    parent_edge[v] = e
                    if not in_queue[v]:
                        in_queue[v] = True
                        nxt.append(v)
        cyc = _parent_cycle(n, parent_edge, src_of_edge)
        if cyc.size > 0:
            return dist, cyc
        if rounds > n + 1:
            # unreachable in exact arithmetic: a cycle must show up in the forest
            break
        queue = np.empty(len(nxt), dtype=np.int64)
        for i in range(len(nxt)):
            queue[i] = nxt[i]
    return dist, np.empty(0, dtype=np.int64)


@njit(cache=True, nogil=True)
def dijkstra(n, indptr, dst, weight, init):
    """Multi-source Dijkstra on non-negative weights.

    ``init[v]`` is the starting key of v (INF for non-sources). Returns
    (dist, parent_edge).
    """
    dist = init.copy()
    parent_edge = np.full(n, -1, dtype=np.int64)
    done = np.zeros(n, dtype=np.bool_)
    heap = [(np.int64(0), np.int64(0))]
    heap.pop()
    for v in range(n):
        if dist[v] < INF:
            heap.append((dist[v], np.int64(v)))
    heapq.heapify(heap)
    while len(heap) > 0:
        d, u = heapq.heappop(heap)
        if done[u] or d > dist[u]:
            continue
        done[u] = True
        for e in range(indptr[u], indptr[u + 1]):
            v = dst[e]
            nd = d + weight[e]
            if nd < dist[v]:
                dist[v] = nd
                parent_edge[v] = e
                heapq.heappush(heap, (nd, np.int64(v)))
    return dist, parent_edge


@njit(cache=True, nogil=True)
def howard_min_mean(n, indptr, dst, weight, active):
    """Howard policy iteration for the minimum cycle mean (float weights).

    Only vertices with ``active`` set are used, and every active vertex must
    have an out-edge to an active vertex (true on a union of cyclic SCCs
    restricted to their internal edges). Returns (mean, cycle_edges) for the
    best policy cycle found.
    """
    tol = 1e-9
    policy = np.full(n, -1, dtype=np.int64)
    for u in range(n):
        if not active[u]:
            continue
        best = np.inf
        for e in range(indptr[u], indptr[u + 1]):
            if active[dst[e]] and weight[e] < best:
                best = weight[e]
                policy[u] = e
    eta = np.zeros(n)
    x = np.zeros(n)
    best_cycle = np.empty(0, dtype=np.int64)
    best_mean = np.inf
    for _ in range(10 * n + 100):
        # value determination on the functional graph of the policy
        state = np.zeros(n, dtype=np.int8)
        for start in range(n):
            if not active[start] or state[start] != 0:
                continue
            path = []
            v = start
            while state[v] == 0:
                state[v] = 1
                path.append(v)
                v = dst[policy[v]]
            if state[v] == 1:
                # new cycle rooted at v
                total = 0.0
                length = 0
                u = v
                while True:
                    total += weight[policy[u]]
                    length += 1
                    u = dst[policy[u]]
                    if u == v:
                        break
                mean = total / length
                if mean < best_mean - tol:
                    best_mean = mean
                    cyc = np.empty(length, dtype=np.int64)
                    u = v
                    for i in range(length):
                        cyc[i] = policy[u]
                        u = dst[policy[u]]
                    best_cycle = cyc
                eta[v] = mean
                x[v] = 0.0
                state[v] = 2
                # walk the cycle backwards by following forward order
                order = []
                u = dst[policy[v]]
                while u != v:
                    order.append(u)
                    u = dst[policy[u]]
                for i in range(len(order) - 1, -1, -1):
                    w = order[i]
                    eta[w] = mean
                    x[w] = weight[policy[w]] - mean + x[dst[policy[w]]]
                    state[w] = 2
            for i in range(len(path) - 1, -1, -1):
                w = path[i]
                if state[w] == 2:
                    continue
                s = dst[policy[w]]
                eta[w] = eta[s]
                x[w] = weight[policy[w]] - eta[s] + x[s]
                state[w] = 2
        changed = False
        for u in range(n):
            if not active[u]:
                continue
            for e in range(indptr[u], indptr[u + 1]):
                v = dst[e]
                if active[v] and eta[v] < eta[u] - tol:
                    eta[u] = eta[v]
                    policy[u] = e
                    changed = True
        if not changed:
            for u in range(n):
                if not active[u]:
                    continue
                for e in range(indptr[u], indptr[u + 1]):
                    v = dst[e]
                    if active[v] and abs(eta[v] - eta[u]) <= tol:
                        val = weight[e] - eta[u] + x[v]
                        if val < x[u] - tol:
                            x[u] = val
                            policy[u] = e
                            changed = True
        if not changed:
            break
    return best_mean, best_cycle


@njit(cache=True, nogil=True)
def bfs_edges(n, indptr, dst, start, allowed):
    """Unweighted BFS restricted to ``allowed`` vertices; returns parent_edge."""
    parent_edge = np.full(n, -1, dtype=np.int64)
    seen = np.zeros(n, dtype=np.bool_)
    seen[start] = True
    queue = np.empty(n, dtype=np.int64)
    head = 0
    tail = 0
    queue[tail] = start
    tail += 1
    while head < tail:
        u = queue[head]
        head += 1
        for e in range(indptr[u], indptr[u + 1]):
            v = dst[e]
            if allowed[v] and not seen[v]:
                seen[v] = True
                parent_edge[v] = e
                queue[tail] = v
                tail += 1
    return parent_edge


@njit(cache=True, nogil=True)
def bfs_integrate(n, indptr, dst, step, start, start_value):
    """BFS from ``start`` setting value(v) = value(u) + step[e] on discovery edges."""
    value = np.zeros(n, dtype=np.int64)
    seen = np.zeros(n, dtype=np.bool_)
    seen[start] = True
    value[start] = start_value
    queue = np.empty(n, dtype=np.int64)
    head = 0
    tail = 1
    queue[0] = start
    while head < tail:
        u = queue[head]
        head += 1
        for e in range(indptr[u], indptr[u + 1]):
            v = dst[e]
            if not seen[v]:
                seen[v] = True
                value[v] = value[u] + step[e]
                queue[tail] = v
                tail += 1
    return value, seen
