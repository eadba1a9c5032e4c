import networkx as nx
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import A, constant_graph, fixture_graph, random_graph
from torsec import (TransitionGraph, build_chain_graph, chain_decomposition, enumerate_labelings,
                    extract_section, is_chain_recurrent, lyapunov_potential, recurrent_set, synthesize_potential)
from torsec.recurrence import scc_labels


def columns(g, vertices):
    return sorted(set(g.grid.unravel(vertices)[:, 0].tolist()))


def test_constant_all_recurrent_one_chain():
    g = constant_graph((0.0, 1.0), 8, 1.0)
    assert len(recurrent_set(g)) == g.n
    dec = chain_decomposition(g)
    assert len(dec.chains) == 1 and len(dec.chains[0]) == g.n
    assert is_chain_recurrent(g)


def test_positive_vertical_speed_all_recurrent():
    g = fixture_graph("figure1-phi2", 16)
    assert len(recurrent_set(g)) == g.n


@pytest.mark.parametrize("res", [16, 64])
def test_reeb2d_chains(res):
    g = fixture_graph("reeb2d", res)
    assert not is_chain_recurrent(g)
    dec = chain_decomposition(g)
    n = g.grid.shape[0]
    rep = [i for i, c in enumerate(dec.chains) if 0 in columns(g, c)]
    att = [i for i, c in enumerate(dec.chains) if n // 2 in columns(g, c)]
    assert rep == [0] and len(att) == 1
    att = att[0]
    # the repeller circle precedes every other chain, the attractor follows every other chain
    others = set(range(len(dec.chains))) - {0}
    assert {j for i, j in dec.order if i == 0} == others
    assert {i for i, j in dec.order if j == att} == set(range(len(dec.chains))) - {att}
    # the remaining chains are single columns next to one of the two circles (outer-approximation fringe)
    core = set(columns(g, dec.chains[0])) | set(columns(g, dec.chains[att]))
    for i, c in enumerate(dec.chains):
        if i in (0, att):
            continue
        cols = columns(g, c)
        assert len(cols) == 1
        assert min(min(abs(cols[0] - k) % n, n - abs(cols[0] - k) % n) for k in core) <= n // 16 + 1


def test_slowed_vertical_chain_recurrent():
    g = fixture_graph("slowed-vertical")
    assert is_chain_recurrent(g)
    dec = chain_decomposition(g)
    assert len(dec.chains) == 1 and len(dec.chains[0]) == g.n


@pytest.mark.parametrize("name", ["reeb2d", "slowed-vertical", "figure1-phi1", "psi1"])
def test_lyapunov_monotone(name):
    g = fixture_graph(name, 16)
    V = lyapunov_potential(g)
    comp = scc_labels(g.n, g.src, g.dst)
    same = comp[g.src] == comp[g.dst]
    assert np.all(V[g.src[same]] == V[g.dst[same]])
    assert np.all(V[g.src[~same]] > V[g.dst[~same]])


def test_reeb2d_lyapunov_repeller_above_attractor():
    g = fixture_graph("reeb2d", 16)
    V = lyapunov_potential(g)
    dec = chain_decomposition(g)
    att = [i for i, c in enumerate(dec.chains) if 8 in columns(g, c)][0]
    assert V[dec.chains[0][0]] > V[dec.chains[att][0]]
    nonrec = dec.nonrecurrent
    assert np.all(V[nonrec] < V[dec.chains[0][0]]) and np.all(V[nonrec] > V[dec.chains[att][0]])


def test_lyapunov_dag_strictly_decreasing():
    g = TransitionGraph.from_edges(4, [(0, 1, (0, 0)), (1, 2, (0, 0)), (0, 2, (1, 0)), (2, 3, (0, 0))])
    V = lyapunov_potential(g)
    assert np.all(V[g.src] > V[g.dst])


def test_single_chain_constant_potential():
    g = constant_graph((0.0, 1.0), 8, 1.0)
    assert len(set(lyapunov_potential(g).tolist())) == 1


@given(st.integers(0, 100_000))
def test_recurrence_cross_check(seed):
    g = random_graph(np.random.default_rng(seed), n_max=12, p=0.15)
    nxg = nx.DiGraph()
    nxg.add_nodes_from(range(g.n))
    nxg.add_edges_from(zip(g.src.tolist(), g.dst.tolist()))
    on_cycle = set()
    for cyc in nx.simple_cycles(nxg):
        on_cycle.update(cyc)
    assert set(recurrent_set(g).tolist()) == on_cycle
    dec = chain_decomposition(g)
    assert set(np.concatenate(dec.chains).tolist() if dec.chains else []) == on_cycle
    sccs = [sorted(c) for c in nx.strongly_connected_components(nxg) if set(c) & on_cycle]
    assert sorted(sorted(c.tolist()) for c in dec.chains) == sorted(sccs)
    # Conley order equals reachability between distinct chains
    for i, ci in enumerate(dec.chains):
        reach = nx.descendants(nxg, int(ci[0]))
        for j, cj in enumerate(dec.chains):
            if i != j:
                assert ((i, j) in dec.order) == (int(cj[0]) in reach)
    assert is_chain_recurrent(g) == (len(on_cycle) == g.n and nx.is_strongly_connected(nxg))


def test_chain_recurrence_blocks_null_class_sections():
    # chain recurrent: no nonconstant labeling for alpha = 0, hence no null-class section
    g = fixture_graph("slowed-vertical", 16)
    cg = build_chain_graph(g, A(0, 0))
    assert cg.n_chains == 1 and len(enumerate_labelings(cg, window=3, graph_level=True)) == 0
    # not chain recurrent: null-class sections exist and are nonempty cuts
    g = fixture_graph("reeb2d", 16)
    cg = build_chain_graph(g, A(0, 0))
    labs = enumerate_labelings(cg, window=1, graph_level=True).labelings
    assert labs
    sec = extract_section(g, cg, synthesize_potential(g, cg, labs[0]))
    assert len(sec.edges) > 0 and sec.negative_crossings == 0 and sec.class_verified


def test_chain_decomposition_json():
    d = chain_decomposition(fixture_graph("reeb2d", 16)).to_dict()
    assert set(d) == {"chains", "order", "nonrecurrent_count"}
