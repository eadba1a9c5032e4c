import sys
import functools

import numpy as np
import pytest
from hypothesis import settings

from torsec import CohomologyClass, FlowSpec, Grid, build
from torsec.config import for_example

settings.register_profile("torsec", deadline=None, max_examples=40, derandomize=True)
settings.load_profile("torsec")


@functools.lru_cache(maxsize=None)
def fixture_graph(name, res=None):
    """Transition graph of a catalog fixture, optionally at another resolution."""
    cfg = for_example(name)
    grid = cfg.grid if res is None else Grid((res,) * cfg.flow.dimension)
    return build(cfg.flow, grid, cfg.T, grid.diameter, cfg.samples_per_cell)


@functools.lru_cache(maxsize=None)
def constant_graph(drift=(0.0, 1.0), res=8, T=1.0):
    spec = FlowSpec.builtin("constant", drift=drift)
    grid = Grid((res,) * len(drift))
    return build(spec, grid, T, grid.diameter)


def A(*c):
    return CohomologyClass(tuple(c))


@pytest.fixture(scope="session", autouse=True)
def _warm_kernels():
    # compile the numba kernels once so timing checks measure the analysis
    from torsec import analyze, build_chain_graph, direction_support

    g = constant_graph((0.0, 1.0), 4)
    analyze(g, A(0, 1))
    direction_support(g, A(0, 1))
    build_chain_graph(g, A(0, 1))
    yield


def random_graph(rng, n_max=12, d=2, p=None, wmax=2):
    """Random multigraph with windings in {-wmax..wmax}^d; every vertex has an out-edge."""
    from torsec import TransitionGraph

    n = int(rng.integers(1, n_max + 1))
    p = rng.uniform(0.1, 0.4) if p is None else p
    src, dst, wind = [], [], []
    for u in range(n):
        for v in range(n):
            if rng.random() < p:
                src.append(u)
                dst.append(v)
                wind.append(rng.integers(-wmax, wmax + 1, size=d))
        if u not in src:
            src.append(u)
            dst.append(int(rng.integers(n)))
            wind.append(rng.integers(-wmax, wmax + 1, size=d))
    return TransitionGraph(n, np.array(src), np.array(dst), np.array(wind).reshape(-1, d))


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        ok, detail = results[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
