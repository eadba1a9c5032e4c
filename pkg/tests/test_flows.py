import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from torsec import BUILTINS, CohomologyClass, FlowError, FlowSpec, evaluate, integrate_T

coord = st.floats(0.0, 1.0, allow_nan=False, exclude_max=True)
NAMES_2D = [n for n, b in BUILTINS.items() if b.dimension == 2]


def test_spec_examples():
    assert np.allclose(evaluate(FlowSpec.builtin("constant", drift=(0, 1)), (0.3, 0.7)), (0, 1))
    assert np.allclose(evaluate(FlowSpec.builtin("reeb2d", k=0.25), (0.25, 0.0)), (0.25, 1))
    assert np.allclose(evaluate(FlowSpec.builtin("psi1", exponent=4.0), (0.0, 0.0)), (0, 0))


def test_integrate_constant():
    spec = FlowSpec.builtin("constant", drift=(0, 1))
    end, lift = integrate_T(spec, (0.5, 0.5), 1.0, 8)
    assert np.allclose(end, (0.5, 0.5)) and np.allclose(lift, (0, 1))
    end, lift = integrate_T(spec, (0.5, 0.5), 0.25, 8)
    assert np.allclose(end, (0.5, 0.75)) and np.allclose(lift, (0, 0.25))


def test_reeb_invariant_circle():
    spec = FlowSpec.builtin("reeb2d", k=0.25)
    for steps in (16, 64, 256):
        end, lift = integrate_T(spec, (0.5, 0.0), 1.0, steps)
        assert end[0] == 0.5
        assert np.allclose(lift, (0, 1))


def test_slowed_vertical_zeros():
    spec = FlowSpec.builtin("slowed-vertical")
    v = evaluate(spec, np.array([[0.0, 0.0], [0.5, 0.0], [0.25, 0.5], [0.1, 0.9]]))
    assert np.all(v[:, 0] == 0)
    assert v[0, 1] == 0 and v[1, 1] == 0
    assert np.all(v[2:, 1] > 0)


def test_psi1_vanishes_only_at_p0():
    spec = FlowSpec.builtin("psi1")
    pts = np.random.default_rng(0).random((200, 2)) * 0.98 + 0.01
    assert np.all(np.linalg.norm(evaluate(spec, pts), axis=1) > 0)


def test_unknown_builtin_and_parameter():
    with pytest.raises(FlowError):
        FlowSpec.builtin("nope")
    with pytest.raises(FlowError):
        FlowSpec.builtin("reeb2d", q=1.0)
    with pytest.raises(FlowError):
        FlowSpec.builtin("psi1", exponent=-1.0)


def test_table_flow_matches_constant():
    table = np.zeros((4, 4, 2))
    table[..., 1] = 1.0
    spec = FlowSpec.from_table(table)
    assert np.allclose(evaluate(spec, (0.37, 0.81)), (0, 1))
    with pytest.raises(FlowError):
        FlowSpec.from_table(np.zeros((4, 4, 3)))


def test_cohomology_class():
    a = CohomologyClass((4, -6))
    assert a.n_alpha == 2 and a.primitive == (2, -3)
    assert tuple(a.n_alpha * c for c in a.primitive) == a.covector
    assert CohomologyClass((0, 0)).n_alpha == 0 and CohomologyClass((0, 0)).is_zero
    assert CohomologyClass.parse("1, -2") == CohomologyClass((1, -2))
    assert (a + CohomologyClass((1, 1))).covector == (5, -5)
    with pytest.raises(FlowError):
        CohomologyClass.parse("1,x")


def test_digest_stable_and_param_sensitive():
    a = FlowSpec.builtin("reeb2d", k=0.25)
    assert a.digest() == FlowSpec.builtin("reeb2d").digest()
    assert a.digest() != FlowSpec.builtin("reeb2d", k=0.3).digest()


@pytest.mark.parametrize("name", sorted(BUILTINS))
@given(data=st.data())
def test_periodicity(name, data):
    spec = FlowSpec.builtin(name)
    d = spec.dimension
    x = np.array([data.draw(coord) for _ in range(d)])
    e = np.zeros(d)
    e[data.draw(st.integers(0, d - 1))] = data.draw(st.sampled_from([-1.0, 1.0]))
    assert np.allclose(evaluate(spec, x), evaluate(spec, x + e), atol=1e-12)
    end0, lift0 = integrate_T(spec, x, 0.1, 4)
    end1, lift1 = integrate_T(spec, x + e, 0.1, 4)
    assert np.allclose(lift0, lift1, atol=1e-9)
    diff = (end0 - end1 + 0.5) % 1.0 - 0.5
    assert np.allclose(diff, 0, atol=1e-9)


@pytest.mark.parametrize("name", NAMES_2D)
@given(x=coord, y=coord)
def test_flow_composition(name, x, y):
    spec = FlowSpec.builtin(name)
    p = np.array([x, y])
    _, full = integrate_T(spec, p, 0.2, 64)
    mid, half1 = integrate_T(spec, p, 0.1, 32)
    _, half2 = integrate_T(spec, mid, 0.1, 32)
    assert np.allclose(full, half1 + half2, atol=1e-6)


@pytest.mark.parametrize("name", ["constant", "reeb2d", "figure1-phi1", "figure1-phi2"])
@given(x=coord, y=coord)
def test_reversal(name, x, y):
    spec = FlowSpec.builtin(name)
    p = np.array([x, y])
    end, lift = integrate_T(spec, p, 0.25, 64)
    # negated field as a sampled table would add interpolation error; integrate backward by hand
    back = end.copy()
    h = 0.25 / 64
    for _ in range(64):
        k1 = -evaluate(spec, back[None])[0]
        k2 = -evaluate(spec, (back + 0.5 * h * k1)[None])[0]
        k3 = -evaluate(spec, (back + 0.5 * h * k2)[None])[0]
        k4 = -evaluate(spec, (back + h * k3)[None])[0]
        back = back + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    diff = (back - p + 0.5) % 1.0 - 0.5
    assert np.allclose(diff, 0, atol=1e-6)


def test_integration_error_shrinks_with_steps():
    spec = FlowSpec.builtin("reeb2d")
    p = np.array([0.2, 0.1])
    ref = integrate_T(spec, p, 0.25, 1024)[1]
    errs = [np.abs(integrate_T(spec, p, 0.25, s)[1] - ref).max() for s in (2, 4, 8)]
    assert errs[0] > errs[1] > errs[2]
    assert math.isfinite(errs[2])
