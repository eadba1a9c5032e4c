"""Flows on flat tori T^d (d = 2, 3) and their integration with tracked lifts.

A :class:`FlowSpec` names a builtin vector field (plus parameters) or carries a
periodic grid-sampled table. Fields are evaluated vectorised on ``(m, d)``
arrays of points. :func:`integrate_T` uses fixed-step classical RK4 in the
universal cover, so the returned lift displacement is the un-wrapped motion
from which integer windings are later read off.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from functools import reduce
from typing import Callable

import numpy as np


class FlowError(ValueError):
    """Unknown builtin, bad parameter, or non-finite field value."""


def torus_distance(points, centre):
    """Euclidean distance on the unit torus from each row of ``points`` to ``centre``."""
    diff = np.asarray(points, dtype=float) - np.asarray(centre, dtype=float)
    diff -= np.round(diff)
    return np.sqrt(np.sum(diff * diff, axis=-1))


def slowdown(points, zero, rate, exponent):
    """Factor min(1, (rate * dist(x, zero))**exponent): vanishes exactly at ``zero``."""
    return np.minimum(1.0, (rate * torus_distance(points, zero)) ** exponent)


# -- builtin fields ---------------------------------------------------------

def _constant(x, p):
    v = np.array(p["drift"], dtype=float)
    return np.broadcast_to(v, x.shape).copy()


def _reeb2d(x, p):
    out = np.empty_like(x)
    out[:, 0] = p["k"] * np.sin(2 * np.pi * x[:, 0])
    out[:, 1] = 1.0
    return out


def _slowed_vertical(x, p):
    lam = slowdown(x, (0.0, 0.0), p["rate"], p["exponent"])
    lam = lam * slowdown(x, (0.5, 0.0), p["rate"], p["exponent"])
    out = np.zeros_like(x)
    out[:, 1] = lam
    return out


def _psi1(x, p):
    lam = slowdown(x, p["p0"], p["rate"], p["exponent"])
    return np.outer(lam, [p["a"], p["b"]])


def _psi2(x, p):
    # layers z=0 (psi1 copy), z=1/2 (psi1 with drift (1,0)), z=1/4,3/4 (linear (1,0));
    # z-motion leaves z in {0, 1/2} and accumulates on z in {1/4, 3/4}
    z = x[:, 2]
    c4 = np.cos(4 * np.pi * z)
    lower = np.cos(2 * np.pi * z) > 0
    w0 = np.where(lower, np.maximum(c4, 0.0), 0.0)
    w_half = np.where(lower, 0.0, np.maximum(c4, 0.0))
    w_lin = np.maximum(-c4, 0.0)
    lam = slowdown(x[:, :2], p["p0"], p["rate"], p["exponent"])
    out = np.empty_like(x)
    out[:, 0] = w0 * p["a"] * lam + w_half * lam + w_lin
    out[:, 1] = w0 * p["b"] * lam
    out[:, 2] = p["kz"] * np.sin(4 * np.pi * z)
    return out


def _phi1(x, p):
    out = np.empty_like(x)
    out[:, 0] = -p["k"] * np.sin(2 * np.pi * x[:, 0])
    out[:, 1] = 1.0
    return out


def _phi2(x, p):
    out = np.empty_like(x)
    out[:, 0] = p["k"] * np.sin(np.pi * x[:, 0]) ** 2
    out[:, 1] = 1.0
    return out


@dataclass(frozen=True)
class Builtin:
    name: str
    dimension: int
    defaults: dict
    func: Callable
    check: Callable[[dict], str | None] = lambda p: None
    T: float = 0.25
    description: str = ""
    samples_per_cell: int = 1


def _positive(*keys):
    def check(p):
        for k in keys:
            if not p[k] > 0:
                return f"parameter {k!r} must be positive (got {p[k]})"
        return None
    return check


BUILTINS = {
    b.name: b
    for b in [
        Builtin("constant", 2, {"drift": (0.0, 1.0)}, _constant, T=1.0,
                description="constant drift field"),
        Builtin("reeb2d", 2, {"k": 0.25}, _reeb2d, T=0.25,
                description="(k sin 2 pi x, 1): repelling circle x=0, attracting x=1/2"),
        Builtin("slowed-vertical", 2, {"rate": 12.0, "exponent": 2.0}, _slowed_vertical,
                _positive("rate", "exponent"), T=0.25, samples_per_cell=2,
                description="vertical flow slowed to fixed points at (0,0) and (1/2,0)"),
        Builtin("psi1", 2, {"a": -1.0, "b": 1.41421356, "rate": 12.0, "exponent": 4.0,
                            "p0": (0.0, 0.0)}, _psi1, _positive("rate", "exponent"), T=0.25,
                description="(a, b) * lambda with lambda vanishing only at p0"),
        Builtin("psi2", 3, {"a": -1.0, "b": 1.41421356, "rate": 4.0, "exponent": 4.0,
                            "p0": (0.0, 0.0), "kz": 0.5}, _psi2,
                _positive("rate", "exponent", "kz"), T=0.25,
                description="T^3 layered flow: psi1 copies at z=0, 1/2; linear layers at z=1/4, 3/4"),
        Builtin("figure1-phi1", 2, {"k": 0.5}, _phi1, T=0.3,
                description="attracting circle x=0 and repelling circle x=1/2, both drifting +dy"),
        Builtin("figure1-phi2", 2, {"k": 1.0}, _phi2, T=0.25,
                description="semi-stable invariant circle x=0; complement drifts in +dx"),
    ]
}


def _freeze(value):
    if isinstance(value, (list, tuple, np.ndarray)):
        return tuple(float(v) for v in value)
    return float(value)


@dataclass(frozen=True)
class FlowSpec:
    """A vector field on the unit torus.

    ``name`` is a builtin identifier or ``"table"``. Parameters override the
    builtin defaults; ``shift`` translates the field, v'(x) = v(x - shift).
    A table field carries ``table`` with shape ``(n_1, ..., n_d, d)`` sampled
    at grid nodes ``i / n`` and is interpolated multilinearly.
    """

    name: str
    params: tuple = ()
    shift: tuple = ()
    table: np.ndarray | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.name == "table":
            if self.table is None:
                raise FlowError("table flow needs a sampled table")
            tab = np.asarray(self.table, dtype=float)
            if tab.ndim not in (3, 4) or tab.shape[-1] != tab.ndim - 1:
                raise FlowError(f"table must have shape (n1, ..., nd, d); got {tab.shape}")
            object.__setattr__(self, "table", tab)
        elif self.name not in BUILTINS:
            raise FlowError(f"unknown builtin flow {self.name!r}; known: {sorted(BUILTINS)}")
        else:
            b = BUILTINS[self.name]
            unknown = set(dict(self.params)) - set(b.defaults)
            if unknown:
                raise FlowError(f"unknown parameters for {self.name}: {sorted(unknown)}")
            msg = b.check(self.resolved_params())
            if msg:
                raise FlowError(msg)
        if self.shift and len(self.shift) != self.dimension:
            raise FlowError("shift must have one entry per dimension")

    @classmethod
    def builtin(cls, name, shift=None, **params):
        frozen = tuple(sorted((k, _freeze(v)) for k, v in params.items()))
        return cls(name, frozen, tuple(float(s) for s in shift) if shift is not None else ())

    @classmethod
    def from_table(cls, table, shift=None):
        return cls("table", (), tuple(shift) if shift is not None else (), np.asarray(table, dtype=float))

    def resolved_params(self) -> dict:
        if self.name == "table":
            return {}
        p = dict(BUILTINS[self.name].defaults)
        p.update(dict(self.params))
        return p

    @property
    def dimension(self) -> int:
        if self.name == "table":
            return self.table.ndim - 1
        if self.name == "constant":
            return len(self.resolved_params()["drift"])
        return BUILTINS[self.name].dimension

    def to_dict(self) -> dict:
        d = {"name": self.name, "params": {k: list(v) if isinstance(v, tuple) else v
                                           for k, v in sorted(self.resolved_params().items())}}
        if self.shift:
            d["shift"] = list(self.shift)
        if self.table is not None:
            d["table_shape"] = list(self.table.shape)
        return d

    def digest(self) -> str:
        h = hashlib.sha256(json.dumps(self.to_dict(), sort_keys=True).encode())
        if self.table is not None:
            h.update(np.ascontiguousarray(self.table).tobytes())
        return h.hexdigest()[:16]


def _interpolate(table, x):
    d = table.ndim - 1
    shape = np.array(table.shape[:d])
    g = x * shape
    base = np.floor(g).astype(np.int64)
    frac = g - base
    out = np.zeros((x.shape[0], d))
    for corner in range(2 ** d):
        bits = [(corner >> i) & 1 for i in range(d)]
        weight = np.ones(x.shape[0])
        idx = []
        for i, bit in enumerate(bits):
            weight *= frac[:, i] if bit else 1.0 - frac[:, i]
            idx.append((base[:, i] + bit) % shape[i])
        out += weight[:, None] * table[tuple(idx)]
    return out


def _field(spec: FlowSpec, x: np.ndarray) -> np.ndarray:
    x = np.mod(x, 1.0)
    if spec.shift:
        x = np.mod(x - np.asarray(spec.shift), 1.0)
    if spec.name == "table":
        return _interpolate(spec.table, x)
    return BUILTINS[spec.name].func(x, spec.resolved_params())


def evaluate(spec: FlowSpec, point) -> np.ndarray:
    """Field value at ``point`` (one point of shape (d,) or many of shape (m, d))."""
    x = np.asarray(point, dtype=float)
    single = x.ndim == 1
    x = np.atleast_2d(x)
    if x.shape[1] != spec.dimension:
        raise FlowError(f"point dimension {x.shape[1]} != flow dimension {spec.dimension}")
    v = _field(spec, x)
    if not np.all(np.isfinite(v)):
        raise FlowError("non-finite field value")
    return v[0] if single else v


def integrate_T(spec: FlowSpec, point, T: float, steps: int):
    """Flow ``point`` for time ``T`` with ``steps`` RK4 steps.

    Returns ``(endpoint, lift_displacement)``; the endpoint is reduced mod 1 and
    the displacement is measured in the universal cover. Accepts one point or
    an ``(m, d)`` batch.
    """
    if not T > 0:
        raise FlowError("T must be positive")
    if steps < 1:
        raise FlowError("steps must be >= 1")
    x0 = np.asarray(point, dtype=float)
    single = x0.ndim == 1
    x = np.atleast_2d(x0).copy()
    start = x.copy()
    h = T / steps
    for _ in range(steps):
        k1 = _field(spec, x)
        k2 = _field(spec, x + 0.5 * h * k1)
        k3 = _field(spec, x + 0.5 * h * k2)
        k4 = _field(spec, x + h * k3)
        x = x + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    if not np.all(np.isfinite(x)):
        raise FlowError("non-finite field value during integration")
    disp = x - start
    end = np.mod(start + disp, 1.0)
    end[end >= 1.0] = 0.0
    if single:
        return end[0], disp[0]
    return end, disp


# -- cohomology -------------------------------------------------------------

@dataclass(frozen=True)
class CohomologyClass:
    """Integer covector acting on winding vectors; ``n_alpha`` is its divisibility."""

    covector: tuple

    def __post_init__(self):
        object.__setattr__(self, "covector", tuple(int(c) for c in self.covector))

    @classmethod
    def parse(cls, text: str) -> "CohomologyClass":
        try:
            return cls(tuple(int(t) for t in text.replace(" ", "").split(",")))
        except ValueError as exc:
            raise FlowError(f"bad covector {text!r}") from exc

    @property
    def dimension(self) -> int:
        return len(self.covector)

    @property
    def n_alpha(self) -> int:
        return reduce(math.gcd, (abs(c) for c in self.covector), 0)

    @property
    def is_zero(self) -> bool:
        return self.n_alpha == 0

    @property
    def primitive(self) -> tuple:
        n = self.n_alpha
        return self.covector if n == 0 else tuple(c // n for c in self.covector)

    def __call__(self, winding) -> np.ndarray:
        return np.asarray(winding, dtype=np.int64) @ np.asarray(self.covector, dtype=np.int64)

    def __add__(self, other):
        return CohomologyClass(tuple(a + b for a, b in zip(self.covector, other.covector)))

    def __neg__(self):
        return CohomologyClass(tuple(-a for a in self.covector))

    def scaled(self, k: int) -> "CohomologyClass":
        return CohomologyClass(tuple(k * a for a in self.covector))

    def __str__(self):
        return ",".join(str(c) for c in self.covector)
