"""Run configuration: a TOML file, command-line overrides, validation.

File layout (every key optional unless noted)::

    [flow]
    name = "reeb2d"            # builtin name or "table" (required)
    params = { k = 0.25 }
    shift = [0.0, 0.0]
    table = "field.npy"        # array of shape (n1, ..., nd, d) when name = "table"

    [grid]
    resolution = 64            # int or list, one entry per axis
    T = 0.25                   # defaults to the builtin's time step
    epsilon = "auto"           # "auto" = cell diameter
    samples_per_cell = 1
    steps = 16

    [analysis]
    commands = ["analyze"]
    alphas = ["0,1"]           # strings "a,b" or integer lists
    refinement_levels = 1
    window = 3
    levels = [0.5]
    max_sections = 3
    fan = 3                    # 2D direction fan radius
    fried_pairs = [["0,1", "0,1"]]

    [output]
    dir = "torsec-out"
    figures = true
    emit_graph = "graph.txt"
    workers = 4
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
import tomli

from .examples import CATALOG
from .flows import BUILTINS, CohomologyClass, FlowError, FlowSpec
from .graph import Grid

COMMANDS = ("analyze", "directions", "sections", "extract", "fried-sum")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    flow: FlowSpec
    resolution: tuple
    T: float
    epsilon: float | str = "auto"
    samples_per_cell: int = 1
    steps: int | None = None
    refinement_levels: int = 1
    alphas: list = field(default_factory=list)
    commands: list = field(default_factory=lambda: ["analyze"])
    window: int = 3
    levels: list = field(default_factory=lambda: [0.5])
    max_sections: int = 3
    fan: int = 3
    fried_pairs: list = field(default_factory=list)
    output_dir: str = "torsec-out"
    figures: bool = True
    emit_graph: str | None = None
    workers: int = 4

    @property
    def grid(self) -> Grid:
        return Grid(self.resolution)

    def resolved(self) -> "RunConfig":
        """Copy with epsilon resolved, then validated."""
        eps = self.grid.diameter if self.epsilon == "auto" else float(self.epsilon)
        cfg = replace(self, epsilon=eps)
        cfg.validate()
        return cfg

    def validate(self) -> None:
        d = self.flow.dimension
        if len(self.resolution) != d:
            raise ConfigError(f"grid has {len(self.resolution)} axes but the flow is {d}-dimensional")
        if not self.commands:
            raise ConfigError("at least one command is required")
        bad = [c for c in self.commands if c not in COMMANDS]
        if bad:
            raise ConfigError(f"unknown commands {bad}; choose from {list(COMMANDS)}")
        if not self.alphas and any(c not in ("directions", "fried-sum") for c in self.commands):
            raise ConfigError("no alpha classes given")
        for a in self.alphas:
            if a.dimension != d:
                raise ConfigError(f"class {a} has dimension {a.dimension}, flow has {d}")
        for a, b in self.fried_pairs:
            if a.dimension != d or b.dimension != d:
                raise ConfigError("fried-sum classes must match the flow dimension")
        if not self.T > 0:
            raise ConfigError("T must be positive")
        if self.refinement_levels < 1:
            raise ConfigError("refinement_levels must be >= 1")
        if self.window < 0 or self.max_sections < 0 or self.workers < 1:
            raise ConfigError("window and max_sections must be >= 0, workers >= 1")
        for t in self.levels:
            if float(t) == int(t):
                raise ConfigError(f"level {t} is an integer: it hits every chain value")

    def to_dict(self) -> dict:
        return {
            "flow": self.flow.to_dict(),
            "grid": list(self.resolution),
            "T": self.T,
            "epsilon": self.epsilon,
            "samples_per_cell": self.samples_per_cell,
            "steps": self.steps,
            "refinement_levels": self.refinement_levels,
            "alphas": [list(a.covector) for a in self.alphas],
            "commands": list(self.commands),
            "window": self.window,
            "levels": list(self.levels),
            "max_sections": self.max_sections,
            "fried_pairs": [[list(a.covector), list(b.covector)] for a, b in self.fried_pairs],
        }


def _alpha(value) -> CohomologyClass:
    try:
        if isinstance(value, str):
            return CohomologyClass.parse(value)
        return CohomologyClass(tuple(int(v) for v in value))
    except (FlowError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad class {value!r}") from exc


def _flow(section: dict, base: Path) -> FlowSpec:
    name = section.get("name")
    if not name:
        raise ConfigError("[flow] name is required")
    try:
        if name == "table":
            path = section.get("table")
            if not path:
                raise ConfigError("table flow needs [flow] table = <file.npy>")
            return FlowSpec.from_table(np.load(base / path), section.get("shift"))
        return FlowSpec.builtin(name, section.get("shift"), **section.get("params", {}))
    except (FlowError, OSError) as exc:
        raise ConfigError(str(exc)) from exc


def from_mapping(data: dict, base: Path = Path(".")) -> RunConfig:
    """Build a config from parsed TOML (unvalidated; call :meth:`RunConfig.resolved`)."""
    known = {"flow", "grid", "analysis", "output"}
    extra = set(data) - known
    if extra:
        raise ConfigError(f"unknown sections {sorted(extra)}")
    flow = _flow(data.get("flow", {}), base)
    grid = data.get("grid", {})
    builtin = BUILTINS.get(flow.name)
    res = grid.get("resolution", 32)
    res = tuple(res) if isinstance(res, list) else (int(res),) * flow.dimension
    ana = data.get("analysis", {})
    out = data.get("output", {})
    try:
        return RunConfig(
            flow=flow,
            resolution=tuple(int(r) for r in res),
            T=float(grid.get("T", builtin.T if builtin else 1.0)),
            epsilon=grid.get("epsilon", "auto"),
            samples_per_cell=int(grid.get("samples_per_cell", builtin.samples_per_cell if builtin else 1)),
            steps=grid.get("steps"),
            refinement_levels=int(ana.get("refinement_levels", 1)),
            alphas=[_alpha(a) for a in ana.get("alphas", [])],
            commands=list(ana.get("commands", ["analyze"])),
            window=int(ana.get("window", 3)),
            levels=[float(t) for t in ana.get("levels", [0.5])],
            max_sections=int(ana.get("max_sections", 3)),
            fan=int(ana.get("fan", 3)),
            fried_pairs=[(_alpha(a), _alpha(b)) for a, b in ana.get("fried_pairs", [])],
            output_dir=str(out.get("dir", "torsec-out")),
            figures=bool(out.get("figures", True)),
            emit_graph=out.get("emit_graph"),
            workers=int(out.get("workers", 4)),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def load(path) -> RunConfig:
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            data = tomli.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML in {path}: {exc}") from exc
    return from_mapping(data, path.parent)


def for_example(name: str) -> RunConfig:
    """Config reproducing a catalog fixture."""
    if name not in CATALOG:
        raise ConfigError(f"unknown example {name!r}; known: {sorted(CATALOG)}")
    ex = CATALOG[name]
    return RunConfig(flow=FlowSpec.builtin(ex.flow, **ex.params), resolution=(ex.grid,) * ex.dimension,
                     T=ex.T, samples_per_cell=ex.samples_per_cell, refinement_levels=ex.refinement_levels,
                     alphas=[CohomologyClass(a) for a in ex.alphas],
                     commands=["analyze", "directions", "sections", "extract"])
