"""Named fixtures: builtin flows with the resolution, time step and classes they ship with."""

from __future__ import annotations

from dataclasses import dataclass, field

from .flows import BUILTINS


@dataclass(frozen=True)
class Example:
    name: str
    flow: str
    locus: str
    summary: str
    grid: int
    alphas: tuple
    refinement_levels: int = 1
    params: dict = field(default_factory=dict)

    @property
    def T(self) -> float:
        return BUILTINS[self.flow].T

    @property
    def samples_per_cell(self) -> int:
        return BUILTINS[self.flow].samples_per_cell

    @property
    def dimension(self) -> int:
        return BUILTINS[self.flow].dimension

    def to_dict(self) -> dict:
        return {"name": self.name, "flow": self.flow, "locus": self.locus, "summary": self.summary,
                "grid": [self.grid] * self.dimension, "T": self.T, "samples_per_cell": self.samples_per_cell,
                "alphas": [list(a) for a in self.alphas], "refinement_levels": self.refinement_levels}


CATALOG = {
    e.name: e
    for e in [
        Example("constant", "constant", "Theorem A sign rule",
                "unit vertical drift; every cycle climbs in y", 8, ((0, 1), (0, -1), (1, 0))),
        Example("reeb2d", "reeb2d", "Example 4.2",
                "one repelling and one attracting vertical circle; unique section of class (0,1)",
                64, ((0, 1), (0, 0))),
        Example("slowed-vertical", "slowed-vertical", "Example 4.3",
                "chain recurrent vertical flow with two fixed points; infinitely many section classes",
                64, ((0, 1), (0, 2)), refinement_levels=3),
        Example("psi1", "psi1", "§6.3",
                "irrational drift stopped at one point; dx has no section although alpha(D) >= 0",
                64, ((1, 0), (-1, 0)), refinement_levels=3),
        Example("psi2", "psi2", "§6.3",
                "layered flow on the 3-torus built from copies of psi1 and linear layers",
                24, ((1, 0, 0), (-1, 0, 0))),
        Example("figure1-phi1", "figure1-phi1", "Figure 1",
                "invariant circles drifting +dy; both dx and -dx admit sections",
                64, ((1, 0), (-1, 0))),
        Example("figure1-phi2", "figure1-phi2", "Figure 1",
                "semi-stable invariant circle, +dx drift elsewhere; -dx admits no section",
                64, ((1, 0), (-1, 0))),
    ]
}


def list_examples() -> list:
    return [CATALOG[k].to_dict() for k in sorted(CATALOG)]
