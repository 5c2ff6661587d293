"""Population-structure checks and the guarantees they earn.

Laminar populations with pairwise-disjoint minimum-target populations give
stability and strategyproofness under 2018 semantics; laminar populations
whose minimum-target populations form disjoint chains give the same under
prefer-more semantics.  2019 semantics never earns a guarantee.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

from .choice import ChoiceKind

ALG1 = "stable_and_strategyproof_alg1"
ALG2 = "stable_and_strategyproof_alg2"
NONE = "none"


class StructureError(ValueError):
    pass


@dataclass(frozen=True)
class Check:
    ok: bool
    witness: Optional[tuple] = None

    def __bool__(self):
        return self.ok


@dataclass(frozen=True)
class PMAStructure:
    pma: str
    laminar: bool
    min_targets_pairwise_disjoint: bool
    min_targets_disjoint_chains: Optional[bool]  # None when not laminar
    witnesses: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "pma": self.pma,
            "laminar": self.laminar,
            "min_targets_pairwise_disjoint": self.min_targets_pairwise_disjoint,
            "min_targets_disjoint_chains": self.min_targets_disjoint_chains,
            "witnesses": {k: list(v) for k, v in sorted(self.witnesses.items())},
        }


@dataclass(frozen=True)
class StructureReport:
    kind: ChoiceKind
    pmas: tuple
    guarantee: str

    def to_json(self) -> dict:
        return {"kind": self.kind.value, "guarantee": self.guarantee, "pmas": [p.to_json() for p in self.pmas]}


def is_laminar(populations: Sequence) -> Check:
    """Every pair disjoint or nested.  Witness: ``(pop_a, pop_b, only_a, both, only_b)``."""
    pops = list(populations)
    for i, a in enumerate(pops):
        for b in pops[i + 1:]:
            both = a.members & b.members
            if both and not (a.members <= b.members or b.members <= a.members):
                return Check(False, (a.id, b.id, min(a.members - b.members), min(both), min(b.members - a.members)))
    return Check(True)


def _with_targets(populations):
    return [p for p in populations if p.min_target > 0]


def min_targets_pairwise_disjoint(populations: Sequence) -> Check:
    pops = _with_targets(populations)
    for i, a in enumerate(pops):
        for b in pops[i + 1:]:
            if a.members & b.members:
                return Check(False, (a.id, b.id))
    return Check(True)


def min_targets_disjoint_chains(populations: Sequence) -> Check:
    """No minimum-target population contains two incomparable ones.

    Only defined for laminar families; raises :class:`StructureError` otherwise.
    Witness: ``(outer, inner_a, inner_b)``.
    """
    pops = list(populations)
    lam = is_laminar(pops)
    if not lam:
        raise StructureError(f"populations are not laminar: {lam.witness}")
    targets = _with_targets(pops)
    for outer in targets:
        inside = [p for p in targets if p is not outer and p.members <= outer.members]
        for i, a in enumerate(inside):
            for b in inside[i + 1:]:
                if not (a.members <= b.members or b.members <= a.members):
                    return Check(False, (outer.id, a.id, b.id))
    return Check(True)


def pma_structure(pma, populations) -> PMAStructure:
    lam = is_laminar(populations)
    disjoint = min_targets_pairwise_disjoint(populations)
    witnesses = {}
    if not lam:
        witnesses["laminar"] = lam.witness
    if not disjoint:
        witnesses["min_targets_pairwise_disjoint"] = disjoint.witness
    chains = None
    if lam:
        ch = min_targets_disjoint_chains(populations)
        chains = ch.ok
        if not ch:
            witnesses["min_targets_disjoint_chains"] = ch.witness
    return PMAStructure(pma, lam.ok, disjoint.ok, chains, witnesses)


def guarantees(market, kind) -> StructureReport:
    kind = ChoiceKind(kind)
    pmas = tuple(pma_structure(r.pma, market.populations(r.pma)) for r in market.reports)
    guarantee = NONE
    if kind is ChoiceKind.Y2018:
        if all(p.laminar and p.min_targets_pairwise_disjoint for p in pmas):
            guarantee = ALG1
    elif kind in (ChoiceKind.PREFER_MORE, ChoiceKind.PREFER_MORE_STAGED):
        if all(p.laminar and p.min_targets_disjoint_chains for p in pmas):
            guarantee = ALG2
    return StructureReport(kind, pmas, guarantee)
