"""Market domain types: candidates, PMAs, populations, matchings.

Everything here is an immutable value.  Ingestion lives in :mod:`gapmatch.io`;
this module covers validation, multi-valued population expansion,
auto-population from candidate attributes, and single tie-breaking.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from functools import cached_property
from types import MappingProxyType
from typing import Iterable, Mapping, Optional, Sequence

BINARY = "binary"
MULTI_VALUED = "multi_valued"
CAPACITY_POPULATION = "capacity"


class ValidationError(ValueError):
    """Raised when a market or population definition is structurally broken."""


def _frozen_map(m: Optional[Mapping]) -> Mapping:
    return MappingProxyType(dict(m or {}))


@dataclass(frozen=True)
class Candidate:
    id: str
    preferences: tuple = ()
    attributes: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "preferences", tuple(self.preferences))
        object.__setattr__(self, "attributes", _frozen_map(self.attributes))


@dataclass(frozen=True)
class Population:
    """A binary population: an explicit member set with an optional target and quota."""

    id: str
    members: frozenset
    min_target: int = 0
    max_quota: Optional[int] = None
    is_gender: bool = False
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "members", frozenset(self.members))
        if not self.name:
            object.__setattr__(self, "name", self.id)


@dataclass(frozen=True)
class RawPopulation:
    """A population as the PMA wrote it down.

    ``kind`` is ``"binary"`` (``members`` is used) or ``"multi_valued"``
    (``values`` maps each member to its value, and every value becomes its own
    binary population).  ``overrides`` maps a value to a replacement quota.
    """

    id: str
    kind: str = BINARY
    members: frozenset = frozenset()
    values: Mapping[str, str] = field(default_factory=dict)
    min_target: int = 0
    max_quota: Optional[int] = None
    is_gender: bool = False
    overrides: Mapping[str, int] = field(default_factory=dict)
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "members", frozenset(self.members))
        object.__setattr__(self, "values", _frozen_map(self.values))
        object.__setattr__(self, "overrides", _frozen_map(self.overrides))
        if not self.name:
            object.__setattr__(self, "name", self.id)


@dataclass(frozen=True)
class AutoRule:
    """Auto-populate one multi-valued population from a candidate attribute."""

    attribute: str
    min_target: int = 0
    max_quota: Optional[int] = None
    overrides: Mapping[str, int] = field(default_factory=dict)
    is_gender: bool = False
    id: str = ""

    def __post_init__(self):
        object.__setattr__(self, "overrides", _frozen_map(self.overrides))
        if not self.id:
            object.__setattr__(self, "id", self.attribute)


@dataclass(frozen=True)
class PreferenceReport:
    """One PMA's capacity, weak ranking (lower rank is better) and populations."""

    pma: str
    capacity: int
    ranking: Mapping[str, int] = field(default_factory=dict)
    populations: tuple = ()
    auto_rules: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "ranking", _frozen_map(self.ranking))
        object.__setattr__(self, "populations", tuple(self.populations))
        object.__setattr__(self, "auto_rules", tuple(self.auto_rules))

    def ranks(self, candidate) -> bool:
        return candidate in self.ranking


@dataclass(frozen=True)
class Market:
    candidates: tuple = ()
    reports: tuple = ()
    tie_break_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "candidates", tuple(self.candidates))
        object.__setattr__(self, "reports", tuple(self.reports))

    @cached_property
    def candidate_map(self) -> Mapping[str, Candidate]:
        return {c.id: c for c in self.candidates}

    @cached_property
    def report_map(self) -> Mapping[str, PreferenceReport]:
        return {r.pma: r for r in self.reports}

    @property
    def pma_ids(self) -> list:
        return [r.pma for r in self.reports]

    def candidate(self, cid) -> Candidate:
        return self.candidate_map[cid]

    def report(self, pma) -> PreferenceReport:
        return self.report_map[pma]

    def populations(self, pma) -> tuple:
        """Expanded binary populations of ``pma`` (auto rules included)."""
        cache = self.__dict__.setdefault("_population_cache", {})
        if pma not in cache:
            report = self.report(pma)
            raw = list(report.populations)
            if report.auto_rules:
                ranked = [self.candidate_map[c] for c in report.ranking if c in self.candidate_map]
                raw.extend(auto_populate(ranked, report.auto_rules))
            cache[pma] = tuple(expand_populations(raw))
        return cache[pma]

    def with_preferences(self, cid, preferences: Sequence) -> "Market":
        cands = tuple(
            Candidate(c.id, tuple(preferences), c.attributes) if c.id == cid else c
            for c in self.candidates
        )
        return Market(cands, self.reports, self.tie_break_seed)


@dataclass(frozen=True)
class Matching:
    assignment: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "assignment", _frozen_map(self.assignment))

    def of(self, cid) -> Optional[str]:
        return self.assignment.get(cid)

    def assigned(self, pma) -> frozenset:
        return frozenset(c for c, p in self.assignment.items() if p == pma)

    def by_pma(self) -> dict:
        out: dict = {}
        for c, p in self.assignment.items():
            out.setdefault(p, set()).add(c)
        return out

    def __eq__(self, other):
        return isinstance(other, Matching) and dict(self.assignment) == dict(other.assignment)

    def __hash__(self):
        return hash(frozenset(self.assignment.items()))


def expand_populations(raw: Iterable[RawPopulation]) -> list:
    """Turn binary and multi-valued populations into binary ones.

    A multi-valued population over ``k`` values becomes ``k`` disjoint binary
    populations with ids ``"<id>=<value>"``, each carrying the shared target and
    the shared quota unless ``overrides`` names that value.
    """
    out = []
    seen = set()
    for rp in raw:
        if rp.kind == BINARY:
            pops = [Population(rp.id, rp.members, rp.min_target, rp.max_quota, rp.is_gender, rp.name)]
        elif rp.kind == MULTI_VALUED:
            by_value: dict = {}
            for member, value in rp.values.items():
                by_value.setdefault(value, set()).add(member)
            pops = [
                Population(
                    f"{rp.id}={value}",
                    members,
                    rp.min_target,
                    rp.overrides.get(value, rp.max_quota),
                    rp.is_gender,
                    f"{rp.name}={value}",
                )
                for value, members in sorted(by_value.items())
            ]
        else:
            raise ValidationError(f"population {rp.id!r}: unknown kind {rp.kind!r}")
        for p in pops:
            if p.id in seen:
                raise ValidationError(f"duplicate population id {p.id!r} after expansion")
            seen.add(p.id)
            out.append(p)
    return out


def auto_populate(candidates: Iterable[Candidate], rules: Iterable[AutoRule]) -> list:
    """One multi-valued population per rule, keyed on a candidate attribute."""
    candidates = list(candidates)
    out = []
    for rule in rules:
        values = {}
        for c in candidates:
            if rule.attribute not in c.attributes:
                raise ValidationError(
                    f"candidate {c.id!r} has no attribute {rule.attribute!r} required by auto rule {rule.id!r}"
                )
            values[c.id] = c.attributes[rule.attribute]
        out.append(
            RawPopulation(
                rule.id,
                MULTI_VALUED,
                values=values,
                min_target=rule.min_target,
                max_quota=rule.max_quota,
                is_gender=rule.is_gender,
                overrides=rule.overrides,
            )
        )
    return out


@dataclass(frozen=True)
class Violation:
    code: str
    message: str


def validate(market: Market, kind=None) -> list:
    """List every broken invariant of ``market``; an empty list means valid.

    Rank 0 (0-priority) is reported only when ``kind`` is given and is not the
    2019 semantics.
    """
    from .choice import ChoiceKind

    v = []
    cids = [c.id for c in market.candidates]
    pids = [r.pma for r in market.reports]
    for dup in sorted({x for x in cids if cids.count(x) > 1}):
        v.append(Violation("duplicate_candidate", f"candidate {dup!r} appears more than once"))
    for dup in sorted({x for x in pids if pids.count(x) > 1}):
        v.append(Violation("duplicate_report", f"PMA {dup!r} has more than one report"))
    pma_set, cand_set = set(pids), set(cids)
    for c in market.candidates:
        if len(set(c.preferences)) != len(c.preferences):
            v.append(Violation("duplicate_preference", f"candidate {c.id!r} lists a PMA twice"))
        for p in c.preferences:
            if p not in pma_set:
                v.append(Violation("dangling_pma", f"candidate {c.id!r} lists unknown PMA {p!r}"))
    check_zero = kind is not None and ChoiceKind(kind) is not ChoiceKind.Y2019
    for r in market.reports:
        if not isinstance(r.capacity, int) or r.capacity < 1:
            v.append(Violation("bad_capacity", f"PMA {r.pma!r} capacity must be a positive integer"))
        for cid, rank in r.ranking.items():
            if cid not in cand_set:
                v.append(Violation("dangling_candidate", f"PMA {r.pma!r} ranks unknown candidate {cid!r}"))
            if not isinstance(rank, int) or rank < 0:
                v.append(Violation("bad_rank", f"PMA {r.pma!r} gives {cid!r} invalid rank {rank!r}"))
            elif rank == 0 and check_zero:
                v.append(Violation("zero_priority", f"PMA {r.pma!r} ranks {cid!r} as 0-priority outside 2019 semantics"))
        for rule in r.auto_rules:
            for cid in r.ranking:
                c = market.candidate_map.get(cid)
                if c is not None and rule.attribute not in c.attributes:
                    v.append(Violation("missing_attribute", f"candidate {cid!r} lacks attribute {rule.attribute!r} (PMA {r.pma!r})"))
        for rp in r.populations:
            if rp.kind == MULTI_VALUED and rp.members and set(rp.members) - set(rp.values):
                v.append(Violation("missing_value", f"population {rp.id!r} has members without a value"))
        try:
            pops = market.populations(r.pma) if r.pma in market.report_map else ()
        except ValidationError as exc:
            v.append(Violation("expansion", f"PMA {r.pma!r}: {exc}"))
            continue
        for p in pops:
            if p.min_target < 0 or (p.max_quota is not None and p.max_quota < 0):
                v.append(Violation("negative_bound", f"population {p.id!r} of {r.pma!r} has a negative bound"))
            if p.max_quota is not None and p.min_target > p.max_quota:
                v.append(Violation("target_exceeds_quota", f"population {p.id!r} of {r.pma!r}: min_target {p.min_target} > max_quota {p.max_quota}"))
            unranked = sorted(set(p.members) - set(r.ranking))
            if unranked:
                v.append(Violation("unranked_member", f"population {p.id!r} of {r.pma!r} has unranked members {unranked}"))
    return v


@dataclass(frozen=True)
class StrictMarket:
    """A market plus one strict order per PMA, refining its weak ranking.

    ``orders[pma]`` lists that PMA's ranked candidates best first.  Ties were
    resolved by ``permutation``, one draw shared by every PMA.
    """

    market: Market
    permutation: tuple
    orders: Mapping[str, tuple]

    @cached_property
    def positions(self) -> Mapping[str, Mapping[str, int]]:
        return {p: {c: i for i, c in enumerate(order)} for p, order in self.orders.items()}

    def with_preferences(self, cid, preferences) -> "StrictMarket":
        return StrictMarket(self.market.with_preferences(cid, preferences), self.permutation, self.orders)


def tie_break_permutation(market: Market) -> tuple:
    """Candidate ids in file order, shuffled by ``random.Random(seed)``.

    CPython's ``random`` is MT19937; ``shuffle`` is Fisher-Yates driven by
    ``_randbelow``.  Both are stable across CPython 3.x for integer seeds.
    """
    perm = [c.id for c in market.candidates]
    random.Random(market.tie_break_seed).shuffle(perm)
    return tuple(perm)


def apply_tie_breaking(market: Market) -> StrictMarket:
    perm = tie_break_permutation(market)
    pos = {c: i for i, c in enumerate(perm)}
    fallback = len(pos)
    orders = {
        r.pma: tuple(sorted(r.ranking, key=lambda c: (r.ranking[c], pos.get(c, fallback), c)))
        for r in market.reports
    }
    return StrictMarket(market, perm, orders)
