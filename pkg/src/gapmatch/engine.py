"""Candidate-proposing deferred acceptance, Pareto-improvement stages, Boston.

Every entry point takes either a :class:`~gapmatch.model.StrictMarket` or an
already compiled :class:`CompiledMarket`; the latter is what the oracle
harnesses use to re-run the mechanism cheaply under altered preferences.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Optional, Sequence

from .choice import ChoiceKind, ChoiceSemanticsError, CompiledPMA
from .model import Market, Matching, StrictMarket, apply_tie_breaking

log = logging.getLogger(__name__)

DEFAULT_ALTERNATION_CAP = 100


class Pareto(str, Enum):
    NONE = "none"
    CANDIDATE = "candidate"
    ALTERNATE = "alternate"

    @classmethod
    def _missing_(cls, value):
        if value == "candidate_only":
            return cls.CANDIDATE
        return None


@dataclass(frozen=True)
class PipelineConfig:
    kind: ChoiceKind = ChoiceKind.Y2018
    pareto: Pareto = Pareto.NONE
    alternation_cap: int = DEFAULT_ALTERNATION_CAP

    def __post_init__(self):
        object.__setattr__(self, "kind", ChoiceKind(self.kind))
        object.__setattr__(self, "pareto", Pareto(self.pareto))
        if self.alternation_cap < 1:
            raise ValueError("alternation_cap must be positive")

    def to_json(self) -> dict:
        return {"kind": self.kind.value, "pareto": self.pareto.value, "alternation_cap": self.alternation_cap}


@dataclass(frozen=True)
class DARound:
    applications: Mapping[str, str]  # candidate -> PMA applied to
    rejections: Mapping[str, tuple]  # PMA -> rejected candidates

    def to_json(self) -> dict:
        return {
            "applications": dict(sorted(self.applications.items())),
            "rejections": {p: list(cs) for p, cs in sorted(self.rejections.items())},
        }


@dataclass(frozen=True)
class Resolution:
    stage: str  # "candidate" or "pma"
    pma: str
    candidate: str
    previous: Optional[str] = None  # the candidate's PMA before the move
    displaced: Optional[str] = None  # incumbent unassigned by a PMA-stage swap

    def to_json(self) -> dict:
        return {
            "stage": self.stage,
            "pma": self.pma,
            "candidate": self.candidate,
            "previous": self.previous,
            "displaced": self.displaced,
        }


@dataclass(frozen=True)
class StageResult:
    matching: Matching
    resolutions: tuple = ()
    cap_hit: bool = False


@dataclass(frozen=True)
class MatchOutcome:
    matching: Matching
    rounds: tuple = ()
    stage_log: tuple = ()
    cap_hit: bool = False
    config: Optional[PipelineConfig] = None

    def to_json(self) -> dict:
        return {
            "matching": dict(sorted(self.matching.assignment.items())),
            "rounds": [r.to_json() for r in self.rounds],
            "stage_log": [r.to_json() for r in self.stage_log],
            "cap_hit": self.cap_hit,
            "config": self.config.to_json() if self.config else None,
        }


class CompiledMarket:
    """A strict market with one compiled choice function per PMA."""

    def __init__(self, strict: StrictMarket, kind, kernel=None, _pmas=None):
        self.strict = strict
        self.market = strict.market
        self.kind = ChoiceKind(kind)
        self.pma_ids = tuple(self.market.pma_ids)
        self.candidate_ids = tuple(c.id for c in self.market.candidates)
        self.prefs = {c.id: tuple(c.preferences) for c in self.market.candidates}
        if _pmas is None:
            _pmas = {
                r.pma: CompiledPMA(r, self.market.populations(r.pma), strict.orders[r.pma], kernel)
                for r in self.market.reports
            }
        if self.kind is not ChoiceKind.Y2019:
            bad = sorted(p for p, cp in _pmas.items() if cp.has_zero)
            if bad:
                raise ChoiceSemanticsError(f"PMAs {bad} use 0-priority ranks; only valid with 2019 semantics")
        self.pmas = _pmas

    def with_preferences(self, cid, preferences: Sequence) -> "CompiledMarket":
        clone = CompiledMarket.__new__(CompiledMarket)
        clone.__dict__.update(self.__dict__)
        clone.prefs = dict(self.prefs)
        clone.prefs[cid] = tuple(preferences)
        clone.strict = self.strict.with_preferences(cid, preferences)
        clone.market = clone.strict.market
        return clone

    def with_kind(self, kind) -> "CompiledMarket":
        kind = ChoiceKind(kind)
        if kind is self.kind:
            return self
        clone = CompiledMarket(self.strict, kind, _pmas=self.pmas)
        clone.prefs = self.prefs
        return clone

    def accepts_all(self, pma, members, extra) -> bool:
        """Does ``pma`` choose the whole of ``members | {extra}``?"""
        cp = self.pmas[pma]
        if extra not in cp.pos or any(c not in cp.pos for c in members):
            return False
        apps = sorted([cp.pos[c] for c in members] + [cp.pos[extra]])
        chosen, _ = cp.choose_local(self.kind, apps)
        return len(chosen) == len(apps)

    def choose(self, pma, applicants, committed=()) -> set:
        return self.pmas[pma].choose_ids(self.kind, applicants, committed)


def compiled(market, kind=None) -> CompiledMarket:
    if isinstance(market, CompiledMarket):
        return market if kind is None else market.with_kind(kind)
    if isinstance(market, Market):
        market = apply_tie_breaking(market)
    return CompiledMarket(market, kind if kind is not None else ChoiceKind.Y2018)


def _matching_members(cm: CompiledMarket, matching: Matching) -> dict:
    members = {p: set() for p in cm.pma_ids}
    for c, p in matching.assignment.items():
        members[p].add(c)
    return members


def run_da(market, kind=None) -> MatchOutcome:
    """Rounds of applications until a round rejects nobody."""
    cm = compiled(market, kind)
    ptr = {c: 0 for c in cm.candidate_ids}
    cache: dict = {}
    rounds = []
    while True:
        applications = {}
        by_pma: dict = {}
        for c in cm.candidate_ids:
            prefs = cm.prefs[c]
            if ptr[c] < len(prefs):
                p = prefs[ptr[c]]
                applications[c] = p
                by_pma.setdefault(p, []).append(c)
        rejections = {}
        for p in cm.pma_ids:
            apps = by_pma.get(p)
            if not apps:
                continue
            key = frozenset(apps)
            hit = cache.get(p)
            if hit is not None and hit[0] == key:
                chosen = hit[1]
            else:
                chosen = cm.choose(p, apps)
                cache[p] = (key, chosen)
            rejected = tuple(c for c in apps if c not in chosen)
            if rejected:
                rejections[p] = rejected
                for c in rejected:
                    ptr[c] += 1
        rounds.append(DARound(applications, rejections))
        if not rejections:
            break
    return MatchOutcome(Matching(rounds[-1].applications), tuple(rounds),
                        config=PipelineConfig(cm.kind, Pareto.NONE))


def _prefix_rank(cm: CompiledMarket) -> dict:
    return {c: {p: i for i, p in enumerate(prefs)} for c, prefs in cm.prefs.items()}


def candidate_pareto_stage(market, kind=None, matching: Matching = None) -> StageResult:
    """Resolve blocking pairs whose PMA can take the candidate without rejecting anyone.

    PMAs are scanned in market order; at the first PMA with such a pair, its
    best such candidate (by the PMA's strict order) moves there.  Repeats to
    a fixpoint, which is reached because each move strictly helps one
    candidate and hurts nobody.
    """
    cm = compiled(market, kind)
    assign = dict(matching.assignment)
    members = _matching_members(cm, matching)
    prank = _prefix_rank(cm)

    def prefers(c, p):
        r = prank[c].get(p)
        if r is None:
            return False
        cur = assign.get(c)
        return cur is None or r < prank[c][cur]

    def eligible(p):
        cp = cm.pmas[p]
        A = members[p]
        return [c for c in cp.order if c not in A and prefers(c, p) and cm.accepts_all(p, A, c)]

    cache = {}
    resolutions = []
    while True:
        target = None
        for p in cm.pma_ids:
            if p not in cache:
                cache[p] = eligible(p)
            if cache[p]:
                target = p
                break
        if target is None:
            break
        c = cache[target][0]
        prev = assign.get(c)
        if prev is not None:
            members[prev].discard(c)
        members[target].add(c)
        assign[c] = target
        resolutions.append(Resolution("candidate", target, c, previous=prev))
        cache.pop(target, None)
        cache.pop(prev, None)
        for lst in cache.values():
            if c in lst:
                lst.remove(c)
    return StageResult(Matching(assign), tuple(resolutions))


def pma_stage_displaceable(cm: CompiledMarket, d, pma) -> bool:
    """True when no PMA after ``pma`` on ``d``'s list ranks ``d``."""
    prefs = cm.prefs[d]
    if pma not in prefs:
        return True
    later = prefs[prefs.index(pma) + 1:]
    return all(d not in cm.pmas[q].pos for q in later)


def pma_pareto_stage(market, kind=None, matching: Matching = None,
                     max_resolutions: Optional[int] = None) -> StageResult:
    """Swap an unassigned candidate in for an incumbent who has nowhere else to go.

    A resolution at PMA ``m`` needs an unassigned ``c`` listing ``m`` such that
    ``m``'s choice from its assignees plus ``c`` keeps ``c`` and drops exactly
    one incumbent ``d``, and every PMA below ``m`` on ``d``'s list does not rank
    ``d``.  Selection order matches :func:`candidate_pareto_stage`.
    """
    cm = compiled(market, kind)
    assign = dict(matching.assignment)
    members = _matching_members(cm, matching)
    if max_resolutions is None:
        max_resolutions = 10 * len(cm.candidate_ids) + 10

    def find(p):
        cp = cm.pmas[p]
        A = members[p]
        for c in cp.order:
            if c in assign or p not in cm.prefs[c]:
                continue
            chosen = cm.choose(p, A | {c})
            if c in chosen and len(chosen) == len(A):
                (d,) = A - chosen
                if pma_stage_displaceable(cm, d, p):
                    return (c, d)
        return None

    cache = {}
    resolutions = []
    cap_hit = False
    while True:
        target = None
        for p in cm.pma_ids:
            if p not in cache:
                cache[p] = find(p)
            if cache[p] is not None:
                target = p
                break
        if target is None:
            break
        if len(resolutions) >= max_resolutions:
            cap_hit = True
            log.warning("PMA-Pareto stage stopped after %d resolutions", max_resolutions)
            break
        c, d = cache[target]
        members[target].discard(d)
        members[target].add(c)
        del assign[d]
        assign[c] = target
        resolutions.append(Resolution("pma", target, c, displaced=d))
        cache.pop(target, None)
        for q in cm.prefs[d]:
            cache.pop(q, None)
        for q in list(cache):
            if cache[q] is not None and cache[q][0] == c:
                del cache[q]
    return StageResult(Matching(assign), tuple(resolutions), cap_hit)


def run_pipeline(market, config: PipelineConfig = PipelineConfig()) -> MatchOutcome:
    """DA followed by the configured Pareto-improvement stages."""
    cm = compiled(market, config.kind)
    da = run_da(cm)
    if config.pareto is Pareto.NONE:
        return MatchOutcome(da.matching, da.rounds, config=config)
    if config.pareto is Pareto.CANDIDATE:
        st = candidate_pareto_stage(cm, matching=da.matching)
        return MatchOutcome(st.matching, da.rounds, st.resolutions, config=config)
    matching = da.matching
    log_ = []
    cap_hit = False
    for _ in range(config.alternation_cap):
        s1 = candidate_pareto_stage(cm, matching=matching)
        s2 = pma_pareto_stage(cm, matching=s1.matching)
        log_.extend(s1.resolutions)
        log_.extend(s2.resolutions)
        matching = s2.matching
        cap_hit = cap_hit or s2.cap_hit
        if not s1.resolutions and not s2.resolutions:
            break
    else:
        cap_hit = True
        log.warning("alternation cap %d reached", config.alternation_cap)
    return MatchOutcome(matching, da.rounds, tuple(log_), cap_hit, config)


def run_boston(market, kind=None) -> Matching:
    """Immediate acceptance: round ``k`` acceptances are final."""
    cm = compiled(market, kind)
    assign = {}
    committed = {p: set() for p in cm.pma_ids}
    k = 0
    while True:
        by_pma: dict = {}
        for c in cm.candidate_ids:
            prefs = cm.prefs[c]
            if c not in assign and k < len(prefs):
                by_pma.setdefault(prefs[k], []).append(c)
        if not by_pma:
            break
        for p in cm.pma_ids:
            apps = by_pma.get(p)
            if apps:
                for c in cm.choose(p, apps, committed[p]):
                    assign[c] = p
                    committed[p].add(c)
        k += 1
    return Matching(assign)
