"""Brute-force verifiers and the counterexample fixtures.

Nothing in here shares code with the choice kernels: :class:`ReferenceChooser`
re-derives every count from plain set intersections, and the blocking-pair
enumeration is written out again from the definition.  Enumerations that
would blow up refuse with :class:`BoundError` instead of sampling.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable, Mapping, Optional, Sequence

from .choice import ChoiceKind, CompiledPMA
from .engine import PipelineConfig, compiled, run_pipeline
from .model import (
    Candidate,
    Market,
    Matching,
    PreferenceReport,
    RawPopulation,
    apply_tie_breaking,
)


class BoundError(ValueError):
    """The requested enumeration exceeds the oracle's size bound."""


# ---------------------------------------------------------------------------
# reference choice functions


class ReferenceChooser:
    """Literal set-based reading of the four choice procedures."""

    def __init__(self, report: PreferenceReport, populations: Sequence, strict_order: Sequence):
        self.order = tuple(strict_order)
        self.pos = {c: i for i, c in enumerate(self.order)}
        self.capacity = report.capacity
        self.pops = [p for p in populations]
        self.zero = frozenset(c for c, r in report.ranking.items() if r == 0)

    def _quota_ok(self, chosen: frozenset, c) -> bool:
        after = chosen | {c}
        if len(after) > self.capacity:
            return False
        for p in self.pops:
            if c in p.members and p.max_quota is not None and len(after & p.members) > p.max_quota:
                return False
        return True

    def _unmet(self, chosen: frozenset, c, gender=None) -> list:
        return [
            p for p in self.pops
            if c in p.members and p.min_target > 0 and len(chosen & p.members) < p.min_target
            and (gender is None or p.is_gender == gender)
        ]

    def __call__(self, kind, C: Iterable) -> frozenset:
        kind = ChoiceKind(kind)
        cs = sorted((c for c in C if c in self.pos), key=self.pos.__getitem__)
        chosen = frozenset()
        if kind is ChoiceKind.Y2018:
            for c in cs:
                if self._unmet(chosen, c) and self._quota_ok(chosen, c):
                    chosen |= {c}
            for c in cs:
                if c not in chosen and self._quota_ok(chosen, c):
                    chosen |= {c}
        elif kind in (ChoiceKind.PREFER_MORE, ChoiceKind.PREFER_MORE_STAGED):
            rejected = frozenset()
            while len(chosen) + len(rejected) < len(cs):
                rest = [c for c in cs if c not in chosen and c not in rejected]
                c = max(rest, key=lambda x: (len(self._unmet(chosen, x)), -self.pos[x]))
                if self._quota_ok(chosen, c):
                    chosen |= {c}
                else:
                    rejected |= {c}
        else:
            chosen = frozenset(c for c in cs if c in self.zero)
            for c in cs:
                if c not in chosen and self._unmet(chosen, c, gender=False) and self._quota_ok(chosen, c):
                    chosen |= {c}
            for c in cs:
                if c not in chosen and self._unmet(chosen, c, gender=True) and self._quota_ok(chosen, c):
                    chosen |= {c}
            for c in cs:
                if c not in chosen and self._quota_ok(chosen, c):
                    chosen |= {c}
        return chosen


def reference_choosers(strict_market) -> dict:
    m = strict_market.market
    return {r.pma: ReferenceChooser(r, m.populations(r.pma), strict_market.orders[r.pma]) for r in m.reports}


def _cached(choosers, kind):
    memo: dict = {}

    def choose(pma, C: frozenset) -> frozenset:
        key = (pma, C)
        if key not in memo:
            memo[key] = choosers[pma](kind, C)
        return memo[key]

    return choose


def oracle_blocking_pairs(strict_market, kind, matching: Matching, _choose=None) -> set:
    """Blocking pairs straight from the definition, via the reference choosers."""
    market = strict_market.market
    choose = _choose or _cached(reference_choosers(strict_market), kind)
    assigned = {r.pma: frozenset(matching.assigned(r.pma)) for r in market.reports}
    out = set()
    for cand in market.candidates:
        prefs = list(cand.preferences)
        cur = matching.of(cand.id)
        better = prefs if cur is None else prefs[: prefs.index(cur)]
        for p in better:
            if cand.id in choose(p, assigned[p] | {cand.id}):
                out.add((cand.id, p))
    return out


def oracle_individually_rational(strict_market, kind, matching: Matching, _choose=None) -> bool:
    market = strict_market.market
    choose = _choose or _cached(reference_choosers(strict_market), kind)
    for c, p in matching.assignment.items():
        if p not in market.candidate(c).preferences:
            return False
    for r in market.reports:
        A = frozenset(matching.assigned(r.pma))
        if A and choose(r.pma, A) != A:
            return False
    return True


def brute_force_stable_matchings(strict_market, kind, max_candidates: int = 8, max_pmas: int = 4) -> list:
    """All stable matchings, by enumerating every assignment."""
    market = strict_market.market
    if len(market.candidates) > max_candidates or len(market.reports) > max_pmas:
        raise BoundError(
            f"brute force needs <= {max_candidates} candidates and <= {max_pmas} PMAs; "
            f"got {len(market.candidates)} and {len(market.reports)}"
        )
    kind = ChoiceKind(kind)
    choose = _cached(reference_choosers(strict_market), kind)
    ids = [c.id for c in market.candidates]
    options = [list(c.preferences) + [None] for c in market.candidates]
    out = []
    for combo in itertools.product(*options):
        m = Matching({c: p for c, p in zip(ids, combo) if p is not None})
        if oracle_individually_rational(strict_market, kind, m, choose) and not oracle_blocking_pairs(
            strict_market, kind, m, choose
        ):
            out.append(m)
    return out


# ---------------------------------------------------------------------------
# choice-function properties


@dataclass
class PropertyReport:
    checked: int = 0
    substitutability: list = field(default_factory=list)
    irc: list = field(default_factory=list)
    lad: list = field(default_factory=list)
    one_removal: list = field(default_factory=list)

    @property
    def clean(self) -> bool:
        return not (self.substitutability or self.irc or self.lad or self.one_removal)


def check_choice_properties(choose: Callable, universe: Iterable, max_universe: int = 7) -> PropertyReport:
    """Exhaustively test substitutability, IRC and the law of aggregate demand.

    ``choose`` maps a frozenset of candidates to the chosen frozenset.  Each
    violation is recorded as ``(C, removed, chosen_from_C, chosen_without)``.
    """
    universe = sorted(universe)
    if len(universe) > max_universe:
        raise BoundError(f"universe of {len(universe)} exceeds bound {max_universe}")
    memo = {}

    def ch(S):
        if S not in memo:
            memo[S] = frozenset(choose(S))
        return memo[S]

    rep = PropertyReport()
    for k in range(1, len(universe) + 1):
        for C in itertools.combinations(universe, k):
            C = frozenset(C)
            full = ch(C)
            for c in sorted(C):
                rest = ch(C - {c})
                rep.checked += 1
                v = (tuple(sorted(C)), c, tuple(sorted(full)), tuple(sorted(rest)))
                if not (full - {c}) <= rest:
                    rep.substitutability.append(v)
                if c not in full and rest != full:
                    rep.irc.append(v)
                if len(rest) > len(full):
                    rep.lad.append(v)
                base = full - {c}
                if not (rest >= base and len(rest - base) <= 1):
                    rep.one_removal.append(v)
    return rep


def pma_chooser(cp: CompiledPMA, kind) -> Callable:
    kind = ChoiceKind(kind)
    return lambda S: cp.choose_ids(kind, S)


# ---------------------------------------------------------------------------
# manipulation harnesses


def ordered_sublists(items: Sequence, max_len: Optional[int] = None) -> list:
    """Every ordered list of distinct elements of ``items`` (including the empty list)."""
    items = list(items)
    top = len(items) if max_len is None else min(max_len, len(items))
    out = []
    for k in range(top + 1):
        out.extend(itertools.permutations(items, k))
    return [tuple(x) for x in out]


def _position(prefs: Sequence, pma) -> int:
    return prefs.index(pma) if pma in prefs else len(prefs)


@dataclass
class ManipulationReport:
    candidate: str
    truthful: Optional[str]
    checked: int = 0
    profitable: list = field(default_factory=list)  # (reported list, outcome)

    @property
    def clean(self) -> bool:
        return not self.profitable


def check_strategyproofness_exhaustive(market, config: PipelineConfig, candidate, max_acceptable: int = 4,
                                       _truthful=None) -> ManipulationReport:
    """Try every ordered sublist of the candidate's acceptable PMAs."""
    cm = compiled(market, config.kind)
    truth = cm.prefs[candidate]
    if len(truth) > max_acceptable:
        raise BoundError(f"{candidate} lists {len(truth)} PMAs; bound is {max_acceptable}")
    base = _truthful or run_pipeline(cm, config).matching
    got = base.of(candidate)
    rep = ManipulationReport(candidate, got)
    for lst in ordered_sublists(truth):
        if lst == truth:
            continue
        out = run_pipeline(cm.with_preferences(candidate, lst), config).matching.of(candidate)
        rep.checked += 1
        if _position(truth, out) < _position(truth, got):
            rep.profitable.append((lst, out))
    return rep


def check_strategyproofness_market(market, config: PipelineConfig, max_acceptable: int = 4) -> list:
    cm = compiled(market, config.kind)
    truthful = run_pipeline(cm, config).matching
    return [
        check_strategyproofness_exhaustive(cm, config, c, max_acceptable, _truthful=truthful)
        for c in cm.candidate_ids
    ]


@dataclass
class TruncationReport:
    checked: int = 0
    violations: list = field(default_factory=list)  # (candidate, truncated list, got, original)

    @property
    def clean(self) -> bool:
        return not self.violations


def check_truncation_safety(market, config: PipelineConfig, candidates=None) -> TruncationReport:
    """A truncated list that lands a PMA must land the same PMA untruncated."""
    cm = compiled(market, config.kind)
    original = run_pipeline(cm, config).matching
    rep = TruncationReport()
    for c in candidates if candidates is not None else cm.candidate_ids:
        prefs = cm.prefs[c]
        for k in range(len(prefs)):
            got = run_pipeline(cm.with_preferences(c, prefs[:k]), config).matching.of(c)
            rep.checked += 1
            if got is not None and got != original.of(c):
                rep.violations.append((c, prefs[:k], got, original.of(c)))
    return rep


@dataclass
class SureThingReport:
    candidate: str
    pma: str
    applicable: bool
    checked: int = 0
    violations: list = field(default_factory=list)  # (list, other-profile index, outcome)
    reason: str = ""

    @property
    def clean(self) -> bool:
        return not self.violations


def always_chosen(cp: CompiledPMA, kind, candidate, max_ranked: int = 14) -> bool:
    """Does the PMA choose ``candidate`` from every subset of its ranked candidates containing her?"""
    if candidate not in cp.pos:
        return False
    others = [c for c in cp.order if c != candidate]
    if len(others) + 1 > max_ranked:
        raise BoundError(f"{cp.pma} ranks {len(others) + 1} candidates; bound is {max_ranked}")
    kind = ChoiceKind(kind)
    for k in range(len(others) + 1):
        for S in itertools.combinations(others, k):
            if candidate not in cp.choose_ids(kind, set(S) | {candidate}):
                return False
    return True


def check_sure_thing(market, config: PipelineConfig, candidate, pma,
                     profiles: Optional[Iterable[Mapping]] = None, max_list_len: int = 4) -> SureThingReport:
    """With a guaranteed seat at ``pma``, any list containing it ends at ``pma`` or better.

    ``profiles`` are alternative preference maps for the other candidates; by
    default only the market's own profile is used.
    """
    cm = compiled(market, config.kind)
    if not always_chosen(cm.pmas[pma], cm.kind, candidate):
        return SureThingReport(candidate, pma, False, reason="PMA does not always choose the candidate")
    rep = SureThingReport(candidate, pma, True)
    lists = [lst for lst in ordered_sublists(cm.pma_ids, max_list_len) if pma in lst]
    profiles = list(profiles) if profiles is not None else [{}]
    for k, prof in enumerate(profiles):
        base = cm
        for other, prefs in prof.items():
            if other != candidate:
                base = base.with_preferences(other, prefs)
        for lst in lists:
            got = run_pipeline(base.with_preferences(candidate, lst), config).matching.of(candidate)
            rep.checked += 1
            if got is None or lst.index(got) > lst.index(pma):
                rep.violations.append((lst, k, got))
    return rep


def all_profiles(candidates: Sequence, pma_ids: Sequence, max_len: Optional[int] = None):
    """Every joint preference profile of ``candidates`` over ``pma_ids``."""
    lists = ordered_sublists(pma_ids, max_len)
    for combo in itertools.product(lists, repeat=len(candidates)):
        yield dict(zip(candidates, combo))


# ---------------------------------------------------------------------------
# fixtures


class FixtureId(str, Enum):
    THM3_NO_STABLE = "thm3_no_stable"
    THM3_STRATEGYPROOFNESS = "thm3_strategyproofness"
    FOOTNOTE26_FREE_SLOT = "footnote26_free_slot"


def _pma_m() -> PreferenceReport:
    return PreferenceReport(
        "m",
        capacity=3,
        ranking={"c": 1, "d": 2, "e": 3},
        populations=(
            RawPopulation("cde", members={"c", "d", "e"}, min_target=1),
            RawPopulation("de", members={"d", "e"}, max_quota=1),
            RawPopulation("e", members={"e"}, min_target=1),
        ),
    )


def fixture(fid) -> Market:
    fid = FixtureId(fid)
    if fid is FixtureId.THM3_NO_STABLE:
        return Market(
            candidates=(
                Candidate("c", ("m'", "m")),
                Candidate("d", ("m", "m'")),
                Candidate("e", ("m", "m'")),
            ),
            reports=(_pma_m(), PreferenceReport("m'", 1, {"e": 1, "c": 2, "d": 3})),
        )
    if fid is FixtureId.THM3_STRATEGYPROOFNESS:
        return Market(
            candidates=(
                Candidate("c", ("m''", "m")),
                Candidate("d", ("m",)),
                Candidate("e", ("m", "m'")),
                Candidate("f", ("m''",)),
                Candidate("g", ("m'",)),
            ),
            reports=(
                _pma_m(),
                PreferenceReport("m'", 1, {"g": 1, "e": 2, "c": 3, "d": 4, "f": 5}),
                PreferenceReport("m''", 1, {"f": 1, "c": 2, "d": 3, "e": 4, "g": 5}),
            ),
        )
    return Market(
        candidates=(
            Candidate("c", ("m",)),
            Candidate("d", ("m",)),
            Candidate("e", ("m'", "m")),
            Candidate("f", ("m'",)),
        ),
        reports=(
            PreferenceReport(
                "m",
                capacity=2,
                ranking={"e": 1, "d": 2, "c": 3},
                populations=(
                    RawPopulation("P", members={"c", "d"}, max_quota=1),
                    RawPopulation("P'", members={"d", "e"}, max_quota=1),
                ),
            ),
            PreferenceReport("m'", 1, {"f": 1, "e": 2}),
        ),
    )


def strict_fixture(fid):
    return apply_tie_breaking(fixture(fid))
