"""Stability auditing, blocking-pair classification, rejection explanations."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .choice import CAPACITY_ID, ChoiceKind, CompiledPMA
from .engine import compiled
from .model import Matching

REAL = "real"
TIE_BREAK_ARTIFACT = "tie_break_artifact"

DID_NOT_RANK = "did_not_rank"
MATCHED_TO_PREFERRED = "matched_to_preferred"
QUOTA_VIOLATION = "quota_violation"
DISPLACED_BY_PROMOTION = "displaced_by_promotion"
# The PMA would take the candidate now, i.e. the pair blocks.
BLOCKING = "blocking"

CATEGORIES = (DID_NOT_RANK, MATCHED_TO_PREFERRED, QUOTA_VIOLATION, DISPLACED_BY_PROMOTION, BLOCKING)
# Categories beyond the three classic reasons; reports mark them as such.
EXTENSIONS = frozenset({DISPLACED_BY_PROMOTION, BLOCKING})

_PROMOTION_PASSES = ("zero_priority", "min_target", "gender_min_target")


class QueryError(ValueError):
    pass


@dataclass(frozen=True)
class IRCheck:
    ok: bool
    witnesses: tuple = ()

    def __bool__(self):
        return self.ok


@dataclass(frozen=True)
class BlockingPair:
    candidate: str
    pma: str
    evidence: frozenset  # the PMA's choice from its assignees plus the candidate
    classification: Optional[str] = None

    def to_json(self) -> dict:
        return {
            "candidate": self.candidate,
            "pma": self.pma,
            "classification": self.classification,
            "evidence": {"chosen": sorted(self.evidence)},
        }


@dataclass(frozen=True)
class Explanation:
    candidate: str
    pma: str
    category: str
    detail: str = ""

    def row(self) -> dict:
        return {"pma": self.pma, "candidate": self.candidate, "category": self.category, "detail": self.detail}


@dataclass(frozen=True)
class OutcomeStats:
    candidates: int
    active_candidates: int
    matched: int
    top_choice_fraction: float
    slots: int
    slots_filled_fraction: float
    blocking_pairs: dict
    unique_blocking_pmas: int
    unique_real_blocking_pmas: int
    populations: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "candidates": self.candidates,
            "active_candidates": self.active_candidates,
            "matched": self.matched,
            "top_choice_fraction": self.top_choice_fraction,
            "slots": self.slots,
            "slots_filled_fraction": self.slots_filled_fraction,
            "blocking_pairs": dict(sorted(self.blocking_pairs.items())),
            "unique_blocking_pmas": self.unique_blocking_pmas,
            "unique_real_blocking_pmas": self.unique_real_blocking_pmas,
            "populations": self.populations,
        }


def is_individually_rational(market, kind=None, matching: Matching = None) -> IRCheck:
    cm = compiled(market, kind)
    witnesses = []
    members: dict = {}
    for c, p in sorted(matching.assignment.items()):
        if p not in cm.pmas:
            witnesses.append(f"{c} assigned to unknown PMA {p}")
            continue
        if p not in cm.prefs.get(c, ()):
            witnesses.append(f"{c} assigned to {p}, which {c} did not list")
        members.setdefault(p, set()).add(c)
    for p in cm.pma_ids:
        A = members.get(p)
        if not A:
            continue
        chosen = cm.choose(p, A)
        for c in sorted(A - chosen):
            witnesses.append(f"{p} does not choose {c} from its own assignees")
    return IRCheck(not witnesses, tuple(witnesses))


def _prefers(prefs, p, current) -> bool:
    if p not in prefs:
        return False
    return current is None or prefs.index(p) < prefs.index(current)


def find_blocking_pairs(market, kind=None, matching: Matching = None, classify: bool = True) -> list:
    """Every (candidate, PMA) where the candidate prefers the PMA and would be chosen."""
    cm = compiled(market, kind)
    by_pma = matching.by_pma()
    out = []
    for c in cm.candidate_ids:
        prefs = cm.prefs[c]
        cur = matching.of(c)
        stop = prefs.index(cur) if cur in prefs else len(prefs)
        for p in prefs[:stop]:
            cp = cm.pmas[p]
            if c not in cp.pos:
                continue
            A = by_pma.get(p, set())
            chosen = cm.choose(p, A | {c})
            if c in chosen:
                pair = BlockingPair(c, p, frozenset(chosen))
                if classify:
                    pair = BlockingPair(c, p, pair.evidence, classify_blocking_pair(cm, None, matching, pair))
                out.append(pair)
    return out


def adversarial_order(cm, pma, matching: Matching, candidate) -> tuple:
    """Re-break the PMA's ties against ``candidate``: incumbents first, it last."""
    report = cm.market.report(pma)
    incumbents = matching.assigned(pma)
    drawn = cm.strict.positions[pma]

    def key(c):
        group = 2 if c == candidate else (0 if c in incumbents else 1)
        return (report.ranking[c], group, drawn[c])

    return tuple(sorted(report.ranking, key=key))


def classify_blocking_pair(market, kind=None, matching: Matching = None, pair: BlockingPair = None) -> str:
    """``real`` if the pair still blocks with the PMA's ties broken against it."""
    cm = compiled(market, kind)
    order = adversarial_order(cm, pair.pma, matching, pair.candidate)
    cp = CompiledPMA(cm.market.report(pair.pma), cm.pmas[pair.pma].populations, order)
    chosen = cp.choose_ids(cm.kind, matching.assigned(pair.pma) | {pair.candidate})
    return REAL if pair.candidate in chosen else TIE_BREAK_ARTIFACT


def explain_rejection(market, kind=None, matching: Matching = None, pma=None, candidate=None) -> Explanation:
    """Why ``candidate`` did not end up at ``pma``."""
    cm = compiled(market, kind)
    if pma not in cm.pmas or candidate not in cm.pmas[pma].pos:
        raise QueryError(f"{pma!r} does not rank {candidate!r}")
    if matching.of(candidate) == pma:
        raise QueryError(f"{candidate!r} is assigned to {pma!r}")
    prefs = cm.prefs[candidate]
    if pma not in prefs:
        return Explanation(candidate, pma, DID_NOT_RANK)
    cur = matching.of(candidate)
    if cur is not None and cur in prefs and prefs.index(cur) < prefs.index(pma):
        return Explanation(candidate, pma, MATCHED_TO_PREFERRED, cur)
    cp = cm.pmas[pma]
    res = cp.choose(cm.kind, matching.assigned(pma) | {candidate})
    entry = res.trace[candidate]
    if entry.accepted:
        return Explanation(candidate, pma, BLOCKING, entry.pass_name)
    blocker = entry.blocking_population
    if blocker == CAPACITY_ID:
        mine = cp.pos[candidate]
        promoted = sorted(
            (cp.pos[c], e.pass_name)
            for c, e in res.trace.items()
            if e.accepted and e.pass_name in _PROMOTION_PASSES and cp.pos[c] > mine
        )
        if promoted:
            return Explanation(candidate, pma, DISPLACED_BY_PROMOTION, promoted[0][1])
    return Explanation(candidate, pma, QUOTA_VIOLATION, blocker)


def explain_all(market, kind=None, matching: Matching = None) -> list:
    """Explain every candidate a PMA ranked above some candidate it got."""
    cm = compiled(market, kind)
    out = []
    by_pma = matching.by_pma()
    for p in cm.pma_ids:
        got = by_pma.get(p)
        if not got:
            continue
        ranking = cm.market.report(p).ranking
        worst = max(ranking[c] for c in got if c in ranking)
        for c in cm.pmas[p].order:
            if ranking[c] < worst and c not in got:
                out.append(explain_rejection(cm, None, matching, p, c))
    return out


def summarize(market, matching: Matching, pairs) -> OutcomeStats:
    cm = compiled(market)
    m = cm.market
    active = [c for c in m.candidates if c.preferences]
    matched = [c for c in m.candidates if matching.of(c.id) is not None]
    top = sum(1 for c in matched if c.preferences and c.preferences[0] == matching.of(c.id))
    slots = sum(r.capacity for r in m.reports)
    by_pma = matching.by_pma()
    pops = []
    for r in m.reports:
        got = by_pma.get(r.pma, set())
        for p in m.populations(r.pma):
            n = len(got & p.members)
            pops.append({
                "pma": r.pma,
                "population": p.id,
                "assigned": n,
                "min_target": p.min_target,
                "max_quota": p.max_quota,
                "target_fill": min(1.0, n / p.min_target) if p.min_target else 1.0,
                "quota_usage": (n / p.max_quota if p.max_quota else 0.0) if p.max_quota is not None else None,
            })
    counts = {REAL: 0, TIE_BREAK_ARTIFACT: 0}
    for bp in pairs:
        counts[bp.classification or REAL] = counts.get(bp.classification or REAL, 0) + 1
    counts["total"] = len(pairs)
    return OutcomeStats(
        candidates=len(m.candidates),
        active_candidates=len(active),
        matched=len(matched),
        top_choice_fraction=top / len(matched) if matched else 0.0,
        slots=slots,
        slots_filled_fraction=min(1.0, len(matched) / slots) if slots else 0.0,
        blocking_pairs=counts,
        unique_blocking_pmas=len({bp.pma for bp in pairs}),
        unique_real_blocking_pmas=len({bp.pma for bp in pairs if (bp.classification or REAL) == REAL}),
        populations=pops,
    )
