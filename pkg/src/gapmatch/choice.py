"""Choice functions: how a preference report picks a subset of applicants.

Four semantics are supported (see :class:`ChoiceKind`).  All of them walk
the applicants in the PMA's strict order and never let a maximum quota be
exceeded, except that 2019 semantics accepts 0-priority candidates
unconditionally.  The heavy lifting is done by the kernel chosen in
:mod:`gapmatch._backend`.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Optional, Sequence

from . import _backend
from .model import PreferenceReport, expand_populations

CAPACITY_ID = "(capacity)"


class ChoiceSemanticsError(ValueError):
    pass


class ChoiceKind(str, Enum):
    Y2018 = "2018"
    PREFER_MORE = "prefer-more"
    PREFER_MORE_STAGED = "prefer-more-staged"
    Y2019 = "2019"

    @property
    def code(self) -> int:
        return _KIND_CODES[self]


_KIND_CODES = {
    ChoiceKind.Y2018: 0,
    ChoiceKind.PREFER_MORE: 1,
    ChoiceKind.PREFER_MORE_STAGED: 2,
    ChoiceKind.Y2019: 3,
}

PASS_NAMES = {0: "zero_priority", 1: "min_target", 2: "gender_min_target", 3: "regular"}


@dataclass(frozen=True)
class TraceEntry:
    candidate: str
    accepted: bool
    pass_name: Optional[str] = None  # set when accepted
    step: Optional[int] = None  # 0-based acceptance order among applicants
    blocking_population: Optional[str] = None  # set when rejected

    def to_json(self) -> dict:
        return {
            "candidate": self.candidate,
            "accepted": self.accepted,
            "pass": self.pass_name,
            "step": self.step,
            "blocking_population": self.blocking_population,
        }


@dataclass(frozen=True)
class ChoiceResult:
    chosen: frozenset
    trace: Mapping[str, TraceEntry] = field(default_factory=dict)
    committed: frozenset = frozenset()
    over_quota: tuple = ()  # populations above quota in the final chosen set

    def to_json(self) -> dict:
        return {
            "chosen": sorted(self.chosen),
            "committed": sorted(self.committed),
            "over_quota": list(self.over_quota),
            "trace": [self.trace[c].to_json() for c in sorted(self.trace)],
        }


class CompiledPMA:
    """A preference report bound to a strict order, ready for the kernel."""

    def __init__(self, report: PreferenceReport, populations: Sequence, strict_order: Sequence,
                 kernel=None):
        kernel = kernel or _backend.kernel
        self.pma = report.pma
        self.report = report
        self.order = tuple(strict_order)
        self.pos = {c: i for i, c in enumerate(self.order)}
        self.populations = tuple(populations)
        self.population_ids = tuple(p.id for p in self.populations) + (CAPACITY_ID,)
        self.quotas = tuple(p.max_quota for p in self.populations) + (report.capacity,)
        root = len(self.populations)
        cand_pops = [[] for _ in self.order]
        for k, p in enumerate(self.populations):
            for c in p.members:
                i = self.pos.get(c)
                if i is not None:
                    cand_pops[i].append(k)
        for ps in cand_pops:
            ps.sort()
            ps.append(root)
        self.cand_pops = cand_pops
        self.zero = [report.ranking.get(c) == 0 for c in self.order]
        self.has_zero = any(self.zero)
        self.kernel_report = kernel.CompiledReport(
            [p.min_target for p in self.populations] + [0],
            [-1 if p.max_quota is None else p.max_quota for p in self.populations] + [report.capacity],
            [p.is_gender for p in self.populations] + [False],
            cand_pops,
            self.zero,
        )

    def choose_local(self, kind: ChoiceKind, apps: Sequence[int], committed: Sequence[int] = ()):
        """Kernel call on local indices; ``apps`` must be ascending."""
        return self.kernel_report.choose(kind.code, apps, committed)

    def choose_ids(self, kind: ChoiceKind, applicants: Iterable, committed: Iterable = ()) -> set:
        """Chosen applicant ids (committed excluded); unranked applicants are never chosen."""
        apps = sorted(self.pos[c] for c in applicants if c in self.pos)
        com = [self.pos[c] for c in committed]
        chosen, _ = self.kernel_report.choose(kind.code, apps, com)
        order = self.order
        return {order[i] for i in chosen}

    def choose(self, kind: ChoiceKind, applicants: Iterable, committed: Iterable = ()) -> ChoiceResult:
        kind = ChoiceKind(kind)
        applicants = set(applicants)
        committed = frozenset(committed)
        if applicants & committed:
            raise ValueError("committed and applicants must be disjoint")
        unranked = sorted(c for c in applicants | committed if c not in self.pos)
        if unranked:
            raise ValueError(f"PMA {self.pma!r} does not rank {unranked}")
        if kind is not ChoiceKind.Y2019:
            zeros = sorted(c for c in applicants | committed if self.report.ranking.get(c) == 0)
            if zeros:
                raise ChoiceSemanticsError(
                    f"0-priority candidates {zeros} are only meaningful under 2019 semantics"
                )
        apps = sorted(self.pos[c] for c in applicants)
        com = [self.pos[c] for c in committed]
        chosen_local, status = self.kernel_report.choose(kind.code, apps, com)
        step = {c: k for k, c in enumerate(chosen_local)}
        trace = {}
        for i, s in zip(apps, status):
            cid = self.order[i]
            if s >= 0:
                trace[cid] = TraceEntry(cid, True, PASS_NAMES[s], step[i])
            else:
                trace[cid] = TraceEntry(cid, False, blocking_population=self.population_ids[-s - 1])
        chosen = frozenset(self.order[i] for i in chosen_local) | committed
        return ChoiceResult(chosen, trace, committed, self.over_quota(chosen))

    def over_quota(self, chosen: Iterable) -> tuple:
        counts = [0] * len(self.population_ids)
        for c in chosen:
            for p in self.cand_pops[self.pos[c]]:
                counts[p] += 1
        return tuple(
            pid for pid, q, n in zip(self.population_ids, self.quotas, counts) if q is not None and n > q
        )


def compile_report(report: PreferenceReport, strict_order: Sequence, populations=None,
                   kernel=None) -> CompiledPMA:
    if populations is None:
        if report.auto_rules:
            raise ValueError("report has auto rules; pass expanded populations (Market.populations)")
        populations = expand_populations(report.populations)
    return CompiledPMA(report, populations, strict_order, kernel)


def choose(report: PreferenceReport, kind, input: Iterable, strict_order: Sequence,
           populations=None, committed: Iterable = ()) -> ChoiceResult:
    return compile_report(report, strict_order, populations).choose(kind, input, committed)


def choose_2018(report, input, strict_order, populations=None) -> ChoiceResult:
    """First promote anyone in an unmet minimum-target population, then the rest."""
    return choose(report, ChoiceKind.Y2018, input, strict_order, populations)


def choose_prefer_more(report, input, strict_order, populations=None) -> ChoiceResult:
    """Repeatedly take the best candidate among those in the most unmet-target populations."""
    return choose(report, ChoiceKind.PREFER_MORE, input, strict_order, populations)


def choose_prefer_more_staged(report, input, strict_order, populations=None) -> ChoiceResult:
    return choose(report, ChoiceKind.PREFER_MORE_STAGED, input, strict_order, populations)


def choose_2019(report, input, strict_order, populations=None) -> ChoiceResult:
    """0-priority first (quotas ignored), then non-gender targets, gender targets, the rest."""
    return choose(report, ChoiceKind.Y2019, input, strict_order, populations)


def choose_with_committed(report, kind, committed, applicants, strict_order,
                          populations=None) -> ChoiceResult:
    """Choose from ``applicants`` with ``committed`` already holding seats.

    Committed candidates count toward every quota and target and are always
    kept; populations they alone push above quota show up in ``over_quota``.
    """
    return choose(report, kind, applicants, strict_order, populations, committed)
