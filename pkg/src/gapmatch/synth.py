"""Seeded synthetic markets for corpus tests and mechanism comparisons.

Both sides score the other with ``alpha * common + (1 - alpha) * noise``: a
candidate's common value is shared by all PMAs (and a PMA's by all
candidates), so ``alpha`` tunes how correlated the rankings are.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, replace
from typing import Optional

from .model import Candidate, Market, PreferenceReport, RawPopulation, validate
from .structure import is_laminar, min_targets_disjoint_chains, min_targets_pairwise_disjoint

LAMINAR_DISJOINT = "laminar_disjoint_targets"
LAMINAR_CHAIN = "laminar_chain_targets"
ARBITRARY = "arbitrary_intersecting"
MODES = (LAMINAR_DISJOINT, LAMINAR_CHAIN, ARBITRARY)


class GenerationError(ValueError):
    pass


@dataclass(frozen=True)
class GenConfig:
    candidates: int = 8
    pmas: int = 3
    slots: tuple = (1, 3)
    total_slots: Optional[int] = None  # rescale capacities to sum to this
    mode: str = LAMINAR_DISJOINT
    populations: tuple = (0, 3)
    target_density: float = 0.5
    max_target: int = 2
    quota_density: float = 0.5
    alpha: float = 0.5
    list_length: tuple = (1, 3)
    rank_probability: float = 0.9  # a PMA ranks a candidate who listed it
    tie_probability: float = 0.0
    gender_fraction: float = 0.0
    zero_priority: float = 0.0  # only meaningful for 2019 semantics
    seed: int = 0

    def check(self):
        for name in ("slots", "populations", "list_length"):
            lo, hi = getattr(self, name)
            if lo > hi or lo < 0:
                raise GenerationError(f"{name} range {lo}..{hi} is empty or negative")
        if self.slots[0] < 1:
            raise GenerationError("every PMA needs at least one slot")
        if not 0.0 <= self.alpha <= 1.0:
            raise GenerationError("alpha must lie in [0, 1]")
        if self.mode not in MODES:
            raise GenerationError(f"unknown mode {self.mode!r}")
        if self.mode != ARBITRARY and self.candidates and self.populations[0] > 2 * self.candidates - 1:
            raise GenerationError("a laminar family over n candidates has at most 2n - 1 distinct sets")
        if self.total_slots is not None and self.total_slots < self.pmas:
            raise GenerationError("total_slots must give every PMA a slot")

    def to_json(self) -> dict:
        return {k: list(v) if isinstance(v, tuple) else v for k, v in self.__dict__.items()}

    @classmethod
    def from_json(cls, d: dict) -> "GenConfig":
        return cls(**{k: tuple(v) if isinstance(v, list) else v for k, v in d.items()})


def _laminar_family(rng: random.Random, members: list, k: int) -> list:
    """Up to ``k`` distinct sets forming a tree under inclusion."""
    nodes = [frozenset(members)]
    out: list = []
    seen = set()
    if rng.random() < 0.3 and members:
        out.append(nodes[0])
        seen.add(nodes[0])
    attempts = 0
    while len(out) < k and attempts < 20 * (k + 1):
        attempts += 1
        splittable = [x for x in nodes if len(x) >= 2]
        if not splittable:
            break
        parent = rng.choice(splittable)
        nodes.remove(parent)  # split each set once, or the blocks would cross
        items = sorted(parent)
        rng.shuffle(items)
        cut = rng.randint(1, len(items) - 1)
        for block in (frozenset(items[:cut]), frozenset(items[cut:])):
            nodes.append(block)
            if len(out) < k and block not in seen and rng.random() < 0.7:
                out.append(block)
                seen.add(block)
    return out


def _arbitrary_family(rng: random.Random, members: list, k: int) -> list:
    out = []
    for _ in range(k):
        size = rng.randint(1, len(members))
        out.append(frozenset(rng.sample(members, size)))
    return out


class _Pop:
    def __init__(self, id, members):
        self.id = id
        self.members = members
        self.min_target = 0


def _assign_targets(rng, cfg, sets) -> list:
    pops = [_Pop(f"P{i}", s) for i, s in enumerate(sets)]
    order = list(range(len(pops)))
    rng.shuffle(order)
    targeted = []
    for i in order:
        if rng.random() >= cfg.target_density:
            continue
        p = pops[i]
        p.min_target = rng.randint(1, max(1, min(cfg.max_target, len(p.members))))
        if cfg.mode == LAMINAR_DISJOINT and not min_targets_pairwise_disjoint(targeted + [p]):
            p.min_target = 0
        elif cfg.mode == LAMINAR_CHAIN and not min_targets_disjoint_chains(targeted + [p]):
            p.min_target = 0
        if p.min_target:
            targeted.append(p)
    return pops


def generate(config: GenConfig) -> Market:
    """Deterministic in ``config.seed``; the mode's structure is checked before returning."""
    config.check()
    rng = random.Random(config.seed)
    n, m = config.candidates, config.pmas
    cids = [f"c{i}" for i in range(n)]
    pids = [f"p{j}" for j in range(m)]
    quality = {c: rng.random() for c in cids}
    popularity = {p: rng.random() for p in pids}
    a = config.alpha

    candidates = []
    for c in cids:
        length = min(rng.randint(*config.list_length), m)
        util = {p: a * popularity[p] + (1 - a) * rng.random() for p in pids}
        prefs = tuple(sorted(pids, key=lambda p: -util[p])[:length])
        attrs = {"school": f"s{rng.randrange(max(1, n // 4 or 1))}", "town": f"t{rng.randrange(max(1, n // 8 or 1))}"}
        candidates.append(Candidate(c, prefs, attrs))

    caps = [rng.randint(*config.slots) for _ in pids]
    if config.total_slots is not None and m:
        total = sum(caps)
        caps = [max(1, int(cap * config.total_slots / total)) for cap in caps]
        k = 0
        while sum(caps) != config.total_slots:
            i = k % m
            if sum(caps) < config.total_slots:
                caps[i] += 1
            elif caps[i] > 1:
                caps[i] -= 1
            k += 1

    reports = []
    for p, cap in zip(pids, caps):
        applicants = [c.id for c in candidates if p in c.preferences]
        ranked = [c for c in applicants if rng.random() < config.rank_probability]
        score = {c: a * quality[c] + (1 - a) * rng.random() for c in ranked}
        ranked.sort(key=lambda c: -score[c])
        ranking = {}
        rank = 0
        for i, c in enumerate(ranked):
            if i == 0 or rng.random() >= config.tie_probability:
                rank += 1
            ranking[c] = rank
        if config.zero_priority:
            for c in ranked:
                if rng.random() < config.zero_priority:
                    ranking[c] = 0
        k = rng.randint(*config.populations) if ranked else 0
        if config.mode == ARBITRARY:
            sets = _arbitrary_family(rng, ranked, k)
        else:
            sets = _laminar_family(rng, ranked, k)
        pops = []
        for tp in _assign_targets(rng, config, sets):
            quota = None
            if rng.random() < config.quota_density:
                quota = rng.randint(max(1, tp.min_target), max(1, len(tp.members)))
            pops.append(
                RawPopulation(
                    tp.id,
                    members=tp.members,
                    min_target=tp.min_target,
                    max_quota=quota,
                    is_gender=rng.random() < config.gender_fraction,
                )
            )
        reports.append(PreferenceReport(p, cap, ranking, tuple(pops)))

    market = Market(tuple(candidates), tuple(reports), tie_break_seed=rng.randrange(2**31))
    _verify(market, config)
    return market


def _verify(market: Market, config: GenConfig):
    problems = validate(market)
    if problems:
        raise GenerationError(f"generated market is invalid: {problems[0].message}")
    if config.mode == ARBITRARY:
        return
    for r in market.reports:
        pops = market.populations(r.pma)
        if not is_laminar(pops):
            raise GenerationError(f"{r.pma}: populations not laminar")
        if config.mode == LAMINAR_DISJOINT and not min_targets_pairwise_disjoint(pops):
            raise GenerationError(f"{r.pma}: minimum targets intersect")
        if config.mode == LAMINAR_CHAIN and not min_targets_disjoint_chains(pops):
            raise GenerationError(f"{r.pma}: minimum targets are not disjoint chains")


def corpus(config: GenConfig, count: int, start_seed: int = 0):
    """``count`` markets with consecutive seeds."""
    for s in range(start_seed, start_seed + count):
        yield generate(replace(config, seed=s))


SCALE_2020 = GenConfig(
    candidates=3100,
    pmas=42,
    slots=(30, 80),
    total_slots=2329,
    mode=ARBITRARY,
    populations=(4, 10),
    target_density=0.4,
    max_target=15,
    quota_density=0.6,
    alpha=0.3,
    list_length=(2, 8),
    rank_probability=0.85,
    tie_probability=0.1,
)
