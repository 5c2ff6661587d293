"""Corpus-level property suites.

Each suite returns a :class:`SuiteResult`; ``gapmatch verify`` runs them all
and the test suite asserts on the same results.
"""
from __future__ import annotations

import itertools
import random
import statistics
import time
import tracemalloc
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

from .audit import find_blocking_pairs, is_individually_rational
from .choice import ChoiceKind, CompiledPMA
from .engine import (
    Pareto,
    PipelineConfig,
    candidate_pareto_stage,
    compiled,
    pma_pareto_stage,
    pma_stage_displaceable,
    run_boston,
    run_da,
    run_pipeline,
)
from .model import Market, Matching, apply_tie_breaking
from .oracles import (
    FixtureId,
    all_profiles,
    always_chosen,
    brute_force_stable_matchings,
    check_choice_properties,
    check_strategyproofness_market,
    check_sure_thing,
    check_truncation_safety,
    fixture,
    oracle_blocking_pairs,
    pma_chooser,
)
from .synth import ARBITRARY, LAMINAR_CHAIN, LAMINAR_DISJOINT, SCALE_2020, GenConfig, corpus, generate

MAX_FAILURES = 20

# Overlapping tight quotas and no targets: DA often leaves a free slot behind.
FREE_SLOT = GenConfig(
    candidates=6, pmas=3, slots=(1, 2), mode=ARBITRARY, populations=(1, 3), target_density=0.0,
    quota_density=0.9, list_length=(1, 3), rank_probability=1.0, alpha=0.3,
)

SMALL = GenConfig(
    candidates=8, pmas=3, slots=(1, 3), populations=(0, 4), target_density=0.6,
    max_target=2, quota_density=0.5, list_length=(1, 3), tie_probability=0.3,
)


@dataclass
class SuiteResult:
    name: str
    ok: bool = True
    checked: int = 0
    failures: list = field(default_factory=list)
    elapsed: float = 0.0
    info: dict = field(default_factory=dict)
    inconclusive: bool = False

    def fail(self, msg: str):
        self.ok = False
        if len(self.failures) < MAX_FAILURES:
            self.failures.append(msg)

    def line(self) -> str:
        status = "PASS" if self.ok else "FAIL"
        extra = " (inconclusive)" if self.inconclusive else ""
        return f"{status} {self.name}: {self.checked} checks in {self.elapsed:.2f}s{extra}"

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "ok": self.ok,
            "inconclusive": self.inconclusive,
            "checked": self.checked,
            "elapsed_s": round(self.elapsed, 3),
            "failures": list(self.failures),
            "info": self.info,
        }


def _timed(fn: Callable) -> Callable:
    def run(*a, **kw) -> SuiteResult:
        t = time.perf_counter()
        res = fn(*a, **kw)
        res.elapsed = time.perf_counter() - t
        return res

    run.__name__ = fn.__name__
    run.__doc__ = fn.__doc__
    return run


def small_corpus(mode: str, count: int, start: int = 0, **overrides):
    """Markets with at most 8 candidates and 3 PMAs; sizes vary with the seed."""
    for s in range(start, start + count):
        rng = random.Random(s * 7919 + 17)
        cfg = replace(SMALL, mode=mode, seed=s, candidates=rng.randint(1, 8), pmas=rng.randint(1, 3), **overrides)
        yield generate(cfg)


# ---------------------------------------------------------------------------


@_timed
def fixture_exactness() -> SuiteResult:
    """Round log and final matching of the strategyproofness counterexample."""
    res = SuiteResult("fixture_exactness")
    m = fixture(FixtureId.THM3_STRATEGYPROOFNESS)
    out = run_da(m, ChoiceKind.Y2018)
    expected_rounds = [
        ({"d": "m", "e": "m", "g": "m'", "c": "m''", "f": "m''"}, {"m": ("e",), "m''": ("c",)}),
        ({"c": "m", "d": "m", "e": "m'", "f": "m''", "g": "m'"}, {"m'": ("e",)}),
        ({"c": "m", "d": "m", "f": "m''", "g": "m'"}, {}),
    ]
    got = [(dict(r.applications), {p: tuple(cs) for p, cs in r.rejections.items()}) for r in out.rounds]
    res.checked += 1
    if got != expected_rounds:
        res.fail(f"round log {got}")
    res.checked += 1
    if out.matching != Matching({"c": "m", "d": "m", "g": "m'", "f": "m''"}):
        res.fail(f"truthful matching {dict(out.matching.assignment)}")
    lie = run_da(m.with_preferences("e", ("m'", "m")), ChoiceKind.Y2018).matching
    res.checked += 1
    if lie != Matching({"c": "m", "e": "m", "g": "m'", "f": "m''"}):
        res.fail(f"misreport matching {dict(lie.assignment)}")
    return res


@_timed
def no_stable_certificate() -> SuiteResult:
    res = SuiteResult("no_stable_certificate")
    m = fixture(FixtureId.THM3_NO_STABLE)
    stable = brute_force_stable_matchings(apply_tie_breaking(m), ChoiceKind.Y2018)
    res.checked += 1
    if stable:
        res.fail(f"found stable matchings {[dict(s.assignment) for s in stable]}")
    out = run_da(m, ChoiceKind.Y2018).matching
    pairs = find_blocking_pairs(m, ChoiceKind.Y2018, out)
    res.checked += 1
    if not pairs:
        res.fail("DA output has no blocking pair")
    res.info = {"stable_matchings": len(stable), "da_blocking_pairs": len(pairs)}
    return res


def _stability_and_sp(res: SuiteResult, markets, kind, with_properties=False):
    config = PipelineConfig(kind, Pareto.NONE)
    for i, m in enumerate(markets):
        cm = compiled(m, kind)
        out = run_da(cm).matching
        res.checked += 1
        ir = is_individually_rational(cm, None, out)
        pairs = find_blocking_pairs(cm, None, out, classify=False)
        oracle = oracle_blocking_pairs(cm.strict, kind, out)
        if not ir or pairs:
            res.fail(f"market {i}: unstable ({len(pairs)} blocking pairs, IR={ir.ok})")
        if {(p.candidate, p.pma) for p in pairs} != oracle:
            res.fail(f"market {i}: audit and oracle disagree on blocking pairs")
        for rep in check_strategyproofness_market(cm, config):
            if not rep.clean:
                res.fail(f"market {i}: {rep.candidate} gains with {rep.profitable[0]}")


@_timed
def disjoint_targets(count: int = 1000, start: int = 0) -> SuiteResult:
    """2018 semantics, laminar populations, disjoint targets: DA stable and strategyproof."""
    res = SuiteResult("disjoint_targets_stable_strategyproof")
    _stability_and_sp(res, small_corpus(LAMINAR_DISJOINT, count, start), ChoiceKind.Y2018)
    return res


@_timed
def chain_targets(count: int = 1000, start: int = 0, universes: int = 200) -> SuiteResult:
    """Prefer-more semantics on disjoint chains: stable, strategyproof, well-behaved choice."""
    res = SuiteResult("chain_targets_stable_strategyproof")
    _stability_and_sp(res, small_corpus(LAMINAR_CHAIN, count, start), ChoiceKind.PREFER_MORE)
    props = 0
    cfg = GenConfig(candidates=7, pmas=1, slots=(1, 6), mode=LAMINAR_CHAIN, populations=(1, 6),
                    target_density=0.8, max_target=3, quota_density=0.5, list_length=(1, 1),
                    rank_probability=1.0, tie_probability=0.2)
    for m in corpus(cfg, universes, start):
        sm = apply_tie_breaking(m)
        for r in m.reports:
            cp = CompiledPMA(r, m.populations(r.pma), sm.orders[r.pma])
            for kind in (ChoiceKind.PREFER_MORE, ChoiceKind.PREFER_MORE_STAGED):
                rep = check_choice_properties(pma_chooser(cp, kind), cp.order)
                props += rep.checked
                if not rep.clean:
                    bad = (rep.substitutability or rep.irc or rep.lad or rep.one_removal)[0]
                    res.fail(f"{kind.value} seed {m.tie_break_seed}: property violation {bad}")
    res.info["property_checks"] = props
    return res


def random_reports(count: int, start: int = 0, mode: str = ARBITRARY, size: int = 7, **overrides):
    """Single-PMA markets whose PMA ranks ``size`` candidates."""
    base = dict(candidates=size, pmas=1, slots=(1, size), mode=mode, populations=(0, 5),
                target_density=0.6, max_target=3, quota_density=0.5, list_length=(1, 1),
                rank_probability=1.0, tie_probability=0.2, gender_fraction=0.3)
    base.update(overrides)
    return corpus(GenConfig(**base), count, start)


def _compiled_report(m: Market):
    sm = apply_tie_breaking(m)
    r = m.reports[0]
    return CompiledPMA(r, m.populations(r.pma), sm.orders[r.pma])


@_timed
def irc_universality(count: int = 500, start: int = 0) -> SuiteResult:
    """Irrelevance of rejected contracts needs no structure at all."""
    res = SuiteResult("irc_universality")
    kinds = (ChoiceKind.Y2018, ChoiceKind.PREFER_MORE, ChoiceKind.PREFER_MORE_STAGED)
    for i, m in enumerate(random_reports(count, start)):
        cp = _compiled_report(m)
        kind = kinds[i % len(kinds)]
        rep = check_choice_properties(pma_chooser(cp, kind), cp.order)
        res.checked += rep.checked
        if rep.irc:
            res.fail(f"report {i} ({kind.value}): IRC violation {rep.irc[0]}")
    return res


def _subsets(order):
    for k in range(len(order) + 1):
        yield from itertools.combinations(order, k)


@_timed
def choice_equivalences(count: int = 1000, start: int = 0) -> SuiteResult:
    """Staged prefer-more equals prefer-more; the kinds coincide where they should."""
    res = SuiteResult("choice_equivalences")
    stats = {"staged": 0, "no_targets": 0, "disjoint_targets": 0}
    for i, m in enumerate(random_reports(count, start)):
        cp = _compiled_report(m)
        pops = m.populations(m.reports[0].pma)
        no_targets = all(p.min_target == 0 for p in pops)
        targeted = [p for p in pops if p.min_target > 0]
        disjoint = all(not (a.members & b.members) for a, b in itertools.combinations(targeted, 2))
        for S in _subsets(cp.order):
            a = cp.choose_ids(ChoiceKind.PREFER_MORE, S)
            b = cp.choose_ids(ChoiceKind.PREFER_MORE_STAGED, S)
            res.checked += 1
            stats["staged"] += 1
            if a != b:
                res.fail(f"report {i}: staged {sorted(b)} != prefer-more {sorted(a)} on {S}")
            if no_targets:
                stats["no_targets"] += 1
                others = {k: cp.choose_ids(k, S) for k in (ChoiceKind.Y2018, ChoiceKind.Y2019)}
                if any(v != a for v in others.values()):
                    res.fail(f"report {i}: kinds disagree without targets on {S}")
            elif disjoint:
                stats["disjoint_targets"] += 1
                if cp.choose_ids(ChoiceKind.Y2018, S) != a:
                    res.fail(f"report {i}: 2018 != prefer-more with disjoint targets on {S}")
    res.info = stats
    return res


# ---------------------------------------------------------------------------
# truncation and sure-thing


def _tiny_markets(count: int, start: int, candidates: int, pmas: int):
    cfg = GenConfig(candidates=candidates, pmas=pmas, slots=(1, 2), mode=ARBITRARY, populations=(0, 2),
                    target_density=0.5, max_target=1, quota_density=0.5, list_length=(1, pmas),
                    rank_probability=0.9, tie_probability=0.3)
    return corpus(cfg, count, start)


_KINDS4 = (ChoiceKind.Y2018, ChoiceKind.PREFER_MORE, ChoiceKind.Y2019)


@_timed
def truncation_sure_thing(exhaustive_bases: int = 20, sampled: int = 1000, start: int = 0) -> SuiteResult:
    """Truncation safety of DA and the sure-thing guarantee of the full pipeline.

    Small markets (3 candidates, 2 PMAs) are checked over every joint profile;
    larger ones over seeded random markets.
    """
    res = SuiteResult("truncation_and_sure_thing")
    counts = {"truncation": 0, "sure_thing": 0, "sure_thing_applicable": 0}
    full = Pareto.ALTERNATE
    for b, base in enumerate(_tiny_markets(exhaustive_bases, start, 3, 2)):
        kind = _KINDS4[b % len(_KINDS4)]
        cm = compiled(base, kind)
        for prof in all_profiles(cm.candidate_ids, cm.pma_ids):
            m = cm
            for c, prefs in prof.items():
                m = m.with_preferences(c, prefs)
            t = check_truncation_safety(m, PipelineConfig(kind, Pareto.NONE))
            counts["truncation"] += t.checked
            if not t.clean:
                res.fail(f"exhaustive base {b}: truncation {t.violations[0]}")
        for c in cm.candidate_ids:
            for p in cm.pma_ids:
                if c not in cm.pmas[p].pos or not always_chosen(cm.pmas[p], kind, c):
                    continue
                others = [x for x in cm.candidate_ids if x != c]
                st = check_sure_thing(cm, PipelineConfig(kind, full), c, p, all_profiles(others, cm.pma_ids))
                counts["sure_thing_applicable"] += 1
                counts["sure_thing"] += st.checked
                if not st.clean:
                    res.fail(f"exhaustive base {b}: sure-thing {c}@{p} {st.violations[0]}")
    for i, m in enumerate(small_corpus(ARBITRARY, sampled, start + 10_000)):
        kind = _KINDS4[i % len(_KINDS4)] if not _has_zero(m) else ChoiceKind.Y2019
        t = check_truncation_safety(m, PipelineConfig(kind, Pareto.NONE))
        counts["truncation"] += t.checked
        if not t.clean:
            res.fail(f"sampled market {i}: truncation {t.violations[0]}")
        cm = compiled(m, kind)
        for c in cm.candidate_ids:
            for p in cm.prefs[c]:
                if c in cm.pmas[p].pos and always_chosen(cm.pmas[p], kind, c):
                    st = check_sure_thing(cm, PipelineConfig(kind, full), c, p, max_list_len=3)
                    counts["sure_thing_applicable"] += 1
                    counts["sure_thing"] += st.checked
                    if not st.clean:
                        res.fail(f"sampled market {i}: sure-thing {c}@{p} {st.violations[0]}")
                    break
    res.checked = counts["truncation"] + counts["sure_thing"]
    res.info = counts
    return res


def _has_zero(m: Market) -> bool:
    return any(v == 0 for r in m.reports for v in r.ranking.values())


@_timed
def truncation_violation_search(budget_s: float = 600.0, start: int = 0, max_markets: int = 200_000) -> SuiteResult:
    """Look for a truncation that pays off once the candidate stage runs.

    Finding nothing inside the budget is reported as inconclusive, not failure.
    """
    res = SuiteResult("truncation_violation_search")
    deadline = time.perf_counter() + budget_s
    shapes = [(5, 3), (6, 3), (6, 4), (7, 3)]
    for s in range(start, start + max_markets):
        if time.perf_counter() > deadline:
            break
        n, k = shapes[s % len(shapes)]
        cfg = replace(FREE_SLOT, candidates=n, pmas=k, list_length=(1, k), seed=s)
        m = generate(cfg)
        rep = check_truncation_safety(m, PipelineConfig(ChoiceKind.Y2018, Pareto.CANDIDATE))
        res.checked += 1
        if not rep.clean:
            c, lst, got, orig = rep.violations[0]
            if not check_truncation_safety(m, PipelineConfig(ChoiceKind.Y2018, Pareto.NONE), [c]).clean:
                res.fail(f"seed {s}: truncation also pays under pure DA")
            res.info = {"seed": s, "kind": ChoiceKind.Y2018.value, "candidate": c, "truncated": list(lst),
                        "truncated_outcome": got, "original_outcome": orig, "config": cfg.to_json()}
            return res
    res.inconclusive = True
    return res


# ---------------------------------------------------------------------------
# Pareto stages


def _check_stages(res: SuiteResult, cm, start: Matching, label: str) -> int:
    st = candidate_pareto_stage(cm, matching=start)
    res.checked += 1
    for c in cm.candidate_ids:
        prefs = cm.prefs[c]
        rank = lambda p: prefs.index(p) if p is not None else len(prefs)
        if rank(st.matching.of(c)) > rank(start.of(c)):
            res.fail(f"{label}: candidate stage moved {c} from {start.of(c)} to {st.matching.of(c)}")
    by = st.matching.by_pma()
    for c in cm.candidate_ids:
        prefs = cm.prefs[c]
        cur = st.matching.of(c)
        for p in prefs[: prefs.index(cur) if cur else len(prefs)]:
            if cm.accepts_all(p, by.get(p, set()), c):
                res.fail(f"{label}: free-slot pair ({c}, {p}) survives the candidate stage")
    ps = pma_pareto_stage(cm, matching=start)
    for r in ps.resolutions:
        # The rule is judged on the market as given: d's list does not change.
        if r.displaced is None or not pma_stage_displaceable(cm, r.displaced, r.pma):
            res.fail(f"{label}: PMA stage displaced {r.displaced} from {r.pma}")
        later = ps.matching.of(r.displaced) if r.displaced is not None else None
        if later is not None and cm.prefs[r.displaced].index(later) >= cm.prefs[r.displaced].index(r.pma):
            # a displaced candidate may only come back by a later swap higher up their list
            res.fail(f"{label}: displaced {r.displaced} ends at {later}, not above {r.pma}")
    for c in cm.candidate_ids:
        if start.of(c) is not None and ps.matching.of(c) is None and not any(r.displaced == c for r in ps.resolutions):
            res.fail(f"{label}: {c} lost a seat without a recorded displacement")
    return len(st.resolutions), len(ps.resolutions)


def random_ir_matching(cm, rng: random.Random) -> Matching:
    """Seat candidates in random order at random listed PMAs that take everyone present."""
    assign: dict = {}
    members: dict = {}
    ids = list(cm.candidate_ids)
    rng.shuffle(ids)
    for c in ids:
        opts = list(cm.prefs[c])
        rng.shuffle(opts)
        for p in opts[: rng.randint(0, len(opts))]:
            if cm.accepts_all(p, members.get(p, set()), c):
                assign[c] = p
                members.setdefault(p, set()).add(c)
                break
    return Matching(assign)


@_timed
def pareto_contracts(count: int = 300, start: int = 0) -> SuiteResult:
    """The candidate stage removes every free-slot blocking pair without hurting anyone;
    the PMA stage only displaces candidates with nowhere lower to go.

    Both stages are run from the DA outcome, the Boston outcome and a random
    individually rational matching; the last two leave far more to improve.
    """
    res = SuiteResult("pareto_contracts")
    kinds = (ChoiceKind.Y2018, ChoiceKind.PREFER_MORE, ChoiceKind.PREFER_MORE_STAGED)
    markets = itertools.chain(
        ((m, ChoiceKind.Y2018) for m in small_corpus(LAMINAR_DISJOINT, count, start)),
        ((m, kinds[i % 3]) for i, m in enumerate(small_corpus(ARBITRARY, count, start))),
        ((m, kinds[i % 3]) for i, m in enumerate(corpus(FREE_SLOT, count, start))),
    )
    counts = {"candidate_resolutions": 0, "pma_resolutions": 0}
    for i, (m, kind) in enumerate(markets):
        cm = compiled(m, kind)
        starts = (("da", run_da(cm).matching), ("boston", run_boston(cm)),
                  ("random", random_ir_matching(cm, random.Random(i))))
        for label, matching in starts:
            a, b = _check_stages(res, cm, matching, f"market {i} from {label}")
            counts["candidate_resolutions"] += a
            counts["pma_resolutions"] += b
    res.info = counts
    return res


# ---------------------------------------------------------------------------
# Boston versus DA


def _dist(values) -> dict:
    values = sorted(values)
    if not values:
        return {"n": 0}
    return {
        "n": len(values),
        "min": values[0],
        "median": statistics.median(values),
        "mean": round(statistics.fmean(values), 4),
        "max": values[-1],
        "zero_fraction": round(sum(1 for v in values if v == 0) / len(values), 4),
    }


def compare_mechanisms(markets, kind, pareto: Pareto = Pareto.NONE) -> dict:
    """Blocking pairs and match rates of the DA pipeline and Boston, market by market."""
    rows = []
    for m in markets:
        cm = compiled(m, kind)
        da = run_pipeline(cm, PipelineConfig(kind, pareto)).matching
        bo = run_boston(cm)
        active = sum(1 for c in cm.candidate_ids if cm.prefs[c]) or 1
        rows.append({
            "da_blocking": len(find_blocking_pairs(cm, None, da, classify=False)),
            "boston_blocking": len(find_blocking_pairs(cm, None, bo, classify=False)),
            "da_match_rate": len(da.assignment) / active,
            "boston_match_rate": len(bo.assignment) / active,
        })
    table = {
        "markets": len(rows),
        "kind": ChoiceKind(kind).value,
        "pareto": Pareto(pareto).value,
        "da": {
            "blocking_pairs": _dist([r["da_blocking"] for r in rows]),
            "match_rate": _dist([round(r["da_match_rate"], 4) for r in rows]),
        },
        "boston": {
            "blocking_pairs": _dist([r["boston_blocking"] for r in rows]),
            "match_rate": _dist([round(r["boston_match_rate"], 4) for r in rows]),
        },
        "boston_at_least_da": sum(1 for r in rows if r["boston_blocking"] >= r["da_blocking"]),
    }
    return {"table": table, "rows": rows}


def format_table(table: dict) -> str:
    def num(x):
        return f"{x:.4f}" if isinstance(x, float) else str(x)

    lines = [f"{table['markets']} markets, choice {table['kind']}, pareto {table['pareto']}; "
             f"Boston >= DA on {table['boston_at_least_da']}",
             f"{'mechanism':<10}{'metric':<16}{'min':>8}{'median':>8}{'mean':>8}{'max':>8}{'zero%':>8}"]
    for mech in ("da", "boston"):
        for metric in ("blocking_pairs", "match_rate"):
            d = table[mech][metric]
            if not d.get("n"):
                continue
            zero = f"{100 * d['zero_fraction']:.1f}%" if metric == "blocking_pairs" else "-"
            lines.append(f"{mech:<10}{metric:<16}{num(d['min']):>8}{num(d['median']):>8}{num(d['mean']):>8}"
                         f"{num(d['max']):>8}{zero:>8}")
    return "\n".join(lines)


@_timed
def boston_comparison(count: int = 200, start: int = 0) -> SuiteResult:
    res = SuiteResult("boston_comparison")
    arbitrary = compare_mechanisms(small_corpus(ARBITRARY, count, start), ChoiceKind.Y2018)
    laminar = compare_mechanisms(small_corpus(LAMINAR_DISJOINT, count, start), ChoiceKind.Y2018)
    for i, r in enumerate(laminar["rows"]):
        res.checked += 1
        if r["da_blocking"] != 0:
            res.fail(f"laminar market {i}: DA has {r['da_blocking']} blocking pairs")
        if r["boston_blocking"] < r["da_blocking"]:
            res.fail(f"laminar market {i}: Boston below DA")
    res.info = {"arbitrary": arbitrary["table"], "laminar": laminar["table"]}
    return res


# ---------------------------------------------------------------------------
# scale


def _peak_rss_mb() -> Optional[float]:
    try:
        import resource
    except ImportError:  # not on POSIX
        return None
    return round(resource.getrusage(resource.RUSAGE_SELF).ru_maxrss / 1024, 1)  # kB on Linux


@_timed
def scale_run(config: GenConfig = SCALE_2020, pareto: Pareto = Pareto.ALTERNATE) -> SuiteResult:
    """Full pipeline and audit at a realistic national size."""
    from .audit import explain_all, summarize

    res = SuiteResult("scale_run")
    tracemalloc.start()
    try:
        t0 = time.perf_counter()
        m = generate(config)
        t1 = time.perf_counter()
        out = run_pipeline(m, PipelineConfig(ChoiceKind.Y2018, pareto))
        t2 = time.perf_counter()
        pairs = find_blocking_pairs(m, ChoiceKind.Y2018, out.matching)
        explain_all(m, ChoiceKind.Y2018, out.matching)
        stats = summarize(m, out.matching, pairs)
        t3 = time.perf_counter()
        _, peak = tracemalloc.get_traced_memory()
    finally:
        tracemalloc.stop()
    res.checked = 1
    res.info = {
        "pmas": len(m.reports),
        "slots": sum(r.capacity for r in m.reports),
        "active_candidates": stats.active_candidates,
        "populations": sum(len(m.populations(r.pma)) for r in m.reports),
        "matched": stats.matched,
        "blocking_pairs": stats.blocking_pairs,
        "generate_s": round(t1 - t0, 3),
        "pipeline_s": round(t2 - t1, 3),
        "audit_s": round(t3 - t2, 3),
        "peak_python_mb": round(peak / 2**20, 1),
        "peak_rss_mb": _peak_rss_mb(),
        "cap_hit": out.cap_hit,
    }
    return res


# ---------------------------------------------------------------------------


@_timed
def fixture_checks() -> SuiteResult:
    """Cheap sanity facts about the shipped fixtures."""
    from .structure import guarantees

    res = SuiteResult("fixture_checks")
    ns = fixture(FixtureId.THM3_NO_STABLE)
    res.checked += 1
    if not brute_force_stable_matchings(apply_tie_breaking(ns), ChoiceKind.PREFER_MORE):
        res.fail("prefer-more should admit a stable matching on the no-stable fixture")
    res.checked += 1
    if guarantees(ns, ChoiceKind.PREFER_MORE).guarantee == "none":
        res.fail("prefer-more guarantee missing on the no-stable fixture")
    sp = fixture(FixtureId.THM3_STRATEGYPROOFNESS)
    reports = check_strategyproofness_market(sp, PipelineConfig(ChoiceKind.Y2018, Pareto.NONE))
    res.checked += 1
    if all(r.clean for r in reports):
        res.fail("no profitable misreport found on the strategyproofness fixture")
    fs = fixture(FixtureId.FOOTNOTE26_FREE_SLOT)
    res.checked += 1
    a = run_pipeline(fs, PipelineConfig(ChoiceKind.Y2018, Pareto.NONE)).matching
    b = run_pipeline(fs, PipelineConfig(ChoiceKind.Y2018, Pareto.CANDIDATE)).matching
    if a.of("c") is not None or b.of("c") != "m":
        res.fail(f"free-slot fixture: {dict(a.assignment)} then {dict(b.assignment)}")
    res.info = {"no_stable_prefer_more_stable_matchings":
                len(brute_force_stable_matchings(apply_tie_breaking(ns), ChoiceKind.PREFER_MORE))}
    return res


QUICK = {
    "disjoint_targets": dict(count=100),
    "chain_targets": dict(count=100, universes=40),
    "irc": dict(count=100),
    "equivalences": dict(count=200),
    "truncation_sure_thing": dict(exhaustive_bases=6, sampled=100),
    "truncation_search": dict(budget_s=5.0),
    "pareto": dict(count=60),
    "boston": dict(count=50),
}


def all_suites(quick: bool = False, include_scale: bool = True) -> list:
    """(name, callable) pairs in run order; ``quick`` shrinks the corpora."""
    q = QUICK if quick else {}
    out = [
        ("fixture_exactness", fixture_exactness),
        ("no_stable_certificate", no_stable_certificate),
        ("fixture_checks", fixture_checks),
        ("disjoint_targets", lambda: disjoint_targets(**q.get("disjoint_targets", {}))),
        ("chain_targets", lambda: chain_targets(**q.get("chain_targets", {}))),
        ("irc", lambda: irc_universality(**q.get("irc", {}))),
        ("equivalences", lambda: choice_equivalences(**q.get("equivalences", {}))),
        ("truncation_sure_thing", lambda: truncation_sure_thing(**q.get("truncation_sure_thing", {}))),
        ("truncation_search", lambda: truncation_violation_search(**q.get("truncation_search", {}))),
        ("pareto", lambda: pareto_contracts(**q.get("pareto", {}))),
        ("boston", lambda: boston_comparison(**q.get("boston", {}))),
    ]
    if include_scale:
        out.append(("scale", scale_run))
    return out
