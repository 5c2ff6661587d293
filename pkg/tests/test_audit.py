import time
from dataclasses import replace

import pytest

from gapmatch.audit import (
    BLOCKING,
    DID_NOT_RANK,
    DISPLACED_BY_PROMOTION,
    MATCHED_TO_PREFERRED,
    QUOTA_VIOLATION,
    REAL,
    TIE_BREAK_ARTIFACT,
    BlockingPair,
    QueryError,
    classify_blocking_pair,
    explain_all,
    explain_rejection,
    find_blocking_pairs,
    is_individually_rational,
    summarize,
)
from gapmatch.choice import CAPACITY_ID, ChoiceKind
from gapmatch.engine import Pareto, PipelineConfig, compiled, run_boston, run_da, run_pipeline
from gapmatch.model import Candidate, Market, Matching, PreferenceReport, RawPopulation, apply_tie_breaking
from gapmatch.oracles import fixture, oracle_blocking_pairs
from gapmatch.suites import small_corpus
from gapmatch.synth import ARBITRARY, SCALE_2020, generate

Y = ChoiceKind.Y2018


def pairs_of(found):
    return {(p.candidate, p.pma) for p in found}


def test_individual_rationality():
    m = fixture("thm3_no_stable")
    assert is_individually_rational(m, Y, run_da(m, Y).matching)
    assert is_individually_rational(m, Y, Matching({}))
    bad = is_individually_rational(m, Y, Matching({"d": "m", "e": "m"}))
    assert not bad and any("e" in w for w in bad.witnesses)


def test_blocking_pairs_from_the_no_stable_argument():
    m = fixture("thm3_no_stable")
    assert ("e", "m") in pairs_of(find_blocking_pairs(m, Y, Matching({"c": "m", "d": "m", "e": "m'"})))
    assert ("c", "m") in pairs_of(find_blocking_pairs(m, Y, Matching({"d": "m", "e": "m'"})))


@pytest.mark.parametrize("kind", [Y, ChoiceKind.PREFER_MORE])
def test_audit_agrees_with_oracle(kind):
    for m in small_corpus(ARBITRARY, 150):
        cm = compiled(m, kind)
        for matching in (run_da(cm).matching, run_boston(cm)):
            assert pairs_of(find_blocking_pairs(cm, None, matching, classify=False)) == \
                oracle_blocking_pairs(cm.strict, kind, matching)


def test_no_ties_means_real():
    m = fixture("thm3_no_stable")
    out = run_da(m, Y).matching
    found = find_blocking_pairs(m, Y, out)
    assert found and all(p.classification == REAL for p in found)
    for seed in range(5):
        m2 = replace(m, tie_break_seed=seed)
        assert [p.classification for p in find_blocking_pairs(m2, Y, out)] == [p.classification for p in found]


def tied_market(seed):
    # p has one seat and ties c with x; x sits at its second choice q.
    return Market(
        (Candidate("c", ("p",)), Candidate("x", ("p", "q"))),
        (PreferenceReport("p", 1, {"c": 1, "x": 1}), PreferenceReport("q", 1, {"x": 1})),
        tie_break_seed=seed,
    )


def seed_with_order(first):
    for s in range(100):
        if apply_tie_breaking(tied_market(s)).orders["p"][0] == first:
            return s
    raise AssertionError("no seed found")


def test_draw_induced_pair_is_artifact():
    matching = Matching({"c": "p", "x": "q"})
    m = tied_market(seed_with_order("x"))
    found = find_blocking_pairs(m, Y, matching)
    assert pairs_of(found) == {("x", "p")}
    assert found[0].classification == TIE_BREAK_ARTIFACT
    # under the other tie-break the pair does not block at all
    assert not find_blocking_pairs(tied_market(seed_with_order("c")), Y, matching)


def test_classify_real_pair_with_ties_elsewhere():
    m = Market(
        (Candidate("c", ("p",)), Candidate("x", ("p", "q"))),
        (PreferenceReport("p", 1, {"x": 1, "c": 2}), PreferenceReport("q", 1, {"x": 1})),
    )
    mt = Matching({"c": "p", "x": "q"})
    assert classify_blocking_pair(m, Y, mt, BlockingPair("x", "p", frozenset())) == REAL


def test_explanations_examples():
    sp = fixture("thm3_strategyproofness")
    out = run_da(sp, Y).matching
    e = explain_rejection(sp, Y, out, "m''", "c")
    assert (e.category, e.detail) == (QUOTA_VIOLATION, CAPACITY_ID)
    assert explain_rejection(sp, Y, out, "m'", "c").category == DID_NOT_RANK
    assert explain_rejection(sp, Y, out, "m''", "e").category == DID_NOT_RANK
    promo = Market((Candidate("y", ("p",)), Candidate("z", ("p",))),
                   (PreferenceReport("p", 1, {"y": 1, "z": 2}, (RawPopulation("Z", members={"z"}, min_target=1),)),))
    mt = run_da(promo, Y).matching
    assert mt == Matching({"z": "p"})
    e = explain_rejection(promo, Y, mt, "p", "y")
    assert (e.category, e.detail) == (DISPLACED_BY_PROMOTION, "min_target")


def test_matched_to_preferred_and_blocking():
    m = fixture("thm3_no_stable")
    mt = Matching({"c": "m'", "e": "m"})
    assert explain_rejection(m, Y, mt, "m", "c").category == MATCHED_TO_PREFERRED
    e = explain_rejection(m, Y, Matching({"d": "m", "e": "m'"}), "m", "c")
    assert e.category == BLOCKING


def test_explain_query_errors():
    m = fixture("thm3_no_stable")
    mt = run_da(m, Y).matching
    with pytest.raises(QueryError):
        explain_rejection(m, Y, mt, "m", "zz")
    with pytest.raises(QueryError):
        explain_rejection(m, Y, mt, mt.of("c"), "c")


def test_explanation_totality():
    for m in small_corpus(ARBITRARY, 100):
        cm = compiled(m, Y)
        mt = run_pipeline(cm, PipelineConfig(Y, Pareto.ALTERNATE)).matching
        rows = explain_all(cm, None, mt)
        expected = set()
        for r in m.reports:
            got = mt.assigned(r.pma)
            if got:
                worst = max(r.ranking[c] for c in got)
                expected |= {(r.pma, c) for c, k in r.ranking.items() if k < worst and c not in got}
        assert sorted((e.pma, e.candidate) for e in rows) == sorted(expected)


def test_summary_basics():
    s = summarize(Market(), Matching({}), [])
    assert (s.matched, s.slots, s.top_choice_fraction, s.slots_filled_fraction) == (0, 0, 0.0, 0.0)
    m = Market(tuple(Candidate(x, ("p", "q")) for x in "abc"), (PreferenceReport("p", 3, {x: 1 for x in "abc"}),
                                                                 PreferenceReport("q", 1, {})))
    s = summarize(m, run_da(m, Y).matching, [])
    assert s.top_choice_fraction == 1.0 and s.slots_filled_fraction == 0.75


def test_summary_counts_and_fractions():
    for m in small_corpus(ARBITRARY, 60):
        mt = run_da(m, Y).matching
        pairs = find_blocking_pairs(m, Y, mt)
        s = summarize(m, mt, pairs)
        assert s.matched == len(mt.assignment)
        assert 0 <= s.top_choice_fraction <= 1 and 0 <= s.slots_filled_fraction <= 1
        assert s.blocking_pairs["total"] == len(pairs)
        for row in s.populations:
            assert 0 <= row["target_fill"] <= 1


def test_summary_at_2018_scale_is_fast():
    cfg = replace(SCALE_2020, pmas=35, total_slots=1760, candidates=2600)
    m = generate(cfg)
    mt = run_pipeline(m, PipelineConfig(Y, Pareto.ALTERNATE)).matching
    t = time.perf_counter()
    summarize(m, mt, find_blocking_pairs(m, Y, mt))
    assert time.perf_counter() - t < 10
