import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gapmatch._backend import available_kernels
from gapmatch.choice import (
    CAPACITY_ID,
    ChoiceKind,
    ChoiceSemanticsError,
    CompiledPMA,
    choose_2018,
    choose_2019,
    choose_prefer_more,
    choose_prefer_more_staged,
    choose_with_committed,
    compile_report,
)
from gapmatch.model import AutoRule, Population, PreferenceReport, RawPopulation, expand_populations
from gapmatch.oracles import ReferenceChooser, fixture

K = ChoiceKind


def pma_m():
    return fixture("thm3_no_stable").report("m")


def compiled(report, kernel, order=None):
    order = order or sorted(report.ranking, key=lambda c: (report.ranking[c], c))
    return CompiledPMA(report, expand_populations(report.populations), order, kernel)


def subsets(items):
    for k in range(len(items) + 1):
        yield from itertools.combinations(items, k)


@pytest.mark.parametrize("given_,expected", [
    ({"c", "d", "e"}, {"c", "e"}),
    ({"d", "e"}, {"d"}),
    ({"c", "d"}, {"c", "d"}),
    (set(), set()),
])
def test_2018_on_m(kernel, given_, expected):
    assert compiled(pma_m(), kernel).choose(K.Y2018, given_).chosen == expected


def test_public_wrappers_agree_with_compiled():
    r = pma_m()
    order = ("c", "d", "e")
    assert choose_2018(r, {"c", "d", "e"}, order).chosen == {"c", "e"}
    assert choose_prefer_more_staged(r, {"c", "d", "e"}, order).chosen == {"c", "e"}
    assert choose_prefer_more(r, set(), order).chosen == frozenset()
    assert choose_prefer_more_staged(r, set(), order).chosen == frozenset()


def prefer_more_report():
    return PreferenceReport(
        "p", 2, {"y": 1, "z": 2, "x": 3},
        (RawPopulation("P", members={"x", "y"}, min_target=1), RawPopulation("Q", members={"x", "z"}, min_target=1)),
    )


def test_prefer_more_takes_the_double_helper_first(kernel):
    cp = compiled(prefer_more_report(), kernel)
    res = cp.choose(K.PREFER_MORE, {"x", "y", "z"})
    assert res.chosen == {"x", "y"}
    assert res.trace["x"].step == 0
    assert cp.choose(K.PREFER_MORE_STAGED, {"x", "y", "z"}).chosen == {"x", "y"}
    assert cp.choose(K.Y2018, {"x", "y", "z"}).chosen == {"y", "z"}


def test_2019_zero_priority_ignores_capacity(kernel):
    r = PreferenceReport("p", 1, {"a": 0, "b": 0, "c": 1})
    res = compiled(r, kernel).choose(K.Y2019, {"a", "b", "c"})
    assert res.chosen == {"a", "b"}
    assert res.over_quota == (CAPACITY_ID,)
    assert {res.trace[c].pass_name for c in "ab"} == {"zero_priority"}


def test_2019_gender_targets_come_after_other_targets(kernel):
    r = PreferenceReport(
        "p", 2, {"u": 1, "v": 2, "w": 3},
        (RawPopulation("G", members={"u"}, min_target=1, is_gender=True), RawPopulation("R", members={"w"}, min_target=1)),
    )
    res = compiled(r, kernel).choose(K.Y2019, {"u", "v", "w"})
    assert res.chosen == {"u", "w"}
    assert res.trace["w"].pass_name == "min_target" and res.trace["w"].step == 0
    assert res.trace["u"].pass_name == "gender_min_target" and res.trace["u"].step == 1
    assert not res.trace["v"].accepted and res.trace["v"].blocking_population == CAPACITY_ID


def test_committed(kernel):
    cp = compiled(pma_m(), kernel)
    res = cp.choose(K.Y2018, {"e"}, committed={"d"})
    assert res.chosen == {"d"}
    assert res.trace["e"].blocking_population == "de"
    assert cp.choose(K.Y2018, {"c"}, committed={"d"}).chosen == {"c", "d"}
    r = pma_m()
    assert choose_with_committed(r, K.Y2018, {"d"}, {"c"}, ("c", "d", "e")).chosen == {"c", "d"}
    for S in subsets("cde"):
        assert cp.choose(K.Y2018, S, committed=()).chosen == cp.choose(K.Y2018, S).chosen


def test_rejections_name_the_quota(kernel):
    res = compiled(pma_m(), kernel).choose(K.Y2018, {"d", "e"})
    assert res.trace["e"].blocking_population == "de"
    assert res.trace["d"].pass_name == "min_target"


def test_input_errors(kernel):
    cp = compiled(pma_m(), kernel)
    with pytest.raises(ValueError):
        cp.choose(K.Y2018, {"zz"})
    with pytest.raises(ValueError):
        cp.choose(K.Y2018, {"c"}, committed={"c"})
    zero = compiled(PreferenceReport("p", 1, {"a": 0}), kernel)
    with pytest.raises(ChoiceSemanticsError):
        zero.choose(K.Y2018, {"a"})


def test_compile_report_needs_expanded_auto_rules():
    r = PreferenceReport("p", 1, {"a": 1}, auto_rules=(AutoRule("school"),))
    with pytest.raises(ValueError):
        compile_report(r, ("a",))


# exhaustive and randomized cross-checks --------------------------------------

report_strategy = st.builds(
    lambda n, cap, pops, ranks, zero: (n, cap, pops, ranks, zero),
    st.integers(1, 6),
    st.integers(1, 6),
    st.lists(
        st.tuples(st.sets(st.integers(0, 5), min_size=1), st.integers(0, 3), st.one_of(st.none(), st.integers(0, 4)),
                  st.booleans()),
        max_size=4,
    ),
    st.lists(st.integers(1, 3), min_size=6, max_size=6),
    st.sets(st.integers(0, 5), max_size=2),
)


def build(shape, with_zero):
    n, cap, pops, ranks, zero = shape
    ids = [f"c{i}" for i in range(n)]
    ranking = {c: (0 if with_zero and i in zero else ranks[i]) for i, c in enumerate(ids)}
    raw = tuple(
        RawPopulation(f"P{k}", members={ids[i] for i in mem if i < n}, min_target=t,
                      max_quota=None if q is None else max(q, t), is_gender=g)
        for k, (mem, t, q, g) in enumerate(pops)
    )
    report = PreferenceReport("p", cap, ranking, raw)
    order = sorted(ids, key=lambda c: (ranking[c], c))
    return report, expand_populations(raw), order


@settings(max_examples=300, deadline=None)
@given(report_strategy, st.sampled_from(list(K)))
def test_kernels_match_reference(shape, kind):
    report, pops, order = build(shape, kind is K.Y2019)
    ref = ReferenceChooser(report, pops, order)
    cps = [CompiledPMA(report, pops, order, k) for k in available_kernels().values()]
    for S in subsets(order):
        expected = ref(kind, S)
        for cp in cps:
            res = cp.choose(kind, S)
            assert res.chosen == expected
            assert res.chosen <= set(S)
            if kind is not K.Y2019:
                assert res.over_quota == ()
            else:
                zeros = {c for c in res.chosen if report.ranking[c] == 0}
                for pid in res.over_quota:
                    idx = cp.population_ids.index(pid)
                    quota = cp.quotas[idx]
                    members = {c for c in res.chosen if idx in cp.cand_pops[cp.pos[c]]}
                    assert len(members - zeros) <= quota


def test_multi_valued_expansion_matches_hand_encoding(kernel):
    values = {f"c{i}": f"v{i % 10}" for i in range(12)}
    multi = RawPopulation("School", "multi_valued", values=values, min_target=2, max_quota=1)
    hand = [
        Population(f"School=v{v}", {c for c, x in values.items() if x == f"v{v}"}, 2, 1)
        for v in range(10)
    ]
    ranking = {c: i + 1 for i, c in enumerate(sorted(values))}
    report = PreferenceReport("p", 4, ranking)
    order = sorted(ranking, key=ranking.get)
    expanded = expand_populations([multi])
    assert len(expanded) == 10
    a = CompiledPMA(report, expanded, order, kernel)
    b = CompiledPMA(report, hand, order, kernel)
    universe = order[:6]
    for kind in K:
        for S in subsets(universe):
            assert a.choose_ids(kind, S) == b.choose_ids(kind, S)
