"""The ten acceptance criteria, each at its stated size and time bound.

Every test logs one PASS/FAIL line, shown in the terminal summary (run with
``-s`` to also see them inline).
"""
import pytest

from gapmatch import suites
from gapmatch.cli import main
from gapmatch.engine import Pareto


def _record(log, n, title, results, bound_s=None, extra=""):
    elapsed = sum(r.elapsed for r in results)
    ok = all(r.ok for r in results) and (bound_s is None or elapsed < bound_s)
    bound = f" (bound {bound_s:g}s)" if bound_s is not None else ""
    checked = sum(r.checked for r in results)
    line = f"[{n:>2}] {'PASS' if ok else 'FAIL'} {title}: {checked} checks, {elapsed:.2f}s{bound}{extra}"
    log.append(line)
    print(line)
    for r in results:
        for f in r.failures:
            print("     ", f)
    return ok, elapsed


def test_01_fixture_exactness(acceptance_log):
    res = suites.fixture_exactness()
    ok, t = _record(acceptance_log, 1, "fixture round log and matchings", [res], 1.0)
    assert res.ok, res.failures
    assert t < 1.0


def test_02_no_stable_certificate(acceptance_log):
    res = suites.no_stable_certificate()
    ok, t = _record(acceptance_log, 2, "no stable matching certificate", [res], 1.0)
    assert res.ok, res.failures
    assert res.info["stable_matchings"] == 0 and res.info["da_blocking_pairs"] >= 1
    assert t < 1.0


def test_03_disjoint_targets_stable_strategyproof(acceptance_log):
    res = suites.disjoint_targets(count=1000)
    ok, t = _record(acceptance_log, 3, "disjoint targets, 2018 choice: stable and strategyproof", [res], 300.0)
    assert res.ok, res.failures
    assert res.checked == 1000
    assert t < 300.0


def test_04_chain_targets_stable_strategyproof(acceptance_log):
    res = suites.chain_targets(count=1000)
    ok, t = _record(acceptance_log, 4, "chain targets, prefer-more: stable, strategyproof, properties", [res], 600.0)
    assert res.ok, res.failures
    assert t < 600.0


def test_05_irc_universality(acceptance_log):
    res = suites.irc_universality(count=500)
    _record(acceptance_log, 5, "IRC on arbitrary structures", [res])
    assert res.ok, res.failures


def test_06_choice_equivalences(acceptance_log):
    res = suites.choice_equivalences(count=1000)
    _record(acceptance_log, 6, "staged equals prefer-more and coincidences", [res])
    assert res.ok, res.failures


def test_07_truncation_and_sure_thing(acceptance_log):
    props = suites.truncation_sure_thing(exhaustive_bases=20, sampled=1000)
    search = suites.truncation_violation_search(budget_s=600.0)
    found = "inconclusive" if search.inconclusive else (
        f"violation at seed {search.info['seed']}: {search.info['candidate']} lists "
        f"{search.info['truncated']} and gets {search.info['truncated_outcome']}, "
        f"untruncated {search.info['original_outcome']}")
    _record(acceptance_log, 7, "truncation safety and sure-thing", [props, search], extra=f"; search {found}")
    assert props.ok, props.failures
    # an inconclusive search is allowed; a failed one is not
    assert search.ok, search.failures


def test_08_pareto_contracts(acceptance_log):
    res = suites.pareto_contracts(count=300)
    _record(acceptance_log, 8, "Pareto stage contracts", [res])
    assert res.ok, res.failures


def test_09_boston_comparison(acceptance_log, tmp_path, capsys):
    res = suites.boston_comparison(count=200)
    code = main(["compare", "--corpus", "200", "--mode", "laminar_disjoint_targets", "--out", str(tmp_path)])
    table = capsys.readouterr().out
    ok, _ = _record(acceptance_log, 9, "Boston comparison", [res], extra=f"; compare exit {code}")
    print(table)
    print(suites.format_table(res.info["arbitrary"]))
    assert code == 0 and (tmp_path / "compare.json").exists()
    assert res.ok, res.failures


def test_10_scale(acceptance_log):
    res = suites.scale_run(pareto=Pareto.ALTERNATE)
    info = res.info
    mem_mb = max(info["peak_python_mb"], info["peak_rss_mb"] or 0)
    extra = (f"; {info['pmas']} PMAs, {info['slots']} slots, {info['active_candidates']} candidates, "
             f"peak {mem_mb:.0f} MB")
    ok, t = _record(acceptance_log, 10, "national-scale pipeline and audit", [res], 60.0, extra)
    assert (info["pmas"], info["slots"]) == (42, 2329)
    assert 2900 <= info["active_candidates"] <= 3300
    assert t < 60.0
    assert mem_mb < 1024
