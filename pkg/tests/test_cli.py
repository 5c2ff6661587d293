import csv
import json
import subprocess
import sys

import pytest

from gapmatch.cli import EXIT_INVALID, EXIT_IO, EXIT_OK, main
from gapmatch.io import save_market_json, write_json
from gapmatch.oracles import fixture

ARTIFACTS = {"matching.json", "audit.json", "explanations.csv", "summary.json", "structure.json", "manifest.json"}


@pytest.fixture
def sp_market(tmp_path):
    path = tmp_path / "sp.json"
    save_market_json(fixture("thm3_strategyproofness"), path)
    return path


def read(path):
    return json.loads(path.read_text())


def test_match_writes_all_artifacts(tmp_path, sp_market):
    out = tmp_path / "out"
    assert main(["match", str(sp_market), "--choice", "2018", "--pareto", "none", "--out", str(out)]) == EXIT_OK
    assert {p.name for p in out.iterdir()} == ARTIFACTS
    assert read(out / "matching.json")["matching"] == {"c": "m", "d": "m", "f": "m''", "g": "m'"}
    audit = read(out / "audit.json")
    assert audit["individually_rational"] is True
    assert {c["category"] for c in audit["explanation_categories"] if c["extension"]} == \
        {"displaced_by_promotion", "blocking"}
    manifest = read(out / "manifest.json")
    assert manifest["command"] == "match" and manifest["config"]["pareto"] == "none"
    assert {a["path"] for a in manifest["artifacts"]} == ARTIFACTS - {"manifest.json"}
    with open(out / "explanations.csv") as fh:
        reader = csv.DictReader(fh)
        rows = list(reader)
    # nobody unmatched is ranked above an admitted candidate in this outcome
    assert reader.fieldnames == ["pma", "candidate", "category", "detail"] and rows == []


def test_explanations_rows(tmp_path):
    src = tmp_path / "ns.json"
    save_market_json(fixture("thm3_no_stable"), src)
    write_json(tmp_path / "mt.json", {"matching": {"d": "m", "e": "m'"}})
    assert main(["audit", str(src), str(tmp_path / "mt.json"), "--out", str(tmp_path / "a")]) == EXIT_OK
    with open(tmp_path / "a" / "explanations.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert rows == [{"pma": "m", "candidate": "c", "category": "blocking", "detail": "min_target"}]


def test_match_is_reproducible(tmp_path, sp_market):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert main(["match", str(sp_market), "--pareto", "alternate", "--out", str(d)]) == EXIT_OK
    for name in ARTIFACTS - {"manifest.json"}:
        assert (a / name).read_bytes() == (b / name).read_bytes()
    assert read(a / "manifest.json")["artifacts"] == read(b / "manifest.json")["artifacts"]


def test_candidate_stage_on_free_slot_fixture(tmp_path):
    src = tmp_path / "fs.json"
    save_market_json(fixture("footnote26_free_slot"), src)
    main(["match", str(src), "--pareto", "none", "--out", str(tmp_path / "n")])
    main(["match", str(src), "--pareto", "candidate", "--out", str(tmp_path / "c")])
    none = read(tmp_path / "n" / "matching.json")["matching"]
    cand = read(tmp_path / "c" / "matching.json")["matching"]
    assert "c" not in none and cand["c"] == "m"
    assert {k: v for k, v in cand.items() if k != "c"} == none


def test_missing_input_is_io_error(tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["match", str(tmp_path / "nope.json"), "--out", str(out)]) == EXIT_IO
    assert not out.exists()
    assert "cannot read" in capsys.readouterr().err


def test_invalid_market_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    write_json(bad, {"candidates": [{"id": "a", "preferences": ["zz"]}], "pmas": [{"id": "p", "capacity": 0}]})
    assert main(["match", str(bad), "--out", str(tmp_path / "o")]) == EXIT_INVALID
    (tmp_path / "junk.json").write_text("{not json")
    assert main(["match", str(tmp_path / "junk.json"), "--out", str(tmp_path / "o")]) == EXIT_INVALID
    assert "error" in capsys.readouterr().err


def test_out_dir_from_environment(tmp_path, sp_market, monkeypatch):
    monkeypatch.setenv("GAPMATCH_OUT", str(tmp_path / "env"))
    assert main(["match", str(sp_market)]) == EXIT_OK
    assert (tmp_path / "env" / "matching.json").exists()


def test_audit_command(tmp_path, sp_market):
    write_json(tmp_path / "mt.json", {"matching": {"d": "m", "e": "m'"}})
    assert main(["audit", str(sp_market), str(tmp_path / "mt.json"), "--out", str(tmp_path / "a")]) == EXIT_OK
    audit = read(tmp_path / "a" / "audit.json")
    assert audit["stable"] is False and audit["blocking_pairs"]


def test_check_command(tmp_path, capsys):
    src = tmp_path / "ns.json"
    save_market_json(fixture("thm3_no_stable"), src)
    assert main(["check", str(src), "--choice", "2018"]) == EXIT_OK
    report = json.loads(capsys.readouterr().out)
    m = next(p for p in report["pmas"] if p["pma"] == "m")
    assert (m["laminar"], m["min_targets_pairwise_disjoint"], m["min_targets_disjoint_chains"]) == (True, False, True)
    assert report["guarantee"] == "none"


@pytest.mark.parametrize("fmt", ["json", "csv"])
def test_gen_then_match(tmp_path, fmt):
    out = tmp_path / "g"
    assert main(["gen", "--candidates", "30", "--pmas", "4", "--seed", "5", "--format", fmt, "--out", str(out)]) == 0
    market = out / ("market.json" if fmt == "json" else "market")
    assert main(["match", str(market), "--choice", "prefer-more", "--pareto", "alternate",
                 "--out", str(tmp_path / "m")]) == EXIT_OK
    assert read(out / "manifest.json")["config"]["seed"] == 5


def test_gen_rejects_bad_config(tmp_path):
    assert main(["gen", "--candidates", "1", "--pmas", "1", "--mode", "laminar_disjoint_targets",
                 "--config", str(tmp_path / "missing.json"), "--out", str(tmp_path / "g")]) == EXIT_IO


def test_compare_corpus(tmp_path, capsys):
    assert main(["compare", "--corpus", "20", "--out", str(tmp_path / "c")]) == EXIT_OK
    body = read(tmp_path / "c" / "compare.json")
    assert body["source"]["corpus"] == 20
    assert "boston" in capsys.readouterr().out.lower()


def test_verify_subset(tmp_path, capsys):
    code = main(["verify", "--quick", "--no-scale", "--only", "fixture_exactness",
                 "--only", "no_stable_certificate", "--out", str(tmp_path / "v")])
    assert code == EXIT_OK
    text = capsys.readouterr().out
    assert "stable matchings under 2018 semantics: 0" in text
    assert read(tmp_path / "v" / "verify.json")["ok"] is True


def test_console_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "gapmatch.cli", "--version"], capture_output=True, text=True)
    assert r.returncode == 0 and "gapmatch" in r.stdout
