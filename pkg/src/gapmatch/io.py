"""Canonical market JSON, the per-PMA CSV layout, and artifact writers.

CSV layout (a directory)::

    meta.csv                    key,value          (schema, tie_break_seed)
    candidates.csv              id,preferences,attr.<name>...
    pmas.csv                    index,id,capacity
    pma_<index>_populations.csv id,name,kind,min_target,max_quota,is_gender,attribute,overrides
    pma_<index>_candidates.csv  id,rank,<population id>...

``preferences`` joins PMA ids with ``;``.  ``kind`` is ``binary``,
``multi_valued`` or ``auto`` (an auto-population rule on ``attribute``).
``overrides`` is a JSON object mapping a value to its quota.  In the per-PMA
candidates table a binary population column holds ``1`` for members, a
multi-valued column holds the member's value; blank means not a member.
"""
from __future__ import annotations

import csv
import json
import os
from pathlib import Path
from typing import Optional

from .model import (
    BINARY,
    MULTI_VALUED,
    AutoRule,
    Candidate,
    Market,
    Matching,
    PreferenceReport,
    RawPopulation,
)

MARKET_SCHEMA = "gapmatch.market/1"
MATCHING_SCHEMA = "gapmatch.matching/1"
SEP = ";"
AUTO = "auto"


def dumps(obj) -> str:
    """Canonical JSON: sorted keys, two-space indent, trailing newline."""
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def write_json(path, obj):
    Path(path).write_text(dumps(obj), encoding="utf-8")


# ---------------------------------------------------------------------------
# JSON


def _population_to_json(p: RawPopulation) -> dict:
    d = {
        "id": p.id,
        "name": p.name,
        "kind": p.kind,
        "min_target": p.min_target,
        "max_quota": p.max_quota,
        "is_gender": p.is_gender,
        "overrides": dict(sorted(p.overrides.items())),
    }
    if p.kind == MULTI_VALUED:
        d["values"] = dict(sorted(p.values.items()))
    else:
        d["members"] = sorted(p.members)
    return d


def _rule_to_json(r: AutoRule) -> dict:
    return {
        "id": r.id,
        "attribute": r.attribute,
        "min_target": r.min_target,
        "max_quota": r.max_quota,
        "is_gender": r.is_gender,
        "overrides": dict(sorted(r.overrides.items())),
    }


def market_to_json(market: Market) -> dict:
    return {
        "schema": MARKET_SCHEMA,
        "tie_break_seed": market.tie_break_seed,
        "candidates": [
            {"id": c.id, "preferences": list(c.preferences), "attributes": dict(sorted(c.attributes.items()))}
            for c in market.candidates
        ],
        "pmas": [
            {
                "id": r.pma,
                "capacity": r.capacity,
                "ranking": dict(sorted(r.ranking.items())),
                "populations": [_population_to_json(p) for p in r.populations],
                "auto_populations": [_rule_to_json(a) for a in r.auto_rules],
            }
            for r in market.reports
        ],
    }


def _s(x) -> str:
    return str(x)


def _population_from_json(d: dict, gender_names=()) -> RawPopulation:
    kind = d.get("kind", BINARY)
    name = d.get("name") or d["id"]
    is_gender = bool(d.get("is_gender", False)) or name in gender_names
    overrides = {str(k): int(v) for k, v in (d.get("overrides") or {}).items()}
    quota = d.get("max_quota")
    common = dict(
        min_target=int(d.get("min_target", 0) or 0),
        max_quota=None if quota is None else int(quota),
        is_gender=is_gender,
        overrides=overrides,
        name=name,
    )
    if kind == MULTI_VALUED:
        return RawPopulation(_s(d["id"]), MULTI_VALUED, values={_s(k): str(v) for k, v in d["values"].items()}, **common)
    return RawPopulation(_s(d["id"]), kind, members={_s(m) for m in d.get("members", ())}, **common)


def _rule_from_json(d: dict) -> AutoRule:
    quota = d.get("max_quota")
    return AutoRule(
        attribute=d["attribute"],
        min_target=int(d.get("min_target", 0) or 0),
        max_quota=None if quota is None else int(quota),
        overrides={str(k): int(v) for k, v in (d.get("overrides") or {}).items()},
        is_gender=bool(d.get("is_gender", False)),
        id=d.get("id") or d["attribute"],
    )


def market_from_json(data: dict, gender_names=()) -> Market:
    """Build a market; populations named in ``gender_names`` get the gender flag."""
    candidates = tuple(
        Candidate(_s(c["id"]), tuple(_s(p) for p in c.get("preferences", ())),
                  {str(k): str(v) for k, v in (c.get("attributes") or {}).items()})
        for c in data.get("candidates", ())
    )
    reports = tuple(
        PreferenceReport(
            _s(p["id"]),
            int(p["capacity"]),
            {_s(k): int(v) for k, v in (p.get("ranking") or {}).items()},
            tuple(_population_from_json(x, gender_names) for x in p.get("populations", ())),
            tuple(_rule_from_json(x) for x in p.get("auto_populations", ())),
        )
        for p in data.get("pmas", ())
    )
    return Market(candidates, reports, int(data.get("tie_break_seed", 0)))


def load_market_json(path, gender_names=()) -> Market:
    with open(path, encoding="utf-8") as fh:
        return market_from_json(json.load(fh), gender_names)


def save_market_json(market: Market, path):
    write_json(path, market_to_json(market))


def matching_to_json(matching: Matching) -> dict:
    return {"schema": MATCHING_SCHEMA, "matching": dict(sorted(matching.assignment.items()))}


def load_matching_json(path) -> Matching:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    return Matching({_s(k): _s(v) for k, v in data["matching"].items()})


# ---------------------------------------------------------------------------
# CSV


def _write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _read_csv(path) -> list:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def _check_token(x, what):
    if SEP in x:
        raise ValueError(f"{what} {x!r} contains {SEP!r}, which the CSV layout reserves")


def save_market_csv(market: Market, directory):
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    _write_csv(d / "meta.csv", ["key", "value"], [["schema", MARKET_SCHEMA], ["tie_break_seed", market.tie_break_seed]])
    attrs = sorted({a for c in market.candidates for a in c.attributes})
    rows = []
    for c in market.candidates:
        for p in c.preferences:
            _check_token(p, "PMA id")
        rows.append([c.id, SEP.join(c.preferences)] + [c.attributes.get(a, "") for a in attrs])
    _write_csv(d / "candidates.csv", ["id", "preferences"] + [f"attr.{a}" for a in attrs], rows)
    _write_csv(d / "pmas.csv", ["index", "id", "capacity"],
               [[i, r.pma, r.capacity] for i, r in enumerate(market.reports)])
    for i, r in enumerate(market.reports):
        prows = []
        for p in r.populations:
            prows.append([p.id, p.name, p.kind, p.min_target, "" if p.max_quota is None else p.max_quota,
                          int(p.is_gender), "", json.dumps(dict(sorted(p.overrides.items()))) if p.overrides else ""])
        for a in r.auto_rules:
            prows.append([a.id, a.id, AUTO, a.min_target, "" if a.max_quota is None else a.max_quota,
                          int(a.is_gender), a.attribute,
                          json.dumps(dict(sorted(a.overrides.items()))) if a.overrides else ""])
        _write_csv(d / f"pma_{i}_populations.csv",
                   ["id", "name", "kind", "min_target", "max_quota", "is_gender", "attribute", "overrides"], prows)
        crows = []
        for cid, rank in r.ranking.items():
            row = [cid, rank]
            for p in r.populations:
                if p.kind == MULTI_VALUED:
                    row.append(p.values.get(cid, ""))
                else:
                    row.append("1" if cid in p.members else "")
            crows.append(row)
        extra = [cid for p in r.populations for cid in (p.members if p.kind == BINARY else p.values)
                 if cid not in r.ranking]
        for cid in dict.fromkeys(extra):
            row = [cid, ""]
            for p in r.populations:
                row.append(p.values.get(cid, "") if p.kind == MULTI_VALUED else ("1" if cid in p.members else ""))
            crows.append(row)
        _write_csv(d / f"pma_{i}_candidates.csv", ["id", "rank"] + [p.id for p in r.populations], crows)


def load_market_csv(directory, gender_names=()) -> Market:
    d = Path(directory)
    meta = {row["key"]: row["value"] for row in _read_csv(d / "meta.csv")}
    candidates = []
    for row in _read_csv(d / "candidates.csv"):
        prefs = tuple(x for x in row["preferences"].split(SEP) if x)
        attrs = {k[5:]: v for k, v in row.items() if k.startswith("attr.") and v != ""}
        candidates.append(Candidate(row["id"], prefs, attrs))
    reports = []
    for prow in _read_csv(d / "pmas.csv"):
        i = prow["index"]
        pops, rules = [], []
        pop_rows = _read_csv(d / f"pma_{i}_populations.csv")
        cand_rows = _read_csv(d / f"pma_{i}_candidates.csv")
        ranking = {row["id"]: int(row["rank"]) for row in cand_rows if row["rank"] != ""}
        for r in pop_rows:
            common = dict(
                min_target=int(r["min_target"] or 0),
                max_quota=None if r["max_quota"] == "" else int(r["max_quota"]),
                is_gender=r["is_gender"] in ("1", "true", "True") or r["name"] in gender_names,
                overrides={k: int(v) for k, v in json.loads(r["overrides"]).items()} if r["overrides"] else {},
            )
            if r["kind"] == AUTO:
                rules.append(AutoRule(r["attribute"], id=r["id"], **common))
            elif r["kind"] == MULTI_VALUED:
                values = {row["id"]: row[r["id"]] for row in cand_rows if row.get(r["id"], "") != ""}
                pops.append(RawPopulation(r["id"], MULTI_VALUED, values=values, name=r["name"], **common))
            else:
                members = {row["id"] for row in cand_rows if row.get(r["id"], "") not in ("", "0")}
                pops.append(RawPopulation(r["id"], r["kind"], members=members, name=r["name"], **common))
        reports.append(PreferenceReport(prow["id"], int(prow["capacity"]), ranking, tuple(pops), tuple(rules)))
    return Market(tuple(candidates), tuple(reports), int(meta.get("tie_break_seed", 0)))


def load_market(path, gender_names=()) -> Market:
    """JSON file or CSV directory, by what ``path`` is."""
    if os.path.isdir(path):
        return load_market_csv(path, gender_names)
    return load_market_json(path, gender_names)


def save_explanations_csv(explanations, path):
    _write_csv(path, ["pma", "candidate", "category", "detail"],
               [[e.pma, e.candidate, e.category, e.detail or ""] for e in explanations])


def load_explanations_csv(path) -> list:
    return _read_csv(path)
