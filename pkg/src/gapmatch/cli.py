"""Command line: ``gapmatch {match,audit,check,gen,compare,verify}``.

Exit codes: 0 success, 1 I/O error, 2 invalid market, 3 a verified property
failed.
"""
from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import logging
import os
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from ._backend import BACKEND
from .audit import CATEGORIES, EXTENSIONS, explain_all, find_blocking_pairs, is_individually_rational, summarize
from .choice import ChoiceKind, ChoiceSemanticsError
from .engine import DEFAULT_ALTERNATION_CAP, Pareto, PipelineConfig, run_pipeline
from .io import (
    dumps,
    load_market,
    load_matching_json,
    market_to_json,
    matching_to_json,
    save_explanations_csv,
    save_market_csv,
    write_json,
)
from .model import ValidationError, validate
from .oracles import FixtureId, fixture
from .structure import guarantees
from .synth import MODES, SCALE_2020, GenConfig, GenerationError, corpus, generate

EXIT_OK = 0
EXIT_IO = 1
EXIT_INVALID = 2
EXIT_PROPERTY = 3

OUT_ENV = "GAPMATCH_OUT"
DEFAULT_OUT = "gapmatch-out"

log = logging.getLogger("gapmatch")


class _Fail(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _out_dir(args) -> Path:
    return Path(args.out or os.environ.get(OUT_ENV) or DEFAULT_OUT)


def _schema(name, body: dict) -> dict:
    return {"schema": f"gapmatch.{name}/1", **body}


def _load(args, kind=None):
    try:
        market = load_market(args.market, args.gender_population or ())
    except FileNotFoundError as exc:
        raise _Fail(EXIT_IO, f"cannot read {args.market}: {exc.strerror or exc}")
    except OSError as exc:
        raise _Fail(EXIT_IO, f"cannot read {args.market}: {exc}")
    except (KeyError, ValueError, TypeError) as exc:  # includes undecodable JSON
        raise _Fail(EXIT_INVALID, f"malformed market {args.market}: {exc}")
    if getattr(args, "seed", None) is not None:
        market = dataclasses.replace(market, tie_break_seed=args.seed)
    problems = validate(market, kind)
    if problems:
        lines = "\n".join(f"  [{v.code}] {v.message}" for v in problems)
        raise _Fail(EXIT_INVALID, f"{args.market}: {len(problems)} validation error(s)\n{lines}")
    return market


class _Writer:
    """Writes artifacts into one directory and records them for the manifest."""

    def __init__(self, directory: Path):
        self.dir = directory
        self.files: dict = {}

    def _record(self, name):
        data = (self.dir / name).read_bytes()
        self.files[name] = hashlib.sha256(data).hexdigest()

    def json(self, name, obj):
        self.dir.mkdir(parents=True, exist_ok=True)
        write_json(self.dir / name, obj)
        self._record(name)

    def explanations(self, name, rows):
        self.dir.mkdir(parents=True, exist_ok=True)
        save_explanations_csv(rows, self.dir / name)
        self._record(name)

    def manifest(self, command, args, started, config=None, seed=None):
        self.dir.mkdir(parents=True, exist_ok=True)
        body = {
            "command": command,
            "input": getattr(args, "market", None),
            "config": config,
            "seed": seed,
            "tool_version": __version__,
            "kernel": BACKEND,
            "artifacts": [{"path": k, "sha256": v} for k, v in sorted(self.files.items())],
            "started": started,
            "finished": _now(),
        }
        write_json(self.dir / "manifest.json", _schema("manifest", body))


def _audit_artifacts(w: _Writer, market, kind, matching):
    ir = is_individually_rational(market, kind, matching)
    pairs = find_blocking_pairs(market, kind, matching)
    w.json("audit.json", _schema("audit", {
        "kind": ChoiceKind(kind).value,
        "individually_rational": ir.ok,
        "ir_witnesses": list(ir.witnesses),
        "stable": ir.ok and not pairs,
        "blocking_pairs": [p.to_json() for p in pairs],
        "explanation_categories": [{"category": c, "extension": c in EXTENSIONS} for c in CATEGORIES],
    }))
    w.explanations("explanations.csv", explain_all(market, kind, matching))
    w.json("summary.json", _schema("summary", summarize(market, matching, pairs).to_json()))
    return ir, pairs


# ---------------------------------------------------------------------------


def cmd_match(args) -> int:
    started = _now()
    kind = ChoiceKind(args.choice)
    market = _load(args, kind)
    config = PipelineConfig(kind, Pareto(args.pareto), args.alternation_cap)
    out = run_pipeline(market, config)
    w = _Writer(_out_dir(args))
    body = out.to_json()
    body.update(matching_to_json(out.matching))
    w.json("matching.json", _schema("matching", {k: v for k, v in body.items() if k != "schema"}))
    ir, pairs = _audit_artifacts(w, market, kind, out.matching)
    w.json("structure.json", _schema("structure", guarantees(market, kind).to_json()))
    w.manifest("match", args, started, config.to_json(), market.tie_break_seed)
    print(f"matched {len(out.matching.assignment)} of {len(market.candidates)} candidates; "
          f"{len(pairs)} blocking pair(s); artifacts in {w.dir}")
    return EXIT_OK


def cmd_audit(args) -> int:
    started = _now()
    kind = ChoiceKind(args.choice)
    market = _load(args, kind)
    try:
        matching = load_matching_json(args.matching)
    except OSError as exc:
        raise _Fail(EXIT_IO, f"cannot read {args.matching}: {exc}")
    except (KeyError, ValueError) as exc:
        raise _Fail(EXIT_INVALID, f"malformed matching {args.matching}: {exc}")
    w = _Writer(_out_dir(args))
    ir, pairs = _audit_artifacts(w, market, kind, matching)
    w.manifest("audit", args, started, {"kind": kind.value, "matching": args.matching}, market.tie_break_seed)
    real = sum(1 for p in pairs if p.classification == "real")
    print(f"individually rational: {ir.ok}; blocking pairs: {len(pairs)} ({real} real)")
    return EXIT_OK


def cmd_check(args) -> int:
    kind = ChoiceKind(args.choice)
    market = _load(args, kind)
    report = _schema("structure", guarantees(market, kind).to_json())
    sys.stdout.write(dumps(report))
    if args.out:
        w = _Writer(Path(args.out))
        w.json("structure.json", report)
    return EXIT_OK


def _gen_config(args) -> GenConfig:
    if args.preset == "scale2020":
        cfg = SCALE_2020
    elif args.config:
        try:
            cfg = GenConfig.from_json(json.loads(Path(args.config).read_text()))
        except OSError as exc:
            raise _Fail(EXIT_IO, f"cannot read {args.config}: {exc}")
    else:
        cfg = GenConfig()
    over = {k: getattr(args, k) for k in ("candidates", "pmas", "mode", "alpha", "tie_probability", "seed")
            if getattr(args, k) is not None}
    return dataclasses.replace(cfg, **over)


def cmd_gen(args) -> int:
    started = _now()
    if args.fixture:
        market = fixture(args.fixture)
        cfg = None
    else:
        cfg = _gen_config(args)
        try:
            market = generate(cfg)
        except GenerationError as exc:
            raise _Fail(EXIT_INVALID, f"cannot generate: {exc}")
    w = _Writer(_out_dir(args))
    if args.format == "csv":
        save_market_csv(market, w.dir / "market")
    else:
        w.json("market.json", market_to_json(market))
    if cfg is None:
        w.manifest("gen", args, started, {"fixture": args.fixture}, market.tie_break_seed)
    else:
        w.manifest("gen", args, started, cfg.to_json(), cfg.seed)
    print(f"generated {len(market.candidates)} candidates, {len(market.reports)} PMAs in {w.dir}")
    return EXIT_OK


def cmd_compare(args) -> int:
    from .suites import compare_mechanisms, format_table, small_corpus

    started = _now()
    kind = ChoiceKind(args.choice)
    if args.markets:
        markets = []
        for path in args.markets:
            args.market = path
            markets.append(_load(args, kind))
        args.market = None
        source = {"files": args.markets}
    else:
        if args.candidates or args.pmas:
            cfg = GenConfig(candidates=args.candidates or 8, pmas=args.pmas or 3, mode=args.mode)
            markets = corpus(cfg, args.corpus, args.seed or 0)
        else:
            markets = small_corpus(args.mode, args.corpus, args.seed or 0)
        source = {"corpus": args.corpus, "mode": args.mode, "start_seed": args.seed or 0}
    result = compare_mechanisms(markets, kind, Pareto(args.pareto))
    print(format_table(result["table"]))
    w = _Writer(_out_dir(args))
    w.json("compare.json", _schema("compare", {"source": source, **result}))
    w.manifest("compare", args, started, {"kind": kind.value, "pareto": args.pareto, **source}, args.seed)
    return EXIT_OK


def cmd_verify(args) -> int:
    from .suites import all_suites

    started = _now()
    results = []
    for name, fn in all_suites(quick=args.quick, include_scale=not args.no_scale):
        if args.only and name not in args.only:
            continue
        res = fn()
        results.append(res)
        print(res.line(), flush=True)
        for f in res.failures:
            print(f"    {f}")
        if name == "no_stable_certificate":
            print(f"    stable matchings under 2018 semantics: {res.info['stable_matchings']}")
    w = _Writer(_out_dir(args))
    ok = all(r.ok for r in results)
    w.json("verify.json", _schema("verify", {"ok": ok, "suites": [r.to_json() for r in results]}))
    w.manifest("verify", args, started, {"quick": args.quick, "scale": not args.no_scale}, None)
    return EXIT_OK if ok else EXIT_PROPERTY


# ---------------------------------------------------------------------------


def _add_market(p):
    p.add_argument("market", help="market JSON file or CSV directory")
    p.add_argument("--gender-population", action="append", metavar="NAME",
                   help="treat populations with this name as gender populations (repeatable)")


def _add_choice(p):
    p.add_argument("--choice", default="2018", choices=[k.value for k in ChoiceKind],
                   help="choice-function semantics (default 2018)")


def _add_out(p):
    p.add_argument("--out", metavar="DIR", help=f"output directory (default ${OUT_ENV} or ./{DEFAULT_OUT})")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gapmatch", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"gapmatch {__version__} ({BACKEND} kernel)")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("match", help="run the matching pipeline and write all artifacts")
    _add_market(p)
    _add_choice(p)
    p.add_argument("--pareto", default="none", choices=[x.value for x in Pareto])
    p.add_argument("--seed", type=int, help="override the market's tie-break seed")
    p.add_argument("--alternation-cap", type=int, default=DEFAULT_ALTERNATION_CAP)
    _add_out(p)
    p.set_defaults(func=cmd_match)

    p = sub.add_parser("audit", help="audit an existing matching against a market")
    _add_market(p)
    p.add_argument("matching", help="matching.json")
    _add_choice(p)
    p.add_argument("--seed", type=int, help="override the market's tie-break seed")
    _add_out(p)
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("check", help="print the population-structure report")
    _add_market(p)
    _add_choice(p)
    p.add_argument("--out", metavar="DIR", help="also write structure.json here")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("gen", help="generate a synthetic market")
    p.add_argument("--config", help="GenConfig JSON file")
    p.add_argument("--preset", choices=["scale2020"])
    p.add_argument("--fixture", choices=[f.value for f in FixtureId], help="emit a built-in fixture instead")
    p.add_argument("--candidates", type=int)
    p.add_argument("--pmas", type=int)
    p.add_argument("--mode", choices=MODES)
    p.add_argument("--alpha", type=float)
    p.add_argument("--tie-probability", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--format", choices=["json", "csv"], default="json")
    _add_out(p)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("compare", help="DA pipeline versus Boston on markets or a generated corpus")
    p.add_argument("markets", nargs="*", help="market files; omit to use a generated corpus")
    p.add_argument("--gender-population", action="append", metavar="NAME")
    _add_choice(p)
    p.add_argument("--pareto", default="none", choices=[x.value for x in Pareto])
    p.add_argument("--corpus", type=int, default=200, help="corpus size (default 200)")
    p.add_argument("--mode", choices=MODES, default=MODES[0])
    p.add_argument("--candidates", type=int)
    p.add_argument("--pmas", type=int)
    p.add_argument("--seed", type=int, help="first corpus seed, or tie-break seed override for files")
    _add_out(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("verify", help="run the property suites; exit 3 on any violation")
    p.add_argument("--quick", action="store_true", help="smaller corpora")
    p.add_argument("--no-scale", action="store_true", help="skip the national-size run")
    p.add_argument("--only", action="append", metavar="SUITE")
    _add_out(p)
    p.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except _Fail as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (ValidationError, ChoiceSemanticsError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
