"""Command-line entry point: gen-qa, train-lm, simplify, eval.

Option values resolve in precedence order: command-line flag, then a
RUSS_-prefixed environment variable, then a key=value config file passed
with --config, then the built-in default.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path
from typing import Optional, Sequence

from . import corpus as corpus_mod
from .corpus import (
    EntityDictionary,
    EventRecord,
    PredicateTable,
    RecordError,
    generate_questions,
    load_records,
)
from .evaluation import evaluate
from .figures import render_report_figures
from .lm import NgramModel, train
from .mrc import FixtureOracle, HeuristicOracle, HttpClient, MrcBackend
from .scoring import ConfigError, ScoreConfig
from .search import SimplificationResult, SimplifyError, russ
from .treebank import Token, make_tokens

log = logging.getLogger("russ")

DEFAULTS = {
    "a": 1.5,
    "b": 1,
    "c": 1,
    "r_actor": 1,
    "r_target": 1,
    "t": 5,
    "max_iter": 10,
    "order": 3,
    "pos_mix": 0.3,
    "backend": "heuristic",
    "timeout": 10.0,
    "retries": 2,
    "concurrency": 4,
    "workers": 4,
}

_TYPES = {
    "a": float,
    "b": int,
    "c": int,
    "r_actor": int,
    "r_target": int,
    "t": int,
    "max_iter": int,
    "order": int,
    "pos_mix": float,
    "timeout": float,
    "retries": int,
    "concurrency": int,
    "workers": int,
    "seed": int,
    "verbose": lambda v: str(v).lower() in ("1", "true", "yes"),
}


class CliError(Exception):
    """Fatal configuration or input problem; maps to exit status 2."""


def _read_config_file(path: Optional[str]) -> dict[str, str]:
    if not path:
        return {}
    if not Path(path).exists():
        raise CliError(f"config file not found: {path}")
    values = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise CliError(f"{path}:{lineno}: expected key = value")
        key, value = line.split("=", 1)
        values[key.strip().replace("-", "_")] = value.strip()
    return values


def _resolve(name: str, args: argparse.Namespace, file_config: dict[str, str]):
    """flag > RUSS_<NAME> env > config file > built-in default."""
    value = getattr(args, name, None)
    if value is None:
        env = os.environ.get(f"RUSS_{name.upper()}")
        if env is not None:
            value = env
        elif name in file_config:
            value = file_config[name]
        else:
            value = DEFAULTS.get(name)
    if value is not None and name in _TYPES and not isinstance(value, (int, float, bool)):
        try:
            value = _TYPES[name](value)
        except ValueError as err:
            raise CliError(f"bad value for {name}: {value!r} ({err})") from err
    return value


def _require_path(name: str, value: Optional[str]) -> Path:
    if not value:
        raise CliError(f"--{name.replace('_', '-')} is required")
    path = Path(value)
    if not path.exists():
        raise CliError(f"--{name.replace('_', '-')}: no such file: {path}")
    return path


def _score_config(args, file_config) -> ScoreConfig:
    try:
        return ScoreConfig(
            a=_resolve("a", args, file_config),
            b=_resolve("b", args, file_config),
            c=_resolve("c", args, file_config),
            role_exponents={
                "Actor": _resolve("r_actor", args, file_config),
                "Target": _resolve("r_target", args, file_config),
            },
            t=_resolve("t", args, file_config),
            max_iter=_resolve("max_iter", args, file_config),
        )
    except ConfigError as err:
        raise CliError(str(err)) from err


def _build_backend(args, file_config, table: Optional[PredicateTable]) -> MrcBackend:
    kind = _resolve("backend", args, file_config)
    if kind == "heuristic":
        dict_path = _resolve("oracle_entities", args, file_config) or _resolve("entities", args, file_config)
        if not dict_path:
            raise CliError("heuristic backend needs --entities (or --oracle-entities)")
        dictionary = EntityDictionary.load(_require_path("entities", dict_path))
        predicates = table.all_predicates() if table is not None else []
        return HeuristicOracle(dictionary, predicates)
    if kind == "fixture":
        fixture = _resolve("fixture", args, file_config)
        return FixtureOracle.load(_require_path("fixture", fixture))
    if kind == "http":
        endpoint = _resolve("endpoint", args, file_config)
        if not endpoint:
            raise CliError("http backend needs --endpoint")
        return HttpClient(
            endpoint,
            timeout=_resolve("timeout", args, file_config),
            retries=_resolve("retries", args, file_config),
            concurrency=_resolve("concurrency", args, file_config),
        )
    raise CliError(f"unknown backend {kind!r} (expected heuristic, fixture, or http)")


def _load_lm_sentences(path: Path) -> list[list[Token]]:
    """Token sequences from any JSONL whose lines carry a tokens array."""
    sentences = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                tokens = [
                    Token(text=t["text"], pos=t.get("pos", "") or "", index=i)
                    for i, t in enumerate(obj["tokens"])
                ]
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as err:
                raise CliError(f"{path}:{lineno}: bad sentence line: {err}") from err
            if tokens:
                sentences.append(tokens)
    return sentences


def cmd_gen_qa(args, file_config) -> int:
    records_path = _require_path("records", _resolve("records", args, file_config))
    table = PredicateTable.load(_require_path("predicates", _resolve("predicates", args, file_config)))
    out = _resolve("out", args, file_config)
    if not out:
        raise CliError("--out is required")

    records = load_records(records_path)
    per_event: dict[str, int] = {}
    qa_count = 0
    warnings = 0
    with open(out, "w", encoding="utf-8") as fh:
        for record in records:
            if record.event_type not in table:
                log.warning("record %s: event type %r not in the predicate table", record.id, record.event_type)
            pairs = generate_questions(record)
            warnings += 2 - len(pairs)
            per_event[record.event_type] = per_event.get(record.event_type, 0) + 1
            for qa in pairs:
                fh.write(json.dumps({
                    "id": record.id,
                    "role": qa.role,
                    "question": qa.question,
                    "gold_answer": qa.gold_answer,
                }, sort_keys=True) + "\n")
                qa_count += 1
    for event_type in sorted(per_event):
        print(f"{event_type}: {per_event[event_type]} records")
    print(f"wrote {qa_count} question-answer lines for {len(records)} records to {out}")
    if warnings:
        print(f"{warnings} role(s) skipped for missing gold answers")
    return 0


def cmd_train_lm(args, file_config) -> int:
    records_path = _require_path("records", _resolve("records", args, file_config))
    out = _resolve("out", args, file_config)
    if not out:
        raise CliError("--out is required")
    sentences = _load_lm_sentences(records_path)
    if not sentences:
        raise CliError(f"{records_path}: no sentences to train on")
    model = train(
        sentences,
        order=_resolve("order", args, file_config),
        pos_mix=_resolve("pos_mix", args, file_config),
    )
    model.save(out)
    print(f"trained order-{model.order} model on {len(sentences)} sentences -> {out}")
    return 0


def _trace_json(result: SimplificationResult, verbose_candidates) -> dict:
    payload = {
        "id": result.original.id,
        "original": " ".join(t.text for t in result.original.tokens),
        "simplified": " ".join(t.text for t in result.final_tokens),
        "iterations": result.iterations,
        "trace": [
            {
                "iteration": step.iteration,
                "op": step.candidate.op,
                "position": list(step.candidate.position),
                "candidate": " ".join(step.candidate.texts()),
                "nu_lm": step.score.nu_lm,
                "nu_entity": step.score.nu_entity,
                "nu_pred": step.score.nu_pred,
                "nu_rc": step.score.nu_rc,
                "combined": step.score.combined,
            }
            for step in result.trace
        ],
    }
    if verbose_candidates is not None:
        payload["candidates"] = verbose_candidates
    return payload


def cmd_simplify(args, file_config) -> int:
    records_path = _require_path("records", _resolve("records", args, file_config))
    table = PredicateTable.load(_require_path("predicates", _resolve("predicates", args, file_config)))
    entities_path = _require_path("entities", _resolve("entities", args, file_config))
    lm_path = _require_path("lm", _resolve("lm", args, file_config))
    out = _resolve("out", args, file_config)
    if not out:
        raise CliError("--out is required")
    verbose = bool(_resolve("verbose", args, file_config))
    workers = _resolve("workers", args, file_config)
    cfg = _score_config(args, file_config)

    gate = EntityDictionary.load(entities_path)
    records = load_records(records_path, gate)
    model = NgramModel.load(lm_path)
    backend = _build_backend(args, file_config, table)

    def run_one(record: EventRecord):
        questions = generate_questions(record)
        roles = {qa.role for qa in questions}
        effective = cfg
        if roles != set(cfg.role_exponents):
            effective = replace(
                cfg, role_exponents={r: e for r, e in cfg.role_exponents.items() if r in roles}
            )
        captured: Optional[list] = [] if verbose else None

        def observe(iteration, cand, breakdown):
            captured.append({
                "iteration": iteration,
                "op": cand.op,
                "position": list(cand.position),
                "candidate": " ".join(cand.texts()),
                "combined": breakdown.combined,
                "nu_lm": breakdown.nu_lm,
                "nu_entity": breakdown.nu_entity,
                "nu_pred": breakdown.nu_pred,
                "nu_rc": breakdown.nu_rc,
            })

        predicates = table.predicates_for(record.event_type) or [record.matched_predicate]
        result = russ(
            record, questions, backend, model, effective,
            predicates=predicates,
            on_candidate=observe if verbose else None,
        )
        return result, captured

    outcomes: dict[str, tuple] = {}
    dropped: list[str] = []
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        futures = {pool.submit(run_one, record): record for record in records}
        for future, record in futures.items():
            try:
                outcomes[record.id] = future.result()
            except SimplifyError as err:
                log.error("%s", err)
                dropped.append(record.id)

    with open(out, "w", encoding="utf-8") as fh:
        for record_id in sorted(outcomes):
            result, captured = outcomes[record_id]
            fh.write(json.dumps(_trace_json(result, captured), sort_keys=True) + "\n")

    print(f"simplified {len(outcomes)} records -> {out}; dropped {len(dropped)}")
    if dropped:
        print("dropped records: " + ", ".join(sorted(dropped)))
    if records and not outcomes:
        return 1
    return 0


def cmd_eval(args, file_config) -> int:
    records_path = _require_path("records", _resolve("records", args, file_config))
    simplified_path = _require_path("simplified", _resolve("simplified", args, file_config))
    entities_path = _require_path("entities", _resolve("entities", args, file_config))
    table = PredicateTable.load(_require_path("predicates", _resolve("predicates", args, file_config)))
    out = _resolve("out", args, file_config)
    if not out:
        raise CliError("--out is required")

    gate = EntityDictionary.load(entities_path)
    records = {r.id: r for r in load_records(records_path, gate)}
    backend = _build_backend(args, file_config, table)

    pairs: list[tuple[EventRecord, SimplificationResult]] = []
    with open(simplified_path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            record = records.get(obj.get("id"))
            if record is None:
                raise CliError(f"{simplified_path}:{lineno}: unknown record id {obj.get('id')!r}")
            final = make_tokens(obj["simplified"].split()) if obj["simplified"] else ()
            pairs.append((
                record,
                SimplificationResult(
                    original=record,
                    final_tokens=tuple(final),
                    iterations=int(obj.get("iterations", 0)),
                    trace=(),
                ),
            ))
    missing = set(records) - {record.id for record, _ in pairs}
    if missing:
        raise CliError(f"no simplification found for record(s): {', '.join(sorted(missing))}")

    report = evaluate(pairs, backend)

    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "report.json").write_text(
        json.dumps(report.to_json(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    (out_dir / "report.txt").write_text(report.to_table() + "\n", encoding="utf-8")
    (out_dir / "report.csv").write_text(report.to_csv(), encoding="utf-8")
    figure_paths = render_report_figures(report, out_dir / "figures")
    print(report.to_table())
    print(f"report written to {out_dir} ({', '.join(p.name for p in figure_paths)})")
    return 0


def _add_common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key = value config file")
    p.add_argument("--records", help="JSONL records file")
    p.add_argument("--predicates", help="event_type<TAB>predicate table")
    p.add_argument("--entities", help="entity dictionary, one entry per line")
    p.add_argument("--out", help="output path")


def _add_backend_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--backend", choices=["heuristic", "fixture", "http"], default=None)
    p.add_argument("--oracle-entities", dest="oracle_entities",
                   help="richer dictionary for the heuristic backend (defaults to --entities)")
    p.add_argument("--fixture", help="recorded answers file for the fixture backend")
    p.add_argument("--endpoint", help="HTTP backend base URL")
    p.add_argument("--timeout", type=float)
    p.add_argument("--retries", type=int)
    p.add_argument("--concurrency", type=int)


def _add_score_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--a", type=float, help="fluency exponent")
    p.add_argument("--b", type=int, choices=[0, 1], help="entity gate exponent")
    p.add_argument("--c", type=int, choices=[0, 1], help="predicate gate exponent")
    p.add_argument("--r-actor", dest="r_actor", type=int, help="Actor role exponent")
    p.add_argument("--r-target", dest="r_target", type=int, help="Target role exponent")
    p.add_argument("--t", type=int, help="minimum candidate word count")
    p.add_argument("--max-iter", dest="max_iter", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="russ",
        description="MRC-guided unsupervised sentence simplification for event argument extraction",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-qa", help="generate role questions from records")
    _add_common_flags(p)
    p.set_defaults(func=cmd_gen_qa)

    p = sub.add_parser("train-lm", help="train the n-gram language model")
    _add_common_flags(p)
    p.add_argument("--order", type=int)
    p.add_argument("--pos-mix", dest="pos_mix", type=float)
    p.set_defaults(func=cmd_train_lm)

    p = sub.add_parser("simplify", help="simplify record sentences")
    _add_common_flags(p)
    _add_backend_flags(p)
    _add_score_flags(p)
    p.add_argument("--lm", help="trained language model file")
    p.add_argument("--workers", type=int)
    p.add_argument("--seed", type=int, help="reserved; the pipeline is deterministic")
    p.add_argument("--verbose", action="store_const", const=True, default=None,
                   help="record every scored candidate in the output")
    p.set_defaults(func=cmd_simplify)

    p = sub.add_parser("eval", help="score extraction before/after simplification")
    _add_common_flags(p)
    _add_backend_flags(p)
    p.add_argument("--simplified", help="output file of the simplify command")
    p.set_defaults(func=cmd_eval)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        file_config = _read_config_file(_resolve("config", args, {}))
        return args.func(args, file_config)
    except (CliError, RecordError, ConfigError, ValueError) as err:
        log.error("%s", err)
        return 2


if __name__ == "__main__":
    sys.exit(main())
