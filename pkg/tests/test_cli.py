import json
from pathlib import Path

import pytest

from russ.cli import main

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture(scope="module")
def lm_model(tmp_path_factory):
    out = tmp_path_factory.mktemp("lm") / "model.json"
    assert main([
        "train-lm", "--records", str(FIXTURES / "lm_corpus.jsonl"), "--out", str(out),
    ]) == 0
    return out


def _simplify_args(out_path, lm_path, **overrides):
    args = [
        "simplify",
        "--records", str(FIXTURES / "records.jsonl"),
        "--predicates", str(FIXTURES / "predicates.tsv"),
        "--entities", str(FIXTURES / "entities.txt"),
        "--oracle-entities", str(FIXTURES / "oracle_entities.txt"),
        "--lm", str(lm_path),
        "--backend", "heuristic",
        "--c", "0",
        "--out", str(out_path),
    ]
    for key, value in overrides.items():
        args += [f"--{key.replace('_', '-')}", str(value)]
    return args


def _records_subset(tmp_path, n=3, mutate=None):
    lines = (FIXTURES / "records.jsonl").read_text(encoding="utf-8").splitlines()[:n]
    objs = [json.loads(line) for line in lines]
    if mutate:
        mutate(objs)
    path = tmp_path / "records.jsonl"
    path.write_text("".join(json.dumps(o) + "\n" for o in objs), encoding="utf-8")
    return path


class TestGenQa:
    def test_two_questions_per_record(self, tmp_path, capsys):
        records = _records_subset(tmp_path, n=3)
        out = tmp_path / "qa.jsonl"
        assert main([
            "gen-qa", "--records", str(records),
            "--predicates", str(FIXTURES / "predicates.tsv"), "--out", str(out),
        ]) == 0
        lines = out.read_text(encoding="utf-8").splitlines()
        assert len(lines) == 6
        assert "records" in capsys.readouterr().out

    def test_missing_gold_role_warns(self, tmp_path, capsys):
        def drop_target(objs):
            objs[0]["gold_answers"] = {"Actor": objs[0]["gold_answers"]["Actor"]}

        records = _records_subset(tmp_path, n=1, mutate=drop_target)
        out = tmp_path / "qa.jsonl"
        assert main([
            "gen-qa", "--records", str(records),
            "--predicates", str(FIXTURES / "predicates.tsv"), "--out", str(out),
        ]) == 0
        assert len(out.read_text(encoding="utf-8").splitlines()) == 1
        assert "skipped" in capsys.readouterr().out

    def test_empty_records_file(self, tmp_path):
        records = tmp_path / "records.jsonl"
        records.write_text("", encoding="utf-8")
        out = tmp_path / "qa.jsonl"
        assert main([
            "gen-qa", "--records", str(records),
            "--predicates", str(FIXTURES / "predicates.tsv"), "--out", str(out),
        ]) == 0
        assert out.read_text(encoding="utf-8") == ""

    def test_missing_records_file_fails(self, tmp_path):
        assert main([
            "gen-qa", "--records", str(tmp_path / "nope.jsonl"),
            "--predicates", str(FIXTURES / "predicates.tsv"),
            "--out", str(tmp_path / "qa.jsonl"),
        ]) == 2


class TestTrainLm:
    def test_model_loads_back(self, lm_model):
        from russ.lm import NgramModel

        model = NgramModel.load(lm_model)
        assert model.order == 3

    def test_empty_corpus_fails(self, tmp_path):
        empty = tmp_path / "corpus.jsonl"
        empty.write_text("", encoding="utf-8")
        assert main(["train-lm", "--records", str(empty), "--out", str(tmp_path / "m.json")]) == 2


class TestSimplify:
    def test_traces_strictly_increase(self, tmp_path, lm_model):
        out = tmp_path / "simplified.jsonl"
        assert main(_simplify_args(out, lm_model)) == 0
        lines = [json.loads(l) for l in out.read_text(encoding="utf-8").splitlines()]
        assert len(lines) == 20
        for obj in lines:
            scores = [step["combined"] for step in obj["trace"]]
            assert all(x < y for x, y in zip(scores, scores[1:])) or len(scores) <= 1

    def test_rerun_is_byte_identical(self, tmp_path, lm_model):
        first = tmp_path / "one.jsonl"
        second = tmp_path / "two.jsonl"
        assert main(_simplify_args(first, lm_model)) == 0
        assert main(_simplify_args(second, lm_model)) == 0
        assert first.read_bytes() == second.read_bytes()

    def test_predicate_gate_row5(self, tmp_path, lm_model):
        out = tmp_path / "simplified.jsonl"
        assert main(_simplify_args(out, lm_model, c=1, r_actor=3, r_target=0)) == 0
        from russ.corpus import PredicateTable

        table = PredicateTable.load(FIXTURES / "predicates.tsv")
        records = {
            json.loads(l)["id"]: json.loads(l)
            for l in (FIXTURES / "records.jsonl").read_text(encoding="utf-8").splitlines()
        }
        for line in out.read_text(encoding="utf-8").splitlines():
            obj = json.loads(line)
            predicates = table.predicates_for(records[obj["id"]]["event_type"])
            words = obj["simplified"].split()
            assert any(
                words[i:i + len(p.split())] == p.split()
                for p in predicates
                for i in range(len(words))
            ), obj["id"]

    def test_verbose_records_candidates(self, tmp_path, lm_model):
        out = tmp_path / "verbose.jsonl"
        args = _simplify_args(out, lm_model)
        args.insert(1, "--verbose")
        assert main(args) == 0
        obj = json.loads(out.read_text(encoding="utf-8").splitlines()[0])
        assert "candidates" in obj and len(obj["candidates"]) >= len(obj["trace"])

    def test_unreachable_endpoint_drops_everything(self, tmp_path, lm_model):
        out = tmp_path / "simplified.jsonl"
        args = [
            "simplify",
            "--records", str(FIXTURES / "records.jsonl"),
            "--predicates", str(FIXTURES / "predicates.tsv"),
            "--entities", str(FIXTURES / "entities.txt"),
            "--lm", str(lm_model),
            "--backend", "http",
            "--endpoint", "http://127.0.0.1:1",
            "--retries", "0",
            "--timeout", "0.2",
            "--workers", "4",
            "--out", str(out),
        ]
        assert main(args) == 1
        assert out.read_text(encoding="utf-8") == ""

    def test_config_precedence_file_env_flag(self, tmp_path, lm_model, monkeypatch):
        # a large t filters the full simplification away, so outputs differ
        baseline = tmp_path / "t5.jsonl"
        assert main(_simplify_args(baseline, lm_model)) == 0
        coarse = tmp_path / "t12.jsonl"
        assert main(_simplify_args(coarse, lm_model, t=12)) == 0
        assert baseline.read_bytes() != coarse.read_bytes()

        config = tmp_path / "russ.cfg"
        config.write_text("t = 12\n", encoding="utf-8")

        from_file = tmp_path / "from_file.jsonl"
        args = _simplify_args(from_file, lm_model)
        args += ["--config", str(config)]
        assert main(args) == 0
        assert from_file.read_bytes() == coarse.read_bytes()

        from_env = tmp_path / "from_env.jsonl"
        monkeypatch.setenv("RUSS_T", "5")
        args = _simplify_args(from_env, lm_model)
        args += ["--config", str(config)]
        assert main(args) == 0
        assert from_env.read_bytes() == baseline.read_bytes()

        from_flag = tmp_path / "from_flag.jsonl"
        args = _simplify_args(from_flag, lm_model, t=12)
        args += ["--config", str(config)]
        assert main(args) == 0  # flag 12 beats env 5
        assert from_flag.read_bytes() == coarse.read_bytes()


class TestEval:
    def _identity_simplified(self, tmp_path):
        lines = (FIXTURES / "records.jsonl").read_text(encoding="utf-8").splitlines()
        out = tmp_path / "identity.jsonl"
        with open(out, "w", encoding="utf-8") as fh:
            for line in lines:
                obj = json.loads(line)
                fh.write(json.dumps({
                    "id": obj["id"],
                    "original": obj["raw_text"],
                    "simplified": obj["raw_text"],
                    "iterations": 0,
                    "trace": [],
                }) + "\n")
        return out

    def _eval_args(self, simplified, out):
        return [
            "eval",
            "--records", str(FIXTURES / "records.jsonl"),
            "--predicates", str(FIXTURES / "predicates.tsv"),
            "--entities", str(FIXTURES / "entities.txt"),
            "--oracle-entities", str(FIXTURES / "oracle_entities.txt"),
            "--backend", "heuristic",
            "--simplified", str(simplified),
            "--out", str(out),
        ]

    def test_identity_simplification_all_same(self, tmp_path):
        out = tmp_path / "report"
        assert main(self._eval_args(self._identity_simplified(tmp_path), out)) == 0
        report = json.loads((out / "report.json").read_text(encoding="utf-8"))
        for role in ("Actor", "Target"):
            assert report["roles"][role]["delta_same"] == 100.0

    def test_report_files_and_figures_written(self, tmp_path):
        out = tmp_path / "report"
        assert main(self._eval_args(self._identity_simplified(tmp_path), out)) == 0
        for name in ("report.json", "report.txt", "report.csv"):
            assert (out / name).exists()
        for name in ("f1.png", "deltas.png", "distance.png", "lengths.png"):
            assert (out / "figures" / name).stat().st_size > 0

    def test_delta_sums_to_100(self, tmp_path, lm_model):
        simplified = tmp_path / "simplified.jsonl"
        assert main(_simplify_args(simplified, lm_model)) == 0
        out = tmp_path / "report"
        assert main(self._eval_args(simplified, out)) == 0
        report = json.loads((out / "report.json").read_text(encoding="utf-8"))
        for role in ("Actor", "Target"):
            r = report["roles"][role]
            assert r["delta_pos"] + r["delta_neg"] + r["delta_same"] == pytest.approx(100.0, abs=1e-9)

    def test_unknown_record_id_fails(self, tmp_path):
        bad = tmp_path / "bad.jsonl"
        bad.write_text(
            json.dumps({"id": "zz99", "simplified": "a b c", "iterations": 0}) + "\n",
            encoding="utf-8",
        )
        assert main(self._eval_args(bad, tmp_path / "report")) == 2

    def test_missing_simplified_file_fails(self, tmp_path):
        assert main(self._eval_args(tmp_path / "missing.jsonl", tmp_path / "report")) == 2
