#!/usr/bin/env python3
"""Regenerate the shipped fixture corpus under fixtures/.

Twenty records, two sentence shapes:

* "actor" records hide a decoy entity inside a relative clause between the
  actor and the trigger, so the distance-based oracle answers the decoy
  until the clause is deleted;
* "target" records put the decoy inside a heavy prepositional phrase
  between the trigger and the target.

Gold actors/targets go into entities.txt (the information-preservation
gate); oracle_entities.txt adds the decoys, which only the MRC oracle may
answer.  The LM corpus holds each original sentence, its expected
simplified form, and filler sentences so no fixture word is rare enough to
collapse to the unknown symbol.
"""

import json
import random
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "fixtures"

A_ROWS = [
    # id, actor, decoy, target, predicate, event_type, day
    ("a01", "journalist", "cartel", "mayor", "accused", "Accuse", "monday"),
    ("a02", "senator", "union", "minister", "sued", "Bring lawsuit against", "tuesday"),
    ("a03", "commander", "junta", "convoy", "captured", "Abduct, hijack, or take hostage", "wednesday"),
    ("a04", "governor", "syndicate", "auditor", "accused", "Accuse", "thursday"),
    ("a05", "colonel", "gang", "patrol", "kidnapped", "Abduct, hijack, or take hostage", "friday"),
    ("a06", "prosecutor", "network", "banker", "sued", "Bring lawsuit against", "saturday"),
    ("a07", "general", "movement", "envoy", "detained", "Arrest, detain, or charge with legal action", "sunday"),
    ("a08", "sheriff", "coalition", "smuggler", "arrested", "Arrest, detain, or charge with legal action", "monday"),
    ("a09", "regiment", "league", "outpost", "shelled", "Use conventional military force", "tuesday"),
    ("a10", "brigade", "alliance", "depot", "captured", "Abduct, hijack, or take hostage", "wednesday"),
]

B_ROWS = [
    ("b01", "militia", "elders", "garrison", "shelled", "Use conventional military force", "monday"),
    ("b02", "rebels", "clerics", "guards", "killed", "Use conventional military force", "tuesday"),
    ("b03", "police", "lawyers", "activist", "detained", "Arrest, detain, or charge with legal action", "wednesday"),
    ("b04", "regime", "diplomats", "dissident", "jailed", "Arrest, detain, or charge with legal action", "thursday"),
    ("b05", "army", "monitors", "village", "shelled", "Use conventional military force", "friday"),
    ("b06", "officers", "landowners", "trafficker", "arrested", "Arrest, detain, or charge with legal action", "saturday"),
    ("b07", "insurgents", "pensioners", "compound", "captured", "Abduct, hijack, or take hostage", "sunday"),
    ("b08", "troops", "herders", "checkpoint", "shelled", "Use conventional military force", "monday"),
    ("b09", "guerrillas", "academics", "barracks", "shelled", "Use conventional military force", "tuesday"),
    ("b10", "soldiers", "librarians", "settlement", "killed", "Use conventional military force", "wednesday"),
]

# the full predicate table shipped with the corpus
PREDICATE_TABLE = {
    "Abduct, hijack, or take hostage": ["kidnapped", "abducting", "abducted", "captured"],
    "Accuse": ["blame", "blaming", "accused", "alleged", "accusing"],
    "Apologize": ["apologize", "apology"],
    "Assassinate": ["carried out assassination of", "assassinate"],
    "Bring lawsuit against": ["is suing someone", "sued", "has sued", "filed a suit against"],
    "Demonstrate or rally": ["condemn", "protest", "demonstrate"],
    "Arrest, detain, or charge with legal action": [
        "arrested", "sentenced", "detained", "nabbed", "captured", "arresting",
        "capture", "jailed", "routinely arrested", "prosecuted", "convicted",
    ],
    "Use conventional military force": [
        "killed", "shelled", "combating", "shells", "strikes", "strike", "kill",
    ],
}

FILLER_PAIRS = [
    ("cartel", "union", "monday"),
    ("junta", "syndicate", "tuesday"),
    ("gang", "network", "wednesday"),
    ("movement", "coalition", "thursday"),
    ("league", "alliance", "friday"),
    ("elders", "clerics", "saturday"),
    ("lawyers", "diplomats", "sunday"),
    ("monitors", "landowners", "monday"),
    ("pensioners", "herders", "tuesday"),
    ("academics", "librarians", "wednesday"),
]


def a_sentence(actor, decoy, target, predicate, day):
    words = ["the", actor, "who", "had", "angered", "the", decoy, "group",
             "last", "spring", predicate, "the", target, "on", day]
    tags = ["DT", "NN", "WP", "VBD", "VBN", "DT", "NN", "NN",
            "JJ", "NN", "VBD", "DT", "NN", "IN", "NN"]
    parse = (
        f"(S (NP (NP (DT the) (NN {actor})) "
        f"(SBAR (WHNP (WP who)) (S (VP (VBD had) (VP (VBN angered) "
        f"(NP (DT the) (NN {decoy}) (NN group)) (NP (JJ last) (NN spring))))))) "
        f"(VP (VBD {predicate}) (NP (DT the) (NN {target})) "
        f"(PP (IN on) (NP (NN {day})))))"
    )
    return words, tags, parse


def b_sentence(actor, decoy, target, predicate, day):
    words = ["the", actor, predicate, "despite", "early", "warnings", "from",
             "the", decoy, "the", target, "on", day]
    tags = ["DT", "NN", "VBD", "IN", "JJ", "NNS", "IN",
            "DT", "NN", "DT", "NN", "IN", "NN"]
    parse = (
        f"(S (NP (DT the) (NN {actor})) "
        f"(VP (VBD {predicate}) "
        f"(PP (IN despite) (NP (NP (JJ early) (NNS warnings)) "
        f"(PP (IN from) (NP (DT the) (NN {decoy}))))) "
        f"(NP (DT the) (NN {target})) "
        f"(PP (IN on) (NP (NN {day})))))"
    )
    return words, tags, parse


def simplified_sentence(actor, target, predicate, day):
    words = ["the", actor, predicate, "the", target, "on", day]
    tags = ["DT", "NN", "VBD", "DT", "NN", "IN", "NN"]
    return words, tags


def filler_sentence(left, right, day):
    words = ["the", left, "met", "the", right, "on", day]
    tags = ["DT", "NNS", "VBD", "DT", "NNS", "IN", "NN"]
    return words, tags


def record_json(rid, words, tags, parse, event_type, predicate, actor, target):
    return {
        "id": rid,
        "tokens": [{"text": w, "pos": p, "dep": ""} for w, p in zip(words, tags)],
        "raw_text": " ".join(words),
        "parse": parse,
        "event_type": event_type,
        "matched_predicate": predicate,
        "gold_answers": {"Actor": actor, "Target": target},
    }


def main():
    FIXTURES.mkdir(exist_ok=True)

    records = []
    lm_sentences = []
    gate_entities = []
    decoys = []

    for rid, actor, decoy, target, predicate, event_type, day in A_ROWS:
        words, tags, parse = a_sentence(actor, decoy, target, predicate, day)
        records.append(record_json(rid, words, tags, parse, event_type, predicate, actor, target))
        lm_sentences.append((words, tags))
        lm_sentences.append(simplified_sentence(actor, target, predicate, day))
        gate_entities += [actor, target]
        decoys.append(decoy)

    for rid, actor, decoy, target, predicate, event_type, day in B_ROWS:
        words, tags, parse = b_sentence(actor, decoy, target, predicate, day)
        records.append(record_json(rid, words, tags, parse, event_type, predicate, actor, target))
        lm_sentences.append((words, tags))
        lm_sentences.append(simplified_sentence(actor, target, predicate, day))
        gate_entities += [actor, target]
        decoys.append(decoy)

    for left, right, day in FILLER_PAIRS:
        lm_sentences.append(filler_sentence(left, right, day))

    # combinatorial variants of the same three shapes keep every n-gram
    # context ambiguous, so fluency differences between a record and its
    # simplification stay small and the score is driven by the MRC terms
    rng = random.Random(20240817)
    actors = [r[1] for r in A_ROWS + B_ROWS]
    targets = [r[3] for r in A_ROWS + B_ROWS]
    all_decoys = [r[2] for r in A_ROWS + B_ROWS]
    predicates = sorted({r[4] for r in A_ROWS + B_ROWS})
    days = ["monday", "tuesday", "wednesday", "thursday", "friday", "saturday", "sunday"]
    for _ in range(120):
        actor = rng.choice(actors)
        decoy = rng.choice(all_decoys)
        target = rng.choice(targets)
        predicate = rng.choice(predicates)
        day = rng.choice(days)
        shape = rng.random()
        if shape < 0.25:
            lm_sentences.append(a_sentence(actor, decoy, target, predicate, day)[:2])
        elif shape < 0.5:
            lm_sentences.append(b_sentence(actor, decoy, target, predicate, day)[:2])
        else:
            lm_sentences.append(simplified_sentence(actor, target, predicate, day))

    with open(FIXTURES / "records.jsonl", "w", encoding="utf-8") as fh:
        for obj in records:
            fh.write(json.dumps(obj) + "\n")

    (FIXTURES / "entities.txt").write_text("\n".join(gate_entities) + "\n", encoding="utf-8")
    (FIXTURES / "oracle_entities.txt").write_text(
        "\n".join(gate_entities + decoys) + "\n", encoding="utf-8"
    )

    with open(FIXTURES / "predicates.tsv", "w", encoding="utf-8") as fh:
        for event_type, predicates in PREDICATE_TABLE.items():
            for predicate in predicates:
                fh.write(f"{event_type}\t{predicate}\n")

    with open(FIXTURES / "lm_corpus.jsonl", "w", encoding="utf-8") as fh:
        for words, tags in lm_sentences:
            obj = {"tokens": [{"text": w, "pos": p} for w, p in zip(words, tags)]}
            fh.write(json.dumps(obj) + "\n")

    check()
    print(f"wrote {len(records)} records, {len(lm_sentences)} LM sentences to {FIXTURES}")


def check():
    """Sanity-check the generated corpus end to end before shipping it."""
    sys.path.insert(0, str(ROOT / "src"))
    from russ.corpus import EntityDictionary, PredicateTable, generate_questions, load_records
    from russ.lm import train
    from russ.mrc import HeuristicOracle
    from russ.scoring import ScoreConfig
    from russ.search import russ
    from russ.treebank import Token

    gate = EntityDictionary.load(FIXTURES / "entities.txt")
    oracle_dict = EntityDictionary.load(FIXTURES / "oracle_entities.txt")
    table = PredicateTable.load(FIXTURES / "predicates.tsv")
    records = load_records(FIXTURES / "records.jsonl", gate)
    assert len(records) == 20

    corpus = []
    with open(FIXTURES / "lm_corpus.jsonl", encoding="utf-8") as fh:
        for line in fh:
            toks = json.loads(line)["tokens"]
            corpus.append([Token(text=t["text"], pos=t["pos"], index=i) for i, t in enumerate(toks)])
    model = train(corpus, order=3, pos_mix=0.3)

    backend = HeuristicOracle(oracle_dict, table.all_predicates())
    cfg = ScoreConfig(a=1.5, b=1, c=0, role_exponents={"Actor": 1, "Target": 1}, t=5, max_iter=10)
    for record in records:
        questions = generate_questions(record)
        result = russ(record, questions, backend, model, cfg,
                      predicates=table.predicates_for(record.event_type))
        simplified = [t.text for t in result.final_tokens]
        expected = simplified_sentence(
            record.gold_answers["Actor"], record.gold_answers["Target"],
            record.matched_predicate, record.tokens[-1].text,
        )[0]
        assert result.iterations == 1, (record.id, result.iterations, simplified)
        assert simplified == expected, (record.id, simplified, expected)


if __name__ == "__main__":
    main()
