#!/usr/bin/env python3
"""Record golden answers for five (question, context) pairs.

Writes ../fixtures/golden_answers.json in the fixture-backend format so
the primary test suite can replay the service's answers without it.
"""

import json
from pathlib import Path

from refserver.qa import load_model

ROOT = Path(__file__).resolve().parent.parent.parent
OUT = ROOT / "fixtures" / "golden_answers.json"

PAIRS = [
    (
        "Who accused someone?",
        "the journalist who had angered the cartel group last spring accused the mayor on monday",
    ),
    (
        "Who was accused by someone?",
        "the journalist accused the mayor on monday",
    ),
    (
        "Who shelled someone?",
        "the militia shelled despite early warnings from the elders the garrison on monday",
    ),
    (
        "Who was shelled by someone?",
        "the militia shelled the garrison on monday",
    ),
    (
        "Who was sued by someone?",
        "a businessman detained for his links to disgraced army general Xu Caihou "
        "has been sued by his former employees",
    ),
]


def main():
    model = load_model()
    rows = []
    for question, context in PAIRS:
        tokens = context.split()
        span = model.best_span(question, tokens)
        rows.append({
            "context": context,
            "question": question,
            "answer": {
                "text": span.text(tokens),
                "start_token": span.start,
                "end_token": span.end,
                "score": span.score,
            },
        })
    OUT.write_text(json.dumps(rows, indent=2) + "\n", encoding="utf-8")
    for row in rows:
        print(f"{row['question']:<36} -> {row['answer']['text']!r} ({row['answer']['score']:.2f})")
    print(f"wrote {len(rows)} golden answers to {OUT}")


if __name__ == "__main__":
    main()
