"""Exact-match token F1, before/after deltas, and predicate-argument distances.

``token_f1`` follows the SQuAD convention: lowercase, strip punctuation,
drop articles, collapse whitespace, then harmonic mean of token precision
and recall over multisets.  ``evaluate`` queries a backend on the original
and simplified contexts of each record and classifies every (record, role)
into improved / worsened / unchanged, alongside mean sentence lengths and
mean token distance between the trigger and the gold answer.
"""

from __future__ import annotations

import json
import re
import string
from collections import Counter
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .corpus import ROLES, EventRecord, generate_questions, phrase_occurrences
from .mrc import BackendError, MrcBackend
from .search import SimplificationResult
from .treebank import Token

_ARTICLE_RE = re.compile(r"\b(a|an|the)\b")
_PUNCT_TABLE = str.maketrans("", "", string.punctuation)


def normalize_answer(text: str) -> str:
    """SQuAD answer normalization: lowercase, no punctuation, no articles."""
    text = text.lower()
    text = text.translate(_PUNCT_TABLE)
    text = _ARTICLE_RE.sub(" ", text)
    return " ".join(text.split())


def token_f1(prediction: str, gold: str) -> float:
    """Exact-match token F1 between two answer strings after normalization."""
    pred_tokens = normalize_answer(prediction).split()
    gold_tokens = normalize_answer(gold).split()
    if not pred_tokens and not gold_tokens:
        return 1.0
    if not pred_tokens or not gold_tokens:
        return 0.0
    overlap = sum((Counter(pred_tokens) & Counter(gold_tokens)).values())
    if overlap == 0:
        return 0.0
    precision = overlap / len(pred_tokens)
    recall = overlap / len(gold_tokens)
    return 2 * precision * recall / (precision + recall)


def distance_stats(record: EventRecord, tokens: Sequence[Token]) -> dict[str, int]:
    """Token count strictly between the trigger and the nearest gold-answer
    occurrence, per role; roles whose answer (or the trigger) cannot be
    located in ``tokens`` are omitted."""
    out: dict[str, int] = {}
    predicate_spans = phrase_occurrences(tokens, record.matched_predicate)
    if not predicate_spans:
        return out
    for role, gold in record.gold_answers.items():
        answer_spans = phrase_occurrences(tokens, gold)
        if not answer_spans:
            continue
        best: Optional[int] = None
        for p_start, p_end in predicate_spans:
            for a_start, a_end in answer_spans:
                if a_start > p_end:
                    gap = a_start - p_end - 1
                elif a_end < p_start:
                    gap = p_start - a_end - 1
                else:
                    gap = 0
                if best is None or gap < best:
                    best = gap
        assert best is not None
        out[role] = best
    return out


@dataclass
class RoleReport:
    f1_before: float = 0.0
    f1_after: float = 0.0
    delta_pos: float = 0.0
    delta_neg: float = 0.0
    delta_same: float = 0.0
    dist_before: Optional[float] = None
    dist_after: Optional[float] = None
    n: int = 0


@dataclass
class EvalReport:
    roles: dict[str, RoleReport] = field(default_factory=dict)
    mean_len_before: float = 0.0
    mean_len_after: float = 0.0
    n_records: int = 0
    dropped: int = 0

    def to_json(self) -> dict:
        return {
            "roles": {
                role: {
                    "f1_before": r.f1_before,
                    "f1_after": r.f1_after,
                    "delta_pos": r.delta_pos,
                    "delta_neg": r.delta_neg,
                    "delta_same": r.delta_same,
                    "dist_before": r.dist_before,
                    "dist_after": r.dist_after,
                    "n": r.n,
                }
                for role, r in self.roles.items()
            },
            "mean_len_before": self.mean_len_before,
            "mean_len_after": self.mean_len_after,
            "n_records": self.n_records,
            "dropped": self.dropped,
        }

    def to_table(self) -> str:
        """Aligned plain-text table: per-role F1 and delta percentages."""
        header = f"{'Role':<8} {'F1 before':>10} {'F1 after':>10} {'D+ve %':>8} {'D-ve %':>8} {'Dsame %':>8} {'n':>5}"
        lines = [header, "-" * len(header)]
        for role, r in self.roles.items():
            lines.append(
                f"{role:<8} {r.f1_before:>10.3f} {r.f1_after:>10.3f} "
                f"{r.delta_pos:>8.2f} {r.delta_neg:>8.2f} {r.delta_same:>8.2f} {r.n:>5d}"
            )
        lines.append("")
        lines.append(f"mean sentence length: {self.mean_len_before:.2f} -> {self.mean_len_after:.2f} tokens")
        for role, r in self.roles.items():
            if r.dist_before is not None and r.dist_after is not None:
                lines.append(
                    f"mean predicate-{role} distance: {r.dist_before:.2f} -> {r.dist_after:.2f} tokens"
                )
        lines.append(f"records evaluated: {self.n_records}, dropped: {self.dropped}")
        return "\n".join(lines)

    def to_csv(self) -> str:
        rows = ["role,f1_before,f1_after,delta_pos,delta_neg,delta_same,dist_before,dist_after,n"]
        for role, r in self.roles.items():
            dist_b = "" if r.dist_before is None else f"{r.dist_before}"
            dist_a = "" if r.dist_after is None else f"{r.dist_after}"
            rows.append(
                f"{role},{r.f1_before},{r.f1_after},{r.delta_pos},{r.delta_neg},{r.delta_same},"
                f"{dist_b},{dist_a},{r.n}"
            )
        return "\n".join(rows) + "\n"


def _mean(values: Sequence[float]) -> Optional[float]:
    return sum(values) / len(values) if values else None


def evaluate(
    records: Sequence[tuple[EventRecord, SimplificationResult]],
    backend: MrcBackend,
) -> EvalReport:
    """Score every record's roles on the original and simplified contexts.

    Records whose backend queries fail are excluded and counted in
    ``dropped``; delta percentages are per role over the records evaluated
    for that role.
    """
    per_role: dict[str, dict[str, list]] = {
        role: {"before": [], "after": [], "pos": 0, "neg": 0, "same": 0, "db": [], "da": []}
        for role in ROLES
    }
    lens_before: list[int] = []
    lens_after: list[int] = []
    evaluated = 0
    dropped = 0

    for record, result in records:
        questions = generate_questions(record)
        try:
            answers = [
                (
                    qa,
                    backend.answer(qa.question, record.tokens),
                    backend.answer(qa.question, result.final_tokens),
                )
                for qa in questions
            ]
        except BackendError:
            dropped += 1
            continue
        evaluated += 1
        lens_before.append(len(record.tokens))
        lens_after.append(len(result.final_tokens))
        dist_before = distance_stats(record, record.tokens)
        dist_after = distance_stats(record, result.final_tokens)
        for qa, before_answer, after_answer in answers:
            bucket = per_role[qa.role]
            f1_before = token_f1(before_answer.text, qa.gold_answer)
            f1_after = token_f1(after_answer.text, qa.gold_answer)
            bucket["before"].append(f1_before)
            bucket["after"].append(f1_after)
            if f1_after > f1_before:
                bucket["pos"] += 1
            elif f1_after < f1_before:
                bucket["neg"] += 1
            else:
                bucket["same"] += 1
            if qa.role in dist_before:
                bucket["db"].append(dist_before[qa.role])
            if qa.role in dist_after:
                bucket["da"].append(dist_after[qa.role])

    report = EvalReport(
        mean_len_before=_mean(lens_before) or 0.0,
        mean_len_after=_mean(lens_after) or 0.0,
        n_records=evaluated,
        dropped=dropped,
    )
    for role, bucket in per_role.items():
        n = len(bucket["before"])
        if n == 0:
            continue
        report.roles[role] = RoleReport(
            f1_before=sum(bucket["before"]) / n,
            f1_after=sum(bucket["after"]) / n,
            delta_pos=100.0 * bucket["pos"] / n,
            delta_neg=100.0 * bucket["neg"] / n,
            delta_same=100.0 * bucket["same"] / n,
            dist_before=_mean(bucket["db"]),
            dist_after=_mean(bucket["da"]),
            n=n,
        )
    return report
