"""Event records, entity/predicate dictionaries, and QA template generation.

Records arrive as JSON lines; each line carries the sentence tokens, a
bracketed constituency parse aligned to them, the event type, the trigger
surface form found in the sentence, and the gold role answers.  Entity and
predicate dictionaries are plain UTF-8 text files.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .treebank import ParseTree, Token, parse_bracketed, render, sentence_tokens

log = logging.getLogger(__name__)

ROLES = ("Actor", "Target")

ACTIVE_TEMPLATE = "Who {predicate} someone?"
PASSIVE_TEMPLATE = "Who was {predicate} by someone?"


class RecordError(ValueError):
    """A JSONL line violated the record schema or an invariant."""


@dataclass(frozen=True)
class QAPair:
    role: str
    question: str
    gold_answer: str

    def __post_init__(self) -> None:
        if not self.question or not self.question.endswith("?"):
            raise ValueError(f"question must be non-empty and end with '?': {self.question!r}")


@dataclass(frozen=True)
class EventRecord:
    """One annotated sentence: the unit of work for simplification."""

    id: str
    tokens: tuple[Token, ...]
    raw_text: str
    parse: ParseTree
    event_type: str
    matched_predicate: str
    gold_answers: dict[str, str]
    entities: tuple[str, ...] = ()

    def with_entities(self, entities: Sequence[str]) -> "EventRecord":
        return replace(self, entities=tuple(entities))


class EntityDictionary:
    """A set of entity surface forms, each a lowercase token sequence."""

    def __init__(self, entries: Iterable[str]):
        seqs = set()
        for entry in entries:
            words = tuple(entry.lower().split())
            if not words:
                raise ValueError("entity dictionary entries must be non-empty")
            seqs.add(words)
        # longest first so the longest match wins at each start position
        self._entries: list[tuple[str, ...]] = sorted(seqs, key=lambda w: (-len(w), w))

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, entry: str) -> bool:
        return tuple(entry.lower().split()) in set(self._entries)

    def entries(self) -> list[str]:
        return [" ".join(words) for words in self._entries]

    @classmethod
    def load(cls, path: str | Path) -> "EntityDictionary":
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        return cls(line.strip() for line in lines if line.strip())


class PredicateTable:
    """Event type -> list of lowercase predicate surface forms."""

    def __init__(self, table: dict[str, Sequence[str]]):
        self._table: dict[str, list[str]] = {}
        for event_type, predicates in table.items():
            preds = [p.strip().lower() for p in predicates if p.strip()]
            if not preds:
                raise ValueError(f"predicate list for {event_type!r} is empty")
            self._table[event_type] = preds

    def __contains__(self, event_type: str) -> bool:
        return event_type in self._table

    def event_types(self) -> list[str]:
        return list(self._table)

    def predicates_for(self, event_type: str) -> list[str]:
        return list(self._table.get(event_type, []))

    def all_predicates(self) -> list[str]:
        seen: dict[str, None] = {}
        for preds in self._table.values():
            for p in preds:
                seen.setdefault(p)
        return list(seen)

    @classmethod
    def load(cls, path: str | Path) -> "PredicateTable":
        table: dict[str, list[str]] = {}
        for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            if "\t" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'event_type<TAB>predicate'")
            event_type, predicate = line.split("\t", 1)
            table.setdefault(event_type.strip(), []).append(predicate)
        return cls(table)


def phrase_occurrences(tokens: Sequence[Token], phrase: str) -> list[tuple[int, int]]:
    """All (start, end) index pairs where ``phrase`` occurs as a
    case-insensitive contiguous token subsequence; end is inclusive."""
    needle = [w.lower() for w in phrase.split()]
    if not needle:
        return []
    texts = [t.text.lower() for t in tokens]
    n = len(needle)
    return [
        (i, i + n - 1)
        for i in range(len(texts) - n + 1)
        if texts[i:i + n] == needle
    ]


def contains_phrase(tokens: Sequence[Token], phrase: str) -> bool:
    return bool(phrase_occurrences(tokens, phrase))


def detect_entities(tokens: Sequence[Token], dictionary: EntityDictionary) -> list[str]:
    """Dictionary entries found in the token sequence.

    At each start position only the longest matching entry counts; matches
    from different start positions may overlap.  Output is ordered by first
    token index and duplicate spans are suppressed.
    """
    texts = [t.text.lower() for t in tokens]
    found: list[str] = []
    seen_spans: set[tuple[int, int]] = set()
    for start in range(len(texts)):
        for words in dictionary._entries:  # longest first
            end = start + len(words)
            if end <= len(texts) and tuple(texts[start:end]) == words:
                span = (start, end)
                if span not in seen_spans:
                    seen_spans.add(span)
                    found.append(" ".join(words))
                break
    return found


def entity_spans(tokens: Sequence[Token], dictionary: EntityDictionary) -> list[tuple[int, int]]:
    """Like detect_entities but returns (start, end-inclusive) spans."""
    texts = [t.text.lower() for t in tokens]
    spans: list[tuple[int, int]] = []
    for start in range(len(texts)):
        for words in dictionary._entries:
            end = start + len(words)
            if end <= len(texts) and tuple(texts[start:end]) == words:
                span = (start, end - 1)
                if span not in spans:
                    spans.append(span)
                break
    return spans


def generate_questions(record: EventRecord) -> list[QAPair]:
    """The Actor (active-template) and Target (passive-template) questions.

    A role missing from gold_answers is omitted with a logged warning.
    """
    templates = {
        "Actor": ACTIVE_TEMPLATE,
        "Target": PASSIVE_TEMPLATE,
    }
    pairs: list[QAPair] = []
    for role in ROLES:
        gold = record.gold_answers.get(role)
        if not gold:
            log.warning("record %s: no gold answer for role %s; question omitted", record.id, role)
            continue
        question = templates[role].format(predicate=record.matched_predicate)
        pairs.append(QAPair(role=role, question=question, gold_answer=gold))
    return pairs


def _token_from_json(obj: dict, index: int) -> Token:
    if "text" not in obj:
        raise RecordError(f"token {index} missing 'text'")
    return Token(
        text=str(obj["text"]),
        pos=str(obj.get("pos", "") or ""),
        dep=str(obj.get("dep", "") or ""),
        index=index,
    )


def _attach_tokens(tree: ParseTree, tokens: Sequence[Token]) -> tuple[ParseTree, tuple[Token, ...]]:
    """Rebuild the tree with the record's tokens at the leaves.

    The record's POS tags win over the parse's preterminal tags; tokens
    with no tag of their own inherit the preterminal label.  Returns the
    rebuilt tree and the (possibly tag-enriched) tokens, which are shared
    with the tree's leaves."""
    it = iter(tokens)
    merged: list[Token] = []

    def rebuild(node: ParseTree) -> ParseTree:
        if node.is_leaf:
            assert node.leaf is not None
            try:
                tok = next(it)
            except StopIteration:
                raise RecordError("parse has more leaves than the sentence has tokens") from None
            if tok.text != node.leaf.text:
                raise RecordError(
                    f"parse leaf {node.leaf.index} is {node.leaf.text!r} but token "
                    f"{tok.index} is {tok.text!r}"
                )
            if not tok.pos:
                tok = replace(tok, pos=node.label)
            merged.append(tok)
            return ParseTree(label=node.label, leaf=tok)
        return ParseTree(label=node.label, children=tuple(rebuild(c) for c in node.children))

    rebuilt = rebuild(tree)
    leftover = next(it, None)
    if leftover is not None:
        raise RecordError("sentence has more tokens than the parse has leaves")
    return rebuilt, tuple(merged)


def record_from_json(obj: dict, entity_dictionary: Optional[EntityDictionary] = None) -> EventRecord:
    for key in ("id", "tokens", "raw_text", "parse", "event_type", "matched_predicate", "gold_answers"):
        if key not in obj:
            raise RecordError(f"missing required field {key!r}")
    tokens = tuple(_token_from_json(t, i) for i, t in enumerate(obj["tokens"]))
    if not tokens:
        raise RecordError("record has no tokens")
    try:
        tree = parse_bracketed(obj["parse"])
    except ValueError as err:
        raise RecordError(f"unparseable bracket expression: {err}") from err
    tree, tokens = _attach_tokens(tree, tokens)
    gold_answers = {str(k): str(v) for k, v in dict(obj["gold_answers"]).items()}
    for role, answer in gold_answers.items():
        if role not in ROLES:
            raise RecordError(f"unknown role {role!r} in gold_answers")
        if not answer:
            raise RecordError(f"empty gold answer for role {role!r}")
    predicate = str(obj["matched_predicate"])
    if not contains_phrase(tokens, predicate):
        raise RecordError(f"matched_predicate {predicate!r} not found in the sentence")
    record = EventRecord(
        id=str(obj["id"]),
        tokens=tokens,
        raw_text=str(obj["raw_text"]),
        parse=tree,
        event_type=str(obj["event_type"]),
        matched_predicate=predicate,
        gold_answers=gold_answers,
    )
    if entity_dictionary is not None:
        record = record.with_entities(detect_entities(tokens, entity_dictionary))
    return record


def record_to_json(record: EventRecord) -> dict:
    return {
        "id": record.id,
        "tokens": [{"text": t.text, "pos": t.pos, "dep": t.dep} for t in record.tokens],
        "raw_text": record.raw_text,
        "parse": render(record.parse),
        "event_type": record.event_type,
        "matched_predicate": record.matched_predicate,
        "gold_answers": dict(record.gold_answers),
    }


def load_records(
    path: str | Path,
    entity_dictionary: Optional[EntityDictionary] = None,
    strict: bool = True,
) -> list[EventRecord]:
    """Load and validate JSONL records.

    With strict=True any invalid line raises RecordError naming the line;
    otherwise invalid lines are skipped with a logged diagnostic.
    """
    records: list[EventRecord] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                records.append(record_from_json(obj, entity_dictionary))
            except (json.JSONDecodeError, ValueError) as err:
                message = f"{path}:{lineno}: {err}"
                if strict:
                    raise RecordError(message) from err
                log.warning("skipping record: %s", message)
    return records


def save_records(records: Iterable[EventRecord], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record_to_json(record), ensure_ascii=False) + "\n")
