"""Candidate generation over parse trees and the iterative simplification loop.

Two edits generate candidates from the current sentence: *deletion* removes
the span dominated by a phrase node (noun-phrase labels are exempt, since
argument entities live there), and *extraction* keeps only the span of a
clause node (S / SBAR).  Candidates shorter than the word threshold are
filtered out.

The loop keeps a single current sentence: each iteration scores every
candidate and adopts the best one only if it strictly beats the best score
seen so far, so the adopted-score sequence is strictly increasing and the
loop halts within the iteration budget.  Adopted candidates are re-parsed
by tree surgery (drop the deleted node / take the extracted subtree), never
by re-running a parser.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

from .corpus import EventRecord, QAPair
from .lm import NgramModel, slor
from .mrc import BackendError, MrcBackend, SpanAnswer
from .scoring import ScoreBreakdown, ScoreConfig, combine, entity_score, predicate_score
from .treebank import ParseTree, Position, Token, leaves_under, node_at, positions, sentence_tokens

DELETE = "delete"
EXTRACT = "extract"

# phrase labels whose subtrees may be deleted; the noun-phrase family (NP,
# WHNP, QP) is excluded and the root is never deletable
DELETABLE_LABELS = frozenset(
    ["PP", "ADVP", "ADJP", "SBAR", "S", "VP", "PRT", "INTJ", "CONJP", "UCP", "FRAG", "WHADVP", "WHPP", "X"]
)
EXTRACTABLE_LABELS = frozenset(["S", "SBAR"])

_BASE_LABEL_RE = re.compile(r"[-=]")


class SimplifyError(RuntimeError):
    """One record's simplification failed; other records are unaffected."""


def base_label(label: str) -> str:
    """Phrase label with function tags stripped (ADVP-TMP -> ADVP).

    Labels that *start* with a hyphen (-LRB-, -NONE-) are kept whole."""
    if label.startswith("-"):
        return label
    return _BASE_LABEL_RE.split(label, 1)[0]


@dataclass(frozen=True)
class Candidate:
    """A token subsequence plus the edit that produced it."""

    tokens: tuple[Token, ...]
    op: str  # DELETE or EXTRACT
    position: Position

    @property
    def word_count(self) -> int:
        return len(self.tokens)

    def texts(self) -> tuple[str, ...]:
        return tuple(t.text for t in self.tokens)


@dataclass(frozen=True)
class TraceStep:
    iteration: int
    candidate: Candidate
    score: ScoreBreakdown


@dataclass(frozen=True)
class SimplificationResult:
    original: EventRecord
    final_tokens: tuple[Token, ...]
    iterations: int
    trace: tuple[TraceStep, ...]


def _reindex(tokens: Sequence[Token]) -> list[Token]:
    return [Token(text=t.text, pos=t.pos, dep=t.dep, index=i) for i, t in enumerate(tokens)]


def _rebuild_with_tokens(node: ParseTree, it) -> ParseTree:
    if node.is_leaf:
        return ParseTree(label=node.label, leaf=next(it))
    return ParseTree(label=node.label, children=tuple(_rebuild_with_tokens(c, it) for c in node.children))


def _renumber(tree: ParseTree) -> ParseTree:
    fresh = iter(_reindex(sentence_tokens(tree)))
    return _rebuild_with_tokens(tree, fresh)


def delete_node(tree: ParseTree, pos: Position) -> ParseTree:
    """Tree with the node at ``pos`` removed and leaves re-indexed.

    Ancestors left childless are pruned as well; removing the root (or the
    last leaves of the tree) is an error."""
    if not pos:
        raise ValueError("cannot delete the root node")
    node_at(tree, pos)  # validate the position before editing

    def rebuild(node: ParseTree, path: Position) -> Optional[ParseTree]:
        if path == pos:
            return None
        if node.is_leaf:
            return node
        kept = []
        for i, child in enumerate(node.children):
            result = rebuild(child, path + (i,))
            if result is not None:
                kept.append(result)
        if not kept:
            return None
        return ParseTree(label=node.label, children=tuple(kept))

    pruned = rebuild(tree, ())
    if pruned is None:
        raise ValueError(f"deleting {pos!r} would leave an empty tree")
    return _renumber(pruned)


def extract_node(tree: ParseTree, pos: Position) -> ParseTree:
    """The subtree at ``pos`` promoted to root, with leaves re-indexed."""
    return _renumber(node_at(tree, pos))


def generate_candidates(
    sentence_tokens_in: Sequence[Token], parse: ParseTree, t: int
) -> list[Candidate]:
    """All deletion and extraction candidates longer than ``t`` words.

    Output is ordered by tree position in preorder with the deletion before
    the extraction when one node admits both; duplicate token sequences
    keep their first provenance.
    """
    tree_tokens = sentence_tokens(parse)
    if [tok.text for tok in tree_tokens] != [tok.text for tok in sentence_tokens_in]:
        raise ValueError("parse leaves do not align with the sentence tokens")
    all_texts = [tok.text for tok in sentence_tokens_in]
    n = len(all_texts)

    out: list[Candidate] = []
    seen: set[tuple[str, ...]] = set()

    def emit(tokens: Sequence[Token], op: str, pos: Position) -> None:
        if len(tokens) <= t:
            return
        key = tuple(tok.text for tok in tokens)
        if key in seen:
            return
        seen.add(key)
        out.append(Candidate(tokens=tuple(tokens), op=op, position=pos))

    for pos in positions(parse):
        node = node_at(parse, pos)
        label = base_label(node.label)
        span = leaves_under(parse, pos)
        lo = span[0].index
        hi = lo + len(span)
        if pos and label in DELETABLE_LABELS:
            remaining = list(sentence_tokens_in[:lo]) + list(sentence_tokens_in[hi:])
            emit(_reindex(remaining), DELETE, pos)
        if label in EXTRACTABLE_LABELS:
            emit(_reindex(list(sentence_tokens_in[lo:hi])), EXTRACT, pos)
    assert all(c.word_count > t for c in out)
    assert n == len(tree_tokens)
    return out


AnswerFn = Callable[[str, Sequence[Token]], SpanAnswer]


class _MemoizedBackend:
    """Per-record memo over (question, candidate token texts)."""

    def __init__(self, backend: MrcBackend):
        self._backend = backend
        self._cache: dict[tuple[str, tuple[str, ...]], SpanAnswer] = {}
        self.calls = 0

    def answer(self, question: str, context_tokens: Sequence[Token]) -> SpanAnswer:
        key = (question, tuple(tok.text for tok in context_tokens))
        if key not in self._cache:
            self.calls += 1
            self._cache[key] = self._backend.answer(question, context_tokens)
        return self._cache[key]


Observer = Callable[[int, Candidate, ScoreBreakdown], None]


def russ(
    record: EventRecord,
    questions: Sequence[QAPair],
    backend: MrcBackend,
    model: NgramModel,
    cfg: ScoreConfig,
    predicates: Optional[Sequence[str]] = None,
    on_candidate: Optional[Observer] = None,
) -> SimplificationResult:
    """Iteratively simplify one record's sentence.

    Entity and predicate reference sets are fixed from the original
    sentence; candidate scores are recomputed per iteration and the best
    candidate is adopted while it strictly improves on the best score seen
    so far (which starts at 0, so nothing is adopted when every candidate
    scores non-positive).  ``on_candidate`` observes every scored
    candidate (iteration, candidate, breakdown).
    """
    if predicates is None:
        predicates = [record.matched_predicate]
    entities = list(record.entities)
    memo = _MemoizedBackend(backend)

    current_tree = record.parse
    current_tokens: tuple[Token, ...] = tuple(record.tokens)
    max_score = 0.0
    trace: list[TraceStep] = []

    for iteration in range(1, cfg.max_iter + 1):
        candidates = generate_candidates(current_tokens, current_tree, cfg.t)
        if not candidates:
            break
        best: Optional[tuple[Candidate, ScoreBreakdown]] = None
        for cand in candidates:
            try:
                nu_rc = {qa.role: memo.answer(qa.question, cand.tokens).score for qa in questions}
            except BackendError as err:
                raise SimplifyError(f"record {record.id}: backend failed: {err}") from err
            breakdown = combine(
                slor(model, cand.tokens),
                entity_score(cand.tokens, entities),
                predicate_score(cand.tokens, predicates),
                nu_rc,
                cfg,
            )
            if on_candidate is not None:
                on_candidate(iteration, cand, breakdown)
            if best is None or breakdown.combined > best[1].combined:
                best = (cand, breakdown)
        assert best is not None
        cand, breakdown = best
        if breakdown.combined <= max_score:
            break
        max_score = breakdown.combined
        if cand.op == DELETE:
            current_tree = delete_node(current_tree, cand.position)
        else:
            current_tree = extract_node(current_tree, cand.position)
        current_tokens = tuple(sentence_tokens(current_tree))
        trace.append(TraceStep(iteration=iteration, candidate=cand, score=breakdown))

    return SimplificationResult(
        original=record,
        final_tokens=current_tokens,
        iterations=len(trace),
        trace=tuple(trace),
    )
