"""MRC backends: best-span answers with a real-valued confidence.

Three interchangeable backends answer (question, context) queries:

* ``HeuristicOracle`` — deterministic entity/predicate distance rule, good
  for desk-scale experiments without any model: the score grows as the
  chosen entity gets closer to the question's predicate, which is exactly
  the long-range-dependency mechanism the search exploits.
* ``FixtureOracle`` — plays back recorded answers for regression tests.
* ``HttpClient`` — speaks the wire protocol: POST /answer with
  ``{"question": str, "tokens": [str]}``, expecting
  ``{"text": str, "start_token": int, "end_token": int, "score": float}``.
"""

from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Optional, Protocol, Sequence

import requests

from .corpus import EntityDictionary, entity_spans, phrase_occurrences
from .treebank import Token

NO_ANSWER_SCORE = -1.0


class BackendError(RuntimeError):
    """A backend could not produce a usable answer; carries the raw payload."""

    def __init__(self, message: str, payload: Optional[object] = None):
        super().__init__(message)
        self.payload = payload


@dataclass(frozen=True)
class SpanAnswer:
    """Best answer span over a token context; end_token is inclusive.

    The no-answer sentinel is an empty text with start_token = end_token = -1
    and a score of -1.
    """

    text: str
    start_token: int
    end_token: int
    score: float

    @property
    def is_empty(self) -> bool:
        return self.text == "" and self.start_token == -1 and self.end_token == -1

    @classmethod
    def empty(cls, score: float = NO_ANSWER_SCORE) -> "SpanAnswer":
        return cls(text="", start_token=-1, end_token=-1, score=score)

    @classmethod
    def from_span(cls, context: Sequence[Token], start: int, end: int, score: float) -> "SpanAnswer":
        if not (0 <= start <= end < len(context)):
            raise ValueError(f"span [{start}, {end}] out of bounds for context of {len(context)} tokens")
        text = " ".join(t.text for t in context[start:end + 1])
        return cls(text=text, start_token=start, end_token=end, score=score)


class MrcBackend(Protocol):
    def answer(self, question: str, context_tokens: Sequence[Token]) -> SpanAnswer: ...


def _question_is_passive(question: str) -> bool:
    q = question.lower().strip()
    return q.startswith("who was ") and q.endswith(" by someone?")


def _find_question_predicate(question: str, predicates: Sequence[str]) -> Optional[str]:
    """The longest listed predicate occurring in the question's words."""
    words = question.rstrip("?").lower().split()
    best: Optional[str] = None
    for predicate in predicates:
        needle = predicate.lower().split()
        n = len(needle)
        for i in range(len(words) - n + 1):
            if words[i:i + n] == needle:
                if best is None or len(needle) > len(best.split()):
                    best = predicate.lower()
                break
    return best


class HeuristicOracle:
    """Distance-based span picker over dictionary entities.

    The answer for a passive question is the nearest entity after the
    predicate; for any other question the nearest entity before it; if the
    preferred side is empty, the nearest entity on either side.  The score
    is 1 / (1 + d) with d the index distance between the predicate's and
    the entity's nearest edges, so deleting tokens between them raises the
    score.  Ties go to the leftmost entity.  Without any entity in the
    context, or without the question's predicate, the no-answer sentinel
    (empty text, score -1) is returned.
    """

    def __init__(self, dictionary: EntityDictionary, predicates: Sequence[str]):
        self._dictionary = dictionary
        self._predicates = [p.lower() for p in predicates]

    def answer(self, question: str, context_tokens: Sequence[Token]) -> SpanAnswer:
        spans = entity_spans(context_tokens, self._dictionary)
        if not spans:
            return SpanAnswer.empty()
        predicate = _find_question_predicate(question, self._predicates)
        if predicate is None:
            return SpanAnswer.empty()
        occurrences = phrase_occurrences(context_tokens, predicate)
        if not occurrences:
            return SpanAnswer.empty()
        p_start, p_end = occurrences[0]

        def distance(span: tuple[int, int]) -> int:
            start, end = span
            if start > p_end:
                return start - p_end
            if end < p_start:
                return p_start - end
            return 0  # overlapping spans

        if _question_is_passive(question):
            preferred = [s for s in spans if s[0] > p_end]
        else:
            preferred = [s for s in spans if s[1] < p_start]
        pool = preferred if preferred else spans
        chosen = min(pool, key=lambda s: (distance(s), s[0]))
        d = distance(chosen)
        return SpanAnswer.from_span(context_tokens, chosen[0], chosen[1], 1.0 / (1.0 + d))


class FixtureOracle:
    """Plays back stored answers keyed by (space-joined context, question)."""

    def __init__(self, table: Mapping[tuple[str, str], SpanAnswer]):
        self._table = dict(table)

    def answer(self, question: str, context_tokens: Sequence[Token]) -> SpanAnswer:
        context = " ".join(t.text for t in context_tokens)
        key = (context, question)
        if key not in self._table:
            raise BackendError(f"no fixture answer for question {question!r} on context {context!r}")
        return self._table[key]

    def save(self, path: str | Path) -> None:
        rows = [
            {
                "context": context,
                "question": question,
                "answer": {
                    "text": ans.text,
                    "start_token": ans.start_token,
                    "end_token": ans.end_token,
                    "score": ans.score,
                },
            }
            for (context, question), ans in self._table.items()
        ]
        Path(path).write_text(json.dumps(rows, indent=2), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "FixtureOracle":
        rows = json.loads(Path(path).read_text(encoding="utf-8"))
        table = {}
        for row in rows:
            ans = row["answer"]
            table[(row["context"], row["question"])] = SpanAnswer(
                text=ans["text"],
                start_token=ans["start_token"],
                end_token=ans["end_token"],
                score=ans["score"],
            )
        return cls(table)


class HttpClient:
    """Wire-protocol client with idempotent retries and bounded concurrency."""

    def __init__(
        self,
        endpoint: str,
        timeout: float = 10.0,
        retries: int = 2,
        backoff: float = 0.5,
        concurrency: int = 4,
        session: Optional[requests.Session] = None,
    ):
        self.endpoint = endpoint.rstrip("/")
        self.timeout = timeout
        self.retries = retries
        self.backoff = backoff
        self._gate = threading.BoundedSemaphore(concurrency)
        self._session = session or requests.Session()

    def answer(self, question: str, context_tokens: Sequence[Token]) -> SpanAnswer:
        body = {"question": question, "tokens": [t.text for t in context_tokens]}
        payload = self._post(body)
        return self._decode(payload, context_tokens)

    def _post(self, body: dict) -> object:
        last_error: Optional[Exception] = None
        for attempt in range(self.retries + 1):
            if attempt:
                time.sleep(self.backoff * (2 ** (attempt - 1)))
            try:
                with self._gate:
                    response = self._session.post(
                        f"{self.endpoint}/answer", json=body, timeout=self.timeout
                    )
                if 200 <= response.status_code < 300:
                    return response.json()
                last_error = BackendError(
                    f"backend returned status {response.status_code}", payload=response.text
                )
            except (requests.ConnectionError, requests.Timeout, ValueError) as err:
                last_error = err
        raise BackendError(
            f"transport failure after {self.retries + 1} attempts: {last_error}",
            payload=getattr(last_error, "payload", None),
        )

    @staticmethod
    def _decode(payload: object, context_tokens: Sequence[Token]) -> SpanAnswer:
        if not isinstance(payload, dict):
            raise BackendError("malformed response: expected a JSON object", payload=payload)
        try:
            text = str(payload["text"])
            start = int(payload["start_token"])
            end = int(payload["end_token"])
            score = float(payload["score"])
        except (KeyError, TypeError, ValueError) as err:
            raise BackendError(f"malformed response: {err}", payload=payload) from err
        if text == "" and start == -1 and end == -1:
            return SpanAnswer.empty(score)
        if not (0 <= start <= end < len(context_tokens)):
            raise BackendError(
                f"span [{start}, {end}] out of bounds for context of {len(context_tokens)} tokens",
                payload=payload,
            )
        expected = " ".join(t.text for t in context_tokens[start:end + 1])
        if text != expected:
            raise BackendError(
                f"span text {text!r} does not match context span {expected!r}", payload=payload
            )
        return SpanAnswer(text=text, start_token=start, end_token=end, score=score)
