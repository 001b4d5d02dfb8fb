"""Extractive QA models behind the /answer endpoint.

The default model is a deterministic lexical span scorer: it computes a
start logit and an end logit for every context token from question-overlap
and proximity features and returns the span maximizing their sum, which is
also the reported score.  Its parameters are pinned in model.lock.json so
recorded answers stay stable across releases.

Setting RUSS_QA_MODEL to a local Hugging Face model directory switches to
a transformer checkpoint (requires the optional transformers/torch
install); the wire contract is identical and the score is the raw
start-logit + end-logit of the best non-null span.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass
from typing import Optional, Protocol, Sequence

MODEL_NAME = "overlap-span-scorer"
MODEL_VERSION = "1.0.0"
BUILTIN_SPEC = f"builtin:{MODEL_NAME}"

# scoring parameters; hashed into the lockfile
PARAMS = {
    "content_base": 1.5,
    "stopword_base": -1.0,
    "proximity_weight": 2.0,
    "side_bonus": 0.75,
    "question_word_penalty": -3.0,
    "position_decay": -0.02,
    "max_span_length": 8,
}

STOPWORDS = frozenset(
    """a an the this that these those some any no his her its their our your my
    and or but nor so yet of in on at by to from with for against despite
    during after before under over into onto about around between among
    is are was were be been being has have had do does did will would can
    could shall should may might must not who whom whose which what when
    where why how someone something anyone m s t""".split()
)

TEMPLATE_WORDS = frozenset(["who", "was", "by", "someone"])


@dataclass(frozen=True)
class Span:
    start: int
    end: int
    score: float

    def text(self, tokens: Sequence[str]) -> str:
        return " ".join(tokens[self.start:self.end + 1])


class QaModel(Protocol):
    name: str
    version: str

    def best_span(self, question: str, tokens: Sequence[str]) -> Span: ...


def params_digest() -> str:
    return hashlib.sha256(json.dumps(PARAMS, sort_keys=True).encode()).hexdigest()


def _question_content_words(question: str) -> list[str]:
    words = [w.lower().strip("?.,!") for w in question.split()]
    return [w for w in words if w and w not in TEMPLATE_WORDS and w not in STOPWORDS]


def _is_passive(question: str) -> bool:
    q = question.lower().strip()
    return q.startswith("who was ") and q.endswith(" by someone?")


class OverlapSpanScorer:
    """Deterministic start/end-logit span picker; the pinned default."""

    name = MODEL_NAME
    version = MODEL_VERSION

    def best_span(self, question: str, tokens: Sequence[str]) -> Span:
        if not tokens:
            raise ValueError("empty context")
        lowered = [t.lower() for t in tokens]
        content = _question_content_words(question)
        anchor = 0
        for i, tok in enumerate(lowered):
            if tok in content:
                anchor = i
                break
        passive = _is_passive(question)

        def logit(i: int) -> float:
            tok = lowered[i]
            value = PARAMS["stopword_base"] if tok in STOPWORDS else PARAMS["content_base"]
            value += PARAMS["proximity_weight"] / (1 + abs(i - anchor))
            on_preferred_side = i > anchor if passive else i < anchor
            if on_preferred_side:
                value += PARAMS["side_bonus"]
            if tok in content:
                value += PARAMS["question_word_penalty"]
            value += PARAMS["position_decay"] * i
            return value

        starts = [logit(i) for i in range(len(tokens))]
        ends = list(starts)
        best: Optional[Span] = None
        for x in range(len(tokens)):
            top = min(len(tokens), x + PARAMS["max_span_length"])
            for y in range(x, top):
                score = starts[x] + ends[y]
                if best is None or score > best.score:
                    best = Span(start=x, end=y, score=score)
        assert best is not None
        return best


class TransformersQA:
    """Wraps a local extractive-QA checkpoint; answers over the
    space-joined context and maps the best non-null span back to word
    indices.  Never returns the null answer: the best non-null span wins
    even when its score is negative."""

    def __init__(self, model_dir: str):
        from transformers import AutoModelForQuestionAnswering, AutoTokenizer  # optional dep

        self.name = model_dir
        self.version = "pinned-local"
        self._tokenizer = AutoTokenizer.from_pretrained(model_dir)
        self._model = AutoModelForQuestionAnswering.from_pretrained(model_dir)
        self._model.eval()

    def best_span(self, question: str, tokens: Sequence[str]) -> Span:
        import torch

        context = " ".join(tokens)
        # character offset of each word in the joined context
        word_offsets = []
        cursor = 0
        for tok in tokens:
            word_offsets.append((cursor, cursor + len(tok)))
            cursor += len(tok) + 1

        encoded = self._tokenizer(
            question, context, return_offsets_mapping=True, return_tensors="pt",
            truncation="only_second", max_length=512,
        )
        offsets = encoded.pop("offset_mapping")[0].tolist()
        sequence_ids = encoded.sequence_ids(0)
        with torch.no_grad():
            output = self._model(**encoded)
        start_logits = output.start_logits[0]
        end_logits = output.end_logits[0]

        context_positions = [i for i, sid in enumerate(sequence_ids) if sid == 1]
        best = None
        for i in context_positions:
            for j in context_positions:
                if j < i or j - i > 30:
                    continue
                score = float(start_logits[i] + end_logits[j])
                if best is None or score > best[0]:
                    best = (score, i, j)
        if best is None:
            raise ValueError("model produced no context span")
        score, i, j = best
        char_start, char_end = offsets[i][0], offsets[j][1]
        word_start = next(
            wi for wi, (lo, hi) in enumerate(word_offsets) if lo <= char_start < hi
        )
        word_end = next(
            wi for wi in range(len(word_offsets) - 1, -1, -1)
            if word_offsets[wi][0] < char_end <= word_offsets[wi][1]
        )
        if word_end < word_start:
            word_end = word_start
        return Span(start=word_start, end=word_end, score=score)


def load_model(spec: Optional[str] = None) -> QaModel:
    spec = spec or os.environ.get("RUSS_QA_MODEL", BUILTIN_SPEC)
    if spec == BUILTIN_SPEC:
        return OverlapSpanScorer()
    return TransformersQA(spec)
