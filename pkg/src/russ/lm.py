"""Interpolated n-gram language model over words and POS tags, with SLOR.

The model keeps two parallel n-gram channels: one over lowercased word
forms (rare training words collapse to an unknown symbol) and one over POS
tags.  Sentence log-probability mixes the two channels log-linearly with
weight ``pos_mix`` on the tag channel, so structurally scrambled candidates
lose probability even when their words are common.

SLOR divides out the unigram likelihood and the length:

    slor(s) = (log P_model(s) - sum_w log P_unigram(w)) / |s|

which keeps the fluency score from punishing rare words.  With order 1 and
pos_mix 0 the model chain *is* the unigram product and slor is exactly 0;
boundary padding applies only at order >= 2 (an order-1 chain has no
context for boundary markers to inform).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .treebank import Token

START = "<s>"
END = "</s>"
UNK = "<unk>"
NO_TAG = "<none>"

FORMAT_NAME = "russ-ngram"
FORMAT_VERSION = 1

# highest order first; orders beyond 3 fall back to a normalized geometric decay
_DEFAULT_WEIGHTS = {1: [1.0], 2: [0.7, 0.3], 3: [0.6, 0.3, 0.1]}


def default_weights(order: int) -> list[float]:
    if order in _DEFAULT_WEIGHTS:
        return list(_DEFAULT_WEIGHTS[order])
    raw = [2.0 ** (order - 1 - i) for i in range(order)]
    total = sum(raw)
    return [w / total for w in raw]


@dataclass(frozen=True)
class SlorScore:
    value: float


class _Channel:
    """One n-gram channel: count tables for orders 1..order over symbols."""

    def __init__(self, order: int, rare_to_unk: bool):
        self.order = order
        self.rare_to_unk = rare_to_unk
        self.counts: list[dict[tuple[str, ...], int]] = [dict() for _ in range(order + 1)]
        self.ctx_counts: list[dict[tuple[str, ...], int]] = [dict() for _ in range(order + 1)]
        self.known: set[str] = set()
        self.total = 0

    def fit(self, sentences: Sequence[Sequence[str]]) -> None:
        if self.rare_to_unk:
            raw: dict[str, int] = {}
            for sent in sentences:
                for sym in sent:
                    raw[sym] = raw.get(sym, 0) + 1
            self.known = {sym for sym, count in raw.items() if count > 1}
            sentences = [[s if s in self.known else UNK for s in sent] for sent in sentences]
        else:
            self.known = {sym for sent in sentences for sym in sent}
            sentences = [list(sent) for sent in sentences]

        pad = self.order - 1
        for sent in sentences:
            if self.order == 1:
                padded = list(sent)
                targets = range(len(sent))
            else:
                padded = [START] * pad + list(sent) + [END]
                targets = range(pad, len(padded))
            for i in targets:
                for k in range(1, self.order + 1):
                    gram = tuple(padded[i - k + 1:i + 1])
                    ctx = gram[:-1]
                    self.counts[k][gram] = self.counts[k].get(gram, 0) + 1
                    self.ctx_counts[k][ctx] = self.ctx_counts[k].get(ctx, 0) + 1
        self.total = sum(self.counts[1].values())

    @property
    def support_size(self) -> int:
        support = set(k[0] for k in self.counts[1])
        support.add(UNK)
        return len(support)

    def map_symbol(self, sym: str) -> str:
        return sym if sym in self.known else UNK

    def unigram_prob(self, sym: str) -> float:
        count = self.counts[1].get((self.map_symbol(sym),), 0)
        return (count + 1) / (self.total + self.support_size)

    def _order_prob(self, k: int, gram: tuple[str, ...]) -> float:
        if k == 1:
            count = self.counts[1].get(gram, 0)
            return (count + 1) / (self.total + self.support_size)
        denom = self.ctx_counts[k].get(gram[:-1], 0)
        if denom == 0:
            return 0.0
        return self.counts[k].get(gram, 0) / denom

    def prob(self, target: str, context: tuple[str, ...], weights: Sequence[float]) -> float:
        """Interpolated P(target | context); context has order-1 symbols."""
        p = 0.0
        for k in range(1, self.order + 1):
            gram = context[len(context) - (k - 1):] + (target,)
            p += weights[self.order - k] * self._order_prob(k, gram)
        return p

    def chain_logprob(self, syms: Sequence[str], weights: Sequence[float]) -> float:
        mapped = [self.map_symbol(s) for s in syms]
        pad = self.order - 1
        if self.order == 1:
            padded = mapped
            targets = range(len(mapped))
        else:
            padded = [START] * pad + mapped + [END]
            targets = range(pad, len(padded))
        total = 0.0
        for i in targets:
            context = tuple(padded[i - pad:i]) if pad else ()
            total += math.log(self.prob(padded[i], context, weights))
        return total

    def to_json(self) -> dict:
        return {
            "order": self.order,
            "rare_to_unk": self.rare_to_unk,
            "known": sorted(self.known),
            "total": self.total,
            "counts": [{" ".join(g): c for g, c in table.items()} for table in self.counts],
            "ctx_counts": [{" ".join(g): c for g, c in table.items()} for table in self.ctx_counts],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "_Channel":
        channel = cls(order=obj["order"], rare_to_unk=obj["rare_to_unk"])
        channel.known = set(obj["known"])
        channel.total = obj["total"]
        channel.counts = [
            {tuple(g.split(" ")) if g else (): c for g, c in table.items()}
            for table in obj["counts"]
        ]
        channel.ctx_counts = [
            {tuple(g.split(" ")) if g else (): c for g, c in table.items()}
            for table in obj["ctx_counts"]
        ]
        return channel


class NgramModel:
    """Trained model; immutable after training and safe for concurrent scoring."""

    def __init__(
        self,
        order: int,
        words: _Channel,
        tags: _Channel,
        interpolation_weights: Sequence[float],
        pos_mix: float,
    ):
        self.order = order
        self._words = words
        self._tags = tags
        self.interpolation_weights = list(interpolation_weights)
        self.pos_mix = pos_mix

    @property
    def vocabulary(self) -> set[str]:
        return set(self._words.known)

    def save(self, path: str | Path) -> None:
        payload = {
            "format": FORMAT_NAME,
            "version": FORMAT_VERSION,
            "order": self.order,
            "interpolation_weights": self.interpolation_weights,
            "pos_mix": self.pos_mix,
            "words": self._words.to_json(),
            "tags": self._tags.to_json(),
        }
        Path(path).write_text(json.dumps(payload), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "NgramModel":
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
        if payload.get("format") != FORMAT_NAME:
            raise ValueError(f"{path}: not a {FORMAT_NAME} model file")
        if payload.get("version") != FORMAT_VERSION:
            raise ValueError(f"{path}: unsupported model version {payload.get('version')}")
        return cls(
            order=payload["order"],
            words=_Channel.from_json(payload["words"]),
            tags=_Channel.from_json(payload["tags"]),
            interpolation_weights=payload["interpolation_weights"],
            pos_mix=payload["pos_mix"],
        )


def _word_of(token: Token) -> str:
    return token.text.lower()


def _tag_of(token: Token) -> str:
    tag = token.pos.strip()
    return tag if tag else NO_TAG


def train(
    corpus: Iterable[Sequence[Token]],
    order: int = 3,
    interpolation_weights: Optional[Sequence[float]] = None,
    pos_mix: float = 0.3,
) -> NgramModel:
    """Collect count tables from token sequences (words lowercased,
    training words seen once collapse to the unknown symbol)."""
    sentences = [list(sent) for sent in corpus]
    if not sentences:
        raise ValueError("training corpus is empty")
    if order < 1:
        raise ValueError(f"order must be >= 1: {order}")
    if not 0.0 <= pos_mix <= 1.0:
        raise ValueError(f"pos_mix must be in [0, 1]: {pos_mix}")
    weights = list(interpolation_weights) if interpolation_weights is not None else default_weights(order)
    if len(weights) != order or any(w <= 0 for w in weights) or abs(sum(weights) - 1.0) > 1e-9:
        raise ValueError(f"need {order} positive interpolation weights summing to 1: {weights}")

    words = _Channel(order=order, rare_to_unk=True)
    words.fit([[_word_of(t) for t in sent] for sent in sentences])
    tags = _Channel(order=order, rare_to_unk=False)
    tags.fit([[_tag_of(t) for t in sent] for sent in sentences])
    return NgramModel(order=order, words=words, tags=tags, interpolation_weights=weights, pos_mix=pos_mix)


def sentence_logprob(model: NgramModel, tokens: Sequence[Token]) -> float:
    """log P(s): pos_mix * tag-channel chain + (1 - pos_mix) * word-channel chain."""
    if not tokens:
        raise ValueError("cannot score an empty sentence")
    weights = model.interpolation_weights
    word_term = model._words.chain_logprob([_word_of(t) for t in tokens], weights)
    if model.pos_mix == 0.0:
        return word_term
    tag_term = model._tags.chain_logprob([_tag_of(t) for t in tokens], weights)
    return model.pos_mix * tag_term + (1.0 - model.pos_mix) * word_term


def unigram_logprob(model: NgramModel, tokens: Sequence[Token]) -> float:
    """Sum of word-channel unigram log-probabilities over the sentence words."""
    if not tokens:
        raise ValueError("cannot score an empty sentence")
    return sum(math.log(model._words.unigram_prob(_word_of(t))) for t in tokens)


def slor(model: NgramModel, tokens: Sequence[Token]) -> SlorScore:
    """Length-normalized log-odds of the model chain against the unigram product."""
    if not tokens:
        raise ValueError("cannot score an empty sentence")
    value = (sentence_logprob(model, tokens) - unigram_logprob(model, tokens)) / len(tokens)
    return SlorScore(value=value)
