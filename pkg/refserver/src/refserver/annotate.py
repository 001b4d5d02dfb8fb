"""Sentence annotation: tokenizer, POS/dep taggers, constituency chunker.

Rule-based and fully deterministic.  The chunker builds flat but
well-formed bracketed trees: noun-phrase runs become NP, a preposition
plus NP becomes PP, a relative pronoun opens an SBAR over the following
verb group and its complements, and the first remaining verb group heads
the VP that spans to the end of the sentence.  Leaves always equal the
token sequence in order, so emitted parses re-parse cleanly against the
record schema.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from typing import Optional, Sequence

log = logging.getLogger(__name__)

_TOKEN_RE = re.compile(r"[A-Za-z0-9]+(?:['\-][A-Za-z0-9]+)*|[^\sA-Za-z0-9]")

_LEXICON = {
    "the": "DT", "a": "DT", "an": "DT", "this": "DT", "that": "DT",
    "these": "DT", "those": "DT", "some": "DT", "any": "DT", "no": "DT",
    "and": "CC", "or": "CC", "but": "CC", "nor": "CC",
    "in": "IN", "on": "IN", "at": "IN", "by": "IN", "of": "IN",
    "from": "IN", "with": "IN", "for": "IN", "against": "IN",
    "despite": "IN", "during": "IN", "after": "IN", "before": "IN",
    "under": "IN", "over": "IN", "near": "IN", "into": "IN", "about": "IN",
    "between": "IN", "among": "IN", "since": "IN", "until": "IN",
    "to": "TO",
    "he": "PRP", "she": "PRP", "it": "PRP", "they": "PRP", "we": "PRP",
    "i": "PRP", "you": "PRP", "him": "PRP", "her": "PRP", "them": "PRP",
    "his": "PRP$", "their": "PRP$", "its": "PRP$", "our": "PRP$", "your": "PRP$", "my": "PRP$",
    "who": "WP", "whom": "WP", "whose": "WP$", "which": "WDT", "what": "WP",
    "is": "VBZ", "are": "VBP", "was": "VBD", "were": "VBD", "be": "VB",
    "been": "VBN", "being": "VBG", "am": "VBP",
    "has": "VBZ", "have": "VBP", "had": "VBD",
    "do": "VBP", "does": "VBZ", "did": "VBD", "done": "VBN",
    "will": "MD", "would": "MD", "can": "MD", "could": "MD",
    "shall": "MD", "should": "MD", "may": "MD", "might": "MD", "must": "MD",
    "not": "RB", "very": "RB", "also": "RB", "never": "RB", "still": "RB",
    "said": "VBD", "met": "VBD", "sued": "VBD", "made": "VBD", "took": "VBD",
    "gave": "VBD", "held": "VBD", "left": "VBD", "won": "VBD", "lost": "VBD",
    "sold": "VBD", "told": "VBD", "began": "VBD", "kept": "VBD", "sent": "VBD",
}

_PUNCT_TAGS = {".": ".", ",": ",", ";": ":", ":": ":", "?": ".", "!": ".",
               "(": "-LRB-", ")": "-RRB-", '"': "''", "'": "''", "`": "``"}

_NP_TAGS = {"DT", "PRP$", "JJ", "JJR", "JJS", "CD", "NN", "NNS", "NNP", "NNPS", "POS"}
_VERB_TAGS = {"VB", "VBD", "VBG", "VBN", "VBP", "VBZ", "MD"}


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text)


def tag_pos(tokens: Sequence[str]) -> list[str]:
    tags = []
    for i, tok in enumerate(tokens):
        low = tok.lower()
        if tok in _PUNCT_TAGS:
            tags.append(_PUNCT_TAGS[tok])
        elif low in _LEXICON:
            tags.append(_LEXICON[low])
        elif tok[0].isdigit():
            tags.append("CD")
        elif low.endswith("ing") and len(low) > 4:
            tags.append("VBG")
        elif low.endswith("ed") and len(low) > 3:
            tags.append("VBD")
        elif low.endswith("ly") and len(low) > 3:
            tags.append("RB")
        elif tok[0].isupper() and i > 0:
            tags.append("NNP")
        elif low.endswith("s") and not low.endswith("ss") and len(low) > 3:
            tags.append("NNS")
        else:
            tags.append("NN")
    return tags


def tag_deps(tokens: Sequence[str], tags: Sequence[str]) -> list[str]:
    """Coarse dependency relations; enough to populate the record schema."""
    deps = ["" for _ in tokens]
    first_verb = next((i for i, t in enumerate(tags) if t in _VERB_TAGS), None)
    seen_root = False
    for i, tag in enumerate(tags):
        if tag in _VERB_TAGS:
            if not seen_root:
                deps[i] = "root"
                seen_root = True
            else:
                deps[i] = "dep"
        elif tag == "DT":
            deps[i] = "det"
        elif tag in ("JJ", "JJR", "JJS"):
            deps[i] = "amod"
        elif tag in ("IN", "TO"):
            deps[i] = "case"
        elif tag == "RB":
            deps[i] = "advmod"
        elif tag.startswith("NN") or tag == "PRP":
            if first_verb is None:
                deps[i] = "nsubj" if i == 0 else "dep"
            else:
                deps[i] = "nsubj" if i < first_verb else "obj"
        elif tag == "CC":
            deps[i] = "cc"
    return deps


@dataclass
class _Node:
    label: str
    children: list = field(default_factory=list)  # _Node or (tag, token) leaves

    def to_bracketed(self) -> str:
        parts = []
        for child in self.children:
            if isinstance(child, _Node):
                parts.append(child.to_bracketed())
            else:
                tag, token = child
                parts.append(f"({tag} {token})")
        return f"({self.label} {' '.join(parts)})"


def _chunk(tokens: Sequence[str], tags: Sequence[str]) -> list[_Node]:
    """First pass: NP runs, PP = IN/TO + NP, single-leaf chunks otherwise."""
    chunks: list[_Node] = []
    i = 0
    n = len(tokens)
    while i < n:
        tag = tags[i]
        if tag in _NP_TAGS:
            j = i
            while j < n and tags[j] in _NP_TAGS:
                j += 1
            node = _Node("NP", [(tags[k], tokens[k]) for k in range(i, j)])
            chunks.append(node)
            i = j
        elif tag == "PRP":
            chunks.append(_Node("NP", [(tag, tokens[i])]))
            i += 1
        elif tag in ("IN", "TO") and i + 1 < n and tags[i + 1] in _NP_TAGS | {"PRP"}:
            j = i + 1
            while j < n and tags[j] in _NP_TAGS:
                j += 1
            if j == i + 1:  # lone PRP object
                j += 1
            np = _Node("NP", [(tags[k], tokens[k]) for k in range(i + 1, j)])
            chunks.append(_Node("PP", [(tags[i], tokens[i]), np]))
            i = j
        elif tag == "RB":
            chunks.append(_Node("ADVP", [(tag, tokens[i])]))
            i += 1
        else:
            chunks.append(_Node("LEAF", [(tag, tokens[i])]))
            i += 1
    return chunks


def _first_leaf_tag(chunk: _Node) -> str:
    child = chunk.children[0]
    if isinstance(child, _Node):
        return _first_leaf_tag(child)
    return child[0]


def _is_verb_chunk(chunk: _Node) -> bool:
    return chunk.label == "LEAF" and _first_leaf_tag(chunk) in _VERB_TAGS


def _attach_sbars(chunks: list[_Node]) -> list[_Node]:
    """WP/WDT opens an SBAR over the next verb group and its complements,
    closing before the following verb group; the SBAR attaches to a
    directly preceding NP."""
    out: list[_Node] = []
    i = 0
    while i < len(chunks):
        chunk = chunks[i]
        is_rel = chunk.label == "LEAF" and _first_leaf_tag(chunk) in ("WP", "WDT", "WP$")
        if is_rel:
            j = i + 1
            verbs: list[_Node] = []
            while j < len(chunks) and _is_verb_chunk(chunks[j]):
                verbs.append(chunks[j])
                j += 1
            if verbs:
                complements = []
                while j < len(chunks) and not _is_verb_chunk(chunks[j]):
                    nxt = chunks[j]
                    has_more_verbs = any(_is_verb_chunk(c) for c in chunks[j:])
                    if not has_more_verbs:
                        break  # leave the main clause material outside
                    complements.append(nxt)
                    j += 1
                vp = _Node("VP", [leaf for v in verbs for leaf in v.children] + complements)
                sbar = _Node("SBAR", [_Node("WHNP", chunk.children), _Node("S", [vp])])
                if out and out[-1].label == "NP":
                    out[-1] = _Node("NP", [out[-1], sbar])
                else:
                    out.append(sbar)
                i = j
                continue
        out.append(chunk)
        i += 1
    return out


def _assemble(chunks: list[_Node]) -> _Node:
    first_verb = next((i for i, c in enumerate(chunks) if _is_verb_chunk(c)), None)
    if first_verb is None:
        return _Node("FRAG", _flatten_leaves(chunks))
    verbs = []
    j = first_verb
    while j < len(chunks) and _is_verb_chunk(chunks[j]):
        verbs.append(chunks[j])
        j += 1
    vp_children = [leaf for v in verbs for leaf in v.children] + _flatten_leaves(chunks[j:])
    vp = _Node("VP", vp_children)
    return _Node("S", _flatten_leaves(chunks[:first_verb]) + [vp])


def _flatten_leaves(chunks: list[_Node]) -> list:
    out = []
    for chunk in chunks:
        if chunk.label == "LEAF":
            out.extend(chunk.children)
        else:
            out.append(chunk)
    return out


def parse_sentence(tokens: Sequence[str], tags: Sequence[str]) -> str:
    """Bracketed constituency parse whose leaves equal ``tokens`` in order."""
    if not tokens:
        raise ValueError("cannot parse an empty sentence")
    chunks = _chunk(tokens, tags)
    chunks = _attach_sbars(chunks)
    return _assemble(chunks).to_bracketed()


@dataclass(frozen=True)
class AnnotationRequest:
    sentence: str
    event_type: str
    matched_predicate: str
    gold_answers: dict[str, str]
    id: Optional[str] = None


def _contains_subsequence(tokens: Sequence[str], phrase: str) -> bool:
    needle = [w.lower() for w in phrase.split()]
    lowered = [t.lower() for t in tokens]
    if not needle:
        return False
    return any(
        lowered[i:i + len(needle)] == needle for i in range(len(lowered) - len(needle) + 1)
    )


def annotate(request: AnnotationRequest, index: int = 0) -> Optional[dict]:
    """One schema-conformant record, or None (with a logged diagnostic)."""
    tokens = tokenize(request.sentence)
    if not tokens:
        log.warning("request %d: empty sentence after tokenization", index)
        return None
    if not request.matched_predicate or not _contains_subsequence(tokens, request.matched_predicate):
        log.warning("request %d: predicate %r not found in sentence", index, request.matched_predicate)
        return None
    gold = {k: v for k, v in request.gold_answers.items() if k in ("Actor", "Target") and v}
    if not gold:
        log.warning("request %d: no usable gold answers", index)
        return None
    tags = tag_pos(tokens)
    deps = tag_deps(tokens, tags)
    try:
        parse = parse_sentence(tokens, tags)
    except ValueError as err:
        log.warning("request %d: parser failure: %s", index, err)
        return None
    return {
        "id": request.id or f"annotated-{index:04d}",
        "tokens": [
            {"text": tok, "pos": tag, "dep": dep}
            for tok, tag, dep in zip(tokens, tags, deps)
        ],
        "raw_text": " ".join(tokens),
        "parse": parse,
        "event_type": request.event_type,
        "matched_predicate": request.matched_predicate,
        "gold_answers": gold,
    }


def export_annotations(requests: Sequence[AnnotationRequest]) -> list[dict]:
    """Order-preserving; invalid sentences are skipped, never emitted."""
    records = []
    for index, request in enumerate(requests):
        record = annotate(request, index)
        if record is not None:
            records.append(record)
    return records
