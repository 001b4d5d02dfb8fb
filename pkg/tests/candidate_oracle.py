"""Independent brute-force re-derivation of candidate generation.

Used as the test oracle for the search module: it walks the raw tree
structure itself (own leaf counting, own label normalization, own slicing)
and applies the documented filters from first principles, without calling
any code from russ.search.
"""

import random
import re

_DELETABLE = {
    "PP", "ADVP", "ADJP", "SBAR", "S", "VP", "PRT", "INTJ", "CONJP", "UCP",
    "FRAG", "WHADVP", "WHPP", "X",
}
_EXTRACTABLE = {"S", "SBAR"}


def _base(label):
    if label.startswith("-"):
        return label
    return re.split(r"[-=]", label, 1)[0]


def _leaf_texts(node):
    if node.leaf is not None:
        return [node.leaf.text]
    out = []
    for child in node.children:
        out.extend(_leaf_texts(child))
    return out


def brute_force_candidates(tree, t):
    """All (op, position, token texts) tuples, filtered and deduplicated."""
    sentence = _leaf_texts(tree)
    raw = []

    def walk(node, path, offset):
        width = len(_leaf_texts(node))
        label = _base(node.label)
        if path != () and label in _DELETABLE:
            raw.append(("delete", path, tuple(sentence[:offset] + sentence[offset + width:])))
        if label in _EXTRACTABLE:
            raw.append(("extract", path, tuple(sentence[offset:offset + width])))
        child_offset = offset
        for i, child in enumerate(node.children):
            walk(child, path + (i,), child_offset)
            child_offset += len(_leaf_texts(child))

    walk(tree, (), 0)

    out = []
    seen = set()
    for op, path, texts in raw:
        if len(texts) <= t:
            continue
        if texts in seen:
            continue
        seen.add(texts)
        out.append((op, path, texts))
    return out


_LABELS = ["S", "NP", "VP", "PP", "SBAR", "ADVP", "ADJP", "X", "WHNP", "QP", "FOO", "S-ADV", "ADVP-TMP"]
_WORDS = ["a", "b", "c", "d", "e", "f", "g", "h"]


def random_tree_text(rng: random.Random, max_nodes: int = 12) -> str:
    """A random bracketed tree with at most ``max_nodes`` nodes."""

    def build(budget):
        if budget <= 1 or rng.random() < 0.35:
            return f"({rng.choice(_LABELS)} {rng.choice(_WORDS)})", 1
        n_children = rng.randint(1, min(3, budget - 1))
        used = 1
        parts = []
        for i in range(n_children):
            remaining = n_children - i - 1
            available = budget - used - remaining
            sub_budget = rng.randint(1, max(1, available))
            text, nodes = build(sub_budget)
            used += nodes
            parts.append(text)
        return f"({rng.choice(_LABELS)} {' '.join(parts)})", used

    text, nodes = build(max_nodes)
    assert nodes <= max_nodes
    return text
