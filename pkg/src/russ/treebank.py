"""Bracketed (Penn-Treebank-style) constituency trees aligned to a token sequence.

A tree is either an internal node with a label and ordered children, or a
preterminal holding exactly one leaf token.  Nodes are addressed by a
``Position``: the tuple of child indices walked from the root (the root is
the empty tuple).  Trees are immutable after construction and safe to share
across threads.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence

Position = tuple[int, ...]

_WS_RE = re.compile(r"\s+")


class ParseError(ValueError):
    """Malformed bracket expression; ``offset`` is the character position."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


@dataclass(frozen=True)
class Token:
    """One sentence token with its optional part-of-speech and dependency tags."""

    text: str
    pos: str = ""
    dep: str = ""
    index: int = 0

    def __post_init__(self) -> None:
        if not self.text or _WS_RE.search(self.text):
            raise ValueError(f"token text must be non-empty and whitespace-free: {self.text!r}")
        if self.index < 0:
            raise ValueError(f"token index must be non-negative: {self.index}")


@dataclass(frozen=True)
class ParseTree:
    """Labeled ordered tree; exactly one of ``children`` / ``leaf`` is set."""

    label: str
    children: tuple["ParseTree", ...] = ()
    leaf: Optional[Token] = None

    def __post_init__(self) -> None:
        if not self.label:
            raise ValueError("tree node label must be non-empty")
        if bool(self.children) == (self.leaf is not None):
            raise ValueError("a node holds either children or a leaf token, not both")

    @property
    def is_leaf(self) -> bool:
        return self.leaf is not None


def make_tokens(texts: Sequence[str], tags: Optional[Sequence[str]] = None) -> list[Token]:
    """Build an indexed token list from plain strings (tags optional)."""
    if tags is not None and len(tags) != len(texts):
        raise ValueError("texts and tags must have equal length")
    return [
        Token(text=t, pos=(tags[i] if tags is not None else ""), index=i)
        for i, t in enumerate(texts)
    ]


class _Reader:
    """Single-pass recursive-descent reader over one bracket expression."""

    def __init__(self, text: str):
        self.text = text
        self.i = 0
        self.next_index = 0

    def skip_ws(self) -> None:
        while self.i < len(self.text) and self.text[self.i].isspace():
            self.i += 1

    def read_atom(self) -> str:
        start = self.i
        while self.i < len(self.text) and self.text[self.i] not in "()" and not self.text[self.i].isspace():
            self.i += 1
        return self.text[start:self.i]

    def read_node(self) -> ParseTree:
        if self.i >= len(self.text) or self.text[self.i] != "(":
            raise ParseError("expected '('", self.i)
        self.i += 1
        self.skip_ws()
        label_at = self.i
        label = self.read_atom()
        if not label:
            raise ParseError("empty node label", label_at)
        self.skip_ws()
        if self.i >= len(self.text):
            raise ParseError("unbalanced parenthesis: unclosed node", self.i)
        if self.text[self.i] == "(":
            children = []
            while self.i < len(self.text) and self.text[self.i] == "(":
                children.append(self.read_node())
                self.skip_ws()
            if self.i >= len(self.text) or self.text[self.i] != ")":
                raise ParseError("unbalanced parenthesis: expected ')'", self.i)
            self.i += 1
            return ParseTree(label=label, children=tuple(children))
        if self.text[self.i] == ")":
            raise ParseError("node has neither children nor a word", self.i)
        word_at = self.i
        word = self.read_atom()
        self.skip_ws()
        if self.i >= len(self.text) or self.text[self.i] != ")":
            where = self.i if self.i < len(self.text) else len(self.text)
            raise ParseError("expected ')' after leaf word", where)
        self.i += 1
        token = Token(text=word, pos=label, index=self.next_index)
        self.next_index += 1
        if _WS_RE.search(word):
            raise ParseError("leaf word contains whitespace", word_at)
        return ParseTree(label=label, leaf=token)


def parse_bracketed(text: str) -> ParseTree:
    """Parse a single-rooted bracket expression into a ParseTree.

    Leaves are indexed 0..n-1 left to right and carry the preterminal label
    as their POS tag.  Raises ParseError (with a character offset) on
    malformed brackets, empty labels, empty input, or trailing content.
    """
    reader = _Reader(text)
    reader.skip_ws()
    if reader.i >= len(text):
        raise ParseError("empty input: no tree found", reader.i)
    tree = reader.read_node()
    reader.skip_ws()
    if reader.i < len(text):
        raise ParseError("trailing content after root node (multiple roots?)", reader.i)
    return tree


def render(tree: ParseTree) -> str:
    """Render a tree back to bracket form; inverse of parse_bracketed."""
    if tree.is_leaf:
        assert tree.leaf is not None
        return f"({tree.label} {tree.leaf.text})"
    inner = " ".join(render(child) for child in tree.children)
    return f"({tree.label} {inner})"


def positions(tree: ParseTree) -> list[Position]:
    """All node positions in preorder: root first, children left to right."""
    out: list[Position] = []

    def walk(node: ParseTree, path: Position) -> None:
        out.append(path)
        for i, child in enumerate(node.children):
            walk(child, path + (i,))

    walk(tree, ())
    return out


def node_at(tree: ParseTree, pos: Position) -> ParseTree:
    """Resolve a position; raises ValueError when the path leaves the tree."""
    node = tree
    for depth, idx in enumerate(pos):
        if idx < 0 or idx >= len(node.children):
            raise ValueError(f"position {pos!r} does not resolve: step {depth} out of range")
        node = node.children[idx]
    return node


def leaves_under(tree: ParseTree, pos: Position) -> list[Token]:
    """The contiguous token span dominated by the node at ``pos``, in order."""
    return list(_iter_leaves(node_at(tree, pos)))


def sentence_tokens(tree: ParseTree) -> list[Token]:
    """All leaf tokens of the tree in sentence order."""
    return leaves_under(tree, ())


def _iter_leaves(node: ParseTree) -> Iterator[Token]:
    if node.is_leaf:
        assert node.leaf is not None
        yield node.leaf
    else:
        for child in node.children:
            yield from _iter_leaves(child)
