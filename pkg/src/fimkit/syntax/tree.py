"""Concrete syntax tree types: spans, nodes, trees, source documents.

Spans are byte offsets into the UTF-8 encoding of the document, always on
code-point boundaries. Trees are immutable after construction and safe to
read from any thread.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple


class CharSpan(NamedTuple):
    """Half-open byte range [start, end) on code-point boundaries."""

    start: int
    end: int

    @property
    def length(self) -> int:
        return self.end - self.start

    def contains(self, other: "CharSpan") -> bool:
        return self.start <= other.start and other.end <= self.end


class SyntaxNode:
    """One node of a concrete syntax tree.

    kind      grammar node-type string; for anonymous tokens this is the
              literal token text (keywords, operators, punctuation)
    named     False for keyword/punctuation/operator tokens
    span      byte range covered, a superset of the children's spans
    children  ordered, non-overlapping, in document order
    """

    __slots__ = ("kind", "named", "span", "children")

    def __init__(self, kind: str, named: bool, span: CharSpan,
                 children: list["SyntaxNode"] | None = None):
        self.kind = kind
        self.named = named
        self.span = span
        self.children = children if children is not None else []

    def __repr__(self):
        return f"SyntaxNode({self.kind!r}, [{self.span.start},{self.span.end}))"

    def is_leaf(self) -> bool:
        return not self.children

    def walk(self):
        """Pre-order traversal of this node and all descendants."""
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))

    def pretty(self, content: str | bytes | None = None, indent: int = 0) -> str:
        """Indented dump of the subtree, for debugging and demos."""
        text = ""
        if content is not None and self.is_leaf():
            raw = content.encode() if isinstance(content, str) else content
            snippet = raw[self.span.start:self.span.end].decode("utf-8", "replace")
            if len(snippet) > 40:
                snippet = snippet[:37] + "..."
            text = "  " + repr(snippet)
        mark = "" if self.named else " (anon)"
        lines = [f"{'  ' * indent}{self.kind}{mark} [{self.span.start},{self.span.end}){text}"]
        for child in self.children:
            lines.append(child.pretty(content, indent + 1))
        return "\n".join(lines)


class SyntaxTree:
    """Parse result: a root node plus an error flag.

    has_error is True iff error-recovery nodes (kind "ERROR") exist anywhere
    in the tree. Validity here means "parsed without recovery", not
    compilability.
    """

    __slots__ = ("root", "has_error", "_eligible", "_cum_sizes")

    def __init__(self, root: SyntaxNode, has_error: bool):
        self.root = root
        self.has_error = has_error
        self._eligible: list[SyntaxNode] | None = None
        self._cum_sizes: list[int] | None = None

    def nodes(self):
        return self.root.walk()


class ParseUnsupported(Exception):
    """No grammar is registered for the document's language."""

    def __init__(self, lang: str):
        super().__init__(f"no grammar registered for language {lang!r}")
        self.lang = lang


@dataclass
class SourceDocument:
    """A UTF-8 source file addressed by path, with a resolved language id."""

    path: str
    lang: str
    content: str
    _is_ascii: bool | None = field(default=None, repr=False, compare=False)
    _bytes: bytes | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        # Content must round-trip through UTF-8; surrogates cannot.
        try:
            self._is_ascii = self.content.isascii()
            if not self._is_ascii:
                self._bytes = self.content.encode("utf-8")
        except UnicodeEncodeError as exc:
            raise ValueError(f"{self.path}: content is not valid UTF-8") from exc

    @property
    def cp_len(self) -> int:
        return len(self.content)

    @property
    def byte_len(self) -> int:
        if self._is_ascii:
            return len(self.content)
        return len(self._bytes)

    def cp_to_byte(self, cp_index: int) -> int:
        """Byte offset of the cp_index-th code point (O(cp_index) if non-ASCII)."""
        if self._is_ascii:
            return cp_index
        return len(self.content[:cp_index].encode("utf-8"))

    def slice_bytes(self, span: CharSpan) -> str:
        """Text covered by a byte span (span must be code-point aligned)."""
        if self._is_ascii:
            return self.content[span.start:span.end]
        return self._bytes[span.start:span.end].decode("utf-8")
