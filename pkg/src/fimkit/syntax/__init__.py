"""Multi-language parsing into span-indexed concrete syntax trees.

parse() turns a SourceDocument into a SyntaxTree whose root covers the whole
document in byte offsets. The tree queries here (eligible_nodes,
lowest_subtree_containing) are what the masking strategies build on.
"""

from __future__ import annotations

from .grammar import (EXTENSION_TABLE, NATURAL_LANGUAGE_IDS, Grammar,
                      get_grammar, is_supported, language_for_path,
                      register_grammar, supported_languages)
from .parser import build_tree
from .tree import (CharSpan, ParseUnsupported, SourceDocument, SyntaxNode,
                   SyntaxTree)

__all__ = [
    "CharSpan", "Grammar", "ParseUnsupported", "SourceDocument",
    "SyntaxNode", "SyntaxTree", "EXTENSION_TABLE", "NATURAL_LANGUAGE_IDS",
    "eligible_nodes", "get_grammar", "is_parse_valid", "is_supported",
    "language_for_path", "lowest_subtree_containing", "parse",
    "register_grammar", "supported_languages",
]


def parse(doc: SourceDocument) -> SyntaxTree:
    """Parse a document with its registered grammar.

    Raises ParseUnsupported when no grammar exists for doc.lang; callers in
    the masking pipeline fall back to random-character masking.
    """
    grammar = get_grammar(doc.lang)
    if grammar is None:
        raise ParseUnsupported(doc.lang)
    return build_tree(doc, grammar)


def is_parse_valid(tree: SyntaxTree) -> bool:
    """True iff parsing needed no error recovery (not compilability)."""
    return not tree.has_error


def eligible_nodes(tree: SyntaxTree) -> list[SyntaxNode]:
    """Named, non-empty nodes in pre-order, excluding the root.

    Keyword and punctuation tokens are anonymous and therefore excluded;
    masking the whole file is excluded by dropping the root.
    """
    if tree._eligible is not None:
        return tree._eligible
    out = []
    stack = list(reversed(tree.root.children))
    while stack:
        node = stack.pop()
        if node.named and node.span.end > node.span.start:
            out.append(node)
        stack.extend(reversed(node.children))
    tree._eligible = out
    return out


def lowest_subtree_containing(tree: SyntaxTree, span: CharSpan) -> SyntaxNode:
    """Deepest node whose span is a superset of the query span.

    The root always qualifies, so a result always exists. For zero-length
    query spans on a shared boundary, the first containing child in
    document order wins.
    """
    node = tree.root
    while True:
        for child in node.children:
            if child.span.start <= span.start and span.end <= child.span.end:
                node = child
                break
        else:
            return node
