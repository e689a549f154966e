import pytest

from fimkit import SourceDocument, parse


@pytest.fixture(scope="session")
def two_stmt_doc():
    doc = SourceDocument("fixture.py", "python", "x = 1\ny = f(2)\n")
    return doc, parse(doc)


def assert_tree_invariants(tree):
    """Structural invariants every parse must satisfy."""
    for node in tree.nodes():
        assert node.span.start <= node.span.end
        prev_end = node.span.start
        for child in node.children:
            assert child.span.start >= prev_end, \
                f"{node.kind}: child {child.kind} overlaps/out of order"
            assert child.span.end <= node.span.end, \
                f"{node.kind}: child {child.kind} escapes parent span"
            prev_end = child.span.end


def window_exists(tree, span) -> bool:
    """True iff span equals the hull of a contiguous sibling window.

    Only nodes whose span contains the target can host such a window, and
    those nodes form the containment chain from the root.
    """
    node = tree.root
    while True:
        starts = [c.span.start for c in node.children]
        ends = [c.span.end for c in node.children]
        if span.start in starts and span.end in ends:
            i = starts.index(span.start)
            j = ends.index(span.end)
            if i <= j:
                return True
        descend = None
        for child in node.children:
            if child.span.start <= span.start and span.end <= child.span.end:
                descend = child
                break
        if descend is None:
            return False
        node = descend
