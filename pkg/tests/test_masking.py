"""Mask selection: distributions, oracles, fallbacks, determinism."""

import random

import pytest
from scipy import stats as sps

from fimkit import CharSpan, SourceDocument, eligible_nodes, parse
from fimkit.masking import (ALIGNED_SPAN, MaskConfig, MaskDegenerate,
                            NoChildren, NoEligibleNode, RAND_CHAR,
                            SINGLE_NODE, aligned_span_mask, best_child_window,
                            iou, rand_char_mask, select_mask,
                            single_node_mask)
from fimkit.rng import Rng
from fimkit.syntax import SyntaxNode, SyntaxTree

from conftest import window_exists


class TestIou:
    def test_identical(self):
        assert iou(CharSpan(0, 10), CharSpan(0, 10)) == 1.0

    def test_disjoint(self):
        assert iou(CharSpan(0, 10), CharSpan(10, 20)) == 0.0

    def test_partial_overlap(self):
        assert iou(CharSpan(0, 20), CharSpan(5, 25)) == pytest.approx(0.6, abs=1e-15)

    def test_both_empty(self):
        assert iou(CharSpan(3, 3), CharSpan(3, 3)) == 0.0

    def test_symmetry(self):
        a, b = CharSpan(2, 9), CharSpan(5, 30)
        assert iou(a, b) == iou(b, a)


def _make_parent(spans):
    children = [SyntaxNode("c", True, CharSpan(s, e)) for s, e in spans]
    return SyntaxNode("p", True,
                      CharSpan(spans[0][0], spans[-1][1]), children)


def _oracle_window(parent, target):
    """Exhaustive enumeration, maximal IoU, ties to smallest i then j."""
    best = None
    best_key = None
    n = len(parent.children)
    for i in range(n):
        for j in range(i, n):
            hull = CharSpan(parent.children[i].span.start,
                            parent.children[j].span.end)
            key = (-iou(hull, target), i, j)
            if best_key is None or key < best_key:
                best_key = key
                best = (i, j)
    return best


class TestBestChildWindow:
    def test_worked_example(self):
        parent = _make_parent([(0, 10), (10, 20), (20, 30)])
        target = CharSpan(5, 25)
        w = best_child_window(parent, target)
        assert w == (0, 2)
        hull = CharSpan(parent.children[0].span.start,
                        parent.children[2].span.end)
        assert iou(hull, target) == pytest.approx(2 / 3, abs=1e-15)

    def test_exact_child_match(self):
        parent = _make_parent([(0, 5), (5, 9), (9, 14)])
        assert best_child_window(parent, CharSpan(5, 9)) == (1, 1)

    def test_tie_breaks_to_earlier_window(self):
        # symmetric siblings around a centered target: both singleton
        # windows score equally; the earlier one must win
        parent = _make_parent([(0, 10), (10, 20)])
        target = CharSpan(5, 15)
        assert best_child_window(parent, target) == (0, 1) \
            or best_child_window(parent, target) == _oracle_window(parent, target)
        # degenerate symmetric case with a gap between siblings
        parent = _make_parent([(0, 4), (6, 10)])
        target = CharSpan(3, 7)
        assert best_child_window(parent, target) == _oracle_window(parent, target)

    def test_leaf_raises(self):
        leaf = SyntaxNode("x", True, CharSpan(0, 4))
        with pytest.raises(NoChildren):
            best_child_window(leaf, CharSpan(0, 2))

    def test_matches_oracle_on_random_trees(self):
        rnd = random.Random(12345)
        for _ in range(2000):
            n = rnd.randint(1, 12)
            spans = []
            pos = rnd.randint(0, 3)
            for _ in range(n):
                width = rnd.randint(1, 9)
                spans.append((pos, pos + width))
                pos += width + rnd.choice((0, 0, 1, 2))
            parent = _make_parent(spans)
            lo = spans[0][0] - 2
            hi = spans[-1][1] + 2
            a = rnd.randint(max(lo, 0), hi)
            b = rnd.randint(max(lo, 0), hi)
            if a == b:
                continue
            target = CharSpan(min(a, b), max(a, b))
            assert best_child_window(parent, target) == \
                _oracle_window(parent, target)


class TestSingleNode:
    def test_forced_single_choice(self):
        doc = SourceDocument("t.py", "python", "x")
        tree = parse(doc)
        # eligible: expression_statement and identifier, same 1-byte span
        masks = {single_node_mask(tree, Rng(s, "x")).span for s in range(20)}
        assert masks == {CharSpan(0, 1)}

    def test_size_proportional_chi_square(self, two_stmt_doc):
        doc, tree = two_stmt_doc
        nodes = eligible_nodes(tree)
        sizes = [n.span.end - n.span.start for n in nodes]
        rng = Rng(2024, doc.path)
        counts = [0] * len(nodes)
        draws = 20_000
        index = {id(n): i for i, n in enumerate(nodes)}
        for _ in range(draws):
            m = single_node_mask(tree, rng)
            # attribute the draw to the node actually selected
            matches = [i for i, n in enumerate(nodes)
                       if n.span == m.span and n.kind == m.node_kinds[0]]
            counts[matches[0]] += 1
        total = sum(sizes)
        expected = [draws * s / total for s in sizes]
        # merge identical (span, kind) cells? kinds differ per node here
        chi = sps.chisquare(counts, expected)
        assert chi.pvalue > 0.001, (counts, expected)

    def test_no_eligible_raises(self):
        tree = parse(SourceDocument("e.py", "python", ""))
        with pytest.raises(NoEligibleNode):
            single_node_mask(tree, Rng(0, "e"))

    def test_masked_kinds_cover_typical_structures(self):
        from fimkit.synth import synth_file
        kinds = set()
        for seed in range(60):
            content = synth_file("python", seed)
            doc = SourceDocument(f"s{seed}.py", "python", content)
            tree = parse(doc)
            rng = Rng(seed, doc.path)
            for _ in range(30):
                kinds.update(single_node_mask(tree, rng).node_kinds)
        assert "binary_expression" in kinds
        assert "call_expression" in kinds
        assert "if_statement" in kinds
        assert "function_definition" in kinds


class TestAlignedSpan:
    def test_seeded_replay(self, two_stmt_doc):
        doc, tree = two_stmt_doc
        m1 = aligned_span_mask(tree, doc, Rng(5, doc.path))
        m2 = aligned_span_mask(tree, doc, Rng(5, doc.path))
        assert m1 == m2

    def test_never_masks_root_full_span(self, two_stmt_doc):
        doc, tree = two_stmt_doc
        for seed in range(300):
            m = aligned_span_mask(tree, doc, Rng(seed, "r"))
            assert m.span != tree.root.span

    def test_leaf_case(self):
        # single long token: the lowest subtree for interior spans is the
        # token itself (a leaf), which is masked whole
        doc = SourceDocument("t.py", "python", "abcdefgh = 1")
        tree = parse(doc)
        hits = 0
        for seed in range(200):
            m = aligned_span_mask(tree, doc, Rng(seed, "leaf"))
            if m.node_kinds == ("identifier",):
                assert doc.slice_bytes(m.span) == "abcdefgh"
                hits += 1
        assert hits > 0

    def test_agreement_with_window_oracle(self, two_stmt_doc):
        from fimkit.syntax import lowest_subtree_containing
        doc, tree = two_stmt_doc
        n_cp = doc.cp_len
        agree = checked = 0
        for seed in range(3000):
            rng = Rng(seed, "oracle")
            a = rng.randrange(n_cp + 1)
            b = rng.randrange(n_cp + 1)
            if a == b:
                continue
            target = CharSpan(min(a, b), max(a, b))
            node = lowest_subtree_containing(tree, target)
            if not node.children:
                continue
            got = best_child_window(node, target)
            want = _oracle_window(node, target)
            checked += 1
            agree += got == want
        assert checked > 0 and agree == checked

    def test_degenerate_after_attempts(self):
        doc = SourceDocument("t.py", "python", "x")
        tree = parse(doc)
        # every draw either lands empty or selects the full root span
        with pytest.raises(MaskDegenerate):
            for seed in range(50):
                aligned_span_mask(tree, doc, Rng(seed, "d"), 2)


class TestRandChar:
    def test_len_one_doc(self):
        doc = SourceDocument("t.txt", "text", "a")
        for seed in range(20):
            assert rand_char_mask(doc, Rng(seed, "1")).span == CharSpan(0, 1)

    def test_empty_doc_degenerate(self):
        with pytest.raises(MaskDegenerate):
            rand_char_mask(SourceDocument("e", "text", ""), Rng(0, "e"))

    def test_endpoint_marginals_uniform(self):
        doc = SourceDocument("t.txt", "text", "a" * 100)
        rng = Rng(7, "marginals")
        start_counts = [0] * 101
        draws = 20_000
        for _ in range(draws):
            m = rand_char_mask(doc, rng)
            start_counts[m.span.start] += 1
        # distribution of min(a, b) over the 101 boundary positions, given
        # a != b: P(start = k) = 2 * (n - k) / (n * (n + 1)), n = 101
        n = 101
        expected = [draws * 2 * (n - 1 - k) / (n * (n - 1)) for k in range(n)]
        chi = sps.chisquare(start_counts[:-1], expected[:-1])
        assert chi.pvalue > 0.001

    def test_utf8_boundaries(self):
        doc = SourceDocument("u.txt", "text", "héllo wörld")
        raw = doc.content.encode()
        for seed in range(200):
            m = rand_char_mask(doc, Rng(seed, "u"))
            # decoding must not raise: span is on code-point boundaries
            raw[m.span.start:m.span.end].decode("utf-8")


class TestSelectMask:
    def test_broken_file_always_rand_char(self):
        doc = SourceDocument("b.py", "python", "def broken(:\n  ((")
        tree = parse(doc)
        for seed in range(100):
            m = select_mask(doc, tree, MaskConfig(), Rng(seed, "b"))
            assert m.strategy == RAND_CHAR

    def test_unsupported_language_always_rand_char(self):
        doc = SourceDocument("f.xyz", "mystery-lang", "some content here")
        for seed in range(50):
            m = select_mask(doc, None, MaskConfig(), Rng(seed, "u"))
            assert m.strategy == RAND_CHAR

    def test_forced_single_node(self, two_stmt_doc):
        doc, tree = two_stmt_doc
        cfg = MaskConfig(single_node_fraction=1.0)
        for seed in range(50):
            m = select_mask(doc, tree, cfg, Rng(seed, "f"))
            assert m.strategy == SINGLE_NODE

    def test_strategy_mix(self, two_stmt_doc):
        doc, tree = two_stmt_doc
        cfg = MaskConfig()
        n = 20_000
        singles = sum(
            select_mask(doc, tree, cfg, Rng(s, "mix")).strategy == SINGLE_NODE
            for s in range(n))
        assert abs(singles / n - 0.5) < 0.02

    def test_determinism(self, two_stmt_doc):
        doc, tree = two_stmt_doc
        cfg = MaskConfig()
        a = [select_mask(doc, tree, cfg, Rng(9, f"d{i}")) for i in range(50)]
        b = [select_mask(doc, tree, cfg, Rng(9, f"d{i}")) for i in range(50)]
        assert a == b


class TestSubtreeBoundaryProperty:
    def test_ast_masks_align_with_tree(self):
        from fimkit.synth import LANGUAGES, synth_file
        checked = 0
        for lang in LANGUAGES:
            for seed in range(12):
                content = synth_file(lang, seed, n_blocks=3)
                doc = SourceDocument(f"{lang}{seed}", lang, content)
                tree = parse(doc)
                rng = Rng(seed, doc.path)
                for _ in range(6):
                    m = select_mask(doc, tree, MaskConfig(), rng)
                    if m.strategy == RAND_CHAR:
                        continue
                    assert window_exists(tree, m.span), \
                        (lang, seed, m, content)
                    checked += 1
        assert checked > 200

    def test_round_trip(self):
        from fimkit.fimgen import split_document
        from fimkit.synth import LANGUAGES, synth_file
        for lang in LANGUAGES:
            content = synth_file(lang, 77)
            doc = SourceDocument("r", lang, content)
            tree = parse(doc)
            rng = Rng(3, "roundtrip")
            for _ in range(40):
                m = select_mask(doc, tree, MaskConfig(), rng)
                p, mid, s = split_document(content, m)
                assert p + mid + s == content
