"""Middle-span selection: single-node, aligned-span, and random-character.

The two tree-aware strategies guarantee that the selected middle equals the
span of one node or of a contiguous window of siblings (hull, including any
anonymous separator tokens between them), so prefix+middle+suffix always
reassembles the document byte-exactly. Offsets are sampled on code-point
boundaries; spans are byte ranges.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field

from .rng import Rng
from .syntax import (CharSpan, SourceDocument, SyntaxNode, SyntaxTree,
                     eligible_nodes, is_parse_valid,
                     lowest_subtree_containing)

SINGLE_NODE = "single_node"
ALIGNED_SPAN = "aligned_span"
RAND_CHAR = "rand_char"


class NoEligibleNode(Exception):
    """The tree has no named, non-empty, non-root node to mask."""


class MaskDegenerate(Exception):
    """No usable span was found within the resample budget."""


class NoChildren(Exception):
    """best_child_window needs at least one child; the caller masks the leaf."""


@dataclass(frozen=True)
class MaskSpan:
    span: CharSpan
    strategy: str  # single_node | aligned_span | rand_char
    node_kinds: tuple[str, ...] = ()

    def __post_init__(self):
        if self.span.end - self.span.start < 1:
            raise ValueError("mask span must cover at least one byte")


@dataclass(frozen=True)
class MaskConfig:
    single_node_fraction: float = 0.5
    max_resample_attempts: int = 8

    def __post_init__(self):
        if not 0.0 <= self.single_node_fraction <= 1.0:
            raise ValueError("single_node_fraction must be in [0, 1]")
        if self.max_resample_attempts < 1:
            raise ValueError("max_resample_attempts must be positive")


def iou(a: CharSpan, b: CharSpan) -> float:
    """Intersection over union of two byte intervals; 0 when both empty."""
    inter = min(a.end, b.end) - max(a.start, b.start)
    if inter < 0:
        inter = 0
    union = (a.end - a.start) + (b.end - b.start) - inter
    if union == 0:
        return 0.0
    return inter / union


def single_node_mask(tree: SyntaxTree, rng: Rng) -> MaskSpan:
    """Pick one eligible node with probability proportional to its byte size."""
    nodes = eligible_nodes(tree)
    if not nodes:
        raise NoEligibleNode
    cum = tree._cum_sizes
    if cum is None:
        cum = []
        total = 0
        for node in nodes:
            total += node.span.end - node.span.start
            cum.append(total)
        tree._cum_sizes = cum
    r = rng.randrange(cum[-1])
    node = nodes[bisect.bisect_right(cum, r)]
    return MaskSpan(node.span, SINGLE_NODE, (node.kind,))


def best_child_window(parent: SyntaxNode, target: CharSpan) -> tuple[int, int]:
    """Contiguous child index window [i, j] maximizing IoU with target.

    Windows range over all children (anonymous tokens included) so the
    window hull is contiguous text. Ties break to the smallest start index,
    then the smallest end index.
    """
    children = parent.children
    if not children:
        raise NoChildren(parent)
    t_start, t_end = target.start, target.end
    t_len = t_end - t_start
    best = (0, 0)
    best_iou = -1.0
    n = len(children)
    for i in range(n):
        w_start = children[i].span.start
        for j in range(i, n):
            w_end = children[j].span.end
            inter = min(w_end, t_end) - max(w_start, t_start)
            if inter < 0:
                inter = 0
            union = (w_end - w_start) + t_len - inter
            score = inter / union if union else 0.0
            if score > best_iou:
                best_iou = score
                best = (i, j)
    return best


def _sample_span(doc: SourceDocument, rng: Rng) -> CharSpan | None:
    """Two uniform code-point boundary offsets, ordered; None when equal."""
    n_cp = doc.cp_len
    a = rng.randrange(n_cp + 1)
    b = rng.randrange(n_cp + 1)
    if a == b:
        return None
    if a > b:
        a, b = b, a
    return CharSpan(doc.cp_to_byte(a), doc.cp_to_byte(b))


def aligned_span_mask(tree: SyntaxTree, doc: SourceDocument, rng: Rng,
                      max_resample_attempts: int = 8) -> MaskSpan:
    """Sample a random span, find its lowest containing subtree, and mask the
    contiguous child window with maximal IoU against the sampled span.

    Leaf subtrees are masked whole. Windows covering the root's full span
    are rejected and resampled (a whole-file middle degenerates to L2R).
    """
    if doc.cp_len < 1:
        raise MaskDegenerate("empty document")
    root_span = tree.root.span
    for _ in range(max_resample_attempts):
        target = _sample_span(doc, rng)
        if target is None:
            continue
        node = lowest_subtree_containing(tree, target)
        if node.children:
            i, j = best_child_window(node, target)
            span = CharSpan(node.children[i].span.start,
                            node.children[j].span.end)
            kinds = tuple(c.kind for c in node.children[i:j + 1])
        else:
            span = node.span
            kinds = (node.kind,)
        if span == root_span or span.end - span.start < 1:
            continue
        return MaskSpan(span, ALIGNED_SPAN, kinds)
    raise MaskDegenerate(f"no aligned span after {max_resample_attempts} attempts")


def rand_char_mask(doc: SourceDocument, rng: Rng) -> MaskSpan:
    """Uniform random code-point span; resamples empty draws indefinitely
    (only an empty document cannot yield a span)."""
    if doc.cp_len < 1:
        raise MaskDegenerate("empty document")
    while True:
        span = _sample_span(doc, rng)
        if span is not None:
            return MaskSpan(span, RAND_CHAR, ())


def select_mask(doc: SourceDocument, tree: SyntaxTree | None,
                cfg: MaskConfig, rng: Rng) -> MaskSpan:
    """Strategy dispatch with the fallback rule.

    tree is None when the language is unsupported or parsing was skipped;
    that, or a parse with error recovery, forces random-character masking.
    Tree strategies that come up empty also fall back.
    """
    if doc.cp_len < 1:
        raise MaskDegenerate("empty document")
    if tree is None or not is_parse_valid(tree):
        return rand_char_mask(doc, rng)
    use_single = rng.random() < cfg.single_node_fraction
    try:
        if use_single:
            return single_node_mask(tree, rng)
        return aligned_span_mask(tree, doc, rng, cfg.max_resample_attempts)
    except (NoEligibleNode, MaskDegenerate):
        return rand_char_mask(doc, rng)
