#!/usr/bin/env python3
"""Compare the three middle-selection strategies on one file.

Single-node masking picks one named tree node with probability proportional
to its byte size; aligned-span masking samples a random character span and
snaps it to the best-matching contiguous run of sibling subtrees; the
random-character baseline just cuts between two uniform positions.
"""

from collections import Counter

from fimkit import SourceDocument, parse
from fimkit.masking import (MaskConfig, aligned_span_mask, rand_char_mask,
                            select_mask, single_node_mask)
from fimkit.rng import Rng

SOURCE = '''\
import math

def distance(a, b):
    dx = a[0] - b[0]
    dy = a[1] - b[1]
    return math.sqrt(dx * dx + dy * dy)

def normalize(v):
    length = distance((0, 0), v)
    if length == 0:
        return (0, 0)
    return (v[0] / length, v[1] / length)
'''

doc = SourceDocument("vec.py", "python", SOURCE)
tree = parse(doc)


def show(mask):
    middle = doc.slice_bytes(mask.span).replace("\n", "\\n")
    if len(middle) > 56:
        middle = middle[:53] + "..."
    kinds = ",".join(mask.node_kinds) or "-"
    print(f"  [{mask.span.start:3d},{mask.span.end:3d}) {kinds:34s} {middle}")


print("single-node masks (size-proportional node choice):")
for i in range(4):
    show(single_node_mask(tree, Rng(i, "demo-single")))

print("\naligned-span masks (random span snapped to sibling windows):")
for i in range(4):
    show(aligned_span_mask(tree, doc, Rng(i, "demo-aligned")))

print("\nrandom-character masks (the baseline; ignores structure):")
for i in range(4):
    show(rand_char_mask(doc, Rng(i, "demo-rand")))

print("\nselect_mask dispatches 50/50 between the two tree strategies")
print("and falls back to rand_char for unparseable inputs:")
counts = Counter(
    select_mask(doc, tree, MaskConfig(), Rng(i, "demo-mix")).strategy
    for i in range(2000))
for strategy, n in sorted(counts.items()):
    print(f"  {strategy:14s} {n / 2000:.3f}")

broken = SourceDocument("broken.py", "python", "def broken(:\n  ((")
btree = parse(broken)
fallback = Counter(
    select_mask(broken, btree, MaskConfig(), Rng(i, "demo-broken")).strategy
    for i in range(500))
print(f"\nbroken file strategies over 500 draws: {dict(fallback)}")
