#!/usr/bin/env python3
"""Parse source files into concrete syntax trees and poke at them.

Walkthrough: parse snippets in a few languages, dump the tree structure,
check validity, and query the tree the way the masking strategies do.
"""

from fimkit import (CharSpan, SourceDocument, eligible_nodes, is_parse_valid,
                    lowest_subtree_containing, parse)

PY_SNIPPET = '''\
def greet(name, times=2):
    out = []
    for i in range(times):
        out.append(f"hello {name}")
    return out
'''

GO_SNIPPET = '''\
package main

func Sum(values []int) int {
	total := 0
	for _, v := range values {
		total += v
	}
	return total
}
'''

print("=" * 60)
print("1. Parse a Python function and dump the tree")
print("=" * 60)
doc = SourceDocument("greet.py", "python", PY_SNIPPET)
tree = parse(doc)
print(tree.root.pretty(doc.content))
print(f"\nvalid parse: {is_parse_valid(tree)}")

print()
print("=" * 60)
print("2. Error recovery marks broken files instead of raising")
print("=" * 60)
broken = parse(SourceDocument("broken.py", "python", "def broken(:\n  (("))
print(f"has_error for 'def broken(:' -> {broken.has_error}")

print()
print("=" * 60)
print("3. Nodes eligible for masking (named, non-root, non-empty)")
print("=" * 60)
go_doc = SourceDocument("sum.go", "go", GO_SNIPPET)
go_tree = parse(go_doc)
for node in eligible_nodes(go_tree)[:10]:
    text = go_doc.slice_bytes(node.span).replace("\n", "\\n")
    print(f"  {node.kind:24s} [{node.span.start:3d},{node.span.end:3d})  {text[:40]}")
print(f"  ... {len(eligible_nodes(go_tree))} eligible nodes total")

print()
print("=" * 60)
print("4. Lowest subtree containing a byte span")
print("=" * 60)
span = CharSpan(30, 60)
node = lowest_subtree_containing(go_tree, span)
print(f"span [{span.start},{span.end}) is contained by a {node.kind} "
      f"covering [{node.span.start},{node.span.end})")
print(repr(go_doc.slice_bytes(node.span)))
