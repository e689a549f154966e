"""fimkit: syntax-aware fill-in-the-middle corpus tooling.

Three capabilities, usable as a library or through the `fimkit` CLI:
  * build FIM/L2R training records from source corpora, with tree-aligned
    or random-character middle selection,
  * construct Add/Edit infilling benchmark examples from commit history,
  * score model outputs with character-level perplexity.
"""

from .syntax import (CharSpan, ParseUnsupported, SourceDocument, SyntaxNode,
                     SyntaxTree, eligible_nodes, is_parse_valid,
                     language_for_path, lowest_subtree_containing, parse)

__version__ = "0.1.0"
