"""Corpus ingestion: directory trees or JSONL manifests of documents.

Documents are yielded in canonical (sorted-path) order so any run over the
same corpus enumerates identically regardless of filesystem order.
"""

from __future__ import annotations

import json
import os
from collections.abc import Iterator

from .syntax import SourceDocument, language_for_path

# Directories that never contain corpus code.
_SKIP_DIRS = {".git", ".hg", ".svn", "__pycache__", "node_modules"}


def iter_corpus(path: str, exts: dict[str, str] | None = None,
                on_error=None) -> Iterator[SourceDocument]:
    """Yield documents from a directory tree or a JSONL manifest.

    JSONL rows are {path, content[, lang]}; lang falls back to the
    extension table. Undecodable files are skipped (reported via on_error).
    """
    if os.path.isfile(path):
        yield from _iter_jsonl(path, exts, on_error)
        return
    paths = []
    for root, dirs, names in os.walk(path):
        dirs[:] = sorted(d for d in dirs if d not in _SKIP_DIRS)
        for name in names:
            paths.append(os.path.join(root, name))
    for file_path in sorted(paths):
        rel = os.path.relpath(file_path, path)
        try:
            with open(file_path, encoding="utf-8") as fh:
                content = fh.read()
        except (UnicodeDecodeError, OSError) as exc:
            if on_error is not None:
                on_error(file_path, exc)
            continue
        yield SourceDocument(rel, language_for_path(file_path, exts), content)


def _iter_jsonl(path: str, exts, on_error) -> Iterator[SourceDocument]:
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                row = json.loads(line)
                lang = row.get("lang") or language_for_path(row["path"], exts)
                yield SourceDocument(row["path"], lang, row["content"])
            except (json.JSONDecodeError, KeyError, ValueError) as exc:
                if on_error is not None:
                    on_error(f"{path}:{line_no}", exc)
