"""Streaming bindings for ML data loaders.

A thin shim over the fimkit pipeline: records surface as plain dicts,
streams are lazy, resumable at a (document, chunk) cursor, and byte-for-byte
identical to the `fimkit gen` CLI output for the same corpus, config, and
seed. No pipeline logic is reimplemented here.
"""

from __future__ import annotations

import json
import os
from collections.abc import Iterator

from fimkit import SourceDocument, is_parse_valid, parse
from fimkit.fimgen import MixConfig, document_records
from fimkit.masking import (ALIGNED_SPAN, MaskConfig, RAND_CHAR, SINGLE_NODE,
                            aligned_span_mask, rand_char_mask, select_mask,
                            single_node_mask)
from fimkit.rng import Rng
from fimkit.syntax import ParseUnsupported, language_for_path

__all__ = ["StreamHandle", "open_stream", "mask_one", "load_config"]


def load_config(path: str) -> MixConfig:
    """Read a pipeline config from the same JSON shape the CLI accepts."""
    with open(path, encoding="utf-8") as fh:
        return MixConfig.from_dict(json.load(fh))


class StreamHandle:
    """Single-consumer lazy record stream with a resumable cursor.

    cursor is the (document index, chunk index) of the next record to be
    produced; reopening a stream at a saved cursor continues exactly where
    the original left off.
    """

    def __init__(self, corpus_path: str, config: MixConfig | None = None,
                 seed: int = 0, cursor: tuple[int, int] = (0, 0)):
        if not os.path.exists(corpus_path):
            raise FileNotFoundError(corpus_path)
        self.corpus_path = corpus_path
        self.config = config if config is not None else MixConfig()
        self.seed = seed
        self._cursor = tuple(cursor)

    @property
    def cursor(self) -> tuple[int, int]:
        return self._cursor

    def _documents(self) -> Iterator[tuple[int, SourceDocument]]:
        if os.path.isdir(self.corpus_path):
            from fimkit.fimgen import _corpus_file_list
            for idx, (rel, abs_path) in enumerate(
                    _corpus_file_list(self.corpus_path)):
                try:
                    with open(abs_path, encoding="utf-8") as fh:
                        content = fh.read()
                except (OSError, UnicodeDecodeError):
                    yield idx, None
                    continue
                yield idx, SourceDocument(rel, language_for_path(rel), content)
            return
        with open(self.corpus_path, encoding="utf-8") as fh:
            idx = 0
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                try:
                    row = json.loads(line)
                    lang = row.get("lang") or language_for_path(row["path"])
                    doc = SourceDocument(row["path"], lang, row["content"])
                except (json.JSONDecodeError, KeyError, ValueError):
                    doc = None
                yield idx, doc
                idx += 1

    def __iter__(self) -> Iterator[dict]:
        start_doc, start_chunk = self._cursor
        for doc_idx, doc in self._documents():
            if doc_idx < start_doc:
                continue
            if doc is None:
                self._cursor = (doc_idx + 1, 0)
                continue
            first_chunk = start_chunk if doc_idx == start_doc else 0
            chunk_idx = first_chunk
            for rec in document_records(doc, self.config, self.seed,
                                        start_chunk=first_chunk):
                self._cursor = (doc_idx, chunk_idx + 1)
                yield rec.to_dict()
                chunk_idx += 1
            self._cursor = (doc_idx + 1, 0)


def open_stream(corpus_path: str, config: MixConfig | None = None,
                seed: int = 0,
                cursor: tuple[int, int] = (0, 0)) -> StreamHandle:
    """Open a lazy training-record stream over a corpus directory or JSONL."""
    return StreamHandle(corpus_path, config, seed, cursor)


def mask_one(text: str, lang: str, strategy: str = "auto", seed: int = 0,
             index: int = 0) -> dict:
    """Sample one mask for a text, mirroring the CLI mask command.

    The same (text, lang, strategy, seed, index) always yields the same
    report; parse-broken text falls back to random-character masking when
    strategy is auto.
    """
    doc = SourceDocument(f"<mask_one:{lang}>", lang, text)
    tree = None
    try:
        tree = parse(doc)
    except ParseUnsupported:
        pass
    rng = Rng(seed, f"mask:{index}")
    cfg = MaskConfig()
    if strategy == SINGLE_NODE:
        if tree is None or not is_parse_valid(tree):
            raise ValueError(f"text does not parse cleanly as {lang}")
        mask = single_node_mask(tree, rng)
    elif strategy == ALIGNED_SPAN:
        if tree is None or not is_parse_valid(tree):
            raise ValueError(f"text does not parse cleanly as {lang}")
        mask = aligned_span_mask(tree, doc, rng, cfg.max_resample_attempts)
    elif strategy == RAND_CHAR:
        mask = rand_char_mask(doc, rng)
    elif strategy == "auto":
        mask = select_mask(doc, tree, cfg, rng)
    else:
        raise ValueError(f"unknown strategy {strategy!r}")
    return {
        "index": index, "strategy": mask.strategy,
        "start": mask.span.start, "end": mask.span.end,
        "kinds": list(mask.node_kinds),
        "middle": doc.slice_bytes(mask.span),
    }
