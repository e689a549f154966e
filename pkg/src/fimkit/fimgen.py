"""Training-record generation: chunk, mask, and serialize documents.

A document is cut into fixed-budget context chunks; each chunk is
independently transformed into either a FIM record (sentinel-delimited PSM
or SPM rearrangement of prefix/suffix/middle) or a plain L2R record. Every
chunk owns an rng stream keyed by (seed, source_id), which makes the output
byte-identical across worker counts and resumable mid-corpus.
"""

from __future__ import annotations

import json
import multiprocessing
import os
import shutil
from collections import Counter
from collections.abc import Iterable, Iterator
from dataclasses import dataclass, field

from .corpus import iter_corpus
from .masking import (MaskConfig, MaskDegenerate, MaskSpan, RAND_CHAR,
                      rand_char_mask, select_mask)
from .rng import Rng
from .syntax import (CharSpan, NATURAL_LANGUAGE_IDS, ParseUnsupported,
                     SourceDocument, is_parse_valid, parse)

FIM = "fim"
L2R = "l2r"
PSM = "psm"
SPM = "spm"


@dataclass(frozen=True)
class SentinelSet:
    """Marker strings delimiting the rearranged parts of a FIM record."""

    pre: str = "[PRE]"
    suf: str = "[SUF]"
    mid: str = "[MID]"
    eot: str = "[EOT]"

    def __post_init__(self):
        values = (self.pre, self.suf, self.mid, self.eot)
        if len(set(values)) != 4:
            raise ValueError("sentinels must be pairwise distinct")
        for a in values:
            for b in values:
                if a != b and a in b:
                    raise ValueError(f"sentinel {a!r} is a substring of {b!r}")

    def any_in(self, text: str) -> bool:
        return any(s in text for s in (self.pre, self.suf, self.mid, self.eot))


DEFAULT_SENTINELS = SentinelSet()


@dataclass(frozen=True)
class FimExample:
    prefix: str
    middle: str
    suffix: str
    mode: str  # psm | spm
    lang: str = "unknown"
    strategy: str | None = None
    node_kinds: tuple[str, ...] = ()


@dataclass(frozen=True)
class MixConfig:
    fim_rate: float = 0.7
    ast_fraction: float = 0.9
    psm_fraction: float = 0.5
    mask: MaskConfig = field(default_factory=MaskConfig)
    context_budget: int = 8192
    sentinels: SentinelSet = DEFAULT_SENTINELS
    natural_language_langs: frozenset[str] = NATURAL_LANGUAGE_IDS

    def __post_init__(self):
        for name in ("fim_rate", "ast_fraction", "psm_fraction"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1]")
        if self.context_budget < 1:
            raise ValueError("context_budget must be positive")

    def to_dict(self) -> dict:
        return {
            "fim_rate": self.fim_rate,
            "ast_fraction": self.ast_fraction,
            "psm_fraction": self.psm_fraction,
            "single_node_fraction": self.mask.single_node_fraction,
            "max_resample_attempts": self.mask.max_resample_attempts,
            "context_budget": self.context_budget,
            "sentinels": [self.sentinels.pre, self.sentinels.suf,
                          self.sentinels.mid, self.sentinels.eot],
            "natural_language_langs": sorted(self.natural_language_langs),
        }

    @classmethod
    def from_dict(cls, row: dict) -> "MixConfig":
        kwargs = {}
        for name in ("fim_rate", "ast_fraction", "psm_fraction",
                     "context_budget"):
            if name in row:
                kwargs[name] = row[name]
        mask_kwargs = {}
        if "single_node_fraction" in row:
            mask_kwargs["single_node_fraction"] = row["single_node_fraction"]
        if "max_resample_attempts" in row:
            mask_kwargs["max_resample_attempts"] = row["max_resample_attempts"]
        if mask_kwargs:
            kwargs["mask"] = MaskConfig(**mask_kwargs)
        if "sentinels" in row:
            kwargs["sentinels"] = SentinelSet(*row["sentinels"])
        if "natural_language_langs" in row:
            kwargs["natural_language_langs"] = frozenset(
                row["natural_language_langs"])
        return cls(**kwargs)


@dataclass(frozen=True)
class TrainingRecord:
    kind: str  # fim | l2r
    text: str
    lang: str
    source_id: str
    strategy: str | None = None
    mode: str | None = None
    mask_start: int | None = None
    mask_end: int | None = None

    def to_dict(self) -> dict:
        return {
            "kind": self.kind, "text": self.text, "lang": self.lang,
            "strategy": self.strategy, "mode": self.mode,
            "source_id": self.source_id,
            "mask_start": self.mask_start, "mask_end": self.mask_end,
        }


def record_to_json_line(record: TrainingRecord) -> str:
    return json.dumps(record.to_dict(), ensure_ascii=False,
                      separators=(",", ":"))


@dataclass
class GenStats:
    """Realized mix of an output stream, written as the stats sidecar."""

    records: int = 0
    fim_records: int = 0
    l2r_records: int = 0
    by_strategy: Counter = field(default_factory=Counter)
    by_mode: Counter = field(default_factory=Counter)
    by_lang: Counter = field(default_factory=Counter)
    chunks_parse_valid: int = 0
    chunks_parse_invalid: int = 0
    chunks_unsupported: int = 0
    natural_language_chunks: int = 0
    ast_chosen: int = 0
    ast_fallback_rand: int = 0
    degenerate_l2r: int = 0
    sentinel_collisions: int = 0
    skipped_files: int = 0

    def merge(self, other: "GenStats") -> None:
        self.records += other.records
        self.fim_records += other.fim_records
        self.l2r_records += other.l2r_records
        self.by_strategy.update(other.by_strategy)
        self.by_mode.update(other.by_mode)
        self.by_lang.update(other.by_lang)
        self.chunks_parse_valid += other.chunks_parse_valid
        self.chunks_parse_invalid += other.chunks_parse_invalid
        self.chunks_unsupported += other.chunks_unsupported
        self.natural_language_chunks += other.natural_language_chunks
        self.ast_chosen += other.ast_chosen
        self.ast_fallback_rand += other.ast_fallback_rand
        self.degenerate_l2r += other.degenerate_l2r
        self.sentinel_collisions += other.sentinel_collisions
        self.skipped_files += other.skipped_files

    def to_dict(self) -> dict:
        parsed = self.chunks_parse_valid + self.chunks_parse_invalid
        return {
            "records": self.records,
            "fim_records": self.fim_records,
            "l2r_records": self.l2r_records,
            "fim_rate_realized": self.fim_records / self.records if self.records else 0.0,
            "by_strategy": dict(sorted(self.by_strategy.items())),
            "by_mode": dict(sorted(self.by_mode.items())),
            "by_lang": dict(sorted(self.by_lang.items())),
            "chunks_parse_valid": self.chunks_parse_valid,
            "chunks_parse_invalid": self.chunks_parse_invalid,
            "parse_validity_rate": self.chunks_parse_valid / parsed if parsed else 0.0,
            "chunks_unsupported": self.chunks_unsupported,
            "natural_language_chunks": self.natural_language_chunks,
            "ast_chosen": self.ast_chosen,
            "ast_fallback_rand": self.ast_fallback_rand,
            "degenerate_l2r": self.degenerate_l2r,
            "sentinel_collisions": self.sentinel_collisions,
            "skipped_files": self.skipped_files,
        }


# ---------------------------------------------------------------------------
# Core operations


def split_document(content: str, mask: MaskSpan | CharSpan) -> tuple[str, str, str]:
    """Byte-exact three-way split at the mask boundaries."""
    span = mask.span if isinstance(mask, MaskSpan) else mask
    if content.isascii():
        return content[:span[0]], content[span[0]:span[1]], content[span[1]:]
    raw = content.encode("utf-8")
    return (raw[:span[0]].decode("utf-8"),
            raw[span[0]:span[1]].decode("utf-8"),
            raw[span[1]:].decode("utf-8"))


def render_psm(ex: FimExample, s: SentinelSet = DEFAULT_SENTINELS) -> str:
    return f"{s.pre}{ex.prefix}{s.suf}{ex.suffix}{s.mid}{ex.middle}{s.eot}"


def render_spm(ex: FimExample, s: SentinelSet = DEFAULT_SENTINELS) -> str:
    return f"{s.pre}{s.suf}{ex.suffix}{s.mid}{ex.prefix}{ex.middle}{s.eot}"


def _segments(text: str, s: SentinelSet) -> tuple[str, str, str]:
    """(head, between, tail) around the [SUF] and [MID] sentinels.

    Assumes the body parts do not themselves contain sentinels (collisions
    are reported by the pipeline, not rejected).
    """
    if not text.startswith(s.pre) or not text.endswith(s.eot):
        raise ValueError("not a rendered FIM record")
    body = text[len(s.pre):-len(s.eot)]
    suf_at = body.index(s.suf)
    mid_at = body.index(s.mid, suf_at + len(s.suf))
    return (body[:suf_at], body[suf_at + len(s.suf):mid_at],
            body[mid_at + len(s.mid):])


def inverse_render_psm(text: str, s: SentinelSet = DEFAULT_SENTINELS) -> tuple[str, str, str]:
    """Recover (prefix, middle, suffix) from a PSM record."""
    head, between, tail = _segments(text, s)
    return head, tail, between


def inverse_render_spm(text: str, s: SentinelSet = DEFAULT_SENTINELS) -> tuple[str, str]:
    """Recover (prefix+middle, suffix) from an SPM record.

    The prefix/middle boundary is not marked in SPM, so only their
    concatenation is recoverable from the rendered string.
    """
    head, between, tail = _segments(text, s)
    if head:
        raise ValueError("not an SPM record: text follows the PRE sentinel")
    return tail, between


def reconstruct_source(text: str, s: SentinelSet = DEFAULT_SENTINELS) -> str:
    """Source chunk implied by a rendered record, either mode.

    For PSM this is prefix+middle+suffix; for SPM, (prefix+middle)+suffix.
    When the prefix is empty the two layouts coincide, so the result is
    well-defined without knowing the mode.
    """
    head, between, tail = _segments(text, s)
    return head + tail + between


def chunk_document(content: str, budget: int, counter=None) -> list[str]:
    """Consecutive chunks of at most budget units (code points by default).

    A pluggable counter must be monotone in the prefix length; chunks are
    then the largest prefixes that fit the budget.
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    if not content:
        return []
    if counter is None:
        return [content[i:i + budget] for i in range(0, len(content), budget)]
    chunks = []
    pos = 0
    n = len(content)
    while pos < n:
        lo, hi = pos + 1, n
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if counter(content[pos:mid]) <= budget:
                lo = mid
            else:
                hi = mid - 1
        chunks.append(content[pos:lo])
        pos = lo
    return chunks


def transform(chunk: SourceDocument, cfg: MixConfig, rng: Rng,
              stats: GenStats | None = None) -> TrainingRecord:
    """Turn one context chunk into a FIM or L2R training record.

    Draw order is fixed (fim? -> ast? -> psm? -> mask draws) so a stream is
    reproducible from (seed, source_id) alone.
    """
    s = cfg.sentinels
    text = chunk.content
    if stats is not None:
        stats.records += 1
        stats.by_lang[chunk.lang] += 1
        if s.any_in(text):
            stats.sentinel_collisions += 1

    if chunk.lang in cfg.natural_language_langs:
        if stats is not None:
            stats.natural_language_chunks += 1
            stats.l2r_records += 1
        return TrainingRecord(L2R, text + s.eot, chunk.lang, chunk.path)

    if rng.random() >= cfg.fim_rate:
        if stats is not None:
            stats.l2r_records += 1
        return TrainingRecord(L2R, text + s.eot, chunk.lang, chunk.path)

    use_ast = rng.random() < cfg.ast_fraction
    use_psm = rng.random() < cfg.psm_fraction

    tree = None
    try:
        tree = parse(chunk)
        if stats is not None:
            if is_parse_valid(tree):
                stats.chunks_parse_valid += 1
            else:
                stats.chunks_parse_invalid += 1
    except ParseUnsupported:
        if stats is not None:
            stats.chunks_unsupported += 1

    try:
        if use_ast:
            mask = select_mask(chunk, tree, cfg.mask, rng)
            if stats is not None and tree is not None and is_parse_valid(tree):
                stats.ast_chosen += 1
                if mask.strategy == RAND_CHAR:
                    stats.ast_fallback_rand += 1
        else:
            mask = rand_char_mask(chunk, rng)
    except MaskDegenerate:
        if stats is not None:
            stats.degenerate_l2r += 1
            stats.l2r_records += 1
        return TrainingRecord(L2R, text + s.eot, chunk.lang, chunk.path)

    prefix, middle, suffix = split_document(text, mask)
    mode = PSM if use_psm else SPM
    ex = FimExample(prefix, middle, suffix, mode, chunk.lang,
                    mask.strategy, mask.node_kinds)
    rendered = render_psm(ex, s) if use_psm else render_spm(ex, s)
    if stats is not None:
        stats.fim_records += 1
        stats.by_strategy[mask.strategy] += 1
        stats.by_mode[mode] += 1
    return TrainingRecord(FIM, rendered, chunk.lang, chunk.path,
                          mask.strategy, mode, mask.span.start, mask.span.end)


# ---------------------------------------------------------------------------
# Streaming pipeline


def document_records(doc: SourceDocument, cfg: MixConfig, seed: int,
                     stats: GenStats | None = None,
                     start_chunk: int = 0) -> Iterator[TrainingRecord]:
    """Records for one document, one per context chunk."""
    chunks = chunk_document(doc.content, cfg.context_budget)
    for idx in range(start_chunk, len(chunks)):
        source_id = f"{doc.path}:{idx}"
        chunk_doc = SourceDocument(source_id, doc.lang, chunks[idx])
        rng = Rng(seed, source_id)
        yield transform(chunk_doc, cfg, rng, stats)


def generate_records(docs: Iterable[SourceDocument], cfg: MixConfig,
                     seed: int,
                     stats: GenStats | None = None) -> Iterator[TrainingRecord]:
    """Sequential record stream over a document iterable."""
    for doc in docs:
        yield from document_records(doc, cfg, seed, stats)


_WORKER_CFG: MixConfig | None = None
_WORKER_SEED = 0
_WORKER_EXTS: dict[str, str] | None = None
_WORKER_SHARD_DIR = ""


def _worker_init(cfg_dict: dict, seed: int, exts: dict[str, str] | None,
                 shard_dir: str) -> None:
    global _WORKER_CFG, _WORKER_SEED, _WORKER_EXTS, _WORKER_SHARD_DIR
    _WORKER_CFG = MixConfig.from_dict(cfg_dict)
    _WORKER_SEED = seed
    _WORKER_EXTS = exts
    _WORKER_SHARD_DIR = shard_dir


def _process_batch(batch: list[tuple[str, str]]) -> tuple[str, GenStats]:
    """Render one batch of files into a shard; IPC carries only the paths.

    batch holds (relative doc path, absolute file path) pairs; the shard
    file name encodes the batch index so the parent can splice in order.
    """
    import tempfile

    from .syntax import language_for_path

    stats = GenStats()
    fd, shard_path = tempfile.mkstemp(dir=_WORKER_SHARD_DIR, suffix=".shard")
    with os.fdopen(fd, "w", encoding="utf-8") as out:
        for rel_path, abs_path in batch:
            try:
                with open(abs_path, encoding="utf-8") as fh:
                    content = fh.read()
            except (OSError, UnicodeDecodeError):
                stats.skipped_files += 1
                continue
            doc = SourceDocument(rel_path,
                                 language_for_path(rel_path, _WORKER_EXTS),
                                 content)
            for rec in document_records(doc, _WORKER_CFG, _WORKER_SEED, stats):
                out.write(record_to_json_line(rec))
                out.write("\n")
    return shard_path, stats


def _corpus_file_list(corpus_path: str) -> list[tuple[str, str]]:
    paths = []
    for root, dirs, names in os.walk(corpus_path):
        dirs[:] = sorted(d for d in dirs if d not in
                         {".git", ".hg", ".svn", "__pycache__", "node_modules"})
        for name in names:
            paths.append(os.path.join(root, name))
    paths.sort()
    return [(os.path.relpath(p, corpus_path), p) for p in paths]


def generate_to_file(corpus_path: str, out_path: str, cfg: MixConfig,
                     seed: int, workers: int = 1,
                     exts: dict[str, str] | None = None) -> GenStats:
    """Run the full pipeline corpus -> JSONL records + merged stats.

    Output is byte-identical for any worker count: each chunk's stream is
    keyed by (seed, source_id), workers emit ordered shards, and the parent
    splices them in corpus order.
    """
    total = GenStats()

    def on_error(path, exc):
        total.skipped_files += 1

    if workers <= 1 or not os.path.isdir(corpus_path):
        # Sequential path; also used for JSONL manifests, whose rows are
        # cheap to stream in-process.
        docs = iter_corpus(corpus_path, exts, on_error)
        with open(out_path, "w", encoding="utf-8") as out:
            for doc in docs:
                for rec in document_records(doc, cfg, seed, total):
                    out.write(record_to_json_line(rec))
                    out.write("\n")
        return total

    files = _corpus_file_list(corpus_path)
    batch_size = 8
    batches = [files[i:i + batch_size]
               for i in range(0, len(files), batch_size)]
    out_dir = os.path.dirname(os.path.abspath(out_path))
    ctx = multiprocessing.get_context("fork")
    with open(out_path, "w", encoding="utf-8") as out, \
            ctx.Pool(workers, initializer=_worker_init,
                     initargs=(cfg.to_dict(), seed, exts, out_dir)) as pool:
        for shard_path, stats in pool.imap(_process_batch, batches):
            with open(shard_path, encoding="utf-8") as shard:
                shutil.copyfileobj(shard, out, 1 << 20)
            os.unlink(shard_path)
            total.merge(stats)
    return total
