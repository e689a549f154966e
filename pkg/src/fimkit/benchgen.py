"""Infilling benchmark construction from before/after file pairs.

Commit-modified files are line-diffed (Myers shortest edit script, with
adjacent delete+insert runs merged into replace hunks); insertions become
Add examples whose middle is the inserted segment, replacements become Edit
examples rendered in a conflict-merge prompt. Context always shows the
after-state of the file, so sibling hunks never leak their own answers.
"""

from __future__ import annotations

import json
import os
import subprocess
from collections import Counter
from collections.abc import Iterable, Iterator
from dataclasses import dataclass, field

from .fimgen import DEFAULT_SENTINELS, SentinelSet
from .syntax import language_for_path

INSERT = "insert"
REPLACE = "replace"
DELETE = "delete"
ADD = "Add"
EDIT = "Edit"

# Guard against pathological diffs; beyond this the pair is one big replace.
_MAX_EDIT_DISTANCE = 4000


class HunkKindMismatch(Exception):
    """An example constructor received a hunk of the wrong kind."""


@dataclass(frozen=True)
class CommitFilePair:
    repo: str
    sha: str
    path: str
    lang: str
    before: str
    after: str
    timestamp: str = ""  # ISO-8601

    def __post_init__(self):
        if self.before == self.after:
            raise ValueError("before and after must differ")


@dataclass(frozen=True)
class DiffHunk:
    kind: str  # insert | replace | delete
    before_start: int  # 0-based line ranges, half-open
    before_end: int
    after_start: int
    after_end: int


@dataclass(frozen=True)
class ConflictMarkers:
    original: str = "<<<<<<< ORIGINAL\n"
    separator: str = "=======\n"
    updated: str = ">>>>>>> UPDATED\n"


DEFAULT_MARKERS = ConflictMarkers()


@dataclass(frozen=True)
class BenchExample:
    split: str  # Add | Edit
    prefix: str
    middle: str
    suffix: str
    original: str | None = None  # Edit only
    repo: str = ""
    sha: str = ""
    path: str = ""
    lang: str = "unknown"
    hunk_index: int = 0

    @property
    def example_id(self) -> str:
        return f"{self.repo}:{self.sha}:{self.path}:{self.hunk_index}"

    def to_dict(self) -> dict:
        return {
            "id": self.example_id, "split": self.split,
            "prefix": self.prefix, "middle": self.middle,
            "suffix": self.suffix, "original": self.original,
            "repo": self.repo, "sha": self.sha, "path": self.path,
            "lang": self.lang, "hunk_index": self.hunk_index,
        }

    @classmethod
    def from_dict(cls, row: dict) -> "BenchExample":
        return cls(split=row["split"], prefix=row["prefix"],
                   middle=row["middle"], suffix=row["suffix"],
                   original=row.get("original"), repo=row.get("repo", ""),
                   sha=row.get("sha", ""), path=row.get("path", ""),
                   lang=row.get("lang", "unknown"),
                   hunk_index=row.get("hunk_index", 0))


# ---------------------------------------------------------------------------
# Line diff


def _split_lines(text: str) -> list[str]:
    return text.splitlines(keepends=True)


def _myers_ops(a: list[int], b: list[int]) -> list[tuple[str, int]] | None:
    """Forward edit script as ('equal'|'del'|'ins', count-of-1) steps.

    Returns None when the edit distance exceeds the guard bound.
    """
    n, m = len(a), len(b)
    if n == 0 and m == 0:
        return []
    max_d = min(n + m, _MAX_EDIT_DISTANCE)
    # v[k] = furthest x on diagonal k; diagonals offset by max_d
    size = 2 * max_d + 1
    v = [0] * size
    trace: list[list[int]] = []
    found_d = -1
    for d in range(max_d + 1):
        trace.append(v.copy())
        for k in range(-d, d + 1, 2):
            idx = k + max_d
            if k == -d or (k != d and v[idx - 1] < v[idx + 1]):
                x = v[idx + 1]  # down: insertion
            else:
                x = v[idx - 1] + 1  # right: deletion
            y = x - k
            while x < n and y < m and a[x] == b[y]:
                x += 1
                y += 1
            v[idx] = x
            if x >= n and y >= m:
                found_d = d
                break
        if found_d >= 0:
            break
    if found_d < 0:
        return None
    # Backtrack
    ops: list[tuple[str, int]] = []
    x, y = n, m
    for d in range(found_d, 0, -1):
        prev_v = trace[d]
        k = x - y
        idx = k + max_d
        if k == -d or (k != d and prev_v[idx - 1] < prev_v[idx + 1]):
            prev_k = k + 1  # came via insertion
        else:
            prev_k = k - 1  # came via deletion
        prev_x = prev_v[prev_k + max_d]
        prev_y = prev_x - prev_k
        while x > prev_x and y > prev_y:
            ops.append(("equal", 1))
            x -= 1
            y -= 1
        if prev_k == k + 1:
            ops.append(("ins", 1))
            y -= 1
        else:
            ops.append(("del", 1))
            x -= 1
    while x > 0 and y > 0:
        ops.append(("equal", 1))
        x -= 1
        y -= 1
    ops.reverse()
    return ops


def line_diff(before: str, after: str) -> list[DiffHunk]:
    """Minimal line-level edit script, delete+insert runs merged to replace."""
    a_lines = _split_lines(before)
    b_lines = _split_lines(after)
    # Intern lines as ints for O(1) comparisons.
    table: dict[str, int] = {}
    a = [table.setdefault(line, len(table)) for line in a_lines]
    b = [table.setdefault(line, len(table)) for line in b_lines]

    ops = _myers_ops(a, b)
    if ops is None:
        # Pathologically distant pair: one whole-file replace hunk.
        if not a_lines and not b_lines:
            return []
        kind = REPLACE if a_lines and b_lines else (
            INSERT if b_lines else DELETE)
        return [DiffHunk(kind, 0, len(a_lines), 0, len(b_lines))]

    hunks: list[DiffHunk] = []
    x = y = 0
    del_run = ins_run = 0

    def flush():
        nonlocal del_run, ins_run
        if del_run and ins_run:
            hunks.append(DiffHunk(REPLACE, x - del_run, x, y - ins_run, y))
        elif ins_run:
            hunks.append(DiffHunk(INSERT, x, x, y - ins_run, y))
        elif del_run:
            hunks.append(DiffHunk(DELETE, x - del_run, x, y, y))
        del_run = ins_run = 0

    for op, cnt in ops:
        if op == "equal":
            flush()
            x += cnt
            y += cnt
        elif op == "del":
            del_run += cnt
            x += cnt
        else:
            ins_run += cnt
            y += cnt
    flush()
    return hunks


def apply_hunks(before: str, after: str, hunks: list[DiffHunk]) -> str:
    """Patch application: keep before-lines outside the hunks, splice in the
    after-lines each hunk's after-range points at. Equals `after` exactly
    when the hunk ranges are consistent with the two texts.
    """
    a_lines = _split_lines(before)
    b_lines = _split_lines(after)
    out: list[str] = []
    pos = 0
    for h in hunks:  # ordered and non-overlapping by construction
        out.extend(a_lines[pos:h.before_start])
        out.extend(b_lines[h.after_start:h.after_end])
        pos = h.before_end
    out.extend(a_lines[pos:])
    return "".join(out)


# ---------------------------------------------------------------------------
# Examples


def make_add_example(pair: CommitFilePair, hunk: DiffHunk,
                     hunk_index: int = 0) -> BenchExample:
    """Insertion hunk -> Add example; middle is the inserted segment."""
    if hunk.kind != INSERT:
        raise HunkKindMismatch(f"expected insert, got {hunk.kind}")
    b_lines = _split_lines(pair.after)
    return BenchExample(
        split=ADD,
        prefix="".join(b_lines[:hunk.after_start]),
        middle="".join(b_lines[hunk.after_start:hunk.after_end]),
        suffix="".join(b_lines[hunk.after_end:]),
        repo=pair.repo, sha=pair.sha, path=pair.path, lang=pair.lang,
        hunk_index=hunk_index,
    )


def make_edit_example(pair: CommitFilePair, hunk: DiffHunk,
                      hunk_index: int = 0) -> BenchExample:
    """Replacement hunk -> Edit example; the removed segment is kept as
    `original` for the conflict-merge prompt."""
    if hunk.kind != REPLACE:
        raise HunkKindMismatch(f"expected replace, got {hunk.kind}")
    a_lines = _split_lines(pair.before)
    b_lines = _split_lines(pair.after)
    return BenchExample(
        split=EDIT,
        prefix="".join(b_lines[:hunk.after_start]),
        middle="".join(b_lines[hunk.after_start:hunk.after_end]),
        suffix="".join(b_lines[hunk.after_end:]),
        original="".join(a_lines[hunk.before_start:hunk.before_end]),
        repo=pair.repo, sha=pair.sha, path=pair.path, lang=pair.lang,
        hunk_index=hunk_index,
    )


def truncate_context(ex: BenchExample, context_lines: int) -> BenchExample:
    """Limit prefix/suffix to a line radius; the middle is never touched."""
    prefix_lines = _split_lines(ex.prefix)
    suffix_lines = _split_lines(ex.suffix)
    return BenchExample(
        split=ex.split,
        prefix="".join(prefix_lines[-context_lines:]) if context_lines else "",
        middle=ex.middle,
        suffix="".join(suffix_lines[:context_lines]) if context_lines else "",
        original=ex.original, repo=ex.repo, sha=ex.sha, path=ex.path,
        lang=ex.lang, hunk_index=ex.hunk_index,
    )


def render_conflict_prompt(ex: BenchExample,
                           s: SentinelSet = DEFAULT_SENTINELS,
                           markers: ConflictMarkers = DEFAULT_MARKERS) -> str:
    """PSM-style prompt; for Edit examples the original segment is shown in
    a conflict-merge block and the model is to produce the updated middle."""
    if ex.split == EDIT:
        eff_prefix = (ex.prefix + markers.original + (ex.original or "")
                      + markers.separator)
        eff_suffix = markers.updated + ex.suffix
    else:
        eff_prefix = ex.prefix
        eff_suffix = ex.suffix
    return f"{s.pre}{eff_prefix}{s.suf}{eff_suffix}{s.mid}"


# ---------------------------------------------------------------------------
# Benchmark assembly


@dataclass
class BenchFilters:
    langs: frozenset[str] | None = None
    min_middle_lines: int = 1
    max_middle_lines: int | None = None
    since: str | None = None  # ISO dates compare lexicographically
    until: str | None = None
    context_lines: int | None = None


@dataclass
class BenchStats:
    examples: int = 0
    by_split: Counter = field(default_factory=Counter)
    by_lang_split: Counter = field(default_factory=Counter)
    pairs_seen: int = 0
    pairs_failed: int = 0
    hunks_skipped: int = 0

    def to_dict(self) -> dict:
        table: dict[str, dict[str, int]] = {}
        for (lang, split), count in sorted(self.by_lang_split.items()):
            table.setdefault(lang, {})[split] = count
        return {
            "examples": self.examples,
            "by_split": dict(sorted(self.by_split.items())),
            "by_language": table,
            "pairs_seen": self.pairs_seen,
            "pairs_failed": self.pairs_failed,
            "hunks_skipped": self.hunks_skipped,
        }


def pair_examples(pair: CommitFilePair,
                  filters: BenchFilters | None = None,
                  stats: BenchStats | None = None) -> list[BenchExample]:
    """All Add/Edit examples from one pair, in hunk order."""
    filters = filters or BenchFilters()
    out: list[BenchExample] = []
    for idx, hunk in enumerate(line_diff(pair.before, pair.after)):
        if hunk.kind == INSERT:
            ex = make_add_example(pair, hunk, idx)
        elif hunk.kind == REPLACE:
            ex = make_edit_example(pair, hunk, idx)
        else:
            if stats is not None:
                stats.hunks_skipped += 1
            continue
        middle_lines = hunk.after_end - hunk.after_start
        if middle_lines < filters.min_middle_lines or not ex.middle:
            if stats is not None:
                stats.hunks_skipped += 1
            continue
        if filters.max_middle_lines is not None and \
                middle_lines > filters.max_middle_lines:
            if stats is not None:
                stats.hunks_skipped += 1
            continue
        if ex.split == EDIT and ex.original == ex.middle:
            # line-split artifacts can make texts equal; not a real edit
            if stats is not None:
                stats.hunks_skipped += 1
            continue
        if filters.context_lines is not None:
            ex = truncate_context(ex, filters.context_lines)
        out.append(ex)
    return out


def build_benchmark(pairs: Iterable[CommitFilePair],
                    filters: BenchFilters | None = None
                    ) -> tuple[list[BenchExample], BenchStats]:
    """Diff every pair, classify hunks, filter, and canonicalize order.

    Per-pair failures are counted and skipped, never fatal.
    """
    filters = filters or BenchFilters()
    stats = BenchStats()
    examples: list[BenchExample] = []
    for pair in pairs:
        stats.pairs_seen += 1
        if filters.langs is not None and pair.lang not in filters.langs:
            continue
        if filters.since and pair.timestamp and pair.timestamp < filters.since:
            continue
        if filters.until and pair.timestamp and pair.timestamp > filters.until:
            continue
        try:
            examples.extend(pair_examples(pair, filters, stats))
        except Exception:
            stats.pairs_failed += 1
    examples.sort(key=lambda e: (e.repo, e.sha, e.path, e.hunk_index))
    for ex in examples:
        stats.examples += 1
        stats.by_split[ex.split] += 1
        stats.by_lang_split[(ex.lang, ex.split)] += 1
    return examples, stats


# ---------------------------------------------------------------------------
# Ingestion


def iter_pairs_jsonl(path: str) -> Iterator[CommitFilePair]:
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            row = json.loads(line)
            yield CommitFilePair(
                repo=row["repo"], sha=row["sha"], path=row["path"],
                lang=row.get("lang") or language_for_path(row["path"]),
                before=row["before"], after=row["after"],
                timestamp=row.get("timestamp", ""))


def _git(repo: str, *args: str) -> str:
    return subprocess.run(
        ["git", "-C", repo, *args], check=True, capture_output=True,
    ).stdout.decode("utf-8", errors="replace")


def iter_repo_pairs(repo_path: str, since: str | None = None,
                    until: str | None = None,
                    on_error=None) -> Iterator[CommitFilePair]:
    """Walk a local clone's non-merge commits and yield modified-file pairs."""
    repo_name = os.path.basename(os.path.abspath(repo_path))
    log_args = ["log", "--format=%H %cI", "--min-parents=1",
                "--max-parents=1", "--reverse"]
    if since:
        log_args.append(f"--since={since}")
    if until:
        log_args.append(f"--until={until}")
    for row in _git(repo_path, *log_args).splitlines():
        if not row.strip():
            continue
        sha, _, timestamp = row.partition(" ")
        try:
            status = _git(repo_path, "diff-tree", "-r", "--no-commit-id",
                          "--name-status", sha)
        except subprocess.CalledProcessError as exc:
            if on_error is not None:
                on_error(sha, exc)
            continue
        for line in status.splitlines():
            parts = line.split("\t")
            if len(parts) != 2 or parts[0] != "M":
                continue
            path = parts[1]
            try:
                before = _git(repo_path, "show", f"{sha}^:{path}")
                after = _git(repo_path, "show", f"{sha}:{path}")
                if before == after:
                    continue
                yield CommitFilePair(
                    repo=repo_name, sha=sha, path=path,
                    lang=language_for_path(path), before=before,
                    after=after, timestamp=timestamp)
            except (subprocess.CalledProcessError, ValueError) as exc:
                if on_error is not None:
                    on_error(f"{sha}:{path}", exc)
