"""Character-level perplexity over ground-truth middles, plus the prompt
renderers and a self-contained n-gram scorer.

Scores arrive through a file-based exchange: prompts go out as JSONL
{id, prompt, middle, split, lang}; a scorer (an external model harness or
the built-in character n-gram) returns JSONL {id, tokens: [{text, logprob}]}
where the token texts, concatenated, reproduce the middle exactly. The
perplexity formula depends only on the summed log-probability and the
middle's code-point count, so any tokenization with the same coverage gives
the same number.
"""

from __future__ import annotations

import json
import math
from collections import Counter, defaultdict
from collections.abc import Iterable
from dataclasses import dataclass
from statistics import median

from .benchgen import BenchExample, render_conflict_prompt
from .fimgen import DEFAULT_SENTINELS, SentinelSet


class EmptyMiddle(Exception):
    """A scored middle must contain at least one character."""


class CoverageMismatch(Exception):
    """Token texts do not reassemble the ground-truth middle."""


@dataclass(frozen=True)
class TokenScore:
    text: str
    logprob: float  # natural log; expected <= 0

    def __post_init__(self):
        if not self.text:
            raise ValueError("token text must be non-empty")
        if not math.isfinite(self.logprob):
            raise ValueError("logprob must be finite")


@dataclass(frozen=True)
class ScoredMiddle:
    example_id: str
    scores: tuple[TokenScore, ...]
    middle_char_count: int

    @classmethod
    def from_middle(cls, example_id: str, middle: str,
                    scores: Iterable[TokenScore]) -> "ScoredMiddle":
        scores = tuple(scores)
        if not middle:
            raise EmptyMiddle(example_id)
        joined = "".join(t.text for t in scores)
        if joined != middle:
            raise CoverageMismatch(
                f"{example_id}: tokens cover {joined!r}, middle is {middle!r}")
        return cls(example_id, scores, len(middle))

    @property
    def sum_logprob(self) -> float:
        return sum(t.logprob for t in self.scores)


def char_ppl(sm: ScoredMiddle) -> float:
    """exp(-(sum of token log-probs) / middle character count)."""
    if sm.middle_char_count < 1:
        raise EmptyMiddle(sm.example_id)
    return math.exp(-sm.sum_logprob / sm.middle_char_count)


def aggregate(rows: Iterable[dict], keys: tuple[str, ...] = ("split", "lang")
              ) -> dict:
    """Group per-example results and report mean/median/count per group.

    Each row needs 'ppl' plus the grouping fields; rows carrying 'n_chars'
    and 'sum_logprob' also contribute to a pooled corpus-level perplexity
    (single exp over summed logprobs), reported alongside the per-example
    mean since either convention may be wanted.
    """
    rows = list(rows)
    if not rows:
        raise ValueError("aggregate needs at least one result")
    groups: dict[tuple, list[dict]] = defaultdict(list)
    for row in rows:
        groups[tuple(str(row.get(k, "?")) for k in keys)].append(row)

    def summarize(members: list[dict]) -> dict:
        ppls = [m["ppl"] for m in members]
        out = {
            "count": len(members),
            "mean_ppl": sum(ppls) / len(ppls),
            "median_ppl": median(ppls),
        }
        if all("n_chars" in m and "sum_logprob" in m for m in members):
            chars = sum(m["n_chars"] for m in members)
            lp = sum(m["sum_logprob"] for m in members)
            out["pooled_ppl"] = math.exp(-lp / chars) if chars else float("nan")
        return out

    return {
        "keys": list(keys),
        "groups": {
            "/".join(key): summarize(members)
            for key, members in sorted(groups.items())
        },
        "overall": summarize(rows),
    }


# ---------------------------------------------------------------------------
# Prompt rendering


def render_l2r_prompt(ex) -> str:
    """Suffix, blank line, prefix: the no-sentinel layout for L2R models,
    which then continue with the middle."""
    return f"{ex.suffix}\n\n{ex.prefix}"


def render_fim_prompt(ex: BenchExample,
                      s: SentinelSet = DEFAULT_SENTINELS) -> str:
    """Sentinel PSM prompt; Edit examples get the conflict-merge block."""
    return render_conflict_prompt(ex, s)


def write_prompts(examples: Iterable[BenchExample], out_path: str,
                  style: str = "fim",
                  s: SentinelSet = DEFAULT_SENTINELS) -> int:
    """Emit the prompt side of the scoring exchange; returns the count."""
    if style not in ("fim", "l2r"):
        raise ValueError(f"unknown prompt style {style!r}")
    count = 0
    with open(out_path, "w", encoding="utf-8") as out:
        for ex in examples:
            prompt = render_fim_prompt(ex, s) if style == "fim" \
                else render_l2r_prompt(ex)
            row = {
                "id": ex.example_id, "prompt": prompt, "middle": ex.middle,
                "split": ex.split, "lang": ex.lang,
            }
            out.write(json.dumps(row, ensure_ascii=False,
                                 separators=(",", ":")))
            out.write("\n")
            count += 1
    return count


# ---------------------------------------------------------------------------
# Built-in scorer: add-k smoothed character n-grams


def ngram_score(middle: str, context: str, order: int = 3,
                smoothing: float = 0.5) -> list[TokenScore]:
    """Score the middle one character per token under an n-gram model fit
    on the context.

    Histories are the preceding order-1 characters, seeded from the tail of
    the context (the middle is treated as its continuation); unseen events
    get add-k mass over the combined context+middle alphabet, so log-probs
    are always finite and <= 0.
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    if smoothing <= 0:
        raise ValueError("smoothing must be > 0")
    if not middle:
        raise EmptyMiddle("ngram_score")
    bos = "\x00"
    vocab = set(context) | set(middle)
    v = len(vocab)
    hist_len = order - 1
    counts: dict[str, Counter] = defaultdict(Counter)
    totals: Counter = Counter()
    padded = bos * hist_len + context
    for i in range(hist_len, len(padded)):
        hist = padded[i - hist_len:i]
        ch = padded[i]
        counts[hist][ch] += 1
        totals[hist] += 1
    scores = []
    hist = (bos * hist_len + context)[-hist_len:] if hist_len else ""
    for ch in middle:
        p = (counts[hist][ch] + smoothing) / (totals[hist] + smoothing * v)
        scores.append(TokenScore(ch, min(math.log(p), 0.0)))
        if hist_len:
            hist = (hist + ch)[-hist_len:]
    return scores


# ---------------------------------------------------------------------------
# Scoring exchange IO


def read_prompts(path: str) -> list[dict]:
    rows = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                rows.append(json.loads(line))
    return rows


def score_prompts_file(prompts_path: str, out_path: str, order: int = 3,
                       smoothing: float = 0.5) -> int:
    """Run the built-in n-gram scorer over a prompts file."""
    count = 0
    with open(out_path, "w", encoding="utf-8") as out:
        for row in read_prompts(prompts_path):
            tokens = ngram_score(row["middle"], row["prompt"], order, smoothing)
            out.write(json.dumps(
                {"id": row["id"],
                 "tokens": [{"text": t.text, "logprob": t.logprob}
                            for t in tokens]},
                ensure_ascii=False, separators=(",", ":")))
            out.write("\n")
            count += 1
    return count


def evaluate_files(prompts_path: str, scores_path: str,
                   keys: tuple[str, ...] = ("split", "lang")
                   ) -> tuple[list[dict], dict]:
    """Join prompts with scores by id and compute per-example + aggregate PPL.

    Returns (per_example_rows, aggregate_summary). Prompts without a score
    are reported in the summary as skipped, not fatal.
    """
    prompts = {row["id"]: row for row in read_prompts(prompts_path)}
    per_example: list[dict] = []
    skipped = 0
    with open(scores_path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            row = json.loads(line)
            prompt = prompts.pop(row["id"], None)
            if prompt is None:
                skipped += 1
                continue
            sm = ScoredMiddle.from_middle(
                row["id"], prompt["middle"],
                (TokenScore(t["text"], t["logprob"]) for t in row["tokens"]))
            per_example.append({
                "id": row["id"],
                "split": prompt.get("split", "?"),
                "lang": prompt.get("lang", "?"),
                "ppl": char_ppl(sm),
                "n_chars": sm.middle_char_count,
                "sum_logprob": sm.sum_logprob,
            })
    summary = aggregate(per_example, keys) if per_example else {
        "keys": list(keys), "groups": {}, "overall": {"count": 0}}
    summary["unscored_prompts"] = len(prompts)
    summary["unmatched_scores"] = skipped
    return per_example, summary
