#!/usr/bin/env python3
"""Score ground-truth middles with character-level perplexity.

The scoring exchange is file-based: prompts JSONL out, token log-probs
JSONL back. Here the built-in character n-gram model plays the part of the
external scorer, so the whole loop runs with no ML stack; any real model
harness that writes {id, tokens:[{text, logprob}]} rows plugs in the same
way.
"""

import math
import tempfile
from pathlib import Path

from fimkit.benchgen import BenchExample
from fimkit.evalkit import (ScoredMiddle, TokenScore, char_ppl,
                            evaluate_files, ngram_score, render_l2r_prompt,
                            score_prompts_file, write_prompts)

print("closed-form sanity checks:")
sm = ScoredMiddle.from_middle("demo", "ab", [TokenScore("ab", math.log(0.5))])
print(f"  middle 'ab', one token with p=0.5 -> ppl {char_ppl(sm):.5f} "
      f"(= sqrt(2))")
sm = ScoredMiddle.from_middle("demo", "abc", [TokenScore("abc", 0.0)])
print(f"  perfectly predicted middle       -> ppl {char_ppl(sm):.5f}")

examples = [
    BenchExample("Add",
                 prefix="def mean(xs):\n    total = sum(xs)\n",
                 middle="    return total / len(xs)\n",
                 suffix="\nprint(mean([1, 2, 3]))\n",
                 repo="demo", sha="a1", path="stats.py", lang="python"),
    BenchExample("Edit",
                 prefix="def hypot(a, b):\n",
                 middle="    return (a * a + b * b) ** 0.5\n",
                 suffix="",
                 original="    return a + b\n",
                 repo="demo", sha="b2", path="geom.py", lang="python"),
]

tmp = Path(tempfile.mkdtemp(prefix="fimkit-demo-eval-"))
prompts = tmp / "prompts.jsonl"
scores = tmp / "scores.jsonl"

write_prompts(examples, str(prompts), style="fim")
score_prompts_file(str(prompts), str(scores), order=4, smoothing=0.3)
per_example, summary = evaluate_files(str(prompts), str(scores))

print("\nper-example character-level perplexity (n-gram stand-in scorer):")
for row in per_example:
    print(f"  {row['id']:24s} {row['split']:4s} ppl={row['ppl']:8.3f} "
          f"chars={row['n_chars']}")
print("\ngrouped summary:")
for name, cell in summary["groups"].items():
    print(f"  {name:16s} mean={cell['mean_ppl']:8.3f} "
          f"pooled={cell['pooled_ppl']:8.3f} n={cell['count']}")

print("\nprompt layout for models without sentinel tokens (suffix, blank")
print("line, prefix; the model continues with the middle):")
print("-" * 50)
print(render_l2r_prompt(examples[0]))
print("-" * 50)

print("\nrepetition helps an n-gram, as it should:")
ctx = "for i in range(10):\n    print(i)\n" * 10
familiar = ngram_score("    print(42)\n", ctx, order=4)
alien = ngram_score("zzqq##!!~~", ctx, order=4)
ppl = lambda ts: math.exp(-sum(t.logprob for t in ts) / len(ts))
print(f"  familiar middle ppl: {ppl(familiar):8.2f}")
print(f"  alien middle ppl:    {ppl(alien):8.2f}")
