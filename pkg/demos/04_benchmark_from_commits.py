#!/usr/bin/env python3
"""Build Add/Edit infilling examples from a git history.

Creates a throwaway repository with an insertion commit and a replacement
commit, walks it, and renders the two kinds of evaluation prompts: plain
prefix/suffix for Add, and the conflict-merge block for Edit.
"""

import subprocess
import tempfile
from pathlib import Path

from fimkit.benchgen import (build_benchmark, iter_repo_pairs,
                             render_conflict_prompt)

repo = Path(tempfile.mkdtemp(prefix="fimkit-demo-repo-"))


def git(*args):
    subprocess.run(["git", "-C", str(repo), *args], check=True,
                   capture_output=True)


git("init", "-q")
git("config", "user.email", "demo@example.com")
git("config", "user.name", "demo")

f = repo / "shapes.py"
f.write_text("""def area_rect(w, h):
    return w * h
""")
git("add", "-A")
git("commit", "-qm", "initial")

# commit 1: a pure insertion (a new function)
f.write_text("""def area_rect(w, h):
    return w * h

def area_circle(r):
    return 3.14159 * r * r
""")
git("commit", "-qam", "add circle area")

# commit 2: a replacement (better constant)
f.write_text("""def area_rect(w, h):
    return w * h

def area_circle(r):
    import math
    return math.pi * r * r
""")
git("commit", "-qam", "use math.pi")

pairs = list(iter_repo_pairs(str(repo)))
examples, stats = build_benchmark(pairs)
print(f"built {stats.examples} examples from {stats.pairs_seen} modified-file"
      f" pairs: {dict(stats.by_split)}\n")

for ex in examples:
    print("=" * 60)
    print(f"{ex.split} example  ({ex.example_id})")
    print("=" * 60)
    print(render_conflict_prompt(ex))
    print(f"--- ground-truth middle ---\n{ex.middle}")
