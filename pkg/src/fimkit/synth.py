"""Deterministic synthetic source corpora.

Generates small, varied, syntactically valid files in several languages;
used for fixture corpora in tests, demo scripts, and throughput runs.
Content is a pure function of (lang, seed), so corpora are reproducible.
"""

from __future__ import annotations

import os

from .rng import Rng

_PY_FUNCS = [
    '''def {name}(a, b):
    total = a * {k} + b
    if total > {m}:
        return total - {j}
    items = [a, b, total, {k}]
    for item in items:
        total = total + item % {m}
    return total
''',
    '''def {name}(values):
    """Sum scaled values above {m}."""
    out = []
    for v in values:
        scaled = v * {k} + {j}
        if scaled > {m}:
            out.append(scaled)
    return sum(out)
''',
    '''class Shape{k}:
    def __init__(self, width, height):
        self.width = width
        self.height = height

    def area(self):
        # scaled by {j}
        return self.width * self.height * {j}
''',
    '''def {name}(text):
    parts = text.split(",")
    counts = {{}}
    for part in parts:
        key = part.strip()
        counts[key] = counts.get(key, 0) + {k}
    return counts
''',
]

_JS_FUNCS = [
    '''function {name}(a, b) {{
  let total = a * {k} + b;
  if (total > {m}) {{
    return total - {j};
  }}
  const items = [a, b, total];
  return items.length + total;
}}
''',
    '''const {name} = (values) => {{
  const out = values.filter((v) => v * {k} > {m});
  return out.map((v) => v + {j});
}};
''',
    '''class Shape{k} {{
  constructor(width, height) {{
    this.width = width;
    this.height = height;
  }}
  area() {{
    return this.width * this.height * {j};
  }}
}}
''',
]

_GO_FUNCS = [
    '''func {Name}(a int, b int) int {{
	total := a*{k} + b
	if total > {m} {{
		return total - {j}
	}}
	items := []int{{a, b, total}}
	for _, item := range items {{
		total += item
	}}
	return total
}}
''',
    '''func {Name}(values []int) int {{
	out := 0
	for i, v := range values {{
		if v*{k} > {m} {{
			out += v + i + {j}
		}}
	}}
	return out
}}
''',
]

_RUST_FUNCS = [
    '''fn {name}(a: i64, b: i64) -> i64 {{
    let total = a * {k} + b;
    if total > {m} {{
        return total - {j};
    }}
    let items = vec![a, b, total];
    total + items.len() as i64
}}
''',
    '''fn {name}(values: &[i64]) -> i64 {{
    let mut out = 0;
    for v in values {{
        if v * {k} > {m} {{
            out += v + {j};
        }}
    }}
    out
}}
''',
]

_JAVA_METHODS = [
    '''    public static int {name}(int a, int b) {{
        int total = a * {k} + b;
        if (total > {m}) {{
            return total - {j};
        }}
        return total + {k};
    }}
''',
    '''    public static int {name}(int[] values) {{
        int out = 0;
        for (int v : values) {{
            if (v * {k} > {m}) {{
                out += v + {j};
            }}
        }}
        return out;
    }}
''',
]

_RUBY_FUNCS = [
    '''def {name}(a, b)
  total = a * {k} + b
  if total > {m}
    return total - {j}
  end
  items = [a, b, total]
  items.each do |item|
    total += item
  end
  total
end
''',
    '''def {name}(values)
  out = []
  values.each do |v|
    scaled = v * {k} + {j}
    out << scaled if scaled > {m}
  end
  out.sum
end
''',
]

_COMMENT = {"python": "#", "ruby": "#", "javascript": "//", "go": "//",
            "rust": "//", "java": "//"}

EXTENSIONS = {"python": ".py", "javascript": ".js", "go": ".go",
              "rust": ".rs", "java": ".java", "ruby": ".rb"}

LANGUAGES = tuple(EXTENSIONS)


def synth_file(lang: str, seed: int, n_blocks: int = 6) -> str:
    """One synthetic source file; valid under the language's grammar."""
    rng = Rng(seed, f"synth:{lang}")
    parts: list[str] = []
    comment = _COMMENT[lang]
    parts.append(f"{comment} generated fixture {seed}\n")
    if lang == "go":
        parts.append(f"package fixtures{seed % 97}\n\n")
    body: list[str] = []
    for b in range(n_blocks):
        sub = {
            "name": f"block{seed % 1000}_{b}",
            "Name": f"Block{seed % 1000}_{b}",
            "k": rng.randrange(9) + 2,
            "m": rng.randrange(90) + 10,
            "j": rng.randrange(7) + 1,
        }
        if lang == "python":
            tpl = _PY_FUNCS[rng.randrange(len(_PY_FUNCS))]
        elif lang == "javascript":
            tpl = _JS_FUNCS[rng.randrange(len(_JS_FUNCS))]
        elif lang == "go":
            tpl = _GO_FUNCS[rng.randrange(len(_GO_FUNCS))]
        elif lang == "rust":
            tpl = _RUST_FUNCS[rng.randrange(len(_RUST_FUNCS))]
        elif lang == "java":
            tpl = _JAVA_METHODS[rng.randrange(len(_JAVA_METHODS))]
        elif lang == "ruby":
            tpl = _RUBY_FUNCS[rng.randrange(len(_RUBY_FUNCS))]
        else:
            raise ValueError(f"no templates for language {lang!r}")
        body.append(tpl.format(**sub))
    if lang == "java":
        parts.append(f"public class Fixture{seed % 1000} {{\n")
        parts.extend(body)
        parts.append("}\n")
    else:
        parts.append("\n".join(body))
    return "".join(parts)


def synth_corpus(root: str, files_per_lang: int, seed: int = 0,
                 langs: tuple[str, ...] = LANGUAGES,
                 n_blocks: int = 6) -> int:
    """Write a corpus tree under root; returns total bytes written."""
    total = 0
    for lang in langs:
        ext = EXTENSIONS[lang]
        lang_dir = os.path.join(root, lang)
        os.makedirs(lang_dir, exist_ok=True)
        for i in range(files_per_lang):
            content = synth_file(lang, seed * 1_000_003 + i, n_blocks)
            path = os.path.join(lang_dir, f"file_{i:05d}{ext}")
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(content)
            total += len(content)
    return total
