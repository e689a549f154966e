"""Grammar-driven tokenizer.

Produces a flat token stream over code-point offsets. Whitespace is skipped,
newlines are kept as control tokens (statement segmentation needs them), and
anything unlexable becomes an ERROR token so downstream error recovery can
flag the tree instead of raising.

The common token classes (whitespace, identifiers, numbers, operators) go
through one master regex per grammar; string forms, comments, and the odd
context-sensitive literals take a slower dispatch path keyed on their first
character.
"""

from __future__ import annotations

import re
from typing import NamedTuple

from .grammar import Grammar

# Token types
NEWLINE = "newline"
COMMENT = "comment"
STRING = "string"
NUMBER = "number"
IDENT = "identifier"
KEYWORD = "keyword"
OP = "op"
REGEX = "regex"
LIFETIME = "lifetime"
PREPROC = "preproc"
ERROR = "error"

NAMED_TOKEN_KINDS = {
    COMMENT: "comment", STRING: "string", NUMBER: "number",
    IDENT: "identifier", REGEX: "regex", LIFETIME: "lifetime",
    PREPROC: "preproc_directive", ERROR: "ERROR",
}


class Token(NamedTuple):
    type: str
    start: int  # code-point offset
    end: int
    text: str


_NUMBER_PATTERN = (
    r"(?:0[xX][0-9a-fA-F_]+|0[bB][01_]+|0[oO][0-7_]+"
    r"|\d[\d_]*(?:\.\d[\d_]*)?(?:[eE][+-]?[\d_]+)?"
    r"|\.\d[\d_]*(?:[eE][+-]?[\d_]+)?)"
    r"[a-zA-Z_]{0,8}"
)
_JS_REGEX_RE = re.compile(
    r"/(?:\\.|\[(?:\\.|[^\]\\\n])*\]|[^/\\\n\[])+/[a-zA-Z]*"
)
_LIFETIME_RE = re.compile(r"'(?:[^\W\d]\w*|_)")
_PHP_OPEN_RE = re.compile(r"<\?(?:php\b|=)?")

_OPERATORS = [
    ">>>=", ">>>", "<<=", ">>=", "**=", "//=", "??=", "...", "..=",
    "===", "!==", "<=>", "->*", "?.", "?:", "::", "->", "=>", "==",
    "!=", "<=", ">=", "&&", "||", "<<", ">>", "++", "--", "+=", "-=",
    "*=", "/=", "%=", "&=", "|=", "^=", "~=", "**", "//", "??", "..",
    ":=", "<-", "|>", "<:", ">:", "+", "-", "*", "/", "%", "=", "<",
    ">", "!", "&", "|", "^", "~", "?", ":", ";", ",", ".", "(", ")",
    "[", "]", "{", "}", "@", "#", "$", "\\", "`", "'", '"',
]
_OP_RE = re.compile("|".join(re.escape(op) for op in _OPERATORS))

# Tokens after which a '/' starts a regex literal rather than division.
_REGEX_ALLOWED_AFTER_OPS = set(_OPERATORS) - {")", "]", "}", "++", "--"}

# Letter prefixes that may glue onto a following quote (r"...", b'...', ...).
_STRING_PREFIX_WORDS = {
    "r", "b", "u", "f", "rb", "br", "rf", "fr", "R", "B", "U", "F",
    "Rb", "bR", "rB", "Br", "L", "u8",
}


class CompiledGrammar:
    """Grammar tables compiled into regex machinery, cached per language."""

    def __init__(self, grammar: Grammar):
        self.grammar = grammar
        self.keywords = grammar.keywords
        self.string_dispatch: dict[str, list[re.Pattern]] = {}
        for rule in grammar.strings:
            pat = re.compile(rule.pattern)
            for ch in rule.dispatch:
                self.string_dispatch.setdefault(ch, []).append(pat)
        self.line_comments = grammar.line_comments
        self.block_open, self.block_close = grammar.block_comment or (None, None)
        self.nested_comments = grammar.nested_comments
        self.newline_terminates = grammar.newline_terminates
        self.regex_literals = grammar.regex_literals
        self.lifetime_literals = grammar.lifetime_literals
        self.preproc = grammar.preproc_directives
        self.php_tags = bool(grammar.extra_dispatch.get("php_tags"))
        self.line_start_block_comment = grammar.line_start_block_comment

        # Characters that need the slow path before the master regex may run.
        special = set(self.string_dispatch) | {"\\"}
        for prefix in grammar.line_comments:
            special.add(prefix[0])
        if self.block_open:
            special.add(self.block_open[0])
        if self.regex_literals:
            special.add("/")
        if self.lifetime_literals:
            special.add("'")
        if self.preproc:
            special.add("#")
        if self.php_tags:
            special.update("<?")
        if self.line_start_block_comment:
            special.add(self.line_start_block_comment[0][0])
        # Letter dispatch chars are handled through the word fast path.
        self.prefix_letters = {c for c in special if c.isalpha()}
        special -= self.prefix_letters
        self.special_chars = special

        ops = "|".join(re.escape(op) for op in _OPERATORS
                       if op[0] not in special)
        self.master = re.compile(
            r"(?P<ws>[ \t\r\f\v]+)"
            r"|(?P<nl>\n)"
            rf"|(?P<word>{grammar.ident_pattern})"
            rf"|(?P<num>{_NUMBER_PATTERN})"
            rf"|(?P<op>{ops})"
        )
        # After a prefix word, these may continue a string literal (the '#'
        # covers hash-delimited raw strings).
        self.quote_chars = {c for c in self.string_dispatch
                            if not c.isalpha()} | {"#"}


_COMPILED: dict[str, CompiledGrammar] = {}


def compile_grammar(grammar: Grammar) -> CompiledGrammar:
    cg = _COMPILED.get(grammar.name)
    if cg is None or cg.grammar is not grammar:
        cg = CompiledGrammar(grammar)
        _COMPILED[grammar.name] = cg
    return cg


def _scan_block_comment(text: str, pos: int, cg: CompiledGrammar) -> tuple[int, bool]:
    """Return (end, terminated) for a block comment starting at pos."""
    op, cl = cg.block_open, cg.block_close
    i = pos + len(op)
    if not cg.nested_comments:
        end = text.find(cl, i)
        if end == -1:
            return len(text), False
        return end + len(cl), True
    depth = 1
    n = len(text)
    while i < n:
        if text.startswith(cl, i):
            depth -= 1
            i += len(cl)
            if depth == 0:
                return i, True
        elif text.startswith(op, i):
            depth += 1
            i += len(op)
        else:
            i += 1
    return n, False


def lex(text: str, grammar: Grammar) -> tuple[list[Token], bool]:
    """Tokenize text; returns (tokens, had_error)."""
    cg = compile_grammar(grammar)
    tokens: list[Token] = []
    append = tokens.append
    had_error = False
    pos = 0
    n = len(text)
    line_start = True  # only whitespace seen since the last newline
    prev_significant: Token | None = None
    master = cg.master
    keywords = cg.keywords
    special_chars = cg.special_chars
    prefix_letters = cg.prefix_letters
    track_prev = cg.regex_literals

    while pos < n:
        ch = text[pos]

        if ch not in special_chars:
            m = master.match(text, pos)
            if m:
                gi = m.lastindex  # 1=ws 2=nl 3=word 4=num 5=op
                end = m.end()
                if gi == 1:
                    pos = end
                    continue
                if gi == 2:
                    append(Token(NEWLINE, pos, end, "\n"))
                    line_start = True
                    pos = end
                    continue
                if gi == 3:
                    word = m.group()
                    if word in prefix_letters or word in _STRING_PREFIX_WORDS:
                        if end < n and text[end] in cg.quote_chars:
                            rules = cg.string_dispatch.get(word[0])
                            if rules:
                                hit = False
                                for pat in rules:
                                    sm = pat.match(text, pos)
                                    if sm and sm.end() > pos:
                                        terminated = sm.group("close") is not None
                                        tok = Token(
                                            STRING if terminated else ERROR,
                                            pos, sm.end(), sm.group())
                                        append(tok)
                                        had_error = had_error or not terminated
                                        pos = sm.end()
                                        hit = True
                                        break
                                if hit:
                                    line_start = False
                                    if track_prev:
                                        prev_significant = tokens[-1]
                                    continue
                    tok = Token(KEYWORD if word in keywords else IDENT,
                                pos, end, word)
                elif gi == 4:
                    tok = Token(NUMBER, pos, end, m.group())
                else:
                    tok = Token(OP, pos, end, m.group())
                append(tok)
                line_start = False
                if track_prev:
                    prev_significant = tok
                pos = end
                continue
            # no master match: unknown character
            append(Token(ERROR, pos, pos + 1, ch))
            had_error = True
            line_start = False
            pos += 1
            continue

        # ---- slow path: strings, comments, context-sensitive tokens ----
        if ch == "\\":
            if text.startswith("\n", pos + 1):
                pos += 2  # explicit line continuation
                continue
            if text.startswith("\r\n", pos + 1):
                pos += 3
                continue
            append(Token(OP, pos, pos + 1, ch))
            line_start = False
            pos += 1
            continue

        if cg.php_tags and ch == "<":
            m = _PHP_OPEN_RE.match(text, pos)
            if m:
                append(Token(OP, pos, m.end(), m.group()))
                line_start = False
                pos = m.end()
                continue
        if cg.php_tags and ch == "?" and text.startswith("?>", pos):
            append(Token(OP, pos, pos + 2, "?>"))
            line_start = False
            pos += 2
            continue

        if cg.preproc and ch == "#" and line_start:
            end = pos
            while True:
                eol = text.find("\n", end)
                if eol == -1:
                    end = n
                    break
                if eol > pos and text[eol - 1] == "\\":
                    end = eol + 1  # directive continues past the backslash
                    continue
                end = eol
                break
            append(Token(PREPROC, pos, end, text[pos:end]))
            line_start = False
            pos = end
            continue

        if cg.line_start_block_comment and line_start:
            open_mark, close_mark = cg.line_start_block_comment
            if text.startswith(open_mark, pos):
                idx = text.find("\n" + close_mark, pos)
                if idx == -1:
                    end = n
                else:
                    eol = text.find("\n", idx + 1)
                    end = n if eol == -1 else eol
                append(Token(COMMENT, pos, end, text[pos:end]))
                pos = end
                continue

        matched = False
        for prefix in cg.line_comments:
            if text.startswith(prefix, pos):
                eol = text.find("\n", pos)
                end = n if eol == -1 else eol
                append(Token(COMMENT, pos, end, text[pos:end]))
                line_start = False
                pos = end
                matched = True
                break
        if matched:
            continue

        if cg.block_open and text.startswith(cg.block_open, pos):
            end, terminated = _scan_block_comment(text, pos, cg)
            append(Token(COMMENT if terminated else ERROR,
                         pos, end, text[pos:end]))
            had_error = had_error or not terminated
            line_start = False
            pos = end
            continue

        rules = cg.string_dispatch.get(ch)
        if rules:
            for pat in rules:
                m = pat.match(text, pos)
                if m and m.end() > pos:
                    terminated = m.group("close") is not None
                    tok = Token(STRING if terminated else ERROR,
                                pos, m.end(), m.group())
                    append(tok)
                    had_error = had_error or not terminated
                    line_start = False
                    if track_prev:
                        prev_significant = tok
                    pos = m.end()
                    matched = True
                    break
            if matched:
                continue

        if cg.regex_literals and ch == "/":
            prev = prev_significant
            allowed = prev is None or prev.type == KEYWORD or (
                prev.type == OP and prev.text in _REGEX_ALLOWED_AFTER_OPS)
            if allowed:
                m = _JS_REGEX_RE.match(text, pos)
                if m:
                    tok = Token(REGEX, pos, m.end(), m.group())
                    append(tok)
                    prev_significant = tok
                    line_start = False
                    pos = m.end()
                    continue

        if cg.lifetime_literals and ch == "'":
            m = _LIFETIME_RE.match(text, pos)
            if m:
                tok = Token(LIFETIME, pos, m.end(), m.group())
                append(tok)
                line_start = False
                pos = m.end()
                continue

        m = _OP_RE.match(text, pos)
        if m:
            tok = Token(OP, pos, m.end(), m.group())
            append(tok)
            line_start = False
            if track_prev:
                prev_significant = tok
            pos = m.end()
            continue

        append(Token(ERROR, pos, pos + 1, ch))
        had_error = True
        line_start = False
        pos += 1

    return tokens, had_error
