"""Declarative grammars and the language registry.

Each supported language is described by a Grammar: token-level rules
(comments, string forms, identifier shape) plus structure-level tables
(keywords, statement kinds, block style). The generic lexer and CST builder
consume these tables, so adding a language means adding a table, not code.

The registry maps language ids to grammars and file extensions to language
ids; both are mutable at runtime for callers that bring their own grammars.
"""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class StringRule:
    """One string-literal form.

    dispatch: characters that can begin the literal.
    pattern:  regex tried at the current position; it must always consume
              something when the literal form applies, and must define a
              group named 'close' that participates iff the literal is
              terminated (unterminated literals become ERROR tokens).
    """

    dispatch: str
    pattern: str


@dataclass(frozen=True)
class Grammar:
    name: str
    root_kind: str
    block_style: str  # "braces" | "indent" | "end"
    keywords: frozenset[str]
    statement_kinds: dict[str, str]
    strings: tuple[StringRule, ...]
    line_comments: tuple[str, ...] = ()
    block_comment: tuple[str, str] | None = None
    nested_comments: bool = False
    ident_pattern: str = r"[^\W\d]\w*"
    newline_terminates: bool = False
    regex_literals: bool = False
    lifetime_literals: bool = False
    preproc_directives: bool = False
    line_start_block_comment: tuple[str, str] | None = None
    block_openers: frozenset[str] = frozenset()
    extra_dispatch: dict = field(default_factory=dict)


# Keyword roles shared across grammars; they apply only where the word is
# actually a keyword of the language at hand.
MODIFIER_KEYWORDS = frozenset({
    "public", "private", "protected", "internal", "final", "abstract",
    "override", "virtual", "sealed", "export", "static", "async", "extern",
    "unsafe", "pub", "inline", "constexpr", "open", "data", "lazy",
    "implicit", "default", "declare", "readonly", "suspend", "lateinit",
    "companion", "explicit", "friend", "mutable", "native", "strictfp",
    "synchronized", "transient", "volatile", "given",
})

KEYWORD_OPERANDS = frozenset({
    "true", "false", "null", "nil", "None", "True", "False", "this", "self",
    "super", "undefined", "Self", "nullptr", "iota", "base",
})

KEYWORD_PREFIX_OPS = frozenset({
    "new", "not", "await", "typeof", "delete", "sizeof", "move", "clone",
    "echo", "print", "defined?", "ref", "out", "mut", "dyn",
})

KEYWORD_BINARY_OPS = frozenset({
    "in", "is", "and", "or", "as", "instanceof", "of", "xor", "insteadof",
    "where", "extends", "implements", "with", "keyof", "satisfies", "then",
})

CONTINUATION_KEYWORDS = frozenset({
    "else", "catch", "finally", "while", "elif", "elsif", "except",
    "rescue", "ensure", "when", "until",
})

_BASE_STATEMENT_KINDS = {
    "if": "if_statement", "unless": "if_statement", "elif": "elif_clause",
    "elsif": "elsif_clause", "else": "else_clause",
    "for": "for_statement", "foreach": "for_statement",
    "while": "while_statement", "until": "while_statement",
    "loop": "loop_statement", "do": "do_statement",
    "switch": "switch_statement", "match": "match_statement",
    "when": "when_clause", "case": "case_clause",
    "select": "switch_statement",
    "return": "return_statement", "break": "break_statement",
    "continue": "continue_statement", "next": "continue_statement",
    "yield": "yield_statement", "throw": "throw_statement",
    "raise": "raise_statement", "defer": "defer_statement",
    "go": "go_statement", "goto": "goto_statement",
    "pass": "pass_statement", "assert": "assert_statement",
    "del": "delete_statement",
    "try": "try_statement", "begin": "try_statement",
    "catch": "catch_clause", "except": "except_clause",
    "finally": "finally_clause", "rescue": "rescue_clause",
    "ensure": "ensure_clause", "with": "with_statement",
    "using": "using_statement", "lock": "lock_statement",
    "import": "import_statement", "from": "import_statement",
    "include": "import_statement", "require": "import_statement",
    "require_once": "import_statement", "include_once": "import_statement",
    "use": "use_declaration", "package": "package_declaration",
    "namespace": "namespace_declaration", "module": "module_declaration",
    "mod": "module_declaration",
    "def": "function_definition", "fn": "function_definition",
    "func": "function_definition", "fun": "function_definition",
    "function": "function_definition",
    "class": "class_definition", "record": "class_definition",
    "struct": "struct_definition", "union": "struct_definition",
    "enum": "enum_definition", "interface": "interface_definition",
    "trait": "trait_definition", "impl": "impl_block",
    "object": "object_definition",
    "type": "type_declaration", "typedef": "type_declaration",
    "typealias": "type_declaration", "typename": "type_declaration",
    "let": "variable_declaration", "var": "variable_declaration",
    "val": "variable_declaration", "const": "variable_declaration",
    "global": "global_statement", "nonlocal": "global_statement",
    "delegate": "type_declaration", "event": "variable_declaration",
    "init": "function_definition", "constructor": "function_definition",
    "lambda": "lambda_expression", "template": "template_declaration",
    "operator": "function_definition", "given": "given_definition",
    "extension": "extension_definition", "declare": "declare_statement",
    "alias": "alias_statement", "undef": "undef_statement",
}


def _kinds(*extra: tuple[str, str]) -> dict[str, str]:
    table = dict(_BASE_STATEMENT_KINDS)
    table.update(extra)
    return table


# String-form builders. All patterns define group 'close' iff terminated.
def _line_string(quote: str, prefixes: str = "") -> StringRule:
    pre = f"[{prefixes}]{{0,3}}" if prefixes else ""
    q = quote
    pat = rf'{pre}{q}(?:(?s:\\.)|[^{q}\\\n])*(?:(?P<close>{q})|(?=\n)|\Z)'
    dispatch = quote + prefixes + prefixes.upper() if prefixes else quote
    return StringRule(dispatch, pat)


def _multiline_string(quote: str, prefixes: str = "") -> StringRule:
    pre = f"[{prefixes}]{{0,3}}" if prefixes else ""
    q = quote
    pat = rf'{pre}{q}(?:(?s:\\.)|[^{q}\\])*(?:(?P<close>{q})|\Z)'
    dispatch = quote + prefixes + prefixes.upper() if prefixes else quote
    return StringRule(dispatch, pat)


def _triple_string(quote: str, prefixes: str = "") -> StringRule:
    pre = f"[{prefixes}]{{0,3}}" if prefixes else ""
    q3 = quote * 3
    pat = rf'(?s){pre}{q3}.*?(?:(?P<close>{q3})|\Z)'
    dispatch = quote + prefixes + prefixes.upper() if prefixes else quote
    return StringRule(dispatch, pat)


_PY_PREFIX = "rbufRBUF"
_PY_STRINGS = (
    StringRule("'\"" + _PY_PREFIX,
               rf'(?s)[{_PY_PREFIX}]{{0,3}}"""(?:\\.|.)*?(?:(?P<close>""")|\Z)'),
    StringRule("'\"" + _PY_PREFIX,
               rf"(?s)[{_PY_PREFIX}]{{0,3}}'''(?:\\.|.)*?(?:(?P<close>''')|\Z)"),
    StringRule("'\"" + _PY_PREFIX,
               rf'[{_PY_PREFIX}]{{0,3}}"(?:(?s:\\.)|[^"\\\n])*(?:(?P<close>")|(?=\n)|\Z)'),
    StringRule("'\"" + _PY_PREFIX,
               rf"[{_PY_PREFIX}]{{0,3}}'(?:(?s:\\.)|[^'\\\n])*(?:(?P<close>')|(?=\n)|\Z)"),
)

_RUST_STRINGS = (
    StringRule("rb", r'(?s)b?r(#*)".*?(?:(?P<close>"\1)|\Z)'),
    StringRule('b"', r'b?"(?:(?s:\\.)|[^"\\])*(?:(?P<close>")|\Z)'),
    StringRule("b'", r"b?'(?:\\(?:u\{[0-9a-fA-F_]{1,6}\}|x[0-9a-fA-F]{2}|.)|[^'\\])(?P<close>')"),
)

_C_STRINGS = (
    StringRule("R", r'(?s)R"([^()\\\s]{0,16})\(.*?(?:(?P<close>\)\1")|\Z)'),
    StringRule('"uUL', _line_string('"').pattern),
    StringRule("'uUL", r"'(?:(?s:\\.)|[^'\\\n]){1,10}(?:(?P<close>')|(?=\n)|\Z)"),
)

_CSHARP_STRINGS = (
    StringRule("@$", r'(?s)(?:@\$?|\$@)"(?:""|[^"])*(?:(?P<close>")|\Z)'),
    StringRule('"$', r'\$?"(?:(?s:\\.)|[^"\\\n])*(?:(?P<close>")|(?=\n)|\Z)'),
    StringRule("'", r"'(?:(?s:\\.)|[^'\\\n]){1,10}(?:(?P<close>')|(?=\n)|\Z)"),
)

_JS_STRINGS = (
    _line_string('"'),
    _line_string("'"),
    _multiline_string("`"),
)

PYTHON = Grammar(
    name="python", root_kind="module", block_style="indent",
    keywords=frozenset("""False None True and as assert async await break
        class continue def del elif else except finally for from global if
        import in is lambda nonlocal not or pass raise return try while with
        yield""".split()),
    statement_kinds=_kinds(("class", "class_definition")),
    strings=_PY_STRINGS,
    line_comments=("#",),
)

JAVASCRIPT = Grammar(
    name="javascript", root_kind="program", block_style="braces",
    keywords=frozenset("""break case catch class const continue debugger
        default delete do else export extends finally for function if import
        in instanceof let new of return static super switch this throw try
        typeof var void while with yield async await null true false
        undefined""".split()),
    statement_kinds=_kinds(("export", "export_statement")),
    strings=_JS_STRINGS,
    line_comments=("//",), block_comment=("/*", "*/"),
    ident_pattern=r"(?:[^\W\d]|\$)(?:\w|\$)*",
    newline_terminates=True, regex_literals=True,
)

TYPESCRIPT = Grammar(
    name="typescript", root_kind="program", block_style="braces",
    keywords=JAVASCRIPT.keywords | frozenset("""interface type enum namespace
        declare readonly private public protected implements abstract is
        keyof infer satisfies""".split()),
    statement_kinds=_kinds(("export", "export_statement"),
                           ("declare", "declare_statement")),
    strings=_JS_STRINGS,
    line_comments=("//",), block_comment=("/*", "*/"),
    ident_pattern=r"(?:[^\W\d]|\$)(?:\w|\$)*",
    newline_terminates=True, regex_literals=True,
)

GO = Grammar(
    name="go", root_kind="source_file", block_style="braces",
    keywords=frozenset("""break case chan const continue default defer else
        fallthrough for func go goto if import interface map package range
        return select struct switch type var nil true false iota""".split()),
    statement_kinds=_kinds(),
    strings=(
        _line_string('"'),
        StringRule("`", r'`[^`]*(?:(?P<close>`)|\Z)'),
        StringRule("'", r"'(?:(?s:\\.)|[^'\\\n]){1,10}(?:(?P<close>')|(?=\n)|\Z)"),
    ),
    line_comments=("//",), block_comment=("/*", "*/"),
    newline_terminates=True,
)

RUST = Grammar(
    name="rust", root_kind="source_file", block_style="braces",
    keywords=frozenset("""as async await break const continue crate dyn else
        enum extern false fn for if impl in let loop match mod move mut pub
        ref return self Self static struct super trait true type unsafe union
        use where while""".split()),
    statement_kinds=_kinds(("static", "variable_declaration")),
    strings=_RUST_STRINGS,
    line_comments=("//",), block_comment=("/*", "*/"), nested_comments=True,
    lifetime_literals=True,
)

JAVA = Grammar(
    name="java", root_kind="program", block_style="braces",
    keywords=frozenset("""abstract assert boolean break byte case catch char
        class const continue default do double else enum extends final
        finally float for goto if implements import instanceof int interface
        long native new package private protected public record return short
        static strictfp super switch synchronized this throw throws transient
        try var void volatile while true false null yield sealed
        permits""".split()),
    statement_kinds=_kinds(),
    strings=(
        _triple_string('"'),
        _line_string('"'),
        StringRule("'", r"'(?:(?s:\\.)|[^'\\\n]){1,10}(?:(?P<close>')|(?=\n)|\Z)"),
    ),
    line_comments=("//",), block_comment=("/*", "*/"),
)

CPP = Grammar(
    name="cpp", root_kind="translation_unit", block_style="braces",
    keywords=frozenset("""alignas alignof auto bool break case catch char
        class concept const consteval constexpr constinit const_cast continue
        decltype default delete do double dynamic_cast else enum explicit
        export extern false float for friend goto if inline int long mutable
        namespace new noexcept nullptr operator private protected public
        register reinterpret_cast requires return short signed sizeof static
        static_cast struct switch template this thread_local throw true try
        typedef typeid typename union unsigned using virtual void volatile
        wchar_t while""".split()),
    statement_kinds=_kinds(),
    strings=_C_STRINGS,
    line_comments=("//",), block_comment=("/*", "*/"),
    preproc_directives=True,
)

C = Grammar(
    name="c", root_kind="translation_unit", block_style="braces",
    keywords=frozenset("""auto break case char const continue default do
        double else enum extern float for goto if inline int long register
        restrict return short signed sizeof static struct switch typedef
        union unsigned void volatile while _Bool""".split()),
    statement_kinds=_kinds(),
    strings=_C_STRINGS,
    line_comments=("//",), block_comment=("/*", "*/"),
    preproc_directives=True,
)

CSHARP = Grammar(
    name="csharp", root_kind="compilation_unit", block_style="braces",
    keywords=frozenset("""abstract as base bool break byte case catch char
        checked class const continue decimal default delegate do double else
        enum event explicit extern false finally fixed float for foreach goto
        if implicit in int interface internal is lock long namespace new null
        object operator out override params private protected public readonly
        record ref return sbyte sealed short sizeof stackalloc static string
        struct switch this throw true try typeof uint ulong unchecked unsafe
        ushort using var virtual void volatile while async await
        when""".split()),
    statement_kinds=_kinds(),
    strings=_CSHARP_STRINGS,
    line_comments=("//",), block_comment=("/*", "*/"),
)

RUBY = Grammar(
    name="ruby", root_kind="program", block_style="end",
    keywords=frozenset("""BEGIN END alias and begin break case class def
        defined? do else elsif end ensure false for if in module next nil not
        or redo rescue retry return self super then true undef unless until
        when while yield""".split()),
    statement_kinds=_kinds(("case", "switch_statement"),
                           ("module", "module_definition")),
    strings=(
        _multiline_string('"'),
        _multiline_string("'"),
    ),
    ident_pattern=r"[^\W\d]\w*[?!]?",
    line_comments=("#",),
    line_start_block_comment=("=begin", "=end"),
    newline_terminates=True,
    block_openers=frozenset("""def class module if unless while until case
        begin for do""".split()),
)

KOTLIN = Grammar(
    name="kotlin", root_kind="source_file", block_style="braces",
    keywords=frozenset("""as break class continue do else false for fun if in
        interface is null object package return super this throw true try
        typealias val var when while by catch constructor finally import init
        companion data open override private public internal protected
        abstract final enum lateinit suspend sealed out reified
        where""".split()),
    statement_kinds=_kinds(("when", "when_expression")),
    strings=(
        _triple_string('"'),
        _line_string('"'),
        StringRule("'", r"'(?:(?s:\\.)|[^'\\\n]){1,10}(?:(?P<close>')|(?=\n)|\Z)"),
        StringRule("`", r"`[^`\n]*(?:(?P<close>`)|(?=\n)|\Z)"),
    ),
    line_comments=("//",), block_comment=("/*", "*/"), nested_comments=True,
    newline_terminates=True,
)

PHP = Grammar(
    name="php", root_kind="program", block_style="braces",
    keywords=frozenset("""abstract and array as break callable case catch
        class clone const continue declare default do echo else elseif enum
        extends final finally fn for foreach function global goto if
        implements include include_once instanceof insteadof interface match
        namespace new or print private protected public readonly require
        require_once return static switch throw trait try unset use var while
        xor yield true false null""".split()),
    statement_kinds=_kinds(("echo", "echo_statement"),
                           ("print", "echo_statement")),
    strings=(
        _multiline_string('"'),
        _multiline_string("'"),
    ),
    line_comments=("//", "#"), block_comment=("/*", "*/"),
    extra_dispatch={"php_tags": True},
)

SCALA = Grammar(
    name="scala", root_kind="compilation_unit", block_style="braces",
    keywords=frozenset("""abstract case catch class def do else extends false
        final finally for forSome given if implicit import lazy match new
        null object override package private protected return sealed super
        then this throw trait true try type using val var while with
        yield""".split()),
    statement_kinds=_kinds(("object", "object_definition")),
    strings=(
        _triple_string('"'),
        _line_string('"'),
        StringRule("'", r"'(?:(?s:\\.)|[^'\\\n]){1,10}(?:(?P<close>')|(?=\n)|\Z)"),
        StringRule("`", r"`[^`\n]*(?:(?P<close>`)|(?=\n)|\Z)"),
    ),
    line_comments=("//",), block_comment=("/*", "*/"), nested_comments=True,
    newline_terminates=True,
)

# Language ids for natural-language documents; these are valid ids with no
# grammar, and the generation pipeline keeps them L2R-only.
NATURAL_LANGUAGE_IDS = frozenset({"text", "markdown"})

_REGISTRY: dict[str, Grammar] = {
    g.name: g
    for g in (PYTHON, JAVASCRIPT, TYPESCRIPT, GO, RUST, JAVA, CPP, C,
              CSHARP, RUBY, KOTLIN, PHP, SCALA)
}

EXTENSION_TABLE: dict[str, str] = {
    ".py": "python", ".pyi": "python",
    ".js": "javascript", ".jsx": "javascript", ".mjs": "javascript",
    ".ts": "typescript", ".tsx": "typescript",
    ".go": "go",
    ".rs": "rust",
    ".java": "java",
    ".cpp": "cpp", ".cc": "cpp", ".cxx": "cpp", ".hpp": "cpp", ".hh": "cpp",
    ".c": "c", ".h": "c",
    ".cs": "csharp",
    ".rb": "ruby",
    ".kt": "kotlin", ".kts": "kotlin",
    ".php": "php",
    ".scala": "scala", ".sc": "scala",
    ".txt": "text", ".md": "markdown", ".markdown": "markdown",
    ".rst": "text",
}


def get_grammar(lang: str) -> Grammar | None:
    return _REGISTRY.get(lang)


def supported_languages() -> list[str]:
    return sorted(_REGISTRY)


def is_supported(lang: str) -> bool:
    return lang in _REGISTRY


def register_grammar(grammar: Grammar, extensions: tuple[str, ...] = ()) -> None:
    _REGISTRY[grammar.name] = grammar
    for ext in extensions:
        EXTENSION_TABLE[ext] = grammar.name


def language_for_path(path: str, table: dict[str, str] | None = None) -> str:
    """Resolve a language id from a file extension; unknown stays unknown."""
    table = table if table is not None else EXTENSION_TABLE
    dot = path.rfind(".")
    if dot == -1:
        return "unknown"
    return table.get(path[dot:].lower(), "unknown")
