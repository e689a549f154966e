"""Generic CST builder over the grammar-driven token stream.

Strategy: lex, group brackets, segment statements per the grammar's block
style (braces / indentation / keyword..end), then structure each statement
with a precedence-climbing expression pass. Anything that cannot be
structured is kept as a flat anonymous child, so the tree always tiles the
token stream in document order and spans always nest. Recovery artifacts
(unclosed brackets, stray closers, unterminated literals, bad indentation)
become ERROR nodes rather than exceptions.
"""

from __future__ import annotations

from .grammar import (Grammar, CONTINUATION_KEYWORDS, KEYWORD_BINARY_OPS,
                      KEYWORD_OPERANDS, KEYWORD_PREFIX_OPS, MODIFIER_KEYWORDS)
from .lexer import (COMMENT, ERROR, IDENT, KEYWORD, LIFETIME,
                    NAMED_TOKEN_KINDS, NEWLINE, NUMBER, OP, PREPROC, REGEX,
                    STRING, Token, lex)
from .tree import CharSpan, SourceDocument, SyntaxNode, SyntaxTree

_OPERAND_TOKEN_TYPES = (IDENT, NUMBER, STRING, REGEX, LIFETIME, ERROR)

_OPEN_TO_CLOSE = {"(": ")", "[": "]", "{": "}"}
_CLOSERS = {")", "]", "}"}

_ASSIGN_OPS = {"=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<=",
               ">>=", ">>>=", "**=", "//=", "??=", ":=", "~=", "<-"}
_BINARY_PREC = {
    "->": 105, "**": 100,
    "*": 95, "/": 95, "%": 95, "//": 95,
    "+": 90, "-": 90,
    "<<": 80, ">>": 80, ">>>": 80,
    "&": 70, "^": 65, "|": 60,
    "==": 50, "!=": 50, "===": 50, "!==": 50, "<": 50, ">": 50,
    "<=": 50, ">=": 50, "<=>": 50, "<:": 50, ">:": 50,
    "&&": 40, "||": 35, "??": 35,
    "..": 30, "..=": 30, "|>": 30,
    "?": 25,
}
_ASSIGN_PREC = 10
_KEYWORD_BINARY_PREC = 45
_MEMBER_OPS = {".", "?.", "::", "->", "->*"}
_UNARY_OPS = {"+", "-", "!", "~", "*", "&", "++", "--", "..."}
_STMT_KW_OPERANDS = frozenset({
    "return", "break", "continue", "pass", "yield", "true", "false", "nil",
    "null", "this", "self", "undefined", "None", "True", "False", "end",
})
_NEWLINE_CONTINUATION_OPS = {".", "?.", "&&", "||", "=>", "?"}
_RUBY_CONTINUE_OPS = {"+", "-", "*", "/", "%", "**", "&&", "||", ",", ".",
                      "::", "=", "==", "<", ">", "<=", ">=", "=>", "->",
                      "|", "&", "?", "<<", "(", "["}
_MAX_DEPTH = 300


class Group:
    """A bracketed run of atoms; close is None when recovery kicked in."""

    __slots__ = ("open", "atoms", "close")

    def __init__(self, open_tok: Token, atoms: list, close_tok: Token | None):
        self.open = open_tok
        self.atoms = atoms
        self.close = close_tok


def _mk(kind: str, children: list[SyntaxNode]) -> SyntaxNode:
    return SyntaxNode(kind, True,
                      CharSpan(children[0].span[0], children[-1].span[1]),
                      children)


def _group_brackets(tokens: list[Token]) -> list:
    frames: list[list] = [[]]
    opens: list[Token] = []
    for tok in tokens:
        if tok.type == OP and tok.text in _OPEN_TO_CLOSE:
            opens.append(tok)
            frames.append([])
        elif tok.type == OP and tok.text in _CLOSERS:
            if opens and _OPEN_TO_CLOSE[opens[-1].text] == tok.text:
                atoms = frames.pop()
                frames[-1].append(Group(opens.pop(), atoms, tok))
            else:
                frames[-1].append(tok._replace(type=ERROR))  # stray closer
        else:
            frames[-1].append(tok)
    while opens:
        atoms = frames.pop()
        frames[-1].append(Group(opens.pop(), atoms, None))
    return frames[0]


def _is_newline(atom) -> bool:
    return isinstance(atom, Token) and atom.type == NEWLINE


def _atom_end(a) -> int:
    if a.__class__ is Token:
        return a.end
    if a.close is not None:
        return a.close.end
    if a.atoms:
        return _atom_end(a.atoms[-1])
    return a.open.end


def _is_op(atom, text: str) -> bool:
    return isinstance(atom, Token) and atom.type == OP and atom.text == text


def _next_significant(atoms: list, i: int):
    for j in range(i, len(atoms)):
        a = atoms[j]
        if not (_is_newline(a) or (isinstance(a, Token) and a.type == COMMENT)):
            return a
    return None


class _Builder:
    def __init__(self, grammar: Grammar):
        self.g = grammar
        self.kw_operands = KEYWORD_OPERANDS & grammar.keywords
        self.kw_prefix = KEYWORD_PREFIX_OPS & grammar.keywords
        self.kw_binary = KEYWORD_BINARY_OPS & grammar.keywords
        self.modifiers = MODIFIER_KEYWORDS & grammar.keywords
        self.had_error = False

    # ---- leaves -------------------------------------------------------
    def token_node(self, tok: Token) -> SyntaxNode:
        ttype = tok.type
        span = CharSpan(tok.start, tok.end)
        if ttype == IDENT:
            return SyntaxNode("identifier", True, span)
        if ttype == KEYWORD or ttype == OP:
            return SyntaxNode(tok.text, False, span)
        if ttype == ERROR:
            self.had_error = True
        return SyntaxNode(NAMED_TOKEN_KINDS[ttype], True, span)

    # ---- expression structuring --------------------------------------
    def sequence(self, atoms: list, stmt_level: bool, depth: int) -> list[SyntaxNode]:
        """Structure a newline-free atom run into expression nodes."""
        out: list[SyntaxNode] = []
        i = 0
        n = len(atoms)
        while i < n:
            a = atoms[i]
            if a.__class__ is Token and a.type == COMMENT:
                out.append(self.token_node(a))
                i += 1
                continue
            if (stmt_level and a.__class__ is Group and a.open.text == "{"
                    and self.g.block_style in ("braces", "end")):
                out.append(self.block_node(a, depth))
                i += 1
                continue
            node, j = self.expr(atoms, i, 0, depth)
            if node is not None and j > i:
                out.append(node)
                i = j
            else:
                out.append(self.atom_node(a, depth))
                i += 1
        return out

    def strip_and_sequence(self, atoms: list, stmt_level: bool,
                           depth: int) -> list[SyntaxNode]:
        atoms = [a for a in atoms
                 if a.__class__ is Group or a.type != NEWLINE]
        return self.sequence(atoms, stmt_level, depth)

    def expr(self, atoms: list, i: int, min_prec: int, depth: int):
        if depth > _MAX_DEPTH:
            return None, i
        left, i = self.unary(atoms, i, depth)
        if left is None:
            return None, i
        n = len(atoms)
        while i < n:
            a = atoms[i]
            if a.__class__ is not Token:
                break
            if a.type == OP and a.text in _ASSIGN_OPS:
                prec, next_min = _ASSIGN_PREC, _ASSIGN_PREC  # right-assoc
                kind = "assignment"
            elif a.type == OP and a.text in _BINARY_PREC:
                prec = _BINARY_PREC[a.text]
                next_min = prec + 1
                kind = "binary_expression"
            elif a.type == KEYWORD and a.text in self.kw_binary:
                prec, next_min = _KEYWORD_BINARY_PREC, _KEYWORD_BINARY_PREC + 1
                kind = "binary_expression"
            else:
                break
            if prec < min_prec:
                break
            rhs, k = self.expr(atoms, i + 1, next_min, depth + 1)
            if rhs is None:
                break
            left = _mk(kind, [left, self.token_node(a), rhs])
            i = k
        return left, i

    def unary(self, atoms: list, i: int, depth: int):
        n = len(atoms)
        if i >= n or depth > _MAX_DEPTH:
            return None, i
        a = atoms[i]
        if a.__class__ is Token and (
                (a.type == OP and a.text in _UNARY_OPS)
                or (a.type == KEYWORD and a.text in self.kw_prefix)):
            operand, j = self.unary(atoms, i + 1, depth + 1)
            if operand is None:
                return None, i
            node = _mk("unary_expression", [self.token_node(a), operand])
            return self.postfix(node, atoms, j, depth)

        if a.__class__ is Group:
            node = self.atom_node(a, depth)
        elif a.type in _OPERAND_TOKEN_TYPES:
            node = self.token_node(a)
        elif a.type == KEYWORD and a.text in self.kw_operands:
            node = self.token_node(a)
        else:
            return None, i
        return self.postfix(node, atoms, i + 1, depth)

    def postfix(self, node: SyntaxNode, atoms: list, i: int, depth: int):
        n = len(atoms)
        while i < n:
            a = atoms[i]
            if a.__class__ is Group:
                if a.open.text == "(":
                    args = self.group_node(a, "argument_list", depth)
                    node = _mk("call_expression", [node, args])
                    i += 1
                    continue
                if a.open.text == "[":
                    args = self.group_node(a, "subscript_arguments", depth)
                    node = _mk("subscript_expression", [node, args])
                    i += 1
                    continue
                break
            if a.type == OP and a.text in _MEMBER_OPS:
                k = i + 1
                if k < n and atoms[k].__class__ is Token and \
                        atoms[k].type in (IDENT, KEYWORD, NUMBER):
                    node = _mk("member_expression",
                               [node, self.token_node(a),
                                self.token_node(atoms[k])])
                    i = k + 1
                    continue
                break
            if a.type == OP and a.text in ("++", "--"):
                node = _mk("update_expression", [node, self.token_node(a)])
                i += 1
                continue
            break
        return node, i

    def atom_node(self, atom, depth: int) -> SyntaxNode:
        if isinstance(atom, Token):
            return self.token_node(atom)
        open_ch = atom.open.text
        if open_ch == "(":
            return self.group_node(atom, "parenthesized_expression", depth)
        if open_ch == "[":
            return self.group_node(atom, "array", depth)
        if self.g.block_style == "braces" and self._looks_like_block(atom):
            return self.block_node(atom, depth)
        return self.group_node(atom, "object", depth)

    def _looks_like_block(self, group: Group) -> bool:
        first = _next_significant(group.atoms, 0)
        if isinstance(first, Token) and first.type == KEYWORD and \
                first.text in self.g.statement_kinds and \
                first.text not in self.kw_operands:
            return True
        return any(_is_op(a, ";") for a in group.atoms)

    def group_node(self, group: Group, kind: str, depth: int) -> SyntaxNode:
        children = [self.token_node(group.open)]
        if depth > _MAX_DEPTH:
            # pathological nesting: keep flat opaque children, no recursion
            for a in group.atoms:
                if a.__class__ is Group:
                    if a.close is None:
                        self.had_error = True
                    children.append(SyntaxNode(
                        "parenthesized_expression", True,
                        CharSpan(a.open.start, _atom_end(a))))
                elif a.type != NEWLINE:
                    children.append(self.token_node(a))
        else:
            children.extend(self.strip_and_sequence(group.atoms, False,
                                                    depth + 1))
        if group.close is not None:
            children.append(self.token_node(group.close))
            return _mk(kind, children)
        self.had_error = True
        return _mk("ERROR", children)

    # ---- statements ---------------------------------------------------
    def block_node(self, group: Group, depth: int) -> SyntaxNode:
        children = [self.token_node(group.open)]
        children.extend(self.statements(group.atoms, depth + 1))
        if group.close is not None:
            children.append(self.token_node(group.close))
            return _mk("block", children)
        self.had_error = True
        return _mk("ERROR", children)

    def statements(self, atoms: list, depth: int) -> list[SyntaxNode]:
        out: list[SyntaxNode] = []
        for stmt_atoms in self._split_statements(atoms):
            out.append(self.statement_node(stmt_atoms, depth))
        return out

    def _split_statements(self, atoms: list):
        cur: list = []
        n = len(atoms)
        i = 0
        while i < n:
            a = atoms[i]
            if _is_newline(a):
                if cur and self.g.newline_terminates and \
                        self._can_end(cur) and not self._continues(atoms, i + 1):
                    yield cur
                    cur = []
                i += 1
                continue
            if isinstance(a, Token) and a.type == COMMENT and not cur:
                yield [a]
                i += 1
                continue
            cur.append(a)
            i += 1
            if _is_op(a, ";"):
                yield cur
                cur = []
            elif isinstance(a, Token) and a.type == PREPROC:
                yield cur  # directives are line-scoped
                cur = []
            elif isinstance(a, Group) and a.open.text == "{" and \
                    self.g.block_style == "braces":
                nxt = _next_significant(atoms, i)
                ends = nxt is None or not (
                    (isinstance(nxt, Token) and nxt.type == OP)
                    or (isinstance(nxt, Token) and nxt.type == KEYWORD
                        and nxt.text in CONTINUATION_KEYWORDS))
                if ends:
                    yield cur
                    cur = []
        if cur:
            yield cur

    def _can_end(self, cur: list) -> bool:
        for a in reversed(cur):
            if isinstance(a, Token) and a.type == COMMENT:
                continue
            if isinstance(a, Group):
                return True
            if a.type in (IDENT, NUMBER) or a.type in NAMED_TOKEN_KINDS:
                return True
            if a.type == KEYWORD:
                return a.text in _STMT_KW_OPERANDS
            if a.type == OP:
                return a.text in ("++", "--")
            return False
        return False

    def _continues(self, atoms: list, i: int) -> bool:
        nxt = _next_significant(atoms, i)
        return (isinstance(nxt, Token) and nxt.type == OP
                and nxt.text in _NEWLINE_CONTINUATION_OPS)

    def classify(self, atoms: list) -> str:
        i = 0
        n = len(atoms)
        while i < n and isinstance(atoms[i], Token) and \
                atoms[i].type in (COMMENT, NEWLINE):
            i += 1
        if i < n and _is_op(atoms[i], "@"):
            return "decorator"
        while i < n and isinstance(atoms[i], Token) and \
                atoms[i].type == KEYWORD and atoms[i].text in self.modifiers:
            i += 1
        if i < n and isinstance(atoms[i], Token) and atoms[i].type == KEYWORD:
            word = atoms[i].text
            kind = self.g.statement_kinds.get(word)
            if kind is not None:
                return kind
            if word not in self.kw_operands and word not in self.kw_prefix \
                    and word not in self.kw_binary:
                return "declaration"
        last = None
        for a in reversed(atoms):
            if not (_is_newline(a) or (isinstance(a, Token) and a.type == COMMENT)):
                last = a
                break
        if isinstance(last, Group) and last.open.text == "{" and \
                self.g.block_style == "braces":
            return "declaration"
        return "expression_statement"

    def statement_node(self, atoms: list, depth: int) -> SyntaxNode:
        if len(atoms) == 1 and isinstance(atoms[0], Token) and \
                atoms[0].type in (COMMENT, PREPROC):
            return self.token_node(atoms[0])
        kind = self.classify(atoms)
        children = self.sequence(atoms, True, depth)
        return _mk(kind, children)


class _IndentBuilder(_Builder):
    """Python-style: blocks from indentation of logical lines.

    Frames are (indent, children, block, owner); closing a frame freezes the
    block's hull span and extends its owner statement to cover it, so no
    global span-repair pass is needed.
    """

    def build(self, atoms: list, text: str) -> list[SyntaxNode]:
        lines = self._logical_lines(atoms, text)
        root_children: list[SyntaxNode] = []
        stack = [("", root_children, None, None)]

        def pop_frame():
            _indent, _children, block, owner = stack.pop()
            block.span = CharSpan(block.children[0].span[0],
                                  block.children[-1].span[1])
            if owner is not None:
                owner.span = CharSpan(owner.span[0], block.span[1])

        for indent, line_atoms in lines:
            if all(isinstance(a, Token) and a.type == COMMENT for a in line_atoms):
                for a in line_atoms:
                    stack[-1][1].append(self.token_node(a))
                continue
            stmt = self.statement_node(line_atoms, len(stack))
            top_indent, top_children = stack[-1][0], stack[-1][1]
            if indent == top_indent:
                top_children.append(stmt)
                continue
            if indent.startswith(top_indent) and len(indent) > len(top_indent):
                stack.append(self._open_block(indent, top_children, stmt))
                continue
            # dedent: pop to a matching level
            while len(stack) > 1 and len(indent) < len(stack[-1][0]):
                pop_frame()
            top_indent, top_children = stack[-1][0], stack[-1][1]
            if indent == top_indent:
                top_children.append(stmt)
            elif indent.startswith(top_indent):
                stack.append(self._open_block(indent, top_children, stmt))
            else:
                self.had_error = True
                top_children.append(_mk("ERROR", [stmt]))
        while len(stack) > 1:
            pop_frame()
        return root_children

    def _open_block(self, indent: str, siblings: list[SyntaxNode],
                    first_stmt: SyntaxNode):
        """Start a nested block frame.

        Comments sitting between the block header and its first statement
        move inside the block so sibling spans stay disjoint and ordered.
        """
        leading: list[SyntaxNode] = []
        while siblings and siblings[-1].kind == "comment":
            leading.insert(0, siblings.pop())
        block = _mk("block", leading + [first_stmt])
        if siblings and siblings[-1].children:
            owner = siblings[-1]
            owner.children.append(block)
        else:
            # no structural statement to own the block (bad indentation)
            block.kind = "ERROR"
            self.had_error = True
            siblings.append(block)
            owner = None
        return (indent, block.children, block, owner)

    def _logical_lines(self, atoms: list, text: str):
        lines = []
        cur: list = []
        for a in atoms:
            if _is_newline(a):
                if cur:
                    lines.append(cur)
                    cur = []
            else:
                cur.append(a)
        if cur:
            lines.append(cur)
        out = []
        for line_atoms in lines:
            first = line_atoms[0]
            start = first.start if isinstance(first, Token) else first.open.start
            begin = text.rfind("\n", 0, start) + 1
            indent = text[begin:start]
            if indent.strip(" \t"):
                indent = ""  # mid-line start after a multiline token
            out.append((indent, line_atoms))
        return out


class _EndBlockBuilder(_Builder):
    """Ruby-style: blocks bracketed by opener keywords and `end`."""

    def build(self, atoms: list) -> list[SyntaxNode]:
        root_children: list[SyntaxNode] = []
        # stack of (owner_statement, block_node)
        stack: list[tuple[SyntaxNode, SyntaxNode]] = []

        def close_frame(trailer: list[SyntaxNode]) -> None:
            owner, block = stack.pop()
            if block.children:
                block.span = CharSpan(block.children[0].span[0],
                                      block.children[-1].span[1])
            else:
                owner.children.remove(block)
            owner.children.extend(trailer)
            owner.span = CharSpan(owner.span[0], owner.children[-1].span[1])

        for stmt_atoms in self._split_statements(atoms):
            first = _next_significant(stmt_atoms, 0)
            if isinstance(first, Token) and first.type == KEYWORD and \
                    first.text == "end":
                nodes = self.sequence(stmt_atoms, True, len(stack))
                if stack:
                    close_frame(nodes)
                else:
                    self.had_error = True
                    root_children.append(_mk("ERROR", nodes))
                continue
            stmt = self.statement_node(stmt_atoms, len(stack))
            (stack[-1][1].children if stack else root_children).append(stmt)
            if self._opens_block(stmt_atoms):
                block = SyntaxNode("block", True, stmt.span, [])
                stmt.children.append(block)
                stack.append((stmt, block))
        while stack:
            self.had_error = True
            stack[-1][0].kind = "ERROR"
            close_frame([])
        return root_children

    def _opens_block(self, atoms: list) -> bool:
        first = _next_significant(atoms, 0)
        if isinstance(first, Token) and first.type == KEYWORD and \
                first.text in self.g.block_openers and first.text != "do":
            return True
        return any(isinstance(a, Token) and a.type == KEYWORD and
                   a.text == "do" for a in atoms)

    def _can_end(self, cur: list) -> bool:
        for a in reversed(cur):
            if isinstance(a, Token) and a.type == COMMENT:
                continue
            if isinstance(a, Token) and a.type == OP:
                return a.text not in _RUBY_CONTINUE_OPS
            if isinstance(a, Token) and a.type == KEYWORD:
                return a.text not in ("and", "or", "not", "then", "in", "do")
            return True
        return False


_NON_ASCII_RE = __import__("re").compile(r"[^\x00-\x7f]")


def _cp_to_byte_map(text: str, tokens: list[Token]) -> tuple[dict[int, int], int]:
    """Byte offsets for every token boundary past the pure-ASCII prefix.

    Returns (bmap, ascii_limit): offsets below ascii_limit map to themselves.
    """
    first = _NON_ASCII_RE.search(text)
    limit = first.start() if first else len(text)
    bmap: dict[int, int] = {}
    prev_cp = limit
    prev_b = limit
    for tok in tokens:
        off = tok.end
        if off <= limit:
            continue
        start = tok.start
        if start > prev_cp:
            prev_b += len(text[prev_cp:start].encode("utf-8"))
            prev_cp = start
            bmap[start] = prev_b
        elif start >= limit and start not in bmap:
            bmap[start] = prev_b
        if off > prev_cp:
            prev_b += len(text[prev_cp:off].encode("utf-8"))
            prev_cp = off
            bmap[off] = prev_b
    return bmap, limit


def build_tree(doc: SourceDocument, grammar: Grammar) -> SyntaxTree:
    text = doc.content
    tokens, lex_error = lex(text, grammar)
    atoms = _group_brackets(tokens)

    if grammar.block_style == "indent":
        builder = _IndentBuilder(grammar)
        children = builder.build(atoms, text)
    elif grammar.block_style == "end":
        builder = _EndBlockBuilder(grammar)
        children = builder.build(atoms)
    else:
        builder = _Builder(grammar)
        children = builder.statements(atoms, 0)

    root = SyntaxNode(grammar.root_kind, True, CharSpan(0, len(text)), children)
    if not doc._is_ascii:
        bmap, limit = _cp_to_byte_map(text, tokens)
        stack = list(root.children)
        while stack:
            node = stack.pop()
            s = node.span
            if s[1] > limit:
                node.span = CharSpan(s[0] if s[0] <= limit else bmap[s[0]],
                                     bmap[s[1]])
                stack.extend(node.children)
        root.span = CharSpan(0, doc.byte_len)
    return SyntaxTree(root, builder.had_error or lex_error)
