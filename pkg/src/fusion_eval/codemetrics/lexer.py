"""Tokenizers for Python and Java source.

Comments and shebang lines are dropped. The Python tokenizer adds layout tokens
``<NEWLINE>``, ``<INDENT>`` and ``<DEDENT>`` (kind ``punctuation``). A ``<NEWLINE>``
separates two logical lines and never trails the last one; every open indent is
closed by a ``<DEDENT>`` at end of input.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import Iterable, Sequence

KEYWORD = "keyword"
IDENTIFIER = "identifier"
LITERAL = "literal"
OPERATOR = "operator"
PUNCTUATION = "punctuation"

NEWLINE = "<NEWLINE>"
INDENT = "<INDENT>"
DEDENT = "<DEDENT>"
LAYOUT = frozenset({NEWLINE, INDENT, DEDENT})

LANGUAGES = ("python", "java")


class LexError(ValueError):
    def __init__(self, message: str, line: int, col: int):
        self.line = line
        self.col = col
        super().__init__(f"{message} at line {line}, column {col}")


@dataclass(frozen=True)
class CodeToken:
    kind: str
    text: str
    line: int
    col: int

    def __post_init__(self) -> None:
        if not self.text:
            raise ValueError("token text must be non-empty")


@lru_cache(maxsize=None)
def keywords(language: str) -> frozenset[str]:
    """Reserved words for ``language``, read from the packaged keyword list."""
    language = _check_language(language)
    text = resources.files("fusion_eval.codemetrics").joinpath(f"keywords/{language}.txt").read_text("utf-8")
    return frozenset(line.strip() for line in text.splitlines() if line.strip() and not line.startswith("#"))


def _check_language(language: str) -> str:
    lang = language.lower()
    if lang not in LANGUAGES:
        raise ValueError(f"unsupported language {language!r}; expected one of {LANGUAGES}")
    return lang


def _ops_regex(ops: Iterable[str]) -> re.Pattern:
    ordered = sorted(set(ops), key=len, reverse=True)
    return re.compile("|".join(re.escape(o) for o in ordered))


_PY_OPERATORS = ["**=", "//=", ">>=", "<<=", "!=", "==", "<=", ">=", "->", ":=", "+=", "-=", "*=",
                 "/=", "%=", "&=", "|=", "^=", "@=", "**", "//", "<<", ">>",
                 "+", "-", "*", "/", "%", "@", "&", "|", "^", "~", "<", ">", "="]
_PY_PUNCT = ["...", "(", ")", "[", "]", "{", "}", ",", ":", ";", "."]
_JAVA_OPERATORS = [">>>=", "<<=", ">>=", ">>>", "->", "::", "++", "--", "&&", "||", "==", "!=", "<=",
                   ">=", "+=", "-=", "*=", "/=", "&=", "|=", "^=", "%=", "<<", ">>",
                   "=", ">", "<", "!", "~", "?", "+", "-", "*", "/", "&", "|", "^", "%"]
_JAVA_PUNCT = ["...", "(", ")", "{", "}", "[", "]", ";", ",", ".", "@", ":"]

_PY_SYMBOL = _ops_regex(_PY_OPERATORS + _PY_PUNCT)
_JAVA_SYMBOL = _ops_regex(_JAVA_OPERATORS + _JAVA_PUNCT)
_PY_OPSET = frozenset(_PY_OPERATORS)
_JAVA_OPSET = frozenset(_JAVA_OPERATORS)

_PY_NUMBER = re.compile(
    r"0[xX](?:_?[0-9a-fA-F])+|0[oO](?:_?[0-7])+|0[bB](?:_?[01])+"
    r"|(?:\d(?:_?\d)*(?:\.(?:\d(?:_?\d)*)?)?|\.\d(?:_?\d)*)(?:[eE][+-]?\d(?:_?\d)*)?[jJ]?"
)
_JAVA_NUMBER = re.compile(
    r"0[xX][0-9a-fA-F_]+[lL]?|0[bB][01_]+[lL]?"
    r"|(?:\d[\d_]*(?:\.[\d_]*)?|\.\d[\d_]*)(?:[eE][+-]?\d[\d_]*)?[fFdDlL]?"
)
_PY_IDENT = re.compile(r"[^\W\d]\w*")
_JAVA_IDENT = re.compile(r"[^\W\d][\w$]*|\$[\w$]*")
_PY_STRING_START = re.compile(r"(?i:rb|br|fr|rf|r|b|f|u)?('''|\"\"\"|'|\")")


class _Cursor:
    def __init__(self, src: str):
        self.src = src
        self.i = 0
        self.line = 1
        self.col = 1

    def advance(self, n: int) -> str:
        chunk = self.src[self.i:self.i + n]
        for ch in chunk:
            if ch == "\n":
                self.line += 1
                self.col = 1
            else:
                self.col += 1
        self.i += n
        return chunk

    def peek(self, n: int = 1) -> str:
        return self.src[self.i:self.i + n]

    @property
    def done(self) -> bool:
        return self.i >= len(self.src)


def _strip_shebang(src: str) -> str:
    if src.startswith("#!"):
        nl = src.find("\n")
        return "" if nl < 0 else src[nl:]
    return src


def _scan_quoted(cur: _Cursor, quote: str, *, multiline: bool, what: str) -> int:
    """Length of a quoted literal starting at cur.i (opening quote included)."""
    src = cur.src
    j = cur.i + len(quote)
    while j < len(src):
        ch = src[j]
        if ch == "\\":
            j += 2
            continue
        if src.startswith(quote, j):
            return j + len(quote) - cur.i
        if ch == "\n" and not multiline:
            break
        j += 1
    raise LexError(f"unterminated {what}", cur.line, cur.col)


def _tokenize_python(src: str) -> list[CodeToken]:
    kw = keywords("python")
    cur = _Cursor(_strip_shebang(src))
    out: list[CodeToken] = []
    indents = [0]
    depth = 0
    at_line_start = True

    while not cur.done:
        if at_line_start and depth == 0:
            # measure indentation; blank and comment-only lines do not count
            width = 0
            j = cur.i
            while j < len(cur.src) and cur.src[j] in " \t\f":
                width = (width // 8 + 1) * 8 if cur.src[j] == "\t" else (0 if cur.src[j] == "\f" else width + 1)
                j += 1
            rest = cur.src[j:j + 1]
            cur.advance(j - cur.i)
            if rest in ("", "\n", "\r", "#"):
                if rest == "#":
                    while not cur.done and cur.peek() != "\n":
                        cur.advance(1)
                if not cur.done:
                    cur.advance(1)
                continue
            if rest == "\\" and cur.src[j + 1:j + 2] == "\n":
                cur.advance(2)
                continue
            at_line_start = False
            if out:
                out.append(CodeToken(PUNCTUATION, NEWLINE, cur.line, 1))
            if width > indents[-1]:
                indents.append(width)
                out.append(CodeToken(PUNCTUATION, INDENT, cur.line, 1))
            else:
                while width < indents[-1]:
                    indents.pop()
                    out.append(CodeToken(PUNCTUATION, DEDENT, cur.line, 1))
                if width != indents[-1]:
                    raise LexError("unindent does not match any outer indentation level", cur.line, cur.col)
            continue

        ch = cur.peek()
        line, col = cur.line, cur.col
        if ch in " \t\f\r":
            cur.advance(1)
            continue
        if ch == "\n":
            cur.advance(1)
            if depth == 0:
                at_line_start = True
            continue
        if ch == "\\":
            nxt = cur.src[cur.i + 1:cur.i + 3]
            if nxt.startswith("\n") or nxt == "\r\n":
                cur.advance(1 + (2 if nxt == "\r\n" else 1))
                continue
            raise LexError("unexpected character '\\'", line, col)
        if ch == "#":
            while not cur.done and cur.peek() != "\n":
                cur.advance(1)
            continue

        m = _PY_STRING_START.match(cur.src, cur.i)
        if m:
            quote = m.group(1)
            start = cur.i
            cur.advance(m.start(1) - cur.i)
            n = _scan_quoted(cur, quote, multiline=len(quote) == 3, what="string literal")
            cur.advance(n)
            out.append(CodeToken(LITERAL, cur.src[start:cur.i], line, col))
            continue
        m = _PY_NUMBER.match(cur.src, cur.i)
        if m and (ch.isdigit() or (ch == "." and cur.src[cur.i + 1:cur.i + 2].isdigit())):
            out.append(CodeToken(LITERAL, cur.advance(m.end() - cur.i), line, col))
            continue
        m = _PY_IDENT.match(cur.src, cur.i)
        if m:
            text = cur.advance(m.end() - cur.i)
            out.append(CodeToken(KEYWORD if text in kw else IDENTIFIER, text, line, col))
            continue
        m = _PY_SYMBOL.match(cur.src, cur.i)
        if m:
            text = cur.advance(m.end() - cur.i)
            if text in "([{":
                depth += 1
            elif text in ")]}":
                depth = max(0, depth - 1)
            out.append(CodeToken(OPERATOR if text in _PY_OPSET else PUNCTUATION, text, line, col))
            continue
        raise LexError(f"unexpected character {ch!r}", line, col)

    for _ in indents[1:]:
        out.append(CodeToken(PUNCTUATION, DEDENT, cur.line, cur.col))
    return out


_JAVA_LITERAL_WORDS = frozenset({"true", "false", "null"})


def _tokenize_java(src: str) -> list[CodeToken]:
    kw = keywords("java")
    cur = _Cursor(_strip_shebang(src))
    out: list[CodeToken] = []
    while not cur.done:
        ch = cur.peek()
        line, col = cur.line, cur.col
        if ch.isspace():
            cur.advance(1)
            continue
        two = cur.peek(2)
        if two == "//":
            while not cur.done and cur.peek() != "\n":
                cur.advance(1)
            continue
        if two == "/*":
            end = cur.src.find("*/", cur.i + 2)
            if end < 0:
                raise LexError("unterminated block comment", line, col)
            cur.advance(end + 2 - cur.i)
            continue
        if cur.peek(3) == '"""':
            n = _scan_quoted(cur, '"""', multiline=True, what="text block")
            out.append(CodeToken(LITERAL, cur.advance(n), line, col))
            continue
        if ch == '"':
            n = _scan_quoted(cur, '"', multiline=False, what="string literal")
            out.append(CodeToken(LITERAL, cur.advance(n), line, col))
            continue
        if ch == "'":
            n = _scan_quoted(cur, "'", multiline=False, what="character literal")
            out.append(CodeToken(LITERAL, cur.advance(n), line, col))
            continue
        if ch.isdigit() or (ch == "." and cur.src[cur.i + 1:cur.i + 2].isdigit()):
            m = _JAVA_NUMBER.match(cur.src, cur.i)
            out.append(CodeToken(LITERAL, cur.advance(m.end() - cur.i), line, col))
            continue
        m = _JAVA_IDENT.match(cur.src, cur.i)
        if m:
            text = cur.advance(m.end() - cur.i)
            if text in _JAVA_LITERAL_WORDS:
                kind = LITERAL
            elif text in kw:
                kind = KEYWORD
            else:
                kind = IDENTIFIER
            out.append(CodeToken(kind, text, line, col))
            continue
        m = _JAVA_SYMBOL.match(cur.src, cur.i)
        if m:
            text = cur.advance(m.end() - cur.i)
            out.append(CodeToken(OPERATOR if text in _JAVA_OPSET else PUNCTUATION, text, line, col))
            continue
        raise LexError(f"unexpected character {ch!r}", line, col)
    return out


def tokenize(source: str, language: str) -> list[CodeToken]:
    language = _check_language(language)
    if language == "python":
        return _tokenize_python(source)
    return _tokenize_java(source)


def detokenize(tokens: Sequence[CodeToken], language: str) -> str:
    """Render tokens back to source with canonical spacing (one space, 4-space indents)."""
    language = _check_language(language)
    if language == "java":
        return " ".join(t.text for t in tokens)
    lines: list[str] = []
    level = 0
    current: list[str] = []
    line_level = 0
    for tok in tokens:
        if tok.text == NEWLINE:
            lines.append("    " * line_level + " ".join(current))
            current = []
        elif tok.text == INDENT:
            level += 1
        elif tok.text == DEDENT:
            level -= 1
        else:
            if not current:
                line_level = level
            current.append(tok.text)
    if current:
        lines.append("    " * line_level + " ".join(current))
    return "\n".join(lines)
