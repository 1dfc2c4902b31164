"""Syntax trees over a small grammar subset, with an opaque fallback.

Covered: function definitions (and Java classes), assignments, if / while / for,
return, calls, attribute and subscript access, unary / binary / comparison
expressions, literals, tuples / lists / dicts, blocks. Any statement the parser
cannot handle becomes an ``opaque_stmt`` leaf spanning its tokens.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

from .lexer import DEDENT, IDENTIFIER, INDENT, KEYWORD, LITERAL, NEWLINE, CodeToken

OPAQUE = "opaque_stmt"
# node kinds whose operator is part of their identity in subtree matching
OP_KINDS = frozenset({"BinOp", "UnaryOp", "BoolOp", "Compare", "AugAssign"})


@dataclass(frozen=True)
class AstNode:
    kind: str
    children: tuple["AstNode", ...] = ()
    span: tuple[int, int] = (0, 0)
    value: str | None = None
    pos: int | None = None   # token index of the identifying token (names, params)

    @property
    def label(self) -> str:
        if self.kind in OP_KINDS and self.value is not None:
            return f"{self.kind}:{self.value}"
        return self.kind

    def walk(self) -> Iterator["AstNode"]:
        yield self
        for child in self.children:
            yield from child.walk()

    def sexp(self) -> str:
        """Shape of the tree with names and literal values dropped."""
        if not self.children:
            return self.label
        return f"({self.label} {' '.join(c.sexp() for c in self.children)})"

    def __repr__(self) -> str:
        inner = ", ".join(repr(c) for c in self.children)
        return f"{self.label}({inner})"


class _Fail(Exception):
    pass


class _Parser:
    def __init__(self, tokens: Sequence[CodeToken]):
        self.toks = list(tokens)
        self.i = 0

    # -- token helpers ------------------------------------------------------
    def peek(self, k: int = 0) -> CodeToken | None:
        j = self.i + k
        return self.toks[j] if j < len(self.toks) else None

    def text(self, k: int = 0) -> str | None:
        tok = self.peek(k)
        return tok.text if tok is not None else None

    def at(self, *texts: str) -> bool:
        return self.text() in texts

    def is_kind(self, kind: str, k: int = 0) -> bool:
        tok = self.peek(k)
        return tok is not None and tok.kind == kind

    def expect(self, text: str) -> int:
        if self.text() != text:
            raise _Fail(f"expected {text!r}, got {self.text()!r}")
        self.i += 1
        return self.i - 1

    def accept(self, text: str) -> bool:
        if self.text() == text:
            self.i += 1
            return True
        return False

    def node(self, kind: str, children: Sequence[AstNode], start: int, end: int | None = None,
             value: str | None = None, pos: int | None = None) -> AstNode:
        return AstNode(kind, tuple(children), (start, self.i if end is None else end), value, pos)

    def name_leaf(self) -> AstNode:
        if not self.is_kind(IDENTIFIER):
            raise _Fail("expected identifier")
        tok = self.peek()
        self.i += 1
        return AstNode("Name", (), (self.i - 1, self.i), tok.text, self.i - 1)

    # -- binary helper --------------------------------------------------------
    def binary_level(self, levels, idx, unary):
        if idx == len(levels):
            return unary()
        kind, ops = levels[idx]
        start = self.i
        left = self.binary_level(levels, idx + 1, unary)
        while True:
            op = self.match_op(ops)
            if op is None:
                return left
            right = self.binary_level(levels, idx + 1, unary)
            left = AstNode(kind, (left, right), (start, self.i), op)

    def match_op(self, ops) -> str | None:
        t = self.text()
        if t in ops:
            self.i += 1
            return t
        return None


class PythonParser(_Parser):
    _AUG = frozenset({"+=", "-=", "*=", "/=", "//=", "%=", "**=", ">>=", "<<=", "&=", "|=", "^=", "@="})
    _CMP = ("<", ">", "==", ">=", "<=", "!=", "in", "is")
    _LEVELS = [
        ("BinOp", ("|",)),
        ("BinOp", ("^",)),
        ("BinOp", ("&",)),
        ("BinOp", ("<<", ">>")),
        ("BinOp", ("+", "-")),
        ("BinOp", ("*", "/", "//", "%", "@")),
    ]

    def parse(self) -> AstNode:
        body = []
        while self.peek() is not None:
            if self.accept(NEWLINE):
                continue
            if self.at(INDENT, DEDENT):
                # stray layout can only come from an opaque region; absorb it
                body.append(self.opaque())
                continue
            body.extend(self.statement_line())
        return AstNode("Module", tuple(body), (0, len(self.toks)))

    # -- statements -----------------------------------------------------------
    def statement_line(self) -> list[AstNode]:
        start = self.i
        try:
            if self.at("def", "if", "while", "for"):
                return [self.compound()]
            stmts = [self.simple()]
            while self.accept(";"):
                if self.peek() is None or self.at(NEWLINE, DEDENT):
                    break
                stmts.append(self.simple())
            if not (self.peek() is None or self.at(NEWLINE, DEDENT)):
                raise _Fail("trailing tokens")
            return stmts
        except _Fail:
            self.i = start
            return [self.opaque()]

    def opaque(self) -> AstNode:
        start = self.i
        depth = 0
        decorated = self.text() == "@"
        while self.peek() is not None:
            t = self.text()
            if t == INDENT:
                depth += 1
            elif t == DEDENT:
                if depth == 0:
                    break
                depth -= 1
                if depth == 0 and self.text(1) != NEWLINE:
                    self.i += 1
                    break
            elif t == NEWLINE and depth == 0:
                # a decorator takes the definition it decorates along with it
                if self.text(1) == INDENT or decorated and self.text(1) in ("@", "def", "class", "async"):
                    self.i += 1
                    continue
                break
            self.i += 1
        if self.i == start:
            self.i += 1
        return AstNode(OPAQUE, (), (start, self.i))

    def suite(self) -> AstNode:
        start = self.i
        if self.accept(NEWLINE):
            self.expect(INDENT)
            body = []
            while not self.at(DEDENT):
                if self.peek() is None:
                    raise _Fail("unterminated block")
                if self.accept(NEWLINE):
                    continue
                body.extend(self.statement_line())
            self.expect(DEDENT)
            return self.node("Block", body, start)
        stmts = [self.simple()]
        while self.accept(";"):
            if self.peek() is None or self.at(NEWLINE, DEDENT):
                break
            stmts.append(self.simple())
        return self.node("Block", stmts, start)

    def compound(self) -> AstNode:
        start = self.i
        kw = self.text()
        self.i += 1
        if kw == "def":
            name = self.name_leaf()
            params = self.params()
            if self.accept("->"):
                self.test()
            self.expect(":")
            return self.node("FunctionDef", [name, params, self.suite()], start, value=name.value)
        if kw == "if":
            return self.if_rest(start)
        if kw == "while":
            test = self.test()
            self.expect(":")
            body = self.suite()
            if self.at_clause("else"):
                raise _Fail("while-else")
            return self.node("While", [test, body], start)
        target = self.target_list()
        self.expect("in")
        it = self.expr_list()
        self.expect(":")
        body = self.suite()
        if self.at_clause("else"):
            raise _Fail("for-else")
        return self.node("For", [target, it, body], start)

    def at_clause(self, kw: str) -> bool:
        # a following clause keyword sits after the NEWLINE that closed the block
        return self.text() == NEWLINE and self.text(1) == kw or self.text() == kw

    def if_rest(self, start: int) -> AstNode:
        test = self.test()
        self.expect(":")
        body = self.suite()
        children = [test, body]
        if self.at_clause("elif"):
            self.accept(NEWLINE)
            elif_start = self.i
            self.i += 1
            children.append(self.if_rest(elif_start))
        elif self.at_clause("else"):
            self.accept(NEWLINE)
            self.i += 1
            self.expect(":")
            children.append(self.suite())
        return self.node("If", children, start)

    def params(self) -> AstNode:
        start = self.expect("(")
        items = []
        while not self.at(")"):
            p_start = self.i
            if self.at("*", "**"):
                self.i += 1
                if self.at(",", ")"):
                    items.append(self.node("StarMarker", [], p_start))
                else:
                    nm = self.name_leaf()
                    items.append(self.node("StarParam", [], p_start, value=nm.value, pos=nm.pos))
            elif self.at("/"):
                self.i += 1
                items.append(self.node("StarMarker", [], p_start))
            else:
                nm = self.name_leaf()
                kids = []
                if self.accept(":"):
                    self.test()
                if self.accept("="):
                    kids.append(self.test())
                items.append(self.node("Param", kids, p_start, value=nm.value, pos=nm.pos))
            if not self.accept(","):
                break
        self.expect(")")
        return self.node("Params", items, start)

    def simple(self) -> AstNode:
        start = self.i
        t = self.text()
        if t in ("pass", "break", "continue"):
            self.i += 1
            return self.node(t.capitalize(), [], start)
        if t == "return":
            self.i += 1
            kids = [] if self.peek() is None or self.at(NEWLINE, DEDENT, ";") else [self.expr_list()]
            return self.node("Return", kids, start)
        first = self.expr_list()
        if self.at("="):
            parts = [first]
            while self.accept("="):
                parts.append(self.expr_list())
            return self.node("Assign", parts, start)
        if self.text() in self._AUG:
            op = self.text()
            self.i += 1
            value = self.expr_list()
            return self.node("AugAssign", [first, value], start, value=op)
        return self.node("ExprStmt", [first], start)

    # -- expressions ----------------------------------------------------------
    def target_list(self) -> AstNode:
        start = self.i
        items = [self.binary_level(self._LEVELS, 0, self.factor)]
        trailing = False
        while self.accept(","):
            trailing = True
            if self.at("in", "="):
                break
            items.append(self.binary_level(self._LEVELS, 0, self.factor))
            trailing = False
        if len(items) == 1 and not trailing:
            return items[0]
        return self.node("Tuple", items, start)

    def expr_list(self) -> AstNode:
        start = self.i
        items = [self.test()]
        trailing = False
        while self.accept(","):
            trailing = True
            if self.peek() is None or self.at(NEWLINE, DEDENT, ";", "=", ")", ":") or self.text() in self._AUG:
                break
            items.append(self.test())
            trailing = False
        if len(items) == 1 and not trailing:
            return items[0]
        return self.node("Tuple", items, start)

    def test(self) -> AstNode:
        if self.at("lambda", "yield", "await"):
            raise _Fail("unsupported expression")
        start = self.i
        body = self.or_test()
        if self.accept("if"):
            cond = self.or_test()
            self.expect("else")
            orelse = self.test()
            return self.node("IfExp", [body, cond, orelse], start)
        if self.at(":="):
            raise _Fail("walrus")
        return body

    def or_test(self) -> AstNode:
        start = self.i
        left = self.and_test()
        while self.accept("or"):
            right = self.and_test()
            left = AstNode("BoolOp", (left, right), (start, self.i), "or")
        return left

    def and_test(self) -> AstNode:
        start = self.i
        left = self.not_test()
        while self.accept("and"):
            right = self.not_test()
            left = AstNode("BoolOp", (left, right), (start, self.i), "and")
        return left

    def not_test(self) -> AstNode:
        start = self.i
        if self.accept("not"):
            operand = self.not_test()
            return self.node("UnaryOp", [operand], start, value="not")
        return self.comparison()

    def comparison(self) -> AstNode:
        start = self.i
        left = self.binary_level(self._LEVELS, 0, self.factor)
        while True:
            t = self.text()
            if t == "not" and self.text(1) == "in":
                self.i += 2
                op = "not in"
            elif t == "is" and self.text(1) == "not":
                self.i += 2
                op = "is not"
            elif t in self._CMP:
                self.i += 1
                op = t
            else:
                return left
            right = self.binary_level(self._LEVELS, 0, self.factor)
            left = AstNode("Compare", (left, right), (start, self.i), op)

    def factor(self) -> AstNode:
        start = self.i
        if self.at("+", "-", "~"):
            op = self.text()
            self.i += 1
            operand = self.factor()
            return self.node("UnaryOp", [operand], start, value=op)
        base = self.primary()
        if self.accept("**"):
            exp = self.factor()
            return self.node("BinOp", [base, exp], start, value="**")
        return base

    def primary(self) -> AstNode:
        start = self.i
        node = self.atom()
        while True:
            if self.at("("):
                args = self.call_args()
                node = self.node("Call", [node, *args], start)
            elif self.at("["):
                self.i += 1
                index = self.subscript()
                self.expect("]")
                node = self.node("Subscript", [node, index], start)
            elif self.at("."):
                self.i += 1
                attr = self.name_leaf()
                node = self.node("Attribute", [node], start, value=attr.value)
            else:
                return node

    def call_args(self) -> list[AstNode]:
        self.expect("(")
        args = []
        while not self.at(")"):
            a_start = self.i
            if self.at("*", "**"):
                self.i += 1
                args.append(self.node("Starred", [self.test()], a_start))
            elif self.is_kind(IDENTIFIER) and self.text(1) == "=":
                nm = self.name_leaf()
                self.i += 1
                args.append(self.node("Keyword", [self.test()], a_start, value=nm.value))
            else:
                args.append(self.test())
                if self.at("for"):
                    raise _Fail("generator expression")
            if not self.accept(","):
                break
        self.expect(")")
        return args

    def subscript(self) -> AstNode:
        start = self.i
        items = [self.slice_item()]
        while self.accept(","):
            if self.at("]"):
                break
            items.append(self.slice_item())
        return items[0] if len(items) == 1 else self.node("Tuple", items, start)

    def slice_item(self) -> AstNode:
        start = self.i
        parts = []
        if not self.at(":"):
            parts.append(self.test())
            if not self.at(":"):
                return parts[0]
        while self.accept(":"):
            if not self.at(":", "]", ","):
                parts.append(self.test())
        return self.node("Slice", parts, start)

    def atom(self) -> AstNode:
        start = self.i
        tok = self.peek()
        if tok is None:
            raise _Fail("unexpected end of input")
        if tok.kind == IDENTIFIER:
            return self.name_leaf()
        if tok.kind == LITERAL:
            while self.is_kind(LITERAL) and self.text()[-1:] in "'\"":
                self.i += 1
            if self.i == start:
                self.i += 1
            return self.node("Literal", [], start, value=tok.text)
        if tok.text in ("True", "False", "None", "..."):
            self.i += 1
            return self.node("Literal", [], start, value=tok.text)
        if tok.text == "(":
            self.i += 1
            if self.accept(")"):
                return self.node("Tuple", [], start)
            inner = self.expr_list()
            if self.at("for"):
                raise _Fail("generator expression")
            self.expect(")")
            return inner
        if tok.text == "[":
            self.i += 1
            items = []
            while not self.at("]"):
                items.append(self.test())
                if self.at("for"):
                    raise _Fail("list comprehension")
                if not self.accept(","):
                    break
            self.expect("]")
            return self.node("List", items, start)
        if tok.text == "{":
            return self.brace_display(start)
        raise _Fail(f"unexpected token {tok.text!r}")

    def brace_display(self, start: int) -> AstNode:
        self.expect("{")
        items = []
        is_dict = None
        while not self.at("}"):
            key = self.test()
            if self.at("for"):
                raise _Fail("comprehension")
            if self.accept(":"):
                if is_dict is False:
                    raise _Fail("mixed display")
                is_dict = True
                items.extend([key, self.test()])
            else:
                if is_dict:
                    raise _Fail("mixed display")
                is_dict = False
                items.append(key)
            if not self.accept(","):
                break
        self.expect("}")
        return self.node("Set" if is_dict is False else "Dict", items, start)


class JavaParser(_Parser):
    _MODIFIERS = frozenset({"public", "private", "protected", "static", "final", "abstract", "synchronized",
                            "native", "transient", "volatile", "strictfp", "default"})
    _PRIMITIVES = frozenset({"int", "long", "short", "byte", "char", "boolean", "float", "double", "void"})
    _ASSIGN = frozenset({"=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<=", ">>=", ">>>="})
    _LEVELS = [
        ("BoolOp", ("||",)),
        ("BoolOp", ("&&",)),
        ("BinOp", ("|",)),
        ("BinOp", ("^",)),
        ("BinOp", ("&",)),
        ("Compare", ("==", "!=")),
        ("Compare", ("<", ">", "<=", ">=")),
        ("BinOp", ("<<", ">>", ">>>")),
        ("BinOp", ("+", "-")),
        ("BinOp", ("*", "/", "%")),
    ]

    def parse(self) -> AstNode:
        body = []
        while self.peek() is not None:
            body.append(self.member_or_statement())
        return AstNode("Module", tuple(body), (0, len(self.toks)))

    def opaque(self) -> AstNode:
        start = self.i
        depth = 0
        while self.peek() is not None:
            t = self.text()
            if t in ("(", "[", "{"):
                depth += 1
            elif t in (")", "]", "}"):
                if depth == 0:
                    break
                depth -= 1
                if depth == 0 and t == "}":
                    self.i += 1
                    if self.at(";"):
                        self.i += 1
                    break
            elif t == ";" and depth == 0:
                self.i += 1
                break
            self.i += 1
        if self.i == start:
            self.i += 1
        return AstNode(OPAQUE, (), (start, self.i))

    def member_or_statement(self) -> AstNode:
        start = self.i
        try:
            return self.member()
        except _Fail:
            self.i = start
        try:
            return self.statement()
        except _Fail:
            self.i = start
            return self.opaque()

    def skip_modifiers(self) -> None:
        while True:
            if self.text() in self._MODIFIERS:
                self.i += 1
            elif self.at("@") and self.is_kind(IDENTIFIER, 1) and self.text(1) != "interface":
                self.i += 2
                while self.at(".") and self.is_kind(IDENTIFIER, 1):
                    self.i += 2
                if self.at("("):
                    self.skip_balanced("(", ")")
            else:
                return

    def skip_balanced(self, open_: str, close: str) -> None:
        depth = 0
        while self.peek() is not None:
            t = self.text()
            self.i += 1
            if t == open_:
                depth += 1
            elif t == close:
                depth -= 1
                if depth == 0:
                    return
        raise _Fail("unbalanced")

    def member(self) -> AstNode:
        start = self.i
        self.skip_modifiers()
        if self.accept("class"):
            name = self.name_leaf()
            if self.at("<"):
                raise _Fail("generic class")
            if self.accept("extends"):
                self.type_()
            if self.accept("implements"):
                self.type_()
                while self.accept(","):
                    self.type_()
            b_start = self.expect("{")
            members = []
            while not self.at("}"):
                if self.peek() is None:
                    raise _Fail("unterminated class")
                members.append(self.class_member())
            self.expect("}")
            body = self.node("Block", members, b_start)
            return self.node("ClassDef", [name, body], start, value=name.value)
        if self.is_kind(IDENTIFIER) and self.text(1) == "(":
            # constructor
            name = self.name_leaf()
            return self.method_rest(start, name)
        self.type_()
        name = self.name_leaf()
        if not self.at("("):
            raise _Fail("not a method")
        return self.method_rest(start, name)

    def class_member(self) -> AstNode:
        start = self.i
        try:
            return self.member()
        except _Fail:
            self.i = start
        try:
            self.skip_modifiers()
            decl = self.var_decl(start)
            self.expect(";")
            return AstNode(decl.kind, decl.children, (start, self.i), decl.value, decl.pos)
        except _Fail:
            self.i = start
            return self.opaque()

    def method_rest(self, start: int, name: AstNode) -> AstNode:
        params = self.params()
        while self.at("[") and self.text(1) == "]":
            self.i += 2
        if self.accept("throws"):
            self.type_()
            while self.accept(","):
                self.type_()
        if self.accept(";"):
            return self.node("FunctionDef", [name, params], start, value=name.value)
        body = self.block()
        return self.node("FunctionDef", [name, params, body], start, value=name.value)

    def params(self) -> AstNode:
        start = self.expect("(")
        items = []
        while not self.at(")"):
            p_start = self.i
            self.skip_modifiers()
            self.type_()
            star = self.accept("...")
            nm = self.name_leaf()
            while self.at("[") and self.text(1) == "]":
                self.i += 2
            items.append(self.node("StarParam" if star else "Param", [], p_start, value=nm.value, pos=nm.pos))
            if not self.accept(","):
                break
        self.expect(")")
        return self.node("Params", items, start)

    # -- types ----------------------------------------------------------------
    def type_(self) -> AstNode:
        start = self.i
        if self.text() in self._PRIMITIVES:
            self.i += 1
        elif self.is_kind(IDENTIFIER):
            self.i += 1
            self.type_args()
            while self.at(".") and self.is_kind(IDENTIFIER, 1):
                self.i += 2
                self.type_args()
        else:
            raise _Fail("expected type")
        while self.at("[") and self.text(1) == "]":
            self.i += 2
        return self.node("Type", [], start)

    def type_args(self) -> None:
        if not self.at("<"):
            return
        # generic arguments may close with '>>' or '>>>' tokens
        depth = 0
        while self.peek() is not None:
            t = self.text()
            if t == "<":
                depth += 1
            elif t in (">", ">>", ">>>"):
                depth -= len(t)
                if depth <= 0:
                    self.i += 1
                    if depth < 0:
                        raise _Fail("unbalanced generics")
                    return
            elif not (self.is_kind(IDENTIFIER) or t in self._PRIMITIVES or t in (",", ".", "?", "[", "]",
                                                                                "extends", "super", "&")):
                raise _Fail("not a type argument list")
            self.i += 1
        raise _Fail("unterminated generics")

    # -- statements -----------------------------------------------------------
    def block(self) -> AstNode:
        start = self.expect("{")
        body = []
        while not self.at("}"):
            if self.peek() is None:
                raise _Fail("unterminated block")
            s = self.i
            try:
                body.append(self.statement())
            except _Fail:
                self.i = s
                body.append(self.opaque())
        self.expect("}")
        return self.node("Block", body, start)

    def statement(self) -> AstNode:
        start = self.i
        t = self.text()
        if t == "{":
            return self.block()
        if t == ";":
            self.i += 1
            return self.node("Pass", [], start)
        if t in ("break", "continue"):
            self.i += 1
            self.expect(";")
            return self.node(t.capitalize(), [], start)
        if t == "return":
            self.i += 1
            kids = [] if self.at(";") else [self.expression()]
            self.expect(";")
            return self.node("Return", kids, start)
        if t == "if":
            self.i += 1
            test = self.paren_expr()
            body = self.statement()
            kids = [test, body]
            if self.accept("else"):
                kids.append(self.statement())
            return self.node("If", kids, start)
        if t == "while":
            self.i += 1
            test = self.paren_expr()
            return self.node("While", [test, self.statement()], start)
        if t == "for":
            return self.for_stmt()
        if t in ("do", "switch", "try", "throw", "synchronized", "class", "interface", "enum",
                 "import", "package", "assert"):
            raise _Fail("unsupported statement")
        s = self.i
        try:
            if self.text() == "final":
                self.i += 1
            decl = self.var_decl(start)
            self.expect(";")
            return AstNode(decl.kind, decl.children, (start, self.i), decl.value, decl.pos)
        except _Fail:
            self.i = s
        expr = self.expression()
        self.expect(";")
        if expr.kind in ("Assign", "AugAssign"):
            return AstNode(expr.kind, expr.children, (start, self.i), expr.value, expr.pos)
        return self.node("ExprStmt", [expr], start)

    def var_decl(self, start: int) -> AstNode:
        typ = self.type_()
        if not self.is_kind(IDENTIFIER):
            raise _Fail("not a declaration")
        kids = [typ]
        while True:
            d_start = self.i
            nm = self.name_leaf()
            while self.at("[") and self.text(1) == "]":
                self.i += 2
            if self.accept("="):
                init = self.array_init() if self.at("{") else self.expression()
                kids.append(self.node("Assign", [nm, init], d_start))
            else:
                kids.append(nm)
            if not self.accept(","):
                break
        if not self.at(";", ":"):
            raise _Fail("bad declaration")
        return self.node("VarDecl", kids, start)

    def array_init(self) -> AstNode:
        start = self.expect("{")
        items = []
        while not self.at("}"):
            items.append(self.array_init() if self.at("{") else self.expression())
            if not self.accept(","):
                break
        self.expect("}")
        return self.node("List", items, start)

    def for_stmt(self) -> AstNode:
        start = self.expect("for")
        self.expect("(")
        s = self.i
        # for-each: for (Type name : expr)
        try:
            self.skip_modifiers()
            self.type_()
            target = self.name_leaf()
            self.expect(":")
            it = self.expression()
            self.expect(")")
            return self.node("For", [target, it, self.statement()], start)
        except _Fail:
            self.i = s
        kids = []
        parts = ""   # which of init / cond / update are present, e.g. "icu"
        init_start = self.i
        if not self.at(";"):
            try:
                decl = self.var_decl(init_start)
                kids.append(decl)
            except _Fail:
                self.i = init_start
                kids.append(self.expr_stmt_list(init_start))
            parts += "i"
        self.expect(";")
        if not self.at(";"):
            kids.append(self.expression())
            parts += "c"
        self.expect(";")
        if not self.at(")"):
            kids.append(self.expr_stmt_list(self.i))
            parts += "u"
        self.expect(")")
        kids.append(self.statement())
        return self.node("ForLoop", kids, start, value=parts)

    def expr_stmt_list(self, start: int) -> AstNode:
        exprs = [self.expression()]
        while self.accept(","):
            exprs.append(self.expression())
        return self.node("ExprStmt", exprs, start)

    def paren_expr(self) -> AstNode:
        self.expect("(")
        e = self.expression()
        self.expect(")")
        return e

    # -- expressions ----------------------------------------------------------
    def expression(self) -> AstNode:
        start = self.i
        left = self.ternary()
        t = self.text()
        if t in self._ASSIGN:
            self.i += 1
            right = self.expression()
            if t == "=":
                return self.node("Assign", [left, right], start)
            return self.node("AugAssign", [left, right], start, value=t)
        if t == "->":
            raise _Fail("lambda")
        return left

    def ternary(self) -> AstNode:
        start = self.i
        cond = self.binary_level(self._LEVELS, 0, self.unary)
        if self.accept("?"):
            a = self.ternary()
            self.expect(":")
            b = self.ternary()
            return self.node("IfExp", [cond, a, b], start)
        if self.at("instanceof"):
            raise _Fail("instanceof")
        return cond

    def unary(self) -> AstNode:
        start = self.i
        t = self.text()
        if t in ("+", "-", "!", "~", "++", "--"):
            self.i += 1
            operand = self.unary()
            return self.node("UnaryOp", [operand], start, value=t)
        if t == "(" and self.text(1) in self._PRIMITIVES:
            self.i += 1
            typ = self.type_()
            self.expect(")")
            return self.node("Cast", [typ, self.unary()], start)
        node = self.postfix()
        return node

    def postfix(self) -> AstNode:
        start = self.i
        node = self.primary()
        while True:
            if self.at("."):
                self.i += 1
                if self.at("<"):
                    raise _Fail("explicit generic call")
                attr = self.name_leaf()
                node = self.node("Attribute", [node], start, value=attr.value)
            elif self.at("("):
                node = self.node("Call", [node, *self.args()], start)
            elif self.at("["):
                self.i += 1
                idx = self.expression()
                self.expect("]")
                node = self.node("Subscript", [node, idx], start)
            elif self.at("++", "--"):
                op = self.text()
                self.i += 1
                node = self.node("UnaryOp", [node], start, value=op + "post")
            elif self.at("::"):
                raise _Fail("method reference")
            else:
                return node

    def args(self) -> list[AstNode]:
        self.expect("(")
        out = []
        while not self.at(")"):
            out.append(self.expression())
            if not self.accept(","):
                break
        self.expect(")")
        return out

    def primary(self) -> AstNode:
        start = self.i
        tok = self.peek()
        if tok is None:
            raise _Fail("unexpected end of input")
        if tok.kind == IDENTIFIER:
            return self.name_leaf()
        if tok.kind == LITERAL:
            self.i += 1
            return self.node("Literal", [], start, value=tok.text)
        if tok.text in ("this", "super"):
            self.i += 1
            return self.node("Name", [], start, value=tok.text, pos=start)
        if tok.text == "(":
            self.i += 1
            inner = self.expression()
            self.expect(")")
            return inner
        if tok.text == "new":
            self.i += 1
            typ_start = self.i
            if self.text() in self._PRIMITIVES:
                self.i += 1
            elif self.is_kind(IDENTIFIER):
                self.i += 1
                self.type_args()
                while self.at(".") and self.is_kind(IDENTIFIER, 1):
                    self.i += 2
                    self.type_args()
            else:
                raise _Fail("bad new")
            typ = self.node("Type", [], typ_start)
            if self.at("("):
                args = self.args()
                if self.at("{"):
                    raise _Fail("anonymous class")
                return self.node("New", [typ, *args], start)
            dims = []
            while self.accept("["):
                if self.accept("]"):
                    continue
                dims.append(self.expression())
                self.expect("]")
            if self.at("{"):
                dims.append(self.array_init())
            if not dims:
                raise _Fail("bad array creation")
            return self.node("NewArray", [typ, *dims], start)
        if tok.kind == KEYWORD and tok.text in self._PRIMITIVES and self.text(1) == ".":
            # int.class and friends
            raise _Fail("class literal")
        raise _Fail(f"unexpected token {tok.text!r}")


def parse_subset(tokens: Sequence[CodeToken], language: str) -> AstNode:
    """Build a tree over the supported subset; never fails on lexed input."""
    lang = language.lower()
    if lang == "python":
        return PythonParser(tokens).parse()
    if lang == "java":
        return JavaParser(tokens).parse()
    raise ValueError(f"unsupported language {language!r}")


def internal_subtrees(root: AstNode) -> list[str]:
    """Shape strings of every subtree rooted at a node with at least one child."""
    return [n.sexp() for n in root.walk() if n.children]


def check_spans(node: AstNode) -> None:
    """Raise AssertionError if child spans are unordered, overlapping or escape the parent."""
    lo, hi = node.span
    assert lo <= hi, node
    prev = lo
    for child in node.children:
        c_lo, c_hi = child.span
        assert prev <= c_lo <= c_hi <= hi, (node, child)
        prev = c_hi
        check_spans(child)
